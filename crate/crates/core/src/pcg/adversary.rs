//! First-player policies for the pair clipping game, plus an exhaustive
//! game-tree check of the clip rule on small graphs.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{PcgState, PiMove};
use crate::graph::{VertexId, WorkGraph};

pub trait PcgAdversary {
    fn next_move(&mut self, s: &PcgState) -> PiMove;
}

#[derive(Debug, Clone)]
pub enum PcgPolicy {
    PassOnly,
    /// Uniform over absent edges, passing one time in ten.
    Random(ChaCha8Rng),
    /// Pushes the maximum degree up and joins high-degree vertices.
    Attacker(ChaCha8Rng),
}

impl PcgPolicy {
    pub fn random(seed: u64) -> Self {
        PcgPolicy::Random(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn attacker(seed: u64) -> Self {
        PcgPolicy::Attacker(ChaCha8Rng::seed_from_u64(seed))
    }
}

fn non_edges(g: &WorkGraph) -> Vec<(VertexId, VertexId)> {
    g.legal_clips().collect()
}

fn random_non_edge(g: &WorkGraph, rng: &mut ChaCha8Rng) -> PiMove {
    let all = non_edges(g);
    if all.is_empty() {
        return PiMove::Pass;
    }
    let (u, v) = all[rng.random_range(0..all.len())];
    PiMove::add(u, v)
}

fn attack(g: &WorkGraph, rng: &mut ChaCha8Rng) -> PiMove {
    let delta = g.max_degree();
    let roll = rng.random_range(0..10u32);
    if roll < 5 {
        let hubs: Vec<_> = g.active().iter().filter(|&v| g.degree_unchecked(v) == delta).collect();
        let hub = hubs[rng.random_range(0..hubs.len())];
        let targets: Vec<_> = g
            .active()
            .iter()
            .filter(|&w| w != hub && !g.has_edge(hub, w))
            .collect();
        if !targets.is_empty() {
            return PiMove::add(hub, targets[rng.random_range(0..targets.len())]);
        }
    } else if roll < 8 {
        let best = non_edges(g)
            .into_iter()
            .max_by_key(|&(u, v)| (g.degree_unchecked(u) + g.degree_unchecked(v), std::cmp::Reverse((u, v))));
        if let Some((u, v)) = best {
            return PiMove::add(u, v);
        }
    }
    random_non_edge(g, rng)
}

impl PcgAdversary for PcgPolicy {
    fn next_move(&mut self, s: &PcgState) -> PiMove {
        match self {
            PcgPolicy::PassOnly => PiMove::Pass,
            PcgPolicy::Random(rng) => {
                if rng.random_range(0..10u32) == 0 {
                    PiMove::Pass
                } else {
                    random_non_edge(s.graph(), rng)
                }
            }
            PcgPolicy::Attacker(rng) => attack(s.graph(), rng),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExhaustiveReport {
    /// Distinct round-start states examined.
    pub states: usize,
    /// First-player move sequence that beats the clip rule, if one exists.
    pub counterexample: Option<Vec<PiMove>>,
}

/// Memoised search over every first-player move sequence. The clip rule is
/// a function of the round-start graph and the first player's move, so the
/// outcome of a round-start state does not depend on how it was reached.
#[derive(Debug, Default)]
pub struct ExhaustiveChecker {
    memo: HashMap<(WorkGraph, usize, usize), bool>,
}

impl ExhaustiveChecker {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn states(&self) -> usize {
        self.memo.len()
    }

    /// `Ok(())` when the strategy wins against every first-player line.
    pub fn check(&mut self, start: &WorkGraph) -> Result<(), Vec<PiMove>> {
        let s = PcgState::new(start.clone());
        let mut line = Vec::new();
        if s.is_finished() {
            return if s.won() == Some(true) { Ok(()) } else { Err(line) };
        }
        if self.wins(&s, &mut line) {
            Ok(())
        } else {
            Err(line)
        }
    }

    fn wins(&mut self, s: &PcgState, line: &mut Vec<PiMove>) -> bool {
        let key = (s.graph().clone(), s.pii_moves_made(), s.initial_v());
        if let Some(&w) = self.memo.get(&key) {
            if w {
                return true;
            }
        }
        let mut moves = vec![PiMove::Pass];
        moves.extend(non_edges(s.graph()).into_iter().map(|(u, v)| PiMove::add(u, v)));
        for m in moves {
            line.push(m);
            let mut t = s.clone();
            let ok = t.apply_pi(m).is_ok()
                && !t.is_finished()
                && t.play_theorem5().is_ok()
                && match t.won() {
                    Some(won) => won,
                    None => self.wins(&t, line),
                };
            if !ok {
                self.memo.insert(key, false);
                return false;
            }
            line.pop();
        }
        self.memo.insert(key, true);
        true
    }
}

/// Run the exhaustive check from a single start graph.
pub fn exhaustive_check(start: &WorkGraph) -> ExhaustiveReport {
    let mut c = ExhaustiveChecker::new();
    let counterexample = c.check(start).err();
    ExhaustiveReport {
        states: c.states(),
        counterexample,
    }
}
