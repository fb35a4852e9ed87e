//! Batches of pair clipping games from random sparse starts.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::graph::{SparseProfile, WorkGraph};
use crate::pcg::{play_pcg, Branch, PcgPolicy, PcgTranscript};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PcgAdversaryKind {
    PassOnly,
    Random,
    Attacker,
}

impl PcgAdversaryKind {
    pub fn policy(self, seed: u64) -> PcgPolicy {
        match self {
            PcgAdversaryKind::PassOnly => PcgPolicy::PassOnly,
            PcgAdversaryKind::Random => PcgPolicy::random(seed),
            PcgAdversaryKind::Attacker => PcgPolicy::attacker(seed),
        }
    }
}

impl fmt::Display for PcgAdversaryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PcgAdversaryKind::PassOnly => "pass-only",
            PcgAdversaryKind::Random => "random",
            PcgAdversaryKind::Attacker => "attacker",
        })
    }
}

impl FromStr for PcgAdversaryKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "pass-only" => Ok(PcgAdversaryKind::PassOnly),
            "random" => Ok(PcgAdversaryKind::Random),
            "attacker" => Ok(PcgAdversaryKind::Attacker),
            _ => Err(format!("unknown clipping-game adversary {s:?}")),
        }
    }
}

/// A random `(f, g)`-sparse graph on `v` vertices. The edge count is uniform
/// up to the density limit; with `hub` one vertex first gets close to the
/// largest degree allowed, which pushes the clip rule onto its max-degree
/// branch.
pub fn random_fg_sparse(v: usize, rng: &mut ChaCha8Rng, hub: bool, profile: &SparseProfile) -> WorkGraph {
    let mut g = WorkGraph::empty(v);
    if v < 2 {
        return g;
    }
    let max_e = (0..=v * (v - 1) / 2).take_while(|&e| profile.average_ok(v, e)).last().unwrap_or(0);
    let max_deg = (v - 1) / 2;
    let target = rng.random_range(0..=max_e);
    let mut others: Vec<usize> = (0..v).collect();
    if hub && max_deg > 0 {
        let h = rng.random_range(0..v);
        others.retain(|&x| x != h);
        others.shuffle(rng);
        let want = rng.random_range(max_deg.saturating_sub(2).max(1)..=max_deg).min(target);
        for &w in others.iter().take(want) {
            g.add_edge(h, w).expect("fresh edge");
        }
    }
    let mut attempts = 0;
    while g.edge_count() < target && attempts < 50 * v {
        attempts += 1;
        let a = rng.random_range(0..v);
        let b = rng.random_range(0..v);
        if a == b || g.has_edge(a, b) || g.degree_unchecked(a) >= max_deg || g.degree_unchecked(b) >= max_deg {
            continue;
        }
        g.add_edge(a, b).expect("fresh edge");
    }
    debug_assert!(g.is_fg_sparse(profile));
    g
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PcgBatch {
    pub v: usize,
    pub starts: usize,
    pub seed: u64,
    pub adversaries: Vec<PcgAdversaryKind>,
    /// Every `hub_every`-th start is hub-heavy; 0 disables hubs.
    pub hub_every: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PcgSummary {
    pub games: usize,
    pub wins: usize,
    pub games_with_violations: usize,
    /// Clips made by each branch, indexed by branch number minus one.
    pub branch_counts: [usize; 5],
    pub failures: Vec<String>,
}

impl PcgSummary {
    fn absorb(&mut self, start: &WorkGraph, who: PcgAdversaryKind, seed: u64, t: &PcgTranscript) {
        self.games += 1;
        if t.won {
            self.wins += 1;
        }
        if !t.violations.is_empty() {
            self.games_with_violations += 1;
        }
        for r in &t.rounds {
            if let Some(b) = r.branch {
                self.branch_counts[b as usize - 1] += 1;
            }
        }
        if !t.won || !t.violations.is_empty() {
            self.failures.push(format!(
                "start {start} adversary {who}:{seed} won={} violations={:?}",
                t.won, t.violations
            ));
        }
    }

    pub fn clean(&self) -> bool {
        self.wins == self.games && self.games_with_violations == 0
    }

    pub fn branch_count(&self, b: Branch) -> usize {
        self.branch_counts[b as usize - 1]
    }
}

impl PcgBatch {
    /// Start graph `i` and the adversary seed that goes with it, both drawn
    /// from `seed + i`.
    pub fn start(&self, i: usize) -> (WorkGraph, u64) {
        let seed = self.seed.wrapping_add(i as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let hub = self.hub_every > 0 && i.is_multiple_of(self.hub_every);
        (random_fg_sparse(self.v, &mut rng, hub, &SparseProfile::STANDARD), seed)
    }
}

/// Run `starts` random starts against every adversary in the batch.
pub fn run_pcg_batch(batch: &PcgBatch, parallel: bool) -> Result<PcgSummary, HarnessError> {
    let one = |i: usize| -> Result<Vec<(WorkGraph, PcgAdversaryKind, u64, PcgTranscript)>, HarnessError> {
        let (start, seed) = batch.start(i);
        batch
            .adversaries
            .iter()
            .map(|&who| {
                let t = play_pcg(start.clone(), &mut who.policy(seed))?;
                Ok((start.clone(), who, seed, t))
            })
            .collect()
    };
    let results: Vec<_> = if parallel {
        (0..batch.starts).into_par_iter().map(one).collect::<Result<_, _>>()?
    } else {
        (0..batch.starts).map(one).collect::<Result<_, _>>()?
    };
    let mut summary = PcgSummary::default();
    for (start, who, seed, t) in results.iter().flatten() {
        summary.absorb(start, *who, *seed, t);
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_graphs_are_sparse() {
        let p = SparseProfile::STANDARD;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for v in [1, 2, 9, 10, 20, 40] {
            for hub in [false, true] {
                for _ in 0..50 {
                    assert!(random_fg_sparse(v, &mut rng, hub, &p).is_fg_sparse(&p));
                }
            }
        }
    }

    #[test]
    fn hub_starts_reach_max_degree_branch() {
        let batch = PcgBatch {
            v: 20,
            starts: 40,
            seed: 3,
            adversaries: vec![PcgAdversaryKind::Random, PcgAdversaryKind::Attacker],
            hub_every: 2,
        };
        let s = run_pcg_batch(&batch, true).unwrap();
        assert!(s.clean(), "{:?}", s.failures);
        assert_eq!(s.games, 80);
        assert!(s.branch_count(Branch::MaxDegree) > 0);
        assert!(s.branch_count(Branch::NicePair) > 0);
        assert_eq!(s, run_pcg_batch(&batch, false).unwrap());
    }
}
