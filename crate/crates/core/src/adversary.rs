//! Seeded first-player policies for the star avoidance game.
//!
//! A policy is written `name[:seed[:param=val,...]]`, for example
//! `random:42`, `degree-attacker:7` or `minimax:0:depth=3`. Moves are a pure
//! function of the policy, its seed and the game so far: the generator for
//! each move is ChaCha8 seeded with the policy seed and switched to a stream
//! numbered by the current ply.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::star::{Edge, PlayerId, StarState, Status};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AdversaryError {
    #[error("no unclaimed edge left")]
    NoMoves,
    #[error("replay script exhausted after {0} moves")]
    ScriptExhausted(usize),
    #[error("it is not the first player's turn")]
    NotOurTurn,
    #[error("bad policy spec: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    Random,
    SafeRandom,
    SAttacker,
    DegreeAttacker,
    Replay,
    Minimax,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 6] = [
        PolicyKind::Random,
        PolicyKind::SafeRandom,
        PolicyKind::SAttacker,
        PolicyKind::DegreeAttacker,
        PolicyKind::Replay,
        PolicyKind::Minimax,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Random => "random",
            PolicyKind::SafeRandom => "safe-random",
            PolicyKind::SAttacker => "s-attacker",
            PolicyKind::DegreeAttacker => "degree-attacker",
            PolicyKind::Replay => "replay",
            PolicyKind::Minimax => "minimax",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdversaryPolicy {
    pub kind: PolicyKind,
    pub seed: u64,
    pub params: BTreeMap<String, i64>,
    /// Moves for `replay`, in order.
    pub script: Vec<Edge>,
}

impl AdversaryPolicy {
    pub fn new(kind: PolicyKind, seed: u64) -> Self {
        Self {
            kind,
            seed,
            params: BTreeMap::new(),
            script: Vec::new(),
        }
    }

    pub fn replay(script: Vec<Edge>) -> Self {
        Self {
            script,
            ..Self::new(PolicyKind::Replay, 0)
        }
    }

    pub fn minimax(seed: u64, depth: usize) -> Self {
        let mut p = Self::new(PolicyKind::Minimax, seed);
        p.params.insert("depth".into(), depth as i64);
        p
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..self.clone() }
    }

    fn param(&self, name: &str, default: i64) -> i64 {
        self.params.get(name).copied().unwrap_or(default)
    }

    fn rng(&self, gs: &StarState) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(gs.history().len() as u64);
        rng
    }

    pub fn next_pi_move(&self, gs: &StarState) -> Result<Edge, AdversaryError> {
        if gs.status() != Status::Ongoing {
            return Err(AdversaryError::NoMoves);
        }
        if gs.to_move() != PlayerId::First {
            return Err(AdversaryError::NotOurTurn);
        }
        if gs.unclaimed_count() == 0 {
            return Err(AdversaryError::NoMoves);
        }
        let mut rng = self.rng(gs);
        let pick = |pool: &[Edge], rng: &mut ChaCha8Rng| *pool.choose(rng).expect("non-empty pool");
        let open = || gs.legal_moves().expect("ongoing game");
        let safe = || gs.safe_moves(PlayerId::First).expect("ongoing game");
        Ok(match self.kind {
            PolicyKind::Random => gs
                .nth_unclaimed(rng.random_range(0..gs.unclaimed_count()))
                .expect("index below the unclaimed count"),
            PolicyKind::SafeRandom => {
                let safe = safe();
                if safe.is_empty() {
                    pick(&open(), &mut rng)
                } else {
                    pick(&safe, &mut rng)
                }
            }
            PolicyKind::SAttacker => {
                let safe = safe();
                let low = (0..gs.n()).map(|v| gs.degree(PlayerId::Second, v)).min().unwrap_or(0);
                let inside = |e: &Edge| {
                    gs.degree(PlayerId::Second, e.u) == low && gs.degree(PlayerId::Second, e.v) == low
                };
                let safe_inside: Vec<Edge> = safe.iter().copied().filter(inside).collect();
                if !safe_inside.is_empty() {
                    pick(&safe_inside, &mut rng)
                } else if !safe.is_empty() {
                    pick(&safe, &mut rng)
                } else {
                    let open = open();
                    let open_inside: Vec<Edge> = open.iter().copied().filter(inside).collect();
                    let tier = if open_inside.is_empty() { &open } else { &open_inside };
                    pick(tier, &mut rng)
                }
            }
            PolicyKind::DegreeAttacker => {
                let mut pool = safe();
                if pool.is_empty() {
                    pool = open();
                }
                let score = |e: &Edge| gs.gamma_degree(e.u) + gs.gamma_degree(e.v);
                let best = pool.iter().map(score).max().expect("non-empty pool");
                let top: Vec<Edge> = pool.iter().copied().filter(|e| score(e) == best).collect();
                pick(&top, &mut rng)
            }
            PolicyKind::Replay => {
                let fresh = |e: &Edge| e.v < gs.n() && !gs.is_claimed(*e);
                let next = if self.script.is_empty() {
                    let id = self.param("pattern", 0);
                    pattern_edges(id, gs.n())
                        .ok_or_else(|| AdversaryError::Parse(format!("unknown replay pattern {id}")))?
                        .find(fresh)
                } else {
                    self.script.iter().copied().find(fresh)
                };
                next.ok_or(AdversaryError::ScriptExhausted(gs.moves_made(PlayerId::First)))?
            }
            PolicyKind::Minimax => {
                let open = open();
                let depth = self.param("depth", 2).max(1) as usize;
                let mut best = (i8::MIN, open[0]);
                for &e in &open {
                    let v = -negamax(gs, e, depth - 1);
                    if v > best.0 {
                        best = (v, e);
                    }
                }
                best.1
            }
        })
    }
}

/// Number of built-in replay patterns.
pub const REPLAY_PATTERNS: i64 = 4;

/// Built-in replay scripts, each covering every edge of `K_n`:
/// 0 lexicographic, 1 reverse lexicographic, 2 circulant layers
/// `i-(i+d)` for `d = 1, 2, ...`, 3 vertex-disjoint pairs `2i-(2i+1)`
/// followed by the lexicographic order.
pub fn pattern_edges(id: i64, n: usize) -> Option<Box<dyn Iterator<Item = Edge>>> {
    let lex = move || (0..n).flat_map(move |u| (u + 1..n).map(move |v| Edge::new(u, v)));
    Some(match id {
        0 => Box::new(lex()),
        1 => Box::new(lex().collect::<Vec<_>>().into_iter().rev()),
        2 => Box::new((1..=n / 2).flat_map(move |d| {
            let half = n.is_multiple_of(2) && d == n / 2;
            (0..if half { n / 2 } else { n }).map(move |i| Edge::new(i, (i + d) % n))
        })),
        3 => Box::new((0..n / 2).map(|i| Edge::new(2 * i, 2 * i + 1)).chain(lex())),
        _ => return None,
    })
}

/// Value for the player who moves after `e` is played, searching `depth`
/// further plies. Unresolved leaves score zero, like a draw.
fn negamax(gs: &StarState, e: Edge, depth: usize) -> i8 {
    let mover = gs.to_move();
    let mut next = gs.clone();
    next.apply_move(e).expect("legal move");
    match next.status() {
        Status::Lost { player, .. } => return if player == mover { 1 } else { -1 },
        Status::Draw => return 0,
        Status::Ongoing => {}
    }
    if depth == 0 {
        return 0;
    }
    let mut best = -1;
    for m in next.legal_moves().expect("ongoing") {
        if !next.is_safe_for(next.to_move(), m) {
            continue;
        }
        best = best.max(-negamax(&next, m, depth - 1));
        if best == 1 {
            break;
        }
    }
    best
}

impl fmt::Display for AdversaryPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.kind.name(), self.seed)?;
        if !self.params.is_empty() {
            let ps: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            write!(f, ":{}", ps.join(","))?;
        }
        Ok(())
    }
}

impl FromStr for AdversaryPolicy {
    type Err = AdversaryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.trim().splitn(3, ':');
        let name = parts.next().unwrap_or_default();
        let kind = PolicyKind::ALL
            .into_iter()
            .find(|k| k.name() == name)
            .ok_or_else(|| AdversaryError::Parse(format!("unknown policy {name:?}")))?;
        let seed = match parts.next() {
            None | Some("") => 0,
            Some(x) => x
                .parse()
                .map_err(|_| AdversaryError::Parse(format!("bad seed {x:?}")))?,
        };
        let mut policy = AdversaryPolicy::new(kind, seed);
        if let Some(rest) = parts.next() {
            for kv in rest.split(',').filter(|kv| !kv.is_empty()) {
                let (k, v) = kv
                    .split_once('=')
                    .ok_or_else(|| AdversaryError::Parse(format!("expected key=value, got {kv:?}")))?;
                let v = v
                    .parse()
                    .map_err(|_| AdversaryError::Parse(format!("parameter {k} is not an integer")))?;
                policy.params.insert(k.to_string(), v);
            }
        }
        Ok(policy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(u: usize, v: usize) -> Edge {
        Edge::new(u, v)
    }

    #[test]
    fn patterns_cover_every_edge() {
        for n in [2, 5, 6, 9] {
            for id in 0..REPLAY_PATTERNS {
                let mut all: Vec<Edge> = pattern_edges(id, n).unwrap().collect();
                all.sort();
                all.dedup();
                assert_eq!(all.len(), n * (n - 1) / 2, "pattern {id} on {n}");
            }
        }
        assert!(pattern_edges(REPLAY_PATTERNS, 4).is_none());
    }

    #[test]
    fn replay_skips_claimed_entries() {
        let p = AdversaryPolicy::replay(vec![e(0, 1), e(0, 2), e(1, 2)]);
        let gs = StarState::from_moves(4, 2, [e(0, 1), e(0, 2)]).unwrap();
        assert_eq!(p.next_pi_move(&gs), Ok(e(1, 2)));
        let q: AdversaryPolicy = "replay:0:pattern=3".parse().unwrap();
        assert_eq!(q.next_pi_move(&gs), Ok(e(2, 3)));
    }

    #[test]
    fn replay_follows_script() {
        let p = AdversaryPolicy::replay(vec![e(0, 1)]);
        let mut gs = StarState::new(3, 1).unwrap();
        assert_eq!(p.next_pi_move(&gs), Ok(e(0, 1)));
        gs.apply_move(e(0, 1)).unwrap();
        gs.apply_move(e(0, 2)).unwrap();
        assert_eq!(p.next_pi_move(&gs), Err(AdversaryError::ScriptExhausted(1)));
    }

    #[test]
    fn random_is_deterministic() {
        let p: AdversaryPolicy = "random:42".parse().unwrap();
        let mut gs = StarState::new(30, 2).unwrap();
        gs.apply_move(e(3, 4)).unwrap();
        gs.apply_move(e(5, 6)).unwrap();
        let a = p.next_pi_move(&gs).unwrap();
        assert_eq!(p.next_pi_move(&gs).unwrap(), a);
        assert!(!gs.is_claimed(a));
        let other = p.with_seed(43);
        let moves: Vec<_> = (0..5).map(|_| other.next_pi_move(&gs).unwrap()).collect();
        assert!(moves.iter().all(|&m| m == moves[0]));
    }

    #[test]
    fn s_attacker_targets_low_class() {
        let p: AdversaryPolicy = "s-attacker:1".parse().unwrap();
        let mut gs = StarState::new(20, 1).unwrap();
        gs.apply_move(e(0, 1)).unwrap();
        gs.apply_move(e(0, 2)).unwrap();
        let m = p.next_pi_move(&gs).unwrap();
        assert!(m.u > 2 && m.v > 2, "{m}");
        assert!(!gs.is_claimed(m));
    }

    #[test]
    fn degree_attacker_takes_busy_safe_edge() {
        let p: AdversaryPolicy = "degree-attacker:3".parse().unwrap();
        let mut gs = StarState::new(6, 1).unwrap();
        gs.apply_move(e(0, 1)).unwrap();
        gs.apply_move(e(2, 3)).unwrap();
        // PI-safe edges avoid 0 and 1; the busiest of them touch 2 and 3.
        let m = p.next_pi_move(&gs).unwrap();
        assert!(gs.is_safe_for(PlayerId::First, m));
        assert_eq!(gs.gamma_degree(m.u) + gs.gamma_degree(m.v), 1, "{m}");
    }

    #[test]
    fn minimax_avoids_immediate_loss() {
        // k = 1, n = 4: after 0-1 and 0-2 the first player must not touch 0 or 1.
        let p = AdversaryPolicy::minimax(0, 2);
        let gs = StarState::from_moves(4, 1, [e(0, 1), e(0, 2)]).unwrap();
        let m = p.next_pi_move(&gs).unwrap();
        assert!(gs.is_safe_for(PlayerId::First, m), "{m}");
    }

    #[test]
    fn spec_strings_round_trip() {
        for s in ["random:42", "safe-random:0", "minimax:5:depth=3", "degree-attacker:9"] {
            let p: AdversaryPolicy = s.parse().unwrap();
            assert_eq!(p.to_string(), s);
        }
        assert_eq!("s-attacker".parse::<AdversaryPolicy>().unwrap().seed, 0);
        assert!("nobody:1".parse::<AdversaryPolicy>().is_err());
        assert!("random:x".parse::<AdversaryPolicy>().is_err());
        assert!("random:1:depth".parse::<AdversaryPolicy>().is_err());
    }
}
