//! The second player's winning clip rule for sparse inputs.
//!
//! Dispatch is decided on the graph as it stood before the first player's
//! move in the current round (`P`), while the clip itself is chosen in the
//! current graph (`C`). With `n = v(P)`, graphs on fewer than ten vertices
//! use the base rules:
//!
//! 1. `Δ(P) <= 1`: clip the lower endpoint of the added edge (any legal
//!    pair on a pass). When `n <= 4` this is the last clip and we search for
//!    one that leaves no edge behind.
//! 2. `2e(P) <= n`, `n ∈ {5, 6}`: search for a clip that brings the maximum
//!    degree back to at most one.
//! 3. `2e(P) <= n`, `n >= 7`: clip a vertex of degree at least two.
//!
//! From ten vertices on (and as a fallback below that):
//!
//! 4. `P` is `(f, g)`-sparse with `2Δ(P) <= n - 5`: clip a nice pair of `C`.
//! 5. Otherwise clip a vertex of maximum degree in `C`.
//!
//! Every "any non-adjacent partner" choice takes the smallest index.

use serde::{Deserialize, Serialize};

use super::{ClipPair, PcgError, PcgState, Phase, PiMove};
use crate::graph::{VertexId, WorkGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Branch {
    MatchingBase = 1,
    SmallSparse = 2,
    Sparse = 3,
    NicePair = 4,
    MaxDegree = 5,
}

impl From<Branch> for u8 {
    fn from(b: Branch) -> u8 {
        b as u8
    }
}

impl TryFrom<u8> for Branch {
    type Error = String;
    fn try_from(x: u8) -> Result<Self, String> {
        Ok(match x {
            1 => Branch::MatchingBase,
            2 => Branch::SmallSparse,
            3 => Branch::Sparse,
            4 => Branch::NicePair,
            5 => Branch::MaxDegree,
            _ => return Err(format!("branch {x} out of range 1..=5")),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decision {
    pub clip: ClipPair,
    pub branch: Branch,
}

fn with_partner(g: &WorkGraph, u: Option<VertexId>, branch: Branch) -> Result<Decision, PcgError> {
    let u = u.ok_or(PcgError::NoLegalMove(Some(branch)))?;
    let w = g.smallest_non_adjacent(u).ok_or(PcgError::NoLegalMove(Some(branch)))?;
    Ok(Decision {
        clip: ClipPair::new(u, w),
        branch,
    })
}

/// Smallest legal clip after which `accept` holds, if any.
fn search_clip(g: &WorkGraph, accept: impl Fn(&WorkGraph) -> bool) -> Option<ClipPair> {
    g.legal_clips().map(|(u, v)| ClipPair::new(u, v)).find(|c| {
        let mut h = g.clone();
        h.clip_pair(c.u, c.v).is_ok() && accept(&h)
    })
}

pub fn theorem5_move(s: &PcgState) -> Result<Decision, PcgError> {
    if s.phase() != Phase::AwaitingPii {
        return Err(PcgError::WrongPhase(s.phase()));
    }
    let p = s.pre_round();
    let c = s.graph();
    let n = p.v;
    let first_legal = || {
        c.first_legal_clip()
            .map(|(u, v)| ClipPair::new(u, v))
            .ok_or(PcgError::NoLegalMove(None))
    };

    let base = n < 10;
    let decision = if base && p.is_11_sparse() {
        let branch = Branch::MatchingBase;
        if n <= 4 {
            let clip = match search_clip(c, |h| h.edge_count() == 0) {
                Some(clip) => clip,
                None => first_legal()?,
            };
            Decision { clip, branch }
        } else {
            match s.last_pi_move() {
                Some(PiMove::AddEdge(a, b)) => with_partner(c, Some(a.min(b)), branch)?,
                _ => Decision {
                    clip: first_legal()?,
                    branch,
                },
            }
        }
    } else if base && p.is_1_sparse() && (n == 5 || n == 6) {
        let clip = match search_clip(c, |h| h.is_11_sparse()) {
            Some(clip) => clip,
            None => first_legal()?,
        };
        Decision {
            clip,
            branch: Branch::SmallSparse,
        }
    } else if base && p.is_1_sparse() && n >= 7 {
        let u = c.active().iter().find(|&v| c.degree_unchecked(v) >= 2);
        with_partner(c, u, Branch::Sparse)?
    } else if p.is_fg_sparse(s.profile()) && 2 * p.delta + 5 <= n {
        let (u, v) = c
            .find_nice_pair()?
            .ok_or(PcgError::NoLegalMove(Some(Branch::NicePair)))?;
        Decision {
            clip: ClipPair::new(u, v),
            branch: Branch::NicePair,
        }
    } else {
        with_partner(c, c.smallest_max_degree_vertex(), Branch::MaxDegree)?
    };

    debug_assert!(
        c.is_active(decision.clip.u)
            && c.is_active(decision.clip.v)
            && decision.clip.u != decision.clip.v
            && !c.has_edge(decision.clip.u, decision.clip.v),
        "illegal clip {decision:?}"
    );
    Ok(decision)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decide(start: WorkGraph, pi: PiMove) -> Decision {
        let mut s = PcgState::new(start);
        s.apply_pi(pi).unwrap();
        theorem5_move(&s).unwrap()
    }

    #[test]
    fn small_empty_start_uses_matching_rule() {
        let d = decide(WorkGraph::empty(5), PiMove::add(0, 1));
        assert_eq!(d.branch, Branch::MatchingBase);
        assert_eq!(d.clip, ClipPair::new(0, 2));
    }

    #[test]
    fn twenty_vertices_uses_nice_pair() {
        let d = decide(WorkGraph::empty(20), PiMove::add(0, 1));
        assert_eq!(d.branch, Branch::NicePair);
        assert_eq!(d.clip, ClipPair::new(0, 2));
    }

    #[test]
    fn nine_vertex_path_uses_degree_two_rule() {
        let d = decide("v=9; edges=(0,1),(1,2),(5,6)".parse().unwrap(), PiMove::add(3, 4));
        assert_eq!(d.branch, Branch::Sparse);
        assert_eq!(d.clip, ClipPair::new(1, 3));
    }

    #[test]
    fn star_start_uses_max_degree() {
        let edges: Vec<_> = (1..=9).map(|l| (0, l)).collect();
        let g = WorkGraph::from_edges(20, edges).unwrap();
        let d = decide(g, PiMove::add(10, 11));
        assert_eq!(d.branch, Branch::MaxDegree);
        assert_eq!(d.clip, ClipPair::new(0, 10));
    }

    #[test]
    fn last_round_on_four_vertices_avoids_leftover_edge() {
        // The smallest legal pair (0,1) would leave the edge 2-3 behind.
        let mut s = PcgState::new("v=4; edges=(2,3)".parse().unwrap());
        s.apply_pi(PiMove::Pass).unwrap();
        let d = theorem5_move(&s).unwrap();
        assert_eq!(d.clip, ClipPair::new(0, 2));
        s.apply_pii(d.clip).unwrap();
        assert_eq!(s.won(), Some(true));
    }

    #[test]
    fn path_on_five_restores_matching() {
        let d = decide("v=5; edges=(0,1),(1,2)".parse().unwrap(), PiMove::add(3, 4));
        assert_eq!(d.branch, Branch::SmallSparse);
        let mut g: WorkGraph = "v=5; edges=(0,1),(1,2),(3,4)".parse().unwrap();
        g.clip_pair(d.clip.u, d.clip.v).unwrap();
        assert!(g.is_11_sparse());
    }

    #[test]
    fn wrong_phase_rejected() {
        let s = PcgState::new(WorkGraph::empty(5));
        assert!(matches!(theorem5_move(&s), Err(PcgError::WrongPhase(_))));
    }
}
