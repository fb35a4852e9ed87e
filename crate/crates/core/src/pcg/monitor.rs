//! Runtime checks of the degree and density claims that back the clip rule.

use serde::{Deserialize, Serialize};

use super::{Branch, Round};
use crate::graph::SparseProfile;

/// `⌊(n-1)/4⌋`, the longest run of maximum-degree clips needed from an
/// `(f, g)`-sparse graph of order `n`.
pub fn r_bound(n: usize) -> usize {
    n.saturating_sub(1) / 4
}

/// Rounds are numbered from 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// `Δ(pre) <= Δ(mid) <= Δ(pre) + 1` failed.
    DeltaStep { round: usize },
    /// `e(post) <= e(mid) - Δ(mid) <= e(pre) - Δ(pre) + 1` failed on a max-degree round.
    EdgeDrop { round: usize },
    /// `Δ(post) <= Δ(pre)` failed on a max-degree round.
    DeltaGrowth { round: usize },
    /// The pre-round graph of a nice-pair or max-degree round was not g-sparse.
    NotGSparse { round: usize },
    /// A nice-pair round clipped a pair that was not nice.
    NotNice { round: usize },
    /// A nice-pair round left a graph that is not g-sparse.
    NiceClipDensity { round: usize },
    /// A run of max-degree rounds outlasted `r(n)`.
    LongRun {
        start_round: usize,
        length: usize,
        n: usize,
        bound: usize,
    },
}

pub fn monitor_claims(history: &[Round], profile: &SparseProfile) -> Vec<Violation> {
    let mut out = Vec::new();
    for (i, r) in history.iter().enumerate() {
        let round = i + 1;
        if !(r.pre.delta <= r.mid.delta && r.mid.delta <= r.pre.delta + 1) {
            out.push(Violation::DeltaStep { round });
        }
        match r.branch {
            Some(Branch::MaxDegree) => {
                let after_pi = r.mid.e as i64 - r.mid.delta as i64;
                if !(r.post.e as i64 <= after_pi && after_pi <= r.pre.e as i64 - r.pre.delta as i64 + 1) {
                    out.push(Violation::EdgeDrop { round });
                }
                if r.post.delta > r.pre.delta {
                    out.push(Violation::DeltaGrowth { round });
                }
                if !r.pre.is_g_sparse(profile) {
                    out.push(Violation::NotGSparse { round });
                }
            }
            Some(Branch::NicePair) => {
                if !r.pre.is_g_sparse(profile) {
                    out.push(Violation::NotGSparse { round });
                }
                if r.mid.v * r.clip_degree_sum < 4 * r.mid.e {
                    out.push(Violation::NotNice { round });
                }
                if !r.post.is_g_sparse(profile) {
                    out.push(Violation::NiceClipDensity { round });
                }
            }
            _ => {}
        }
    }

    let mut i = 0;
    while i < history.len() {
        let r = &history[i];
        if r.branch == Some(Branch::MaxDegree) && r.pre.is_fg_sparse(profile) {
            let n = r.pre.v;
            let mut length = 1;
            while let Some(next) = history.get(i + length) {
                if next.branch != Some(Branch::MaxDegree) || next.pre.is_fg_sparse(profile) {
                    break;
                }
                length += 1;
            }
            if length > r_bound(n) {
                out.push(Violation::LongRun {
                    start_round: i + 1,
                    length,
                    n,
                    bound: r_bound(n),
                });
            }
            i += length;
        } else {
            i += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Snapshot, WorkGraph};
    use crate::pcg::{play_pcg, ClipPair, PcgPolicy, PiMove};

    fn snap(v: usize, e: usize, delta: usize) -> Snapshot {
        Snapshot { v, e, delta }
    }

    #[test]
    fn empty_history_is_clean() {
        assert!(monitor_claims(&[], &SparseProfile::STANDARD).is_empty());
    }

    #[test]
    fn strategy_game_is_clean() {
        let edges: Vec<_> = (1..=9).map(|l| (0, l)).collect();
        let g = WorkGraph::from_edges(20, edges).unwrap();
        let t = play_pcg(g, &mut PcgPolicy::attacker(7)).unwrap();
        assert!(t.won);
        assert!(t.violations.is_empty(), "{:?}", t.violations);
    }

    #[test]
    fn non_max_degree_clip_is_reported() {
        // A 9-leaf star on 20 vertices; the first player adds 10-11 and the
        // clip takes two leaves instead of the centre.
        let r = Round {
            pi: PiMove::add(10, 11),
            pii: ClipPair::new(1, 2),
            branch: Some(Branch::MaxDegree),
            pre: snap(20, 9, 9),
            mid: snap(20, 10, 9),
            post: snap(18, 8, 7),
            clip_degree_sum: 2,
            clipped_max_degree: false,
        };
        let v = monitor_claims(&[r], &SparseProfile::STANDARD);
        assert!(v.contains(&Violation::EdgeDrop { round: 1 }), "{v:?}");
    }

    #[test]
    fn long_run_is_reported() {
        let r = |pre: Snapshot| Round {
            pi: PiMove::Pass,
            pii: ClipPair::new(0, 1),
            branch: Some(Branch::MaxDegree),
            pre,
            mid: pre,
            post: snap(pre.v - 2, pre.e.saturating_sub(pre.delta), pre.delta),
            clip_degree_sum: pre.delta,
            clipped_max_degree: true,
        };
        // r(20) = 4; five rounds whose pre graphs (after the first) violate Δ <= f.
        let hist = vec![
            r(snap(20, 9, 9)),
            r(snap(18, 8, 9)),
            r(snap(16, 7, 9)),
            r(snap(14, 6, 9)),
            r(snap(12, 5, 9)),
        ];
        let v = monitor_claims(&hist, &SparseProfile::STANDARD);
        assert!(
            v.contains(&Violation::LongRun {
                start_round: 1,
                length: 5,
                n: 20,
                bound: 4
            }),
            "{v:?}"
        );
    }
}
