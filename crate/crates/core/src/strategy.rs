//! The second player's stage strategy for the star avoidance game.
//!
//! The second player raises every degree of their own graph `H₂` from
//! `j-1` to `j` in stage `j = 1..=k`. Inside a stage, the vertices still at
//! degree `j-1` form the set `S`, and the union graph restricted to `S` is
//! played as a pair clipping game: the first player's edge inside `S` is the
//! added edge, and each clip `{u, v}` is answered by claiming the edge `u-v`.
//! When the clipping game ends with one or two leftover vertices, they are
//! paired with degree-`j` vertices before the next stage starts.
//!
//! After the last stage `H₂` has `⌊(nk-1)/2⌋` edges. If `nk` is odd the first
//! player runs out of room on their next move. If `nk` is even the last two
//! edges are timed around the first player's single remaining safe edge.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bitset::BitSet;
use crate::graph::{SparseProfile, VertexId, WorkGraph};
use crate::pcg::{monitor_claims, theorem5_move, Branch, ClipPair, PcgError, PcgState, PiMove, Violation};
use crate::star::{Edge, PlayerId, StarState};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StrategyError {
    #[error("it is not the second player's turn")]
    NotOurTurn,
    #[error("the game is over")]
    GameOver,
    #[error("endgame information requested at the wrong time: {0}")]
    WrongTiming(String),
    #[error("strategy stuck: {0}")]
    Stuck(String),
    #[error(transparent)]
    Pcg(#[from] PcgError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyPhase {
    StagePcg,
    StagePairing,
    EndgameOdd,
    EndgameEvenWindow,
    Done,
}

/// Per-move note recorded in transcripts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Annotation {
    pub phase: StrategyPhase,
    pub stage: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub branch: Option<Branch>,
}

/// State at the last decision point of an `nk`-even game.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndgameInfo {
    pub e1: Edge,
    pub e2: Edge,
    pub pi_safe: Vec<Edge>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StrategyViolation {
    /// Degrees of `H₂` at a stage start were not `j-1` apart from at most two at `j`.
    StageStart { stage: usize },
    /// `Γ[S]` at a stage start was too small, too dense, or not `(f, g)`-sparse.
    Embedding { stage: usize, v: usize, delta: usize },
    /// The clipping game graph diverged from `Γ[S]`.
    Mirror { stage: usize },
    /// A claim check of the clipping game fired.
    Pcg { stage: usize, violation: Violation },
    /// The last stage left a number of deficient vertices that does not match the parity of `nk`.
    Leftover { leftover: usize },
    /// One or two vertices at degree `k-1`, spanning no union edge, was not reached.
    ClaimNotReached,
    /// More than one safe edge for the first player at the endgame decision point.
    EndgameSafeSet { size: usize },
}

/// Decided move plus its annotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StrategyMove {
    pub edge: Edge,
    pub annotation: Annotation,
}

#[derive(Debug, Clone)]
pub struct StrategyState {
    n: usize,
    k: usize,
    stage_j: usize,
    phase: StrategyPhase,
    pcg: Option<PcgState>,
    /// Length of the game history already mirrored into the clipping game.
    absorbed: usize,
    pending_e2: Option<Edge>,
    endgame: Option<EndgameInfo>,
    claim_reached: Option<bool>,
    violations: Vec<StrategyViolation>,
    profile: SparseProfile,
}

/// `S = {v : d_{H₂}(v) = j - 1}`
fn low_set(gs: &StarState, j: usize) -> BitSet {
    let mut s = BitSet::new(gs.n());
    for v in 0..gs.n() {
        if gs.degree(PlayerId::Second, v) + 1 == j {
            s.insert(v);
        }
    }
    s
}

/// The union graph restricted to `keep`, as a clipping-game graph.
fn gamma_induced(gs: &StarState, keep: &BitSet) -> WorkGraph {
    let mut g = WorkGraph::empty(gs.n());
    for u in keep.iter() {
        for v in gs.gamma_row(u).iter().filter(|&v| v > u && keep.contains(v)) {
            g.add_edge(u, v).expect("fresh edge");
        }
    }
    g.induced(keep)
}

/// One or two vertices of `H₂` at degree `k-1`, every other vertex at `k`, and
/// (with two) the deficient pair not joined in the union graph.
pub fn claim_state_reached(gs: &StarState, k: usize) -> bool {
    let mut deficient = Vec::new();
    for v in 0..gs.n() {
        let d = gs.degree(PlayerId::Second, v);
        if d + 1 == k {
            deficient.push(v);
        } else if d != k {
            return false;
        }
    }
    match deficient.as_slice() {
        [_] => true,
        [a, b] => !gs.is_claimed(Edge::new(*a, *b)),
        _ => false,
    }
}

impl StrategyState {
    pub fn new(n: usize, k: usize) -> Self {
        let mut s = Self {
            n,
            k,
            stage_j: 1,
            phase: StrategyPhase::StagePcg,
            pcg: None,
            absorbed: 0,
            pending_e2: None,
            endgame: None,
            claim_reached: None,
            violations: Vec::new(),
            profile: SparseProfile::STANDARD,
        };
        let empty = StarState::new(n.max(1), k.max(1)).expect("positive parameters");
        s.start_stage(&empty);
        s
    }

    /// Whether `n >= 200k`, the range where the strategy is proven to win.
    pub fn guaranteed(&self) -> bool {
        self.n >= 200 * self.k
    }
    pub fn stage(&self) -> usize {
        self.stage_j
    }
    pub fn phase(&self) -> StrategyPhase {
        self.phase
    }
    pub fn pcg(&self) -> Option<&PcgState> {
        self.pcg.as_ref()
    }
    pub fn violations(&self) -> &[StrategyViolation] {
        &self.violations
    }
    pub fn endgame(&self) -> Option<&EndgameInfo> {
        self.endgame.as_ref()
    }
    /// Result of the claim-state check at the end of the last stage, once reached.
    pub fn claim_reached(&self) -> Option<bool> {
        self.claim_reached
    }

    fn annotation(&self, branch: Option<Branch>) -> Annotation {
        Annotation {
            phase: self.phase,
            stage: self.stage_j,
            branch,
        }
    }

    /// Open the clipping game for the current stage on `gs`, the position right
    /// after the second player's latest move.
    fn start_stage(&mut self, gs: &StarState) {
        let j = self.stage_j;
        let s = low_set(gs, j);
        let mut above = 0;
        for v in 0..gs.n() {
            let d = gs.degree(PlayerId::Second, v);
            if d == j {
                above += 1;
            } else if d + 1 != j {
                above = usize::MAX;
                break;
            }
        }
        if above > 2 {
            self.violations.push(StrategyViolation::StageStart { stage: j });
        }
        let g = gamma_induced(gs, &s);
        let snap = g.snapshot();
        if self.guaranteed()
            && (snap.v + 2 < self.n || snap.delta > self.k + j - 1 || !snap.is_fg_sparse(&self.profile))
        {
            self.violations.push(StrategyViolation::Embedding {
                stage: j,
                v: snap.v,
                delta: snap.delta,
            });
        }
        let pcg = PcgState::with_profile(g, self.profile);
        self.phase = if !pcg.is_finished() {
            StrategyPhase::StagePcg
        } else if j < self.k {
            StrategyPhase::StagePairing
        } else {
            self.end_phase()
        };
        self.pcg = Some(pcg);
        self.absorbed = gs.history().len();
    }

    fn end_phase(&self) -> StrategyPhase {
        if (self.n * self.k).is_multiple_of(2) {
            StrategyPhase::Done
        } else {
            StrategyPhase::EndgameOdd
        }
    }

    /// Feed first-player moves made since the last call into the clipping game.
    fn absorb(pcg: &mut PcgState, gs: &StarState, from: usize) -> Result<(), StrategyError> {
        for (ply, &e) in gs.history().iter().enumerate().skip(from) {
            if ply % 2 != 0 {
                continue;
            }
            if pcg.phase() != crate::pcg::Phase::AwaitingPi {
                return Err(StrategyError::Stuck(format!(
                    "clipping game not awaiting a move at ply {ply}"
                )));
            }
            let active = pcg.graph().active();
            let m = if active.contains(e.u) && active.contains(e.v) {
                PiMove::add(e.u, e.v)
            } else {
                PiMove::Pass
            };
            pcg.apply_pi(m)?;
        }
        Ok(())
    }

    fn check_claim(&self, gs: &StarState, e: Edge) -> Result<(), StrategyError> {
        if gs.is_claimed(e) {
            return Err(StrategyError::Stuck(format!("chose claimed edge {e}")));
        }
        if !gs.is_safe_for(PlayerId::Second, e) {
            return Err(StrategyError::Stuck(format!("edge {e} would complete a star")));
        }
        Ok(())
    }

    /// The second player's next edge.
    pub fn theorem1_move(&mut self, gs: &StarState) -> Result<StrategyMove, StrategyError> {
        if !gs.is_ongoing() {
            return Err(StrategyError::GameOver);
        }
        if gs.to_move() != PlayerId::Second {
            return Err(StrategyError::NotOurTurn);
        }
        let mv = match self.phase {
            StrategyPhase::StagePcg => self.stage_pcg_move(gs)?,
            StrategyPhase::StagePairing => self.pairing_move(gs)?,
            StrategyPhase::EndgameEvenWindow => {
                let e2 = self
                    .pending_e2
                    .take()
                    .ok_or_else(|| StrategyError::Stuck("no pending endgame edge".into()))?;
                let ann = self.annotation(None);
                self.phase = StrategyPhase::Done;
                StrategyMove { edge: e2, annotation: ann }
            }
            StrategyPhase::EndgameOdd | StrategyPhase::Done => {
                return Err(StrategyError::Stuck(
                    "the first player should already have lost".into(),
                ))
            }
        };
        self.check_claim(gs, mv.edge)?;
        Ok(mv)
    }

    fn stage_pcg_move(&mut self, gs: &StarState) -> Result<StrategyMove, StrategyError> {
        let j = self.stage_j;
        let mut pcg = self.pcg.take().ok_or_else(|| StrategyError::Stuck("no clipping game".into()))?;
        Self::absorb(&mut pcg, gs, self.absorbed)?;
        self.absorbed = gs.history().len();
        if pcg.is_finished() {
            return Err(StrategyError::Stuck("no legal clip in the clipping game".into()));
        }
        if cfg!(debug_assertions) {
            let mirror = gamma_induced(gs, &low_set(gs, j));
            if mirror != *pcg.graph() {
                self.violations.push(StrategyViolation::Mirror { stage: j });
            }
        }

        let last_stage = j == self.k;
        let even = (self.n * self.k).is_multiple_of(2);
        if last_stage && even && pcg.is_final_round() {
            let info = self.window_info(gs, &pcg)?;
            self.endgame = Some(info.clone());
            if info.pi_safe.len() > 1 {
                self.violations.push(StrategyViolation::EndgameSafeSet {
                    size: info.pi_safe.len(),
                });
                self.pcg = Some(pcg);
                return Err(StrategyError::Stuck(format!(
                    "first player has {} safe edges at the endgame decision point",
                    info.pi_safe.len()
                )));
            }
            let d = pcg.play_theorem5()?;
            self.finish_last_stage(gs, &pcg, info.e1);
            self.pcg = Some(pcg);
            let ann = Annotation {
                phase: StrategyPhase::EndgameEvenWindow,
                stage: j,
                branch: Some(d.branch),
            };
            let forced = info.pi_safe.first().copied();
            if forced == Some(info.e2) {
                self.phase = StrategyPhase::Done;
                return Ok(StrategyMove {
                    edge: info.e2,
                    annotation: Annotation { branch: None, ..ann },
                });
            }
            if forced == Some(info.e1) {
                self.phase = StrategyPhase::Done;
            } else {
                self.pending_e2 = Some(info.e2);
                self.phase = StrategyPhase::EndgameEvenWindow;
            }
            return Ok(StrategyMove { edge: info.e1, annotation: ann });
        }

        let d = pcg.play_theorem5()?;
        let edge = Edge::new(d.clip.u, d.clip.v);
        let ann = self.annotation(Some(d.branch));
        if pcg.is_finished() {
            if pcg.won() != Some(true) {
                self.pcg = Some(pcg);
                return Err(StrategyError::Stuck(format!("clipping game lost in stage {j}")));
            }
            if last_stage {
                self.finish_last_stage(gs, &pcg, edge);
                self.phase = self.end_phase();
            } else {
                self.record_pcg(&pcg);
                self.phase = StrategyPhase::StagePairing;
            }
        }
        self.pcg = Some(pcg);
        Ok(StrategyMove { edge, annotation: ann })
    }

    fn record_pcg(&mut self, pcg: &PcgState) {
        for violation in monitor_claims(pcg.history(), pcg.profile()) {
            self.violations.push(StrategyViolation::Pcg {
                stage: self.stage_j,
                violation,
            });
        }
    }

    fn finish_last_stage(&mut self, gs: &StarState, pcg: &PcgState, last: Edge) {
        let leftover = pcg.graph().active_count();
        let want = if (self.n * self.k).is_multiple_of(2) { 2 } else { 1 };
        if leftover != want {
            self.violations.push(StrategyViolation::Leftover { leftover });
        }
        let mut after = gs.clone();
        let reached = after.apply_move(last).is_ok() && claim_state_reached(&after, self.k);
        if !reached {
            self.violations.push(StrategyViolation::ClaimNotReached);
        }
        self.claim_reached = Some(reached);
        self.record_pcg(pcg);
    }

    fn pairing_move(&mut self, gs: &StarState) -> Result<StrategyMove, StrategyError> {
        let j = self.stage_j;
        let s = low_set(gs, j);
        let lo = s
            .first()
            .ok_or_else(|| StrategyError::Stuck(format!("empty pairing set in stage {j}")))?;
        let partner = (0..gs.n()).find(|&w| {
            w != lo && gs.degree(PlayerId::Second, w) == j && !gs.is_claimed(Edge::new(lo, w))
        });
        let w = partner.ok_or_else(|| StrategyError::Stuck(format!("no pairing partner for {lo}")))?;
        let edge = Edge::new(lo, w);
        let ann = self.annotation(None);
        if s.count() == 1 {
            let mut after = gs.clone();
            after
                .apply_move(edge)
                .map_err(|e| StrategyError::Stuck(format!("pairing move rejected: {e}")))?;
            self.stage_j += 1;
            self.start_stage(&after);
        }
        Ok(StrategyMove { edge, annotation: ann })
    }

    fn window_info(&self, gs: &StarState, pcg: &PcgState) -> Result<EndgameInfo, StrategyError> {
        let half = self.n * self.k / 2;
        if gs.moves_made(PlayerId::Second) + 2 != half || gs.moves_made(PlayerId::First) + 1 != half {
            return Err(StrategyError::WrongTiming(format!(
                "second player has {} moves, first player {}; expected {} and {}",
                gs.moves_made(PlayerId::Second),
                gs.moves_made(PlayerId::First),
                half.saturating_sub(2),
                half.saturating_sub(1)
            )));
        }
        let d = theorem5_move(pcg)?;
        let e1 = Edge::new(d.clip.u, d.clip.v);
        let rest: Vec<VertexId> = pcg
            .graph()
            .active()
            .iter()
            .filter(|&v| v != d.clip.u && v != d.clip.v)
            .collect();
        let [a, b] = rest[..] else {
            return Err(StrategyError::Stuck(format!(
                "{} vertices would remain after the last clip",
                rest.len()
            )));
        };
        let pi_safe = gs
            .safe_moves(PlayerId::First)
            .map_err(|_| StrategyError::GameOver)?;
        Ok(EndgameInfo {
            e1,
            e2: Edge::new(a, b),
            pi_safe,
        })
    }

    /// `e₁`, `e₂` and the first player's safe edges, computed without changing
    /// the strategy. Valid only right after the first player's `(nk/2 - 1)`-st
    /// move in a game with `nk` even.
    pub fn endgame_info(&self, gs: &StarState) -> Result<EndgameInfo, StrategyError> {
        if !(self.n * self.k).is_multiple_of(2) {
            return Err(StrategyError::WrongTiming("nk is odd".into()));
        }
        if self.phase != StrategyPhase::StagePcg || self.stage_j != self.k {
            return Err(StrategyError::WrongTiming(format!(
                "strategy is in {:?} of stage {}",
                self.phase, self.stage_j
            )));
        }
        let mut pcg = self.pcg.clone().ok_or_else(|| StrategyError::Stuck("no clipping game".into()))?;
        Self::absorb(&mut pcg, gs, self.absorbed)?;
        if !pcg.is_final_round() {
            return Err(StrategyError::WrongTiming("clipping game is not in its last round".into()));
        }
        self.window_info(gs, &pcg)
    }

    /// The clip the strategy would answer with, for inspection.
    pub fn peek_clip(&self, gs: &StarState) -> Result<ClipPair, StrategyError> {
        let mut pcg = self.pcg.clone().ok_or_else(|| StrategyError::Stuck("no clipping game".into()))?;
        Self::absorb(&mut pcg, gs, self.absorbed)?;
        Ok(theorem5_move(&pcg)?.clip)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::star::Status;

    fn e(u: usize, v: usize) -> Edge {
        Edge::new(u, v)
    }

    #[test]
    fn first_reply_on_200() {
        let mut gs = StarState::new(200, 1).unwrap();
        let mut ss = StrategyState::new(200, 1);
        gs.apply_move(e(0, 1)).unwrap();
        let m = ss.theorem1_move(&gs).unwrap();
        assert_eq!(m.edge, e(0, 2));
        assert_eq!(m.annotation.branch, Some(Branch::NicePair));
        assert_eq!(m.annotation.stage, 1);
    }

    #[test]
    fn claim_state_examples() {
        // n = 200, k = 1: H₂ a perfect matching minus the edge 198-199, with
        // the first player holding the offset matching 1-2, 3-4, ..., 197-198.
        let mut moves = Vec::new();
        for i in 0..99 {
            moves.push(e(2 * i + 1, 2 * i + 2));
            moves.push(e(2 * i, 2 * i + 1));
        }
        let gs = StarState::from_moves(200, 1, moves).unwrap();
        assert!(gs.is_ongoing());
        assert!(claim_state_reached(&gs, 1));

        let regular = StarState::from_moves(4, 1, [e(0, 2), e(0, 1), e(1, 3), e(2, 3)]).unwrap();
        assert!(!claim_state_reached(&regular, 1));
    }

    #[test]
    fn deficient_pair_joined_in_gamma_fails() {
        // n = 4, k = 1: H₂ = {0-1}; 2 and 3 deficient and joined by PI's edge.
        let gs = StarState::from_moves(4, 1, [e(2, 3), e(0, 1)]).unwrap();
        assert!(!claim_state_reached(&gs, 1));
        let gs = StarState::from_moves(4, 1, [e(0, 2), e(0, 1)]).unwrap();
        assert!(claim_state_reached(&gs, 1));
    }

    #[test]
    fn rejects_wrong_turn() {
        let gs = StarState::new(200, 1).unwrap();
        let mut ss = StrategyState::new(200, 1);
        assert_eq!(ss.theorem1_move(&gs), Err(StrategyError::NotOurTurn));
    }

    fn play(n: usize, k: usize, policy: &str) -> (StarState, StrategyState, Vec<StrategyMove>) {
        let adv: crate::adversary::AdversaryPolicy = policy.parse().unwrap();
        let mut gs = StarState::new(n, k).unwrap();
        let mut ss = StrategyState::new(n, k);
        let mut ours = Vec::new();
        while gs.is_ongoing() {
            let m = match gs.to_move() {
                PlayerId::First => adv.next_pi_move(&gs).unwrap(),
                PlayerId::Second => {
                    let m = ss.theorem1_move(&gs).unwrap();
                    ours.push(m);
                    m.edge
                }
            };
            gs.apply_move(m).unwrap();
        }
        (gs, ss, ours)
    }

    #[test]
    fn full_game_on_200_ends_with_perfect_matching() {
        let (gs, ss, ours) = play(200, 1, "safe-random:0");
        assert_eq!(gs.outcome(), Some(crate::star::Outcome::SecondWin));
        assert!(ss.violations().is_empty(), "{:?}", ss.violations());
        assert_eq!(ss.claim_reached(), Some(true));
        let info = ss.endgame().unwrap();
        assert_eq!(info.pi_safe.len(), 1);
        assert_eq!(gs.edge_count(PlayerId::Second), 100);
        assert!((0..200).all(|v| gs.degree(PlayerId::Second, v) == 1));
        assert_eq!(ours.len(), 100);
        assert_eq!(ours[98].edge, info.e1);
        assert_eq!(ours[99].edge, info.e2);
        assert_eq!(gs.moves_made(PlayerId::First), 101);
        assert!(ours.iter().all(|m| m.annotation.stage == 1));
    }

    #[test]
    fn no_safe_edge_at_decision_point_ends_early() {
        // The first player's two free vertices are already joined by a
        // second-player edge, so the move after e₁ loses.
        let (gs, ss, ours) = play(200, 1, "safe-random:3");
        let info = ss.endgame().unwrap();
        assert!(info.pi_safe.is_empty());
        assert_eq!(ours.last().unwrap().edge, info.e1);
        assert_eq!(gs.edge_count(PlayerId::Second), 99);
        assert!(claim_state_reached(&gs, 1));
        assert!(matches!(gs.status(), Status::Lost { player: PlayerId::First, losing_move_index: 100 }));
    }

    #[test]
    fn odd_board_stops_one_short() {
        let (gs, ss, _) = play(201, 1, "random:8");
        assert_eq!(gs.outcome(), Some(crate::star::Outcome::SecondWin));
        assert!(ss.violations().is_empty(), "{:?}", ss.violations());
        assert!(gs.edge_count(PlayerId::Second) <= 100);
    }

    #[test]
    fn pairing_step_on_400() {
        let adv: crate::adversary::AdversaryPolicy = "s-attacker:2".parse().unwrap();
        let mut gs = StarState::new(400, 2).unwrap();
        let mut ss = StrategyState::new(400, 2);
        loop {
            let m = adv.next_pi_move(&gs).unwrap();
            gs.apply_move(m).unwrap();
            assert!(gs.is_ongoing());
            let pairing = ss.phase() == StrategyPhase::StagePairing;
            let expect = pairing.then(|| {
                let s = low_set(&gs, 1).first().unwrap();
                let w = (0..400)
                    .find(|&w| gs.degree(PlayerId::Second, w) == 1 && !gs.is_claimed(e(s, w)))
                    .unwrap();
                e(s, w)
            });
            let mv = ss.theorem1_move(&gs).unwrap();
            gs.apply_move(mv.edge).unwrap();
            if let Some(want) = expect {
                assert_eq!(mv.edge, want);
                assert_eq!(mv.annotation.phase, StrategyPhase::StagePairing);
                if ss.stage() == 2 {
                    break;
                }
            }
        }
        assert!(ss.violations().is_empty(), "{:?}", ss.violations());
        assert!((0..400).all(|v| gs.degree(PlayerId::Second, v) >= 1));
    }
}
