//! The pair clipping game.
//!
//! Each round the first player adds at most one new edge, then the second
//! player removes two non-adjacent vertices. The second player wins by
//! making `⌊(v-1)/2⌋` removals that leave the graph edgeless.

mod adversary;
mod monitor;
mod strategy;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{GraphError, Snapshot, SparseProfile, VertexId, WorkGraph};

pub use adversary::{exhaustive_check, ExhaustiveChecker, ExhaustiveReport, PcgAdversary, PcgPolicy};
pub use monitor::{monitor_claims, r_bound, Violation};
pub use strategy::{theorem5_move, Branch, Decision};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PcgError {
    #[error("move not allowed in phase {0:?}")]
    WrongPhase(Phase),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("no legal clip available (branch {0:?})")]
    NoLegalMove(Option<Branch>),
}

/// A first-player move: add one absent edge, or do nothing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PiMove {
    AddEdge(VertexId, VertexId),
    Pass,
}

impl PiMove {
    pub fn add(u: VertexId, v: VertexId) -> Self {
        PiMove::AddEdge(u.min(v), u.max(v))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum PiMoveRepr {
    Word(String),
    Pair([VertexId; 2]),
}

impl Serialize for PiMove {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match *self {
            PiMove::Pass => PiMoveRepr::Word("pass".into()),
            PiMove::AddEdge(u, v) => PiMoveRepr::Pair([u, v]),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for PiMove {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match PiMoveRepr::deserialize(d)? {
            PiMoveRepr::Word(w) if w == "pass" => Ok(PiMove::Pass),
            PiMoveRepr::Word(w) => Err(serde::de::Error::custom(format!("unknown move {w:?}"))),
            PiMoveRepr::Pair([u, v]) => Ok(PiMove::AddEdge(u, v)),
        }
    }
}

/// A second-player move: remove two non-adjacent vertices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "[VertexId; 2]", from = "[VertexId; 2]")]
pub struct ClipPair {
    pub u: VertexId,
    pub v: VertexId,
}

impl ClipPair {
    pub fn new(u: VertexId, v: VertexId) -> Self {
        Self {
            u: u.min(v),
            v: u.max(v),
        }
    }
}

impl From<ClipPair> for [VertexId; 2] {
    fn from(c: ClipPair) -> Self {
        [c.u, c.v]
    }
}

impl From<[VertexId; 2]> for ClipPair {
    fn from([u, v]: [VertexId; 2]) -> Self {
        ClipPair::new(u, v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    AwaitingPi,
    AwaitingPii,
    Finished { won: bool },
}

/// One completed round with the graph measured before the first player's
/// move (`pre`), after it (`mid`) and after the clip (`post`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Round {
    pub pi: PiMove,
    pub pii: ClipPair,
    pub branch: Option<Branch>,
    pub pre: Snapshot,
    pub mid: Snapshot,
    pub post: Snapshot,
    /// Degree sum of the clipped pair in the `mid` graph.
    pub clip_degree_sum: usize,
    /// Whether one of the clipped vertices had maximum degree in the `mid` graph.
    pub clipped_max_degree: bool,
}

#[derive(Debug, Clone)]
pub struct PcgState {
    graph: WorkGraph,
    initial_v: usize,
    target: usize,
    pii_moves_made: usize,
    phase: Phase,
    pre_round: Snapshot,
    last_pi_move: Option<PiMove>,
    history: Vec<Round>,
    profile: SparseProfile,
}

impl PcgState {
    pub fn new(graph: WorkGraph) -> Self {
        Self::with_profile(graph, SparseProfile::STANDARD)
    }

    pub fn with_profile(graph: WorkGraph, profile: SparseProfile) -> Self {
        let initial_v = graph.active_count();
        let target = initial_v.saturating_sub(1) / 2;
        let pre_round = graph.snapshot();
        let phase = if target == 0 {
            Phase::Finished {
                won: graph.edge_count() == 0,
            }
        } else {
            Phase::AwaitingPi
        };
        Self {
            graph,
            initial_v,
            target,
            pii_moves_made: 0,
            phase,
            pre_round,
            last_pi_move: None,
            history: Vec::new(),
            profile,
        }
    }

    pub fn graph(&self) -> &WorkGraph {
        &self.graph
    }
    pub fn initial_v(&self) -> usize {
        self.initial_v
    }
    pub fn target(&self) -> usize {
        self.target
    }
    pub fn pii_moves_made(&self) -> usize {
        self.pii_moves_made
    }
    pub fn phase(&self) -> Phase {
        self.phase
    }
    pub fn pre_round(&self) -> Snapshot {
        self.pre_round
    }
    pub fn last_pi_move(&self) -> Option<PiMove> {
        self.last_pi_move
    }
    pub fn history(&self) -> &[Round] {
        &self.history
    }
    pub fn profile(&self) -> &SparseProfile {
        &self.profile
    }
    pub fn is_finished(&self) -> bool {
        matches!(self.phase, Phase::Finished { .. })
    }
    pub fn won(&self) -> Option<bool> {
        match self.phase {
            Phase::Finished { won } => Some(won),
            _ => None,
        }
    }
    /// True when the next clip is the last one the game asks for.
    pub fn is_final_round(&self) -> bool {
        self.pii_moves_made + 1 == self.target
    }

    pub fn apply_pi(&mut self, m: PiMove) -> Result<(), PcgError> {
        if self.phase != Phase::AwaitingPi {
            return Err(PcgError::WrongPhase(self.phase));
        }
        if let PiMove::AddEdge(u, v) = m {
            self.graph.add_edge(u, v)?;
        }
        self.last_pi_move = Some(m);
        self.phase = if self.graph.first_legal_clip().is_some() {
            Phase::AwaitingPii
        } else {
            Phase::Finished { won: false }
        };
        Ok(())
    }

    pub fn apply_pii(&mut self, m: ClipPair) -> Result<(), PcgError> {
        self.apply_pii_tagged(m, None)
    }

    /// Apply a clip and record which strategy branch produced it.
    pub fn apply_pii_tagged(&mut self, m: ClipPair, branch: Option<Branch>) -> Result<(), PcgError> {
        if self.phase != Phase::AwaitingPii {
            return Err(PcgError::WrongPhase(self.phase));
        }
        let mid = self.graph.snapshot();
        let du = self.graph.degree(m.u)?;
        let dv = self.graph.degree(m.v)?;
        self.graph.clip_pair(m.u, m.v)?;
        self.pii_moves_made += 1;
        let post = self.graph.snapshot();
        self.history.push(Round {
            pi: self.last_pi_move.unwrap_or(PiMove::Pass),
            pii: m,
            branch,
            pre: self.pre_round,
            mid,
            post,
            clip_degree_sum: du + dv,
            clipped_max_degree: du.max(dv) == mid.delta,
        });
        if self.pii_moves_made == self.target {
            self.phase = Phase::Finished {
                won: self.graph.edge_count() == 0,
            };
        } else {
            self.phase = Phase::AwaitingPi;
            self.pre_round = post;
        }
        self.last_pi_move = None;
        debug_assert_eq!(self.graph.active_count() + 2 * self.pii_moves_made, self.initial_v);
        Ok(())
    }

    /// Compute the strategy's clip and apply it.
    pub fn play_theorem5(&mut self) -> Result<Decision, PcgError> {
        let d = theorem5_move(self)?;
        self.apply_pii_tagged(d.clip, Some(d.branch))?;
        Ok(d)
    }
}

/// Serialized record of one pair clipping game.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PcgTranscript {
    pub initial_graph: WorkGraph,
    pub rounds: Vec<TranscriptRound>,
    pub won: bool,
    pub violations: Vec<Violation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptRound {
    pub pi: PiMove,
    pub pii: ClipPair,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub branch: Option<Branch>,
}

/// Play the strategy against `adversary` from `graph` to completion.
pub fn play_pcg(graph: WorkGraph, adversary: &mut dyn PcgAdversary) -> Result<PcgTranscript, PcgError> {
    let initial_graph = graph.clone();
    let mut s = PcgState::new(graph);
    while !s.is_finished() {
        let m = adversary.next_move(&s);
        s.apply_pi(m)?;
        if s.is_finished() {
            break;
        }
        s.play_theorem5()?;
    }
    let violations = monitor_claims(s.history(), s.profile());
    Ok(PcgTranscript {
        initial_graph,
        rounds: s
            .history()
            .iter()
            .map(|r| TranscriptRound {
                pi: r.pi,
                pii: r.pii,
                branch: r.branch,
            })
            .collect(),
        won: s.won() == Some(true),
        violations,
    })
}
