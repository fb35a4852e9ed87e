//! Strategy-versus-adversary games and their JSONL transcripts.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::adversary::AdversaryPolicy;
use crate::star::{Edge, Outcome, PlayerId, StarState, Status};
use crate::strategy::{Annotation, EndgameInfo, StrategyState, StrategyViolation};

pub const TRANSCRIPT_VERSION: u32 = 1;
pub const STRATEGY_ID: &str = "staged-clipping";
pub const FLAG_UNGUARANTEED: &str = "unguaranteed";
pub const FLAG_DERAILED: &str = "derailed";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MonitorLevel {
    Off,
    Log,
    #[default]
    Assert,
}

impl fmt::Display for MonitorLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MonitorLevel::Off => "off",
            MonitorLevel::Log => "log",
            MonitorLevel::Assert => "assert",
        })
    }
}

impl FromStr for MonitorLevel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "off" => Ok(MonitorLevel::Off),
            "log" => Ok(MonitorLevel::Log),
            "assert" => Ok(MonitorLevel::Assert),
            _ => Err(format!("monitor level must be off, log or assert, got {s:?}")),
        }
    }
}

/// Parameters of a batch run, copied into every transcript.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub n: usize,
    pub k: usize,
    pub games: usize,
    pub seed: u64,
    pub adversary: String,
    pub monitor: MonitorLevel,
}

impl RunConfig {
    pub fn simulate(n: usize, k: usize, games: usize, seed: u64, adversary: &str) -> Self {
        Self {
            command: "simulate".into(),
            n,
            k,
            games,
            seed,
            adversary: adversary.into(),
            monitor: MonitorLevel::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveRecord {
    pub player: PlayerId,
    pub edge: Edge,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub annotation: Option<Annotation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub version: u32,
    pub n: usize,
    pub k: usize,
    pub strategy: String,
    pub adversary: String,
    pub seed: u64,
    pub flags: Vec<String>,
    pub moves: Vec<MoveRecord>,
    pub outcome: Outcome,
    pub losing_move_index: Option<usize>,
    pub monitor_violations: Vec<StrategyViolation>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub endgame: Option<EndgameInfo>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub claim_reached: Option<bool>,
    pub config: RunConfig,
}

impl Transcript {
    pub fn guaranteed(&self) -> bool {
        !self.flags.iter().any(|f| f == FLAG_UNGUARANTEED)
    }

    pub fn derailed(&self) -> bool {
        self.flags.iter().any(|f| f == FLAG_DERAILED)
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("transcript serialises")
    }

    /// Moves made by one player, in order.
    pub fn edges_of(&self, p: PlayerId) -> Vec<Edge> {
        self.moves.iter().filter(|m| m.player == p).map(|m| m.edge).collect()
    }

    /// Replay all moves through the rules engine.
    pub fn final_state(&self) -> Result<StarState, HarnessError> {
        Ok(StarState::from_moves(self.n, self.k, self.moves.iter().map(|m| m.edge))?)
    }
}

/// Smallest edge the second player can take without completing a star, or
/// the smallest unclaimed edge if every edge loses.
pub fn fallback_move(gs: &StarState) -> Result<Edge, HarnessError> {
    let open = gs.legal_moves()?;
    open.iter()
        .copied()
        .find(|&e| gs.is_safe_for(PlayerId::Second, e))
        .or_else(|| open.first().copied())
        .ok_or_else(|| HarnessError::Stuck("no edge left for the second player".into()))
}

/// Play one game of the stage strategy against `policy`.
///
/// When `n < 200k` the strategy runs best-effort: if it gets stuck the
/// second player switches to [`fallback_move`] for the rest of the game and
/// the transcript is flagged. With `n >= 200k` getting stuck is an error.
pub fn run_game(config: &RunConfig, policy: &AdversaryPolicy) -> Result<Transcript, HarnessError> {
    let (n, k) = (config.n, config.k);
    let mut gs = StarState::new(n, k)?;
    let mut ss = StrategyState::new(n, k);
    let guaranteed = ss.guaranteed();
    let mut derailed = false;
    let mut moves = Vec::new();
    while gs.is_ongoing() {
        let record = match gs.to_move() {
            PlayerId::First => MoveRecord {
                player: PlayerId::First,
                edge: policy.next_pi_move(&gs)?,
                annotation: None,
            },
            PlayerId::Second => {
                let decided = if derailed {
                    None
                } else {
                    match ss.theorem1_move(&gs) {
                        Ok(m) => Some(m),
                        Err(e) if guaranteed => {
                            return Err(HarnessError::Stuck(format!(
                                "n={n} k={k} adversary={policy} move {}: {e}",
                                gs.history().len() + 1
                            )))
                        }
                        Err(_) => {
                            derailed = true;
                            None
                        }
                    }
                };
                match decided {
                    Some(m) => MoveRecord {
                        player: PlayerId::Second,
                        edge: m.edge,
                        annotation: Some(m.annotation),
                    },
                    None => MoveRecord {
                        player: PlayerId::Second,
                        edge: fallback_move(&gs)?,
                        annotation: None,
                    },
                }
            }
        };
        gs.apply_move(record.edge)?;
        moves.push(record);
    }

    let mut flags = Vec::new();
    if !guaranteed {
        flags.push(FLAG_UNGUARANTEED.to_string());
    }
    if derailed {
        flags.push(FLAG_DERAILED.to_string());
    }
    let losing_move_index = match gs.status() {
        Status::Lost { losing_move_index, .. } => Some(losing_move_index),
        _ => None,
    };
    Ok(Transcript {
        version: TRANSCRIPT_VERSION,
        n,
        k,
        strategy: STRATEGY_ID.into(),
        adversary: policy.to_string(),
        seed: policy.seed,
        flags,
        moves,
        outcome: gs.outcome().expect("game over"),
        losing_move_index,
        monitor_violations: if config.monitor == MonitorLevel::Off {
            Vec::new()
        } else {
            ss.violations().to_vec()
        },
        endgame: ss.endgame().cloned(),
        claim_reached: ss.claim_reached(),
        config: config.clone(),
    })
}

/// Game `i` of a batch uses adversary seed `s + config.seed + i`, where `s`
/// is the seed written in the adversary spec (0 if absent). The parallel run
/// returns the same transcripts in the same order as the sequential one.
pub fn simulate(config: &RunConfig, parallel: bool) -> Result<Vec<Transcript>, HarnessError> {
    let policy: AdversaryPolicy = config.adversary.parse()?;
    let base = policy.seed.wrapping_add(config.seed);
    let one = |i: usize| run_game(config, &policy.with_seed(base.wrapping_add(i as u64)));
    if parallel {
        (0..config.games).into_par_iter().map(one).collect()
    } else {
        (0..config.games).map(one).collect()
    }
}

/// Re-run a transcript's first-player moves against a fresh strategy and
/// check that every move, annotation and the result come out identical.
pub fn verify_transcript(t: &Transcript) -> Result<(), HarnessError> {
    let fail = |what: String| Err(HarnessError::Replay(what));
    let gs = t.final_state()?;
    if gs.outcome() != Some(t.outcome) {
        return fail(format!("outcome {:?} replays as {:?}", t.outcome, gs.outcome()));
    }
    let idx = match gs.status() {
        Status::Lost { losing_move_index, .. } => Some(losing_move_index),
        _ => None,
    };
    if idx != t.losing_move_index {
        return fail(format!("losing move {:?} replays as {idx:?}", t.losing_move_index));
    }
    let script = AdversaryPolicy::replay(t.edges_of(PlayerId::First));
    let again = run_game(&t.config, &script)?;
    if again.moves != t.moves {
        return fail("moves or annotations differ on replay".into());
    }
    if again.monitor_violations != t.monitor_violations || again.endgame != t.endgame {
        return fail("monitor results differ on replay".into());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_board_is_flagged() {
        let cfg = RunConfig::simulate(50, 1, 1, 0, "random:1");
        let t = run_game(&cfg, &"random:1".parse().unwrap()).unwrap();
        assert!(!t.guaranteed());
        assert!(t.flags.contains(&FLAG_UNGUARANTEED.to_string()));
        verify_transcript(&t).unwrap();
    }

    #[test]
    fn transcript_round_trips_through_json() {
        let cfg = RunConfig::simulate(200, 1, 1, 4, "safe-random");
        let t = run_game(&cfg, &"safe-random:4".parse().unwrap()).unwrap();
        assert_eq!(t.outcome, Outcome::SecondWin);
        assert!(t.guaranteed());
        let line = t.to_json_line();
        assert!(!line.contains('\n'));
        let back: Transcript = serde_json::from_str(&line).unwrap();
        assert_eq!(back, t);
        assert!(line.contains(r#""player":"PII","edge":"#));
        verify_transcript(&back).unwrap();
    }

    #[test]
    fn tampered_transcript_fails_replay() {
        let cfg = RunConfig::simulate(200, 1, 1, 9, "random");
        let mut t = run_game(&cfg, &"random:9".parse().unwrap()).unwrap();
        let i = t.moves.iter().position(|m| m.player == PlayerId::Second).unwrap();
        t.moves[i].annotation = None;
        assert!(matches!(verify_transcript(&t), Err(HarnessError::Replay(_))));
    }

    #[test]
    fn parallel_batch_matches_sequential() {
        let cfg = RunConfig::simulate(200, 1, 6, 100, "degree-attacker");
        let a = simulate(&cfg, false).unwrap();
        let b = simulate(&cfg, true).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[3].seed, 103);
    }
}
