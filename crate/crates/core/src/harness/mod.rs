//! Batch runs, transcripts and verification suites.

mod clipping;
mod game;
pub mod verify;

use thiserror::Error;

use crate::adversary::AdversaryError;
use crate::pcg::PcgError;
use crate::star::StarError;

pub use clipping::{random_fg_sparse, run_pcg_batch, PcgAdversaryKind, PcgBatch, PcgSummary};
pub use game::{
    fallback_move, run_game, simulate, verify_transcript, MonitorLevel, MoveRecord, RunConfig, Transcript, FLAG_DERAILED,
    FLAG_UNGUARANTEED, STRATEGY_ID, TRANSCRIPT_VERSION,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("strategy stuck: {0}")]
    Stuck(String),
    #[error("transcript does not replay: {0}")]
    Replay(String),
    #[error("input graph is not (f, g)-sparse: {0}")]
    NotSparse(String),
    #[error(transparent)]
    Adversary(#[from] AdversaryError),
    #[error(transparent)]
    Star(#[from] StarError),
    #[error(transparent)]
    Pcg(#[from] PcgError),
}
