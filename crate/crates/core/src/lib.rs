//! Engine for the `(k+1)`-star avoidance game on `K_n`.
//!
//! - [`graph`]: graphs with a fixed vertex universe, sparseness tests and nice pairs
//! - [`pcg`]: the pair clipping game and the second player's clip rule
//! - [`star`]: rules of the star avoidance game
//! - [`strategy`]: the second player's stage-based winning strategy
//! - [`adversary`]: seeded first-player policies
//! - [`solver`]: exact solver for small boards
//! - [`harness`]: batch simulation, transcripts and verification suites

pub mod adversary;
pub mod bitset;
pub mod graph;
pub mod harness;
pub mod pcg;
pub mod solver;
pub mod star;
pub mod strategy;

pub use graph::{GraphError, SparseProfile, VertexId, WorkGraph};
pub use star::{Edge, Outcome, PlayerId, StarState, Status};

