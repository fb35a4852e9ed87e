//! `starclip`: batch runs, suites, small-board solving and interactive play
//! for the star avoidance game.

mod commands;
mod output;
mod play;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use starclip_core::harness::MonitorLevel;

/// Exit statuses shared by every subcommand.
#[derive(Debug)]
pub enum Failure {
    /// Monitor fired under `--monitor assert`, the strategy got stuck, or a suite failed.
    Invariant(String),
    /// The second player lost a game it is supposed to win.
    Loss(String),
    /// Bad flags, unreadable input, or a board the command cannot handle.
    Config(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Invariant(_) => 2,
            Failure::Loss(_) => 3,
            Failure::Config(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Invariant(m) | Failure::Loss(m) | Failure::Config(m) => m,
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Config(format!("{e:#}"))
    }
}

pub type CmdResult = Result<(), Failure>;

#[derive(Debug, Parser)]
#[command(name = "starclip", version, about = "Star avoidance game: strategy runs, suites, solver and play")]
pub struct Cli {
    /// Directory for output files when `--out` is not given.
    #[arg(long, global = true, env = "STARCLIP_OUT_DIR")]
    pub out_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Play the stage strategy against a first-player policy and write JSONL transcripts.
    Simulate(SimulateArgs),
    /// Play the clip rule of the pair clipping game from a given or empty start.
    Pcg(PcgArgs),
    /// Solve small boards exactly and write an outcome table as CSV.
    Solve(SolveArgs),
    /// Run the verification suites.
    Verify(VerifyArgs),
    /// Play as the first player against the engine on the terminal.
    Play(PlayArgs),
    /// Summarise JSONL transcripts into a CSV table.
    Export(ExportArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, default_value_t = 1)]
    pub games: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `name[:seed[:key=value,...]]`; game `i` uses the spec's seed plus `--seed` plus `i`.
    #[arg(long, default_value = "random")]
    pub adversary: String,
    #[arg(long, default_value_t = MonitorLevel::Assert)]
    pub monitor: MonitorLevel,
    /// Output file; `-` for stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// First-player script for the replay policy, one edge per line.
    #[arg(long)]
    pub script: Option<PathBuf>,
    /// Run games one after another instead of on the thread pool.
    #[arg(long)]
    pub sequential: bool,
}

#[derive(Debug, Args)]
pub struct PcgArgs {
    /// Number of vertices; taken from the graph file when omitted there.
    #[arg(long)]
    pub n: Option<usize>,
    /// Start graph as an edge list, one `u v` per line.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Draw a fresh random sparse start for every game instead.
    #[arg(long, conflicts_with = "graph")]
    pub random_starts: bool,
    #[arg(long, default_value_t = 1)]
    pub games: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// pass-only, random, attacker or exhaustive.
    #[arg(long, default_value = "random")]
    pub adversary: String,
    #[arg(long, default_value_t = MonitorLevel::Assert)]
    pub monitor: MonitorLevel,
    /// Play even if the start graph is not sparse enough.
    #[arg(long)]
    pub force: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub k: usize,
    /// A board size or an inclusive range such as `2..7`.
    #[arg(long)]
    pub n: String,
    #[arg(long)]
    pub budget_nodes: Option<u64>,
    #[arg(long)]
    pub budget_secs: Option<f64>,
    /// none, full-permutation or refinement-hash; chosen per board when omitted.
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Run only these suites (comma separated or repeated).
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<String>,
    #[arg(long, default_value_t = 8)]
    pub exhaustive_max: usize,
    #[arg(long, default_value_t = 10_000)]
    pub random_count: usize,
    #[arg(long, default_value_t = 1_000)]
    pub pcg_starts: usize,
    #[arg(long, default_value_t = 1_000)]
    pub playouts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Break a check on purpose: `skip-degree-sum`.
    #[arg(long)]
    pub inject_fault: Option<String>,
    /// Write the reports as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlayArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// theorem1 (stage strategy) or solver; the solver is used up to 8 vertices by default.
    #[arg(long)]
    pub engine: Option<String>,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    /// JSONL transcript files.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(4) } else { ExitCode::SUCCESS };
        }
    };
    let out_dir = cli.out_dir.clone();
    let result = match cli.command {
        Command::Simulate(a) => commands::simulate(&a, out_dir.as_deref()),
        Command::Pcg(a) => commands::pcg(&a, out_dir.as_deref()),
        Command::Solve(a) => commands::solve(&a, out_dir.as_deref()),
        Command::Verify(a) => commands::verify(&a, out_dir.as_deref()),
        Command::Play(a) => play::run(&a),
        Command::Export(a) => commands::export(&a, out_dir.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
