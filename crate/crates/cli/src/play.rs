use std::io::{self, BufRead, Write};

use starclip_core::harness::fallback_move;
use starclip_core::solver::{Budget, CanonMode, Position, Solver, MAX_N};
use starclip_core::strategy::StrategyState;
use starclip_core::{Edge, PlayerId, StarState, Status};

use crate::{CmdResult, Failure, PlayArgs};

/// Boards up to this size get the solver when no engine is named.
const SOLVER_DEFAULT_MAX_N: usize = 8;

enum Engine {
    Stages { state: Box<StrategyState>, derailed: bool },
    Solver(Solver),
}

impl Engine {
    fn reply(&mut self, gs: &StarState) -> Result<Edge, Failure> {
        match self {
            Engine::Stages { state, derailed } => {
                if !*derailed {
                    match state.theorem1_move(gs) {
                        Ok(m) => return Ok(m.edge),
                        Err(e) if state.guaranteed() => {
                            return Err(Failure::Invariant(format!("strategy stuck: {e}")))
                        }
                        Err(e) => {
                            println!("(strategy has no guaranteed move on this board: {e}; playing the first safe edge from now on)");
                            *derailed = true;
                        }
                    }
                }
                fallback_move(gs).map_err(|e| Failure::Invariant(e.to_string()))
            }
            Engine::Solver(s) => {
                let p = Position::from_star(gs).map_err(|e| Failure::Invariant(e.to_string()))?;
                s.best_move(&p).map(|(e, _)| e).map_err(|e| Failure::Invariant(e.to_string()))
            }
        }
    }
}

fn render(gs: &StarState) {
    for p in [PlayerId::First, PlayerId::Second] {
        let mine: Vec<String> = gs
            .history()
            .iter()
            .filter(|&&e| gs.owner(e) == Some(p))
            .map(|e| e.to_string())
            .collect();
        println!("{p} edges: {}", if mine.is_empty() { "-".into() } else { mine.join(" ") });
    }
    let rows: Vec<String> = (0..gs.n())
        .filter(|&v| gs.degree(PlayerId::First, v) + gs.degree(PlayerId::Second, v) > 0)
        .map(|v| format!("{v}:{}/{}", gs.degree(PlayerId::First, v), gs.degree(PlayerId::Second, v)))
        .collect();
    if !rows.is_empty() {
        println!("degrees PI/PII: {}", rows.join(" "));
    }
}

/// Prints the result and reports whether the game is over.
fn announce(gs: &StarState) -> bool {
    match gs.status() {
        Status::Ongoing => false,
        Status::Lost { player, losing_move_index } => {
            println!("{player} loses: a star with {} edges on move {losing_move_index}", gs.k() + 1);
            true
        }
        Status::Draw => {
            println!("Draw: every edge is claimed and nobody completed a star");
            true
        }
    }
}

pub fn run(a: &PlayArgs) -> CmdResult {
    let mut gs = StarState::new(a.n, a.k).map_err(|e| Failure::Config(e.to_string()))?;
    let engine_name = a
        .engine
        .clone()
        .unwrap_or_else(|| if a.n <= SOLVER_DEFAULT_MAX_N { "solver" } else { "theorem1" }.into());
    let mut engine = match engine_name.as_str() {
        "theorem1" => Engine::Stages {
            state: Box::new(StrategyState::new(a.n, a.k)),
            derailed: false,
        },
        "solver" if a.n <= MAX_N => Engine::Solver(Solver::new(CanonMode::default_for(a.n), Budget::default())),
        "solver" => return Err(Failure::Config(format!("the solver handles at most {MAX_N} vertices"))),
        other => return Err(Failure::Config(format!("unknown engine {other:?}; use theorem1 or solver"))),
    };
    println!(
        "n={} k={}: you are PI and move first; whoever completes a star with {} edges loses. Enter moves as `u v`, `quit` to stop.",
        a.n,
        a.k,
        a.k + 1
    );
    let stdin = io::stdin();
    let mut lines = stdin.lock().lines();
    loop {
        print!("PI> ");
        io::stdout().flush().ok();
        let Some(line) = lines.next() else {
            println!();
            println!("input closed");
            return Ok(());
        };
        let line = line.map_err(|e| Failure::Config(format!("reading input: {e}")))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line == "quit" || line == "q" {
            return Ok(());
        }
        let edge: Edge = match line.parse() {
            Ok(e) => e,
            Err(e) => {
                println!("error: {e}");
                continue;
            }
        };
        if let Err(e) = gs.apply_move(edge) {
            println!("error: {e}");
            continue;
        }
        if announce(&gs) {
            render(&gs);
            return Ok(());
        }
        let reply = engine.reply(&gs)?;
        gs.apply_move(reply).map_err(|e| Failure::Invariant(e.to_string()))?;
        println!("PII plays {reply}");
        render(&gs);
        if announce(&gs) {
            return Ok(());
        }
    }
}
