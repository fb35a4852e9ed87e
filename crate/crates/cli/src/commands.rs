use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context};
use serde::Serialize;
use serde_json::json;

use starclip_core::adversary::{AdversaryPolicy, PolicyKind};
use starclip_core::harness::verify::{run_suite, Fault, Suite, SuiteReport, VerifyOptions};
use starclip_core::harness::{
    run_game, simulate as run_batch, HarnessError, MonitorLevel, PcgAdversaryKind, PcgBatch, RunConfig, Transcript,
};
use starclip_core::pcg::{exhaustive_check, play_pcg, PcgTranscript};
use starclip_core::solver::{outcome_table, Budget, CanonMode, SolverError, TableOutcome};
use starclip_core::{Outcome, SparseProfile, StarState, WorkGraph};

use crate::output::{destination, open, read_edges};
use crate::{CmdResult, ExportArgs, Failure, PcgArgs, SimulateArgs, SolveArgs, VerifyArgs};

/// Largest start the exhaustive clipping-game adversary accepts without `--force`.
const EXHAUSTIVE_MAX_V: usize = 10;

fn file_stem(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' }).collect()
}

fn harness_failure(e: HarnessError) -> Failure {
    match e {
        HarnessError::Stuck(m) => Failure::Invariant(format!("strategy stuck: {m}")),
        e @ HarnessError::Adversary(_) => Failure::Config(e.to_string()),
        e => Failure::Invariant(e.to_string()),
    }
}

pub fn simulate(a: &SimulateArgs, out_dir: Option<&Path>) -> CmdResult {
    StarState::new(a.n, a.k).map_err(|e| Failure::Config(e.to_string()))?;
    let mut policy: AdversaryPolicy = a.adversary.parse().map_err(|e| Failure::Config(format!("--adversary: {e}")))?;
    let mut cfg = RunConfig::simulate(a.n, a.k, a.games, a.seed, &a.adversary);
    cfg.monitor = a.monitor;

    let transcripts = match &a.script {
        Some(path) => {
            if policy.kind != PolicyKind::Replay {
                return Err(Failure::Config("--script needs --adversary replay".into()));
            }
            let script = read_edges(path)?.into_iter().map(|(u, v)| starclip_core::Edge::new(u, v));
            let base = policy.seed.wrapping_add(a.seed);
            policy = AdversaryPolicy::replay(script.collect());
            (0..a.games)
                .map(|i| run_game(&cfg, &policy.with_seed(base.wrapping_add(i as u64))))
                .collect::<Result<Vec<_>, _>>()
        }
        None => run_batch(&cfg, !a.sequential),
    }
    .map_err(harness_failure)?;

    let name = format!("simulate-k{}-n{}-{}-seed{}.jsonl", a.k, a.n, file_stem(&a.adversary), a.seed);
    let dest = destination(a.out.as_deref(), out_dir, &name);
    let mut w = open(dest.as_deref())?;
    for t in &transcripts {
        writeln!(w, "{}", t.to_json_line()).context("writing transcripts")?;
    }
    w.flush().context("writing transcripts")?;
    drop(w);

    let count = |o: Outcome| transcripts.iter().filter(|t| t.outcome == o).count();
    let guaranteed = transcripts.iter().filter(|t| t.guaranteed()).count();
    let with_violations: Vec<&Transcript> =
        transcripts.iter().filter(|t| !t.monitor_violations.is_empty()).collect();
    eprintln!(
        "games {} | PII wins {} | PI wins {} | draws {} | guaranteed {} | with monitor violations {}",
        transcripts.len(),
        count(Outcome::SecondWin),
        count(Outcome::FirstWin),
        count(Outcome::Draw),
        guaranteed,
        with_violations.len()
    );
    if let Some(p) = &dest {
        eprintln!("transcripts written to {}", p.display());
    }
    if a.monitor == MonitorLevel::Log {
        for t in &with_violations {
            eprintln!("seed {}: {:?}", t.seed, t.monitor_violations);
        }
    }
    if a.monitor == MonitorLevel::Assert {
        if let Some(t) = with_violations.iter().find(|t| t.guaranteed()) {
            return Err(Failure::Invariant(format!(
                "monitor violation in game with seed {}: {:?}",
                t.seed, t.monitor_violations
            )));
        }
    }
    if let Some(t) = transcripts.iter().find(|t| t.guaranteed() && t.outcome != Outcome::SecondWin) {
        return Err(Failure::Loss(format!("strategy did not win the game with seed {}: {}", t.seed, t.outcome)));
    }
    Ok(())
}

pub fn pcg(a: &PcgArgs, out_dir: Option<&Path>) -> CmdResult {
    let profile = SparseProfile::STANDARD;
    let fixed = match (&a.graph, a.random_starts) {
        (Some(path), _) => {
            let edges = read_edges(path)?;
            let v = match a.n {
                Some(n) => n,
                None => edges.iter().map(|&(_, v)| v + 1).max().unwrap_or(0),
            };
            Some(WorkGraph::from_edges(v, edges).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?)
        }
        (None, false) => Some(WorkGraph::empty(a.n.ok_or_else(|| anyhow!("--n or --graph is required"))?)),
        (None, true) => None,
    };
    let v = match (&fixed, a.n) {
        (Some(g), _) => g.universe(),
        (None, Some(n)) => n,
        (None, None) => return Err(Failure::Config("--random-starts needs --n".into())),
    };
    if let Some(g) = &fixed {
        if !g.is_fg_sparse(&profile) && !a.force {
            let e = HarnessError::NotSparse(format!("{} (pass --force to play anyway)", describe(g)));
            return Err(Failure::Config(e.to_string()));
        }
    }
    let batch = PcgBatch {
        v,
        starts: a.games,
        seed: a.seed,
        adversaries: Vec::new(),
        hub_every: 3,
    };
    let start_of = |i: usize| -> (WorkGraph, u64) {
        match &fixed {
            Some(g) => (g.clone(), a.seed.wrapping_add(i as u64)),
            None => batch.start(i),
        }
    };
    let kind: Option<PcgAdversaryKind> = if a.adversary == "exhaustive" {
        if v > EXHAUSTIVE_MAX_V && !a.force {
            return Err(Failure::Config(format!(
                "the exhaustive adversary is limited to {EXHAUSTIVE_MAX_V} vertices without --force"
            )));
        }
        None
    } else {
        Some(a.adversary.parse().map_err(Failure::Config)?)
    };
    let name = format!("pcg-v{v}-{}-seed{}.jsonl", file_stem(&a.adversary), a.seed);
    let dest = destination(a.out.as_deref(), out_dir, &name);
    let mut w = open(dest.as_deref())?;

    let Some(kind) = kind else {
        let mut lost = None;
        for i in 0..a.games {
            let (start, _) = start_of(i);
            let report = exhaustive_check(&start);
            let won = report.counterexample.is_none();
            let line = json!({
                "initial_graph": start,
                "adversary": "exhaustive",
                "states": report.states,
                "won": won,
                "counterexample": report.counterexample,
            });
            writeln!(w, "{line}").context("writing results")?;
            if !won && lost.is_none() {
                lost = Some(start);
            }
        }
        w.flush().context("writing results")?;
        eprintln!("starts {} | all first-player lines beaten: {}", a.games, lost.is_none());
        return match lost {
            Some(g) if g.is_fg_sparse(&profile) => {
                Err(Failure::Loss(format!("a first-player line beats the clip rule from {g}")))
            }
            _ => Ok(()),
        };
    };

    let mut results: Vec<(WorkGraph, Result<PcgTranscript, String>)> = Vec::new();
    for i in 0..a.games {
        let (start, seed) = start_of(i);
        let t = play_pcg(start.clone(), &mut kind.policy(seed)).map_err(|e| e.to_string());
        match &t {
            Ok(t) => writeln!(w, "{}", serde_json::to_string(t).context("serialising")?),
            Err(e) => writeln!(w, "{}", json!({ "initial_graph": start, "error": e })),
        }
        .context("writing transcripts")?;
        results.push((start, t));
    }
    w.flush().context("writing transcripts")?;
    drop(w);

    let mut branches = [0usize; 5];
    let mut wins = 0;
    let mut with_violations = 0;
    for (_, t) in &results {
        if let Ok(t) = t {
            wins += t.won as usize;
            with_violations += !t.violations.is_empty() as usize;
            for r in &t.rounds {
                if let Some(b) = r.branch {
                    branches[b as usize - 1] += 1;
                }
            }
        }
    }
    eprintln!(
        "games {} | wins {wins} | with monitor violations {with_violations} | clips by branch {branches:?}",
        results.len()
    );
    if let Some(p) = &dest {
        eprintln!("transcripts written to {}", p.display());
    }
    // Only sparse starts carry a guarantee.
    let guaranteed = |g: &WorkGraph| g.is_fg_sparse(&profile);
    for (g, t) in &results {
        match t {
            Ok(t) if !t.violations.is_empty() && guaranteed(g) => match a.monitor {
                MonitorLevel::Assert => {
                    return Err(Failure::Invariant(format!("monitor violation from {g}: {:?}", t.violations)))
                }
                MonitorLevel::Log => eprintln!("monitor violation from {g}: {:?}", t.violations),
                MonitorLevel::Off => {}
            },
            _ => {}
        }
    }
    for (g, t) in &results {
        let lost = match t {
            Ok(t) => !t.won,
            Err(_) => true,
        };
        if lost && guaranteed(g) {
            return Err(Failure::Loss(format!("clip rule lost from {g}: {t:?}")));
        }
        if lost {
            eprintln!("warning: clip rule lost from the forced start {g}");
        }
    }
    Ok(())
}

fn describe(g: &WorkGraph) -> String {
    let s = g.snapshot();
    format!("{} vertices, {} edges, maximum degree {}", s.v, s.e, s.delta)
}

fn parse_range(s: &str) -> anyhow::Result<Vec<usize>> {
    let s = s.trim();
    let (lo, hi) = match s.split_once("..") {
        Some((lo, hi)) => (lo, hi.trim_start_matches('=')),
        None => (s, s),
    };
    let lo: usize = lo.trim().parse().with_context(|| format!("bad board size in {s:?}"))?;
    let hi: usize = hi.trim().parse().with_context(|| format!("bad board size in {s:?}"))?;
    if lo > hi {
        bail!("empty range {s:?}");
    }
    Ok((lo..=hi).collect())
}

pub fn solve(a: &SolveArgs, out_dir: Option<&Path>) -> CmdResult {
    let ns = parse_range(&a.n)?;
    let mode = match &a.mode {
        Some(m) => Some(m.parse::<CanonMode>().map_err(Failure::Config)?),
        None => None,
    };
    let mut budget = Budget::default();
    if let Some(x) = a.budget_nodes {
        budget.max_nodes = Some(x);
    }
    if let Some(x) = a.budget_secs {
        budget.max_secs = Some(x);
    }
    let rows = outcome_table(a.k, ns, budget, mode).map_err(|e| match e {
        e @ (SolverError::InvalidParams { .. } | SolverError::ModeUnavailable { .. }) => Failure::Config(e.to_string()),
        e => Failure::Invariant(e.to_string()),
    })?;
    let dest = destination(a.out.as_deref(), out_dir, &format!("solve-k{}.csv", a.k));
    {
        let mut w = csv::Writer::from_writer(open(dest.as_deref())?);
        for r in &rows {
            w.serialize(r).context("writing CSV")?;
        }
        w.flush().context("writing CSV")?;
    }
    for r in &rows {
        eprintln!("n={} k={}: {} ({} nodes, {} ms, {})", r.n, r.k, r.outcome, r.nodes, r.elapsed_ms, r.canonical_mode);
        if r.outcome == TableOutcome::BudgetExceeded {
            eprintln!("warning: n={} k={} not solved within the budget", r.n, r.k);
        }
    }
    if let Some(p) = &dest {
        eprintln!("table written to {}", p.display());
    }
    Ok(())
}

pub fn verify(a: &VerifyArgs, out_dir: Option<&Path>) -> CmdResult {
    let suites: Vec<Suite> = if a.only.is_empty() {
        Suite::ALL.to_vec()
    } else {
        a.only.iter().map(|s| s.parse()).collect::<Result<_, _>>().map_err(Failure::Config)?
    };
    let fault = match a.inject_fault.as_deref() {
        None => None,
        Some("skip-degree-sum") => Some(Fault::SkipDegreeSum),
        Some(f) => return Err(Failure::Config(format!("unknown fault {f:?}; known: skip-degree-sum"))),
    };
    let opts = VerifyOptions {
        exhaustive_max: a.exhaustive_max,
        random_count: a.random_count,
        pcg_starts: a.pcg_starts,
        playouts: a.playouts,
        seed: a.seed,
        fault,
    };
    let mut reports: Vec<SuiteReport> = Vec::new();
    for s in suites {
        let r = run_suite(s, &opts);
        println!(
            "{}: {} ({} checked, {} failures){}",
            r.name,
            if r.passed() { "PASS" } else { "FAIL" },
            r.checked,
            r.failure_count,
            if r.detail.is_empty() { String::new() } else { format!(" {}", r.detail) }
        );
        for f in &r.failures {
            println!("  counterexample: {f}");
        }
        reports.push(r);
    }
    if let Some(p) = destination(a.out.as_deref(), out_dir, "verify.json") {
        let mut w = open(Some(&p))?;
        serde_json::to_writer_pretty(&mut w, &reports).context("writing report")?;
        writeln!(w).context("writing report")?;
        w.flush().context("writing report")?;
    }
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed()).map(|r| r.name.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Invariant(format!("suites failed: {}", failed.join(", "))))
    }
}

#[derive(Debug, Serialize)]
struct ExportRow<'a> {
    n: usize,
    k: usize,
    adversary: &'a str,
    seed: u64,
    outcome: String,
    losing_move_index: Option<usize>,
    moves: usize,
    guaranteed: bool,
    derailed: bool,
    monitor_violations: usize,
    pi_safe_at_window: Option<usize>,
    claim_reached: Option<bool>,
}

pub fn export(a: &ExportArgs, out_dir: Option<&Path>) -> CmdResult {
    let mut transcripts = Vec::new();
    for path in &a.inputs {
        let f = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
        for (i, line) in BufReader::new(f).lines().enumerate() {
            let line = line.with_context(|| format!("reading {}", path.display()))?;
            if line.trim().is_empty() {
                continue;
            }
            let t: Transcript = serde_json::from_str(&line)
                .with_context(|| format!("{}:{}: not a game transcript", path.display(), i + 1))?;
            transcripts.push(t);
        }
    }
    let dest = destination(a.out.as_deref(), out_dir, "summary.csv");
    let mut w = csv::Writer::from_writer(open(dest.as_deref())?);
    for t in &transcripts {
        w.serialize(ExportRow {
            n: t.n,
            k: t.k,
            adversary: &t.adversary,
            seed: t.seed,
            outcome: t.outcome.to_string(),
            losing_move_index: t.losing_move_index,
            moves: t.moves.len(),
            guaranteed: t.guaranteed(),
            derailed: t.derailed(),
            monitor_violations: t.monitor_violations.len(),
            pi_safe_at_window: t.endgame.as_ref().map(|e| e.pi_safe.len()),
            claim_reached: t.claim_reached,
        })
        .context("writing CSV")?;
    }
    w.flush().context("writing CSV")?;
    eprintln!("{} transcripts summarised", transcripts.len());
    Ok(())
}
