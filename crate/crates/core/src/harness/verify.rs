//! Verification suites: exhaustive small-graph checks of the nice-pair and
//! clipping-density facts, exhaustive and randomized runs of the clip rule,
//! and random playouts of the star game.
//!
//! Small graphs are enumerated as labelled graphs on `u16` adjacency rows,
//! and the checks here recompute degrees and densities on those rows
//! instead of trusting [`WorkGraph`]'s own bookkeeping.

use std::fmt;
use std::str::FromStr;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::clipping::{run_pcg_batch, PcgAdversaryKind, PcgBatch};
use crate::graph::{SparseProfile, WorkGraph};
use crate::pcg::ExhaustiveChecker;
use crate::solver::draw_reachable;
use crate::star::{Edge, PlayerId, StarState, Status};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Lemma2,
    Lemma3,
    Theorem5Exhaustive,
    Theorem5Random,
    Nondraw,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Lemma2,
        Suite::Lemma3,
        Suite::Theorem5Exhaustive,
        Suite::Theorem5Random,
        Suite::Nondraw,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Lemma2 => "lemma2",
            Suite::Lemma3 => "lemma3",
            Suite::Theorem5Exhaustive => "theorem5-exhaustive",
            Suite::Theorem5Random => "theorem5-random",
            Suite::Nondraw => "nondraw",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown suite {s:?}"))
    }
}

/// Deliberate defects, used to show a suite can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// Clip pairs in the density check whether or not their degree sum is large enough.
    SkipDegreeSum,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub exhaustive_max: usize,
    pub random_count: usize,
    pub pcg_starts: usize,
    pub playouts: usize,
    pub seed: u64,
    pub fault: Option<Fault>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            exhaustive_max: 8,
            random_count: 10_000,
            pcg_starts: 1_000,
            playouts: 1_000,
            seed: 0,
            fault: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub name: String,
    pub checked: u64,
    pub detail: String,
    /// Up to 20 counterexamples.
    pub failures: Vec<String>,
    pub failure_count: u64,
}

impl SuiteReport {
    fn new(name: &str) -> Self {
        Self {
            name: name.into(),
            checked: 0,
            detail: String::new(),
            failures: Vec::new(),
            failure_count: 0,
        }
    }

    fn fail(&mut self, what: String) {
        self.failure_count += 1;
        if self.failures.len() < 20 {
            self.failures.push(what);
        }
    }

    fn merge(&mut self, other: SuiteReport) {
        self.checked += other.checked;
        self.failure_count += other.failure_count;
        for f in other.failures {
            if self.failures.len() < 20 {
                self.failures.push(f);
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.failure_count == 0
    }
}

/// A labelled graph on at most 16 vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmallGraph {
    pub v: usize,
    pub rows: Vec<u16>,
}

impl SmallGraph {
    fn empty(v: usize) -> Self {
        Self { v, rows: vec![0; v] }
    }
    fn has(&self, a: usize, b: usize) -> bool {
        self.rows[a] >> b & 1 == 1
    }
    fn toggle(&mut self, a: usize, b: usize) {
        self.rows[a] ^= 1 << b;
        self.rows[b] ^= 1 << a;
    }
    fn deg(&self, a: usize) -> usize {
        self.rows[a].count_ones() as usize
    }
    fn edges(&self) -> usize {
        self.rows.iter().map(|r| r.count_ones() as usize).sum::<usize>() / 2
    }
    pub fn to_work_graph(&self) -> WorkGraph {
        let mut g = WorkGraph::empty(self.v);
        for a in 0..self.v {
            for b in a + 1..self.v {
                if self.has(a, b) {
                    g.add_edge(a, b).expect("fresh edge");
                }
            }
        }
        g
    }
}

/// Visit every labelled graph on `v` vertices with maximum degree at most
/// `max_deg` and at most `max_e` edges.
pub fn for_each_graph(v: usize, max_deg: usize, max_e: usize, visit: &mut dyn FnMut(&SmallGraph)) {
    let pairs: Vec<(usize, usize)> = (0..v).flat_map(|a| (a + 1..v).map(move |b| (a, b))).collect();
    let mut g = SmallGraph::empty(v);
    fn rec(
        i: usize,
        e: usize,
        pairs: &[(usize, usize)],
        g: &mut SmallGraph,
        max_deg: usize,
        max_e: usize,
        visit: &mut dyn FnMut(&SmallGraph),
    ) {
        if i == pairs.len() || e == max_e {
            visit(g);
            return;
        }
        rec(i + 1, e, pairs, g, max_deg, max_e, visit);
        let (a, b) = pairs[i];
        if g.deg(a) < max_deg && g.deg(b) < max_deg {
            g.toggle(a, b);
            rec(i + 1, e + 1, pairs, g, max_deg, max_e, visit);
            g.toggle(a, b);
        }
    }
    rec(0, 0, &pairs, &mut g, max_deg, max_e, visit);
}

/// Every nice pair, lexicographically: non-adjacent with `v (d(a) + d(b)) >= 4e`.
fn nice_pairs(g: &SmallGraph) -> Vec<(usize, usize)> {
    let e = g.edges();
    let mut out = Vec::new();
    for a in 0..g.v {
        for b in a + 1..g.v {
            if !g.has(a, b) && g.v * (g.deg(a) + g.deg(b)) >= 4 * e {
                out.push((a, b));
            }
        }
    }
    out
}

/// `2e <= v (v/100 + 1)`, written as `200e <= v (v + 100)`.
fn g_sparse_plain(v: usize, e: usize) -> bool {
    200 * e <= v * (v + 100)
}

fn check_nice_pair(g: &SmallGraph, report: &mut SuiteReport) {
    report.checked += 1;
    let oracle = nice_pairs(g);
    let found = g.to_work_graph().find_nice_pair();
    match (found, oracle.first()) {
        (Ok(Some(p)), Some(&q)) if p == q => {}
        (found, want) => report.fail(format!("{}: found {found:?}, expected {want:?}", g.to_work_graph())),
    }
}

fn random_graph(v: usize, max_deg: usize, max_e: usize, rng: &mut ChaCha8Rng) -> SmallGraph {
    let mut g = SmallGraph::empty(v);
    let target = rng.random_range(0..=max_e);
    let mut attempts = 0;
    while g.edges() < target && attempts < 40 * v * v {
        attempts += 1;
        let a = rng.random_range(0..v);
        let b = rng.random_range(0..v);
        if a != b && !g.has(a, b) && g.deg(a) < max_deg && g.deg(b) < max_deg {
            g.toggle(a, b);
        }
    }
    g
}

/// Graphs with `2Δ <= v - 2` always have a nice pair, and `find_nice_pair`
/// returns the smallest one.
pub fn lemma2(opts: &VerifyOptions) -> SuiteReport {
    let mut report = SuiteReport::new("lemma2");
    let mut per_v = Vec::new();
    for v in 2..=opts.exhaustive_max.min(16) {
        let before = report.checked;
        for_each_graph(v, (v - 2) / 2, usize::MAX, &mut |g| check_nice_pair(g, &mut report));
        per_v.push(format!("v={v}:{}", report.checked - before));
    }
    let exhaustive = report.checked;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..opts.random_count {
        let v = rng.random_range(9..=16);
        let g = random_graph(v, (v - 2) / 2, v * v, &mut rng);
        check_nice_pair(&g, &mut report);
    }
    // Beyond 16 vertices go through WorkGraph with a plain degree-sum scan.
    for _ in 0..opts.random_count {
        let v = rng.random_range(17..=40);
        let cap = (v - 2) / 2;
        let mut g = WorkGraph::empty(v);
        let target = rng.random_range(0..=v * cap / 2);
        for _ in 0..40 * v * v {
            if g.edge_count() >= target {
                break;
            }
            let (a, b) = (rng.random_range(0..v), rng.random_range(0..v));
            if a != b && !g.has_edge(a, b) && g.degree_unchecked(a) < cap && g.degree_unchecked(b) < cap {
                g.add_edge(a, b).expect("fresh edge");
            }
        }
        report.checked += 1;
        let e = g.edge_count();
        let want = (0..v)
            .flat_map(|a| (a + 1..v).map(move |b| (a, b)))
            .find(|&(a, b)| !g.has_edge(a, b) && v * (g.degree_unchecked(a) + g.degree_unchecked(b)) >= 4 * e);
        match g.find_nice_pair() {
            Ok(Some(p)) if Some(p) == want => {}
            other => report.fail(format!("{g}: found {other:?}, expected {want:?}")),
        }
    }
    report.detail = format!(
        "exhaustive {exhaustive} graphs ({}), random {}",
        per_v.join(" "),
        report.checked - exhaustive
    );
    report
}

/// Clip `{a, b}` from `g` (already carrying the added edge) and check the
/// density bound, given the density of the graph before the added edge.
fn check_clip(g: &SmallGraph, base_e: usize, a: usize, b: usize, fault: Option<Fault>, report: &mut SuiteReport) {
    if g.has(a, b) {
        return;
    }
    let qualifies = g.v * (g.deg(a) + g.deg(b)) >= 4 * base_e;
    if !qualifies && fault != Some(Fault::SkipDegreeSum) {
        return;
    }
    report.checked += 1;
    let e2 = g.edges() - g.deg(a) - g.deg(b);
    let v2 = g.v - 2;
    let plain = g_sparse_plain(v2, e2);
    let profile = SparseProfile::STANDARD.average_ok(v2, e2);
    if !plain || !profile {
        report.fail(format!(
            "v={} e={base_e} rows={:?} clip ({a},{b}) leaves v={v2} e={e2} (plain {plain}, profile {profile})",
            g.v, g.rows
        ));
    }
}

fn lemma3_instance(g: &SmallGraph, fault: Option<Fault>, report: &mut SuiteReport) {
    let base_e = g.edges();
    let mut with = g.clone();
    let mut options: Vec<Option<(usize, usize)>> = vec![None];
    for a in 0..g.v {
        for b in a + 1..g.v {
            if !g.has(a, b) {
                options.push(Some((a, b)));
            }
        }
    }
    for add in options {
        if let Some((a, b)) = add {
            with.toggle(a, b);
        }
        for a in 0..g.v {
            for b in a + 1..g.v {
                check_clip(&with, base_e, a, b, fault, report);
            }
        }
        if let Some((a, b)) = add {
            with.toggle(a, b);
        }
    }
}

/// Clipping a pair whose degree sum is at least twice the old average
/// degree keeps a `g`-sparse graph `g`-sparse, after at most one added edge.
pub fn lemma3(opts: &VerifyOptions) -> SuiteReport {
    let mut report = SuiteReport::new("lemma3");
    let top = opts.exhaustive_max.min(7);
    let mut graphs = 0;
    for v in 4..=top {
        let max_e = (0..).take_while(|&e| g_sparse_plain(v, e)).last().unwrap_or(0);
        for_each_graph(v, v, max_e, &mut |g| {
            graphs += 1;
            lemma3_instance(g, opts.fault, &mut report);
        });
    }
    let exhaustive = report.checked;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x5eed);
    let mut instances = 0;
    while instances < opts.random_count {
        let v = rng.random_range(8..=16);
        let max_e = (0..).take_while(|&e| g_sparse_plain(v, e)).last().unwrap_or(0);
        let mut g = random_graph(v, v, max_e, &mut rng);
        let base_e = g.edges();
        let absent: Vec<(usize, usize)> = (0..v)
            .flat_map(|a| (a + 1..v).map(move |b| (a, b)))
            .filter(|&(a, b)| !g.has(a, b))
            .collect();
        if rng.random_bool(0.9) {
            if let Some(&(a, b)) = absent.choose(&mut rng) {
                g.toggle(a, b);
            }
        }
        let candidates: Vec<(usize, usize)> = (0..v)
            .flat_map(|a| (a + 1..v).map(move |b| (a, b)))
            .filter(|&(a, b)| {
                !g.has(a, b)
                    && (opts.fault == Some(Fault::SkipDegreeSum) || v * (g.deg(a) + g.deg(b)) >= 4 * base_e)
            })
            .collect();
        if let Some(&(a, b)) = candidates.choose(&mut rng) {
            instances += 1;
            check_clip(&g, base_e, a, b, opts.fault, &mut report);
        }
    }
    report.detail = format!(
        "exhaustive {graphs} graphs on 4..={top} vertices, {exhaustive} clips; random {instances} clips"
    );
    report
}

/// The clip rule wins from every `(f, g)`-sparse start on at most
/// `exhaustive_max` vertices against every first-player line.
pub fn theorem5_exhaustive(opts: &VerifyOptions) -> SuiteReport {
    let profile = SparseProfile::STANDARD;
    let reports: Vec<(usize, SuiteReport, usize)> = (1..=opts.exhaustive_max.min(10))
        .into_par_iter()
        .map(|v| {
            let mut report = SuiteReport::new("theorem5-exhaustive");
            let mut checker = ExhaustiveChecker::new();
            let max_e = (0..).take_while(|&e| profile.average_ok(v, e)).last().unwrap_or(0);
            let max_deg = v.saturating_sub(1) / 2;
            for_each_graph(v, max_deg, max_e, &mut |g| {
                let w = g.to_work_graph();
                debug_assert!(w.is_fg_sparse(&profile));
                report.checked += 1;
                if let Err(line) = checker.check(&w) {
                    report.fail(format!("{w}: first-player line {line:?}"));
                }
            });
            let states = checker.states();
            (v, report, states)
        })
        .collect();
    let mut report = SuiteReport::new("theorem5-exhaustive");
    let mut parts = Vec::new();
    for (v, r, states) in reports {
        parts.push(format!("v={v}:{}/{states}", r.checked));
        report.merge(r);
    }
    report.detail = format!("starts/states per order: {}", parts.join(" "));
    report
}

/// Random `(f, g)`-sparse starts on 10, 20 and 40 vertices against the
/// random and attacking adversaries, with the degree and density monitors on.
pub fn theorem5_random(opts: &VerifyOptions) -> SuiteReport {
    let mut report = SuiteReport::new("theorem5-random");
    let mut parts = Vec::new();
    for v in [10, 20, 40] {
        let batch = PcgBatch {
            v,
            starts: opts.pcg_starts,
            seed: opts.seed.wrapping_add(v as u64 * 1_000_003),
            adversaries: vec![PcgAdversaryKind::Random, PcgAdversaryKind::Attacker],
            hub_every: 3,
        };
        match run_pcg_batch(&batch, true) {
            Ok(s) => {
                report.checked += s.games as u64;
                for f in &s.failures {
                    report.fail(f.clone());
                }
                parts.push(format!("v={v}: {}/{} won, branches {:?}", s.wins, s.games, s.branch_counts));
            }
            Err(e) => report.fail(format!("v={v}: {e}")),
        }
    }
    report.detail = parts.join("; ");
    report
}

/// Boards where a draw is impossible (`n >= 2k + 2`).
pub const NONDRAW_BOARDS: [(usize, usize); 4] = [(1, 4), (2, 6), (3, 8), (1, 30)];
/// Boards small enough for a draw.
pub const DRAW_BOARDS: [(usize, usize); 2] = [(1, 2), (2, 3)];

/// One game with both players choosing uniformly among their safe edges
/// (any edge once none is safe). Returns the final state, or a description
/// of the first breach of `Δ(Γ) <= 2k`.
pub fn random_playout(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Result<StarState, String> {
    let mut gs = StarState::new(n, k).map_err(|e| e.to_string())?;
    while gs.is_ongoing() {
        let open = gs.legal_moves().map_err(|e| e.to_string())?;
        let me = gs.to_move();
        let safe: Vec<Edge> = open.iter().copied().filter(|&e| gs.is_safe_for(me, e)).collect();
        let pool = if safe.is_empty() { &open } else { &safe };
        let e = *pool.choose(rng).expect("ongoing game has an open edge");
        gs.apply_move(e).map_err(|e| e.to_string())?;
        if gs.is_ongoing() && gs.gamma_max_degree() > 2 * k {
            return Err(format!("Δ(Γ) = {} after {:?}", gs.gamma_max_degree(), gs.history()));
        }
    }
    Ok(gs)
}

pub fn nondraw(opts: &VerifyOptions) -> SuiteReport {
    let mut report = SuiteReport::new("nondraw");
    let mut parts = Vec::new();
    for (k, n) in NONDRAW_BOARDS {
        let results: Vec<Result<StarState, String>> = (0..opts.playouts)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add((n * 7919 + k) as u64 * 1_000_000 + i as u64));
                random_playout(n, k, &mut rng)
            })
            .collect();
        let mut first_losses = 0;
        for (i, r) in results.into_iter().enumerate() {
            report.checked += 1;
            match r {
                Ok(gs) => match gs.status() {
                    Status::Lost { player, .. } => {
                        if player == PlayerId::First {
                            first_losses += 1;
                        }
                    }
                    s => report.fail(format!("(k={k}, n={n}) playout {i} ended {s:?}")),
                },
                Err(e) => report.fail(format!("(k={k}, n={n}) playout {i}: {e}")),
            }
        }
        parts.push(format!("(k={k},n={n}) first player lost {first_losses}/{}", opts.playouts));
    }
    for (k, n) in DRAW_BOARDS {
        report.checked += 1;
        match draw_reachable(n, k) {
            Ok(Some(line)) => parts.push(format!("(k={k},n={n}) draw via {} moves", line.len())),
            other => report.fail(format!("(k={k}, n={n}) no drawn line: {other:?}")),
        }
    }
    report.detail = parts.join("; ");
    report
}

pub fn run_suite(s: Suite, opts: &VerifyOptions) -> SuiteReport {
    match s {
        Suite::Lemma2 => lemma2(opts),
        Suite::Lemma3 => lemma3(opts),
        Suite::Theorem5Exhaustive => theorem5_exhaustive(opts),
        Suite::Theorem5Random => theorem5_random(opts),
        Suite::Nondraw => nondraw(opts),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> VerifyOptions {
        VerifyOptions {
            exhaustive_max: 6,
            random_count: 200,
            pcg_starts: 20,
            playouts: 50,
            seed: 11,
            fault: None,
        }
    }

    #[test]
    fn graph_counts_match_known_values() {
        // Labelled graphs on 4 vertices: 64; with maximum degree 1: 10 (matchings).
        let mut all = 0;
        for_each_graph(4, 4, usize::MAX, &mut |_| all += 1);
        assert_eq!(all, 64);
        let mut matchings = 0;
        for_each_graph(4, 1, usize::MAX, &mut |_| matchings += 1);
        assert_eq!(matchings, 10);
        let mut small = 0;
        for_each_graph(5, 5, 1, &mut |_| small += 1);
        assert_eq!(small, 11);
    }

    #[test]
    fn quick_suites_pass() {
        for s in Suite::ALL {
            let r = run_suite(s, &quick());
            assert!(r.passed(), "{s}: {:?}", r.failures);
            assert!(r.checked > 0, "{s}");
        }
    }

    #[test]
    fn skipping_degree_sum_breaks_lemma3() {
        let opts = VerifyOptions {
            fault: Some(Fault::SkipDegreeSum),
            ..quick()
        };
        let r = lemma3(&opts);
        assert!(!r.passed());
        assert!(!r.failures.is_empty());
    }

    #[test]
    fn suite_names_parse() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>(), Ok(s));
        }
    }
}
