//! Exact game values for small boards.
//!
//! Positions keep one edge bitmask per player (boards up to 11 vertices, 55
//! edges). The search is a negamax over Win > Draw > Loss for the player to
//! move, with exact values cached in a transposition table keyed on a
//! relabelling-invariant key. A move that completes a star is a loss and is
//! never expanded; a full board with no loss is a draw.

mod canon;

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::time::{Duration, Instant};

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::star::{Edge, Outcome, PlayerId, StarState};

pub use canon::{canonicalize, isomorphic, raw_key, refine, CanonMode, FULL_PERMUTATION_MAX_N};

pub const MAX_N: usize = 11;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("board K_{n} with k = {k} is outside the solver's range (1 <= n <= {MAX_N}, k >= 1)")]
    InvalidParams { n: usize, k: usize },
    #[error("{mode} canonicalisation is unavailable for n = {n}")]
    ModeUnavailable { mode: CanonMode, n: usize },
    #[error("budget exceeded after {nodes} nodes ({elapsed_ms} ms)")]
    BudgetExceeded { nodes: u64, elapsed_ms: u128 },
    #[error("the game is over")]
    GameOver,
    #[error("illegal move {0}")]
    IllegalMove(Edge),
}

pub(crate) fn edge_index(u: usize, v: usize) -> usize {
    let (a, b) = if u < v { (u, v) } else { (v, u) };
    b * (b - 1) / 2 + a
}

pub(crate) fn edge_endpoints(i: usize) -> (usize, usize) {
    let mut b = 1;
    while (b + 1) * b / 2 <= i {
        b += 1;
    }
    (i - b * (b - 1) / 2, b)
}

/// All edges of `K_n` in lexicographic order.
pub fn lex_edges(n: usize) -> Vec<Edge> {
    (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| Edge::new(u, v)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Position {
    n: u8,
    k: u8,
    pub(crate) own: [u64; 2],
    pub(crate) deg: [[u8; MAX_N]; 2],
}

/// Result of playing one edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    /// The mover completed a star.
    Lost,
    /// The board filled up with no loser.
    Draw,
    Next(Position),
}

impl Step {
    pub fn position(self) -> Option<Position> {
        match self {
            Step::Next(p) => Some(p),
            _ => None,
        }
    }
}

impl Position {
    pub fn new(n: usize, k: usize) -> Result<Self, SolverError> {
        if n == 0 || n > MAX_N || k == 0 || k > u8::MAX as usize {
            return Err(SolverError::InvalidParams { n, k });
        }
        Ok(Self {
            n: n as u8,
            k: k as u8,
            own: [0, 0],
            deg: [[0; MAX_N]; 2],
        })
    }

    /// The ongoing position reached in `gs`.
    pub fn from_star(gs: &StarState) -> Result<Self, SolverError> {
        if !gs.is_ongoing() {
            return Err(SolverError::GameOver);
        }
        let mut p = Self::new(gs.n(), gs.k())?;
        for &e in gs.history() {
            p = p.play(e)?.position().ok_or(SolverError::GameOver)?;
        }
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }
    pub fn k(&self) -> usize {
        self.k as usize
    }
    fn edge_total(&self) -> usize {
        self.n() * (self.n() - 1) / 2
    }
    pub fn claimed(&self) -> u64 {
        self.own[0] | self.own[1]
    }
    pub fn is_full(&self) -> bool {
        self.claimed().count_ones() as usize == self.edge_total()
    }
    pub fn to_move(&self) -> PlayerId {
        if self.own[0].count_ones() == self.own[1].count_ones() {
            PlayerId::First
        } else {
            PlayerId::Second
        }
    }
    pub fn is_claimed(&self, e: Edge) -> bool {
        self.claimed() >> edge_index(e.u, e.v) & 1 == 1
    }
    pub fn is_safe(&self, e: Edge) -> bool {
        let m = self.to_move().index();
        (self.deg[m][e.u] as usize) < self.k() && (self.deg[m][e.v] as usize) < self.k()
    }

    pub fn play(&self, e: Edge) -> Result<Step, SolverError> {
        if e.v >= self.n() || e.u == e.v || self.is_claimed(e) {
            return Err(SolverError::IllegalMove(e));
        }
        if !self.is_safe(e) {
            return Ok(Step::Lost);
        }
        let m = self.to_move().index();
        let mut next = *self;
        next.own[m] |= 1 << edge_index(e.u, e.v);
        next.deg[m][e.u] += 1;
        next.deg[m][e.v] += 1;
        Ok(if next.is_full() { Step::Draw } else { Step::Next(next) })
    }

    /// Unclaimed edges, lexicographic.
    pub fn open_edges(&self) -> Vec<Edge> {
        lex_edges(self.n()).into_iter().filter(|&e| !self.is_claimed(e)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Budget {
    pub max_nodes: Option<u64>,
    pub max_secs: Option<f64>,
}

impl Default for Budget {
    fn default() -> Self {
        Self {
            max_nodes: Some(200_000_000),
            max_secs: Some(600.0),
        }
    }
}

impl Budget {
    pub const UNLIMITED: Budget = Budget {
        max_nodes: None,
        max_secs: None,
    };
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub outcome: Outcome,
    pub best_move: Option<Edge>,
    pub nodes: u64,
    pub table_hits: u64,
    pub elapsed: Duration,
}

enum Table {
    Exact(HashMap<u128, i8>),
    Buckets(HashMap<u128, Vec<(Position, i8)>>),
}

/// Negamax search with a transposition table that lives as long as the solver.
pub struct Solver {
    mode: CanonMode,
    budget: Budget,
    table: Table,
    nodes: u64,
    hits: u64,
    started: Instant,
}

fn value_to_outcome(v: i8, mover: PlayerId) -> Outcome {
    match v {
        1 => Outcome::loss_of(mover.other()),
        -1 => Outcome::loss_of(mover),
        _ => Outcome::Draw,
    }
}

impl Solver {
    pub fn new(mode: CanonMode, budget: Budget) -> Self {
        let table = match mode {
            CanonMode::RefinementHash => Table::Buckets(HashMap::new()),
            _ => Table::Exact(HashMap::new()),
        };
        Self {
            mode,
            budget,
            table,
            nodes: 0,
            hits: 0,
            started: Instant::now(),
        }
    }

    pub fn nodes(&self) -> u64 {
        self.nodes
    }
    pub fn table_hits(&self) -> u64 {
        self.hits
    }
    pub fn mode(&self) -> CanonMode {
        self.mode
    }

    fn exceeded(&self) -> SolverError {
        SolverError::BudgetExceeded {
            nodes: self.nodes,
            elapsed_ms: self.started.elapsed().as_millis(),
        }
    }

    fn lookup(&mut self, p: &Position, key: u128) -> Option<i8> {
        let found = match &self.table {
            Table::Exact(t) => t.get(&key).copied(),
            Table::Buckets(t) => t
                .get(&key)
                .and_then(|b| b.iter().find(|(q, _)| isomorphic(p, q)).map(|&(_, v)| v)),
        };
        if found.is_some() {
            self.hits += 1;
        }
        found
    }

    fn store(&mut self, p: &Position, key: u128, v: i8) {
        match &mut self.table {
            Table::Exact(t) => {
                t.insert(key, v);
            }
            Table::Buckets(t) => t.entry(key).or_default().push((*p, v)),
        }
    }

    /// Value of an ongoing position for the player to move.
    pub fn value(&mut self, p: &Position) -> Result<i8, SolverError> {
        self.nodes += 1;
        let out_of_time = self.nodes.is_multiple_of(4096)
            && self
                .budget
                .max_secs
                .is_some_and(|s| self.started.elapsed().as_secs_f64() > s);
        if out_of_time || self.budget.max_nodes.is_some_and(|m| self.nodes > m) {
            return Err(self.exceeded());
        }
        let key = canonicalize(p, self.mode)?;
        if let Some(v) = self.lookup(p, key) {
            return Ok(v);
        }
        let mut best = -1;
        for e in p.open_edges() {
            if !p.is_safe(e) {
                continue;
            }
            let v = match p.play(e)? {
                Step::Lost => -1,
                Step::Draw => 0,
                Step::Next(q) => -self.value(&q)?,
            };
            best = best.max(v);
            if best == 1 {
                break;
            }
        }
        self.store(p, key, best);
        Ok(best)
    }

    /// The lexicographically smallest move of best value, with that value.
    pub fn best_move(&mut self, p: &Position) -> Result<(Edge, i8), SolverError> {
        let open = p.open_edges();
        if open.is_empty() {
            return Err(SolverError::GameOver);
        }
        let mut best: Option<(Edge, i8)> = None;
        for e in open {
            let v = match p.play(e)? {
                Step::Lost => -1,
                Step::Draw => 0,
                Step::Next(q) => -self.value(&q)?,
            };
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((e, v));
            }
            if v == 1 {
                break;
            }
        }
        Ok(best.expect("at least one move"))
    }
}

pub fn solve(n: usize, k: usize, budget: Budget, mode: CanonMode) -> Result<SolveResult, SolverError> {
    let p = Position::new(n, k)?;
    if mode == CanonMode::FullPermutation && n > FULL_PERMUTATION_MAX_N {
        return Err(SolverError::ModeUnavailable { mode, n });
    }
    let mut s = Solver::new(mode, budget);
    let (outcome, best_move) = if n == 1 {
        (Outcome::Draw, None)
    } else {
        let (e, v) = s.best_move(&p)?;
        (value_to_outcome(v, PlayerId::First), Some(e))
    };
    Ok(SolveResult {
        outcome,
        best_move,
        nodes: s.nodes,
        table_hits: s.hits,
        elapsed: s.started.elapsed(),
    })
}

/// The exact outcome of `p` under optimal play.
pub fn position_outcome(p: &Position, mode: CanonMode) -> Result<Outcome, SolverError> {
    let mut s = Solver::new(mode, Budget::UNLIMITED);
    Ok(value_to_outcome(s.value(p)?, p.to_move()))
}

/// A complete game in which nobody ever completes a star, if one exists.
pub fn draw_reachable(n: usize, k: usize) -> Result<Option<Vec<Edge>>, SolverError> {
    let p = Position::new(n, k)?;
    let mode = CanonMode::default_for(n);
    let mut dead = HashSet::new();
    let mut line = Vec::new();
    if n == 1 || draw_line(&p, mode, &mut dead, &mut line)? {
        Ok(Some(line))
    } else {
        Ok(None)
    }
}

fn draw_line(
    p: &Position,
    mode: CanonMode,
    dead: &mut HashSet<u128>,
    line: &mut Vec<Edge>,
) -> Result<bool, SolverError> {
    let key = match mode {
        CanonMode::RefinementHash => raw_key(p),
        m => canonicalize(p, m)?,
    };
    if dead.contains(&key) {
        return Ok(false);
    }
    for e in p.open_edges() {
        line.push(e);
        match p.play(e)? {
            Step::Draw => return Ok(true),
            Step::Next(q) => {
                if draw_line(&q, mode, dead, line)? {
                    return Ok(true);
                }
            }
            Step::Lost => {}
        }
        line.pop();
    }
    dead.insert(key);
    Ok(false)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableOutcome {
    Solved(Outcome),
    BudgetExceeded,
}

impl fmt::Display for TableOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TableOutcome::Solved(o) => write!(f, "{o}"),
            TableOutcome::BudgetExceeded => f.write_str("BudgetExceeded"),
        }
    }
}

impl Serialize for TableOutcome {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// One line of an outcome table; field order matches the CSV columns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub n: usize,
    pub k: usize,
    pub outcome: TableOutcome,
    pub nodes: u64,
    pub elapsed_ms: u128,
    pub canonical_mode: CanonMode,
}

pub fn outcome_table(
    k: usize,
    ns: impl IntoIterator<Item = usize>,
    budget: Budget,
    mode: Option<CanonMode>,
) -> Result<Vec<TableRow>, SolverError> {
    let mut rows = Vec::new();
    for n in ns {
        let mode = mode.unwrap_or_else(|| CanonMode::default_for(n));
        let row = match solve(n, k, budget, mode) {
            Ok(r) => TableRow {
                n,
                k,
                outcome: TableOutcome::Solved(r.outcome),
                nodes: r.nodes,
                elapsed_ms: r.elapsed.as_millis(),
                canonical_mode: mode,
            },
            Err(SolverError::BudgetExceeded { nodes, elapsed_ms }) => TableRow {
                n,
                k,
                outcome: TableOutcome::BudgetExceeded,
                nodes,
                elapsed_ms,
                canonical_mode: mode,
            },
            Err(e) => return Err(e),
        };
        rows.push(row);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(u: usize, v: usize) -> Edge {
        Edge::new(u, v)
    }

    #[test]
    fn edge_index_round_trip() {
        for i in 0..55 {
            let (u, v) = edge_endpoints(i);
            assert!(u < v && v < MAX_N);
            assert_eq!(edge_index(u, v), i);
            assert_eq!(edge_index(v, u), i);
        }
    }

    #[test]
    fn tiny_boards() {
        let r = solve(2, 1, Budget::UNLIMITED, CanonMode::None).unwrap();
        assert_eq!(r.outcome, Outcome::Draw);
        assert_eq!(r.best_move, Some(e(0, 1)));
        assert_eq!(solve(1, 1, Budget::UNLIMITED, CanonMode::None).unwrap().outcome, Outcome::Draw);
        for mode in [CanonMode::None, CanonMode::FullPermutation, CanonMode::RefinementHash] {
            assert_eq!(solve(3, 1, Budget::UNLIMITED, mode).unwrap().outcome, Outcome::SecondWin);
        }
    }

    #[test]
    fn best_move_keeps_win() {
        let mut s = Solver::new(CanonMode::FullPermutation, Budget::UNLIMITED);
        let p = Position::new(3, 1).unwrap().play(e(0, 1)).unwrap().position().unwrap();
        let (m, v) = s.best_move(&p).unwrap();
        assert_eq!(v, 1);
        assert_eq!(m, e(0, 2));
    }

    #[test]
    fn all_moves_losing_gives_smallest() {
        // k = 1, n = 3 after 0-1, 0-2: PI must touch 1 or 2 via 1-2 and loses.
        let mut s = Solver::new(CanonMode::None, Budget::UNLIMITED);
        let p = Position::new(4, 1).unwrap();
        let p = p.play(e(0, 1)).unwrap().position().unwrap();
        let p = p.play(e(2, 3)).unwrap().position().unwrap();
        let (m, v) = s.best_move(&p).unwrap();
        assert_eq!(v, -1);
        assert_eq!(m, e(0, 2));
    }

    #[test]
    fn terminal_position_has_no_move() {
        let p = Position::new(2, 1).unwrap();
        assert_eq!(p.play(e(0, 1)).unwrap(), Step::Draw);
        assert_eq!(p.play(e(0, 2)), Err(SolverError::IllegalMove(e(0, 2))));
    }

    #[test]
    fn budget_is_enforced() {
        let b = Budget {
            max_nodes: Some(5000),
            max_secs: None,
        };
        assert!(matches!(
            solve(7, 2, b, CanonMode::None),
            Err(SolverError::BudgetExceeded { .. })
        ));
        let rows = outcome_table(2, [7], b, Some(CanonMode::None)).unwrap();
        assert_eq!(rows[0].outcome, TableOutcome::BudgetExceeded);
    }

    #[test]
    fn draw_lines_exist_only_on_small_boards() {
        let line = draw_reachable(2, 1).unwrap().unwrap();
        assert_eq!(line, vec![e(0, 1)]);
        assert!(draw_reachable(3, 2).unwrap().is_some());
        assert!(draw_reachable(4, 1).unwrap().is_none());
    }

    #[test]
    fn from_star_matches_moves() {
        let gs = StarState::from_moves(5, 2, [e(0, 1), e(1, 2)]).unwrap();
        let p = Position::from_star(&gs).unwrap();
        assert_eq!(p.to_move(), PlayerId::First);
        assert!(p.is_claimed(e(1, 2)));
        assert!(Position::new(12, 1).is_err());
    }
}
