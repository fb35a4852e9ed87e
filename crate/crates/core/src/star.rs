//! Rules of the `(k+1)`-star avoidance game on `K_n`.
//!
//! Players alternately claim unclaimed edges, the first player moving first.
//! A player whose own edges reach degree `k+1` at some vertex loses on that
//! move. If every edge gets claimed without a loss the game is drawn.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bitset::BitSet;
use crate::graph::VertexId;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StarError {
    #[error("invalid parameters n={n}, k={k} (both must be at least 1)")]
    InvalidParams { n: usize, k: usize },
    #[error("edge {0} is already claimed")]
    AlreadyClaimed(Edge),
    #[error("edge {0} is not an edge of K_{1}")]
    NotAnEdge(Edge, usize),
    #[error("the game is over")]
    GameOver,
    #[error("malformed edge {0:?}, expected two vertex numbers such as `0 1` or `0-1`")]
    BadEdge(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PlayerId {
    #[serde(rename = "PI")]
    First,
    #[serde(rename = "PII")]
    Second,
}

impl PlayerId {
    pub fn other(self) -> Self {
        match self {
            PlayerId::First => PlayerId::Second,
            PlayerId::Second => PlayerId::First,
        }
    }

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for PlayerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PlayerId::First => "PI",
            PlayerId::Second => "PII",
        })
    }
}

/// Unordered pair stored as `(min, max)`; orders lexicographically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub u: VertexId,
    pub v: VertexId,
}

impl Edge {
    pub fn new(a: VertexId, b: VertexId) -> Self {
        Edge {
            u: a.min(b),
            v: a.max(b),
        }
    }

    pub fn touches(&self, x: VertexId) -> bool {
        self.u == x || self.v == x
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.u, self.v)
    }
}

/// Accepts `u-v` or `u v`.
impl FromStr for Edge {
    type Err = StarError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || StarError::BadEdge(s.to_string());
        let t = s.trim();
        let (a, b) = t
            .split_once('-')
            .or_else(|| t.split_once(char::is_whitespace))
            .ok_or_else(bad)?;
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().parse().map_err(|_| bad())?;
        if a == b {
            return Err(bad());
        }
        Ok(Edge::new(a, b))
    }
}

impl Serialize for Edge {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Edge {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    #[serde(rename = "PIWin")]
    FirstWin,
    #[serde(rename = "PIIWin")]
    SecondWin,
    Draw,
}

impl Outcome {
    pub fn winner(self) -> Option<PlayerId> {
        match self {
            Outcome::FirstWin => Some(PlayerId::First),
            Outcome::SecondWin => Some(PlayerId::Second),
            Outcome::Draw => None,
        }
    }

    pub fn loss_of(p: PlayerId) -> Self {
        match p {
            PlayerId::First => Outcome::SecondWin,
            PlayerId::Second => Outcome::FirstWin,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::FirstWin => "PIWin",
            Outcome::SecondWin => "PIIWin",
            Outcome::Draw => "Draw",
        })
    }
}

impl FromStr for Outcome {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "PIWin" => Ok(Outcome::FirstWin),
            "PIIWin" => Ok(Outcome::SecondWin),
            "Draw" => Ok(Outcome::Draw),
            _ => Err(format!("unknown outcome {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Ongoing,
    /// `losing_move_index` counts the loser's own moves from 1.
    Lost { player: PlayerId, losing_move_index: usize },
    Draw,
}

/// `⌊nk/2⌋`: the most edges a graph on `n` vertices can have with maximum degree `k`.
pub fn ex_bound(n: usize, k: usize) -> usize {
    n * k / 2
}

#[derive(Clone, PartialEq, Eq)]
pub struct StarState {
    n: usize,
    k: usize,
    own: [Vec<BitSet>; 2],
    own_degree: [Vec<usize>; 2],
    gamma: Vec<BitSet>,
    gamma_degree: Vec<usize>,
    to_move: PlayerId,
    moves_made: [usize; 2],
    status: Status,
    history: Vec<Edge>,
}

impl fmt::Debug for StarState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StarState")
            .field("n", &self.n)
            .field("k", &self.k)
            .field("to_move", &self.to_move)
            .field("status", &self.status)
            .field("history", &self.history.iter().map(|e| e.to_string()).collect::<Vec<_>>())
            .finish()
    }
}

impl StarState {
    pub fn new(n: usize, k: usize) -> Result<Self, StarError> {
        if n == 0 || k == 0 {
            return Err(StarError::InvalidParams { n, k });
        }
        let rows = vec![BitSet::new(n); n];
        Ok(Self {
            n,
            k,
            own: [rows.clone(), rows.clone()],
            own_degree: [vec![0; n], vec![0; n]],
            gamma: rows,
            gamma_degree: vec![0; n],
            to_move: PlayerId::First,
            moves_made: [0, 0],
            // K_1 has no edges: the board is exhausted before anyone moves.
            status: if n < 2 { Status::Draw } else { Status::Ongoing },
            history: Vec::new(),
        })
    }

    /// Replay a move list from the empty board.
    pub fn from_moves(n: usize, k: usize, moves: impl IntoIterator<Item = Edge>) -> Result<Self, StarError> {
        let mut s = Self::new(n, k)?;
        for e in moves {
            s.apply_move(e)?;
        }
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn k(&self) -> usize {
        self.k
    }
    pub fn to_move(&self) -> PlayerId {
        self.to_move
    }
    pub fn status(&self) -> Status {
        self.status
    }
    pub fn is_ongoing(&self) -> bool {
        self.status == Status::Ongoing
    }
    pub fn history(&self) -> &[Edge] {
        &self.history
    }
    pub fn moves_made(&self, p: PlayerId) -> usize {
        self.moves_made[p.index()]
    }
    pub fn total_edges(&self) -> usize {
        self.n * (self.n - 1) / 2
    }
    pub fn claimed_count(&self) -> usize {
        self.history.len()
    }
    pub fn unclaimed_count(&self) -> usize {
        self.total_edges() - self.claimed_count()
    }

    pub fn outcome(&self) -> Option<Outcome> {
        match self.status {
            Status::Ongoing => None,
            Status::Lost { player, .. } => Some(Outcome::loss_of(player)),
            Status::Draw => Some(Outcome::Draw),
        }
    }

    #[inline]
    pub fn degree(&self, p: PlayerId, v: VertexId) -> usize {
        self.own_degree[p.index()][v]
    }
    #[inline]
    pub fn gamma_degree(&self, v: VertexId) -> usize {
        self.gamma_degree[v]
    }
    pub fn max_degree(&self, p: PlayerId) -> usize {
        self.own_degree[p.index()].iter().copied().max().unwrap_or(0)
    }
    pub fn gamma_max_degree(&self) -> usize {
        self.gamma_degree.iter().copied().max().unwrap_or(0)
    }
    pub fn edge_count(&self, p: PlayerId) -> usize {
        self.moves_made[p.index()]
    }
    /// Neighbourhood of `v` in the union graph.
    pub fn gamma_row(&self, v: VertexId) -> &BitSet {
        &self.gamma[v]
    }
    pub fn own_row(&self, p: PlayerId, v: VertexId) -> &BitSet {
        &self.own[p.index()][v]
    }

    pub fn is_claimed(&self, e: Edge) -> bool {
        self.gamma[e.u].contains(e.v)
    }

    pub fn owner(&self, e: Edge) -> Option<PlayerId> {
        if self.own[0][e.u].contains(e.v) {
            Some(PlayerId::First)
        } else if self.own[1][e.u].contains(e.v) {
            Some(PlayerId::Second)
        } else {
            None
        }
    }

    /// Claiming `e` keeps `p`'s degrees at most `k`.
    pub fn is_safe_for(&self, p: PlayerId, e: Edge) -> bool {
        let d = &self.own_degree[p.index()];
        d[e.u] < self.k && d[e.v] < self.k
    }

    fn check_ongoing(&self) -> Result<(), StarError> {
        if self.is_ongoing() {
            Ok(())
        } else {
            Err(StarError::GameOver)
        }
    }

    fn check_edge(&self, e: Edge) -> Result<(), StarError> {
        if e.u == e.v || e.v >= self.n {
            Err(StarError::NotAnEdge(e, self.n))
        } else {
            Ok(())
        }
    }

    /// Every unclaimed edge, in lexicographic order.
    pub fn legal_moves(&self) -> Result<Vec<Edge>, StarError> {
        self.check_ongoing()?;
        let mut out = Vec::with_capacity(self.unclaimed_count());
        let all = BitSet::full(self.n);
        for u in 0..self.n {
            let mut from = u + 1;
            while let Some(v) = all.next_and_not(&self.gamma[u], from) {
                out.push(Edge::new(u, v));
                from = v + 1;
            }
        }
        Ok(out)
    }

    /// The `r`-th unclaimed edge in lexicographic order (`r` from 0).
    pub fn nth_unclaimed(&self, mut r: usize) -> Option<Edge> {
        for u in 0..self.n {
            let taken = self.gamma[u].iter().filter(|&v| v > u).count();
            let free = self.n - 1 - u - taken;
            if r < free {
                return (u + 1..self.n)
                    .filter(|&v| !self.gamma[u].contains(v))
                    .nth(r)
                    .map(|v| Edge::new(u, v));
            }
            r -= free;
        }
        None
    }

    /// Vertices where `p` may still take an edge.
    pub fn open_vertices(&self, p: PlayerId) -> BitSet {
        let mut s = BitSet::new(self.n);
        for (v, &d) in self.own_degree[p.index()].iter().enumerate() {
            if d < self.k {
                s.insert(v);
            }
        }
        s
    }

    /// Unclaimed edges whose claim keeps `p`'s degrees at most `k`.
    pub fn safe_moves(&self, p: PlayerId) -> Result<Vec<Edge>, StarError> {
        self.check_ongoing()?;
        let open = self.open_vertices(p);
        let mut out = Vec::new();
        for u in open.iter() {
            let mut from = u + 1;
            while let Some(v) = open.next_and_not(&self.gamma[u], from) {
                out.push(Edge::new(u, v));
                from = v + 1;
            }
        }
        Ok(out)
    }

    /// The player to move claims `e`.
    pub fn apply_move(&mut self, e: Edge) -> Result<(), StarError> {
        self.check_ongoing()?;
        self.check_edge(e)?;
        if self.is_claimed(e) {
            return Err(StarError::AlreadyClaimed(e));
        }
        let p = self.to_move;
        let i = p.index();
        self.own[i][e.u].insert(e.v);
        self.own[i][e.v].insert(e.u);
        self.gamma[e.u].insert(e.v);
        self.gamma[e.v].insert(e.u);
        self.own_degree[i][e.u] += 1;
        self.own_degree[i][e.v] += 1;
        self.gamma_degree[e.u] += 1;
        self.gamma_degree[e.v] += 1;
        self.moves_made[i] += 1;
        self.history.push(e);

        if self.own_degree[i][e.u] > self.k || self.own_degree[i][e.v] > self.k {
            self.status = Status::Lost {
                player: p,
                losing_move_index: self.moves_made[i],
            };
        } else if self.claimed_count() == self.total_edges() {
            self.status = Status::Draw;
        } else {
            self.to_move = p.other();
            debug_assert!(self.gamma_max_degree() <= 2 * self.k);
            debug_assert!(self.moves_made[i] <= ex_bound(self.n, self.k));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nth_unclaimed_walks_legal_moves() {
        let gs = StarState::from_moves(6, 2, [Edge::new(0, 1), Edge::new(2, 5), Edge::new(1, 4)]).unwrap();
        let all = gs.legal_moves().unwrap();
        for (i, &e) in all.iter().enumerate() {
            assert_eq!(gs.nth_unclaimed(i), Some(e));
        }
        assert_eq!(gs.nth_unclaimed(all.len()), None);
    }

    fn e(u: usize, v: usize) -> Edge {
        Edge::new(u, v)
    }

    #[test]
    fn new_game_boards() {
        assert_eq!(StarState::new(3, 1).unwrap().legal_moves().unwrap().len(), 3);
        assert_eq!(StarState::new(2, 1).unwrap().legal_moves().unwrap().len(), 1);
        assert_eq!(StarState::new(0, 1), Err(StarError::InvalidParams { n: 0, k: 1 }));
        assert_eq!(StarState::new(1, 1).unwrap().status(), Status::Draw);
        assert_eq!(StarState::new(3, 0), Err(StarError::InvalidParams { n: 3, k: 0 }));
    }

    #[test]
    fn legal_moves_track_claims() {
        let mut s = StarState::new(3, 1).unwrap();
        assert_eq!(s.legal_moves().unwrap(), vec![e(0, 1), e(0, 2), e(1, 2)]);
        s.apply_move(e(0, 1)).unwrap();
        assert_eq!(s.legal_moves().unwrap(), vec![e(0, 2), e(1, 2)]);
        let mut done = StarState::new(2, 1).unwrap();
        done.apply_move(e(0, 1)).unwrap();
        assert_eq!(done.legal_moves(), Err(StarError::GameOver));
    }

    #[test]
    fn safe_moves_examples() {
        let s = StarState::new(3, 1).unwrap();
        assert_eq!(s.safe_moves(PlayerId::First).unwrap().len(), 3);

        let mut s = StarState::new(3, 1).unwrap();
        s.apply_move(e(0, 1)).unwrap();
        s.apply_move(e(0, 2)).unwrap();
        // PI to move holding 0-1; the only unclaimed edge 1-2 touches 1.
        assert_eq!(s.safe_moves(PlayerId::First).unwrap(), vec![]);

        // k = 2, n = 4, PI holds 0-1 and 0-2 (PII holds 2-3).
        let s = StarState::from_moves(4, 2, [e(0, 1), e(2, 3), e(0, 2)]).unwrap();
        assert_eq!(s.safe_moves(PlayerId::First).unwrap(), vec![e(1, 2), e(1, 3)]);
    }

    #[test]
    fn apply_move_outcomes() {
        let s = StarState::from_moves(3, 1, [e(0, 1), e(0, 2), e(1, 2)]).unwrap();
        assert_eq!(
            s.status(),
            Status::Lost {
                player: PlayerId::First,
                losing_move_index: 2
            }
        );
        assert_eq!(s.outcome(), Some(Outcome::SecondWin));

        let s = StarState::from_moves(2, 1, [e(0, 1)]).unwrap();
        assert_eq!(s.status(), Status::Draw);
        assert_eq!(s.max_degree(PlayerId::First), 1);

        let s = StarState::from_moves(4, 1, [e(0, 1), e(2, 3), e(0, 2)]).unwrap();
        assert_eq!(s.outcome(), Some(Outcome::SecondWin));

        let mut s = StarState::new(4, 1).unwrap();
        s.apply_move(e(0, 1)).unwrap();
        assert_eq!(s.apply_move(e(1, 0)), Err(StarError::AlreadyClaimed(e(0, 1))));
        assert!(matches!(s.apply_move(e(1, 7)), Err(StarError::NotAnEdge(..))));
    }

    #[test]
    fn ex_bound_values() {
        assert_eq!(ex_bound(6, 3), 9);
        assert_eq!(ex_bound(5, 2), 5);
        assert_eq!(ex_bound(3, 1), 1);
    }

    #[test]
    fn edge_notation() {
        assert_eq!("3-1".parse::<Edge>().unwrap(), e(1, 3));
        assert_eq!("4 2".parse::<Edge>().unwrap(), e(2, 4));
        assert!("x y".parse::<Edge>().is_err());
        assert!("2-2".parse::<Edge>().is_err());
        assert_eq!(e(5, 2).to_string(), "2-5");
    }
}
