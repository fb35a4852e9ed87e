//! Simple graphs over a fixed vertex universe with an active subset.
//!
//! Vertices keep their index for the lifetime of a graph: clipping a pair
//! deactivates both vertices instead of renumbering, so identities carry
//! over between the pair clipping game and the star game that embeds it.
//!
//! Every comparison involving an average degree is done by integer
//! cross-multiplication. `d(G) = 2e/v` never appears as a float.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bitset::BitSet;

pub type VertexId = usize;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("loop edge at vertex {0}")]
    LoopEdge(VertexId),
    #[error("vertex {0} is not active")]
    InactiveVertex(VertexId),
    #[error("edge {0}-{1} is already present")]
    DuplicateEdge(VertexId, VertexId),
    #[error("vertices {0} and {1} are adjacent and cannot be clipped")]
    AdjacentPair(VertexId, VertexId),
    #[error("fewer than two active vertices")]
    TooFewVertices,
    #[error("malformed graph literal: {0}")]
    Parse(String),
}

/// Parameters of the sparseness test `d(G) <= alpha * v(G) + 1`, optionally
/// combined with `Δ(G) <= (v(G) - 1) / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SparseProfile {
    pub alpha_num: u64,
    pub alpha_den: u64,
    pub include_f: bool,
}

impl SparseProfile {
    /// `g(n) = n/100 + 1`, `f(n) = (n-1)/2`.
    pub const STANDARD: SparseProfile = SparseProfile {
        alpha_num: 1,
        alpha_den: 100,
        include_f: true,
    };

    pub fn new(alpha_num: u64, alpha_den: u64, include_f: bool) -> Self {
        assert!(alpha_den > 0, "alpha denominator must be positive");
        Self {
            alpha_num,
            alpha_den,
            include_f,
        }
    }

    /// `2e/v <= alpha*v + 1`, cross-multiplied. Vacuously true for `v = 0`.
    pub fn average_ok(&self, v: usize, e: usize) -> bool {
        let (v, e) = (v as u128, e as u128);
        2 * e * self.alpha_den as u128 <= v * (self.alpha_num as u128 * v + self.alpha_den as u128)
    }

    /// `Δ <= (v-1)/2`. Vacuously true for `v = 0`.
    pub fn max_degree_ok(&self, v: usize, delta: usize) -> bool {
        v == 0 || 2 * delta < v
    }
}

impl Default for SparseProfile {
    fn default() -> Self {
        Self::STANDARD
    }
}

/// `(v, e, Δ)` of a graph at some instant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Snapshot {
    pub v: usize,
    pub e: usize,
    pub delta: usize,
}

impl Snapshot {
    pub fn is_g_sparse(&self, p: &SparseProfile) -> bool {
        p.average_ok(self.v, self.e)
    }

    pub fn is_fg_sparse(&self, p: &SparseProfile) -> bool {
        self.is_g_sparse(p) && (!p.include_f || p.max_degree_ok(self.v, self.delta))
    }

    pub fn is_11_sparse(&self) -> bool {
        self.delta <= 1
    }

    pub fn is_1_sparse(&self) -> bool {
        2 * self.e <= self.v
    }
}

/// Mutable simple graph over `[0, universe)` with an active vertex subset.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct WorkGraph {
    universe: usize,
    active: BitSet,
    adj: Vec<BitSet>,
    degree: Vec<usize>,
    edges: usize,
}

impl WorkGraph {
    /// Edgeless graph with every vertex of the universe active.
    pub fn empty(universe: usize) -> Self {
        Self {
            universe,
            active: BitSet::full(universe),
            adj: vec![BitSet::new(universe); universe],
            degree: vec![0; universe],
            edges: 0,
        }
    }

    pub fn from_edges(
        universe: usize,
        edges: impl IntoIterator<Item = (VertexId, VertexId)>,
    ) -> Result<Self, GraphError> {
        let mut g = Self::empty(universe);
        for (u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    /// The subgraph induced on `keep`, over the same universe.
    pub fn induced(&self, keep: &BitSet) -> Self {
        let mut active = self.active.clone();
        active.intersect_with(keep);
        let mut adj = vec![BitSet::new(self.universe); self.universe];
        let mut degree = vec![0; self.universe];
        let mut twice = 0;
        for v in active.iter() {
            let mut row = self.adj[v].clone();
            row.intersect_with(&active);
            degree[v] = row.count();
            twice += degree[v];
            adj[v] = row;
        }
        Self {
            universe: self.universe,
            active,
            adj,
            degree,
            edges: twice / 2,
        }
    }

    #[inline]
    pub fn universe(&self) -> usize {
        self.universe
    }

    #[inline]
    pub fn active(&self) -> &BitSet {
        &self.active
    }

    #[inline]
    pub fn is_active(&self, v: VertexId) -> bool {
        self.active.contains(v)
    }

    #[inline]
    pub fn active_count(&self) -> usize {
        self.active.count()
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edges
    }

    #[inline]
    pub fn neighbors(&self, v: VertexId) -> &BitSet {
        &self.adj[v]
    }

    #[inline]
    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        u < self.universe && self.adj[u].contains(v)
    }

    fn require_active(&self, v: VertexId) -> Result<(), GraphError> {
        if self.is_active(v) {
            Ok(())
        } else {
            Err(GraphError::InactiveVertex(v))
        }
    }

    pub fn degree(&self, v: VertexId) -> Result<usize, GraphError> {
        self.require_active(v)?;
        Ok(self.degree[v])
    }

    /// Degree without the activity check; zero for inactive vertices.
    #[inline]
    pub fn degree_unchecked(&self, v: VertexId) -> usize {
        self.degree[v]
    }

    pub fn max_degree(&self) -> usize {
        self.active.iter().map(|v| self.degree[v]).max().unwrap_or(0)
    }

    pub fn snapshot(&self) -> Snapshot {
        Snapshot {
            v: self.active_count(),
            e: self.edges,
            delta: self.max_degree(),
        }
    }

    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.active
            .iter()
            .flat_map(move |u| self.adj[u].iter().filter(move |&v| v > u).map(move |v| (u, v)))
    }

    pub fn add_edge(&mut self, u: VertexId, v: VertexId) -> Result<(), GraphError> {
        if u == v {
            return Err(GraphError::LoopEdge(u));
        }
        self.require_active(u)?;
        self.require_active(v)?;
        if self.adj[u].contains(v) {
            return Err(GraphError::DuplicateEdge(u.min(v), u.max(v)));
        }
        self.adj[u].insert(v);
        self.adj[v].insert(u);
        self.degree[u] += 1;
        self.degree[v] += 1;
        self.edges += 1;
        debug_assert!(self.adj[u].count() == self.degree[u] && self.adj[v].count() == self.degree[v]);
        Ok(())
    }

    /// Remove two non-adjacent active vertices together with their edges.
    pub fn clip_pair(&mut self, u: VertexId, v: VertexId) -> Result<(), GraphError> {
        if u == v {
            return Err(GraphError::LoopEdge(u));
        }
        self.require_active(u)?;
        self.require_active(v)?;
        if self.adj[u].contains(v) {
            return Err(GraphError::AdjacentPair(u.min(v), u.max(v)));
        }
        for x in [u, v] {
            let row = std::mem::replace(&mut self.adj[x], BitSet::new(self.universe));
            for w in row.iter() {
                self.adj[w].remove(x);
                self.degree[w] -= 1;
            }
            self.edges -= self.degree[x];
            self.degree[x] = 0;
            self.active.remove(x);
        }
        debug_assert!(self.degree_sum_holds());
        Ok(())
    }

    /// `Σ d(v) = 2e` over the active set, with adjacency confined to it.
    pub fn degree_sum_holds(&self) -> bool {
        let mut twice = 0;
        for v in 0..self.universe {
            let row = &self.adj[v];
            if !self.is_active(v) {
                if !row.is_empty() || self.degree[v] != 0 {
                    return false;
                }
                continue;
            }
            if row.count() != self.degree[v] || row.contains(v) || row.count_and(&self.active) != self.degree[v] {
                return false;
            }
            twice += self.degree[v];
        }
        twice == 2 * self.edges
    }

    /// `{u,v}` is not an edge and `v(G)·(d(u)+d(v)) >= 4·e(G)`.
    pub fn is_nice_pair(&self, u: VertexId, v: VertexId) -> Result<bool, GraphError> {
        if u == v {
            return Err(GraphError::LoopEdge(u));
        }
        self.require_active(u)?;
        self.require_active(v)?;
        Ok(!self.adj[u].contains(v) && self.nice_sum(self.degree[u] + self.degree[v]))
    }

    #[inline]
    fn nice_sum(&self, degree_sum: usize) -> bool {
        self.active_count() * degree_sum >= 4 * self.edges
    }

    /// Lexicographically smallest nice pair, if any.
    pub fn find_nice_pair(&self) -> Result<Option<(VertexId, VertexId)>, GraphError> {
        let v = self.active_count();
        if v < 2 {
            return Err(GraphError::TooFewVertices);
        }
        let need = 4 * self.edges;
        for u in self.active.iter() {
            let du = self.degree[u];
            let mut w = u + 1;
            while let Some(c) = self.active.next_and_not(&self.adj[u], w) {
                if v * (du + self.degree[c]) >= need {
                    return Ok(Some((u, c)));
                }
                w = c + 1;
            }
        }
        Ok(None)
    }

    /// Smallest active vertex other than `u` that is not adjacent to `u`.
    pub fn smallest_non_adjacent(&self, u: VertexId) -> Option<VertexId> {
        let mut from = 0;
        while let Some(c) = self.active.next_and_not(&self.adj[u], from) {
            if c != u {
                return Some(c);
            }
            from = c + 1;
        }
        None
    }

    /// Every non-adjacent active pair `(u, v)` with `u < v`, in lexicographic order.
    pub fn legal_clips(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.active.iter().flat_map(move |u| {
            let mut from = u + 1;
            std::iter::from_fn(move || {
                let c = self.active.next_and_not(&self.adj[u], from)?;
                from = c + 1;
                Some((u, c))
            })
        })
    }

    pub fn first_legal_clip(&self) -> Option<(VertexId, VertexId)> {
        self.legal_clips().next()
    }

    /// Smallest active vertex attaining the maximum degree.
    pub fn smallest_max_degree_vertex(&self) -> Option<VertexId> {
        let delta = self.max_degree();
        self.active.iter().find(|&v| self.degree[v] == delta)
    }

    pub fn is_g_sparse(&self, p: &SparseProfile) -> bool {
        p.average_ok(self.active_count(), self.edges)
    }

    pub fn is_fg_sparse(&self, p: &SparseProfile) -> bool {
        self.snapshot().is_fg_sparse(p)
    }

    /// `Δ(G) <= 1`
    pub fn is_11_sparse(&self) -> bool {
        self.max_degree() <= 1
    }

    /// `2e(G) <= v(G)`
    pub fn is_1_sparse(&self) -> bool {
        2 * self.edges <= self.active_count()
    }
}

impl fmt::Debug for WorkGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "WorkGraph({self}; active={:?})", self.active)
    }
}

/// `v=<n>; edges=(u,v),(u,v),...` using the universe size for `n`.
impl fmt::Display for WorkGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v={}; edges=", self.universe)?;
        for (i, (u, v)) in self.edges().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "({u},{v})")?;
        }
        Ok(())
    }
}

impl FromStr for WorkGraph {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |msg: &str| GraphError::Parse(format!("{msg} in {s:?}"));
        let mut parts = s.splitn(2, ';');
        let head = parts.next().unwrap_or("").trim();
        let n: usize = head
            .strip_prefix("v=")
            .ok_or_else(|| bad("expected `v=<n>`"))?
            .trim()
            .parse()
            .map_err(|_| bad("bad vertex count"))?;
        let mut g = WorkGraph::empty(n);
        let Some(tail) = parts.next() else {
            return Ok(g);
        };
        let body = tail
            .trim()
            .strip_prefix("edges=")
            .ok_or_else(|| bad("expected `edges=`"))?
            .trim();
        if body.is_empty() {
            return Ok(g);
        }
        let body = body
            .strip_prefix('(')
            .and_then(|b| b.strip_suffix(')'))
            .ok_or_else(|| bad("edge list must be parenthesised"))?;
        for pair in body.split("),(") {
            let (a, b) = pair.split_once(',').ok_or_else(|| bad("edge needs two endpoints"))?;
            let u: usize = a.trim().parse().map_err(|_| bad("bad endpoint"))?;
            let v: usize = b.trim().parse().map_err(|_| bad("bad endpoint"))?;
            if u >= n || v >= n {
                return Err(bad("endpoint out of range"));
            }
            g.add_edge(u, v)?;
        }
        Ok(g)
    }
}

impl Serialize for WorkGraph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for WorkGraph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_plus_isolated() -> WorkGraph {
        "v=4; edges=(0,1),(1,2)".parse().unwrap()
    }

    #[test]
    fn add_edge_updates_counts() {
        let mut g = WorkGraph::empty(4);
        g.add_edge(0, 1).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.degree(0), Ok(1));
        assert_eq!(g.degree(1), Ok(1));
        assert_eq!(g.add_edge(0, 1), Err(GraphError::DuplicateEdge(0, 1)));
        assert_eq!(g.add_edge(1, 0), Err(GraphError::DuplicateEdge(0, 1)));
        assert_eq!(g.add_edge(2, 2), Err(GraphError::LoopEdge(2)));
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn clip_pair_rules() {
        let mut g = path_plus_isolated();
        assert_eq!(g.clone().clip_pair(0, 1), Err(GraphError::AdjacentPair(0, 1)));
        g.clip_pair(0, 2).unwrap();
        assert_eq!(g.active().iter().collect::<Vec<_>>(), vec![1, 3]);
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.active_count(), 1 + 1);
        assert_eq!(g.clip_pair(0, 2), Err(GraphError::InactiveVertex(0)));
        assert_eq!(g.add_edge(0, 3), Err(GraphError::InactiveVertex(0)));
    }

    #[test]
    fn counts_on_path() {
        let mut g: WorkGraph = "v=3; edges=(0,1),(1,2)".parse().unwrap();
        assert_eq!(g.degree(1), Ok(2));
        assert_eq!(g.max_degree(), 2);
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.active_count(), 3);
        g.clip_pair(0, 2).unwrap();
        assert_eq!(g.active_count(), 1);
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.degree(0), Err(GraphError::InactiveVertex(0)));
    }

    #[test]
    fn nice_pairs() {
        assert_eq!(WorkGraph::empty(2).is_nice_pair(0, 1), Ok(true));
        let g = path_plus_isolated();
        assert_eq!(g.is_nice_pair(0, 2), Ok(true));
        assert_eq!(g.is_nice_pair(0, 3), Ok(false));
        assert_eq!(g.is_nice_pair(0, 1), Ok(false));
        assert_eq!(WorkGraph::empty(2).find_nice_pair(), Ok(Some((0, 1))));
        assert_eq!(g.find_nice_pair(), Ok(Some((0, 2))));
        let star: WorkGraph = "v=4; edges=(0,1),(0,2),(0,3)".parse().unwrap();
        assert_eq!(star.find_nice_pair(), Ok(None));
        assert_eq!(WorkGraph::empty(1).find_nice_pair(), Err(GraphError::TooFewVertices));
    }

    #[test]
    fn g_sparse_boundaries() {
        let p = SparseProfile::STANDARD;
        assert!(p.average_ok(100, 100));
        assert!(!p.average_ok(100, 101));
        assert!(!p.average_ok(10, 6));
        assert!(p.average_ok(10, 5));
        assert!(WorkGraph::empty(1).is_g_sparse(&p));
        assert!(p.average_ok(0, 0));
    }

    #[test]
    fn fg_sparse_examples() {
        let p = SparseProfile::STANDARD;
        assert!(WorkGraph::empty(3).is_fg_sparse(&p));
        let four_leaves: WorkGraph = "v=9; edges=(0,1),(0,2),(0,3),(0,4)".parse().unwrap();
        assert!(four_leaves.is_fg_sparse(&p));
        let five_leaves: WorkGraph = "v=9; edges=(0,1),(0,2),(0,3),(0,4),(0,5)".parse().unwrap();
        assert!(!five_leaves.is_fg_sparse(&p));
    }

    #[test]
    fn one_sparse_examples() {
        let matching: WorkGraph = "v=6; edges=(0,1),(2,3),(4,5)".parse().unwrap();
        assert!(matching.is_11_sparse() && matching.is_1_sparse());
        let path: WorkGraph = "v=3; edges=(0,1),(1,2)".parse().unwrap();
        assert!(!path.is_11_sparse() && !path.is_1_sparse());
        let single: WorkGraph = "v=5; edges=(0,1)".parse().unwrap();
        assert!(single.is_11_sparse() && single.is_1_sparse());
    }

    #[test]
    fn literal_round_trip_and_rejects() {
        let g: WorkGraph = "v=5; edges=(0,1),(3,4)".parse().unwrap();
        assert_eq!(g.to_string(), "v=5; edges=(0,1),(3,4)");
        assert_eq!("v=5; edges=".parse::<WorkGraph>().unwrap().edge_count(), 0);
        assert!(matches!("v=3; edges=(0,0)".parse::<WorkGraph>(), Err(GraphError::LoopEdge(0))));
        assert!(matches!(
            "v=3; edges=(0,1),(1,0)".parse::<WorkGraph>(),
            Err(GraphError::DuplicateEdge(0, 1))
        ));
        assert!(matches!("v=3; edges=(0,3)".parse::<WorkGraph>(), Err(GraphError::Parse(_))));
        assert!(matches!("n=3".parse::<WorkGraph>(), Err(GraphError::Parse(_))));
    }

    #[test]
    fn induced_keeps_only_inner_edges() {
        let g: WorkGraph = "v=5; edges=(0,1),(1,2),(2,3),(3,4)".parse().unwrap();
        let keep: BitSet = {
            let mut s = BitSet::new(5);
            for v in [0, 1, 2] {
                s.insert(v);
            }
            s
        };
        let h = g.induced(&keep);
        assert_eq!(h.active_count(), 3);
        assert_eq!(h.edge_count(), 2);
        assert!(h.degree_sum_holds());
    }
}
