//! Vertex-relabelling invariants for solver positions.
//!
//! Keys pack two bits per edge (1 for the first player, 2 for the second)
//! in colex edge order. `FullPermutation` takes the smallest packing over
//! every relabelling that respects a colour refinement, so equal keys mean
//! isomorphic positions. `RefinementHash` only hashes the refined colouring;
//! callers confirm matches with [`isomorphic`].

use std::collections::hash_map::DefaultHasher;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{edge_index, Position, SolverError};

/// Largest board the full-permutation mode accepts.
pub const FULL_PERMUTATION_MAX_N: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CanonMode {
    None,
    FullPermutation,
    RefinementHash,
}

impl CanonMode {
    pub fn name(self) -> &'static str {
        match self {
            CanonMode::None => "none",
            CanonMode::FullPermutation => "full-permutation",
            CanonMode::RefinementHash => "refinement-hash",
        }
    }

    /// Full permutation where available, hashing above that.
    pub fn default_for(n: usize) -> Self {
        if n <= FULL_PERMUTATION_MAX_N {
            CanonMode::FullPermutation
        } else {
            CanonMode::RefinementHash
        }
    }
}

impl fmt::Display for CanonMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CanonMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        [CanonMode::None, CanonMode::FullPermutation, CanonMode::RefinementHash]
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown canonicalisation mode {s:?}"))
    }
}

/// Edge type between `u` and `v`: 0 unclaimed, 1 first player, 2 second player.
fn edge_type(p: &Position, u: usize, v: usize) -> u8 {
    if u == v {
        return 0;
    }
    let bit = 1u64 << edge_index(u, v);
    if p.own[0] & bit != 0 {
        1
    } else if p.own[1] & bit != 0 {
        2
    } else {
        0
    }
}

/// Stable colouring with canonical colour numbers: each vertex starts from
/// its two own-degrees, then repeatedly absorbs the multiset of
/// (neighbour colour, edge type) pairs.
pub fn refine(p: &Position) -> Vec<u32> {
    let n = p.n();
    let sigs: Vec<Vec<u32>> = (0..n)
        .map(|v| vec![p.deg[0][v] as u32, p.deg[1][v] as u32])
        .collect();
    let mut colour = rank(&sigs);
    let mut classes = count_classes(&colour);
    loop {
        let sigs: Vec<Vec<u32>> = (0..n)
            .map(|v| {
                let mut nb: Vec<u32> = (0..n)
                    .filter(|&w| w != v)
                    .filter_map(|w| match edge_type(p, v, w) {
                        0 => None,
                        t => Some(colour[w] * 4 + t as u32),
                    })
                    .collect();
                nb.sort_unstable();
                let mut sig = vec![colour[v]];
                sig.extend(nb);
                sig
            })
            .collect();
        let next = rank(&sigs);
        let next_classes = count_classes(&next);
        colour = next;
        if next_classes == classes {
            return colour;
        }
        classes = next_classes;
    }
}

fn rank(sigs: &[Vec<u32>]) -> Vec<u32> {
    let mut distinct: Vec<&Vec<u32>> = sigs.iter().collect();
    distinct.sort();
    distinct.dedup();
    sigs.iter()
        .map(|s| distinct.binary_search(&s).expect("present") as u32)
        .collect()
}

fn count_classes(colour: &[u32]) -> usize {
    let mut c = colour.to_vec();
    c.sort_unstable();
    c.dedup();
    c.len()
}

/// Pack the position under the relabelling `label[old] = new`.
fn encode(p: &Position, label: &[usize]) -> u128 {
    let mut key = 0u128;
    for (t, mut mask) in [(1u128, p.own[0]), (2u128, p.own[1])] {
        while mask != 0 {
            let i = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            let (u, v) = super::edge_endpoints(i);
            key |= t << (2 * edge_index(label[u], label[v]));
        }
    }
    key
}

/// Raw packing with the identity labelling.
pub fn raw_key(p: &Position) -> u128 {
    let id: Vec<usize> = (0..p.n()).collect();
    encode(p, &id)
}

fn full_permutation(p: &Position) -> u128 {
    let colour = refine(p);
    let n = p.n();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| (colour[v], v));
    // Each colour class owns a block of new labels; try every arrangement inside each block.
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    for &v in &order {
        match blocks.last_mut() {
            Some(b) if colour[b[0]] == colour[v] => b.push(v),
            _ => blocks.push(vec![v]),
        }
    }
    let mut label = vec![0usize; n];
    let mut best = u128::MAX;
    arrange(p, &mut blocks, 0, 0, 0, &mut label, &mut best);
    best
}

fn arrange(
    p: &Position,
    blocks: &mut [Vec<usize>],
    block: usize,
    pos: usize,
    next_label: usize,
    label: &mut [usize],
    best: &mut u128,
) {
    if block == blocks.len() {
        *best = (*best).min(encode(p, label));
        return;
    }
    let len = blocks[block].len();
    if pos == len {
        arrange(p, blocks, block + 1, 0, next_label, label, best);
        return;
    }
    for i in pos..len {
        blocks[block].swap(pos, i);
        label[blocks[block][pos]] = next_label;
        arrange(p, blocks, block, pos + 1, next_label + 1, label, best);
        blocks[block].swap(pos, i);
    }
}

fn refinement_hash(p: &Position) -> u128 {
    let colour = refine(p);
    let mut edges: Vec<(u32, u32, u8)> = Vec::new();
    for u in 0..p.n() {
        for v in u + 1..p.n() {
            let t = edge_type(p, u, v);
            if t != 0 {
                let (a, b) = (colour[u].min(colour[v]), colour[u].max(colour[v]));
                edges.push((a, b, t));
            }
        }
    }
    edges.sort_unstable();
    let mut sizes = colour.clone();
    sizes.sort_unstable();
    let mut h = DefaultHasher::new();
    p.n().hash(&mut h);
    sizes.hash(&mut h);
    edges.hash(&mut h);
    h.finish() as u128
}

pub fn canonicalize(p: &Position, mode: CanonMode) -> Result<u128, SolverError> {
    match mode {
        CanonMode::None => Ok(raw_key(p)),
        CanonMode::FullPermutation => {
            if p.n() > FULL_PERMUTATION_MAX_N {
                return Err(SolverError::ModeUnavailable {
                    mode,
                    n: p.n(),
                });
            }
            Ok(full_permutation(p))
        }
        CanonMode::RefinementHash => Ok(refinement_hash(p)),
    }
}

/// Whether some relabelling maps `a` onto `b`, edge types included.
pub fn isomorphic(a: &Position, b: &Position) -> bool {
    if a.n() != b.n() || a.k() != b.k() {
        return false;
    }
    if a.own[0].count_ones() != b.own[0].count_ones() || a.own[1].count_ones() != b.own[1].count_ones() {
        return false;
    }
    let (ca, cb) = (refine(a), refine(b));
    let mut sa = ca.clone();
    let mut sb = cb.clone();
    sa.sort_unstable();
    sb.sort_unstable();
    if sa != sb {
        return false;
    }
    let n = a.n();
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    extend(a, b, &ca, &cb, 0, &mut map, &mut used)
}

fn extend(
    a: &Position,
    b: &Position,
    ca: &[u32],
    cb: &[u32],
    v: usize,
    map: &mut [usize],
    used: &mut [bool],
) -> bool {
    if v == a.n() {
        return true;
    }
    for w in 0..b.n() {
        if used[w] || ca[v] != cb[w] {
            continue;
        }
        if (0..v).any(|x| edge_type(a, x, v) != edge_type(b, map[x], w)) {
            continue;
        }
        map[v] = w;
        used[w] = true;
        if extend(a, b, ca, cb, v + 1, map, used) {
            return true;
        }
        used[w] = false;
    }
    map[v] = usize::MAX;
    false
}
