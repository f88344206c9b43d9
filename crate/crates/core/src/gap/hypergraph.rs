//! Labeled k-uniform hypergraphs without isolated vertices.

use crate::error::{Error, Result};
use serde::Serialize;
use std::collections::BTreeMap;

/// Upper bound on the number of candidate edge sets `enumerate_hypergraphs`
/// is allowed to scan.
pub const DEFAULT_ENUMERATION_LIMIT: u128 = 5_000_000;

/// Vertices are labeled 1..=r; edges are stored as bit masks with bit `i`
/// standing for vertex `i + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Hypergraph {
    r: usize,
    k: usize,
    edges: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct DegreeSequence(pub Vec<u32>);

impl DegreeSequence {
    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }
}

impl Hypergraph {
    /// Build from edges given as vertex label lists (1-based).
    pub fn new(r: usize, k: usize, edges: &[Vec<usize>]) -> Result<Self> {
        let masks = edges
            .iter()
            .map(|e| {
                let mut mask = 0u64;
                for &v in e {
                    if v == 0 || v > r {
                        return Err(Error::InvalidParameter(format!("vertex {v} outside 1..={r}")));
                    }
                    mask |= 1 << (v - 1);
                }
                Ok(mask)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_masks(r, k, masks)
    }

    pub fn from_masks(r: usize, k: usize, mut edges: Vec<u64>) -> Result<Self> {
        if r > 64 {
            return Err(Error::ResourceLimit("at most 64 vertices are supported".into()));
        }
        if k == 0 {
            return Err(Error::InvalidParameter("edges need at least one vertex".into()));
        }
        edges.sort_unstable();
        if edges.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter("edges must be distinct".into()));
        }
        if let Some(e) = edges.iter().find(|e| e.count_ones() as usize != k) {
            return Err(Error::InvalidParameter(format!("edge {e:#b} is not a {k}-edge")));
        }
        let cover = edges.iter().fold(0u64, |a, e| a | e);
        if cover != full_mask(r) {
            return Err(Error::InvalidParameter("hypergraph has isolated vertices".into()));
        }
        Ok(Self { r, k, edges })
    }

    pub fn num_vertices(&self) -> usize {
        self.r
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn masks(&self) -> &[u64] {
        &self.edges
    }

    /// Edges as sorted 1-based label lists.
    pub fn edge_lists(&self) -> Vec<Vec<usize>> {
        self.edges.iter().map(|&e| bits(e).map(|i| i + 1).collect()).collect()
    }

    pub fn degree_sequence(&self) -> DegreeSequence {
        DegreeSequence(
            (0..self.r)
                .map(|i| self.edges.iter().filter(|&&e| e >> i & 1 == 1).count() as u32)
                .collect(),
        )
    }

    /// Connected components, each relabeled to 0..v in increasing original
    /// order and returned as edge-mask multisets.
    pub fn components(&self) -> Vec<EdgeSet> {
        EdgeSet { v: self.r, edges: self.edges.clone() }.components()
    }
}

impl std::fmt::Display for Hypergraph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self
            .edge_lists()
            .iter()
            .map(|e| format!("{{{}}}", e.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")))
            .collect();
        write!(f, "[{}]", parts.join(" "))
    }
}

pub(crate) fn full_mask(v: usize) -> u64 {
    if v == 64 {
        u64::MAX
    } else {
        (1u64 << v) - 1
    }
}

pub(crate) fn bits(mut m: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(i)
        }
    })
}

/// A hypergraph in the loose sense: vertices 0..v, a multiset of nonempty
/// edges of any size. Induced subhypergraphs and the S_G recursion live here.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeSet {
    pub v: usize,
    pub edges: Vec<u64>,
}

impl EdgeSet {
    pub fn new(v: usize, mut edges: Vec<u64>) -> Self {
        edges.sort_unstable();
        Self { v, edges }
    }

    pub fn components(&self) -> Vec<EdgeSet> {
        let mut parent: Vec<usize> = (0..self.v).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let next = p[y];
                p[y] = r;
                y = next;
            }
            r
        }
        for &e in &self.edges {
            let mut it = bits(e);
            if let Some(first) = it.next() {
                for other in it {
                    let (a, b) = (find(&mut parent, first), find(&mut parent, other));
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        let mut groups: BTreeMap<usize, u64> = BTreeMap::new();
        for i in 0..self.v {
            let root = find(&mut parent, i);
            *groups.entry(root).or_default() |= 1 << i;
        }
        groups
            .values()
            .map(|&vertices| {
                let map: Vec<usize> = bits(vertices).collect();
                let relabel = |e: u64| bits(e).fold(0u64, |acc, i| acc | 1 << map.iter().position(|&x| x == i).unwrap());
                let edges = self.edges.iter().filter(|&&e| e & vertices != 0).map(|&e| relabel(e)).collect();
                EdgeSet::new(map.len(), edges)
            })
            .collect()
    }

    /// Exponent weight of a vertex subset: |U| + Σ over edges meeting U of
    /// (|e ∩ U| − 1).
    pub fn weight(&self, u: u64) -> u32 {
        let mut w = u.count_ones();
        for &e in &self.edges {
            let c = (e & u).count_ones();
            if c > 0 {
                w += c - 1;
            }
        }
        w
    }

    /// Relabel vertex `i` to `perm[i]`.
    fn permuted(&self, perm: &[usize]) -> Vec<u64> {
        let mut out: Vec<u64> = self
            .edges
            .iter()
            .map(|&e| bits(e).fold(0u64, |acc, i| acc | 1 << perm[i]))
            .collect();
        out.sort_unstable();
        out
    }

    /// Isomorphism-invariant key: the smallest sorted edge list over all
    /// relabelings that respect a refined degree colouring.
    pub fn canonical_form(&self) -> EdgeSet {
        let colours = self.refined_colours();
        // Labels are handed out class by class in colour order.
        let mut classes: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, &c) in colours.iter().enumerate() {
            classes.entry(c).or_default().push(i);
        }
        let classes: Vec<Vec<usize>> = classes.into_values().collect();
        let mut best: Option<Vec<u64>> = None;
        let mut perm = vec![0usize; self.v];
        self.search(&classes, 0, 0, &mut perm, &mut best);
        EdgeSet { v: self.v, edges: best.unwrap_or_default() }
    }

    fn search(&self, classes: &[Vec<usize>], ci: usize, offset: usize, perm: &mut [usize], best: &mut Option<Vec<u64>>) {
        if ci == classes.len() {
            let cand = self.permuted(perm);
            if best.as_ref().is_none_or(|b| cand < *b) {
                *best = Some(cand);
            }
            return;
        }
        let class = &classes[ci];
        let mut order = class.clone();
        permutations(&mut order, 0, &mut |arr| {
            for (j, &vtx) in arr.iter().enumerate() {
                perm[vtx] = offset + j;
            }
            self.search(classes, ci + 1, offset + class.len(), perm, best);
        });
    }

    /// Colour refinement starting from vertex degrees; colours are ranks of
    /// isomorphism-invariant signatures.
    fn refined_colours(&self) -> Vec<usize> {
        let mut colour: Vec<usize> = (0..self.v)
            .map(|i| self.edges.iter().filter(|&&e| e >> i & 1 == 1).count())
            .collect();
        colour = rank(&colour);
        for _ in 0..self.v {
            let sigs: Vec<(usize, Vec<Vec<usize>>)> = (0..self.v)
                .map(|i| {
                    let mut around: Vec<Vec<usize>> = self
                        .edges
                        .iter()
                        .filter(|&&e| e >> i & 1 == 1)
                        .map(|&e| {
                            let mut cs: Vec<usize> = bits(e).filter(|&j| j != i).map(|j| colour[j]).collect();
                            cs.sort_unstable();
                            cs
                        })
                        .collect();
                    around.sort();
                    (colour[i], around)
                })
                .collect();
            let next = rank(&sigs);
            if next == colour {
                break;
            }
            colour = next;
        }
        colour
    }
}

fn rank<T: Ord + Clone>(xs: &[T]) -> Vec<usize> {
    let mut sorted: Vec<T> = xs.to_vec();
    sorted.sort();
    sorted.dedup();
    xs.iter().map(|x| sorted.binary_search(x).unwrap()).collect()
}

fn permutations<F: FnMut(&[usize])>(arr: &mut Vec<usize>, start: usize, f: &mut F) {
    if start == arr.len() {
        f(arr);
        return;
    }
    for i in start..arr.len() {
        arr.swap(start, i);
        permutations(arr, start + 1, f);
        arr.swap(start, i);
    }
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Number of candidate edge sets scanned by the enumeration.
pub fn enumeration_cost(k: usize, m: usize) -> u128 {
    (k..=k * m)
        .map(|r| binomial(binomial(r as u128, k as u128), m as u128))
        .fold(0u128, |a, b| a.saturating_add(b))
}

pub fn enumerate_hypergraphs(k: usize, m: usize) -> Result<Vec<Hypergraph>> {
    enumerate_hypergraphs_with_limit(k, m, DEFAULT_ENUMERATION_LIMIT)
}

/// All hypergraphs on {1..r}, k ≤ r ≤ km, with m distinct k-edges and no
/// isolated vertex, ordered by r then by edge list.
pub fn enumerate_hypergraphs_with_limit(k: usize, m: usize, limit: u128) -> Result<Vec<Hypergraph>> {
    if k == 0 || m == 0 {
        return Err(Error::InvalidParameter("k and m must be at least 1".into()));
    }
    if k * m > 64 {
        return Err(Error::ResourceLimit("more than 64 vertices".into()));
    }
    let cost = enumeration_cost(k, m);
    if cost > limit {
        return Err(Error::ResourceLimit(format!(
            "enumerating k={k}, m={m} scans {cost} edge sets, above the limit {limit}"
        )));
    }
    let mut out = Vec::new();
    for r in k..=k * m {
        let full = full_mask(r);
        let mut all_edges = Vec::new();
        crate::limit::for_each_subset(r, k, |s| {
            all_edges.push(s.iter().fold(0u64, |a, &i| a | 1 << i));
            Ok(())
        })?;
        crate::limit::for_each_subset(all_edges.len(), m, |pick| {
            let cover = pick.iter().fold(0u64, |a, &i| a | all_edges[i]);
            if cover == full {
                let edges: Vec<u64> = pick.iter().map(|&i| all_edges[i]).collect();
                out.push(Hypergraph::from_masks(r, k, edges)?);
            }
            Ok(())
        })?;
    }
    Ok(out)
}
