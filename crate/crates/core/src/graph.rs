//! Simple connected graphs, hop-distance matrices and the graph boundary.
//!
//! Vertices are dense indices `0..n`. Everything in this module is exact
//! integer arithmetic.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A finite, simple, undirected, connected graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
    edge_count: usize,
}

impl Graph {
    /// Builds a graph on `n` vertices from an edge list.
    ///
    /// Duplicate and reversed edges collapse to one edge. Self-loops and
    /// disconnected inputs are rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::VertexOutOfRange { u, v, n });
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        let mut edge_count = 0;
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
            edge_count += list.len();
        }
        let graph = Graph {
            adjacency,
            edge_count: edge_count / 2,
        };
        if let Some(unreached) = graph.first_unreached() {
            return Err(Error::Disconnected { unreached });
        }
        Ok(graph)
    }

    fn first_unreached(&self) -> Option<usize> {
        let mut seen = vec![false; self.n()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &w in &self.adjacency[u] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.iter().position(|&s| !s)
    }

    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Sorted neighbors of `v`.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }
}

/// Dense symmetric matrix of hop distances.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<u16>,
    diam: u32,
}

/// Whether BFS rows are computed on the rayon pool or in a plain loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    #[default]
    Parallel,
    Serial,
}

impl DistanceMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn diam(&self) -> u32 {
        self.diam
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> u16 {
        self.data[u * self.n + v]
    }

    #[inline]
    pub fn row(&self, u: usize) -> &[u16] {
        &self.data[u * self.n..(u + 1) * self.n]
    }

    /// Builds a matrix from explicit rows. Only used where a matrix is
    /// not derived from a graph, e.g. scaled copies in tests.
    pub fn from_rows(rows: Vec<Vec<u16>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut data = Vec::with_capacity(n * n);
        for row in &rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        let diam = data.iter().copied().max().unwrap_or(0) as u32;
        Ok(DistanceMatrix { n, data, diam })
    }

    /// Returns a copy with every entry multiplied by `factor`.
    pub fn scaled(&self, factor: u16) -> Result<Self> {
        let diam = self.diam as usize * factor as usize;
        if diam > u16::MAX as usize {
            return Err(Error::DiameterTooLarge(diam));
        }
        Ok(DistanceMatrix {
            n: self.n,
            data: self.data.iter().map(|&d| d * factor).collect(),
            diam: diam as u32,
        })
    }
}

/// All-pairs hop distances, one BFS per source.
pub fn all_pairs_distances(g: &Graph) -> Result<DistanceMatrix> {
    all_pairs_distances_with(g, Parallelism::Parallel)
}

pub fn all_pairs_distances_with(g: &Graph, mode: Parallelism) -> Result<DistanceMatrix> {
    let n = g.n();
    let mut data = vec![0u16; n * n];
    let row_eccentricity = |(source, row): (usize, &mut [u16])| -> Result<u32> {
        bfs_row(g, source, row)
    };
    let eccentricities: Vec<Result<u32>> = match mode {
        Parallelism::Parallel => data.par_chunks_mut(n).enumerate().map(row_eccentricity).collect(),
        Parallelism::Serial => data.chunks_mut(n).enumerate().map(row_eccentricity).collect(),
    };
    let mut diam = 0;
    for ecc in eccentricities {
        diam = diam.max(ecc?);
    }
    Ok(DistanceMatrix { n, data, diam })
}

fn bfs_row(g: &Graph, source: usize, row: &mut [u16]) -> Result<u32> {
    const UNSEEN: u32 = u32::MAX;
    let mut dist = vec![UNSEEN; g.n()];
    let mut queue = VecDeque::with_capacity(g.n());
    dist[source] = 0;
    queue.push_back(source);
    let mut ecc = 0;
    while let Some(u) = queue.pop_front() {
        let du = dist[u];
        for &w in g.neighbors(u) {
            if dist[w] == UNSEEN {
                dist[w] = du + 1;
                ecc = du + 1;
                queue.push_back(w);
            }
        }
    }
    if ecc > u16::MAX as u32 {
        return Err(Error::DiameterTooLarge(ecc as usize));
    }
    for (slot, &d) in row.iter_mut().zip(&dist) {
        // connectivity is a construction invariant
        debug_assert_ne!(d, UNSEEN);
        *slot = d as u16;
    }
    Ok(ecc)
}

/// Boundary vertices, each with one certifying target vertex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundarySet {
    pub members: Vec<usize>,
    /// `witnesses[i]` certifies `members[i]`.
    pub witnesses: Vec<usize>,
}

impl BoundarySet {
    pub fn contains(&self, v: usize) -> bool {
        self.members.binary_search(&v).is_ok()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn mask(&self, n: usize) -> Vec<bool> {
        let mut mask = vec![false; n];
        for &v in &self.members {
            mask[v] = true;
        }
        mask
    }
}

/// `u` is a boundary vertex when some `v` satisfies
/// `sum_{w ~ u} d(w, v) < deg(u) * d(u, v)`.
pub fn boundary(g: &Graph, dist: &DistanceMatrix) -> BoundarySet {
    let n = g.n();
    let mut members = Vec::new();
    let mut witnesses = Vec::new();
    let mut neighbor_sum = vec![0u64; n];
    for u in 0..n {
        let deg = g.degree(u) as u64;
        if deg == 0 {
            continue;
        }
        neighbor_sum.iter_mut().for_each(|s| *s = 0);
        for &w in g.neighbors(u) {
            for (s, &d) in neighbor_sum.iter_mut().zip(dist.row(w)) {
                *s += d as u64;
            }
        }
        let witness = neighbor_sum
            .iter()
            .zip(dist.row(u))
            .position(|(&s, &d)| s < deg * d as u64);
        if let Some(v) = witness {
            members.push(u);
            witnesses.push(v);
        }
    }
    BoundarySet { members, witnesses }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsoperimetricReport {
    pub boundary_size: usize,
    pub max_degree: usize,
    pub diam: u32,
    /// `n / (2 * max_degree * diam)`; zero for the one-vertex graph.
    pub lower_bound: f64,
    pub satisfied: bool,
}

/// Checks `#boundary >= n / (2 * max_degree * diam)` by cross-multiplication.
pub fn isoperimetric_report(g: &Graph, dist: &DistanceMatrix, b: &BoundarySet) -> IsoperimetricReport {
    let n = g.n() as u64;
    let max_degree = g.max_degree();
    let diam = dist.diam();
    let denom = 2 * max_degree as u64 * diam as u64;
    let (lower_bound, satisfied) = if denom == 0 {
        (0.0, true)
    } else {
        (n as f64 / denom as f64, b.len() as u64 * denom >= n)
    };
    IsoperimetricReport {
        boundary_size: b.len(),
        max_degree,
        diam,
        lower_bound,
        satisfied,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> Graph {
        Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap()
    }

    fn complete(n: usize) -> Graph {
        let edges: Vec<_> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        Graph::from_edges(n, &edges).unwrap()
    }

    #[test]
    fn build_normalizes_edges() {
        let g = path3();
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.neighbors(1), &[0, 2]);

        let g = Graph::from_edges(2, &[(0, 1), (1, 0)]).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1)]);
    }

    #[test]
    fn build_rejects_bad_input() {
        assert_eq!(
            Graph::from_edges(3, &[(0, 1)]),
            Err(Error::Disconnected { unreached: 2 })
        );
        assert_eq!(Graph::from_edges(2, &[(0, 0), (0, 1)]), Err(Error::SelfLoop(0)));
        assert_eq!(Graph::from_edges(0, &[]), Err(Error::EmptyGraph));
        assert!(matches!(
            Graph::from_edges(2, &[(0, 2)]),
            Err(Error::VertexOutOfRange { .. })
        ));
        // a single vertex is connected
        assert_eq!(Graph::from_edges(1, &[]).unwrap().n(), 1);
    }

    #[test]
    fn distances_small_graphs() {
        let d = all_pairs_distances(&path3()).unwrap();
        assert_eq!(d.get(0, 2), 2);
        assert_eq!(d.diam(), 2);

        let d = all_pairs_distances(&complete(4)).unwrap();
        assert_eq!(d.diam(), 1);
        for u in 0..4 {
            for v in 0..4 {
                assert_eq!(d.get(u, v), u16::from(u != v));
            }
        }

        let c4 = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let d = all_pairs_distances(&c4).unwrap();
        assert_eq!((d.get(0, 2), d.get(0, 1), d.diam()), (2, 1, 2));
    }

    #[test]
    fn boundary_small_graphs() {
        let g = path3();
        let d = all_pairs_distances(&g).unwrap();
        assert_eq!(boundary(&g, &d).members, vec![0, 2]);

        let g = complete(5);
        let d = all_pairs_distances(&g).unwrap();
        assert_eq!(boundary(&g, &d).members, vec![0, 1, 2, 3, 4]);

        let c4 = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let d = all_pairs_distances(&c4).unwrap();
        let b = boundary(&c4, &d);
        assert_eq!(b.members, vec![0, 1, 2, 3]);
        // every witness is the antipode
        assert_eq!(b.witnesses, vec![2, 3, 0, 1]);
    }

    #[test]
    fn boundary_of_single_vertex_is_empty() {
        let g = Graph::from_edges(1, &[]).unwrap();
        let d = all_pairs_distances(&g).unwrap();
        assert!(boundary(&g, &d).is_empty());
    }

    #[test]
    fn isoperimetric_examples() {
        let g = path3();
        let d = all_pairs_distances(&g).unwrap();
        let r = isoperimetric_report(&g, &d, &boundary(&g, &d));
        assert_eq!(r.boundary_size, 2);
        assert_eq!(r.lower_bound, 3.0 / 8.0);
        assert!(r.satisfied);

        let g = complete(4);
        let d = all_pairs_distances(&g).unwrap();
        let r = isoperimetric_report(&g, &d, &boundary(&g, &d));
        assert_eq!(r.boundary_size, 4);
        assert_eq!(r.lower_bound, 4.0 / 6.0);
        assert!(r.satisfied);
    }

    #[test]
    fn scaled_matrix() {
        let d = all_pairs_distances(&path3()).unwrap().scaled(3).unwrap();
        assert_eq!(d.get(0, 2), 6);
        assert_eq!(d.diam(), 6);
    }
}
