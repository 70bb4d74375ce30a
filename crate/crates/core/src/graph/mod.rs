//! Matrix-weighted graphs and their block Laplacians.
//!
//! A [`MatrixWeightedGraph`] is the matrix-free representation of a block
//! Laplacian: vertex `i` carries a positive semidefinite self-loop block and
//! every undirected edge carries a positive definite block. The Laplacian has
//! `-w(i, j)` off the diagonal and `w(i, i) + sum_k w(i, k)` on it.

mod elimination;
pub mod io;
mod partition;
mod tree;

use std::collections::HashSet;

use nalgebra::DMatrix;

use crate::blockmat::SymBlock;
use crate::error::{Error, Result};

pub use elimination::elimination_fill;
pub use partition::{augment_mst, partition_tree, AugmentedTree};
pub use tree::{prim_mst, prim_spanning_forest, RootedTree};
pub use io::{read_graph, write_graph};

/// Largest `n * d` for which [`MatrixWeightedGraph::assemble_dense`] will
/// allocate a dense matrix.
pub const DENSE_LIMIT: usize = 4096;

/// Tolerance used when validating self-loop blocks as positive semidefinite.
const SELF_LOOP_PSD_TOL: f64 = 1e-12;

/// Undirected weighted edge with `i < j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub weight: SymBlock,
}

impl Edge {
    pub fn new(i: usize, j: usize, weight: SymBlock) -> Self {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        Edge { i, j, weight }
    }

    pub fn other(&self, v: usize) -> usize {
        if v == self.i {
            self.j
        } else {
            self.i
        }
    }
}

#[derive(Debug, Clone)]
pub struct MatrixWeightedGraph {
    dim: usize,
    self_loops: Vec<SymBlock>,
    edges: Vec<Edge>,
    /// `(neighbor, edge index)` per vertex, in edge insertion order.
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl MatrixWeightedGraph {
    /// Builds a graph, checking that edge weights are positive definite,
    /// self-loops positive semidefinite, and that there are no duplicate or
    /// diagonal edges. Edges may be given with either endpoint first.
    pub fn new(dim: usize, self_loops: Vec<SymBlock>, edges: Vec<Edge>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("block dimension must be positive".into()));
        }
        let n = self_loops.len();
        for (v, w) in self_loops.iter().enumerate() {
            if w.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: w.dim() });
            }
            if !w.is_psd(SELF_LOOP_PSD_TOL) {
                return Err(Error::InvalidInput(format!(
                    "self-loop of vertex {v} is not positive semidefinite"
                )));
            }
        }
        let mut seen = HashSet::with_capacity(edges.len());
        let mut normalized = Vec::with_capacity(edges.len());
        for e in edges {
            let e = Edge::new(e.i, e.j, e.weight);
            if e.j >= n {
                return Err(Error::InvalidInput(format!(
                    "edge ({}, {}) references a vertex outside 0..{n}",
                    e.i, e.j
                )));
            }
            if e.i == e.j {
                return Err(Error::InvalidInput(format!(
                    "edge ({}, {}) is a self-loop; store it as a self-loop block",
                    e.i, e.j
                )));
            }
            if e.weight.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: e.weight.dim() });
            }
            if !e.weight.is_finite() || !(e.weight.min_eigenvalue() > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "weight of edge ({}, {}) is not positive definite",
                    e.i, e.j
                )));
            }
            if !seen.insert((e.i, e.j)) {
                return Err(Error::InvalidInput(format!("duplicate edge ({}, {})", e.i, e.j)));
            }
            normalized.push(e);
        }
        Ok(Self::from_parts(dim, self_loops, normalized))
    }

    /// Graph with self-loops only.
    pub fn without_edges(dim: usize, self_loops: Vec<SymBlock>) -> Result<Self> {
        Self::new(dim, self_loops, Vec::new())
    }

    /// Assembles a graph from parts already known to be valid (derived from a
    /// validated graph).
    pub(crate) fn from_parts(dim: usize, self_loops: Vec<SymBlock>, edges: Vec<Edge>) -> Self {
        let mut adjacency = vec![Vec::new(); self_loops.len()];
        for (k, e) in edges.iter().enumerate() {
            adjacency[e.i].push((e.j, k));
            adjacency[e.j].push((e.i, k));
        }
        MatrixWeightedGraph {
            dim,
            self_loops,
            edges,
            adjacency,
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.self_loops.len()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn self_loops(&self) -> &[SymBlock] {
        &self.self_loops
    }

    pub fn self_loop(&self, v: usize) -> &SymBlock {
        &self.self_loops[v]
    }

    /// `(neighbor, edge index)` pairs of vertex `v`.
    pub fn neighbors(&self, v: usize) -> &[(usize, usize)] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// `m / n`.
    pub fn edge_vertex_ratio(&self) -> f64 {
        if self.n() == 0 {
            0.0
        } else {
            self.edge_count() as f64 / self.n() as f64
        }
    }

    /// Sorted neighbor lists, the simple-graph view used by the elimination game.
    pub fn adjacency_lists(&self) -> Vec<Vec<usize>> {
        self.adjacency
            .iter()
            .map(|nbrs| {
                let mut v: Vec<usize> = nbrs.iter().map(|&(u, _)| u).collect();
                v.sort_unstable();
                v
            })
            .collect()
    }

    /// Diagonal block `w(v, v) + sum_k w(v, k)` of the Laplacian.
    pub fn diagonal_block(&self, v: usize) -> SymBlock {
        let mut acc = self.self_loops[v].clone();
        for &(_, k) in &self.adjacency[v] {
            acc += &self.edges[k].weight;
        }
        acc
    }

    pub fn diagonal_blocks(&self) -> Vec<SymBlock> {
        (0..self.n()).map(|v| self.diagonal_block(v)).collect()
    }

    /// Connected components over edges: `(count, label per vertex)`, labels
    /// numbered by smallest member vertex.
    pub fn components(&self) -> (usize, Vec<usize>) {
        let n = self.n();
        let mut label = vec![usize::MAX; n];
        let mut count = 0;
        let mut stack = Vec::new();
        for s in 0..n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = count;
            stack.push(s);
            while let Some(v) = stack.pop() {
                for &(u, _) in &self.adjacency[v] {
                    if label[u] == usize::MAX {
                        label[u] = count;
                        stack.push(u);
                    }
                }
            }
            count += 1;
        }
        (count, label)
    }

    /// Subgraph keeping the listed edges and all self-loops.
    pub fn edge_subgraph(&self, edge_indices: &[usize]) -> Self {
        let edges = edge_indices.iter().map(|&k| self.edges[k].clone()).collect();
        Self::from_parts(self.dim, self.self_loops.clone(), edges)
    }

    /// Replaces the self-loops, keeping the edge set.
    pub fn with_self_loops(&self, self_loops: Vec<SymBlock>) -> Result<Self> {
        if self_loops.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: self_loops.len(),
            });
        }
        Self::new(self.dim, self_loops, self.edges.clone())
    }

    /// `y = L_G v`, matrix-free.
    pub fn laplacian_matvec_into(&self, v: &[f64], y: &mut [f64]) -> Result<()> {
        let len = self.n() * self.dim;
        if v.len() != len {
            return Err(Error::DimensionMismatch { expected: len, got: v.len() });
        }
        if y.len() != len {
            return Err(Error::DimensionMismatch { expected: len, got: y.len() });
        }
        self.matvec_unchecked(v, y);
        Ok(())
    }

    pub fn laplacian_matvec(&self, v: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; v.len()];
        self.laplacian_matvec_into(v, &mut y)?;
        Ok(y)
    }

    pub(crate) fn matvec_unchecked(&self, v: &[f64], y: &mut [f64]) {
        let d = self.dim;
        y.fill(0.0);
        for (i, w) in self.self_loops.iter().enumerate() {
            w.mul_vec_add(1.0, &v[i * d..(i + 1) * d], &mut y[i * d..(i + 1) * d]);
        }
        let mut diff = vec![0.0; d];
        let mut t = vec![0.0; d];
        for e in &self.edges {
            let (vi, vj) = (&v[e.i * d..(e.i + 1) * d], &v[e.j * d..(e.j + 1) * d]);
            for k in 0..d {
                diff[k] = vi[k] - vj[k];
            }
            t.fill(0.0);
            e.weight.mul_vec_add(1.0, &diff, &mut t);
            for k in 0..d {
                y[e.i * d + k] += t[k];
                y[e.j * d + k] -= t[k];
            }
        }
    }

    /// Dense `(n d) x (n d)` Laplacian. Refuses sizes above [`DENSE_LIMIT`].
    pub fn assemble_dense(&self) -> Result<DMatrix<f64>> {
        let d = self.dim;
        let size = self.n() * d;
        if size > DENSE_LIMIT {
            return Err(Error::CapacityExceeded { size, limit: DENSE_LIMIT });
        }
        let mut m = DMatrix::zeros(size, size);
        let mut add_block = |bi: usize, bj: usize, w: &SymBlock, sign: f64| {
            for r in 0..d {
                for c in 0..d {
                    m[(bi * d + r, bj * d + c)] += sign * w.get(r, c);
                }
            }
        };
        for (v, w) in self.self_loops.iter().enumerate() {
            add_block(v, v, w, 1.0);
        }
        for e in &self.edges {
            add_block(e.i, e.i, &e.weight, 1.0);
            add_block(e.j, e.j, &e.weight, 1.0);
            add_block(e.i, e.j, &e.weight, -1.0);
            add_block(e.j, e.i, &e.weight, -1.0);
        }
        Ok(m)
    }
}

/// Free-function form of [`MatrixWeightedGraph::laplacian_matvec`].
pub fn laplacian_matvec(g: &MatrixWeightedGraph, v: &[f64]) -> Result<Vec<f64>> {
    g.laplacian_matvec(v)
}

/// Free-function form of [`MatrixWeightedGraph::assemble_dense`].
pub fn assemble_dense(g: &MatrixWeightedGraph) -> Result<DMatrix<f64>> {
    g.assemble_dense()
}


#[cfg(test)]
mod tests {
    use super::testutil::*;
    use super::*;
    use crate::spectral::dense_is_psd;

    fn dense_matvec(m: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
        let x = nalgebra::DVector::from_column_slice(v);
        (m * x).iter().copied().collect()
    }

    fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
        num / den.max(f64::MIN_POSITIVE)
    }

    #[test]
    fn single_vertex_matvec() {
        let w = SymBlock::diagonal(&[1.0, 2.0, 3.0]);
        let g = MatrixWeightedGraph::without_edges(3, vec![w]).unwrap();
        assert_eq!(g.laplacian_matvec(&[1.0, 1.0, 2.0]).unwrap(), vec![1.0, 2.0, 6.0]);
    }

    #[test]
    fn constant_vector_in_kernel() {
        let g = MatrixWeightedGraph::new(
            3,
            vec![SymBlock::zeros(3), SymBlock::zeros(3)],
            vec![Edge::new(0, 1, SymBlock::identity(3))],
        )
        .unwrap();
        let a = [0.3, -2.0, 5.0];
        let v: Vec<f64> = a.iter().chain(a.iter()).copied().collect();
        assert_eq!(g.laplacian_matvec(&v).unwrap(), vec![0.0; 6]);
    }

    #[test]
    fn matvec_dimension_mismatch() {
        let g = random_connected_graph(1, 4, 1, 3);
        assert!(matches!(
            g.laplacian_matvec(&[0.0; 5]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn matvec_matches_dense_assembly() {
        for seed in 0..30 {
            let n = 2 + (seed as usize * 7) % 49;
            let g = random_connected_graph(seed, n, n / 2, 3);
            let a = g.assemble_dense().unwrap();
            let v = random_vector(seed + 100, n * 3);
            let y = g.laplacian_matvec(&v).unwrap();
            assert!(rel_diff(&y, &dense_matvec(&a, &v)) <= 1e-12);
        }
    }

    #[test]
    fn dense_block_diagonal_without_edges() {
        let loops = vec![SymBlock::diagonal(&[1.0, 2.0, 3.0]), SymBlock::identity(3)];
        let g = MatrixWeightedGraph::without_edges(3, loops).unwrap();
        let a = g.assemble_dense().unwrap();
        assert_eq!(a[(0, 0)], 1.0);
        assert_eq!(a[(2, 2)], 3.0);
        assert_eq!(a[(3, 3)], 1.0);
        assert_eq!(a[(0, 3)], 0.0);
    }

    #[test]
    fn dense_single_edge_shape() {
        let w = SymBlock::from_row_major(2, &[2.0, 1.0, 1.0, 3.0]).unwrap();
        let g = MatrixWeightedGraph::new(
            2,
            vec![SymBlock::zeros(2), SymBlock::zeros(2)],
            vec![Edge::new(1, 0, w.clone())],
        )
        .unwrap();
        let a = g.assemble_dense().unwrap();
        for r in 0..2 {
            for c in 0..2 {
                assert_eq!(a[(r, c)], w.get(r, c));
                assert_eq!(a[(r + 2, c + 2)], w.get(r, c));
                assert_eq!(a[(r, c + 2)], -w.get(r, c));
                assert_eq!(a[(r + 2, c)], -w.get(r, c));
            }
        }
    }

    #[test]
    fn dense_capacity_guard() {
        let loops = vec![SymBlock::identity(3); 1400];
        let g = MatrixWeightedGraph::without_edges(3, loops).unwrap();
        assert!(matches!(g.assemble_dense(), Err(Error::CapacityExceeded { .. })));
    }

    #[test]
    fn assembled_laplacian_is_psd() {
        for seed in 0..20 {
            let g = random_connected_graph(seed, 12, 10, 3);
            let a = g.assemble_dense().unwrap();
            assert!(dense_is_psd(&a, 1e-12));
        }
    }

    #[test]
    fn subgraph_difference_is_psd() {
        for seed in 0..20 {
            let g = random_connected_graph(seed, 10, 8, 3);
            let keep: Vec<usize> = (0..g.edge_count()).filter(|k| (k + seed as usize) % 3 != 0).collect();
            let h = g.edge_subgraph(&keep);
            let diff = g.assemble_dense().unwrap() - h.assemble_dense().unwrap();
            assert!(dense_is_psd(&diff, 1e-12));
        }
    }

    #[test]
    fn invalid_graphs_rejected() {
        let loops = vec![SymBlock::zeros(3); 3];
        let dup = vec![
            Edge::new(0, 1, SymBlock::identity(3)),
            Edge::new(1, 0, SymBlock::identity(3)),
        ];
        assert!(MatrixWeightedGraph::new(3, loops.clone(), dup).is_err());
        let diag = vec![Edge { i: 1, j: 1, weight: SymBlock::identity(3) }];
        assert!(MatrixWeightedGraph::new(3, loops.clone(), diag).is_err());
        let singular = vec![Edge::new(0, 1, SymBlock::diagonal(&[1.0, 0.0, 1.0]))];
        assert!(MatrixWeightedGraph::new(3, loops.clone(), singular).is_err());
        let bad_loop = vec![SymBlock::diagonal(&[-1.0, 1.0, 1.0]), SymBlock::zeros(3), SymBlock::zeros(3)];
        assert!(MatrixWeightedGraph::new(3, bad_loop, vec![]).is_err());
        let out_of_range = vec![Edge::new(0, 3, SymBlock::identity(3))];
        assert!(MatrixWeightedGraph::new(3, loops, out_of_range).is_err());
    }

    #[test]
    fn components_counted() {
        let loops = vec![SymBlock::identity(3); 5];
        let g = MatrixWeightedGraph::new(
            3,
            loops,
            vec![Edge::new(0, 1, SymBlock::identity(3)), Edge::new(3, 4, SymBlock::identity(3))],
        )
        .unwrap();
        let (count, labels) = g.components();
        assert_eq!(count, 3);
        assert_eq!(labels, vec![0, 0, 1, 2, 2]);
    }
}
