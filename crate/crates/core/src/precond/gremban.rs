//! Gremban's doubling trick: a symmetric block matrix whose off-diagonal
//! blocks are positive or negative definite, and whose rows are dominant,
//! becomes a block Laplacian of twice the size.

use crate::blockmat::SymBlock;
use crate::error::{Error, Result};
use crate::factor::BlockMatrix;
use crate::graph::{Edge, MatrixWeightedGraph};

/// Tolerance for the dominance test `A_ii - sum_j |A_ij| >= 0`.
const DOMINANCE_TOL: f64 = 1e-12;

/// The expanded `2n` system
///
/// ```text
/// [ D + A-    -A+   ]
/// [  -A+     D + A- ]
/// ```
///
/// where `A-` and `A+` hold the negative and positive definite off-diagonal
/// blocks. If `A x = b` then `A' (x; -x) = (b; -b)`.
#[derive(Debug, Clone)]
pub struct GrembanExpansion {
    n: usize,
    graph: MatrixWeightedGraph,
}

impl GrembanExpansion {
    /// Original vertex count.
    pub fn n(&self) -> usize {
        self.n
    }

    /// The expanded system as a matrix-weighted graph on `2n` vertices.
    pub fn graph(&self) -> &MatrixWeightedGraph {
        &self.graph
    }

    /// `(b; -b)`.
    pub fn embed(&self, b: &[f64]) -> Result<Vec<f64>> {
        let len = self.n * self.graph.dim();
        if b.len() != len {
            return Err(Error::DimensionMismatch { expected: len, got: b.len() });
        }
        Ok(b.iter().copied().chain(b.iter().map(|x| -x)).collect())
    }

    /// `(x1 - x2) / 2`.
    pub fn recover(&self, y: &[f64]) -> Result<Vec<f64>> {
        let len = self.n * self.graph.dim();
        if y.len() != 2 * len {
            return Err(Error::DimensionMismatch { expected: 2 * len, got: y.len() });
        }
        Ok(y[..len].iter().zip(&y[len..]).map(|(a, b)| 0.5 * (a - b)).collect())
    }
}

pub fn gremban_expand(a: &BlockMatrix) -> Result<GrembanExpansion> {
    let n = a.n();
    let d = a.dim();
    let mut loops = Vec::with_capacity(2 * n);
    let mut edges = Vec::new();
    for i in 0..n {
        let diag = a.get(i, i).map_or_else(|| SymBlock::zeros(d), SymBlock::symmetrize);
        let mut slack = diag;
        for (j, block) in a.row(i) {
            if j == i {
                continue;
            }
            let s = SymBlock::symmetrize(block);
            if (&s.clone().into_block() - block).frobenius_norm() > 1e-14 * block.frobenius_norm() {
                return Err(Error::NotDefinite { i, j });
            }
            if s.is_zero() {
                continue;
            }
            let (lo, hi) = (s.min_eigenvalue(), s.max_eigenvalue());
            let abs = if lo > 0.0 {
                if i < j {
                    edges.push(Edge::new(i, n + j, s.clone()));
                    edges.push(Edge::new(j, n + i, s.clone()));
                }
                s
            } else if hi < 0.0 {
                let neg = -&s;
                if i < j {
                    edges.push(Edge::new(i, j, neg.clone()));
                    edges.push(Edge::new(n + i, n + j, neg.clone()));
                }
                neg
            } else {
                return Err(Error::NotDefinite { i, j });
            };
            slack -= &abs;
        }
        if !slack.is_psd(DOMINANCE_TOL) {
            return Err(Error::NotDominant { i });
        }
        // Clip roundoff-level negative eigenvalues so the graph validates.
        if slack.min_eigenvalue() < 0.0 {
            slack += &SymBlock::scaled_identity(d, -slack.min_eigenvalue());
        }
        loops.push(slack);
    }
    let doubled: Vec<SymBlock> = loops.iter().chain(loops.iter()).cloned().collect();
    let graph = MatrixWeightedGraph::new(d, doubled, edges)?;
    Ok(GrembanExpansion { n, graph })
}
