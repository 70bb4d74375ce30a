//! Preconditioners for block Laplacian systems.
//!
//! Every strategy is an SPD matrix `P` that is itself the block Laplacian of
//! some matrix-weighted graph ([`Preconditioner::graph`]); `apply` returns
//! `P^{-1} r`. Identity and the two Jacobi variants are edgeless graphs; the
//! tree strategies keep a spanning forest of the input graph.

mod gremban;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::blockmat::{BlockCholesky, SymBlock};
use crate::error::{Error, Result};
use crate::factor::{ldlt_general, ldlt_tree, BlockLDLT, BlockMatrix};
use crate::graph::{augment_mst, partition_tree, prim_spanning_forest, MatrixWeightedGraph};

pub use gremban::{gremban_expand, GrembanExpansion};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Strategy {
    Identity,
    /// Scalar diagonal of `Gamma`.
    Jacobi,
    /// `d x d` diagonal blocks of `Gamma`.
    BlockJacobi,
    /// Maximum spanning tree (forest) with the original self-loops.
    Mst,
    /// Maximum spanning tree with the full block diagonal of `Gamma`.
    RowMst,
    /// Maximum spanning tree plus the heaviest edges between `t` subtrees;
    /// `None` picks `t = round(n^(1/4))`.
    AugmentedMst(Option<usize>),
}

impl Strategy {
    /// The five strategies compared in the benchmark figures.
    pub const STANDARD: [Strategy; 5] = [
        Strategy::Identity,
        Strategy::Jacobi,
        Strategy::BlockJacobi,
        Strategy::Mst,
        Strategy::RowMst,
    ];

    /// Whether the spanning-tree eigenvalue bounds cover this strategy.
    pub fn bound_applicable(&self) -> bool {
        matches!(self, Strategy::Mst | Strategy::AugmentedMst(_))
    }

    /// Parses a comma-separated list such as `identity,mst,aug-mst:3`.
    pub fn parse_list(s: &str) -> Result<Vec<Strategy>> {
        let list = s
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(str::parse)
            .collect::<Result<Vec<_>>>()?;
        if list.is_empty() {
            return Err(Error::Config("empty strategy list".into()));
        }
        Ok(list)
    }
}

/// `round(n^(1/4))`, at least 1.
pub fn default_subtree_count(n: usize) -> usize {
    ((n as f64).powf(0.25).round() as usize).max(1)
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Identity => f.write_str("identity"),
            Strategy::Jacobi => f.write_str("jacobi"),
            Strategy::BlockJacobi => f.write_str("block-jacobi"),
            Strategy::Mst => f.write_str("mst"),
            Strategy::RowMst => f.write_str("row-mst"),
            Strategy::AugmentedMst(None) => f.write_str("aug-mst"),
            Strategy::AugmentedMst(Some(t)) => write!(f, "aug-mst:{t}"),
        }
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "identity" => Strategy::Identity,
            "jacobi" => Strategy::Jacobi,
            "block-jacobi" => Strategy::BlockJacobi,
            "mst" => Strategy::Mst,
            "row-mst" => Strategy::RowMst,
            "aug-mst" => Strategy::AugmentedMst(None),
            other => match other.strip_prefix("aug-mst:") {
                Some(t) => match t.parse::<usize>() {
                    Ok(t) if t >= 1 => Strategy::AugmentedMst(Some(t)),
                    _ => return Err(Error::Config(format!("bad subtree count in `{other}`"))),
                },
                None => return Err(Error::Config(format!("unknown strategy `{other}`"))),
            },
        })
    }
}

impl TryFrom<String> for Strategy {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Strategy> for String {
    fn from(s: Strategy) -> String {
        s.to_string()
    }
}

#[derive(Debug, Clone)]
enum Kind {
    Identity,
    Jacobi(Vec<f64>),
    BlockJacobi(Vec<BlockCholesky>),
    Factored(BlockLDLT),
}

#[derive(Debug, Clone)]
pub struct Preconditioner {
    strategy: Strategy,
    kind: Kind,
    graph: MatrixWeightedGraph,
    subtree_count: Option<usize>,
}

impl Preconditioner {
    pub fn build(strategy: Strategy, g: &MatrixWeightedGraph) -> Result<Self> {
        let dim = g.dim();
        let n = g.n();
        let mut subtree_count = None;
        let (kind, graph) = match strategy {
            Strategy::Identity => {
                let graph = MatrixWeightedGraph::without_edges(dim, vec![SymBlock::identity(dim); n])?;
                (Kind::Identity, graph)
            }
            Strategy::Jacobi => {
                let mut inv = Vec::with_capacity(n * dim);
                let mut loops = Vec::with_capacity(n);
                for v in 0..n {
                    let block = g.diagonal_block(v);
                    let diag: Vec<f64> = (0..dim).map(|k| block.get(k, k)).collect();
                    if diag.iter().any(|&x| !(x > 0.0)) {
                        return Err(Error::NotPositiveDefinite { vertex: v });
                    }
                    inv.extend(diag.iter().map(|x| 1.0 / x));
                    loops.push(SymBlock::diagonal(&diag));
                }
                (Kind::Jacobi(inv), MatrixWeightedGraph::without_edges(dim, loops)?)
            }
            Strategy::BlockJacobi => {
                let blocks = g.diagonal_blocks();
                let chol = blocks
                    .iter()
                    .enumerate()
                    .map(|(v, b)| b.cholesky().map_err(|_| Error::NotPositiveDefinite { vertex: v }))
                    .collect::<Result<Vec<_>>>()?;
                (Kind::BlockJacobi(chol), MatrixWeightedGraph::without_edges(dim, blocks)?)
            }
            Strategy::Mst => {
                let tree = prim_spanning_forest(g);
                let f = ldlt_tree(&tree)?;
                (Kind::Factored(f), tree.to_graph())
            }
            Strategy::RowMst => {
                let tree = prim_spanning_forest(g);
                let mut in_tree = vec![false; g.edge_count()];
                for v in 0..n {
                    if let Some(k) = tree.graph_edge(v) {
                        in_tree[k] = true;
                    }
                }
                // Dropped edges fold into the self-loops, so the diagonal
                // blocks of P equal those of Gamma.
                let mut loops = g.self_loops().to_vec();
                for (k, e) in g.edges().iter().enumerate() {
                    if !in_tree[k] {
                        loops[e.i] += &e.weight;
                        loops[e.j] += &e.weight;
                    }
                }
                let tree = tree.with_self_loops(loops)?;
                let f = ldlt_tree(&tree)?;
                (Kind::Factored(f), tree.to_graph())
            }
            Strategy::AugmentedMst(t) => {
                let t = t.unwrap_or_else(|| default_subtree_count(n));
                let tree = prim_spanning_forest(g);
                let assignment = partition_tree(&tree, t);
                let aug = augment_mst(g, &tree, &assignment);
                subtree_count = Some(aug.subtree_count());
                let h = aug.to_graph();
                let f = ldlt_general(&BlockMatrix::from_graph(&h), &aug.elimination_order())?;
                (Kind::Factored(f), h)
            }
        };
        Ok(Preconditioner { strategy, kind, graph, subtree_count })
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn dim(&self) -> usize {
        self.graph.dim()
    }

    /// `P` as a matrix-weighted graph: its block Laplacian is the
    /// preconditioner matrix.
    pub fn graph(&self) -> &MatrixWeightedGraph {
        &self.graph
    }

    /// Block factorization for the tree-based strategies.
    pub fn factorization(&self) -> Option<&BlockLDLT> {
        match &self.kind {
            Kind::Factored(f) => Some(f),
            _ => None,
        }
    }

    /// Number of subtree parts actually produced for `AugmentedMst`.
    pub fn subtree_count(&self) -> Option<usize> {
        self.subtree_count
    }

    /// Blocks of `L` beyond the edges of `P`, i.e. the fill of the
    /// factorization.
    pub fn fill(&self) -> usize {
        self.factorization()
            .map_or(0, |f| f.l_nnz().saturating_sub(self.graph.edge_count()))
    }

    /// `z = P^{-1} r`.
    pub fn apply_into(&self, r: &[f64], z: &mut [f64]) -> Result<()> {
        let len = self.n() * self.dim();
        for got in [r.len(), z.len()] {
            if got != len {
                return Err(Error::DimensionMismatch { expected: len, got });
            }
        }
        self.apply_unchecked(r, z);
        Ok(())
    }

    pub fn apply(&self, r: &[f64]) -> Result<Vec<f64>> {
        let mut z = vec![0.0; r.len()];
        self.apply_into(r, &mut z)?;
        Ok(z)
    }

    pub(crate) fn apply_unchecked(&self, r: &[f64], z: &mut [f64]) {
        let d = self.dim();
        match &self.kind {
            Kind::Identity => z.copy_from_slice(r),
            Kind::Jacobi(inv) => {
                for ((zi, ri), s) in z.iter_mut().zip(r).zip(inv) {
                    *zi = ri * s;
                }
            }
            Kind::BlockJacobi(chol) => {
                z.copy_from_slice(r);
                for (v, c) in chol.iter().enumerate() {
                    c.solve_in_place(&mut z[v * d..(v + 1) * d]);
                }
            }
            Kind::Factored(f) => {
                let x = f.solve(r).expect("length checked by caller");
                z.copy_from_slice(&x);
            }
        }
    }
}
