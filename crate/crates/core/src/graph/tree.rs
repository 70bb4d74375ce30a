use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use super::{Edge, MatrixWeightedGraph};
use crate::blockmat::SymBlock;
use crate::error::{Error, Result};

/// A rooted spanning tree (or forest) of a matrix-weighted graph.
///
/// Each non-root vertex stores its parent and the weight of the edge to it.
/// `elimination_order` lists every vertex after all of its children, so the
/// tree Laplacian factors without fill in that order.
#[derive(Debug, Clone)]
pub struct RootedTree {
    dim: usize,
    parent: Vec<Option<usize>>,
    parent_weight: Vec<Option<SymBlock>>,
    graph_edge: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    self_loops: Vec<SymBlock>,
    elimination_order: Vec<usize>,
}

impl RootedTree {
    pub fn n(&self) -> usize {
        self.parent.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn parents(&self) -> &[Option<usize>] {
        &self.parent
    }

    /// Weight of the edge between `v` and its parent.
    pub fn parent_weight(&self, v: usize) -> Option<&SymBlock> {
        self.parent_weight[v].as_ref()
    }

    /// Index, in the source graph, of the edge between `v` and its parent.
    pub fn graph_edge(&self, v: usize) -> Option<usize> {
        self.graph_edge[v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    pub fn roots(&self) -> Vec<usize> {
        (0..self.n()).filter(|&v| self.parent[v].is_none()).collect()
    }

    pub fn self_loops(&self) -> &[SymBlock] {
        &self.self_loops
    }

    pub fn elimination_order(&self) -> &[usize] {
        &self.elimination_order
    }

    pub fn edge_count(&self) -> usize {
        self.parent.iter().filter(|p| p.is_some()).count()
    }

    /// Tree edges as `(min, max)` vertex pairs.
    pub fn edge_pairs(&self) -> Vec<(usize, usize)> {
        let mut pairs: Vec<(usize, usize)> = (0..self.n())
            .filter_map(|v| self.parent[v].map(|p| (v.min(p), v.max(p))))
            .collect();
        pairs.sort_unstable();
        pairs
    }

    /// Sum of `lambda_min` over the tree edge weights.
    pub fn total_key(&self) -> f64 {
        self.parent_weight
            .iter()
            .flatten()
            .map(SymBlock::min_eigenvalue)
            .sum()
    }

    /// The tree as a matrix-weighted graph (tree edges plus self-loops).
    pub fn to_graph(&self) -> MatrixWeightedGraph {
        let edges = (0..self.n())
            .filter_map(|v| {
                let p = self.parent[v]?;
                Some(Edge::new(v, p, self.parent_weight[v].clone()?))
            })
            .collect();
        MatrixWeightedGraph::from_parts(self.dim, self.self_loops.clone(), edges)
    }

    /// Same tree with different self-loop blocks.
    pub fn with_self_loops(&self, self_loops: Vec<SymBlock>) -> Result<Self> {
        if self_loops.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                got: self_loops.len(),
            });
        }
        Ok(RootedTree {
            self_loops,
            ..self.clone()
        })
    }

    /// Whether `order` is a permutation that places every vertex after all of
    /// its children.
    pub fn is_children_first(&self, order: &[usize]) -> bool {
        if order.len() != self.n() {
            return false;
        }
        let mut pos = vec![usize::MAX; self.n()];
        for (k, &v) in order.iter().enumerate() {
            if v >= self.n() || pos[v] != usize::MAX {
                return false;
            }
            pos[v] = k;
        }
        (0..self.n()).all(|v| self.parent[v].is_none_or(|p| pos[v] < pos[p]))
    }

    /// Vertex count of the subtree hanging below each vertex.
    pub fn subtree_sizes(&self) -> Vec<usize> {
        let mut size = vec![1; self.n()];
        for &v in &self.elimination_order {
            if let Some(p) = self.parent[v] {
                size[p] += size[v];
            }
        }
        size
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Key(f64);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Heap entry: larger key wins, ties go to the lexicographically smaller
/// `(i, j)` edge id.
type Candidate = (Key, Reverse<(usize, usize)>, usize, usize);

/// Maximum spanning tree under the scalar key `lambda_min(w(e))`, rooted at
/// vertex 0. The elimination order is the reverse of Prim insertion order.
pub fn prim_mst(g: &MatrixWeightedGraph) -> Result<RootedTree> {
    let (components, _) = g.components();
    if components > 1 {
        return Err(Error::Disconnected { components });
    }
    Ok(prim_spanning_forest(g))
}

/// Maximum spanning forest: Prim's algorithm run from the smallest unvisited
/// vertex of each connected component in turn. On a connected graph this is
/// exactly [`prim_mst`].
pub fn prim_spanning_forest(g: &MatrixWeightedGraph) -> RootedTree {
    let n = g.n();
    let keys: Vec<f64> = g.edges().iter().map(|e| e.weight.min_eigenvalue()).collect();
    let mut parent = vec![None; n];
    let mut parent_weight = vec![None; n];
    let mut graph_edge = vec![None; n];
    let mut visited = vec![false; n];
    let mut insertion = Vec::with_capacity(n);
    let mut heap: BinaryHeap<Candidate> = BinaryHeap::new();

    let push_edges = |v: usize, visited: &[bool], heap: &mut BinaryHeap<Candidate>| {
        for &(u, k) in g.neighbors(v) {
            if !visited[u] {
                let e = &g.edges()[k];
                heap.push((Key(keys[k]), Reverse((e.i, e.j)), k, u));
            }
        }
    };

    for start in 0..n {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        insertion.push(start);
        push_edges(start, &visited, &mut heap);
        while let Some((_, _, k, u)) = heap.pop() {
            if visited[u] {
                continue;
            }
            visited[u] = true;
            let e = &g.edges()[k];
            parent[u] = Some(e.other(u));
            parent_weight[u] = Some(e.weight.clone());
            graph_edge[u] = Some(k);
            insertion.push(u);
            push_edges(u, &visited, &mut heap);
        }
    }

    let mut children = vec![Vec::new(); n];
    for &v in &insertion {
        if let Some(p) = parent[v] {
            children[p].push(v);
        }
    }
    insertion.reverse();
    RootedTree {
        dim: g.dim(),
        parent,
        parent_weight,
        graph_edge,
        children,
        self_loops: g.self_loops().to_vec(),
        elimination_order: insertion,
    }
}
