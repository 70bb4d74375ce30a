use std::collections::{BTreeMap, HashSet};

use super::{Edge, MatrixWeightedGraph, RootedTree};

/// Splits a rooted tree into at most `t` connected subtrees.
///
/// Vertices are visited children-first; a vertex whose accumulated open
/// subtree reaches `ceil(n / t)` vertices is cut off as the root of a new
/// part, and whatever is left at a tree root becomes that root's part. If
/// this yields fewer than `t` parts, the largest part is split at its most
/// balanced internal edge until there are `t` parts or no part can be split.
///
/// Returns a 0-based part index per vertex; parts are numbered in
/// root-to-leaf discovery order.
pub fn partition_tree(tree: &RootedTree, t: usize) -> Vec<usize> {
    let n = tree.n();
    if n == 0 {
        return Vec::new();
    }
    let t = t.clamp(1, n);
    let target = n.div_ceil(t);
    let order = tree.elimination_order();

    let mut part_root = vec![false; n];
    let mut open = vec![1usize; n];
    for &v in order {
        match tree.parent(v) {
            None => part_root[v] = true,
            Some(p) => {
                if open[v] >= target && t > 1 {
                    part_root[v] = true;
                } else {
                    open[p] += open[v];
                }
            }
        }
    }

    let mut assignment = assign_parts(tree, &part_root);
    loop {
        let parts = assignment.iter().max().map_or(0, |m| m + 1);
        if parts >= t {
            break;
        }
        match best_split(tree, &assignment, parts) {
            Some(v) => {
                part_root[v] = true;
                assignment = assign_parts(tree, &part_root);
            }
            None => break,
        }
    }
    assignment
}

fn assign_parts(tree: &RootedTree, part_root: &[bool]) -> Vec<usize> {
    let mut assignment = vec![0; tree.n()];
    let mut next = 0;
    for &v in tree.elimination_order().iter().rev() {
        assignment[v] = match tree.parent(v) {
            Some(p) if !part_root[v] => assignment[p],
            _ => {
                next += 1;
                next - 1
            }
        };
    }
    assignment
}

/// Vertex whose detachment splits the largest part most evenly.
fn best_split(tree: &RootedTree, assignment: &[usize], parts: usize) -> Option<usize> {
    let mut part_size = vec![0usize; parts];
    for &a in assignment {
        part_size[a] += 1;
    }
    let largest = (0..parts).max_by_key(|&p| (part_size[p], std::cmp::Reverse(p)))?;
    let total = part_size[largest];
    if total < 2 {
        return None;
    }
    let mut inner = vec![1usize; tree.n()];
    let mut best: Option<(usize, usize)> = None;
    for &v in tree.elimination_order() {
        if assignment[v] != largest {
            continue;
        }
        let Some(p) = tree.parent(v) else { continue };
        if assignment[p] != largest {
            continue;
        }
        let balance = inner[v].min(total - inner[v]);
        if best.is_none_or(|(b, _)| balance > b) {
            best = Some((balance, v));
        }
        inner[p] += inner[v];
    }
    best.map(|(_, v)| v)
}

/// A spanning tree plus the heaviest graph edge between every pair of
/// subtrees that the graph connects but the tree does not.
#[derive(Debug, Clone)]
pub struct AugmentedTree {
    pub base: RootedTree,
    pub extra_edges: Vec<Edge>,
    pub subtree_assignment: Vec<usize>,
}

impl AugmentedTree {
    pub fn subtree_count(&self) -> usize {
        self.subtree_assignment.iter().max().map_or(0, |m| m + 1)
    }

    /// Tree edges, extra edges and self-loops as one graph.
    pub fn to_graph(&self) -> MatrixWeightedGraph {
        let base = self.base.to_graph();
        let mut edges = base.edges().to_vec();
        edges.extend(self.extra_edges.iter().cloned());
        MatrixWeightedGraph::from_parts(base.dim(), base.self_loops().to_vec(), edges)
    }

    /// Marks every vertex that is an ancestor (itself included) of an
    /// endpoint of an extra edge.
    pub fn endpoint_ancestors(&self) -> Vec<bool> {
        let mut marked = vec![false; self.base.n()];
        for e in &self.extra_edges {
            for mut v in [e.i, e.j] {
                while !marked[v] {
                    marked[v] = true;
                    match self.base.parent(v) {
                        Some(p) => v = p,
                        None => break,
                    }
                }
            }
        }
        marked
    }

    /// Fill-aware elimination order: vertices that are not ancestors of an
    /// extra-edge endpoint first, in reverse-Prim order (these eliminate
    /// without fill), then the ancestors, also in reverse-Prim order.
    pub fn elimination_order(&self) -> Vec<usize> {
        let marked = self.endpoint_ancestors();
        let base = self.base.elimination_order();
        base.iter()
            .copied()
            .filter(|&v| !marked[v])
            .chain(base.iter().copied().filter(|&v| marked[v]))
            .collect()
    }
}

/// Adds back, for each pair of subtrees joined in `g` by a non-tree edge and
/// not already adjacent through a tree edge, the non-tree edge with the
/// largest `lambda_min` (ties: smallest `(i, j)`).
pub fn augment_mst(g: &MatrixWeightedGraph, tree: &RootedTree, assignment: &[usize]) -> AugmentedTree {
    let tree_pairs: HashSet<(usize, usize)> = tree.edge_pairs().into_iter().collect();
    let mut adjacent_parts = HashSet::new();
    for &(a, b) in &tree_pairs {
        let (pa, pb) = (assignment[a], assignment[b]);
        if pa != pb {
            adjacent_parts.insert((pa.min(pb), pa.max(pb)));
        }
    }

    let mut best: BTreeMap<(usize, usize), (f64, usize)> = BTreeMap::new();
    for (k, e) in g.edges().iter().enumerate() {
        if tree_pairs.contains(&(e.i, e.j)) {
            continue;
        }
        let (pa, pb) = (assignment[e.i], assignment[e.j]);
        if pa == pb {
            continue;
        }
        let pair = (pa.min(pb), pa.max(pb));
        if adjacent_parts.contains(&pair) {
            continue;
        }
        let key = e.weight.min_eigenvalue();
        let replace = match best.get(&pair) {
            None => true,
            Some(&(best_key, best_k)) => {
                let cur = &g.edges()[best_k];
                key > best_key || (key == best_key && (e.i, e.j) < (cur.i, cur.j))
            }
        };
        if replace {
            best.insert(pair, (key, k));
        }
    }

    AugmentedTree {
        base: tree.clone(),
        extra_edges: best.values().map(|&(_, k)| g.edges()[k].clone()).collect(),
        subtree_assignment: assignment.to_vec(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blockmat::SymBlock;
    use crate::graph::testutil::*;
    use crate::graph::{elimination_fill, prim_mst};

    fn path(n: usize) -> MatrixWeightedGraph {
        let edges = (1..n).map(|v| Edge::new(v - 1, v, SymBlock::identity(3))).collect();
        MatrixWeightedGraph::new(3, vec![SymBlock::identity(3); n], edges).unwrap()
    }

    /// Checks that every part induces a connected subtree.
    fn parts_connected(tree: &RootedTree, assignment: &[usize]) -> bool {
        // A part is connected in a rooted tree iff exactly one of its members
        // has its parent outside the part (or no parent).
        let parts = assignment.iter().max().map_or(0, |m| m + 1);
        let mut heads = vec![0; parts];
        for v in 0..tree.n() {
            match tree.parent(v) {
                Some(p) if assignment[p] == assignment[v] => {}
                _ => heads[assignment[v]] += 1,
            }
        }
        heads.iter().all(|&h| h == 1)
    }

    fn sizes(assignment: &[usize]) -> Vec<usize> {
        let parts = assignment.iter().max().map_or(0, |m| m + 1);
        let mut s = vec![0; parts];
        for &a in assignment {
            s[a] += 1;
        }
        s
    }

    #[test]
    fn single_part() {
        let t = prim_mst(&random_tree_graph(1, 15, 3)).unwrap();
        assert_eq!(partition_tree(&t, 1), vec![0; 15]);
    }

    #[test]
    fn path_in_three() {
        let t = prim_mst(&path(9)).unwrap();
        let a = partition_tree(&t, 3);
        assert!(parts_connected(&t, &a));
        assert_eq!(sizes(&a), vec![3, 3, 3]);
    }

    #[test]
    fn star_in_two() {
        let n = 8;
        let edges = (1..n).map(|v| Edge::new(0, v, SymBlock::identity(3))).collect();
        let g = MatrixWeightedGraph::new(3, vec![SymBlock::identity(3); n], edges).unwrap();
        let t = prim_mst(&g).unwrap();
        let a = partition_tree(&t, 2);
        assert!(parts_connected(&t, &a));
        let s = sizes(&a);
        assert_eq!(s.len(), 2);
        let cap = 2 * n.div_ceil(2);
        assert!(s.iter().all(|&k| k <= cap));
    }

    #[test]
    fn random_partitions_connected_and_bounded() {
        for seed in 0..30 {
            let n = 10 + seed as usize * 3;
            let g = random_connected_graph(seed, n, n, 3);
            let t = prim_mst(&g).unwrap();
            for parts in 1..=6 {
                let a = partition_tree(&t, parts);
                assert!(parts_connected(&t, &a));
                assert!(sizes(&a).len() <= parts);
            }
        }
    }

    #[test]
    fn binary_tree_respects_cap() {
        // Children-per-vertex <= 2 keeps every cut part below 2 * ceil(n / t).
        let n = 63;
        let edges = (1..n).map(|v| Edge::new((v - 1) / 2, v, SymBlock::identity(3))).collect();
        let g = MatrixWeightedGraph::new(3, vec![SymBlock::identity(3); n], edges).unwrap();
        let t = prim_mst(&g).unwrap();
        for parts in 1..=8 {
            let a = partition_tree(&t, parts);
            let cap = 2 * n.div_ceil(parts);
            assert!(sizes(&a).iter().all(|&k| k <= cap), "t={parts}: {:?}", sizes(&a));
            assert!(parts_connected(&t, &a));
        }
    }

    #[test]
    fn no_extra_edges_for_trees() {
        let g = random_tree_graph(3, 30, 3);
        let t = prim_mst(&g).unwrap();
        let aug = augment_mst(&g, &t, &partition_tree(&t, 3));
        assert!(aug.extra_edges.is_empty());
    }

    #[test]
    fn cycle_is_closed_between_end_subtrees() {
        let n = 6;
        let mut edges: Vec<Edge> = (1..n).map(|v| Edge::new(v - 1, v, SymBlock::identity(3) * 2.0)).collect();
        edges.push(Edge::new(0, n - 1, SymBlock::identity(3)));
        let g = MatrixWeightedGraph::new(3, vec![SymBlock::identity(3); n], edges).unwrap();
        let t = prim_mst(&g).unwrap();
        assert_eq!(t.edge_count(), 5);

        // Two halves of the path are already joined by the tree edge (2, 3).
        let halves = partition_tree(&t, 2);
        assert_eq!(sizes(&halves), vec![3, 3]);
        assert!(augment_mst(&g, &t, &halves).extra_edges.is_empty());

        // With three parts the end parts are not tree-adjacent.
        let thirds = partition_tree(&t, 3);
        assert_eq!(sizes(&thirds), vec![2, 2, 2]);
        let aug = augment_mst(&g, &t, &thirds);
        assert_eq!(aug.extra_edges.len(), 1);
        assert_eq!((aug.extra_edges[0].i, aug.extra_edges[0].j), (0, 5));
        assert_eq!(aug.to_graph().edge_count(), 6);
    }

    #[test]
    fn heaviest_parallel_edge_chosen() {
        // Parts {0,1,2} and {3,4,5} hang off hub 6 through strong tree edges
        // and are joined directly only by three weaker chords.
        let id = SymBlock::identity(3);
        let edges = vec![
            Edge::new(0, 1, &id * 10.0),
            Edge::new(1, 2, &id * 10.0),
            Edge::new(3, 4, &id * 10.0),
            Edge::new(4, 5, &id * 10.0),
            Edge::new(2, 6, &id * 10.0),
            Edge::new(3, 6, &id * 10.0),
            Edge::new(0, 3, &id * 1.0),
            Edge::new(1, 4, &id * 2.0),
            Edge::new(2, 5, &id * 3.0),
        ];
        let g = MatrixWeightedGraph::new(3, vec![id.clone(); 7], edges).unwrap();
        let t = prim_mst(&g).unwrap();
        assert!(!t.edge_pairs().iter().any(|&(a, b)| a < 3 && (3..6).contains(&b)));
        let aug = augment_mst(&g, &t, &[0, 0, 0, 1, 1, 1, 2]);
        assert_eq!(aug.extra_edges.len(), 1);
        assert_eq!((aug.extra_edges[0].i, aug.extra_edges[0].j), (2, 5));
    }

    #[test]
    fn fill_confined_to_endpoint_ancestors() {
        for seed in 0..10 {
            let g = random_connected_graph(seed, 40, 40, 3);
            let t = prim_mst(&g).unwrap();
            let aug = augment_mst(&g, &t, &partition_tree(&t, 3));
            let order = aug.elimination_order();
            let marked = aug.endpoint_ancestors();
            let fill = elimination_fill(&aug.to_graph().adjacency_lists(), &order).unwrap();
            for (a, b) in fill {
                assert!(marked[a] && marked[b]);
            }
        }
    }
}
