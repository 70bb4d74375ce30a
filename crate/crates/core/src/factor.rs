//! Block `L D L^T` factorization.
//!
//! [`ldlt_general`] is the left-looking block algorithm for any symmetric
//! positive definite block matrix under a given elimination order; it works
//! on sparse storage and only touches blocks that are structurally nonzero.
//! [`ldlt_tree`] is the linear-time special case for a rooted tree, where the
//! only off-diagonal entry of column `i` is the one in the parent's row.
//!
//! Both produce a [`BlockLDLT`] whose [`BlockLDLT::solve`] runs forward
//! substitution, the block-diagonal solve and backward substitution.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use nalgebra::DMatrix;

use crate::blockmat::{Block, BlockCholesky, SymBlock};
use crate::error::{Error, Result};
use crate::graph::{MatrixWeightedGraph, RootedTree, DENSE_LIMIT};

/// Relative size of `lambda_min(D_ii)` below which a pivot is rejected.
pub const PIVOT_TOL: f64 = 1e-14;

/// Symmetric block matrix with sparse row storage. Both triangles are kept.
#[derive(Debug, Clone)]
pub struct BlockMatrix {
    dim: usize,
    rows: Vec<BTreeMap<usize, Block>>,
}

impl BlockMatrix {
    pub fn zeros(n: usize, dim: usize) -> Self {
        BlockMatrix { dim, rows: vec![BTreeMap::new(); n] }
    }

    /// Block Laplacian of `g`.
    pub fn from_graph(g: &MatrixWeightedGraph) -> Self {
        let mut m = Self::zeros(g.n(), g.dim());
        for v in 0..g.n() {
            m.rows[v].insert(v, g.diagonal_block(v).into_block());
        }
        for e in g.edges() {
            let neg = -e.weight.as_block();
            m.rows[e.i].insert(e.j, neg.clone());
            m.rows[e.j].insert(e.i, neg);
        }
        m
    }

    /// Splits a dense symmetric matrix into `d x d` blocks, keeping the
    /// blocks that are not identically zero (diagonal blocks always).
    pub fn from_dense(a: &DMatrix<f64>, dim: usize) -> Result<Self> {
        if dim == 0 || a.nrows() != a.ncols() || a.nrows() % dim != 0 {
            return Err(Error::InvalidInput(format!(
                "a {}x{} matrix does not split into {dim}x{dim} blocks",
                a.nrows(),
                a.ncols()
            )));
        }
        let n = a.nrows() / dim;
        let mut m = Self::zeros(n, dim);
        for bi in 0..n {
            for bj in 0..n {
                let mut b = Block::zeros(dim);
                for r in 0..dim {
                    for c in 0..dim {
                        b.set(r, c, a[(bi * dim + r, bj * dim + c)]);
                    }
                }
                if bi == bj || !b.is_zero() {
                    m.rows[bi].insert(bj, b);
                }
            }
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> Option<&Block> {
        self.rows[i].get(&j)
    }

    /// Nonzero blocks of row `i` as `(column, block)`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, &Block)> {
        self.rows[i].iter().map(|(&j, b)| (j, b))
    }

    /// Sets block `(i, j)` and its transpose at `(j, i)`.
    pub fn set(&mut self, i: usize, j: usize, block: Block) {
        if i != j {
            self.rows[j].insert(i, block.transpose());
        }
        self.rows[i].insert(j, block);
    }

    /// Strictly lower entries `(p, q)`, `p > q`, of the matrix permuted so that
    /// vertex `order[p]` sits at position `p`.
    pub fn lower_pattern(&self, order: &[usize]) -> BTreeSet<(usize, usize)> {
        let pos = inverse_permutation(order);
        let mut pattern = BTreeSet::new();
        for (i, row) in self.rows.iter().enumerate() {
            for &j in row.keys() {
                if pos[i] > pos[j] {
                    pattern.insert((pos[i], pos[j]));
                }
            }
        }
        pattern
    }

    pub fn to_dense(&self) -> Result<DMatrix<f64>> {
        let d = self.dim;
        let size = self.n() * d;
        if size > DENSE_LIMIT {
            return Err(Error::CapacityExceeded { size, limit: DENSE_LIMIT });
        }
        let mut m = DMatrix::zeros(size, size);
        for (i, row) in self.rows.iter().enumerate() {
            for (&j, b) in row {
                for r in 0..d {
                    for c in 0..d {
                        m[(i * d + r, j * d + c)] = b.get(r, c);
                    }
                }
            }
        }
        Ok(m)
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        let d = self.dim;
        if x.len() != self.n() * d {
            return Err(Error::DimensionMismatch { expected: self.n() * d, got: x.len() });
        }
        let mut y = vec![0.0; x.len()];
        for (i, row) in self.rows.iter().enumerate() {
            for (&j, b) in row {
                b.mul_vec_add(1.0, &x[j * d..(j + 1) * d], &mut y[i * d..(i + 1) * d]);
            }
        }
        Ok(y)
    }
}

#[derive(Debug, Clone)]
struct LEntry {
    row: usize,
    col: usize,
    block: Block,
}

/// Block-operation counts of one [`BlockLDLT::solve`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveCounts {
    /// `d x d` matrix-vector products with off-diagonal blocks of `L`,
    /// forward and backward together.
    pub offdiagonal_products: usize,
    /// `d x d` solves with diagonal blocks of `D`.
    pub diagonal_solves: usize,
}

impl SolveCounts {
    pub fn total(&self) -> usize {
        self.offdiagonal_products + self.diagonal_solves
    }
}

/// `P A P^T = L D L^T` with `L` block unit lower triangular, stored sparsely
/// in position coordinates: position `p` holds vertex `order[p]`.
#[derive(Debug, Clone)]
pub struct BlockLDLT {
    dim: usize,
    order: Vec<usize>,
    position: Vec<usize>,
    entries: Vec<LEntry>,
    rows: Vec<Vec<usize>>,
    cols: Vec<Vec<usize>>,
    d: Vec<SymBlock>,
    d_chol: Vec<BlockCholesky>,
}

impl BlockLDLT {
    fn with_order(dim: usize, order: Vec<usize>) -> Self {
        let n = order.len();
        BlockLDLT {
            dim,
            position: inverse_permutation(&order),
            order,
            entries: Vec::new(),
            rows: vec![Vec::new(); n],
            cols: vec![Vec::new(); n],
            d: Vec::with_capacity(n),
            d_chol: Vec::with_capacity(n),
        }
    }

    fn push_l(&mut self, row: usize, col: usize, block: Block) {
        let k = self.entries.len();
        self.entries.push(LEntry { row, col, block });
        self.rows[row].push(k);
        self.cols[col].push(k);
    }

    fn push_pivot(&mut self, pivot: SymBlock) -> Result<Block> {
        let vertex = self.order[self.d.len()];
        let scale = pivot.frobenius_norm();
        if !pivot.is_finite() || !(pivot.min_eigenvalue() > PIVOT_TOL * scale) {
            return Err(Error::NotPositiveDefinite { vertex });
        }
        let chol = pivot
            .cholesky()
            .map_err(|_| Error::NotPositiveDefinite { vertex })?;
        let inv = chol.inverse();
        self.d.push(pivot);
        self.d_chol.push(chol);
        Ok(inv)
    }

    pub fn n(&self) -> usize {
        self.order.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Diagonal blocks of `D` in position order.
    pub fn d_blocks(&self) -> &[SymBlock] {
        &self.d
    }

    /// Number of stored strictly-lower blocks of `L`.
    pub fn l_nnz(&self) -> usize {
        self.entries.len()
    }

    /// Block `L_pq` in position coordinates, `p > q`.
    pub fn l_block(&self, p: usize, q: usize) -> Option<&Block> {
        self.rows[p]
            .iter()
            .map(|&k| &self.entries[k])
            .find(|e| e.col == q)
            .map(|e| &e.block)
    }

    /// Strictly lower pattern of `L` in position coordinates.
    pub fn pattern(&self) -> BTreeSet<(usize, usize)> {
        self.entries.iter().map(|e| (e.row, e.col)).collect()
    }

    /// Dense `L D L^T` mapped back to vertex coordinates.
    pub fn reconstruct_dense(&self) -> Result<DMatrix<f64>> {
        let d = self.dim;
        let n = self.n();
        let size = n * d;
        if size > DENSE_LIMIT {
            return Err(Error::CapacityExceeded { size, limit: DENSE_LIMIT });
        }
        // Columns of L (unit diagonal included) as (row position, block).
        let mut col_lists: Vec<Vec<(usize, Block)>> =
            (0..n).map(|q| vec![(q, Block::identity(d))]).collect();
        for e in &self.entries {
            col_lists[e.col].push((e.row, e.block.clone()));
        }
        let mut m = DMatrix::zeros(size, size);
        for (q, list) in col_lists.iter().enumerate() {
            let dq = self.d[q].as_block();
            for (a, la) in list {
                let left = la * dq;
                for (b, lb) in list {
                    let prod = left.mul_transpose(lb);
                    let (va, vb) = (self.order[*a], self.order[*b]);
                    for r in 0..d {
                        for c in 0..d {
                            m[(va * d + r, vb * d + c)] += prod.get(r, c);
                        }
                    }
                }
            }
        }
        Ok(m)
    }

    /// Solves `A x = b` and reports the block operations used.
    pub fn solve_counted(&self, b: &[f64]) -> Result<(Vec<f64>, SolveCounts)> {
        let d = self.dim;
        let n = self.n();
        if b.len() != n * d {
            return Err(Error::DimensionMismatch { expected: n * d, got: b.len() });
        }
        let mut counts = SolveCounts::default();
        let mut z = vec![0.0; n * d];
        for (p, &v) in self.order.iter().enumerate() {
            z[p * d..(p + 1) * d].copy_from_slice(&b[v * d..(v + 1) * d]);
        }

        // Forward: z_p -= L_pq z_q for q < p.
        for p in 0..n {
            for &k in &self.rows[p] {
                let e = &self.entries[k];
                let (head, tail) = z.split_at_mut(p * d);
                e.block.mul_vec_add(-1.0, &head[e.col * d..(e.col + 1) * d], &mut tail[..d]);
                counts.offdiagonal_products += 1;
            }
        }
        // Diagonal: y_p = D_p^{-1} z_p.
        for p in 0..n {
            self.d_chol[p].solve_in_place(&mut z[p * d..(p + 1) * d]);
            counts.diagonal_solves += 1;
        }
        // Backward: x_q -= L_pq^T x_p for p > q.
        for q in (0..n).rev() {
            for &k in &self.cols[q] {
                let e = &self.entries[k];
                let (head, tail) = z.split_at_mut(e.row * d);
                e.block
                    .transpose_mul_vec_add(-1.0, &tail[..d], &mut head[q * d..(q + 1) * d]);
                counts.offdiagonal_products += 1;
            }
        }

        let mut x = vec![0.0; n * d];
        for (p, &v) in self.order.iter().enumerate() {
            x[v * d..(v + 1) * d].copy_from_slice(&z[p * d..(p + 1) * d]);
        }
        Ok((x, counts))
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.solve_counted(b).map(|(x, _)| x)
    }
}

/// Three-phase solve with a factorization from [`ldlt_tree`] (or any other
/// [`BlockLDLT`]).
pub fn tree_solve(f: &BlockLDLT, b: &[f64]) -> Result<Vec<f64>> {
    f.solve(b)
}

fn inverse_permutation(order: &[usize]) -> Vec<usize> {
    let mut pos = vec![usize::MAX; order.len()];
    for (p, &v) in order.iter().enumerate() {
        pos[v] = p;
    }
    pos
}

fn check_permutation(order: &[usize], n: usize) -> Result<()> {
    if order.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: order.len() });
    }
    let mut seen = vec![false; n];
    for &v in order {
        if v >= n || std::mem::replace(&mut seen[v], true) {
            return Err(Error::InvalidInput("elimination order is not a permutation".into()));
        }
    }
    Ok(())
}

/// Left-looking block `L D L^T` of `a` eliminated in `order`.
///
/// For position `i`: `D_ii = A_ii - sum_{k<i} L_ik D_kk L_ik^T`, then for each
/// `j > i`: `L_ji = (A_ji - sum_{k<i} L_jk D_kk L_ik^T) D_ii^{-1}`. Sums run
/// only over stored blocks, so the cost tracks the fill rather than `n^3`.
pub fn ldlt_general(a: &BlockMatrix, order: &[usize]) -> Result<BlockLDLT> {
    let n = a.n();
    let d = a.dim();
    check_permutation(order, n)?;
    let mut f = BlockLDLT::with_order(d, order.to_vec());
    let mut acc: Vec<Option<Block>> = vec![None; n];
    let mut touched: Vec<usize> = Vec::new();

    for i in 0..n {
        let v = order[i];
        let a_ii = a.get(v, v).cloned().unwrap_or_else(|| Block::zeros(d));
        let mut pivot = SymBlock::symmetrize(&a_ii);
        // D_kk L_ik^T for every stored L_ik.
        let mut dl: Vec<(usize, Block)> = Vec::with_capacity(f.rows[i].len());
        for &k in &f.rows[i] {
            let e = &f.entries[k];
            pivot -= &SymBlock::congruence(&e.block, &f.d[e.col]);
            dl.push((e.col, f.d[e.col].as_block().mul_transpose(&e.block)));
        }
        let inv = f.push_pivot(pivot)?;

        for (k, m) in &dl {
            for &idx in &f.cols[*k] {
                let e = &f.entries[idx];
                if e.row > i {
                    let slot = acc[e.row].get_or_insert_with(|| {
                        touched.push(e.row);
                        Block::zeros(d)
                    });
                    slot.add_product(1.0, &e.block, m);
                }
            }
        }
        for (u, _) in a.row(v) {
            let j = f.position[u];
            if j > i && acc[j].is_none() {
                acc[j] = Some(Block::zeros(d));
                touched.push(j);
            }
        }
        touched.sort_unstable();
        for &j in &touched {
            let y = acc[j].take().unwrap_or_else(|| Block::zeros(d));
            let a_ji = a.get(order[j], v).cloned().unwrap_or_else(|| Block::zeros(d));
            let l = &(&a_ji - &y) * &inv;
            f.push_l(j, i, l);
        }
        touched.clear();
    }
    Ok(f)
}

/// Linear-time `L D L^T` of the block Laplacian of a rooted tree (or forest),
/// eliminated children-first in the tree's elimination order.
///
/// Each vertex accumulates `D_ii = A_ii - sum_children L_ic D_cc L_ic^T` and
/// writes the single entry `L_pi = A_pi D_ii^{-1}` in its parent's row.
pub fn ldlt_tree(tree: &RootedTree) -> Result<BlockLDLT> {
    let n = tree.n();
    let d = tree.dim();
    let order = tree.elimination_order().to_vec();
    let mut f = BlockLDLT::with_order(d, order);
    let mut diag: Vec<SymBlock> = tree.self_loops().to_vec();
    for v in 0..n {
        if let Some(w) = tree.parent_weight(v) {
            diag[v] += w;
            diag[tree.parent(v).unwrap_or(v)] += w;
        }
    }
    // Entry index of L_{parent(c), c}, filled when c is eliminated.
    let mut parent_entry = vec![usize::MAX; n];

    for i in 0..n {
        let v = f.order[i];
        let mut pivot = diag[v].clone();
        for &c in tree.children(v) {
            let e = &f.entries[parent_entry[c]];
            pivot -= &SymBlock::congruence(&e.block, &f.d[e.col]);
        }
        let inv = f.push_pivot(pivot)?;
        if let (Some(p), Some(w)) = (tree.parent(v), tree.parent_weight(v)) {
            let l = &(-w.as_block()) * &inv;
            parent_entry[v] = f.entries.len();
            let row = f.position[p];
            if row <= i {
                return Err(Error::InvalidInput(
                    "tree elimination order places a parent before its child".into(),
                ));
            }
            f.push_l(row, i, l);
        }
    }
    Ok(f)
}

/// Reverse Cuthill-McKee order of `g`: breadth-first from a minimum-degree
/// vertex of each component, neighbors by increasing degree, then reversed.
/// Keeps the fill of [`ldlt_general`] within a narrow band on spatial graphs.
pub fn bandwidth_order(g: &MatrixWeightedGraph) -> Vec<usize> {
    let n = g.n();
    let adj = g.adjacency_lists();
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&v| (adj[v].len(), v));
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::new();
    for &s in &by_degree {
        if visited[s] {
            continue;
        }
        visited[s] = true;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&u| !visited[u]).collect();
            next.sort_by_key(|&u| (adj[u].len(), u));
            for u in next {
                visited[u] = true;
                queue.push_back(u);
            }
        }
    }
    order.reverse();
    order
}

/// Direct solve of `L_G x = b` by [`ldlt_general`] under [`bandwidth_order`].
/// Used as the reference solution for convergence studies.
pub fn direct_solve(g: &MatrixWeightedGraph, b: &[f64]) -> Result<Vec<f64>> {
    let f = ldlt_general(&BlockMatrix::from_graph(g), &bandwidth_order(g))?;
    f.solve(b)
}
