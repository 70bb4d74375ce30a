//! Dense kernels for the small `d x d` blocks that make up a block Laplacian.
//!
//! Two types live here: [`Block`], a general square block (the off-diagonal
//! factors of an `LDL^T` decomposition are not symmetric), and [`SymBlock`],
//! whose constructors guarantee exact symmetry. Storage is row-major and
//! inline for `d <= 3`.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::jacobi;

/// Block order used throughout the friction model.
pub const DEFAULT_DIM: usize = 3;

/// Relative pivot size below which a small Cholesky factorization is treated
/// as singular.
const CHOLESKY_PIVOT_TOL: f64 = 1e-14;

type Storage = SmallVec<[f64; 9]>;

/// A general square `d x d` block, row-major.
#[derive(Clone, PartialEq)]
pub struct Block {
    dim: usize,
    data: Storage,
}

impl Block {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "block dimension must be positive");
        Block {
            dim,
            data: SmallVec::from_elem(0.0, dim * dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut b = Block::zeros(dim);
        for i in 0..dim {
            b.data[i * dim + i] = 1.0;
        }
        b
    }

    pub fn from_row_major(dim: usize, data: &[f64]) -> Result<Self> {
        if dim == 0 || data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: data.len(),
            });
        }
        Ok(Block {
            dim,
            data: SmallVec::from_slice(data),
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.dim + j] = value;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Block {
        let d = self.dim;
        let mut out = Block::zeros(d);
        for i in 0..d {
            for j in 0..d {
                out.data[j * d + i] = self.data[i * d + j];
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0.0)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// `y += alpha * self * x`.
    #[inline]
    pub fn mul_vec_add(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        let d = self.dim;
        for (i, yi) in y.iter_mut().enumerate().take(d) {
            let row = &self.data[i * d..(i + 1) * d];
            let dot: f64 = row.iter().zip(x).map(|(a, b)| a * b).sum();
            *yi += alpha * dot;
        }
    }

    /// `y += alpha * self^T * x`.
    #[inline]
    pub fn transpose_mul_vec_add(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        let d = self.dim;
        for (i, &xi) in x.iter().enumerate().take(d) {
            let row = &self.data[i * d..(i + 1) * d];
            for (yj, a) in y.iter_mut().zip(row) {
                *yj += alpha * a * xi;
            }
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim];
        self.mul_vec_add(1.0, x, &mut y);
        y
    }

    /// `self * other^T`.
    pub fn mul_transpose(&self, other: &Block) -> Block {
        let d = self.dim;
        let mut out = Block::zeros(d);
        for i in 0..d {
            for j in 0..d {
                let mut acc = 0.0;
                for k in 0..d {
                    acc += self.data[i * d + k] * other.data[j * d + k];
                }
                out.data[i * d + j] = acc;
            }
        }
        out
    }

    /// `self += alpha * a * b`.
    pub fn add_product(&mut self, alpha: f64, a: &Block, b: &Block) {
        let d = self.dim;
        for i in 0..d {
            for k in 0..d {
                let aik = alpha * a.data[i * d + k];
                if aik == 0.0 {
                    continue;
                }
                for j in 0..d {
                    self.data[i * d + j] += aik * b.data[k * d + j];
                }
            }
        }
    }

    fn zip_with(&self, other: &Block, f: impl Fn(f64, f64) -> f64) -> Block {
        assert_eq!(self.dim, other.dim, "block dimension mismatch");
        Block {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }
}

impl fmt::Debug for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[f64]> = self.data.chunks(self.dim).collect();
        f.debug_tuple("Block").field(&rows).finish()
    }
}

impl Mul for &Block {
    type Output = Block;
    fn mul(self, rhs: &Block) -> Block {
        let mut out = Block::zeros(self.dim);
        out.add_product(1.0, self, rhs);
        out
    }
}

impl Add for &Block {
    type Output = Block;
    fn add(self, rhs: &Block) -> Block {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &Block {
    type Output = Block;
    fn sub(self, rhs: &Block) -> Block {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Neg for &Block {
    type Output = Block;
    fn neg(self) -> Block {
        Block {
            dim: self.dim,
            data: self.data.iter().map(|x| -x).collect(),
        }
    }
}

impl Mul<f64> for &Block {
    type Output = Block;
    fn mul(self, rhs: f64) -> Block {
        Block {
            dim: self.dim,
            data: self.data.iter().map(|x| x * rhs).collect(),
        }
    }
}

/// A symmetric `d x d` block. Every constructor produces exactly symmetric
/// storage.
#[derive(Clone, PartialEq)]
pub struct SymBlock(Block);

impl SymBlock {
    pub fn zeros(dim: usize) -> Self {
        SymBlock(Block::zeros(dim))
    }

    pub fn identity(dim: usize) -> Self {
        SymBlock(Block::identity(dim))
    }

    pub fn scaled_identity(dim: usize, scale: f64) -> Self {
        SymBlock(&Block::identity(dim) * scale)
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut b = Block::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            b.set(i, i, v);
        }
        SymBlock(b)
    }

    /// Builds a block from row-major entries, rejecting input that is not
    /// exactly symmetric.
    pub fn from_row_major(dim: usize, data: &[f64]) -> Result<Self> {
        let b = Block::from_row_major(dim, data)?;
        for i in 0..dim {
            for j in i + 1..dim {
                if b.get(i, j) != b.get(j, i) {
                    return Err(Error::InvalidInput(format!(
                        "block is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(SymBlock(b))
    }

    /// Symmetric part `(B + B^T) / 2` of a general block.
    pub fn symmetrize(b: &Block) -> Self {
        let d = b.dim();
        let mut out = b.clone();
        for i in 0..d {
            for j in i + 1..d {
                let avg = 0.5 * (b.get(i, j) + b.get(j, i));
                out.set(i, j, avg);
                out.set(j, i, avg);
            }
        }
        SymBlock(out)
    }

    /// `u u^T` for a vector `u`.
    pub fn outer(u: &[f64]) -> Self {
        let d = u.len();
        let mut b = Block::zeros(d);
        for i in 0..d {
            for j in 0..d {
                b.set(i, j, u[i] * u[j]);
            }
        }
        SymBlock(b)
    }

    /// Anisotropic friction block `par * u u^T + perp * (I - u u^T)` for a unit
    /// vector `u`.
    pub fn friction(u: &[f64], parallel: f64, perpendicular: f64) -> Self {
        let d = u.len();
        let mut b = Block::zeros(d);
        for i in 0..d {
            for j in 0..d {
                let proj = u[i] * u[j];
                let id = if i == j { 1.0 } else { 0.0 };
                b.set(i, j, parallel * proj + perpendicular * (id - proj));
            }
        }
        SymBlock(b)
    }

    /// `L D L^T` congruence of a symmetric block by a general one.
    pub fn congruence(l: &Block, d: &SymBlock) -> Self {
        let ld = l * d.as_block();
        SymBlock::symmetrize(&ld.mul_transpose(l))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0.get(i, j)
    }

    pub fn as_block(&self) -> &Block {
        &self.0
    }

    pub fn into_block(self) -> Block {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.as_slice().iter().all(|x| x.is_finite())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.frobenius_norm()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.get(i, i)).sum()
    }

    #[inline]
    pub fn mul_vec_add(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        self.0.mul_vec_add(alpha, x, y)
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.0.mul_vec(x)
    }

    pub fn eigen(&self) -> Result<SmallEigen> {
        sym_eigen(self)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigen_values_unchecked()[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigen_values_unchecked().last().unwrap()
    }

    /// Spectral condition number `lambda_max / lambda_min`; infinite for
    /// singular or indefinite blocks.
    pub fn condition_number(&self) -> f64 {
        let values = self.eigen_values_unchecked();
        let (lo, hi) = (values[0], values[values.len() - 1]);
        if lo <= 0.0 {
            f64::INFINITY
        } else {
            hi / lo
        }
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        is_psd(self, tol)
    }

    pub fn cholesky(&self) -> Result<BlockCholesky> {
        BlockCholesky::new(self)
    }

    fn eigen_values_unchecked(&self) -> Vec<f64> {
        let d = self.dim();
        let mut a: Vec<f64> = self.0.as_slice().to_vec();
        jacobi::eigen_symmetric(d, &mut a).0
    }
}

impl fmt::Debug for SymBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[f64]> = self.0.as_slice().chunks(self.dim()).collect();
        f.debug_tuple("SymBlock").field(&rows).finish()
    }
}

impl Add for &SymBlock {
    type Output = SymBlock;
    fn add(self, rhs: &SymBlock) -> SymBlock {
        SymBlock(&self.0 + &rhs.0)
    }
}

impl Sub for &SymBlock {
    type Output = SymBlock;
    fn sub(self, rhs: &SymBlock) -> SymBlock {
        SymBlock(&self.0 - &rhs.0)
    }
}

impl Neg for &SymBlock {
    type Output = SymBlock;
    fn neg(self) -> SymBlock {
        SymBlock(-&self.0)
    }
}

impl Mul<f64> for &SymBlock {
    type Output = SymBlock;
    fn mul(self, rhs: f64) -> SymBlock {
        SymBlock(&self.0 * rhs)
    }
}

impl Mul<f64> for SymBlock {
    type Output = SymBlock;
    fn mul(self, rhs: f64) -> SymBlock {
        &self * rhs
    }
}

impl AddAssign<&SymBlock> for SymBlock {
    fn add_assign(&mut self, rhs: &SymBlock) {
        *self = &*self + rhs;
    }
}

impl SubAssign<&SymBlock> for SymBlock {
    fn sub_assign(&mut self, rhs: &SymBlock) {
        *self = &*self - rhs;
    }
}

/// Eigen-decomposition of a [`SymBlock`]: ascending eigenvalues and the
/// matching orthonormal eigenvectors stored as the columns of `vectors`.
#[derive(Debug, Clone)]
pub struct SmallEigen {
    pub values: Vec<f64>,
    pub vectors: Block,
}

impl SmallEigen {
    pub fn vector(&self, k: usize) -> Vec<f64> {
        (0..self.vectors.dim()).map(|i| self.vectors.get(i, k)).collect()
    }

    /// `Q diag(values) Q^T`.
    pub fn reconstruct(&self) -> SymBlock {
        let d = self.vectors.dim();
        let mut out = Block::zeros(d);
        for i in 0..d {
            for j in 0..d {
                let mut acc = 0.0;
                for k in 0..d {
                    acc += self.vectors.get(i, k) * self.values[k] * self.vectors.get(j, k);
                }
                out.set(i, j, acc);
            }
        }
        SymBlock::symmetrize(&out)
    }
}

/// Eigen-decomposition by cyclic Jacobi rotations.
pub fn sym_eigen(s: &SymBlock) -> Result<SmallEigen> {
    if !s.is_finite() {
        return Err(Error::InvalidInput("block has non-finite entries".into()));
    }
    let d = s.dim();
    let mut a = s.as_block().as_slice().to_vec();
    let (values, vectors) = jacobi::eigen_symmetric(d, &mut a);
    Ok(SmallEigen {
        values,
        vectors: Block::from_row_major(d, &vectors)?,
    })
}

/// `lambda_min(S) >= -tol * max(1, ||S||_F)`.
pub fn is_psd(s: &SymBlock, tol: f64) -> bool {
    if !s.is_finite() {
        return false;
    }
    s.min_eigenvalue() >= -tol * s.frobenius_norm().max(1.0)
}

/// Solves `S x = b` for a symmetric positive definite block.
pub fn solve_block(s: &SymBlock, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != s.dim() {
        return Err(Error::DimensionMismatch {
            expected: s.dim(),
            got: b.len(),
        });
    }
    Ok(s.cholesky()?.solve(b))
}

/// Cholesky factor `S = C C^T` of a symmetric positive definite block.
#[derive(Clone, Debug)]
pub struct BlockCholesky {
    dim: usize,
    lower: Storage,
}

impl BlockCholesky {
    pub fn new(s: &SymBlock) -> Result<Self> {
        let d = s.dim();
        let scale = s.frobenius_norm();
        if !s.is_finite() || scale == 0.0 {
            return Err(Error::SingularBlock);
        }
        let mut l: Storage = SmallVec::from_elem(0.0, d * d);
        for j in 0..d {
            let mut pivot = s.get(j, j);
            for k in 0..j {
                pivot -= l[j * d + k] * l[j * d + k];
            }
            if !(pivot > CHOLESKY_PIVOT_TOL * scale) {
                return Err(Error::SingularBlock);
            }
            let root = pivot.sqrt();
            l[j * d + j] = root;
            for i in j + 1..d {
                let mut acc = s.get(i, j);
                for k in 0..j {
                    acc -= l[i * d + k] * l[j * d + k];
                }
                l[i * d + j] = acc / root;
            }
        }
        Ok(BlockCholesky { dim: d, lower: l })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Overwrites `x` (holding `b`) with `S^{-1} b`.
    #[inline]
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let d = self.dim;
        let l = &self.lower;
        for i in 0..d {
            let mut acc = x[i];
            for k in 0..i {
                acc -= l[i * d + k] * x[k];
            }
            x[i] = acc / l[i * d + i];
        }
        for i in (0..d).rev() {
            let mut acc = x[i];
            for k in i + 1..d {
                acc -= l[k * d + i] * x[k];
            }
            x[i] = acc / l[i * d + i];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    /// Dense inverse `S^{-1}` as a general block.
    pub fn inverse(&self) -> Block {
        let d = self.dim;
        let mut out = Block::zeros(d);
        for j in 0..d {
            let mut e = vec![0.0; d];
            e[j] = 1.0;
            self.solve_in_place(&mut e);
            for i in 0..d {
                out.set(i, j, e[i]);
            }
        }
        out
    }

    /// Applies `C^{-T}` in place, so that `E = blockdiag(C^{-T})` satisfies
    /// `E E^T = S^{-1}`.
    pub fn solve_upper_in_place(&self, x: &mut [f64]) {
        let d = self.dim;
        let l = &self.lower;
        for i in (0..d).rev() {
            let mut acc = x[i];
            for k in i + 1..d {
                acc -= l[k * d + i] * x[k];
            }
            x[i] = acc / l[i * d + i];
        }
    }

    /// Applies `C^{-1}` in place.
    pub fn solve_lower_in_place(&self, x: &mut [f64]) {
        let d = self.dim;
        let l = &self.lower;
        for i in 0..d {
            let mut acc = x[i];
            for k in 0..i {
                acc -= l[i * d + k] * x[k];
            }
            x[i] = acc / l[i * d + i];
        }
    }
}
