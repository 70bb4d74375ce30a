//! Dense spectral checks for small systems: generalized eigenvalues,
//! support numbers, congestion-dilation matrices and the eigenvalue bounds
//! of the tree preconditioners.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::blockmat::SymBlock;
use crate::error::{Error, Result};
use crate::graph::MatrixWeightedGraph;
use crate::jacobi::eigen_symmetric;
use crate::precond::{Preconditioner, Strategy};

/// Largest matrix size accepted by [`generalized_extremal_eigs`].
pub const GENERALIZED_LIMIT: usize = 2048;

/// Relative tolerance for null-space comparisons in [`support`].
pub const NULL_SPACE_TOL: f64 = 1e-10;

/// Tolerance of the `lambda_min >= 1` check in [`SpectralReport`].
pub const LAMBDA_MIN_TOL: f64 = 1e-8;

fn symmetric_part(a: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = 0.5 * (a[(i, j)] + a[(j, i)]);
        }
    }
    out
}

/// Ascending eigenvalues and column eigenvectors of the symmetric part of `a`.
pub fn dense_eigen(a: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    if a.nrows() != a.ncols() {
        return Err(Error::InvalidInput("matrix is not square".into()));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let n = a.nrows();
    let mut work = symmetric_part(a);
    let (values, vectors) = eigen_symmetric(n, &mut work);
    Ok((values, DMatrix::from_row_slice(n, n, &vectors)))
}

pub fn dense_eigenvalues(a: &DMatrix<f64>) -> Result<Vec<f64>> {
    dense_eigen(a).map(|(v, _)| v)
}

/// `lambda_min(A) >= -tol * max(1, ||A||_F)`.
pub fn dense_is_psd(a: &DMatrix<f64>, tol: f64) -> bool {
    match dense_eigenvalues(a) {
        Ok(v) => v.first().is_none_or(|&lo| lo >= -tol * a.norm().max(1.0)),
        Err(_) => false,
    }
}

/// Extremal `lambda` of `A x = lambda B x` for symmetric `A` and SPD `B`,
/// from the eigenvalues of `R^{-1} A R^{-T}` where `B = R R^T`.
pub fn generalized_extremal_eigs(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<(f64, f64)> {
    let n = a.nrows();
    if a.shape() != b.shape() || a.nrows() != a.ncols() {
        return Err(Error::InvalidInput("matrix shapes differ".into()));
    }
    if n == 0 {
        return Err(Error::InvalidInput("empty matrices".into()));
    }
    if n > GENERALIZED_LIMIT {
        return Err(Error::CapacityExceeded { size: n, limit: GENERALIZED_LIMIT });
    }
    let b_sym = DMatrix::from_row_slice(n, n, &symmetric_part(b));
    let r = b_sym.cholesky().ok_or(Error::NotPositiveDefiniteMatrix)?.unpack();
    let a_sym = DMatrix::from_row_slice(n, n, &symmetric_part(a));
    let left = r
        .solve_lower_triangular(&a_sym)
        .ok_or(Error::NotPositiveDefiniteMatrix)?;
    let c = r
        .solve_lower_triangular(&left.transpose())
        .ok_or(Error::NotPositiveDefiniteMatrix)?;
    let values = dense_eigenvalues(&c)?;
    Ok((values[0], values[n - 1]))
}

/// Support `sigma(A, B)`: the least `tau` with `tau B - A` PSD, or infinity
/// when some null vector of `B` is not a null vector of `A`.
pub fn support(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    if a.shape() != b.shape() || a.nrows() != a.ncols() {
        return Err(Error::InvalidInput("matrix shapes differ".into()));
    }
    let n = a.nrows();
    let (bv, bq) = dense_eigen(b)?;
    let a_scale = dense_eigenvalues(a)?.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let b_scale = bv.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if a_scale == 0.0 {
        return Ok(0.0);
    }
    if b_scale == 0.0 {
        return Ok(f64::INFINITY);
    }
    let range: Vec<usize> = (0..n).filter(|&k| bv[k] > NULL_SPACE_TOL * b_scale).collect();
    let a_sym = DMatrix::from_row_slice(n, n, &symmetric_part(a));
    for k in (0..n).filter(|k| !range.contains(k)) {
        let image = &a_sym * bq.column(k);
        if image.norm() > NULL_SPACE_TOL * a_scale {
            return Ok(f64::INFINITY);
        }
    }
    // On the range of B: D^{-1/2} Q^T A Q D^{-1/2}.
    let r = range.len();
    let mut scaled = DMatrix::zeros(n, r);
    for (c, &k) in range.iter().enumerate() {
        scaled.set_column(c, &(bq.column(k) / bv[k].sqrt()));
    }
    let reduced = scaled.transpose() * a_sym * &scaled;
    let top = dense_eigenvalues(&reduced)?.last().copied().unwrap_or(0.0);
    Ok(top.max(0.0))
}

/// `lambda_max(A B^{-1})` for a pair of small SPD blocks.
pub fn block_generalized_max(a: &SymBlock, b: &SymBlock) -> Result<f64> {
    let (da, db) = (sym_to_dense(a), sym_to_dense(b));
    generalized_extremal_eigs(&da, &db).map(|(_, hi)| hi)
}

fn sym_to_dense(s: &SymBlock) -> DMatrix<f64> {
    DMatrix::from_row_slice(s.dim(), s.dim(), s.as_block().as_slice())
}

fn add_block(m: &mut DMatrix<f64>, bi: usize, bj: usize, s: &SymBlock, sign: f64) {
    let d = s.dim();
    for r in 0..d {
        for c in 0..d {
            m[(bi * d + r, bj * d + c)] += sign * s.get(r, c);
        }
    }
}

/// The two `(k + 1) d` square matrices of the congestion-dilation argument:
/// `A_hat` places the edge `A` between the path's endpoints, `B_hat` is the
/// block Laplacian of the path whose `i`-th edge has weight `B_i`.
pub fn congestion_dilation_matrices(
    edge: &SymBlock,
    path: &[SymBlock],
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let k = path.len();
    let d = edge.dim();
    if k == 0 {
        return Err(Error::InvalidInput("path must have at least one edge".into()));
    }
    if let Some(b) = path.iter().find(|b| b.dim() != d) {
        return Err(Error::DimensionMismatch { expected: d, got: b.dim() });
    }
    let size = (k + 1) * d;
    let mut a_hat = DMatrix::zeros(size, size);
    add_block(&mut a_hat, 0, 0, edge, 1.0);
    add_block(&mut a_hat, k, k, edge, 1.0);
    add_block(&mut a_hat, 0, k, edge, -1.0);
    add_block(&mut a_hat, k, 0, edge, -1.0);
    let mut b_hat = DMatrix::zeros(size, size);
    for (i, b) in path.iter().enumerate() {
        add_block(&mut b_hat, i, i, b, 1.0);
        add_block(&mut b_hat, i + 1, i + 1, b, 1.0);
        add_block(&mut b_hat, i, i + 1, b, -1.0);
        add_block(&mut b_hat, i + 1, i, b, -1.0);
    }
    Ok((a_hat, b_hat))
}

/// Congestion times dilation: `k * max_i lambda_max(A B_i^{-1})`.
pub fn congestion_dilation_factor(edge: &SymBlock, path: &[SymBlock]) -> Result<f64> {
    let mut worst = 0.0f64;
    for b in path {
        worst = worst.max(block_generalized_max(edge, b)?);
    }
    Ok(path.len() as f64 * worst)
}

/// Whether `factor * B_hat - A_hat` is PSD (relative tolerance `1e-10`).
pub fn congestion_dilation_check_with(edge: &SymBlock, path: &[SymBlock], factor: f64) -> Result<bool> {
    let (a_hat, b_hat) = congestion_dilation_matrices(edge, path)?;
    Ok(dense_is_psd(&(b_hat * factor - a_hat), 1e-10))
}

/// The congestion-dilation inequality at its own factor.
pub fn congestion_dilation_check(edge: &SymBlock, path: &[SymBlock]) -> Result<bool> {
    let factor = congestion_dilation_factor(edge, path)?;
    congestion_dilation_check_with(edge, path, factor)
}

/// Maximum condition number over the edge weights (1 for an edgeless graph).
pub fn kappa_edges(g: &MatrixWeightedGraph) -> f64 {
    g.edges()
        .iter()
        .map(|e| e.weight.condition_number())
        .fold(1.0, f64::max)
}

/// Generalized spectrum of `(Gamma, P)` and the applicable bounds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralReport {
    pub strategy: Strategy,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub kappa_precond: f64,
    /// Maximum condition number of the edge weights.
    pub kappa_edges: f64,
    /// The `kappa` used in the bounds.
    pub kappa: f64,
    pub n: usize,
    pub m: usize,
    /// Maximum vertex degree.
    pub max_degree: usize,
    /// Subtree count for the augmented strategy.
    pub t: Option<usize>,
    /// `kappa m (n - 1)`.
    pub bound_mst: f64,
    /// `2 kappa max_degree^3 n^2 / t^2`.
    pub bound_aug: Option<f64>,
    pub bound_applicable: bool,
    /// `lambda_min >= 1 - 1e-8` and `lambda_max` under the strategy's bound;
    /// `None` where no bound applies.
    pub bound_holds: Option<bool>,
}

impl SpectralReport {
    /// The bound matching the strategy, if any.
    pub fn bound(&self) -> Option<f64> {
        match self.strategy {
            Strategy::Mst => Some(self.bound_mst),
            Strategy::AugmentedMst(_) => self.bound_aug,
            _ => None,
        }
    }
}

/// Builds the strategy's preconditioner for `g` and reports the
/// generalized spectrum of `(Gamma, P)` against the tree bounds, with
/// `kappa = max_e cond(w(e))`.
pub fn verify_bounds(g: &MatrixWeightedGraph, strategy: Strategy) -> Result<SpectralReport> {
    verify_bounds_with_kappa(g, strategy, kappa_edges(g))
}

/// As [`verify_bounds`] with an explicit `kappa` for the bounds.
pub fn verify_bounds_with_kappa(
    g: &MatrixWeightedGraph,
    strategy: Strategy,
    kappa: f64,
) -> Result<SpectralReport> {
    let p = Preconditioner::build(strategy, g)?;
    spectral_report(g, &p, kappa)
}

/// Report for an already built preconditioner.
pub fn spectral_report(g: &MatrixWeightedGraph, p: &Preconditioner, kappa: f64) -> Result<SpectralReport> {
    let a = g.assemble_dense()?;
    let b = p.graph().assemble_dense()?;
    let (lambda_min, lambda_max) = generalized_extremal_eigs(&a, &b)?;
    let strategy = p.strategy();
    let (n, m, max_degree) = (g.n(), g.edge_count(), g.max_degree());
    let bound_mst = kappa * m as f64 * n.saturating_sub(1) as f64;
    let t = p.subtree_count();
    let bound_aug = t.map(|t| {
        let delta = max_degree as f64;
        2.0 * kappa * delta.powi(3) * (n as f64).powi(2) / (t as f64).powi(2)
    });
    let mut report = SpectralReport {
        strategy,
        lambda_min,
        lambda_max,
        kappa_precond: lambda_max / lambda_min,
        kappa_edges: kappa_edges(g),
        kappa,
        n,
        m,
        max_degree,
        t,
        bound_mst,
        bound_aug,
        bound_applicable: strategy.bound_applicable(),
        bound_holds: None,
    };
    if report.bound_applicable {
        report.bound_holds = report
            .bound()
            .map(|bound| lambda_min >= 1.0 - LAMBDA_MIN_TOL && lambda_max <= bound);
    }
    Ok(report)
}
