//! Matrix-free preconditioned conjugate gradients.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factor::BlockMatrix;
use crate::graph::MatrixWeightedGraph;
use crate::precond::Preconditioner;

/// A symmetric linear map `y = A x` on vectors of length [`len`](Self::len).
pub trait LinearOperator {
    fn len(&self) -> usize;

    /// Size of the blocks the vector is made of; `len / block_dim` is the
    /// vertex count used for the default iteration cap.
    fn block_dim(&self) -> usize {
        1
    }

    fn apply(&self, x: &[f64], y: &mut [f64]);
}

impl LinearOperator for MatrixWeightedGraph {
    fn len(&self) -> usize {
        self.n() * self.dim()
    }

    fn block_dim(&self) -> usize {
        self.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matvec_unchecked(x, y);
    }
}

impl LinearOperator for BlockMatrix {
    fn len(&self) -> usize {
        self.n() * self.dim()
    }

    fn block_dim(&self) -> usize {
        self.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let d = self.dim();
        y.fill(0.0);
        for i in 0..self.n() {
            for (j, b) in self.row(i) {
                b.mul_vec_add(1.0, &x[j * d..(j + 1) * d], &mut y[i * d..(i + 1) * d]);
            }
        }
    }
}

/// Preconditioners act through `P^{-1}`.
impl LinearOperator for Preconditioner {
    fn len(&self) -> usize {
        self.n() * self.dim()
    }

    fn block_dim(&self) -> usize {
        self.dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.apply_unchecked(x, y);
    }
}

/// The identity map, i.e. unpreconditioned CG.
#[derive(Debug, Clone, Copy)]
pub struct IdentityOperator(pub usize);

impl LinearOperator for IdentityOperator {
    fn len(&self) -> usize {
        self.0
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(x);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Converged,
    MaxIterations,
    /// The solve raised an error; the message is kept in the benchmark JSON.
    Failed,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PcgOptions {
    /// Stop once `||r_k|| / ||b|| <= tol`.
    pub tol: f64,
    /// Iteration cap; `None` means ten times the vertex count.
    pub max_iter: Option<usize>,
    /// Period of the true-residual recomputation `||b - A x_k||`.
    pub true_residual_every: usize,
}

impl Default for PcgOptions {
    fn default() -> Self {
        PcgOptions { tol: 1e-8, max_iter: None, true_residual_every: 50 }
    }
}

/// History of one solve. Histories have `iterations + 1` entries, entry 0
/// being the initial guess `x_0 = 0`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceRecord {
    pub strategy: String,
    pub seed: u64,
    pub scenario: String,
    pub status: Status,
    pub iterations: usize,
    /// Recurrence residual `||r_k|| / ||b||`.
    pub residual_history: Vec<f64>,
    /// `||x_k - x*|| / ||x*||` when a reference was supplied.
    pub error_history: Option<Vec<f64>>,
    /// `||x_k - x*||_A` when a reference was supplied.
    pub energy_error_history: Option<Vec<f64>>,
    /// `(iteration, ||b - A x_k|| / ||b||)` at every recomputation.
    pub true_residuals: Vec<(usize, f64)>,
    pub wall_time: f64,
}

impl ConvergenceRecord {
    pub fn converged(&self) -> bool {
        self.status == Status::Converged
    }

    pub fn final_residual(&self) -> f64 {
        self.residual_history.last().copied().unwrap_or(f64::NAN)
    }

    pub fn final_error(&self) -> Option<f64> {
        self.error_history.as_ref().and_then(|h| h.last().copied())
    }

    /// First iteration whose relative error is at most `threshold`.
    pub fn iterations_to_error(&self, threshold: f64) -> Option<usize> {
        self.error_history.as_ref()?.iter().position(|&e| e <= threshold)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

struct Tracker<'a> {
    a: &'a dyn LinearOperator,
    reference: Option<(&'a [f64], f64)>,
    errors: Vec<f64>,
    energy: Vec<f64>,
    diff: Vec<f64>,
    image: Vec<f64>,
}

impl Tracker<'_> {
    fn record(&mut self, x: &[f64]) {
        let Some((xs, xs_norm)) = self.reference else { return };
        for ((d, xi), si) in self.diff.iter_mut().zip(x).zip(xs) {
            *d = xi - si;
        }
        self.errors.push(if xs_norm > 0.0 { norm(&self.diff) / xs_norm } else { norm(&self.diff) });
        self.a.apply(&self.diff, &mut self.image);
        self.energy.push(dot(&self.diff, &self.image).max(0.0).sqrt());
    }
}

/// Left-preconditioned CG for `A x = b` from `x_0 = 0`, with `m` applying
/// `P^{-1}`.
///
/// The loop stops on the recurrence residual. The true residual
/// `b - A x_k` is recomputed every `true_residual_every` iterations and at
/// the end; if the recurrence claims convergence but the true residual does
/// not, the residual is replaced by the true one and the iteration restarts
/// from the current `x`.
pub fn pcg(
    a: &dyn LinearOperator,
    b: &[f64],
    m: &dyn LinearOperator,
    options: &PcgOptions,
    reference: Option<&[f64]>,
) -> Result<(Vec<f64>, ConvergenceRecord)> {
    let start = Instant::now();
    let len = a.len();
    for got in [b.len(), m.len()] {
        if got != len {
            return Err(Error::DimensionMismatch { expected: len, got });
        }
    }
    if let Some(xs) = reference {
        if xs.len() != len {
            return Err(Error::DimensionMismatch { expected: len, got: xs.len() });
        }
    }
    if !(options.tol > 0.0) {
        return Err(Error::InvalidInput("tolerance must be positive".into()));
    }
    let max_iter = options
        .max_iter
        .unwrap_or(10 * (len / a.block_dim().max(1)).max(1));

    let mut tracker = Tracker {
        a,
        reference: reference.map(|xs| (xs, norm(xs))),
        errors: Vec::new(),
        energy: Vec::new(),
        diff: vec![0.0; len],
        image: vec![0.0; len],
    };
    let mut x = vec![0.0; len];
    let mut r = b.to_vec();
    let b_norm = norm(b);
    let mut residuals = Vec::new();
    let mut true_residuals = Vec::new();
    tracker.record(&x);

    let finish = |status: Status,
                  iterations: usize,
                  residuals: Vec<f64>,
                  true_residuals: Vec<(usize, f64)>,
                  tracker: Tracker,
                  x: Vec<f64>|
     -> Result<(Vec<f64>, ConvergenceRecord)> {
        let record = ConvergenceRecord {
            strategy: String::new(),
            seed: 0,
            scenario: String::new(),
            status,
            iterations,
            residual_history: residuals,
            error_history: tracker.reference.map(|_| tracker.errors),
            energy_error_history: tracker.reference.map(|_| tracker.energy),
            true_residuals,
            wall_time: start.elapsed().as_secs_f64(),
        };
        Ok((x, record))
    };

    if b_norm == 0.0 {
        residuals.push(0.0);
        return finish(Status::Converged, 0, residuals, true_residuals, tracker, x);
    }
    residuals.push(1.0);

    let mut z = vec![0.0; len];
    let mut q = vec![0.0; len];
    m.apply(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let true_residual = |x: &[f64], out: &mut Vec<f64>| {
        a.apply(x, out);
        for (o, bi) in out.iter_mut().zip(b) {
            *o = bi - *o;
        }
        norm(out) / b_norm
    };
    let mut scratch = vec![0.0; len];

    let mut k = 0;
    let mut status = Status::MaxIterations;
    while k < max_iter {
        k += 1;
        a.apply(&p, &mut q);
        let pq = dot(&p, &q);
        if !pq.is_finite() || !rz.is_finite() {
            return Err(Error::NumericalBreakdown { iteration: k });
        }
        if pq <= 0.0 {
            return Err(Error::NotPositiveDefiniteOperator { iteration: k });
        }
        let alpha = rz / pq;
        for i in 0..len {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        let rel = norm(&r) / b_norm;
        if !rel.is_finite() {
            return Err(Error::NumericalBreakdown { iteration: k });
        }
        residuals.push(rel);
        tracker.record(&x);

        let periodic = options.true_residual_every > 0 && k % options.true_residual_every == 0;
        if rel <= options.tol || periodic {
            let t = true_residual(&x, &mut scratch);
            true_residuals.push((k, t));
            if rel <= options.tol {
                if t <= options.tol {
                    status = Status::Converged;
                    break;
                }
                r.copy_from_slice(&scratch);
                m.apply(&r, &mut z);
                p.copy_from_slice(&z);
                rz = dot(&r, &z);
                continue;
            }
        }

        m.apply(&r, &mut z);
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..len {
            p[i] = z[i] + beta * p[i];
        }
    }
    if status != Status::Converged && true_residuals.last().is_none_or(|&(i, _)| i != k) {
        let t = true_residual(&x, &mut scratch);
        true_residuals.push((k, t));
    }
    finish(status, k, residuals, true_residuals, tracker, x)
}
