//! Cyclic Jacobi eigenvalue iteration for small and mid-sized dense symmetric
//! matrices stored row-major.

const MAX_SWEEPS: usize = 100;

/// Off-diagonal Frobenius mass, relative to the full Frobenius norm, at which
/// the sweep loop stops.
pub(crate) const OFF_DIAGONAL_THRESHOLD: f64 = 1e-14;

/// Diagonalises the symmetric `n x n` row-major matrix `a` in place.
///
/// Returns `(eigenvalues, eigenvectors)` with eigenvalues ascending and
/// eigenvector `k` stored in column `k` of the row-major `eigenvectors`.
pub(crate) fn eigen_symmetric(n: usize, a: &mut [f64]) -> (Vec<f64>, Vec<f64>) {
    debug_assert_eq!(a.len(), n * n);
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    let norm = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        let threshold = OFF_DIAGONAL_THRESHOLD * norm;
        for _ in 0..MAX_SWEEPS {
            if off_diagonal_norm(n, a) <= threshold {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    rotate(n, a, &mut v, p, q);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| a[x * n + x].total_cmp(&a[y * n + y]));
    let values = order.iter().map(|&k| a[k * n + k]).collect();
    let mut vectors = vec![0.0; n * n];
    for (new_col, &old_col) in order.iter().enumerate() {
        for row in 0..n {
            vectors[row * n + new_col] = v[row * n + old_col];
        }
    }
    (values, vectors)
}

fn off_diagonal_norm(n: usize, a: &[f64]) -> f64 {
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a[i * n + j] * a[i * n + j];
            }
        }
    }
    sum.sqrt()
}

fn rotate(n: usize, a: &mut [f64], v: &mut [f64], p: usize, q: usize) {
    let apq = a[p * n + q];
    if apq == 0.0 {
        return;
    }
    let tau = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
    let t = if tau.abs() > 1e150 {
        0.5 / tau
    } else {
        tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    for k in 0..n {
        let akp = a[k * n + p];
        let akq = a[k * n + q];
        a[k * n + p] = c * akp - s * akq;
        a[k * n + q] = s * akp + c * akq;
    }
    for k in 0..n {
        let apk = a[p * n + k];
        let aqk = a[q * n + k];
        a[p * n + k] = c * apk - s * aqk;
        a[q * n + k] = s * apk + c * aqk;
    }
    a[p * n + q] = 0.0;
    a[q * n + p] = 0.0;

    for k in 0..n {
        let vkp = v[k * n + p];
        let vkq = v[k * n + q];
        v[k * n + p] = c * vkp - s * vkq;
        v[k * n + q] = s * vkp + c * vkq;
    }
}
