//! Smallest eigenpair of a real symmetric tridiagonal matrix.

use crate::error::{Error, Result};

/// Number of eigenvalues strictly below `x` (LDLᵀ pivot signs).
pub fn sturm_count(diag: &[f64], offdiag: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..diag.len() {
        let coupling = if i == 0 { 0.0 } else { offdiag[i - 1] * offdiag[i - 1] };
        let prev = if q == 0.0 { f64::EPSILON * (diag[i].abs() + 1.0) } else { q };
        q = diag[i] - x - if i == 0 { 0.0 } else { coupling / prev };
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Gershgorin interval containing the spectrum.
pub fn gershgorin(diag: &[f64], offdiag: &[f64]) -> (f64, f64) {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let left = if i > 0 { offdiag[i - 1].abs() } else { 0.0 };
        let right = if i + 1 < n { offdiag[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - left - right);
        hi = hi.max(diag[i] + left + right);
    }
    (lo, hi)
}

/// Bracket `[lo, hi]` around the smallest eigenvalue, narrowed by bisection
/// until `hi - lo <= rel_tol * max(|lo|, |hi|)`.
pub fn smallest_eigenvalue_bracket(diag: &[f64], offdiag: &[f64], rel_tol: f64) -> (f64, f64) {
    let (mut lo, _) = gershgorin(diag, offdiag);
    // Any diagonal entry is a Rayleigh quotient, hence an upper bound.
    let mut hi = diag.iter().copied().fold(f64::INFINITY, f64::min);
    lo = lo.min(hi);
    for _ in 0..200 {
        if hi - lo <= rel_tol * lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(diag, offdiag, mid) == 0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

/// Solve `(T - shift I) x = rhs` in place by Gaussian elimination without
/// pivoting; `pivots` is scratch of the same length. Stable when
/// `T - shift I` is positive definite.
fn solve_shifted(diag: &[f64], offdiag: &[f64], shift: f64, rhs: &mut [f64], pivots: &mut [f64]) {
    let n = diag.len();
    pivots[0] = diag[0] - shift;
    for i in 1..n {
        let factor = offdiag[i - 1] / pivots[i - 1];
        pivots[i] = diag[i] - shift - factor * offdiag[i - 1];
        rhs[i] -= factor * rhs[i - 1];
    }
    rhs[n - 1] /= pivots[n - 1];
    for i in (0..n - 1).rev() {
        rhs[i] = (rhs[i] - offdiag[i] * rhs[i + 1]) / pivots[i];
    }
}

/// Eigenvector for the smallest eigenvalue by inverse iteration with a shift
/// just below it. Returns the unit-norm vector and the iteration count.
pub fn inverse_iteration(diag: &[f64], offdiag: &[f64], shift: f64, tol: f64, max_iter: usize) -> Result<(Vec<f64>, usize)> {
    let n = diag.len();
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut scratch = vec![0.0; n];
    for iter in 1..=max_iter {
        let mut y = x.clone();
        solve_shifted(diag, offdiag, shift, &mut y, &mut scratch);
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::Solver { iterations: iter });
        }
        let sign = if y.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
        y.iter_mut().for_each(|v| *v *= sign / norm);
        let change = y.iter().zip(&x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        x = y;
        if change <= tol {
            return Ok((x, iter));
        }
    }
    Err(Error::Solver { iterations: max_iter })
}

/// `xᵀ T x` for a symmetric tridiagonal `T`.
pub fn quadratic_form(diag: &[f64], offdiag: &[f64], x: &[f64]) -> f64 {
    let mut acc: f64 = diag.iter().zip(x).map(|(d, v)| d * v * v).sum();
    for i in 0..offdiag.len() {
        acc += 2.0 * offdiag[i] * x[i] * x[i + 1];
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(n: usize) -> (Vec<f64>, Vec<f64>) {
        (vec![2.0; n], vec![-1.0; n - 1])
    }

    #[test]
    fn sturm_count_2x2() {
        // [[1, -1], [-1, 3]] has eigenvalues 2 ± sqrt(2).
        let (d, e) = (vec![1.0, 3.0], vec![-1.0]);
        assert_eq!(sturm_count(&d, &e, 0.5), 0);
        assert_eq!(sturm_count(&d, &e, 1.0), 1);
        assert_eq!(sturm_count(&d, &e, 3.5), 2);
    }

    #[test]
    fn discrete_laplacian_lowest_mode() {
        let n = 50;
        let (d, e) = laplacian(n);
        let exact = 2.0 - 2.0 * (std::f64::consts::PI / (n as f64 + 1.0)).cos();
        let (lo, hi) = smallest_eigenvalue_bracket(&d, &e, 1e-13);
        assert!(lo <= exact && exact <= hi, "[{lo}, {hi}] vs {exact}");
        let (v, _) = inverse_iteration(&d, &e, lo, 1e-13, 50).unwrap();
        let rq = quadratic_form(&d, &e, &v);
        assert!((rq - exact).abs() < 1e-13);
        for (i, x) in v.iter().enumerate() {
            let s = ((i + 1) as f64 * std::f64::consts::PI / (n as f64 + 1.0)).sin();
            let s = s * (2.0 / (n as f64 + 1.0)).sqrt();
            assert!((x - s).abs() < 1e-10);
        }
    }

    #[test]
    fn shifted_solve_matches_dense() {
        let d = [4.0, 5.0, 6.0, 7.0];
        let e = [1.0, -2.0, 0.5];
        let x_true = [1.0, -2.0, 3.0, 0.25];
        let mut b = [0.0; 4];
        for i in 0..4 {
            b[i] = (d[i] - 1.0) * x_true[i];
            if i > 0 {
                b[i] += e[i - 1] * x_true[i - 1];
            }
            if i < 3 {
                b[i] += e[i] * x_true[i + 1];
            }
        }
        let mut scratch = [0.0; 4];
        solve_shifted(&d, &e, 1.0, &mut b, &mut scratch);
        for i in 0..4 {
            assert!((b[i] - x_true[i]).abs() < 1e-13, "{b:?}");
        }
    }
}
