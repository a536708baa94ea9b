use super::Modification;
use crate::error::{Error, Result};
use crate::quadrature::integrate;

/// Largest integration limit, in units of the modification's momentum
/// scale, before a growing integral is declared divergent.
pub const DIVERGENCE_LIMIT: f64 = 1e12;

const SEGMENT_REL_TOL: f64 = 1e-14;
const MAX_SUBDIVISIONS: usize = 200;

/// Estimate of `∫_P^∞ dp / f(p)` from the local decay of the integrand.
///
/// With `s = P f'(P) / f(P)` the integrand decays locally like `p^{-s}`, so the
/// tail is `P / ((s - 1) f(P))`; this is exact for power laws and an upper
/// bound when the decay accelerates (exponential growth of `f`). Returns
/// infinity when `s <= 1`.
pub fn tail_estimate(m: &Modification, p: f64) -> f64 {
    let fp = m.eval(p);
    if !fp.is_finite() {
        return 0.0;
    }
    let dfp = m.derivative(p);
    if !dfp.is_finite() {
        return 0.0;
    }
    let s = p * dfp / fp;
    if s <= 1.0 {
        f64::INFINITY
    } else {
        p / ((s - 1.0) * fp)
    }
}

/// The momentum cut-off `k_max = ∫_0^∞ dp / f(p)`.
///
/// Integrates over doubling windows `[P, 2P]` until the estimated tail falls
/// below `tol`, or until consecutive tail estimates agree with the window
/// integral to within `tol`; the tail estimate is then added to the result.
/// Returns `f64::INFINITY` if the window reaches [`DIVERGENCE_LIMIT`] while
/// the last window still contributes more than `tol` (e.g. `f ≡ 1`).
pub fn compute_kmax(m: &Modification, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    let recip = |p: f64| 1.0 / m.eval(p);
    let scale = m.momentum_scale();
    let limit = DIVERGENCE_LIMIT * scale;

    let mut upper = scale;
    let mut total = integrate(recip, 0.0, upper, 0.0, SEGMENT_REL_TOL, MAX_SUBDIVISIONS)?.value;
    loop {
        let tail = tail_estimate(m, upper);
        if tail < tol {
            return Ok(total + tail);
        }
        let segment = integrate(recip, upper, 2.0 * upper, 0.0, SEGMENT_REL_TOL, MAX_SUBDIVISIONS)?;
        total += segment.value;
        upper *= 2.0;
        // The estimate at P should equal the segment plus the estimate at 2P;
        // once the mismatch is below tol the tail itself is trusted.
        let next = tail_estimate(m, upper);
        if next.is_finite() && (tail - segment.value - next).abs() < 0.25 * tol {
            return Ok(total + next);
        }
        if upper > limit {
            if segment.value > tol {
                return Ok(f64::INFINITY);
            }
            return Err(Error::Accuracy {
                estimate: total,
                error_bound: tail,
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn kmm_cutoff() {
        let k = compute_kmax(&Modification::kmm(1.0).unwrap(), 1e-10).unwrap();
        assert!((k - PI / 2.0).abs() < 1e-10, "{k}");
    }

    #[test]
    fn kmm_scaling_in_beta() {
        for beta in [0.25, 1.0, 4.0] {
            let k = compute_kmax(&Modification::kmm(beta).unwrap(), 1e-10).unwrap();
            assert!((k * beta.sqrt() - PI / 2.0).abs() < 1e-10, "beta {beta}: {k}");
        }
    }

    #[test]
    fn unmodified_has_no_cutoff() {
        assert_eq!(compute_kmax(&Modification::unmodified(), 1e-10).unwrap(), f64::INFINITY);
        let zeros = Modification::even_polynomial(vec![0.0, 0.0]).unwrap();
        assert_eq!(compute_kmax(&zeros, 1e-10).unwrap(), f64::INFINITY);
    }

    #[test]
    fn tail_estimate_is_exact_for_pure_power() {
        // f = 1 + p^2 at large p: tail of 1/f is atan(1/P) ≈ 1/P.
        let m = Modification::kmm(1.0).unwrap();
        let p = 1e4;
        let exact = (1.0f64 / p).atan();
        assert!((tail_estimate(&m, p) - exact).abs() < 2.0 / p.powi(3));
    }

    #[test]
    fn rejects_bad_tolerance() {
        assert!(compute_kmax(&Modification::kmm(1.0).unwrap(), 0.0).is_err());
    }
}
