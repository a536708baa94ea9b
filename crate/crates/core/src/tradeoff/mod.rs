//! Variance trade-off curves `(Δx, Δp)` from the ground-state energies
//! `u(λ)`, the closed-form KMM branch, state-independent bounds, and lower
//! convex hulls of point clouds.

mod hull;

pub use hull::{lower_convex_hull, pareto_front};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modification::{Modification, ModificationKind, MomentumMap};
use crate::spectral::{Solver, SolverConfig};

/// Default number of λ samples in a sweep.
pub const DEFAULT_LAMBDA_COUNT: usize = 64;
/// Smallest λ sampled by default; λ = 0 is the unattained plane-wave limit.
pub const LAMBDA_MIN: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TradeoffPoint {
    pub lambda: f64,
    pub u: f64,
    pub delta_x: f64,
    pub delta_p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffCurve {
    pub modification: Modification,
    pub points: Vec<TradeoffPoint>,
}

/// `count` Chebyshev–Lobatto points on `[lambda_min, 1]`, ascending. They
/// cluster at both ends, where the curve bends most.
pub fn lambda_grid(count: usize, lambda_min: f64) -> Result<Vec<f64>> {
    if count < 2 {
        return Err(Error::InvalidInput(format!("lambda grid needs at least 2 points, got {count}")));
    }
    if !(lambda_min > 0.0 && lambda_min < 1.0) {
        return Err(Error::InvalidInput(format!("lambda_min must lie in (0, 1), got {lambda_min}")));
    }
    let mid = 0.5 * (1.0 + lambda_min);
    let half = 0.5 * (1.0 - lambda_min);
    let last = (count - 1) as f64;
    let mut grid: Vec<f64> = (0..count)
        .map(|j| mid - half * (std::f64::consts::PI * j as f64 / last).cos())
        .collect();
    grid[0] = lambda_min;
    grid[count - 1] = 1.0;
    Ok(grid)
}

/// `u(λ)` and the variances of the optimal states at each λ.
///
/// The unmodified algebra has no cut-off; its curve `Δx Δp = 1/4` is returned
/// analytically, with λ = 1 (an infinitely sharp state) skipped.
pub fn sweep_tradeoff(map: &MomentumMap, lambdas: &[f64], config: SolverConfig) -> Result<TradeoffCurve> {
    if lambdas.is_empty() {
        return Err(Error::InvalidInput("empty lambda grid".into()));
    }
    for (i, &l) in lambdas.iter().enumerate() {
        if !(l > 0.0 && l <= 1.0) {
            return Err(Error::InvalidInput(format!("lambda must lie in (0, 1], got {l}")));
        }
        if i > 0 && l <= lambdas[i - 1] {
            return Err(Error::InvalidInput("lambda grid must be strictly ascending".into()));
        }
    }
    let modification = map.modification().clone();
    if !map.is_bounded() {
        let points = lambdas.iter().filter(|&&l| l < 1.0).map(|&l| heisenberg_point(l)).collect();
        return Ok(TradeoffCurve { modification, points });
    }
    let solver = Solver::new(map, config)?;
    let points = lambdas
        .par_iter()
        .map(|&lambda| {
            solver
                .solve(lambda)
                .map(|s| TradeoffPoint {
                    lambda,
                    u: s.energy,
                    delta_x: s.delta_x,
                    delta_p: s.delta_p,
                })
                .map_err(|e| Error::AtLambda {
                    lambda,
                    source: Box::new(e),
                })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TradeoffCurve { modification, points })
}

/// Gaussian optimum of `λΔx + (1-λ)Δp` for `[x, p] = i`.
fn heisenberg_point(lambda: f64) -> TradeoffPoint {
    let ratio = ((1.0 - lambda) / lambda).sqrt();
    TradeoffPoint {
        lambda,
        u: (lambda * (1.0 - lambda)).sqrt(),
        delta_x: 0.5 * ratio,
        delta_p: 0.5 / ratio,
    }
}

/// Smallest position variance `π² / (4 k_max²)`, or `None` without a cut-off.
pub fn minimal_length_variance(map: &MomentumMap) -> Option<f64> {
    let k = analytic_kmax(map);
    k.is_finite().then(|| std::f64::consts::PI.powi(2) / (4.0 * k * k))
}

/// Closed-form cut-off when the modification has one, else the map's.
pub(crate) fn analytic_kmax(map: &MomentumMap) -> f64 {
    map.modification().closed_form_kmax().unwrap_or(map.k_max())
}

/// Closed-form optimum for `f = 1 + βp²`, parametrized by the exponent γ of
/// the optimal state `cos(√β k)^γ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KmmPoint {
    pub delta_x: f64,
    pub delta_p: f64,
    pub u: f64,
    pub lambda: f64,
}

/// `Δx = βγ²/(2γ-1)`, `Δp = 1/(β(2γ-1))`, and λ from
/// `(1-λ)/λ = β²γ(γ-1)`, valid for `γ >= 1` (the branch `λ <= 1`).
///
/// For `1/2 < γ < 1` the variances are still returned, with λ outside (0, 1].
pub fn kmm_analytic(beta: f64, gamma: f64) -> Result<KmmPoint> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidInput(format!("beta must be positive, got {beta}")));
    }
    if !(gamma > 0.5) {
        return Err(Error::Divergence { gamma });
    }
    let delta_x = beta * gamma * gamma / (2.0 * gamma - 1.0);
    let delta_p = 1.0 / (beta * (2.0 * gamma - 1.0));
    let lambda = 1.0 / (1.0 + beta * beta * gamma * (gamma - 1.0));
    Ok(KmmPoint {
        delta_x,
        delta_p,
        u: lambda * delta_x + (1.0 - lambda) * delta_p,
        lambda,
    })
}

/// Exponent γ of the KMM optimal state at a given λ in (0, 1].
pub fn kmm_gamma(beta: f64, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::InvalidInput(format!("lambda must lie in (0, 1], got {lambda}")));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidInput(format!("beta must be positive, got {beta}")));
    }
    let r = (1.0 - lambda) / (lambda * beta * beta);
    Ok(0.5 * (1.0 + (1.0 + 4.0 * r).sqrt()))
}

/// State-independent bound `Δx >= g(Δp)² / (4Δp)` with `g(q) = f(√q)`.
pub fn suboptimal_bound(m: &Modification, delta_p: f64) -> Result<f64> {
    if !(delta_p > 0.0) {
        return Err(Error::Domain(format!("delta_p must be positive, got {delta_p}")));
    }
    let g = m.g(delta_p);
    Ok(g * g / (4.0 * delta_p))
}

/// KMM-only bound `√(Δx Δp) >= (1 + βΔp)/2`, returned as the smallest `Δx`.
pub fn kmm_variance_bound(m: &Modification, delta_p: f64) -> Result<f64> {
    if m.kind != ModificationKind::Kmm {
        return Err(Error::Unsupported(format!(
            "the closed-form variance bound exists only for kmm, not {}",
            m.kind.name()
        )));
    }
    if !(delta_p > 0.0) {
        return Err(Error::Domain(format!("delta_p must be positive, got {delta_p}")));
    }
    Ok((1.0 + m.beta * delta_p).powi(2) / (4.0 * delta_p))
}

/// Variances recovered from `u(λ)` alone: `Δx = u + (1-λ)u'`, `Δp = u - λu'`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Reconstruction {
    pub lambda: f64,
    pub delta_x: f64,
    pub delta_p: f64,
    /// Estimated error of the finite-difference derivative, already scaled
    /// into the larger of the two variance errors.
    pub error_estimate: f64,
}

/// Three-point derivative at `x[c]` from the stencil `x[s..s+3]`.
fn three_point(x: &[f64], y: &[f64], s: usize, c: usize) -> f64 {
    let (x0, x1, x2) = (x[s], x[s + 1], x[s + 2]);
    let t = x[c];
    let w0 = ((t - x1) + (t - x2)) / ((x0 - x1) * (x0 - x2));
    let w1 = ((t - x0) + (t - x2)) / ((x1 - x0) * (x1 - x2));
    let w2 = ((t - x0) + (t - x1)) / ((x2 - x0) * (x2 - x1));
    w0 * y[s] + w1 * y[s + 1] + w2 * y[s + 2]
}

/// Differentiate `u` on the λ-grid: central three-point stencils inside,
/// one-sided second-order stencils at the ends. The error estimate is the
/// largest difference to the neighbouring three-point stencils.
pub fn reconstruct_from_u(curve: &TradeoffCurve) -> Result<Vec<Reconstruction>> {
    let n = curve.points.len();
    if n < 4 {
        return Err(Error::InvalidInput("reconstruction needs at least 4 curve points".into()));
    }
    let x: Vec<f64> = curve.points.iter().map(|p| p.lambda).collect();
    let y: Vec<f64> = curve.points.iter().map(|p| p.u).collect();
    let out = (0..n)
        .map(|i| {
            let main = i.saturating_sub(1).min(n - 3);
            let d = three_point(&x, &y, main, i);
            let err = [main.checked_sub(1), Some(main + 1)]
                .into_iter()
                .flatten()
                .filter(|&s| s + 2 < n)
                .map(|s| (three_point(&x, &y, s, i) - d).abs())
                .fold(0.0, f64::max);
            let lambda = x[i];
            Reconstruction {
                lambda,
                delta_x: y[i] + (1.0 - lambda) * d,
                delta_p: y[i] - lambda * d,
                error_estimate: err * lambda.max(1.0 - lambda),
            }
        })
        .collect();
    Ok(out)
}

/// Indices of interior points where `u` falls below the chord of its
/// neighbours by more than `tol` (concavity failures).
pub fn concavity_violations(curve: &TradeoffCurve, tol: f64) -> Vec<usize> {
    let p = &curve.points;
    (1..p.len().saturating_sub(1))
        .filter(|&i| {
            let (a, b, c) = (p[i - 1], p[i], p[i + 1]);
            let t = (b.lambda - a.lambda) / (c.lambda - a.lambda);
            let chord = a.u + t * (c.u - a.u);
            b.u < chord - tol
        })
        .collect()
}

/// Points `(Δx, Δp)` that beat the curve, i.e. `λΔx + (1-λ)Δp < u(λ)` by more
/// than `rel_tol · u(λ)` at some sampled λ. Returns their indices.
pub fn dominance_violations(curve: &TradeoffCurve, points: &[(f64, f64)], rel_tol: f64) -> Vec<usize> {
    points
        .iter()
        .enumerate()
        .filter(|(_, &(dx, dp))| {
            curve
                .points
                .iter()
                .any(|c| c.lambda * dx + (1.0 - c.lambda) * dp < c.u * (1.0 - rel_tol))
        })
        .map(|(i, _)| i)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modification::build_momentum_map;

    #[test]
    fn grid_endpoints_and_order() {
        let g = lambda_grid(64, 1e-3).unwrap();
        assert_eq!(g.len(), 64);
        assert_eq!(g[0], 1e-3);
        assert_eq!(g[63], 1.0);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn kmm_closed_form_examples() {
        let p = kmm_analytic(1.0, 1.0).unwrap();
        assert_eq!((p.delta_x, p.delta_p, p.lambda), (1.0, 1.0, 1.0));
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        let p = kmm_analytic(1.0, golden).unwrap();
        assert!((p.lambda - 0.5).abs() < 1e-15);
        assert!((p.u - golden / 2.0).abs() < 1e-15);
        let p = kmm_analytic(4.0, 1.0).unwrap();
        assert_eq!((p.delta_x, p.delta_p), (4.0, 0.25));
        assert!(matches!(kmm_analytic(1.0, 0.5), Err(Error::Divergence { .. })));
    }

    #[test]
    fn kmm_gamma_inverts_lambda() {
        for beta in [0.5, 1.0, 3.0] {
            for gamma in [1.0, 1.3, 4.0] {
                let p = kmm_analytic(beta, gamma).unwrap();
                assert!((kmm_gamma(beta, p.lambda).unwrap() - gamma).abs() < 1e-12);
                assert!((p.u - p.lambda * beta * gamma).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn bound_examples() {
        let kmm = Modification::kmm(1.0).unwrap();
        assert_eq!(suboptimal_bound(&kmm, 1.0).unwrap(), 1.0);
        assert_eq!(kmm_variance_bound(&kmm, 1.0).unwrap(), 1.0);
        let cosh = Modification::cosh(1.0).unwrap();
        assert!((suboptimal_bound(&cosh, 1.0).unwrap() - 1f64.cosh().powi(2) / 4.0).abs() < 1e-15);
        assert!(suboptimal_bound(&Modification::unmodified(), 0.0).is_err());
        assert!(kmm_variance_bound(&cosh, 1.0).is_err());
    }

    #[test]
    fn minimal_length_examples() {
        let map = build_momentum_map(&Modification::kmm(1.0).unwrap(), 1e-12).unwrap();
        assert!((minimal_length_variance(&map).unwrap() - 1.0).abs() < 1e-12);
        let free = build_momentum_map(&Modification::unmodified(), 1e-12).unwrap();
        assert_eq!(minimal_length_variance(&free), None);
    }

    #[test]
    fn unmodified_curve_is_heisenberg() {
        let free = build_momentum_map(&Modification::unmodified(), 1e-12).unwrap();
        let curve = sweep_tradeoff(&free, &lambda_grid(16, 1e-3).unwrap(), SolverConfig::default()).unwrap();
        assert_eq!(curve.points.len(), 15);
        for p in &curve.points {
            assert!((p.delta_x * p.delta_p - 0.25).abs() < 1e-14);
            assert!((p.lambda * p.delta_x + (1.0 - p.lambda) * p.delta_p - p.u).abs() < 1e-14);
        }
    }

    #[test]
    fn reconstruction_of_smooth_curve() {
        // u = √(λ(1-λ)) on a grid away from the endpoints.
        let free = build_momentum_map(&Modification::unmodified(), 1e-12).unwrap();
        let lambdas: Vec<f64> = (0..40).map(|i| 0.2 + 0.6 * i as f64 / 39.0).collect();
        let curve = sweep_tradeoff(&free, &lambdas, SolverConfig::default()).unwrap();
        let rec = reconstruct_from_u(&curve).unwrap();
        for (r, p) in rec.iter().zip(&curve.points) {
            assert!((r.delta_x - p.delta_x).abs() <= 10.0 * r.error_estimate + 1e-12, "{r:?} {p:?}");
            assert!((r.delta_p - p.delta_p).abs() <= 10.0 * r.error_estimate + 1e-12, "{r:?} {p:?}");
        }
        assert!(concavity_violations(&curve, 0.0).is_empty());
    }

    #[test]
    fn dominance_check() {
        let free = build_momentum_map(&Modification::unmodified(), 1e-12).unwrap();
        let curve = sweep_tradeoff(&free, &lambda_grid(32, 1e-3).unwrap(), SolverConfig::default()).unwrap();
        let pts = [(1.0, 1.0), (0.5, 0.5), (0.4, 0.4)];
        assert_eq!(dominance_violations(&curve, &pts, 1e-9), vec![2]);
    }
}
