//! Differential Shannon entropies and min-entropies of band-limited states in
//! the `k`, `p` and `x` representations. All values are in nats.

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{digamma, ln_gamma};

use crate::error::{Error, Result};
use crate::modification::{ModificationKind, MomentumMap};
use crate::quadrature::integrate;
use crate::spectral::Wavefunction;
use crate::transform::{BoxMode, CosPowerState, PositionDensity, WindowPolicy};

/// Tail entropy above which [`shannon_entropy_x`] attaches a warning.
pub const TAIL_WARNING: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EntropySource {
    AnalyticFamily,
    RandomScan,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropySample {
    pub h_x: f64,
    pub h_k: f64,
    pub gamma: Option<f64>,
    pub source: EntropySource,
}

fn neg_w_log_w(w: f64) -> f64 {
    if w > 0.0 {
        -w * w.ln()
    } else {
        0.0
    }
}

/// `-Σ |ψ_i|² log |ψ_i|² h`.
pub fn shannon_entropy_k(state: &Wavefunction) -> f64 {
    state.values.iter().map(|v| neg_w_log_w(v.norm_sqr())).sum::<f64>() * state.grid.spacing()
}

/// A grid state written in modified momentum: node momenta `p(k_i)`, the
/// densities, and the cell edges `p(k_i ± h/2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PRepresentation {
    pub p_nodes: Vec<f64>,
    pub density: Vec<f64>,
    pub p_edges: Vec<f64>,
}

/// Map a grid state to `p` coordinates. The density with respect to the
/// measure `dp/f(p)` equals `|ψ(k(p))|²`.
pub fn to_p_representation(state: &Wavefunction, map: &MomentumMap) -> Result<PRepresentation> {
    let grid = state.grid;
    if !map.is_bounded() || (grid.k_max() - map.k_max()).abs() > 1e-12 * map.k_max() {
        return Err(Error::InvalidInput("state grid does not match the map cut-off".into()));
    }
    let h = grid.spacing();
    let n = grid.len();
    let p_nodes = (0..n).map(|j| map.eval_p(grid.node(j))).collect::<Result<Vec<_>>>()?;
    let p_edges = (0..=n)
        .map(|j| map.eval_p(grid.node(0) + (j as f64 - 0.5) * h))
        .collect::<Result<Vec<_>>>()?;
    Ok(PRepresentation {
        p_nodes,
        density: state.density(),
        p_edges,
    })
}

/// `-∫ w log w dp/f(p)`, with each cell's measure `∫ dp/f` taken from the
/// momentum map. Equal to [`shannon_entropy_k`] of the originating state.
pub fn shannon_entropy_p(rep: &PRepresentation, map: &MomentumMap) -> f64 {
    rep.density
        .iter()
        .enumerate()
        .map(|(j, &w)| {
            let (lo, hi) = (rep.p_edges[j], rep.p_edges[j + 1]);
            let measure = map.k_of_p(hi) - map.k_of_p(lo);
            neg_w_log_w(w) * measure
        })
        .sum()
}

/// `h_k` of the normalized state `∝ cos(√β k)^γ`:
/// `log(√(π/β) Γ(1/2+γ)/Γ(1+γ)) + γ[ψ(γ+1) - ψ(γ+1/2)]`, where the digamma
/// difference is the harmonic-number difference `N(γ) - N(γ-1/2)`.
pub fn analytic_hk(beta: f64, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::Domain(format!("gamma must be positive, got {gamma}")));
    }
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidInput(format!("beta must be positive, got {beta}")));
    }
    let log_norm = 0.5 * (PI / beta).ln() + ln_gamma(0.5 + gamma) - ln_gamma(1.0 + gamma);
    Ok(log_norm + gamma * (digamma(gamma + 1.0) - digamma(gamma + 0.5)))
}

/// `h_k` of `∝ cos(√β k)^γ` by adaptive quadrature, with the normalization
/// also integrated numerically. Writing `cos q = sin t` keeps the endpoint
/// accurate where the density vanishes.
pub fn cos_power_hk_quadrature(beta: f64, gamma: f64) -> Result<f64> {
    let state = CosPowerState::new(beta, gamma)?;
    let half = 0.5 * PI;
    let weight = |t: f64| t.sin().powf(2.0 * gamma);
    let norm = 2.0 * integrate(weight, 0.0, half, 1e-15, 1e-14, 2000)?.value / beta.sqrt();
    let log_norm = norm.ln();
    let integrand = |t: f64| {
        let w = weight(t);
        if w == 0.0 {
            0.0
        } else {
            -w * (2.0 * gamma * t.sin().ln() - log_norm)
        }
    };
    let q = integrate(integrand, 0.0, half, 1e-15, 1e-14, 2000)?;
    debug_assert!((norm - state.norm_squared()).abs() < 1e-8 * norm);
    Ok(2.0 * q.value / (beta.sqrt() * norm))
}

/// Position entropy over the sampled window plus tail information.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    /// `-∫ ρ log ρ` over the window.
    pub value: f64,
    /// Entropy beyond the window from a power-law fit of the outer density.
    pub tail_estimate: f64,
    /// Rigorous bound on the tail entropy from the envelope `ρ <= c/x²`.
    pub tail_bound: f64,
    pub warning: Option<String>,
}

impl EntropyEstimate {
    /// Window value with the fitted tail added.
    pub fn extrapolated(&self) -> f64 {
        self.value + self.tail_estimate
    }
}

/// Entropy of `ρ = A x^{-s}` beyond `X` on one side.
fn power_law_tail_entropy(a: f64, s: f64, x: f64) -> f64 {
    let m = a * x.powf(1.0 - s) / (s - 1.0);
    m * (s * x.ln() - a.ln() + s / (s - 1.0))
}

/// `-∫ ρ log ρ dx` over the window.
///
/// Outside the window the envelope gives `∫_{|x|>X} -ρ log ρ <=
/// 2c(log(X²/c) + 2)/X`. A sharper estimate fits `ρ ≈ A|x|^{-s}` to the
/// masses of the two outer octaves; a warning is attached when it exceeds
/// [`TAIL_WARNING`].
pub fn shannon_entropy_x(d: &PositionDensity) -> EntropyEstimate {
    let w = d.window();
    let value = d.integrate(w, |_, rho| neg_w_log_w(rho));
    let c = d.envelope;
    let tail_bound = if c / (w * w) < 1.0 / E {
        2.0 * c * ((w * w / c).ln() + 2.0) / w
    } else {
        f64::INFINITY
    };
    let octave = |lo: f64, hi: f64| d.integrate(hi, |_, rho| rho) - d.integrate(lo, |_, rho| rho);
    let outer = octave(0.5 * w, w);
    let inner = octave(0.25 * w, 0.5 * w);
    let tail_estimate = if outer > 0.0 && inner > outer {
        let s = 1.0 + (inner / outer).log2();
        // Both sides together: outer = 2 A ((X/2)^{1-s} - X^{1-s})/(s-1).
        let a = outer * (s - 1.0) / (2.0 * ((0.5 * w).powf(1.0 - s) - w.powf(1.0 - s)));
        (2.0 * power_law_tail_entropy(a, s, w)).max(0.0)
    } else {
        0.0
    };
    let warning = (tail_estimate > TAIL_WARNING).then(|| {
        format!("tail entropy beyond |x| = {w:.4} estimated at {tail_estimate:.3e} (bound {tail_bound:.3e})")
    });
    EntropyEstimate {
        value,
        tail_estimate: tail_estimate.min(tail_bound),
        tail_bound,
        warning,
    }
}

/// Largest sample with a parabolic correction through the peak triple.
fn refined_peak(values: &[f64]) -> f64 {
    let (j, &peak) = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty density");
    if j == 0 || j + 1 == values.len() {
        return peak;
    }
    let (y0, y1, y2) = (values[j - 1], peak, values[j + 1]);
    let curvature = y0 - 2.0 * y1 + y2;
    if curvature < 0.0 {
        y1 - (y2 - y0).powi(2) / (8.0 * curvature)
    } else {
        peak
    }
}

/// `-log sup ρ` for sampled densities.
pub fn min_entropy(density: &[f64]) -> Result<f64> {
    if density.is_empty() {
        return Err(Error::InvalidInput("empty density".into()));
    }
    Ok(-refined_peak(density).ln())
}

pub fn min_entropy_k(state: &Wavefunction) -> Result<f64> {
    min_entropy(&state.density())
}

pub fn min_entropy_x(d: &PositionDensity) -> Result<f64> {
    min_entropy(&d.density)
}

/// Minimal min-entropy of a position measurement, `-log(k_max/π)`, or `None`
/// without a cut-off.
pub fn min_entropy_minlength(map: &MomentumMap) -> Option<f64> {
    let k = crate::tradeoff::analytic_kmax(map);
    k.is_finite().then(|| -(k / PI).ln())
}

/// Best position min-entropy over states spanned by the first `modes` box
/// modes. For a fixed point `x0` the optimum is `ψ ∝ Σ conj(φ_n(x0)) ψ_n`,
/// with peak density `S(x0) = Σ |φ_n(x0)|²`; the result maximizes `S`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncatedOptimum {
    pub modes: usize,
    pub x_star: f64,
    pub peak_density: f64,
    pub min_entropy: f64,
}

pub fn min_entropy_truncated(k_max: f64, modes: usize) -> Result<TruncatedOptimum> {
    if modes == 0 {
        return Err(Error::InvalidInput("need at least one mode".into()));
    }
    let basis = (1..=modes).map(|n| BoxMode::new(n, k_max)).collect::<Result<Vec<_>>>()?;
    let s = |x: f64| basis.iter().map(|m| m.phi(x).norm_sqr()).sum::<f64>();
    // The kernel Σ|φ_n|² decays on the scale 1/k_max; scan, then refine.
    let span = 4.0 * PI / k_max;
    let steps = 64 * 8;
    let dx = 2.0 * span / steps as f64;
    let (mut best_x, mut best) = (0.0, s(0.0));
    for j in 0..=steps {
        let x = -span + j as f64 * dx;
        let v = s(x);
        if v > best {
            best = v;
            best_x = x;
        }
    }
    let (mut lo, mut hi) = (best_x - dx, best_x + dx);
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let a = hi - ratio * (hi - lo);
        let b = lo + ratio * (hi - lo);
        if s(a) >= s(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    let mid = 0.5 * (lo + hi);
    if s(mid) > best {
        best = s(mid);
        best_x = mid;
    }
    Ok(TruncatedOptimum {
        modes,
        x_star: best_x,
        peak_density: best,
        min_entropy: -best.ln(),
    })
}

/// Largest momentum entropy `log(2k_max)` and the implied lower bound
/// `1 - log(2k_max/π)` on the position entropy (infinite without a cut-off).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropicBounds {
    pub h_p_max: f64,
    pub h_x_lower: f64,
}

pub fn entropic_bounds(map: &MomentumMap) -> EntropicBounds {
    let k = map.k_max();
    if k.is_finite() {
        EntropicBounds {
            h_p_max: (2.0 * k).ln(),
            h_x_lower: 1.0 - (2.0 * k / PI).ln(),
        }
    } else {
        EntropicBounds {
            h_p_max: f64::INFINITY,
            h_x_lower: f64::NEG_INFINITY,
        }
    }
}

/// `log(πe)`, the lower bound on `h_x + h_k`.
pub fn bb_bound() -> f64 {
    (PI * E).ln()
}

/// Position entropy of `cos(√β k)^γ` through its exact transform, with the
/// fitted tail added.
pub fn cos_power_hx(beta: f64, gamma: f64, policy: WindowPolicy) -> Result<EntropyEstimate> {
    let state = CosPowerState::new(beta, gamma)?;
    Ok(shannon_entropy_x(&state.position_density(policy)))
}

/// Minimum of the position entropy along the family `cos(√β k)^γ`.
/// Optimality of the family is conjectured, not proven.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShannonMinlength {
    pub gamma_star: f64,
    pub h_x_min: f64,
    /// `(γ, h_x)` along the grid.
    pub samples: Vec<(f64, f64)>,
    pub label: String,
}

pub const CONJECTURED: &str = "CONJECTURED";

pub fn shannon_minlength_estimate(map: &MomentumMap, gamma_grid: &[f64], policy: WindowPolicy) -> Result<ShannonMinlength> {
    let m = map.modification();
    if m.kind != ModificationKind::Kmm {
        return Err(Error::Unsupported(format!(
            "the cos^gamma family is optimal only for kmm, not {}",
            m.kind.name()
        )));
    }
    if gamma_grid.len() < 3 {
        return Err(Error::InvalidInput("gamma grid needs at least 3 points".into()));
    }
    let samples = gamma_grid
        .iter()
        .map(|&g| cos_power_hx(m.beta, g, policy).map(|e| (g, e.extrapolated())))
        .collect::<Result<Vec<_>>>()?;
    let (j, _) = samples
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .expect("non-empty grid");
    let (mut gamma_star, mut h_x_min) = samples[j];
    if j > 0 && j + 1 < samples.len() {
        // Golden-section refinement inside the bracketing grid cell pair.
        let (mut lo, mut hi) = (samples[j - 1].0, samples[j + 1].0);
        let f = |g: f64| cos_power_hx(m.beta, g, policy).map(|e| e.extrapolated());
        let ratio = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..30 {
            let a = hi - ratio * (hi - lo);
            let b = lo + ratio * (hi - lo);
            if f(a)? <= f(b)? {
                hi = b;
            } else {
                lo = a;
            }
        }
        let g = 0.5 * (lo + hi);
        let v = f(g)?;
        if v < h_x_min {
            gamma_star = g;
            h_x_min = v;
        }
    }
    Ok(ShannonMinlength {
        gamma_star,
        h_x_min,
        samples,
        label: CONJECTURED.into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modification::{build_momentum_map, Modification};
    use crate::spectral::Grid;
    use crate::transform::to_position_adaptive;
    use num_complex::Complex64;

    fn kmm_map() -> MomentumMap {
        build_momentum_map(&Modification::kmm(1.0).unwrap(), 1e-12).unwrap()
    }

    #[test]
    fn analytic_special_points() {
        assert!((analytic_hk(1.0, 1.0).unwrap() - (2.0 * PI / E).ln()).abs() < 1e-14);
        assert!((analytic_hk(1.0, 0.5).unwrap() - 1.0).abs() < 1e-14);
        assert!((analytic_hk(1.0, 1e-6).unwrap() - PI.ln()).abs() < 1e-5);
        assert!(analytic_hk(1.0, 0.0).is_err());
    }

    #[test]
    fn quadrature_hk_matches_closed_form() {
        for beta in [0.5, 1.0, 2.0] {
            for gamma in [1e-6, 0.1, 0.5, 1.0, 3.7] {
                let a = analytic_hk(beta, gamma).unwrap();
                let q = cos_power_hk_quadrature(beta, gamma).unwrap();
                assert!((a - q).abs() < 1e-9, "β={beta} γ={gamma}: {a} vs {q}");
            }
        }
    }

    #[test]
    fn uniform_k_entropy() {
        let g = Grid::new(PI / 2.0, 1023).unwrap();
        let psi = Wavefunction::from_fn(g, |_| Complex64::new(1.0, 0.0)).unwrap().normalized().unwrap();
        // Interior-node normalization gives log(n h) exactly.
        let expected = (1023.0 * g.spacing()).ln();
        assert!((shannon_entropy_k(&psi) - expected).abs() < 1e-12);
        assert!((min_entropy_k(&psi).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn p_entropy_equals_k_entropy() {
        let map = kmm_map();
        let g = Grid::new(map.k_max(), 511).unwrap();
        let psi = CosPowerState::new(1.0, 1.0).unwrap().to_wavefunction(g).unwrap();
        let rep = to_p_representation(&psi, &map).unwrap();
        assert!((shannon_entropy_p(&rep, &map) - shannon_entropy_k(&psi)).abs() < 1e-8);
    }

    #[test]
    fn parabolic_peak() {
        // Samples of 1 - (x - 0.3)² at -1, 0, 1.
        let v = [1.0 - 1.69, 1.0 - 0.09, 1.0 - 0.49];
        assert!((refined_peak(&v) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn min_entropy_minlength_values() {
        assert!((min_entropy_minlength(&kmm_map()).unwrap() - 2f64.ln()).abs() < 1e-12);
        let free = build_momentum_map(&Modification::unmodified(), 1e-12).unwrap();
        assert_eq!(min_entropy_minlength(&free), None);
    }

    #[test]
    fn truncated_optimizer_approaches_from_above() {
        let target = 2f64.ln();
        let mut prev = f64::INFINITY;
        for n in [2, 4, 8, 16] {
            let opt = min_entropy_truncated(PI / 2.0, n).unwrap();
            assert!(opt.min_entropy > target && opt.min_entropy < prev);
            prev = opt.min_entropy;
        }
    }

    #[test]
    fn bounds_for_beta() {
        let b = entropic_bounds(&kmm_map());
        assert!((b.h_p_max - PI.ln()).abs() < 1e-12 && (b.h_x_lower - 1.0).abs() < 1e-12);
        let map4 = build_momentum_map(&Modification::kmm(4.0).unwrap(), 1e-12).unwrap();
        let b = entropic_bounds(&map4);
        assert!((b.h_p_max - (PI / 2.0).ln()).abs() < 1e-12);
        assert!((b.h_x_lower - (1.0 + 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn ground_state_position_entropy() {
        let g = Grid::new(PI / 2.0, 4095).unwrap();
        let psi = CosPowerState::new(1.0, 1.0).unwrap().to_wavefunction(g).unwrap();
        let direct = shannon_entropy_x(&to_position_adaptive(&psi, WindowPolicy::default()).unwrap());
        let exact = cos_power_hx(1.0, 1.0, WindowPolicy::default()).unwrap();
        assert!((direct.extrapolated() - exact.extrapolated()).abs() < 1e-5);
        assert!((exact.extrapolated() - 1.37416).abs() < 1e-4, "{exact:?}");
        assert!(direct.warning.is_none());
    }
}
