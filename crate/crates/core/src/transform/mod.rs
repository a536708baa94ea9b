//! Position representation of band-limited states:
//! `φ(x) = (2π)^{-1/2} ∫_{-k_max}^{k_max} e^{ikx} ψ(k) dk`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::spectral::{Grid, Wavefunction};

const NORM_TOL: f64 = 1e-8;
const MIN_POINTS: usize = 128;

/// `|φ(x)|²` sampled on a symmetric uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionDensity {
    pub x_nodes: Vec<f64>,
    pub density: Vec<f64>,
    /// Upper bound on the mass outside the sampled window.
    pub tail_mass_bound: f64,
    /// Constant `c` of the envelope `|φ(x)|² <= c / x²`.
    pub envelope: f64,
}

impl PositionDensity {
    /// Half-width of the sampled window.
    pub fn window(&self) -> f64 {
        self.x_nodes.last().copied().unwrap_or(0.0)
    }

    pub fn spacing(&self) -> f64 {
        self.x_nodes[1] - self.x_nodes[0]
    }

    /// Trapezoidal integral of `g(x, ρ(x))` over `|x| <= half_width`.
    pub fn integrate(&self, half_width: f64, g: impl Fn(f64, f64) -> f64) -> f64 {
        let dx = self.spacing();
        let mut acc = 0.0;
        let mut inside = 0usize;
        let mut first = None;
        let mut last = 0;
        for (j, (&x, &rho)) in self.x_nodes.iter().zip(&self.density).enumerate() {
            if x.abs() <= half_width * (1.0 + 1e-12) {
                acc += g(x, rho);
                inside += 1;
                first.get_or_insert(j);
                last = j;
            }
        }
        if inside == 0 {
            return 0.0;
        }
        let first = first.unwrap_or(0);
        acc -= 0.5 * (g(self.x_nodes[first], self.density[first]) + g(self.x_nodes[last], self.density[last]));
        acc * dx
    }

    /// Mass captured by the whole window.
    pub fn mass(&self) -> f64 {
        self.integrate(f64::INFINITY, |_, rho| rho)
    }

    /// Envelope bound on the mass outside `|x| <= half_width`.
    pub fn tail_mass_beyond(&self, half_width: f64) -> f64 {
        2.0 * self.envelope / half_width
    }
}

/// Sampling policy for [`position_density`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowPolicy {
    /// Initial half-width, in units of `1/k_max`.
    pub initial: f64,
    /// Grid spacing, in units of `π/k_max` (the Nyquist step of `|φ|²`).
    pub spacing: f64,
    /// Stop doubling once the captured mass reaches `1 - mass_deficit`.
    pub mass_deficit: f64,
    /// Largest half-width, in units of `1/k_max`.
    pub max_window: f64,
}

impl Default for WindowPolicy {
    fn default() -> Self {
        Self {
            initial: 40.0,
            spacing: 1.0 / 32.0,
            mass_deficit: 1e-6,
            max_window: 4096.0,
        }
    }
}

/// `φ(x)` by the trapezoid rule over the grid (the Dirichlet endpoints
/// contribute zero) plus the leading Euler–Maclaurin endpoint term
/// `-(h²/12)[ψ'(k_max)e^{ik_max x} - ψ'(-k_max)e^{-ik_max x}]`, with one-sided
/// second-order slopes. Smooth states are then accurate to `O(h⁴)`.
pub fn phi_at(state: &Wavefunction, x: f64) -> Complex64 {
    let grid = state.grid;
    let h = grid.spacing();
    let step = Complex64::from_polar(1.0, h * x);
    let mut z = Complex64::from_polar(1.0, grid.node(0) * x);
    let mut acc = Complex64::new(0.0, 0.0);
    for v in &state.values {
        acc += v * z;
        z *= step;
    }
    let v = &state.values;
    let n = v.len();
    let slope_right = (v[n - 2] - 4.0 * v[n - 1]) / (2.0 * h);
    let slope_left = (4.0 * v[0] - v[1]) / (2.0 * h);
    let k = grid.k_max();
    let edge = slope_right * Complex64::from_polar(1.0, k * x) - slope_left * Complex64::from_polar(1.0, -k * x);
    (acc * h - edge * (h * h / 12.0)) / (2.0 * PI).sqrt()
}

/// Total variation of ψ including the jumps from and to the Dirichlet zeros.
pub fn total_variation(state: &Wavefunction) -> f64 {
    let v = &state.values;
    let inner: f64 = v.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
    inner + v.first().map_or(0.0, |a| a.norm()) + v.last().map_or(0.0, |a| a.norm())
}

/// Integration by parts gives `|φ(x)| <= TV(ψ) / (√(2π) |x|)`.
fn envelope_from_tv(tv: f64) -> f64 {
    tv * tv / (2.0 * PI)
}

/// Largest window half-width for which the grid sum of `state` is free of
/// visible aliasing (the sum is periodic in `x` with period `2π/h`).
pub fn alias_free_window(grid: Grid) -> f64 {
    2.0 * PI / grid.spacing() / 16.0
}

/// `|φ|²` on `m` equally spaced points of `[-x_max, x_max]`.
pub fn to_position(state: &Wavefunction, x_max: f64, m: usize) -> Result<PositionDensity> {
    state.check_normalized(NORM_TOL)?;
    if m < MIN_POINTS {
        return Err(Error::InvalidInput(format!("need at least {MIN_POINTS} x points, got {m}")));
    }
    if !(x_max > 0.0 && x_max.is_finite()) {
        return Err(Error::InvalidInput(format!("x_max must be positive, got {x_max}")));
    }
    let x_nodes: Vec<f64> = (0..m)
        .map(|j| -x_max + 2.0 * x_max * j as f64 / (m - 1) as f64)
        .collect();
    let density = x_nodes.iter().map(|&x| phi_at(state, x).norm_sqr()).collect();
    let envelope = envelope_from_tv(total_variation(state));
    Ok(PositionDensity {
        x_nodes,
        density,
        tail_mass_bound: 2.0 * envelope / x_max,
        envelope,
    })
}

/// Density with an adaptive window: starting from `policy.initial / k_max`,
/// the half-width doubles until the captured mass reaches
/// `1 - policy.mass_deficit` or the cap is hit. The returned window is twice
/// that half-width (within the cap) so that [`position_variance`] can compare
/// moments under doubling.
pub fn position_density(
    phi: impl Fn(f64) -> Complex64,
    k_max: f64,
    total_variation: f64,
    policy: WindowPolicy,
    cap: f64,
) -> PositionDensity {
    let dx = policy.spacing * PI / k_max;
    let cap = cap.min(policy.max_window / k_max);
    let mut half = (policy.initial / k_max).min(cap);
    let mut pos: Vec<f64> = Vec::new();
    let mut neg: Vec<f64> = Vec::new();
    let extend = |pos: &mut Vec<f64>, neg: &mut Vec<f64>, half: f64| {
        let count = (half / dx).round() as usize;
        for j in pos.len()..=count {
            let x = j as f64 * dx;
            pos.push(phi(x).norm_sqr());
            neg.push(if j == 0 { pos[0] } else { phi(-x).norm_sqr() });
        }
    };
    let mass_within = |pos: &[f64], neg: &[f64]| {
        let n = pos.len();
        let s: f64 = pos[1..].iter().sum::<f64>() + neg[1..].iter().sum::<f64>() + pos[0];
        (s - 0.5 * (pos[n - 1] + neg[n - 1])) * dx
    };
    extend(&mut pos, &mut neg, half);
    while mass_within(&pos, &neg) < 1.0 - policy.mass_deficit && 2.0 * half <= cap {
        half *= 2.0;
        extend(&mut pos, &mut neg, half);
    }
    let outer = (2.0 * half).min(cap);
    extend(&mut pos, &mut neg, outer);

    let n = pos.len();
    let mut x_nodes = Vec::with_capacity(2 * n - 1);
    let mut density = Vec::with_capacity(2 * n - 1);
    for j in (1..n).rev() {
        x_nodes.push(-(j as f64) * dx);
        density.push(neg[j]);
    }
    for (j, &rho) in pos.iter().enumerate() {
        x_nodes.push(j as f64 * dx);
        density.push(rho);
    }
    let envelope = envelope_from_tv(total_variation);
    let window = (n - 1) as f64 * dx;
    PositionDensity {
        x_nodes,
        density,
        tail_mass_bound: 2.0 * envelope / window,
        envelope,
    }
}

/// [`position_density`] for a sampled state, evaluated by direct summation.
pub fn to_position_adaptive(state: &Wavefunction, policy: WindowPolicy) -> Result<PositionDensity> {
    state.check_normalized(NORM_TOL)?;
    let grid = state.grid;
    Ok(position_density(
        |x| phi_at(state, x),
        grid.k_max(),
        total_variation(state),
        policy,
        alias_free_window(grid),
    ))
}

/// Second moment of a density, or divergence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PositionVariance {
    Finite(f64),
    /// The windowed moment grew by `growth` (relative) when the window doubled.
    Divergent { growth: f64 },
}

impl PositionVariance {
    pub fn value(self) -> Option<f64> {
        match self {
            Self::Finite(v) => Some(v),
            Self::Divergent { .. } => None,
        }
    }

    pub fn is_divergent(self) -> bool {
        matches!(self, Self::Divergent { .. })
    }
}

/// Relative growth of the windowed second moment under doubling above which
/// it is declared divergent.
pub const DIVERGENCE_GROWTH: f64 = 0.05;

/// `∫ x² ρ - (∫ x ρ)²`, from the moments over the full window `W` and over
/// `W/2`.
///
/// A density decaying like `x^{-4}` (the generic band-limited case) leaves a
/// tail `A/W` in the windowed moment; the value `2M(W) - M(W/2)` removes it.
/// Growth by more than [`DIVERGENCE_GROWTH`] flags divergence.
pub fn position_variance(d: &PositionDensity) -> PositionVariance {
    let w = d.window();
    let mass = d.mass();
    let mean = d.integrate(f64::INFINITY, |x, rho| x * rho) / mass;
    let full = d.integrate(w, |x, rho| x * x * rho);
    let half = d.integrate(0.5 * w, |x, rho| x * x * rho);
    let growth = (full - half) / half;
    if !(growth <= DIVERGENCE_GROWTH) {
        return PositionVariance::Divergent { growth };
    }
    PositionVariance::Finite(2.0 * full - half - mean * mean)
}

/// Box eigenmode `ψ_n(k) = sin(πn(k - k_max)/(2k_max)) / √k_max` and its
/// Fourier transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxMode {
    pub n: usize,
    pub k_max: f64,
}

/// `sin(t)/t` with the removable point handled by its series.
fn sinc(t: f64) -> f64 {
    if t.abs() < 1e-4 {
        1.0 - t * t / 6.0
    } else {
        t.sin() / t
    }
}

impl BoxMode {
    pub fn new(n: usize, k_max: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("box modes start at n = 1".into()));
        }
        if !(k_max > 0.0 && k_max.is_finite()) {
            return Err(Error::UnboundedDomain);
        }
        Ok(Self { n, k_max })
    }

    fn wavenumber(&self) -> f64 {
        PI * self.n as f64 / (2.0 * self.k_max)
    }

    pub fn psi(&self, k: f64) -> f64 {
        if k.abs() >= self.k_max {
            return 0.0;
        }
        (self.wavenumber() * (k - self.k_max)).sin() / self.k_max.sqrt()
    }

    /// Closed-form transform
    /// `(2i)^{-1}(2πk_max)^{-1/2} [e^{-iπn/2} S(x+a) - e^{iπn/2} S(x-a)]`
    /// with `a = πn/(2k_max)` and `S(y) = 2k_max sinc(k_max y)`.
    pub fn phi(&self, x: f64) -> Complex64 {
        let a = self.wavenumber();
        let k = self.k_max;
        let s_plus = 2.0 * k * sinc(k * (x + a));
        let s_minus = 2.0 * k * sinc(k * (x - a));
        let half_turn = 0.5 * PI * self.n as f64;
        let bracket = Complex64::from_polar(s_plus, -half_turn) - Complex64::from_polar(s_minus, half_turn);
        bracket / Complex64::new(0.0, 2.0) / (2.0 * PI * k).sqrt()
    }

    /// The same transform in phase form:
    /// `φ_n(x) = e^{iπ(n+1)/2} b √(2k_max/π) sin(t - b) / ((t - b)(t + b))`
    /// with `t = k_max x`, `b = πn/2`. The zeros of the denominator are
    /// removable and handled through `sinc`.
    pub fn phi_phase_form(&self, x: f64) -> Complex64 {
        let b = 0.5 * PI * self.n as f64;
        let t = self.k_max * x;
        let ratio = if (t - b).abs() <= (t + b).abs() {
            sinc(t - b) / (t + b)
        } else {
            // sin(t - b) = (-1)^n sin(t + b)
            let sign = if self.n.is_multiple_of(2) { 1.0 } else { -1.0 };
            sign * sinc(t + b) / (t - b)
        };
        let phase = Complex64::from_polar(1.0, 0.5 * PI * (self.n + 1) as f64);
        phase * (b * (2.0 * self.k_max / PI).sqrt() * ratio)
    }
}

/// The `n`-th box mode sampled on `grid`, plus its closed form.
pub fn box_mode(n: usize, grid: Grid) -> Result<(Wavefunction, BoxMode)> {
    let mode = BoxMode::new(n, grid.k_max())?;
    let psi = Wavefunction::from_fn(grid, |k| Complex64::new(mode.psi(k), 0.0))?;
    Ok((psi, mode))
}

/// Finite superposition `ψ = Σ_n c_n ψ_n` of box modes, `n = 1..`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSuperposition {
    pub k_max: f64,
    pub coefficients: Vec<Complex64>,
}

impl ModeSuperposition {
    /// Normalizes the coefficients (the modes are orthonormal).
    pub fn new(k_max: f64, coefficients: Vec<Complex64>) -> Result<Self> {
        if !(k_max > 0.0 && k_max.is_finite()) {
            return Err(Error::UnboundedDomain);
        }
        let norm: f64 = coefficients.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::NotNormalized { norm: norm * norm });
        }
        Ok(Self {
            k_max,
            coefficients: coefficients.into_iter().map(|c| c / norm).collect(),
        })
    }

    fn modes(&self) -> impl Iterator<Item = (BoxMode, Complex64)> + '_ {
        self.coefficients
            .iter()
            .enumerate()
            .map(|(i, &c)| (BoxMode { n: i + 1, k_max: self.k_max }, c))
    }

    pub fn psi(&self, k: f64) -> Complex64 {
        self.modes().map(|(m, c)| c * m.psi(k)).sum()
    }

    /// Closed-form `φ(x)`, sharing `sin(k_max x)` and `cos(k_max x)` across
    /// modes.
    pub fn phi(&self, x: f64) -> Complex64 {
        let k = self.k_max;
        let (s, c) = (k * x).sin_cos();
        let scale = 1.0 / (2.0 * (2.0 * PI * k).sqrt());
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, &coef) in self.coefficients.iter().enumerate() {
            let n = i + 1;
            let a = PI * n as f64 / (2.0 * k);
            // sin(k x ± πn/2) cycles through ±sin, ±cos.
            let sin_shift = |sign: i64| -> f64 {
                match ((sign * n as i64).rem_euclid(4)) as u8 {
                    0 => s,
                    1 => c,
                    2 => -s,
                    _ => -c,
                }
            };
            let term = |y: f64, sign: i64| -> f64 {
                if (k * y).abs() < 1e-4 {
                    2.0 * k * sinc(k * y)
                } else {
                    2.0 * sin_shift(sign) / y
                }
            };
            let s_plus = term(x + a, 1);
            let s_minus = term(x - a, -1);
            // e^{∓iπn/2} = (∓i)^n, exactly.
            let i_pow = match n % 4 {
                0 => Complex64::new(1.0, 0.0),
                1 => Complex64::new(0.0, 1.0),
                2 => Complex64::new(-1.0, 0.0),
                _ => Complex64::new(0.0, -1.0),
            };
            let bracket = i_pow.conj() * s_plus - i_pow * s_minus;
            // bracket / (2i) = -i bracket / 2
            acc += coef * Complex64::new(bracket.im, -bracket.re);
        }
        acc * scale
    }

    pub fn to_wavefunction(&self, grid: Grid) -> Result<Wavefunction> {
        if (grid.k_max() - self.k_max).abs() > 1e-12 * self.k_max {
            return Err(Error::InvalidInput("grid and superposition use different k_max".into()));
        }
        Wavefunction::from_fn(grid, |k| self.psi(k))
    }

    /// `Σ|c_n|² (πn / 2k_max)²`, i.e. `∫|ψ'|²`.
    pub fn second_moment_x(&self) -> f64 {
        self.modes().map(|(m, c)| c.norm_sqr() * m.wavenumber().powi(2)).sum()
    }

    /// Density with the closed-form transform; no aliasing cap applies.
    pub fn position_density(&self, total_variation: f64, policy: WindowPolicy) -> PositionDensity {
        position_density(|x| self.phi(x), self.k_max, total_variation, policy, f64::INFINITY)
    }
}

/// `1 / (Γ(a) Γ(b))`, finite for all real arguments, with `b` possibly far
/// negative (reflection through `Γ(b)Γ(1-b) = π / sin(πb)`).
fn recip_gamma_product(a: f64, b: f64) -> f64 {
    let part = |z: f64| -> (f64, f64) {
        // (sign, log|1/Γ(z)|)
        if z >= 0.5 {
            (1.0, -ln_gamma(z))
        } else {
            let s = (PI * z).sin() / PI;
            (s.signum(), s.abs().ln() + ln_gamma(1.0 - z))
        }
    };
    let (sa, la) = part(a);
    let (sb, lb) = part(b);
    if sa == 0.0 || sb == 0.0 {
        return 0.0;
    }
    sa * sb * (la + lb).exp()
}

/// The state `ψ(k) ∝ cos(√β k)^γ` on `(-k_max, k_max)`, `k_max = π/(2√β)`,
/// with its exact transform
/// `∫_{-π/2}^{π/2} cos^γ(q) e^{iqy} dq = πΓ(γ+1) / (2^γ Γ(1+(γ+y)/2) Γ(1+(γ-y)/2))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CosPowerState {
    pub beta: f64,
    pub gamma: f64,
}

impl CosPowerState {
    pub fn new(beta: f64, gamma: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidInput(format!("beta must be positive, got {beta}")));
        }
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidInput(format!("gamma must be non-negative, got {gamma}")));
        }
        Ok(Self { beta, gamma })
    }

    pub fn k_max(&self) -> f64 {
        0.5 * PI / self.beta.sqrt()
    }

    /// `∫ cos(√β k)^{2γ} dk = √(π/β) Γ(γ+1/2) / Γ(γ+1)`.
    pub fn norm_squared(&self) -> f64 {
        (PI / self.beta).sqrt() * (ln_gamma(self.gamma + 0.5) - ln_gamma(self.gamma + 1.0)).exp()
    }

    /// Normalized amplitude.
    pub fn psi(&self, k: f64) -> f64 {
        if k.abs() >= self.k_max() {
            return 0.0;
        }
        (self.beta.sqrt() * k).cos().powf(self.gamma) / self.norm_squared().sqrt()
    }

    /// Normalized transform; real because ψ is even.
    pub fn phi(&self, x: f64) -> f64 {
        let g = self.gamma;
        let y = x / self.beta.sqrt();
        let integral = PI * (ln_gamma(g + 1.0) - g * std::f64::consts::LN_2).exp()
            * recip_gamma_product(1.0 + 0.5 * (g + y), 1.0 + 0.5 * (g - y));
        integral / (self.beta.sqrt() * (2.0 * PI).sqrt() * self.norm_squared().sqrt())
    }

    pub fn to_wavefunction(&self, grid: Grid) -> Result<Wavefunction> {
        Wavefunction::from_fn(grid, |k| Complex64::new(self.psi(k), 0.0))?.normalized()
    }

    /// `TV(ψ) = 2 max ψ` for `γ > 0`; a uniform state jumps twice.
    pub fn total_variation(&self) -> f64 {
        2.0 / self.norm_squared().sqrt()
    }

    /// Density through the exact transform; no aliasing cap applies.
    pub fn position_density(&self, policy: WindowPolicy) -> PositionDensity {
        position_density(
            |x| Complex64::new(self.phi(x), 0.0),
            self.k_max(),
            self.total_variation(),
            policy,
            f64::INFINITY,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;

    fn grid(n: usize) -> Grid {
        Grid::new(PI / 2.0, n).unwrap()
    }

    #[test]
    fn modes_are_orthonormal() {
        let g = grid(2047);
        let modes: Vec<Wavefunction> = (1..=8).map(|n| box_mode(n, g).unwrap().0).collect();
        for (i, a) in modes.iter().enumerate() {
            for (j, b) in modes.iter().enumerate() {
                let ip: Complex64 = a.values.iter().zip(&b.values).map(|(x, y)| x.conj() * y).sum::<Complex64>() * g.spacing();
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((ip.re - expected).abs() < 1e-10 && ip.im.abs() < 1e-12, "{i} {j} {ip}");
            }
        }
    }

    #[test]
    fn closed_form_matches_quadrature() {
        let k = 1.3;
        for n in 1..=5 {
            let mode = BoxMode::new(n, k).unwrap();
            for x in [-7.3, -1.2, 0.0, 0.4, PI * n as f64 / (2.0 * k), 11.0] {
                let re = integrate(|q| mode.psi(q) * (q * x).cos(), -k, k, 1e-14, 1e-13, 200).unwrap().value;
                let im = integrate(|q| mode.psi(q) * (q * x).sin(), -k, k, 1e-14, 1e-13, 200).unwrap().value;
                let oracle = Complex64::new(re, im) / (2.0 * PI).sqrt();
                let phi = mode.phi(x);
                assert!((phi - oracle).norm() < 1e-12, "n {n} x {x}: {phi} vs {oracle}");
                assert!((phi - mode.phi_phase_form(x)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn superposition_matches_modes() {
        let coefs = vec![
            Complex64::new(0.3, -0.1),
            Complex64::new(-0.2, 0.5),
            Complex64::new(0.7, 0.0),
            Complex64::new(0.0, -0.4),
            Complex64::new(0.1, 0.1),
        ];
        let s = ModeSuperposition::new(PI / 2.0, coefs).unwrap();
        for x in [-3.0, -1.0, 0.0, 1.0, 2.5, 40.0] {
            let direct: Complex64 = s.modes().map(|(m, c)| c * m.phi(x)).sum();
            assert!((s.phi(x) - direct).norm() < 1e-13);
        }
        for n in 1..=5 {
            let a = PI * n as f64 / PI;
            let direct: Complex64 = s.modes().map(|(m, c)| c * m.phi(a)).sum();
            assert!((s.phi(a) - direct).norm() < 1e-12);
        }
    }

    #[test]
    fn sum_of_origin_densities_approaches_k_over_pi() {
        let k = PI / 2.0;
        let mut prev = 0.0;
        for n in 1..=400 {
            let v = BoxMode::new(n, k).unwrap().phi(0.0).norm_sqr();
            prev += v;
        }
        assert!((prev - k / PI).abs() < 2e-3, "{prev}");
    }

    #[test]
    fn direct_sum_matches_closed_form() {
        let g = grid(4095);
        for n in [1, 4, 8] {
            let (psi, mode) = box_mode(n, g).unwrap();
            for x in [0.0, 0.9, -5.5, 30.0] {
                assert!((phi_at(&psi, x) - mode.phi(x)).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn ground_mode_density_is_even_and_peaked() {
        let (psi, _) = box_mode(1, grid(1023)).unwrap();
        let d = to_position(&psi, 20.0, 401).unwrap();
        let m = d.density.len();
        for j in 0..m {
            assert!((d.density[j] - d.density[m - 1 - j]).abs() < 1e-14);
        }
        let peak = d.density.iter().cloned().fold(0.0, f64::max);
        assert_eq!(peak, d.density[m / 2]);
    }

    #[test]
    fn ground_mode_variance_is_one() {
        let (psi, _) = box_mode(1, grid(4095)).unwrap();
        let d = to_position_adaptive(&psi, WindowPolicy::default()).unwrap();
        let mass = d.mass();
        assert!(mass <= 1.0 + 1e-6 && mass + d.tail_mass_bound >= 1.0 - 1e-6);
        let v = position_variance(&d).value().unwrap();
        assert!((v - 1.0).abs() < 1e-3, "{v}");
    }

    #[test]
    fn heavy_tailed_state_diverges() {
        let g = grid(4095);
        let psi = Wavefunction::from_fn(g, |k| Complex64::new(k.cos().powf(0.4), 0.0))
            .unwrap()
            .normalized()
            .unwrap();
        let d = to_position_adaptive(&psi, WindowPolicy::default()).unwrap();
        assert!(position_variance(&d).is_divergent());
    }

    #[test]
    fn rejects_unnormalized() {
        let g = grid(63);
        let psi = Wavefunction::from_fn(g, |_| Complex64::new(2.0, 0.0)).unwrap();
        assert!(matches!(to_position(&psi, 10.0, 256), Err(Error::NotNormalized { .. })));
    }

    #[test]
    fn cos_power_transform_matches_quadrature() {
        for (beta, gamma) in [(1.0, 1.0), (1.0, 0.5), (2.0, 0.3), (0.5, 3.0), (1.0, 1e-6)] {
            let st = CosPowerState::new(beta, gamma).unwrap();
            let k = st.k_max();
            for x in [0.0, 0.7, -2.0, 9.5, 60.0] {
                let re = integrate(|q| st.psi(q) * (q * x).cos(), -k, k, 1e-15, 1e-13, 400).unwrap().value;
                let oracle = re / (2.0 * PI).sqrt();
                assert!((st.phi(x) - oracle).abs() < 1e-10, "beta {beta} gamma {gamma} x {x}: {} vs {oracle}", st.phi(x));
            }
        }
    }

    #[test]
    fn cos_power_far_tail_is_finite() {
        let st = CosPowerState::new(1.0, 0.5).unwrap();
        for x in [1e3, 2.5e3 + 0.3, 1e4] {
            let v = st.phi(x);
            assert!(v.is_finite() && v.abs() < 10.0 / x.powf(1.5));
        }
    }
}
