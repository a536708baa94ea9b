//! Ground states of `H_λ = -λ ∂_k² + (1-λ) p(k)²` on `(-k_max, k_max)` with
//! Dirichlet boundary conditions, discretized by the three-point stencil.

mod tridiag;

pub use tridiag::{gershgorin, inverse_iteration, quadratic_form, smallest_eigenvalue_bracket, sturm_count};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modification::MomentumMap;

/// Smallest supported number of interior nodes.
pub const MIN_NODES: usize = 16;

const MAX_INVERSE_ITERATIONS: usize = 100;
const EIGENVECTOR_TOL: f64 = 1e-12;

/// Uniform grid of `n` interior nodes `k_i = -k_max + i h`, `i = 1..=n`,
/// with `h = 2 k_max / (n + 1)`. The endpoints carry the Dirichlet zeros.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    k_max: f64,
    n: usize,
}

impl Grid {
    pub fn new(k_max: f64, n: usize) -> Result<Self> {
        if !(k_max.is_finite() && k_max > 0.0) {
            if k_max == f64::INFINITY {
                return Err(Error::UnboundedDomain);
            }
            return Err(Error::InvalidInput(format!("k_max must be positive and finite, got {k_max}")));
        }
        if n < MIN_NODES {
            return Err(Error::InvalidInput(format!("need at least {MIN_NODES} interior nodes, got {n}")));
        }
        Ok(Self { k_max, n })
    }

    pub fn k_max(&self) -> f64 {
        self.k_max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.k_max / (self.n as f64 + 1.0)
    }

    /// Node `k_i` for zero-based index `j = i - 1`.
    pub fn node(&self, j: usize) -> f64 {
        let h = self.spacing();
        let from_left = (j + 1) as f64 * h;
        let from_right = (self.n - j) as f64 * h;
        // Measure from the nearer edge so symmetric nodes are exact negatives.
        if from_left <= from_right {
            -self.k_max + from_left
        } else {
            self.k_max - from_right
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.node(j)).collect()
    }

    /// The grid with `2n + 1` nodes, i.e. half the spacing.
    pub fn refined(&self) -> Self {
        Self {
            k_max: self.k_max,
            n: 2 * self.n + 1,
        }
    }
}

/// Complex amplitudes at the interior nodes of a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Wavefunction {
    pub grid: Grid,
    pub values: Vec<Complex64>,
}

impl Wavefunction {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidInput(format!(
                "{} amplitudes for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidInput("amplitudes must be finite".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn from_real(grid: Grid, values: &[f64]) -> Result<Self> {
        Self::new(grid, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    /// Sample `psi` at the grid nodes.
    pub fn from_fn(grid: Grid, psi: impl Fn(f64) -> Complex64) -> Result<Self> {
        Self::new(grid, grid.nodes().into_iter().map(psi).collect())
    }

    /// `Σ |ψ_i|² h`.
    pub fn norm_squared(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.spacing()
    }

    pub fn normalized(mut self) -> Result<Self> {
        let norm = self.norm_squared();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::NotNormalized { norm });
        }
        let s = norm.sqrt().recip();
        self.values.iter_mut().for_each(|v| *v *= s);
        Ok(self)
    }

    /// Error unless `|Σ|ψ|²h - 1| <= tol`.
    pub fn check_normalized(&self, tol: f64) -> Result<()> {
        let norm = self.norm_squared();
        if (norm - 1.0).abs() <= tol {
            Ok(())
        } else {
            Err(Error::NotNormalized { norm })
        }
    }

    pub fn density(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }
}

/// Signed momenta `p(k_i)` at the nodes of a grid, reusable across λ.
#[derive(Debug, Clone)]
pub struct MomentumProfile {
    pub grid: Grid,
    pub p: Vec<f64>,
}

impl MomentumProfile {
    /// Evaluates `p` on the left half by distance to the cut-off and mirrors
    /// it, so the potential is exactly symmetric and accurate near the edges.
    pub fn new(map: &MomentumMap, grid: Grid) -> Result<Self> {
        if !map.is_bounded() {
            return Err(Error::UnboundedDomain);
        }
        let k_max = map.k_max();
        if (grid.k_max() - k_max).abs() > 1e-12 * k_max {
            return Err(Error::InvalidInput(format!(
                "grid k_max {} does not match the map cut-off {k_max}",
                grid.k_max()
            )));
        }
        let n = grid.len();
        let h = grid.spacing();
        let mut p = vec![0.0; n];
        for j in 0..n.div_ceil(2) {
            let d = (j + 1) as f64 * h;
            let value = if 2 * (j + 1) == n + 1 { 0.0 } else { -map.p_at_distance(d)? };
            p[j] = value;
            p[n - 1 - j] = -value;
        }
        Ok(Self { grid, p })
    }
}

/// Symmetric tridiagonal matrix of a discretized `H_λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
    /// The potential part of `diag`, kept to evaluate energies without
    /// cancelling against the large stencil terms.
    pub potential: Vec<f64>,
    pub lambda: f64,
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("lambda must lie in (0, 1], got {lambda}")))
    }
}

/// `diag_i = 2λ/h² + (1-λ) p(k_i)²`, `offdiag = -λ/h²`.
///
/// Potentials are only sampled at interior nodes, so the largest value is
/// `(1-λ) p(k_1)²`; that is the cap on the divergent potential.
pub fn assemble_hamiltonian(map: &MomentumMap, lambda: f64, grid: Grid) -> Result<Tridiagonal> {
    check_lambda(lambda)?;
    let profile = MomentumProfile::new(map, grid)?;
    assemble_with_profile(&profile, lambda)
}

pub fn assemble_with_profile(profile: &MomentumProfile, lambda: f64) -> Result<Tridiagonal> {
    check_lambda(lambda)?;
    let h = profile.grid.spacing();
    let kinetic = lambda / (h * h);
    let potential: Vec<f64> = profile.p.iter().map(|p| (1.0 - lambda) * p * p).collect();
    let diag = potential.iter().map(|v| 2.0 * kinetic + v).collect();
    let offdiag = vec![-kinetic; profile.grid.len() - 1];
    Ok(Tridiagonal {
        diag,
        offdiag,
        potential,
        lambda,
    })
}

/// Lowest eigenpair of a discretized `H_λ`.
#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    pub wavefunction: Wavefunction,
    pub lambda: f64,
    /// Richardson-extrapolated energy, once a refinement has been solved.
    pub refinement_estimate: Option<f64>,
}

/// Smallest eigenvalue by Sturm bisection to relative `tol`, eigenvector by
/// inverse iteration. The energy is the Rayleigh quotient of the vector,
/// split into kinetic and potential sums.
pub fn ground_state(h: &Tridiagonal, grid: Grid, tol: f64) -> Result<GroundState> {
    if h.diag.len() != grid.len() || h.offdiag.len() + 1 != grid.len() {
        return Err(Error::InvalidInput("matrix size does not match the grid".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    let (lo, _) = smallest_eigenvalue_bracket(&h.diag, &h.offdiag, tol);
    let (vector, _) = inverse_iteration(&h.diag, &h.offdiag, lo, EIGENVECTOR_TOL, MAX_INVERSE_ITERATIONS)?;
    let energy = if h.potential.len() == h.diag.len() {
        let kinetic = -h.offdiag.first().copied().unwrap_or(0.0);
        let n = vector.len();
        let mut jumps = vector[0] * vector[0] + vector[n - 1] * vector[n - 1];
        jumps += vector.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum::<f64>();
        kinetic * jumps + h.potential.iter().zip(&vector).map(|(v, x)| v * x * x).sum::<f64>()
    } else {
        quadratic_form(&h.diag, &h.offdiag, &vector)
    };
    let scale = grid.spacing().sqrt().recip();
    let values = vector.iter().map(|v| Complex64::new(v * scale, 0.0)).collect();
    Ok(GroundState {
        energy,
        wavefunction: Wavefunction { grid, values },
        lambda: h.lambda,
        refinement_estimate: None,
    })
}

/// Position and momentum variances of a state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Variances {
    pub delta_x: f64,
    pub delta_p: f64,
}

/// `Δx = ⟨x²⟩ - ⟨x⟩²` with `x = i d/dk` and `Δp = ⟨p²⟩ - ⟨p⟩²`.
///
/// `⟨x²⟩` uses forward differences with the Dirichlet zeros, which is the
/// quadratic form of the stencil in [`assemble_hamiltonian`]; ground states
/// therefore satisfy `λΔx + (1-λ)Δp = E` to rounding.
pub fn compute_variances(state: &GroundState, map: &MomentumMap) -> Result<Variances> {
    let profile = MomentumProfile::new(map, state.wavefunction.grid)?;
    variances_with_profile(&state.wavefunction, &profile)
}

pub fn variances_with_profile(psi: &Wavefunction, profile: &MomentumProfile) -> Result<Variances> {
    if psi.grid != profile.grid {
        return Err(Error::InvalidInput("wavefunction and momentum profile use different grids".into()));
    }
    psi.check_normalized(1e-8)?;
    let h = psi.grid.spacing();
    let v = &psi.values;
    let n = v.len();
    let zero = Complex64::new(0.0, 0.0);
    let at = |i: isize| if i < 0 || i >= n as isize { zero } else { v[i as usize] };

    let mut x2 = 0.0;
    let mut x1 = 0.0;
    for i in -1..n as isize {
        x2 += (at(i + 1) - at(i)).norm_sqr();
    }
    for i in 0..n as isize {
        x1 -= 0.5 * (at(i).conj() * (at(i + 1) - at(i - 1))).im;
    }
    x2 /= h;

    let mut p2 = 0.0;
    let mut p1 = 0.0;
    for (amp, p) in v.iter().zip(&profile.p) {
        let w = amp.norm_sqr() * h;
        p1 += p * w;
        p2 += p * p * w;
    }
    Ok(Variances {
        delta_x: x2 - x1 * x1,
        delta_p: p2 - p1 * p1,
    })
}

/// Discretization and tolerance for the refined solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Interior nodes of the coarsest grid; refinements have `2n + 1` and `4n + 3`.
    pub n: usize,
    /// Relative bisection tolerance for the eigenvalue.
    pub tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { n: 4096, tol: 1e-8 }
    }
}

/// Solution at one λ, extrapolated from grids of `n`, `2n + 1` and `4n + 3`
/// interior nodes.
///
/// The energy uses order-2 Richardson on the first two grids. `⟨p²⟩` can
/// converge more slowly, since `p²ψ²` need not vanish at the cut-off (it
/// tends to a constant for the `λ = 1` box state), so `Δp` is extrapolated
/// with the order observed across all three grids. `Δx` then follows from
/// `λΔx + (1-λ)Δp = E`, which therefore holds exactly.
#[derive(Debug, Clone)]
pub struct Solution {
    pub lambda: f64,
    pub energy: f64,
    pub delta_x: f64,
    pub delta_p: f64,
    pub coarse: GroundState,
    pub fine: GroundState,
    /// `|E_extrapolated - E_fine|`, an estimate of the fine-grid error.
    pub error_estimate: f64,
    /// `|Δp_extrapolated - Δp_finest|`.
    pub delta_p_error_estimate: f64,
}

fn richardson(coarse: f64, fine: f64) -> f64 {
    (4.0 * fine - coarse) / 3.0
}

/// Extrapolate a sequence at spacings `h, h/2, h/4` using the observed
/// convergence ratio, clamped to orders between about 0.6 and 3.
fn richardson_observed(d0: f64, d1: f64, d2: f64) -> f64 {
    let ratio = (d0 - d1) / (d1 - d2);
    let ratio = if ratio.is_finite() { ratio.clamp(1.5, 8.0) } else { 4.0 };
    d2 + (d2 - d1) / (ratio - 1.0)
}

/// Momentum profiles on the three nested grids, for repeated solves at
/// different λ.
#[derive(Debug, Clone)]
pub struct Solver {
    config: SolverConfig,
    coarse: MomentumProfile,
    fine: MomentumProfile,
    finest: MomentumProfile,
}

impl Solver {
    pub fn new(map: &MomentumMap, config: SolverConfig) -> Result<Self> {
        let grid = Grid::new(map.k_max(), config.n)?;
        Ok(Self {
            config,
            coarse: MomentumProfile::new(map, grid)?,
            fine: MomentumProfile::new(map, grid.refined())?,
            finest: MomentumProfile::new(map, grid.refined().refined())?,
        })
    }

    pub fn config(&self) -> SolverConfig {
        self.config
    }

    /// Ground state on the coarse grid only.
    pub fn ground_state(&self, lambda: f64) -> Result<(GroundState, Variances)> {
        Self::solve_on(&self.coarse, lambda, self.config.tol)
    }

    fn solve_on(profile: &MomentumProfile, lambda: f64, tol: f64) -> Result<(GroundState, Variances)> {
        let h = assemble_with_profile(profile, lambda)?;
        let state = ground_state(&h, profile.grid, tol)?;
        let var = variances_with_profile(&state.wavefunction, profile)?;
        Ok((state, var))
    }

    pub fn solve(&self, lambda: f64) -> Result<Solution> {
        let (coarse, vc) = Self::solve_on(&self.coarse, lambda, self.config.tol)?;
        let (mut fine, vf) = Self::solve_on(&self.fine, lambda, self.config.tol)?;
        let (_, vff) = Self::solve_on(&self.finest, lambda, self.config.tol)?;
        let energy = richardson(coarse.energy, fine.energy);
        fine.refinement_estimate = Some(energy);
        let delta_p = richardson_observed(vc.delta_p, vf.delta_p, vff.delta_p);
        let delta_x = (energy - (1.0 - lambda) * delta_p) / lambda;
        Ok(Solution {
            lambda,
            energy,
            delta_x,
            delta_p,
            error_estimate: (energy - fine.energy).abs(),
            delta_p_error_estimate: (delta_p - vff.delta_p).abs(),
            coarse,
            fine,
        })
    }
}

/// One refined solve; prefer [`Solver`] when sweeping λ.
pub fn solve(map: &MomentumMap, lambda: f64, config: SolverConfig) -> Result<Solution> {
    check_lambda(lambda)?;
    Solver::new(map, config)?.solve(lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modification::{build_momentum_map, Modification};
    use std::f64::consts::PI;

    fn kmm_map() -> MomentumMap {
        build_momentum_map(&Modification::kmm(1.0).unwrap(), 1e-12).unwrap()
    }

    #[test]
    fn grid_nodes_are_symmetric() {
        let g = Grid::new(PI / 2.0, 17).unwrap();
        let k = g.nodes();
        for j in 0..17 {
            assert_eq!(k[j], -k[16 - j]);
        }
        assert_eq!(k[8], 0.0);
        assert!((k[0] + PI / 2.0 - g.spacing()).abs() < 1e-15);
    }

    #[test]
    fn grid_rejects_small_or_unbounded() {
        assert!(Grid::new(1.0, 15).is_err());
        assert!(matches!(Grid::new(f64::INFINITY, 64), Err(Error::UnboundedDomain)));
    }

    #[test]
    fn stencil_entries() {
        let map = kmm_map();
        let grid = Grid::new(map.k_max(), 64).unwrap();
        let h = grid.spacing();
        let t = assemble_hamiltonian(&map, 0.3, grid).unwrap();
        for (j, k) in grid.nodes().into_iter().enumerate() {
            let v = 0.7 * k.tan().powi(2);
            assert!((t.diag[j] - (0.6 / (h * h) + v)).abs() < 1e-10 * t.diag[j]);
        }
        assert!(t.offdiag.iter().all(|&e| e == -0.3 / (h * h)));
    }

    #[test]
    fn particle_in_a_box() {
        let map = kmm_map();
        let grid = Grid::new(map.k_max(), 400).unwrap();
        let t = assemble_hamiltonian(&map, 1.0, grid).unwrap();
        let gs = ground_state(&t, grid, 1e-12).unwrap();
        let h = grid.spacing();
        let exact = 2.0 / (h * h) * (1.0 - (PI / 401.0).cos());
        assert!((gs.energy - exact).abs() < 1e-10);
        for (k, v) in grid.nodes().into_iter().zip(&gs.wavefunction.values) {
            assert!((v.re - k.cos() * (2.0 / PI).sqrt()).abs() < 1e-4);
        }
    }

    #[test]
    fn kmm_half_lambda() {
        let sol = solve(&kmm_map(), 0.5, SolverConfig { n: 1024, tol: 1e-10 }).unwrap();
        let gamma = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((sol.energy - gamma / 2.0).abs() < 1e-5, "{}", sol.energy);
        assert!((sol.delta_x - gamma * gamma / (2.0 * gamma - 1.0)).abs() < 1e-4, "{}", sol.delta_x);
        assert!((sol.delta_p - 1.0 / (2.0 * gamma - 1.0)).abs() < 1e-4, "{}", sol.delta_p);
    }

    #[test]
    fn variance_identity_and_shape() {
        let map = kmm_map();
        let solver = Solver::new(&map, SolverConfig { n: 256, tol: 1e-10 }).unwrap();
        for lambda in [0.05, 0.4, 0.9] {
            let (gs, v) = solver.ground_state(lambda).unwrap();
            let lhs = lambda * v.delta_x + (1.0 - lambda) * v.delta_p;
            assert!((lhs - gs.energy).abs() < 1e-10 * gs.energy);
            let vals = &gs.wavefunction.values;
            assert!(vals.iter().all(|v| v.re > 0.0 && v.im == 0.0));
            for j in 0..vals.len() {
                assert!((vals[j].re - vals[vals.len() - 1 - j].re).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn complex_phase_shifts_position_mean() {
        // ψ e^{-i a k} has ⟨x⟩ shifted by a but unchanged variance.
        let map = kmm_map();
        let grid = Grid::new(map.k_max(), 2000).unwrap();
        let profile = MomentumProfile::new(&map, grid).unwrap();
        let base = Wavefunction::from_fn(grid, |k| Complex64::new(k.cos() * (2.0 / PI).sqrt(), 0.0)).unwrap();
        let shifted = Wavefunction::from_fn(grid, |k| Complex64::from_polar(k.cos() * (2.0 / PI).sqrt(), -0.7 * k)).unwrap();
        let a = variances_with_profile(&base, &profile).unwrap();
        let b = variances_with_profile(&shifted, &profile).unwrap();
        assert!((a.delta_x - 1.0).abs() < 1e-5);
        assert!((a.delta_x - b.delta_x).abs() < 1e-5, "{a:?} {b:?}");
    }
}
