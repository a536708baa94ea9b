//! Random superpositions of low box modes and the region checks run over
//! them.
//!
//! Every state is drawn from its own ChaCha stream, keyed by the scan seed
//! and selected by the state index, so records can be computed in any order
//! and still be bit-identical between runs.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entropy::{bb_bound, cos_power_hx, entropic_bounds, shannon_entropy_k, shannon_entropy_x};
use crate::error::{Error, Result};
use crate::modification::{ModificationKind, MomentumMap};
use crate::quadrature::integrate;
use crate::spectral::Grid;
use crate::tradeoff::{dominance_violations, lower_convex_hull, suboptimal_bound, TradeoffCurve};
use crate::transform::{total_variation, ModeSuperposition, WindowPolicy};

pub const DEFAULT_STATE_COUNT: usize = 10_000;
pub const DEFAULT_MODE_COUNT: usize = 12;
/// Interior nodes of the `k` grid used for `h_k`.
pub const DEFAULT_K_NODES: usize = 2047;

/// Margins applied by [`region_report`].
pub const CEILING_TOL: f64 = 1e-6;
pub const BB_TOL: f64 = 1e-4;
pub const HEISENBERG_REL_TOL: f64 = 1e-9;
pub const BOUND_REL_TOL: f64 = 1e-9;
/// Relative margin for dominance of the trade-off curve, covering the
/// solver's discretization error.
pub const DOMINANCE_REL_TOL: f64 = 1e-5;

#[derive(Debug, Clone)]
pub struct ScanConfig {
    pub state_count: usize,
    /// Number of box modes superposed, `n = 1..=mode_count`.
    pub mode_count: usize,
    pub seed: u64,
    pub map: MomentumMap,
    pub k_nodes: usize,
    pub window: WindowPolicy,
}

impl ScanConfig {
    pub fn new(map: MomentumMap, state_count: usize, mode_count: usize, seed: u64) -> Result<Self> {
        let cfg = Self {
            state_count,
            mode_count,
            seed,
            map,
            k_nodes: DEFAULT_K_NODES,
            window: WindowPolicy::default(),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.state_count == 0 {
            return Err(Error::InvalidInput("a scan needs at least one state".into()));
        }
        if self.mode_count == 0 {
            return Err(Error::InvalidInput("a scan needs at least one mode".into()));
        }
        if !self.map.is_bounded() {
            return Err(Error::UnboundedDomain);
        }
        Grid::new(self.map.k_max(), self.k_nodes)?;
        Ok(())
    }
}

/// State `index` of the scan: complex-Gaussian coefficients on the first
/// `mode_count` modes, normalized.
pub fn random_state(cfg: &ScanConfig, index: usize) -> Result<ModeSuperposition> {
    if index >= cfg.state_count {
        return Err(Error::InvalidInput(format!(
            "state index {index} is outside the scan of {} states",
            cfg.state_count
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index as u64);
    let coefficients = (0..cfg.mode_count)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im)
        })
        .collect();
    ModeSuperposition::new(cfg.map.k_max(), coefficients)
}

/// Matrix elements of `x = i d/dk`, `p` and `p²` between box modes.
#[derive(Debug, Clone)]
struct ModeOperators {
    size: usize,
    /// `∫ψ_m ψ_n'`, antisymmetric.
    derivative: Vec<f64>,
    p: Vec<f64>,
    p2: Vec<f64>,
}

impl ModeOperators {
    fn new(map: &MomentumMap, size: usize) -> Result<Self> {
        let k = map.k_max();
        let w = |n: usize| PI * n as f64 / (2.0 * k);
        let mut derivative = vec![0.0; size * size];
        let mut p = vec![0.0; size * size];
        let mut p2 = vec![0.0; size * size];
        for m in 1..=size {
            for n in m..=size {
                let (i, j) = (m - 1, n - 1);
                if (m + n) % 2 == 1 {
                    let (mf, nf) = (m as f64, n as f64);
                    let dmn = 2.0 * mf * nf / (k * (mf * mf - nf * nf));
                    derivative[i * size + j] = dmn;
                    derivative[j * size + i] = -dmn;
                }
                // ψ_m ψ_n has parity (-1)^{m+n}; p is odd, p² even. Integrate
                // over the right half in the distance d = k_max - k, where
                // ψ_n(k_max - d) = -sin(w_n d)/√k_max.
                let power = if (m + n) % 2 == 0 { 2 } else { 1 };
                let integrand = |d: f64| {
                    let pd = map.p_at_distance(d).unwrap_or(f64::NAN);
                    (w(m) * d).sin() * (w(n) * d).sin() / k * pd.powi(power)
                };
                let q = integrate(integrand, 0.0, k, 1e-14, 1e-12, 400)?;
                if !q.value.is_finite() {
                    return Err(Error::Evaluation { point: k });
                }
                let target = if power == 2 { &mut p2 } else { &mut p };
                target[i * size + j] = 2.0 * q.value;
                target[j * size + i] = 2.0 * q.value;
            }
        }
        Ok(Self { size, derivative, p, p2 })
    }

    /// `Σ conj(c_m) c_n A_mn`.
    fn expectation(&self, a: &[f64], c: &[Complex64]) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, cm) in c.iter().enumerate() {
            let row = &a[m * self.size..(m + 1) * self.size];
            let inner: Complex64 = c.iter().zip(row).map(|(cn, &v)| cn * v).sum();
            acc += cm.conj() * inner;
        }
        acc
    }

    fn variances(&self, state: &ModeSuperposition) -> (f64, f64) {
        let c = &state.coefficients;
        let x1 = (Complex64::i() * self.expectation(&self.derivative, c)).re;
        let dx = state.second_moment_x() - x1 * x1;
        let p1 = self.expectation(&self.p, c).re;
        let dp = self.expectation(&self.p2, c).re - p1 * p1;
        (dx, dp)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRecord {
    pub index: usize,
    pub h_x: f64,
    pub h_k: f64,
    /// Position variance; `NaN` when divergent.
    pub delta_x: f64,
    pub delta_p: f64,
    pub divergent_x: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

fn evaluate(cfg: &ScanConfig, ops: &ModeOperators, grid: Grid, index: usize) -> Result<ScanRecord> {
    let state = random_state(cfg, index)?;
    let psi = state.to_wavefunction(grid)?;
    let h_k = shannon_entropy_k(&psi);
    let density = state.position_density(total_variation(&psi), cfg.window);
    let estimate = shannon_entropy_x(&density);
    let (delta_x, delta_p) = ops.variances(&state);
    // Finite superpositions vanish at the cut-off, so ⟨x²⟩ = ∫|ψ'|² is finite.
    let divergent_x = !delta_x.is_finite();
    Ok(ScanRecord {
        index,
        h_x: estimate.extrapolated(),
        h_k,
        delta_x: if divergent_x { f64::NAN } else { delta_x },
        delta_p,
        divergent_x,
        warning: estimate.warning,
    })
}

/// Entropies and variances of every scanned state, ordered by index.
pub fn scan(cfg: &ScanConfig) -> Result<Vec<ScanRecord>> {
    cfg.validate()?;
    let ops = ModeOperators::new(&cfg.map, cfg.mode_count)?;
    let grid = Grid::new(cfg.map.k_max(), cfg.k_nodes)?;
    (0..cfg.state_count)
        .into_par_iter()
        .map(|i| evaluate(cfg, &ops, grid, i))
        .collect()
}

/// Lower boundary `h_x(h_k)` traced by the family `cos(√β k)^γ`, conjectured
/// to bound the entropic region from below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyBoundary {
    /// `(h_k, h_x)` sorted by increasing `h_k`.
    pub points: Vec<(f64, f64)>,
    /// Interpolation plus quadrature error of the boundary.
    pub tolerance: f64,
}

impl FamilyBoundary {
    /// Evaluates the family on `gammas` (KMM only, `β` from the map).
    pub fn kmm(map: &MomentumMap, gammas: &[f64], policy: WindowPolicy) -> Result<Self> {
        let m = map.modification();
        if m.kind != ModificationKind::Kmm {
            return Err(Error::Unsupported(format!(
                "the cos-power family solves only kmm, not {}",
                m.kind.name()
            )));
        }
        if gammas.len() < 5 {
            return Err(Error::InvalidInput("the family boundary needs at least five γ values".into()));
        }
        let samples: Vec<(f64, f64, f64)> = gammas
            .par_iter()
            .map(|&g| -> Result<(f64, f64, f64)> {
                let e = cos_power_hx(m.beta, g, policy)?;
                let hk = crate::entropy::analytic_hk(m.beta, g)?;
                Ok((hk, e.extrapolated(), e.tail_estimate))
            })
            .collect::<Result<_>>()?;
        let mut points: Vec<(f64, f64)> = samples.iter().map(|s| (s.0, s.1)).collect();
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        // Chord error: compare against interpolation through every other point.
        let coarse: Vec<(f64, f64)> = points.iter().step_by(2).copied().collect();
        let chord = points
            .iter()
            .skip(1)
            .step_by(2)
            .filter_map(|&(hk, hx)| interpolate(&coarse, hk).map(|c| (c - hx).abs()))
            .fold(0.0, f64::max);
        let tail = samples.iter().map(|s| s.2).fold(0.0, f64::max);
        Ok(Self {
            points,
            tolerance: 0.25 * chord + tail + 1e-6,
        })
    }

    /// `h_x` on the boundary at `h_k`, or `None` outside the sampled range.
    pub fn h_x_at(&self, h_k: f64) -> Option<f64> {
        interpolate(&self.points, h_k)
    }
}

fn interpolate(points: &[(f64, f64)], x: f64) -> Option<f64> {
    let j = points.partition_point(|p| p.0 <= x);
    if j == 0 || j == points.len() {
        return (points.last().map(|p| p.0) == Some(x)).then(|| points[points.len() - 1].1);
    }
    let (a, b) = (points[j - 1], points[j]);
    Some(a.1 + (x - a.0) / (b.0 - a.0) * (b.1 - a.1))
}

/// Reference data the scanned records are compared against.
#[derive(Debug, Clone, Default)]
pub struct RegionContext {
    pub curve: Option<TradeoffCurve>,
    pub boundary: Option<FamilyBoundary>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Violations {
    /// `h_x + h_k < log(πe) - 10⁻⁴`.
    pub bb: usize,
    /// `h_k > log(2k_max) + 10⁻⁶`.
    pub ceiling: usize,
    /// Below the cos-power family boundary by more than its tolerance.
    pub conjectured_boundary: Option<usize>,
    /// `Δx Δp < 1/4`.
    pub heisenberg: usize,
    /// `Δx < g(Δp)²/(4Δp)`.
    pub eq13: usize,
    /// Records beating the optimal trade-off curve.
    pub dominance: Option<usize>,
    /// Hull vertices beating the optimal trade-off curve.
    pub hull_dominance: Option<usize>,
}

impl Violations {
    pub fn total(&self) -> usize {
        self.bb
            + self.ceiling
            + self.heisenberg
            + self.eq13
            + self.conjectured_boundary.unwrap_or(0)
            + self.dominance.unwrap_or(0)
            + self.hull_dominance.unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionReport {
    pub states: usize,
    pub divergent_x: usize,
    pub divergent_fraction: f64,
    pub warnings: usize,
    pub violations: Violations,
    /// Indices of the offending records, per check.
    pub offenders: Vec<(String, usize)>,
    /// Lower convex hull of the finite `(Δx, Δp)` records.
    pub hull: Vec<(f64, f64)>,
}

/// Counts bound violations among `records`.
pub fn region_report(records: &[ScanRecord], map: &MomentumMap, ctx: &RegionContext) -> Result<RegionReport> {
    if records.is_empty() {
        return Err(Error::InvalidInput("no records to report on".into()));
    }
    let m = map.modification();
    let ceiling = entropic_bounds(map).h_p_max;
    let bb = bb_bound();
    let mut violations = Violations::default();
    let mut offenders: Vec<(String, usize)> = Vec::new();
    let mut flag = |name: &str, count: &mut usize, index: usize| {
        *count += 1;
        offenders.push((name.to_string(), index));
    };

    let mut boundary_count = 0;
    for r in records {
        if r.h_k > ceiling + CEILING_TOL {
            flag("ceiling", &mut violations.ceiling, r.index);
        }
        if r.h_x + r.h_k < bb - BB_TOL {
            flag("bb", &mut violations.bb, r.index);
        }
        if let Some(b) = &ctx.boundary {
            if b.h_x_at(r.h_k).is_some_and(|hx| r.h_x < hx - b.tolerance) {
                flag("conjectured_boundary", &mut boundary_count, r.index);
            }
        }
        if r.divergent_x {
            continue;
        }
        if r.delta_x * r.delta_p < 0.25 * (1.0 - HEISENBERG_REL_TOL) {
            flag("heisenberg", &mut violations.heisenberg, r.index);
        }
        if r.delta_p > 0.0 && r.delta_x < suboptimal_bound(m, r.delta_p)? * (1.0 - BOUND_REL_TOL) {
            flag("eq13", &mut violations.eq13, r.index);
        }
    }
    violations.conjectured_boundary = ctx.boundary.as_ref().map(|_| boundary_count);

    let finite: Vec<&ScanRecord> = records.iter().filter(|r| !r.divergent_x).collect();
    let cloud: Vec<(f64, f64)> = finite.iter().map(|r| (r.delta_x, r.delta_p)).collect();
    let hull = if cloud.is_empty() { Vec::new() } else { lower_convex_hull(&cloud)? };
    if let Some(curve) = &ctx.curve {
        let beaten = dominance_violations(curve, &cloud, DOMINANCE_REL_TOL);
        for &i in &beaten {
            offenders.push(("dominance".into(), finite[i].index));
        }
        violations.dominance = Some(beaten.len());
        violations.hull_dominance = Some(dominance_violations(curve, &hull, DOMINANCE_REL_TOL).len());
    }

    let divergent = records.len() - finite.len();
    Ok(RegionReport {
        states: records.len(),
        divergent_x: divergent,
        divergent_fraction: divergent as f64 / records.len() as f64,
        warnings: records.iter().filter(|r| r.warning.is_some()).count(),
        violations,
        offenders,
        hull,
    })
}
