//! The momentum map `p(k)` solving `dp/dk = f(p)` with `p(0) = 0`.
//!
//! `k(p) = ∫_0^p dp'/f(p')` is tabulated on a log-spaced grid of `p >= 0`.
//! Below the momentum scale the table stores cumulative sums from zero; above
//! it, the remaining distance to the cut-off `k_max - k(p)` is accumulated from
//! the top down. Storing that distance directly keeps `p(k)` accurate close
//! to `±k_max`, where `p` diverges and `k_max - k` would otherwise be lost to
//! cancellation.

use super::kmax::{compute_kmax, tail_estimate, DIVERGENCE_LIMIT};
use super::Modification;
use crate::error::{Error, Result};
use crate::quadrature::{gk21, integrate};

/// Points per octave of the p-grid.
const POINTS_PER_OCTAVE: usize = 8;
/// First non-zero grid point, relative to the momentum scale.
const GRID_START: f64 = 1e-3;
/// The table is extended until the tail beyond it is below this fraction of `k_max`.
const TAIL_FLOOR: f64 = 1e-17;
/// Extent of the table for unbounded maps, relative to the momentum scale.
const UNBOUNDED_EXTENT: f64 = 1e6;
const MAX_NEWTON: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Row {
    p: f64,
    /// `k(p)`
    k: f64,
    /// `k_max - k(p)`; infinite for unbounded maps.
    remaining: f64,
    /// PCHIP slope `dp/dk` at this node.
    slope: f64,
}

/// Tabulated, invertible, odd map between unmodified momentum `k` and
/// modified momentum `p`. Only `p >= 0` is stored.
#[derive(Debug, Clone)]
pub struct MomentumMap {
    modification: Modification,
    k_max: f64,
    rows: Vec<Row>,
    /// Index of the row at the momentum scale: rows below are forward sums,
    /// rows at or above are backward tails.
    pivot: usize,
    inversion_tolerance: f64,
}

/// Build the momentum map for `m`. `tol` is used for the cut-off
/// quadrature and as the inversion tolerance of the map.
pub fn build_momentum_map(m: &Modification, tol: f64) -> Result<MomentumMap> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    let k_max_estimate = compute_kmax(m, tol)?;
    let bounded = k_max_estimate.is_finite();
    let scale = m.momentum_scale();
    let recip = |p: f64| 1.0 / m.eval(p);

    // p-grid: 0, then geometric from GRID_START * scale.
    let ratio = 2f64.powf(1.0 / POINTS_PER_OCTAVE as f64);
    let mut ps = vec![0.0];
    let mut p = GRID_START * scale;
    let mut pivot = None;
    loop {
        if pivot.is_none() && p >= scale {
            pivot = Some(ps.len());
        }
        ps.push(p);
        let done = if bounded {
            tail_estimate(m, p) < TAIL_FLOOR * k_max_estimate || p > DIVERGENCE_LIMIT * scale
        } else {
            p > UNBOUNDED_EXTENT * scale
        };
        if done && pivot.is_some() {
            break;
        }
        p *= ratio;
    }
    let pivot = pivot.expect("grid passes the scale");

    let segments: Vec<f64> = ps
        .windows(2)
        .map(|w| segment_integral(&recip, w[0], w[1]))
        .collect::<Result<_>>()?;

    let n = ps.len();
    let mut k = vec![0.0; n];
    for j in 1..=pivot {
        k[j] = k[j - 1] + segments[j - 1];
    }
    let mut remaining = vec![f64::INFINITY; n];
    let k_max = if bounded {
        remaining[n - 1] = tail_estimate(m, ps[n - 1]);
        for j in (pivot..n - 1).rev() {
            remaining[j] = remaining[j + 1] + segments[j];
        }
        let k_max = k[pivot] + remaining[pivot];
        for j in 0..pivot {
            remaining[j] = k_max - k[j];
        }
        for j in pivot + 1..n {
            k[j] = k_max - remaining[j];
        }
        k_max
    } else {
        for j in pivot + 1..n {
            k[j] = k[j - 1] + segments[j - 1];
        }
        f64::INFINITY
    };

    let slopes = pchip_slopes(&k, &ps);
    let rows = (0..n)
        .map(|j| Row {
            p: ps[j],
            k: k[j],
            remaining: remaining[j],
            slope: slopes[j],
        })
        .collect();

    Ok(MomentumMap {
        modification: m.clone(),
        k_max,
        rows,
        pivot,
        inversion_tolerance: tol,
    })
}

/// Free-function form of [`MomentumMap::eval_p`].
pub fn eval_p(map: &MomentumMap, k: f64) -> Result<f64> {
    map.eval_p(k)
}

fn segment_integral<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<f64> {
    let q = gk21(f, a, b);
    if q.error <= 1e-15 * q.value.abs() {
        return Ok(q.value);
    }
    Ok(integrate(f, a, b, 0.0, 1e-15, 100)?.value)
}

/// Fritsch–Carlson monotone cubic slopes for data `y(x)` with `x` increasing.
fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n < 2 {
        return vec![0.0; n];
    }
    let secant: Vec<f64> = (0..n - 1)
        .map(|i| {
            let dx = x[i + 1] - x[i];
            if dx > 0.0 {
                (y[i + 1] - y[i]) / dx
            } else {
                f64::INFINITY
            }
        })
        .collect();
    let mut d = vec![0.0; n];
    d[0] = secant[0];
    d[n - 1] = secant[n - 2];
    for i in 1..n - 1 {
        let (a, b) = (secant[i - 1], secant[i]);
        d[i] = if a <= 0.0 || b <= 0.0 || !a.is_finite() || !b.is_finite() {
            0.0
        } else {
            // Weighted harmonic mean.
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            let w0 = 2.0 * h1 + h0;
            let w1 = h1 + 2.0 * h0;
            (w0 + w1) / (w0 / a + w1 / b)
        };
    }
    d
}

impl MomentumMap {
    pub fn modification(&self) -> &Modification {
        &self.modification
    }

    /// The cut-off `k_max`; `f64::INFINITY` for the unmodified algebra.
    pub fn k_max(&self) -> f64 {
        self.k_max
    }

    pub fn is_bounded(&self) -> bool {
        self.k_max.is_finite()
    }

    pub fn inversion_tolerance(&self) -> f64 {
        self.inversion_tolerance
    }

    /// Tabulated `(p, k(p))` pairs for `p >= 0`.
    pub fn table(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.rows.iter().map(|r| (r.p, r.k))
    }

    /// `k(p) = ∫_0^p dp'/f(p')`, evaluated by quadrature from the nearest node.
    pub fn k_of_p(&self, p: f64) -> f64 {
        if p < 0.0 {
            return -self.k_of_p(-p);
        }
        if p == f64::INFINITY {
            return self.k_max;
        }
        let j = self.row_below_p(p);
        if j < self.pivot || !self.is_bounded() {
            self.forward_from(j, p)
        } else {
            self.k_max - self.remaining_from(j, p)
        }
    }

    /// `k_max - k(p)` for `p >= 0`, accurate even when it is tiny.
    pub fn distance_to_cutoff(&self, p: f64) -> f64 {
        if !self.is_bounded() {
            return f64::INFINITY;
        }
        let p = p.abs();
        let j = self.row_below_p(p);
        if j < self.pivot {
            self.k_max - self.forward_from(j, p)
        } else {
            self.remaining_from(j, p)
        }
    }

    /// Modified momentum `p(k)` for `|k| < k_max`.
    pub fn eval_p(&self, k: f64) -> Result<f64> {
        if !k.is_finite() || k.abs() >= self.k_max {
            return Err(Error::Domain(format!(
                "k = {k} is outside the open interval (-{0}, {0})",
                self.k_max
            )));
        }
        if k == 0.0 {
            return Ok(0.0);
        }
        let q = k.abs();
        let p = if self.is_bounded() && q >= self.rows[self.pivot].k {
            self.solve_remaining(self.k_max - q)
        } else {
            self.solve_forward(q)
        };
        Ok(p.copysign(k))
    }

    /// `p` at distance `d = k_max - k` from the cut-off, for `0 < d <= k_max`.
    ///
    /// Avoids forming `k_max - d` when `d` is tiny.
    pub fn p_at_distance(&self, d: f64) -> Result<f64> {
        if !self.is_bounded() {
            return Err(Error::UnboundedDomain);
        }
        if !(d > 0.0 && d <= self.k_max) {
            return Err(Error::Domain(format!("distance {d} to the cut-off is outside (0, k_max]")));
        }
        if d <= self.rows[self.pivot].remaining {
            Ok(self.solve_remaining(d))
        } else {
            self.eval_p(self.k_max - d)
        }
    }

    fn row_below_p(&self, p: f64) -> usize {
        self.rows.partition_point(|r| r.p <= p).saturating_sub(1)
    }

    fn recip(&self, p: f64) -> f64 {
        1.0 / self.modification.eval(p)
    }

    fn integral(&self, a: f64, b: f64) -> f64 {
        if a == b {
            return 0.0;
        }
        let f = |p: f64| self.recip(p);
        segment_integral(&f, a, b).unwrap_or_else(|_| gk21(&f, a, b).value)
    }

    fn forward_from(&self, j: usize, p: f64) -> f64 {
        self.rows[j].k + self.integral(self.rows[j].p, p)
    }

    fn remaining_from(&self, j: usize, p: f64) -> f64 {
        match self.rows.get(j + 1) {
            Some(next) => next.remaining + self.integral(p, next.p),
            // Beyond the table the tail is below TAIL_FLOOR * k_max.
            None => tail_estimate(&self.modification, p),
        }
    }

    /// Monotone cubic guess for `p(k)` inside row interval `j`.
    fn pchip_guess(&self, j: usize, k: f64) -> f64 {
        let (a, b) = (&self.rows[j], &self.rows[j + 1]);
        let h = b.k - a.k;
        if !(h > 0.0) {
            return 0.5 * (a.p + b.p);
        }
        let t = ((k - a.k) / h).clamp(0.0, 1.0);
        let (t2, t3) = (t * t, t * t * t);
        let guess = (2.0 * t3 - 3.0 * t2 + 1.0) * a.p
            + (t3 - 2.0 * t2 + t) * h * a.slope
            + (-2.0 * t3 + 3.0 * t2) * b.p
            + (t3 - t2) * h * b.slope;
        guess.clamp(a.p, b.p)
    }

    /// Solve `k(p) = k` for `k` below the pivot (or anywhere when unbounded).
    fn solve_forward(&self, k: f64) -> f64 {
        let idx = self.rows.partition_point(|r| r.k <= k);
        if idx >= self.rows.len() {
            // Unbounded map, beyond the table: bracket by doubling.
            let last = self.rows.len() - 1;
            let mut lo = self.rows[last].p;
            let mut k_lo = self.rows[last].k;
            let mut hi = 2.0 * lo;
            let mut k_hi = k_lo + self.long_integral(lo, hi);
            while k_hi < k {
                lo = hi;
                k_lo = k_hi;
                hi *= 2.0;
                k_hi = k_lo + self.long_integral(lo, hi);
                if !hi.is_finite() {
                    return f64::INFINITY;
                }
            }
            return self.newton(lo, hi, 0.5 * (lo + hi), |p| k_lo + self.long_integral(lo, p) - k, 1.0);
        }
        let j = idx - 1;
        let (lo, hi) = (self.rows[j].p, self.rows[j + 1].p);
        let guess = self.pchip_guess(j, k);
        let base = self.rows[j].k;
        self.newton(lo, hi, guess, |p| base + self.integral(lo, p) - k, 1.0)
    }

    /// Solve `k_max - k(p) = d` for a bounded map.
    fn solve_remaining(&self, d: f64) -> f64 {
        // remaining is decreasing in the row index.
        let idx = self.rows.partition_point(|r| r.remaining > d);
        if idx >= self.rows.len() {
            // Beyond the table: invert the tail estimate by bisection in log p.
            let mut lo = self.rows[self.rows.len() - 1].p;
            let mut hi = 2.0 * lo;
            while tail_estimate(&self.modification, hi) > d && hi.is_finite() {
                lo = hi;
                hi *= 2.0;
            }
            for _ in 0..200 {
                let mid = (lo * hi).sqrt();
                if tail_estimate(&self.modification, mid) > d {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= 4.0 * f64::EPSILON * hi {
                    break;
                }
            }
            return 0.5 * (lo + hi);
        }
        if idx == 0 {
            return 0.0;
        }
        let j = idx - 1;
        let (lo, hi) = (self.rows[j].p, self.rows[j + 1].p);
        let guess = self.pchip_guess(j, self.k_max - d);
        let tail = self.rows[j + 1].remaining;
        self.newton(lo, hi, guess, |p| tail + self.integral(p, hi) - d, -1.0)
    }

    fn long_integral(&self, a: f64, b: f64) -> f64 {
        integrate(|p| self.recip(p), a, b, 0.0, 1e-14, 200)
            .map(|q| q.value)
            .unwrap_or_else(|e| match e {
                Error::Accuracy { estimate, .. } => estimate,
                _ => f64::NAN,
            })
    }

    /// Safeguarded Newton iteration on `[lo, hi]` for a residual whose
    /// derivative is `sign / f(p)`.
    fn newton<R: Fn(f64) -> f64>(&self, mut lo: f64, mut hi: f64, guess: f64, residual: R, sign: f64) -> f64 {
        let mut p = guess;
        for _ in 0..MAX_NEWTON {
            let r = residual(p);
            if r == 0.0 {
                return p;
            }
            // residual is increasing in p when sign > 0.
            if (r > 0.0) == (sign > 0.0) {
                hi = p;
            } else {
                lo = p;
            }
            let step = r * self.modification.eval(p) * sign;
            let mut next = p - step;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - p).abs() <= 2.0 * f64::EPSILON * p.abs().max(f64::MIN_POSITIVE) || hi - lo <= 2.0 * f64::EPSILON * hi {
                return next;
            }
            p = next;
        }
        p
    }
}
