//! Modifications `f(p)` of the Heisenberg algebra `[x, p] = i f(p)`.
//!
//! Only even functions with `f(0) = 1` are representable: three built-in
//! families scaled by `beta` and even polynomials `1 + Σ a_n p^{2n}`. The
//! admissibility conditions are therefore mostly structural, and
//! [`validate_modification`] screens the rest on sampled grids.

mod kmax;
mod map;

pub use kmax::{compute_kmax, tail_estimate, DIVERGENCE_LIMIT};
pub use map::{build_momentum_map, eval_p, MomentumMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModificationKind {
    /// `1 + beta p^2`
    #[serde(rename = "kmm")]
    Kmm,
    /// `cosh(sqrt(beta) p)`
    #[serde(rename = "cosh")]
    Cosh,
    /// `1 + beta p^2 + beta^2 p^4 / 4`
    #[serde(rename = "quartic")]
    Quartic,
    /// `1 + Σ_n a_n p^{2n}`, coefficients starting at `n = 1`
    #[serde(rename = "poly")]
    EvenPolynomial,
}

impl ModificationKind {
    pub fn name(self) -> &'static str {
        match self {
            ModificationKind::Kmm => "kmm",
            ModificationKind::Cosh => "cosh",
            ModificationKind::Quartic => "quartic",
            ModificationKind::EvenPolynomial => "poly",
        }
    }
}

impl std::str::FromStr for ModificationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kmm" => Ok(ModificationKind::Kmm),
            "cosh" => Ok(ModificationKind::Cosh),
            "quartic" => Ok(ModificationKind::Quartic),
            "poly" => Ok(ModificationKind::EvenPolynomial),
            other => Err(Error::InvalidInput(format!("unknown modification kind '{other}'"))),
        }
    }
}

fn default_beta() -> f64 {
    1.0
}

/// A modification `f(p)` together with its scale `beta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Modification {
    pub kind: ModificationKind,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default)]
    pub coefficients: Vec<f64>,
}

impl Modification {
    pub fn new(kind: ModificationKind, beta: f64, coefficients: Vec<f64>) -> Result<Self> {
        if !(beta.is_finite() && beta > 0.0) {
            return Err(Error::InvalidInput(format!("beta must be positive and finite, got {beta}")));
        }
        if let Some(c) = coefficients.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite coefficient {c}")));
        }
        Ok(Self { kind, beta, coefficients })
    }

    pub fn kmm(beta: f64) -> Result<Self> {
        Self::new(ModificationKind::Kmm, beta, Vec::new())
    }

    pub fn cosh(beta: f64) -> Result<Self> {
        Self::new(ModificationKind::Cosh, beta, Vec::new())
    }

    pub fn quartic(beta: f64) -> Result<Self> {
        Self::new(ModificationKind::Quartic, beta, Vec::new())
    }

    pub fn even_polynomial(coefficients: Vec<f64>) -> Result<Self> {
        Self::new(ModificationKind::EvenPolynomial, 1.0, coefficients)
    }

    /// The unmodified algebra, `f ≡ 1`.
    pub fn unmodified() -> Self {
        Self {
            kind: ModificationKind::EvenPolynomial,
            beta: 1.0,
            coefficients: Vec::new(),
        }
    }

    /// True when `f ≡ 1`.
    pub fn is_unmodified(&self) -> bool {
        self.kind == ModificationKind::EvenPolynomial && self.coefficients.iter().all(|&c| c == 0.0)
    }

    pub fn eval(&self, p: f64) -> f64 {
        let b = self.beta;
        match self.kind {
            ModificationKind::Kmm => 1.0 + b * p * p,
            ModificationKind::Cosh => (b.sqrt() * p).cosh(),
            ModificationKind::Quartic => {
                let q = b * p * p;
                1.0 + q + 0.25 * q * q
            }
            ModificationKind::EvenPolynomial => {
                let p2 = p * p;
                let mut acc = 0.0;
                for &a in self.coefficients.iter().rev() {
                    acc = (acc + a) * p2;
                }
                1.0 + acc
            }
        }
    }

    pub fn derivative(&self, p: f64) -> f64 {
        let b = self.beta;
        match self.kind {
            ModificationKind::Kmm => 2.0 * b * p,
            ModificationKind::Cosh => b.sqrt() * (b.sqrt() * p).sinh(),
            ModificationKind::Quartic => 2.0 * b * p + b * b * p * p * p,
            ModificationKind::EvenPolynomial => {
                let p2 = p * p;
                let mut acc = 0.0;
                for (n, &a) in self.coefficients.iter().enumerate().rev() {
                    acc = acc * p2 + 2.0 * (n as f64 + 1.0) * a;
                }
                acc * p
            }
        }
    }

    /// `g(q) = f(sqrt|q|)`, the modification as a function of `p^2`.
    pub fn g(&self, q: f64) -> f64 {
        self.eval(q.abs().sqrt())
    }

    /// Cut-off `∫_0^∞ dp/f` in closed form where one is known: `π/(2√β)` for
    /// kmm and cosh, `π/(2√(2β))` for the quartic `(1 + βp²/2)²`, and
    /// infinity for `f ≡ 1`.
    pub fn closed_form_kmax(&self) -> Option<f64> {
        let s = self.beta.sqrt();
        match self.kind {
            ModificationKind::Kmm | ModificationKind::Cosh => Some(std::f64::consts::FRAC_PI_2 / s),
            ModificationKind::Quartic => Some(std::f64::consts::FRAC_PI_2 / (std::f64::consts::SQRT_2 * s)),
            _ if self.is_unmodified() => Some(f64::INFINITY),
            _ => None,
        }
    }

    /// Momentum scale where the modification becomes important, i.e. the
    /// `p > 0` with `f(p) = 2`. Returns 1 for the unmodified algebra.
    pub fn momentum_scale(&self) -> f64 {
        match self.kind {
            ModificationKind::Kmm => 1.0 / self.beta.sqrt(),
            _ if self.is_unmodified() => 1.0,
            _ => {
                let mut hi = 1.0;
                while self.eval(hi) < 2.0 && hi < 1e150 {
                    hi *= 2.0;
                }
                let mut lo = 0.0;
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if self.eval(mid) < 2.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            }
        }
    }
}

/// The three admissibility assumptions on `f`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Assumption {
    /// `f(0) = 1`
    Normalization,
    /// `f(p) = f(-p)`
    Symmetry,
    /// `f` convex (and hence non-decreasing) on `p >= 0`
    Convexity,
}

impl Assumption {
    pub fn name(self) -> &'static str {
        match self {
            Assumption::Normalization => "normalization",
            Assumption::Symmetry => "symmetry",
            Assumption::Convexity => "convexity",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Witness {
    /// Sample point at which the check failed.
    Point(f64),
    /// A coefficient that takes the polynomial outside the admissible class.
    Coefficient { index: usize, value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionCheck {
    pub assumption: Assumption,
    pub passed: bool,
    pub witness: Option<Witness>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<AssumptionCheck>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &AssumptionCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Screen `f` for the admissibility assumptions on `sample_count` points of
/// `[0, 10 * scale]`.
pub fn validate_modification(m: &Modification, sample_count: usize) -> Result<ValidationReport> {
    if sample_count < 3 {
        return Err(Error::InvalidInput("validation needs at least 3 samples".into()));
    }
    let p_max = 10.0 * m.momentum_scale().min(1e6);
    let step = p_max / (sample_count - 1) as f64;
    let samples: Vec<(f64, f64)> = (0..sample_count)
        .map(|i| {
            let p = i as f64 * step;
            let fp = m.eval(p);
            if fp.is_finite() {
                Ok((p, fp))
            } else {
                Err(Error::Evaluation { point: p })
            }
        })
        .collect::<Result<_>>()?;

    let f0 = samples[0].1;
    let normalization = AssumptionCheck {
        assumption: Assumption::Normalization,
        passed: f0 == 1.0,
        witness: (f0 != 1.0).then_some(Witness::Point(0.0)),
        detail: format!("f(0) = {f0}"),
    };

    let asymmetric = samples.iter().find(|&&(p, fp)| m.eval(-p) != fp).map(|&(p, _)| p);
    let symmetry = AssumptionCheck {
        assumption: Assumption::Symmetry,
        passed: asymmetric.is_none(),
        witness: asymmetric.map(Witness::Point),
        detail: match asymmetric {
            Some(p) => format!("f({p}) != f({})", -p),
            None => "f(p) = f(-p) on all samples".into(),
        },
    };

    let convexity = convexity_check(m, &samples);

    Ok(ValidationReport {
        checks: vec![normalization, symmetry, convexity],
    })
}

fn convexity_check(m: &Modification, samples: &[(f64, f64)]) -> AssumptionCheck {
    let slack = |v: f64| 1e-12 * v.abs().max(1.0);
    let midpoint_violation = samples.windows(3).find_map(|w| {
        let (_, fa) = w[0];
        let (pm, fm) = w[1];
        let (_, fb) = w[2];
        (fm > 0.5 * (fa + fb) + slack(fm)).then_some(pm)
    });
    let decreasing = samples
        .windows(2)
        .find_map(|w| (w[1].1 < w[0].1 - slack(w[0].1)).then_some(w[1].0));

    if let Some(p) = midpoint_violation.or(decreasing) {
        let what = if midpoint_violation.is_some() {
            "midpoint convexity"
        } else {
            "monotonicity"
        };
        return AssumptionCheck {
            assumption: Assumption::Convexity,
            passed: false,
            witness: Some(Witness::Point(p)),
            detail: format!("{what} violated at p = {p}"),
        };
    }

    if m.kind == ModificationKind::EvenPolynomial {
        if let Some((index, &value)) = m.coefficients.iter().enumerate().find(|(_, &a)| a < 0.0) {
            return AssumptionCheck {
                assumption: Assumption::Convexity,
                passed: false,
                witness: Some(Witness::Coefficient { index, value }),
                detail: format!(
                    "coefficient a_{} = {value} is negative; only non-negative even polynomials are admissible",
                    index + 1
                ),
            };
        }
    }

    AssumptionCheck {
        assumption: Assumption::Convexity,
        passed: true,
        witness: None,
        detail: format!(
            "midpoint-convex and non-decreasing on [0, {}]",
            samples.last().map_or(0.0, |s| s.0)
        ),
    }
}
