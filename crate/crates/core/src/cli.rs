//! Command-line front end. [`run`] parses arguments, executes one command and
//! returns the process exit status, writing to the supplied streams so it can
//! be driven from tests.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::entropy::{
    analytic_hk, cos_power_hk_quadrature, cos_power_hx, entropic_bounds, min_entropy_minlength,
    shannon_minlength_estimate,
};
use crate::error::{Error, Result};
use crate::modification::{build_momentum_map, validate_modification, Modification, ModificationKind, MomentumMap};
use crate::sampler::{
    region_report, scan, FamilyBoundary, RegionContext, ScanConfig, DEFAULT_MODE_COUNT, DEFAULT_STATE_COUNT,
};
use crate::spectral::SolverConfig;
use crate::tradeoff::{lambda_grid, minimal_length_variance, suboptimal_bound, sweep_tradeoff, LAMBDA_MIN};
use crate::transform::WindowPolicy;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_ACCURACY: i32 = 2;
pub const EXIT_BAD_INPUT: i32 = 3;

/// Tolerance for the cut-off quadrature and momentum map.
const MAP_TOL: f64 = 1e-12;
/// Sample points per assumption in `validate`.
const VALIDATION_SAMPLES: usize = 2000;
/// Stand-in for the `γ → 0` limit in entropy tables.
pub const GAMMA_ZERO: f64 = 1e-6;
/// Family exponents of the marker rows: `γ → 0`, `1/2`, `1`.
pub const MARKER_GAMMAS: [f64; 3] = [GAMMA_ZERO, 0.5, 1.0];

pub const SCAN_HEADER: &str = "index,h_x,h_k,delta_x,delta_p,divergent_x";
pub const TRADEOFF_HEADER: &str = "lambda,u,delta_x,delta_p,bound_eq13";
pub const ENTROPY_HEADER: &str = "gamma,h_k_analytic,h_k_numeric,h_x_numeric";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    #[default]
    Nats,
    Bits,
}

impl Units {
    /// Converts an entropy given in nats.
    pub fn convert(self, nats: f64) -> f64 {
        match self {
            Units::Nats => nats,
            Units::Bits => nats / std::f64::consts::LN_2,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Units::Nats => "nats",
            Units::Bits => "bits",
        }
    }
}

/// `γ` values: `a:b:n` (linear), `log:a:b:n` (logarithmic) or `g1,g2,...`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct GammaGrid {
    spec: String,
    values: Vec<f64>,
}

impl GammaGrid {
    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl Default for GammaGrid {
    fn default() -> Self {
        "log:0.01:5:40".parse().expect("default grid parses")
    }
}

impl std::str::FromStr for GammaGrid {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("cannot parse gamma grid '{spec}'"));
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
        let parts: Vec<&str> = spec.split(':').collect();
        let values: Vec<f64> = match parts.as_slice() {
            [a, b, n] | ["log", a, b, n] => {
                let (a, b) = (num(a)?, num(b)?);
                let n: usize = n.trim().parse().map_err(|_| bad())?;
                if n < 2 || !(a < b) {
                    return Err(bad());
                }
                let log = parts.len() == 4;
                if log && a <= 0.0 {
                    return Err(bad());
                }
                (0..n)
                    .map(|i| {
                        let t = i as f64 / (n - 1) as f64;
                        if log {
                            (a.ln() + t * (b.ln() - a.ln())).exp()
                        } else {
                            a + t * (b - a)
                        }
                    })
                    .collect()
            }
            [list] => list.split(',').map(num).collect::<Result<_>>()?,
            _ => return Err(bad()),
        };
        if values.is_empty() || values.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
            return Err(Error::InvalidInput(format!("gamma grid '{spec}' must contain positive values")));
        }
        Ok(Self {
            spec: spec.to_string(),
            values,
        })
    }
}

impl TryFrom<String> for GammaGrid {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<GammaGrid> for String {
    fn from(g: GammaGrid) -> Self {
        g.spec
    }
}

/// Settings shared by every command; loaded from `--config` and then
/// overridden by flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub modification: Modification,
    pub lambda_grid: usize,
    pub gamma_grid: GammaGrid,
    pub states: usize,
    pub modes: usize,
    pub seed: u64,
    pub units: Units,
    pub output_path: Option<PathBuf>,
    pub solver: SolverConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            modification: Modification::kmm(1.0).expect("valid default"),
            lambda_grid: crate::tradeoff::DEFAULT_LAMBDA_COUNT,
            gamma_grid: GammaGrid::default(),
            states: DEFAULT_STATE_COUNT,
            modes: DEFAULT_MODE_COUNT,
            seed: 42,
            units: Units::Nats,
            output_path: None,
            solver: SolverConfig::default(),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "minlen", version, about = "Optimal uncertainty relations for modified Heisenberg algebras")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check the admissibility assumptions on f(p)
    Validate,
    /// Print the momentum cut-off k_max
    Kmax,
    /// Optimal variance trade-off curve as CSV
    Tradeoff,
    /// Entropies of the cos^γ family as CSV
    Entropy,
    /// Variance, Shannon and min-entropy minimal lengths as JSON
    Minlength,
    /// Random-state scan as CSV, with a JSON summary sidecar
    Scan,
}

#[derive(Debug, clap::Args)]
struct Flags {
    /// Modification: kmm, cosh, quartic or poly
    #[arg(long = "mod", global = true)]
    modification: Option<String>,
    #[arg(long, global = true)]
    beta: Option<f64>,
    /// Coefficients a_1, a_2, ... of f = 1 + Σ a_n p^{2n}
    #[arg(long, global = true, num_args = 1.., allow_negative_numbers = true)]
    coeff: Option<Vec<f64>>,
    /// Number of λ values
    #[arg(long, global = true)]
    lambda_grid: Option<usize>,
    /// γ values: a:b:n, log:a:b:n or a comma-separated list
    #[arg(long, global = true)]
    gamma_grid: Option<String>,
    #[arg(long, global = true)]
    states: Option<usize>,
    #[arg(long, global = true)]
    modes: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    units: Option<Units>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// JSON file with a RunConfig; flags take precedence
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

impl Flags {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => serde_json::from_str(&fs::read_to_string(path)?)?,
            None => RunConfig::default(),
        };
        let m = &mut cfg.modification;
        if let Some(kind) = &self.modification {
            m.kind = kind.parse()?;
        }
        if let Some(beta) = self.beta {
            m.beta = beta;
        }
        if let Some(coeff) = &self.coeff {
            m.coefficients = coeff.clone();
        }
        cfg.modification = Modification::new(m.kind, m.beta, m.coefficients.clone())?;
        if let Some(n) = self.lambda_grid {
            cfg.lambda_grid = n;
        }
        if let Some(spec) = &self.gamma_grid {
            cfg.gamma_grid = spec.parse()?;
        }
        if let Some(n) = self.states {
            cfg.states = n;
        }
        if let Some(n) = self.modes {
            cfg.modes = n;
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(units) = self.units {
            cfg.units = units;
        }
        if let Some(out) = &self.out {
            cfg.output_path = Some(out.clone());
        }
        Ok(cfg)
    }
}

/// Exit status for an error: 2 for numerical-accuracy failures, 3 otherwise.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::AtLambda { source, .. } => exit_code(source),
        Error::Accuracy { .. } | Error::Solver { .. } | Error::Evaluation { .. } | Error::Divergence { .. } => {
            EXIT_ACCURACY
        }
        _ => EXIT_BAD_INPUT,
    }
}

/// Runs the command line `args` (including the program name).
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_BAD_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = cli.flags.resolve().and_then(|cfg| match cli.command {
        Command::Validate => cmd_validate(&cfg, stdout),
        Command::Kmax => cmd_kmax(&cfg, stdout),
        Command::Tradeoff => cmd_tradeoff(&cfg, stdout, stderr),
        Command::Entropy => cmd_entropy(&cfg, stdout),
        Command::Minlength => cmd_minlength(&cfg, stdout),
        Command::Scan => cmd_scan(&cfg, stdout, stderr),
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

fn map_of(cfg: &RunConfig) -> Result<MomentumMap> {
    build_momentum_map(&cfg.modification, MAP_TOL)
}

/// Writes `text` to the configured file, or to `stdout` without one.
fn emit(cfg: &RunConfig, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match &cfg.output_path {
        Some(path) => fs::write(path, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

/// JSON text with object keys sorted.
fn sorted_json(value: &impl Serialize) -> Result<String> {
    // serde_json's default map is ordered by key.
    let v: Value = serde_json::to_value(value)?;
    Ok(serde_json::to_string_pretty(&v)? + "\n")
}

fn cmd_validate(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    let report = validate_modification(&cfg.modification, VALIDATION_SAMPLES)?;
    writeln!(out, "modification: {}", describe(&cfg.modification))?;
    for c in &report.checks {
        let status = if c.passed { "ok" } else { "FAILED" };
        writeln!(out, "{}: {status} ({})", c.assumption.name(), c.detail)?;
    }
    Ok(if report.all_passed() { EXIT_OK } else { EXIT_VALIDATION })
}

fn describe(m: &Modification) -> String {
    match m.kind {
        ModificationKind::EvenPolynomial => format!("poly {:?}", m.coefficients),
        kind => format!("{} beta={:?}", kind.name(), m.beta),
    }
}

fn cmd_kmax(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    let map = map_of(cfg)?;
    writeln!(out, "{:?}", map.k_max())?;
    Ok(EXIT_OK)
}

/// The trade-off curve as CSV text.
pub fn tradeoff_csv(map: &MomentumMap, cfg: &RunConfig) -> Result<String> {
    let lambdas = lambda_grid(cfg.lambda_grid, LAMBDA_MIN)?;
    let curve = sweep_tradeoff(map, &lambdas, cfg.solver)?;
    let mut text = format!("{TRADEOFF_HEADER}\n");
    for p in &curve.points {
        let bound = suboptimal_bound(map.modification(), p.delta_p)?;
        text += &format!("{:?},{:?},{:?},{:?},{:?}\n", p.lambda, p.u, p.delta_x, p.delta_p, bound);
    }
    Ok(text)
}

fn cmd_tradeoff(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let map = map_of(cfg)?;
    match tradeoff_csv(&map, cfg) {
        Ok(text) => {
            emit(cfg, &text, out)?;
            Ok(EXIT_OK)
        }
        Err(e) => {
            if let Error::AtLambda { lambda, .. } = &e {
                writeln!(err, "solver failed at lambda = {lambda:?}")?;
            }
            Err(e)
        }
    }
}

/// Rows of the entropy table (including the marker rows) plus trailing
/// comment lines.
pub fn entropy_csv(map: &MomentumMap, cfg: &RunConfig) -> Result<String> {
    let u = cfg.units;
    let mut text = format!("{ENTROPY_HEADER}\n");
    let mut comments = Vec::new();
    let m = map.modification();
    if m.kind == ModificationKind::Kmm {
        let mut gammas: Vec<f64> = cfg.gamma_grid.values().iter().chain(&MARKER_GAMMAS).copied().collect();
        gammas.sort_by(f64::total_cmp);
        gammas.dedup();
        let policy = WindowPolicy::default();
        for g in gammas {
            let hx = cos_power_hx(m.beta, g, policy)?;
            if let Some(w) = &hx.warning {
                comments.push(format!("# gamma={g:?}: {w}"));
            }
            text += &format!(
                "{:?},{:?},{:?},{:?}\n",
                g,
                u.convert(analytic_hk(m.beta, g)?),
                u.convert(cos_power_hk_quadrature(m.beta, g)?),
                u.convert(hx.extrapolated())
            );
        }
    } else {
        comments.push(format!("# the cos^gamma family is not optimal for {}; bounds only", m.kind.name()));
    }
    let b = entropic_bounds(map);
    comments.push(format!("# h_k_max={:?} h_x_lower={:?} units={}", u.convert(b.h_p_max), u.convert(b.h_x_lower), u.name()));
    for c in comments {
        text += &c;
        text.push('\n');
    }
    Ok(text)
}

fn cmd_entropy(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    let map = map_of(cfg)?;
    emit(cfg, &entropy_csv(&map, cfg)?, out)?;
    Ok(EXIT_OK)
}

/// The three minimal lengths with provenance labels.
pub fn minlength_json(map: &MomentumMap, cfg: &RunConfig) -> Result<Value> {
    let u = cfg.units;
    let mut labels = BTreeMap::new();
    let variance = minimal_length_variance(map);
    let min_entropy = min_entropy_minlength(map).map(|h| u.convert(h));
    labels.insert("variance", if variance.is_some() { "ANALYTIC" } else { "none" });
    labels.insert("min_entropy", if min_entropy.is_some() { "ANALYTIC" } else { "none" });
    let shannon = if !map.is_bounded() {
        labels.insert("shannon_conjectured", "none");
        None
    } else {
        match shannon_minlength_estimate(map, cfg.gamma_grid.values(), WindowPolicy::default()) {
            Ok(s) => {
                labels.insert("shannon_conjectured", crate::entropy::CONJECTURED);
                Some(u.convert(s.h_x_min))
            }
            Err(Error::Unsupported(_)) => {
                labels.insert("shannon_conjectured", "unavailable");
                None
            }
            Err(e) => return Err(e),
        }
    };
    Ok(json!({
        "labels": labels,
        "min_entropy": min_entropy,
        "modification": cfg.modification,
        "shannon_conjectured": shannon,
        "units": u.name(),
        "variance": variance,
    }))
}

fn cmd_minlength(cfg: &RunConfig, out: &mut dyn Write) -> Result<i32> {
    let map = map_of(cfg)?;
    emit(cfg, &sorted_json(&minlength_json(&map, cfg)?)?, out)?;
    Ok(EXIT_OK)
}

/// Dense exponents for the conjectured entropic boundary.
fn family_gammas() -> Vec<f64> {
    (0..=160).map(|i| 10f64.powf(-3.0 + 4.3 * i as f64 / 160.0)).collect()
}

/// Scan CSV text and the summary sidecar.
pub fn scan_outputs(map: &MomentumMap, cfg: &RunConfig) -> Result<(String, Value)> {
    let u = cfg.units;
    let scan_cfg = ScanConfig::new(map.clone(), cfg.states, cfg.modes, cfg.seed)?;
    let records = scan(&scan_cfg)?;
    let mut text = format!("{SCAN_HEADER}\n");
    for r in &records {
        text += &format!(
            "{},{:?},{:?},{:?},{:?},{}\n",
            r.index,
            u.convert(r.h_x),
            u.convert(r.h_k),
            r.delta_x,
            r.delta_p,
            r.divergent_x
        );
    }
    let lambdas = lambda_grid(cfg.lambda_grid, LAMBDA_MIN)?;
    let ctx = RegionContext {
        curve: Some(sweep_tradeoff(map, &lambdas, cfg.solver)?),
        boundary: match FamilyBoundary::kmm(map, &family_gammas(), WindowPolicy::default()) {
            Ok(b) => Some(b),
            Err(Error::Unsupported(_)) => None,
            Err(e) => return Err(e),
        },
    };
    let report = region_report(&records, map, &ctx)?;
    let sidecar = json!({
        "coefficient_law": "complex-gaussian",
        "config": cfg,
        "mode_count": cfg.modes,
        "report": report,
        "seed": cfg.seed,
        "state_count": cfg.states,
        "warnings": records.iter().filter_map(|r| r.warning.as_ref().map(|w| json!({"index": r.index, "warning": w}))).collect::<Vec<_>>(),
    });
    Ok((text, sidecar))
}

/// `scan.csv` → `scan.json`.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

fn cmd_scan(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let map = map_of(cfg)?;
    let (text, sidecar) = scan_outputs(&map, cfg)?;
    let sidecar = sorted_json(&sidecar)?;
    emit(cfg, &text, out)?;
    match &cfg.output_path {
        Some(path) => fs::write(sidecar_path(path), sidecar)?,
        None => err.write_all(sidecar.as_bytes())?,
    }
    Ok(EXIT_OK)
}
