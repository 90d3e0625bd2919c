use std::fs;
use std::path::{Path, PathBuf};

use hyperdyn::complexdyn::Window;
use hyperdyn::{Polynomial, PolynomialSpec, Strategy, TransitionMatrix};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DEFAULT_LAMBDA: f64 = 1.1;
pub const DEFAULT_EPSILON: f64 = 0.5;
pub const DEFAULT_DEPTH: usize = 10;
pub const DEFAULT_BUDGET: usize = 500;
pub const DEFAULT_RESOLUTION: usize = 256;
pub const DEFAULT_JULIA_BUDGET: usize = 100;

/// Log- or linearly spaced parameter range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ARange {
    pub from: f64,
    pub to: f64,
    pub samples: usize,
    #[serde(default = "yes")]
    pub log: bool,
}

fn yes() -> bool {
    true
}

impl ARange {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || CliError::Config(format!("a-range {s:?} is not FROM:TO:SAMPLES[:log|:lin]"));
        if !(3..=4).contains(&parts.len()) {
            return Err(bad());
        }
        let from = parts[0].trim().parse().map_err(|_| bad())?;
        let to = parts[1].trim().parse().map_err(|_| bad())?;
        let samples = parts[2].trim().parse().map_err(|_| bad())?;
        let log = match parts.get(3).map(|p| p.trim()) {
            None | Some("log") => true,
            Some("lin") => false,
            Some(_) => return Err(bad()),
        };
        Ok(Self { from, to, samples, log })
    }

    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        let (a, b) = (self.from, self.to);
        if !(a.is_finite() && b.is_finite()) || a == 0.0 || b == 0.0 {
            return Err(CliError::Config("a-range endpoints must be finite and nonzero".into()));
        }
        if self.log && a.signum() != b.signum() {
            return Err(CliError::Config("a log range cannot cross zero".into()));
        }
        let n = self.samples;
        Ok((0..n)
            .map(|k| {
                let t = if n == 1 { 0.0 } else { k as f64 / (n - 1) as f64 };
                if k == 0 {
                    a
                } else if k + 1 == n {
                    b
                } else if self.log {
                    let (la, lb) = (a.abs().log10(), b.abs().log10());
                    a.signum() * 10f64.powf(la + t * (lb - la))
                } else {
                    a + t * (b - a)
                }
            })
            .collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AValue {
    Single(f64),
    Range(ARange),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    pub report: Option<PathBuf>,
    pub cylinders_csv: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub pgm: Option<PathBuf>,
}

/// Config file contents; every field may be overridden on the command line.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    pub polynomial: Option<PolynomialSpec>,
    pub a: Option<AValue>,
    pub lambda: Option<f64>,
    pub epsilon: Option<f64>,
    pub depth: Option<usize>,
    pub budget: Option<usize>,
    pub strategy: Option<Strategy>,
    pub pair: Option<usize>,
    pub window: Option<Window>,
    pub resolution: Option<usize>,
    /// Optional 0/1 matrix checked for eventual positivity alongside the analysis.
    pub matrix: Option<TransitionMatrix>,
    #[serde(default)]
    pub outputs: Outputs,
}

/// Fully resolved settings, echoed into every report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedConfig {
    pub polynomial: PolynomialSpec,
    pub a: AValue,
    pub lambda: f64,
    pub epsilon: f64,
    pub depth: usize,
    pub budget: usize,
    pub strategy: Strategy,
    pub pair: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<Window>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<TransitionMatrix>,
    pub outputs: Outputs,
}

impl ResolvedConfig {
    pub fn polynomial(&self) -> Result<Polynomial, CliError> {
        Polynomial::from_spec(&self.polynomial).map_err(|e| CliError::Config(format!("polynomial: {e}")))
    }

    pub fn single_a(&self) -> Result<f64, CliError> {
        match self.a {
            AValue::Single(a) => Ok(a),
            AValue::Range(_) => Err(CliError::Config("a single value of a is required".into())),
        }
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path, what: &str) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {what} {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("malformed {what} {}: {e}", path.display())))
}

pub fn load_config(path: Option<&Path>) -> Result<AnalysisConfig, CliError> {
    path.map(|p| read_json(p, "config")).transpose().map(Option::unwrap_or_default)
}

pub fn load_polynomial(path: &Path) -> Result<PolynomialSpec, CliError> {
    read_json(path, "polynomial")
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub poly: Option<PathBuf>,
    pub a: Option<AValue>,
    pub lambda: Option<f64>,
    pub epsilon: Option<f64>,
    pub depth: Option<usize>,
    pub budget: Option<usize>,
    pub strategy: Option<Strategy>,
    pub pair: Option<usize>,
    pub window: Option<Window>,
    pub resolution: Option<usize>,
    pub outputs: Outputs,
}

pub fn resolve(file: AnalysisConfig, cli: Overrides, default_budget: usize) -> Result<ResolvedConfig, CliError> {
    let polynomial = match &cli.poly {
        Some(p) => load_polynomial(p)?,
        None => file.polynomial.ok_or_else(|| CliError::Config("no polynomial given (use --poly or the config)".into()))?,
    };
    let a = cli.a.or(file.a).ok_or_else(|| CliError::Config("no parameter a given".into()))?;
    let pick = |c: Option<PathBuf>, f: Option<PathBuf>| c.or(f);
    let outputs = Outputs {
        report: pick(cli.outputs.report, file.outputs.report),
        cylinders_csv: pick(cli.outputs.cylinders_csv, file.outputs.cylinders_csv),
        csv: pick(cli.outputs.csv, file.outputs.csv),
        pgm: pick(cli.outputs.pgm, file.outputs.pgm),
    };
    let cfg = ResolvedConfig {
        polynomial,
        a,
        lambda: cli.lambda.or(file.lambda).unwrap_or(DEFAULT_LAMBDA),
        epsilon: cli.epsilon.or(file.epsilon).unwrap_or(DEFAULT_EPSILON),
        depth: cli.depth.or(file.depth).unwrap_or(DEFAULT_DEPTH),
        budget: cli.budget.or(file.budget).unwrap_or(default_budget),
        strategy: cli.strategy.or(file.strategy).unwrap_or(Strategy::Auto),
        pair: cli.pair.or(file.pair),
        window: cli.window.or(file.window),
        resolution: cli.resolution.or(file.resolution),
        matrix: file.matrix,
        outputs,
    };
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(c: &ResolvedConfig) -> Result<(), CliError> {
    let fail = |m: String| Err(CliError::Config(m));
    if !(1..=40).contains(&c.depth) {
        return fail(format!("depth {} is outside [1, 40]", c.depth));
    }
    if !(c.lambda > 1.0 && c.lambda.is_finite()) {
        return fail(format!("lambda {} must exceed 1", c.lambda));
    }
    if !(c.epsilon > 0.0 && c.epsilon < 1.0) {
        return fail(format!("epsilon {} must lie in (0, 1)", c.epsilon));
    }
    if let AValue::Single(a) = c.a {
        if !(a.is_finite() && a != 0.0) {
            return fail(format!("a = {a} must be finite and nonzero"));
        }
    }
    if c.budget == 0 {
        return fail("budget must be positive".into());
    }
    c.polynomial()?;
    Ok(())
}

pub fn parse_window(s: &str) -> Result<Window, CliError> {
    let v: Vec<f64> = s.split(':').map(|p| p.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad_window(s))?;
    let [x0, x1, y0, y1] = v[..] else { return Err(bad_window(s)) };
    let w = Window { x0, x1, y0, y1 };
    w.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(w)
}

fn bad_window(s: &str) -> CliError {
    CliError::Config(format!("window {s:?} is not X0:X1:Y0:Y1"))
}
