use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use hyperdyn::certify::{certify, certify_uniform, CertifyOptions, HyperbolicityCertificate};
use hyperdyn::complexdyn::{
    complex_threshold, critical_points, escape_time_grid, hyperbolicity_by_critical_orbits, ComplexThreshold, CriticalOrbitVerdict,
    CriticalSet, Window,
};
use hyperdyn::realdyn::{
    classify, cylinders, thresholds, trapping_system, CaseClassification, CaseContext, CylinderTree, IntervalSystem, LandmarkPoints,
    LevelStats, Thresholds,
};
use hyperdyn::symbolic::{verify_semiconjugacy, EventualPositivity, SemiconjugacyReport};
use hyperdyn::{Family, TransitionMatrix};
use serde::Serialize;

use crate::config::{AValue, ResolvedConfig, DEFAULT_RESOLUTION};
use crate::CliError;

#[derive(Debug, Serialize)]
pub struct ComplexDiagnostics {
    pub critical_points: Option<CriticalSet<f64>>,
    pub threshold: Option<ComplexThreshold<f64>>,
    pub critical_orbits: Option<CriticalOrbitVerdict<f64>>,
    pub errors: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct AnalysisReport {
    pub version: &'static str,
    pub config: ResolvedConfig,
    pub classification: CaseClassification,
    pub thresholds: Option<Thresholds<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thresholds_error: Option<String>,
    pub landmarks: LandmarkPoints<f64>,
    pub interval_system: IntervalSystem<f64>,
    pub eventual_positivity: EventualPositivity,
    pub cylinder_stats: Vec<LevelStats<f64>>,
    pub conjugacy: SemiconjugacyReport<f64>,
    pub certificate: HyperbolicityCertificate<f64>,
    pub complex: ComplexDiagnostics,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub supplied_matrix: Option<SuppliedMatrix>,
}

#[derive(Debug, Serialize)]
pub struct SuppliedMatrix {
    pub matrix: TransitionMatrix,
    pub eventual_positivity: EventualPositivity,
    pub matches_system: bool,
}

/// Written in place of the full report when construction fails.
#[derive(Debug, Serialize)]
pub struct FailureReport {
    pub version: &'static str,
    pub config: ResolvedConfig,
    pub status: &'static str,
    pub error: String,
    pub classification: Option<CaseClassification>,
    pub thresholds: Option<Thresholds<f64>>,
}

pub struct Failure {
    pub error: CliError,
    pub report: Option<FailureReport>,
}

impl From<CliError> for Failure {
    fn from(error: CliError) -> Self {
        Failure { error, report: None }
    }
}

fn io_err(path: &Path) -> impl Fn(io::Error) -> CliError + '_ {
    move |e| CliError::Io(format!("{}: {e}", path.display()))
}

fn complex_diagnostics(fam: &Family, budget: usize) -> ComplexDiagnostics {
    let mut errors = Vec::new();
    let critical_points = critical_points(&fam.g).map_err(|e| errors.push(format!("critical points: {e}"))).ok();
    let threshold = complex_threshold(&fam.g).map_err(|e| errors.push(format!("threshold: {e}"))).ok();
    let critical_orbits = hyperbolicity_by_critical_orbits(fam, budget).map_err(|e| errors.push(format!("critical orbits: {e}"))).ok();
    ComplexDiagnostics { critical_points, threshold, critical_orbits, errors }
}

pub struct Analysis {
    pub report: AnalysisReport,
    pub tree: CylinderTree<f64>,
}

pub fn analyze(cfg: ResolvedConfig) -> Result<Analysis, Failure> {
    let a = cfg.single_a()?;
    let fam = Family::new(cfg.polynomial()?, a);
    let fail = |cfg: &ResolvedConfig, e: String, cls: Option<CaseClassification>, thr: Option<Thresholds<f64>>| Failure {
        report: Some(FailureReport {
            version: env!("CARGO_PKG_VERSION"),
            config: cfg.clone(),
            status: if e.contains("hypotheses not satisfied") { "hypotheses not satisfied" } else { "construction failed" },
            error: e.clone(),
            classification: cls,
            thresholds: thr,
        }),
        error: CliError::Construction(e),
    };
    let cls = classify(&fam.g, a, cfg.pair).map_err(|e| fail(&cfg, e.to_string(), None, None))?;
    let thr = thresholds(&fam, &cls, cfg.lambda, cfg.epsilon).map_err(|e| e.to_string());
    let built = trapping_system(&fam, &cls, cfg.lambda, cfg.epsilon)
        .and_then(|(s, lm)| cylinders(&fam, &s, cfg.depth).map(|t| (s, lm, t)));
    let (system, landmarks, tree) = match built {
        Ok(b) => b,
        Err(e) => return Err(fail(&cfg, e.to_string(), Some(cls), thr.ok())),
    };
    let conjugacy = verify_semiconjugacy(&fam, &system, cfg.depth);
    let opts = CertifyOptions { budget: cfg.budget, ..CertifyOptions::default() };
    let certificate = certify(&fam, &system, &tree, cfg.strategy, opts);
    let supplied_matrix = cfg.matrix.clone().map(|m| SuppliedMatrix {
        eventual_positivity: m.is_eventually_positive(),
        matches_system: m == system.matrix,
        matrix: m,
    });
    let report = AnalysisReport {
        version: env!("CARGO_PKG_VERSION"),
        classification: cls,
        thresholds_error: thr.as_ref().err().cloned(),
        thresholds: thr.ok(),
        landmarks,
        eventual_positivity: system.matrix.is_eventually_positive(),
        cylinder_stats: tree.stats.clone(),
        conjugacy,
        certificate,
        complex: complex_diagnostics(&fam, cfg.budget),
        supplied_matrix,
        interval_system: system,
        config: cfg,
    };
    Ok(Analysis { report, tree })
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(io_err(p))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub fn write_report<R: Serialize>(report: &R, path: Option<&Path>) -> Result<(), CliError> {
    let mut out = open_out(path)?;
    serde_json::to_writer_pretty(&mut out, report).map_err(|e| CliError::Io(e.to_string()))?;
    writeln!(out).and_then(|_| out.flush()).map_err(|e| CliError::Io(e.to_string()))
}

/// Deepest-level cylinders as CSV.
pub fn write_cylinders(tree: &CylinderTree<f64>, path: &Path) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    w.write_record(["word", "left", "right", "length"]).map_err(|e| CliError::Io(e.to_string()))?;
    for c in tree.deepest() {
        w.write_record([
            c.word.to_string(),
            c.lo.to_string(),
            c.hi.to_string(),
            c.length().to_string(),
        ])
        .map_err(|e| CliError::Io(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}

#[derive(Debug, Default, Serialize)]
pub struct ScanRow {
    pub a: f64,
    pub context: String,
    pub u_a: Option<f64>,
    pub v_a: Option<f64>,
    pub min_abs_derivative: Option<f64>,
    pub verdict: String,
    pub route: String,
    pub u_decreasing: Option<bool>,
    pub v_increasing: Option<bool>,
    pub min_decreasing: Option<bool>,
    pub error: String,
}

fn context_name(c: &CaseContext) -> String {
    match c {
        CaseContext::TwoPositiveRoots => "two_positive_roots".into(),
        CaseContext::ZeroRootForm { d1, d2 } => format!("zero_root_form({d1},{d2})"),
        CaseContext::NegativeLeading { case, zero_root } => format!("negative_leading({case:?},{zero_root})"),
        CaseContext::MixedSignRoots { case } => format!("mixed_sign_roots({case})"),
        CaseContext::SingleRoot => "single_root".into(),
    }
}

fn route_name(c: &HyperbolicityCertificate<f64>) -> String {
    serde_json::to_value(&c.route)
        .ok()
        .and_then(|v| v.get("kind").and_then(|k| k.as_str()).map(str::to_string))
        .unwrap_or_default()
}

fn scan_row(cfg: &ResolvedConfig, a: f64) -> ScanRow {
    let mut row = ScanRow { a, ..ScanRow::default() };
    let fam = match cfg.polynomial() {
        Ok(g) => Family::new(g, a),
        Err(e) => {
            row.error = e.to_string();
            return row;
        }
    };
    let run = || -> Result<(String, LandmarkPoints<f64>, HyperbolicityCertificate<f64>, f64), String> {
        let cls = classify(&fam.g, a, cfg.pair).map_err(|e| e.to_string())?;
        let (s, lm) = trapping_system(&fam, &cls, cfg.lambda, cfg.epsilon).map_err(|e| e.to_string())?;
        let tree = cylinders(&fam, &s, cfg.depth).map_err(|e| e.to_string())?;
        let min = certify_uniform(&fam, &s, None).min_derivative.unwrap_or(f64::NAN);
        let opts = CertifyOptions { budget: cfg.budget, ..CertifyOptions::default() };
        Ok((context_name(&cls.context), lm, certify(&fam, &s, &tree, cfg.strategy, opts), min))
    };
    match run() {
        Ok((context, lm, cert, min)) => {
            row.context = context;
            row.u_a = lm.u_a;
            row.v_a = lm.v_a;
            row.min_abs_derivative = Some(min);
            row.verdict = format!("{:?}", cert.verdict);
            row.route = route_name(&cert);
        }
        Err(e) => row.error = e,
    }
    row
}

pub fn scan(cfg: &ResolvedConfig) -> Result<Vec<ScanRow>, CliError> {
    let values = match cfg.a {
        AValue::Range(r) => r.values()?,
        AValue::Single(a) => vec![a],
    };
    let mut rows: Vec<ScanRow> = values.into_iter().map(|a| scan_row(cfg, a)).collect();
    let trend = |prev: Option<f64>, cur: Option<f64>, dec: bool| match (prev, cur) {
        (Some(p), Some(c)) => Some(if dec { c < p } else { c > p }),
        _ => None,
    };
    let (mut pu, mut pv, mut pm) = (None, None, None);
    for r in rows.iter_mut() {
        r.u_decreasing = trend(pu, r.u_a, true);
        r.v_increasing = trend(pv, r.v_a, false);
        r.min_decreasing = trend(pm, r.min_abs_derivative, true);
        pu = r.u_a.or(pu);
        pv = r.v_a.or(pv);
        pm = r.min_abs_derivative.or(pm);
    }
    Ok(rows)
}

pub fn write_scan(rows: &[ScanRow], path: Option<&Path>) -> Result<(), CliError> {
    let out = open_out(path)?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    let fields = [
        "a",
        "context",
        "u_a",
        "v_a",
        "min_abs_derivative",
        "verdict",
        "route",
        "u_decreasing",
        "v_increasing",
        "min_decreasing",
        "error",
    ];
    let err = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(fields).map_err(err)?;
    for r in rows {
        w.serialize(r).map_err(err)?;
    }
    w.flush().map_err(|e| CliError::Io(e.to_string()))
}

#[derive(Debug, Serialize)]
pub struct GridMetadata {
    pub window: Window,
    pub width: usize,
    pub height: usize,
    pub k: f64,
    pub budget: usize,
    pub a: f64,
    pub maxval: usize,
}

pub fn julia(cfg: &ResolvedConfig) -> Result<(), CliError> {
    let a = cfg.single_a()?;
    let window = cfg.window.ok_or_else(|| CliError::Config("julia needs a window (--window X0:X1:Y0:Y1)".into()))?;
    let out = cfg.outputs.pgm.as_deref().ok_or_else(|| CliError::Config("julia needs an output path (--out FILE.pgm)".into()))?;
    let res = cfg.resolution.unwrap_or(DEFAULT_RESOLUTION);
    let fam = Family::new(cfg.polynomial()?, a);
    let grid = escape_time_grid(&fam, window, res, res, cfg.budget).map_err(|e| CliError::Config(e.to_string()))?;
    let mut w = BufWriter::new(File::create(out).map_err(io_err(out))?);
    grid.write_pgm(&mut w).and_then(|_| w.flush()).map_err(io_err(out))?;
    let meta = GridMetadata {
        window,
        width: grid.width,
        height: grid.height,
        k: grid.k,
        budget: grid.budget,
        a,
        maxval: grid.budget.max(1),
    };
    let side = out.with_extension("json");
    let mut s = BufWriter::new(File::create(&side).map_err(io_err(&side))?);
    serde_json::to_writer_pretty(&mut s, &meta).map_err(|e| CliError::Io(e.to_string()))?;
    writeln!(s).and_then(|_| s.flush()).map_err(io_err(&side))
}
