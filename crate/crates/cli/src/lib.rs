pub mod commands;
pub mod config;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use hyperdyn::Strategy;
use thiserror::Error;

use config::{ARange, AValue, Outputs, Overrides, DEFAULT_BUDGET, DEFAULT_JULIA_BUDGET};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("construction failed: {0}")]
    Construction(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Construction(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "hyperdyn", version, about = "Hyperbolic horseshoes of polynomial families f_a = a*g")]
pub struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// JSON config file; command-line flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Polynomial spec as JSON.
    #[arg(long)]
    pub poly: Option<PathBuf>,
    /// Expansion target [default: 1.1].
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Cutoff parameter in (0, 1) [default: 0.5].
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Iteration budget [default: 500 for analyze and scan, 100 for julia].
    #[arg(long)]
    pub budget: Option<usize>,
    /// Index of the consecutive root pair to build on.
    #[arg(long)]
    pub pair: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the trapping system, cylinders and a hyperbolicity certificate.
    Analyze {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_negative_numbers = true)]
        a: Option<f64>,
        /// Cylinder depth in [1, 40] [default: 10].
        #[arg(long)]
        depth: Option<usize>,
        /// auto, uniform, perpoint, complex or witness [default: auto].
        #[arg(long, value_parser = parse_strategy)]
        strategy: Option<Strategy>,
        /// Report path (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        cylinders_csv: Option<PathBuf>,
    },
    /// Sweep a over a range and tabulate landmarks and verdicts.
    Scan {
        #[command(flatten)]
        common: Common,
        /// FROM:TO:SAMPLES[:log|:lin]
        #[arg(long = "a-range", allow_hyphen_values = true)]
        a_range: Option<String>,
        /// Cylinder depth in [1, 40] [default: 10].
        #[arg(long)]
        depth: Option<usize>,
        /// auto, uniform, perpoint, complex or witness [default: auto].
        #[arg(long, value_parser = parse_strategy)]
        strategy: Option<Strategy>,
        /// CSV path (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render an escape-time grid as PGM with a JSON sidecar.
    Julia {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_negative_numbers = true)]
        a: Option<f64>,
        /// X0:X1:Y0:Y1
        #[arg(long, allow_hyphen_values = true)]
        window: Option<String>,
        /// Pixels per side [default: 256].
        #[arg(long = "res", visible_alias = "resolution")]
        resolution: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    s.parse()
}

fn overrides(c: &Common) -> Overrides {
    Overrides {
        poly: c.poly.clone(),
        lambda: c.lambda,
        epsilon: c.epsilon,
        budget: c.budget,
        pair: c.pair,
        ..Overrides::default()
    }
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Analyze { common, a, depth, strategy, out, cylinders_csv } => {
            let file = config::load_config(common.config.as_deref())?;
            let o = Overrides {
                a: a.map(AValue::Single),
                depth,
                strategy,
                outputs: Outputs { report: out, cylinders_csv, ..Outputs::default() },
                ..overrides(&common)
            };
            let cfg = config::resolve(file, o, DEFAULT_BUDGET)?;
            let report_path = cfg.outputs.report.clone();
            let csv_path = cfg.outputs.cylinders_csv.clone();
            let analysis = match commands::analyze(cfg) {
                Ok(a) => a,
                Err(f) => {
                    if let Some(r) = &f.report {
                        commands::write_report(r, report_path.as_deref())?;
                    }
                    return Err(f.error);
                }
            };
            if let Some(p) = csv_path {
                commands::write_cylinders(&analysis.tree, &p)?;
            }
            commands::write_report(&analysis.report, report_path.as_deref())
        }
        Command::Scan { common, a_range, depth, strategy, out } => {
            let file = config::load_config(common.config.as_deref())?;
            let o = Overrides {
                a: a_range.as_deref().map(ARange::parse).transpose()?.map(AValue::Range),
                depth,
                strategy,
                outputs: Outputs { csv: out, ..Outputs::default() },
                ..overrides(&common)
            };
            let cfg = config::resolve(file, o, DEFAULT_BUDGET)?;
            let rows = commands::scan(&cfg)?;
            commands::write_scan(&rows, cfg.outputs.csv.as_deref())
        }
        Command::Julia { common, a, window, resolution, out } => {
            let file = config::load_config(common.config.as_deref())?;
            let o = Overrides {
                a: a.map(AValue::Single),
                window: window.as_deref().map(config::parse_window).transpose()?,
                resolution,
                outputs: Outputs { pgm: out, ..Outputs::default() },
                ..overrides(&common)
            };
            commands::julia(&config::resolve(file, o, DEFAULT_JULIA_BUDGET)?)
        }
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("warning: thread pool already initialised: {e}");
        }
    }
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
