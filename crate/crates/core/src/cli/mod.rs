//! Batch front-end: a JSON experiment configuration, overridable by flags,
//! dispatched to one command per process. Reports are deterministic for a
//! fixed configuration and seed.

pub mod commands;
pub mod config;
pub mod output;

use crate::error::Error;
use clap::{Args, Parser, Subcommand};
use config::{Command, ExperimentConfig, Format, OutputSpec};
use serde::Serialize;
use serde_json::Value;
use std::ffi::OsString;
use std::path::PathBuf;

pub use commands::{execute, Outcome};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_VIOLATED: i32 = 4;

/// Flag values are JSON when they parse as JSON and strings otherwise, so
/// `--s 1/2` and `--set '{"kind":...}'` both work.
fn json_or_string(s: &str) -> Result<Value, String> {
    Ok(serde_json::from_str(s).unwrap_or_else(|_| Value::String(s.to_string())))
}

#[derive(Debug, Parser)]
#[command(name = "shubinlab", version, about = "Spectral inequalities and controllability of anisotropic Shubin operators")]
pub struct Cli {
    /// Experiment configuration (JSON); flags override its params.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for internal parallelism.
    #[arg(long, global = true, env = "SHUBINLAB_JOBS")]
    pub jobs: Option<usize>,
    /// Seed for random samples (default 0).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub output: Option<String>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Option<Sub>,
}

// parsed once per process, so the variant sizes do not matter
#[allow(clippy::large_enum_variant)]
#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Lowest eigenvalues of H_{k,m}.
    Eig(EigArgs),
    /// Spectral projector below a threshold.
    Projector(ProjectorArgs),
    /// Density, thickness, covers and example sets.
    Geometry(GeometryArgs),
    /// Spectral-inequality verdicts for a model or a battery.
    VerifyIneq(VerifyArgs),
    /// Fit bound constants on a battery.
    Calibrate(CalibrateArgs),
    /// Observability constant and Shubin regime.
    ObsConst(ObsArgs),
    /// HUM controls for a truncated system.
    Hum(HumArgs),
    /// Baouendi–Grushin regimes, spectra, witnesses and times.
    Grushin(GrushinArgs),
    /// Large-k ground-state asymptotics.
    Asymptotics(AsymptoticsArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct EigArgs {
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<Value>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<Value>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<Value>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<Value>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub basis_size: Option<Value>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub basis_scale: Option<Value>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<Value>,
}

#[derive(Debug, Args, Serialize)]
pub struct ProjectorArgs {
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<Value>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<Value>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<Value>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Value>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<Value>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub basis_scale: Option<Value>,
}

#[derive(Debug, Args, Serialize)]
pub struct GeometryArgs {
    /// density | thickness | cover | example
    #[serde(skip_serializing_if = "Option::is_none")]
    pub op: Option<String>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub set: Option<Value>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile: Option<Value>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample: Option<Value>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<Value>,
    #[arg(long = "L", value_parser = json_or_string)]
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    pub l: Option<Value>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub centre: Option<Value>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub radius: Option<Value>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<Value>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_bes: Option<Value>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub example: Option<Value>,
}

#[derive(Debug, Args, Serialize)]
pub struct VerifyArgs {
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<Value>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile: Option<Value>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub set: Option<Value>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Value>,
    /// Battery file.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub battery: Option<String>,
    /// Calibration table written by `calibrate`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub calibration: Option<String>,
}

#[derive(Debug, Args, Serialize)]
pub struct CalibrateArgs {
    /// Battery file.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub battery: Option<String>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bernstein: Option<Value>,
}

#[derive(Debug, Args, Serialize)]
pub struct ObsArgs {
    /// constant | shubin-regime
    #[serde(skip_serializing_if = "Option::is_none")]
    pub op: Option<String>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d0: Option<Value>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d1: Option<Value>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<Value>,
    #[arg(long = "T", value_parser = json_or_string)]
    #[serde(rename = "T", skip_serializing_if = "Option::is_none")]
    pub t: Option<Value>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c1: Option<Value>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c2: Option<Value>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c3: Option<Value>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<Value>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<Value>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<Value>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile: Option<Value>,
}

#[derive(Debug, Args, Serialize)]
pub struct HumArgs {
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<Value>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<Value>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<Value>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub set: Option<Value>,
    #[arg(long = "T", value_parser = json_or_string)]
    #[serde(rename = "T", skip_serializing_if = "Option::is_none")]
    pub t: Option<Value>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<Value>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f0: Option<Value>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<Value>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time_cells: Option<Value>,
}

#[derive(Debug, Args, Serialize)]
pub struct GrushinArgs {
    /// regimes | spectrum | scaling | witness | times | probe
    #[serde(skip_serializing_if = "Option::is_none")]
    pub op: Option<String>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Value>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<Value>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<Value>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<Value>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<Value>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<Value>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub basis_size: Option<Value>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub block: Option<Value>,
    #[arg(long = "L-dist", value_parser = json_or_string)]
    #[serde(rename = "L_dist", skip_serializing_if = "Option::is_none")]
    pub l_dist: Option<Value>,
    #[arg(long = "T", value_parser = json_or_string)]
    #[serde(rename = "T", skip_serializing_if = "Option::is_none")]
    pub big_t: Option<Value>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<Value>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<Value>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dist: Option<Value>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<Value>,
    #[arg(long = "L", value_parser = json_or_string)]
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    pub l: Option<Value>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_gamma: Option<Value>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub set: Option<Value>,
    /// Probe time.
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<Value>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x0: Option<Value>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub box_half_width: Option<Value>,
}

#[derive(Debug, Args, Serialize)]
pub struct AsymptoticsArgs {
    /// dirichlet | ground | bracket | study | coupling | series
    #[serde(skip_serializing_if = "Option::is_none")]
    pub op: Option<String>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<Value>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<Value>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<Value>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_grid: Option<Value>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub couplings: Option<Value>,
    #[arg(long, value_parser = json_or_string)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terms: Option<Value>,
}

impl Sub {
    fn command(&self) -> Command {
        match self {
            Sub::Eig(_) => Command::Eig,
            Sub::Projector(_) => Command::Projector,
            Sub::Geometry(_) => Command::Geometry,
            Sub::VerifyIneq(_) => Command::VerifyIneq,
            Sub::Calibrate(_) => Command::Calibrate,
            Sub::ObsConst(_) => Command::ObsConst,
            Sub::Hum(_) => Command::Hum,
            Sub::Grushin(_) => Command::Grushin,
            Sub::Asymptotics(_) => Command::Asymptotics,
        }
    }

    fn overrides(&self) -> serde_json::Result<Value> {
        match self {
            Sub::Eig(a) => serde_json::to_value(a),
            Sub::Projector(a) => serde_json::to_value(a),
            Sub::Geometry(a) => serde_json::to_value(a),
            Sub::VerifyIneq(a) => serde_json::to_value(a),
            Sub::Calibrate(a) => serde_json::to_value(a),
            Sub::ObsConst(a) => serde_json::to_value(a),
            Sub::Hum(a) => serde_json::to_value(a),
            Sub::Grushin(a) => serde_json::to_value(a),
            Sub::Asymptotics(a) => serde_json::to_value(a),
        }
    }
}

/// A failure before or during a run, with the exit status it maps to.
#[derive(Debug)]
pub struct RunError {
    pub status: i32,
    pub message: String,
}

impl RunError {
    fn config(message: impl Into<String>) -> Self {
        Self { status: EXIT_CONFIG, message: message.into() }
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::InvalidParameter(_) | Error::InvalidModel(_) | Error::Unsupported(_) => EXIT_CONFIG,
            _ => EXIT_NUMERICAL,
        };
        Self { status, message: e.to_string() }
    }
}

/// The effective configuration: the file (if any) with flags merged over
/// its params.
pub fn resolve_config(cli: &Cli) -> Result<ExperimentConfig, RunError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| RunError::config(format!("{}: {e}", path.display())))?;
            serde_json::from_str::<ExperimentConfig>(&text).map_err(|e| RunError::config(format!("{}: {e}", path.display())))?
        }
        None => {
            let sub = cli.command.as_ref().ok_or_else(|| RunError::config("no command given and no --config file"))?;
            ExperimentConfig {
                command: sub.command(),
                params: Value::Object(Default::default()),
                output: OutputSpec { path: None, format: None },
                seed: 0,
            }
        }
    };
    if let Some(sub) = &cli.command {
        if sub.command() != cfg.command {
            return Err(RunError::config(format!("flags are for {:?} but the config runs {:?}", sub.command(), cfg.command)));
        }
        let Value::Object(params) = &mut cfg.params else {
            return Err(RunError::config("params must be a JSON object"));
        };
        let Value::Object(over) = sub.overrides().map_err(|e| RunError::config(e.to_string()))? else {
            unreachable!("argument structs serialise to objects")
        };
        params.extend(over);
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(path) = &cli.output {
        cfg.output.path = Some(path.clone());
    }
    if let Some(f) = cli.format {
        cfg.output.format = Some(f);
    }
    Ok(cfg)
}

/// What a run prints and writes.
#[derive(Debug, Clone, PartialEq)]
pub struct Emission {
    pub stdout: String,
    /// `(path, contents)` of the declared output file.
    pub file: Option<(String, String)>,
    pub status: i32,
}

/// Run a configuration and render its outputs without touching the disk.
pub fn render(cfg: &ExperimentConfig) -> Result<Emission, RunError> {
    let outcome = execute(cfg)?;
    let json = output::to_json_text(&outcome.report);
    let body = match cfg.format() {
        Format::Json => json.clone(),
        Format::Csv => match &outcome.table {
            Some(t) => t.to_csv()?,
            None => return Err(RunError::config(format!("{:?} has no CSV form; use --format json", cfg.command))),
        },
    };
    let status = if outcome.violated { EXIT_VIOLATED } else { EXIT_OK };
    Ok(match &cfg.output.path {
        None => Emission { stdout: body, file: None, status },
        Some(path) => {
            // CSV files carry only columns; the report goes to stdout
            let stdout = if cfg.format() == Format::Csv { json } else { String::new() };
            Emission { stdout, file: Some((path.clone(), body)), status }
        }
    })
}

/// Parse arguments, run, write outputs; returns the process exit status.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    if let Some(n) = cli.jobs {
        if n == 0 {
            eprintln!("error: --jobs must be at least 1");
            return EXIT_CONFIG;
        }
        // fails only if the pool already exists, which keeps its size
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let result = resolve_config(&cli).and_then(|cfg| render(&cfg));
    match result {
        Ok(em) => {
            if let Some((path, body)) = &em.file {
                if let Err(e) = std::fs::write(path, body) {
                    eprintln!("error: {path}: {e}");
                    return EXIT_CONFIG;
                }
            }
            print!("{}", em.stdout);
            em.status
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.status
        }
    }
}
