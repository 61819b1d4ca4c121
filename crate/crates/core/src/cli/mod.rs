//! Command-line front end.
//!
//! Each run writes `result.json` (deterministic for a fixed configuration and
//! seed), any tables as CSV, and `manifest.json` listing every emitted file
//! with its SHA-256. Exit codes: 0 success, 1 usage, 2 numerical failure
//! (`error.json` carries the diagnostic), 3 truncation guard.

mod output;
mod scenarios;

use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};

pub use output::{FileEntry, OutputDir};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_TRUNCATION: i32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Collective gate on |0…0⟩ and its EPR fidelity.
    Gate,
    /// Solve the gate schedule in both t₁ modes.
    Schedule,
    /// End-to-end cluster generation.
    Cluster,
    /// Geometric/dynamical phase table.
    Phases,
    /// Thermal-insensitivity scan.
    Thermal,
    /// Feasibility timescales.
    Feasibility,
    /// Scripted measurements on a generated cluster.
    Mbqc,
    /// Cartesian product over parameter lists.
    Sweep,
}

/// Run configuration. Flags override `--set`, which overrides `--params`.
#[derive(Clone, Debug, Parser, Serialize)]
#[command(name = "cavgate", version, about = "Collective geometric-phase gates and cluster states in a cavity")]
pub struct RunConfig {
    /// Scenario, positional form.
    #[arg(value_enum)]
    #[serde(skip)]
    scenario_arg: Option<Scenario>,

    #[arg(long, value_enum)]
    pub scenario: Option<Scenario>,

    /// Parameter file (JSON).
    #[arg(long)]
    pub params: Option<PathBuf>,

    /// Parameter override, e.g. `--set g=0.005 --set E_J=40ueV`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,

    /// ideal, closed_form, lamb_dicke or lab_frame.
    #[arg(long)]
    pub tier: Option<String>,

    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, default_value = "cavgate-out")]
    pub out: PathBuf,

    /// Lift the size guard on master-equation runs.
    #[arg(long)]
    pub force_large: bool,

    /// Gate phase, decimal or a fraction of π such as `pi/8`.
    #[arg(long)]
    pub gamma: Option<String>,

    #[arg(long = "N")]
    pub num_qubits: Option<usize>,

    /// Initial Fock level(s).
    #[arg(long, value_delimiter = ',')]
    pub fock: Vec<usize>,

    /// Thermal occupation(s) of the initial cavity state.
    #[arg(long, value_delimiter = ',')]
    pub nbar: Vec<f64>,

    /// Loop count(s).
    #[arg(long, value_delimiter = ',')]
    pub k: Vec<u32>,

    /// Odd index(es): `γ = (2n+1)π/8`.
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<u32>,

    /// paper or corrected.
    #[arg(long)]
    pub t1_mode: Option<String>,

    /// Cluster under cavity loss and qubit dephasing (Lamb–Dicke tier).
    #[arg(long)]
    pub noise: bool,

    /// piecewise, midpoint or cf4.
    #[arg(long)]
    pub integrator: Option<String>,

    /// Integrator step (ns).
    #[arg(long)]
    pub dt: Option<f64>,

    /// Qubits measured in order by the mbqc scenario.
    #[arg(long, value_delimiter = ',')]
    pub measure: Vec<usize>,

    /// Sweep axis, e.g. `--sweep g=0.01,0.005`; repeat for a product.
    #[arg(long = "sweep", value_name = "KEY=V1,V2,...")]
    pub sweep: Vec<String>,

    /// Scenario run at each sweep point.
    #[arg(long, value_enum, default_value = "cluster")]
    pub inner: Scenario,

    /// More log output on stderr (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count)]
    #[serde(skip)]
    pub verbose: u8,
}

impl RunConfig {
    pub fn scenario(&self) -> Result<Scenario> {
        match (self.scenario_arg, self.scenario) {
            (Some(a), Some(b)) if a != b => Err(Error::InvalidParameter(format!(
                "scenario given twice: {a:?} and {b:?}"
            ))),
            (Some(s), _) | (None, Some(s)) => Ok(s),
            (None, None) => Err(Error::InvalidParameter("no scenario given".into())),
        }
    }

    pub(crate) fn with_scenario(&self, s: Scenario) -> Self {
        Self { scenario_arg: None, scenario: Some(s), ..self.clone() }
    }
}

/// Maps an error to the process exit code.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Truncation { .. } => EXIT_TRUNCATION,
        e if e.is_numerical() => EXIT_NUMERICAL,
        Error::Io(_) => EXIT_NUMERICAL,
        _ => EXIT_USAGE,
    }
}

pub(crate) fn error_json(e: &Error, code: i32) -> serde_json::Value {
    let kind = match e {
        Error::Range(_) => "range",
        Error::Shape(_) => "shape",
        Error::SingularDetuning => "singular_detuning",
        Error::Truncation { .. } => "truncation",
        Error::Integration(_) => "integration",
        Error::Domain(_) => "domain",
        Error::InvalidParameter(_) => "invalid_parameter",
        Error::TooLarge(_) => "too_large",
        Error::Io(_) => "io",
        Error::Json(_) => "json",
    };
    let mut v = json!({ "error": kind, "message": e.to_string(), "exit_code": code });
    if let Error::Truncation { leaked, threshold, level, n_max } = e {
        v["leaked"] = json!(leaked);
        v["threshold"] = json!(threshold);
        v["level"] = json!(level);
        v["n_max"] = json!(n_max);
    }
    v
}

#[derive(Serialize)]
struct RunManifest<'a> {
    artifact: &'static str,
    version: &'static str,
    config: &'a RunConfig,
    started_unix_ms: u128,
    finished_unix_ms: u128,
    exit_code: i32,
    files: Vec<FileEntry>,
}

fn now_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0)
}

/// Runs one configuration, writes its files and returns the exit code.
pub fn run(cfg: &RunConfig) -> i32 {
    let started = now_ms();
    // The manifest echoes the scenario however it was given.
    let normalized;
    let cfg = match cfg.scenario() {
        Ok(s) => {
            normalized = cfg.with_scenario(s);
            &normalized
        }
        Err(_) => cfg,
    };
    let out = match OutputDir::create(&cfg.out) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: cannot create output directory {}: {e}", cfg.out.display());
            return EXIT_USAGE;
        }
    };
    let code = match scenarios::execute(cfg, &out) {
        Ok(code) => code,
        Err(e) => {
            let code = exit_code(&e);
            eprintln!("error: {e}");
            if let Err(w) = out.write_json("error.json", &error_json(&e, code)) {
                eprintln!("error: could not write error.json: {w}");
            }
            code
        }
    };
    let manifest = RunManifest {
        artifact: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        config: cfg,
        started_unix_ms: started,
        finished_unix_ms: now_ms(),
        exit_code: code,
        files: out.entries(),
    };
    let text = serde_json::to_string_pretty(&manifest).map(|mut s| {
        s.push('\n');
        s
    });
    match text.map_err(Error::from).and_then(|t| std::fs::write(out.root().join("manifest.json"), t).map_err(Error::from)) {
        Ok(()) => code,
        Err(e) => {
            eprintln!("error: could not write manifest: {e}");
            if code == EXIT_OK {
                EXIT_NUMERICAL
            } else {
                code
            }
        }
    }
}

/// Parses `std::env::args`, runs, and returns the exit code.
pub fn run_from_args() -> i32 {
    run_from(std::env::args_os())
}

pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cfg = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let level = match cfg.verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    run(&cfg)
}
