//! Named, config-driven experiments that write CSV series and a JSON report.
//!
//! A run is fully determined by its [`RunConfig`] and [`RunOptions`]; the
//! same inputs produce byte-identical CSV files.

mod config;
mod output;
mod runners;

use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::dense_bytes;

pub use config::{
    build_model, check_budget, model_dimension, AnalysisConfig, EnsembleConfig, GridConfig, OperatorRef,
    OperatorsConfig, OutputConfig, OwnedState, PresetState, PureConfig, RunConfig, RunOptions, OUTPUT_ROOT_ENV,
};
pub use output::{Check, Column, CsvTable, ExperimentReport, FileEntry, OutputDir, Provenance, REPORT_SCHEMA_VERSION};

use runners::Dims;

/// Exit codes of the command-line runner.
pub mod exit {
    pub const OK: i32 = 0;
    pub const INTERNAL: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const RESOURCE: i32 = 3;
    pub const VALIDATION: i32 = 4;
    pub const IO: i32 = 5;
    pub const MODEL_SPEC: i32 = 6;
}

/// Process exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::MemoryBudget { .. } => exit::RESOURCE,
        Error::Validation { .. } | Error::NotHermitian { .. } | Error::NotUnitary { .. } => exit::VALIDATION,
        Error::Io { .. } => exit::IO,
        Error::InvalidSpec(_) => exit::MODEL_SPEC,
        Error::InvalidSeries(_) | Error::InsufficientData(_) => exit::INTERNAL,
        Error::Config(_)
        | Error::SpaceMismatch { .. }
        | Error::InvalidSpace(_)
        | Error::DimensionMismatch { .. }
        | Error::SiteOutOfRange { .. }
        | Error::EmptyKeepSet
        | Error::InvalidState(_)
        | Error::NonIntegerTime { .. }
        | Error::InvalidGrid(_)
        | Error::Unsupported(_) => exit::CONFIG,
    }
}

/// Working context handed to an experiment.
pub(crate) struct Ctx<'a> {
    pub cfg: &'a RunConfig,
    pub opts: &'a RunOptions,
    pub seed: u64,
    pub out: OutputDir,
}

impl Ctx<'_> {
    pub fn report(&self) -> ExperimentReport {
        ExperimentReport::new(
            self.cfg,
            Provenance {
                package: env!("CARGO_PKG_NAME").into(),
                version: env!("CARGO_PKG_VERSION").into(),
                seed: self.seed,
                memory_cap_bytes: self.opts.memory_cap,
                analysis: self.cfg.analysis.settings(),
                truncation_drift: None,
                saturation_proxy: None,
            },
        )
    }
}

/// Registry entry.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ExperimentInfo {
    pub name: &'static str,
    pub description: &'static str,
    /// Topic the experiment illustrates.
    pub motivation: &'static str,
    #[serde(skip)]
    plan: fn(&RunConfig) -> Result<Dims>,
    #[serde(skip)]
    run: for<'a> fn(&Ctx<'a>) -> Result<ExperimentReport>,
}

const fn entry(
    name: &'static str,
    description: &'static str,
    motivation: &'static str,
    plan: fn(&RunConfig) -> Result<Dims>,
    run: for<'a> fn(&Ctx<'a>) -> Result<ExperimentReport>,
) -> ExperimentInfo {
    ExperimentInfo {
        name,
        description,
        motivation,
        plan,
        run,
    }
}

/// Every experiment, in listing order.
pub const REGISTRY: &[ExperimentInfo] = &[
    entry(
        "single_qubit_check",
        "H = omega sigma_x / 2, W = V = sigma_z: C(t) against 4 sin^2(omega t)",
        "squared commutator definition",
        runners::plan_single_qubit,
        runners::run_single_qubit,
    ),
    entry(
        "chain_otoc",
        "OTOC, squared commutator (all routes) and 2-point function on a spin chain",
        "scrambling in many-body chains",
        runners::plan_chain_otoc,
        runners::run_chain_otoc,
    ),
    entry(
        "chain_spreading",
        "Pauli-string support of W(t) per site and light-cone arrival times",
        "operator growth and locality",
        runners::plan_spreading,
        runners::run_spreading,
    ),
    entry(
        "chain_entropy_vs_otoc",
        "half-chain entanglement entropy after a quench next to C(t)",
        "entanglement versus scrambling",
        runners::plan_entropy,
        runners::run_entropy,
    ),
    entry(
        "integrable_vs_chaotic",
        "conserved spin flip on the integrable chain versus the chaotic chain",
        "integrable versus chaotic dynamics",
        runners::plan_contrast,
        runners::run_contrast,
    ),
    entry(
        "inverted_oscillator",
        "exponential C(t) of the inverted oscillator with a truncation-convergence check",
        "instability without chaos",
        runners::plan_oscillator,
        runners::run_oscillator,
    ),
    entry(
        "island_vs_sea",
        "kicked-rotor wavepackets in a regular island and in the chaotic sea",
        "mixed phase space",
        runners::plan_island_sea,
        runners::run_island_sea,
    ),
    entry(
        "ehrenfest_scaling",
        "kicked-rotor saturation time against ln(1/hbar_eff)",
        "Ehrenfest time",
        runners::plan_ehrenfest,
        runners::run_ehrenfest,
    ),
    entry(
        "mss_report",
        "fitted growth rate against the 2 pi T chaos bound at several temperatures",
        "bound on chaos",
        runners::plan_oscillator,
        runners::run_mss,
    ),
    entry(
        "cat_map_koopman",
        "Ulam transfer matrix of the cat map and its correlation decay",
        "linear (Koopman) view of classical chaos",
        runners::plan_koopman,
        runners::run_koopman,
    ),
    entry(
        "classical_lyapunov",
        "tangent-map Lyapunov exponents, finite-difference sensitivity and a standard-map portrait",
        "classical Lyapunov exponents",
        runners::plan_lyapunov,
        runners::run_lyapunov,
    ),
    entry(
        "recurrence_demo",
        "return probability of a 2-qubit chain at its common period",
        "recurrences in finite systems",
        runners::plan_recurrence,
        runners::run_recurrence,
    ),
];

pub fn find(name: &str) -> Result<&'static ExperimentInfo> {
    REGISTRY.iter().find(|e| e.name == name).ok_or_else(|| {
        let known: Vec<_> = REGISTRY.iter().map(|e| e.name).collect();
        Error::Config(format!("unknown experiment '{name}' (known: {})", known.join(", ")))
    })
}

/// One line per experiment: `name  description  [motivation]`.
pub fn list_experiments() -> String {
    let width = REGISTRY.iter().map(|e| e.name.len()).max().unwrap_or(0);
    REGISTRY
        .iter()
        .map(|e| format!("{:width$}  {}  [{}]\n", e.name, e.description, e.motivation))
        .collect()
}

/// Outcome of `validate`: what a run would allocate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostics {
    pub experiment: String,
    pub dimensions: Vec<(String, usize)>,
    /// Footprint of one dense matrix at the largest dimension.
    pub dense_bytes: u128,
    pub memory_cap: u128,
}

impl std::fmt::Display for Diagnostics {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "ok: {}", self.experiment)?;
        for (name, dim) in &self.dimensions {
            writeln!(
                f,
                "  {name}: dimension {dim} ({} bytes per dense matrix)",
                dense_bytes(*dim)
            )?;
        }
        write!(
            f,
            "  peak dense matrix {} bytes (cap {})",
            self.dense_bytes, self.memory_cap
        )
    }
}

/// Parses and checks a config without running it, refusing configs whose
/// dense footprint exceeds the memory cap.
pub fn validate(cfg: &RunConfig, opts: &RunOptions) -> Result<Diagnostics> {
    let info = find(&cfg.experiment)?;
    let dimensions = (info.plan)(cfg)?;
    let peak = dimensions.iter().map(|(_, d)| *d).max().unwrap_or(0);
    check_budget(peak, opts.memory_cap)?;
    Ok(Diagnostics {
        experiment: cfg.experiment.clone(),
        dense_bytes: dense_bytes(peak),
        dimensions,
        memory_cap: opts.memory_cap,
    })
}

pub fn validate_path(path: &Path, opts: &RunOptions) -> Result<Diagnostics> {
    validate(&RunConfig::from_path(path)?, opts)
}

/// Runs an experiment end to end and writes its files plus `report.json`.
///
/// A failing hard check is reported as [`Error::Validation`] after the files
/// have been written.
pub fn run(cfg: &RunConfig, opts: &RunOptions) -> Result<ExperimentReport> {
    validate(cfg, opts)?;
    let info = find(&cfg.experiment)?;
    let ctx = Ctx {
        cfg,
        opts,
        seed: opts.seed(cfg),
        out: OutputDir::create(opts.resolve_output(cfg))?,
    };
    let mut report = (info.run)(&ctx)?;
    let failure = report.hard_failure().cloned();
    if failure.is_some() {
        report.status = "validation_failed".into();
    }
    ctx.out.report(&report)?;
    match failure {
        Some(c) => Err(Error::Validation {
            check: c.name,
            deviation: c.value,
            tolerance: c.threshold,
        }),
        None => Ok(report),
    }
}

pub fn run_path(path: &Path, opts: &RunOptions) -> Result<ExperimentReport> {
    run(&RunConfig::from_path(path)?, opts)
}

/// Directory holding the shipped preset configs.
pub fn presets_dir() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/presets"))
}
