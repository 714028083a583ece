use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::config::{ConfigError, Mode, RunConfig, ScenarioName};
use super::csv::{fmt_float, CsvDocument};
use crate::analytic::{decoherence_factor, reduced_density_matrix, state_metrics};
use crate::ensemble::{
    decay_time, ensemble_statistics, recurrence_search, scaling_sweep, TimeGrid,
};
use crate::error::Error;
use crate::model::{
    build_environment_random, build_environment_scenario, validate, EnvironmentSpec, ScenarioKind,
    SystemAmplitudes,
};
use crate::oracle::crosscheck;

/// Crate version stamped into every provenance line.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Tolerance of the verify-mode oracle crosscheck.
pub const VERIFY_TOLERANCE: f64 = 1e-10;

pub const TRACE_COLUMNS: [&str; 9] = [
    "t",
    "re_z",
    "im_z",
    "abs_z",
    "rho_pp",
    "rho_mm",
    "abs_rho_pm",
    "purity",
    "entropy",
];

pub const RECURRENCE_COLUMNS: [&str; 8] = [
    "threshold",
    "t_start",
    "t_end",
    "dt",
    "decay_time",
    "found",
    "abs_z_at_found",
    "scanned_points",
];

pub const ENSEMBLE_COLUMNS: [&str; 10] = [
    "seed",
    "time_avg_abs_z_sq",
    "predicted_abs_z_sq",
    "relative_error",
    "abs_z_min",
    "abs_z_q25",
    "abs_z_median",
    "abs_z_q75",
    "abs_z_max",
    "late_sup_abs_z",
];

pub const SWEEP_COLUMNS: [&str; 2] = ["n", "median_sup_abs_z"];

pub const VERIFY_COLUMNS: [&str; 5] = ["case", "seed", "t", "max_deviation", "passed"];

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Engine(#[from] Error),
    #[error("invalid inputs: {0}")]
    Invalid(String),
    #[error("oracle crosscheck failed in {failures} case(s); max deviation {max_deviation:e} exceeds {tolerance:e}")]
    VerificationFailed {
        failures: usize,
        max_deviation: f64,
        tolerance: f64,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl RunError {
    /// 1 for configuration or usage problems, 2 for validation and numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::Io { .. } => 1,
            RunError::Engine(_) | RunError::Invalid(_) | RunError::VerificationFailed { .. } => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub output: PathBuf,
    pub rows: usize,
    /// One-line human-readable result.
    pub message: String,
}

fn provenance(config: &RunConfig) -> String {
    format!(
        "einlab {VERSION} mode={} config={}",
        config.mode.name(),
        config.digest()
    )
}

fn environment(config: &RunConfig, n: usize) -> Result<EnvironmentSpec, RunError> {
    let env = match config.scenario {
        ScenarioName::Random => build_environment_random(
            n,
            config.seed,
            config.g_min.ok_or(ConfigError::MissingKey("g_min"))?,
            config.g_max.ok_or(ConfigError::MissingKey("g_max"))?,
        )?,
        ScenarioName::Eigenstate | ScenarioName::Balanced => {
            let kind = if config.scenario == ScenarioName::Eigenstate {
                ScenarioKind::Eigenstate
            } else {
                ScenarioKind::BalancedEqualCoupling
            };
            build_environment_scenario(&kind, n, config.g.ok_or(ConfigError::MissingKey("g"))?)?
        }
    };
    Ok(env)
}

fn checked_inputs(
    config: &RunConfig,
    n: usize,
) -> Result<(SystemAmplitudes, EnvironmentSpec), RunError> {
    let sys = SystemAmplitudes::from_population(config.a_sq)?;
    let env = environment(config, n)?;
    let report = validate(&sys, &env);
    if !report.is_ok() {
        let msgs: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
        return Err(RunError::Invalid(msgs.join("; ")));
    }
    Ok((sys, env))
}

fn coupling_range(config: &RunConfig) -> Result<(f64, f64), RunError> {
    Ok((
        config.g_min.ok_or(ConfigError::MissingKey("g_min"))?,
        config.g_max.ok_or(ConfigError::MissingKey("g_max"))?,
    ))
}

fn trace(config: &RunConfig, n: usize) -> Result<(CsvDocument, String), RunError> {
    let (sys, env) = checked_inputs(config, n)?;
    let grid = TimeGrid::new(config.t_start, config.t_max, config.dt)?;
    let mut doc = CsvDocument::new(&provenance(config), &TRACE_COLUMNS);
    let mut min_abs_z = f64::INFINITY;
    for t in grid.times() {
        let z = decoherence_factor(&env, t).value;
        let rho = reduced_density_matrix(&sys, &env, t);
        let metrics = state_metrics(&rho);
        min_abs_z = min_abs_z.min(z.norm());
        doc.push_row(&[
            fmt_float(t),
            fmt_float(z.re),
            fmt_float(z.im),
            fmt_float(z.norm()),
            fmt_float(rho.rho[0][0].re),
            fmt_float(rho.rho[1][1].re),
            fmt_float(rho.rho[0][1].norm()),
            fmt_float(metrics.purity),
            fmt_float(metrics.entropy),
        ]);
    }
    let msg = format!("trace: {} points, min |z| = {min_abs_z:.6e}", grid.len());
    Ok((doc, msg))
}

fn recurrence(config: &RunConfig, n: usize) -> Result<(CsvDocument, String), RunError> {
    let (_, env) = checked_inputs(config, n)?;
    let grid = TimeGrid::new(config.t_start, config.t_max, config.dt)?;
    let report = recurrence_search(&env, config.threshold, &grid)?;
    let decay = if config.threshold < 1.0 {
        match decay_time(
            &env,
            config.threshold,
            &TimeGrid::new(0.0, config.t_max, config.dt)?,
        ) {
            Ok(t) => Some(t),
            Err(Error::NoDecay { .. }) => None,
            Err(e) => return Err(e.into()),
        }
    } else {
        None
    };
    let opt = |v: Option<f64>| v.map(fmt_float).unwrap_or_default();
    let mut doc = CsvDocument::new(&provenance(config), &RECURRENCE_COLUMNS);
    doc.push_row(&[
        fmt_float(report.threshold),
        fmt_float(grid.t_start()),
        fmt_float(grid.t_end()),
        fmt_float(grid.dt()),
        opt(decay),
        opt(report.found),
        opt(report.magnitude),
        report.scanned_points.to_string(),
    ]);
    let msg = match report.found {
        Some(t) => format!("recurrence: |z| >= {} at t = {t}", report.threshold),
        None => format!(
            "recurrence: none with |z| >= {} in {} points",
            report.threshold, report.scanned_points
        ),
    };
    Ok((doc, msg))
}

fn ensemble(config: &RunConfig, n: usize) -> Result<(CsvDocument, String), RunError> {
    let (g_min, g_max) = coupling_range(config)?;
    let grid = TimeGrid::new(config.t_start, config.t_max, config.dt)?;
    let report = ensemble_statistics(n, &config.seeds, &grid, g_min, g_max)?;
    let mut doc = CsvDocument::new(&provenance(config), &ENSEMBLE_COLUMNS);
    for s in &report.per_seed {
        let mut row = vec![
            s.seed.to_string(),
            fmt_float(s.time_avg_sq),
            fmt_float(s.predicted_sq),
            fmt_float(s.relative_error()),
        ];
        row.extend(s.abs_z_quantiles.iter().map(|&q| fmt_float(q)));
        row.push(fmt_float(s.late_sup));
        doc.push_row(&row);
    }
    let msg = format!(
        "ensemble: {} seeds, median time-averaged |z|^2 = {:.6e}, median late sup |z| = {:.6e}",
        report.seeds.len(),
        report.median_time_avg_sq,
        report.median_late_sup
    );
    Ok((doc, msg))
}

fn sweep(config: &RunConfig) -> Result<(CsvDocument, String), RunError> {
    let (g_min, g_max) = coupling_range(config)?;
    let seeds_per_n = config
        .seeds_per_n
        .ok_or(ConfigError::MissingKey("seeds_per_n"))?;
    let window = TimeGrid::new(config.t_start, config.t_max, config.dt)?;
    let rows = scaling_sweep(&config.ns, seeds_per_n, &window, g_min, g_max)?;
    let mut doc = CsvDocument::new(&provenance(config), &SWEEP_COLUMNS);
    for row in &rows {
        doc.push_row(&[row.n.to_string(), fmt_float(row.median_sup)]);
    }
    Ok((doc, format!("sweep: {} sizes", rows.len())))
}

/// Fractional part of `k·φ⁻¹`: a fixed, well-spread sequence in `[0, 1)`.
fn golden_fraction(k: usize) -> f64 {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    (k as f64 * INV_PHI).fract()
}

fn verify(config: &RunConfig, n: usize) -> Result<(CsvDocument, String), RunError> {
    let (g_min, g_max) = coupling_range(config)?;
    let sys = SystemAmplitudes::from_population(config.a_sq)?;
    let mut doc = CsvDocument::new(&provenance(config), &VERIFY_COLUMNS);
    let mut max_deviation = 0.0_f64;
    let mut failures = 0;
    for case in 0..config.cases {
        let seed = config.seed.wrapping_add(case as u64);
        let env = build_environment_random(n, seed, g_min, g_max)?;
        let t = config.t_max * golden_fraction(case + 1);
        let report = crosscheck(&sys, &env, t, VERIFY_TOLERANCE)?;
        max_deviation = max_deviation.max(report.max_deviation);
        if !report.passed {
            failures += 1;
        }
        doc.push_row(&[
            case.to_string(),
            seed.to_string(),
            fmt_float(t),
            fmt_float(report.max_deviation),
            u8::from(report.passed).to_string(),
        ]);
    }
    if failures > 0 {
        return Err(RunError::VerificationFailed {
            failures,
            max_deviation,
            tolerance: VERIFY_TOLERANCE,
        });
    }
    let msg = format!(
        "verify: {} cases passed, max deviation {max_deviation:e}",
        config.cases
    );
    Ok((doc, msg))
}

/// Write through a sibling `.partial` file and rename into place.
fn write_atomically(path: &Path, text: &str) -> Result<(), RunError> {
    let file_name = path
        .file_name()
        .map(|f| f.to_string_lossy().into_owned())
        .unwrap_or_default();
    let partial = path.with_file_name(format!(".{file_name}.partial"));
    fs::write(&partial, text)
        .and_then(|()| fs::rename(&partial, path))
        .map_err(|source| {
            let _ = fs::remove_file(&partial);
            RunError::Io {
                path: path.to_path_buf(),
                source,
            }
        })
}

/// Execute a configuration and write its CSV to `config.output`.
///
/// The document is assembled in memory and written only on success, so a
/// failing run leaves no partial file behind.
pub fn run(config: &RunConfig) -> Result<RunSummary, RunError> {
    let output = config
        .output
        .clone()
        .ok_or(ConfigError::MissingKey("output"))?;
    let n = || config.n.ok_or(ConfigError::MissingKey("n"));
    let result = match config.mode {
        Mode::Trace => trace(config, n()?),
        Mode::Recurrence => recurrence(config, n()?),
        Mode::Ensemble => ensemble(config, n()?),
        Mode::Sweep => sweep(config),
        Mode::Verify => verify(config, n()?),
    };
    let (doc, message) = result?;
    write_atomically(&output, doc.as_str())?;
    Ok(RunSummary {
        output,
        rows: doc.rows(),
        message,
    })
}
