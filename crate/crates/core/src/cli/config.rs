//! `key = value` run configuration.
//!
//! One assignment per line, `#` starts a comment, blank lines are ignored and
//! unknown or repeated keys are rejected.

use std::fmt::Write as _;
use std::path::PathBuf;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::ensemble::{default_dt, DEFAULT_RECURRENCE_THRESHOLD};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("line {line}: cannot parse `{token}`: {reason}")]
    Parse {
        line: usize,
        token: String,
        reason: String,
    },

    #[error("missing required key `{0}`")]
    MissingKey(&'static str),

    #[error("`{key}` = {value}: {reason}")]
    Range {
        key: String,
        value: String,
        reason: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Trace,
    Recurrence,
    Ensemble,
    Sweep,
    Verify,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Trace => "trace",
            Mode::Recurrence => "recurrence",
            Mode::Ensemble => "ensemble",
            Mode::Sweep => "sweep",
            Mode::Verify => "verify",
        }
    }
}

/// Scenarios expressible in a config file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioName {
    Random,
    Eigenstate,
    Balanced,
}

impl ScenarioName {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioName::Random => "random",
            ScenarioName::Eigenstate => "eigenstate",
            ScenarioName::Balanced => "balanced",
        }
    }
}

/// Number of verify cases when `cases` is not given.
pub const DEFAULT_VERIFY_CASES: usize = 100;
/// Verify-mode time horizon when `t_max` is not given.
pub const DEFAULT_VERIFY_T_MAX: f64 = 20.0;
/// Default lower coupling bound as a fraction of `g_max`.
pub const DEFAULT_G_MIN_FRACTION: f64 = 0.05;

/// A parsed, range-checked run configuration with defaults filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub n: Option<usize>,
    pub seed: u64,
    pub seeds: Vec<u64>,
    pub ns: Vec<usize>,
    pub seeds_per_n: Option<usize>,
    pub cases: usize,
    pub scenario: ScenarioName,
    pub g: Option<f64>,
    pub g_min: Option<f64>,
    pub g_max: Option<f64>,
    pub a_sq: f64,
    pub t_start: f64,
    pub t_max: f64,
    pub dt: f64,
    pub threshold: f64,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    /// Every resolved field except `output`, one `key = value` per line.
    pub fn canonical(&self) -> String {
        fn opt<T: std::fmt::Debug>(v: &Option<T>) -> String {
            v.as_ref().map_or("-".to_string(), |x| format!("{x:?}"))
        }
        let mut s = String::new();
        let _ = writeln!(s, "mode = {}", self.mode.name());
        let _ = writeln!(s, "n = {}", opt(&self.n));
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "seeds = {:?}", self.seeds);
        let _ = writeln!(s, "ns = {:?}", self.ns);
        let _ = writeln!(s, "seeds_per_n = {}", opt(&self.seeds_per_n));
        let _ = writeln!(s, "cases = {}", self.cases);
        let _ = writeln!(s, "scenario = {}", self.scenario.name());
        let _ = writeln!(s, "g = {}", opt(&self.g));
        let _ = writeln!(s, "g_min = {}", opt(&self.g_min));
        let _ = writeln!(s, "g_max = {}", opt(&self.g_max));
        let _ = writeln!(s, "a_sq = {:?}", self.a_sq);
        let _ = writeln!(s, "t_start = {:?}", self.t_start);
        let _ = writeln!(s, "t_max = {:?}", self.t_max);
        let _ = writeln!(s, "dt = {:?}", self.dt);
        let _ = writeln!(s, "threshold = {:?}", self.threshold);
        s
    }

    /// SHA-256 of [`RunConfig::canonical`], hex encoded.
    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }
}

const KEYS: &[&str] = &[
    "mode",
    "n",
    "seed",
    "seeds",
    "ns",
    "seeds_per_n",
    "cases",
    "scenario",
    "g",
    "g_min",
    "g_max",
    "a_sq",
    "t_start",
    "t_max",
    "dt",
    "threshold",
    "output",
];

#[derive(Default)]
struct Raw {
    mode: Option<Mode>,
    n: Option<usize>,
    seed: Option<u64>,
    seeds: Option<Vec<u64>>,
    ns: Option<Vec<usize>>,
    seeds_per_n: Option<usize>,
    cases: Option<usize>,
    scenario: Option<ScenarioName>,
    g: Option<f64>,
    g_min: Option<f64>,
    g_max: Option<f64>,
    a_sq: Option<f64>,
    t_start: Option<f64>,
    t_max: Option<f64>,
    dt: Option<f64>,
    threshold: Option<f64>,
    output: Option<PathBuf>,
}

fn range(key: &str, value: impl std::fmt::Display, reason: &str) -> ConfigError {
    ConfigError::Range {
        key: key.to_string(),
        value: value.to_string(),
        reason: reason.to_string(),
    }
}

struct Line<'a> {
    number: usize,
    key: &'a str,
    value: &'a str,
}

impl Line<'_> {
    fn parse_error(&self, reason: impl Into<String>) -> ConfigError {
        ConfigError::Parse {
            line: self.number,
            token: self.value.to_string(),
            reason: reason.into(),
        }
    }

    fn float(&self) -> Result<f64, ConfigError> {
        let v: f64 = self
            .value
            .parse()
            .map_err(|_| self.parse_error("expected a number"))?;
        if !v.is_finite() {
            return Err(range(self.key, self.value, "must be finite"));
        }
        Ok(v)
    }

    fn positive(&self) -> Result<f64, ConfigError> {
        let v = self.float()?;
        if v <= 0.0 {
            return Err(range(self.key, self.value, "must be positive"));
        }
        Ok(v)
    }

    fn count(&self) -> Result<usize, ConfigError> {
        let v: i64 = self
            .value
            .parse()
            .map_err(|_| self.parse_error("expected an integer"))?;
        usize::try_from(v).map_err(|_| range(self.key, self.value, "must be non-negative"))
    }

    fn seed(&self, token: &str) -> Result<u64, ConfigError> {
        token
            .trim()
            .parse()
            .map_err(|_| self.parse_error("expected an unsigned 64-bit integer"))
    }

    /// `a, b, c` or the half-open range `start..end`.
    fn seed_list(&self) -> Result<Vec<u64>, ConfigError> {
        let seeds = match self.value.split_once("..") {
            Some((lo, hi)) => (self.seed(lo)?..self.seed(hi)?).collect(),
            None => self
                .value
                .split(',')
                .map(|tok| self.seed(tok))
                .collect::<Result<Vec<_>, _>>()?,
        };
        if seeds.is_empty() {
            return Err(range(self.key, self.value, "must name at least one seed"));
        }
        Ok(seeds)
    }
}

/// Parse and range-check a configuration.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut raw = Raw::default();
    let mut seen: Vec<&str> = Vec::new();

    for (idx, full) in text.lines().enumerate() {
        let number = idx + 1;
        let content = full.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::Parse {
                line: number,
                token: content.to_string(),
                reason: "expected `key = value`".into(),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        let Some(&key) = KEYS.iter().find(|&&k| k == key) else {
            return Err(ConfigError::Parse {
                line: number,
                token: key.to_string(),
                reason: "unknown key".into(),
            });
        };
        if seen.contains(&key) {
            return Err(ConfigError::Parse {
                line: number,
                token: key.to_string(),
                reason: "key given twice".into(),
            });
        }
        seen.push(key);
        let line = Line { number, key, value };

        match key {
            "mode" => {
                raw.mode = Some(match value {
                    "trace" => Mode::Trace,
                    "recurrence" => Mode::Recurrence,
                    "ensemble" => Mode::Ensemble,
                    "sweep" => Mode::Sweep,
                    "verify" => Mode::Verify,
                    _ => return Err(line.parse_error("unknown mode")),
                })
            }
            "n" => raw.n = Some(line.count()?),
            "seed" => raw.seed = Some(line.seed(value)?),
            "seeds" => raw.seeds = Some(line.seed_list()?),
            "ns" => {
                let ns = value
                    .split(',')
                    .map(|tok| {
                        Line {
                            number,
                            key,
                            value: tok.trim(),
                        }
                        .count()
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                if ns.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(range(key, value, "must be strictly ascending"));
                }
                raw.ns = Some(ns);
            }
            "seeds_per_n" | "cases" => {
                let v = line.count()?;
                if v == 0 {
                    return Err(range(key, value, "must be at least 1"));
                }
                if key == "cases" {
                    raw.cases = Some(v);
                } else {
                    raw.seeds_per_n = Some(v);
                }
            }
            "scenario" => {
                raw.scenario = Some(match value {
                    "random" => ScenarioName::Random,
                    "eigenstate" => ScenarioName::Eigenstate,
                    "balanced" | "balanced_equal_coupling" => ScenarioName::Balanced,
                    _ => return Err(line.parse_error("unknown scenario")),
                })
            }
            "g" => raw.g = Some(line.positive()?),
            "g_min" => raw.g_min = Some(line.positive()?),
            "g_max" => raw.g_max = Some(line.positive()?),
            "a_sq" => {
                let v = line.float()?;
                if !(0.0..=1.0).contains(&v) {
                    return Err(range(key, value, "must lie in [0, 1]"));
                }
                raw.a_sq = Some(v);
            }
            "t_start" => {
                let v = line.float()?;
                if v < 0.0 {
                    return Err(range(key, value, "must be non-negative"));
                }
                raw.t_start = Some(v);
            }
            "t_max" => raw.t_max = Some(line.positive()?),
            "dt" => raw.dt = Some(line.positive()?),
            "threshold" => {
                let v = line.float()?;
                if !(v > 0.0 && v <= 1.0) {
                    return Err(range(key, value, "must lie in (0, 1]"));
                }
                raw.threshold = Some(v);
            }
            "output" => {
                if value.is_empty() {
                    return Err(line.parse_error("empty path"));
                }
                raw.output = Some(PathBuf::from(value));
            }
            _ => unreachable!("key list and match arms disagree"),
        }
    }

    resolve(raw)
}

fn resolve(raw: Raw) -> Result<RunConfig, ConfigError> {
    let mode = raw.mode.ok_or(ConfigError::MissingKey("mode"))?;
    let scenario = raw.scenario.unwrap_or(ScenarioName::Random);
    let random_env = match mode {
        Mode::Trace | Mode::Recurrence => scenario == ScenarioName::Random,
        Mode::Ensemble | Mode::Sweep | Mode::Verify => true,
    };

    match mode {
        Mode::Trace | Mode::Recurrence | Mode::Ensemble | Mode::Verify => {
            raw.n.ok_or(ConfigError::MissingKey("n"))?;
        }
        Mode::Sweep => {
            raw.ns.as_ref().ok_or(ConfigError::MissingKey("ns"))?;
            raw.seeds_per_n
                .ok_or(ConfigError::MissingKey("seeds_per_n"))?;
        }
    }
    if mode == Mode::Ensemble && raw.seeds.is_none() {
        return Err(ConfigError::MissingKey("seeds"));
    }
    if matches!(mode, Mode::Recurrence | Mode::Sweep) && raw.t_start.is_none() {
        return Err(ConfigError::MissingKey("t_start"));
    }
    if mode == Mode::Recurrence && raw.t_start == Some(0.0) {
        return Err(range(
            "t_start",
            0.0,
            "recurrence scans must start after t = 0",
        ));
    }
    if mode != Mode::Verify && raw.t_max.is_none() {
        return Err(ConfigError::MissingKey("t_max"));
    }

    let (g_min, g_max) = if random_env {
        let g_max = raw.g_max.ok_or(ConfigError::MissingKey("g_max"))?;
        let g_min = raw.g_min.unwrap_or(DEFAULT_G_MIN_FRACTION * g_max);
        if g_min > g_max {
            return Err(range("g_min", g_min, "must not exceed g_max"));
        }
        (Some(g_min), Some(g_max))
    } else {
        raw.g.ok_or(ConfigError::MissingKey("g"))?;
        (raw.g_min, raw.g_max)
    };
    if matches!(mode, Mode::Trace | Mode::Recurrence) && random_env && raw.seed.is_none() {
        return Err(ConfigError::MissingKey("seed"));
    }

    let fastest = if random_env { g_max } else { raw.g };
    let dt = match raw.dt {
        Some(dt) => dt,
        None => default_dt(fastest.expect("coupling resolved above")),
    };
    let t_start = raw.t_start.unwrap_or(0.0);
    let t_max = raw.t_max.unwrap_or(DEFAULT_VERIFY_T_MAX);
    if t_start > t_max {
        return Err(range("t_start", t_start, "must not exceed t_max"));
    }

    Ok(RunConfig {
        mode,
        n: raw.n,
        seed: raw.seed.unwrap_or(0),
        seeds: raw.seeds.unwrap_or_default(),
        ns: raw.ns.unwrap_or_default(),
        seeds_per_n: raw.seeds_per_n,
        cases: raw.cases.unwrap_or(DEFAULT_VERIFY_CASES),
        scenario,
        g: raw.g,
        g_min,
        g_max,
        a_sq: raw.a_sq.unwrap_or(0.5),
        t_start,
        t_max,
        dt,
        threshold: raw.threshold.unwrap_or(DEFAULT_RECURRENCE_THRESHOLD),
        output: raw.output,
    })
}
