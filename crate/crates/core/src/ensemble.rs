//! Grid scans of `|z(t)|` and seeded Monte Carlo ensembles over random
//! environments.
//!
//! Crossings are found by scanning a uniform grid, not by root finding.
//! Per-seed work runs in parallel; results are collected in sorted-seed
//! order so every report is identical to a sequential run.

use rayon::prelude::*;

use crate::analytic::{coherence_magnitude, predicted_coherence_sq};
use crate::error::{Error, Result};
use crate::model::{build_environment_random, EnvironmentSpec};

/// Default recurrence threshold on `|z|`.
pub const DEFAULT_RECURRENCE_THRESHOLD: f64 = 0.9;

/// Grid spacing resolving the fastest factor: `π / (20·g_max)`.
pub fn default_dt(g_max: f64) -> f64 {
    std::f64::consts::PI / (20.0 * g_max)
}

/// Uniform time grid `t_start, t_start + dt, …` up to `t_end` inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t_start: f64,
    t_end: f64,
    dt: f64,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, dt: f64) -> Result<Self> {
        if !(t_start.is_finite() && t_end.is_finite() && t_start <= t_end) {
            return Err(Error::InvalidRange(format!(
                "time grid requires t_start <= t_end, got [{t_start}, {t_end}]"
            )));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidRange(format!(
                "time step dt = {dt} must be positive"
            )));
        }
        Ok(Self { t_start, t_end, dt })
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of grid points. A span that is an integer multiple of `dt` up
    /// to rounding includes `t_end`.
    pub fn len(&self) -> usize {
        ((self.t_end - self.t_start) / self.dt + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `k`-th grid time, computed as `t_start + k·dt` (no accumulated drift).
    pub fn at(&self, k: usize) -> f64 {
        self.t_start + k as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |k| self.at(k))
    }
}

/// First grid time with `|z| < threshold`.
pub fn decay_time(env: &EnvironmentSpec, threshold: f64, grid: &TimeGrid) -> Result<f64> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidRange(format!(
            "decay threshold {threshold} must lie in (0, 1)"
        )));
    }
    grid.times()
        .find(|&t| coherence_magnitude(env, t) < threshold)
        .ok_or(Error::NoDecay { threshold })
}

/// Result of a recurrence scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecurrenceReport {
    pub threshold: f64,
    /// First grid time in `(t_start, t_end]` with `|z| ≥ threshold`.
    pub found: Option<f64>,
    /// `|z|` at `found`.
    pub magnitude: Option<f64>,
    pub scanned_points: usize,
}

/// Scan `(t_start, t_end]` for the first return of `|z|` to `threshold`.
pub fn recurrence_search(
    env: &EnvironmentSpec,
    threshold: f64,
    grid: &TimeGrid,
) -> Result<RecurrenceReport> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::InvalidRange(format!(
            "recurrence threshold {threshold} must lie in (0, 1]"
        )));
    }
    if grid.t_start() <= 0.0 {
        return Err(Error::InvalidRange(format!(
            "recurrence scan must start after t = 0, got t_start = {}",
            grid.t_start()
        )));
    }
    let mut scanned_points = 0;
    for k in 1..grid.len() {
        let t = grid.at(k);
        scanned_points += 1;
        let magnitude = coherence_magnitude(env, t);
        if magnitude >= threshold {
            return Ok(RecurrenceReport {
                threshold,
                found: Some(t),
                magnitude: Some(magnitude),
                scanned_points,
            });
        }
    }
    Ok(RecurrenceReport {
        threshold,
        found: None,
        magnitude: None,
        scanned_points,
    })
}

/// Linear-interpolation quantile of ascending `sorted` data (`q` in `[0, 1]`).
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    quantile(&sorted, 0.5)
}

/// Probabilities reported in [`SeedStatistics::abs_z_quantiles`].
pub const QUANTILE_LEVELS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

/// Statistics of `|z|` for one random environment.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedStatistics {
    pub seed: u64,
    /// Mean of `|z|²` over the grid.
    pub time_avg_sq: f64,
    /// `∏_j (1 + d_j²)/2`.
    pub predicted_sq: f64,
    /// `|z|` at [`QUANTILE_LEVELS`] over the grid.
    pub abs_z_quantiles: [f64; 5],
    /// Largest `|z|` on the second half of the grid.
    pub late_sup: f64,
}

impl SeedStatistics {
    pub fn relative_error(&self) -> f64 {
        (self.time_avg_sq - self.predicted_sq).abs() / self.predicted_sq
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleReport {
    pub n: usize,
    /// Seeds in ascending order.
    pub seeds: Vec<u64>,
    pub per_seed: Vec<SeedStatistics>,
    /// Median over seeds of each entry of `abs_z_quantiles`.
    pub median_quantiles: [f64; 5],
    pub median_time_avg_sq: f64,
    pub median_late_sup: f64,
}

fn seed_statistics(env: &EnvironmentSpec, seed: u64, grid: &TimeGrid) -> SeedStatistics {
    let mut magnitudes: Vec<f64> = grid.times().map(|t| coherence_magnitude(env, t)).collect();
    let time_avg_sq = magnitudes.iter().map(|m| m * m).sum::<f64>() / magnitudes.len() as f64;
    let late_start = magnitudes.len() / 2;
    let late_sup = magnitudes[late_start..].iter().copied().fold(0.0, f64::max);
    magnitudes.sort_by(f64::total_cmp);
    SeedStatistics {
        seed,
        time_avg_sq,
        predicted_sq: predicted_coherence_sq(env),
        abs_z_quantiles: QUANTILE_LEVELS.map(|q| quantile(&magnitudes, q)),
        late_sup,
    }
}

/// Statistics of `|z|` over one random environment per seed.
pub fn ensemble_statistics(
    n: usize,
    seeds: &[u64],
    grid: &TimeGrid,
    g_min: f64,
    g_max: f64,
) -> Result<EnsembleReport> {
    if seeds.is_empty() {
        return Err(Error::InvalidRange(
            "ensemble needs at least one seed".into(),
        ));
    }
    let mut seeds = seeds.to_vec();
    seeds.sort_unstable();
    let per_seed = seeds
        .par_iter()
        .map(|&seed| {
            let env = build_environment_random(n, seed, g_min, g_max)?;
            Ok(seed_statistics(&env, seed, grid))
        })
        .collect::<Result<Vec<_>>>()?;

    let column =
        |f: &dyn Fn(&SeedStatistics) -> f64| median(&per_seed.iter().map(f).collect::<Vec<_>>());
    let median_quantiles = [0, 1, 2, 3, 4].map(|i| column(&|s| s.abs_z_quantiles[i]));
    Ok(EnsembleReport {
        n,
        median_quantiles,
        median_time_avg_sq: column(&|s| s.time_avg_sq),
        median_late_sup: column(&|s| s.late_sup),
        seeds,
        per_seed,
    })
}

/// One row of [`scaling_sweep`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingRow {
    pub n: usize,
    /// Median over seeds of `max |z|` on the window.
    pub median_sup: f64,
}

/// Median late-window `sup |z|` for each environment size.
///
/// Seeds `0..seeds_per_n` are shared across sizes. Since the random builder
/// draws spins sequentially, each larger environment extends the smaller one
/// with the same seed.
pub fn scaling_sweep(
    ns: &[usize],
    seeds_per_n: usize,
    late_window: &TimeGrid,
    g_min: f64,
    g_max: f64,
) -> Result<Vec<ScalingRow>> {
    if ns.is_empty() {
        return Err(Error::InvalidRange(
            "scaling sweep needs at least one n".into(),
        ));
    }
    if ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidRange(format!(
            "sizes must be strictly ascending, got {ns:?}"
        )));
    }
    if seeds_per_n == 0 {
        return Err(Error::InvalidRange("seeds_per_n must be at least 1".into()));
    }
    ns.iter()
        .map(|&n| {
            let sups = (0..seeds_per_n as u64)
                .into_par_iter()
                .map(|seed| {
                    let env = build_environment_random(n, seed, g_min, g_max)?;
                    Ok(late_window
                        .times()
                        .map(|t| coherence_magnitude(&env, t))
                        .fold(0.0, f64::max))
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(ScalingRow {
                n,
                median_sup: median(&sups),
            })
        })
        .collect()
}
