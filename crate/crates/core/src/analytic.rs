//! Closed-form evaluation of the dephasing model.
//!
//! Every spin contributes an independent factor to the decoherence factor
//!
//! ```text
//! z(t) = ∏_j [cos(2 g_j t) + i d_j sin(2 g_j t)],   d_j = |α_j|² − |β_j|²
//! ```
//!
//! and the reduced system state is
//! `ρ = [[|a|², z a b*], [z* a* b, |b|²]]`. All evaluations are O(n).

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{Branch, EnvironmentSpec, InteractionModel, SystemAmplitudes};

/// Value of the decoherence factor at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoherenceFactor {
    pub t: f64,
    pub value: Complex64,
}

impl DecoherenceFactor {
    pub fn magnitude(&self) -> f64 {
        self.value.norm()
    }
}

/// Single-spin factor `cos(2gt) + i·d·sin(2gt)`.
#[inline]
fn spin_factor(g: f64, d: f64, t: f64) -> Complex64 {
    let (s, c) = (2.0 * g * t).sin_cos();
    Complex64::new(c, d * s)
}

pub fn decoherence_factor(env: &EnvironmentSpec, t: f64) -> DecoherenceFactor {
    let value = env.iter().fold(Complex64::new(1.0, 0.0), |acc, spin| {
        acc * spin_factor(spin.g, spin.imbalance(), t)
    });
    DecoherenceFactor { t, value }
}

/// `|z(t)|²` via the product of per-spin squared magnitudes
/// `(1 + d²)/2 + (1 − d²)/2·cos(4gt)`. Used by the grid scans; the form is
/// exactly 1 for spins with `d = ±1`.
#[inline]
pub fn coherence_sq(env: &EnvironmentSpec, t: f64) -> f64 {
    env.iter().fold(1.0, |acc, spin| {
        let d2 = spin.imbalance().powi(2);
        acc * ((1.0 + d2) / 2.0 + (1.0 - d2) / 2.0 * (4.0 * spin.g * t).cos())
    })
}

#[inline]
pub fn coherence_magnitude(env: &EnvironmentSpec, t: f64) -> f64 {
    coherence_sq(env, t).sqrt()
}

/// Environment factor of one system branch at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchState {
    pub branch: Branch,
    /// `(amplitude on |+⟩_j, amplitude on |−⟩_j)` for each spin.
    pub spin_amplitudes: Vec<(Complex64, Complex64)>,
}

impl BranchState {
    /// `⟨self|other⟩`, the product of per-spin inner products.
    pub fn inner(&self, other: &BranchState) -> Complex64 {
        assert_eq!(self.spin_amplitudes.len(), other.spin_amplitudes.len());
        self.spin_amplitudes
            .iter()
            .zip(&other.spin_amplitudes)
            .fold(Complex64::new(1.0, 0.0), |acc, (&(bp, bm), &(kp, km))| {
                acc * (bp.conj() * kp + bm.conj() * km)
            })
    }
}

/// Per-spin amplitudes of the environment attached to `branch`:
/// `(α_j e^{±i g_j t}, β_j e^{∓i g_j t})`.
pub fn branch_environment_state(env: &EnvironmentSpec, t: f64, branch: Branch) -> BranchState {
    let spin_amplitudes = env
        .iter()
        .map(|spin| {
            (
                spin.alpha * InteractionModel::phase(spin.g, t, branch, Branch::Plus),
                spin.beta * InteractionModel::phase(spin.g, t, branch, Branch::Minus),
            )
        })
        .collect();
    BranchState {
        branch,
        spin_amplitudes,
    }
}

/// 2×2 density matrix of the system; index 0 is `|+⟩`, index 1 is `|−⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedState {
    pub rho: [[Complex64; 2]; 2],
}

impl ReducedState {
    pub fn new(rho: [[Complex64; 2]; 2]) -> Self {
        Self { rho }
    }

    pub fn diagonal(pp: f64, mm: f64) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        Self {
            rho: [
                [Complex64::new(pp, 0.0), zero],
                [zero, Complex64::new(mm, 0.0)],
            ],
        }
    }

    pub fn maximally_mixed() -> Self {
        Self::diagonal(0.5, 0.5)
    }

    pub fn trace(&self) -> Complex64 {
        self.rho[0][0] + self.rho[1][1]
    }

    /// The `⟨+|ρ|−⟩` entry.
    pub fn coherence(&self) -> Complex64 {
        self.rho[0][1]
    }

    /// Largest deviation from Hermiticity.
    pub fn hermiticity_error(&self) -> f64 {
        let off = (self.rho[0][1] - self.rho[1][0].conj()).norm();
        off.max(self.rho[0][0].im.abs())
            .max(self.rho[1][1].im.abs())
    }

    /// Eigenvalues (ascending) of the Hermitian part.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let p = self.rho[0][0].re;
        let m = self.rho[1][1].re;
        let mean = (p + m) / 2.0;
        let radius = (((p - m) / 2.0).powi(2) + self.rho[0][1].norm_sqr()).sqrt();
        [mean - radius, mean + radius]
    }

    /// Largest elementwise absolute difference.
    pub fn max_abs_diff(&self, other: &ReducedState) -> f64 {
        let mut max = 0.0_f64;
        for r in 0..2 {
            for c in 0..2 {
                max = max.max((self.rho[r][c] - other.rho[r][c]).norm());
            }
        }
        max
    }
}

pub fn reduced_density_matrix(
    sys: &SystemAmplitudes,
    env: &EnvironmentSpec,
    t: f64,
) -> ReducedState {
    let z = decoherence_factor(env, t).value;
    let upper = z * sys.a * sys.b.conj();
    ReducedState {
        rho: [
            [Complex64::new(sys.a.norm_sqr(), 0.0), upper],
            [upper.conj(), Complex64::new(sys.b.norm_sqr(), 0.0)],
        ],
    }
}

/// `|⟨0'|ρ|1'⟩|` for the rotated basis
/// `|0'⟩ = cos(θ/2)|+⟩ + e^{iφ} sin(θ/2)|−⟩`, `|1'⟩ ⊥ |0'⟩`.
pub fn coherence_in_basis(rho: &ReducedState, theta: f64, phi: f64) -> Result<f64> {
    if !(0.0..=PI).contains(&theta) {
        return Err(Error::InvalidAngle {
            name: "theta",
            value: theta,
            min: 0.0,
            max: PI,
        });
    }
    if !(0.0..2.0 * PI).contains(&phi) {
        return Err(Error::InvalidAngle {
            name: "phi",
            value: phi,
            min: 0.0,
            max: 2.0 * PI,
        });
    }
    let (s, c) = (theta / 2.0).sin_cos();
    let e = Complex64::from_polar(1.0, phi);
    let v0 = [Complex64::new(c, 0.0), e * s];
    let v1 = [-e.conj() * s, Complex64::new(c, 0.0)];
    let acc: Complex64 = v0
        .iter()
        .zip(&rho.rho)
        .flat_map(|(a, row)| row.iter().zip(&v1).map(move |(r, b)| a.conj() * r * b))
        .sum();
    Ok(acc.norm())
}

/// Mixedness diagnostics of a reduced state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateMetrics {
    /// `tr ρ²`
    pub purity: f64,
    /// von Neumann entropy in nats.
    pub entropy: f64,
}

pub fn state_metrics(rho: &ReducedState) -> StateMetrics {
    let purity = rho.rho.iter().flatten().map(|x| x.norm_sqr()).sum();
    let entropy = rho
        .eigenvalues()
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| -l * l.ln())
        .sum::<f64>();
    StateMetrics { purity, entropy }
}

/// Long-time average of `|z|²` versus its closed-form ergodic value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherenceAverage {
    /// Mean of `|z(t_k)|²` over the sample grid.
    pub empirical: f64,
    /// `∏_j (1 + d_j²)/2`; exact in the long-time limit only when the
    /// couplings are pairwise incommensurate.
    pub predicted: f64,
}

impl CoherenceAverage {
    pub fn relative_error(&self) -> f64 {
        (self.empirical - self.predicted).abs() / self.predicted
    }
}

/// Ergodic value `∏_j (1 + d_j²)/2` of the time-averaged `|z|²`.
pub fn predicted_coherence_sq(env: &EnvironmentSpec) -> f64 {
    env.iter()
        .map(|s| (1.0 + s.imbalance().powi(2)) / 2.0)
        .product()
}

/// Average `|z|²` over `samples` equally spaced times covering `[0, t_max]`
/// (both endpoints included). Never asserts agreement with the prediction.
pub fn time_averaged_coherence_sq(
    env: &EnvironmentSpec,
    t_max: f64,
    samples: usize,
) -> Result<CoherenceAverage> {
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::InvalidRange(format!(
            "t_max = {t_max} must be positive"
        )));
    }
    if samples < 2 {
        return Err(Error::InvalidRange(format!(
            "samples = {samples} must be at least 2"
        )));
    }
    let step = t_max / (samples - 1) as f64;
    let sum: f64 = (0..samples)
        .map(|k| coherence_sq(env, k as f64 * step))
        .sum();
    Ok(CoherenceAverage {
        empirical: sum / samples as f64,
        predicted: predicted_coherence_sq(env),
    })
}
