//! Brute-force reference: the full `2^(n+1)` state vector of system plus
//! environment, evolved amplitude by amplitude and traced down to the system.
//!
//! Basis index convention: the system occupies the most significant bit
//! (0 ↔ `|+⟩`, 1 ↔ `|−⟩`) and environment spin `j` occupies bit `j`, so
//! `index = s·2ⁿ + Σ_j b_j·2^j`.
//!
//! Nothing here calls into [`crate::analytic`] except the comparison in
//! [`crosscheck`]; the two paths are each other's oracle.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::analytic::{reduced_density_matrix, ReducedState};
use crate::error::{Error, Result};
use crate::model::{Branch, EnvironmentSpec, SystemAmplitudes};

/// Largest environment the full-state path accepts (2²⁵ amplitudes).
pub const MAX_FULL_STATE_SPINS: usize = 24;

/// Below this many amplitudes evolution runs on the calling thread.
const PARALLEL_THRESHOLD: usize = 1 << 14;

#[derive(Debug, Clone, PartialEq)]
pub struct FullState {
    pub n: usize,
    pub amplitudes: Vec<Complex64>,
}

impl FullState {
    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Largest elementwise absolute difference.
    pub fn max_abs_diff(&self, other: &FullState) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }
}

fn guard(n: usize) -> Result<()> {
    if n > MAX_FULL_STATE_SPINS {
        return Err(Error::TooLarge {
            n,
            max: MAX_FULL_STATE_SPINS,
        });
    }
    Ok(())
}

/// Product state `(a|+⟩ + b|−⟩) ⊗ ∏_j (α_j|+⟩_j + β_j|−⟩_j)`.
pub fn assemble_full_state(sys: &SystemAmplitudes, env: &EnvironmentSpec) -> Result<FullState> {
    let n = env.len();
    guard(n)?;
    // Environment factor built one spin at a time, doubling the table.
    let mut env_amps = vec![Complex64::new(1.0, 0.0)];
    for (j, spin) in env.iter().enumerate() {
        let half = 1usize << j;
        let mut next = vec![Complex64::new(0.0, 0.0); half * 2];
        for e in 0..half {
            next[e] = env_amps[e] * spin.alpha;
            next[e | half] = env_amps[e] * spin.beta;
        }
        env_amps = next;
    }
    let amplitudes = [sys.a, sys.b]
        .iter()
        .flat_map(|&s| env_amps.iter().map(move |&e| s * e))
        .collect();
    Ok(FullState { n, amplitudes })
}

/// Total phase angle `t·Σ_j g_j σ σ_j` of basis state `index`.
fn phase_angle(index: usize, n: usize, couplings: &[f64], t: f64) -> f64 {
    let system = Branch::from_bit((index >> n) & 1).sign();
    let mut sum = 0.0;
    for (j, &g) in couplings.iter().enumerate() {
        sum += g * Branch::from_bit((index >> j) & 1).sign();
    }
    t * system * sum
}

/// Apply `exp(i·t·Σ_j g_j σ σ_j)` to every amplitude. Works for arbitrary,
/// including entangled, input states.
pub fn evolve_full(state: &FullState, env: &EnvironmentSpec, t: f64) -> Result<FullState> {
    let n = env.len();
    guard(n)?;
    let expected = 2usize << n;
    if state.dim() != expected || state.n != n {
        return Err(Error::DimensionMismatch {
            expected,
            found: state.dim(),
        });
    }
    let couplings: Vec<f64> = env.iter().map(|s| s.g).collect();
    let apply = |(index, amp): (usize, &Complex64)| {
        amp * Complex64::from_polar(1.0, phase_angle(index, n, &couplings, t))
    };
    let amplitudes = if expected >= PARALLEL_THRESHOLD {
        state.amplitudes.par_iter().enumerate().map(apply).collect()
    } else {
        state.amplitudes.iter().enumerate().map(apply).collect()
    };
    Ok(FullState { n, amplitudes })
}

/// `ρ[s][s'] = Σ_e Ψ[s,e]·conj(Ψ[s',e])`, summed in index order.
pub fn partial_trace_to_system(state: &FullState) -> ReducedState {
    let env_dim = 1usize << state.n;
    let (plus, minus) = state.amplitudes.split_at(env_dim);
    let sum = |x: &[Complex64], y: &[Complex64]| {
        x.iter()
            .zip(y)
            .fold(Complex64::new(0.0, 0.0), |acc, (p, q)| acc + p * q.conj())
    };
    ReducedState {
        rho: [
            [sum(plus, plus), sum(plus, minus)],
            [sum(minus, plus), sum(minus, minus)],
        ],
    }
}

/// Outcome of comparing the brute-force and closed-form reduced states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrosscheckReport {
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Brute-force reduced state at time `t`.
pub fn brute_force_reduced_state(
    sys: &SystemAmplitudes,
    env: &EnvironmentSpec,
    t: f64,
) -> Result<ReducedState> {
    let initial = assemble_full_state(sys, env)?;
    let evolved = evolve_full(&initial, env, t)?;
    Ok(partial_trace_to_system(&evolved))
}

/// Compare assemble → evolve → trace against the closed-form reduced state.
pub fn crosscheck(
    sys: &SystemAmplitudes,
    env: &EnvironmentSpec,
    t: f64,
    tolerance: f64,
) -> Result<CrosscheckReport> {
    crosscheck_with(sys, env, t, tolerance, reduced_density_matrix)
}

/// [`crosscheck`] against an arbitrary candidate implementation of the
/// reduced state; used for fault-injection tests.
pub fn crosscheck_with<F>(
    sys: &SystemAmplitudes,
    env: &EnvironmentSpec,
    t: f64,
    tolerance: f64,
    candidate: F,
) -> Result<CrosscheckReport>
where
    F: Fn(&SystemAmplitudes, &EnvironmentSpec, f64) -> ReducedState,
{
    let reference = brute_force_reduced_state(sys, env, t)?;
    let max_deviation = reference.max_abs_diff(&candidate(sys, env, t));
    Ok(CrosscheckReport {
        max_deviation,
        tolerance,
        passed: max_deviation <= tolerance,
    })
}
