//! Domain types for a two-level system dephased by `n` environment spins,
//! plus builders for random and structured environments.
//!
//! The interaction couples the system observable `R` to each spin observable
//! `R_j` with coupling `g_j`; both observables are the diagonal ±1 operator in
//! the `{|+⟩, |−⟩}` basis. Units use ħ = 1, so `g` is an inverse time.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::{Error, Result};

/// Tolerance used when checking that amplitude pairs are normalized.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Sign of an eigenstate of `R` (or `R_j`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    /// Eigenvalue of the ±1 observable.
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }

    /// Branch encoded by a basis bit (0 ↔ `|+⟩`, 1 ↔ `|−⟩`).
    pub fn from_bit(bit: usize) -> Self {
        if bit == 0 {
            Branch::Plus
        } else {
            Branch::Minus
        }
    }
}

/// Phase convention of the interaction.
///
/// Evolution multiplies a product basis state with system sign `σ` and spin
/// signs `σ_j` by `exp(i·t·Σ_j g_j·σ·σ_j)`, so the `|+⟩⊗|+⟩_j` component
/// picks up `e^{+i g_j t}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct InteractionModel;

impl InteractionModel {
    /// Phase angle contributed by a single spin.
    #[inline]
    pub fn phase_angle(g: f64, t: f64, system: Branch, spin: Branch) -> f64 {
        g * t * system.sign() * spin.sign()
    }

    /// Unit phase factor contributed by a single spin.
    #[inline]
    pub fn phase(g: f64, t: f64, system: Branch, spin: Branch) -> Complex64 {
        Complex64::from_polar(1.0, Self::phase_angle(g, t, system, spin))
    }
}

/// System amplitudes `a` (on `|+⟩`) and `b` (on `|−⟩`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemAmplitudes {
    pub a: Complex64,
    pub b: Complex64,
}

impl SystemAmplitudes {
    pub fn new(a: Complex64, b: Complex64) -> Self {
        Self { a, b }
    }

    /// Real non-negative amplitudes with `|a|² = a_sq`.
    pub fn from_population(a_sq: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&a_sq) {
            return Err(Error::InvalidRange(format!(
                "a_sq = {a_sq} must lie in [0, 1]"
            )));
        }
        Ok(Self {
            a: Complex64::new(a_sq.sqrt(), 0.0),
            b: Complex64::new((1.0 - a_sq).sqrt(), 0.0),
        })
    }

    /// The equal superposition `(|+⟩ + |−⟩)/√2`.
    pub fn balanced() -> Self {
        Self {
            a: Complex64::new(FRAC_1_SQRT_2, 0.0),
            b: Complex64::new(FRAC_1_SQRT_2, 0.0),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.a.norm_sqr() + self.b.norm_sqr()
    }
}

/// One environment spin: coupling and initial amplitudes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvSpin {
    pub g: f64,
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl EnvSpin {
    pub fn new(g: f64, alpha: Complex64, beta: Complex64) -> Self {
        Self { g, alpha, beta }
    }

    /// Spin with real amplitudes chosen so that `|α|² = alpha_sq`.
    pub fn with_population(g: f64, alpha_sq: f64) -> Self {
        Self {
            g,
            alpha: Complex64::new(alpha_sq.sqrt(), 0.0),
            beta: Complex64::new((1.0 - alpha_sq).sqrt(), 0.0),
        }
    }

    /// Population imbalance `|α|² − |β|²`, the z-coordinate on the Bloch sphere.
    pub fn imbalance(&self) -> f64 {
        self.alpha.norm_sqr() - self.beta.norm_sqr()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.alpha.norm_sqr() + self.beta.norm_sqr()
    }
}

/// Ordered list of environment spins; its length is `n`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EnvironmentSpec {
    pub spins: Vec<EnvSpin>,
}

impl EnvironmentSpec {
    pub fn new(spins: Vec<EnvSpin>) -> Self {
        Self { spins }
    }

    pub fn len(&self) -> usize {
        self.spins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spins.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, EnvSpin> {
        self.spins.iter()
    }

    /// Largest coupling, or `None` for an empty environment.
    pub fn max_coupling(&self) -> Option<f64> {
        self.spins.iter().map(|s| s.g).reduce(f64::max)
    }

    /// `self` followed by `other`.
    pub fn concat(&self, other: &EnvironmentSpec) -> EnvironmentSpec {
        let mut spins = self.spins.clone();
        spins.extend_from_slice(&other.spins);
        EnvironmentSpec { spins }
    }
}

impl<'a> IntoIterator for &'a EnvironmentSpec {
    type Item = &'a EnvSpin;
    type IntoIter = std::slice::Iter<'a, EnvSpin>;

    fn into_iter(self) -> Self::IntoIter {
        self.spins.iter()
    }
}

/// Named environment families.
#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioKind {
    /// Couplings uniform on `[g_min, g_max]`, spin states uniform on the Bloch sphere.
    Random { g_min: f64, g_max: f64, seed: u64 },
    /// Every spin starts in `|+⟩_j` (β_j = 0).
    Eigenstate,
    /// Every spin in `(|+⟩_j + |−⟩_j)/√2` with a common coupling.
    BalancedEqualCoupling,
    /// Explicit spin list.
    Custom(Vec<EnvSpin>),
}

/// Uniform draw on `[0, 1)` from the top 53 bits of one 64-bit output.
///
/// Done by hand rather than through `rand`'s distributions so that seeded
/// output depends only on the pinned ChaCha20 stream.
fn unit_f64(rng: &mut ChaCha20Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Random environment of `n` spins.
///
/// Each spin consumes three draws from a ChaCha20 stream seeded with `seed`,
/// in order: coupling, `cos θ`, and azimuth `φ`. The state is
/// `(cos(θ/2), e^{iφ} sin(θ/2))`, so the imbalance `d_j = cos θ` is uniform
/// on `[−1, 1]`. Because spins are drawn sequentially, the environment for
/// `n` is a prefix of the one for any larger `n` with the same seed.
pub fn build_environment_random(
    n: usize,
    seed: u64,
    g_min: f64,
    g_max: f64,
) -> Result<EnvironmentSpec> {
    if !(g_min > 0.0 && g_min.is_finite() && g_max.is_finite() && g_min <= g_max) {
        return Err(Error::InvalidRange(format!(
            "coupling range requires 0 < g_min <= g_max, got g_min = {g_min}, g_max = {g_max}"
        )));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let spins = (0..n)
        .map(|_| {
            let g = g_min + (g_max - g_min) * unit_f64(&mut rng);
            let cos_theta = 1.0 - 2.0 * unit_f64(&mut rng);
            let phi = 2.0 * PI * unit_f64(&mut rng);
            let alpha = ((1.0 + cos_theta) / 2.0).sqrt();
            let beta = ((1.0 - cos_theta) / 2.0).sqrt();
            EnvSpin {
                g,
                alpha: Complex64::new(alpha, 0.0),
                beta: Complex64::from_polar(beta, phi),
            }
        })
        .collect();
    Ok(EnvironmentSpec { spins })
}

/// Environment for a named scenario.
///
/// `n` and `g` apply to the structured scenarios. `Random` uses its own
/// parameters with `n`; `Custom` returns its spin list unchanged.
pub fn build_environment_scenario(
    kind: &ScenarioKind,
    n: usize,
    g: f64,
) -> Result<EnvironmentSpec> {
    let structured = |alpha: Complex64, beta: Complex64| {
        if !(g > 0.0 && g.is_finite()) {
            return Err(Error::InvalidRange(format!(
                "coupling g = {g} must be positive"
            )));
        }
        Ok(EnvironmentSpec {
            spins: vec![EnvSpin { g, alpha, beta }; n],
        })
    };
    match kind {
        ScenarioKind::Random { g_min, g_max, seed } => {
            build_environment_random(n, *seed, *g_min, *g_max)
        }
        ScenarioKind::Eigenstate => structured(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)),
        ScenarioKind::BalancedEqualCoupling => {
            let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
            structured(h, h)
        }
        ScenarioKind::Custom(spins) => Ok(EnvironmentSpec {
            spins: spins.clone(),
        }),
    }
}

/// A single invariant violation found by [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    SystemNormalization { norm_sqr: f64 },
    SystemNonFinite,
    SpinNormalization { index: usize, norm_sqr: f64 },
    SpinNonFinite { index: usize },
    NegativeCoupling { index: usize, g: f64 },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::SystemNormalization { norm_sqr } => {
                write!(
                    f,
                    "system amplitudes not normalized: |a|^2 + |b|^2 = {norm_sqr}"
                )
            }
            Violation::SystemNonFinite => write!(f, "system amplitudes contain non-finite values"),
            Violation::SpinNormalization { index, norm_sqr } => {
                write!(
                    f,
                    "spin {index} not normalized: |alpha|^2 + |beta|^2 = {norm_sqr}"
                )
            }
            Violation::SpinNonFinite { index } => {
                write!(f, "spin {index} contains non-finite values")
            }
            Violation::NegativeCoupling { index, g } => {
                write!(f, "spin {index} has negative coupling g = {g}")
            }
        }
    }
}

/// Outcome of [`validate`]: empty when every invariant holds.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

fn finite(c: Complex64) -> bool {
    c.re.is_finite() && c.im.is_finite()
}

/// Check normalization, finiteness and coupling signs.
pub fn validate(sys: &SystemAmplitudes, env: &EnvironmentSpec) -> ValidationReport {
    let mut violations = Vec::new();
    if !(finite(sys.a) && finite(sys.b)) {
        violations.push(Violation::SystemNonFinite);
    } else if (sys.norm_sqr() - 1.0).abs() > NORM_TOLERANCE {
        violations.push(Violation::SystemNormalization {
            norm_sqr: sys.norm_sqr(),
        });
    }
    for (index, spin) in env.iter().enumerate() {
        if !(spin.g.is_finite() && finite(spin.alpha) && finite(spin.beta)) {
            violations.push(Violation::SpinNonFinite { index });
            continue;
        }
        if spin.g < 0.0 {
            violations.push(Violation::NegativeCoupling { index, g: spin.g });
        }
        if (spin.norm_sqr() - 1.0).abs() > NORM_TOLERANCE {
            violations.push(Violation::SpinNormalization {
                index,
                norm_sqr: spin.norm_sqr(),
            });
        }
    }
    ValidationReport { violations }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_random_environment() {
        let env = build_environment_random(0, 1, 0.1, 1.0).unwrap();
        assert!(env.is_empty());
    }

    #[test]
    fn random_builder_is_deterministic() {
        let a = build_environment_random(5, 7, 0.1, 1.0).unwrap();
        let b = build_environment_random(5, 7, 0.1, 1.0).unwrap();
        for (x, y) in a.iter().zip(b.iter()) {
            assert_eq!(x.g.to_bits(), y.g.to_bits());
            assert_eq!(x.alpha.re.to_bits(), y.alpha.re.to_bits());
            assert_eq!(x.beta.re.to_bits(), y.beta.re.to_bits());
            assert_eq!(x.beta.im.to_bits(), y.beta.im.to_bits());
        }
        assert_ne!(a, build_environment_random(5, 8, 0.1, 1.0).unwrap());
    }

    #[test]
    fn random_builder_prefix_property() {
        let short = build_environment_random(4, 11, 0.05, 1.0).unwrap();
        let long = build_environment_random(9, 11, 0.05, 1.0).unwrap();
        assert_eq!(short.spins[..], long.spins[..4]);
    }

    #[test]
    fn random_builder_sample_means() {
        let env = build_environment_random(1000, 3, 0.1, 1.0).unwrap();
        let mean_g = env.iter().map(|s| s.g).sum::<f64>() / 1000.0;
        let mean_d = env.iter().map(|s| s.imbalance()).sum::<f64>() / 1000.0;
        assert!((mean_g - 0.55).abs() < 0.03, "mean g = {mean_g}");
        assert!(mean_d.abs() < 0.05, "mean d = {mean_d}");
        assert!(env.iter().all(|s| (0.1..=1.0).contains(&s.g)));
    }

    #[test]
    fn imbalance_is_uniform_ks() {
        let env = build_environment_random(10_000, 2024, 0.05, 1.0).unwrap();
        let mut d: Vec<f64> = env.iter().map(|s| s.imbalance()).collect();
        d.sort_by(f64::total_cmp);
        let m = d.len() as f64;
        let ks = d
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let cdf = (x + 1.0) / 2.0;
                (cdf - i as f64 / m)
                    .abs()
                    .max(((i + 1) as f64 / m - cdf).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks < 0.02, "KS statistic {ks}");
    }

    #[test]
    fn random_builder_rejects_bad_range() {
        assert!(matches!(
            build_environment_random(3, 1, 0.0, 1.0),
            Err(Error::InvalidRange(_))
        ));
        assert!(matches!(
            build_environment_random(3, 1, -0.1, 1.0),
            Err(Error::InvalidRange(_))
        ));
        assert!(matches!(
            build_environment_random(3, 1, 2.0, 1.0),
            Err(Error::InvalidRange(_))
        ));
        assert!(build_environment_random(3, 1, 0.5, 0.5).is_ok());
    }

    #[test]
    fn eigenstate_scenario() {
        let env = build_environment_scenario(&ScenarioKind::Eigenstate, 3, 1.0).unwrap();
        assert_eq!(env.len(), 3);
        for s in &env {
            assert_eq!(s.g, 1.0);
            assert_eq!(s.alpha, Complex64::new(1.0, 0.0));
            assert_eq!(s.beta, Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn balanced_scenario() {
        let env = build_environment_scenario(&ScenarioKind::BalancedEqualCoupling, 2, 0.5).unwrap();
        assert_eq!(env.len(), 2);
        for s in &env {
            assert_eq!(s.g, 0.5);
            assert!((s.alpha.re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
            assert_eq!(s.alpha, s.beta);
            assert_eq!(s.imbalance(), 0.0);
        }
        let empty =
            build_environment_scenario(&ScenarioKind::BalancedEqualCoupling, 0, 0.5).unwrap();
        assert!(empty.is_empty());
    }

    #[test]
    fn scenario_rejects_nonpositive_g() {
        for g in [0.0, -1.0, f64::NAN] {
            assert!(build_environment_scenario(&ScenarioKind::Eigenstate, 2, g).is_err());
            assert!(
                build_environment_scenario(&ScenarioKind::BalancedEqualCoupling, 2, g).is_err()
            );
        }
    }

    #[test]
    fn every_scenario_validates() {
        let sys = SystemAmplitudes::balanced();
        let kinds = [
            ScenarioKind::Random {
                g_min: 0.05,
                g_max: 1.0,
                seed: 9,
            },
            ScenarioKind::Eigenstate,
            ScenarioKind::BalancedEqualCoupling,
            ScenarioKind::Custom(vec![EnvSpin::with_population(0.3, 0.8)]),
        ];
        for kind in &kinds {
            let env = build_environment_scenario(kind, 17, 0.7).unwrap();
            assert!(validate(&sys, &env).is_ok(), "{kind:?}");
        }
    }

    #[test]
    fn validate_reports() {
        let ok = SystemAmplitudes::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
        assert!(validate(&ok, &EnvironmentSpec::default()).is_ok());

        let bad = SystemAmplitudes::new(Complex64::new(0.8, 0.0), Complex64::new(0.2, 0.0));
        let report = validate(&bad, &EnvironmentSpec::default());
        match report.violations.as_slice() {
            [Violation::SystemNormalization { norm_sqr }] => {
                assert!((norm_sqr - 0.68).abs() < 1e-12)
            }
            other => panic!("unexpected {other:?}"),
        }

        let env = EnvironmentSpec::new(vec![EnvSpin::with_population(-1.0, 0.5)]);
        let report = validate(&SystemAmplitudes::balanced(), &env);
        assert_eq!(
            report.violations,
            vec![Violation::NegativeCoupling { index: 0, g: -1.0 }]
        );

        let env = EnvironmentSpec::new(vec![EnvSpin::new(
            f64::INFINITY,
            Complex64::new(1.0, 0.0),
            Complex64::default(),
        )]);
        let report = validate(&SystemAmplitudes::balanced(), &env);
        assert_eq!(
            report.violations,
            vec![Violation::SpinNonFinite { index: 0 }]
        );
    }

    #[test]
    fn phase_convention_aligned_branch_positive() {
        let p = InteractionModel::phase(1.0, 0.5, Branch::Plus, Branch::Plus);
        assert!((p - Complex64::from_polar(1.0, 0.5)).norm() < 1e-15);
        let m = InteractionModel::phase(1.0, 0.5, Branch::Minus, Branch::Plus);
        assert!((m - Complex64::from_polar(1.0, -0.5)).norm() < 1e-15);
    }
}
