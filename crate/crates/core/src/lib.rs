//! Exact simulation of a two-level system dephased by `n` environment spins.
//!
//! The interaction `−Σ_j g_j R ⊗ R_j` is diagonal in the product basis, so the
//! model is solved exactly two ways: the closed form in [`analytic`] and the
//! full state vector in [`oracle`]. [`ensemble`] scans the decoherence factor
//! over time and over seeded random environments, and [`cli`] wraps it all in
//! a batch runner that writes CSV and SVG.

pub mod analytic;
pub mod cli;
pub mod ensemble;
pub mod error;
pub mod model;
pub mod oracle;

pub use analytic::{
    branch_environment_state, coherence_in_basis, decoherence_factor, reduced_density_matrix,
    state_metrics, time_averaged_coherence_sq, BranchState, CoherenceAverage, DecoherenceFactor,
    ReducedState, StateMetrics,
};
pub use ensemble::{
    decay_time, ensemble_statistics, recurrence_search, scaling_sweep, EnsembleReport,
    RecurrenceReport, ScalingRow, SeedStatistics, TimeGrid,
};
pub use error::{Error, Result};
pub use model::{
    build_environment_random, build_environment_scenario, validate, Branch, EnvSpin,
    EnvironmentSpec, InteractionModel, ScenarioKind, SystemAmplitudes, ValidationReport, Violation,
};
pub use oracle::{
    assemble_full_state, crosscheck, evolve_full, partial_trace_to_system, CrosscheckReport,
    FullState,
};
