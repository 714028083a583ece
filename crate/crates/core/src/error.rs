use thiserror::Error;

/// Errors raised by the simulation engines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid range: {0}")]
    InvalidRange(String),

    #[error("angle {name} = {value} outside [{min}, {max})")]
    InvalidAngle {
        name: &'static str,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("environment of {n} spins exceeds the full-state limit of {max} spins")]
    TooLarge { n: usize, max: usize },

    #[error("state holds {found} amplitudes but the environment requires {expected}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("|z| never fell below {threshold} on the scanned grid")]
    NoDecay { threshold: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
