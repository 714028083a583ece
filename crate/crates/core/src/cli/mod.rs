//! Batch front end: config parsing, run dispatch, CSV and SVG output.

pub mod config;
pub mod csv;
pub mod run;
pub mod svg;

pub use config::{parse_config, ConfigError, Mode, RunConfig, ScenarioName};
pub use run::{run, RunError, RunSummary};
pub use svg::{emit_svg_plot, SvgError};
