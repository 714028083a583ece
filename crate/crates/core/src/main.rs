use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use einlab::cli::{emit_svg_plot, parse_config, run, RunError};

/// Run a dephasing-model configuration and write its CSV report.
#[derive(Debug, Parser)]
#[command(name = "einlab", version, about)]
struct Args {
    /// Path to a `key = value` run configuration.
    config: PathBuf,

    /// Output CSV path, overriding the config's `output` key.
    #[arg(long)]
    output: Option<PathBuf>,

    /// Also plot this CSV column against `t` as `<output stem>.<column>.svg`.
    #[arg(long, value_name = "COLUMN")]
    plot: Option<String>,

    /// Suppress the summary line.
    #[arg(long)]
    quiet: bool,
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("einlab: {msg}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(args) => args,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };

    let text = match std::fs::read_to_string(&args.config) {
        Ok(text) => text,
        Err(e) => return fail(1, format!("{}: {e}", args.config.display())),
    };
    let mut config = match parse_config(&text) {
        Ok(config) => config,
        Err(e) => return fail(1, format!("{}: {e}", args.config.display())),
    };
    if let Some(output) = args.output {
        config.output = Some(output);
    }

    let summary = match run(&config) {
        Ok(summary) => summary,
        Err(e) => return fail(RunError::exit_code(&e) as u8, e),
    };

    if let Some(column) = &args.plot {
        let stem = summary.output.with_extension("");
        let svg = PathBuf::from(format!("{}.{column}.svg", stem.display()));
        if let Err(e) = emit_svg_plot(&summary.output, column, &svg) {
            return fail(1, e);
        }
    }

    if !args.quiet {
        println!(
            "{} ({} rows -> {})",
            summary.message,
            summary.rows,
            summary.output.display()
        );
    }
    ExitCode::SUCCESS
}
