//! `fluorspec`: one-photon spectra and dressed-level reports for small
//! ensembles of driven, dipole-coupled two-level emitters.

// Negated float comparisons are deliberate where they appear: unlike the
// suggested rewrite they also reject NaN. Indexed loops mirror the matrix
// notation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

mod commands;
mod config;
mod output;
mod plot;
mod presets;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::ScanAxis;
use config::{parse_config, CurveFormat, RunConfig, ValidationError};

#[derive(Parser)]
#[command(
    name = "fluorspec",
    version,
    about = "Fluorescence spectra and collective dressed levels of driven dipole-coupled emitters"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the one-photon spectrum, detect sidebands, and assign them to
    /// dressed-level transitions
    Spectrum {
        /// Path to a TOML config, or the name of a bundled preset
        config: String,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Report dressed levels, transition table, coupling blocks, and the
    /// level diagram
    Dressed {
        /// Path to a TOML config, or the name of a bundled preset
        config: String,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Sweep one parameter, producing a spectrum and peak set per value
    Scan {
        /// Path to a TOML config, or the name of a bundled preset
        config: String,
        /// Parameter to sweep
        #[arg(long, value_enum)]
        axis: ScanAxis,
        /// Comma-separated list of values (an empty scan writes an empty
        /// summary)
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Operations on bundled presets
    Presets {
        #[command(subcommand)]
        action: PresetsAction,
    },
}

#[derive(Subcommand)]
enum PresetsAction {
    /// List the bundled presets
    List,
}

#[derive(Args)]
struct CommonArgs {
    /// Output directory (overrides the config's output.directory)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Skip plot images
    #[arg(long)]
    no_plot: bool,
    /// Spectrum curve format (overrides the config's output.formats)
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

fn load_config(spec: &str, common: &CommonArgs) -> anyhow::Result<RunConfig> {
    let text = if std::path::Path::new(spec).is_file() {
        fs::read_to_string(spec)?
    } else if let Some(preset) = presets::find(spec) {
        preset.toml.to_string()
    } else {
        return Err(ValidationError(format!(
            "'{spec}' is neither a config file nor a bundled preset \
             (try `fluorspec presets list`)"
        ))
        .into());
    };
    let mut cfg = parse_config(&text)?;
    if let Some(out) = &common.out {
        cfg.out_dir = out.clone();
    }
    if common.no_plot {
        cfg.plot = false;
    }
    if let Some(format) = common.format {
        cfg.formats = vec![match format {
            FormatArg::Csv => CurveFormat::Csv,
            FormatArg::Json => CurveFormat::Json,
        }];
    }
    Ok(cfg)
}

/// Exit-code contract: 0 success, 1 validation error, 2 numerical failure.
fn exit_code_for(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<ValidationError>().is_some() {
            return 1;
        }
        if let Some(core) = cause.downcast_ref::<fluorspec::Error>() {
            use fluorspec::Error::*;
            return match core {
                InvalidLayout(_)
                | DegenerateGeometry { .. }
                | Domain(_)
                | DimensionMismatch(_)
                | SiteIndexOutOfRange { .. }
                | NotHermitian { .. }
                | InvalidDensityMatrix(_)
                | NotExcitationConserving { .. } => 1,
                NonUniqueSteadyState { .. }
                | ResidualTooLarge { .. }
                | TraceTooShort { .. }
                | ZeroEmission
                | IllConditionedEigenbasis { .. }
                | Linalg(_) => 2,
            };
        }
    }
    2
}

fn run() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Spectrum { config, common } => {
            let cfg = load_config(&config, &common)?;
            commands::cmd_spectrum(&cfg)
        }
        Command::Dressed { config, common } => {
            let cfg = load_config(&config, &common)?;
            commands::cmd_dressed(&cfg)
        }
        Command::Scan {
            config,
            axis,
            values,
            common,
        } => {
            let cfg = load_config(&config, &common)?;
            commands::cmd_scan(&cfg, axis, &values)
        }
        Command::Presets { action } => match action {
            PresetsAction::List => {
                for p in presets::PRESETS {
                    println!("{:<18} {}", p.name, p.description);
                }
                Ok(())
            }
        },
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
