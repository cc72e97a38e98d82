use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use multirabi_cli::commands::{self, SweepParam};
use multirabi_cli::config::{ConfigFile, Format, Overrides, Solver};
use multirabi_cli::solve::{with_output, Stdout};
use multirabi_cli::CliError;

/// Dynamics of an n-level atom driven by n(n-1)/2 fields.
#[derive(Parser)]
#[command(name = "multirabi", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form eigenvalues and eigenbasis of the n-level coupling matrix.
    Spectrum {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Evolve the configured system and write its trajectory.
    Evolve {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Report the consistency and resonance conditions of a configuration.
    ExactCheck {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Compare two solvers (or two configurations) on the same time grid.
    Compare {
        config: PathBuf,
        /// First solver; defaults to the configured one.
        #[arg(long, value_enum)]
        a: Option<Solver>,
        /// Second solver; defaults to the first.
        #[arg(long, value_enum)]
        b: Option<Solver>,
        /// Configuration for the second trajectory; defaults to `config`.
        #[arg(long)]
        config_b: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run one configuration per parameter value in parallel.
    Sweep {
        config: PathBuf,
        #[arg(long, value_enum)]
        param: SweepParam,
        /// Comma-separated parameter values.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        values: Vec<f64>,
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Spectrum { n, format } => commands::spectrum(n, format, &mut Stdout::default()),
        Command::Evolve { config, overrides } => commands::evolve(&commands::load(&config, &overrides)?),
        Command::ExactCheck { config, overrides } => {
            commands::exact_check(&commands::load(&config, &overrides)?, &mut Stdout::default())
        }
        Command::Compare { config, a, b, config_b, overrides } => {
            let cfg_a = commands::load(&config, &overrides)?;
            let cfg_b = match &config_b {
                Some(p) => commands::load(p, &overrides)?,
                None => cfg_a.clone(),
            };
            let a = a.unwrap_or(cfg_a.solver);
            let b = b.unwrap_or(if config_b.is_some() { cfg_b.solver } else { a });
            let report = commands::compare_solvers(&cfg_a, &cfg_b, a, b)?;
            with_output(cfg_a.output.as_deref(), |w| commands::write_report(a, b, &report, cfg_a.format, w))
        }
        Command::Sweep { config, param, values, out_dir, overrides } => {
            let file = ConfigFile::load(&config)?;
            commands::sweep(&file, &overrides, param, &values, &out_dir).map(|_| ())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.record());
            ExitCode::from(e.exit_code())
        }
    }
}
