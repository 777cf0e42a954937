use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use cuspwave_cli::experiment::default_out_dir;
use cuspwave_cli::{presets, run_experiment, CliError, ExperimentConfig, RunOptions, TableFormat};

#[derive(Parser)]
#[command(
    name = "cuspwave",
    version,
    about = "Plane-wave convergence experiments for periodic Coulomb Hamiltonians"
)]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML file or a preset name.
    Run {
        config: String,
        /// Output directory [default: results/<experiment>].
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads for the parallel parts.
        #[arg(long)]
        threads: Option<usize>,
        /// Skip the basis-size guard.
        #[arg(long)]
        force: bool,
        #[arg(long, value_enum, default_value = "both")]
        format: Format,
    },
    /// List bundled presets, or print one.
    Presets { name: Option<String> },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Presets { name: None } => {
            for n in presets::names() {
                println!("{n}");
            }
            Ok(())
        }
        Command::Presets { name: Some(n) } => match presets::get(&n) {
            Some(text) => {
                print!("{text}");
                Ok(())
            }
            None => Err(CliError::config(n, "no such preset")),
        },
        Command::Run {
            config,
            out,
            threads,
            force,
            format,
        } => {
            let cfg = ExperimentConfig::load(&config)?;
            if let Some(n) = threads {
                if n == 0 {
                    return Err(CliError::config("--threads", "must be at least 1"));
                }
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .map_err(|e| CliError::Output(e.to_string()))?;
            }
            let mut options = RunOptions::new(out.unwrap_or_else(|| default_out_dir(&cfg)));
            options.force = force;
            options.formats = match format {
                Format::Csv => vec![TableFormat::Csv],
                Format::Json => vec![TableFormat::Json],
                Format::Both => vec![TableFormat::Csv, TableFormat::Json],
            };
            let summary = run_experiment(&cfg, &options)?;
            for (k, v) in &summary.slopes {
                println!("slope {k} = {v:.4}");
            }
            for f in &summary.files {
                println!("wrote {}", f.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
