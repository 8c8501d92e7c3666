use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use condorcet::complexity::{profile, DEFAULT_CAP_FRACTION};
use condorcet::env::GapMatrix;
use condorcet::harness::{
    emit, run_on, summarize, threads_from_env, ExperimentConfig, InstanceSpec, Report, RunTable,
    Sweep,
};
use condorcet::Error;

/// Condorcet-winner identification experiments.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an instance from a generator spec and write its matrix JSON.
    Generate {
        /// Instance spec JSON, e.g. {"generator": "total_order", "deltas": [0, 0.1]}.
        spec: PathBuf,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Hardness values of a matrix at confidence level delta.
    Hardness {
        matrix: PathBuf,
        #[arg(short, long, default_value_t = 0.1)]
        delta: f64,
        #[arg(long, default_value_t = DEFAULT_CAP_FRACTION)]
        cap_fraction: f64,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Run an experiment config and write the run table and summary.
    Run {
        config: PathBuf,
        /// Overrides the config's CSV output path.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Overrides the config's JSON output path.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Summarize a run table.
    Summarize {
        csv: PathBuf,
        /// Instance matrix, for hardness columns.
        #[arg(short, long)]
        matrix: Option<PathBuf>,
        /// Confidence level; defaults to the swept value of fixed-confidence runs.
        #[arg(short, long)]
        delta: Option<f64>,
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::NoCondorcetWinner => 3,
        Error::InvalidConfig(_)
        | Error::InvalidParameter(_)
        | Error::InvalidSparsity { .. }
        | Error::MalformedMatrix(_)
        | Error::Underbudget { .. }
        | Error::Json(_)
        | Error::Csv(_) => 2,
        _ => 1,
    }
}

fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_owned(),
        source,
    })
}

fn write_out(out: Option<&Path>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => fs::write(path, text).map_err(|source| Error::Io {
            path: path.to_owned(),
            source,
        }),
        None => {
            // a closed stdout is not worth an error
            let _ = std::io::stdout().write_all(text.as_bytes());
            Ok(())
        }
    }
}

fn execute(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Generate { spec, out } => {
            let spec = InstanceSpec::from_json(&read(&spec)?)
                .map_err(|e| Error::InvalidConfig(e.to_string()))?;
            let matrix = spec.build()?;
            write_out(out.as_deref(), &(matrix.to_json()? + "\n"))
        }
        Command::Hardness {
            matrix,
            delta,
            cap_fraction,
            out,
        } => {
            let matrix = GapMatrix::load(matrix)?;
            let p = profile(&matrix, delta, cap_fraction)?;
            write_out(out.as_deref(), &(serde_json::to_string_pretty(&p)? + "\n"))
        }
        Command::Run { config, csv, json } => {
            let cfg = ExperimentConfig::load(&config)?;
            let matrix = cfg.instance.build()?;
            let table = run_on(&cfg, &matrix, threads_from_env()?)?;
            let delta = matches!(cfg.sweep, Sweep::Budget(_)).then_some(cfg.delta);
            let summary = summarize(&table, Some(&matrix), delta)?;
            let csv = csv.or(cfg.output.csv.clone());
            let json = json.or(cfg.output.json.clone());
            emit(
                &table,
                &summary,
                Some(&cfg),
                csv.as_deref(),
                json.as_deref(),
            )?;
            if json.is_none() {
                write_out(None, &Report::new(&summary, Some(&cfg)).to_json()?)?;
            }
            Ok(())
        }
        Command::Summarize {
            csv,
            matrix,
            delta,
            out,
        } => {
            let table = RunTable::load(&csv)?;
            let matrix = matrix.map(GapMatrix::load).transpose()?;
            let summary = summarize(&table, matrix.as_ref(), delta)?;
            write_out(out.as_deref(), &Report::new(&summary, None).to_json()?)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
