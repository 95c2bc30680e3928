use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lmpo_cli::commands::{expand_inputs, SYMMETRY_THRESHOLD};
use lmpo_cli::{compare, info, parse_runspec_for, run_file, sweep, CliError, Engine, RunSummary};

#[derive(Parser)]
#[command(name = "lmpo", version, about = "Lindblad dynamics of qubit lattices with matrix product operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one parameter file.
    Run { file: PathBuf },
    /// Run many parameter files (paths or glob patterns) concurrently.
    Sweep {
        #[arg(required = true)]
        inputs: Vec<String>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Run a parameter file with both engines and report the deviations.
    Compare { file: PathBuf },
    /// Describe a saved state file.
    Info { statefile: PathBuf },
}

fn report(summary: &RunSummary) {
    println!(
        "ok {} ({} rows, max bond dim {}, {:.1} s)",
        summary.stem,
        summary.record.len(),
        summary.record.max_bond_dim.iter().max().copied().unwrap_or(0),
        summary.elapsed.as_secs_f64()
    );
    if let Some(t) = summary.symmetry_break {
        eprintln!("warning: {}: mirror asymmetry above {SYMMETRY_THRESHOLD:e} from t = {t}", summary.stem);
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { file } => report(&run_file(&file)?),
        Command::Sweep { inputs, workers } => {
            let paths = expand_inputs(&inputs)?;
            let mut worst: Option<CliError> = None;
            for (path, result) in paths.iter().zip(sweep(&paths, workers)) {
                match result {
                    Ok(s) => report(&s),
                    Err(e) => {
                        eprintln!("error {}: {e}", path.display());
                        if worst.as_ref().is_none_or(|w| e.status > w.status) {
                            worst = Some(e);
                        }
                    }
                }
            }
            if let Some(e) = worst {
                return Err(CliError { status: e.status, message: "some runs failed".into() });
            }
        }
        Command::Compare { file } => {
            let text = std::fs::read_to_string(&file)?;
            let spec = parse_runspec_for(&text, Engine::Oracle)?;
            println!("{}", compare(&spec)?);
        }
        Command::Info { statefile } => println!("{}", info(&statefile)?),
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lmpo: {e}");
            ExitCode::from(e.status as u8)
        }
    }
}
