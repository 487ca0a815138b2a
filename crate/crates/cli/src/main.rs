use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use jacobi_cli::{load_config, run_to_dir, CliError, Command};

/// Jacobi curves of Hamiltonian flows: batch analyses with CSV/JSON output.
#[derive(Parser, Debug)]
#[command(name = "jacobi", version)]
struct Args {
    command: Command,
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Evaluate independent samples and trajectories concurrently.
    #[arg(long)]
    parallel: bool,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if e.use_stderr() => {
            let err = CliError::Validation(vec![e.to_string()]);
            eprintln!("{}", err.record());
            return ExitCode::from(err.exit_code() as u8);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    let outcome = load_config(&args.config).and_then(|mut cfg| {
        if let Some(seed) = args.seed {
            cfg.seed = seed;
        }
        run_to_dir(&cfg, args.command, &args.out, args.parallel)
    });
    match outcome {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.record());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
