use std::path::PathBuf;
use std::process::ExitCode;

use adrx::{load_config, run_experiment, threads_from_env, HarnessError, Mode, Overrides};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "adrx", version = adrx::VERSION, about = "Reversible adsorption receiver experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write CSV plus `.meta` output.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<u32>,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Run {
            config,
            seed,
            trials,
            mode,
            out,
        } => {
            let overrides = Overrides {
                seed,
                trials,
                mode,
                output_path: out,
            };
            let cfg = load_config(&config)?.with_overrides(&overrides)?;
            let threads = threads_from_env();
            log::info!("running {} with {threads} threads", config.display());
            let output = run_experiment(&cfg, threads)?;
            for line in output.results.summary_lines() {
                println!("{line}");
            }
            println!("wrote {} ({:.1} s)", output.csv_path.display(), output.runtime_seconds);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
