use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use zigzag_transfer::experiment::{catalog, run_text, write_run, ExperimentConfig, RunError};

#[derive(Parser)]
#[command(name = "zigzag", version, about = "Zig-zag PST/FST experiment runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment config and write its outputs into a fresh directory.
    Run {
        config: PathBuf,
        #[arg(long, default_value = "runs")]
        out: PathBuf,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Print the experiment catalog.
    List,
    /// Check a config without running it.
    Validate { config: PathBuf },
}

fn read(path: &PathBuf) -> Result<String, RunError> {
    std::fs::read_to_string(path).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))
}

fn run(cmd: Command) -> Result<(), RunError> {
    match cmd {
        Command::Run {
            config,
            out,
            seed,
            threads,
        } => {
            if let Some(k) = threads {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(k)
                    .build_global()
                    .map_err(|e| RunError::Schema(format!("threads: {e}")))?;
            }
            let text = read(&config)?;
            let (cfg, output) = run_text(&text, seed)?;
            let dir = write_run(&out, &cfg, &output, rayon::current_num_threads())?;
            println!("{}", serde_json::to_string_pretty(&output.summary).expect("summary serializes"));
            println!("{}", dir.display());
        }
        Command::List => {
            for e in catalog() {
                println!("{:<16} {:<28} {}", e.name, e.figure, e.summary);
            }
        }
        Command::Validate { config } => {
            let (cfg, _) = ExperimentConfig::parse(&read(&config)?)?;
            println!("ok {}", cfg.experiment.name());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.record());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
