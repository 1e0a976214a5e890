use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mecstream::cli::{self, Overrides, RunRequest};

#[derive(Parser)]
#[command(name = "mecstream", version, about = "Edge-assisted adaptive streaming simulator")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a config file.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        replications: Option<u32>,
        /// Base seed; replication j uses seed + j.
        #[arg(long)]
        seed: Option<u64>,
        /// rbcrh, lru, lfu, opt1 or fixed.
        #[arg(long)]
        policy: Option<String>,
        /// qoe_max, joint or traffic_min.
        #[arg(long)]
        strategy: Option<String>,
        #[arg(long)]
        beta: Option<f64>,
        /// Also write the final cache contents of every replication.
        #[arg(long)]
        dump_cache: bool,
    },
    /// Print aggregate metrics of finished experiments side by side.
    Compare {
        #[arg(required = true, num_args = 2..)]
        dirs: Vec<PathBuf>,
    },
}

fn main() -> ExitCode {
    let args = Args::parse();
    let result = match args.command {
        Command::Run {
            config,
            out,
            replications,
            seed,
            policy,
            strategy,
            beta,
            dump_cache,
        } => {
            let req = RunRequest {
                config,
                out,
                overrides: Overrides {
                    replications,
                    seed,
                    policy,
                    strategy,
                    beta,
                },
                dump_cache,
            };
            cli::run_experiment(&req).map(|s| {
                for (label, dir, _) in s.points {
                    eprintln!(
                        "wrote {} ({})",
                        dir.display(),
                        label.as_deref().unwrap_or("single point")
                    );
                }
            })
        }
        Command::Compare { dirs } => cli::compare(&dirs).map(|table| print!("{table}")),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code(&e))
        }
    }
}
