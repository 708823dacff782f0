use std::path::PathBuf;
use std::process::exit;

use clap::{Parser, Subcommand};
use heteroclinic::cli;

#[derive(Parser)]
#[command(
    name = "heteroclinic",
    about = "Construct and verify monotone travelling-front profiles for a \
             delayed blowflies model with linear harvesting",
    version
)]
struct Cli {
    /// Override a config key, e.g. --set sigma=0.2 (repeatable)
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report every feasibility and hypothesis check for a parameter set
    Check {
        #[arg(long)]
        config: PathBuf,
    },
    /// Certify the upper/lower solution pair on the grid, optionally dumping CSVs
    Bounds {
        #[arg(long)]
        config: PathBuf,
        /// Directory for upper/lower/residual/compat CSV files
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the monotone iteration to the wave profile
    Iterate {
        #[arg(long)]
        config: PathBuf,
        /// Directory for final.csv, iterates.csv, metadata.txt
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Independently validate a computed profile (from --out or recomputed)
    Verify {
        #[arg(long)]
        config: PathBuf,
        /// Directory holding final.csv from a previous iterate run
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() {
    let args = Cli::parse();
    let code = match &args.command {
        Command::Check { config } => cli::cmd_check(config, &args.set),
        Command::Bounds { config, out } => cli::cmd_bounds(config, &args.set, out.as_deref()),
        Command::Iterate { config, out } => cli::cmd_iterate(config, &args.set, out.as_deref()),
        Command::Verify { config, out } => cli::cmd_verify(config, &args.set, out.as_deref()),
    };
    exit(code);
}
