use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use bootbias_cli::commands::{self, CliError, RunOptions};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bootbias", version, about = "Bootstrap bias-correction experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        config: PathBuf,
        /// Directory that relative output paths are resolved against.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Worker threads (0 = one per core).
        #[arg(long, env = "BOOTBIAS_THREADS")]
        threads: Option<usize>,
    },
    /// Draw the log-log rate chart for a results CSV.
    Report {
        csv: PathBuf,
        #[arg(long)]
        svg: PathBuf,
    },
    /// Run the built-in identity checks.
    Selftest,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut stdout = io::stdout().lock();
    let result: Result<(), CliError> = match cli.command {
        Command::Run {
            config,
            out_dir,
            threads,
        } => commands::run(&config, &RunOptions { out_dir, threads }, &mut stdout).map(|_| ()),
        Command::Report { csv, svg } => commands::report(&csv, &svg, &mut stdout),
        Command::Selftest => commands::selftest(&mut stdout),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
