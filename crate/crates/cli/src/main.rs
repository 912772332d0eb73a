use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qtraj::commands::{cmd_enumerate, cmd_figure, cmd_info, cmd_run, Overrides};
use qtraj::CliError;

/// Discrete-step quantum trajectory simulator for a q-bit.
#[derive(Parser)]
#[command(name = "qtraj", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample trajectories and write them as CSV.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the document's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the document's trajectory count.
        #[arg(long)]
        trajectories: Option<usize>,
        /// Start the file with a `# qtraj <version>` comment.
        #[arg(long)]
        version_comment: bool,
    },
    /// Enumerate every outcome sequence and write the exact mixture as JSON.
    Enumerate {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a preset trajectory bundle (fig3a, fig3b or fig4) as CSV.
    Figure {
        name: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        version_comment: bool,
    },
    /// Write a per-step entropy and information report as JSON.
    Info {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run {
            scenario,
            out,
            seed,
            trajectories,
            version_comment,
        } => cmd_run(
            &scenario,
            &out,
            Overrides {
                seed,
                trajectories,
                version_comment,
            },
        ),
        Command::Enumerate { scenario, out } => cmd_enumerate(&scenario, &out),
        Command::Figure {
            name,
            out,
            seed,
            version_comment,
        } => cmd_figure(&name, &out, seed, version_comment),
        Command::Info { scenario, out } => cmd_info(&scenario, &out),
    }
}

fn main() -> ExitCode {
    // clap exits with status 2 on malformed arguments.
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qtraj: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
