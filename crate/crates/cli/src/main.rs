mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use report::Format;

#[derive(Parser, Debug)]
#[command(name = "lacunary", version, about = "Experiments on lacunary trigonometric sums")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Seed for every random choice of the run.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (default: all cores). Does not affect the output.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format; each subcommand has its own default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Subcommand, Debug)]
pub(crate) enum Command {
    /// Generate a sequence file.
    Gen(commands::GenArgs),
    /// Check the gap condition n_{k+1}/n_k >= 1 + eps.
    Gap(commands::GapArgs),
    /// Enumerate linear relations among sequence elements.
    Dioph(commands::DiophArgs),
    /// Decide Condition A_omega at one level.
    Aomega(commands::AomegaArgs),
    /// Exact moments of the partial sum.
    Moments(commands::MomentsArgs),
    /// Empirical distribution of the normalized sum.
    Clt(commands::CltArgs),
    /// Running iterated-logarithm ratios at sample points.
    Lil(commands::LilArgs),
    /// Tables of the non-Gaussian limit law.
    Levy(commands::LevyArgs),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match commands::run(cli.command, &cli.global) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lacunary: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
