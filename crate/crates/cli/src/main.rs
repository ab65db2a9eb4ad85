mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qflux::algebra::{parse_rational, BigRational};

/// Number of worker threads used by `verify` when several regions are given.
pub const THREADS_VAR: &str = "QFLUX_THREADS";

#[derive(Parser, Debug)]
#[command(name = "qflux", version, about = "q-flux polynomials of domino-tiled annuli")]
struct Cli {
    /// Suppress the text report (JSON reports and exit codes are unaffected).
    #[arg(long, global = true)]
    quiet: bool,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse and classify a region.
    Validate { region: PathBuf },
    /// Enumerate domino tilings.
    Tilings {
        region: PathBuf,
        #[arg(long)]
        count: bool,
        #[arg(long)]
        list: bool,
    },
    /// Flip graph of all tilings.
    Flipgraph {
        region: PathBuf,
        /// Emit Graphviz DOT instead of a summary.
        #[arg(long)]
        dot: bool,
    },
    /// Wall and ladder detection for an annulus.
    Walls { region: PathBuf },
    /// The q-flux polynomial as a Kasteleyn determinant.
    Phi {
        region: PathBuf,
        /// Specialize q and list the numeric roots in p.
        #[arg(long, value_parser = rational)]
        q_at: Option<BigRational>,
        /// Print the positive-coefficient form instead of the raw determinant.
        #[arg(long)]
        normalized: bool,
    },
    /// Connection matrix of the cut-open annulus.
    Transfer {
        region: PathBuf,
        /// Trace reconstruction for the n-fold cover.
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long)]
        show_blocks: bool,
        /// Mark bi-active shapes (at q = 1).
        #[arg(long)]
        bi_active: bool,
    },
    /// Run every certification on one or more regions.
    Verify {
        #[arg(required = true)]
        regions: Vec<PathBuf>,
        /// Accepted for compatibility: all certifications always run.
        #[arg(long)]
        all: bool,
        #[arg(long = "q", value_parser = rational)]
        q_values: Vec<BigRational>,
        #[arg(long = "cover")]
        covers: Vec<usize>,
        /// Write the JSON report to this file.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn rational(s: &str) -> Result<BigRational, String> {
    parse_rational(s).ok_or_else(|| format!("not a rational number: {s}"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = match cli.command {
        Command::Validate { region } => commands::validate(&region),
        Command::Tilings { region, count, list } => commands::tilings(&region, count, list),
        Command::Flipgraph { region, dot } => commands::flipgraph(&region, dot),
        Command::Walls { region } => commands::walls(&region),
        Command::Phi {
            region,
            q_at,
            normalized,
        } => commands::phi(&region, q_at.as_ref(), normalized),
        Command::Transfer {
            region,
            n,
            show_blocks,
            bi_active,
        } => commands::transfer(&region, n, show_blocks, bi_active),
        Command::Verify {
            regions,
            all: _,
            q_values,
            covers,
            report,
        } => commands::verify(&regions, q_values, covers, report.as_deref()),
    };
    match out {
        Ok(out) => {
            if !cli.quiet {
                match cli.format {
                    Format::Text => print!("{}", out.text),
                    Format::Json => println!("{}", serde_json::to_string_pretty(&out.json).unwrap()),
                }
            }
            if out.failed {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("qflux: {e}");
            ExitCode::from(2)
        }
    }
}
