use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod run;

#[derive(Parser, Debug)]
#[command(
    name = "splc",
    version,
    about = "Structured-program CFGs, SPL decompositions, register allocation and LOSPRE"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format.
    #[arg(long, value_enum, global = true)]
    pub format: Option<Format>,

    /// Also write a DOT rendering to this file.
    #[arg(long, global = true, value_name = "FILE")]
    pub dot: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Dot,
    Text,
}

#[derive(Args, Debug)]
pub struct Input {
    /// Program source; reads stdin when absent or `-`.
    pub file: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RaArgs {
    /// Number of registers.
    #[arg(short = 'r', long = "registers")]
    pub registers: Option<u32>,

    /// JSON spill-weight file.
    #[arg(long, value_name = "FILE", conflicts_with = "spill_free")]
    pub cost: Option<PathBuf>,

    /// Decide whether all variables fit without spilling.
    #[arg(long)]
    pub spill_free: bool,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
pub struct LospreSource {
    /// JSON instance file (use set, invalidating set, costs).
    #[arg(long, value_name = "FILE")]
    pub instance: Option<PathBuf>,

    /// Derive the instance from the occurrences of this expression.
    #[arg(long, value_name = "EXPR")]
    pub expr: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Parse a program and report whether it is closed.
    Parse {
        #[command(flatten)]
        input: Input,
        /// Exit with status 1 when the program is not closed.
        #[arg(long)]
        require_closed: bool,
    },
    /// Build the control-flow graph and its decomposition.
    Decompose {
        #[command(flatten)]
        input: Input,
        /// With `--format dot`, print the decomposition tree instead of the graph.
        #[arg(long)]
        tree: bool,
    },
    /// Live sets and the interference graph.
    Liveness {
        #[command(flatten)]
        input: Input,
    },
    /// Minimum-cost register allocation.
    Regalloc {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        ra: RaArgs,
        /// Print the smallest spill-free register count.
        #[arg(long, conflicts_with_all = ["cost", "spill_free"], requires = "max")]
        min_registers: bool,
        /// Upper bound for `--min-registers`.
        #[arg(long, value_name = "R")]
        max: Option<u32>,
        /// Key tables by register-renaming class.
        #[arg(long)]
        canonical: bool,
        /// Run the full table computation even when pressure exceeds `r`.
        #[arg(long)]
        no_early_exit: bool,
    },
    /// Lifetime-optimal speculative partial redundancy elimination.
    Lospre {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        source: LospreSource,
    },
    /// Exhaustive reference solvers for small programs.
    Oracle {
        #[command(subcommand)]
        which: OracleCommand,
    },
    /// Print a seeded random closed program.
    Gen {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of primitive statements.
        #[arg(long, default_value_t = 12)]
        statements: usize,
        #[arg(long, default_value_t = 4)]
        vars: usize,
        /// Maximum nesting of `if` and `while`.
        #[arg(long, default_value_t = 4)]
        depth: usize,
    },
}

#[derive(Subcommand, Debug)]
pub enum OracleCommand {
    /// Brute-force register allocation over every total assignment.
    Ra {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        ra: RaArgs,
        /// Maximum number of enumerated candidates.
        #[arg(long, default_value_t = 1 << 24)]
        budget: u64,
    },
    /// Brute-force LOSPRE over every life set.
    Lospre {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        source: LospreSource,
        #[arg(long, default_value_t = 1 << 24)]
        budget: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    // Parsing and the tree builders recurse on nesting depth.
    let worker = std::thread::Builder::new().stack_size(256 << 20).spawn(move || run::run(&cli));
    match worker.map(|h| h.join()) {
        Ok(Ok(code)) => ExitCode::from(code),
        _ => {
            eprintln!("splc: internal error");
            ExitCode::from(70)
        }
    }
}
