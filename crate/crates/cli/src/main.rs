use std::path::PathBuf;
use std::process::ExitCode;

use chorefair_cli::{
    cmd_gen, cmd_oracle, cmd_solve_surplus, cmd_solve_three, cmd_verify, GenParams, OracleFlag, PropertyFlag,
    SurplusFlags,
};
use clap::{Parser, Subcommand};

/// Fair and efficient chore allocation with exact arithmetic.
#[derive(Parser)]
#[command(name = "chorefair", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Format {
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random integer instance.
    Gen {
        #[arg(long)]
        agents: usize,
        #[arg(long)]
        chores: usize,
        #[arg(long, default_value_t = 10)]
        maxd: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Compute an EF1 and fPO allocation with at most n-1 surplus copies.
    SolveSurplus {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Start from an exact equilibrium instead of an approximate one.
        #[arg(long)]
        exact: bool,
        /// Approximation parameter, e.g. 1/30.
        #[arg(long)]
        epsilon: Option<String>,
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Three agents: a tEFX or proportional allocation.
    SolveThree {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Check one property of an allocation and print its certificate.
    Verify {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long)]
        alloc: Option<PathBuf>,
        #[arg(long, value_enum)]
        property: PropertyFlag,
        #[arg(long)]
        prices: Option<PathBuf>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Reference solvers.
    Oracle {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        which: OracleFlag,
        #[arg(long)]
        alloc: Option<PathBuf>,
        #[arg(long)]
        epsilon: Option<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Gen {
            agents,
            chores,
            maxd,
            seed,
            format: Format::Json,
            output,
        } => cmd_gen(
            &GenParams {
                agents,
                chores,
                maxd,
                seed,
            },
            output.as_deref(),
        ),
        Command::SolveSurplus {
            input,
            output,
            exact,
            epsilon,
            trace,
        } => cmd_solve_surplus(&input, output.as_deref(), &SurplusFlags { exact, epsilon, trace }),
        Command::SolveThree { input, output, trace } => cmd_solve_three(&input, output.as_deref(), trace.as_deref()),
        Command::Verify {
            input,
            alloc,
            property,
            prices,
            output,
        } => cmd_verify(&input, alloc.as_deref(), property, prices.as_deref(), output.as_deref()).map(|_| ()),
        Command::Oracle {
            input,
            which,
            alloc,
            epsilon,
            output,
        } => cmd_oracle(&input, which, alloc.as_deref(), epsilon.as_deref(), output.as_deref()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
