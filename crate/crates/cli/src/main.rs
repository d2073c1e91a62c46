//! `ffwd`: experiment drivers and the acceptance-suite runner for the
//! quantum-walk / clock-Hamiltonian toolkit.
//!
//! Exit codes: 0 success, 1 acceptance-criterion failure, 2 usage or
//! domain error, 3 internal-consistency error. All commands are
//! deterministic given `--seed` (default 0).

mod commands;
mod output;

use clap::{Args, Parser, Subcommand};
use commands::CliError;
use output::Format;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "ffwd",
    about = "Line quantum walks, clock Hamiltonians, permutation chains, and sparse-oracle reductions",
    version
)]
struct Cli {
    /// RNG seed shared by every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file (or directory for multi-file commands); stdout when
    /// omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Probability profiles P(1,l,t) and fixed-vertex time series.
    WalkProfile {
        #[arg(long, default_value_t = 100)]
        length: usize,
        /// Comma-separated sample times.
        #[arg(long, value_delimiter = ',', default_value = "10,20,30,40,50")]
        times: Vec<f64>,
        /// Vertices for the fixed-l time series (defaults to five spread
        /// over the line).
        #[arg(long, value_delimiter = ',')]
        fixed_vertices: Option<Vec<usize>>,
        /// Time grid step for the fixed-l series.
        #[arg(long, default_value_t = 0.5)]
        t_step: f64,
    },
    /// Tail and head probability masses at the given times.
    WalkTail {
        #[arg(long, default_value_t = 100)]
        length: usize,
        #[arg(long, value_delimiter = ',', default_value = "10,20,30,40,50")]
        times: Vec<f64>,
    },
    /// Squared-Bessel envelope and bound checks per order.
    BesselBounds {
        #[arg(long, default_value_t = 100)]
        max_order: i64,
        /// Argument samples per order over [2n, 4n].
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// Verify a Johnson-clock path and its transition operators.
    ClockVerify {
        #[arg(long)]
        qubits: u32,
        #[arg(long)]
        weight: u32,
    },
    /// Run the iterate-extraction reduction on an iterated block circuit.
    FeynmanRun {
        /// Circuit JSON file.
        #[arg(long)]
        circuit: Option<PathBuf>,
        /// Builtin block: `not` or `perm3`.
        #[arg(long)]
        builtin: Option<String>,
        #[arg(long, default_value_t = 16)]
        iterations: usize,
        /// Evolution time (default: half of the total gate count).
        #[arg(long)]
        time: Option<f64>,
        /// Input bitstring, qubit 0 first (default all zeros).
        #[arg(long)]
        input: Option<String>,
        #[arg(long, default_value_t = 1)]
        samples: usize,
    },
    /// Localize a circuit, lower it to a piecewise-constant Hamiltonian,
    /// and evolve a basis input.
    TimedepRun {
        #[arg(long)]
        circuit: Option<PathBuf>,
        #[arg(long)]
        builtin: Option<String>,
        #[arg(long)]
        time: f64,
        #[arg(long)]
        input: Option<String>,
    },
    /// Permutation-chain and twisted-hash-chain operations.
    #[command(subcommand)]
    Chain(ChainCommand),
    /// Consistency scan of the walk-graph oracles, with optional dense
    /// export and reduction sampling.
    OracleCheck {
        #[arg(long, default_value_t = 4)]
        levels: usize,
        #[arg(long, default_value_t = 3)]
        bits: u32,
        /// Also run the sampling reduction at this time.
        #[arg(long)]
        time: Option<f64>,
        /// Emit the dense matrix in coordinate-list form instead of the
        /// summary.
        #[arg(long, default_value_t = false)]
        export_matrix: bool,
    },
    /// Run every acceptance criterion and emit a machine-readable report.
    Acceptance,
}

#[derive(Subcommand)]
enum ChainCommand {
    /// Generate a seeded permutation-chain instance.
    Gen(ChainGenArgs),
    /// Verify a claimed twisted-chain triple against the seeded hash.
    Verify(ChainTripleArgs),
    /// Complete a twisted-chain triple into a full (2q+1)-chain.
    Complete(ChainTripleArgs),
}

#[derive(Args)]
struct ChainGenArgs {
    #[arg(long, default_value_t = 8)]
    levels: usize,
    #[arg(long, default_value_t = 8)]
    bits: u32,
    #[arg(long, default_value_t = 0)]
    start: u32,
}

#[derive(Args)]
struct ChainTripleArgs {
    #[arg(long, default_value_t = 12)]
    bits: u32,
    #[arg(long)]
    x0: u32,
    #[arg(long)]
    xq: u32,
    #[arg(long)]
    xq1: u32,
    #[arg(long)]
    q: usize,
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let format = cli.format;
    let out = cli.out;
    let seed = cli.seed;
    match cli.command {
        Command::WalkProfile {
            length,
            times,
            fixed_vertices,
            t_step,
        } => commands::walk_profile(length, &times, fixed_vertices, t_step, format, out)
            .map(|()| true),
        Command::WalkTail { length, times } => {
            commands::walk_tail(length, &times, format, out).map(|()| true)
        }
        Command::BesselBounds { max_order, samples } => {
            commands::bessel_bounds(max_order, samples, format, out).map(|()| true)
        }
        Command::ClockVerify { qubits, weight } => {
            commands::clock_verify(qubits, weight, format, out).map(|()| true)
        }
        Command::FeynmanRun {
            circuit,
            builtin,
            iterations,
            time,
            input,
            samples,
        } => commands::feynman_run(
            circuit, builtin, iterations, time, input, samples, seed, format, out,
        )
        .map(|()| true),
        Command::TimedepRun {
            circuit,
            builtin,
            time,
            input,
        } => commands::timedep_run(circuit, builtin, time, input, format, out).map(|()| true),
        Command::Chain(chain) => match chain {
            ChainCommand::Gen(args) => {
                commands::chain_gen(seed, args.levels, args.bits, args.start, format, out)
                    .map(|()| true)
            }
            ChainCommand::Verify(args) => commands::chain_verify(
                seed, args.bits, args.x0, args.xq, args.xq1, args.q, format, out,
            )
            .map(|()| true),
            ChainCommand::Complete(args) => commands::chain_complete(
                seed, args.bits, args.x0, args.xq, args.xq1, args.q, format, out,
            )
            .map(|()| true),
        },
        Command::OracleCheck {
            levels,
            bits,
            time,
            export_matrix,
        } => commands::oracle_check(seed, levels, bits, time, export_matrix, format, out)
            .map(|()| true),
        Command::Acceptance => commands::acceptance(out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
