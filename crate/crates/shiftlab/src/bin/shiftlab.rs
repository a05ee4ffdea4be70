use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use shiftlab::cli::{self, BentCommand, OutputFormat, SweepSpec};
use shiftlab::hiddenshift::AlgorithmId;

#[derive(Parser)]
#[command(name = "shiftlab", version, about = "Hidden-shift algorithm laboratory on finite abelian groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one algorithm on an instance file and emit a report.
    Run(RunArgs),
    /// Sweep shifts, quantization bits, or random-phase seeds.
    Scan(ScanArgs),
    /// Bent-function toolkit.
    Bent(BentArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Path to the JSON instance file.
    #[arg(long)]
    instance: PathBuf,
    /// classical | exact-bent | approx-bounded | approx-subset | mirrored |
    /// exact-multidim | approx-multidim | one-register
    #[arg(long)]
    algorithm: String,
    /// Output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// json or csv.
    #[arg(long, default_value = "json")]
    format: String,
    /// Exit with code 2 when the success probability falls below this.
    #[arg(long, default_value_t = 1e-9)]
    threshold: f64,
    /// Run the amplitude encoders on polar-quantized tables with delta = 2^-bits.
    #[arg(long)]
    quant_bits: Option<u32>,
    /// Draw this many demo shots from the exact distribution.
    #[arg(long)]
    samples: Option<u64>,
    /// Seed for the demo sampler (overrides the instance's seed field).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value = "approx-subset")]
    algorithm: String,
    /// s | quant-bits | seeds
    #[arg(long)]
    sweep: String,
    #[arg(long, default_value_t = 6)]
    bits_from: u32,
    #[arg(long, default_value_t = 16)]
    bits_to: u32,
    /// Number of seeds for the random-phase sweep.
    #[arg(long, default_value_t = 100)]
    count: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BentArgs {
    #[command(subcommand)]
    command: BentSub,
}

#[derive(Subcommand)]
enum BentSub {
    /// Decide bentness of the instance's function.
    Check {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Print the Gram matrix with eigenvalues, rank, and membership verdict.
    Gram {
        #[arg(long)]
        instance: PathBuf,
    },
    /// Decide unitary equivalence of two functions.
    Equivalent {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        other: PathBuf,
    },
    /// List the six one-dimensional bent functions on Z/3Z.
    B1z3,
    /// Decide whether a rank-2 Gram member over Z/3Z is a concatenation.
    ConcatCheck {
        #[arg(long)]
        instance: Option<PathBuf>,
        /// Use the built-in example matrix with this phase parameter instead.
        #[arg(long)]
        example_a: Option<f64>,
    },
}

fn dispatch(cli: Cli) -> shiftlab::Result<i32> {
    match cli.command {
        Command::Run(args) => {
            let algorithm: AlgorithmId = args.algorithm.parse()?;
            let format: OutputFormat = args.format.parse()?;
            cli::cmd_run(
                &args.instance,
                algorithm,
                args.out.as_deref(),
                format,
                args.threshold,
                args.quant_bits,
                args.samples,
                args.seed,
            )
        }
        Command::Scan(args) => {
            let algorithm: AlgorithmId = args.algorithm.parse()?;
            let sweep = match args.sweep.as_str() {
                "s" | "shifts" => SweepSpec::Shifts,
                "quant-bits" => SweepSpec::QuantBits { from: args.bits_from, to: args.bits_to },
                "seeds" => SweepSpec::Seeds { count: args.count },
                other => {
                    return Err(shiftlab::Error::Input(format!(
                        "unknown sweep '{other}', expected s, quant-bits, or seeds"
                    )))
                }
            };
            cli::cmd_scan(&args.instance, algorithm, sweep, args.out.as_deref(), args.seed)
        }
        Command::Bent(args) => {
            let cmd = match args.command {
                BentSub::Check { instance } => BentCommand::Check { instance },
                BentSub::Gram { instance } => BentCommand::Gram { instance },
                BentSub::Equivalent { instance, other } => {
                    BentCommand::Equivalent { instance, other }
                }
                BentSub::B1z3 => BentCommand::B1z3,
                BentSub::ConcatCheck { instance, example_a } => {
                    BentCommand::ConcatCheck { instance, example_a }
                }
            };
            let (output, code) = cli::cmd_bent(&cmd)?;
            print!("{output}");
            Ok(code)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(cli::EXIT_INPUT_ERROR as u8)
        }
    }
}
