use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hotkit::commands::{self, parse_size, CmdError};
use hotkit_core::grid::LossWeights;

/// Toolkit for human-object-contact maps: evaluation metrics, region
/// losses, depth-band filtering, and deterministic synthetic datasets.
#[derive(Parser)]
#[command(name = "hotkit", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate predictions: SC-Acc, C-Acc, mIoU, wIoU, AD-Acc per image
    /// plus an aggregate row.
    Eval(EvalCli),
    /// Per-image loss breakdown: cross-entropy, local/global region losses,
    /// prompt binary loss, weighted total.
    Loss(LossCli),
    /// Depth-band filter masks from depth maps and person masks.
    Hpp(HppCli),
    /// Component labeling / enclosed-region masks on a single HTF file.
    Regions(RegionsCli),
    /// Verify analytic gradients against central finite differences.
    Gradcheck(GradcheckCli),
    /// Generate a deterministic synthetic dataset.
    Synth(SynthCli),
    /// Wall-time statistics for the dense kernels.
    Bench(BenchCli),
}

#[derive(ValueEnum, Clone, Copy)]
enum PredResCli {
    Full,
    Quarter,
}

#[derive(Args)]
struct EvalCli {
    /// Dataset directory
    #[arg(long)]
    data: PathBuf,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
    /// Assert the prediction resolution instead of inferring it
    #[arg(long, value_enum)]
    pred_res: Option<PredResCli>,
    /// Worker threads (0 = auto; falls back to HOTKIT_THREADS)
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct LossCli {
    /// Dataset directory
    #[arg(long)]
    data: PathBuf,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
    /// Weight of the local region loss
    #[arg(long, default_value_t = 0.3)]
    alpha: f64,
    /// Weight of the global region loss
    #[arg(long, default_value_t = 0.1)]
    beta: f64,
    /// Weight of the prompt binary loss
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// Depth band half-width carried in the weight set
    #[arg(long, default_value_t = 0.1)]
    tau: f64,
    /// Worker threads (0 = auto; falls back to HOTKIT_THREADS)
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(ValueEnum, Clone, Copy)]
enum ModeCli {
    Hard,
    Soft,
}

#[derive(Args)]
struct HppCli {
    /// Dataset directory (depth + masks required)
    #[arg(long)]
    data: PathBuf,
    /// Output directory for `<id>.fm.htf` files
    #[arg(long)]
    out: PathBuf,
    /// Depth band half-width
    #[arg(long, default_value_t = 0.1)]
    tau: f64,
    /// Band filter form
    #[arg(long, value_enum)]
    mode: ModeCli,
    /// Worker threads (0 = auto; falls back to HOTKIT_THREADS)
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(ValueEnum, Clone, Copy)]
enum RegionOpCli {
    Components,
    Enclosed,
}

#[derive(Args)]
struct RegionsCli {
    /// Input HTF file (binary mask for components, label map for enclosed)
    #[arg(long = "in")]
    input: PathBuf,
    /// Output HTF file
    #[arg(long)]
    out: PathBuf,
    /// Operation
    #[arg(long, value_enum)]
    op: RegionOpCli,
    /// Contact class 1..=17 (required for --op enclosed)
    #[arg(long)]
    class: Option<u8>,
}

#[derive(Args)]
struct GradcheckCli {
    /// Base seed for the scene stream
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Number of random scenes
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Finite-difference step
    #[arg(long, default_value_t = 1e-5)]
    eps: f64,
    /// Maximum allowed relative error
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
}

#[derive(Args)]
struct SynthCli {
    /// Output dataset directory
    #[arg(long)]
    out: PathBuf,
    /// Number of images
    #[arg(long)]
    n: usize,
    /// Base seed
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Scene size as HxW (multiples of 4, at least 16x16)
    #[arg(long, value_parser = parse_size, default_value = "64x64")]
    size: (usize, usize),
    /// Fraction of contact pixels flipped to another class
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// Enclosed foreign blobs injected per prediction
    #[arg(long, default_value_t = 0)]
    blobs: usize,
    /// Probability mass spread off the one-hot channel (0 = exact one-hot)
    #[arg(long, default_value_t = 0.05)]
    soften: f64,
}

#[derive(Args)]
struct BenchCli {
    /// Grid size as HxW
    #[arg(long, value_parser = parse_size, default_value = "2048x2048")]
    size: (usize, usize),
    /// Timed iterations per kernel
    #[arg(long, default_value_t = 9)]
    iters: usize,
}

fn dispatch(cli: Cli) -> Result<(), CmdError> {
    match cli.command {
        Command::Eval(args) => commands::eval::run(&commands::eval::EvalArgs {
            data: &args.data,
            out: &args.out,
            pred_res: args.pred_res.map(|r| match r {
                PredResCli::Full => commands::eval::PredRes::Full,
                PredResCli::Quarter => commands::eval::PredRes::Quarter,
            }),
            threads: args.threads,
        }),
        Command::Loss(args) => {
            let weights = LossWeights::new(args.alpha, args.beta, args.gamma, args.tau)
                .map_err(|e| CmdError::Input(e.into()))?;
            commands::loss::run(&commands::loss::LossArgs {
                data: &args.data,
                out: &args.out,
                weights,
                threads: args.threads,
            })
        }
        Command::Hpp(args) => commands::hpp::run(&commands::hpp::HppArgs {
            data: &args.data,
            out: &args.out,
            tau: args.tau,
            mode: match args.mode {
                ModeCli::Hard => commands::hpp::FilterMode::Hard,
                ModeCli::Soft => commands::hpp::FilterMode::Soft,
            },
            threads: args.threads,
        }),
        Command::Regions(args) => commands::regions::run(&commands::regions::RegionsArgs {
            input: &args.input,
            output: &args.out,
            op: match args.op {
                RegionOpCli::Components => commands::regions::RegionOp::Components,
                RegionOpCli::Enclosed => commands::regions::RegionOp::Enclosed,
            },
            class: args.class,
        }),
        Command::Gradcheck(args) => commands::gradcheck::run(&commands::gradcheck::GradcheckArgs {
            seed: args.seed,
            trials: args.trials,
            eps: args.eps,
            tol: args.tol,
        }),
        Command::Synth(args) => commands::synth::run(&commands::synth::SynthArgs {
            out: &args.out,
            count: args.n,
            seed: args.seed,
            size: args.size,
            noise: args.noise,
            blobs: args.blobs,
            soften: args.soften,
        }),
        Command::Bench(args) => commands::bench::run(&commands::bench::BenchArgs {
            size: args.size,
            iters: args.iters,
        }),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("hotkit: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
