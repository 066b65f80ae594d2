use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use bergman_lab::geometry::GridQuantity;
use bergman_lab::weight::DEFAULT_BOUND;
use bergman_lab::{ReportKind, Tier};
use bergman_lab_cli::{
    cmd_catalog, cmd_grid, cmd_kernel_build, cmd_kernel_eval, cmd_sample, cmd_suite, cmd_verify, cmd_weights,
    parse_class, parse_point, KernelChoice, Output, Overrides, RunConfig, WeightsAction, EXIT_ERROR, SEED_ENV,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "bergman-lab", version, about = "Bergman kernels, T matrices and verification reports for small domains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct RunArgs {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Catalog domain id.
    #[arg(long)]
    domain: Option<String>,
    /// QMC seed (default: $BERGMAN_LAB_SEED, else 1).
    #[arg(long)]
    seed: Option<u64>,
    /// Number of QMC proposals.
    #[arg(long)]
    samples: Option<usize>,
    /// Basis cutoff N.
    #[arg(long)]
    cutoff: Option<u32>,
    /// Weighted-degree cutoff (`--weighted false` forces total degree).
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    weighted: Option<bool>,
    /// Relative eigenvalue floor for orthonormalization.
    #[arg(long)]
    floor: Option<f64>,
    /// Tolerance tier, overriding the one implied by the kernels.
    #[arg(long, value_enum)]
    tol_tier: Option<TierArg>,
    /// Kernel source: auto, closed or model.
    #[arg(long)]
    kernel: Option<String>,
    /// Map: identity, swap, rotation:θ, mobius:a, zapalowski[:θ], or a JSON file.
    #[arg(long)]
    map: Option<String>,
    /// Output file (output directory for `suite`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TierArg {
    Exact,
    Qmc,
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyKind {
    Minimality,
    Representativity,
    Diagram,
    Unitarity,
    Transformation,
    Linearity,
}

#[derive(Clone, Copy, ValueEnum)]
enum QuantityArg {
    K,
    T,
}

#[derive(Subcommand)]
enum Command {
    /// List the catalog domains as JSON.
    Catalog,
    /// Integer arithmetic on weights.
    Weights {
        #[command(subcommand)]
        action: WeightsCommand,
    },
    /// Build or evaluate a truncated kernel.
    Kernel {
        #[command(subcommand)]
        action: KernelCommand,
    },
    /// Run one verification and print its report.
    Verify {
        #[arg(value_enum)]
        kind: VerifyKind,
        #[command(flatten)]
        run: RunArgs,
    },
    /// CSV of K(z, 0) or T(z, 0) over a 2-D slice.
    Grid {
        #[arg(long, value_enum, default_value = "t")]
        quantity: QuantityArg,
        #[arg(long, default_value_t = 41)]
        steps: usize,
        /// Half-width of the slice (default: from the bounding box).
        #[arg(long)]
        extent: Option<f64>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// CSV of an accepted QMC sample cloud.
    Sample {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run every check, write one report per check and a summary.
    Suite {
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Subcommand)]
enum WeightsCommand {
    /// Reduce and classify a weight.
    Classify { m1: u32, m2: u32 },
    /// Exponents whose averaged coefficient survives.
    Surviving {
        m1: u32,
        m2: u32,
        /// kernel, c or c_prime.
        #[arg(long, default_value = "kernel")]
        class: String,
        #[arg(long, default_value_t = DEFAULT_BOUND)]
        bound: u32,
    },
    /// Monomials allowed in component j (1-based) of an equivariant map.
    Equivariant {
        m1: u32,
        m2: u32,
        j: usize,
        #[arg(long, default_value_t = DEFAULT_BOUND)]
        bound: u32,
    },
}

#[derive(Subcommand)]
enum KernelCommand {
    /// Build a model and print it as JSON.
    Build {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Evaluate K(z, w) and T(z, w); points are `re,im;re,im`.
    Eval {
        #[arg(long, allow_hyphen_values = true)]
        z: String,
        #[arg(long, allow_hyphen_values = true)]
        w: String,
        /// Evaluate a saved model instead of building one.
        #[arg(long)]
        model: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
    },
}

fn resolve(run: RunArgs) -> Result<RunConfig> {
    let env_seed = std::env::var(SEED_ENV).ok();
    let flags = Overrides {
        domain: run.domain,
        seed: run.seed,
        samples: run.samples,
        cutoff: run.cutoff,
        weighted: run.weighted,
        floor: run.floor,
        tol_tier: run.tol_tier.map(|t| match t {
            TierArg::Exact => Tier::Exact,
            TierArg::Qmc => Tier::Qmc,
        }),
        kernel: run.kernel.as_deref().map(KernelChoice::parse).transpose()?,
        map: run.map,
        out: run.out,
    };
    RunConfig::resolve(run.config.as_deref(), env_seed.as_deref(), flags)
}

fn run(cli: Cli) -> Result<Output> {
    match cli.command {
        Command::Catalog => cmd_catalog(),
        Command::Weights { action } => {
            let action = match action {
                WeightsCommand::Classify { m1, m2 } => WeightsAction::Classify { m1, m2 },
                WeightsCommand::Surviving { m1, m2, class, bound } => {
                    WeightsAction::Surviving { m1, m2, class: parse_class(&class)?, bound }
                }
                WeightsCommand::Equivariant { m1, m2, j, bound } => WeightsAction::Equivariant { m1, m2, component: j, bound },
            };
            cmd_weights(&action)
        }
        Command::Kernel { action: KernelCommand::Build { run } } => cmd_kernel_build(&resolve(run)?),
        Command::Kernel { action: KernelCommand::Eval { z, w, model, run } } => {
            cmd_kernel_eval(&resolve(run)?, &parse_point(&z)?, &parse_point(&w)?, model.as_deref())
        }
        Command::Verify { kind, run } => {
            let kind = match kind {
                VerifyKind::Minimality => ReportKind::Minimality,
                VerifyKind::Representativity => ReportKind::Representativity,
                VerifyKind::Diagram => ReportKind::Diagram,
                VerifyKind::Unitarity => ReportKind::Unitarity,
                VerifyKind::Transformation => ReportKind::Transformation,
                VerifyKind::Linearity => ReportKind::Linearity,
            };
            cmd_verify(kind, &resolve(run)?)
        }
        Command::Grid { quantity, steps, extent, run } => {
            let q = match quantity {
                QuantityArg::K => GridQuantity::Kernel,
                QuantityArg::T => GridQuantity::T,
            };
            cmd_grid(&resolve(run)?, q, steps, extent)
        }
        Command::Sample { run } => cmd_sample(&resolve(run)?),
        Command::Suite { run } => cmd_suite(&resolve(run)?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            let _ = std::io::stdout().write_all(out.stdout.as_bytes());
            ExitCode::from(out.code)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
