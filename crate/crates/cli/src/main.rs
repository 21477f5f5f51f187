use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use yamabe::verify::{VerifyOptions, DEFAULT_CONTRACTION_SLACK, DEFAULT_SEED};
use yamabe_cli::commands::{self, Context, Failure, EXIT_CONFIG};
use yamabe_cli::config::Mode;

/// Environment variable holding the worker count.
const WORKERS_ENV: &str = "YAMABE_WORKERS";

#[derive(Parser)]
#[command(
    name = "yamabe",
    version,
    about = "Picard solver and admissibility certificates for the gradient-form Yamabe problem"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Seed for randomized checks; recorded in run summaries.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for artifacts (overrides the config's output_dir).
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Run even when the certificate fails; results are marked uncertified.
    #[arg(long, global = true)]
    override_certificate: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Print the admissibility certificate without solving.
    Certify { config: PathBuf },
    /// Run the Picard iteration with zero boundary data.
    Solve { config: PathBuf },
    /// Constant curvature with a constant boundary value.
    Shifted { config: PathBuf },
    /// Solve on a dilated domain and pull the solution back.
    Deform { config: PathBuf },
    /// Run a pipeline over the Cartesian product of the sweep ranges.
    Sweep { config: PathBuf },
    /// Estimate the ball gradient constant C_n.
    EstimateGreen {
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[arg(long, default_value_t = yamabe::analysis::green::DEFAULT_TOLERANCE)]
        tol: f64,
    },
    /// Run the acceptance checks; exits 4 on any failure.
    Verify {
        /// Smaller meshes and sample counts.
        #[arg(long)]
        fast: bool,
        /// Allowance added to the contraction constant.
        #[arg(long, default_value_t = DEFAULT_CONTRACTION_SLACK, allow_negative_numbers = true)]
        contraction_slack: f64,
    },
}

fn configure_workers() -> Result<(), Failure> {
    let Ok(value) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let n: usize = value.trim().parse().map_err(|_| {
        Failure::new(
            EXIT_CONFIG,
            anyhow::anyhow!("{WORKERS_ENV} must be a positive integer, got `{value}`"),
        )
    })?;
    if n == 0 {
        return Err(Failure::new(
            EXIT_CONFIG,
            anyhow::anyhow!("{WORKERS_ENV} must be positive"),
        ));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::new(EXIT_CONFIG, e))
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_workers()?;
    let ctx = Context {
        output_dir: cli.output_dir,
        override_certificate: cli.override_certificate,
        seed: cli.seed,
    };
    let pipeline = |path: &PathBuf, mode: Mode| -> Result<(), Failure> {
        let mut cfg = commands::load_config(path, Some(mode))?;
        cfg.mode = Some(mode);
        commands::run_mode(&cfg, mode, &ctx).map(|_| ())
    };
    match &cli.command {
        Command::Certify { config } => {
            let cfg = commands::load_config(config, None)?;
            commands::certify(&cfg, &ctx).map(|_| ())
        }
        Command::Solve { config } => pipeline(config, Mode::Solve),
        Command::Shifted { config } => pipeline(config, Mode::Shifted),
        Command::Deform { config } => pipeline(config, Mode::Deform),
        Command::Sweep { config } => {
            let cfg = commands::load_config(config, Some(Mode::Sweep))?;
            commands::sweep(&cfg, &ctx).map(|_| ())
        }
        Command::EstimateGreen { dim, tol } => {
            commands::estimate_green(*dim, *tol, &ctx).map(|_| ())
        }
        Command::Verify {
            fast,
            contraction_slack,
        } => {
            let opts = VerifyOptions {
                fast: *fast,
                contraction_slack: *contraction_slack,
                seed: ctx.seed.unwrap_or(DEFAULT_SEED),
            };
            commands::verify(&opts, &ctx).map(|_| ())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // usage errors share the config-error code; help and version exit 0
            return if e.use_stderr() {
                ExitCode::from(EXIT_CONFIG as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(u8::try_from(f.code).unwrap_or(1))
        }
    }
}
