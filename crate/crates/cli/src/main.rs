use clap::{Args, Parser, Subcommand};
use fracheat_cli::{
    moments, renewal, simulate, validate_config, verify_correlation, verify_kernel, Outcome,
    RenewalArgs, VerifyCorrelationArgs, VerifyKernelArgs,
};
use fracheat_core::error::Error;
use std::path::PathBuf;
use std::process::ExitCode;

/// Numerical laboratory for fractional stochastic heat equations: kernel
/// and correlation verification, renewal blow-up oracles, lattice Monte
/// Carlo, and moment experiments.
#[derive(Parser)]
#[command(name = "fracheat", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output directory for artifacts (created if missing).
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Master seed override (config files carry their own `seed` key).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for path-parallel runs (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Check the two-sided heat kernel bound on a (t, x) grid and emit the
    /// measured constants.
    VerifyKernel(VerifyKernelCli),
    /// Evaluate a correlation kernel: ball infimum and integrability verdict.
    VerifyCorrelation(VerifyCorrelationCli),
    /// Solve a renewal inequality analytically and numerically.
    Renewal(RenewalCli),
    /// Run a path ensemble from a config file; emit hit times and field
    /// statistics.
    Simulate(ConfigCli),
    /// Moment estimation and blow-up proxy experiments from a config file.
    Moments(ConfigCli),
}

#[derive(Args)]
struct VerifyKernelCli {
    #[arg(long, default_value_t = 1.5)]
    alpha: f64,
    #[arg(long, default_value_t = 1)]
    dim: usize,
    #[arg(long = "t-min", default_value_t = 0.1)]
    t_min: f64,
    #[arg(long = "t-max", default_value_t = 10.0)]
    t_max: f64,
    #[arg(long = "x-max", default_value_t = 10.0)]
    x_max: f64,
    /// Grid points per axis.
    #[arg(long, default_value_t = 25)]
    resolution: usize,
    /// CSV file name (inside --out) with columns t,x,p,bound_lo,bound_hi,ratio.
    #[arg(long, default_value = "kernel.csv")]
    report: String,
}

#[derive(Args)]
struct VerifyCorrelationCli {
    /// riesz | expo | ou | poisson | cauchy | white
    #[arg(long)]
    kernel: String,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long = "ou-exponent")]
    ou_exponent: Option<f64>,
    #[arg(long, default_value_t = 1)]
    dim: usize,
    #[arg(long, default_value_t = 1.5)]
    alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
}

#[derive(Args)]
struct RenewalCli {
    #[arg(long = "A")]
    initial: f64,
    #[arg(long = "B")]
    forcing: f64,
    #[arg(long)]
    gamma: f64,
    #[arg(long)]
    alpha: f64,
    #[arg(long = "T")]
    horizon: f64,
    /// singular | power | constant
    #[arg(long)]
    form: String,
    #[arg(long, default_value_t = 1e-3)]
    mesh: f64,
    #[arg(long, default_value_t = 1e12)]
    cap: f64,
    /// Optional trajectory CSV file name (inside --out).
    #[arg(long)]
    trajectory: Option<String>,
}

#[derive(Args)]
struct ConfigCli {
    /// Flat key=value config file (one pair per line, # comments).
    #[arg(long)]
    config: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: cannot configure {threads} threads: {e}");
            return ExitCode::from(1);
        }
    }
    let outcome = dispatch(&cli);
    match outcome {
        Ok(Outcome { hypothesis_met: true, .. }) => ExitCode::SUCCESS,
        Ok(Outcome { hypothesis_met: false, .. }) => {
            eprintln!("hypothesis not met for these parameters; report is advisory");
            ExitCode::from(2)
        }
        Err(Error::HypothesisNotMet(msg)) => {
            eprintln!("hypothesis not met: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<Outcome, Error> {
    match &cli.command {
        Command::VerifyKernel(a) => verify_kernel(
            &VerifyKernelArgs {
                alpha: a.alpha,
                dim: a.dim,
                t_min: a.t_min,
                t_max: a.t_max,
                x_max: a.x_max,
                resolution: a.resolution,
                report: a.report.clone(),
            },
            &cli.out,
        ),
        Command::VerifyCorrelation(a) => verify_correlation(
            &VerifyCorrelationArgs {
                kernel: a.kernel.clone(),
                beta: a.beta,
                ou_exponent: a.ou_exponent,
                dim: a.dim,
                alpha: a.alpha,
                radius: a.radius,
            },
            &cli.out,
        ),
        Command::Renewal(a) => renewal(
            &RenewalArgs {
                initial: a.initial,
                forcing: a.forcing,
                gamma: a.gamma,
                alpha: a.alpha,
                horizon: a.horizon,
                form: a.form.clone(),
                mesh: a.mesh,
                cap: a.cap,
                trajectory: a.trajectory.clone(),
            },
            &cli.out,
        ),
        Command::Simulate(c) => {
            let config = load_config(c, cli.seed)?;
            simulate(&config, &cli.out)
        }
        Command::Moments(c) => {
            let config = load_config(c, cli.seed)?;
            moments(&config, &cli.out)
        }
    }
}

fn load_config(
    c: &ConfigCli,
    seed_override: Option<u64>,
) -> Result<fracheat_cli::ExperimentConfig, Error> {
    let body = std::fs::read_to_string(&c.config)
        .map_err(|e| Error::Domain(format!("cannot read config {}: {e}", c.config.display())))?;
    let mut config = validate_config(&body).map_err(|violations| {
        Error::Domain(format!(
            "invalid config ({} violations):\n  - {}",
            violations.len(),
            violations.join("\n  - ")
        ))
    })?;
    if let Some(seed) = seed_override {
        config.seed = seed;
        config.echo.insert("seed".to_string(), seed.to_string());
    }
    Ok(config)
}
