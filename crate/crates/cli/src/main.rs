//! `tll`: norms, operators, the Navier-Stokes solver and the verification
//! suites from the command line.
//!
//! Every command writes its outputs and a `run_manifest.json` into the
//! `--out` directory. Exit codes: 0 success, 1 suite failure, 2 usage or
//! input error, 3 numerical error.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::output::CliError;

#[derive(Debug, Parser)]
#[command(name = "tll", version, about = "Triebel-Lizorkin-Lorentz norms and a spectral Navier-Stokes solver")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct GlobalArgs {
    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = "tll-out")]
    pub out: PathBuf,
    /// Key-value config file (`key = value`, `#` comments).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; 0 lets rayon decide.
    #[arg(long, global = true, env = "TLL_THREADS", default_value_t = 0)]
    pub threads: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args, Clone)]
pub struct ExponentArgs {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub s: f64,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    #[arg(long, default_value_t = 2.0)]
    pub q: f64,
    /// Lorentz exponent; `inf` is accepted.
    #[arg(long, default_value_t = 2.0)]
    pub r: f64,
    /// `standard` or `smoothed`.
    #[arg(long, default_value = "standard")]
    pub family: String,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// TLL norm of a field.
    Norm {
        #[arg(long)]
        field: PathBuf,
        #[command(flatten)]
        exponents: ExponentArgs,
    },
    /// Decreasing rearrangement steps of `|u|`.
    Rearrange {
        #[arg(long)]
        field: PathBuf,
    },
    /// Estimated Mikhlin constants of a named symbol.
    MultiplierCheck {
        /// identity, resolvent, scaled-resolvent, bessel, shifted-power, heat,
        /// laplacian, coordinate, helmholtz-entry
        #[arg(long)]
        symbol: String,
        /// Symbol parameter (λ, σ, α or t; axis for coordinate).
        #[arg(long, allow_negative_numbers = true)]
        param: Option<f64>,
        /// Sector half-angle; for scaled-resolvent, λ ranges over the sector.
        #[arg(long)]
        sector: Option<f64>,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = -10, allow_negative_numbers = true)]
        min_exp: i32,
        #[arg(long, default_value_t = 10)]
        max_exp: i32,
    },
    /// Helmholtz split into solenoidal and gradient parts.
    Helmholtz {
        #[arg(long)]
        field: PathBuf,
    },
    /// Heat semigroup `e^{tΔ}`.
    Heat {
        #[arg(long)]
        field: PathBuf,
        #[arg(long)]
        t: f64,
    },
    /// Stokes semigroup (`--t`) or resolvent (`--lambda`) of a solenoidal field.
    Stokes {
        #[arg(long)]
        field: PathBuf,
        #[arg(long, conflicts_with = "lambda")]
        t: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        lambda: Option<f64>,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        lambda_im: f64,
    },
    /// Navier-Stokes run configured by `--config`.
    Nse {
        /// Initial field; overrides the `initial` config key.
        #[arg(long)]
        field: Option<PathBuf>,
    },
    /// Bracket-stability suites.
    Verify {
        /// Suite names, or `all`.
        #[arg(long = "suite", default_value = "all")]
        suites: Vec<String>,
        #[arg(long)]
        count: Option<usize>,
        /// Comma-separated resolutions.
        #[arg(long, value_delimiter = ',')]
        resolutions: Option<Vec<usize>>,
        /// Comma-separated interval lengths.
        #[arg(long, value_delimiter = ',')]
        times: Option<Vec<f64>>,
    },
    /// Writes a sample field.
    Sample {
        /// taylor-green, random, solenoidal, pure-modes, gaussian-bumps, zero
        #[arg(long, default_value = "taylor-green")]
        kind: String,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 64)]
        resolution: usize,
        #[arg(long, default_value_t = 0)]
        index: usize,
        /// File name inside `--out`.
        #[arg(long, default_value = "sample.tllf")]
        name: String,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    if cli.global.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.global.threads)
            .build_global()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    }
    let g = &cli.global;
    match cli.command {
        Command::Norm { field, exponents } => commands::norm(g, &field, &exponents),
        Command::Rearrange { field } => commands::rearrange(g, &field),
        Command::MultiplierCheck {
            symbol,
            param,
            sector,
            dim,
            min_exp,
            max_exp,
        } => commands::multiplier_check(g, &symbol, param, sector, dim, min_exp, max_exp),
        Command::Helmholtz { field } => commands::helmholtz(g, &field),
        Command::Heat { field, t } => commands::heat(g, &field, t),
        Command::Stokes {
            field,
            t,
            lambda,
            lambda_im,
        } => commands::stokes(g, &field, t, lambda.map(|re| num_complex::Complex64::new(re, lambda_im))),
        Command::Nse { field } => commands::nse(g, field.as_deref()),
        Command::Verify {
            suites,
            count,
            resolutions,
            times,
        } => commands::verify(g, &suites, count, resolutions, times),
        Command::Sample {
            kind,
            dim,
            resolution,
            index,
            name,
        } => commands::sample(g, &kind, dim, resolution, index, &name),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tll: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
