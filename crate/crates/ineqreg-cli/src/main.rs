//! `ineqreg` binary: argument parsing and exit-code handling; all real
//! work lives in the library crate.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ineqreg::numerics::{BaselineSpec, CovariateDesign, ModelSpec};
use ineqreg_cli::commands::{
    run_curves, run_fit, run_order_check, run_simulate, CurvesOptions, FitModel, FitOptions,
    OrderCheckOptions,
};
use ineqreg_cli::study::run_study;
use ineqreg_cli::{CliError, CliResult};

#[derive(Parser)]
#[command(
    name = "ineqreg",
    version,
    about = "Inequality curves, indices, and inequality-regression fits"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Empirical inequality curves of a sample, or conditional curves
    /// of a saved fit
    Curves(CurvesArgs),
    /// Check a star/e/r inequality ordering between two samples
    OrderCheck(OrderCheckArgs),
    /// Fit the Pareto inequality regression
    FitPareto(FitArgs),
    /// Fit the log-normal inequality regression
    FitLognormal(FitArgs),
    /// Fit the semiparametric generalized Pareto regression
    FitCox(FitArgs),
    /// Fit the semiparametric Lehmann regression
    FitLehmann(FitArgs),
    /// Draw a sample from a known model and write it as CSV
    Simulate(SimulateArgs),
    /// Monte Carlo study: bias, spread, and coverage of a fit
    McStudy(StudyArgs),
}

#[derive(Args)]
struct CurvesArgs {
    /// Input CSV with a header row (empirical curves)
    #[arg(long)]
    input: Option<PathBuf>,
    /// Response column name
    #[arg(long, default_value = "y")]
    response: String,
    /// Covariate column names (for the indices report only)
    #[arg(long, value_delimiter = ',')]
    covariates: Vec<String>,
    /// Number of interior grid points u = i/(m+1)
    #[arg(long, default_value_t = 999)]
    grid_points: usize,
    /// Evaluate conditional curves of a saved fit instead
    #[arg(long)]
    conditional: bool,
    /// Fit report JSON produced by a fit-* command
    #[arg(long)]
    fit: Option<PathBuf>,
    /// Covariate values without the intercept, comma separated
    #[arg(long, allow_hyphen_values = true)]
    at: Vec<String>,
    /// Write the curve CSV here (default: stdout)
    #[arg(long)]
    output: Option<PathBuf>,
    /// Write the indices JSON here (default: stdout)
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct OrderCheckArgs {
    /// CSV sample for the left distribution F
    #[arg(long)]
    input: PathBuf,
    /// CSV sample for the right distribution H
    #[arg(long)]
    other: PathBuf,
    /// Response column name (same in both files)
    #[arg(long, default_value = "y")]
    response: String,
    /// Which ordering to test: star, e, or r
    #[arg(long, default_value = "star")]
    check: String,
    #[arg(long, default_value_t = 999)]
    grid_points: usize,
    /// Override the violation tolerance
    #[arg(long)]
    tol: Option<f64>,
    /// Write the JSON verdict here (default: stdout)
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    /// Input CSV with a header row
    #[arg(long)]
    input: PathBuf,
    /// Response column name
    #[arg(long, default_value = "y")]
    response: String,
    /// Covariate column names, comma separated
    #[arg(long, value_delimiter = ',')]
    covariates: Vec<String>,
    /// Covariate vectors (without intercept) at which to report
    /// conditional inequality indices; repeatable
    #[arg(long, allow_hyphen_values = true)]
    at: Vec<String>,
    #[arg(long, default_value_t = 999)]
    grid_points: usize,
    /// Write the fit report JSON here (default: stdout)
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ModelArgs {
    /// Generating model: pareto, lognormal, or cox
    #[arg(long)]
    model: String,
    /// Link coefficients, intercept first, comma separated
    #[arg(
        long,
        value_delimiter = ',',
        required = true,
        allow_hyphen_values = true
    )]
    beta: Vec<f64>,
    /// Pareto scale parameter
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Log-normal location intercept
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    /// Log-normal baseline scale
    #[arg(long, default_value_t = 1.0)]
    sigma0: f64,
    /// Cox baseline: "pareto:LAMBDA" or "exponential:RATE"
    #[arg(long, default_value = "pareto:1")]
    baseline: String,
    /// Covariate design: normal or binary
    #[arg(long, default_value = "normal")]
    design: String,
}

impl ModelArgs {
    fn spec(&self) -> CliResult<ModelSpec> {
        let beta = self.beta.clone();
        match self.model.as_str() {
            "pareto" => Ok(ModelSpec::Pareto {
                lambda: self.lambda,
                beta,
            }),
            "lognormal" => Ok(ModelSpec::Lognormal {
                alpha: self.alpha,
                beta,
                sigma0: self.sigma0,
            }),
            "cox" => Ok(ModelSpec::Cox {
                baseline: parse_baseline(&self.baseline)?,
                beta,
            }),
            other => Err(CliError::Validation(format!(
                "unknown model '{other}' (expected pareto, lognormal, or cox)"
            ))),
        }
    }

    fn design(&self) -> CliResult<CovariateDesign> {
        if self.beta.is_empty() {
            return Err(CliError::Validation("--beta must not be empty".to_string()));
        }
        let d = self.beta.len() - 1;
        match self.design.as_str() {
            "normal" => Ok(CovariateDesign::StandardNormal { d }),
            "binary" => Ok(CovariateDesign::Binary { d }),
            other => Err(CliError::Validation(format!(
                "unknown design '{other}' (expected normal or binary)"
            ))),
        }
    }
}

fn parse_baseline(raw: &str) -> CliResult<BaselineSpec> {
    let bad = || {
        CliError::Validation(format!(
            "--baseline must be 'pareto:LAMBDA' or 'exponential:RATE', got '{raw}'"
        ))
    };
    let (kind, value) = raw.split_once(':').ok_or_else(bad)?;
    let value: f64 = value.trim().parse().map_err(|_| bad())?;
    match kind.trim() {
        "pareto" => Ok(BaselineSpec::Pareto { lambda: value }),
        "exponential" | "exp" => Ok(BaselineSpec::Exponential { rate: value }),
        _ => Err(bad()),
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Sample size
    #[arg(long)]
    n: usize,
    /// RNG seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the sample CSV here (default: stdout)
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct StudyArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Number of Monte Carlo replications
    #[arg(long)]
    reps: usize,
    /// Sample size per replication
    #[arg(long)]
    n: usize,
    /// RNG seed; replication r uses stream r of this seed
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the study JSON here (default: stdout)
    #[arg(long)]
    output: Option<PathBuf>,
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Curves(a) => {
            run_curves(&CurvesOptions {
                input: a.input,
                response: a.response,
                covariates: a.covariates,
                grid_points: a.grid_points,
                conditional: a.conditional,
                fit: a.fit,
                at: a.at,
                output: a.output,
                json: a.json,
            })?;
        }
        Command::OrderCheck(a) => {
            run_order_check(&OrderCheckOptions {
                input: a.input,
                other: a.other,
                response: a.response,
                check: a.check,
                grid_points: a.grid_points,
                tol: a.tol,
                output: a.output,
            })?;
        }
        Command::FitPareto(a) => run_fit(FitModel::Pareto, &fit_options(a)).map(|_| ())?,
        Command::FitLognormal(a) => run_fit(FitModel::Lognormal, &fit_options(a)).map(|_| ())?,
        Command::FitCox(a) => run_fit(FitModel::GeneralizedPareto, &fit_options(a)).map(|_| ())?,
        Command::FitLehmann(a) => run_fit(FitModel::Lehmann, &fit_options(a)).map(|_| ())?,
        Command::Simulate(a) => {
            let spec = a.model.spec()?;
            let design = a.model.design()?;
            run_simulate(&spec, &design, a.n, a.seed, a.output.as_deref())?;
        }
        Command::McStudy(a) => {
            let spec = a.model.spec()?;
            let design = a.model.design()?;
            let report = run_study(&spec, &design, a.reps, a.n, a.seed)?;
            let text = serde_json::to_string_pretty(&report)
                .map_err(|e| CliError::Validation(e.to_string()))?;
            match a.output {
                Some(path) => std::fs::write(path, text + "\n")?,
                None => println!("{text}"),
            }
        }
    }
    Ok(())
}

fn fit_options(a: FitArgs) -> FitOptions {
    FitOptions {
        input: a.input,
        response: a.response,
        covariates: a.covariates,
        at: a.at,
        grid_points: a.grid_points,
        output: a.output,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
