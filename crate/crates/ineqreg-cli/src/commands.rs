//! Command implementations. Each function does the work of one
//! subcommand and returns the report it wrote, so tests can call the
//! logic in-process.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use ineqreg::curves::{indices_from_grids, sample_curves, sample_indices};
use ineqreg::orderings::{
    e_order_check, r_order_check, star_order_check_empirical, OrderingOptions, EMPIRICAL_TRIM,
};
use ineqreg::parametric::{
    lognormal_conditional_curves, lognormal_fit, pareto_conditional_curves, pareto_fit,
};
use ineqreg::semiparametric::{cox_fit, ModelKind, SemiparametricFit};
use ineqreg::{CurveSet, Sample, StepDistribution};

use crate::ingest::ingest;
use crate::report::{write_curves_csv, CurvesReport, FitReport, IndicesAt, OrderCheckReport};
use crate::{CliError, CliResult};

/// Evaluation grid of `points` equally spaced interior points.
pub fn make_grid(points: usize) -> CliResult<Vec<f64>> {
    if points < 2 {
        return Err(CliError::Validation(
            "--grid-points must be at least 2".to_string(),
        ));
    }
    let m = points as f64 + 1.0;
    Ok((1..=points).map(|i| i as f64 / m).collect())
}

/// Parses one `--at` value: comma-separated covariate values without
/// the intercept, which is prepended here.
pub fn parse_at(raw: &str) -> CliResult<Vec<f64>> {
    let mut x = vec![1.0];
    if !raw.trim().is_empty() {
        for part in raw.split(',') {
            x.push(
                part.trim()
                    .parse::<f64>()
                    .map_err(|_| CliError::Validation(format!("--at: not a number: '{part}'")))?,
            );
        }
    }
    Ok(x)
}

fn write_json<T: serde::Serialize>(value: &T, output: Option<&Path>) -> CliResult<()> {
    let text =
        serde_json::to_string_pretty(value).map_err(|e| CliError::Validation(e.to_string()))?;
    match output {
        Some(path) => {
            let mut f = File::create(path)?;
            writeln!(f, "{text}")?;
        }
        None => println!("{text}"),
    }
    Ok(())
}

fn write_curves(curves: &CurveSet, output: Option<&Path>) -> CliResult<()> {
    match output {
        Some(path) => write_curves_csv(File::create(path)?, curves)?,
        None => write_curves_csv(std::io::stdout().lock(), curves)?,
    }
    Ok(())
}

pub struct CurvesOptions {
    pub input: Option<PathBuf>,
    pub response: String,
    pub covariates: Vec<String>,
    pub grid_points: usize,
    pub conditional: bool,
    pub fit: Option<PathBuf>,
    pub at: Vec<String>,
    /// Curve CSV destination (stdout when absent and no JSON requested).
    pub output: Option<PathBuf>,
    /// Indices JSON destination.
    pub json: Option<PathBuf>,
}

/// `curves`: empirical curves of a CSV sample, or conditional curves of
/// a previously saved fit.
pub fn run_curves(opts: &CurvesOptions) -> CliResult<CurvesReport> {
    let grid = make_grid(opts.grid_points)?;
    let (curves, report) = if opts.conditional || opts.fit.is_some() {
        let fit_path = opts.fit.as_deref().ok_or_else(|| {
            CliError::Validation("--conditional requires --fit <report.json>".to_string())
        })?;
        if opts.at.len() != 1 {
            return Err(CliError::Validation(
                "conditional curves need exactly one --at covariate vector".to_string(),
            ));
        }
        let fit = load_fit(fit_path)?;
        let x = parse_at(&opts.at[0])?;
        let (curves, idx) = conditional_curves_of(&fit, &x, &grid)?;
        let report = CurvesReport {
            source: fit.model.clone(),
            n: None,
            grid_points: opts.grid_points,
            indices: vec![IndicesAt::new(x, idx)],
        };
        (curves, report)
    } else {
        let input = opts.input.as_deref().ok_or_else(|| {
            CliError::Validation("curves requires --input <data.csv>".to_string())
        })?;
        let sample = ingest(input, &opts.response, &opts.covariates)?;
        let curves = sample_curves(&sample, &grid)?;
        let idx = sample_indices(&sample)?;
        let report = CurvesReport {
            source: "empirical".to_string(),
            n: Some(sample.n()),
            grid_points: opts.grid_points,
            indices: vec![IndicesAt::new(vec![], idx)],
        };
        (curves, report)
    };
    if opts.output.is_some() || opts.json.is_none() {
        write_curves(&curves, opts.output.as_deref())?;
    }
    write_json(&report, opts.json.as_deref())?;
    Ok(report)
}

/// Loads a fit report written by one of the `fit-*` commands.
pub fn load_fit(path: &Path) -> CliResult<FitReport> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

fn delta_at(coefficients: &[f64], x: &[f64]) -> CliResult<f64> {
    if x.len() != coefficients.len() {
        return Err(CliError::Validation(format!(
            "--at has {} covariate values, the fit expects {}",
            x.len() - 1,
            coefficients.len() - 1
        )));
    }
    Ok(x.iter()
        .zip(coefficients)
        .map(|(a, b)| a * b)
        .sum::<f64>()
        .exp())
}

/// Conditional curves and indices of a saved fit at covariate `x`.
pub fn conditional_curves_of(
    fit: &FitReport,
    x: &[f64],
    grid: &[f64],
) -> CliResult<(CurveSet, ineqreg::IndexSet)> {
    match fit.model.as_str() {
        "pareto" => {
            let lambda = fit.lambda.ok_or_else(|| {
                CliError::Validation("pareto fit report lacks lambda".to_string())
            })?;
            let delta = delta_at(&fit.coefficients, x)?;
            Ok(pareto_conditional_curves(delta, lambda, grid)?)
        }
        "lognormal" => {
            let alpha = fit.alpha.ok_or_else(|| {
                CliError::Validation("lognormal fit report lacks alpha".to_string())
            })?;
            let sigma0 = fit.sigma0.ok_or_else(|| {
                CliError::Validation("lognormal fit report lacks sigma0".to_string())
            })?;
            let delta = delta_at(&fit.coefficients, x)?;
            Ok(lognormal_conditional_curves(alpha, sigma0, delta, grid)?)
        }
        "generalized_pareto" => {
            let fit = semiparametric_from_report(fit)?;
            let curves = fit.conditional_curves(grid, x)?;
            let idx = indices_from_grids(&curves)?;
            Ok((curves, idx))
        }
        "lehmann" => Err(CliError::Validation(
            "conditional curves are defined for generalized Pareto fits".to_string(),
        )),
        other => Err(CliError::Validation(format!("unknown fit model '{other}'"))),
    }
}

fn semiparametric_from_report(report: &FitReport) -> CliResult<SemiparametricFit> {
    let missing = |what: &str| {
        CliError::Validation(format!(
            "fit report lacks the {what} of a semiparametric fit"
        ))
    };
    Ok(SemiparametricFit {
        link: ineqreg::parametric::DeltaLink {
            beta: report.coefficients.clone(),
        },
        se: report.se.clone(),
        partial_loglik: report.loglik,
        baseline: report.baseline.clone().ok_or_else(|| missing("baseline"))?,
        jumps: report.jumps.clone().ok_or_else(|| missing("jumps"))?,
        kind: report.kind.ok_or_else(|| missing("kind"))?,
        converged: report.converged,
        iterations: report.iterations,
        diagnostic: report.diagnostic.clone(),
        warnings: report.warnings.clone(),
    })
}

pub struct FitOptions {
    pub input: PathBuf,
    pub response: String,
    pub covariates: Vec<String>,
    pub at: Vec<String>,
    pub grid_points: usize,
    pub output: Option<PathBuf>,
}

/// Which fit subcommand is running.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitModel {
    Pareto,
    Lognormal,
    GeneralizedPareto,
    Lehmann,
}

/// `fit-pareto` / `fit-lognormal` / `fit-cox` / `fit-lehmann`. The
/// report is always written; a non-converged fit then exits with the
/// convergence status code.
pub fn run_fit(model: FitModel, opts: &FitOptions) -> CliResult<FitReport> {
    let sample = ingest(&opts.input, &opts.response, &opts.covariates)?;
    let grid = make_grid(opts.grid_points)?;
    let ats = opts
        .at
        .iter()
        .map(|a| parse_at(a))
        .collect::<CliResult<Vec<_>>>()?;
    let report = match model {
        FitModel::Pareto => {
            let fit = pareto_fit(&sample)?;
            let mut report = base_report("pareto", fit.link.beta.clone(), fit.se.clone());
            report.loglik = fit.loglik;
            report.converged = fit.converged;
            report.iterations = fit.iterations;
            report.lambda = Some(fit.lambda_hat);
            for x in &ats {
                let (_, idx) = conditional_curves_of(&report, x, &grid)?;
                report.indices.push(IndicesAt::new(x.clone(), idx));
            }
            report
        }
        FitModel::Lognormal => {
            let fit = lognormal_fit(&sample)?;
            let mut report = base_report("lognormal", fit.link.beta.clone(), fit.se.clone());
            report.loglik = fit.loglik;
            report.converged = fit.converged;
            report.iterations = fit.iterations;
            report.alpha = Some(fit.alpha_hat);
            report.sigma0 = Some(fit.sigma0_hat);
            for x in &ats {
                let (_, idx) = conditional_curves_of(&report, x, &grid)?;
                report.indices.push(IndicesAt::new(x.clone(), idx));
            }
            report
        }
        FitModel::GeneralizedPareto | FitModel::Lehmann => {
            let kind = if model == FitModel::Lehmann {
                ModelKind::Lehmann
            } else {
                ModelKind::GeneralizedPareto
            };
            let fit = cox_fit(&sample, kind)?;
            let name = match kind {
                ModelKind::GeneralizedPareto => "generalized_pareto",
                ModelKind::Lehmann => "lehmann",
            };
            let mut report = base_report(name, fit.link.beta.clone(), fit.se.clone());
            report.loglik = fit.partial_loglik;
            report.converged = fit.converged;
            report.iterations = fit.iterations;
            report.kind = Some(kind);
            report.baseline = Some(fit.baseline.clone());
            report.jumps = Some(fit.jumps.clone());
            report.diagnostic = fit.diagnostic.clone();
            report.warnings = fit.warnings.clone();
            for x in &ats {
                let curves = fit.conditional_curves(&grid, x)?;
                let idx = indices_from_grids(&curves)?;
                report.indices.push(IndicesAt::new(x.clone(), idx));
            }
            report
        }
    };
    write_json(&report, opts.output.as_deref())?;
    if !report.converged {
        let detail = report
            .diagnostic
            .clone()
            .unwrap_or_else(|| "fit did not converge".to_string());
        return Err(CliError::Convergence(detail));
    }
    Ok(report)
}

fn base_report(model: &str, coefficients: Vec<f64>, se: Vec<f64>) -> FitReport {
    FitReport {
        model: model.to_string(),
        coefficients,
        se,
        loglik: f64::NAN,
        converged: false,
        iterations: 0,
        lambda: None,
        alpha: None,
        sigma0: None,
        kind: None,
        baseline: None,
        jumps: None,
        diagnostic: None,
        warnings: vec![],
        indices: vec![],
    }
}

pub struct OrderCheckOptions {
    pub input: PathBuf,
    pub other: PathBuf,
    pub response: String,
    pub check: String,
    pub grid_points: usize,
    pub tol: Option<f64>,
    pub output: Option<PathBuf>,
}

/// `order-check`: star/e/r ordering diagnostics between the empirical
/// distributions of two samples.
pub fn run_order_check(opts: &OrderCheckOptions) -> CliResult<OrderCheckReport> {
    let f_sample = ingest(&opts.input, &opts.response, &[])?;
    let h_sample = ingest(&opts.other, &opts.response, &[])?;
    let f = StepDistribution::from_sample(f_sample.y().as_slice().unwrap())?;
    let h = StepDistribution::from_sample(h_sample.y().as_slice().unwrap())?;
    let grid = make_grid(opts.grid_points)?;
    let mut options = OrderingOptions::empirical();
    if let Some(tol) = opts.tol {
        options.tolerance = tol;
    }
    let trimmed: Vec<f64> = grid
        .iter()
        .copied()
        .filter(|u| (EMPIRICAL_TRIM.0..=EMPIRICAL_TRIM.1).contains(u))
        .collect();
    let result = match opts.check.as_str() {
        "star" => {
            if let Some(tol) = opts.tol {
                let mut r = star_order_check_empirical(&f, &h, &grid)?;
                r.tolerance = tol;
                r.holds = r.max_violation <= tol;
                r
            } else {
                star_order_check_empirical(&f, &h, &grid)?
            }
        }
        "e" => e_order_check(
            |u| f.quantile(u).unwrap_or(f64::NAN),
            |z| h.cdf(z),
            &trimmed,
            options,
        )?,
        "r" => r_order_check(
            |u| f.quantile(u).unwrap_or(f64::NAN),
            |z| h.cdf(z),
            &trimmed,
            options,
        )?,
        other => {
            return Err(CliError::Validation(format!(
                "unknown check '{other}' (expected star, e, or r)"
            )))
        }
    };
    let report = OrderCheckReport {
        check: opts.check.clone(),
        holds: result.holds,
        max_violation: result.max_violation,
        witness_u: result.witness_u,
        tolerance: result.tolerance,
    };
    write_json(&report, opts.output.as_deref())?;
    Ok(report)
}

/// Writes a simulated sample as CSV with columns `y,x1,...,xd`.
pub fn write_sample_csv<W: std::io::Write>(mut w: W, sample: &Sample) -> std::io::Result<()> {
    let d = sample.p() - 1;
    let header: Vec<String> = std::iter::once("y".to_string())
        .chain((1..=d).map(|j| format!("x{j}")))
        .collect();
    writeln!(w, "{}", header.join(","))?;
    for i in 0..sample.n() {
        let mut row = vec![sample.y()[i].to_string()];
        for j in 1..sample.p() {
            row.push(sample.x()[[i, j]].to_string());
        }
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

/// `simulate`: draws a sample from a generator spec and writes it as
/// CSV that `ingest` reads back verbatim.
pub fn run_simulate(
    spec: &ineqreg::numerics::ModelSpec,
    design: &ineqreg::numerics::CovariateDesign,
    n: usize,
    seed: u64,
    output: Option<&Path>,
) -> CliResult<Sample> {
    let sample = ineqreg::numerics::simulate(spec, design, n, seed)?;
    match output {
        Some(path) => write_sample_csv(File::create(path)?, &sample)?,
        None => write_sample_csv(std::io::stdout().lock(), &sample)?,
    }
    Ok(sample)
}
