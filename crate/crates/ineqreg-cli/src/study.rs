//! Monte Carlo study driver behind `mc-study`: repeatedly simulates
//! from a known model, refits it, and summarizes bias, spread, and
//! confidence-interval coverage per parameter.

use ineqreg::numerics::{replication_rng, simulate_with_rng, CovariateDesign, ModelSpec};
use ineqreg::parametric::{lognormal_fit, pareto_fit};
use ineqreg::semiparametric::{cox_fit, ModelKind};

use crate::report::{ParameterSummary, StudyReport};
use crate::{CliError, CliResult};

/// Truth vector and parameter names implied by the generating model.
/// The Cox fit leaves the intercept at zero (it cancels from the
/// partial likelihood), so only the slope coefficients are studied.
fn parameters(spec: &ModelSpec) -> (String, Vec<String>, Vec<f64>) {
    match spec {
        ModelSpec::Pareto { beta, .. } => (
            "pareto".to_string(),
            (0..beta.len()).map(|j| format!("beta{j}")).collect(),
            beta.clone(),
        ),
        ModelSpec::Lognormal {
            alpha,
            beta,
            sigma0,
        } => {
            let mut names = vec!["alpha".to_string()];
            names.extend((0..beta.len()).map(|j| format!("beta{j}")));
            names.push("sigma0".to_string());
            let mut truth = vec![*alpha];
            truth.extend_from_slice(beta);
            truth.push(*sigma0);
            ("lognormal".to_string(), names, truth)
        }
        ModelSpec::Cox { beta, .. } => (
            "generalized_pareto".to_string(),
            (1..beta.len()).map(|j| format!("beta{j}")).collect(),
            beta[1..].to_vec(),
        ),
    }
}

/// One replication's estimates and standard errors, aligned with
/// [`parameters`].
fn fit_once(spec: &ModelSpec, sample: &ineqreg::Sample) -> CliResult<(Vec<f64>, Vec<f64>, bool)> {
    Ok(match spec {
        ModelSpec::Pareto { .. } => {
            let fit = pareto_fit(sample)?;
            (fit.link.beta, fit.se, fit.converged)
        }
        ModelSpec::Lognormal { .. } => {
            let fit = lognormal_fit(sample)?;
            let mut est = vec![fit.alpha_hat];
            est.extend_from_slice(&fit.link.beta);
            est.push(fit.sigma0_hat);
            (est, fit.se, fit.converged)
        }
        ModelSpec::Cox { .. } => {
            let fit = cox_fit(sample, ModelKind::GeneralizedPareto)?;
            (
                fit.link.beta[1..].to_vec(),
                fit.se[1..].to_vec(),
                fit.converged,
            )
        }
    })
}

/// Runs the study: `reps` independent replications of size `n`, each on
/// its own RNG stream so the set of draws is independent of ordering.
pub fn run_study(
    spec: &ModelSpec,
    design: &CovariateDesign,
    reps: usize,
    n: usize,
    seed: u64,
) -> CliResult<StudyReport> {
    if reps < 2 {
        return Err(CliError::Validation(
            "--reps must be at least 2".to_string(),
        ));
    }
    let (model, names, truth) = parameters(spec);
    let p = truth.len();
    let mut estimates: Vec<Vec<f64>> = vec![Vec::with_capacity(reps); p];
    let mut ses: Vec<Vec<f64>> = vec![Vec::with_capacity(reps); p];
    let mut converged_reps = 0usize;
    for rep in 0..reps {
        let mut rng = replication_rng(seed, rep as u64);
        let sample = simulate_with_rng(spec, design, n, &mut rng)?;
        let (est, se, converged) = fit_once(spec, &sample)?;
        if !converged {
            continue;
        }
        converged_reps += 1;
        for j in 0..p {
            estimates[j].push(est[j]);
            ses[j].push(se[j]);
        }
    }
    if converged_reps == 0 {
        return Err(CliError::Convergence(
            "no replication converged; study summary undefined".to_string(),
        ));
    }
    let m = converged_reps as f64;
    let parameters = (0..p)
        .map(|j| {
            let mean = estimates[j].iter().sum::<f64>() / m;
            let var =
                estimates[j].iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (m - 1.0).max(1.0);
            let covered = estimates[j]
                .iter()
                .zip(&ses[j])
                .filter(|(e, s)| (*e - truth[j]).abs() <= 1.96 * **s)
                .count();
            ParameterSummary {
                name: names[j].clone(),
                truth: truth[j],
                mean_estimate: mean,
                bias: mean - truth[j],
                empirical_sd: var.sqrt(),
                mean_se: ses[j].iter().sum::<f64>() / m,
                coverage95: covered as f64 / m,
            }
        })
        .collect();
    Ok(StudyReport {
        model,
        reps,
        n,
        seed,
        converged_reps,
        parameters,
    })
}
