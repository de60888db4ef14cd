//! Diagnostics for the three inequality orderings between two
//! distributions F and H.
//!
//! Each check evaluates a transform on a probability grid and reports
//! whether the required shape (monotonicity or convexity/concavity)
//! holds within tolerance, together with the maximal breach and the
//! grid point attaining it:
//!
//! - star order: the quantile ratio H^{-1}(u)/F^{-1}(u) must be
//!   nondecreasing,
//! - e order ("F more equal than H" via a concave CDF transform):
//!   g(t) = H(F^{-1}(t)) must be concave,
//! - r order (convex survival transform): g(t) = Hbar(Fbar^{-1}(t))
//!   must be convex.

use crate::curves::StepDistribution;
use crate::{Error, Result};

/// Verdict of an ordering diagnostic.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderingReport {
    pub holds: bool,
    /// Largest breach of the required shape on the grid (0 when none).
    pub max_violation: f64,
    /// Grid point attaining the maximal breach.
    pub witness_u: f64,
    pub tolerance: f64,
}

/// Tolerance regime for a check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderingOptions {
    pub tolerance: f64,
    /// Scale violations by the local magnitude of the transform.
    pub relative: bool,
}

impl OrderingOptions {
    /// For closed-form inputs: 1e-8 relative.
    pub fn analytic() -> Self {
        Self {
            tolerance: 1e-8,
            relative: true,
        }
    }

    /// For empirical step inputs: 0.01 absolute; quantile ratios are
    /// noisy near u = 0 and u = 1.
    pub fn empirical() -> Self {
        Self {
            tolerance: 0.01,
            relative: false,
        }
    }
}

/// Default trimming window for empirical inputs.
pub const EMPIRICAL_TRIM: (f64, f64) = (0.01, 0.99);

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::Validation(
            "ordering checks need at least two grid points".to_string(),
        ));
    }
    if !(grid[0] > 0.0 && *grid.last().unwrap() < 1.0) || grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Validation(
            "grid must be strictly increasing inside (0,1)".to_string(),
        ));
    }
    Ok(())
}

fn report(
    grid: &[f64],
    violations: impl Iterator<Item = (f64, f64)>,
    opts: OrderingOptions,
) -> OrderingReport {
    let mut max_violation = 0.0f64;
    let mut witness_u = grid[0];
    for (u, v) in violations {
        if v > max_violation {
            max_violation = v;
            witness_u = u;
        }
    }
    OrderingReport {
        holds: max_violation <= opts.tolerance,
        max_violation,
        witness_u,
        tolerance: opts.tolerance,
    }
}

/// Star-order check F <_* H: the ratio r(u) = H^{-1}(u)/F^{-1}(u) must
/// be nondecreasing over the grid.
pub fn star_order_check(
    f_quantile: impl Fn(f64) -> f64,
    h_quantile: impl Fn(f64) -> f64,
    grid: &[f64],
    opts: OrderingOptions,
) -> Result<OrderingReport> {
    validate_grid(grid)?;
    let mut ratio = Vec::with_capacity(grid.len());
    for &u in grid {
        let fq = f_quantile(u);
        let hq = h_quantile(u);
        if fq == 0.0 || hq == 0.0 {
            return Err(Error::Numeric(format!(
                "ratio undefined at zero quantile (u = {u})"
            )));
        }
        if !(fq > 0.0 && hq > 0.0) {
            return Err(Error::Validation(
                "star order requires distributions on (0, infinity)".to_string(),
            ));
        }
        ratio.push(hq / fq);
    }
    let violations = (0..grid.len() - 1).map(|i| {
        let drop = ratio[i] - ratio[i + 1];
        let scale = if opts.relative {
            ratio[i]
                .abs()
                .max(ratio[i + 1].abs())
                .max(f64::MIN_POSITIVE)
        } else {
            1.0
        };
        (grid[i], (drop / scale).max(0.0))
    });
    Ok(report(grid, violations, opts))
}

/// Star-order check for two empirical step distributions; the grid is
/// trimmed to [0.01, 0.99] where empirical quantiles are stable.
pub fn star_order_check_empirical(
    f: &StepDistribution,
    h: &StepDistribution,
    grid: &[f64],
) -> Result<OrderingReport> {
    let trimmed: Vec<f64> = grid
        .iter()
        .copied()
        .filter(|u| (EMPIRICAL_TRIM.0..=EMPIRICAL_TRIM.1).contains(u))
        .collect();
    star_order_check(
        |u| f.quantile(u).unwrap_or(f64::NAN),
        |u| h.quantile(u).unwrap_or(f64::NAN),
        &trimmed,
        OrderingOptions::empirical(),
    )
}

/// Discrete convexity violations of `g` on `grid`: positive drops of
/// consecutive divided-difference slopes.
fn slope_drops<'a>(
    grid: &'a [f64],
    g: &'a [f64],
    opts: OrderingOptions,
) -> impl Iterator<Item = (f64, f64)> + 'a {
    (1..grid.len() - 1).map(move |i| {
        let left = (g[i] - g[i - 1]) / (grid[i] - grid[i - 1]);
        let right = (g[i + 1] - g[i]) / (grid[i + 1] - grid[i]);
        let scale = if opts.relative {
            left.abs().max(right.abs()).max(1.0)
        } else {
            1.0
        };
        (grid[i], ((left - right) / scale).max(0.0))
    })
}

/// e-order check via the concave-transform definition: computes
/// g(t) = H(F^{-1}(t)) and tests concavity on the grid.
pub fn e_order_check(
    f_quantile: impl Fn(f64) -> f64,
    h_cdf: impl Fn(f64) -> f64,
    grid: &[f64],
    opts: OrderingOptions,
) -> Result<OrderingReport> {
    validate_grid(grid)?;
    if grid.len() < 3 {
        return Err(Error::Validation(
            "convexity checks need at least three grid points".to_string(),
        ));
    }
    let g: Vec<f64> = grid.iter().map(|&t| h_cdf(f_quantile(t))).collect();
    // Concavity: slopes nonincreasing, i.e. no positive slope rise.
    let neg: Vec<f64> = g.iter().map(|v| -v).collect();
    Ok(report(grid, slope_drops(grid, &neg, opts), opts))
}

/// r-order check via the convex-survival-transform definition:
/// computes g(t) = Hbar(Fbar^{-1}(t)) and tests convexity.
pub fn r_order_check(
    f_quantile: impl Fn(f64) -> f64,
    h_cdf: impl Fn(f64) -> f64,
    grid: &[f64],
    opts: OrderingOptions,
) -> Result<OrderingReport> {
    validate_grid(grid)?;
    if grid.len() < 3 {
        return Err(Error::Validation(
            "convexity checks need at least three grid points".to_string(),
        ));
    }
    // Fbar^{-1}(t) = F^{-1}(1 - t), Hbar = 1 - H.
    let g: Vec<f64> = grid
        .iter()
        .map(|&t| 1.0 - h_cdf(f_quantile(1.0 - t)))
        .collect();
    Ok(report(grid, slope_drops(grid, &g, opts), opts))
}
