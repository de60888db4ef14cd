//! Inequality curves (Lorenz, Bonferroni, C, D) and their summary
//! indices, computed from a step distribution, a raw sample, or
//! closed-form curve functions.
//!
//! Empirical curves integrate the step quantile function exactly
//! (rectangle areas), not by sampling it on the grid; indices of step
//! distributions use exact piecewise integration, indices of analytic
//! curves use adaptive Simpson quadrature.

use serde::{Deserialize, Serialize};

use crate::numerics::simpson_integrate;
use crate::sample::Sample;
use crate::{Error, Result};

/// Quadrature target for indices of analytic curves.
pub const ANALYTIC_QUAD_TOL: f64 = 1e-9;

/// Slack allowed when validating Lorenz-shape constraints on grids.
const SHAPE_TOL: f64 = 1e-9;

/// Right-continuous step CDF: support points with cumulative
/// probabilities. Houses empirical CDFs and the Breslow baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepDistribution {
    support: Vec<f64>,
    cdf: Vec<f64>,
}

impl StepDistribution {
    pub fn new(support: Vec<f64>, cdf: Vec<f64>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::Validation("empty step distribution".to_string()));
        }
        if support.len() != cdf.len() {
            return Err(Error::Validation(
                "support and cdf must have equal length".to_string(),
            ));
        }
        if support.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Validation(
                "support must be strictly increasing".to_string(),
            ));
        }
        if support.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("support must be finite".to_string()));
        }
        let mut prev = 0.0;
        for &c in &cdf {
            if !(c > 0.0 && c <= 1.0 + 1e-12) || c < prev {
                return Err(Error::Validation(
                    "cdf must be nondecreasing with values in (0, 1]".to_string(),
                ));
            }
            prev = c;
        }
        Ok(Self { support, cdf })
    }

    /// Empirical distribution of a sample: equal mass 1/n per point,
    /// duplicates collapsed.
    pub fn from_sample(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Validation("empty sample".to_string()));
        }
        let mut sorted = values.to_vec();
        if sorted.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("sample must be finite".to_string()));
        }
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = sorted.len() as f64;
        let mut support = Vec::new();
        let mut cdf = Vec::new();
        let mut count = 0usize;
        for (i, &v) in sorted.iter().enumerate() {
            count += 1;
            if i + 1 == sorted.len() || sorted[i + 1] != v {
                support.push(v);
                cdf.push(count as f64 / n);
            }
        }
        // Exactly one at the top regardless of rounding.
        *cdf.last_mut().unwrap() = 1.0;
        Self::new(support, cdf)
    }

    pub fn support(&self) -> &[f64] {
        &self.support
    }

    pub fn cdf_values(&self) -> &[f64] {
        &self.cdf
    }

    pub fn total_mass(&self) -> f64 {
        *self.cdf.last().unwrap()
    }

    /// CDF evaluated at `y` (right-continuous).
    pub fn cdf(&self, y: f64) -> f64 {
        match self.support.partition_point(|s| *s <= y) {
            0 => 0.0,
            k => self.cdf[k - 1],
        }
    }

    /// Left-inverse quantile: the smallest support point whose
    /// cumulative probability reaches `u`.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0) {
            return Err(Error::Validation(format!(
                "quantile requires u > 0, got {u}"
            )));
        }
        if u > self.total_mass() + 1e-15 {
            return Err(Error::Validation(format!(
                "quantile undefined beyond mass: u = {u}, total mass = {}",
                self.total_mass()
            )));
        }
        let k = self
            .cdf
            .partition_point(|c| *c < u)
            .min(self.support.len() - 1);
        Ok(self.support[k])
    }

    /// Probability mass at each support point.
    pub fn jumps(&self) -> Vec<f64> {
        let mut prev = 0.0;
        self.cdf
            .iter()
            .map(|&c| {
                let j = c - prev;
                prev = c;
                j
            })
            .collect()
    }

    fn require_full_positive(&self) -> Result<()> {
        if self.support[0] <= 0.0 {
            return Err(Error::Validation(
                "inequality curves require strictly positive support".to_string(),
            ));
        }
        if (self.total_mass() - 1.0).abs() > 1e-12 {
            return Err(Error::Validation(
                "inequality curves require total mass 1".to_string(),
            ));
        }
        Ok(())
    }

    /// Exact partial mean: integral of the step quantile over (0, u].
    fn partial_mean(&self, u: f64, prefix: &[f64]) -> f64 {
        let k = self
            .cdf
            .partition_point(|c| *c < u)
            .min(self.support.len() - 1);
        let below = if k == 0 { 0.0 } else { prefix[k - 1] };
        let c_prev = if k == 0 { 0.0 } else { self.cdf[k - 1] };
        if u > c_prev {
            below + self.support[k] * (u - c_prev)
        } else {
            below
        }
    }

    fn prefix_integrals(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut prev = 0.0;
        self.cdf
            .iter()
            .zip(&self.support)
            .map(|(&c, &s)| {
                acc += s * (c - prev);
                prev = c;
                acc
            })
            .collect()
    }

    pub fn mean(&self) -> f64 {
        *self.prefix_integrals().last().unwrap()
    }
}

/// Evaluation grid for one inequality curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveGrid {
    u: Vec<f64>,
    v: Vec<f64>,
}

impl CurveGrid {
    pub fn new(u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if u.len() != v.len() || u.is_empty() {
            return Err(Error::Validation(
                "grid and values must be non-empty and of equal length".to_string(),
            ));
        }
        if !(u[0] > 0.0 && *u.last().unwrap() < 1.0) || u.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Validation(
                "grid must be strictly increasing inside (0,1)".to_string(),
            ));
        }
        Ok(Self { u, v })
    }

    /// A Lorenz grid additionally satisfies v nondecreasing and v <= u.
    pub fn lorenz(u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        let g = Self::new(u, v)?;
        if g.v.windows(2).any(|w| w[1] < w[0] - SHAPE_TOL) {
            return Err(Error::Validation(
                "Lorenz values must be nondecreasing".to_string(),
            ));
        }
        if g.u.iter().zip(&g.v).any(|(u, v)| *v > *u + SHAPE_TOL) {
            return Err(Error::Validation(
                "Lorenz values must satisfy L(u) <= u".to_string(),
            ));
        }
        Ok(g)
    }

    pub fn u(&self) -> &[f64] {
        &self.u
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }
}

/// The four inequality curves on a common grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSet {
    pub lorenz: CurveGrid,
    pub bonferroni: CurveGrid,
    pub c: CurveGrid,
    pub d: CurveGrid,
}

/// Summary inequality indices; 0 is perfect equality, 1 is maximal
/// concentration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexSet {
    pub gini: f64,
    pub bonferroni: f64,
    pub c_index: f64,
    pub d_index: f64,
}

/// Slack allowed on indices computed by quadrature before they are
/// clamped back into [0, 1]; adaptive Simpson's target is not a hard
/// error bound.
const INDEX_TOL: f64 = 1e-7;

impl IndexSet {
    fn validate(mut self) -> Result<Self> {
        let all = [self.gini, self.bonferroni, self.c_index, self.d_index];
        if all.iter().any(|v| *v < -INDEX_TOL || *v > 1.0 + INDEX_TOL) {
            return Err(Error::Numeric(format!("index outside [0,1]: {self:?}")));
        }
        for v in [
            &mut self.gini,
            &mut self.bonferroni,
            &mut self.c_index,
            &mut self.d_index,
        ] {
            // The added zero turns -0.0 (a degenerate-sample artifact)
            // into +0.0 so serialized reports print 0.
            *v = v.clamp(0.0, 1.0) + 0.0;
        }
        Ok(self)
    }
}

/// Default evaluation grid: 999 equally spaced points 0.001..=0.999.
pub fn default_grid() -> Vec<f64> {
    (1..1000).map(|i| i as f64 / 1000.0).collect()
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Validation("empty grid".to_string()));
    }
    if !(grid[0] > 0.0 && *grid.last().unwrap() < 1.0) || grid.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Validation(
            "grid must be strictly increasing inside (0,1)".to_string(),
        ));
    }
    Ok(())
}

/// All four curves of a step distribution, by exact integration of the
/// step quantile. At jump points C and D use the left-inverse quantile.
pub fn step_curves(dist: &StepDistribution, grid: &[f64]) -> Result<CurveSet> {
    validate_grid(grid)?;
    dist.require_full_positive()?;
    let prefix = dist.prefix_integrals();
    let mu = *prefix.last().unwrap();
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::Numeric(
            "mean must be positive and finite".to_string(),
        ));
    }
    let mut l = Vec::with_capacity(grid.len());
    let mut b = Vec::with_capacity(grid.len());
    let mut c = Vec::with_capacity(grid.len());
    let mut d = Vec::with_capacity(grid.len());
    for &u in grid {
        let partial = dist.partial_mean(u, &prefix);
        let q = dist.quantile(u)?;
        // L and C are re-derived from B and D by one multiplication so
        // the linking identities B*u = L and D*u = C hold bit-exactly.
        let bu = partial / mu / u;
        b.push(bu);
        l.push(bu * u);
        let du = partial / q / u;
        d.push(du);
        c.push(du * u);
    }
    Ok(CurveSet {
        lorenz: CurveGrid::lorenz(grid.to_vec(), l)?,
        bonferroni: CurveGrid::new(grid.to_vec(), b)?,
        c: CurveGrid::new(grid.to_vec(), c)?,
        d: CurveGrid::new(grid.to_vec(), d)?,
    })
}

/// Empirical curves of a raw sample.
pub fn sample_curves(sample: &Sample, grid: &[f64]) -> Result<CurveSet> {
    step_curves(
        &StepDistribution::from_sample(sample.y().as_slice().unwrap())?,
        grid,
    )
}

/// Exact inequality indices of a step distribution.
///
/// On each constancy interval (c_{i-1}, c_i] of the quantile the
/// partial mean is affine in u, so every index integral reduces to
/// rectangle, trapezoid, and logarithm terms.
pub fn step_indices(dist: &StepDistribution) -> Result<IndexSet> {
    dist.require_full_positive()?;
    let prefix = dist.prefix_integrals();
    let mu = *prefix.last().unwrap();
    let mut int_l = 0.0; // integral of L
    let mut int_l_over_u = 0.0; // integral of L(u)/u
    let mut int_c = 0.0; // integral of C
    let mut int_d_shortfall = 0.0; // integral of C(u)/u - 1
    let mut c_prev = 0.0;
    for (i, (&s, &c)) in dist.support.iter().zip(&dist.cdf).enumerate() {
        let below = if i == 0 { 0.0 } else { prefix[i - 1] };
        // Partial mean on this interval: a + s*u.
        let a = below - s * c_prev;
        let width = c - c_prev;
        let trapezoid = a * width + 0.5 * s * (c * c - c_prev * c_prev);
        int_l += trapezoid / mu;
        int_c += trapezoid / s;
        if c_prev > 0.0 {
            let log_ratio = (c / c_prev).ln();
            int_l_over_u += (a * log_ratio + s * width) / mu;
            int_d_shortfall += (a / s) * log_ratio;
        } else {
            // First interval: a = 0 exactly, the log terms vanish.
            int_l_over_u += s * width / mu;
        }
        c_prev = c;
    }
    IndexSet {
        gini: 1.0 - 2.0 * int_l,
        bonferroni: 1.0 - int_l_over_u,
        c_index: 1.0 - 2.0 * int_c,
        d_index: -int_d_shortfall,
    }
    .validate()
}

/// Exact indices of a raw sample.
pub fn sample_indices(sample: &Sample) -> Result<IndexSet> {
    step_indices(&StepDistribution::from_sample(
        sample.y().as_slice().unwrap(),
    )?)
}

/// Builds all four curve grids from a closed-form Lorenz curve, the
/// matching quantile function, and the mean.
pub fn curves_from_closed_form(
    lorenz: impl Fn(f64) -> f64,
    quantile: impl Fn(f64) -> f64,
    mu: f64,
    grid: &[f64],
) -> Result<CurveSet> {
    validate_grid(grid)?;
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::Validation(
            "mean must be positive and finite".to_string(),
        ));
    }
    let mut l = Vec::with_capacity(grid.len());
    let mut b = Vec::with_capacity(grid.len());
    let mut c = Vec::with_capacity(grid.len());
    let mut d = Vec::with_capacity(grid.len());
    for &u in grid {
        let lu = lorenz(u);
        let q = quantile(u);
        if !(q > 0.0) {
            return Err(Error::Numeric(format!(
                "quantile must be positive at u = {u}"
            )));
        }
        // Derive L and C from B and D (see step_curves) to keep the
        // linking identities exact.
        let bu = lu / u;
        b.push(bu);
        l.push(bu * u);
        let du = mu * lu / q / u;
        d.push(du);
        c.push(du * u);
    }
    Ok(CurveSet {
        lorenz: CurveGrid::lorenz(grid.to_vec(), l)?,
        bonferroni: CurveGrid::new(grid.to_vec(), b)?,
        c: CurveGrid::new(grid.to_vec(), c)?,
        d: CurveGrid::new(grid.to_vec(), d)?,
    })
}

/// Indices of analytic curves by adaptive Simpson quadrature with a
/// 1e-9 target. The integrands are evaluated on [eps, 1-eps]; they are
/// bounded, so the trimmed mass is below the quadrature target.
pub fn analytic_indices(
    lorenz: impl Fn(f64) -> f64,
    quantile: impl Fn(f64) -> f64,
    mu: f64,
) -> Result<IndexSet> {
    const EPS: f64 = 1e-10;
    let l = &lorenz;
    let q = &quantile;
    let gini = 2.0 * simpson_integrate(|u| u - l(u), EPS, 1.0 - EPS, ANALYTIC_QUAD_TOL);
    let bonf = simpson_integrate(|u| 1.0 - l(u) / u, EPS, 1.0 - EPS, ANALYTIC_QUAD_TOL);
    let c_index =
        2.0 * simpson_integrate(|u| u - mu * l(u) / q(u), EPS, 1.0 - EPS, ANALYTIC_QUAD_TOL);
    let d_index = simpson_integrate(
        |u| 1.0 - mu * l(u) / (u * q(u)),
        EPS,
        1.0 - EPS,
        ANALYTIC_QUAD_TOL,
    );
    IndexSet {
        gini,
        bonferroni: bonf,
        c_index,
        d_index,
    }
    .validate()
}

/// Indices from tabulated curve grids by trapezoidal integration, with
/// the known endpoint limits appended (all integrands vanish at u = 1;
/// at u = 0 the Lorenz/C integrands vanish and the Bonferroni/D
/// integrands are extended constantly from the first grid point).
pub fn indices_from_grids(curves: &CurveSet) -> Result<IndexSet> {
    let trapezoid = |u: &[f64], f: &[f64], left: f64, right: f64| {
        let mut total = 0.5 * (left + f[0]) * u[0];
        for i in 1..u.len() {
            total += 0.5 * (f[i - 1] + f[i]) * (u[i] - u[i - 1]);
        }
        total + 0.5 * (f[f.len() - 1] + right) * (1.0 - u[u.len() - 1])
    };
    let lu = curves.lorenz.u();
    let gap_l: Vec<f64> = lu
        .iter()
        .zip(curves.lorenz.v())
        .map(|(u, v)| u - v)
        .collect();
    let gap_b: Vec<f64> = curves.bonferroni.v().iter().map(|v| 1.0 - v).collect();
    let gap_c: Vec<f64> = curves
        .c
        .u()
        .iter()
        .zip(curves.c.v())
        .map(|(u, v)| u - v)
        .collect();
    let gap_d: Vec<f64> = curves.d.v().iter().map(|v| 1.0 - v).collect();
    IndexSet {
        gini: 2.0 * trapezoid(lu, &gap_l, 0.0, 0.0),
        bonferroni: trapezoid(curves.bonferroni.u(), &gap_b, gap_b[0], 0.0),
        c_index: 2.0 * trapezoid(curves.c.u(), &gap_c, 0.0, 0.0),
        d_index: trapezoid(curves.d.u(), &gap_d, gap_d[0], 0.0),
    }
    .validate()
}
