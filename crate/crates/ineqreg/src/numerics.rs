//! Shared numerical kernels: quasi-Newton maximization, adaptive
//! quadrature, the standard-normal CDF/quantile pair, dense linear
//! solves for information matrices, and seeded simulation of the three
//! model families.

use ndarray::{Array1, Array2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::sample::Sample;
use crate::{Error, Result};

/// Outcome of an unconstrained maximization.
#[derive(Debug, Clone)]
pub struct OptimizerReport {
    pub argmax: Array1<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

const MAX_ITERATIONS: usize = 500;

/// Maximizes a smooth objective by BFGS with backtracking line search.
///
/// `objective` returns the value and analytic gradient. Convergence is
/// declared when the scaled gradient norm `||g||_inf / (1 + |f|)` drops
/// below `tol`.
pub fn maximize<F>(mut objective: F, start: &[f64], tol: f64) -> Result<OptimizerReport>
where
    F: FnMut(&Array1<f64>) -> (f64, Array1<f64>),
{
    let p = start.len();
    let mut theta = Array1::from(start.to_vec());
    let (mut f, mut g) = objective(&theta);
    if !f.is_finite() {
        return Err(Error::Numeric(
            "objective not finite at starting point".to_string(),
        ));
    }
    // Inverse Hessian approximation.
    let mut h_inv = Array2::<f64>::eye(p);
    let mut first_update = true;
    let scaled_norm =
        |f: f64, g: &Array1<f64>| g.iter().fold(0.0f64, |m, v| m.max(v.abs())) / (1.0 + f.abs());
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        if scaled_norm(f, &g) < tol {
            return Ok(OptimizerReport {
                argmax: theta,
                value: f,
                grad_norm: scaled_norm(f, &g),
                iterations,
                converged: true,
            });
        }
        iterations += 1;
        let mut direction = h_inv.dot(&g);
        if direction.dot(&g) <= 0.0 {
            // Curvature lost; restart from steepest ascent.
            h_inv = Array2::eye(p);
            direction = g.clone();
        }
        // Backtracking Armijo search (ascent).
        let slope = direction.dot(&g);
        let mut step = 1.0f64;
        let (mut f_new, mut g_new, mut theta_new);
        loop {
            theta_new = &theta + &direction.mapv(|v| step * v);
            let (fv, gv) = objective(&theta_new);
            f_new = fv;
            g_new = gv;
            if f_new.is_finite() && f_new >= f + 1e-4 * step * slope {
                break;
            }
            step *= 0.5;
            if step < 1e-16 {
                return Ok(OptimizerReport {
                    argmax: theta,
                    value: f,
                    grad_norm: scaled_norm(f, &g),
                    iterations,
                    converged: scaled_norm(f, &g) < tol,
                });
            }
        }
        if step < 1e-8 && f_new - f <= f64::EPSILON * (1.0 + f.abs()) {
            // Objective improvement below one ulp: further iterations
            // only random-walk on the floating-point plateau.
            let gn = scaled_norm(f_new, &g_new);
            return Ok(OptimizerReport {
                argmax: theta_new,
                value: f_new,
                grad_norm: gn,
                iterations,
                converged: gn < tol,
            });
        }
        // BFGS update of the inverse Hessian (maximization form: apply
        // the standard update to -g).
        let s = &theta_new - &theta;
        let yk = &g - &g_new; // change in -gradient
        let sy = s.dot(&yk);
        if sy > 1e-12 * s.dot(&s).sqrt() * yk.dot(&yk).sqrt() {
            if first_update {
                // Scale the initial identity to the local curvature so
                // the first quasi-Newton steps are well sized.
                let gamma = sy / yk.dot(&yk);
                if gamma.is_finite() && gamma > 0.0 {
                    h_inv = Array2::eye(p) * gamma;
                }
                first_update = false;
            }
            let hy = h_inv.dot(&yk);
            let yhy = yk.dot(&hy);
            let rho = 1.0 / sy;
            // H <- (I - rho s y') H (I - rho y s') + rho s s'
            let mut h_new = h_inv.clone();
            for i in 0..p {
                for j in 0..p {
                    h_new[[i, j]] = h_inv[[i, j]] - rho * (s[i] * hy[j] + hy[i] * s[j])
                        + rho * rho * s[i] * s[j] * yhy
                        + rho * s[i] * s[j];
                }
            }
            h_inv = h_new;
        }
        theta = theta_new;
        f = f_new;
        g = g_new;
    }
    Ok(OptimizerReport {
        grad_norm: scaled_norm(f, &g),
        converged: false,
        argmax: theta,
        value: f,
        iterations,
    })
}

/// Central finite-difference gradient, for checking analytic gradients.
pub fn numerical_gradient<F>(mut f: F, theta: &Array1<f64>, step: f64) -> Array1<f64>
where
    F: FnMut(&Array1<f64>) -> f64,
{
    let mut g = Array1::zeros(theta.len());
    for i in 0..theta.len() {
        let h = step * (1.0 + theta[i].abs());
        let mut tp = theta.clone();
        let mut tm = theta.clone();
        tp[i] += h;
        tm[i] -= h;
        g[i] = (f(&tp) - f(&tm)) / (2.0 * h);
    }
    g
}

/// Largest relative component-wise discrepancy between two gradients.
pub fn gradient_discrepancy(analytic: &Array1<f64>, numeric: &Array1<f64>) -> f64 {
    analytic
        .iter()
        .zip(numeric.iter())
        .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(1.0))
        .fold(0.0, f64::max)
}

/// Observed information at `theta`: negated finite-difference Jacobian
/// of the analytic gradient, symmetrized. Step is `1e-5 * (1 + |theta_i|)`.
pub fn observed_information<F>(mut grad: F, theta: &Array1<f64>) -> Array2<f64>
where
    F: FnMut(&Array1<f64>) -> Array1<f64>,
{
    let p = theta.len();
    let mut info = Array2::zeros((p, p));
    for i in 0..p {
        let h = 1e-5 * (1.0 + theta[i].abs());
        let mut tp = theta.clone();
        let mut tm = theta.clone();
        tp[i] += h;
        tm[i] -= h;
        let col = (grad(&tp) - grad(&tm)).mapv(|v| -v / (2.0 * h));
        for j in 0..p {
            info[[j, i]] = col[j];
        }
    }
    // Symmetrize.
    let t = info.t().to_owned();
    (&info + &t).mapv(|v| 0.5 * v)
}

/// Inverts a small symmetric positive-definite matrix by Gauss-Jordan
/// elimination with partial pivoting.
pub fn invert(a: &Array2<f64>) -> Result<Array2<f64>> {
    let p = a.nrows();
    if a.ncols() != p {
        return Err(Error::Numeric("matrix must be square".to_string()));
    }
    let mut m = a.clone();
    let mut inv = Array2::<f64>::eye(p);
    for col in 0..p {
        let pivot = (col..p)
            .max_by(|&i, &j| m[[i, col]].abs().partial_cmp(&m[[j, col]].abs()).unwrap())
            .unwrap();
        if m[[pivot, col]].abs() < 1e-300 {
            return Err(Error::Numeric("singular information matrix".to_string()));
        }
        if pivot != col {
            for j in 0..p {
                m.swap([pivot, j], [col, j]);
                inv.swap([pivot, j], [col, j]);
            }
        }
        let d = m[[col, col]];
        for j in 0..p {
            m[[col, j]] /= d;
            inv[[col, j]] /= d;
        }
        for i in 0..p {
            if i != col {
                let factor = m[[i, col]];
                if factor != 0.0 {
                    for j in 0..p {
                        m[[i, j]] -= factor * m[[col, j]];
                        inv[[i, j]] -= factor * inv[[col, j]];
                    }
                }
            }
        }
    }
    Ok(inv)
}

/// Standard errors from the inverse of an observed information matrix.
pub fn standard_errors(info: &Array2<f64>) -> Result<Vec<f64>> {
    let cov = invert(info)?;
    let mut se = Vec::with_capacity(info.nrows());
    for i in 0..info.nrows() {
        let v = cov[[i, i]];
        if v < 0.0 {
            return Err(Error::Numeric(
                "negative variance from information matrix".to_string(),
            ));
        }
        se.push(v.sqrt());
    }
    Ok(se)
}

// ---------------------------------------------------------------------------
// Quadrature
// ---------------------------------------------------------------------------

fn simpson_rule(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_simpson<F>(
    f: &mut F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> f64
where
    F: FnMut(f64) -> f64,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson_rule(fa, flm, fm, a, m);
    let right = simpson_rule(fm, frm, fb, m, b);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
}

/// Adaptive composite Simpson quadrature of `f` over `[a, b]`.
pub fn simpson_integrate<F>(mut f: F, a: f64, b: f64, tol: f64) -> f64
where
    F: FnMut(f64) -> f64,
{
    if a == b {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = simpson_rule(fa, fm, fb, a, b);
    adaptive_simpson(&mut f, a, b, fa, fm, fb, whole, tol, 48)
}

// ---------------------------------------------------------------------------
// Standard normal
// ---------------------------------------------------------------------------

/// Standard-normal CDF via the complementary error function.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Complementary error function by Cody's rational Chebyshev
/// approximations; absolute error below 1e-15 across the real line.
fn erfc(x: f64) -> f64 {
    let ax = x.abs();
    let result = if ax < 0.46875 {
        // erfc = 1 - erf on the central interval.
        const A: [f64; 5] = [
            3.16112374387056560e0,
            1.13864154151050156e2,
            3.77485237685302021e2,
            3.20937758913846947e3,
            1.85777706184603153e-1,
        ];
        const B: [f64; 4] = [
            2.36012909523441209e1,
            2.44024637934444173e2,
            1.28261652607737228e3,
            2.84423683343917062e3,
        ];
        let z = x * x;
        let mut num = A[4] * z;
        let mut den = z;
        for i in 0..3 {
            num = (num + A[i]) * z;
            den = (den + B[i]) * z;
        }
        return 1.0 - x * (num + A[3]) / (den + B[3]);
    } else if ax <= 4.0 {
        const C: [f64; 9] = [
            5.64188496988670089e-1,
            8.88314979438837594e0,
            6.61191906371416295e1,
            2.98635138197400131e2,
            8.81952221241769090e2,
            1.71204761263407058e3,
            2.05107837782607147e3,
            1.23033935479799725e3,
            2.15311535474403846e-8,
        ];
        const D: [f64; 8] = [
            1.57449261107098347e1,
            1.17693950891312499e2,
            5.37181101862009858e2,
            1.62138957456669019e3,
            3.29079923573345963e3,
            4.36261909014324716e3,
            3.43936767414372164e3,
            1.23033935480374942e3,
        ];
        let mut num = C[8] * ax;
        let mut den = ax;
        for i in 0..7 {
            num = (num + C[i]) * ax;
            den = (den + D[i]) * ax;
        }
        (-ax * ax).exp() * (num + C[7]) / (den + D[7])
    } else {
        const P: [f64; 6] = [
            3.05326634961232344e-1,
            3.60344899949804439e-1,
            1.25781726111229246e-1,
            1.60837851487422766e-2,
            6.58749161529837803e-4,
            1.63153871373020978e-2,
        ];
        const Q: [f64; 5] = [
            2.56852019228982242e0,
            1.87295284992346047e0,
            5.27905102951428412e-1,
            6.05183413124413191e-2,
            2.33520497626869185e-3,
        ];
        const INV_SQRT_PI: f64 = 5.64189583547756287e-1;
        let z = 1.0 / (ax * ax);
        let mut num = P[5] * z;
        let mut den = z;
        for i in 0..4 {
            num = (num + P[i]) * z;
            den = (den + Q[i]) * z;
        }
        let r = z * (num + P[4]) / (den + Q[4]);
        if ax > 26.5 {
            0.0
        } else {
            (-ax * ax).exp() * (INV_SQRT_PI - r) / ax
        }
    };
    if x < 0.0 {
        2.0 - result
    } else {
        result
    }
}

fn normal_pdf(z: f64) -> f64 {
    const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
    (-0.5 * z * z).exp() * INV_SQRT_2PI
}

/// Standard-normal quantile: rational initial guess (Acklam) refined by
/// two Halley steps against [`normal_cdf`].
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Numeric(format!(
            "normal quantile requires p in (0,1), got {p}"
        )));
    }
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383577518672690e+02,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    let p_low = 0.02425;
    let mut x = if p < p_low {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - p_low {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    for _ in 0..2 {
        let e = normal_cdf(x) - p;
        let u = e / normal_pdf(x);
        x -= u / (1.0 + 0.5 * x * u);
    }
    Ok(x)
}

// ---------------------------------------------------------------------------
// Simulation
// ---------------------------------------------------------------------------

/// Baseline distribution for the semiparametric generator.
#[derive(Debug, Clone, PartialEq)]
pub enum BaselineSpec {
    /// Pareto with scale `lambda` and unit shape: F0(y) = 1 - lambda/y.
    Pareto { lambda: f64 },
    /// Exponential with the given rate.
    Exponential { rate: f64 },
}

impl BaselineSpec {
    pub fn quantile(&self, u: f64) -> f64 {
        match self {
            BaselineSpec::Pareto { lambda } => lambda / (1.0 - u),
            BaselineSpec::Exponential { rate } => -(1.0 - u).ln() / rate,
        }
    }

    pub fn cdf(&self, y: f64) -> f64 {
        match self {
            BaselineSpec::Pareto { lambda } => {
                if y <= *lambda {
                    0.0
                } else {
                    1.0 - lambda / y
                }
            }
            BaselineSpec::Exponential { rate } => 1.0 - (-rate * y.max(0.0)).exp(),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            BaselineSpec::Pareto { lambda } => *lambda > 0.0,
            BaselineSpec::Exponential { rate } => *rate > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Validation(
                "baseline parameters must be > 0".to_string(),
            ))
        }
    }
}

/// Generating model for [`simulate`].
#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    /// Pareto regression: Y = lambda (1 - U)^{-Delta(x)}.
    Pareto { lambda: f64, beta: Vec<f64> },
    /// Log-normal regression: log Y ~ N(alpha + Delta(x), sigma0^2 Delta(x)^2).
    Lognormal {
        alpha: f64,
        beta: Vec<f64>,
        sigma0: f64,
    },
    /// Generalized Pareto: Y = F0^{-1}(1 - (1 - U)^{Delta(x)}).
    Cox {
        baseline: BaselineSpec,
        beta: Vec<f64>,
    },
}

impl ModelSpec {
    fn beta(&self) -> &[f64] {
        match self {
            ModelSpec::Pareto { beta, .. } => beta,
            ModelSpec::Lognormal { beta, .. } => beta,
            ModelSpec::Cox { beta, .. } => beta,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            ModelSpec::Pareto { lambda, .. } if *lambda <= 0.0 => {
                Err(Error::Validation("lambda must be > 0".to_string()))
            }
            ModelSpec::Lognormal { sigma0, .. } if *sigma0 <= 0.0 => {
                Err(Error::Validation("sigma0 must be > 0".to_string()))
            }
            ModelSpec::Cox { baseline, .. } => baseline.validate(),
            _ => Ok(()),
        }
    }
}

/// Covariate layout for simulated samples (intercept added implicitly).
#[derive(Debug, Clone, PartialEq)]
pub enum CovariateDesign {
    /// `d` independent standard-normal columns.
    StandardNormal { d: usize },
    /// `d` independent Bernoulli(1/2) columns.
    Binary { d: usize },
    /// Caller-supplied covariate columns (without intercept).
    Fixed(Vec<Vec<f64>>),
}

impl CovariateDesign {
    fn dim(&self) -> usize {
        match self {
            CovariateDesign::StandardNormal { d } | CovariateDesign::Binary { d } => *d,
            CovariateDesign::Fixed(cols) => cols.len(),
        }
    }
}

/// Independent RNG stream for Monte Carlo replication `rep` of a study
/// seeded with `seed`. Streams with distinct `rep` never overlap.
pub fn replication_rng(seed: u64, rep: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(rep);
    rng
}

/// Draws a deterministic sample of size `n` from the given model.
pub fn simulate(spec: &ModelSpec, design: &CovariateDesign, n: usize, seed: u64) -> Result<Sample> {
    simulate_with_rng(spec, design, n, &mut replication_rng(seed, 0))
}

/// As [`simulate`] but drawing from a caller-managed stream.
pub fn simulate_with_rng(
    spec: &ModelSpec,
    design: &CovariateDesign,
    n: usize,
    rng: &mut ChaCha12Rng,
) -> Result<Sample> {
    spec.validate()?;
    if n == 0 {
        return Err(Error::Validation("n must be positive".to_string()));
    }
    let d = design.dim();
    if spec.beta().len() != d + 1 {
        return Err(Error::Validation(format!(
            "beta has {} entries, expected {} (intercept + {} covariates)",
            spec.beta().len(),
            d + 1,
            d
        )));
    }
    let mut x = Array2::<f64>::ones((n, d + 1));
    match design {
        CovariateDesign::StandardNormal { .. } => {
            for i in 0..n {
                for j in 0..d {
                    x[[i, j + 1]] = draw_standard_normal(rng);
                }
            }
        }
        CovariateDesign::Binary { .. } => {
            for i in 0..n {
                for j in 0..d {
                    x[[i, j + 1]] = if rng.gen::<bool>() { 1.0 } else { 0.0 };
                }
            }
        }
        CovariateDesign::Fixed(cols) => {
            for (j, col) in cols.iter().enumerate() {
                if col.len() != n {
                    return Err(Error::Validation(format!(
                        "fixed design column {} has {} rows, expected {}",
                        j + 1,
                        col.len(),
                        n
                    )));
                }
                for (i, v) in col.iter().enumerate() {
                    x[[i, j + 1]] = *v;
                }
            }
        }
    }
    let beta = Array1::from(spec.beta().to_vec());
    let mut y = Array1::zeros(n);
    for i in 0..n {
        let delta = x.row(i).dot(&beta).exp();
        y[i] = match spec {
            ModelSpec::Pareto { lambda, .. } => {
                let u: f64 = rng.gen::<f64>();
                lambda * (1.0 - u).powf(-delta)
            }
            ModelSpec::Lognormal { alpha, sigma0, .. } => {
                let z = alpha + delta + sigma0 * delta * draw_standard_normal(rng);
                z.exp()
            }
            ModelSpec::Cox { baseline, .. } => {
                let u: f64 = rng.gen::<f64>();
                baseline.quantile(1.0 - (1.0 - u).powf(delta))
            }
        };
    }
    Sample::new(y, x)
}

fn draw_standard_normal(rng: &mut ChaCha12Rng) -> f64 {
    // Inverse-CDF sampling keeps the stream layout independent of any
    // rejection method's acceptance path.
    let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    normal_quantile(u).expect("u in (0,1)")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    #[test]
    fn quadratic_maximum() {
        let report = maximize(
            |t| (-(t[0] - 3.0).powi(2), array![-2.0 * (t[0] - 3.0)]),
            &[0.0],
            1e-10,
        )
        .unwrap();
        assert!(report.converged);
        assert_abs_diff_eq!(report.argmax[0], 3.0, epsilon = 1e-8);
        assert_abs_diff_eq!(report.value, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn anisotropic_quadratic_maximum() {
        let report = maximize(
            |t| {
                (
                    -t[0] * t[0] - 10.0 * t[1] * t[1],
                    array![-2.0 * t[0], -20.0 * t[1]],
                )
            },
            &[5.0, 5.0],
            1e-12,
        )
        .unwrap();
        assert!(report.converged);
        assert_abs_diff_eq!(report.argmax[0], 0.0, epsilon = 1e-8);
        assert_abs_diff_eq!(report.argmax[1], 0.0, epsilon = 1e-8);
    }

    #[test]
    fn simpson_polynomials() {
        assert_abs_diff_eq!(
            simpson_integrate(|u| u, 0.0, 1.0, 1e-12),
            0.5,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            simpson_integrate(|u| (1.0 - u).sqrt(), 0.0, 1.0, 1e-10),
            2.0 / 3.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn normal_cdf_quantile_roundtrip() {
        for &p in &[1e-9, 1e-4, 0.01, 0.3, 0.5, 0.7, 0.975, 1.0 - 1e-6] {
            let z = normal_quantile(p).unwrap();
            assert_abs_diff_eq!(normal_cdf(z), p, epsilon = 1e-12);
        }
        // Phi(-1) from tabulated value.
        assert_abs_diff_eq!(normal_cdf(-1.0), 0.15865525393145705, epsilon = 1e-14);
    }

    #[test]
    fn invert_matches_identity() {
        let a = array![[4.0, 1.0, 0.5], [1.0, 3.0, 0.2], [0.5, 0.2, 2.0]];
        let inv = invert(&a).unwrap();
        let prod = a.dot(&inv);
        for i in 0..3 {
            for j in 0..3 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(prod[[i, j]], expect, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn sampler_is_deterministic() {
        let spec = ModelSpec::Pareto {
            lambda: 1.0,
            beta: vec![-0.7, 0.3],
        };
        let design = CovariateDesign::StandardNormal { d: 1 };
        let a = simulate(&spec, &design, 100, 42).unwrap();
        let b = simulate(&spec, &design, 100, 42).unwrap();
        assert_eq!(a, b);
        let c = simulate(&spec, &design, 100, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn pareto_tail_probability() {
        // Delta = 0.5 gives P(Y > y) = y^{-2}.
        let spec = ModelSpec::Pareto {
            lambda: 1.0,
            beta: vec![(0.5f64).ln()],
        };
        let design = CovariateDesign::Fixed(vec![]);
        let n = 100_000;
        let s = simulate(&spec, &design, n, 7).unwrap();
        for &y0 in &[2.0f64, 4.0] {
            let p = y0.powi(-2);
            let count = s.y().iter().filter(|v| **v > y0).count() as f64;
            let sd = (n as f64 * p * (1.0 - p)).sqrt();
            assert!((count - n as f64 * p).abs() < 3.0 * sd);
        }
    }

    #[test]
    fn lognormal_moments() {
        let spec = ModelSpec::Lognormal {
            alpha: 0.0,
            beta: vec![0.0],
            sigma0: 0.5,
        };
        let n = 100_000;
        let s = simulate(&spec, &CovariateDesign::Fixed(vec![]), n, 11).unwrap();
        let z: Vec<f64> = s.y().iter().map(|v| v.ln()).collect();
        let mean = z.iter().sum::<f64>() / n as f64;
        let var = z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
        let se_mean = 0.5 / (n as f64).sqrt();
        assert!((mean - 1.0).abs() < 3.0 * se_mean);
        assert!((var.sqrt() - 0.5).abs() < 3.0 * se_mean);
    }

    #[test]
    fn cox_with_pareto_baseline_matches_pareto_sampler_in_law() {
        // Same law, different streams; compare by two-sample KS distance.
        let n = 10_000;
        let beta = vec![(0.5f64).ln()];
        let a = simulate(
            &ModelSpec::Pareto {
                lambda: 1.0,
                beta: beta.clone(),
            },
            &CovariateDesign::Fixed(vec![]),
            n,
            3,
        )
        .unwrap();
        let b = simulate(
            &ModelSpec::Cox {
                baseline: BaselineSpec::Pareto { lambda: 1.0 },
                beta,
            },
            &CovariateDesign::Fixed(vec![]),
            n,
            4,
        )
        .unwrap();
        let mut ya: Vec<f64> = a.y().to_vec();
        let mut yb: Vec<f64> = b.y().to_vec();
        ya.sort_by(|p, q| p.partial_cmp(q).unwrap());
        yb.sort_by(|p, q| p.partial_cmp(q).unwrap());
        let mut ks = 0.0f64;
        let (mut i, mut j) = (0usize, 0usize);
        while i < n && j < n {
            if ya[i] <= yb[j] {
                i += 1;
            } else {
                j += 1;
            }
            ks = ks.max((i as f64 / n as f64 - j as f64 / n as f64).abs());
        }
        assert!(ks < 0.02, "KS distance {ks}");
    }
}
