//! Serializable report types shared by all commands. The field set is
//! stable: every fit command writes a [`FitReport`], every curve
//! computation writes a `u,L,B,C,D` CSV, and `order-check`/`mc-study`
//! have their own fixed documents.

use serde::{Deserialize, Serialize};

use ineqreg::semiparametric::ModelKind;
use ineqreg::{CurveSet, IndexSet, StepDistribution};

/// Inequality indices evaluated at one covariate vector.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IndicesAt {
    /// Full covariate vector, intercept included.
    pub x: Vec<f64>,
    pub gini: f64,
    pub bonferroni: f64,
    pub c_index: f64,
    pub d_index: f64,
}

impl IndicesAt {
    pub fn new(x: Vec<f64>, idx: IndexSet) -> Self {
        Self {
            x,
            gini: idx.gini,
            bonferroni: idx.bonferroni,
            c_index: idx.c_index,
            d_index: idx.d_index,
        }
    }
}

/// JSON document written by the `curves` command.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurvesReport {
    /// "empirical" or the model of the fit the curves condition on.
    pub source: String,
    pub n: Option<usize>,
    pub grid_points: usize,
    pub indices: Vec<IndicesAt>,
}

/// JSON document written by every `fit-*` command; optional fields are
/// null when they do not apply to the model.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitReport {
    /// One of "pareto", "lognormal", "generalized_pareto", "lehmann".
    pub model: String,
    /// Coefficient vector of the inequality link, intercept first.
    pub coefficients: Vec<f64>,
    /// Standard errors aligned with the report's parameter order:
    /// coefficients for "pareto" and the semiparametric models;
    /// (alpha, coefficients..., sigma0) for "lognormal".
    pub se: Vec<f64>,
    pub loglik: f64,
    pub converged: bool,
    pub iterations: usize,
    pub lambda: Option<f64>,
    pub alpha: Option<f64>,
    pub sigma0: Option<f64>,
    #[serde(default)]
    pub kind: Option<ModelKind>,
    #[serde(default)]
    pub baseline: Option<StepDistribution>,
    #[serde(default)]
    pub jumps: Option<Vec<f64>>,
    pub diagnostic: Option<String>,
    pub warnings: Vec<String>,
    pub indices: Vec<IndicesAt>,
}

/// JSON document written by `order-check`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrderCheckReport {
    /// "star", "e", or "r".
    pub check: String,
    pub holds: bool,
    pub max_violation: f64,
    pub witness_u: f64,
    pub tolerance: f64,
}

/// Per-parameter summary of a Monte Carlo study.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ParameterSummary {
    pub name: String,
    pub truth: f64,
    pub mean_estimate: f64,
    pub bias: f64,
    pub empirical_sd: f64,
    pub mean_se: f64,
    /// Fraction of replications whose 95% normal CI covers the truth.
    pub coverage95: f64,
}

/// JSON document written by `mc-study`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyReport {
    pub model: String,
    pub reps: usize,
    pub n: usize,
    pub seed: u64,
    pub converged_reps: usize,
    pub parameters: Vec<ParameterSummary>,
}

/// Writes a curve set as CSV with columns `u,L,B,C,D`.
pub fn write_curves_csv<W: std::io::Write>(mut w: W, curves: &CurveSet) -> std::io::Result<()> {
    writeln!(w, "u,L,B,C,D")?;
    for i in 0..curves.lorenz.u().len() {
        writeln!(
            w,
            "{},{},{},{},{}",
            curves.lorenz.u()[i],
            curves.lorenz.v()[i],
            curves.bonferroni.v()[i],
            curves.c.v()[i],
            curves.d.v()[i]
        )?;
    }
    Ok(())
}
