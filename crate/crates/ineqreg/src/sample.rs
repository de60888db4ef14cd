//! Response/covariate data consumed by all estimators.

use ndarray::{Array1, Array2};

use crate::{Error, Result};

/// Positive responses paired with covariate rows.
///
/// The covariate matrix always carries the intercept as its first
/// column, so a model with `d` substantive covariates has `d + 1`
/// columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    y: Array1<f64>,
    x: Array2<f64>,
}

impl Sample {
    pub fn new(y: Array1<f64>, x: Array2<f64>) -> Result<Self> {
        if y.is_empty() {
            return Err(Error::Validation("no data rows".to_string()));
        }
        if x.nrows() != y.len() {
            return Err(Error::Validation(format!(
                "covariate rows ({}) do not match responses ({})",
                x.nrows(),
                y.len()
            )));
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite() || *v <= 0.0) {
            return Err(Error::Validation(format!(
                "response must be finite and > 0; offending row {}",
                i + 1
            )));
        }
        if x.column(0).iter().any(|v| *v != 1.0) {
            return Err(Error::Validation(
                "first covariate column must be the intercept (all ones)".to_string(),
            ));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("covariates must be finite".to_string()));
        }
        Ok(Self { y, x })
    }

    /// Builds the sample from raw columns, prepending the intercept.
    pub fn from_columns(y: Vec<f64>, covariates: Vec<Vec<f64>>) -> Result<Self> {
        let n = y.len();
        for (j, col) in covariates.iter().enumerate() {
            if col.len() != n {
                return Err(Error::Validation(format!(
                    "covariate column {} has {} rows, expected {}",
                    j + 1,
                    col.len(),
                    n
                )));
            }
        }
        let d = covariates.len();
        let mut x = Array2::<f64>::ones((n, d + 1));
        for (j, col) in covariates.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                x[[i, j + 1]] = *v;
            }
        }
        Self::new(Array1::from(y), x)
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    /// Number of covariate columns including the intercept.
    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    pub fn y(&self) -> &Array1<f64> {
        &self.y
    }

    pub fn x(&self) -> &Array2<f64> {
        &self.x
    }

    /// Indices that sort the responses ascending; errors on ties.
    pub fn ascending_order(&self) -> Result<Vec<usize>> {
        let mut idx: Vec<usize> = (0..self.n()).collect();
        idx.sort_by(|&a, &b| self.y[a].partial_cmp(&self.y[b]).unwrap());
        for w in idx.windows(2) {
            if self.y[w[0]] == self.y[w[1]] {
                return Err(Error::Validation(format!(
                    "ties unsupported: response value {} appears more than once",
                    self.y[w[0]]
                )));
            }
        }
        Ok(idx)
    }

    /// Returns a copy with every response multiplied by `a > 0`.
    pub fn scaled(&self, a: f64) -> Result<Self> {
        if !(a > 0.0) {
            return Err(Error::Validation("scale factor must be > 0".to_string()));
        }
        Self::new(self.y.mapv(|v| a * v), self.x.clone())
    }
}
