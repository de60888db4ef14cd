//! CSV ingestion: header row, comma-separated, period decimal.

use std::path::Path;

use ineqreg::Sample;

use crate::{CliError, CliResult};

/// Reads a CSV file into a [`Sample`]: the `response` column becomes y,
/// the `covariates` columns (in the given order) become the design
/// matrix after the implicit intercept column.
pub fn ingest(path: &Path, response: &str, covariates: &[String]) -> CliResult<Sample> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?
        .clone();
    let find = |name: &str| -> CliResult<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::Validation(format!("column '{name}' not found in header")))
    };
    let y_col = find(response)?;
    let x_cols = covariates
        .iter()
        .map(|c| find(c))
        .collect::<CliResult<Vec<_>>>()?;
    if x_cols.contains(&y_col) {
        return Err(CliError::Validation(format!(
            "response column '{response}' also listed as a covariate"
        )));
    }

    let mut y = Vec::new();
    let mut x: Vec<Vec<f64>> = vec![Vec::new(); x_cols.len()];
    for (r, record) in reader.records().enumerate() {
        let row = r + 1; // 1-based data row for messages
        let record = record.map_err(|e| CliError::Validation(format!("row {row}: {e}")))?;
        let parse = |col: usize| -> CliResult<f64> {
            let field = record.get(col).ok_or_else(|| {
                CliError::Validation(format!("row {row}: missing column {}", col + 1))
            })?;
            field.trim().parse::<f64>().map_err(|_| {
                CliError::Validation(format!(
                    "row {row}, column '{}': not a number: '{field}'",
                    &headers[col]
                ))
            })
        };
        y.push(parse(y_col)?);
        for (j, &col) in x_cols.iter().enumerate() {
            x[j].push(parse(col)?);
        }
    }
    if y.is_empty() {
        return Err(CliError::Validation("no data rows".to_string()));
    }
    let bad: Vec<String> = y
        .iter()
        .enumerate()
        .filter(|(_, v)| !(**v > 0.0))
        .map(|(i, _)| (i + 1).to_string())
        .collect();
    if !bad.is_empty() {
        return Err(CliError::Validation(format!(
            "response '{response}' must be positive; offending rows: {}",
            bad.join(", ")
        )));
    }
    Ok(Sample::from_columns(y, x)?)
}
