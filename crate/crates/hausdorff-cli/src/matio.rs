//! Matrix and system ingestion from JSON files.
//!
//! Matrices are arrays of rows of finite numbers; systems are objects with
//! `a` (square) and `b` matrices.

use nalgebra::DMatrix;
use serde::Deserialize;

use crate::CliError;

pub fn parse_matrix_json(text: &str, origin: &str) -> Result<DMatrix<f64>, CliError> {
    let rows: Vec<Vec<f64>> = serde_json::from_str(text)
        .map_err(|e| CliError::usage(format!("{origin}: not a JSON array of rows: {e}")))?;
    matrix_from_rows(rows, origin)
}

pub fn read_matrix_file(path: &str) -> Result<DMatrix<f64>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read matrix file '{path}': {e}")))?;
    parse_matrix_json(&text, path)
}

fn matrix_from_rows(rows: Vec<Vec<f64>>, origin: &str) -> Result<DMatrix<f64>, CliError> {
    if rows.is_empty() || rows[0].is_empty() {
        return Err(CliError::usage(format!("{origin}: matrix must be nonempty")));
    }
    let cols = rows[0].len();
    for (i, row) in rows.iter().enumerate() {
        if row.len() != cols {
            return Err(CliError::usage(format!(
                "{origin}: row {i} has {} entries, expected {cols}",
                row.len()
            )));
        }
        if let Some(bad) = row.iter().find(|v| !v.is_finite()) {
            return Err(CliError::usage(format!(
                "{origin}: row {i} contains a non-finite entry {bad}"
            )));
        }
    }
    let flat: Vec<f64> = rows.into_iter().flatten().collect();
    Ok(DMatrix::from_row_slice(flat.len() / cols, cols, &flat))
}

#[derive(Deserialize)]
struct SystemFile {
    a: Vec<Vec<f64>>,
    b: Vec<Vec<f64>>,
}

/// Read a constant-coefficient system `{ "a": [[..]], "b": [[..]] }`.
pub fn read_system_file(path: &str) -> Result<(DMatrix<f64>, DMatrix<f64>), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read system file '{path}': {e}")))?;
    let sys: SystemFile = serde_json::from_str(&text)
        .map_err(|e| CliError::usage(format!("{path}: not a system object: {e}")))?;
    let a = matrix_from_rows(sys.a, &format!("{path} (a)"))?;
    let b = matrix_from_rows(sys.b, &format!("{path} (b)"))?;
    Ok((a, b))
}
