//! Minimal CSV I/O for tabular attribute/feature data.

use std::path::Path;

use super::{PipelineError, Result};
use crate::estimators::Matrix;

/// Writes a header `s0..s{ds-1},x0..x{dx-1}` and one row per sample.
pub fn write_tabular_csv(path: &Path, s: &Matrix, x: &Matrix) -> Result<()> {
    let mut out = String::new();
    let header: Vec<String> = (0..s.cols())
        .map(|c| format!("s{c}"))
        .chain((0..x.cols()).map(|c| format!("x{c}")))
        .collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for i in 0..s.rows() {
        let row: Vec<String> = s
            .row(i)
            .iter()
            .chain(x.row(i))
            .map(|v| format!("{v}"))
            .collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Loads a tabular CSV whose first `d_s` columns are the attribute and the
/// rest the features. The first line is a header and is skipped. Parse
/// failures carry 1-based row/column coordinates.
pub fn load_tabular_csv(path: &Path, d_s: usize) -> Result<(Matrix, Matrix)> {
    let raw = std::fs::read_to_string(path)?;
    let mut lines = raw.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| PipelineError::Parse {
            row: 1,
            col: 1,
            message: "empty file".into(),
        })?;
    let total_cols = header.split(',').count();
    if d_s == 0 || d_s >= total_cols {
        return Err(PipelineError::Parse {
            row: 1,
            col: 1,
            message: format!("{total_cols} columns cannot split as {d_s} attribute columns"),
        });
    }
    let d_x = total_cols - d_s;
    let mut s_data = Vec::new();
    let mut x_data = Vec::new();
    let mut n = 0;
    for (line_idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != total_cols {
            return Err(PipelineError::Parse {
                row: line_idx + 1,
                col: fields.len(),
                message: format!("expected {total_cols} fields, found {}", fields.len()),
            });
        }
        for (col_idx, field) in fields.iter().enumerate() {
            let value: f64 = field.trim().parse().map_err(|_| PipelineError::Parse {
                row: line_idx + 1,
                col: col_idx + 1,
                message: format!("not a number: {field:?}"),
            })?;
            if col_idx < d_s {
                s_data.push(value);
            } else {
                x_data.push(value);
            }
        }
        n += 1;
    }
    if n == 0 {
        return Err(PipelineError::Parse {
            row: 2,
            col: 1,
            message: "no data rows".into(),
        });
    }
    Ok((Matrix::new(s_data, n, d_s)?, Matrix::new(x_data, n, d_x)?))
}
