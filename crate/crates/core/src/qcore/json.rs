// Copyright 2026 Metrokit Contributors
// SPDX-License-Identifier: Apache-2.0

//! Matrix JSON: `{"dim": n, "re": [[...]], "im": [[...]]}`, row-major.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, CMat};

/// Wire form of a square complex matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMat) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        let n = m.nrows();
        let re = (0..n).map(|i| (0..n).map(|j| m[(i, j)].re).collect()).collect();
        let im = (0..n).map(|i| (0..n).map(|j| m[(i, j)].im).collect()).collect();
        Ok(Self { dim: n, re, im })
    }

    pub fn to_matrix(&self) -> Result<CMat> {
        let n = self.dim;
        if n == 0 {
            return Err(Error::Serialization("matrix dimension must be positive".into()));
        }
        for rows in [&self.re, &self.im] {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(Error::Serialization(format!("expected {n}x{n} entries")));
            }
        }
        let m = CMat::from_fn(n, n, |i, j| c(self.re[i][j], self.im[i][j]));
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(m)
    }
}

fn write_rows(out: &mut String, rows: &[Vec<f64>]) {
    out.push('[');
    for (i, row) in rows.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push('[');
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push_str(", ");
            }
            // 17 significant digits round-trip every f64.
            out.push_str(&format!("{v:.16e}"));
        }
        out.push(']');
    }
    out.push(']');
}

/// Serializes a square matrix with 17 significant digits per entry.
pub fn matrix_to_json(m: &CMat) -> Result<String> {
    let j = MatrixJson::from_matrix(m)?;
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    let mut out = format!("{{\"dim\": {}, \"re\": ", j.dim);
    write_rows(&mut out, &j.re);
    out.push_str(", \"im\": ");
    write_rows(&mut out, &j.im);
    out.push('}');
    Ok(out)
}

pub fn matrix_from_json(text: &str) -> Result<CMat> {
    let j: MatrixJson = serde_json::from_str(text)?;
    j.to_matrix()
}
