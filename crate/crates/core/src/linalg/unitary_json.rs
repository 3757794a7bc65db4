//! `{"dim": K, "re": [[..]], "im": [[..]]}` matrix files.

use serde::{Deserialize, Serialize};

use super::matrix::{ComplexMatrix, UnitaryMatrix, C64};
use crate::error::{Error, Result};

/// Tolerance applied when reading a unitary from disk.
pub const READ_TOL: f64 = 1e-8;

#[derive(Debug, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &ComplexMatrix) -> Self {
        Self {
            dim: m.rows(),
            re: m.re_parts(),
            im: m.im_parts(),
        }
    }

    pub fn to_square_matrix(&self) -> Result<ComplexMatrix> {
        let shape_ok = self.re.len() == self.dim
            && self.im.len() == self.dim
            && self.re.iter().chain(&self.im).all(|r| r.len() == self.dim);
        if !shape_ok {
            return Err(Error::InvalidDimension(format!(
                "expected {d}x{d} `re` and `im` arrays",
                d = self.dim
            )));
        }
        let rows: Vec<Vec<C64>> = self
            .re
            .iter()
            .zip(&self.im)
            .map(|(r, i)| r.iter().zip(i).map(|(&a, &b)| C64::new(a, b)).collect())
            .collect();
        ComplexMatrix::from_rows(&rows)
    }
}

pub fn to_string(m: &ComplexMatrix) -> String {
    serde_json::to_string_pretty(&MatrixJson::from_matrix(m)).expect("matrix serializes")
}

pub fn parse_matrix(text: &str) -> Result<ComplexMatrix> {
    let j: MatrixJson = serde_json::from_str(text).map_err(|source| Error::Json {
        path: "<matrix>".into(),
        source,
    })?;
    j.to_square_matrix()
}

pub fn parse_unitary(text: &str) -> Result<UnitaryMatrix> {
    UnitaryMatrix::with_tolerance(parse_matrix(text)?, READ_TOL)
}

pub fn read_unitary(path: &std::path::Path) -> Result<UnitaryMatrix> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_unitary(&text).map_err(|e| match e {
        Error::Json { source, .. } => Error::Json {
            path: path.display().to_string(),
            source,
        },
        other => other,
    })
}

pub fn write_matrix(path: &std::path::Path, m: &ComplexMatrix) -> Result<()> {
    std::fs::write(path, to_string(m)).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}
