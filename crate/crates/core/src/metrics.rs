//! Fidelity and similarity of a realized transformation against a target.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, UnitaryMatrix};

/// The trace overlap is divided by `K` so an exact realization scores 1.
pub const FIDELITY_NORMALIZATION: &str = "1/K";

const DEGENERATE: f64 = 1e-300;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonScore {
    pub fidelity: f64,
    pub similarity: f64,
}

fn check_dims(realized: &ComplexMatrix, target: &UnitaryMatrix) -> Result<()> {
    if realized.rows() != target.dim() || realized.cols() != target.dim() {
        return Err(Error::InvalidDimension(format!(
            "realized is {}x{}, target is {}x{}",
            realized.rows(),
            realized.cols(),
            target.dim(),
            target.dim()
        )));
    }
    Ok(())
}

/// `|tr(R U^dagger)|^2 / (K tr(R R^dagger))`.
pub fn fidelity(realized: &ComplexMatrix, target: &UnitaryMatrix) -> Result<f64> {
    check_dims(realized, target)?;
    let u = target.matrix();
    let k = target.dim();
    let mut overlap = crate::linalg::ZERO;
    let mut power = 0.0;
    for i in 0..k {
        for j in 0..k {
            overlap += realized[(i, j)] * u[(i, j)].conj();
            power += realized[(i, j)].norm_sqr();
        }
    }
    if power < DEGENERATE {
        return Err(Error::Degenerate("realized transformation is zero".into()));
    }
    Ok(overlap.norm_sqr() / (k as f64 * power))
}

/// `sum |R_xy| |U_xy| / (|R|_F |U|_F)`.
pub fn similarity(realized: &ComplexMatrix, target: &UnitaryMatrix) -> Result<f64> {
    check_dims(realized, target)?;
    let u = target.matrix();
    let (nr, nu) = (realized.frobenius_norm(), u.frobenius_norm());
    if nr < DEGENERATE || nu < DEGENERATE {
        return Err(Error::Degenerate("zero Frobenius norm".into()));
    }
    let dot: f64 = realized
        .as_slice()
        .iter()
        .zip(u.as_slice())
        .map(|(a, b)| a.norm() * b.norm())
        .sum();
    Ok(dot / (nr * nu))
}

pub fn compare(realized: &ComplexMatrix, target: &UnitaryMatrix) -> Result<ComparisonScore> {
    Ok(ComparisonScore {
        fidelity: fidelity(realized, target)?,
        similarity: similarity(realized, target)?,
    })
}
