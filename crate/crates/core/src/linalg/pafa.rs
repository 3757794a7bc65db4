use super::lu::lu_partial_pivot;
use super::matrix::{ComplexMatrix, UnitaryMatrix};
use super::permutation::PermutationMatrix;
use crate::error::Result;

/// `target^dagger = P * A1 * F * A2` with `A1`, `A2` upper triangular.
#[derive(Clone, Debug)]
pub struct PafaDecomposition {
    pub p: PermutationMatrix,
    pub a1: ComplexMatrix,
    pub f: PermutationMatrix,
    pub a2: ComplexMatrix,
}

impl PafaDecomposition {
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.p
            .to_matrix()
            .matmul(&self.a1)
            .matmul(&self.f.to_matrix())
            .matmul(&self.a2)
    }
}

/// LU-factor `target^dagger = P L A2`, then conjugate `L` by the index reversal
/// `F` so that `A1 = F L F^{-1}` is upper triangular and `P' = P F^{-1}`.
pub fn pafa_decompose(target: &UnitaryMatrix) -> Result<PafaDecomposition> {
    let n = target.dim();
    let lu = lu_partial_pivot(&target.matrix().adjoint())?;
    let f = PermutationMatrix::reversal(n);
    let fm = f.to_matrix();
    let a1 = fm.matmul(&lu.l).matmul(&fm.adjoint());
    let p = lu.p.compose(&f.inverse());
    Ok(PafaDecomposition { p, a1, f, a2: lu.u })
}
