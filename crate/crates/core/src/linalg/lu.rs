use super::matrix::{ComplexMatrix, ONE, ZERO};
use super::permutation::PermutationMatrix;
use crate::error::{Error, Result};

/// Pivots below this magnitude are treated as zero.
pub const PIVOT_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct LuDecomposition {
    pub p: PermutationMatrix,
    /// Unit lower-triangular factor.
    pub l: ComplexMatrix,
    /// Upper-triangular factor.
    pub u: ComplexMatrix,
}

impl LuDecomposition {
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.p.to_matrix().matmul(&self.l).matmul(&self.u)
    }
}

/// Factor `m = P * L * U` with row pivoting by maximum magnitude.
pub fn lu_partial_pivot(m: &ComplexMatrix) -> Result<LuDecomposition> {
    if !m.is_square() {
        return Err(Error::InvalidDimension(format!(
            "LU needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let n = m.rows();
    let mut a = m.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut l = ComplexMatrix::identity(n);

    for k in 0..n {
        let (p, mag) = (k..n)
            .map(|i| (i, a[(i, k)].norm()))
            .fold(
                (k, -1.0),
                |best, cur| if cur.1 > best.1 { cur } else { best },
            );
        if mag < PIVOT_TOL {
            return Err(Error::SingularMatrix {
                column: k,
                magnitude: mag,
            });
        }
        if p != k {
            a.swap_rows(p, k);
            perm.swap(p, k);
            for j in 0..k {
                let t = l[(p, j)];
                l[(p, j)] = l[(k, j)];
                l[(k, j)] = t;
            }
        }
        let pivot = a[(k, k)];
        for i in k + 1..n {
            let factor = a[(i, k)] / pivot;
            l[(i, k)] = factor;
            a[(i, k)] = ZERO;
            for j in k + 1..n {
                let v = a[(k, j)];
                a[(i, j)] -= factor * v;
            }
        }
    }
    for i in 0..n {
        l[(i, i)] = ONE;
    }
    // perm[i] is the source row of row i, so P_rows * m = L U and m = P_rows^T L U.
    let p_rows = PermutationMatrix::new(perm)?;
    Ok(LuDecomposition {
        p: p_rows.inverse(),
        l,
        u: a,
    })
}
