use serde::{Deserialize, Serialize};

use super::matrix::{ComplexMatrix, ONE};
use crate::error::{Error, Result};

/// Permutation matrix stored as its image list: row `j` has its 1 in column `image[j]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct PermutationMatrix {
    image: Vec<usize>,
}

impl PermutationMatrix {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; image.len()];
        for &f in &image {
            if f >= image.len() || std::mem::replace(&mut seen[f], true) {
                return Err(Error::InvalidArgument(format!(
                    "{image:?} is not a permutation of 0..{}",
                    image.len()
                )));
            }
        }
        Ok(Self { image })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            image: (0..n).collect(),
        }
    }

    /// The anti-diagonal permutation, image `(n-1, ..., 1, 0)`.
    pub fn reversal(n: usize) -> Self {
        Self {
            image: (0..n).rev().collect(),
        }
    }

    /// Cyclic shift with image `(1, 2, ..., n-1, 0)`.
    pub fn cyclic(n: usize) -> Self {
        Self {
            image: (0..n).map(|j| (j + 1) % n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn to_matrix(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.len(), self.len());
        for (j, &f) in self.image.iter().enumerate() {
            m[(j, f)] = ONE;
        }
        m
    }

    /// Read a 0/1 matrix back into a permutation.
    pub fn from_matrix(m: &ComplexMatrix, tol: f64) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidDimension("permutation must be square".into()));
        }
        let mut image = Vec::with_capacity(m.rows());
        for i in 0..m.rows() {
            let ones: Vec<usize> = (0..m.cols())
                .filter(|&j| (m[(i, j)] - ONE).norm() <= tol)
                .collect();
            let rest_zero = (0..m.cols())
                .filter(|j| !ones.contains(j))
                .all(|j| m[(i, j)].norm() <= tol);
            if ones.len() != 1 || !rest_zero {
                return Err(Error::InvalidArgument(format!("row {i} is not a unit row")));
            }
            image.push(ones[0]);
        }
        Self::new(image)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.len()];
        for (j, &f) in self.image.iter().enumerate() {
            inv[f] = j;
        }
        Self { image: inv }
    }

    /// Matrix product `self * other`.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            image: self.image.iter().map(|&f| other.image[f]).collect(),
        }
    }

    pub fn inversions(&self) -> usize {
        inversion_count(&self.image)
    }
}

impl TryFrom<Vec<usize>> for PermutationMatrix {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<PermutationMatrix> for Vec<usize> {
    fn from(p: PermutationMatrix) -> Vec<usize> {
        p.image
    }
}

/// The list `f` with `F[j][f_j] = 1`.
pub fn permutation_to_list(p: &PermutationMatrix) -> Vec<usize> {
    p.image.clone()
}

pub fn inversion_count(list: &[usize]) -> usize {
    let mut n = 0;
    for i in 0..list.len() {
        for j in i + 1..list.len() {
            if list[i] > list[j] {
                n += 1;
            }
        }
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn list_examples() {
        assert_eq!(
            permutation_to_list(&PermutationMatrix::identity(4)),
            vec![0, 1, 2, 3]
        );
        assert_eq!(
            permutation_to_list(&PermutationMatrix::reversal(3)),
            vec![2, 1, 0]
        );
        assert_eq!(
            permutation_to_list(&PermutationMatrix::cyclic(4)),
            vec![1, 2, 3, 0]
        );
    }

    #[test]
    fn cyclic_read_from_matrix() {
        // ones at (0,1), (1,2), (2,3), (3,0)
        let mut m = ComplexMatrix::zeros(4, 4);
        for (r, c) in [(0, 1), (1, 2), (2, 3), (3, 0)] {
            m[(r, c)] = ONE;
        }
        let p = PermutationMatrix::from_matrix(&m, 1e-12).unwrap();
        assert_eq!(permutation_to_list(&p), vec![1, 2, 3, 0]);
    }

    fn all_perms(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in all_perms(n - 1) {
            for pos in 0..n {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                out.push(q);
            }
        }
        out
    }

    #[test]
    fn list_matrix_roundtrip_exhaustive() {
        for n in 0..=5 {
            for img in all_perms(n) {
                let p = PermutationMatrix::new(img.clone()).unwrap();
                let back = PermutationMatrix::from_matrix(&p.to_matrix(), 1e-12).unwrap();
                assert_eq!(permutation_to_list(&back), img);
            }
        }
    }

    #[test]
    fn rejects_non_bijection() {
        assert!(PermutationMatrix::new(vec![0, 0, 1]).is_err());
        assert!(PermutationMatrix::new(vec![0, 3]).is_err());
    }

    #[test]
    fn compose_matches_matrix_product() {
        let a = PermutationMatrix::new(vec![2, 0, 1, 3]).unwrap();
        let b = PermutationMatrix::cyclic(4);
        let prod = a.to_matrix().matmul(&b.to_matrix());
        assert_eq!(a.compose(&b).to_matrix(), prod);
        assert_eq!(a.inverse().to_matrix(), a.to_matrix().adjoint());
    }

    proptest::proptest! {
        #[test]
        fn roundtrip_up_to_eight(seed in 0u64..10_000, n in 0usize..=8) {
            use rand::{seq::SliceRandom, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut img: Vec<usize> = (0..n).collect();
            img.shuffle(&mut rng);
            let p = PermutationMatrix::new(img.clone()).unwrap();
            let back = PermutationMatrix::from_matrix(&p.to_matrix(), 1e-12).unwrap();
            proptest::prop_assert_eq!(permutation_to_list(&back), img);
        }
    }
}
