use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::matrix::{ComplexMatrix, UnitaryMatrix, C64};
use crate::error::{Error, Result};

/// Haar-random unitary of size `dim`, deterministic in `seed`.
pub fn haar_random_unitary(dim: usize, seed: u64) -> Result<UnitaryMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    haar_random_unitary_with(dim, &mut rng)
}

/// QR of a complex Ginibre matrix. Gram-Schmidt leaves `diag(R)` real and
/// positive, which is the phase fix that makes the `Q` factor Haar distributed.
pub fn haar_random_unitary_with<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<UnitaryMatrix> {
    if dim == 0 {
        return Err(Error::InvalidDimension(
            "Haar unitary needs dim >= 1".into(),
        ));
    }
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    // Columns of the Ginibre matrix.
    let mut cols: Vec<Vec<C64>> = (0..dim)
        .map(|_| {
            (0..dim)
                .map(|_| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    C64::new(re, im) * scale
                })
                .collect()
        })
        .collect();

    for j in 0..dim {
        // two passes of modified Gram-Schmidt keep Q orthonormal to machine precision
        for _ in 0..2 {
            for k in 0..j {
                let proj: C64 = cols[k]
                    .iter()
                    .zip(&cols[j])
                    .map(|(q, v)| q.conj() * v)
                    .sum();
                let qk = cols[k].clone();
                for (v, q) in cols[j].iter_mut().zip(&qk) {
                    *v -= proj * q;
                }
            }
        }
        let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::Internal("degenerate Ginibre sample".into()));
        }
        for v in &mut cols[j] {
            *v /= norm;
        }
    }
    let mut q = ComplexMatrix::zeros(dim, dim);
    for (j, col) in cols.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            q[(i, j)] = v;
        }
    }
    UnitaryMatrix::new(q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dim_one_is_a_phase() {
        for seed in 0..5 {
            let u = haar_random_unitary(1, seed).unwrap();
            assert!((u.matrix()[(0, 0)].norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let a = haar_random_unitary(8, 7).unwrap();
        let b = haar_random_unitary(8, 7).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, haar_random_unitary(8, 8).unwrap());
    }

    #[test]
    fn zero_dim_rejected() {
        assert!(matches!(
            haar_random_unitary(0, 1),
            Err(Error::InvalidDimension(_))
        ));
    }

    #[test]
    fn first_moment_matches_haar() {
        // E|U_00|^2 = 1/dim; |U_00|^2 ~ Beta(1, dim-1) has variance (dim-1)/(dim^2 (dim+1)).
        let dim = 20usize;
        let n = 10_000;
        let samples: Vec<f64> = (0..n)
            .map(|s| haar_random_unitary(dim, s as u64).unwrap().matrix()[(0, 0)].norm_sqr())
            .collect();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let d = dim as f64;
        let var = (d - 1.0) / (d * d * (d + 1.0));
        let se = (var / n as f64).sqrt();
        assert!((mean - 1.0 / d).abs() <= 3.0 * se, "mean {mean}, se {se}");
    }
}
