//! Dense complex linear algebra used across the crate.

mod haar;
mod lu;
mod matrix;
mod pafa;
mod permutation;
pub mod unitary_json;

pub use haar::{haar_random_unitary, haar_random_unitary_with};
pub use lu::{lu_partial_pivot, LuDecomposition, PIVOT_TOL};
pub use matrix::{
    factor_u2, half_angle, phase_of, wrap_pi, ComplexMatrix, Mat2, UnitaryMatrix, C64, I, ONE,
    UNITARY_TOL, ZERO,
};
pub use pafa::{pafa_decompose, PafaDecomposition};
pub use permutation::{inversion_count, permutation_to_list, PermutationMatrix};
