//! Dense complex linear algebra.

pub mod decomp;
pub mod matrix;
pub mod partial;
pub mod random;
pub mod sparse;
pub mod weyl;

pub use decomp::{
    polar_maximizer, schmidt, singular_values, svd, top_singular_triple, SchmidtDecomposition, Svd,
    SCHMIDT_CUTOFF,
};
pub use matrix::{
    inner, kron_vec, permute_vector, subsystem_permutation, vec_norm, Bipartition, ComplexMatrix,
    C64,
};
pub use partial::partial_trace;
pub use sparse::SparseMatrix;
pub use random::{derive_seed, random_matrix, random_projector, random_unit_vector, random_unitary};
pub use weyl::weyl_basis;

/// `a (x) b`; see [`ComplexMatrix::kron`].
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> crate::Result<ComplexMatrix> {
    a.kron(b)
}
