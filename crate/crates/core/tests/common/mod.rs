#![allow(dead_code)]

use prodnorm_core::games::{ProverStrategy, VerifierSpec};
use prodnorm_core::limits::Limits;
use prodnorm_core::linalg::{derive_seed, random_matrix, random_unit_vector, random_unitary};
use prodnorm_core::sop::Superoperator;
use prodnorm_core::{Bipartition, ComplexMatrix, C64};

pub fn part(d1: usize, d2: usize) -> Bipartition {
    Bipartition::new(d1, d2).unwrap()
}

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn epr() -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::column(&[c(s), c(0.0), c(0.0), c(s)])
}

/// Unnormalized random superoperator with Gaussian images.
pub fn random_sop(dim_in: usize, p: Bipartition, seed: u64) -> Superoperator {
    let d = p.dim();
    Superoperator::from_fn(dim_in, p, &Limits::default(), |i, j| {
        random_matrix(d, d, derive_seed(seed, (i * dim_in + j) as u64))
    })
    .unwrap()
}

pub fn random_strategy(spec: &VerifierSpec, d_p1: usize, d_p2: usize, seed: u64) -> ProverStrategy {
    let d = spec.dims(d_p1, d_p2);
    let p = d.out_part();
    ProverStrategy {
        d_p1,
        d_p2,
        u1: random_unitary(p.d1, derive_seed(seed, 1)),
        u2: random_unitary(p.d2, derive_seed(seed, 2)),
        psi: ComplexMatrix::column(&random_unit_vector(d.total(), derive_seed(seed, 3))),
    }
}

/// A random unit rank-one matrix `|u><v|` on `p`, returned with its factors.
pub fn random_rank_one(p: Bipartition, seed: u64) -> (ComplexMatrix, ComplexMatrix, ComplexMatrix) {
    let u = ComplexMatrix::column(&random_unit_vector(p.dim(), derive_seed(seed, 1)));
    let v = ComplexMatrix::column(&random_unit_vector(p.dim(), derive_seed(seed, 2)));
    let a = &u * &v.adjoint();
    (a, u, v)
}
