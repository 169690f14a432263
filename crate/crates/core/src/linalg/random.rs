//! Seeded random matrices. Every generator is a pure function of its seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::decomp::{from_nalgebra, to_nalgebra};
use super::matrix::{ComplexMatrix, C64};

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for stream `k` of `seed`. Distinct `k` give independent streams.
pub fn derive_seed(seed: u64, k: u64) -> u64 {
    mix(mix(seed) ^ mix(k.wrapping_add(0x632B_E59B_D9B4_E019)))
}

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian_entries(len: usize, seed: u64) -> Vec<C64> {
    let mut r = rng(seed);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    (0..len)
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut r);
            let im: f64 = StandardNormal.sample(&mut r);
            C64::new(re * s, im * s)
        })
        .collect()
}

/// Complex Ginibre matrix: i.i.d. entries with `E|z|^2 = 1`.
pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> ComplexMatrix {
    ComplexMatrix::from_raw(rows, cols, gaussian_entries(rows * cols, seed))
}

pub fn random_unit_vector(dim: usize, seed: u64) -> Vec<C64> {
    let mut v = gaussian_entries(dim, seed);
    let n = super::matrix::vec_norm(&v);
    v.iter_mut().for_each(|z| *z /= n);
    v
}

/// Haar-distributed unitary: QR of a Ginibre matrix with the phases of `diag(R)`
/// moved into `Q`.
pub fn random_unitary(d: usize, seed: u64) -> ComplexMatrix {
    assert!(d >= 1, "random_unitary needs d >= 1");
    let g = to_nalgebra(&random_matrix(d, d, seed));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let mut q = from_nalgebra(&q);
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Orthogonal projector onto a Haar-random `rank`-dimensional subspace of `C^n`.
pub fn random_projector(n: usize, rank: usize, seed: u64) -> ComplexMatrix {
    assert!(rank <= n, "projector rank {rank} exceeds dimension {n}");
    if rank == 0 {
        return ComplexMatrix::zeros(n, n);
    }
    let u = random_unitary(n, seed);
    let cols = ComplexMatrix::from_fn(n, rank, |i, j| u[(i, j)]);
    &cols * &cols.adjoint()
}
