use std::f64::consts::TAU;

use super::matrix::{ComplexMatrix, C64};

/// The `d^2` clock-and-shift unitaries `X^a Z^b`, indexed `a * d + b`.
///
/// `X|j> = |j+1 mod d>` and `Z|j> = w^j |j>` with `w = exp(2 pi i / d)`.
/// They are orthogonal under the Hilbert-Schmidt inner product, with Gram matrix `d * I`.
pub fn weyl_basis(d: usize) -> Vec<ComplexMatrix> {
    assert!(d >= 1, "weyl_basis needs d >= 1");
    let mut out = Vec::with_capacity(d * d);
    for a in 0..d {
        for b in 0..d {
            let mut m = ComplexMatrix::zeros(d, d);
            for j in 0..d {
                let phase = TAU * ((b * j) % d) as f64 / d as f64;
                m[((j + a) % d, j)] = C64::from_polar(1.0, phase);
            }
            out.push(m);
        }
    }
    out
}
