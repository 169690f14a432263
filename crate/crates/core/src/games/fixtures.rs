//! Known entangled strategies for the built-in games, for use with
//! [`chsh_spec`](super::chsh_spec) and [`magic_square_spec`](super::magic_square_spec).
//!
//! Each prover measures its private half of a maximally entangled state in a
//! question-dependent basis and adds the outcome to its (initially zero) answer
//! register: `U = sum_q |q><q| (x) sum_o Shift^o (x) Pi^q_o`.

use super::classical::{chsh_game, magic_square_game};
use super::ProverStrategy;
use crate::linalg::{ComplexMatrix, C64};

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// `sum_q |q><q| (x) sum_o shift(o) (x) proj[q][o]` on `Q (x) A (x) P`.
fn measure_and_record(proj: &[Vec<ComplexMatrix>], shift: impl Fn(usize) -> ComplexMatrix) -> ComplexMatrix {
    let nq = proj.len();
    let na = proj[0].len();
    let dp = proj[0][0].rows();
    let mut u = ComplexMatrix::zeros(nq * na * dp, nq * na * dp);
    for (q, outcomes) in proj.iter().enumerate() {
        let sel = ComplexMatrix::from_fn(nq, nq, |i, j| if i == q && j == q { c(1.0) } else { c(0.0) });
        for (o, p) in outcomes.iter().enumerate() {
            let term = sel.kron(&shift(o)).expect("small").kron(p).expect("small");
            u = &u + &term;
        }
    }
    u
}

/// `|0>_{V M1 M2} (x) sum_k |k, k> / sqrt(dp)`.
fn entangled_start(n: usize, dp: usize) -> ComplexMatrix {
    let mut psi = vec![c(0.0); n * dp * dp];
    let amp = 1.0 / (dp as f64).sqrt();
    for k in 0..dp {
        psi[k * dp + k] = c(amp);
    }
    ComplexMatrix::column(&psi)
}

/// Rotated-basis CHSH strategy on one shared EPR pair; value `cos^2(pi/8)`.
///
/// Alice measures at angles `0` and `pi/4`, Bob at `pi/8` and `-pi/8`.
pub fn chsh_quantum_strategy() -> ProverStrategy {
    use std::f64::consts::PI;
    let projectors = |angles: [f64; 2]| -> Vec<Vec<ComplexMatrix>> {
        angles
            .iter()
            .map(|&t| {
                let (s, co) = t.sin_cos();
                let e0 = [c(co), c(s)];
                let e1 = [c(-s), c(co)];
                vec![ComplexMatrix::outer(&e0, &e0), ComplexMatrix::outer(&e1, &e1)]
            })
            .collect()
    };
    let flip = |o: usize| {
        if o == 0 {
            ComplexMatrix::identity(2)
        } else {
            ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).expect("2x2")
        }
    };
    let g = chsh_game();
    let n = (g.n_x * g.n_y * 2) * (g.n_x * g.n_a) * (g.n_y * g.n_b);
    ProverStrategy {
        d_p1: 2,
        d_p2: 2,
        u1: measure_and_record(&projectors([0.0, PI / 4.0]), flip),
        u2: measure_and_record(&projectors([PI / 8.0, -PI / 8.0]), flip),
        psi: entangled_start(n, 2),
    }
}

fn pauli(k: usize) -> ComplexMatrix {
    let z = c(0.0);
    let one = c(1.0);
    let i = C64::new(0.0, 1.0);
    let data = match k {
        0 => vec![one, z, z, one],
        1 => vec![z, one, one, z],
        2 => vec![z, -i, i, z],
        _ => vec![one, z, z, -one],
    };
    ComplexMatrix::new(2, 2, data).expect("2x2")
}

/// Two-qubit observables of the square; rows multiply to `+I`, columns to `-I`.
fn square() -> [[ComplexMatrix; 3]; 3] {
    let (i, x, y, z) = (0, 1, 2, 3);
    let p = |a: usize, b: usize, s: f64| pauli(a).kron(&pauli(b)).expect("4x4").scale_real(s);
    [
        [p(i, z, 1.0), p(z, i, 1.0), p(z, z, 1.0)],
        [p(x, i, 1.0), p(i, x, 1.0), p(x, x, 1.0)],
        [p(x, z, -1.0), p(z, x, -1.0), p(y, y, 1.0)],
    ]
}

/// `(I + (-1)^o0 A)(I + (-1)^o1 B) / 4` for the answer `o = o0 + 2 o1`.
fn joint_projectors(a: &ComplexMatrix, b: &ComplexMatrix) -> Vec<ComplexMatrix> {
    let id = ComplexMatrix::identity(4);
    (0..4)
        .map(|o| {
            let sa = if o & 1 == 0 { 1.0 } else { -1.0 };
            let sb = if o >> 1 == 0 { 1.0 } else { -1.0 };
            let pa = (&id + &a.scale_real(sa)).scale_real(0.5);
            let pb = (&id + &b.scale_real(sb)).scale_real(0.5);
            &pa * &pb
        })
        .collect()
}

/// Perfect Magic Square strategy on two shared EPR pairs (`dP1 = dP2 = 4`).
///
/// Alice, given row `r`, measures the first two observables of that row; Bob,
/// given column `c`, the first two of that column. The third entries follow
/// from the parity constraints. Every observable used is invariant under
/// transposition, so both sides obtain identical outcomes on the shared cell.
pub fn magic_square_quantum_strategy() -> ProverStrategy {
    let sq = square();
    let alice: Vec<Vec<ComplexMatrix>> = (0..3).map(|r| joint_projectors(&sq[r][0], &sq[r][1])).collect();
    let bob: Vec<Vec<ComplexMatrix>> = (0..3).map(|col| joint_projectors(&sq[0][col], &sq[1][col])).collect();
    let xor = |o: usize| ComplexMatrix::from_fn(4, 4, |i, j| if i == (j ^ o) { c(1.0) } else { c(0.0) });
    let g = magic_square_game();
    let n = (g.n_x * g.n_y * 2) * (g.n_x * g.n_a) * (g.n_y * g.n_b);
    ProverStrategy {
        d_p1: 4,
        d_p2: 4,
        u1: measure_and_record(&alice, xor),
        u2: measure_and_record(&bob, xor),
        psi: entangled_start(n, 4),
    }
}
