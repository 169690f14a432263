//! Trace norm and the bipartite product norm
//! `||A||_{V1 (x) V2} = max_{U1, U2} |Tr((U1 (x) U2) A)|`.
//!
//! For rank-one `A = |u><v|` the product norm is exactly `sum_i a_i b_i`, the
//! inner product of the descending Schmidt coefficients of `u` and `v`. For
//! general `A` only certified lower bounds are available: [`product_norm_lb`]
//! alternates exact maximizations over `U1` and `U2`, and
//! [`sandwich_bounds`] gives `||Tr_{V2} A||_1 <= ||A|| <= ||A||_1`.

use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Error, Result};
use crate::linalg::decomp::schmidt_slice;
use crate::linalg::{
    partial_trace, polar_maximizer, random_unitary, singular_values, weyl_basis, Bipartition,
    ComplexMatrix, C64,
};
use crate::seesaw::{best_of, has_converged, SeesawOptions};

/// Sum of singular values.
pub fn trace_norm(a: &ComplexMatrix) -> Result<f64> {
    a.require_square("trace norm input")?;
    Ok(singular_values(a)?.iter().sum())
}

/// A lower-bound witness for the product norm of one matrix.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ProductNormCertificate {
    pub value: f64,
    pub u1: ComplexMatrix,
    pub u2: ComplexMatrix,
    pub iterations: usize,
    pub restart_index: usize,
    pub converged: bool,
}

impl ProductNormCertificate {
    /// Re-evaluates `|Tr((u1 (x) u2) a)|` for the matrix this certificate claims.
    pub fn evaluate(&self, a: &ComplexMatrix) -> Result<f64> {
        let part = Bipartition::new(self.u1.rows(), self.u2.rows())?;
        Ok(product_objective(a, part, &self.u1, &self.u2)?.norm())
    }
}

/// One restart's certificate plus the objective after every half-step.
#[derive(Clone, Debug)]
pub struct SeesawTrace {
    pub certificate: ProductNormCertificate,
    /// `objective[0]` is the starting value; each later entry follows one
    /// `U1` or `U2` update.
    pub objective: Vec<f64>,
}

fn check_operand(a: &ComplexMatrix, part: Bipartition) -> Result<()> {
    let n = a.require_square("product norm input")?;
    part.check(n)
}

fn check_local(u: &ComplexMatrix, d: usize, which: &str) -> Result<()> {
    if u.shape() != (d, d) {
        return Err(dim_err!("{which} must be {d}x{d}, got {}x{}", u.rows(), u.cols()));
    }
    Ok(())
}

/// `Tr((u1 (x) u2) a)` in `O(dim^2)` without forming the Kronecker product.
pub fn product_objective(
    a: &ComplexMatrix,
    part: Bipartition,
    u1: &ComplexMatrix,
    u2: &ComplexMatrix,
) -> Result<C64> {
    check_operand(a, part)?;
    check_local(u1, part.d1, "u1")?;
    check_local(u2, part.d2, "u2")?;
    let x1 = reduce_keep_first(a, part, u2);
    Ok(u1.trace_of_product(&x1))
}

/// `Tr_{V2}((I (x) u2) a)`, so that `Tr((u1 (x) u2) a) = Tr(u1 X)`.
pub(crate) fn reduce_keep_first(a: &ComplexMatrix, part: Bipartition, u2: &ComplexMatrix) -> ComplexMatrix {
    let (d1, d2) = (part.d1, part.d2);
    let n = d1 * d2;
    let data = a.data();
    let mut x = ComplexMatrix::zeros(d1, d1);
    for ip in 0..d1 {
        for i in 0..d1 {
            let mut acc = C64::new(0.0, 0.0);
            for kp in 0..d2 {
                let row = &data[(ip * d2 + kp) * n + i * d2..(ip * d2 + kp) * n + i * d2 + d2];
                for (k, &val) in row.iter().enumerate() {
                    acc += u2[(k, kp)] * val;
                }
            }
            x[(ip, i)] = acc;
        }
    }
    x
}

/// `Tr_{V1}((u1 (x) I) a)`, so that `Tr((u1 (x) u2) a) = Tr(u2 X)`.
pub(crate) fn reduce_keep_second(a: &ComplexMatrix, part: Bipartition, u1: &ComplexMatrix) -> ComplexMatrix {
    let (d1, d2) = (part.d1, part.d2);
    let n = d1 * d2;
    let data = a.data();
    let mut x = ComplexMatrix::zeros(d2, d2);
    for ip in 0..d1 {
        for i in 0..d1 {
            let w = u1[(i, ip)];
            if w.norm_sqr() == 0.0 {
                continue;
            }
            for kp in 0..d2 {
                let row = &data[(ip * d2 + kp) * n + i * d2..(ip * d2 + kp) * n + i * d2 + d2];
                for (k, &val) in row.iter().enumerate() {
                    x[(kp, k)] += w * val;
                }
            }
        }
    }
    x
}

/// One full alternation: optimal `U1` for the current `U2`, then optimal `U2`.
/// Returns the new unitaries and the objective after each half-step.
pub(crate) fn sweep(
    a: &ComplexMatrix,
    part: Bipartition,
    u2: &ComplexMatrix,
) -> Result<(ComplexMatrix, ComplexMatrix, f64, f64)> {
    let (u1, after_first) = polar_maximizer(&reduce_keep_first(a, part, u2))?;
    let (u2, after_second) = polar_maximizer(&reduce_keep_second(a, part, &u1))?;
    Ok((u1, u2, after_first, after_second))
}

/// Rotates `u1` by a global phase so that `Tr((u1 (x) u2) a)` is real and non-negative.
pub(crate) fn absorb_phase(u1: &ComplexMatrix, t: C64) -> ComplexMatrix {
    if t.norm() > 0.0 {
        u1.scale(t.conj() / t.norm())
    } else {
        u1.clone()
    }
}

/// Runs the alternating maximization from a given start, recording every half-step.
pub fn product_norm_seesaw(
    a: &ComplexMatrix,
    part: Bipartition,
    u1: ComplexMatrix,
    u2: ComplexMatrix,
    max_iters: usize,
    tol: f64,
) -> Result<SeesawTrace> {
    check_operand(a, part)?;
    check_local(&u1, part.d1, "u1")?;
    check_local(&u2, part.d2, "u2")?;
    let start = product_objective(a, part, &u1, &u2)?.norm();
    let mut objective = vec![start];
    if a.frobenius_norm() == 0.0 {
        let certificate = ProductNormCertificate {
            value: 0.0,
            u1: ComplexMatrix::identity(part.d1),
            u2: ComplexMatrix::identity(part.d2),
            iterations: 0,
            restart_index: 0,
            converged: true,
        };
        return Ok(SeesawTrace { certificate, objective });
    }

    let (mut u1, mut u2) = (u1, u2);
    let mut prev = start;
    let mut converged = false;
    let mut iterations = 0;
    for _ in 0..max_iters {
        iterations += 1;
        let (n1, n2, half, full) = sweep(a, part, &u2)?;
        u1 = n1;
        u2 = n2;
        objective.push(half);
        objective.push(full);
        if has_converged(prev, full, tol) {
            converged = true;
            break;
        }
        prev = full;
    }
    let t = product_objective(a, part, &u1, &u2)?;
    let certificate = ProductNormCertificate {
        value: t.norm(),
        u1: absorb_phase(&u1, t),
        u2,
        iterations,
        restart_index: 0,
        converged,
    };
    Ok(SeesawTrace { certificate, objective })
}

/// Starting unitaries for restart `k`: identities for `k = 0`, Haar-random otherwise.
pub(crate) fn restart_unitaries(
    d1: usize,
    d2: usize,
    opts: &SeesawOptions,
    k: usize,
) -> (ComplexMatrix, ComplexMatrix) {
    if k == 0 {
        return (ComplexMatrix::identity(d1), ComplexMatrix::identity(d2));
    }
    let s = opts.restart_seed(k);
    (
        random_unitary(d1, crate::linalg::derive_seed(s, 1)),
        random_unitary(d2, crate::linalg::derive_seed(s, 2)),
    )
}

/// Best certified lower bound on the product norm over `opts.restarts` seesaw runs.
pub fn product_norm_lb(
    a: &ComplexMatrix,
    part: Bipartition,
    opts: &SeesawOptions,
) -> Result<ProductNormCertificate> {
    opts.validate()?;
    check_operand(a, part)?;
    best_of(
        opts.restarts,
        |k| {
            let (u1, u2) = restart_unitaries(part.d1, part.d2, opts, k);
            let mut cert = product_norm_seesaw(a, part, u1, u2, opts.max_iters, opts.tol)?.certificate;
            cert.restart_index = k;
            Ok(cert)
        },
        |c| c.value,
    )
}

/// Exact product norm of `|u><v|` from Schmidt coefficients: `sum_i a_i b_i`.
///
/// For non-unit vectors the result scales with `||u|| * ||v||`.
pub fn product_norm_rank1(u: &ComplexMatrix, v: &ComplexMatrix, part: Bipartition) -> Result<f64> {
    for (name, x) in [("u", u), ("v", v)] {
        if x.cols() != 1 {
            return Err(dim_err!("{name} must be a column vector, got {}x{}", x.rows(), x.cols()));
        }
    }
    rank1_from_slices(u.data(), v.data(), part)
}

pub(crate) fn rank1_from_slices(u: &[C64], v: &[C64], part: Bipartition) -> Result<f64> {
    let a = schmidt_slice(u, part)?;
    let b = schmidt_slice(v, part)?;
    Ok(a.full_coefficients()
        .iter()
        .zip(b.full_coefficients())
        .map(|(x, y)| x * y)
        .sum())
}

/// `(||Tr_{V2} A||_1, ||A||_1)`, which bracket the product norm.
pub fn sandwich_bounds(a: &ComplexMatrix, part: Bipartition) -> Result<(f64, f64)> {
    check_operand(a, part)?;
    let reduced = partial_trace(a, &[part.d1, part.d2], &[1])?;
    Ok((trace_norm(&reduced)?, trace_norm(a)?))
}

/// `(||BC||_1, sum_i s_i(B) s_i(C))` with both singular value lists descending.
pub fn hj_product_bound(b: &ComplexMatrix, c: &ComplexMatrix) -> Result<(f64, f64)> {
    let n = b.require_square("b")?;
    let m = c.require_square("c")?;
    if n != m {
        return Err(dim_err!("b is {n}x{n} but c is {m}x{m}"));
    }
    let lhs = trace_norm(&b.matmul(c)?)?;
    let sb = singular_values(b)?;
    let sc = singular_values(c)?;
    let rhs = sb.iter().zip(&sc).map(|(x, y)| x * y).sum();
    Ok((lhs, rhs))
}

/// Largest `|Tr((W_i (x) V_j) A)|` over products of clock-and-shift unitaries.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PositivityWitness {
    pub value: f64,
    /// Indices `(i, j)` into `weyl_basis(d1)` and `weyl_basis(d2)`.
    pub element: (usize, usize),
    /// Set when the input was the zero matrix and the value is 0 by convention.
    pub zero_input: bool,
}

/// The product Weyl basis spans all operators, so some product unitary has
/// nonzero overlap with any `A != 0`. This finds the best one exhaustively.
pub fn product_norm_positivity_witness(a: &ComplexMatrix, part: Bipartition) -> Result<PositivityWitness> {
    check_operand(a, part)?;
    if a.frobenius_norm() == 0.0 {
        return Ok(PositivityWitness { value: 0.0, element: (0, 0), zero_input: true });
    }
    let w1 = weyl_basis(part.d1);
    let w2 = weyl_basis(part.d2);
    let mut best = PositivityWitness { value: -1.0, element: (0, 0), zero_input: false };
    for (i, w) in w1.iter().enumerate() {
        let reduced = reduce_keep_second(a, part, w);
        for (j, v) in w2.iter().enumerate() {
            let value = v.trace_of_product(&reduced).norm();
            if value > best.value + 1e-15 {
                best = PositivityWitness { value, element: (i, j), zero_input: false };
            }
        }
    }
    if best.value <= 0.0 {
        return Err(Error::Validation("nonzero matrix has no overlap with the product basis".into()));
    }
    Ok(best)
}
