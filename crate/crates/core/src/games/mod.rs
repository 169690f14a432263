//! Two-prover one-round quantum interactive proofs.
//!
//! Registers are ordered `V (x) M1 (x) M2 (x) P1 (x) P2` everywhere: the
//! verifier's private space, the two message registers and the provers' private
//! spaces. The verifier applies `B1 = V1 Pi_init`, the provers apply `U1` on
//! `M1 (x) P1` and `U2` on `M2 (x) P2`, and the verifier finishes with
//! `B2 = Pi_acc V2`. The acceptance probability is
//! `||(B2 (x) I)(I (x) U1 (x) U2)(B1 (x) I)|psi>||^2`.
//!
//! The optimum over strategies equals the squared superoperator product norm
//! of `T (x) I_{P1 (x) P2}` with `T(X) = Tr_V(B1 X B2)`; [`game_sop`] builds `T`
//! explicitly and [`GameMap`] provides the extended map without materialising it.

mod classical;
mod engine;
mod fixtures;

pub use classical::{
    chsh_game, chsh_spec, classical_strategy, classical_value, classical_value_with_budget,
    compile_game, magic_square_game, magic_square_spec, ClassicalGame, CLASSICAL_BUDGET,
};
pub use engine::{map_lb, map_lb_with, map_seesaw, norm_consistency, GameMap, NormConsistency};
pub use fixtures::{chsh_quantum_strategy, magic_square_quantum_strategy};

use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Error, Result};
use crate::limits::Limits;
use crate::linalg::{
    derive_seed, random_projector, random_unitary, svd, vec_norm, Bipartition, ComplexMatrix,
    SparseMatrix, C64,
};
use crate::sop::Superoperator;

const UNITARY_TOL: f64 = 1e-10;
const CONTRACTION_TOL: f64 = 1e-10;

/// Register dimensions of a verifier together with a pair of prover spaces.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GameDims {
    pub d_v: usize,
    pub d_m1: usize,
    pub d_m2: usize,
    pub d_p1: usize,
    pub d_p2: usize,
}

impl GameDims {
    /// Dimension of `V (x) M1 (x) M2`.
    pub fn n(&self) -> usize {
        self.d_v * self.d_m1 * self.d_m2
    }

    /// Dimension of `P1 (x) P2`.
    pub fn p(&self) -> usize {
        self.d_p1 * self.d_p2
    }

    pub fn total(&self) -> usize {
        self.n() * self.p()
    }

    /// Output split `(M1 (x) P1, M2 (x) P2)` of the extended game map.
    pub fn out_part(&self) -> Bipartition {
        Bipartition { d1: self.d_m1 * self.d_p1, d2: self.d_m2 * self.d_p2 }
    }

    pub fn index(&self, v: usize, m1: usize, m2: usize, p1: usize, p2: usize) -> usize {
        (((v * self.d_m1 + m1) * self.d_m2 + m2) * self.d_p1 + p1) * self.d_p2 + p2
    }

    /// Groups of global indices on which a prover unitary acts as one block.
    pub(crate) fn layout(&self, side: Side) -> Layout {
        let p = self.p();
        let mut bases = Vec::new();
        let mut offsets = Vec::new();
        match side {
            Side::First => {
                for v in 0..self.d_v {
                    for m2 in 0..self.d_m2 {
                        for p2 in 0..self.d_p2 {
                            bases.push(self.index(v, 0, m2, 0, p2));
                        }
                    }
                }
                for m1 in 0..self.d_m1 {
                    for p1 in 0..self.d_p1 {
                        offsets.push(m1 * self.d_m2 * p + p1 * self.d_p2);
                    }
                }
            }
            Side::Second => {
                for v in 0..self.d_v {
                    for m1 in 0..self.d_m1 {
                        for p1 in 0..self.d_p1 {
                            bases.push(self.index(v, m1, 0, p1, 0));
                        }
                    }
                }
                for m2 in 0..self.d_m2 {
                    for p2 in 0..self.d_p2 {
                        offsets.push(m2 * p + p2);
                    }
                }
            }
            Side::Both => {
                for v in 0..self.d_v {
                    bases.push(self.index(v, 0, 0, 0, 0));
                }
                for m1 in 0..self.d_m1 {
                    for p1 in 0..self.d_p1 {
                        for m2 in 0..self.d_m2 {
                            for p2 in 0..self.d_p2 {
                                offsets.push(self.index(0, m1, m2, p1, p2));
                            }
                        }
                    }
                }
            }
        }
        Layout { bases, offsets }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Side {
    /// `M1 (x) P1`.
    First,
    /// `M2 (x) P2`.
    Second,
    /// `(M1 (x) P1) (x) (M2 (x) P2)`.
    Both,
}

/// Index groups `base + offsets[k]`; every global index lies in exactly one group.
#[derive(Clone, Debug)]
pub(crate) struct Layout {
    bases: Vec<usize>,
    offsets: Vec<usize>,
}

impl Layout {
    fn gather(&self, x: &[C64], base: usize, into: &mut [C64]) -> bool {
        let mut any = false;
        for (g, &o) in into.iter_mut().zip(&self.offsets) {
            *g = x[base + o];
            any |= g.norm_sqr() != 0.0;
        }
        any
    }

    /// `(I (x) u)` in this layout.
    pub(crate) fn apply(&self, u: &ComplexMatrix, x: &[C64]) -> Vec<C64> {
        let k = self.offsets.len();
        debug_assert_eq!(u.shape(), (k, k));
        let mut out = vec![C64::new(0.0, 0.0); x.len()];
        let mut g = vec![C64::new(0.0, 0.0); k];
        for &base in &self.bases {
            if !self.gather(x, base, &mut g) {
                continue;
            }
            // groups are typically sparse, so accumulate column by column
            for (j, gj) in g.iter().enumerate() {
                if gj.norm_sqr() == 0.0 {
                    continue;
                }
                for (r, &o) in self.offsets.iter().enumerate() {
                    out[base + o] += u[(r, j)] * gj;
                }
            }
        }
        out
    }

    /// `X[a, a'] = sum_groups c[a] conj(b[a'])`, so that `<b|(u (x) I)|c> = Tr(u X)`.
    pub(crate) fn reduce(&self, c: &[C64], b: &[C64]) -> ComplexMatrix {
        let k = self.offsets.len();
        let mut x = ComplexMatrix::zeros(k, k);
        let mut gc = vec![C64::new(0.0, 0.0); k];
        let mut gb = vec![C64::new(0.0, 0.0); k];
        for &base in &self.bases {
            if !self.gather(c, base, &mut gc) || !self.gather(b, base, &mut gb) {
                continue;
            }
            for (i, ci) in gc.iter().enumerate() {
                if ci.norm_sqr() == 0.0 {
                    continue;
                }
                for (j, bj) in gb.iter().enumerate() {
                    x[(i, j)] += ci * bj.conj();
                }
            }
        }
        x
    }
}

/// A verifier: register dimensions and the four operators on `V (x) M1 (x) M2`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerifierSpec {
    #[serde(rename = "dV")]
    pub d_v: usize,
    #[serde(rename = "dM1")]
    pub d_m1: usize,
    #[serde(rename = "dM2")]
    pub d_m2: usize,
    pub v1: SparseMatrix,
    pub v2: SparseMatrix,
    #[serde(rename = "piInit")]
    pub pi_init: SparseMatrix,
    #[serde(rename = "piAcc")]
    pub pi_acc: SparseMatrix,
}

impl VerifierSpec {
    pub fn new(
        (d_v, d_m1, d_m2): (usize, usize, usize),
        v1: &ComplexMatrix,
        v2: &ComplexMatrix,
        pi_init: &ComplexMatrix,
        pi_acc: &ComplexMatrix,
    ) -> Result<Self> {
        let spec = Self {
            d_v,
            d_m1,
            d_m2,
            v1: v1.into(),
            v2: v2.into(),
            pi_init: pi_init.into(),
            pi_acc: pi_acc.into(),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Identity circuits with full projectors: every strategy is accepted.
    pub fn trivial(d_v: usize, d_m1: usize, d_m2: usize) -> Result<Self> {
        let n = d_v * d_m1 * d_m2;
        let id = ComplexMatrix::identity(n);
        Self::new((d_v, d_m1, d_m2), &id, &id, &id, &id)
    }

    /// Haar-random circuits and projectors of random nonzero rank.
    pub fn random(d_v: usize, d_m1: usize, d_m2: usize, seed: u64) -> Result<Self> {
        let n = d_v * d_m1 * d_m2;
        let rank = |k| 1 + (derive_seed(seed, k) % n as u64) as usize;
        Self::new(
            (d_v, d_m1, d_m2),
            &random_unitary(n, derive_seed(seed, 1)),
            &random_unitary(n, derive_seed(seed, 2)),
            &random_projector(n, rank(3), derive_seed(seed, 4)),
            &random_projector(n, rank(5), derive_seed(seed, 6)),
        )
    }

    pub fn dim(&self) -> usize {
        self.d_v * self.d_m1 * self.d_m2
    }

    pub fn dims(&self, d_p1: usize, d_p2: usize) -> GameDims {
        GameDims { d_v: self.d_v, d_m1: self.d_m1, d_m2: self.d_m2, d_p1, d_p2 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d_v == 0 || self.d_m1 == 0 || self.d_m2 == 0 {
            return Err(Error::Validation("register dimensions must be positive".into()));
        }
        let n = self.dim();
        for (name, m) in self.operators() {
            if m.shape() != (n, n) {
                return Err(Error::Validation(format!(
                    "{name} is {}x{}, expected {n}x{n} for registers ({}, {}, {})",
                    m.rows(),
                    m.cols(),
                    self.d_v,
                    self.d_m1,
                    self.d_m2
                )));
            }
        }
        for (name, m) in [("v1", &self.v1), ("v2", &self.v2)] {
            let e = m.unitarity_error();
            if e > UNITARY_TOL {
                return Err(Error::Validation(format!("{name} is not unitary (deviation {e:.3e})")));
            }
        }
        for (name, m) in [("piInit", &self.pi_init), ("piAcc", &self.pi_acc)] {
            let e = m.projector_error();
            if e > UNITARY_TOL {
                return Err(Error::Validation(format!("{name} is not a projector (deviation {e:.3e})")));
            }
        }
        Ok(())
    }

    fn operators(&self) -> [(&'static str, &SparseMatrix); 4] {
        [("v1", &self.v1), ("v2", &self.v2), ("piInit", &self.pi_init), ("piAcc", &self.pi_acc)]
    }
}

/// `B1 = V1 Pi_init` and `B2 = Pi_acc V2`, checked to be contractions.
pub fn build_b(spec: &VerifierSpec) -> Result<(SparseMatrix, SparseMatrix)> {
    spec.validate()?;
    let b1 = spec.v1.matmul(&spec.pi_init)?;
    let b2 = spec.pi_acc.matmul(&spec.v2)?;
    for (name, b) in [("B1", &b1), ("B2", &b2)] {
        let s = largest_singular_value(b)?;
        if s > 1.0 + CONTRACTION_TOL {
            return Err(Error::Validation(format!("{name} is not a contraction (norm {s})")));
        }
    }
    Ok((b1, b2))
}

/// Upper bound when cheap (Gershgorin on `b^dag b`), otherwise computed.
fn largest_singular_value(b: &SparseMatrix) -> Result<f64> {
    let gram = b.adjoint().matmul(b)?;
    let g = gram.gershgorin_bound().sqrt();
    if g <= 1.0 + CONTRACTION_TOL {
        return Ok(g);
    }
    if b.rows() <= 1024 {
        return Ok(svd(&b.to_dense())?.singulars[0]);
    }
    // power iteration on the Gram matrix; converges from below
    let n = b.cols();
    let mut x: Vec<C64> = (0..n).map(|i| C64::new(1.0 + (i % 7) as f64 * 1e-3, 0.0)).collect();
    let mut lambda = 0.0;
    for _ in 0..500 {
        let y = gram.mul_vec(&x);
        let norm = vec_norm(&y);
        if norm == 0.0 {
            return Ok(0.0);
        }
        let nx = vec_norm(&x);
        let next = norm / nx;
        x = y.into_iter().map(|z| z / norm).collect();
        if (next - lambda).abs() <= 1e-14 * next {
            lambda = next;
            break;
        }
        lambda = next;
    }
    Ok(lambda.sqrt())
}

/// Prover unitaries and the shared initial state.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProverStrategy {
    #[serde(rename = "dP1")]
    pub d_p1: usize,
    #[serde(rename = "dP2")]
    pub d_p2: usize,
    /// Unitary on `M1 (x) P1`.
    pub u1: ComplexMatrix,
    /// Unitary on `M2 (x) P2`.
    pub u2: ComplexMatrix,
    /// Unit column vector on `V (x) M1 (x) M2 (x) P1 (x) P2`.
    pub psi: ComplexMatrix,
}

impl ProverStrategy {
    /// Checks the strategy against `spec` and returns the combined dimensions.
    pub fn validate(&self, spec: &VerifierSpec) -> Result<GameDims> {
        if self.d_p1 == 0 || self.d_p2 == 0 {
            return Err(dim_err!("prover dimensions must be positive"));
        }
        let d = spec.dims(self.d_p1, self.d_p2);
        let part = d.out_part();
        if self.u1.shape() != (part.d1, part.d1) || self.u2.shape() != (part.d2, part.d2) {
            return Err(dim_err!(
                "prover unitaries must be {0}x{0} and {1}x{1}, got {2}x{3} and {4}x{5}",
                part.d1,
                part.d2,
                self.u1.rows(),
                self.u1.cols(),
                self.u2.rows(),
                self.u2.cols()
            ));
        }
        if self.psi.shape() != (d.total(), 1) {
            return Err(dim_err!(
                "psi must be a column of length {}, got {}x{}",
                d.total(),
                self.psi.rows(),
                self.psi.cols()
            ));
        }
        for (name, u) in [("u1", &self.u1), ("u2", &self.u2)] {
            let e = u.unitarity_error();
            if e > UNITARY_TOL {
                return Err(Error::Validation(format!("{name} is not unitary (deviation {e:.3e})")));
            }
        }
        let norm = vec_norm(self.psi.data());
        if (norm - 1.0).abs() > UNITARY_TOL {
            return Err(Error::Validation(format!("psi has norm {norm}, expected 1")));
        }
        Ok(d)
    }

    /// The same strategy inside larger prover spaces: `psi` is zero-padded and
    /// the unitaries act as the identity on the new basis states.
    pub fn embed(&self, spec: &VerifierSpec, d_p1: usize, d_p2: usize) -> Result<Self> {
        let old = self.validate(spec)?;
        if d_p1 < self.d_p1 || d_p2 < self.d_p2 {
            return Err(Error::Input(format!(
                "cannot embed prover dimensions ({}, {}) into ({d_p1}, {d_p2})",
                self.d_p1, self.d_p2
            )));
        }
        let new = spec.dims(d_p1, d_p2);
        let pad = |u: &ComplexMatrix, dm: usize, from: usize, to: usize| {
            ComplexMatrix::from_fn(dm * to, dm * to, |r, c| {
                let (m, p, m2, p2) = (r / to, r % to, c / to, c % to);
                if p < from && p2 < from {
                    u[(m * from + p, m2 * from + p2)]
                } else if r == c {
                    C64::new(1.0, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            })
        };
        let mut psi = vec![C64::new(0.0, 0.0); new.total()];
        for v in 0..old.d_v {
            for m1 in 0..old.d_m1 {
                for m2 in 0..old.d_m2 {
                    for p1 in 0..old.d_p1 {
                        for p2 in 0..old.d_p2 {
                            psi[new.index(v, m1, m2, p1, p2)] = self.psi.data()[old.index(v, m1, m2, p1, p2)];
                        }
                    }
                }
            }
        }
        Ok(Self {
            d_p1,
            d_p2,
            u1: pad(&self.u1, spec.d_m1, self.d_p1, d_p1),
            u2: pad(&self.u2, spec.d_m2, self.d_p2, d_p2),
            psi: ComplexMatrix::column(&psi),
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct GameValueReport {
    /// Acceptance probability of `strategy`, clamped to `[0, 1]`.
    pub probability: f64,
    pub norm_value: f64,
    pub strategy: ProverStrategy,
    pub converged: bool,
    pub restart_index: usize,
    pub iterations: usize,
}

/// Final state `(B2 (x) I)(I (x) U1 (x) U2)(B1 (x) I)|psi>`.
pub(crate) fn final_state(
    d: &GameDims,
    b1: &SparseMatrix,
    b2: &SparseMatrix,
    u1: &ComplexMatrix,
    u2: &ComplexMatrix,
    psi: &[C64],
) -> Vec<C64> {
    let p = d.p();
    let x = b1.mul_block(psi, p);
    let x = d.layout(Side::First).apply(u1, &x);
    let x = d.layout(Side::Second).apply(u2, &x);
    b2.mul_block(&x, p)
}

pub(crate) fn clamp_probability(p: f64) -> f64 {
    p.clamp(0.0, 1.0)
}

pub fn acceptance_probability(spec: &VerifierSpec, strat: &ProverStrategy) -> Result<f64> {
    let (b1, b2) = build_b(spec)?;
    let d = strat.validate(spec)?;
    Limits::from_env().check_state_dim("game state", d.total())?;
    let y = final_state(&d, &b1, &b2, &strat.u1, &strat.u2, strat.psi.data());
    Ok(clamp_probability(vec_norm(&y).powi(2)))
}

/// `T(X) = Tr_V(B1 X B2)` as an explicit superoperator with output `(M1, M2)`.
pub fn game_sop(spec: &VerifierSpec) -> Result<Superoperator> {
    let (b1, b2) = build_b(spec)?;
    let n = spec.dim();
    let dm = spec.d_m1 * spec.d_m2;
    let part = Bipartition::new(spec.d_m1, spec.d_m2)?;
    let limits = Limits::from_env();
    limits.check_dim("game superoperator input", n)?;
    // columns of B1 and rows of B2, as sparse lists
    let b1_adj = b1.adjoint();
    let cols: Vec<Vec<(usize, C64)>> =
        (0..n).map(|i| b1_adj.row(i).map(|(s, z)| (s, z.conj())).collect()).collect();
    let rows: Vec<Vec<(usize, C64)>> = (0..n).map(|j| b2.row(j).collect()).collect();
    Superoperator::from_fn(n, part, &limits, |i, j| {
        let mut out = ComplexMatrix::zeros(dm, dm);
        for &(s, c) in &cols[i] {
            let (v, m) = (s / dm, s % dm);
            for &(s2, r) in &rows[j] {
                if s2 / dm == v {
                    out[(m, s2 % dm)] += c * r;
                }
            }
        }
        out
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{partial_trace, random_matrix, random_unit_vector};

    fn random_strategy(spec: &VerifierSpec, dp1: usize, dp2: usize, seed: u64) -> ProverStrategy {
        let d = spec.dims(dp1, dp2);
        let part = d.out_part();
        ProverStrategy {
            d_p1: dp1,
            d_p2: dp2,
            u1: random_unitary(part.d1, derive_seed(seed, 1)),
            u2: random_unitary(part.d2, derive_seed(seed, 2)),
            psi: ComplexMatrix::column(&random_unit_vector(d.total(), derive_seed(seed, 3))),
        }
    }

    #[test]
    fn trivial_spec_accepts_everything() {
        let spec = VerifierSpec::trivial(2, 2, 2).unwrap();
        let (b1, b2) = build_b(&spec).unwrap();
        assert_eq!(b1, SparseMatrix::identity(8));
        assert_eq!(b2, SparseMatrix::identity(8));
        for seed in 0..3 {
            let s = random_strategy(&spec, 2, 1, seed);
            assert!((acceptance_probability(&spec, &s).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rank_one_init_gives_rank_one_b1() {
        let id = ComplexMatrix::identity(4);
        let p0 = ComplexMatrix::real_diag(&[1.0, 0.0, 0.0, 0.0]);
        let spec = VerifierSpec::new((1, 2, 2), &id, &id, &p0, &id).unwrap();
        let (b1, _) = build_b(&spec).unwrap();
        assert_eq!(b1.nnz(), 1);
        assert_eq!(svd(&b1.to_dense()).unwrap().singulars.iter().filter(|&&s| s > 1e-12).count(), 1);
    }

    #[test]
    fn null_acceptance_rejects_everything() {
        let n = 8;
        let id = ComplexMatrix::identity(n);
        let spec = VerifierSpec::new((2, 2, 2), &random_unitary(n, 1), &id, &id, &ComplexMatrix::zeros(n, n)).unwrap();
        let s = random_strategy(&spec, 1, 2, 4);
        assert_eq!(acceptance_probability(&spec, &s).unwrap(), 0.0);
        let t = game_sop(&spec).unwrap();
        assert!(t.action().iter().all(|m| m.max_abs() == 0.0));
    }

    #[test]
    fn validation_errors() {
        let id = ComplexMatrix::identity(4);
        let half = ComplexMatrix::identity(4).scale_real(0.5);
        assert!(matches!(VerifierSpec::new((1, 2, 2), &half, &id, &id, &id), Err(Error::Validation(_))));
        assert!(matches!(VerifierSpec::new((1, 2, 2), &id, &id, &half, &id), Err(Error::Validation(_))));
        assert!(matches!(VerifierSpec::new((1, 2, 3), &id, &id, &id, &id), Err(Error::Validation(_))));
        let spec = VerifierSpec::trivial(1, 2, 2).unwrap();
        let mut s = random_strategy(&spec, 1, 1, 0);
        s.psi = ComplexMatrix::column(&random_unit_vector(5, 1));
        assert!(matches!(acceptance_probability(&spec, &s), Err(Error::Dimension(_))));
        let mut s = random_strategy(&spec, 1, 1, 0);
        s.psi = s.psi.scale_real(2.0);
        assert!(matches!(acceptance_probability(&spec, &s), Err(Error::Validation(_))));
    }

    #[test]
    fn prover_unitaries_act_on_their_registers() {
        // direct evaluation with explicit permutations of the full space
        let spec = VerifierSpec::random(2, 2, 3, 9).unwrap();
        let s = random_strategy(&spec, 2, 2, 10);
        let d = s.validate(&spec).unwrap();
        let dims = [d.d_v, d.d_m1, d.d_m2, d.d_p1, d.d_p2];
        // bring to V, M1, P1, M2, P2 where U1 (x) U2 is a plain Kronecker product
        let perm = [0, 1, 3, 2, 4];
        let full = ComplexMatrix::identity(d.d_v).kron(&s.u1.kron(&s.u2).unwrap()).unwrap();
        let psi = crate::linalg::permute_vector(s.psi.data(), &dims, &perm).unwrap();
        let out = full.mul_vec(&psi);
        let back_dims = [d.d_v, d.d_m1, d.d_p1, d.d_m2, d.d_p2];
        let want = crate::linalg::permute_vector(&out, &back_dims, &[0, 1, 3, 2, 4]).unwrap();
        let first = d.layout(Side::First).apply(&s.u1, s.psi.data());
        let got = d.layout(Side::Second).apply(&s.u2, &first);
        let err: f64 = got.iter().zip(&want).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn reduce_is_adjoint_of_apply() {
        let spec = VerifierSpec::trivial(2, 3, 2).unwrap();
        let d = spec.dims(2, 1);
        let c = random_unit_vector(d.total(), 1);
        let b = random_unit_vector(d.total(), 2);
        let u = random_unitary(6, 3);
        for side in [Side::First, Side::Second] {
            let dim = if side == Side::First { 6 } else { 2 };
            let u = if dim == 6 { u.clone() } else { random_unitary(2, 4) };
            let lhs = crate::linalg::inner(&b, &d.layout(side).apply(&u, &c));
            let rhs = u.trace_of_product(&d.layout(side).reduce(&c, &b));
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn game_sop_agrees_with_direct_partial_trace() {
        let spec = VerifierSpec::random(2, 2, 2, 21).unwrap();
        let t = game_sop(&spec).unwrap();
        let (b1, b2) = build_b(&spec).unwrap();
        let x = random_matrix(8, 8, 22);
        let direct = &(&b1.to_dense() * &x) * &b2.to_dense();
        let reduced = partial_trace(&direct, &[2, 4], &[0]).unwrap();
        assert!(t.apply(&x).unwrap().max_abs_diff(&reduced) < 1e-12);
        assert!((t.apply(&x).unwrap().trace() - direct.trace()).norm() < 1e-12);
    }

    #[test]
    fn embedding_preserves_probability() {
        let spec = VerifierSpec::random(2, 2, 2, 30).unwrap();
        let s = random_strategy(&spec, 1, 2, 31);
        let p = acceptance_probability(&spec, &s).unwrap();
        let e = s.embed(&spec, 3, 2).unwrap();
        assert!(e.u1.unitarity_error() < 1e-12);
        assert!((acceptance_probability(&spec, &e).unwrap() - p).abs() < 1e-12);
        assert!(s.embed(&spec, 1, 1).is_err());
    }

    #[test]
    fn spec_json_keys() {
        let spec = VerifierSpec::trivial(1, 1, 2).unwrap();
        let v: serde_json::Value = serde_json::to_value(&spec).unwrap();
        for key in ["dV", "dM1", "dM2", "v1", "v2", "piInit", "piAcc"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        let back: VerifierSpec = serde_json::from_value(v).unwrap();
        assert_eq!(back.v1, spec.v1);
        let s = random_strategy(&spec, 1, 1, 0);
        let v: serde_json::Value = serde_json::to_value(&s).unwrap();
        for key in ["dP1", "dP2", "u1", "u2", "psi"] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }
}
