//! Seesaw for the maximum acceptance probability, and the extended game map.

use serde::Serialize;

use super::{
    build_b, clamp_probability, final_state, GameDims, GameValueReport, Layout, ProverStrategy, Side,
    VerifierSpec,
};
use crate::error::{Error, Result};
use crate::limits::Limits;
use crate::linalg::decomp::column_span;
use crate::linalg::{polar_maximizer, svd, vec_norm, Bipartition, ComplexMatrix, SparseMatrix, C64};
use crate::norms::restart_unitaries;
use crate::seesaw::{best_of, has_converged, SeesawOptions};
use crate::sop::{sop_product_norm_lb, LinearMap, SopNormCertificate};

/// `T (x) I_{P1 (x) P2}` for a verifier, with input `V M1 M2 P1 P2` and output
/// `(M1 P1, M2 P2)`.
///
/// Every input outside `range(Pi_init) (x) P` is annihilated, so the coupling
/// matrices are only ever formed on that subspace.
#[derive(Clone, Debug)]
pub struct GameMap {
    dims: GameDims,
    b1: SparseMatrix,
    b2: SparseMatrix,
    b2_adj: SparseMatrix,
    /// Orthonormal basis of `range(Pi_init)`, `n x r`.
    q: ComplexMatrix,
    /// `B1 q`.
    k: ComplexMatrix,
    /// Rows of `B2` that are not identically zero.
    live: Vec<usize>,
    first: Layout,
    second: Layout,
    joint: Layout,
}

impl GameMap {
    pub fn new(spec: &VerifierSpec, d_p1: usize, d_p2: usize) -> Result<Self> {
        if d_p1 == 0 || d_p2 == 0 {
            return Err(Error::Input("prover dimensions must be at least 1".into()));
        }
        let (b1, b2) = build_b(spec)?;
        let dims = spec.dims(d_p1, d_p2);
        Limits::from_env().check_state_dim("game state", dims.total())?;
        let n = dims.n();
        let rank = spec.pi_init.trace().re.round().max(0.0) as usize;
        let q = column_span(n, spec.pi_init.nonzero_columns(), rank.max(1));
        let r = q.cols();
        let k = ComplexMatrix::from_raw(n, r, b1.mul_block(q.data(), r));
        let live = (0..n).filter(|&i| !b2.row_is_empty(i)).collect();
        Ok(Self {
            first: dims.layout(Side::First),
            second: dims.layout(Side::Second),
            joint: dims.layout(Side::Both),
            b2_adj: b2.adjoint(),
            dims,
            b1,
            b2,
            q,
            k,
            live,
        })
    }

    pub fn dims(&self) -> GameDims {
        self.dims
    }

    fn apply_product(&self, u1: &ComplexMatrix, u2: &ComplexMatrix, x: &[C64]) -> Vec<C64> {
        let x = self.first.apply(u1, x);
        self.second.apply(u2, &x)
    }

    /// Top singular triple of `M = (B2 (x) I) W (B1 (x) I)` where `apply` realises `W`.
    /// Returns `(sigma, psi, w)` with `M psi = sigma w`.
    fn top(&self, apply: impl Fn(&[C64]) -> Vec<C64>) -> Result<(f64, Vec<C64>, Vec<C64>)> {
        let (n, p) = (self.dims.n(), self.dims.p());
        let r = self.k.cols();
        let zero = C64::new(0.0, 0.0);
        let total = n * p;
        let lift = |x: &[C64]| {
            // (q (x) I) x
            let mut psi = vec![zero; total];
            for s in 0..n {
                for kk in 0..r {
                    let qk = self.q[(s, kk)];
                    if qk == zero {
                        continue;
                    }
                    for pp in 0..p {
                        psi[s * p + pp] += qk * x[kk * p + pp];
                    }
                }
            }
            psi
        };
        if self.live.is_empty() {
            let mut x = vec![zero; r * p];
            x[0] = C64::new(1.0, 0.0);
            let mut w = vec![zero; total];
            w[0] = C64::new(1.0, 0.0);
            return Ok((0.0, lift(&x), w));
        }
        let rows = self.live.len() * p;
        let cols = r * p;
        let mut m = ComplexMatrix::zeros(rows, cols);
        for kk in 0..r {
            for pp in 0..p {
                let mut a = vec![zero; total];
                for s in 0..n {
                    a[s * p + pp] = self.k[(s, kk)];
                }
                let y = self.b2.mul_block(&apply(&a), p);
                let c = kk * p + pp;
                for (li, &s) in self.live.iter().enumerate() {
                    for p2 in 0..p {
                        m[(li * p + p2, c)] = y[s * p + p2];
                    }
                }
            }
        }
        // M is tall; the top right vector comes from the small Gram matrix
        let mut gram = ComplexMatrix::zeros(cols, cols);
        for i in 0..rows {
            let row = m.row(i);
            for (a, ra) in row.iter().enumerate() {
                if ra.norm_sqr() == 0.0 {
                    continue;
                }
                let ra = ra.conj();
                for (b, rb) in row.iter().enumerate() {
                    gram[(a, b)] += ra * rb;
                }
            }
        }
        let x = svd(&gram)?.top_right();
        let mx = m.mul_vec(&x);
        let sigma = vec_norm(&mx);
        let mut w = vec![zero; total];
        if sigma > 0.0 {
            for (li, &s) in self.live.iter().enumerate() {
                for p2 in 0..p {
                    w[s * p + p2] = mx[li * p + p2] / sigma;
                }
            }
        } else {
            w[self.live[0] * p] = C64::new(1.0, 0.0);
        }
        Ok((sigma, lift(&x), w))
    }

    /// One seesaw run for the acceptance probability from the given unitaries.
    fn run(
        &self,
        mut u1: ComplexMatrix,
        mut u2: ComplexMatrix,
        max_iters: usize,
        tol: f64,
    ) -> Result<(GameValueReport, Vec<f64>)> {
        let p = self.dims.p();
        let (mut sigma, mut psi, mut w) = self.top(|x| self.apply_product(&u1, &u2, x))?;
        let mut objective = vec![sigma];
        let mut converged = false;
        let mut iterations = 0;
        for _ in 0..max_iters {
            iterations += 1;
            let a = self.b1.mul_block(&psi, p);
            // U1 with psi, U2 and the output direction w fixed
            let b = self.b2_adj.mul_block(&w, p);
            let c = self.second.apply(&u2, &a);
            let (n1, h1) = polar_maximizer(&self.first.reduce(&c, &b))?;
            u1 = n1;
            objective.push(h1);
            // best output direction for the new U1
            let c1 = self.first.apply(&u1, &a);
            let z = self.b2.mul_block(&self.second.apply(&u2, &c1), p);
            let nz = vec_norm(&z);
            objective.push(nz);
            if nz > 0.0 {
                w = z.into_iter().map(|x| x / nz).collect();
            }
            let b = self.b2_adj.mul_block(&w, p);
            let (n2, h2) = polar_maximizer(&self.second.reduce(&c1, &b))?;
            u2 = n2;
            objective.push(h2);
            let (s, np, nw) = self.top(|x| self.apply_product(&u1, &u2, x))?;
            psi = np;
            w = nw;
            objective.push(s);
            let prev = sigma;
            sigma = s;
            if has_converged(prev, s, tol) {
                converged = true;
                break;
            }
        }
        let y = final_state(&self.dims, &self.b1, &self.b2, &u1, &u2, &psi);
        let norm_value = vec_norm(&y);
        let report = GameValueReport {
            probability: clamp_probability(norm_value * norm_value),
            norm_value,
            strategy: ProverStrategy {
                d_p1: self.dims.d_p1,
                d_p2: self.dims.d_p2,
                u1,
                u2,
                psi: ComplexMatrix::column(&psi),
            },
            converged,
            restart_index: 0,
            iterations,
        };
        Ok((report, objective))
    }

    /// `(B1 (x) I) e_c` for a basis state `c`.
    fn input_column(&self, c: usize) -> Vec<C64> {
        let p = self.dims.p();
        let mut e = vec![C64::new(0.0, 0.0); self.dims.total()];
        e[c] = C64::new(1.0, 0.0);
        self.b1.mul_block(&e, p)
    }
}

impl LinearMap for GameMap {
    fn dim_in(&self) -> usize {
        self.dims.total()
    }

    fn out_part(&self) -> Bipartition {
        self.dims.out_part()
    }

    fn apply_outer(&self, u: &[C64], v: &[C64]) -> ComplexMatrix {
        let p = self.dims.p();
        let a = self.b1.mul_block(u, p);
        let b = self.b2_adj.mul_block(v, p);
        let dim = self.dims.out_part().dim();
        let mut out = ComplexMatrix::zeros(dim, dim);
        for &base in &self.joint.bases {
            let ga: Vec<C64> = self.joint.offsets.iter().map(|&o| a[base + o]).collect();
            let gb: Vec<C64> = self.joint.offsets.iter().map(|&o| b[base + o]).collect();
            for (i, x) in ga.iter().enumerate() {
                if x.norm_sqr() == 0.0 {
                    continue;
                }
                for (j, y) in gb.iter().enumerate() {
                    out[(i, j)] += x * y.conj();
                }
            }
        }
        out
    }

    fn coupling(&self, w: &ComplexMatrix) -> ComplexMatrix {
        let total = self.dims.total();
        let p = self.dims.p();
        let mut k = ComplexMatrix::zeros(total, total);
        for c in 0..total {
            let y = self.b2.mul_block(&self.joint.apply(w, &self.input_column(c)), p);
            for (r, z) in y.into_iter().enumerate() {
                k[(r, c)] = z;
            }
        }
        k
    }

    fn coupling_top(&self, w: &ComplexMatrix) -> Result<(f64, Vec<C64>, Vec<C64>)> {
        self.top(|x| self.joint.apply(w, x))
    }

    fn coupling_top_product(&self, u1: &ComplexMatrix, u2: &ComplexMatrix) -> Result<(f64, Vec<C64>, Vec<C64>)> {
        self.top(|x| self.apply_product(u1, u2, x))
    }
}

/// A single MAP seesaw run from `strategy`'s unitaries, with the objective
/// (the norm value `sqrt(probability)`) recorded after every sub-step.
pub fn map_seesaw(
    spec: &VerifierSpec,
    strategy: &ProverStrategy,
    opts: &SeesawOptions,
) -> Result<(GameValueReport, Vec<f64>)> {
    strategy.validate(spec)?;
    let g = GameMap::new(spec, strategy.d_p1, strategy.d_p2)?;
    g.run(strategy.u1.clone(), strategy.u2.clone(), opts.max_iters, opts.tol)
}

/// Lower bound on the maximum acceptance probability with prover spaces of
/// dimensions `d_p1`, `d_p2`. Restart 0 starts from identity unitaries.
pub fn map_lb(spec: &VerifierSpec, d_p1: usize, d_p2: usize, opts: &SeesawOptions) -> Result<GameValueReport> {
    map_lb_with(spec, d_p1, d_p2, opts, &[])
}

/// As [`map_lb`], with additional starting strategies tried first.
pub fn map_lb_with(
    spec: &VerifierSpec,
    d_p1: usize,
    d_p2: usize,
    opts: &SeesawOptions,
    warm: &[ProverStrategy],
) -> Result<GameValueReport> {
    opts.validate()?;
    let g = GameMap::new(spec, d_p1, d_p2)?;
    for s in warm {
        if (s.d_p1, s.d_p2) != (d_p1, d_p2) {
            return Err(Error::Input("warm-start strategies must match the prover dimensions".into()));
        }
        s.validate(spec)?;
    }
    let part = g.dims.out_part();
    best_of(
        warm.len() + opts.restarts,
        |k| {
            let (u1, u2) = match warm.get(k) {
                Some(s) => (s.u1.clone(), s.u2.clone()),
                None => restart_unitaries(part.d1, part.d2, opts, k - warm.len()),
            };
            let (mut report, _) = g.run(u1, u2, opts.max_iters, opts.tol)?;
            report.restart_index = k;
            Ok(report)
        },
        |r| r.probability,
    )
}

/// Both sides of the identity between the MAP and the squared product norm of
/// the extended game map, with each certificate converted to the other side.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct NormConsistency {
    /// Best acceptance probability found by [`map_lb`].
    pub map_value: f64,
    /// Square of the best product-norm certificate of `T (x) I`.
    pub norm_squared: f64,
    /// The MAP strategy read as a product-norm witness, squared.
    pub map_witness_as_norm: f64,
    /// The product-norm certificate read as a strategy.
    pub norm_witness_as_map: f64,
    /// Whether the norm side used the explicit superoperator.
    pub explicit: bool,
    pub report: GameValueReport,
    pub certificate: SopNormCertificate,
}

impl NormConsistency {
    /// Largest disagreement between a value and the converted other-side witness.
    pub fn conversion_gap(&self) -> f64 {
        (self.map_value - self.map_witness_as_norm)
            .abs()
            .max((self.norm_squared - self.norm_witness_as_map).abs())
    }
}

pub fn norm_consistency(spec: &VerifierSpec, d_p: usize, opts: &SeesawOptions) -> Result<NormConsistency> {
    let report = map_lb(spec, d_p, d_p, opts)?;
    let g = GameMap::new(spec, d_p, d_p)?;
    let explicit = super::game_sop(spec).and_then(|t| t.tensor_identity(d_p));
    let (certificate, explicit) = match explicit {
        Ok(t) => (sop_product_norm_lb(&t, opts)?, true),
        Err(Error::Resource(_)) => (sop_product_norm_lb(&g, opts)?, false),
        Err(e) => return Err(e),
    };

    // strategy -> witness: u = psi, v = M psi / |M psi|
    let s = &report.strategy;
    let y = final_state(&g.dims, &g.b1, &g.b2, &s.u1, &s.u2, s.psi.data());
    let ny = vec_norm(&y);
    let v: Vec<C64> = if ny > 0.0 { y.iter().map(|z| z / ny).collect() } else { s.psi.data().to_vec() };
    let as_norm = g.evaluate(s.psi.data(), &v, &s.u1, &s.u2)?;

    // witness -> strategy: psi = u
    let u = certificate.u.data();
    let nu = vec_norm(u);
    let psi: Vec<C64> = u.iter().map(|z| z / nu).collect();
    let y = final_state(&g.dims, &g.b1, &g.b2, &certificate.u1, &certificate.u2, &psi);
    let as_map = clamp_probability(vec_norm(&y).powi(2));

    Ok(NormConsistency {
        map_value: report.probability,
        norm_squared: certificate.value * certificate.value,
        map_witness_as_norm: as_norm * as_norm,
        norm_witness_as_map: as_map,
        explicit,
        report,
        certificate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games::{acceptance_probability, game_sop};
    use crate::linalg::{random_unit_vector, random_unitary};

    #[test]
    fn structured_map_matches_explicit() {
        let spec = VerifierSpec::random(2, 2, 2, 5).unwrap();
        for dp in [1, 2] {
            let t = game_sop(&spec).unwrap().tensor_identity(dp).unwrap();
            let g = GameMap::new(&spec, dp, dp).unwrap();
            assert_eq!(g.dim_in(), t.dim_in());
            assert_eq!(g.out_part(), t.out_part());
            let u = random_unit_vector(g.dim_in(), 1);
            let v = random_unit_vector(g.dim_in(), 2);
            assert!(g.apply_outer(&u, &v).max_abs_diff(&t.apply_outer(&u, &v)) < 1e-12);
            let w = random_unitary(g.out_part().dim(), 3);
            assert!(g.coupling(&w).max_abs_diff(&t.coupling(&w)) < 1e-12);
            let (s1, _, _) = g.coupling_top(&w).unwrap();
            let (s2, _, _) = t.coupling_top(&w).unwrap();
            assert!((s1 - s2).abs() < 1e-10, "{s1} vs {s2}");
        }
    }

    #[test]
    fn top_triple_is_consistent() {
        let spec = VerifierSpec::random(2, 2, 2, 8).unwrap();
        let g = GameMap::new(&spec, 2, 1).unwrap();
        let u1 = random_unitary(4, 1);
        let u2 = random_unitary(2, 2);
        let (s, psi, w) = g.coupling_top_product(&u1, &u2).unwrap();
        let y = final_state(&g.dims, &g.b1, &g.b2, &u1, &u2, &psi);
        let err: f64 = y.iter().zip(&w).map(|(a, b)| (a - b * s).norm()).fold(0.0, f64::max);
        assert!(err < 1e-10);
        assert!((vec_norm(&psi) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trivial_spec_value_one() {
        let spec = VerifierSpec::trivial(1, 2, 2).unwrap();
        let r = map_lb(&spec, 1, 1, &SeesawOptions::default()).unwrap();
        assert!((r.probability - 1.0).abs() < 1e-12);
        let nc = norm_consistency(&spec, 1, &SeesawOptions::default()).unwrap();
        assert!((nc.map_value - 1.0).abs() < 1e-9 && (nc.norm_squared - 1.0).abs() < 1e-9);
    }

    #[test]
    fn report_reevaluates() {
        let opts = SeesawOptions { restarts: 4, ..Default::default() };
        for seed in 0..3 {
            let spec = VerifierSpec::random(2, 2, 2, 40 + seed).unwrap();
            let r = map_lb(&spec, 2, 1, &opts).unwrap();
            let p = acceptance_probability(&spec, &r.strategy).unwrap();
            assert!((p - r.probability).abs() < 1e-8);
            assert!((r.norm_value.powi(2) - r.probability).abs() < 1e-10);
        }
    }

    #[test]
    fn map_objective_monotone() {
        let spec = VerifierSpec::random(2, 2, 2, 60).unwrap();
        let d = spec.dims(2, 2);
        let part = d.out_part();
        let start = ProverStrategy {
            d_p1: 2,
            d_p2: 2,
            u1: random_unitary(part.d1, 1),
            u2: random_unitary(part.d2, 2),
            psi: ComplexMatrix::column(&random_unit_vector(d.total(), 3)),
        };
        let (_, obj) = map_seesaw(&spec, &start, &SeesawOptions::default()).unwrap();
        for w in obj.windows(2) {
            assert!(w[1] >= w[0] - 1e-10, "{w:?}");
        }
    }

    #[test]
    fn consistency_on_random_spec() {
        let spec = VerifierSpec::random(2, 2, 2, 77).unwrap();
        let nc = norm_consistency(&spec, 1, &SeesawOptions::default()).unwrap();
        assert!(nc.explicit);
        assert!(nc.conversion_gap() < 1e-6, "{nc:?}");
    }
}
