//! Superoperators `T: L(C^n) -> L(V1 (x) V2)` and their norms.
//!
//! A map is stored by its images of the matrix units, `action[i * n + j] = T(|i><j|)`.
//! Three norms are estimated from below with certificates:
//!
//! - l1: `max ||T(A)||_1` over `||A||_1 = 1` ([`l1_norm_lb`]),
//! - diamond: the l1 norm of `T (x) I_n` ([`diamond_lb`]),
//! - superoperator product norm: `max ||T(A)||_{V1 (x) V2}` over `||A||_1 = 1`
//!   ([`sop_product_norm_lb`]).
//!
//! The maximum of a convex function over the trace-norm ball is attained at a
//! rank-one `|u><v|`, so every optimizer alternates between the output
//! unitaries and a pair of unit vectors. For fixed unitaries `W` the map
//! `(u, v) -> Tr(W T(|u><v|))` is the sesquilinear form `<v| K(W) |u>` with
//! `K(W)[r, c] = Tr(W T(|c><r|))`, maximised by its top singular pair.

use serde::{Deserialize, Serialize};

use crate::error::{dim_err, Error, Result};
use crate::limits::Limits;
use crate::linalg::{
    kron_vec, polar_maximizer, random_unitary, svd, Bipartition, ComplexMatrix, C64,
};
use crate::norms::{self, absorb_phase, restart_unitaries};
use crate::seesaw::{best_of, has_converged, SeesawOptions};

/// Access to a linear map on rank-one inputs, which is all the optimizers need.
///
/// [`Superoperator`] implements it from explicit images; structured maps
/// (such as the game map of a verifier) can implement it without materialising
/// `dim_in^2` images.
pub trait LinearMap: Sync {
    fn dim_in(&self) -> usize;
    fn out_part(&self) -> Bipartition;

    /// `T(|u><v|)`.
    fn apply_outer(&self, u: &[C64], v: &[C64]) -> ComplexMatrix;

    /// `K(W)[r, c] = Tr(W T(|c><r|))`, so `<v|K(W)|u> = Tr(W T(|u><v|))`.
    fn coupling(&self, w: &ComplexMatrix) -> ComplexMatrix;

    /// Largest singular value of `K(W)` with right and left singular vectors `(u, v)`.
    fn coupling_top(&self, w: &ComplexMatrix) -> Result<(f64, Vec<C64>, Vec<C64>)> {
        let d = svd(&self.coupling(w))?;
        Ok((d.singulars[0], d.top_right(), d.top_left()))
    }

    /// [`LinearMap::coupling_top`] for a product unitary `u1 (x) u2`.
    fn coupling_top_product(&self, u1: &ComplexMatrix, u2: &ComplexMatrix) -> Result<(f64, Vec<C64>, Vec<C64>)> {
        self.coupling_top(&u1.kron(u2)?)
    }

    /// `|Tr((u1 (x) u2) T(|u><v|))|`.
    fn evaluate(&self, u: &[C64], v: &[C64], u1: &ComplexMatrix, u2: &ComplexMatrix) -> Result<f64> {
        let part = Bipartition::new(u1.rows(), u2.rows())?;
        let a = self.apply_outer(u, v);
        if a.rows() != part.dim() {
            return Err(dim_err!("witness unitaries act on {} but output is {}", part.dim(), a.rows()));
        }
        Ok(norms::product_objective(&a, part, u1, u2)?.norm())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SopJson", into = "SopJson")]
pub struct Superoperator {
    dim_in: usize,
    out_part: Bipartition,
    action: Vec<ComplexMatrix>,
}

impl Superoperator {
    pub fn new(dim_in: usize, out_part: Bipartition, action: Vec<ComplexMatrix>) -> Result<Self> {
        if dim_in == 0 {
            return Err(dim_err!("superoperator input dimension must be positive"));
        }
        out_part.check(out_part.d1 * out_part.d2)?;
        if action.len() != dim_in * dim_in {
            return Err(dim_err!(
                "expected {} images for input dimension {dim_in}, got {}",
                dim_in * dim_in,
                action.len()
            ));
        }
        let d = out_part.dim();
        if let Some(k) = action.iter().position(|m| m.shape() != (d, d)) {
            return Err(dim_err!(
                "image {k} is {}x{}, expected {d}x{d}",
                action[k].rows(),
                action[k].cols()
            ));
        }
        Ok(Self { dim_in, out_part, action })
    }

    /// Builds the map from `f(i, j) = T(|i><j|)`, refusing sizes beyond `limits`.
    pub fn from_fn(
        dim_in: usize,
        out_part: Bipartition,
        limits: &Limits,
        mut f: impl FnMut(usize, usize) -> ComplexMatrix,
    ) -> Result<Self> {
        limits.check_dim("superoperator input", dim_in)?;
        limits.check_dim("superoperator output", out_part.dim())?;
        let entries = (dim_in as u128).pow(2) * (out_part.dim() as u128).pow(2);
        limits.check_entries("superoperator", entries)?;
        let mut action = Vec::with_capacity(dim_in * dim_in);
        for i in 0..dim_in {
            for j in 0..dim_in {
                action.push(f(i, j));
            }
        }
        Self::new(dim_in, out_part, action)
    }

    /// The identity map on `C^{d1 d2}`, with its output split as `part`.
    pub fn identity(part: Bipartition) -> Result<Self> {
        let d = part.dim();
        Self::from_fn(d, part, &Limits::from_env(), |i, j| unit(d, i, j))
    }

    pub fn zero(dim_in: usize, part: Bipartition) -> Result<Self> {
        let d = part.dim();
        Self::from_fn(dim_in, part, &Limits::from_env(), |_, _| ComplexMatrix::zeros(d, d))
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn out_part(&self) -> Bipartition {
        self.out_part
    }

    pub fn action(&self) -> &[ComplexMatrix] {
        &self.action
    }

    /// `T(|i><j|)`.
    pub fn image(&self, i: usize, j: usize) -> &ComplexMatrix {
        &self.action[i * self.dim_in + j]
    }

    pub fn apply(&self, a: &ComplexMatrix) -> Result<ComplexMatrix> {
        let n = self.dim_in;
        if a.shape() != (n, n) {
            return Err(dim_err!("input must be {n}x{n}, got {}x{}", a.rows(), a.cols()));
        }
        let d = self.out_part.dim();
        let mut out = ComplexMatrix::zeros(d, d);
        for (k, &z) in a.data().iter().enumerate() {
            if z.norm_sqr() == 0.0 {
                continue;
            }
            for (o, x) in out.data_mut().iter_mut().zip(self.action[k].data()) {
                *o += z * x;
            }
        }
        Ok(out)
    }

    /// `T (x) I_N (x) I_N` with one `C^N` ancilla appended inside each output factor.
    ///
    /// Inputs are indexed `(i, p, q)`; outputs `((a, p), (b, q))`, where `T`'s output is `(a, b)`.
    pub fn tensor_identity(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(dim_err!("ancilla dimension must be positive"));
        }
        let (d1, d2) = (self.out_part.d1, self.out_part.d2);
        let part = Bipartition::new(d1 * n, d2 * n)?;
        let dim_in = self.dim_in * n * n;
        let dims = [d1, d2, n, n];
        let perm = [0, 2, 1, 3];
        Self::from_fn(dim_in, part, &Limits::from_env(), |row, col| {
            let (i, p, q) = (row / (n * n), (row / n) % n, row % n);
            let (j, r, s) = (col / (n * n), (col / n) % n, col % n);
            let img = self.image(i, j);
            let anc = unit(n, p, r).kron(&unit(n, q, s)).expect("small");
            img.kron(&anc)
                .expect("small")
                .permute_subsystems(&dims, &perm)
                .expect("consistent dims")
        })
    }

    /// `T (x) I_N`, with the ancilla appended after the whole output (one block).
    pub fn tensor_identity_one_sided(&self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(dim_err!("ancilla dimension must be positive"));
        }
        let part = Bipartition::new(self.out_part.d1, self.out_part.d2 * n)?;
        Self::from_fn(self.dim_in * n, part, &Limits::from_env(), |row, col| {
            let (i, p) = (row / n, row % n);
            let (j, r) = (col / n, col % n);
            self.image(i, j).kron(&unit(n, p, r)).expect("small")
        })
    }

    /// `T (x) R` with output split `(V1 (x) W1) (x) (V2 (x) W2)`.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let (d1, d2) = (self.out_part.d1, self.out_part.d2);
        let (e1, e2) = (other.out_part.d1, other.out_part.d2);
        let part = Bipartition::new(d1 * e1, d2 * e2)?;
        let m = other.dim_in;
        let dims = [d1, d2, e1, e2];
        let perm = [0, 2, 1, 3];
        Self::from_fn(self.dim_in * m, part, &Limits::from_env(), |row, col| {
            let (i, k) = (row / m, row % m);
            let (j, l) = (col / m, col % m);
            self.image(i, j)
                .kron(other.image(k, l))
                .expect("small")
                .permute_subsystems(&dims, &perm)
                .expect("consistent dims")
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct SopJson {
    dim_in: usize,
    d1: usize,
    d2: usize,
    action: Vec<ComplexMatrix>,
}

impl TryFrom<SopJson> for Superoperator {
    type Error = Error;

    fn try_from(j: SopJson) -> Result<Self> {
        Self::new(j.dim_in, Bipartition::new(j.d1, j.d2)?, j.action)
    }
}

impl From<Superoperator> for SopJson {
    fn from(t: Superoperator) -> Self {
        SopJson { dim_in: t.dim_in, d1: t.out_part.d1, d2: t.out_part.d2, action: t.action }
    }
}

fn unit(d: usize, i: usize, j: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(d, d);
    m[(i, j)] = C64::new(1.0, 0.0);
    m
}

impl LinearMap for Superoperator {
    fn dim_in(&self) -> usize {
        self.dim_in
    }

    fn out_part(&self) -> Bipartition {
        self.out_part
    }

    fn apply_outer(&self, u: &[C64], v: &[C64]) -> ComplexMatrix {
        self.apply(&ComplexMatrix::outer(u, v)).expect("vector lengths match dim_in")
    }

    fn coupling(&self, w: &ComplexMatrix) -> ComplexMatrix {
        let n = self.dim_in;
        ComplexMatrix::from_fn(n, n, |r, c| w.trace_of_product(self.image(c, r)))
    }
}

pub fn apply(t: &Superoperator, a: &ComplexMatrix) -> Result<ComplexMatrix> {
    t.apply(a)
}

/// `T(|i><j|) = |j><i|` on `C^d`, with the output split as `part`.
pub fn transpose_sop(d: usize, part: Bipartition) -> Result<Superoperator> {
    part.check(d)?;
    Superoperator::from_fn(d, part, &Limits::from_env(), |i, j| unit(d, j, i))
}

pub fn tensor_identity(t: &Superoperator, n: usize) -> Result<Superoperator> {
    t.tensor_identity(n)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SopNormCertificate {
    pub value: f64,
    /// Unit input vector `u` of the rank-one input `|u><v|`.
    pub u: ComplexMatrix,
    pub v: ComplexMatrix,
    /// Unitary on `V1`; for l1 certificates, the unitary on the whole output.
    pub u1: ComplexMatrix,
    /// Unitary on `V2`; `1x1` for l1 certificates.
    pub u2: ComplexMatrix,
    pub converged: bool,
    pub restart_index: usize,
    pub iterations: usize,
}

impl SopNormCertificate {
    /// `|Tr((u1 (x) u2) T(|u><v|))|` recomputed on `t`.
    pub fn evaluate<M: LinearMap + ?Sized>(&self, t: &M) -> Result<f64> {
        t.evaluate(self.u.data(), self.v.data(), &self.u1, &self.u2)
    }

    pub fn start(&self) -> SopStart {
        SopStart::Witness {
            u: self.u.data().to_vec(),
            v: self.v.data().to_vec(),
            u1: self.u1.clone(),
            u2: self.u2.clone(),
        }
    }
}

/// Where a seesaw run begins.
#[derive(Clone, Debug)]
pub enum SopStart {
    /// Output unitaries only; the vectors come from the first `(u, v)` step.
    Unitaries(ComplexMatrix, ComplexMatrix),
    /// A full explicit witness.
    Witness { u: Vec<C64>, v: Vec<C64>, u1: ComplexMatrix, u2: ComplexMatrix },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Target {
    /// Unrestricted unitary on the whole output.
    TraceNorm,
    /// Product unitary `U1 (x) U2`.
    Product,
}

fn top_pair<M: LinearMap + ?Sized>(
    t: &M,
    target: Target,
    u1: &ComplexMatrix,
    u2: &ComplexMatrix,
) -> Result<(f64, Vec<C64>, Vec<C64>)> {
    match target {
        Target::TraceNorm => t.coupling_top(u1),
        Target::Product => t.coupling_top_product(u1, u2),
    }
}

/// One seesaw run with the objective recorded after every sub-step.
fn run_seesaw<M: LinearMap + ?Sized>(
    t: &M,
    target: Target,
    start: SopStart,
    max_iters: usize,
    tol: f64,
) -> Result<(SopNormCertificate, Vec<f64>)> {
    let part = match target {
        Target::Product => t.out_part(),
        Target::TraceNorm => Bipartition::new(t.out_part().dim(), 1)?,
    };
    let (mut u1, mut u2, mut u, mut v, initial) = match start {
        SopStart::Unitaries(u1, u2) => {
            check_start(&u1, &u2, part)?;
            let (s, u, v) = top_pair(t, target, &u1, &u2)?;
            (u1, u2, u, v, s)
        }
        SopStart::Witness { u, v, u1, u2 } => {
            check_start(&u1, &u2, part)?;
            if u.len() != t.dim_in() || v.len() != t.dim_in() {
                return Err(dim_err!("witness vectors must have length {}", t.dim_in()));
            }
            let value = t.evaluate(&u, &v, &u1, &u2)?;
            (u1, u2, u, v, value)
        }
    };
    let mut objective = vec![initial];
    let mut prev = initial;
    let mut converged = false;
    let mut iterations = 0;
    for _ in 0..max_iters {
        iterations += 1;
        let a = t.apply_outer(&u, &v);
        match target {
            Target::TraceNorm => {
                let (w, val) = polar_maximizer(&a)?;
                u1 = w;
                objective.push(val);
            }
            Target::Product => {
                let (n1, n2, half, full) = norms::sweep(&a, part, &u2)?;
                u1 = n1;
                u2 = n2;
                objective.push(half);
                objective.push(full);
            }
        }
        let (s, nu, nv) = top_pair(t, target, &u1, &u2)?;
        u = nu;
        v = nv;
        objective.push(s);
        if has_converged(prev, s, tol) {
            converged = true;
            break;
        }
        prev = s;
    }
    let a = t.apply_outer(&u, &v);
    let tr = norms::product_objective(&a, part, &u1, &u2)?;
    let cert = SopNormCertificate {
        value: tr.norm(),
        u: ComplexMatrix::column(&u),
        v: ComplexMatrix::column(&v),
        u1: absorb_phase(&u1, tr),
        u2,
        converged,
        restart_index: 0,
        iterations,
    };
    Ok((cert, objective))
}

fn check_start(u1: &ComplexMatrix, u2: &ComplexMatrix, part: Bipartition) -> Result<()> {
    if u1.shape() != (part.d1, part.d1) || u2.shape() != (part.d2, part.d2) {
        return Err(dim_err!(
            "start unitaries are {}x{} and {}x{}, expected {}x{} and {}x{}",
            u1.rows(),
            u1.cols(),
            u2.rows(),
            u2.cols(),
            part.d1,
            part.d1,
            part.d2,
            part.d2
        ));
    }
    Ok(())
}

/// Restarts `0..warm.len()` use the supplied starts, the next one starts from
/// identity unitaries, and the remaining `opts.restarts - 1` from Haar-random ones.
fn best_certificate<M: LinearMap + ?Sized>(
    t: &M,
    target: Target,
    opts: &SeesawOptions,
    warm: &[SopStart],
) -> Result<SopNormCertificate> {
    opts.validate()?;
    let w = warm.len();
    let (d1, d2) = match target {
        Target::Product => (t.out_part().d1, t.out_part().d2),
        Target::TraceNorm => (t.out_part().dim(), 1),
    };
    best_of(
        w + opts.restarts,
        |k| {
            let start = if k < w {
                warm[k].clone()
            } else {
                let (a, b) = restart_unitaries(d1, d2, opts, k - w);
                SopStart::Unitaries(a, b)
            };
            let (mut cert, _) = run_seesaw(t, target, start, opts.max_iters, opts.tol)?;
            cert.restart_index = k;
            Ok(cert)
        },
        |c| c.value,
    )
}

/// Single run from `start`, returning the recorded objective sequence.
pub fn sop_product_seesaw<M: LinearMap + ?Sized>(
    t: &M,
    start: SopStart,
    opts: &SeesawOptions,
) -> Result<(SopNormCertificate, Vec<f64>)> {
    run_seesaw(t, Target::Product, start, opts.max_iters, opts.tol)
}

pub fn l1_seesaw<M: LinearMap + ?Sized>(
    t: &M,
    start: SopStart,
    opts: &SeesawOptions,
) -> Result<(SopNormCertificate, Vec<f64>)> {
    run_seesaw(t, Target::TraceNorm, start, opts.max_iters, opts.tol)
}

/// Certified lower bound on `||T||_1`. The certificate's `u1` is the output unitary.
pub fn l1_norm_lb<M: LinearMap + ?Sized>(t: &M, opts: &SeesawOptions) -> Result<SopNormCertificate> {
    best_certificate(t, Target::TraceNorm, opts, &[])
}

pub fn l1_norm_lb_with<M: LinearMap + ?Sized>(
    t: &M,
    opts: &SeesawOptions,
    warm: &[SopStart],
) -> Result<SopNormCertificate> {
    best_certificate(t, Target::TraceNorm, opts, warm)
}

/// Certified lower bound on the superoperator product norm.
pub fn sop_product_norm_lb<M: LinearMap + ?Sized>(t: &M, opts: &SeesawOptions) -> Result<SopNormCertificate> {
    best_certificate(t, Target::Product, opts, &[])
}

pub fn sop_product_norm_lb_with<M: LinearMap + ?Sized>(
    t: &M,
    opts: &SeesawOptions,
    warm: &[SopStart],
) -> Result<SopNormCertificate> {
    best_certificate(t, Target::Product, opts, warm)
}

/// Lower bound on the diamond norm: the l1 norm of `T (x) I_n`, `n = dim_in`.
pub fn diamond_lb(t: &Superoperator, opts: &SeesawOptions) -> Result<SopNormCertificate> {
    diamond_lb_with(t, opts, &[])
}

pub fn diamond_lb_with(t: &Superoperator, opts: &SeesawOptions, warm: &[SopStart]) -> Result<SopNormCertificate> {
    let n = t.dim_in();
    let limits = Limits::from_env();
    let images = (n as u128).pow(4);
    let out = (t.out_part().dim() * n) as u128;
    limits.check_entries("diamond extension", images * out * out)?;
    let ext = t.tensor_identity_one_sided(n)?;
    l1_norm_lb_with(&ext, opts, warm)
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct StabilityEntry {
    pub n: usize,
    pub value: f64,
    pub certificate: SopNormCertificate,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct StabilityReport {
    pub base_value: f64,
    pub base_certificate: SopNormCertificate,
    pub entries: Vec<StabilityEntry>,
}

pub fn stability_scan(t: &Superoperator, ns: &[usize], opts: &SeesawOptions) -> Result<StabilityReport> {
    stability_scan_with(t, ns, opts, |_| Vec::new())
}

/// Product norms of `T (x) I_N (x) I_N` for each `N` in `ns`.
///
/// Each run is additionally seeded with the previous best certificate lifted
/// into the larger ancilla, so the reported values never decrease in `N`.
/// `warm(N)` may supply further starts (for example known witnesses).
pub fn stability_scan_with(
    t: &Superoperator,
    ns: &[usize],
    opts: &SeesawOptions,
    warm: impl Fn(usize) -> Vec<SopStart>,
) -> Result<StabilityReport> {
    if ns.iter().any(|&n| n == 0) {
        return Err(Error::Input("ancilla dimensions must be at least 1".into()));
    }
    if ns.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::Input(format!("ancilla dimensions must be ascending, got {ns:?}")));
    }
    let base = sop_product_norm_lb(t, opts)?;
    let mut prev = (1, base.clone());
    let mut entries = Vec::with_capacity(ns.len());
    for &n in ns {
        let ext = t.tensor_identity(n)?;
        let mut starts = warm(n);
        starts.push(lift_certificate(t, &prev.1, prev.0, n)?);
        let cert = sop_product_norm_lb_with(&ext, opts, &starts)?;
        prev = (n, cert.clone());
        entries.push(StabilityEntry { n, value: cert.value, certificate: cert });
    }
    Ok(StabilityReport { base_value: base.value, base_certificate: base, entries })
}

/// Embeds a certificate for `T (x) I_from (x) I_from` into ancilla dimension `to >= from`
/// without changing its value: vectors are zero-padded, unitaries extended by the identity.
pub fn lift_certificate(t: &Superoperator, cert: &SopNormCertificate, from: usize, to: usize) -> Result<SopStart> {
    if to < from {
        return Err(Error::Input(format!("cannot lift from ancilla {from} down to {to}")));
    }
    let n = t.dim_in();
    let (d1, d2) = (t.out_part().d1, t.out_part().d2);
    let lift_vec = |x: &ComplexMatrix| -> Result<Vec<C64>> {
        if x.rows() != n * from * from {
            return Err(dim_err!("certificate vector has length {}, expected {}", x.rows(), n * from * from));
        }
        let mut out = vec![C64::new(0.0, 0.0); n * to * to];
        for i in 0..n {
            for p in 0..from {
                for q in 0..from {
                    out[(i * to + p) * to + q] = x.data()[(i * from + p) * from + q];
                }
            }
        }
        Ok(out)
    };
    let lift_unitary = |u: &ComplexMatrix, d: usize| -> Result<ComplexMatrix> {
        if u.shape() != (d * from, d * from) {
            return Err(dim_err!("certificate unitary has the wrong size"));
        }
        let mut out = ComplexMatrix::identity(d * to);
        for a in 0..d {
            for p in 0..from {
                out[(a * to + p, a * to + p)] = C64::new(0.0, 0.0);
            }
        }
        for a in 0..d {
            for p in 0..from {
                for b in 0..d {
                    for q in 0..from {
                        out[(a * to + p, b * to + q)] = u[(a * from + p, b * from + q)];
                    }
                }
            }
        }
        Ok(out)
    };
    Ok(SopStart::Witness {
        u: lift_vec(&cert.u)?,
        v: lift_vec(&cert.v)?,
        u1: lift_unitary(&cert.u1, d1)?,
        u2: lift_unitary(&cert.u2, d2)?,
    })
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SupermultWitness {
    /// Value of the tensored witness evaluated on `T (x) R`.
    pub tensor_value: f64,
    /// Product of the two separate certificate values.
    pub product_of_values: f64,
    pub t_certificate: SopNormCertificate,
    pub r_certificate: SopNormCertificate,
}

/// Certifies `||T (x) R|| >= ||T|| ||R||` by evaluating the tensor product of
/// the two separate witnesses on `T (x) R`.
pub fn supermult_witness(t: &Superoperator, r: &Superoperator, opts: &SeesawOptions) -> Result<SupermultWitness> {
    let tc = sop_product_norm_lb(t, opts)?;
    let rc = sop_product_norm_lb(r, opts)?;
    let tr = t.tensor(r)?;
    let u = kron_vec(tc.u.data(), rc.u.data());
    let v = kron_vec(tc.v.data(), rc.v.data());
    let u1 = tc.u1.kron(&rc.u1)?;
    let u2 = tc.u2.kron(&rc.u2)?;
    let tensor_value = tr.evaluate(&u, &v, &u1, &u2)?;
    Ok(SupermultWitness {
        tensor_value,
        product_of_values: tc.value * rc.value,
        t_certificate: tc,
        r_certificate: rc,
    })
}

/// Explicit witnesses for the transpose maps.
pub mod witness {
    use super::*;

    /// `sum_i |i, i> / sqrt(d)`.
    pub fn maximally_entangled(d: usize) -> Vec<C64> {
        let s = 1.0 / (d as f64).sqrt();
        let mut v = vec![C64::new(0.0, 0.0); d * d];
        for i in 0..d {
            v[i * d + i] = C64::new(s, 0.0);
        }
        v
    }

    /// Unitary on `C^d (x) C^n` (`d <= n`) swapping `|a, p> <-> |p, a>` for `a, p < d`
    /// and acting as the identity elsewhere.
    pub fn partial_swap(d: usize, n: usize) -> ComplexMatrix {
        assert!(d <= n, "partial swap needs d <= n");
        let dim = d * n;
        let mut m = ComplexMatrix::zeros(dim, dim);
        for a in 0..d {
            for p in 0..n {
                let src = a * n + p;
                let dst = if p < d { p * n + a } else { src };
                m[(dst, src)] = C64::new(1.0, 0.0);
            }
        }
        m
    }

    /// Witness for `transpose_sop(d1 d2, (d1, d2)).tensor_identity(n)`:
    /// `u = v = sum_{i1,i2} |i1 i2, i1, i2> / sqrt(d)` with partial swaps on both sides.
    /// Its value is `d = d1 d2`.
    pub fn transpose_ancilla(part: Bipartition, n: usize) -> Result<SopStart> {
        let (d1, d2) = (part.d1, part.d2);
        if n < d1.max(d2) {
            return Err(Error::Input(format!("ancilla {n} too small for ({d1}, {d2})")));
        }
        let d = d1 * d2;
        let s = 1.0 / (d as f64).sqrt();
        let mut u = vec![C64::new(0.0, 0.0); d * n * n];
        for i1 in 0..d1 {
            for i2 in 0..d2 {
                let i = i1 * d2 + i2;
                u[(i * n + i1) * n + i2] = C64::new(s, 0.0);
            }
        }
        Ok(SopStart::Witness {
            v: u.clone(),
            u,
            u1: partial_swap(d1, n),
            u2: partial_swap(d2, n),
        })
    }

    /// Witness for the l1 norm of `transpose_sop(d, _).tensor_identity_one_sided(d)`:
    /// the maximally entangled input and the swap, of value `d`.
    pub fn transpose_one_sided(d: usize) -> SopStart {
        let phi = maximally_entangled(d);
        SopStart::Witness {
            u: phi.clone(),
            v: phi,
            u1: partial_swap(d, d),
            u2: ComplexMatrix::identity(1),
        }
    }
}

/// Haar-random unitary of the requested output factor; re-exported for tests.
pub fn random_local_unitary(d: usize, seed: u64) -> ComplexMatrix {
    random_unitary(d, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{random_matrix, random_unit_vector};

    fn part(d1: usize, d2: usize) -> Bipartition {
        Bipartition::new(d1, d2).unwrap()
    }

    pub(crate) fn random_sop(dim_in: usize, p: Bipartition, seed: u64) -> Superoperator {
        let d = p.dim();
        let mut k = 0;
        Superoperator::from_fn(dim_in, p, &Limits::default(), |_, _| {
            k += 1;
            random_matrix(d, d, crate::linalg::derive_seed(seed, k))
        })
        .unwrap()
    }

    #[test]
    fn identity_applies_as_identity() {
        let id = Superoperator::identity(part(1, 3)).unwrap();
        let a = random_matrix(3, 3, 1);
        assert_eq!(id.apply(&a).unwrap(), a);
    }

    #[test]
    fn transpose_examples() {
        let t = transpose_sop(2, part(1, 2)).unwrap();
        let a = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        let at = ComplexMatrix::from_real_rows(&[&[1.0, 3.0], &[2.0, 4.0]]).unwrap();
        assert_eq!(t.apply(&a).unwrap(), at);
        let s = &a + &a.transpose();
        assert_eq!(t.apply(&s).unwrap(), s);
        let t4 = transpose_sop(4, part(2, 2)).unwrap();
        assert_eq!(t4.image(1, 2), &unit(4, 2, 1));
        assert!(transpose_sop(4, part(2, 3)).is_err());
    }

    #[test]
    fn apply_is_linear() {
        let t = random_sop(3, part(2, 2), 4);
        let a = random_matrix(3, 3, 5);
        let b = random_matrix(3, 3, 6);
        let (x, y) = (C64::new(0.3, -1.2), C64::new(2.0, 0.5));
        let lhs = t.apply(&(&a.scale(x) + &b.scale(y))).unwrap();
        let rhs = &t.apply(&a).unwrap().scale(x) + &t.apply(&b).unwrap().scale(y);
        assert!(lhs.max_abs_diff(&rhs) < 1e-10);
        assert!(t.apply(&ComplexMatrix::identity(2)).is_err());
    }

    #[test]
    fn coupling_matches_definition() {
        let t = random_sop(3, part(2, 2), 7);
        let w = random_unitary(4, 8);
        let u = random_unit_vector(3, 9);
        let v = random_unit_vector(3, 10);
        let k = t.coupling(&w);
        let lhs: C64 = crate::linalg::inner(&v, &k.mul_vec(&u));
        let rhs = w.trace_of_product(&t.apply_outer(&u, &v));
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn tensor_identity_of_identity() {
        let id = Superoperator::identity(part(2, 1)).unwrap();
        let ext = id.tensor_identity(2).unwrap();
        assert_eq!(ext.out_part(), part(4, 2));
        assert_eq!(ext, Superoperator::identity(part(4, 2)).unwrap());
        let one = id.tensor_identity(1).unwrap();
        assert_eq!(one, id);
    }

    #[test]
    fn tensor_identity_basis_action() {
        let t = random_sop(2, part(2, 2), 11);
        let n = 2;
        let ext = t.tensor_identity(n).unwrap();
        // (T (x) I (x) I)(|i,p,q><j,r,s|) = T(|i><j|) (x) |p><r| (x) |q><s|, reordered
        let (i, p, q, j, r, s) = (1, 0, 1, 0, 1, 1);
        let img = ext.image((i * n + p) * n + q, (j * n + r) * n + s);
        let base = t.image(i, j);
        for a in 0..2 {
            for b in 0..2 {
                for a2 in 0..2 {
                    for b2 in 0..2 {
                        let row = (a * n + p) * (2 * n) + b * n + q;
                        let col = (a2 * n + r) * (2 * n) + b2 * n + s;
                        assert_eq!(img[(row, col)], base[(a * 2 + b, a2 * 2 + b2)]);
                    }
                }
            }
        }
    }

    #[test]
    fn l1_of_identity_and_transpose() {
        let opts = SeesawOptions::default();
        let id = Superoperator::identity(part(2, 2)).unwrap();
        assert!((l1_norm_lb(&id, &opts).unwrap().value - 1.0).abs() < 1e-9);
        let t = transpose_sop(2, part(1, 2)).unwrap();
        let c = l1_norm_lb(&t, &opts).unwrap();
        assert!((c.value - 1.0).abs() < 1e-6);
        assert!((c.evaluate(&t).unwrap() - c.value).abs() < 1e-10);
    }

    #[test]
    fn stabilized_qubit_transpose_reaches_two() {
        let opts = SeesawOptions::default();
        let t = transpose_sop(2, part(1, 2)).unwrap();
        let ext = t.tensor_identity(2).unwrap();
        assert!(l1_norm_lb(&ext, &opts).unwrap().value >= 2.0 - 1e-6);
        let one = t.tensor_identity_one_sided(2).unwrap();
        let c = l1_norm_lb_with(&one, &opts, &[witness::transpose_one_sided(2)]).unwrap();
        assert!(c.value >= 2.0 - 1e-6);
    }

    #[test]
    fn transpose_witnesses_have_claimed_values() {
        for (p, n, expected) in [(part(2, 2), 2, 4.0), (part(1, 2), 2, 2.0), (part(1, 3), 3, 3.0)] {
            let t = transpose_sop(p.dim(), p).unwrap();
            let ext = t.tensor_identity(n).unwrap();
            let SopStart::Witness { u, v, u1, u2 } = witness::transpose_ancilla(p, n).unwrap() else {
                unreachable!()
            };
            let val = ext.evaluate(&u, &v, &u1, &u2).unwrap();
            assert!((val - expected).abs() < 1e-12, "{p:?}: {val}");
        }
    }

    #[test]
    fn diamond_of_qubit_transpose() {
        let t = transpose_sop(2, part(1, 2)).unwrap();
        let c = diamond_lb(&t, &SeesawOptions { restarts: 64, ..Default::default() }).unwrap();
        assert!((c.value - 2.0).abs() < 1e-6, "{}", c.value);
        let id = Superoperator::identity(part(1, 2)).unwrap();
        assert!((diamond_lb(&id, &SeesawOptions::default()).unwrap().value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn product_norm_of_identity_and_transpose() {
        let opts = SeesawOptions::default();
        let id = Superoperator::identity(part(2, 2)).unwrap();
        assert!((sop_product_norm_lb(&id, &opts).unwrap().value - 1.0).abs() < 1e-9);
        let t = transpose_sop(4, part(2, 2)).unwrap();
        assert!(sop_product_norm_lb(&t, &opts).unwrap().value <= 1.0 + 1e-6);
    }

    #[test]
    fn seesaw_objective_is_monotone() {
        let opts = SeesawOptions::default();
        for seed in 0..5 {
            let t = random_sop(3, part(2, 2), 50 + seed);
            let (u1, u2) = restart_unitaries(2, 2, &SeesawOptions::with_seed(seed), 1);
            let (_, obj) = sop_product_seesaw(&t, SopStart::Unitaries(u1, u2), &opts).unwrap();
            for w in obj.windows(2) {
                assert!(w[1] >= w[0] - 1e-10 * w[0].abs().max(1.0), "{w:?}");
            }
        }
    }

    #[test]
    fn lifting_preserves_value() {
        let t = random_sop(2, part(2, 1), 70);
        let cert = sop_product_norm_lb(&t, &SeesawOptions::default()).unwrap();
        let SopStart::Witness { u, v, u1, u2 } = lift_certificate(&t, &cert, 1, 3).unwrap() else {
            unreachable!()
        };
        let ext = t.tensor_identity(3).unwrap();
        assert!((ext.evaluate(&u, &v, &u1, &u2).unwrap() - cert.value).abs() < 1e-10);
        assert!(u1.unitarity_error() < 1e-12 && u2.unitarity_error() < 1e-12);
    }

    #[test]
    fn scan_rejects_descending() {
        let id = Superoperator::identity(part(1, 2)).unwrap();
        assert!(stability_scan(&id, &[2, 1], &SeesawOptions::default()).is_err());
        assert!(stability_scan(&id, &[0], &SeesawOptions::default()).is_err());
    }

    #[test]
    fn resource_guard() {
        let big = Limits { dim_cap: 4, ..Limits::default() };
        assert!(matches!(
            Superoperator::from_fn(5, part(1, 1), &big, |_, _| ComplexMatrix::identity(1)),
            Err(Error::Resource(_))
        ));
    }

    #[test]
    fn superoperator_json() {
        let t = transpose_sop(2, part(1, 2)).unwrap();
        let s = serde_json::to_string(&t).unwrap();
        assert!(s.starts_with(r#"{"dimIn":2,"d1":1,"d2":2,"action":[{"rows":2"#));
        let back: Superoperator = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t);
        assert!(serde_json::from_str::<Superoperator>(r#"{"dimIn":2,"d1":1,"d2":2,"action":[]}"#).is_err());
    }
}
