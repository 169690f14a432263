//! Factorizations backed by nalgebra: SVD, polar maximizer, Schmidt decomposition.

use nalgebra::DMatrix;

use super::matrix::{Bipartition, ComplexMatrix, C64};
use crate::error::{dim_err, Error, Result};

/// Schmidt coefficients below this are reported as zero.
pub const SCHMIDT_CUTOFF: f64 = 1e-12;

/// Thin singular value decomposition `A = left * diag(singulars) * right_h`.
#[derive(Clone, Debug)]
pub struct Svd {
    /// `m x k` with orthonormal columns, `k = min(m, n)`.
    pub left: ComplexMatrix,
    /// Descending, non-negative.
    pub singulars: Vec<f64>,
    /// `k x n` with orthonormal rows.
    pub right_h: ComplexMatrix,
}

impl Svd {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let k = self.singulars.len();
        let scaled = ComplexMatrix::from_fn(self.left.rows(), k, |i, j| {
            self.left[(i, j)] * self.singulars[j]
        });
        &scaled * &self.right_h
    }

    /// Top right singular vector (as a column of `right_h^dag`).
    pub fn top_right(&self) -> Vec<C64> {
        self.right_h.row(0).iter().map(|z| z.conj()).collect()
    }

    pub fn top_left(&self) -> Vec<C64> {
        self.left.column_vec(0)
    }
}

pub(crate) fn to_nalgebra(a: &ComplexMatrix) -> DMatrix<C64> {
    DMatrix::from_row_slice(a.rows(), a.cols(), a.data())
}

pub(crate) fn from_nalgebra(m: &DMatrix<C64>) -> ComplexMatrix {
    ComplexMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Residual tolerance for accepting a factorization, relative to `max|a_ij|`.
const SVD_CHECK_TOL: f64 = 1e-11;

/// Thin SVD. nalgebra's bidiagonal QR is used first; its result is checked
/// against the input and replaced by a one-sided Jacobi SVD when the check
/// fails (this happens on nearly rank-deficient structured inputs).
pub fn svd(a: &ComplexMatrix) -> Result<Svd> {
    if !a.is_finite() {
        return Err(Error::Input("svd input has non-finite entries".into()));
    }
    let (m, n) = a.shape();
    // strongly rectangular: factor A = Q R and decompose the small triangle
    if m > 2 * n && n > 0 {
        let qr = to_nalgebra(a).qr();
        let (q, r) = (from_nalgebra(&qr.q()), from_nalgebra(&qr.r()));
        let small = square_svd(&r);
        return Ok(Svd { left: &q * &small.left, singulars: small.singulars, right_h: small.right_h });
    }
    if n > 2 * m && m > 0 {
        let t = svd(&a.adjoint())?;
        return Ok(Svd { left: t.right_h.adjoint(), singulars: t.singulars, right_h: t.left.adjoint() });
    }
    Ok(square_svd(a))
}

fn square_svd(a: &ComplexMatrix) -> Svd {
    let (m, n) = a.shape();
    let k = m.min(n);
    let dec = to_nalgebra(a).svd(true, true);
    let u = dec.u.expect("requested left vectors");
    let vt = dec.v_t.expect("requested right vectors");
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&x, &y| dec.singular_values[y].total_cmp(&dec.singular_values[x]));
    let singulars = order.iter().map(|&i| dec.singular_values[i].max(0.0)).collect();
    let left = ComplexMatrix::from_fn(m, k, |i, j| u[(i, order[j])]);
    let right_h = ComplexMatrix::from_fn(k, n, |i, j| vt[(order[i], j)]);
    let out = Svd { left, singulars, right_h };
    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    let ok = out.reconstruct().max_abs_diff(a) <= SVD_CHECK_TOL * scale
        && out.left.isometry_error() <= SVD_CHECK_TOL
        && out.right_h.adjoint().isometry_error() <= SVD_CHECK_TOL;
    if ok {
        out
    } else {
        jacobi_svd(a)
    }
}

/// One-sided (Hestenes) Jacobi SVD: rotates column pairs of `a` (or `a^dag` when
/// wide) until they are mutually orthogonal.
pub(crate) fn jacobi_svd(a: &ComplexMatrix) -> Svd {
    let (m, n) = a.shape();
    if m < n {
        let t = jacobi_svd(&a.adjoint());
        return Svd { left: t.right_h.adjoint(), singulars: t.singulars, right_h: t.left.adjoint() };
    }
    // columns stored contiguously
    let mut u: Vec<Vec<C64>> = (0..n).map(|j| a.column_vec(j)).collect();
    let mut v: Vec<Vec<C64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }).collect())
        .collect();
    let eps = f64::EPSILON;
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = u[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = u[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma: C64 = u[p].iter().zip(&u[q]).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                if g == 0.0 || g <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                // make the off-diagonal real by rephasing column q
                let phase = gamma.conj() / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for cols in [&mut u, &mut v] {
                    let (lo, hi) = cols.split_at_mut(q);
                    for (x, y) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
                        let yq = *y * phase;
                        let xp = *x;
                        *x = xp * c - yq * s;
                        *y = xp * s + yq * c;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let norms: Vec<f64> = u.iter().map(|col| super::matrix::vec_norm(col)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let top = norms[order[0]].max(f64::MIN_POSITIVE);
    let mut left_cols: Vec<Vec<C64>> = Vec::with_capacity(n);
    let mut singulars = Vec::with_capacity(n);
    for &j in &order {
        let s = norms[j];
        singulars.push(s);
        if s > 1e3 * eps * top {
            left_cols.push(u[j].iter().map(|z| z / s).collect());
        } else {
            left_cols.push(Vec::new());
        }
    }
    // complete the left vectors of (numerically) zero singular values
    let mut e = 0;
    for j in 0..n {
        if !left_cols[j].is_empty() {
            continue;
        }
        loop {
            let mut cand = vec![C64::new(0.0, 0.0); m];
            cand[e] = C64::new(1.0, 0.0);
            e += 1;
            for _ in 0..2 {
                for b in left_cols.iter().filter(|b| !b.is_empty()) {
                    let pr: C64 = b.iter().zip(&cand).map(|(x, y)| x.conj() * y).sum();
                    for (ci, bi) in cand.iter_mut().zip(b) {
                        *ci -= pr * bi;
                    }
                }
            }
            let nn = super::matrix::vec_norm(&cand);
            if nn > 1e-6 {
                left_cols[j] = cand.into_iter().map(|z| z / nn).collect();
                break;
            }
        }
    }
    let left = ComplexMatrix::from_fn(m, n, |i, j| left_cols[j][i]);
    let right_h = ComplexMatrix::from_fn(n, n, |i, j| v[order[i]][j].conj());
    Svd { left, singulars, right_h }
}

pub fn singular_values(a: &ComplexMatrix) -> Result<Vec<f64>> {
    if !a.is_finite() {
        return Err(Error::Input("svd input has non-finite entries".into()));
    }
    let mut s: Vec<f64> = to_nalgebra(a).singular_values().iter().map(|x| x.max(0.0)).collect();
    s.sort_by(|x, y| y.total_cmp(x));
    // cheap consistency check: sum of squares equals the Frobenius norm squared
    let fro = a.frobenius_norm().powi(2);
    let sq: f64 = s.iter().map(|x| x * x).sum();
    if (sq - fro).abs() > SVD_CHECK_TOL * fro.max(f64::MIN_POSITIVE) {
        return Ok(jacobi_svd(a).singulars);
    }
    Ok(s)
}

/// Largest singular value with its right and left singular vectors,
/// so that `<left| A |right> = sigma`.
pub fn top_singular_triple(a: &ComplexMatrix) -> Result<(f64, Vec<C64>, Vec<C64>)> {
    let d = svd(a)?;
    Ok((d.singulars[0], d.top_right(), d.top_left()))
}

/// The unitary `U` maximizing `|Tr(UA)|`, together with `Tr(UA) = sum of singular values`.
///
/// With `A = W S R^dag` the maximizer is `U = R W^dag`.
pub fn polar_maximizer(a: &ComplexMatrix) -> Result<(ComplexMatrix, f64)> {
    a.require_square("polar maximizer input")?;
    let d = svd(a)?;
    let u = &d.right_h.adjoint() * &d.left.adjoint();
    let value = d.singulars.iter().sum();
    Ok((u, value))
}

/// Schmidt decomposition `u = sum_i c_i |l_i> (x) |r_i>` of a bipartite vector.
#[derive(Clone, Debug)]
pub struct SchmidtDecomposition {
    /// Descending; entries below [`SCHMIDT_CUTOFF`] are dropped.
    pub coefficients: Vec<f64>,
    /// `d1 x k`, one orthonormal column per retained coefficient.
    pub left_basis: ComplexMatrix,
    /// `d2 x k`.
    pub right_basis: ComplexMatrix,
    full: Svd,
}

impl SchmidtDecomposition {
    /// All `min(d1, d2)` singular values, including the truncated tail.
    pub fn full_coefficients(&self) -> &[f64] {
        &self.full.singulars
    }

    pub fn rank(&self) -> usize {
        self.coefficients.len()
    }

    /// Rebuilds the vector from the untruncated factors.
    pub fn reconstruct(&self) -> Vec<C64> {
        self.full.reconstruct().into_data()
    }
}

pub fn schmidt(u: &ComplexMatrix, part: Bipartition) -> Result<SchmidtDecomposition> {
    if u.cols() != 1 {
        return Err(dim_err!("schmidt expects a column vector, got {}x{}", u.rows(), u.cols()));
    }
    part.check(u.rows())?;
    schmidt_slice(u.data(), part)
}

pub(crate) fn schmidt_slice(u: &[C64], part: Bipartition) -> Result<SchmidtDecomposition> {
    part.check(u.len())?;
    // row-major reshape: row index is the first factor
    let m = ComplexMatrix::new(part.d1, part.d2, u.to_vec())?;
    let full = svd(&m)?;
    let mut k = full.singulars.iter().take_while(|&&s| s >= SCHMIDT_CUTOFF).count();
    if k == 0 {
        k = 1;
    }
    let coefficients = full.singulars[..k]
        .iter()
        .map(|&s| if s < SCHMIDT_CUTOFF { 0.0 } else { s })
        .collect();
    let left_basis = ComplexMatrix::from_fn(part.d1, k, |i, j| full.left[(i, j)]);
    let right_basis = ComplexMatrix::from_fn(part.d2, k, |i, j| full.right_h[(j, i)]);
    Ok(SchmidtDecomposition { coefficients, left_basis, right_basis, full })
}

/// Orthonormal basis (as columns) of the span of `columns`, each of length `n`,
/// via twice-applied modified Gram-Schmidt with a relative rank cutoff.
/// Stops early once `max_rank` vectors have been found.
pub(crate) fn column_span(n: usize, columns: impl IntoIterator<Item = Vec<C64>>, max_rank: usize) -> ComplexMatrix {
    let mut basis: Vec<Vec<C64>> = Vec::new();
    for mut v in columns {
        if basis.len() >= max_rank {
            break;
        }
        let scale = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for b in &basis {
                let p: C64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                for (vi, bi) in v.iter_mut().zip(b) {
                    *vi -= p * bi;
                }
            }
        }
        let norm = super::matrix::vec_norm(&v);
        if norm > 1e-8 * scale {
            v.iter_mut().for_each(|z| *z /= norm);
            basis.push(v);
        }
    }
    if basis.is_empty() {
        return ComplexMatrix::zeros(n, 1);
    }
    ComplexMatrix::from_fn(n, basis.len(), |i, j| basis[j][i])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::matrix::ZERO;
    use crate::linalg::random::{random_matrix, random_unit_vector};

    #[test]
    fn identity_singulars() {
        let s = svd(&ComplexMatrix::identity(3)).unwrap();
        for x in &s.singulars {
            assert!((x - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn diagonal_singulars_sorted() {
        let s = svd(&ComplexMatrix::real_diag(&[0.0, 5.0])).unwrap();
        assert!((s.singulars[0] - 5.0).abs() < 1e-14);
        assert!(s.singulars[1].abs() < 1e-14);
    }

    #[test]
    fn rectangular_reconstruction() {
        for seed in 0..5 {
            let a = random_matrix(6, 4, seed);
            let s = svd(&a).unwrap();
            assert_eq!(s.left.shape(), (6, 4));
            assert_eq!(s.right_h.shape(), (4, 4));
            assert!(s.reconstruct().frobenius_distance(&a) < 1e-10);
            assert!(s.singulars.windows(2).all(|w| w[0] >= w[1]));
            let wide = a.transpose();
            let s2 = svd(&wide).unwrap();
            assert!(s2.reconstruct().frobenius_distance(&wide) < 1e-10);
        }
    }

    #[test]
    fn svd_rejects_nonfinite() {
        let mut a = ComplexMatrix::identity(2);
        a.data_mut()[1] = C64::new(f64::INFINITY, 0.0);
        assert!(matches!(svd(&a), Err(Error::Input(_))));
    }

    #[test]
    fn polar_examples() {
        let (u, v) = polar_maximizer(&ComplexMatrix::identity(3)).unwrap();
        assert!((v - 3.0).abs() < 1e-12);
        assert!(u.max_abs_diff(&ComplexMatrix::identity(3)) < 1e-12);

        let flip = ComplexMatrix::real_diag(&[1.0, -1.0]);
        let (u, v) = polar_maximizer(&flip).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        assert!(u.max_abs_diff(&flip) < 1e-12);

        assert!(matches!(
            polar_maximizer(&ComplexMatrix::zeros(2, 3)),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn polar_matches_singular_sum() {
        for seed in 0..10 {
            let a = random_matrix(5, 5, 100 + seed);
            let (u, v) = polar_maximizer(&a).unwrap();
            assert!(u.unitarity_error() < 1e-10);
            let t = u.trace_of_product(&a);
            let s: f64 = svd(&a).unwrap().singulars.iter().sum();
            assert!((t.re - s).abs() < 1e-10 && t.im.abs() < 1e-10);
            assert!((v - s).abs() < 1e-10);
        }
    }

    #[test]
    fn schmidt_examples() {
        let part = Bipartition::new(2, 2).unwrap();
        let s = schmidt(&ComplexMatrix::basis(4, 0), part).unwrap();
        assert_eq!(s.coefficients.len(), 1);
        assert!((s.coefficients[0] - 1.0).abs() < 1e-14);

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let epr = ComplexMatrix::column(&[C64::new(h, 0.0), ZERO, ZERO, C64::new(h, 0.0)]);
        let s = schmidt(&epr, part).unwrap();
        assert_eq!(s.rank(), 2);
        for c in &s.coefficients {
            assert!((c - h).abs() < 1e-14);
        }

        let u = random_unit_vector(6, 9);
        let s = schmidt(&ComplexMatrix::column(&u), Bipartition::new(2, 3).unwrap()).unwrap();
        let total: f64 = s.coefficients.iter().map(|c| c * c).sum();
        assert!((total - 1.0).abs() < 1e-10);
        let rec = s.reconstruct();
        let err: f64 = rec.iter().zip(&u).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        assert!(err < 1e-10);

        assert!(schmidt(&ComplexMatrix::basis(5, 0), part).is_err());
    }

    #[test]
    fn jacobi_matches_reference() {
        for (m, n, seed) in [(6, 4, 1), (4, 6, 2), (5, 5, 3), (1, 3, 4), (3, 1, 5)] {
            let a = random_matrix(m, n, seed);
            let j = jacobi_svd(&a);
            assert!(j.reconstruct().max_abs_diff(&a) < 1e-12);
            assert!(j.left.isometry_error() < 1e-12);
            assert!(j.right_h.adjoint().isometry_error() < 1e-12);
            let s = svd(&a).unwrap();
            for (x, y) in j.singulars.iter().zip(&s.singulars) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn jacobi_rank_deficient() {
        let u = random_unit_vector(5, 1);
        let v = random_unit_vector(5, 2);
        let a = ComplexMatrix::outer(&u, &v).scale_real(3.0);
        let j = jacobi_svd(&a);
        assert!((j.singulars[0] - 3.0).abs() < 1e-12);
        assert!(j.singulars[1..].iter().all(|&s| s < 1e-12));
        assert!(j.left.isometry_error() < 1e-12);
        assert!(j.reconstruct().max_abs_diff(&a) < 1e-12);
        let z = jacobi_svd(&ComplexMatrix::zeros(3, 2));
        assert!(z.left.isometry_error() < 1e-12 && z.singulars.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn span_of_projector_columns() {
        let p = ComplexMatrix::real_diag(&[0.0, 1.0, 0.0, 1.0]);
        let cols = (0..4).map(|j| p.column_vec(j));
        let q = column_span(4, cols, 4);
        assert_eq!(q.cols(), 2);
        assert!(q.isometry_error() < 1e-12);
    }
}
