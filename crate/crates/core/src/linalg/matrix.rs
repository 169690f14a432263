use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{dim_err, Error, Result};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Dense complex matrix stored row-major.
///
/// Column vectors are `n x 1` matrices. Composite spaces are always ordered
/// left to right, so the index of `|a, b>` in `A (x) B` is `a * dim(B) + b`.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

/// An ordered split `d1 x d2` of a space into two tensor factors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bipartition {
    pub d1: usize,
    pub d2: usize,
}

impl Bipartition {
    pub fn new(d1: usize, d2: usize) -> Result<Self> {
        if d1 == 0 || d2 == 0 {
            return Err(dim_err!("bipartition factors must be positive, got ({d1}, {d2})"));
        }
        Ok(Self { d1, d2 })
    }

    pub fn dim(&self) -> usize {
        self.d1 * self.d2
    }

    /// Checks that the split fits a space of dimension `n`.
    pub fn check(&self, n: usize) -> Result<()> {
        if self.d1 == 0 || self.d2 == 0 || self.dim() != n {
            return Err(dim_err!(
                "bipartition ({}, {}) does not factor dimension {n}",
                self.d1,
                self.d2
            ));
        }
        Ok(())
    }
}

impl ComplexMatrix {
    /// Builds a matrix from row-major data, rejecting wrong lengths and non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(dim_err!("matrix dimensions must be positive, got {rows}x{cols}"));
        }
        let len = rows
            .checked_mul(cols)
            .ok_or_else(|| dim_err!("{rows}x{cols} overflows"))?;
        if data.len() != len {
            return Err(dim_err!("{rows}x{cols} matrix needs {len} entries, got {}", data.len()));
        }
        if let Some(pos) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Input(format!("non-finite entry at position {pos}")));
        }
        Ok(Self { rows, cols, data })
    }

    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_raw(rows, cols, vec![ZERO; rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::from_raw(rows, cols, data)
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let data = rows
            .iter()
            .flat_map(|row| row.iter().map(|&x| C64::new(x, 0.0)))
            .collect();
        Self::new(r, c, data)
    }

    pub fn diag(values: &[C64]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m.data[i * n + i] = v;
        }
        m
    }

    pub fn real_diag(values: &[f64]) -> Self {
        let vals: Vec<C64> = values.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::diag(&vals)
    }

    pub fn column(entries: &[C64]) -> Self {
        Self::from_raw(entries.len(), 1, entries.to_vec())
    }

    /// Computational basis vector `|index>` in `C^dim`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut v = Self::zeros(dim, 1);
        v.data[index] = ONE;
        v
    }

    /// The outer product `|u><v|` of two vectors given as slices.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        let mut data = Vec::with_capacity(u.len() * v.len());
        for a in u {
            for b in v {
                data.push(a * b.conj());
            }
        }
        Self::from_raw(u.len(), v.len(), data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column_vec(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self.data[i * self.cols + j]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub(crate) fn require_square(&self, what: &str) -> Result<usize> {
        if !self.is_square() {
            return Err(dim_err!("{what} must be square, got {}x{}", self.rows, self.cols));
        }
        Ok(self.rows)
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.data[j * self.cols + i].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.data[j * self.cols + i])
    }

    pub fn conj(&self) -> Self {
        Self::from_raw(self.rows, self.cols, self.data.iter().map(|z| z.conj()).collect())
    }

    pub fn scale(&self, c: C64) -> Self {
        Self::from_raw(self.rows, self.cols, self.data.iter().map(|z| z * c).collect())
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self.data[i * self.cols + i]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.shape(), other.shape(), "shape mismatch in max_abs_diff");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_distance(&self, other: &Self) -> f64 {
        assert_eq!(self.shape(), other.shape(), "shape mismatch in frobenius_distance");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Matrix product with dimension checking.
    ///
    /// The inner loop skips exact zeros of `self`, so products with permutation
    /// or projector factors cost roughly `nnz(self) * cols(other)`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(dim_err!(
                "cannot multiply {}x{} by {}x{}",
                self.rows,
                self.cols,
                other.rows,
                other.cols
            ));
        }
        let (n, m) = (self.rows, other.cols);
        let mut out = vec![ZERO; n * m];
        for i in 0..n {
            let orow = &mut out[i * m..(i + 1) * m];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                for (o, b) in orow.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(Self::from_raw(n, m, out))
    }

    /// `self * v` for a vector given as a slice.
    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "matrix-vector dimension mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `Tr(self * other)` without forming the product.
    pub fn trace_of_product(&self, other: &Self) -> C64 {
        assert_eq!(self.cols, other.rows, "trace_of_product dimension mismatch");
        assert_eq!(self.rows, other.cols, "trace_of_product dimension mismatch");
        let mut acc = ZERO;
        for i in 0..self.rows {
            for k in 0..self.cols {
                acc += self.data[i * self.cols + k] * other.data[k * other.cols + i];
            }
        }
        acc
    }

    /// Kronecker product `self (x) other`.
    pub fn kron(&self, other: &Self) -> Result<Self> {
        let rows = self
            .rows
            .checked_mul(other.rows)
            .ok_or_else(|| dim_err!("kron row count overflows"))?;
        let cols = self
            .cols
            .checked_mul(other.cols)
            .ok_or_else(|| dim_err!("kron column count overflows"))?;
        rows.checked_mul(cols)
            .ok_or_else(|| dim_err!("kron of {rows}x{cols} overflows"))?;
        let mut out = vec![ZERO; rows * cols];
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.data[i * self.cols + j];
                if a == ZERO {
                    continue;
                }
                for k in 0..other.rows {
                    let base = (i * other.rows + k) * cols + j * other.cols;
                    for (l, b) in other.row(k).iter().enumerate() {
                        out[base + l] = a * b;
                    }
                }
            }
        }
        Ok(Self::from_raw(rows, cols, out))
    }

    /// Deviation `max |(U^dag U - I)_{ij}|`; zero for an exact unitary.
    pub fn unitarity_error(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        self.isometry_error()
    }

    /// Deviation of the columns from orthonormality, `max |(A^dag A - I)_{ij}|`.
    pub fn isometry_error(&self) -> f64 {
        let gram = self.adjoint().matmul(self).expect("adjoint shapes agree");
        gram.max_abs_diff(&Self::identity(self.cols))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_error() <= tol
    }

    pub fn hermiticity_error(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        self.max_abs_diff(&self.adjoint())
    }

    /// Reorders tensor factors of a square matrix over `dims[0] (x) dims[1] (x) ...`.
    ///
    /// Position `k` of the result holds the old factor `perm[k]`.
    pub fn permute_subsystems(&self, dims: &[usize], perm: &[usize]) -> Result<Self> {
        let n = self.require_square("permuted matrix")?;
        let map = subsystem_permutation(dims, perm)?;
        if map.len() != n {
            return Err(dim_err!("factors {dims:?} do not multiply to {n}"));
        }
        let mut out = vec![ZERO; n * n];
        for r in 0..n {
            for c in 0..n {
                out[map[r] * n + map[c]] = self.data[r * n + c];
            }
        }
        Ok(Self::from_raw(n, n, out))
    }
}

/// For each old flat index, its flat index after reordering the factors by `perm`.
pub fn subsystem_permutation(dims: &[usize], perm: &[usize]) -> Result<Vec<usize>> {
    let k = dims.len();
    let mut seen = vec![false; k];
    if perm.len() != k {
        return Err(dim_err!("permutation length {} does not match {} factors", perm.len(), k));
    }
    for &p in perm {
        if p >= k || seen[p] {
            return Err(Error::Input(format!("{perm:?} is not a permutation of 0..{k}")));
        }
        seen[p] = true;
    }
    let total: usize = dims.iter().product();
    let new_dims: Vec<usize> = perm.iter().map(|&p| dims[p]).collect();
    let mut map = vec![0; total];
    let mut digits = vec![0usize; k];
    for (old, slot) in map.iter_mut().enumerate() {
        let mut rem = old;
        for f in (0..k).rev() {
            digits[f] = rem % dims[f];
            rem /= dims[f];
        }
        let mut new = 0;
        for (pos, &p) in perm.iter().enumerate() {
            new = new * new_dims[pos] + digits[p];
        }
        *slot = new;
    }
    Ok(map)
}

/// Permutes the entries of a vector over `dims` with the same convention as
/// [`ComplexMatrix::permute_subsystems`].
pub fn permute_vector(v: &[C64], dims: &[usize], perm: &[usize]) -> Result<Vec<C64>> {
    let map = subsystem_permutation(dims, perm)?;
    if map.len() != v.len() {
        return Err(dim_err!("factors {dims:?} do not match vector length {}", v.len()));
    }
    let mut out = vec![ZERO; v.len()];
    for (old, &new) in map.iter().enumerate() {
        out[new] = v[old];
    }
    Ok(out)
}

pub fn vec_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `<a|b>` (conjugate-linear in the first argument).
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(x * y);
        }
    }
    out
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    /// Panics on a dimension mismatch; use [`ComplexMatrix::matmul`] for a checked product.
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.shape(), rhs.shape(), "shape mismatch in addition");
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect();
        ComplexMatrix::from_raw(self.rows, self.cols, data)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.shape(), rhs.shape(), "shape mismatch in subtraction");
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect();
        ComplexMatrix::from_raw(self.rows, self.cols, data)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(16) {
            write!(f, "  ")?;
            for z in self.row(i).iter().take(16) {
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    rows: usize,
    cols: usize,
    data: Vec<[f64; 2]>,
}

impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| [z.re, z.im]).collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(deserializer)?;
        let data = raw.data.into_iter().map(|[re, im]| C64::new(re, im)).collect();
        ComplexMatrix::new(raw.rows, raw.cols, data).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn kron_identities() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(i2.kron(&i2).unwrap(), ComplexMatrix::identity(4));
    }

    #[test]
    fn kron_scalar_factor() {
        let b = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        let two = ComplexMatrix::from_real_rows(&[&[2.0]]).unwrap();
        assert_eq!(two.kron(&b).unwrap(), b.scale_real(2.0));
    }

    #[test]
    fn kron_diagonals() {
        let a = ComplexMatrix::real_diag(&[1.0, 2.0]);
        let b = ComplexMatrix::real_diag(&[3.0, 4.0]);
        assert_eq!(a.kron(&b).unwrap(), ComplexMatrix::real_diag(&[3.0, 4.0, 6.0, 8.0]));
    }

    #[test]
    fn kron_index_formula() {
        let a = ComplexMatrix::from_fn(2, 3, |i, j| C64::new(i as f64 + 1.0, j as f64));
        let b = ComplexMatrix::from_fn(3, 2, |i, j| C64::new(j as f64 - 1.0, i as f64 * 0.5));
        let k = a.kron(&b).unwrap();
        assert_eq!(k.shape(), (6, 6));
        for i in 0..2 {
            for j in 0..3 {
                for p in 0..3 {
                    for q in 0..2 {
                        assert_eq!(k[(i * 3 + p, j * 2 + q)], a[(i, j)] * b[(p, q)]);
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_bad_shapes_and_values() {
        assert!(matches!(ComplexMatrix::new(2, 2, vec![ZERO; 3]), Err(Error::Dimension(_))));
        assert!(matches!(
            ComplexMatrix::new(1, 1, vec![C64::new(f64::NAN, 0.0)]),
            Err(Error::Input(_))
        ));
        let a = ComplexMatrix::zeros(2, 3);
        assert!(a.matmul(&a).is_err());
    }

    #[test]
    fn permutation_swaps_factors() {
        let a = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[3.0, 4.0]]).unwrap();
        let b = ComplexMatrix::real_diag(&[5.0, 7.0]);
        let ab = a.kron(&b).unwrap();
        let ba = b.kron(&a).unwrap();
        assert_eq!(ab.permute_subsystems(&[2, 2], &[1, 0]).unwrap(), ba);
        assert!(ab.permute_subsystems(&[2, 2], &[0, 0]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let m = ComplexMatrix::new(1, 2, vec![c(1.5), C64::new(0.0, -2.0)]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert_eq!(s, r#"{"rows":1,"cols":2,"data":[[1.5,0.0],[0.0,-2.0]]}"#);
        let back: ComplexMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<ComplexMatrix>(r#"{"rows":2,"cols":2,"data":[[1,0]]}"#).is_err());
    }
}
