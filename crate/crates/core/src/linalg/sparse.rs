//! Compressed sparse rows, used for verifier circuits, which are mostly
//! permutations and projectors. Serialises in the same dense JSON layout as
//! [`ComplexMatrix`].

use std::collections::BTreeMap;

use serde::ser::SerializeStruct;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::matrix::{ComplexMatrix, C64, ZERO};
use crate::error::{dim_err, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    offsets: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<C64>,
}

impl SparseMatrix {
    pub fn from_dense(m: &ComplexMatrix) -> Self {
        let (rows, cols) = m.shape();
        let mut offsets = Vec::with_capacity(rows + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        offsets.push(0);
        for i in 0..rows {
            for (j, &z) in m.row(i).iter().enumerate() {
                if z != ZERO {
                    indices.push(j);
                    values.push(z);
                }
            }
            offsets.push(indices.len());
        }
        Self { rows, cols, offsets, indices, values }
    }

    /// Builds from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(rows: usize, cols: usize, entries: impl IntoIterator<Item = (usize, usize, C64)>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(dim_err!("sparse matrix dimensions must be positive, got {rows}x{cols}"));
        }
        let mut buckets: Vec<BTreeMap<usize, C64>> = vec![BTreeMap::new(); rows];
        for (i, j, z) in entries {
            if i >= rows || j >= cols {
                return Err(dim_err!("entry ({i}, {j}) outside {rows}x{cols}"));
            }
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(crate::Error::Input(format!("non-finite entry at ({i}, {j})")));
            }
            *buckets[i].entry(j).or_insert(ZERO) += z;
        }
        let mut offsets = vec![0];
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for b in buckets {
            for (j, z) in b {
                if z != ZERO {
                    indices.push(j);
                    values.push(z);
                }
            }
            offsets.push(indices.len());
        }
        Ok(Self { rows, cols, offsets, indices, values })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: n,
            cols: n,
            offsets: (0..=n).collect(),
            indices: (0..n).collect(),
            values: vec![C64::new(1.0, 0.0); n],
        }
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

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let r = self.offsets[i]..self.offsets[i + 1];
        self.indices[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn row_is_empty(&self, i: usize) -> bool {
        self.offsets[i] == self.offsets[i + 1]
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        let r = self.offsets[i]..self.offsets[i + 1];
        match self.indices[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => ZERO,
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    pub fn to_dense(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for (j, z) in self.row(i) {
                m[(i, j)] = z;
            }
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        let mut buckets: Vec<Vec<(usize, C64)>> = vec![Vec::new(); self.cols];
        for i in 0..self.rows {
            for (j, z) in self.row(i) {
                buckets[j].push((i, z.conj()));
            }
        }
        let mut offsets = vec![0];
        let mut indices = Vec::with_capacity(self.nnz());
        let mut values = Vec::with_capacity(self.nnz());
        for b in buckets {
            for (i, z) in b {
                indices.push(i);
                values.push(z);
            }
            offsets.push(indices.len());
        }
        Self { rows: self.cols, cols: self.rows, offsets, indices, values }
    }

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
        let mut offsets = vec![0];
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for i in 0..self.rows {
            let mut acc: BTreeMap<usize, C64> = BTreeMap::new();
            for (k, a) in self.row(i) {
                for (j, b) in other.row(k) {
                    *acc.entry(j).or_insert(ZERO) += a * b;
                }
            }
            for (j, z) in acc {
                if z != ZERO {
                    indices.push(j);
                    values.push(z);
                }
            }
            offsets.push(indices.len());
        }
        Ok(Self { rows: self.rows, cols: other.cols, offsets, indices, values })
    }

    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        self.mul_block(x, 1)
    }

    /// `self * x` where `x` is a row-major `cols x k` block, i.e. `(self (x) I_k) x`.
    pub fn mul_block(&self, x: &[C64], k: usize) -> Vec<C64> {
        assert_eq!(x.len(), self.cols * k, "sparse block product dimension mismatch");
        let mut out = vec![ZERO; self.rows * k];
        for i in 0..self.rows {
            let orow = &mut out[i * k..(i + 1) * k];
            for (j, a) in self.row(i) {
                for (o, b) in orow.iter_mut().zip(&x[j * k..(j + 1) * k]) {
                    *o += a * b;
                }
            }
        }
        out
    }

    /// Largest entrywise deviation from `target`.
    pub fn max_abs_diff(&self, target: &Self) -> f64 {
        assert_eq!(self.shape(), target.shape());
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            let mut row: BTreeMap<usize, C64> = self.row(i).collect();
            for (j, z) in target.row(i) {
                *row.entry(j).or_insert(ZERO) -= z;
            }
            for z in row.values() {
                worst = worst.max(z.norm());
            }
        }
        worst
    }

    /// Largest entrywise deviation of `self^dag self` from the identity.
    pub fn unitarity_error(&self) -> f64 {
        if self.rows != self.cols {
            return f64::INFINITY;
        }
        let g = self.adjoint().matmul(self).expect("square");
        g.max_abs_diff(&Self::identity(self.rows))
    }

    /// `max(|P - P^dag|, |P^2 - P|)` entrywise.
    pub fn projector_error(&self) -> f64 {
        if self.rows != self.cols {
            return f64::INFINITY;
        }
        let herm = self.max_abs_diff(&self.adjoint());
        let idem = self.matmul(self).expect("square").max_abs_diff(self);
        herm.max(idem)
    }

    /// Upper bound on the largest eigenvalue of a Hermitian matrix (Gershgorin).
    pub fn gershgorin_bound(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).map(|(_, z)| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Columns as dense vectors, skipping empty ones.
    pub(crate) fn nonzero_columns(&self) -> impl Iterator<Item = Vec<C64>> + '_ {
        let adj = self.adjoint();
        let n = self.rows;
        (0..adj.rows).filter_map(move |j| {
            if adj.row_is_empty(j) {
                return None;
            }
            let mut v = vec![ZERO; n];
            for (i, z) in adj.row(j) {
                v[i] = z.conj();
            }
            Some(v)
        })
    }
}

impl From<&ComplexMatrix> for SparseMatrix {
    fn from(m: &ComplexMatrix) -> Self {
        Self::from_dense(m)
    }
}

struct DenseEntries<'a>(&'a SparseMatrix);

impl Serialize for DenseEntries<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let m = self.0;
        serializer.collect_seq((0..m.rows).flat_map(|i| {
            let mut row = vec![[0.0, 0.0]; m.cols];
            for (j, z) in m.row(i) {
                row[j] = [z.re, z.im];
            }
            row
        }))
    }
}

impl Serialize for SparseMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("ComplexMatrix", 3)?;
        s.serialize_field("rows", &self.rows)?;
        s.serialize_field("cols", &self.cols)?;
        s.serialize_field("data", &DenseEntries(self))?;
        s.end()
    }
}

impl<'de> Deserialize<'de> for SparseMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        Ok(Self::from_dense(&ComplexMatrix::deserialize(deserializer)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random::{random_matrix, random_unitary};

    #[test]
    fn agrees_with_dense_products() {
        let mut a = random_matrix(5, 4, 1);
        a[(1, 2)] = ZERO;
        a[(3, 0)] = ZERO;
        let b = random_matrix(4, 3, 2);
        let sa = SparseMatrix::from_dense(&a);
        assert_eq!(sa.nnz(), 18);
        let prod = sa.matmul(&SparseMatrix::from_dense(&b)).unwrap().to_dense();
        assert!(prod.max_abs_diff(&(&a * &b)) < 1e-13);
        assert!(sa.adjoint().to_dense().max_abs_diff(&a.adjoint()) < 1e-15);
        let block = sa.mul_block(b.data(), 3);
        assert!(ComplexMatrix::from_raw(5, 3, block).max_abs_diff(&(&a * &b)) < 1e-13);
        assert_eq!(sa.get(1, 2), ZERO);
        assert_eq!(sa.get(2, 1), a[(2, 1)]);
        assert!(sa.matmul(&sa).is_err());
    }

    #[test]
    fn triplets_sum_duplicates() {
        let one = C64::new(1.0, 0.0);
        let m = SparseMatrix::from_triplets(2, 2, [(0, 1, one), (0, 1, one), (1, 0, -one), (1, 0, one)]).unwrap();
        assert_eq!(m.nnz(), 1);
        assert_eq!(m.get(0, 1), C64::new(2.0, 0.0));
        assert!(SparseMatrix::from_triplets(2, 2, [(2, 0, one)]).is_err());
    }

    #[test]
    fn unitary_and_projector_checks() {
        let u = SparseMatrix::from_dense(&random_unitary(4, 3));
        assert!(u.unitarity_error() < 1e-12);
        let p = SparseMatrix::from_dense(&ComplexMatrix::real_diag(&[1.0, 0.0, 1.0]));
        assert!(p.projector_error() < 1e-15);
        let q = SparseMatrix::from_dense(&ComplexMatrix::real_diag(&[0.5, 0.0]));
        assert!(q.projector_error() > 0.2);
    }

    #[test]
    fn dense_json_layout() {
        let a = ComplexMatrix::from_real_rows(&[&[0.0, 2.0], &[3.0, 0.0]]).unwrap();
        let s = SparseMatrix::from_dense(&a);
        let js = serde_json::to_string(&s).unwrap();
        assert_eq!(js, serde_json::to_string(&a).unwrap());
        let back: SparseMatrix = serde_json::from_str(&js).unwrap();
        assert_eq!(back, s);
    }
}
