use std::collections::BTreeSet;

use super::matrix::{ComplexMatrix, ZERO};
use crate::error::{dim_err, Error, Result};

/// Traces out the factors listed in `traced` (0-based) of a square matrix over
/// `factors[0] (x) factors[1] (x) ...`, keeping the rest in their original order.
pub fn partial_trace(x: &ComplexMatrix, factors: &[usize], traced: &[usize]) -> Result<ComplexMatrix> {
    let n = x.require_square("partial trace input")?;
    if factors.iter().any(|&f| f == 0) {
        return Err(dim_err!("tensor factors must be positive: {factors:?}"));
    }
    let total = factors
        .iter()
        .try_fold(1usize, |acc, &f| acc.checked_mul(f))
        .ok_or_else(|| dim_err!("factor product overflows"))?;
    if total != n {
        return Err(dim_err!("factors {factors:?} multiply to {total}, matrix is {n}x{n}"));
    }
    let traced: BTreeSet<usize> = traced.iter().copied().collect();
    if let Some(&bad) = traced.iter().find(|&&t| t >= factors.len()) {
        return Err(Error::Input(format!(
            "traced factor {bad} out of range for {} factors",
            factors.len()
        )));
    }

    // Split every flat index into (kept, traced) coordinates.
    let kept_dim: usize = factors
        .iter()
        .enumerate()
        .filter(|(i, _)| !traced.contains(i))
        .map(|(_, &f)| f)
        .product();
    let traced_dim = n / kept_dim;
    let mut groups = vec![vec![0usize; kept_dim]; traced_dim];
    for flat in 0..n {
        let mut rem = flat;
        let (mut k, mut kw, mut t, mut tw) = (0, 1, 0, 1);
        for (f, &d) in factors.iter().enumerate().rev() {
            let digit = rem % d;
            rem /= d;
            if traced.contains(&f) {
                t += digit * tw;
                tw *= d;
            } else {
                k += digit * kw;
                kw *= d;
            }
        }
        groups[t][k] = flat;
    }

    let mut out = vec![ZERO; kept_dim * kept_dim];
    let data = x.data();
    for g in &groups {
        for (a, &r) in g.iter().enumerate() {
            let row = &data[r * n..(r + 1) * n];
            let orow = &mut out[a * kept_dim..(a + 1) * kept_dim];
            for (o, &c) in orow.iter_mut().zip(g) {
                *o += row[c];
            }
        }
    }
    Ok(ComplexMatrix::from_raw(kept_dim, kept_dim, out))
}
