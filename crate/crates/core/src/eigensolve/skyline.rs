//! Envelope (skyline) Cholesky factorization of sparse SPD matrices.

use super::ordering::reverse_cuthill_mckee;
use crate::sparse::CsrMatrix;
use crate::{Error, Result};

/// `P K Pᵀ = L Lᵀ` with `L` stored row by row from the first nonzero
/// column of each row to the diagonal.
#[derive(Clone, Debug)]
pub struct SkylineCholesky {
    perm: Vec<usize>,
    inv: Vec<usize>,
    first: Vec<usize>,
    row_start: Vec<usize>,
    data: Vec<f64>,
}

/// Row envelope of `m` under `perm`, as `(first, row_start, total)`.
fn envelope(m: &CsrMatrix, perm: &[usize], inv: &[usize]) -> (Vec<usize>, Vec<usize>, usize) {
    let n = m.dim();
    let mut first = Vec::with_capacity(n);
    let mut row_start = Vec::with_capacity(n + 1);
    let mut total = 0;
    for (i, &old) in perm.iter().enumerate() {
        let f = m.row(old).map(|(j, _)| inv[j]).filter(|&j| j <= i).min().unwrap_or(i);
        first.push(f);
        row_start.push(total);
        total += i - f + 1;
    }
    row_start.push(total);
    (first, row_start, total)
}

fn invert(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    inv
}

/// Ordering plus envelope size, computed before committing memory.
#[derive(Clone, Debug)]
pub struct SymbolicProfile {
    perm: Vec<usize>,
    pub entries: usize,
}

impl SymbolicProfile {
    pub fn analyze(m: &CsrMatrix) -> Self {
        let perm = reverse_cuthill_mckee(m);
        let inv = invert(&perm);
        let (_, _, entries) = envelope(m, &perm, &inv);
        SymbolicProfile { perm, entries }
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl SkylineCholesky {
    pub fn factor(m: &CsrMatrix) -> Result<Self> {
        Self::factor_with(m, &SymbolicProfile::analyze(m))
    }

    pub fn factor_with(m: &CsrMatrix, symbolic: &SymbolicProfile) -> Result<Self> {
        let n = m.dim();
        let perm = symbolic.perm.clone();
        let inv = invert(&perm);
        let (first, row_start, total) = envelope(m, &perm, &inv);
        let mut data = vec![0.0; total];

        for i in 0..n {
            let fi = first[i];
            let (done, rest) = data.split_at_mut(row_start[i]);
            let row = &mut rest[..i - fi + 1];
            for (j, v) in m.row(perm[i]) {
                let jn = inv[j];
                if jn <= i {
                    row[jn - fi] = v;
                }
            }
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let lj = &done[row_start[j]..row_start[j] + (j - fj + 1)];
                let s = row[j - fi] - dot(&row[k0 - fi..j - fi], &lj[k0 - fj..j - fj]);
                row[j - fi] = s / lj[j - fj];
            }
            let d = row[i - fi] - dot(&row[..i - fi], &row[..i - fi]);
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::NotPositiveDefinite { pivot: i, value: d });
            }
            row[i - fi] = d.sqrt();
        }
        Ok(SkylineCholesky {
            perm,
            inv,
            first,
            row_start,
            data,
        })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Stored entries of `L` (fill).
    pub fn entries(&self) -> usize {
        self.data.len()
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[self.row_start[i]..self.row_start[i + 1]]
    }

    /// Solves `K x = b` in the original ordering.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = self.row(i);
            let s = y[i] - dot(&row[..i - fi], &y[fi..i]);
            y[i] = s / row[i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = self.row(i);
            let xi = y[i] / row[i - fi];
            y[i] = xi;
            for (yk, l) in y[fi..i].iter_mut().zip(&row[..i - fi]) {
                *yk -= l * xi;
            }
        }
        (0..n).map(|old| y[self.inv[old]]).collect()
    }
}
