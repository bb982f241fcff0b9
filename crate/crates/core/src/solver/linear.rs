//! Row-compressed operators and a banded direct solver.

use crate::error::{GullyError, Result};

/// Sparse square operator in compressed-row form.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseOperator {
    /// Builds from per-row `(column, value)` lists; duplicate columns are summed.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            for (c, v) in row {
                if cols.len() > *row_ptr.last().unwrap() && *cols.last().unwrap() == c {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(c);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Self { n, row_ptr, cols, vals }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.apply_into(x, &mut out);
        out
    }

    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row(i).map(|(c, v)| v * x[c]).sum();
        }
    }

    /// Largest `|col - row|` over stored entries.
    pub fn bandwidth(&self) -> usize {
        (0..self.n)
            .flat_map(|i| self.row(i).map(move |(c, _)| c.abs_diff(i)))
            .max()
            .unwrap_or(0)
    }
}

/// LU factors of a banded matrix, computed without pivoting.
///
/// Only used on row diagonally dominant matrices, for which elimination without
/// pivoting is stable.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    band: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandedLu {
    /// Factors `diag(identity_rows ? 1 : 1) - scale * op`, with rows flagged in
    /// `identity_rows` replaced by identity rows.
    pub fn shifted_identity(op: &SparseOperator, scale: f64, identity_rows: &[bool]) -> Result<Self> {
        let n = op.dim();
        let band = op.bandwidth();
        let width = 2 * band + 1;
        let mut data = vec![0.0; n * width];
        for i in 0..n {
            data[i * width + band] = 1.0;
            if identity_rows[i] {
                continue;
            }
            for (c, v) in op.row(i) {
                data[i * width + band + c - i] -= scale * v;
            }
        }
        let mut lu = Self { n, band, width, data };
        lu.factor()?;
        Ok(lu)
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> usize {
        i * self.width + self.band + j - i
    }

    fn factor(&mut self) -> Result<()> {
        let (n, b) = (self.n, self.band);
        for k in 0..n {
            let pivot = self.data[self.at(k, k)];
            if !(pivot.abs() > f64::MIN_POSITIVE) || !pivot.is_finite() {
                return Err(GullyError::Numerical(format!("zero pivot at row {k}")));
            }
            let last = (k + b).min(n - 1);
            for i in k + 1..=last {
                let ik = self.at(i, k);
                if self.data[ik] == 0.0 {
                    continue;
                }
                let l = self.data[ik] / pivot;
                self.data[ik] = l;
                for j in k + 1..=last {
                    let kj = self.data[self.at(k, j)];
                    let ij = self.at(i, j);
                    self.data[ij] -= l * kj;
                }
            }
        }
        Ok(())
    }

    pub fn solve_in_place(&self, x: &mut [f64]) -> Result<()> {
        let (n, b) = (self.n, self.band);
        for i in 0..n {
            let first = i.saturating_sub(b);
            let mut acc = x[i];
            for k in first..i {
                acc -= self.data[self.at(i, k)] * x[k];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let last = (i + b).min(n - 1);
            let mut acc = x[i];
            for k in i + 1..=last {
                acc -= self.data[self.at(i, k)] * x[k];
            }
            x[i] = acc / self.data[self.at(i, i)];
        }
        if x.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(GullyError::Numerical("non-finite value in linear solve".into()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_entries_are_summed() {
        let op = SparseOperator::from_rows(vec![vec![(0, 1.0), (1, 2.0), (0, 3.0)], vec![(1, 1.0)]]);
        assert_eq!(op.apply(&[1.0, 1.0]), vec![6.0, 1.0]);
        assert_eq!(op.bandwidth(), 1);
    }

    #[test]
    fn banded_solve_matches_dense_residual() {
        // Random diagonally dominant pentadiagonal-with-gaps matrix.
        let n = 40;
        let b = 3;
        let rows: Vec<Vec<(usize, f64)>> = (0..n)
            .map(|i| {
                let mut row = vec![(i, -4.0 - (i % 3) as f64)];
                for d in [1usize, b] {
                    if i >= d {
                        row.push((i - d, 0.7 + 0.01 * i as f64));
                    }
                    if i + d < n {
                        row.push((i + d, 0.9 - 0.01 * i as f64));
                    }
                }
                row
            })
            .collect();
        let op = SparseOperator::from_rows(rows);
        let mut identity = vec![false; n];
        identity[0] = true;
        identity[n - 1] = true;
        let lu = BandedLu::shifted_identity(&op, 0.3, &identity).unwrap();
        let rhs: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let mut x = rhs.clone();
        lu.solve_in_place(&mut x).unwrap();
        let lx = op.apply(&x);
        for i in 0..n {
            let ax = if identity[i] { x[i] } else { x[i] - 0.3 * lx[i] };
            assert!((ax - rhs[i]).abs() < 1e-13, "row {i}");
        }
    }
}
