//! Matrix-free constraint operator `A = [e_nᵀ ⊗ I_m ; I_n ⊗ e_mᵀ]`.
//!
//! Column `j` of `A` has two unit entries: row `j % m` (its source) and row
//! `m + j / m` (its sink). Nothing of size `m·n` is ever stored.

use crate::error::{check_len, OtError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConstraintOperator {
    m: usize,
    n: usize,
}

impl ConstraintOperator {
    pub fn new(m: usize, n: usize) -> Self {
        ConstraintOperator { m, n }
    }

    pub fn rows(&self) -> usize {
        self.m + self.n
    }

    pub fn cols(&self) -> usize {
        self.m * self.n
    }

    /// Source and sink of variable `j`, both 0-based.
    pub fn column_endpoints(&self, j: usize) -> Result<(usize, usize)> {
        if j >= self.cols() {
            return Err(OtError::Index { index: j + 1, bound: self.cols() });
        }
        Ok(self.endpoints(j))
    }

    #[inline]
    pub(crate) fn endpoints(&self, j: usize) -> (usize, usize) {
        (j % self.m, j / self.m)
    }

    /// `out = A x`: row sums of `unvec(x)` followed by its column sums.
    pub fn apply_a(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        check_len(self.cols(), x.len())?;
        check_len(self.rows(), out.len())?;
        let (rows, cols) = out.split_at_mut(self.m);
        rows.fill(0.0);
        for (k, col) in x.chunks_exact(self.m).enumerate() {
            let mut colsum = 0.0;
            for (r, &v) in rows.iter_mut().zip(col) {
                *r += v;
                colsum += v;
            }
            cols[k] = colsum;
        }
        Ok(())
    }

    /// `out = Aᵀ [u; w]`, i.e. `out[j] = u[j % m] + w[j / m]`.
    pub fn apply_at(&self, u: &[f64], w: &[f64], out: &mut [f64]) -> Result<()> {
        check_len(self.m, u.len())?;
        check_len(self.n, w.len())?;
        check_len(self.cols(), out.len())?;
        for (col, &wk) in out.chunks_exact_mut(self.m).zip(w) {
            for (o, &ui) in col.iter_mut().zip(u) {
                *o = ui + wk;
            }
        }
        Ok(())
    }

    /// `out = A_red x_red` for the columns listed in `index`.
    pub fn apply_a_restricted(&self, x_red: &[f64], index: &[usize], out: &mut [f64]) -> Result<()> {
        check_len(index.len(), x_red.len())?;
        check_len(self.rows(), out.len())?;
        out.fill(0.0);
        for (&j, &v) in index.iter().zip(x_red) {
            let (i, k) = self.column_endpoints(j)?;
            out[i] += v;
            out[self.m + k] += v;
        }
        Ok(())
    }

    /// `out = A_redᵀ y` for the columns listed in `index`.
    pub fn apply_at_restricted(&self, y: &[f64], index: &[usize], out: &mut [f64]) -> Result<()> {
        check_len(self.rows(), y.len())?;
        check_len(index.len(), out.len())?;
        for (o, &j) in out.iter_mut().zip(index) {
            let (i, k) = self.column_endpoints(j)?;
            *o = y[i] + y[self.m + k];
        }
        Ok(())
    }
}
