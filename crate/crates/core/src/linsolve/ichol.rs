//! Threshold incomplete Cholesky (left-looking, column by column).
//!
//! The matrix is first scaled symmetrically to unit diagonal, so the drop
//! rule `|w_i| < drop_tol·‖Â(j:,j)‖₁` and the relative diagonal lift are both
//! independent of the very uneven row scales met late in the interior-point
//! iteration.

use crate::error::{check_len, OtError, Result};
use crate::sparse::SymCsc;

/// Retries with a 10× larger lift before giving up.
pub const IC_MAX_RETRIES: usize = 3;

#[derive(Debug, Clone)]
pub struct IcFactor {
    n: usize,
    /// `1/sqrt(S_ii)` (or 1 for rows that vanish).
    scale: Vec<f64>,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
    lift: f64,
    drop_tol: f64,
}

impl IcFactor {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored entries of `L`, diagonal included.
    pub fn nnz(&self) -> usize {
        self.row_idx.len()
    }

    pub fn lift(&self) -> f64 {
        self.lift
    }

    pub fn drop_tol(&self) -> f64 {
        self.drop_tol
    }

    /// `z = (D^{1/2} L Lᵀ D^{1/2})⁻¹ r`.
    pub fn apply(&self, r: &[f64], z: &mut [f64]) {
        for ((zi, ri), si) in z.iter_mut().zip(r).zip(&self.scale) {
            *zi = ri * si;
        }
        // L y = z
        for j in 0..self.n {
            let range = self.col_ptr[j]..self.col_ptr[j + 1];
            let (rows, vals) = (&self.row_idx[range.clone()], &self.values[range]);
            let yj = z[j] / vals[0];
            z[j] = yj;
            for (&i, &v) in rows[1..].iter().zip(&vals[1..]) {
                z[i] -= v * yj;
            }
        }
        // Lᵀ x = y
        for j in (0..self.n).rev() {
            let range = self.col_ptr[j]..self.col_ptr[j + 1];
            let (rows, vals) = (&self.row_idx[range.clone()], &self.values[range]);
            let mut acc = z[j];
            for (&i, &v) in rows[1..].iter().zip(&vals[1..]) {
                acc -= v * z[i];
            }
            z[j] = acc / vals[0];
        }
        for (zi, si) in z.iter_mut().zip(&self.scale) {
            *zi *= si;
        }
    }

    /// Dense `L` of the scaled matrix (tests and diagnostics).
    pub fn to_dense_l(&self) -> Vec<Vec<f64>> {
        let mut l = vec![vec![0.0; self.n]; self.n];
        for j in 0..self.n {
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                l[self.row_idx[p]][j] = self.values[p];
            }
        }
        l
    }
}

/// Incomplete factorization of `S + lift·diag(S)`. On a nonpositive pivot the
/// lift grows tenfold, at most [`IC_MAX_RETRIES`] times; after that a
/// numeric error is returned and the caller is expected to fall back to
/// Jacobi.
pub fn incomplete_cholesky(s: &SymCsc, drop_tol: f64, lift: f64) -> Result<IcFactor> {
    if !(drop_tol >= 0.0) || !(lift >= 0.0) {
        return Err(OtError::Parameter(format!("drop_tol {drop_tol} and lift {lift} must be nonnegative")));
    }
    let mut lift = lift;
    for attempt in 0..=IC_MAX_RETRIES {
        match factor_once(s, drop_tol, lift) {
            Ok(f) => return Ok(f),
            Err(j) => {
                log::debug!("IC breakdown at column {} with lift {lift:e} (attempt {})", j + 1, attempt + 1);
                lift = if lift > 0.0 { lift * 10.0 } else { 1e-10 };
            }
        }
    }
    Err(OtError::Numeric(format!(
        "incomplete Cholesky broke down after {IC_MAX_RETRIES} lift increases"
    )))
}

/// One factorization attempt; `Err(j)` names the column whose pivot failed.
fn factor_once(s: &SymCsc, drop_tol: f64, lift: f64) -> std::result::Result<IcFactor, usize> {
    let n = s.dim();
    let diag = s.diag();
    // rows with a nonpositive diagonal are null rows of a weakly dominant
    // matrix; they are decoupled and get a unit pivot
    let null_row: Vec<bool> = diag.iter().map(|&d| !(d > 0.0)).collect();
    let scale: Vec<f64> = diag.iter().map(|&d| if d > 0.0 { 1.0 / d.sqrt() } else { 1.0 }).collect();

    let mut col_ptr = Vec::with_capacity(n + 1);
    let mut row_idx: Vec<usize> = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    col_ptr.push(0);

    let mut w = vec![0.0; n];
    let mut in_pattern = vec![false; n];
    let mut pattern: Vec<usize> = Vec::new();
    // next unused position in each finished column, and for each row the
    // columns whose next unused entry lies in that row
    let mut next = vec![0usize; n];
    let mut waiting: Vec<Vec<usize>> = vec![Vec::new(); n];

    for j in 0..n {
        pattern.clear();
        let (rows, vals) = s.column(j);
        if null_row[j] {
            w[j] = 1.0;
        } else {
            w[j] = vals[0] * scale[j] * scale[j] * (1.0 + lift);
            for (&i, &v) in rows[1..].iter().zip(&vals[1..]) {
                if !null_row[i] {
                    w[i] = v * scale[i] * scale[j];
                    in_pattern[i] = true;
                    pattern.push(i);
                }
            }
        }
        let norm1: f64 = w[j].abs() + pattern.iter().map(|&i| w[i].abs()).sum::<f64>();

        for k in std::mem::take(&mut waiting[j]) {
            let p = next[k];
            let ljk = values[p];
            for q in p + 1..col_ptr[k + 1] {
                let i = row_idx[q];
                if !in_pattern[i] {
                    in_pattern[i] = true;
                    w[i] = 0.0;
                    pattern.push(i);
                }
                w[i] -= values[q] * ljk;
            }
            w[j] -= ljk * ljk;
            next[k] = p + 1;
            if p + 1 < col_ptr[k + 1] {
                waiting[row_idx[p + 1]].push(k);
            }
        }

        let pivot = w[j];
        if !(pivot > 0.0) || !pivot.is_finite() {
            return Err(j);
        }
        let ljj = pivot.sqrt();
        row_idx.push(j);
        values.push(ljj);
        pattern.sort_unstable();
        let threshold = drop_tol * norm1;
        for &i in &pattern {
            in_pattern[i] = false;
            let v = w[i];
            if v != 0.0 && !(v.abs() < threshold) {
                row_idx.push(i);
                values.push(v / ljj);
            }
        }
        let end = row_idx.len();
        col_ptr.push(end);
        let first_off = col_ptr[j] + 1;
        if first_off < end {
            next[j] = first_off;
            waiting[row_idx[first_off]].push(j);
        }
    }
    Ok(IcFactor { n, scale, col_ptr, row_idx, values, lift, drop_tol })
}

/// Diagonal preconditioner data, `1/S_ii` (1 for vanishing rows).
pub fn jacobi_inverse(s_diag: &[f64]) -> Vec<f64> {
    s_diag.iter().map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 }).collect()
}

pub fn apply_jacobi(inv_diag: &[f64], r: &[f64], z: &mut [f64]) -> Result<()> {
    check_len(inv_diag.len(), r.len())?;
    for ((zi, ri), di) in z.iter_mut().zip(r).zip(inv_diag) {
        *zi = ri * di;
    }
    Ok(())
}
