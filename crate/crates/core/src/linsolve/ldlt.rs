//! Sparse `L D Lᵀ` (up-looking, elimination-tree based) of a symmetric
//! permuted matrix, tolerant of a small, known rank deficiency.

use crate::error::{check_len, OtError, Result};
use crate::sparse::SymCsc;

use super::ordering::{compute_ordering, OrderingPolicy};

/// Default relative pivot floor, scaled by the largest diagonal entry.
pub const PIVOT_FLOOR_REL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct LdltFactor {
    n: usize,
    /// `perm[new] = old`
    perm: Vec<usize>,
    /// Strictly lower part of unit `L`, by columns.
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
    d: Vec<f64>,
    pivot_floor: f64,
    replaced: usize,
    nnz_input: usize,
}

impl LdltFactor {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn d(&self) -> &[f64] {
        &self.d
    }

    pub fn pivot_floor(&self) -> f64 {
        self.pivot_floor
    }

    /// Pivots that fell below the floor and were replaced by it.
    pub fn replaced_pivots(&self) -> usize {
        self.replaced
    }

    /// Entries of `L` including its unit diagonal.
    pub fn nnz_l(&self) -> usize {
        self.row_idx.len() + self.n
    }

    /// `nnz(L) / nnz(lower(S))`; 1 means no fill-in.
    pub fn fill_ratio(&self) -> f64 {
        self.nnz_l() as f64 / self.nnz_input.max(1) as f64
    }

    /// Density of `L` within the lower triangle, in percent.
    pub fn fill_percent(&self) -> f64 {
        let full = self.n as f64 * (self.n as f64 + 1.0) / 2.0;
        100.0 * self.nnz_l() as f64 / full.max(1.0)
    }

    /// `x = Pᵀ L⁻ᵀ D⁻¹ L⁻¹ P b`.
    pub fn solve(&self, b: &[f64], x: &mut [f64]) -> Result<()> {
        check_len(self.n, b.len())?;
        check_len(self.n, x.len())?;
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for j in 0..self.n {
            let yj = y[j];
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                y[self.row_idx[p]] -= self.values[p] * yj;
            }
        }
        for (yi, di) in y.iter_mut().zip(&self.d) {
            *yi /= di;
        }
        for j in (0..self.n).rev() {
            let mut acc = y[j];
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                acc -= self.values[p] * y[self.row_idx[p]];
            }
            y[j] = acc;
        }
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        Ok(())
    }

    /// Dense `L` (unit diagonal) in the permuted numbering.
    pub fn to_dense_l(&self) -> Vec<Vec<f64>> {
        let mut l = vec![vec![0.0; self.n]; self.n];
        for j in 0..self.n {
            l[j][j] = 1.0;
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                l[self.row_idx[p]][j] = self.values[p];
            }
        }
        l
    }
}

/// Factor `P S Pᵀ = L D Lᵀ`. Pivots below `pivot_floor` (default
/// [`PIVOT_FLOOR_REL`]·max diag S) are replaced by the floor; more than
/// `nullity` of them means the system is more singular than its structure
/// explains, and is reported as a numeric error.
pub fn exact_ldlt(s: &SymCsc, ordering: OrderingPolicy, pivot_floor: Option<f64>, nullity: usize) -> Result<LdltFactor> {
    let perm = compute_ordering(ordering, &s.adjacency());
    exact_ldlt_with_perm(s, perm, pivot_floor, nullity)
}

pub fn exact_ldlt_with_perm(s: &SymCsc, perm: Vec<usize>, pivot_floor: Option<f64>, nullity: usize) -> Result<LdltFactor> {
    let n = s.dim();
    check_len(n, perm.len())?;
    let max_diag = s.diag().iter().cloned().fold(0.0, f64::max);
    let floor = pivot_floor.unwrap_or(PIVOT_FLOOR_REL * max_diag);
    if !(floor > 0.0) {
        return Err(OtError::Numeric("matrix has no positive diagonal entry".into()));
    }
    let c = s.permuted(&perm);
    // upper triangle by columns = lower triangle by rows
    let (up_ptr, up_idx, up_val) = upper_columns(&c);

    // symbolic: elimination tree and column counts
    let mut parent = vec![usize::MAX; n];
    let mut flag = vec![usize::MAX; n];
    let mut lnz = vec![0usize; n];
    for k in 0..n {
        flag[k] = k;
        for &i0 in &up_idx[up_ptr[k]..up_ptr[k + 1]] {
            let mut i = i0;
            while i < k && flag[i] != k {
                if parent[i] == usize::MAX {
                    parent[i] = k;
                }
                lnz[i] += 1;
                flag[i] = k;
                i = parent[i];
            }
        }
    }
    let mut col_ptr = vec![0usize; n + 1];
    for k in 0..n {
        col_ptr[k + 1] = col_ptr[k] + lnz[k];
    }
    let total = col_ptr[n];
    let mut row_idx = vec![0usize; total];
    let mut values = vec![0.0; total];

    // numeric
    let mut y = vec![0.0; n];
    let mut pattern = vec![0usize; n];
    let mut d = vec![0.0; n];
    let mut filled = vec![0usize; n];
    let mut replaced = 0;
    for k in 0..n {
        let mut top = n;
        flag[k] = k;
        for p in up_ptr[k]..up_ptr[k + 1] {
            let mut i = up_idx[p];
            y[i] += up_val[p];
            let mut len = 0;
            while i < k && flag[i] != k {
                pattern[len] = i;
                len += 1;
                flag[i] = k;
                i = parent[i];
            }
            while len > 0 {
                top -= 1;
                len -= 1;
                pattern[top] = pattern[len];
            }
        }
        let mut dk = y[k];
        y[k] = 0.0;
        for &i in &pattern[top..n] {
            let yi = y[i];
            y[i] = 0.0;
            let start = col_ptr[i];
            for p in start..start + filled[i] {
                y[row_idx[p]] -= values[p] * yi;
            }
            let lki = yi / d[i];
            dk -= lki * yi;
            let p = start + filled[i];
            row_idx[p] = k;
            values[p] = lki;
            filled[i] += 1;
        }
        if !dk.is_finite() {
            return Err(OtError::Numeric(format!("non-finite pivot at step {}", k + 1)));
        }
        if dk < floor {
            replaced += 1;
            dk = floor;
        }
        d[k] = dk;
    }
    if replaced > nullity {
        return Err(OtError::Numeric(format!(
            "{replaced} pivots below {floor:e}, expected at most {nullity}"
        )));
    }
    Ok(LdltFactor {
        n,
        perm,
        col_ptr,
        row_idx,
        values,
        d,
        pivot_floor: floor,
        replaced,
        nnz_input: s.nnz_lower(),
    })
}

fn upper_columns(c: &SymCsc) -> (Vec<usize>, Vec<usize>, Vec<f64>) {
    let n = c.dim();
    let mut count = vec![0usize; n + 1];
    for &i in c.row_idx() {
        count[i + 1] += 1;
    }
    for k in 0..n {
        count[k + 1] += count[k];
    }
    let ptr = count.clone();
    let mut next = count;
    let mut idx = vec![0; c.nnz_lower()];
    let mut val = vec![0.0; c.nnz_lower()];
    for j in 0..n {
        let (rows, vals) = c.column(j);
        for (&i, &v) in rows.iter().zip(vals) {
            idx[next[i]] = j;
            val[next[i]] = v;
            next[i] += 1;
        }
    }
    (ptr, idx, val)
}
