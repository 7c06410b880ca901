//! Compressed-column storage for symmetric matrices (lower triangle only).

use std::io::Write;

use crate::error::{check_len, Result};

/// Symmetric matrix holding its lower triangle column by column. Row indices
/// are sorted within each column and the diagonal entry is always stored first.
#[derive(Debug, Clone, PartialEq)]
pub struct SymCsc {
    n: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SymCsc {
    /// Build from raw arrays; each column must start with its diagonal and
    /// list strictly increasing rows below it.
    pub fn from_parts(n: usize, col_ptr: Vec<usize>, row_idx: Vec<usize>, values: Vec<f64>) -> Self {
        debug_assert_eq!(col_ptr.len(), n + 1);
        debug_assert!((0..n).all(|j| {
            let rows = &row_idx[col_ptr[j]..col_ptr[j + 1]];
            !rows.is_empty() && rows[0] == j && rows.windows(2).all(|w| w[0] < w[1])
        }));
        SymCsc { n, col_ptr, row_idx, values }
    }

    /// From `(row, col, value)` triplets anywhere in the matrix; entries in the
    /// upper triangle are mirrored and duplicates summed. Missing diagonals are
    /// stored as explicit zeros.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut cols: Vec<Vec<(usize, f64)>> = (0..n).map(|j| vec![(j, 0.0)]).collect();
        for &(r, c, v) in triplets {
            let (r, c) = if r >= c { (r, c) } else { (c, r) };
            cols[c].push((r, v));
        }
        let mut col_ptr = Vec::with_capacity(n + 1);
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        col_ptr.push(0);
        for mut col in cols {
            col.sort_by_key(|e| e.0);
            for (r, v) in col {
                if row_idx.len() > *col_ptr.last().unwrap() && *row_idx.last().unwrap() == r {
                    *values.last_mut().unwrap() += v;
                } else {
                    row_idx.push(r);
                    values.push(v);
                }
            }
            col_ptr.push(row_idx.len());
        }
        SymCsc { n, col_ptr, row_idx, values }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Stored entries of the lower triangle, diagonal included.
    pub fn nnz_lower(&self) -> usize {
        self.row_idx.len()
    }

    pub fn col_ptr(&self) -> &[usize] {
        &self.col_ptr
    }

    pub fn row_idx(&self) -> &[usize] {
        &self.row_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn column(&self, j: usize) -> (&[usize], &[f64]) {
        let r = self.col_ptr[j]..self.col_ptr[j + 1];
        (&self.row_idx[r.clone()], &self.values[r])
    }

    pub fn diag(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.values[self.col_ptr[j]]).collect()
    }

    pub fn add_to_diagonal(&mut self, shift: f64) {
        for j in 0..self.n {
            self.values[self.col_ptr[j]] += shift;
        }
    }

    pub fn matvec(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        check_len(self.n, x.len())?;
        check_len(self.n, out.len())?;
        out.fill(0.0);
        for j in 0..self.n {
            let (rows, vals) = self.column(j);
            out[j] += vals[0] * x[j];
            for (&i, &v) in rows[1..].iter().zip(&vals[1..]) {
                out[i] += v * x[j];
                out[j] += v * x[i];
            }
        }
        Ok(())
    }

    /// Off-diagonal adjacency lists of the pattern (both triangles).
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n];
        for j in 0..self.n {
            for &i in &self.column(j).0[1..] {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// Symmetric permutation `P S Pᵀ`, where `perm[new] = old`.
    pub fn permuted(&self, perm: &[usize]) -> SymCsc {
        let mut inv = vec![0; self.n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut trip = Vec::with_capacity(self.nnz_lower());
        for j in 0..self.n {
            let (rows, vals) = self.column(j);
            for (&i, &v) in rows.iter().zip(vals) {
                trip.push((inv[i], inv[j], v));
            }
        }
        SymCsc::from_triplets(self.n, &trip)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.n]; self.n];
        for j in 0..self.n {
            let (rows, vals) = self.column(j);
            for (&i, &v) in rows.iter().zip(vals) {
                d[i][j] = v;
                d[j][i] = v;
            }
        }
        d
    }

    /// Matrix Market coordinate dump (lower triangle, 1-based).
    pub fn write_matrix_market<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate real symmetric")?;
        writeln!(w, "{} {} {}", self.n, self.n, self.nnz_lower())?;
        for j in 0..self.n {
            let (rows, vals) = self.column(j);
            for (&i, &v) in rows.iter().zip(vals) {
                writeln!(w, "{} {} {:e}", i + 1, j + 1, v)?;
            }
        }
        Ok(())
    }
}
