//! Dense oracles shared by unit tests.

use crate::support::Support;

/// Dense `A_red Θ A_redᵀ` built column by column from the constraint
/// definition.
pub fn dense_normal_matrix(support: &Support, theta: &[f64]) -> Vec<Vec<f64>> {
    let (m, n) = (support.m(), support.n());
    let mut out = vec![vec![0.0; m + n]; m + n];
    for (&j, &t) in support.index().iter().zip(theta) {
        let (r, c) = (j % m, m + j / m);
        out[r][r] += t;
        out[c][c] += t;
        out[r][c] += t;
        out[c][r] += t;
    }
    out
}

/// Gaussian elimination with partial pivoting.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs())).unwrap();
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            if f != 0.0 {
                for k in c..n {
                    a[r][k] -= f * a[c][k];
                }
                b[r] -= f * b[c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

/// Least-squares solution of the singular normal system: the null vectors
/// `[e_C; −e_C]` of every connected component (and unit vectors of isolated
/// nodes) are added as rank-one terms, which leaves consistent right-hand
/// sides' solutions unchanged up to the null space.
pub fn dense_solve_with_null(normal: &[Vec<f64>], beta: &[f64], support: &Support) -> Vec<f64> {
    let (m, n) = (support.m(), support.n());
    let mut label: Vec<usize> = (0..m + n).collect();
    // label propagation until stable: independent of the union-find in schur
    loop {
        let mut changed = false;
        for &j in support.index() {
            let (r, c) = (j % m, m + j / m);
            let l = label[r].min(label[c]);
            if label[r] != l || label[c] != l {
                label[r] = l;
                label[c] = l;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let mut a = normal.to_vec();
    let mut roots: Vec<usize> = label.clone();
    roots.sort_unstable();
    roots.dedup();
    for root in roots {
        let z: Vec<f64> = (0..m + n)
            .map(|v| match (label[v] == root, v < m) {
                (false, _) => 0.0,
                (true, true) => 1.0,
                (true, false) => -1.0,
            })
            .collect();
        for r in 0..m + n {
            for c in 0..m + n {
                a[r][c] += z[r] * z[c];
            }
        }
    }
    dense_solve(a, beta.to_vec())
}
