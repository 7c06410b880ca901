//! Block structure of the normal equations `A_red Θ A_redᵀ = [M V; Vᵀ N]`.
//!
//! `V` is m×n with `V[i][k] = θ_j` for every support entry `j = i + k·m`; `M`
//! and `N` hold the row and column sums of `V`. Both Schur complements
//! `S_M = N − VᵀM⁻¹V` and `S_N = M − VN⁻¹Vᵀ` are weighted graph Laplacians:
//! symmetric, zero row sums, nonpositive off-diagonals.

use crate::error::{check_len, OtError, Result};
use crate::sparse::SymCsc;
use crate::support::Support;

/// Floor for an empty row or column sum of `V` before it is inverted.
pub const ZERO_DIAG_FLOOR: f64 = 1e-30;

/// Which Schur complement carries the reduced solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Complement {
    /// `S_M = N − VᵀM⁻¹V`, of size n.
    Sinks,
    /// `S_N = M − VN⁻¹Vᵀ`, of size m.
    Sources,
}

#[derive(Debug, Clone)]
pub struct SchurSystem {
    m: usize,
    n: usize,
    src: Vec<usize>,
    dst: Vec<usize>,
    theta: Vec<f64>,
    m_diag: Vec<f64>,
    n_diag: Vec<f64>,
    side: Complement,
    // connected component of each node: sources 0..m, sinks m..m+n
    component: Vec<usize>,
    components: usize,
    floored: usize,
}

impl SchurSystem {
    /// Assemble from the support and `θ = p/s` over it.
    pub fn assemble(support: &Support, theta_red: &[f64]) -> Result<Self> {
        check_len(support.len(), theta_red.len())?;
        if support.is_empty() {
            return Err(OtError::Parameter("empty support".into()));
        }
        if let Some(t) = theta_red.iter().position(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(OtError::Numeric(format!(
                "theta entry {} for variable {} is not positive",
                theta_red[t],
                support.index()[t] + 1
            )));
        }
        let (m, n) = (support.m(), support.n());
        let (src, dst): (Vec<usize>, Vec<usize>) = support.endpoints().unzip();
        let mut m_diag = vec![0.0; m];
        let mut n_diag = vec![0.0; n];
        for ((&i, &k), &t) in src.iter().zip(&dst).zip(theta_red) {
            m_diag[i] += t;
            n_diag[k] += t;
        }
        let mut floored = 0;
        for d in m_diag.iter_mut().chain(n_diag.iter_mut()) {
            if *d == 0.0 {
                *d = ZERO_DIAG_FLOOR;
                floored += 1;
            }
        }
        if floored > 0 {
            log::warn!("{floored} constraint(s) without support variables; diagonal floored");
        }
        let (component, components) = connected_components(m, n, &src, &dst);
        let side = if n <= m { Complement::Sinks } else { Complement::Sources };
        Ok(SchurSystem {
            m,
            n,
            src,
            dst,
            theta: theta_red.to_vec(),
            m_diag,
            n_diag,
            side,
            component,
            components,
            floored,
        })
    }

    /// Force the other complement (mainly for tests).
    pub fn with_side(mut self, side: Complement) -> Self {
        self.side = side;
        self
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn side(&self) -> Complement {
        self.side
    }

    pub fn m_diag(&self) -> &[f64] {
        &self.m_diag
    }

    pub fn n_diag(&self) -> &[f64] {
        &self.n_diag
    }

    /// Nonzero entries of `V` as `(row, col, value)`, in support order.
    pub fn v_entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.src
            .iter()
            .zip(&self.dst)
            .zip(&self.theta)
            .map(|((&i, &k), &t)| (i, k, t))
    }

    pub fn nnz_v(&self) -> usize {
        self.theta.len()
    }

    pub fn floored_diagonals(&self) -> usize {
        self.floored
    }

    /// Connected components of the bipartite support graph.
    pub fn component_count(&self) -> usize {
        self.components
    }

    pub fn active_dim(&self) -> usize {
        match self.side {
            Complement::Sinks => self.n,
            Complement::Sources => self.m,
        }
    }

    /// `(active node, eliminated node)` for each `V` entry.
    fn oriented(&self) -> (&[usize], &[usize], &[f64], &[f64]) {
        match self.side {
            Complement::Sinks => (&self.dst, &self.src, &self.n_diag, &self.m_diag),
            Complement::Sources => (&self.src, &self.dst, &self.m_diag, &self.n_diag),
        }
    }

    fn active_component(&self, node: usize) -> usize {
        match self.side {
            Complement::Sinks => self.component[self.m + node],
            Complement::Sources => self.component[node],
        }
    }

    /// Components that contain at least one active node: the nullity of the
    /// active complement.
    pub fn active_component_count(&self) -> usize {
        let mut seen = vec![false; self.components];
        for a in 0..self.active_dim() {
            seen[self.active_component(a)] = true;
        }
        seen.iter().filter(|&&s| s).count()
    }

    /// Diagonal of the active complement without assembling it.
    pub fn diagonal(&self) -> Vec<f64> {
        let (act, elim, act_diag, elim_diag) = self.oriented();
        let mut d = act_diag.to_vec();
        for ((&a, &e), &t) in act.iter().zip(elim).zip(&self.theta) {
            d[a] -= t * t / elim_diag[e];
        }
        d
    }

    /// `out = S v` for the active complement, via two sparse products.
    pub fn matvec(&self, v: &[f64], out: &mut [f64]) -> Result<()> {
        let dim = self.active_dim();
        check_len(dim, v.len())?;
        check_len(dim, out.len())?;
        let (act, elim, act_diag, elim_diag) = self.oriented();
        let mut tmp = vec![0.0; elim_diag.len()];
        for ((&a, &e), &t) in act.iter().zip(elim).zip(&self.theta) {
            tmp[e] += t * v[a];
        }
        for (x, d) in tmp.iter_mut().zip(elim_diag) {
            *x /= d;
        }
        for ((o, &d), &x) in out.iter_mut().zip(act_diag).zip(v) {
            *o = d * x;
        }
        for ((&a, &e), &t) in act.iter().zip(elim).zip(&self.theta) {
            out[a] -= t * tmp[e];
        }
        Ok(())
    }

    /// Full block product `[M V; Vᵀ N] [x1; x2]`.
    pub fn block_matvec(&self, x1: &[f64], x2: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        check_len(self.m, x1.len())?;
        check_len(self.n, x2.len())?;
        let mut y1: Vec<f64> = self.m_diag.iter().zip(x1).map(|(d, x)| d * x).collect();
        let mut y2: Vec<f64> = self.n_diag.iter().zip(x2).map(|(d, x)| d * x).collect();
        for (i, k, t) in self.v_entries() {
            y1[i] += t * x2[k];
            y2[k] += t * x1[i];
        }
        Ok((y1, y2))
    }

    /// Remove from `[β1; β2]` its component along the null space of the block
    /// matrix (one vector `[e_C; −e_C]` per connected component `C`).
    pub fn project_rhs(&self, beta1: &mut [f64], beta2: &mut [f64]) {
        let mut sum = vec![0.0; self.components];
        let mut count = vec![0usize; self.components];
        for (i, &b) in beta1.iter().enumerate() {
            sum[self.component[i]] += b;
            count[self.component[i]] += 1;
        }
        for (k, &b) in beta2.iter().enumerate() {
            sum[self.component[self.m + k]] -= b;
            count[self.component[self.m + k]] += 1;
        }
        let shift: Vec<f64> = sum.iter().zip(&count).map(|(s, &c)| s / c as f64).collect();
        for (i, b) in beta1.iter_mut().enumerate() {
            *b -= shift[self.component[i]];
        }
        for (k, b) in beta2.iter_mut().enumerate() {
            *b += shift[self.component[self.m + k]];
        }
    }

    /// Remove the per-component means of an active-side vector, i.e. project
    /// it onto the range of the active complement.
    pub fn deflate(&self, v: &mut [f64]) {
        let mut sum = vec![0.0; self.components];
        let mut count = vec![0usize; self.components];
        for (a, &x) in v.iter().enumerate() {
            let c = self.active_component(a);
            sum[c] += x;
            count[c] += 1;
        }
        for (a, x) in v.iter_mut().enumerate() {
            let c = self.active_component(a);
            *x -= sum[c] / count[c] as f64;
        }
    }

    /// Right-hand side of the reduced system: `β2 − VᵀM⁻¹β1` for `S_M`,
    /// `β1 − VN⁻¹β2` for `S_N`.
    pub fn reduce_rhs(&self, beta1: &[f64], beta2: &[f64]) -> Result<Vec<f64>> {
        check_len(self.m, beta1.len())?;
        check_len(self.n, beta2.len())?;
        let (act, elim, _, elim_diag) = self.oriented();
        let (b_act, b_elim) = match self.side {
            Complement::Sinks => (beta2, beta1),
            Complement::Sources => (beta1, beta2),
        };
        let mut out = b_act.to_vec();
        for ((&a, &e), &t) in act.iter().zip(elim).zip(&self.theta) {
            out[a] -= t * b_elim[e] / elim_diag[e];
        }
        Ok(out)
    }

    /// Back-substitute the eliminated block: returns `(α1, α2)`.
    pub fn expand_solution(&self, alpha_active: &[f64], beta1: &[f64], beta2: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        check_len(self.active_dim(), alpha_active.len())?;
        check_len(self.m, beta1.len())?;
        check_len(self.n, beta2.len())?;
        let (act, elim, _, elim_diag) = self.oriented();
        let b_elim = match self.side {
            Complement::Sinks => beta1,
            Complement::Sources => beta2,
        };
        let mut other = b_elim.to_vec();
        for ((&a, &e), &t) in act.iter().zip(elim).zip(&self.theta) {
            other[e] -= t * alpha_active[a];
        }
        for (x, d) in other.iter_mut().zip(elim_diag) {
            *x /= d;
        }
        Ok(match self.side {
            Complement::Sinks => (other, alpha_active.to_vec()),
            Complement::Sources => (alpha_active.to_vec(), other),
        })
    }

    /// Explicit active complement plus `lift·I`, lower triangle. Fails with a
    /// resource error when more than `nnz_cap` entries would be stored.
    pub fn assemble_sparse(&self, lift: f64, nnz_cap: usize) -> Result<SymCsc> {
        let (act, elim, act_diag, elim_diag) = self.oriented();
        let dim = act_diag.len();
        // V as lists per active node and per eliminated node
        let by_act = bucket(dim, act, elim, &self.theta);
        let by_elim = bucket(elim_diag.len(), elim, act, &self.theta);

        let mut col_ptr = Vec::with_capacity(dim + 1);
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        let mut acc = vec![0.0; dim];
        let mut mark = vec![usize::MAX; dim];
        let mut touched = Vec::new();
        col_ptr.push(0);
        for l in 0..dim {
            touched.clear();
            mark[l] = l;
            acc[l] = act_diag[l] + lift;
            touched.push(l);
            for &(e, t_el) in &by_act[l] {
                let scale = t_el / elim_diag[e];
                for &(k, t_ek) in &by_elim[e] {
                    if k < l {
                        continue;
                    }
                    if mark[k] != l {
                        mark[k] = l;
                        acc[k] = 0.0;
                        touched.push(k);
                    }
                    acc[k] -= scale * t_ek;
                }
            }
            touched[1..].sort_unstable();
            if row_idx.len() + touched.len() > nnz_cap {
                return Err(OtError::Resource(format!(
                    "explicit Schur complement exceeds {nnz_cap} stored entries"
                )));
            }
            for &k in &touched {
                row_idx.push(k);
                values.push(acc[k]);
            }
            col_ptr.push(row_idx.len());
        }
        Ok(SymCsc::from_parts(dim, col_ptr, row_idx, values))
    }
}

fn bucket(len: usize, key: &[usize], other: &[usize], theta: &[f64]) -> Vec<Vec<(usize, f64)>> {
    let mut out = vec![Vec::new(); len];
    for ((&k, &o), &t) in key.iter().zip(other).zip(theta) {
        out[k].push((o, t));
    }
    out
}

fn connected_components(m: usize, n: usize, src: &[usize], dst: &[usize]) -> (Vec<usize>, usize) {
    let mut parent: Vec<usize> = (0..m + n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (&i, &k) in src.iter().zip(dst) {
        let (ri, rk) = (find(&mut parent, i), find(&mut parent, m + k));
        if ri != rk {
            parent[ri.max(rk)] = ri.min(rk);
        }
    }
    let mut label = vec![usize::MAX; m + n];
    let mut comp = vec![0; m + n];
    let mut count = 0;
    for x in 0..m + n {
        let r = find(&mut parent, x);
        if label[r] == usize::MAX {
            label[r] = count;
            count += 1;
        }
        comp[x] = label[r];
    }
    (comp, count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn full(m: usize, n: usize) -> Support {
        Support::from_indices(m, n, (0..m * n).collect()).unwrap()
    }

    /// Dense `A_red Θ A_redᵀ` built column by column from the constraint
    /// definition, independent of the block formulas.
    fn dense_normal_matrix(support: &Support, theta: &[f64]) -> Vec<Vec<f64>> {
        let (m, n) = (support.m(), support.n());
        let mut out = vec![vec![0.0; m + n]; m + n];
        for (&j, &t) in support.index().iter().zip(theta) {
            let mut col = vec![0.0; m + n];
            col[j % m] = 1.0;
            col[m + j / m] = 1.0;
            for r in 0..m + n {
                for c in 0..m + n {
                    out[r][c] += t * col[r] * col[c];
                }
            }
        }
        out
    }

    /// Dense Schur complement from the dense normal matrix.
    fn dense_schur(normal: &[Vec<f64>], m: usize, n: usize, side: Complement) -> Vec<Vec<f64>> {
        let (act, elim): (Vec<usize>, Vec<usize>) = match side {
            Complement::Sinks => ((m..m + n).collect(), (0..m).collect()),
            Complement::Sources => ((0..m).collect(), (m..m + n).collect()),
        };
        act.iter()
            .map(|&r| {
                act.iter()
                    .map(|&c| {
                        normal[r][c]
                            - elim.iter().map(|&e| normal[r][e] * normal[e][c] / normal[e][e]).sum::<f64>()
                    })
                    .collect()
            })
            .collect()
    }

    fn random_system(m: usize, n: usize, seed: u64) -> (Support, Vec<f64>) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut index: Vec<usize> = (0..m * n).filter(|_| rng.gen_bool(0.5)).collect();
        // make sure every row and column is hit
        for i in 0..m.max(n) {
            index.push((i % m) + (i % n) * m);
        }
        let s = Support::from_indices(m, n, index).unwrap();
        let theta = (0..s.len()).map(|_| 10f64.powf(rng.gen_range(-3.0..3.0))).collect();
        (s, theta)
    }

    #[test]
    fn row_and_column_sums() {
        let sys = SchurSystem::assemble(&full(2, 2), &[1.0, 3.0, 2.0, 4.0]).unwrap();
        assert_eq!(sys.m_diag(), &[3.0, 7.0]);
        assert_eq!(sys.n_diag(), &[4.0, 6.0]);
        assert_eq!(sys.side(), Complement::Sinks);
    }

    #[test]
    fn single_entry_support_floors_empty_rows() {
        let s = Support::from_indices(2, 2, vec![0]).unwrap();
        let sys = SchurSystem::assemble(&s, &[5.0]).unwrap();
        assert_eq!(sys.m_diag(), &[5.0, ZERO_DIAG_FLOOR]);
        assert_eq!(sys.n_diag(), &[5.0, ZERO_DIAG_FLOOR]);
        assert_eq!(sys.floored_diagonals(), 2);
        assert_eq!(sys.v_entries().collect::<Vec<_>>(), vec![(0, 0, 5.0)]);
    }

    #[test]
    fn nonpositive_theta_is_rejected() {
        assert!(matches!(
            SchurSystem::assemble(&full(2, 2), &[1.0, 0.0, 1.0, 1.0]),
            Err(OtError::Numeric(_))
        ));
    }

    #[test]
    fn side_follows_smaller_dimension() {
        let (s, t) = random_system(3, 4, 1);
        assert_eq!(SchurSystem::assemble(&s, &t).unwrap().side(), Complement::Sources);
        let (s, t) = random_system(4, 3, 1);
        assert_eq!(SchurSystem::assemble(&s, &t).unwrap().side(), Complement::Sinks);
    }

    #[test]
    fn matvec_examples() {
        let sys = SchurSystem::assemble(&full(2, 2), &[1.0, 3.0, 2.0, 4.0]).unwrap();
        let mut out = vec![0.0; 2];
        sys.matvec(&[1.0, 1.0], &mut out).unwrap();
        assert!(out.iter().all(|v| v.abs() < 1e-10));
        sys.matvec(&[0.0, 0.0], &mut out).unwrap();
        assert_eq!(out, vec![0.0, 0.0]);
        // S_M = N - VᵀM⁻¹V with V = [[1,2],[3,4]], M = diag(3,7), N = diag(4,6)
        let s01 = -(1.0 * 2.0 / 3.0 + 3.0 * 4.0 / 7.0);
        let s00 = 4.0 - (1.0 / 3.0 + 9.0 / 7.0);
        let s11 = 6.0 - (4.0 / 3.0 + 16.0 / 7.0);
        sys.matvec(&[1.0, -1.0], &mut out).unwrap();
        assert!((out[0] - (s00 - s01)).abs() < 1e-12);
        assert!((out[1] - (s01 - s11)).abs() < 1e-12);
    }

    #[test]
    fn diagonal_support_decouples() {
        let s = Support::from_indices(3, 3, vec![0, 4, 8]).unwrap();
        let sys = SchurSystem::assemble(&s, &[2.0, 3.0, 5.0]).unwrap();
        assert_eq!(sys.component_count(), 3);
        let sp = sys.assemble_sparse(0.0, usize::MAX).unwrap();
        assert!(sp.values().iter().all(|v| v.abs() < 1e-15), "S_M vanishes");
        // Closed form: α2 = least-squares solution of 0·α2 = 0 → 0, α1 = M⁻¹β1
        let mut b1 = vec![1.0, 2.0, 3.0];
        let mut b2 = vec![1.0, 2.0, 3.0];
        sys.project_rhs(&mut b1, &mut b2);
        let red = sys.reduce_rhs(&b1, &b2).unwrap();
        assert!(red.iter().all(|v| v.abs() < 1e-15));
        let (a1, a2) = sys.expand_solution(&[0.0; 3], &b1, &b2).unwrap();
        assert_eq!(a2, vec![0.0; 3]);
        assert_eq!(a1, vec![0.5, 2.0 / 3.0, 0.6]);
    }

    #[test]
    fn null_direction_rhs_projects_to_zero() {
        let (s, t) = random_system(4, 3, 9);
        let sys = SchurSystem::assemble(&s, &t).unwrap();
        assert_eq!(sys.component_count(), 1);
        let mut b1 = vec![2.5; 4];
        let mut b2 = vec![-2.5; 3];
        sys.project_rhs(&mut b1, &mut b2);
        assert!(b1.iter().chain(&b2).all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn tree_support_gives_chordal_pattern() {
        use crate::graphcheck::{is_chordal, UndirectedGraph};
        // spanning tree of K_{3,3}: path s0-t0-s1-t1-s2-t2
        let idx = vec![0, 1, 3 + 1, 3 + 2, 6 + 2];
        let s = Support::from_indices(3, 3, idx).unwrap();
        let sys = SchurSystem::assemble(&s, &[1.0; 5]).unwrap();
        let sp = sys.assemble_sparse(0.0, usize::MAX).unwrap();
        let g = UndirectedGraph::from_adjacency(sp.adjacency());
        assert!(is_chordal(&g).is_chordal());
        let mut out = vec![0.0; 3];
        sp.matvec(&[1.0; 3], &mut out).unwrap();
        assert!(out.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn nnz_cap_is_enforced() {
        let sys = SchurSystem::assemble(&full(4, 4), &[1.0; 16]).unwrap();
        assert!(matches!(sys.assemble_sparse(0.0, 5), Err(OtError::Resource(_))));
        assert_eq!(sys.assemble_sparse(0.0, 10).unwrap().nnz_lower(), 10);
    }

    proptest! {
        #[test]
        fn blocks_match_dense_normal_matrix(m in 1usize..=6, n in 1usize..=6, seed in any::<u64>()) {
            let (s, theta) = random_system(m, n, seed);
            let sys = SchurSystem::assemble(&s, &theta).unwrap();
            let dense = dense_normal_matrix(&s, &theta);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 1);
            let x1: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let x2: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let (y1, y2) = sys.block_matvec(&x1, &x2).unwrap();
            let x: Vec<f64> = x1.iter().chain(&x2).cloned().collect();
            for (r, y) in y1.iter().chain(&y2).enumerate() {
                let e: f64 = dense[r].iter().zip(&x).map(|(a, b)| a * b).sum();
                prop_assert!((y - e).abs() <= 1e-10 * (1.0 + e.abs()));
            }
            // row/col sum identities
            let mut rows = vec![0.0; m];
            let mut cols = vec![0.0; n];
            for (i, k, t) in sys.v_entries() {
                rows[i] += t;
                cols[k] += t;
            }
            for (r, d) in rows.iter().zip(sys.m_diag()) {
                prop_assert!((r - d).abs() <= 1e-12 * d);
            }
            for (c, d) in cols.iter().zip(sys.n_diag()) {
                prop_assert!((c - d).abs() <= 1e-12 * d);
            }
        }

        #[test]
        fn explicit_complement_matches_dense(m in 1usize..=6, n in 1usize..=6, seed in any::<u64>()) {
            let (s, theta) = random_system(m, n, seed);
            for side in [Complement::Sinks, Complement::Sources] {
                let sys = SchurSystem::assemble(&s, &theta).unwrap().with_side(side);
                let expect = dense_schur(&dense_normal_matrix(&s, &theta), m, n, side);
                let sp = sys.assemble_sparse(0.0, usize::MAX).unwrap();
                let got = sp.to_dense();
                let scale = theta.iter().cloned().fold(0.0, f64::max);
                for (r, row) in expect.iter().enumerate() {
                    for (c, e) in row.iter().enumerate() {
                        prop_assert!((got[r][c] - e).abs() <= 1e-12 * scale, "{} {}", r, c);
                    }
                }
                // matvec agrees with the explicit matrix, and S e = 0
                let dim = sys.active_dim();
                let ones = vec![1.0; dim];
                let mut out = vec![0.0; dim];
                sys.matvec(&ones, &mut out).unwrap();
                prop_assert!(out.iter().all(|v| v.abs() <= 1e-10 * scale.max(1.0)));
                // weak diagonal dominance with nonpositive off-diagonals
                for (r, row) in got.iter().enumerate() {
                    let off: f64 = row.iter().enumerate().filter(|(c, _)| *c != r).map(|(_, v)| v.abs()).sum();
                    prop_assert!((row[r] - off).abs() <= 1e-10 * scale);
                    prop_assert!(row.iter().enumerate().all(|(c, v)| c == r || *v <= 0.0));
                }
                // pattern is pattern(VᵀV) ∪ diag (no cancellation with θ > 0)
                let mut expect_pat = vec![vec![false; dim]; dim];
                for (i1, k1, _) in sys.v_entries() {
                    for (i2, k2, _) in sys.v_entries() {
                        let (a1, e1, a2, e2) = match side {
                            Complement::Sinks => (k1, i1, k2, i2),
                            Complement::Sources => (i1, k1, i2, k2),
                        };
                        if e1 == e2 {
                            expect_pat[a1][a2] = true;
                        }
                    }
                }
                for c in 0..dim {
                    let (rows, _) = sp.column(c);
                    for r in c + 1..dim {
                        prop_assert_eq!(rows.contains(&r), expect_pat[r][c]);
                    }
                }
            }
        }
    }
}
