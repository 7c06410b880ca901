//! Reference solver: the textbook transportation simplex on dense costs.
//!
//! Deliberately shares nothing with the interior-point code path except the
//! instance type. Basis = spanning tree of the bipartite graph (m+n−1 cells),
//! started at the northwest corner, with Bland's smallest-index rule for both
//! the entering and the leaving cell.

use std::collections::VecDeque;

use crate::error::{OtError, Result};
use crate::instance::OtInstance;
use crate::ipm::SolveReport;

/// Largest instance (m·n) the oracle accepts.
pub const ORACLE_MAX_VARS: usize = 10_000;
const MAX_PIVOTS: usize = 50_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSolution {
    m: usize,
    n: usize,
    /// One row per source.
    pub plan: Vec<Vec<f64>>,
    pub objective: f64,
    /// Basic feasible solution (always true on success; kept for reports).
    pub is_vertex: bool,
    /// Entries strictly above zero.
    pub support_size: usize,
    /// Basis cells `(source, sink)`, exactly m+n−1 of them.
    pub basis: Vec<(usize, usize)>,
    /// Dual potentials `u` (sources) and `v` (sinks) of the final basis.
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub pivots: usize,
}

impl ReferenceSolution {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `(source, sink)` of entries above `threshold`.
    pub fn nonzeros(&self, threshold: f64) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, row) in self.plan.iter().enumerate() {
            for (k, &x) in row.iter().enumerate() {
                if x > threshold {
                    out.push((i, k));
                }
            }
        }
        out
    }

    /// No basic cell carries zero flow, i.e. the optimal vertex is
    /// nondegenerate.
    pub fn is_nondegenerate(&self, threshold: f64) -> bool {
        self.basis.iter().all(|&(i, k)| self.plan[i][k] > threshold)
    }
}

/// Relative Wasserstein error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rwe {
    pub value: f64,
    /// The reference distance was zero, so `value` is an absolute difference.
    pub absolute: bool,
}

/// `|W_q^solver − W_q^ref| / W_q^ref` with `W_q = objective^{1/q}`.
pub fn rwe(report: &SolveReport, reference: &ReferenceSolution, q: u32) -> Rwe {
    rwe_from_objectives(report.objective, reference.objective, q)
}

pub fn rwe_from_objectives(solver: f64, reference: f64, q: u32) -> Rwe {
    let e = 1.0 / q.max(1) as f64;
    let ws = solver.max(0.0).powf(e);
    let wr = reference.max(0.0).powf(e);
    if wr == 0.0 {
        Rwe { value: ws, absolute: true }
    } else {
        Rwe { value: (ws - wr).abs() / wr, absolute: false }
    }
}

struct Tree {
    m: usize,
    // adjacency over nodes 0..m (sources) and m..m+n (sinks); entries are
    // (neighbour, basis slot)
    adj: Vec<Vec<(usize, usize)>>,
}

impl Tree {
    fn build(m: usize, n: usize, basis: &[(usize, usize)]) -> Tree {
        let mut adj = vec![Vec::new(); m + n];
        for (slot, &(i, k)) in basis.iter().enumerate() {
            adj[i].push((m + k, slot));
            adj[m + k].push((i, slot));
        }
        Tree { m, adj }
    }

    /// Basis slots on the tree path from source `i` to sink `k`.
    fn path(&self, i: usize, k: usize) -> Vec<usize> {
        let target = self.m + k;
        let nodes = self.adj.len();
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; nodes];
        let mut seen = vec![false; nodes];
        let mut queue = VecDeque::from([i]);
        seen[i] = true;
        while let Some(x) = queue.pop_front() {
            if x == target {
                break;
            }
            for &(y, slot) in &self.adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    prev[y] = Some((x, slot));
                    queue.push_back(y);
                }
            }
        }
        let mut slots = Vec::new();
        let mut cur = target;
        while let Some((p, slot)) = prev[cur] {
            slots.push(slot);
            cur = p;
        }
        slots.reverse();
        slots
    }

    /// Potentials with `u_0 = 0` and `u_i + v_k = c_ik` on the basis.
    fn potentials(&self, cost: impl Fn(usize, usize) -> f64) -> (Vec<f64>, Vec<f64>) {
        let m = self.m;
        let mut pot = vec![f64::NAN; self.adj.len()];
        let mut queue = VecDeque::new();
        // one root per tree component (the basis is spanning, so one)
        for root in 0..self.adj.len() {
            if !pot[root].is_nan() {
                continue;
            }
            pot[root] = 0.0;
            queue.push_back(root);
            while let Some(x) = queue.pop_front() {
                for &(y, _) in &self.adj[x] {
                    if pot[y].is_nan() {
                        let (i, k) = if x < m { (x, y - m) } else { (y, x - m) };
                        pot[y] = cost(i, k) - pot[x];
                        queue.push_back(y);
                    }
                }
            }
        }
        let v = pot.split_off(m);
        (pot, v)
    }
}

/// Flows on a spanning-tree basis, by repeatedly peeling leaves.
fn tree_flows(a: &[f64], b: &[f64], basis: &[(usize, usize)]) -> Vec<f64> {
    let m = a.len();
    let tree = Tree::build(m, b.len(), basis);
    let mut rest: Vec<f64> = a.iter().chain(b).cloned().collect();
    let mut degree: Vec<usize> = tree.adj.iter().map(Vec::len).collect();
    let mut used = vec![false; basis.len()];
    let mut flow = vec![0.0; basis.len()];
    let mut leaves: VecDeque<usize> = (0..rest.len()).filter(|&x| degree[x] == 1).collect();
    while let Some(x) = leaves.pop_front() {
        if degree[x] != 1 {
            continue;
        }
        let &(y, slot) = tree.adj[x].iter().find(|(_, s)| !used[*s]).expect("leaf has an edge");
        used[slot] = true;
        flow[slot] = rest[x];
        rest[y] -= rest[x];
        rest[x] = 0.0;
        degree[x] -= 1;
        degree[y] -= 1;
        if degree[y] == 1 {
            leaves.push_back(y);
        }
    }
    flow
}

fn northwest_corner(a: &[f64], b: &[f64]) -> Vec<(usize, usize)> {
    let (m, n) = (a.len(), b.len());
    let mut sup = a.to_vec();
    let mut dem = b.to_vec();
    let (mut i, mut k) = (0, 0);
    let mut basis = Vec::with_capacity(m + n - 1);
    loop {
        basis.push((i, k));
        let x = sup[i].min(dem[k]);
        sup[i] -= x;
        dem[k] -= x;
        if i == m - 1 && k == n - 1 {
            break;
        }
        if k == n - 1 || (i < m - 1 && sup[i] <= dem[k]) {
            i += 1;
        } else {
            k += 1;
        }
    }
    basis
}

/// Optimal basic solution of the transport LP.
pub fn reference_solve(inst: &OtInstance) -> Result<ReferenceSolution> {
    let (m, n) = (inst.m(), inst.n());
    if m * n > ORACLE_MAX_VARS {
        return Err(OtError::Resource(format!(
            "reference solver is limited to {ORACLE_MAX_VARS} variables, instance has {}",
            m * n
        )));
    }
    let (a, b) = (inst.a(), inst.b());
    let sa: f64 = a.iter().sum();
    let sb: f64 = b.iter().sum();
    if (sa - sb).abs() > 1e-9 * sa.abs().max(1.0) {
        return Err(OtError::Parameter(format!("unbalanced marginals: {sa} vs {sb}")));
    }
    let c = inst.dense_costs();
    let cost = |i: usize, k: usize| c[i + k * m];
    let cmax = c.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let eps = 1e-12 * (1.0 + cmax);

    let mut basis = northwest_corner(a, b);
    let mut flow = tree_flows(a, b, &basis);
    let mut pivots = 0;
    loop {
        let tree = Tree::build(m, n, &basis);
        let (u, v) = tree.potentials(cost);
        let mut in_basis = vec![false; m * n];
        for &(i, k) in &basis {
            in_basis[i + k * m] = true;
        }
        // Bland: first improving cell in column-major order
        let entering = (0..m * n).find(|&j| !in_basis[j] && cost(j % m, j / m) - u[j % m] - v[j / m] < -eps);
        let Some(j) = entering else {
            let flow = tree_flows(a, b, &basis);
            let mut plan = vec![vec![0.0; n]; m];
            for (&(i, k), &x) in basis.iter().zip(&flow) {
                plan[i][k] = x;
            }
            let objective = (0..m).map(|i| (0..n).map(|k| cost(i, k) * plan[i][k]).sum::<f64>()).sum();
            let support_size = plan.iter().flatten().filter(|&&x| x > 0.0).count();
            let is_vertex = flow.iter().all(|&x| x >= -1e-12 * sa.max(1.0));
            return Ok(ReferenceSolution { m, n, plan, objective, is_vertex, support_size, basis, u, v, pivots });
        };
        pivots += 1;
        if pivots > MAX_PIVOTS {
            return Err(OtError::Resource("transportation simplex exceeded its pivot budget".into()));
        }
        let (ei, ek) = (j % m, j / m);
        let path = tree.path(ei, ek);
        // path edges alternate −,+,−,… starting next to the entering cell
        let leaving_pos = path
            .iter()
            .step_by(2)
            .copied()
            .min_by(|&s, &t| {
                let (si, sk) = basis[s];
                let (ti, tk) = basis[t];
                flow[s].total_cmp(&flow[t]).then((si + sk * m).cmp(&(ti + tk * m)))
            })
            .expect("cycle has a decreasing edge");
        let step = flow[leaving_pos].max(0.0);
        for (pos, &slot) in path.iter().enumerate() {
            if pos % 2 == 0 {
                flow[slot] -= step;
            } else {
                flow[slot] += step;
            }
        }
        basis[leaving_pos] = (ei, ek);
        flow[leaving_pos] = step;
    }
}
