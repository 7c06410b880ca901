use std::fmt;

use crate::linsolve::Mode;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    IterationLimit,
    NumericalFailure,
}

impl SolveStatus {
    pub fn name(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::IterationLimit => "iteration-limit",
            SolveStatus::NumericalFailure => "numerical-failure",
        }
    }
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One row of the per-iteration log.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    pub mode: Mode,
    pub support: usize,
    pub mu: f64,
    pub sigma: f64,
    pub primal_res: f64,
    pub dual_res: f64,
    pub alpha_p: f64,
    pub alpha_d: f64,
    pub cg_iters: usize,
    pub correctors: usize,
    pub entered: usize,
    pub removed: usize,
    pub fill_pct: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub objective: f64,
    /// `q` of the reported Wasserstein value: 2 for the L2 ground metric,
    /// 1 otherwise.
    pub q: u32,
    pub ipm_iters: usize,
    pub cg_iters_total: usize,
    pub iterative_phase_iters: usize,
    pub direct_phase_iters: usize,
    /// Iteration (1-based) that first used the direct solver.
    pub switch_iter: Option<usize>,
    pub max_fill_percent: f64,
    pub final_support_size: usize,
    pub peak_support_size: usize,
    pub primal_res: f64,
    pub dual_res: f64,
    pub mu: f64,
    pub correctors_accepted: usize,
    pub correctors_rejected: usize,
    pub ldlt_failures: usize,
    pub rwe_vs_reference: Option<f64>,
    pub telemetry: Vec<IterationRecord>,
}

impl SolveReport {
    /// `(cᵀp)^{1/q}`.
    pub fn wasserstein(&self, q: u32) -> f64 {
        self.objective.max(0.0).powf(1.0 / q.max(1) as f64)
    }
}

/// Sparse m×n plan: the final support and its values.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    m: usize,
    n: usize,
    index: Vec<usize>,
    values: Vec<f64>,
}

impl TransportPlan {
    pub fn new(m: usize, n: usize, index: Vec<usize>, values: Vec<f64>) -> Self {
        TransportPlan { m, n, index, values }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Column-major variable indices, sorted.
    pub fn index(&self) -> &[usize] {
        &self.index
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `(source, sink, mass)` triples.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let m = self.m;
        self.index.iter().zip(&self.values).map(move |(&j, &v)| (j % m, j / m, v))
    }

    /// Zero-padded vector of length m·n.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.m * self.n];
        for (&j, &v) in self.index.iter().zip(&self.values) {
            out[j] = v;
        }
        out
    }

    /// Dense plan, one row per source.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.n]; self.m];
        for (i, k, v) in self.entries() {
            out[i][k] = v;
        }
        out
    }

    pub fn row_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.m];
        for (i, _, v) in self.entries() {
            out[i] += v;
        }
        out
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (_, k, v) in self.entries() {
            out[k] += v;
        }
        out
    }

    pub fn nnz_above(&self, threshold: f64) -> usize {
        self.values.iter().filter(|v| v.abs() > threshold).count()
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub plan: TransportPlan,
    /// Multipliers for the m source rows followed by the n sink rows.
    pub y: Vec<f64>,
    pub report: SolveReport,
}
