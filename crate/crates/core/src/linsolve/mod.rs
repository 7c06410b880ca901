//! Solving the reduced normal equations through the Schur complement:
//! incomplete-Cholesky PCG early on, exact `LDLᵀ` once the support settles.

pub mod ichol;
pub mod ldlt;
pub mod ordering;
pub mod pcg;
pub mod phase;

pub use ichol::{incomplete_cholesky, IcFactor};
pub use ldlt::{exact_ldlt, exact_ldlt_with_perm, LdltFactor, PIVOT_FLOOR_REL};
pub use ordering::{compute_ordering, OrderingPolicy};
pub use pcg::{pcg, PcgOutcome};
pub use phase::{should_switch, Mode, SolverPhase};

use crate::error::{OtError, Result};
use crate::schur::SchurSystem;

#[derive(Debug, Clone, PartialEq)]
pub struct LinsolveConfig {
    pub max_cg_iters: usize,
    pub ic_drop_tol: f64,
    pub ic_min_drop_tol: f64,
    /// PCG calls slower than this lower the drop tolerance.
    pub ic_slow_iters: usize,
    /// Relative diagonal lift for the incomplete factorization.
    pub ic_lift: f64,
    pub switch_threshold: f64,
    pub allow_fallback: bool,
    pub ordering: OrderingPolicy,
    pub pivot_floor_rel: f64,
    /// Largest explicit Schur complement (stored lower entries) to assemble.
    pub nnz_cap: usize,
}

impl Default for LinsolveConfig {
    fn default() -> Self {
        LinsolveConfig {
            max_cg_iters: 1000,
            ic_drop_tol: 1e-2,
            ic_min_drop_tol: 1e-6,
            ic_slow_iters: 200,
            ic_lift: 1e-8,
            switch_threshold: 0.05,
            allow_fallback: false,
            ordering: OrderingPolicy::MinimumDegree,
            pivot_floor_rel: PIVOT_FLOOR_REL,
            nnz_cap: 50_000_000,
        }
    }
}

#[derive(Debug, Clone)]
pub enum Factorization {
    IncompleteCholesky(IcFactor),
    ExactLdlt(LdltFactor),
}

#[derive(Debug, Clone)]
pub enum Preconditioner {
    Jacobi(Vec<f64>),
    Factor(Factorization),
}

impl Preconditioner {
    pub fn apply(&self, r: &[f64], z: &mut [f64]) {
        match self {
            Preconditioner::Jacobi(inv) => {
                for ((zi, ri), di) in z.iter_mut().zip(r).zip(inv) {
                    *zi = ri * di;
                }
            }
            Preconditioner::Factor(Factorization::IncompleteCholesky(f)) => f.apply(r, z),
            Preconditioner::Factor(Factorization::ExactLdlt(f)) => {
                f.solve(r, z).expect("preconditioner dimension fixed at construction")
            }
        }
    }

    /// Entries of the factor (diagonal included); the dimension for Jacobi.
    pub fn nnz(&self) -> usize {
        match self {
            Preconditioner::Jacobi(d) => d.len(),
            Preconditioner::Factor(Factorization::IncompleteCholesky(f)) => f.nnz(),
            Preconditioner::Factor(Factorization::ExactLdlt(f)) => f.nnz_l(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Preconditioner::Jacobi(d) => d.len(),
            Preconditioner::Factor(Factorization::IncompleteCholesky(f)) => f.dim(),
            Preconditioner::Factor(Factorization::ExactLdlt(f)) => f.dim(),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Preconditioner::Factor(Factorization::ExactLdlt(_)))
    }
}

/// Telemetry of one linear solve.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSolveRecord {
    pub mode: Mode,
    pub iters: usize,
    pub relres: f64,
    pub converged: bool,
    pub nnz_l: usize,
    /// `nnz(L)/nnz(lower S)` for exact factors, 0 otherwise.
    pub fill_ratio: f64,
    /// Density of the exact factor in percent, 0 otherwise.
    pub fill_pct: f64,
}

/// Owns the phase controller and the preconditioner of the current
/// interior-point iteration.
#[derive(Debug)]
pub struct SchurSolver {
    config: LinsolveConfig,
    phase: SolverPhase,
    precond: Option<Preconditioner>,
    fill: (f64, f64),
    ldlt_failures: usize,
}

impl SchurSolver {
    pub fn new(config: LinsolveConfig) -> Self {
        let phase = SolverPhase::new(config.switch_threshold, config.ic_drop_tol)
            .with_fallback(config.allow_fallback)
            .with_drop_schedule(config.ic_min_drop_tol, config.ic_slow_iters);
        SchurSolver { config, phase, precond: None, fill: (0.0, 0.0), ldlt_failures: 0 }
    }

    pub fn config(&self) -> &LinsolveConfig {
        &self.config
    }

    pub fn phase(&self) -> &SolverPhase {
        &self.phase
    }

    pub fn phase_mut(&mut self) -> &mut SolverPhase {
        &mut self.phase
    }

    pub fn preconditioner(&self) -> Option<&Preconditioner> {
        self.precond.as_ref()
    }

    /// Exact factorizations that failed and were replaced by the iterative
    /// preconditioner for that iteration.
    pub fn ldlt_failures(&self) -> usize {
        self.ldlt_failures
    }

    /// Build the preconditioner for `sys` according to the current mode.
    pub fn prepare(&mut self, sys: &SchurSystem) -> Result<()> {
        self.phase.take_refactor();
        self.fill = (0.0, 0.0);
        if self.phase.mode() == Mode::Direct {
            match self.factor_exact(sys) {
                Ok(f) => {
                    self.fill = (f.fill_ratio(), f.fill_percent());
                    self.precond = Some(Preconditioner::Factor(Factorization::ExactLdlt(f)));
                    return Ok(());
                }
                Err(e @ (OtError::Numeric(_) | OtError::Resource(_))) => {
                    self.ldlt_failures += 1;
                    log::warn!("exact factorization failed ({e}); using the iterative preconditioner");
                }
                Err(e) => return Err(e),
            }
        }
        self.precond = Some(self.iterative_preconditioner(sys));
        Ok(())
    }

    fn factor_exact(&self, sys: &SchurSystem) -> Result<LdltFactor> {
        let s = sys.assemble_sparse(0.0, self.config.nnz_cap)?;
        let max_diag = s.diag().iter().cloned().fold(0.0, f64::max);
        exact_ldlt(
            &s,
            self.config.ordering,
            Some(self.config.pivot_floor_rel * max_diag),
            sys.active_component_count(),
        )
    }

    fn iterative_preconditioner(&self, sys: &SchurSystem) -> Preconditioner {
        let jacobi = || Preconditioner::Jacobi(ichol::jacobi_inverse(&sys.diagonal()));
        let s = match sys.assemble_sparse(0.0, self.config.nnz_cap) {
            Ok(s) => s,
            Err(e) => {
                log::warn!("{e}; using Jacobi");
                return jacobi();
            }
        };
        match incomplete_cholesky(&s, self.phase.ic_drop_tol(), self.config.ic_lift) {
            Ok(f) => Preconditioner::Factor(Factorization::IncompleteCholesky(f)),
            Err(e) => {
                log::warn!("{e}; using Jacobi");
                jacobi()
            }
        }
    }

    /// Solve `[M V; Vᵀ N] [α1; α2] = [β1; β2]` in the least-squares sense:
    /// the right-hand side is projected onto the range, the active Schur
    /// system is solved by PCG and the other block recovered.
    pub fn solve(&mut self, sys: &SchurSystem, beta1: &[f64], beta2: &[f64], tol: f64) -> Result<(Vec<f64>, Vec<f64>, LinearSolveRecord)> {
        if self.precond.as_ref().map_or(true, |p| p.dim() != sys.active_dim()) {
            self.prepare(sys)?;
        }
        let precond = self.precond.as_ref().expect("prepared above");
        let mut b1 = beta1.to_vec();
        let mut b2 = beta2.to_vec();
        sys.project_rhs(&mut b1, &mut b2);
        let rhs = sys.reduce_rhs(&b1, &b2)?;
        let out = pcg(
            |x, o| sys.matvec(x, o),
            &rhs,
            |r, z| precond.apply(r, z),
            |v| sys.deflate(v),
            tol,
            self.config.max_cg_iters,
        )?;
        let record = LinearSolveRecord {
            mode: if precond.is_exact() { Mode::Direct } else { Mode::Iterative },
            iters: out.iters,
            relres: out.relres,
            converged: out.converged,
            nnz_l: precond.nnz(),
            fill_ratio: self.fill.0,
            fill_pct: self.fill.1,
        };
        self.phase.record_pcg(out.iters);
        let (a1, a2) = sys.expand_solution(&out.x, &b1, &b2)?;
        Ok((a1, a2, record))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::support::Support;
    use crate::testutil::{dense_normal_matrix, dense_solve_with_null};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn random_system(m: usize, n: usize, seed: u64, density: f64) -> (Support, Vec<f64>) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let index: Vec<usize> = (0..m * n).filter(|_| rng.gen_bool(density)).collect();
        let index = if index.is_empty() { vec![0] } else { index };
        let s = Support::from_indices(m, n, index).unwrap();
        let theta = (0..s.len()).map(|_| 10f64.powf(rng.gen_range(-2.0..2.0))).collect();
        (s, theta)
    }

    fn block_residual(normal: &[Vec<f64>], alpha: &[f64], beta: &[f64]) -> f64 {
        let r: f64 = normal
            .iter()
            .zip(beta)
            .map(|(row, b)| (row.iter().zip(alpha).map(|(p, q)| p * q).sum::<f64>() - b).powi(2))
            .sum::<f64>()
            .sqrt();
        r / beta.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-300)
    }

    fn check_against_dense(m: usize, n: usize, seed: u64, mode: Mode) {
        let (s, theta) = random_system(m, n, seed, 0.45);
        let sys = SchurSystem::assemble(&s, &theta).unwrap();
        let normal = dense_normal_matrix(&s, &theta);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 7);
        let mut b1: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut b2: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        sys.project_rhs(&mut b1, &mut b2);
        let beta: Vec<f64> = b1.iter().chain(&b2).cloned().collect();
        let mut solver = SchurSolver::new(LinsolveConfig::default());
        if mode == Mode::Direct {
            solver.phase_mut().force_direct();
        }
        solver.prepare(&sys).unwrap();
        let (a1, a2, rec) = solver.solve(&sys, &b1, &b2, 1e-12).unwrap();
        assert!(rec.converged, "{rec:?}");
        let alpha: Vec<f64> = a1.iter().chain(&a2).cloned().collect();
        // floored empty rows make the dense matrix exactly singular there;
        // their right-hand sides are zero after projection
        let res = block_residual(&normal, &alpha, &beta);
        assert!(res <= 1e-8, "block residual {res}");
        // same solution as the dense least-squares oracle up to the null space
        let oracle = dense_solve_with_null(&normal, &beta, &s);
        let diff: Vec<f64> = alpha.iter().zip(&oracle).map(|(p, q)| p - q).collect();
        let bnorm = beta.iter().map(|v| v * v).sum::<f64>().sqrt();
        let res_diff = normal
            .iter()
            .map(|row| row.iter().zip(&diff).map(|(p, q)| p * q).sum::<f64>().powi(2))
            .sum::<f64>()
            .sqrt()
            / bnorm.max(1e-300);
        assert!(res_diff <= 1e-8, "oracle mismatch {res_diff} seed {seed} {m}x{n} {mode:?}");
    }

    #[test]
    fn iterative_and_direct_match_dense_oracle() {
        for seed in 0..20 {
            check_against_dense(6, 6, seed, Mode::Iterative);
            check_against_dense(6, 6, seed, Mode::Direct);
            check_against_dense(3, 7, seed, Mode::Direct);
        }
    }

    #[test]
    fn direct_records_fill() {
        let (s, theta) = random_system(5, 5, 3, 0.5);
        let sys = SchurSystem::assemble(&s, &theta).unwrap();
        let mut solver = SchurSolver::new(LinsolveConfig::default());
        solver.phase_mut().force_direct();
        solver.prepare(&sys).unwrap();
        let (_, _, rec) = solver.solve(&sys, &[1.0; 5], &[1.0; 5], 1e-10).unwrap();
        assert_eq!(rec.mode, Mode::Direct);
        assert!(rec.fill_ratio >= 1.0 && rec.fill_pct > 0.0 && rec.fill_pct <= 100.0);
        assert!(rec.iters <= 3);
    }

    proptest! {
        #[test]
        fn singular_systems_solve_to_tolerance(m in 1usize..=8, n in 1usize..=8, seed in any::<u64>(), density in 0.2f64..0.9) {
            let (s, theta) = random_system(m, n, seed, density);
            let sys = SchurSystem::assemble(&s, &theta).unwrap();
            let normal = dense_normal_matrix(&s, &theta);
            let mut b1: Vec<f64> = (0..m).map(|i| ((i + 1) as f64).sqrt()).collect();
            let mut b2: Vec<f64> = (0..n).map(|k| -((k * 3 % 5) as f64)).collect();
            sys.project_rhs(&mut b1, &mut b2);
            let beta: Vec<f64> = b1.iter().chain(&b2).cloned().collect();
            let mut solver = SchurSolver::new(LinsolveConfig::default());
            solver.prepare(&sys).unwrap();
            let (a1, a2, _) = solver.solve(&sys, &b1, &b2, 1e-12).unwrap();
            let alpha: Vec<f64> = a1.iter().chain(&a2).cloned().collect();
            if beta.iter().any(|v| v.abs() > 1e-14) {
                prop_assert!(block_residual(&normal, &alpha, &beta) <= 1e-8);
            }
        }
    }
}
