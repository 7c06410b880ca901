//! Hybrid interior-point / column-generation loop.

mod iterate;
mod report;
mod solve;

pub use iterate::{initial_iterate, step_lengths, step_to_boundary, Direction, Iterate, Residuals};
pub use report::{IterationRecord, SolveReport, SolveStatus, Solution, TransportPlan};
pub use solve::{newton_direction, solve, solve_observed, IterationView};

use crate::error::{OtError, Result};
use crate::linsolve::{LinsolveConfig, OrderingPolicy};

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub tol: f64,
    pub max_ipm_iters: usize,
    pub max_cg_iters: usize,
    pub max_correctors: usize,
    pub cg_tol_predictor: f64,
    pub cg_tol_corrector: f64,
    pub support_multiplier: f64,
    pub refresh_period: usize,
    pub switch_threshold: f64,
    /// Kept for run records; the solver itself is deterministic.
    pub seed: u64,
    /// Fraction of the step to the boundary actually taken.
    pub step_scale: f64,
    /// Width of the neighbourhood the correctors aim for.
    pub gamma: f64,
    pub sigma_initial: f64,
    /// σ stays at `sigma_initial` while μ is above this.
    pub sigma_mu_switch: f64,
    pub sigma_min: f64,
    /// Removal becomes active once μ falls below this.
    pub removal_mu: f64,
    /// Variables with `p_j < removal_rel·max p` may leave.
    pub removal_rel: f64,
    /// Override for the heuristic-pricing cost cutoff.
    pub c_max: Option<f64>,
    pub ordering: OrderingPolicy,
    pub allow_fallback: bool,
    /// Force the direct phase once μ drops below this even if the support
    /// statistic has not fired.
    pub direct_mu: f64,
    pub nnz_cap: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-6,
            max_ipm_iters: 200,
            max_cg_iters: 1000,
            max_correctors: 3,
            cg_tol_predictor: 1e-6,
            cg_tol_corrector: 1e-3,
            support_multiplier: 5.0,
            refresh_period: 3,
            switch_threshold: 0.05,
            seed: 0,
            step_scale: 0.995,
            gamma: 0.1,
            sigma_initial: 0.3,
            sigma_mu_switch: 1e-2,
            sigma_min: 0.1,
            removal_mu: 1e-3,
            removal_rel: 1e-8,
            c_max: None,
            ordering: OrderingPolicy::MinimumDegree,
            allow_fallback: false,
            direct_mu: 1e-5,
            nnz_cap: 50_000_000,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tol", self.tol),
            ("cg_tol_predictor", self.cg_tol_predictor),
            ("cg_tol_corrector", self.cg_tol_corrector),
            ("gamma", self.gamma),
            ("sigma_initial", self.sigma_initial),
            ("sigma_min", self.sigma_min),
            ("removal_rel", self.removal_rel),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(OtError::Parameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.step_scale > 0.0 && self.step_scale < 1.0) {
            return Err(OtError::Parameter(format!("step_scale must lie in (0,1), got {}", self.step_scale)));
        }
        if !(self.gamma < 1.0) || self.sigma_initial >= 1.0 {
            return Err(OtError::Parameter("gamma and sigma_initial must be below 1".into()));
        }
        if !(self.support_multiplier >= 1.0) {
            return Err(OtError::Parameter(format!(
                "support multiplier must be >= 1, got {}",
                self.support_multiplier
            )));
        }
        if self.refresh_period == 0 || self.max_cg_iters == 0 {
            return Err(OtError::Parameter("refresh_period and max_cg_iters must be positive".into()));
        }
        Ok(())
    }

    pub fn linsolve(&self) -> LinsolveConfig {
        LinsolveConfig {
            max_cg_iters: self.max_cg_iters,
            switch_threshold: self.switch_threshold,
            allow_fallback: self.allow_fallback,
            ordering: self.ordering,
            nnz_cap: self.nnz_cap,
            ..LinsolveConfig::default()
        }
    }

    /// Short stable fingerprint of the settings, for run records.
    pub fn fingerprint(&self) -> String {
        // FNV-1a over the debug representation
        let text = format!("{self:?}");
        let mut h: u64 = 0xcbf29ce484222325;
        for b in text.bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
        format!("{h:016x}")
    }
}
