use crate::error::{check_len, OtError, Result};
use crate::instance::{Metric, OtInstance};
use crate::kron::ConstraintOperator;
use crate::linsolve::{LinearSolveRecord, Mode, SchurSolver};
use crate::schur::SchurSystem;
use crate::support::{full_reduced_costs, guard_component_balance, heuristic_reduced_costs, initial_support, Support};

use super::iterate::{initial_iterate, step_lengths, Direction, Iterate, Residuals};
use super::report::{IterationRecord, SolveReport, SolveStatus, Solution, TransportPlan};
use super::SolverConfig;

/// Steps shorter than this in both spaces count as a stall.
const STALL_STEP: f64 = 1e-10;
const MAX_STALLS: usize = 3;
/// Trial step enlargement used to aim the correctors.
const CORRECTOR_REACH: f64 = 0.1;
/// Largest supply/demand mismatch, relative to `tol`, tolerated in a support
/// component after removals.
const BALANCE_TOL: f64 = 1e-2;
/// Share of the marginal tolerance that zeroing the small side of the
/// partition may consume.
const SETTLE_SHARE: f64 = 0.5;
/// An entry is clearly on one side of the partition once `min(p, s)` is
/// below this fraction of `max(p, s)`.
const SETTLE_RATIO: f64 = 1e-2;
/// Extra iterations granted to settle the partition once converged.
const SETTLE_MAX_EXTRA: usize = 5;

/// What an observer sees once per interior-point iteration, after the
/// Schur system has been assembled and before the step is taken.
pub struct IterationView<'a> {
    pub iter: usize,
    pub mode: Mode,
    pub support: &'a Support,
    pub iterate: &'a Iterate,
    pub system: &'a SchurSystem,
}

/// Newton direction on the support:
/// `A Θ Aᵀ Δy = r1 + A Θ (r2 − P⁻¹ r3)`, `Δs = r2 − AᵀΔy`,
/// `Δp = S⁻¹ (r3 − P Δs)`. `sys` holds `Θ/kappa`.
#[allow(clippy::too_many_arguments)]
pub fn newton_direction(
    op: &ConstraintOperator,
    support: &Support,
    it: &Iterate,
    r1: &[f64],
    r2: &[f64],
    r3: &[f64],
    sys: &SchurSystem,
    kappa: f64,
    solver: &mut SchurSolver,
    tol: f64,
) -> Result<(Direction, LinearSolveRecord)> {
    let index = support.index();
    let psi = index.len();
    check_len(psi, r2.len())?;
    check_len(psi, r3.len())?;
    check_len(op.rows(), r1.len())?;
    let w: Vec<f64> = (0..psi).map(|t| it.p[t] / it.s[t] * (r2[t] - r3[t] / it.p[t])).collect();
    let mut rhs = vec![0.0; op.rows()];
    op.apply_a_restricted(&w, index, &mut rhs)?;
    for (r, v) in rhs.iter_mut().zip(r1) {
        *r += v;
    }
    rhs.iter_mut().for_each(|r| *r /= kappa);
    let m = support.m();
    let (a1, a2, record) = solver.solve(sys, &rhs[..m], &rhs[m..], tol)?;
    let dy: Vec<f64> = a1.into_iter().chain(a2).collect();
    let mut ds = vec![0.0; psi];
    op.apply_at_restricted(&dy, index, &mut ds)?;
    for (d, r) in ds.iter_mut().zip(r2) {
        *d = r - *d;
    }
    let dp: Vec<f64> = (0..psi).map(|t| (r3[t] - it.p[t] * ds[t]) / it.s[t]).collect();
    if dp.iter().chain(&dy).chain(&ds).any(|v| !v.is_finite()) {
        return Err(OtError::Numeric("non-finite Newton direction".into()));
    }
    Ok((dir_from(dp, dy, ds), record))
}

fn dir_from(dp: Vec<f64>, dy: Vec<f64>, ds: Vec<f64>) -> Direction {
    Direction { dp, dy, ds }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn solve(inst: &OtInstance, cfg: &SolverConfig) -> Result<Solution> {
    solve_observed(inst, cfg, |_| {})
}

/// [`solve`] with a hook called once per iteration.
pub fn solve_observed<F>(inst: &OtInstance, cfg: &SolverConfig, mut observer: F) -> Result<Solution>
where
    F: FnMut(&IterationView<'_>),
{
    cfg.validate()?;
    let (m, n) = (inst.m(), inst.n());
    let op = ConstraintOperator::new(m, n);
    let costs = match cfg.c_max {
        Some(c) => inst.cost_view().with_c_max(c),
        None => inst.cost_view(),
    };
    let mut support = initial_support(inst, cfg.support_multiplier)?
        .with_candidates(&costs)
        .with_refresh_period(cfg.refresh_period);
    // Work on a rescaled problem: masses so that the uniform start is p = 1,
    // costs so that the largest is 1. All μ-based rules are then relative.
    let mass: f64 = inst.a().iter().sum();
    let mass_scale = if mass > 0.0 { support.len() as f64 / mass } else { 1.0 };
    let max_cost = costs.max_cost();
    let cost_scale = if max_cost > 0.0 { 1.0 / max_cost } else { 1.0 };
    let a_scaled: Vec<f64> = inst.a().iter().map(|v| v * mass_scale).collect();
    let b_scaled: Vec<f64> = inst.b().iter().map(|v| v * mass_scale).collect();
    let f: Vec<f64> = a_scaled.iter().chain(&b_scaled).copied().collect();
    let fnorm = norm(&f);
    let settle_budget = SETTLE_SHARE * cfg.tol * (1.0 + f.iter().fold(0.0f64, |acc, v| acc.max(v.abs())));
    let scaled_costs = |support: &Support| -> Vec<f64> { support.index().iter().map(|&j| costs.cost(j) * cost_scale).collect() };
    let unscaled_y = |y: &[f64]| -> Vec<f64> { y.iter().map(|v| v / cost_scale).collect() };
    let mut it = initial_iterate(mass * mass_scale, &scaled_costs(&support), op.rows(), cfg.sigma_initial);
    let mut solver = SchurSolver::new(cfg.linsolve());

    let mut report = SolveReport {
        status: SolveStatus::IterationLimit,
        objective: 0.0,
        q: if inst.metric() == Some(Metric::L2) { 2 } else { 1 },
        ipm_iters: 0,
        cg_iters_total: 0,
        iterative_phase_iters: 0,
        direct_phase_iters: 0,
        switch_iter: None,
        max_fill_percent: 0.0,
        final_support_size: support.len(),
        peak_support_size: support.len(),
        primal_res: f64::INFINITY,
        dual_res: f64::INFINITY,
        mu: it.mu,
        correctors_accepted: 0,
        correctors_rejected: 0,
        ldlt_failures: 0,
        rwe_vs_reference: None,
        telemetry: Vec::new(),
    };
    let mut stalls = 0;
    let mut settle_extra = 0usize;
    let mut pricing_round = 0usize;

    loop {
        let c_red = scaled_costs(&support);
        let res = Residuals::compute(&op, support.index(), &f, &c_red, &it)?;
        it.refresh_mu();
        let primal = norm(&res.r1) / (1.0 + fnorm);
        let dual = norm(&res.r2) / (1.0 + norm(&c_red));
        report.primal_res = primal;
        report.dual_res = dual;
        report.mu = it.mu;
        if !(primal.is_finite() && dual.is_finite() && it.mu.is_finite()) {
            report.status = SolveStatus::NumericalFailure;
            break;
        }
        if primal.max(dual).max(it.mu) < cfg.tol {
            // one full pricing pass before declaring optimality
            let entering: Vec<usize> = full_reduced_costs(&unscaled_y(&it.y), inst, &support)?
                .into_iter()
                .filter(|c| c.reduced_cost * cost_scale < -cfg.tol)
                .map(|c| c.index)
                .collect();
            if entering.is_empty() {
                // also wait until the zero side of the partition is settled
                let (_, gap) = partition_gap(&support, &it, &a_scaled, &b_scaled);
                settle_extra += 1;
                if gap <= settle_budget || settle_extra > SETTLE_MAX_EXTRA {
                    report.status = SolveStatus::Optimal;
                    break;
                }
            } else {
                log::debug!("converged on the support but {} variables price out; continuing", entering.len());
                if report.ipm_iters >= cfg.max_ipm_iters {
                    break;
                }
                let mu = it.mu;
                support.update(&entering, &mut it.p, &mut it.s, mu, None)?;
                it.refresh_mu();
                continue;
            }
        }
        if report.ipm_iters >= cfg.max_ipm_iters {
            break;
        }
        let iter = report.ipm_iters + 1;

        // linear solver phase for this iteration
        let mut mode = solver.phase_mut().observe_support(support.len());
        if mode == Mode::Iterative && it.mu < cfg.direct_mu && solver.phase().switches() == 0 {
            solver.phase_mut().force_direct();
            mode = Mode::Direct;
        }
        // assemble with Θ normalised to max 1; right-hand sides follow suit
        let mut theta = it.theta();
        let kappa = theta.iter().cloned().fold(0.0, f64::max);
        let kappa = if kappa.is_finite() && kappa > 0.0 { kappa } else { 1.0 };
        theta.iter_mut().for_each(|t| *t /= kappa);
        let sys = SchurSystem::assemble(&support, &theta)?;
        solver.prepare(&sys)?;
        observer(&IterationView { iter, mode, support: &support, iterate: &it, system: &sys });

        // predictor
        let psi = support.len();
        let target = it.sigma * it.mu;
        let r3: Vec<f64> = (0..psi).map(|t| target - it.p[t] * it.s[t]).collect();
        let step = newton_direction(&op, &support, &it, &res.r1, &res.r2, &r3, &sys, kappa, &mut solver, cfg.cg_tol_predictor);
        let (mut dir, rec) = match step {
            Ok(v) => v,
            Err(OtError::Numeric(msg)) => {
                log::warn!("iteration {iter}: {msg}");
                report.status = SolveStatus::NumericalFailure;
                break;
            }
            Err(e) => return Err(e),
        };
        let used_direct = rec.mode == Mode::Direct;
        let mut cg_iters = rec.iters;
        let fill_pct = rec.fill_pct;
        let (mut ap, mut ad) = step_lengths(&it, &dir, cfg.step_scale);

        // centrality correctors
        let zeros_r1 = vec![0.0; op.rows()];
        let zeros_r2 = vec![0.0; psi];
        let mut correctors = 0;
        for _ in 0..cfg.max_correctors {
            if ap >= 1.0 && ad >= 1.0 {
                break;
            }
            let tp = (ap + CORRECTOR_REACH).min(1.0);
            let td = (ad + CORRECTOR_REACH).min(1.0);
            let (lo, hi) = (cfg.gamma * target, target / cfg.gamma);
            let r3c: Vec<f64> = (0..psi)
                .map(|t| {
                    let v = (it.p[t] + tp * dir.dp[t]) * (it.s[t] + td * dir.ds[t]);
                    (v.clamp(lo, hi) - v).max(-hi)
                })
                .collect();
            let corr = newton_direction(&op, &support, &it, &zeros_r1, &zeros_r2, &r3c, &sys, kappa, &mut solver, cfg.cg_tol_corrector);
            let Ok((corr, crec)) = corr else {
                report.correctors_rejected += 1;
                break;
            };
            cg_iters += crec.iters;
            let cand = dir.add(&corr);
            let (cp, cd) = step_lengths(&it, &cand, cfg.step_scale);
            if cp * cd > ap * ad {
                dir = cand;
                ap = cp;
                ad = cd;
                correctors += 1;
                report.correctors_accepted += 1;
            } else {
                report.correctors_rejected += 1;
                break;
            }
        }

        // take the step
        for t in 0..psi {
            it.p[t] += ap * dir.dp[t];
            it.s[t] += ad * dir.ds[t];
        }
        for (y, d) in it.y.iter_mut().zip(&dir.dy) {
            *y += ad * d;
        }
        if !it.is_interior() {
            report.status = SolveStatus::NumericalFailure;
            log::warn!("iteration {iter}: iterate left the positive orthant");
            break;
        }
        stalls = if ap < STALL_STEP && ad < STALL_STEP { stalls + 1 } else { 0 };
        let mu_old = it.mu;
        it.refresh_mu();
        it.sigma = if it.mu > cfg.sigma_mu_switch {
            cfg.sigma_initial
        } else {
            cfg.sigma_min.max((it.mu / mu_old).powi(3)).min(1.0)
        };

        report.ipm_iters = iter;
        report.cg_iters_total += cg_iters;
        if used_direct {
            report.direct_phase_iters += 1;
            report.switch_iter.get_or_insert(iter);
        } else {
            report.iterative_phase_iters += 1;
        }
        report.max_fill_percent = report.max_fill_percent.max(fill_pct);
        if stalls >= MAX_STALLS {
            report.status = SolveStatus::NumericalFailure;
            log::warn!("{MAX_STALLS} consecutive stalled steps");
            break;
        }

        // support update
        let candidates = if support.is_refresh_round(pricing_round) {
            full_reduced_costs(&unscaled_y(&it.y), inst, &support)?
        } else {
            heuristic_reduced_costs(&unscaled_y(&it.y), inst, &support)?
        };
        pricing_round += 1;
        let entering: Vec<usize> = candidates.iter().map(|c| c.index).collect();
        let mut removable = (it.mu < cfg.removal_mu).then(|| {
            let pmax = it.p.iter().cloned().fold(0.0, f64::max);
            let threshold = cfg.removal_rel * pmax;
            // p_j < s_j keeps variables that just entered (p = s) in place
            it.p.iter().zip(&it.s).map(|(&p, &s)| p < threshold && p < s).collect::<Vec<bool>>()
        });
        if let Some(mask) = removable.as_mut() {
            let kept = guard_component_balance(&support, &a_scaled, &b_scaled, &entering, &it.p, mask, BALANCE_TOL * cfg.tol)?;
            if kept > 0 {
                log::debug!("iteration {iter}: {kept} removals withheld to keep the support feasible");
            }
        }
        let mu = it.mu;
        let outcome = support.update_with(&entering, &mut it.p, &mut it.s, mu, removable.as_deref())?;
        it.refresh_mu();
        report.peak_support_size = report.peak_support_size.max(support.len());
        report.telemetry.push(IterationRecord {
            iter,
            mode: if used_direct { Mode::Direct } else { Mode::Iterative },
            support: psi,
            mu: it.mu,
            sigma: it.sigma,
            primal_res: primal,
            dual_res: dual,
            alpha_p: ap,
            alpha_d: ad,
            cg_iters,
            correctors,
            entered: outcome.entered.len(),
            removed: outcome.removed.len(),
            fill_pct,
        });
    }

    report.ldlt_failures = solver.ldlt_failures();
    report.final_support_size = support.len();
    let mut values: Vec<f64> = it.p.iter().map(|p| p / mass_scale).collect();
    let (zeroed, gap) = partition_gap(&support, &it, &a_scaled, &b_scaled);
    if zeroed > 0 && gap <= settle_budget {
        for (v, (p, s)) in values.iter_mut().zip(it.p.iter().zip(&it.s)) {
            if p < s {
                *v = 0.0;
            }
        }
        log::debug!("{zeroed} entries on the zero side of the partition reported as 0");
    }
    report.objective = support.index().iter().zip(&values).map(|(&j, p)| costs.cost(j) * p).sum();
    let plan = TransportPlan::new(m, n, support.index().to_vec(), values);
    Ok(Solution { plan, y: unscaled_y(&it.y), report })
}

/// Marginal violation left if entries on the zero side of the primal-dual
/// partition (`p_j < s_j`) were reported as exact zeros, together with how
/// many such entries there are. The violation is infinite while some entry
/// is not yet clearly on one side.
fn partition_gap(support: &Support, it: &Iterate, a: &[f64], b: &[f64]) -> (usize, f64) {
    if it.p.iter().zip(&it.s).any(|(&p, &s)| p.min(s) > SETTLE_RATIO * p.max(s)) {
        return (0, f64::INFINITY);
    }
    let m = support.m();
    let mut rows = vec![0.0; a.len()];
    let mut cols = vec![0.0; b.len()];
    let mut zeroed = 0;
    for (t, &j) in support.index().iter().enumerate() {
        if it.p[t] < it.s[t] {
            zeroed += 1;
        } else {
            rows[j % m] += it.p[t];
            cols[j / m] += it.p[t];
        }
    }
    let violation = rows
        .iter()
        .zip(a)
        .chain(cols.iter().zip(b))
        .fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs()));
    (zeroed, violation)
}
