//! The set of variables allowed to be nonzero, and the pricing that grows it.

use rayon::prelude::*;

use crate::error::{check_len, OtError, Result};
use crate::instance::{CostView, OtInstance};

/// Scans below this many variables stay on the calling thread.
const PAR_SCAN_MIN: usize = 1 << 16;
const PAR_CHUNK: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub index: usize,
    pub reduced_cost: f64,
}

#[derive(Debug, Clone)]
pub struct Support {
    m: usize,
    n: usize,
    index: Vec<usize>,
    candidates: Vec<usize>,
    candidate_ends: Vec<(u32, u32)>,
    refresh_period: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct UpdateOutcome {
    pub entered: Vec<usize>,
    pub removed: Vec<usize>,
    pub vetoed: usize,
}

impl Support {
    /// Support over an explicit sorted, duplicate-free list of indices. The
    /// candidate set is left empty.
    pub fn from_indices(m: usize, n: usize, mut index: Vec<usize>) -> Result<Self> {
        index.sort_unstable();
        index.dedup();
        if index.is_empty() {
            return Err(OtError::Construction("support must not be empty".into()));
        }
        if let Some(&last) = index.last() {
            if last >= m * n {
                return Err(OtError::Index { index: last + 1, bound: m * n });
            }
        }
        Ok(Support {
            m,
            n,
            index,
            candidates: Vec::new(),
            candidate_ends: Vec::new(),
            refresh_period: 3,
        })
    }

    /// Precompute `J = { j : c(j) < c_max }` together with its endpoints.
    pub fn with_candidates(mut self, costs: &CostView<'_>) -> Self {
        let c_max = costs.c_max();
        let m = self.m;
        let total = m * self.n;
        self.candidates = if total >= PAR_SCAN_MIN {
            (0..total)
                .into_par_iter()
                .with_min_len(PAR_CHUNK)
                .filter(|&j| costs.cost(j) < c_max)
                .collect()
        } else {
            (0..total).filter(|&j| costs.cost(j) < c_max).collect()
        };
        self.candidate_ends = self
            .candidates
            .iter()
            .map(|&j| ((j % m) as u32, (j / m) as u32))
            .collect();
        self
    }

    /// Use an explicit candidate set instead of the cost threshold.
    pub fn with_candidate_set(mut self, mut candidates: Vec<usize>) -> Self {
        candidates.sort_unstable();
        candidates.dedup();
        candidates.retain(|&j| j < self.m * self.n);
        let m = self.m;
        self.candidate_ends = candidates.iter().map(|&j| ((j % m) as u32, (j / m) as u32)).collect();
        self.candidates = candidates;
        self
    }

    pub fn with_refresh_period(mut self, period: usize) -> Self {
        self.refresh_period = period.max(1);
        self
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn index(&self) -> &[usize] {
        &self.index
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn candidates(&self) -> &[usize] {
        &self.candidates
    }

    pub fn refresh_period(&self) -> usize {
        self.refresh_period
    }

    /// Whether update number `round` (0-based) should price all variables.
    pub fn is_refresh_round(&self, round: usize) -> bool {
        round % self.refresh_period == 0
    }

    pub fn contains(&self, j: usize) -> bool {
        self.index.binary_search(&j).is_ok()
    }

    /// `(source, sink)` of every support entry, in support order.
    pub fn endpoints(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let m = self.m;
        self.index.iter().map(move |&j| (j % m, j / m))
    }

    /// Apply one update: drop up to `m` small entries (when `removal_threshold`
    /// is given) and then insert `entering` with `p = s = √μ`.
    ///
    /// `p` and `s` are aligned with the support before the call and are
    /// realigned with the new support on return.
    pub fn update(
        &mut self,
        entering: &[usize],
        p: &mut Vec<f64>,
        s: &mut Vec<f64>,
        mu: f64,
        removal_threshold: Option<f64>,
    ) -> Result<UpdateOutcome> {
        let removable: Option<Vec<bool>> = removal_threshold.map(|t| p.iter().map(|&v| v < t).collect());
        self.update_with(entering, p, s, mu, removable.as_deref())
    }

    /// Like [`Support::update`], with the removal candidates given as a mask
    /// over the current support. Candidates leave smallest `p` first.
    pub fn update_with(
        &mut self,
        entering: &[usize],
        p: &mut Vec<f64>,
        s: &mut Vec<f64>,
        mu: f64,
        removable: Option<&[bool]>,
    ) -> Result<UpdateOutcome> {
        let psi = self.index.len();
        if let Some(mask) = removable {
            if mask.len() != psi {
                return Err(OtError::Dimension { expected: psi, got: mask.len() });
            }
        }
        if p.len() != psi || s.len() != psi {
            return Err(OtError::Dimension { expected: psi, got: p.len().min(s.len()) });
        }
        if entering.len() > self.m {
            return Err(OtError::Parameter(format!(
                "{} entering variables exceed the per-update limit {}",
                entering.len(),
                self.m
            )));
        }
        let mut entering = entering.to_vec();
        entering.sort_unstable();
        entering.dedup();
        for &j in &entering {
            if j >= self.m * self.n {
                return Err(OtError::Index { index: j + 1, bound: self.m * self.n });
            }
            if self.contains(j) {
                return Err(OtError::Parameter(format!("variable {} already in support", j + 1)));
            }
        }

        let mut row_count = vec![0usize; self.m];
        let mut col_count = vec![0usize; self.n];
        for &j in self.index.iter().chain(&entering) {
            row_count[j % self.m] += 1;
            col_count[j / self.m] += 1;
        }

        let mut outcome = UpdateOutcome::default();
        let mut drop = vec![false; psi];
        if let Some(mask) = removable {
            let mut small: Vec<usize> = (0..psi).filter(|&t| mask[t]).collect();
            small.sort_by(|&x, &y| p[x].total_cmp(&p[y]).then(self.index[x].cmp(&self.index[y])));
            for t in small {
                if outcome.removed.len() == self.m {
                    break;
                }
                let j = self.index[t];
                let (i, k) = (j % self.m, j / self.m);
                if row_count[i] <= 1 || col_count[k] <= 1 {
                    log::debug!("removal of variable {} vetoed: it covers a constraint alone", j + 1);
                    outcome.vetoed += 1;
                    continue;
                }
                row_count[i] -= 1;
                col_count[k] -= 1;
                drop[t] = true;
                outcome.removed.push(j);
            }
            outcome.removed.sort_unstable();
        }

        let root = mu.max(0.0).sqrt();
        let new_len = psi - outcome.removed.len() + entering.len();
        let mut index = Vec::with_capacity(new_len);
        let mut np = Vec::with_capacity(new_len);
        let mut ns = Vec::with_capacity(new_len);
        let mut e = entering.iter().peekable();
        for t in 0..psi {
            let j = self.index[t];
            while let Some(&&je) = e.peek() {
                if je > j {
                    break;
                }
                index.push(je);
                np.push(root);
                ns.push(root);
                e.next();
            }
            if !drop[t] {
                index.push(j);
                np.push(p[t]);
                ns.push(s[t]);
            }
        }
        for &je in e {
            index.push(je);
            np.push(root);
            ns.push(root);
        }
        self.index = index;
        *p = np;
        *s = ns;
        outcome.entered = entering;
        Ok(outcome)
    }
}

/// Withdraw removal candidates until every connected component of the
/// remaining support (kept entries plus `entering`) carries as much supply as
/// demand, up to `tol`; otherwise the restricted problem would be infeasible.
///
/// Candidates are re-admitted largest `p` first, and only when they touch a
/// component that is still unbalanced. Returns the number withdrawn.
pub fn guard_component_balance(
    support: &Support,
    a: &[f64],
    b: &[f64],
    entering: &[usize],
    p: &[f64],
    mask: &mut [bool],
    tol: f64,
) -> Result<usize> {
    let (m, n) = (support.m(), support.n());
    check_len(m, a.len())?;
    check_len(n, b.len())?;
    check_len(support.len(), p.len())?;
    check_len(support.len(), mask.len())?;
    let mut parent: Vec<usize> = (0..m + n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    // net supply per root
    let mut net: Vec<f64> = a.iter().cloned().chain(b.iter().map(|v| -v)).collect();
    fn union(parent: &mut [usize], net: &mut [f64], x: usize, y: usize) {
        let (rx, ry) = (find(parent, x), find(parent, y));
        if rx != ry {
            parent[ry] = rx;
            net[rx] += net[ry];
            net[ry] = 0.0;
        }
    }
    let kept = support.index().iter().zip(mask.iter()).filter(|(_, &d)| !d).map(|(&j, _)| j);
    for j in kept.chain(entering.iter().copied()) {
        union(&mut parent, &mut net, j % m, m + j / m);
    }
    let mut cands: Vec<usize> = (0..mask.len()).filter(|&t| mask[t]).collect();
    cands.sort_by(|&x, &y| p[y].total_cmp(&p[x]).then(x.cmp(&y)));
    let mut withdrawn = 0;
    for t in cands {
        let j = support.index()[t];
        let (ri, rk) = (find(&mut parent, j % m), find(&mut parent, m + j / m));
        if ri == rk {
            continue;
        }
        if net[ri].abs() > tol || net[rk].abs() > tol {
            union(&mut parent, &mut net, ri, rk);
            mask[t] = false;
            withdrawn += 1;
        }
    }
    Ok(withdrawn)
}

/// Initial support: the `multiplier·(m+n−1)` cheapest variables (ties by
/// index), plus the cheapest variable of any row or column left uncovered.
pub fn initial_support(inst: &OtInstance, multiplier: f64) -> Result<Support> {
    if !(multiplier.is_finite() && multiplier >= 1.0) {
        return Err(OtError::Parameter(format!("support multiplier must be >= 1, got {multiplier}")));
    }
    let (m, n) = (inst.m(), inst.n());
    let total = m * n;
    let costs = inst.cost_view();
    let target = ((multiplier * (m + n - 1) as f64).round() as usize).clamp(1, total);

    let key = |j: usize| (costs.cost(j), j);
    let cmp = |x: &usize, y: &usize| {
        let (cx, jx) = key(*x);
        let (cy, jy) = key(*y);
        cx.total_cmp(&cy).then(jx.cmp(&jy))
    };
    let mut chosen: Vec<usize> = if target == total {
        (0..total).collect()
    } else {
        let mut all: Vec<usize> = (0..total).collect();
        all.select_nth_unstable_by(target - 1, cmp);
        all.truncate(target);
        all
    };

    let mut row_hit = vec![false; m];
    let mut col_hit = vec![false; n];
    for &j in &chosen {
        row_hit[j % m] = true;
        col_hit[j / m] = true;
    }
    for i in (0..m).filter(|&i| !row_hit[i]) {
        let j = (0..n).map(|k| i + k * m).min_by(cmp).expect("n >= 1");
        chosen.push(j);
        col_hit[j / m] = true;
    }
    for k in (0..n).filter(|&k| !col_hit[k]) {
        let j = (0..m).map(|i| i + k * m).min_by(cmp).expect("m >= 1");
        chosen.push(j);
    }

    let support = Support::from_indices(m, n, chosen)?.with_candidates(&costs);
    let mut rows = vec![false; m];
    let mut cols = vec![false; n];
    for (i, k) in support.endpoints() {
        rows[i] = true;
        cols[k] = true;
    }
    if rows.iter().chain(&cols).any(|hit| !hit) {
        return Err(OtError::Construction("coverage repair left a constraint without variables".into()));
    }
    Ok(support)
}

#[inline]
fn reduced_cost(costs: &CostView<'_>, y: &[f64], m: usize, j: usize) -> f64 {
    costs.cost(j) - y[j % m] - y[m + j / m]
}

fn take_most_negative(mut found: Vec<Candidate>, limit: usize) -> Vec<Candidate> {
    let cmp = |x: &Candidate, y: &Candidate| {
        x.reduced_cost.total_cmp(&y.reduced_cost).then(x.index.cmp(&y.index))
    };
    if found.len() > limit && limit > 0 {
        found.select_nth_unstable_by(limit - 1, cmp);
    }
    found.truncate(limit);
    found.sort_by(cmp);
    found
}

fn check_dual(inst: &OtInstance, y: &[f64]) -> Result<()> {
    if y.len() != inst.num_constraints() {
        return Err(OtError::Dimension { expected: inst.num_constraints(), got: y.len() });
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(OtError::Numeric("non-finite multiplier in pricing".into()));
    }
    Ok(())
}

/// Up to `m` variables outside the support with the most negative reduced
/// cost `c(j) − y[source] − y[m + sink]`, ascending.
pub fn full_reduced_costs(y: &[f64], inst: &OtInstance, support: &Support) -> Result<Vec<Candidate>> {
    check_dual(inst, y)?;
    let costs = inst.cost_view();
    let m = inst.m();
    let total = inst.num_vars();
    let index = support.index();
    let scan = |lo: usize, hi: usize| -> Vec<Candidate> {
        let mut pos = index.partition_point(|&j| j < lo);
        let mut out = Vec::new();
        for j in lo..hi {
            if pos < index.len() && index[pos] == j {
                pos += 1;
                continue;
            }
            let rc = reduced_cost(&costs, y, m, j);
            if rc < 0.0 {
                out.push(Candidate { index: j, reduced_cost: rc });
            }
        }
        out
    };
    let found = if total >= PAR_SCAN_MIN {
        (0..total.div_ceil(PAR_CHUNK))
            .into_par_iter()
            .flat_map_iter(|c| scan(c * PAR_CHUNK, ((c + 1) * PAR_CHUNK).min(total)))
            .collect()
    } else {
        scan(0, total)
    };
    Ok(take_most_negative(found, m))
}

/// Same contract as [`full_reduced_costs`], scanning only the precomputed
/// low-cost candidate set.
pub fn heuristic_reduced_costs(y: &[f64], inst: &OtInstance, support: &Support) -> Result<Vec<Candidate>> {
    check_dual(inst, y)?;
    let costs = inst.cost_view();
    let m = inst.m();
    let index = support.index();
    let cands = &support.candidates;
    let ends = &support.candidate_ends;
    let scan = |lo: usize, hi: usize| -> Vec<Candidate> {
        let mut out = Vec::new();
        let mut pos = index.partition_point(|&j| j < cands.get(lo).copied().unwrap_or(usize::MAX));
        for t in lo..hi {
            let j = cands[t];
            while pos < index.len() && index[pos] < j {
                pos += 1;
            }
            if pos < index.len() && index[pos] == j {
                continue;
            }
            let (i, k) = ends[t];
            let rc = costs.cost(j) - y[i as usize] - y[m + k as usize];
            if rc < 0.0 {
                out.push(Candidate { index: j, reduced_cost: rc });
            }
        }
        out
    };
    let len = cands.len();
    let found = if len >= PAR_SCAN_MIN {
        (0..len.div_ceil(PAR_CHUNK))
            .into_par_iter()
            .flat_map_iter(|c| scan(c * PAR_CHUNK, ((c + 1) * PAR_CHUNK).min(len)))
            .collect()
    } else {
        scan(0, len)
    };
    Ok(take_most_negative(found, m))
}
