//! Optimal transport problem instances.
//!
//! Variables are indexed by `j = i + k * m` (column-major vectorization of the
//! m×n coupling), with `i` the source and `k` the sink. Grid positions follow
//! the same convention: position `p` of an `rows × cols` image sits at
//! `(p % rows, p / rows)`.

mod generate;
mod io;

pub use generate::{point_cloud_instance, random_explicit_instance, synthetic_instance, SyntheticKind};
pub use io::{read_instance, write_instance, parse_instance, format_instance};

use crate::error::{OtError, Result};

/// Relative tolerance for the balance condition `sum(a) == sum(b)`.
pub const BALANCE_TOL: f64 = 1e-12;

/// Fraction of the grid side used as the default pricing threshold.
pub const GRID_CMAX_FACTOR: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    L1,
    L2,
    Linf,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::L1 => "L1",
            Metric::L2 => "L2",
            Metric::Linf => "LINF",
        }
    }

    pub fn parse(s: &str) -> Option<Metric> {
        match s.to_ascii_uppercase().as_str() {
            "L1" => Some(Metric::L1),
            "L2" => Some(Metric::L2),
            "LINF" | "L_INF" | "INF" => Some(Metric::Linf),
            _ => None,
        }
    }

    #[inline]
    pub fn distance(self, dr: f64, dc: f64) -> f64 {
        let (dr, dc) = (dr.abs(), dc.abs());
        match self {
            Metric::L1 => dr + dc,
            Metric::L2 => dr.hypot(dc),
            Metric::Linf => dr.max(dc),
        }
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridMetric {
    pub rows: usize,
    pub cols: usize,
    pub metric: Metric,
}

impl GridMetric {
    pub fn square(res: usize, metric: Metric) -> Self {
        GridMetric { rows: res, cols: res, metric }
    }

    pub fn positions(&self) -> usize {
        self.rows * self.cols
    }

    /// Distance between two grid positions (0-based).
    pub fn cost(&self, i: usize, j: usize) -> Result<f64> {
        let bound = self.positions();
        for &p in &[i, j] {
            if p >= bound {
                return Err(OtError::Index { index: p + 1, bound });
            }
        }
        Ok(self.cost_unchecked(i, j))
    }

    #[inline]
    pub(crate) fn cost_unchecked(&self, i: usize, j: usize) -> f64 {
        let (ri, ci) = (i % self.rows, i / self.rows);
        let (rj, cj) = (j % self.rows, j / self.rows);
        self.metric
            .distance(ri as f64 - rj as f64, ci as f64 - cj as f64)
    }
}

/// Free-function form of [`GridMetric::cost`].
pub fn grid_cost(spec: &GridMetric, i: usize, j: usize) -> Result<f64> {
    spec.cost(i, j)
}

#[derive(Debug, Clone, PartialEq)]
pub enum CostSpec {
    /// Dense m×n costs stored column-major, i.e. `costs[i + k * m]`.
    Explicit(Vec<f64>),
    Grid(GridMetric),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OtInstance {
    m: usize,
    n: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    cost: CostSpec,
}

impl OtInstance {
    pub fn new(a: Vec<f64>, b: Vec<f64>, cost: CostSpec) -> Result<Self> {
        let (m, n) = (a.len(), b.len());
        if m == 0 || n == 0 {
            return Err(OtError::Parameter("marginals must be nonempty".into()));
        }
        for (name, v) in [("a", &a), ("b", &b)] {
            if let Some(pos) = v.iter().position(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(OtError::Parameter(format!(
                    "negative or non-finite mass {}[{}] = {}",
                    name,
                    pos + 1,
                    v[pos]
                )));
            }
        }
        check_balance(&a, &b).map_err(OtError::Parameter)?;
        match &cost {
            CostSpec::Explicit(c) => {
                if c.len() != m * n {
                    return Err(OtError::Dimension { expected: m * n, got: c.len() });
                }
                if let Some(pos) = c.iter().position(|x| !(x.is_finite() && *x >= 0.0)) {
                    return Err(OtError::Parameter(format!(
                        "negative or non-finite cost at variable {}",
                        pos + 1
                    )));
                }
            }
            CostSpec::Grid(g) => {
                if g.rows == 0 || g.cols == 0 || g.positions() != m || g.positions() != n {
                    return Err(OtError::Parameter(format!(
                        "grid {}x{} does not match marginals of length {} and {}",
                        g.rows, g.cols, m, n
                    )));
                }
            }
        }
        Ok(OtInstance { m, n, a, b, cost })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn a(&self) -> &[f64] {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn cost_spec(&self) -> &CostSpec {
        &self.cost
    }

    pub fn num_vars(&self) -> usize {
        self.m * self.n
    }

    pub fn num_constraints(&self) -> usize {
        self.m + self.n
    }

    /// Stacked right-hand side `f = [a; b]`.
    pub fn rhs(&self) -> Vec<f64> {
        let mut f = Vec::with_capacity(self.m + self.n);
        f.extend_from_slice(&self.a);
        f.extend_from_slice(&self.b);
        f
    }

    pub fn metric(&self) -> Option<Metric> {
        match &self.cost {
            CostSpec::Grid(g) => Some(g.metric),
            CostSpec::Explicit(_) => None,
        }
    }

    /// Replace the metric of a grid instance; explicit instances are returned unchanged.
    pub fn with_metric(mut self, metric: Metric) -> Self {
        if let CostSpec::Grid(g) = &mut self.cost {
            g.metric = metric;
        }
        self
    }

    pub fn cost_view(&self) -> CostView<'_> {
        CostView::new(self)
    }

    /// Dense column-major cost vector. Only meant for small instances.
    pub fn dense_costs(&self) -> Vec<f64> {
        let view = self.cost_view();
        (0..self.num_vars()).map(|j| view.cost(j)).collect()
    }
}

pub(crate) fn check_balance(a: &[f64], b: &[f64]) -> std::result::Result<(), String> {
    let sa: f64 = a.iter().sum();
    let sb: f64 = b.iter().sum();
    let scale = sa.abs().max(sb.abs()).max(f64::MIN_POSITIVE);
    if (sa - sb).abs() > BALANCE_TOL * scale {
        return Err(format!("unbalanced marginals: sum(a) = {sa}, sum(b) = {sb}"));
    }
    Ok(())
}

/// Cost lookup by variable index without materializing the cost vector.
#[derive(Debug, Clone)]
pub struct CostView<'a> {
    m: usize,
    source: CostSource<'a>,
    c_max: f64,
}

#[derive(Debug, Clone)]
enum CostSource<'a> {
    Explicit(&'a [f64]),
    Grid(GridMetric),
}

impl<'a> CostView<'a> {
    fn new(inst: &'a OtInstance) -> Self {
        let (source, c_max) = match &inst.cost {
            CostSpec::Explicit(c) => (CostSource::Explicit(c.as_slice()), percentile(c, 0.10)),
            CostSpec::Grid(g) => (
                CostSource::Grid(*g),
                GRID_CMAX_FACTOR * g.rows.max(g.cols) as f64,
            ),
        };
        CostView { m: inst.m, source, c_max }
    }

    #[inline]
    pub fn cost(&self, j: usize) -> f64 {
        match &self.source {
            CostSource::Explicit(c) => c[j],
            CostSource::Grid(g) => g.cost_unchecked(j % self.m, j / self.m),
        }
    }

    /// Pricing threshold: variables with `c(j) < c_max` form the candidate set.
    pub fn c_max(&self) -> f64 {
        self.c_max
    }

    pub fn with_c_max(mut self, c_max: f64) -> Self {
        self.c_max = c_max;
        self
    }

    /// Largest cost over all variables.
    pub fn max_cost(&self) -> f64 {
        match &self.source {
            CostSource::Explicit(c) => c.iter().cloned().fold(0.0, f64::max),
            CostSource::Grid(g) => g
                .metric
                .distance((g.rows - 1) as f64, (g.cols - 1) as f64),
        }
    }
}

/// Nearest-rank percentile of a nonempty slice.
fn percentile(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|x, y| x.total_cmp(y));
    let rank = (q * (sorted.len() - 1) as f64).floor() as usize;
    sorted[rank]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_cost_examples() {
        let g = GridMetric::square(2, Metric::Linf);
        // (0,0) is position 0 and (1,1) is position 3 under column-major order
        assert_eq!(grid_cost(&g, 0, 3).unwrap(), 1.0);
        let g = GridMetric::square(32, Metric::L1);
        assert_eq!(grid_cost(&g, 0, 32 * 32 - 1).unwrap(), 62.0);
        for metric in [Metric::L1, Metric::L2, Metric::Linf] {
            let g = GridMetric::square(5, metric);
            for p in 0..25 {
                assert_eq!(g.cost(p, p).unwrap(), 0.0);
            }
        }
        let g = GridMetric::square(3, Metric::L2);
        assert!((g.cost(0, 8).unwrap() - 8f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn grid_cost_out_of_range() {
        let g = GridMetric::square(2, Metric::L1);
        match g.cost(0, 4) {
            Err(OtError::Index { index, bound }) => assert_eq!((index, bound), (5, 4)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn grid_cost_symmetry_and_triangle_inequality() {
        for metric in [Metric::L1, Metric::L2, Metric::Linf] {
            for res in 1..=8 {
                let g = GridMetric::square(res, metric);
                let np = g.positions();
                for i in 0..np {
                    for j in 0..np {
                        let dij = g.cost(i, j).unwrap();
                        assert_eq!(dij, g.cost(j, i).unwrap());
                        for k in 0..np {
                            let via = g.cost_unchecked(i, k) + g.cost_unchecked(k, j);
                            assert!(dij <= via + 1e-12, "{metric} {res}: {i} {j} {k}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn new_rejects_bad_marginals() {
        let c = CostSpec::Explicit(vec![0.0; 4]);
        assert!(OtInstance::new(vec![0.5, 0.5], vec![0.5, 0.6], c.clone()).is_err());
        assert!(OtInstance::new(vec![-0.5, 1.5], vec![0.5, 0.5], c.clone()).is_err());
        assert!(OtInstance::new(vec![0.5, 0.5], vec![1.0], c).is_err());
        let g = CostSpec::Grid(GridMetric::square(2, Metric::L1));
        assert!(OtInstance::new(vec![0.25; 4], vec![0.5; 2], g).is_err());
    }

    #[test]
    fn zero_mass_bins_are_valid() {
        let inst = OtInstance::new(
            vec![1.0, 0.0],
            vec![0.0, 1.0],
            CostSpec::Explicit(vec![0.0, 1.0, 1.0, 0.0]),
        )
        .unwrap();
        assert_eq!(inst.num_vars(), 4);
    }

    #[test]
    fn cost_view_matches_grid_formula() {
        let inst = synthetic_instance(4, SyntheticKind::UniformRandom, Metric::L2, 3).unwrap();
        let view = inst.cost_view();
        let g = GridMetric::square(4, Metric::L2);
        for j in 0..inst.num_vars() {
            assert_eq!(view.cost(j), g.cost(j % 16, j / 16).unwrap());
        }
        assert_eq!(view.max_cost(), 18f64.sqrt());
    }

    #[test]
    fn default_c_max_scales_linearly_with_res() {
        let mut prev: Option<f64> = None;
        for res in [4, 8, 16, 32] {
            let inst = synthetic_instance(res, SyntheticKind::UniformRandom, Metric::L1, 0).unwrap();
            let c = inst.cost_view().c_max();
            if let Some(p) = prev {
                assert!((c - 2.0 * p).abs() < 1e-12);
            }
            prev = Some(c);
        }
    }

    #[test]
    fn explicit_c_max_is_tenth_percentile() {
        let costs: Vec<f64> = (0..100).map(|x| x as f64).collect();
        let inst = OtInstance::new(vec![0.1; 10], vec![0.1; 10], CostSpec::Explicit(costs)).unwrap();
        assert_eq!(inst.cost_view().c_max(), 9.0);
    }
}
