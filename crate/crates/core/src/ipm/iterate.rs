use crate::error::{check_len, Result};
use crate::kron::ConstraintOperator;

/// Smallest starting value of a primal entry.
const P_START_MIN: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct Iterate {
    pub p: Vec<f64>,
    pub y: Vec<f64>,
    pub s: Vec<f64>,
    pub mu: f64,
    pub sigma: f64,
}

impl Iterate {
    pub fn support_size(&self) -> usize {
        self.p.len()
    }

    /// `μ = pᵀs/ψ`.
    pub fn complementarity(p: &[f64], s: &[f64]) -> f64 {
        p.iter().zip(s).map(|(a, b)| a * b).sum::<f64>() / p.len().max(1) as f64
    }

    pub fn refresh_mu(&mut self) {
        self.mu = Self::complementarity(&self.p, &self.s);
    }

    pub fn theta(&self) -> Vec<f64> {
        self.p.iter().zip(&self.s).map(|(p, s)| p / s).collect()
    }

    pub fn is_interior(&self) -> bool {
        self.p.iter().chain(&self.s).all(|v| *v > 0.0 && v.is_finite())
    }
}

/// Uniform primal start `max(mass/ψ, 1e-8)`, slacks `c − min c + 1`, zero
/// multipliers. `c_red` holds the support costs.
pub fn initial_iterate(total_mass: f64, c_red: &[f64], rows: usize, sigma0: f64) -> Iterate {
    let psi = c_red.len();
    let p = vec![(total_mass / psi.max(1) as f64).max(P_START_MIN); psi];
    let cmin = c_red.iter().cloned().fold(f64::INFINITY, f64::min);
    let s: Vec<f64> = c_red.iter().map(|v| v - cmin + 1.0).collect();
    let mu = Iterate::complementarity(&p, &s);
    Iterate { p, y: vec![0.0; rows], s, mu, sigma: sigma0 }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Residuals {
    /// `f − A_red p`
    pub r1: Vec<f64>,
    /// `c_red − A_redᵀ y − s`
    pub r2: Vec<f64>,
}

impl Residuals {
    pub fn compute(op: &ConstraintOperator, index: &[usize], f: &[f64], c_red: &[f64], it: &Iterate) -> Result<Self> {
        check_len(index.len(), it.p.len())?;
        let mut r1 = vec![0.0; op.rows()];
        op.apply_a_restricted(&it.p, index, &mut r1)?;
        for (r, fi) in r1.iter_mut().zip(f) {
            *r = fi - *r;
        }
        let mut r2 = vec![0.0; index.len()];
        op.apply_at_restricted(&it.y, index, &mut r2)?;
        for ((r, c), s) in r2.iter_mut().zip(c_red).zip(&it.s) {
            *r = c - *r - s;
        }
        Ok(Residuals { r1, r2 })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Direction {
    pub dp: Vec<f64>,
    pub dy: Vec<f64>,
    pub ds: Vec<f64>,
}

impl Direction {
    pub fn zeros(psi: usize, rows: usize) -> Self {
        Direction { dp: vec![0.0; psi], dy: vec![0.0; rows], ds: vec![0.0; psi] }
    }

    pub fn add(&self, other: &Direction) -> Direction {
        let sum = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x + y).collect();
        Direction { dp: sum(&self.dp, &other.dp), dy: sum(&self.dy, &other.dy), ds: sum(&self.ds, &other.ds) }
    }
}

/// Largest `α` with `x + α dx ≥ 0` (infinite when no entry decreases).
pub fn step_to_boundary(x: &[f64], dx: &[f64]) -> f64 {
    x.iter()
        .zip(dx)
        .filter(|(_, d)| **d < 0.0)
        .map(|(v, d)| -v / d)
        .fold(f64::INFINITY, f64::min)
}

/// Primal and dual step lengths: `scale` times the step to the boundary,
/// capped at 1.
pub fn step_lengths(it: &Iterate, dir: &Direction, scale: f64) -> (f64, f64) {
    let ap = (scale * step_to_boundary(&it.p, &dir.dp)).min(1.0);
    let ad = (scale * step_to_boundary(&it.s, &dir.ds)).min(1.0);
    (ap, ad)
}
