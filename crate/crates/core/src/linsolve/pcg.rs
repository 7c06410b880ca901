use crate::error::{check_len, OtError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PcgOutcome {
    pub x: Vec<f64>,
    pub iters: usize,
    /// `‖b − S x‖ / ‖b‖` for the deflated right-hand side `b`.
    pub relres: f64,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Preconditioned conjugate gradients for a symmetric positive semidefinite
/// operator. `deflate` projects onto the range of the operator; it is applied
/// to the right-hand side, to every preconditioned residual and to the final
/// iterate, so the result is orthogonal to the known null space.
///
/// Hitting `maxit` is reported through `converged`, not as an error.
pub fn pcg<A, P, D>(mut matvec: A, rhs: &[f64], mut precond: P, deflate: D, tol: f64, maxit: usize) -> Result<PcgOutcome>
where
    A: FnMut(&[f64], &mut [f64]) -> Result<()>,
    P: FnMut(&[f64], &mut [f64]),
    D: Fn(&mut [f64]),
{
    let n = rhs.len();
    let mut b = rhs.to_vec();
    deflate(&mut b);
    let bnorm = norm(&b);
    if !bnorm.is_finite() {
        return Err(OtError::Numeric("non-finite right-hand side in PCG".into()));
    }
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(PcgOutcome { x, iters: 0, relres: 0.0, converged: true });
    }
    let mut r = b;
    let mut z = vec![0.0; n];
    precond(&r, &mut z);
    check_len(n, z.len())?;
    deflate(&mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut q = vec![0.0; n];
    let mut relres = 1.0;
    let mut iters = 0;
    while iters < maxit {
        matvec(&p, &mut q)?;
        let pq = dot(&p, &q);
        if !pq.is_finite() || !rz.is_finite() {
            return Err(OtError::Numeric(format!("non-finite value in PCG at iteration {}", iters + 1)));
        }
        if pq <= 0.0 || rz <= 0.0 {
            // the search direction left the range of the operator: nothing
            // more can be gained in floating point
            break;
        }
        let alpha = rz / pq;
        for ((xi, ri), (pi, qi)) in x.iter_mut().zip(r.iter_mut()).zip(p.iter().zip(&q)) {
            *xi += alpha * pi;
            *ri -= alpha * qi;
        }
        iters += 1;
        relres = norm(&r) / bnorm;
        if !relres.is_finite() {
            return Err(OtError::Numeric(format!("non-finite residual in PCG at iteration {iters}")));
        }
        if relres <= tol {
            break;
        }
        precond(&r, &mut z);
        deflate(&mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    deflate(&mut x);
    Ok(PcgOutcome { x, iters, relres, converged: relres <= tol })
}
