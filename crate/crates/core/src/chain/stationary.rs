use log::warn;
use nalgebra::{DMatrix, DVector};

use super::heat::evolve;
use super::matrix::{Distribution, StochasticMatrix};
use crate::error::{Error, Result};

/// Target residual `max_y |(pi P)(y) - pi(y)|`.
pub const STATIONARY_RESIDUAL: f64 = 1e-10;

pub fn stationary_residual(p: &StochasticMatrix, pi: &[f64]) -> f64 {
    p.left_mul(pi)
        .iter()
        .zip(pi)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
}

/// The unique invariant law of an irreducible chain.
///
/// Doubly stochastic matrices return the uniform law directly. Otherwise
/// the singular system `pi (P - I) = 0` is solved with its last equation
/// replaced by `sum pi = 1`; if that solve is singular or leaves a residual
/// above [`STATIONARY_RESIDUAL`], power iteration on the time-one heat kernel
/// takes over.
pub fn stationary(p: &StochasticMatrix) -> Result<Distribution> {
    if !p.is_irreducible() {
        return Err(Error::NotIrreducible);
    }
    let n = p.n();
    if p.is_doubly_stochastic() {
        return Ok(Distribution::uniform(n));
    }
    if let Some(pi) = direct_solve(p) {
        if stationary_residual(p, &pi) <= STATIONARY_RESIDUAL {
            return Ok(Distribution::from_vec_unchecked(pi));
        }
    }
    warn!("direct stationary solve ill-conditioned (n = {n}); falling back to power iteration");
    power_iteration(p)
}

fn direct_solve(p: &StochasticMatrix) -> Option<Vec<f64>> {
    let n = p.n();
    // Row y of the system is column y of (P - I).
    let mut a = DMatrix::<f64>::from_fn(n, n, |y, x| p.get(x, y) - if x == y { 1.0 } else { 0.0 });
    for x in 0..n {
        a[(n - 1, x)] = 1.0;
    }
    let mut rhs = DVector::<f64>::zeros(n);
    rhs[n - 1] = 1.0;
    let sol = a.lu().solve(&rhs)?;
    if sol.iter().any(|v| !v.is_finite() || *v < -1e-12) {
        return None;
    }
    let mut pi: Vec<f64> = sol.iter().map(|v| v.max(0.0)).collect();
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|v| *v /= total);
    Some(pi)
}

fn power_iteration(p: &StochasticMatrix) -> Result<Distribution> {
    let n = p.n();
    let mut pi = vec![1.0 / n as f64; n];
    for _ in 0..100_000 {
        let mut next = evolve(p, &pi, 1.0, 1e-15)?;
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|v| *v /= total);
        pi = next;
        if stationary_residual(p, &pi) <= STATIONARY_RESIDUAL {
            return Ok(Distribution::from_vec_unchecked(pi));
        }
    }
    Err(Error::Numerical("stationary power iteration did not converge".into()))
}
