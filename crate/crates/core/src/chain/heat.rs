//! Continuous-time heat kernel `e^{t(P - I)}` as a Poisson mixture of powers
//! of `P`, evaluated one row vector at a time.

use rayon::prelude::*;

use super::matrix::{Distribution, StochasticMatrix};
use crate::error::{Error, Result};

/// Largest tolerance accepted for the Poisson tail.
pub const MAX_TOL: f64 = 1e-6;

/// Default truncation tolerance used by the analyses.
pub const DEFAULT_TOL: f64 = 1e-12;

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol <= MAX_TOL {
        Ok(())
    } else {
        Err(Error::InvalidTolerance(tol))
    }
}

/// Poisson(`t`) weights `q(0..=K)` where `K` is the first index at or past
/// `ceil(t + 8 sqrt(t) + 8)` whose remaining tail mass is at most `tol`.
///
/// Weights are built in log space so large `t` does not underflow `e^{-t}`.
/// The tail past `K` is bounded by the geometric series
/// `q(K) * r / (1 - r')` with `r = t/(K+1)`, `r' = t/(K+2)`.
pub fn poisson_weights(t: f64, tol: f64) -> Result<Vec<f64>> {
    check_tol(tol)?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidParameter(format!("time {t}")));
    }
    if t == 0.0 {
        return Ok(vec![1.0]);
    }
    let floor = (t + 8.0 * t.sqrt() + 8.0).ceil() as usize;
    let ln_t = t.ln();
    let mut weights = Vec::with_capacity(floor + 16);
    let mut ln_q = -t;
    let mut k = 0usize;
    loop {
        let q = ln_q.exp();
        weights.push(q);
        let kf = k as f64;
        if k >= floor && kf + 2.0 > t {
            let tail = q * (t / (kf + 1.0)) / (1.0 - t / (kf + 2.0));
            if tail <= tol {
                return Ok(weights);
            }
        }
        k += 1;
        ln_q += ln_t - (k as f64).ln();
    }
}

/// Evolves an arbitrary row vector: `sum_k q(k) v P^k`.
pub fn evolve(p: &StochasticMatrix, initial: &[f64], t: f64, tol: f64) -> Result<Vec<f64>> {
    if initial.len() != p.n() {
        return Err(Error::DimensionMismatch {
            expected: p.n(),
            got: initial.len(),
        });
    }
    let weights = poisson_weights(t, tol)?;
    let mut current = initial.to_vec();
    let mut next = vec![0.0; p.n()];
    let mut acc: Vec<f64> = current.iter().map(|v| weights[0] * v).collect();
    for &q in &weights[1..] {
        p.left_mul_into(&current, &mut next);
        std::mem::swap(&mut current, &mut next);
        for (a, v) in acc.iter_mut().zip(&current) {
            *a += q * v;
        }
    }
    Ok(acc)
}

/// Row `o` of the heat kernel at time `t`. The result is not renormalized:
/// its mass falls short of one by at most `tol`.
pub fn heat_kernel_row(p: &StochasticMatrix, o: usize, t: f64, tol: f64) -> Result<Distribution> {
    if o >= p.n() {
        return Err(Error::InvalidParameter(format!("state {o} out of range")));
    }
    let start = Distribution::point_mass(p.n(), o);
    evolve(p, start.as_slice(), t, tol).map(Distribution::from_vec_unchecked)
}

/// Selected rows of the heat kernel, evaluated in parallel.
pub fn heat_kernel_rows(
    p: &StochasticMatrix,
    starts: &[usize],
    t: f64,
    tol: f64,
) -> Result<Vec<Vec<f64>>> {
    check_tol(tol)?;
    starts
        .par_iter()
        .map(|&o| heat_kernel_row(p, o, t, tol).map(Distribution::into_vec))
        .collect()
}

/// Full heat kernel, one [`Distribution`] per starting state.
pub fn heat_kernel(p: &StochasticMatrix, t: f64, tol: f64) -> Result<Vec<Distribution>> {
    let starts: Vec<usize> = (0..p.n()).collect();
    Ok(heat_kernel_rows(p, &starts, t, tol)?
        .into_iter()
        .map(Distribution::from_vec_unchecked)
        .collect())
}

/// `(P_t f)(x) = sum_y P_t(x,y) f(y)` for a precomputed kernel.
pub fn kernel_apply(kernel: &[Distribution], f: &[f64]) -> Vec<f64> {
    kernel
        .iter()
        .map(|row| row.as_slice().iter().zip(f).map(|(a, b)| a * b).sum())
        .collect()
}
