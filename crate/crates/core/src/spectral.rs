//! Adjoint, additive reversibilization, relaxation time and the Poincaré
//! inequality.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, StandardNormal};

use crate::chain::{Distribution, StochasticMatrix};
use crate::error::{Error, Result};

/// Number of random observables in the Poincaré certificate.
pub const POINCARE_DRAWS: usize = 50;
pub const POINCARE_SEED: u64 = 0x5eed_0001;
pub const POINCARE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralReport {
    pub t_rel: f64,
    pub gap: f64,
    /// Second-largest (not second in modulus) eigenvalue of `(P + P*)/2`.
    pub lambda2: f64,
    /// Spectrum of the reversibilization, in decreasing order.
    pub eigenvalues: Vec<f64>,
    /// Observable `D_pi^{-1/2} u_2` built from the eigenvector of `lambda2`.
    pub slowest_mode: Vec<f64>,
    /// Largest `Var(f) / E[Gamma(f,f)]` over the random draws.
    pub poincare_max_ratio: f64,
    /// Every draw satisfied `Var(f) <= t_rel E[Gamma(f,f)] + 1e-9`.
    pub poincare_ok: bool,
}

fn check_len(p: &StochasticMatrix, v: &[f64]) -> Result<()> {
    if v.len() == p.n() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: p.n(),
            got: v.len(),
        })
    }
}

/// `P*(x,y) = pi(y) P(y,x) / pi(x)`. Rows are rescaled to absorb the
/// residual of an approximate `pi`.
pub fn adjoint(p: &StochasticMatrix, pi: &Distribution) -> Result<StochasticMatrix> {
    check_len(p, pi.as_slice())?;
    if let Some(x) = pi.as_slice().iter().position(|&v| v <= 0.0) {
        return Err(Error::UnsupportedState(x));
    }
    let n = p.n();
    let mut entries = vec![0.0; n * n];
    for x in 0..n {
        let row = &mut entries[x * n..(x + 1) * n];
        for (y, r) in row.iter_mut().enumerate() {
            *r = pi[y] * p.get(y, x) / pi[x];
        }
        let total: f64 = row.iter().sum();
        row.iter_mut().for_each(|r| *r /= total);
    }
    StochasticMatrix::new(n, entries)
}

/// `(P + P*) / 2`, reversible with respect to `pi`.
pub fn reversibilization(p: &StochasticMatrix, pi: &Distribution) -> Result<StochasticMatrix> {
    let star = adjoint(p, pi)?;
    let entries = p
        .entries()
        .iter()
        .zip(star.entries())
        .map(|(a, b)| 0.5 * (a + b))
        .collect();
    StochasticMatrix::new(p.n(), entries)
}

/// Largest violation of detailed balance `|pi(x)K(x,y) - pi(y)K(y,x)|`.
pub fn detailed_balance_defect(k: &StochasticMatrix, pi: &Distribution) -> f64 {
    let n = k.n();
    let mut worst = 0.0f64;
    for x in 0..n {
        for y in x + 1..n {
            worst = worst.max((pi[x] * k.get(x, y) - pi[y] * k.get(y, x)).abs());
        }
    }
    worst
}

/// Carré du champ `Gamma(f,g)(x) = 1/2 sum_y P(x,y)(f(y)-f(x))(g(y)-g(x))`.
pub fn gamma_form(p: &StochasticMatrix, f: &[f64], g: &[f64]) -> Result<Vec<f64>> {
    check_len(p, f)?;
    check_len(p, g)?;
    Ok((0..p.n())
        .map(|x| {
            0.5 * p
                .support_row(x)
                .iter()
                .map(|&(y, w)| w * (f[y] - f[x]) * (g[y] - g[x]))
                .sum::<f64>()
        })
        .collect())
}

pub fn expectation(pi: &Distribution, f: &[f64]) -> f64 {
    pi.as_slice().iter().zip(f).map(|(a, b)| a * b).sum()
}

pub fn variance(pi: &Distribution, f: &[f64]) -> f64 {
    let mean = expectation(pi, f);
    pi.as_slice()
        .iter()
        .zip(f)
        .map(|(w, v)| w * (v - mean) * (v - mean))
        .sum()
}

/// `E_pi[Gamma(f,f)]`.
pub fn dirichlet_energy(p: &StochasticMatrix, pi: &Distribution, f: &[f64]) -> Result<f64> {
    Ok(expectation(pi, &gamma_form(p, f, f)?))
}

/// Spectral gap of the additive reversibilization via a dense symmetric
/// eigendecomposition of `D^{1/2} K D^{-1/2}`, plus a randomized Poincaré
/// certificate.
pub fn relaxation_time(p: &StochasticMatrix, pi: &Distribution) -> Result<SpectralReport> {
    if !p.is_irreducible() {
        return Err(Error::NotIrreducible);
    }
    let n = p.n();
    let k = reversibilization(p, pi)?;
    let sqrt_pi: Vec<f64> = pi.as_slice().iter().map(|v| v.sqrt()).collect();
    let s = DMatrix::<f64>::from_fn(n, n, |x, y| {
        let a = sqrt_pi[x] * k.get(x, y) / sqrt_pi[y];
        let b = sqrt_pi[y] * k.get(y, x) / sqrt_pi[x];
        0.5 * (a + b)
    });
    let eig = SymmetricEigen::new(s);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let lambda2 = eigenvalues[1];
    let gap = 1.0 - lambda2;
    if gap <= 0.0 {
        return Err(Error::Numerical(format!("non-positive spectral gap {gap}")));
    }
    let t_rel = 1.0 / gap;
    let u2 = eig.eigenvectors.column(order[1]);
    let slowest_mode: Vec<f64> = (0..n).map(|x| u2[x] / sqrt_pi[x]).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(POINCARE_SEED);
    let mut poincare_max_ratio = 0.0f64;
    let mut poincare_ok = true;
    for _ in 0..POINCARE_DRAWS {
        let f: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let var = variance(pi, &f);
        let energy = dirichlet_energy(p, pi, &f)?;
        if energy > 0.0 {
            poincare_max_ratio = poincare_max_ratio.max(var / energy);
        }
        poincare_ok &= var <= t_rel * energy + POINCARE_TOL;
    }
    Ok(SpectralReport {
        t_rel,
        gap,
        lambda2,
        eigenvalues,
        slowest_mode,
        poincare_max_ratio,
        poincare_ok,
    })
}
