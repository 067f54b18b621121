//! Ollivier-Ricci and Bakry-Émery curvature, and their semigroup-level
//! consequences as checkable inequalities.

mod bakry_emery;
mod ollivier;
mod transport;

use std::collections::BTreeMap;

use rand::SeedableRng;
use rayon::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, StandardNormal};

pub use bakry_emery::{
    bakry_emery_curvature, bakry_emery_vertex, local_forms, BakryEmeryCurvature, LocalForms,
    VertexCurvature,
};
pub use ollivier::{ollivier_curvature, ollivier_with_metric, OllivierCurvature};
pub use transport::{transport_cost, wasserstein1, DualityCertificate, TransportPlan};

use crate::chain::{kernel_apply, metric_data, Chain, MetricData, StochasticMatrix, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::spectral::gamma_form;
use crate::verdict::{worst_of, InequalityVerdict, VERDICT_TOL};

/// Random observables per time in the semigroup checks.
pub const CHECK_DRAWS: usize = 100;
/// Above this size the `W1` form of the contraction check samples edges.
pub const W1_ALL_EDGES_MAX_N: usize = 64;
const W1_SAMPLED_EDGES: usize = 32;

/// Both curvatures of a chain with symmetric support.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureReport {
    /// One-step Ollivier curvature per edge `(x, y)`, `x < y`.
    pub ollivier_edges: BTreeMap<(usize, usize), f64>,
    pub ollivier_min: f64,
    /// Bakry-Émery curvature per state.
    pub bakry_emery_vertices: Vec<f64>,
    pub bakry_emery_min: f64,
}

impl CurvatureReport {
    /// The better of the two global constants.
    pub fn kappa(&self) -> f64 {
        self.ollivier_min.max(self.bakry_emery_min)
    }

    pub fn is_nonnegative(&self, tol: f64) -> bool {
        self.ollivier_min >= -tol || self.bakry_emery_min >= -tol
    }
}

pub fn curvature_report(p: &StochasticMatrix) -> Result<CurvatureReport> {
    let o = ollivier_curvature(p)?;
    let be = bakry_emery_curvature(p)?;
    Ok(CurvatureReport {
        ollivier_edges: o.edges,
        ollivier_min: o.min,
        bakry_emery_vertices: be.vertices,
        bakry_emery_min: be.min,
    })
}

/// Curvature read off at state 0 only: Bakry-Émery at 0 and Ollivier on the
/// edges at 0. Every edge of a vertex-transitive chain is the image of an
/// edge at 0, so both minima are global; the per-state vector repeats the
/// value at 0.
pub fn curvature_report_transitive(p: &StochasticMatrix) -> Result<CurvatureReport> {
    if !p.has_symmetric_support() {
        return Err(Error::AsymmetricSupport);
    }
    if !p.is_irreducible() {
        return Err(Error::NotIrreducible);
    }
    let metric = metric_data(p)?;
    let ollivier_edges = p
        .support_row(0)
        .par_iter()
        .filter(|&&(y, _)| y != 0)
        .map(|&(y, _)| Ok(((0, y), 1.0 - transport_cost(p.support_row(0), p.support_row(y), &metric)?)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    let ollivier_min = ollivier_edges.values().copied().fold(f64::INFINITY, f64::min);
    let kappa0 = bakry_emery_vertex(p, 0)?.kappa;
    Ok(CurvatureReport {
        ollivier_edges,
        ollivier_min,
        bakry_emery_vertices: vec![kappa0; p.n()],
        bakry_emery_min: kappa0,
    })
}

/// [`curvature_report_transitive`] when the chain is flagged vertex-transitive,
/// the full computation otherwise.
pub fn chain_curvature(chain: &Chain) -> Result<CurvatureReport> {
    if chain.is_transitive() {
        curvature_report_transitive(chain.matrix())
    } else {
        curvature_report(chain.matrix())
    }
}

/// `(Lf)(x) = sum_y P(x,y) (f(y) - f(x))`.
pub fn generator_apply(p: &StochasticMatrix, f: &[f64]) -> Result<Vec<f64>> {
    if f.len() != p.n() {
        return Err(Error::DimensionMismatch {
            expected: p.n(),
            got: f.len(),
        });
    }
    Ok((0..p.n())
        .map(|x| {
            p.support_row(x)
                .iter()
                .map(|&(y, w)| w * (f[y] - f[x]))
                .sum()
        })
        .collect())
}

/// `Gamma2(f,f) = 1/2 L Gamma(f,f) - Gamma(f, Lf)`.
pub fn gamma2_form(p: &StochasticMatrix, f: &[f64]) -> Result<Vec<f64>> {
    let g = gamma_form(p, f, f)?;
    let lf = generator_apply(p, f)?;
    let lg = generator_apply(p, &g)?;
    let cross = gamma_form(p, f, &lf)?;
    Ok(lg.iter().zip(cross).map(|(a, c)| 0.5 * a - c).collect())
}

/// `max |f(x) - f(y)|` over edges, the Lipschitz norm for the graph metric.
pub fn lipschitz_norm(p: &StochasticMatrix, f: &[f64]) -> f64 {
    p.edges()
        .into_iter()
        .map(|(x, y)| (f[x] - f[y]).abs())
        .fold(0.0, f64::max)
}

fn random_observable(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(&mut *rng)).collect()
}

fn sampled_edges(p: &StochasticMatrix) -> Vec<(usize, usize)> {
    let edges = p.edges();
    if p.n() <= W1_ALL_EDGES_MAX_N || edges.len() <= W1_SAMPLED_EDGES {
        return edges;
    }
    let stride = edges.len() / W1_SAMPLED_EDGES;
    edges.into_iter().step_by(stride).take(W1_SAMPLED_EDGES).collect()
}

/// `||P_t f||_Lip <= e^{-kappa t} ||f||_Lip` on random observables, and
/// `W1(P_t(x,.), P_t(y,.)) <= e^{-kappa t}` on adjacent pairs.
pub fn contraction_check(chain: &Chain, kappa: f64, t_grid: &[f64], seed: u64) -> Result<InequalityVerdict> {
    let p = chain.matrix();
    let metric = chain.metric()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = sampled_edges(p);
    let mut verdicts = Vec::new();
    for &t in t_grid {
        let kernel = chain.heat_kernel(t, DEFAULT_TOL)?;
        let bound = (-kappa * t).exp();
        for _ in 0..CHECK_DRAWS {
            let mut f = random_observable(&mut rng, p.n());
            let lip = lipschitz_norm(p, &f);
            if lip == 0.0 {
                continue;
            }
            f.iter_mut().for_each(|v| *v /= lip);
            let pf = kernel_apply(&kernel, &f);
            verdicts.push(
                InequalityVerdict::check("lipschitz contraction", lipschitz_norm(p, &pf), bound, VERDICT_TOL)
                    .with("t", t)
                    .with("kappa", kappa),
            );
        }
        for &(x, y) in &edges {
            let w = wasserstein1(kernel[x].as_slice(), kernel[y].as_slice(), metric)?;
            verdicts.push(
                InequalityVerdict::check("w1 contraction", w.value, bound, VERDICT_TOL)
                    .with("t", t)
                    .with("kappa", kappa)
                    .with("x", x as f64)
                    .with("y", y as f64),
            );
        }
    }
    Ok(worst_of(verdicts).unwrap_or_else(|| InequalityVerdict::check("contraction", 0.0, 0.0, VERDICT_TOL)))
}

/// `Gamma(P_t f, P_t f) <= e^{-2 kappa t} P_t Gamma(f,f)` pointwise on random
/// observables.
pub fn subcommutativity_check(chain: &Chain, kappa: f64, t_grid: &[f64], seed: u64) -> Result<InequalityVerdict> {
    let p = chain.matrix();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut verdicts = Vec::new();
    for &t in t_grid {
        let kernel = chain.heat_kernel(t, DEFAULT_TOL)?;
        let factor = (-2.0 * kappa * t).exp();
        for _ in 0..CHECK_DRAWS {
            let f = random_observable(&mut rng, p.n());
            let pf = kernel_apply(&kernel, &f);
            let lhs = gamma_form(p, &pf, &pf)?;
            let rhs = kernel_apply(&kernel, &gamma_form(p, &f, &f)?);
            let (x, worst) = lhs
                .iter()
                .zip(&rhs)
                .map(|(l, r)| (l, factor * r))
                .enumerate()
                .min_by(|a, b| (a.1 .1 - a.1 .0).total_cmp(&(b.1 .1 - b.1 .0)))
                .expect("n >= 2");
            verdicts.push(
                InequalityVerdict::check("sub-commutativity", *worst.0, worst.1, VERDICT_TOL)
                    .with("t", t)
                    .with("kappa", kappa)
                    .with("x", x as f64),
            );
        }
    }
    Ok(worst_of(verdicts).unwrap_or_else(|| InequalityVerdict::check("sub-commutativity", 0.0, 0.0, VERDICT_TOL)))
}

/// `W1(P(x,.), P(y,.)) <= (1 - kappa) dist(x,y)` for every pair of states.
pub fn one_step_all_pairs(p: &StochasticMatrix, kappa: f64) -> Result<InequalityVerdict> {
    let metric: MetricData = metric_data(p)?;
    let mut verdicts = Vec::new();
    for x in 0..p.n() {
        for y in x + 1..p.n() {
            let w = transport_cost(p.support_row(x), p.support_row(y), &metric)?;
            let d = metric.dist(x, y) as f64;
            verdicts.push(
                InequalityVerdict::check("one-step transport", w, (1.0 - kappa) * d, 1e-9)
                    .with("x", x as f64)
                    .with("y", y as f64),
            );
        }
    }
    Ok(worst_of(verdicts).expect("n >= 2"))
}
