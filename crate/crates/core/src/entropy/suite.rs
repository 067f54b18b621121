use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution as _, StandardNormal};

use super::verdicts::local_concentration_with_kernel;
use super::{
    cutoff_window_bound, diameter_bound_check, entropic_lower_bound_check, entropic_upper_bound,
    log_gradient_bound_check, mixing_time, varentropy_bound_check, DEFAULT_TOL_T, EPS_GRID,
};
use crate::chain::{Chain, DEFAULT_TOL};
use crate::curvature::{chain_curvature, CurvatureReport};
use crate::error::{Error, Result};
use crate::verdict::{InequalityVerdict, VERDICT_TOL};

#[derive(Debug, Clone)]
pub struct SuiteOptions {
    pub eps: Vec<f64>,
    /// Times for the time-indexed checks; `None` picks [`auto_time_grid`].
    pub t_grid: Option<Vec<f64>>,
    /// Random observables per time in the local concentration check.
    pub draws: usize,
    pub seed: u64,
    /// Reuse a curvature report instead of recomputing it.
    pub curvature: Option<CurvatureReport>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            eps: EPS_GRID.to_vec(),
            t_grid: None,
            draws: 100,
            seed: 0,
            curvature: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub curvature: CurvatureReport,
    pub verdicts: Vec<InequalityVerdict>,
}

impl SuiteReport {
    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &InequalityVerdict> {
        self.verdicts.iter().filter(|v| !v.pass)
    }
}

/// `t_mix(1/4)` scaled by `{0, 1/8, 1/4, 1/2, 1, 3/2, 2}`.
pub fn auto_time_grid(chain: &Chain) -> Result<Vec<f64>> {
    let t = mixing_time(chain, 0.25, DEFAULT_TOL_T)?;
    Ok([0.0, 0.125, 0.25, 0.5, 1.0, 1.5, 2.0].iter().map(|s| s * t).collect())
}

/// The binding verdict: the smallest slack among non-vacuous ones, or a
/// vacuous one when nothing was checked.
fn binding(verdicts: Vec<InequalityVerdict>) -> Option<InequalityVerdict> {
    let (checked, vacuous): (Vec<_>, Vec<_>) = verdicts.into_iter().partition(|v| !v.vacuous);
    let pick = |v: Vec<InequalityVerdict>| v.into_iter().min_by(|a, b| a.slack.total_cmp(&b.slack));
    pick(checked).or_else(|| pick(vacuous))
}

fn push_sorted(times: &mut Vec<f64>, t: f64) {
    if !times.contains(&t) {
        times.push(t);
        times.sort_by(f64::total_cmp);
    }
}

/// Runs every entropic inequality on one chain: the upper and lower entropic
/// bounds, the window bound, local concentration, the logarithmic gradient
/// estimate, the diameter bound and both varentropy forms.
pub fn verify_suite(chain: &Chain, options: &SuiteOptions) -> Result<SuiteReport> {
    let curvature = match &options.curvature {
        Some(c) => c.clone(),
        None => chain_curvature(chain)?,
    };
    let grid = match &options.t_grid {
        Some(g) => g.clone(),
        None => auto_time_grid(chain)?,
    };
    let pi = chain.pi().as_slice();
    let mut verdicts = Vec::new();

    for &eps in &options.eps {
        for &t in &grid {
            verdicts.push(entropic_upper_bound(chain, t, eps)?);
        }
        let mut times = grid.clone();
        push_sorted(&mut times, mixing_time(chain, 1.0 - eps, DEFAULT_TOL_T)?);
        for &t in &times {
            let rows = chain.start_rows(t, DEFAULT_TOL)?;
            let checks = rows
                .iter()
                .zip(chain.starts())
                .map(|(row, o)| Ok(entropic_lower_bound_check(row, pi, eps)?.with("t", t).with("o", o as f64)))
                .collect::<Result<Vec<_>>>()?;
            verdicts.extend(binding(checks));
        }
        if eps < 0.5 {
            verdicts.push(cutoff_window_bound(chain, eps)?);
        }
        verdicts.push(diameter_bound_check(chain, eps)?);
        match varentropy_bound_check(chain, eps, &curvature) {
            Ok(pair) => verdicts.extend(pair),
            // Outside the curvature hypothesis both forms hold vacuously.
            Err(Error::CurvatureHypothesisFailed { .. }) => {
                for name in ["varentropy 18", "varentropy composition"] {
                    verdicts.push(
                        InequalityVerdict::vacuous(name, f64::NAN, f64::NAN, VERDICT_TOL)
                            .with("eps", eps)
                            .with("kappa", curvature.kappa()),
                    );
                }
            }
            Err(e) => return Err(e),
        }
    }

    let kappa = curvature.kappa();
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let metric = chain.metric()?;
    let mut conc_times = grid.clone();
    push_sorted(&mut conc_times, 1.0);
    push_sorted(&mut conc_times, mixing_time(chain, 0.25, DEFAULT_TOL_T)?);
    for &t in &conc_times {
        let kernel = chain.heat_kernel(t, DEFAULT_TOL)?;
        let mut checks = Vec::with_capacity(options.draws + 1);
        let dist: Vec<f64> = metric.row(0).iter().map(|&d| d as f64).collect();
        checks.push(local_concentration_with_kernel(chain.matrix(), &kernel, &dist, t, kappa));
        for _ in 0..options.draws {
            let f: Vec<f64> = (0..chain.n()).map(|_| StandardNormal.sample(&mut rng)).collect();
            checks.push(local_concentration_with_kernel(chain.matrix(), &kernel, &f, t, kappa));
        }
        verdicts.extend(binding(checks));
    }

    let floor = metric.diameter as f64 / 4.0;
    let mut lip_times: Vec<f64> = grid.iter().copied().filter(|&t| t >= floor).collect();
    push_sorted(&mut lip_times, floor);
    for &t in &lip_times {
        verdicts.push(log_gradient_bound_check(chain, t)?);
    }

    Ok(SuiteReport { curvature, verdicts })
}
