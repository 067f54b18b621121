//! Total variation, relative entropy and varentropy along the heat flow,
//! mixing times, and the entropic cutoff inequalities.

mod suite;
mod verdicts;

use rayon::prelude::*;

pub use suite::{auto_time_grid, verify_suite, SuiteOptions, SuiteReport};
pub use verdicts::{
    cutoff_window_bound, diameter_bound_check, entropic_concentration_ratio,
    entropic_lower_bound_check, entropic_upper_bound, local_concentration_check,
    local_concentration_rhs, log_gradient_bound_check, varentropy_bound_check,
};

use crate::chain::{heat_kernel_rows, Chain, DEFAULT_TOL};
use crate::error::{Error, Result};

/// Default report grid of `eps` values.
pub const EPS_GRID: [f64; 7] = [0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95];
/// Default absolute accuracy of mixing-time and crossing bisections.
pub const DEFAULT_TOL_T: f64 = 1e-6;
/// Kernel entries below this are treated as underflow when taking logs.
pub const UNDERFLOW_FLOOR: f64 = 1e-300;
/// Doubling gives up past this time.
const MAX_TIME: f64 = 1e9;

fn same_len(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() == b.len() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        })
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("eps = {eps} is not in (0,1)")))
    }
}

/// `1/2 sum |mu - nu|`.
pub fn tv_distance(mu: &[f64], nu: &[f64]) -> Result<f64> {
    same_len(mu, nu)?;
    Ok(0.5 * mu.iter().zip(nu).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// `d_KL(mu || pi)` and `V_KL(mu || pi)` in one pass over the support of `mu`.
pub fn kl_and_varentropy(mu: &[f64], pi: &[f64]) -> Result<(f64, f64)> {
    same_len(pi, mu)?;
    let mut terms = Vec::with_capacity(mu.len());
    for (x, (&m, &p)) in mu.iter().zip(pi).enumerate() {
        if m > 0.0 {
            if p <= 0.0 {
                return Err(Error::UnsupportedState(x));
            }
            terms.push((m, (m / p).ln()));
        }
    }
    let d: f64 = terms.iter().map(|(m, l)| m * l).sum();
    let v: f64 = terms.iter().map(|(m, l)| m * (l - d) * (l - d)).sum();
    Ok((d.max(0.0), v))
}

pub fn kl_divergence(mu: &[f64], pi: &[f64]) -> Result<f64> {
    kl_and_varentropy(mu, pi).map(|r| r.0)
}

pub fn varentropy(mu: &[f64], pi: &[f64]) -> Result<f64> {
    kl_and_varentropy(mu, pi).map(|r| r.1)
}

/// Worst-case TV distance to equilibrium over the chain's start set.
pub fn worst_tv(chain: &Chain, t: f64, tol: f64) -> Result<f64> {
    let pi = chain.pi().as_slice();
    chain
        .start_rows(t, tol)?
        .iter()
        .map(|row| tv_distance(row, pi))
        .try_fold(0.0f64, |acc, v| v.map(|v| acc.max(v)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixingProfile {
    pub times: Vec<f64>,
    pub worst_tv: Vec<f64>,
    /// `per_start_tv[i][k]`: TV at `times[i]` from the `k`-th start.
    pub per_start_tv: Option<Vec<Vec<f64>>>,
}

pub fn mixing_profile(chain: &Chain, times: &[f64], tol: f64, keep_table: bool) -> Result<MixingProfile> {
    let mut times = times.to_vec();
    times.sort_by(f64::total_cmp);
    let pi = chain.pi().as_slice();
    let table: Vec<Vec<f64>> = times
        .iter()
        .map(|&t| {
            chain
                .start_rows(t, tol)?
                .iter()
                .map(|row| tv_distance(row, pi))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let worst_tv = table.iter().map(|r| r.iter().copied().fold(0.0, f64::max)).collect();
    Ok(MixingProfile {
        times,
        worst_tv,
        per_start_tv: keep_table.then_some(table),
    })
}

/// Finds the first `t` where `above(t)` turns false, assuming it stays
/// false afterwards. Returns the right end of a bracket of width `tol_t`.
fn first_crossing(mut above: impl FnMut(f64) -> Result<bool>, tol_t: f64) -> Result<f64> {
    if !above(0.0)? {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while above(hi)? {
        lo = hi;
        hi *= 2.0;
        if hi > MAX_TIME {
            return Err(Error::Numerical(format!("no crossing before t = {MAX_TIME}")));
        }
    }
    while hi - lo > tol_t {
        let mid = 0.5 * (lo + hi);
        if above(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// `t_mix(eps)`: the first time the worst-case TV is at most `eps`, to
/// within `tol_t` from above.
pub fn mixing_time(chain: &Chain, eps: f64, tol_t: f64) -> Result<f64> {
    check_eps(eps)?;
    if !(tol_t > 0.0) {
        return Err(Error::InvalidParameter(format!("tol_t = {tol_t}")));
    }
    first_crossing(|t| Ok(worst_tv(chain, t, DEFAULT_TOL)? > eps), tol_t)
}

/// Worst-case relative entropy and varentropy at one time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyPoint {
    pub t: f64,
    pub d_star: f64,
    pub v_star: f64,
}

pub fn entropy_at(chain: &Chain, t: f64, tol: f64) -> Result<EntropyPoint> {
    let pi = chain.pi().as_slice();
    let (mut d_star, mut v_star) = (0.0f64, 0.0f64);
    for row in chain.start_rows(t, tol)? {
        let (d, v) = kl_and_varentropy(&row, pi)?;
        d_star = d_star.max(d);
        v_star = v_star.max(v);
    }
    Ok(EntropyPoint { t, d_star, v_star })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntropyProfile {
    pub times: Vec<f64>,
    pub d_star: Vec<f64>,
    pub v_star: Vec<f64>,
}

pub fn entropy_profile(chain: &Chain, times: &[f64], tol: f64) -> Result<EntropyProfile> {
    let mut times = times.to_vec();
    times.sort_by(f64::total_cmp);
    let points = times
        .iter()
        .map(|&t| entropy_at(chain, t, tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(EntropyProfile {
        times,
        d_star: points.iter().map(|p| p.d_star).collect(),
        v_star: points.iter().map(|p| p.v_star).collect(),
    })
}

/// Heat-kernel rows accurate to relative precision `1e-12` in every entry,
/// for taking logarithms. Truncation only removes mass, so a computed
/// minimum is a lower bound for the true one.
pub fn positive_rows(chain: &Chain, starts: &[usize], t: f64) -> Result<Vec<Vec<f64>>> {
    let p = chain.matrix();
    let mut tol = DEFAULT_TOL;
    loop {
        let rows = heat_kernel_rows(p, starts, t, tol)?;
        let (state, min) = rows
            .iter()
            .flat_map(|r| r.iter().copied().enumerate())
            .fold((0, f64::INFINITY), |acc, (x, v)| if v < acc.1 { (x, v) } else { acc });
        if min >= UNDERFLOW_FLOOR && tol <= 1e-12 * min {
            return Ok(rows);
        }
        let next = if min > 0.0 { 1e-12 * min } else { tol * 1e-40 };
        if min < UNDERFLOW_FLOOR && next < UNDERFLOW_FLOOR * 1e-12 {
            return Err(Error::UnderflowRisk { state, value: min });
        }
        tol = next;
    }
}

/// `max_{x ~ y} |log(P_t(o,x)/pi(x)) - log(P_t(o,y)/pi(y))|`.
pub fn log_density_lip_norm(chain: &Chain, o: usize, t: f64) -> Result<f64> {
    if o >= chain.n() {
        return Err(Error::UnsupportedState(o));
    }
    let p = chain.matrix();
    if !p.has_symmetric_support() {
        return Err(Error::AsymmetricSupport);
    }
    let row = positive_rows(chain, &[o], t)?.remove(0);
    let g = log_density(&row, chain.pi().as_slice());
    Ok(crate::curvature::lipschitz_norm(p, &g))
}

pub(crate) fn log_density(row: &[f64], pi: &[f64]) -> Vec<f64> {
    row.iter().zip(pi).map(|(a, b)| (a / b).ln()).collect()
}

/// Largest log-density Lipschitz norm over the start set.
pub fn max_log_density_lip_norm(chain: &Chain, t: f64) -> Result<f64> {
    let p = chain.matrix();
    if !p.has_symmetric_support() {
        return Err(Error::AsymmetricSupport);
    }
    let pi = chain.pi().as_slice();
    let rows = positive_rows(chain, &chain.starts(), t)?;
    Ok(rows
        .par_iter()
        .map(|row| crate::curvature::lipschitz_norm(p, &log_density(row, pi)))
        .reduce(|| 0.0, f64::max))
}

/// Solves `d*(t) = c (1 + sqrt(V*(t)))` for the first crossing.
pub fn cutoff_time_equation(chain: &Chain, c: f64) -> Result<f64> {
    if !(c > 0.0) {
        return Err(Error::InvalidParameter(format!("prefactor c = {c}")));
    }
    let gap = |t: f64| -> Result<f64> {
        let e = entropy_at(chain, t, DEFAULT_TOL)?;
        Ok(e.d_star - c * (1.0 + e.v_star.sqrt()))
    };
    if gap(0.0)? < 0.0 {
        return Err(Error::NoCrossing);
    }
    first_crossing(|t| Ok(gap(t)? >= 0.0), DEFAULT_TOL_T)
}
