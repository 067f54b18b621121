use super::{
    check_eps, entropy_at, kl_and_varentropy, max_log_density_lip_norm, mixing_time, tv_distance,
    DEFAULT_TOL_T,
};
use crate::chain::{kernel_apply, Chain, DEFAULT_TOL};
use crate::curvature::{lipschitz_norm, CurvatureReport};
use crate::error::{Error, Result};
use crate::verdict::{InequalityVerdict, VERDICT_TOL};

/// `t_mix(eps) <= t + (t_rel / eps)(1 + d*(t))`.
pub fn entropic_upper_bound(chain: &Chain, t: f64, eps: f64) -> Result<InequalityVerdict> {
    check_eps(eps)?;
    let t_mix = mixing_time(chain, eps, DEFAULT_TOL_T)?;
    let t_rel = chain.t_rel()?;
    let d_star = entropy_at(chain, t, DEFAULT_TOL)?.d_star;
    let rhs = t + t_rel / eps * (1.0 + d_star);
    Ok(InequalityVerdict::check("entropic upper bound", t_mix, rhs, VERDICT_TOL)
        .with("eps", eps)
        .with("t", t))
}

/// If `||mu - pi||_TV <= 1 - eps` then `d_KL <= (1 + sqrt(V_KL)) / eps`.
pub fn entropic_lower_bound_check(mu: &[f64], pi: &[f64], eps: f64) -> Result<InequalityVerdict> {
    check_eps(eps)?;
    let tv = tv_distance(mu, pi)?;
    let (d, v) = kl_and_varentropy(mu, pi)?;
    let rhs = (1.0 + v.sqrt()) / eps;
    let verdict = if tv <= 1.0 - eps {
        InequalityVerdict::check("entropic lower bound", d, rhs, VERDICT_TOL)
    } else {
        InequalityVerdict::vacuous("entropic lower bound", d, rhs, VERDICT_TOL)
    };
    Ok(verdict.with("eps", eps).with("tv", tv))
}

/// `t_mix(eps) - t_mix(1-eps) <= (2 t_rel / eps^2)(1 + sqrt(V*(t_mix(1-eps))))`
/// for `eps < 1/2`.
pub fn cutoff_window_bound(chain: &Chain, eps: f64) -> Result<InequalityVerdict> {
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::InvalidParameter(format!("eps = {eps} is not in (0,1/2)")));
    }
    let early = mixing_time(chain, eps, DEFAULT_TOL_T)?;
    let late = mixing_time(chain, 1.0 - eps, DEFAULT_TOL_T)?;
    let v_star = entropy_at(chain, late, DEFAULT_TOL)?.v_star;
    let rhs = 2.0 * chain.t_rel()? / (eps * eps) * (1.0 + v_star.sqrt());
    Ok(InequalityVerdict::check("cutoff window", early - late, rhs, VERDICT_TOL)
        .with("eps", eps)
        .with("t_mix_eps", early)
        .with("t_mix_1-eps", late))
}

/// `(1 + sqrt(V*(t_mix(eps)))) t_rel / t_mix(eps)`.
pub fn entropic_concentration_ratio(chain: &Chain, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    let t_mix = mixing_time(chain, eps, DEFAULT_TOL_T)?;
    if t_mix == 0.0 {
        return Ok(f64::INFINITY);
    }
    let v_star = entropy_at(chain, t_mix, DEFAULT_TOL)?.v_star;
    Ok((1.0 + v_star.sqrt()) * chain.t_rel()? / t_mix)
}

/// `(1 - e^{-2 t kappa}) / kappa`, equal to `2t` at `kappa = 0`.
pub fn local_concentration_rhs(t: f64, kappa: f64) -> f64 {
    if kappa.abs() * t < 1e-12 {
        2.0 * t
    } else {
        -(-2.0 * t * kappa).exp_m1() / kappa
    }
}

/// `P_t(f^2) - (P_t f)^2 <= ((1 - e^{-2 t kappa}) / kappa) ||f||_Lip^2` at
/// every state.
pub fn local_concentration_check(chain: &Chain, f: &[f64], t: f64, kappa: f64) -> Result<InequalityVerdict> {
    if f.len() != chain.n() {
        return Err(Error::DimensionMismatch {
            expected: chain.n(),
            got: f.len(),
        });
    }
    let p = chain.matrix();
    if !p.has_symmetric_support() {
        return Err(Error::AsymmetricSupport);
    }
    let kernel = chain.heat_kernel(t, DEFAULT_TOL)?;
    Ok(local_concentration_with_kernel(p, &kernel, f, t, kappa))
}

pub(crate) fn local_concentration_with_kernel(
    p: &crate::chain::StochasticMatrix,
    kernel: &[crate::chain::Distribution],
    f: &[f64],
    t: f64,
    kappa: f64,
) -> InequalityVerdict {
    let lip = lipschitz_norm(p, f);
    let rhs = local_concentration_rhs(t, kappa) * lip * lip;
    let f2: Vec<f64> = f.iter().map(|v| v * v).collect();
    let mean = kernel_apply(kernel, f);
    let second = kernel_apply(kernel, &f2);
    let (x, var) = second
        .iter()
        .zip(&mean)
        .map(|(s, m)| s - m * m)
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (x, v)| if v > acc.1 { (x, v) } else { acc });
    InequalityVerdict::check("local concentration", var, rhs, VERDICT_TOL)
        .with("t", t)
        .with("kappa", kappa)
        .with("x", x as f64)
}

/// `max_o ||log(P_t(o,.)/pi)||_Lip <= 3(1 + log Delta)` for `t >= diam/4`.
pub fn log_gradient_bound_check(chain: &Chain, t: f64) -> Result<InequalityVerdict> {
    let metric = chain.metric()?;
    let floor = metric.diameter as f64 / 4.0;
    if t < floor {
        return Err(Error::HypothesisViolation(format!(
            "t = {t} is below diam/4 = {floor}"
        )));
    }
    let lhs = max_log_density_lip_norm(chain, t)?;
    let rhs = 3.0 * (1.0 + metric.delta.ln());
    Ok(InequalityVerdict::check("log gradient", lhs, rhs, VERDICT_TOL).with("t", t))
}

/// `V*(t_mix) <= 18 t_mix (1 + log Delta)^2` and
/// `V*(t_mix) <= 2 t_mix max_o ||log(P_t(o,.)/pi)||_Lip^2`.
///
/// The first form is recorded as vacuous when `t_mix < diam/4`, outside the
/// range of the gradient estimate it rests on.
pub fn varentropy_bound_check(
    chain: &Chain,
    eps: f64,
    curvature: &CurvatureReport,
) -> Result<[InequalityVerdict; 2]> {
    check_eps(eps)?;
    if !curvature.is_nonnegative(1e-8) {
        return Err(Error::CurvatureHypothesisFailed {
            ollivier: curvature.ollivier_min,
            bakry_emery: curvature.bakry_emery_min,
        });
    }
    let metric = chain.metric()?;
    let t_mix = mixing_time(chain, eps, DEFAULT_TOL_T)?;
    let v_star = entropy_at(chain, t_mix, DEFAULT_TOL)?.v_star;
    let log_delta = 1.0 + metric.delta.ln();
    let rhs18 = 18.0 * t_mix * log_delta * log_delta;
    let gate = t_mix >= metric.diameter as f64 / 4.0;
    let crude = if gate {
        InequalityVerdict::check("varentropy 18", v_star, rhs18, VERDICT_TOL)
    } else {
        InequalityVerdict::vacuous("varentropy 18", v_star, rhs18, VERDICT_TOL)
    };
    // At t = 0 the rows are point masses: V* = 0 and 2t ||log h||^2 -> 0.
    let rhs = if t_mix == 0.0 {
        0.0
    } else {
        let lip = max_log_density_lip_norm(chain, t_mix)?;
        2.0 * t_mix * lip * lip
    };
    let composed = InequalityVerdict::check("varentropy composition", v_star, rhs, VERDICT_TOL);
    Ok([
        crude.with("eps", eps).with("t", t_mix),
        composed.with("eps", eps).with("t", t_mix),
    ])
}

/// `diam <= 2 t_mix + sqrt(8 t_mix / (1-eps)) + sqrt(8 t_rel / (1-eps))`.
pub fn diameter_bound_check(chain: &Chain, eps: f64) -> Result<InequalityVerdict> {
    check_eps(eps)?;
    let diam = chain.metric()?.diameter as f64;
    let t_mix = mixing_time(chain, eps, DEFAULT_TOL_T)?;
    let t_rel = chain.t_rel()?;
    let rhs = 2.0 * t_mix + (8.0 * t_mix / (1.0 - eps)).sqrt() + (8.0 * t_rel / (1.0 - eps)).sqrt();
    Ok(InequalityVerdict::check("diameter bound", diam, rhs, VERDICT_TOL)
        .with("eps", eps)
        .with("t_mix", t_mix))
}
