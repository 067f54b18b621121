use std::fs;
use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use cutoff_lab::chain::{format_chain, parse_chain};
use cutoff_lab::curvature::{
    chain_curvature, contraction_check, curvature_report, one_step_all_pairs, subcommutativity_check,
    CurvatureReport, W1_ALL_EDGES_MAX_N,
};
use cutoff_lab::entropy::{
    cutoff_window_bound, entropic_concentration_ratio, entropy_at, entropy_profile, mixing_profile, mixing_time,
    verify_suite, SuiteOptions, DEFAULT_TOL_T,
};
use cutoff_lab::families::{expand_range, parse_family, ChainInstance};
use cutoff_lab::{Chain, Error, InequalityVerdict};
use rayon::prelude::*;

use crate::cache::DiskCache;
use crate::config::{ConfigError, RunConfig, Source};
use crate::output::{num, Table};
use crate::plot::{Plot, Series, Style};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// A checked inequality failed.
    VerdictFailure,
}

pub struct Loaded {
    pub label: String,
    pub chain: Chain,
    pub instance: Option<ChainInstance>,
}

fn attach_cache(cfg: &RunConfig, chain: Chain) -> Result<Chain> {
    if !cfg.cache {
        return Ok(chain);
    }
    let cache = DiskCache::new(cfg.out.join("cache")).context("opening the kernel cache")?;
    Ok(chain.with_cache(Arc::new(cache)))
}

pub fn load_spec(spec: &str, state_cap: usize) -> Result<(ChainInstance, Chain)> {
    let inst = parse_family(spec)?.build(state_cap)?;
    let chain = inst.to_chain()?;
    Ok((inst, chain))
}

/// Reads and validates a chain file; invalid matrices never reach a check.
pub fn load_chain_file(path: &Path) -> Result<Chain> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let raw = parse_chain(&text)?;
    let diag = raw.diagnostics();
    if !diag.ok() {
        return Err(Error::InvalidMatrix(diag.problems().join("; ")).into());
    }
    Ok(Chain::new(raw.into_matrix()?)?)
}

pub fn load(cfg: &RunConfig) -> Result<Loaded> {
    match &cfg.source {
        Some(Source::Spec(spec)) => {
            let (inst, chain) = load_spec(spec, cfg.state_cap)?;
            Ok(Loaded {
                label: spec.clone(),
                chain: attach_cache(cfg, chain)?,
                instance: Some(inst),
            })
        }
        Some(Source::ChainFile(path)) => Ok(Loaded {
            label: path.display().to_string(),
            chain: attach_cache(cfg, load_chain_file(path)?)?,
            instance: None,
        }),
        None => bail!(ConfigError("no chain given".into())),
    }
}

fn eps_tag(eps: f64) -> String {
    format!("{eps}")
}

fn write_svg(path: &Path, plot: &Plot) -> Result<()> {
    fs::write(path, plot.to_svg()).with_context(|| format!("writing {}", path.display()))
}

pub fn verdict_table(verdicts: &[InequalityVerdict]) -> Table {
    let mut t = Table::new(["name", "lhs", "rhs", "slack", "pass", "vacuous", "tolerance", "context"]);
    for v in verdicts {
        t.push(vec![
            v.name.clone(),
            num(v.lhs),
            num(v.rhs),
            num(v.slack),
            v.pass.to_string(),
            v.vacuous.to_string(),
            num(v.tolerance),
            v.context_string(),
        ]);
    }
    t
}

/// Curvature when the support is symmetric, else `None`.
fn optional_curvature(chain: &Chain) -> Result<Option<CurvatureReport>> {
    if !chain.matrix().has_symmetric_support() {
        log::warn!("support is not symmetric; curvature and graph metric are undefined");
        return Ok(None);
    }
    Ok(Some(chain_curvature(chain)?))
}

/// Single-chain summary written by `analyze`.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub n: usize,
    pub delta: f64,
    pub diam: f64,
    pub t_rel: f64,
    pub kappa_ollivier: f64,
    pub kappa_bakry_emery: f64,
    /// `(eps, t_mix(eps), d*(t_mix), V*(t_mix))`.
    pub levels: Vec<(f64, f64, f64, f64)>,
}

pub fn analyze_chain(chain: &Chain, eps: &[f64]) -> Result<Analysis> {
    let (delta, diam) = match chain.metric() {
        Ok(m) => (m.delta, m.diameter as f64),
        Err(Error::AsymmetricSupport) => (f64::NAN, f64::NAN),
        Err(e) => return Err(e.into()),
    };
    let curvature = optional_curvature(chain)?;
    let levels = eps
        .iter()
        .map(|&e| {
            let t = mixing_time(chain, e, DEFAULT_TOL_T)?;
            let point = entropy_at(chain, t, cutoff_lab::chain::DEFAULT_TOL)?;
            Ok((e, t, point.d_star, point.v_star))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Analysis {
        n: chain.n(),
        delta,
        diam,
        t_rel: chain.t_rel()?,
        kappa_ollivier: curvature.as_ref().map_or(f64::NAN, |c| c.ollivier_min),
        kappa_bakry_emery: curvature.as_ref().map_or(f64::NAN, |c| c.bakry_emery_min),
        levels,
    })
}

pub fn cmd_analyze(cfg: &RunConfig) -> Result<Outcome> {
    let loaded = load(cfg)?;
    let chain = &loaded.chain;
    let a = analyze_chain(chain, &cfg.eps)?;

    let mut header: Vec<String> = ["source", "n", "delta", "diam", "t_rel", "kappa_ollivier", "kappa_bakry_emery"]
        .map(String::from)
        .to_vec();
    let mut row = vec![
        loaded.label.clone(),
        a.n.to_string(),
        num(a.delta),
        num(a.diam),
        num(a.t_rel),
        num(a.kappa_ollivier),
        num(a.kappa_bakry_emery),
    ];
    for &(e, t, d, v) in &a.levels {
        let tag = eps_tag(e);
        header.extend([format!("t_mix_{tag}"), format!("d_star_{tag}"), format!("v_star_{tag}")]);
        row.extend([num(t), num(d), num(v)]);
    }
    let mut table = Table::new(header);
    table.push(row);
    table.write(&cfg.out.join("analysis.csv"))?;

    let times = match cfg.tgrid.points() {
        Some(p) => p,
        None => {
            let last = a.levels.iter().map(|l| l.1).fold(0.0, f64::max);
            let end = if last > 0.0 { 1.25 * last } else { 1.0 };
            (0..=100).map(|i| end * i as f64 / 100.0).collect()
        }
    };
    let tv = mixing_profile(chain, &times, cfg.tol, false)?;
    let ent = entropy_profile(chain, &times, cfg.tol)?;
    let mut prof = Table::new(["t", "worst_tv", "d_star", "v_star"]);
    for i in 0..tv.times.len() {
        prof.push(vec![num(tv.times[i]), num(tv.worst_tv[i]), num(ent.d_star[i]), num(ent.v_star[i])]);
    }
    prof.write(&cfg.out.join("profile.csv"))?;

    let d0 = ent.d_star.first().copied().filter(|d| *d > 0.0).unwrap_or(1.0);
    let plot = Plot {
        title: format!("{} (n = {})", loaded.label, a.n),
        x_label: "t".into(),
        y_label: "distance to equilibrium".into(),
        series: vec![
            Series::new("worst TV", tv.times.iter().copied().zip(tv.worst_tv.iter().copied()).collect(), Style::Line),
            Series::new(
                "d*(t) / d*(0)",
                ent.times.iter().copied().zip(ent.d_star.iter().map(|d| d / d0)).collect(),
                Style::Line,
            ),
        ],
        markers: a.levels.iter().map(|l| (l.1, format!("t_mix({})", l.0))).collect(),
    };
    write_svg(&cfg.out.join("profile.svg"), &plot)?;

    println!("{}: n={} diam={} delta={} t_rel={:.6}", loaded.label, a.n, a.diam, a.delta, a.t_rel);
    println!("  kappa: ollivier={:.6} bakry-emery={:.6}", a.kappa_ollivier, a.kappa_bakry_emery);
    for &(e, t, d, v) in &a.levels {
        println!("  eps={e}: t_mix={t:.6} d*={d:.6} V*={v:.6}");
    }
    Ok(Outcome::Success)
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<Outcome> {
    let loaded = load(cfg)?;
    let options = SuiteOptions {
        eps: cfg.eps.clone(),
        t_grid: cfg.tgrid.points(),
        draws: cfg.draws,
        seed: cfg.seed,
        curvature: None,
    };
    let report = verify_suite(&loaded.chain, &options)?;
    verdict_table(&report.verdicts).write(&cfg.out.join("verdicts.csv"))?;
    let failures: Vec<&InequalityVerdict> = report.failures().collect();
    println!(
        "{}: {} verdicts, {} failed (kappa = {:.6})",
        loaded.label,
        report.verdicts.len(),
        failures.len(),
        report.curvature.kappa()
    );
    for v in &failures {
        println!("  {v}");
    }
    Ok(if failures.is_empty() {
        Outcome::Success
    } else {
        Outcome::VerdictFailure
    })
}

/// One family member in a scan.
#[derive(Debug, Clone)]
pub struct ScanRow {
    pub param: f64,
    pub spec: String,
    pub n: usize,
    /// `t_mix` at every requested level.
    pub t_mix: Vec<f64>,
    pub t_rel: f64,
    pub delta: f64,
    pub diam: f64,
    pub kappa_ollivier: f64,
    pub kappa_bakry_emery: f64,
    /// The level `eps < 1/2` the cutoff columns refer to.
    pub eps: f64,
    pub t_mix_eps: f64,
    pub t_mix_complement: f64,
    pub d_star: f64,
    pub v_star: f64,
    pub window: f64,
    pub window_bound: f64,
    /// `t_mix(eps) / t_mix(1 - eps)`.
    pub ratio: f64,
    /// `(1 + sqrt(V*(t_mix))) t_rel / t_mix`.
    pub entropic_ratio: f64,
    /// `sqrt(t_mix(1/4)) t_rel log Delta`.
    pub window_scale: f64,
    /// `(t_rel log Delta)^2 / t_mix(eps)`.
    pub sparse_ratio: f64,
    /// `t_rel (log Delta)^{3/2} / sqrt(log N)`.
    pub expand_ratio: f64,
}

pub const SCAN_HEADER: [&str; 21] = [
    "param",
    "spec",
    "n",
    "t_rel",
    "delta",
    "diam",
    "kappa_ollivier",
    "kappa_bakry_emery",
    "eps",
    "t_mix_eps",
    "t_mix_1-eps",
    "d_star",
    "v_star",
    "window",
    "window_bound",
    "ratio",
    "entropic_ratio",
    "window_scale",
    "sparse_ratio",
    "expand_ratio",
    "curvature_claim",
];

pub fn scan_member(spec: &str, param: f64, eps_list: &[f64], state_cap: usize) -> Result<(ScanRow, String)> {
    let eps = eps_list
        .iter()
        .copied()
        .filter(|&e| e < 0.5)
        .fold(f64::NAN, f64::min);
    if eps.is_nan() {
        bail!(ConfigError("scan needs at least one eps below 1/2".into()));
    }
    let (inst, chain) = load_spec(spec, state_cap)?;
    let metric = chain.metric()?;
    let (delta, diam) = (metric.delta, metric.diameter as f64);
    let curvature = chain_curvature(&chain)?;
    let t_rel = chain.t_rel()?;
    let t_mix = eps_list
        .iter()
        .map(|&e| mixing_time(&chain, e, DEFAULT_TOL_T))
        .collect::<Result<Vec<_>, _>>()?;
    let t_mix_eps = mixing_time(&chain, eps, DEFAULT_TOL_T)?;
    let t_mix_complement = mixing_time(&chain, 1.0 - eps, DEFAULT_TOL_T)?;
    let quarter = mixing_time(&chain, 0.25, DEFAULT_TOL_T)?;
    let point = entropy_at(&chain, t_mix_eps, cutoff_lab::chain::DEFAULT_TOL)?;
    let window_bound = cutoff_window_bound(&chain, eps)?.rhs;
    let log_delta = delta.ln();
    let row = ScanRow {
        param,
        spec: spec.to_string(),
        n: chain.n(),
        t_mix,
        t_rel,
        delta,
        diam,
        kappa_ollivier: curvature.ollivier_min,
        kappa_bakry_emery: curvature.bakry_emery_min,
        eps,
        t_mix_eps,
        t_mix_complement,
        d_star: point.d_star,
        v_star: point.v_star,
        window: t_mix_eps - t_mix_complement,
        window_bound,
        ratio: t_mix_eps / t_mix_complement,
        entropic_ratio: entropic_concentration_ratio(&chain, eps)?,
        window_scale: quarter.sqrt() * t_rel * log_delta,
        sparse_ratio: (t_rel * log_delta).powi(2) / t_mix_eps,
        expand_ratio: t_rel * log_delta.powf(1.5) / (chain.n() as f64).ln().sqrt(),
    };
    Ok((row, inst.curvature_claim.to_string()))
}

pub fn scan_rows(spec: &str, eps_list: &[f64], state_cap: usize) -> Result<Vec<(ScanRow, String)>> {
    let members = expand_range(spec)?;
    members
        .par_iter()
        .map(|(param, member)| scan_member(member, *param, eps_list, state_cap))
        .collect()
}

pub fn scan_table(rows: &[(ScanRow, String)], eps_list: &[f64]) -> Table {
    let mut header: Vec<String> = SCAN_HEADER.iter().map(|s| s.to_string()).collect();
    header.extend(eps_list.iter().map(|e| format!("t_mix_{}", eps_tag(*e))));
    let mut t = Table::new(header);
    for (r, claim) in rows {
        let mut row = vec![
            num(r.param),
            r.spec.clone(),
            r.n.to_string(),
            num(r.t_rel),
            num(r.delta),
            num(r.diam),
            num(r.kappa_ollivier),
            num(r.kappa_bakry_emery),
            num(r.eps),
            num(r.t_mix_eps),
            num(r.t_mix_complement),
            num(r.d_star),
            num(r.v_star),
            num(r.window),
            num(r.window_bound),
            num(r.ratio),
            num(r.entropic_ratio),
            num(r.window_scale),
            num(r.sparse_ratio),
            num(r.expand_ratio),
            claim.clone(),
        ];
        row.extend(r.t_mix.iter().map(|v| num(*v)));
        t.push(row);
    }
    t
}

pub fn cmd_scan(cfg: &RunConfig) -> Result<Outcome> {
    let Some(Source::Spec(spec)) = &cfg.source else {
        bail!(ConfigError("scan needs a family spec".into()));
    };
    let rows = scan_rows(spec, &cfg.eps, cfg.state_cap)?;
    scan_table(&rows, &cfg.eps).write(&cfg.out.join("scan.csv"))?;
    let eps = rows.first().map_or(0.25, |r| r.0.eps);
    let ratio = Plot {
        title: format!("{spec}: t_mix({eps}) / t_mix({})", 1.0 - eps),
        x_label: "family parameter".into(),
        y_label: "mixing-time ratio".into(),
        series: vec![Series::new(
            "ratio",
            rows.iter().map(|(r, _)| (r.param, r.ratio)).collect(),
            Style::LinePoints,
        )],
        markers: Vec::new(),
    };
    write_svg(&cfg.out.join("cutoff_ratio.svg"), &ratio)?;
    let window = Plot {
        title: format!("{spec}: cutoff window"),
        x_label: "sqrt(t_mix(1/4)) t_rel log Delta".into(),
        y_label: format!("t_mix({eps}) - t_mix({})", 1.0 - eps),
        series: vec![
            Series::new(
                "window",
                rows.iter().map(|(r, _)| (r.window_scale, r.window)).collect(),
                Style::Points,
            ),
            Series::new(
                "entropic bound",
                rows.iter().map(|(r, _)| (r.window_scale, r.window_bound)).collect(),
                Style::Points,
            ),
        ],
        markers: Vec::new(),
    };
    write_svg(&cfg.out.join("window.svg"), &window)?;
    for (r, _) in &rows {
        println!(
            "{}: n={} ratio={:.4} window={:.4} (bound {:.4}) entropic={:.4}",
            r.spec, r.n, r.ratio, r.window, r.window_bound, r.entropic_ratio
        );
    }
    Ok(Outcome::Success)
}

pub fn cmd_curvature(cfg: &RunConfig) -> Result<Outcome> {
    let loaded = load(cfg)?;
    let chain = &loaded.chain;
    let report = curvature_report(chain.matrix())?;

    let mut edges = Table::new(["x", "y", "kappa_ollivier"]);
    for (&(x, y), &k) in &report.ollivier_edges {
        edges.push(vec![x.to_string(), y.to_string(), num(k)]);
    }
    edges.write(&cfg.out.join("curvature_edges.csv"))?;
    let mut vertices = Table::new(["x", "kappa_bakry_emery"]);
    for (x, &k) in report.bakry_emery_vertices.iter().enumerate() {
        vertices.push(vec![x.to_string(), num(k)]);
    }
    vertices.write(&cfg.out.join("curvature_vertices.csv"))?;

    let times = cfg.tgrid.points().unwrap_or_else(|| vec![0.5, 1.0, 2.0, 5.0]);
    let mut checks = vec![
        contraction_check(chain, report.ollivier_min, &times, cfg.seed)?,
        subcommutativity_check(chain, report.bakry_emery_min, &times, cfg.seed)?,
    ];
    if chain.n() <= W1_ALL_EDGES_MAX_N {
        checks.push(one_step_all_pairs(chain.matrix(), report.ollivier_min)?);
    }
    verdict_table(&checks).write(&cfg.out.join("curvature_checks.csv"))?;
    println!(
        "{}: ollivier min {:.6} over {} edges, bakry-emery min {:.6}",
        loaded.label,
        report.ollivier_min,
        report.ollivier_edges.len(),
        report.bakry_emery_min
    );
    for c in &checks {
        println!("  {c}");
    }
    Ok(if checks.iter().all(|c| c.pass) {
        Outcome::Success
    } else {
        Outcome::VerdictFailure
    })
}

pub fn cmd_random_cayley(cfg: &RunConfig) -> Result<Outcome> {
    let group = cfg
        .group
        .as_deref()
        .ok_or_else(|| ConfigError("random-cayley needs --group".into()))?;
    let d = cfg.gens.ok_or_else(|| ConfigError("random-cayley needs --gens".into()))?;
    let mut table = Table::new([
        "seed",
        "group",
        "d",
        "n",
        "redraws",
        "hash",
        "kappa_ollivier",
        "kappa_bakry_emery",
        "file",
        "generators",
    ]);
    for i in 0..cfg.count as u64 {
        let seed = cfg.seed + i;
        let spec = format!("cayley-random:{group}:d={d}:seed={seed}");
        let (inst, chain) = load_spec(&spec, cfg.state_cap)?;
        let curvature = chain_curvature(&chain)?;
        let file = format!("cayley_seed{seed}.chain");
        fs::write(cfg.out.join(&file), format_chain(&inst.matrix))?;
        table.push(vec![
            seed.to_string(),
            group.to_string(),
            d.to_string(),
            inst.n().to_string(),
            inst.param("redraws").unwrap_or("").to_string(),
            inst.matrix.content_hash_hex(),
            num(curvature.ollivier_min),
            num(curvature.bakry_emery_min),
            file,
            inst.param("gens").unwrap_or("").to_string(),
        ]);
        println!("{spec}: n={} ollivier {:.6} bakry-emery {:.6}", inst.n(), curvature.ollivier_min, curvature.bakry_emery_min);
    }
    table.write(&cfg.out.join("random_cayley.csv"))?;
    Ok(Outcome::Success)
}
