//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! FAIL. Run with `cargo test -p cutoff-lab-cli --test acceptance`.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use common::{abelian_test_set, complete_graph_tmix, random_chain, random_measure, taylor_expm, w1_dual_oracle};
use cutoff_lab::chain::{heat_kernel, metric_data, DEFAULT_TOL};
use cutoff_lab::curvature::{bakry_emery_curvature, curvature_report, ollivier_curvature, wasserstein1};
use cutoff_lab::entropy::{mixing_time, verify_suite, SuiteOptions, DEFAULT_TOL_T};
use cutoff_lab::families::{complete_graph, cycle, DEFAULT_STATE_CAP};
use cutoff_lab::verdict::VERDICT_TOL;
use cutoff_lab::StochasticMatrix;
use cutoff_lab_cli::commands::{load_spec, scan_rows, ScanRow};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, u64, fn() -> Check);

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn heat_kernel_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let n = rng.random_range(2..=20);
        let p = random_chain(&mut rng, n, n);
        for t in [0.1f64, 1.0, 5.0, 10.0] {
            let depth = 4 * ((t + 8.0 * t.sqrt() + 8.0).ceil() as usize).max(40);
            let oracle = taylor_expm(&p, t, depth);
            let rows = heat_kernel(&p, t, DEFAULT_TOL).map_err(err)?;
            for (row, o) in rows.iter().zip(&oracle) {
                for (a, b) in row.as_slice().iter().zip(o) {
                    worst = worst.max((a - b).abs());
                }
            }
        }
    }
    ensure(worst < 1e-10, format!("max entry error {worst:.2e} (tol 1e-10)"))
}

fn complete_graph_mixing() -> Check {
    let mut worst = 0.0f64;
    for n in [10, 50] {
        let chain = complete_graph(n).and_then(|i| i.to_chain()).map_err(err)?;
        for eps in [0.05, 0.25, 0.5] {
            let t = mixing_time(&chain, eps, DEFAULT_TOL_T).map_err(err)?;
            worst = worst.max((t - complete_graph_tmix(n, eps)).abs());
        }
    }
    ensure(worst < 1e-3, format!("max |t_mix - closed form| {worst:.2e} (tol 1e-3)"))
}

fn transport_duality() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let p = random_chain(&mut rng, 40, 25);
    let metric = metric_data(&p).map_err(err)?;
    let (mut gap, mut lip, mut marg) = (0.0f64, f64::NEG_INFINITY, 0.0f64);
    for _ in 0..200 {
        let (a, b) = (rng.random_range(1..=30), rng.random_range(1..=30));
        let mu = random_measure(&mut rng, 40, a);
        let nu = random_measure(&mut rng, 40, b);
        let cert = wasserstein1(&mu, &nu, &metric).map_err(err)?.certificate(&mu, &nu, &metric);
        gap = gap.max(cert.gap);
        lip = lip.max(cert.lipschitz_excess);
        marg = marg.max(cert.marginal_error);
    }

    let p = random_chain(&mut rng, 14, 6);
    let metric = metric_data(&p).map_err(err)?;
    let (mut checked, mut oracle_err) = (0, 0.0f64);
    while checked < 200 {
        let (a, b) = (rng.random_range(1..=4), rng.random_range(1..=4));
        let mu = random_measure(&mut rng, 14, a);
        let nu = random_measure(&mut rng, 14, b);
        if (0..14).filter(|&z| mu[z] > 0.0 || nu[z] > 0.0).count() > 6 {
            continue;
        }
        let value = wasserstein1(&mu, &nu, &metric).map_err(err)?.value;
        oracle_err = oracle_err.max((value - w1_dual_oracle(&mu, &nu, &metric)).abs());
        checked += 1;
    }
    ensure(
        gap < 1e-8 && lip <= 1e-9 && marg < 1e-12 && oracle_err < 1e-9,
        format!(
            "duality gap {gap:.2e} (tol 1e-8), lipschitz excess {lip:.2e}, marginals {marg:.2e}; \
             small-LP oracle error {oracle_err:.2e} (tol 1e-9)"
        ),
    )
}

fn curvature_ground_truths() -> Check {
    let mut cycle_dev = 0.0f64;
    for n in [6, 16, 32] {
        let p = cycle(n).map_err(err)?.matrix;
        for k in ollivier_curvature(&p).map_err(err)?.edges.values() {
            cycle_dev = cycle_dev.max(k.abs());
        }
    }
    let mut abelian_min = f64::INFINITY;
    let set = abelian_test_set();
    for p in &set {
        let r = curvature_report(p).map_err(err)?;
        abelian_min = abelian_min.min(r.ollivier_min.min(r.bakry_emery_min));
    }
    // Flip chain, f = (a, b): Gamma(f) = (b-a)^2/2 and Gamma2(f) = (b-a)^2 at
    // both states, so every Rayleigh quotient equals 2.
    let flip = StochasticMatrix::new(2, vec![0.0, 1.0, 1.0, 0.0]).map_err(err)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut quotient = f64::INFINITY;
    for _ in 0..100 {
        let (a, b): (f64, f64) = (rng.random(), rng.random());
        quotient = quotient.min((b - a).powi(2) / ((b - a).powi(2) / 2.0));
    }
    let be = bakry_emery_curvature(&flip).map_err(err)?;
    let flip_err = be.vertices.iter().map(|k| (k - quotient).abs()).fold(0.0, f64::max);
    ensure(
        cycle_dev < 1e-8 && abelian_min >= -1e-8 && flip_err < 1e-8,
        format!(
            "cycles max |kappa| {cycle_dev:.2e}; {} abelian walks min kappa {abelian_min:.3e}; \
             flip chain |kappa - 2| {flip_err:.2e}",
            set.len()
        ),
    )
}

const SUITE_INSTANCES: [&str; 8] = [
    "hypercube:d=4",
    "hypercube:d=6",
    "hypercube:d=8",
    "cycle:n=16",
    "cycle:n=32",
    "complete:n=20",
    "cayley-random:Z64:d=2:seed=7",
    "bd:n=20:p=0.3:q=0.3",
];

const REQUIRED_VERDICTS: [&str; 8] = [
    "entropic upper bound",
    "entropic lower bound",
    "cutoff window",
    "local concentration",
    "log gradient",
    "diameter bound",
    "varentropy 18",
    "varentropy composition",
];

fn inequality_suite() -> Check {
    let mut lines = Vec::new();
    let mut ok = true;
    for spec in SUITE_INSTANCES {
        let (_, chain) = load_spec(spec, DEFAULT_STATE_CAP).map_err(err)?;
        let options = SuiteOptions {
            draws: 100,
            ..SuiteOptions::default()
        };
        let report = verify_suite(&chain, &options).map_err(err)?;
        let failed = report.failures().count();
        let binding: Vec<_> = report.verdicts.iter().filter(|v| !v.vacuous).collect();
        let vacuous = report.verdicts.len() - binding.len();
        let min_slack = binding.iter().map(|v| v.slack).fold(f64::INFINITY, f64::min);
        let missing: Vec<&str> = REQUIRED_VERDICTS
            .iter()
            .copied()
            .filter(|name| !report.verdicts.iter().any(|v| v.name == *name))
            .collect();
        let tolerance_ok = report.verdicts.iter().all(|v| v.tolerance <= VERDICT_TOL);
        ok &= failed == 0 && missing.is_empty() && tolerance_ok && min_slack >= -VERDICT_TOL;
        lines.push(format!(
            "{spec}: {} verdicts ({vacuous} vacuous), {failed} failed, min non-vacuous slack {min_slack:.2e}{}",
            report.verdicts.len(),
            if missing.is_empty() { String::new() } else { format!(", missing {missing:?}") }
        ));
        for v in report.failures() {
            lines.push(format!("  {v}"));
        }
    }
    ensure(ok, lines.join("\n      "))
}

fn scan(spec: &str) -> Result<Vec<ScanRow>, String> {
    Ok(scan_rows(spec, &[0.25, 0.75], DEFAULT_STATE_CAP)
        .map_err(err)?
        .into_iter()
        .map(|r| r.0)
        .collect())
}

fn hypercube_trend() -> Check {
    let rows = scan("hypercube:d=4..10")?;
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    let decreasing = ratios.windows(2).all(|w| w[1] < w[0]);
    let last = *ratios.last().ok_or("empty scan")?;
    let windows_ok = rows.iter().all(|r| r.window <= r.window_bound);
    let shown: Vec<String> = ratios.iter().map(|r| format!("{r:.3}")).collect();
    ensure(
        decreasing && last < 1.35 && windows_ok,
        format!(
            "ratios d=4..10 [{}]: strictly decreasing {decreasing}; d=10 ratio {last:.3} < 1.35 {}; \
             window <= bound at every d {windows_ok}",
            shown.join(", "),
            last < 1.35
        ),
    )
}

fn perturbation_mechanism() -> Check {
    let base = scan("hypercube:d=8")?.remove(0);
    let (inst, _) = load_spec("perturb:theta=5/tmix:hypercube:d=8", DEFAULT_STATE_CAP).map_err(err)?;
    let theta: f64 = inst
        .param("theta")
        .ok_or("perturbed instance does not record theta")?
        .parse()
        .map_err(err)?;
    let pert = scan("perturb:theta=5/tmix:hypercube:d=8")?.remove(0);
    let increase = pert.ratio / base.ratio - 1.0;
    let factor = pert.delta / base.delta;
    let required = 256.0 * theta * 0.9;
    ensure(
        increase >= 0.2 && factor >= required,
        format!(
            "theta {theta:.4}; ratio {:.3} -> {:.3} (+{:.1}%, need >= 20%); delta {} -> {} \
             (factor {factor:.2}, need >= {required:.2})",
            base.ratio,
            pert.ratio,
            100.0 * increase,
            base.delta,
            pert.delta
        ),
    )
}

fn cycle_control() -> Check {
    let rows = scan("cycle:n=8..64")?;
    let min_entropic = rows.iter().map(|r| r.entropic_ratio).fold(f64::INFINITY, f64::min);
    let min_ratio = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    ensure(
        min_entropic >= 0.5 && min_ratio > 1.5,
        format!(
            "{} cycles: min entropic statistic {min_entropic:.3} (>= 0.5), min mixing ratio {min_ratio:.3} (> 1.5)",
            rows.len()
        ),
    )
}

fn run_cli(args: &[&str], out: &Path) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_cutoff-lab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .args(["--threads", "1", "--seed", "5"])
        .stdout(std::process::Stdio::null())
        .status()
        .map_err(err)?;
    ensure(status.success(), format!("{args:?} exited with {status}")).map(|_| ())
}

fn reproducibility() -> Check {
    let dir = tempfile::tempdir().map_err(err)?;
    let mut compared = 0;
    for (args, file) in [
        (&["verify", "hypercube:d=5", "--draws", "30"][..], "verdicts.csv"),
        (&["scan", "cycle:n=8..20/4"][..], "scan.csv"),
    ] {
        let a = dir.path().join(format!("{}-a", args[0]));
        let b = dir.path().join(format!("{}-b", args[0]));
        run_cli(args, &a)?;
        run_cli(args, &b)?;
        let first = std::fs::read(a.join(file)).map_err(err)?;
        if first != std::fs::read(b.join(file)).map_err(err)? {
            return Err(format!("{file} differs between two cold runs"));
        }
        // A third run reads the kernel cache the first one wrote.
        let warm = dir.path().join(format!("{}-a", args[0]));
        run_cli(args, &warm)?;
        if first != std::fs::read(warm.join(file)).map_err(err)? {
            return Err(format!("{file} differs after a warm-cache run"));
        }
        compared += 1;
    }
    Ok(format!("{compared} outputs byte-identical across cold and warm runs"))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("heat kernel matches Taylor oracle", 10, heat_kernel_oracle),
        ("complete-graph mixing closed form", 5, complete_graph_mixing),
        ("transport duality and small-LP oracle", 30, transport_duality),
        ("curvature ground truths", 60, curvature_ground_truths),
        ("inequality suite on named instances", 600, inequality_suite),
        ("hypercube cutoff trend", 900, hypercube_trend),
        ("perturbation raises ratio and sparsity", 300, perturbation_mechanism),
        ("cycle negative control", 300, cycle_control),
        ("byte-identical reruns", 600, reproducibility),
    ];
    let mut failures = 0;
    for (i, (name, limit, check)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(limit);
        let pass = result.is_ok() && in_time;
        failures += usize::from(!pass);
        let detail = result.unwrap_or_else(|e| e);
        println!(
            "{} [{}] {name} ({:.2} s, limit {limit} s{}): {detail}",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            elapsed.as_secs_f64(),
            if in_time { "" } else { ", exceeded" }
        );
    }
    println!("{} of 9 criteria pass", 9 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
