//! Small worked examples with closed forms, plus a few frozen regression values.

use cutoff_lab::chain::{heat_kernel_row, metric_data, stationary, DEFAULT_TOL};
use cutoff_lab::curvature::{bakry_emery_curvature, curvature_report};
use cutoff_lab::entropy::{
    cutoff_time_equation, cutoff_window_bound, diameter_bound_check, entropic_lower_bound_check,
    entropic_upper_bound, entropy_at, local_concentration_check, log_density_lip_norm, log_gradient_bound_check,
    mixing_time, varentropy_bound_check, DEFAULT_TOL_T,
};
use cutoff_lab::families::{
    birth_death, complete_graph, conjugacy_walk, cycle, hypercube, parse_family, random_abelian_cayley, GroupSpec,
    DEFAULT_STATE_CAP,
};
use cutoff_lab::spectral::{adjoint, detailed_balance_defect, gamma_form, relaxation_time, reversibilization};
use cutoff_lab::{Chain, StochasticMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

fn build(spec: &str) -> Chain {
    parse_family(spec).unwrap().build(DEFAULT_STATE_CAP).unwrap().to_chain().unwrap()
}

#[test]
fn stationary_laws_by_detailed_balance() {
    let (p, q) = (0.3, 0.45);
    let inst = birth_death(&[p, p], &[q, q]).unwrap();
    let pi = stationary(&inst.matrix).unwrap();
    let r = p / q;
    let z = 1.0 + r + r * r;
    for (got, want) in pi.as_slice().iter().zip([1.0 / z, r / z, r * r / z]) {
        assert!(close(*got, want, 1e-14));
    }
    let two = StochasticMatrix::new(2, vec![0.9, 0.1, 0.2, 0.8]).unwrap();
    let pi = stationary(&two).unwrap();
    assert!(close(pi[0], 2.0 / 3.0, 1e-15) && close(pi[1], 1.0 / 3.0, 1e-15));
    let star = adjoint(&two, &pi).unwrap();
    assert!(star.entries().iter().zip(two.entries()).all(|(a, b)| close(*a, *b, 1e-15)));
}

#[test]
fn flip_chain_heat_row() {
    let p = StochasticMatrix::new(2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
    let row = heat_kernel_row(&p, 0, 1.0, DEFAULT_TOL).unwrap();
    let e = (-2.0f64).exp();
    assert!(close(row[0], 0.5 * (1.0 + e), 1e-13) && close(row[1], 0.5 * (1.0 - e), 1e-13));
    let chain = Chain::new(p).unwrap();
    let lip = log_density_lip_norm(&chain, 0, 1.0).unwrap();
    assert!(close(lip, ((1.0 + e) / (1.0 - e)).ln(), 1e-12));
}

#[test]
fn reversibilization_is_reversible() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let entries: Vec<f64> = (0..100).map(|_| rng.random_range(0.01..1.0)).collect();
    let mut rows: Vec<Vec<f64>> = entries.chunks(10).map(|r| r.to_vec()).collect();
    for r in &mut rows {
        let s: f64 = r.iter().sum();
        r.iter_mut().for_each(|v| *v /= s);
    }
    let p = StochasticMatrix::from_rows(&rows).unwrap();
    let pi = stationary(&p).unwrap();
    let k = reversibilization(&p, &pi).unwrap();
    assert!(detailed_balance_defect(&k, &pi) < 1e-14);
}

#[test]
fn spectra_in_closed_form() {
    for n in [3usize, 7, 20] {
        let p = complete_graph(n).unwrap().matrix;
        let s = relaxation_time(&p, &stationary(&p).unwrap()).unwrap();
        let nf = n as f64;
        assert!(close(s.lambda2, -1.0 / (nf - 1.0), 1e-12));
        assert!(close(s.t_rel, (nf - 1.0) / nf, 1e-12));
    }
    for n in [5usize, 12, 33] {
        let p = cycle(n).unwrap().matrix;
        let s = relaxation_time(&p, &stationary(&p).unwrap()).unwrap();
        assert!(close(s.gap, 1.0 - (2.0 * std::f64::consts::PI / n as f64).cos(), 1e-12));
    }
    // Two blocks, every state crossing with probability pr: lumps to a
    // 2-state chain with gap 2 pr.
    for pr in [1e-2, 1e-4, 1e-7] {
        let rows = vec![
            vec![0.5 - pr, 0.5, pr, 0.0],
            vec![0.5, 0.5 - pr, 0.0, pr],
            vec![pr, 0.0, 0.5 - pr, 0.5],
            vec![0.0, pr, 0.5, 0.5 - pr],
        ];
        let p = StochasticMatrix::from_rows(&rows).unwrap();
        let s = relaxation_time(&p, &stationary(&p).unwrap()).unwrap();
        assert!((s.t_rel * 2.0 * pr - 1.0).abs() < 1e-6);
    }
    // S_3 by transpositions: 6 states, 3-regular, bipartite.
    let s3 = conjugacy_walk(3, &[2]).unwrap().matrix;
    assert_eq!(s3.n(), 6);
    assert!((0..6).all(|x| s3.neighbors(x).count() == 3));
    let s = relaxation_time(&s3, &stationary(&s3).unwrap()).unwrap();
    assert!(close(*s.eigenvalues.last().unwrap(), -1.0, 1e-12));
}

#[test]
fn gamma_matches_double_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let n = 8;
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let r: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
            let s: f64 = r.iter().sum();
            r.into_iter().map(|v| v / s).collect()
        })
        .collect();
    let p = StochasticMatrix::from_rows(&rows).unwrap();
    let f: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let g: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let fast = gamma_form(&p, &f, &g).unwrap();
    for x in 0..n {
        let mut raw = 0.0;
        for y in 0..n {
            raw += 0.5 * rows[x][y] * (f[y] - f[x]) * (g[y] - g[x]);
        }
        assert!(close(fast[x], raw, 1e-14));
    }
}

#[test]
fn bakry_emery_closed_forms() {
    // Complete graph K_n: (n + 2) / (2(n - 1)); hypercube {0,1}^d: 2/d.
    for n in 2..=6 {
        let be = bakry_emery_curvature(&complete_graph(n).unwrap().matrix).unwrap();
        let want = (n as f64 + 2.0) / (2.0 * (n as f64 - 1.0));
        assert!(be.vertices.iter().all(|&k| close(k, want, 1e-10)), "K_{n}");
    }
    for d in 2..=5 {
        let be = bakry_emery_curvature(&hypercube(d, 0.0).unwrap().matrix).unwrap();
        assert!(close(be.min, 2.0 / d as f64, 1e-10));
    }
}

#[test]
fn hypercube_metric() {
    let m = metric_data(&hypercube(4, 0.0).unwrap().matrix).unwrap();
    assert_eq!((m.diameter, m.delta), (4, 4.0));
}

#[test]
fn frozen_hypercube_mixing_times() {
    let frozen = [
        (4, 2.4115657806, 0.2133255005),
        (5, 3.1723661423, 0.4739656448),
        (6, 4.1857509613, 0.7681827545),
        (7, 4.9614810944, 0.9129810333),
    ];
    for (d, quarter, three_quarters) in frozen {
        let chain = hypercube(d, 0.0).unwrap().to_chain().unwrap();
        assert!(close(mixing_time(&chain, 0.25, DEFAULT_TOL_T).unwrap(), quarter, 2e-6));
        assert!(close(mixing_time(&chain, 0.75, DEFAULT_TOL_T).unwrap(), three_quarters, 2e-6));
    }
    let c = cycle(32).unwrap().to_chain().unwrap();
    assert!(close(mixing_time(&c, 0.25, DEFAULT_TOL_T).unwrap(), 48.7847471237, 2e-6));
}

#[test]
fn flip_mixing_in_closed_form() {
    let chain = Chain::new(StochasticMatrix::new(2, vec![0.0, 1.0, 1.0, 0.0]).unwrap()).unwrap();
    for eps in [0.01, 0.1, 0.3] {
        let t = mixing_time(&chain, eps, DEFAULT_TOL_T).unwrap();
        assert!(close(t, -(2.0 * eps).ln() / 2.0, 2e-6));
    }
}

#[test]
fn entropies_vanish_at_equilibrium() {
    let chain = build("cycle:n=9");
    let e = entropy_at(&chain, 300.0, DEFAULT_TOL).unwrap();
    assert!(e.d_star < 1e-12 && e.v_star < 1e-12);
}

#[test]
fn entropic_bounds_on_named_instances() {
    let h6 = build("hypercube:d=6");
    let t = mixing_time(&h6, 0.5, DEFAULT_TOL_T).unwrap();
    assert!(entropic_upper_bound(&h6, t, 0.25).unwrap().pass);
    let c32 = build("cycle:n=32");
    for k in 0..10 {
        assert!(entropic_upper_bound(&c32, 10.0 * k as f64, 0.3).unwrap().pass);
    }
    for eps in [0.1, 0.25, 0.4] {
        let t = mixing_time(&h6, 1.0 - eps, DEFAULT_TOL_T).unwrap();
        let row = heat_kernel_row(h6.matrix(), 0, t, DEFAULT_TOL).unwrap();
        let v = entropic_lower_bound_check(row.as_slice(), h6.pi().as_slice(), eps).unwrap();
        assert!(v.pass && !v.vacuous, "{v}");
    }
}

#[test]
fn window_bounds() {
    for d in [6, 8, 10] {
        let v = cutoff_window_bound(&build(&format!("hypercube:d={d}")), 0.25).unwrap();
        assert!(v.pass, "{v}");
    }
    let k50 = build("complete:n=50");
    let v = cutoff_window_bound(&k50, 0.25).unwrap();
    let closed = (49.0f64 / 50.0) * 3.0f64.ln();
    assert!(v.pass && close(v.lhs, closed, 2e-3), "{v}");
}

#[test]
fn cutoff_equation_roots() {
    let h8 = build("hypercube:d=8");
    // With c = 1/eps the root cannot exceed t_mix(1 - eps).
    let t4 = cutoff_time_equation(&h8, 4.0).unwrap();
    assert!(t4 <= mixing_time(&h8, 0.75, DEFAULT_TOL_T).unwrap());
    let t1 = cutoff_time_equation(&h8, 1.0).unwrap();
    assert!(close(t1, 0.9427099228, 2e-6), "{t1}");
    assert!(t1 <= mixing_time(&h8, 0.05, DEFAULT_TOL_T).unwrap());
    let before = entropy_at(&h8, t1 - 1e-5, DEFAULT_TOL).unwrap();
    let after = entropy_at(&h8, t1 + 1e-5, DEFAULT_TOL).unwrap();
    assert!(before.d_star >= 1.0 + before.v_star.sqrt());
    assert!(after.d_star < 1.0 + after.v_star.sqrt());
}

#[test]
fn gradient_and_concentration_checks() {
    let h6 = build("hypercube:d=6");
    for t in [1.5, 3.0, 6.0] {
        assert!(log_gradient_bound_check(&h6, t).unwrap().pass);
    }
    assert!(log_gradient_bound_check(&h6, 1.0).is_err());
    assert!(log_gradient_bound_check(&build("cycle:n=16"), 2.0).unwrap().pass);
    let h8 = build("hypercube:d=8");
    let t = mixing_time(&h8, 0.25, DEFAULT_TOL_T).unwrap();
    assert!(log_gradient_bound_check(&h8, t).unwrap().pass);

    let kappa = curvature_report(h6.matrix()).unwrap().kappa();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let t_mix = mixing_time(&h6, 0.25, DEFAULT_TOL_T).unwrap();
    for _ in 0..100 {
        let f: Vec<f64> = (0..64).map(|_| StandardNormal.sample(&mut rng)).collect();
        for t in [1.0, t_mix] {
            assert!(local_concentration_check(&h6, &f, t, kappa).unwrap().pass);
        }
    }
}

#[test]
fn varentropy_and_diameter() {
    let z64 = random_abelian_cayley(&GroupSpec::cyclic(64).unwrap(), 2, 7).unwrap().to_chain().unwrap();
    for chain in [build("hypercube:d=6"), build("hypercube:d=8"), build("cycle:n=32"), z64] {
        let report = curvature_report(chain.matrix()).unwrap();
        for v in varentropy_bound_check(&chain, 0.25, &report).unwrap() {
            assert!(v.pass, "{v}");
        }
    }
    assert!(diameter_bound_check(&build("cycle:n=32"), 0.5).unwrap().pass);
    assert!(diameter_bound_check(&build("hypercube:d=8"), 0.9).unwrap().pass);
}

#[test]
fn random_hypercube_generators_usually_generate() {
    let g = GroupSpec::new(vec![2; 8]).unwrap();
    let mut first_try = 0;
    for seed in 0..50 {
        let inst = random_abelian_cayley(&g, 16, seed).unwrap();
        assert!(inst.matrix.validate().ok());
        if inst.param("redraws") == Some("0") {
            first_try += 1;
        }
    }
    assert!(first_try >= 45);
}
