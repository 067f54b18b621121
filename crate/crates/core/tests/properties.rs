mod common;

use cutoff_lab::chain::{heat_kernel, metric_data, stationary, stationary_residual, DEFAULT_TOL};
use cutoff_lab::curvature::wasserstein1;
use cutoff_lab::entropy::{kl_and_varentropy, tv_distance};
use cutoff_lab::families::{parse_family, random_abelian_cayley, GroupSpec};
use cutoff_lab::InequalityVerdict;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn chain_strategy() -> impl Strategy<Value = cutoff_lab::StochasticMatrix> {
    (2usize..16, 0usize..10, any::<u64>()).prop_map(|(n, extra, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        common::random_chain(&mut rng, n, extra)
    })
}

fn measure(weights: &[f64]) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    weights.iter().map(|w| w / total).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn heat_rows_are_distributions(p in chain_strategy(), t in 0.0f64..30.0) {
        for row in heat_kernel(&p, t, DEFAULT_TOL).unwrap() {
            prop_assert!(row.as_slice().iter().all(|&v| v >= 0.0));
            prop_assert!((row.mass() - 1.0).abs() <= 1e-11);
        }
    }

    #[test]
    fn stationary_law_is_invariant(p in chain_strategy()) {
        let pi = stationary(&p).unwrap();
        prop_assert!(stationary_residual(&p, pi.as_slice()) < 1e-10);
        prop_assert!(pi.as_slice().iter().all(|&v| v > 0.0));
    }

    #[test]
    fn w1_bounds(p in chain_strategy(), a in prop::collection::vec(0.01f64..1.0, 16), b in prop::collection::vec(0.01f64..1.0, 16)) {
        let n = p.n();
        let metric = metric_data(&p).unwrap();
        let mu = measure(&a[..n]);
        let nu = measure(&b[..n]);
        let w = wasserstein1(&mu, &nu, &metric).unwrap().value;
        let tv = tv_distance(&mu, &nu).unwrap();
        // TV <= W1 <= diam * TV on a graph metric.
        prop_assert!(tv <= w + 1e-10);
        prop_assert!(w <= metric.diameter as f64 * tv + 1e-10);
        // Any 1-Lipschitz test function gives a lower bound.
        let f: Vec<f64> = (0..n).map(|z| metric.dist(0, z) as f64).collect();
        let gap: f64 = (0..n).map(|z| f[z] * (mu[z] - nu[z])).sum();
        prop_assert!(gap.abs() <= w + 1e-10);
    }

    #[test]
    fn divergences_are_nonnegative(a in prop::collection::vec(0.0f64..1.0, 2..20), seed in any::<u64>()) {
        prop_assume!(a.iter().sum::<f64>() > 0.0);
        let mu = measure(&a);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pi = common::random_measure(&mut rng, mu.len(), mu.len());
        let (d, v) = kl_and_varentropy(&mu, &pi).unwrap();
        prop_assert!(d >= -1e-12 && v >= -1e-12);
        let tv = tv_distance(&mu, &pi).unwrap();
        prop_assert!((0.0..=1.0).contains(&tv));
    }

    #[test]
    fn verdict_slack_matches_pass(lhs in -10.0f64..10.0, rhs in -10.0f64..10.0) {
        let v = InequalityVerdict::check("x", lhs, rhs, 1e-9);
        prop_assert_eq!(v.pass, v.slack >= -1e-9);
        prop_assert!((v.slack - (rhs - lhs)).abs() < 1e-12);
    }

    #[test]
    fn group_encoding_round_trips(factors in prop::collection::vec(2usize..6, 1..4), i in any::<usize>()) {
        let g = GroupSpec::new(factors).unwrap();
        let x = i % g.order();
        prop_assert_eq!(g.encode(&g.decode(x)), x);
        let e = g.decode(x);
        prop_assert_eq!(g.encode(&g.add(&e, &g.neg(&e))), 0);
    }

    #[test]
    fn random_cayley_is_symmetric(m in 3usize..40, d in 1usize..4, seed in any::<u64>()) {
        let g = GroupSpec::cyclic(m).unwrap();
        if let Ok(inst) = random_abelian_cayley(&g, d, seed) {
            let p = &inst.matrix;
            for x in 0..m {
                for y in 0..m {
                    prop_assert_eq!(p.get(x, y), p.get(y, x));
                    prop_assert_eq!(p.get(x, y), p.get((x + 1) % m, (y + 1) % m));
                }
            }
        }
    }

    #[test]
    fn family_specs_round_trip(d in 1usize..9, n in 3usize..60, k in 2usize..6) {
        for s in [format!("hypercube:d={d}"), format!("cycle:n={n}"), format!("complete:n={n}"), format!("sym:k={k}:class=transpositions")] {
            let spec = parse_family(&s).unwrap();
            prop_assert_eq!(parse_family(&spec.to_string()).unwrap(), spec);
        }
    }
}
