use cutoff_lab::chain::{metric_data, stationary};
use cutoff_lab::curvature::ollivier_curvature;
use cutoff_lab::families::{
    birth_death, complete_graph, conjugacy_walk, cycle, hypercube, parse_family, perturb_toward_uniform,
    random_abelian_cayley, CurvatureClaim, GroupSpec, DEFAULT_STATE_CAP,
};
use cutoff_lab::Error;

#[test]
fn hypercube_shape() {
    for d in 1..=7 {
        let inst = hypercube(d, 0.0).unwrap();
        let p = &inst.matrix;
        assert_eq!(p.n(), 1 << d);
        assert!(p.is_doubly_stochastic());
        let metric = metric_data(p).unwrap();
        assert_eq!(metric.diameter as usize, d);
        assert_eq!(metric.delta, d as f64);
        for x in 0..p.n() {
            for (y, w) in p.neighbors(x) {
                assert_eq!((x ^ y).count_ones(), 1);
                assert_eq!(w, 1.0 / d as f64);
            }
        }
    }
}

#[test]
fn cycle_and_complete_metrics() {
    let c = metric_data(&cycle(17).unwrap().matrix).unwrap();
    assert_eq!((c.diameter, c.delta), (8, 2.0));
    let k = metric_data(&complete_graph(9).unwrap().matrix).unwrap();
    assert_eq!((k.diameter, k.delta), (1, 8.0));
}

#[test]
fn random_cayley_instances_are_valid() {
    let groups = [vec![64], vec![2; 6], vec![3, 5, 4], vec![7, 7]];
    for factors in groups {
        let g = GroupSpec::new(factors).unwrap();
        for seed in 0..5 {
            let inst = random_abelian_cayley(&g, g.rank().max(3), seed).unwrap();
            let p = &inst.matrix;
            assert!(p.is_irreducible() && p.has_symmetric_support() && p.is_doubly_stochastic());
            for x in 0..p.n() {
                for y in 0..p.n() {
                    assert_eq!(p.get(x, y), p.get(y, x));
                }
            }
            assert!(inst.transitive);
            assert_eq!(inst.curvature_claim, CurvatureClaim::NonnegAbelian);
        }
    }
}

#[test]
fn perturbation_raises_sparsity() {
    let inner = hypercube(6, 0.0).unwrap();
    let theta = 0.05;
    let outer = perturb_toward_uniform(&inner, theta).unwrap();
    let delta = metric_data(&outer.matrix).unwrap().delta;
    let floor: f64 = outer.param("delta_floor").unwrap().parse().unwrap();
    assert!(delta >= floor * (1.0 - 1e-12));
    assert_eq!(metric_data(&outer.matrix).unwrap().diameter, 1);
    assert!(outer.transitive);
    let pi = stationary(&outer.matrix).unwrap();
    assert!(pi.as_slice().iter().all(|&v| (v - 1.0 / 64.0).abs() < 1e-14));
}

#[test]
fn birth_death_reversible_law() {
    let up = [0.5, 0.4, 0.3];
    let down = [0.2, 0.3, 0.4];
    let inst = birth_death(&up, &down).unwrap();
    let pi = stationary(&inst.matrix).unwrap();
    for x in 0..3 {
        let lhs = pi.as_slice()[x] * up[x];
        let rhs = pi.as_slice()[x + 1] * down[x];
        assert!((lhs - rhs).abs() < 1e-14);
    }
    assert!(!inst.transitive);
}

#[test]
fn conjugacy_walks() {
    let inst = conjugacy_walk(4, &[2]).unwrap();
    assert_eq!(inst.n(), 24);
    assert!(inst.matrix.is_doubly_stochastic());
    assert_eq!(metric_data(&inst.matrix).unwrap().diameter, 3);
    assert!(ollivier_curvature(&inst.matrix).unwrap().min >= -1e-8);
    // 3-cycles stay in the alternating group.
    assert_eq!(conjugacy_walk(4, &[3]).unwrap_err(), Error::NotGenerating);
    assert!(matches!(conjugacy_walk(7, &[2]), Err(Error::StateCapExceeded { size: 5040, .. })));
}

#[test]
fn spec_strings_build_the_same_chains() {
    let cases = [
        ("hypercube:d=5", hypercube(5, 0.0).unwrap()),
        ("cycle:n=32", cycle(32).unwrap()),
        ("complete:n=12", complete_graph(12).unwrap()),
        ("sym:k=4:class=transpositions", conjugacy_walk(4, &[2]).unwrap()),
    ];
    for (spec, direct) in cases {
        let built = parse_family(spec).unwrap().build(DEFAULT_STATE_CAP).unwrap();
        assert_eq!(built.matrix, direct.matrix, "{spec}");
    }
}

#[test]
fn state_cap_is_enforced_before_building() {
    let err = parse_family("hypercube:d=20").unwrap().build(DEFAULT_STATE_CAP).unwrap_err();
    assert_eq!(err, Error::StateCapExceeded { size: 1 << 20, cap: DEFAULT_STATE_CAP });
}
