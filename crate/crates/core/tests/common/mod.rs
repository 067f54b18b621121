//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use cutoff_lab::chain::{MetricData, StochasticMatrix};
use cutoff_lab::families::{abelian_cayley, complete_graph, cycle, hypercube, random_abelian_cayley, GroupSpec};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// Random irreducible chain with symmetric support: a random spanning tree
/// plus extra edges, random positive weights, random holding.
pub fn random_chain(rng: &mut impl Rng, n: usize, extra_edges: usize) -> StochasticMatrix {
    let mut w = vec![0.0; n * n];
    for x in 1..n {
        let y = rng.random_range(0..x);
        let a = rng.random_range(0.1..1.0);
        w[x * n + y] = a;
        w[y * n + x] = rng.random_range(0.1..1.0);
    }
    for _ in 0..extra_edges {
        let x = rng.random_range(0..n);
        let y = rng.random_range(0..n);
        if x != y {
            w[x * n + y] = rng.random_range(0.1..1.0);
            w[y * n + x] = rng.random_range(0.1..1.0);
        }
    }
    for x in 0..n {
        if rng.random_bool(0.5) {
            w[x * n + x] = rng.random_range(0.0..1.0);
        }
        let s: f64 = w[x * n..(x + 1) * n].iter().sum();
        w[x * n..(x + 1) * n].iter_mut().for_each(|v| *v /= s);
    }
    StochasticMatrix::new(n, w).expect("normalized rows")
}

/// `e^{-t} sum_{k <= depth} (tP)^k / k!` with explicit matrix powers, summed
/// from the smallest term upwards with compensation.
pub fn taylor_expm(p: &StochasticMatrix, t: f64, depth: usize) -> Vec<Vec<f64>> {
    let n = p.n();
    let pm = DMatrix::from_row_slice(n, n, p.entries());
    let mut terms = Vec::with_capacity(depth + 1);
    let mut term = DMatrix::<f64>::identity(n, n);
    terms.push(term.clone());
    for k in 1..=depth {
        term = &term * &pm * (t / k as f64);
        terms.push(term.clone());
    }
    let mut sum = DMatrix::<f64>::zeros(n, n);
    let mut comp = DMatrix::<f64>::zeros(n, n);
    for term in terms.iter().rev() {
        for i in 0..n * n {
            let y = term[i] - comp[i];
            let s = sum[i] + y;
            comp[i] = (s - sum[i]) - y;
            sum[i] = s;
        }
    }
    let scale = (-t).exp();
    (0..n).map(|x| (0..n).map(|y| scale * sum[(x, y)]).collect()).collect()
}

/// Exact `W1` on tiny supports by enumerating the vertices of the dual
/// polytope `{f : |f(a) - f(b)| <= d(a,b), f(u_0) = 0}` over the union of
/// the supports.
pub fn w1_dual_oracle(mu: &[f64], nu: &[f64], metric: &MetricData) -> f64 {
    let support: Vec<usize> = (0..mu.len()).filter(|&z| mu[z] > 0.0 || nu[z] > 0.0).collect();
    let m = support.len();
    if m <= 1 {
        return 0.0;
    }
    // Unknowns f(u_1..u_{m-1}); constraints f(a) - f(b) <= d(a,b).
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    for a in 0..m {
        for b in 0..m {
            if a != b {
                let mut r = vec![0.0; m - 1];
                if a > 0 {
                    r[a - 1] += 1.0;
                }
                if b > 0 {
                    r[b - 1] -= 1.0;
                }
                rows.push((r, metric.dist(support[a], support[b]) as f64));
            }
        }
    }
    let weight: Vec<f64> = support.iter().map(|&z| mu[z] - nu[z]).collect();
    let dim = m - 1;
    let mut best = f64::NEG_INFINITY;
    let mut pick: Vec<usize> = (0..dim).collect();
    loop {
        let a = DMatrix::from_fn(dim, dim, |i, j| rows[pick[i]].0[j]);
        let b = DVector::from_fn(dim, |i, _| rows[pick[i]].1);
        if let Some(f) = a.clone().lu().solve(&b) {
            if (&a * &f - &b).amax() < 1e-9 {
                let feasible = rows
                    .iter()
                    .all(|(r, d)| r.iter().zip(f.iter()).map(|(x, y)| x * y).sum::<f64>() <= d + 1e-9);
                if feasible {
                    let value: f64 = (1..m).map(|i| weight[i] * f[i - 1]).sum();
                    best = best.max(value);
                }
            }
        }
        // Next combination of `dim` rows.
        let mut i = dim;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if pick[i] < rows.len() - dim + i {
                pick[i] += 1;
                for j in i + 1..dim {
                    pick[j] = pick[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// `t_mix(eps)` of simple random walk on `K_n` in continuous time.
pub fn complete_graph_tmix(n: usize, eps: f64) -> f64 {
    let n = n as f64;
    (n - 1.0) / n * ((1.0 - 1.0 / n) / eps).ln()
}

/// Random probability vector supported on `size` random states out of `n`.
pub fn random_measure(rng: &mut impl Rng, n: usize, size: usize) -> Vec<f64> {
    let mut states: Vec<usize> = (0..n).collect();
    for i in 0..size {
        let j = rng.random_range(i..n);
        states.swap(i, j);
    }
    let mut v = vec![0.0; n];
    for &s in &states[..size] {
        v[s] = rng.random_range(0.05..1.0);
    }
    let total: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= total);
    v
}

/// Abelian Cayley walks of several shapes, all non-negatively curved.
pub fn abelian_test_set() -> Vec<StochasticMatrix> {
    let z12 = GroupSpec::cyclic(12).unwrap();
    let circulant: Vec<Vec<usize>> = [1i64, -1, 5, -5].iter().map(|&a| z12.element(&[a]).unwrap()).collect();
    vec![
        hypercube(4, 0.0).unwrap().matrix,
        hypercube(3, 0.5).unwrap().matrix,
        cycle(6).unwrap().matrix,
        cycle(16).unwrap().matrix,
        complete_graph(7).unwrap().matrix,
        abelian_cayley(&z12, &circulant).unwrap().matrix,
        random_abelian_cayley(&GroupSpec::cyclic(64).unwrap(), 2, 7).unwrap().matrix,
        random_abelian_cayley(&GroupSpec::new(vec![4, 6]).unwrap(), 3, 1).unwrap().matrix,
        random_abelian_cayley(&GroupSpec::new(vec![2; 5]).unwrap(), 6, 9).unwrap().matrix,
    ]
}
