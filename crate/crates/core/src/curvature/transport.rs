//! Exact Wasserstein-1 distance between two laws on a graph, by the
//! transportation simplex (MODI) on the supports of the two laws, with a
//! Kantorovich potential as dual certificate.

use std::collections::VecDeque;

use crate::chain::MetricData;
use crate::error::{Error, Result};

/// Reduced costs above `-REDUCED_COST_TOL` count as optimal.
const REDUCED_COST_TOL: f64 = 1e-11;

/// An optimal coupling with its value and a dual potential.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportPlan {
    /// `(x, y, mass)` with positive mass.
    pub plan: Vec<(usize, usize, f64)>,
    pub value: f64,
    /// 1-Lipschitz `f` with `<f, mu - nu> = value`.
    pub dual_potential: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualityCertificate {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
    /// `max (|f(x) - f(y)| - 1)` over support edges; `<= 0` when 1-Lipschitz.
    pub lipschitz_excess: f64,
    pub marginal_error: f64,
}

impl TransportPlan {
    pub fn dual_value(&self, mu: &[f64], nu: &[f64]) -> f64 {
        self.dual_potential
            .iter()
            .zip(mu.iter().zip(nu))
            .map(|(f, (a, b))| f * (a - b))
            .sum()
    }

    pub fn certificate(&self, mu: &[f64], nu: &[f64], metric: &MetricData) -> DualityCertificate {
        let n = metric.n();
        let dual = self.dual_value(mu, nu);
        let mut lipschitz_excess = f64::NEG_INFINITY;
        for x in 0..n {
            for y in x + 1..n {
                let d = metric.dist(x, y) as f64;
                let diff = (self.dual_potential[x] - self.dual_potential[y]).abs();
                lipschitz_excess = lipschitz_excess.max(diff - d);
            }
        }
        let mut rows = vec![0.0; n];
        let mut cols = vec![0.0; n];
        for &(x, y, m) in &self.plan {
            rows[x] += m;
            cols[y] += m;
        }
        let marginal_error = (0..n)
            .map(|z| (rows[z] - mu[z]).abs().max((cols[z] - nu[z]).abs()))
            .fold(0.0f64, f64::max);
        DualityCertificate {
            primal: self.value,
            dual,
            gap: (self.value - dual).abs(),
            lipschitz_excess,
            marginal_error,
        }
    }
}

fn check_measure(v: &[f64], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: v.len(),
        });
    }
    if let Some(x) = v.iter().position(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::InvalidDistribution(format!("entry {x} is {}", v[x])));
    }
    Ok(())
}

/// `W1(mu, nu)` under the graph metric.
pub fn wasserstein1(mu: &[f64], nu: &[f64], metric: &MetricData) -> Result<TransportPlan> {
    let n = metric.n();
    check_measure(mu, n)?;
    check_measure(nu, n)?;
    let (mass_mu, mass_nu): (f64, f64) = (mu.iter().sum(), nu.iter().sum());
    if (mass_mu - mass_nu).abs() > 1e-9 {
        return Err(Error::InvalidDistribution(format!(
            "masses differ: {mass_mu} vs {mass_nu}"
        )));
    }
    let sources: Vec<usize> = (0..n).filter(|&x| mu[x] > 0.0).collect();
    let sinks: Vec<usize> = (0..n).filter(|&y| nu[y] > 0.0).collect();
    if sources.is_empty() || sinks.is_empty() {
        return Err(Error::InvalidDistribution("empty support".into()));
    }
    if metric.diameter <= 1 {
        return Ok(discrete_plan(mu, nu));
    }
    simplex_plan(mu, nu, &sources, &sinks, metric)
}

/// On a complete graph every move costs one, so the optimum keeps
/// `min(mu, nu)` in place and ships the surplus; the indicator of the
/// surplus states is an optimal potential.
fn discrete_plan(mu: &[f64], nu: &[f64]) -> TransportPlan {
    let mut plan: Vec<(usize, usize, f64)> = Vec::new();
    let mut surplus: Vec<(usize, f64)> = Vec::new();
    let mut deficit: Vec<(usize, f64)> = Vec::new();
    for (z, (&a, &b)) in mu.iter().zip(nu).enumerate() {
        if a.min(b) > 0.0 {
            plan.push((z, z, a.min(b)));
        }
        if a > b {
            surplus.push((z, a - b));
        } else if b > a {
            deficit.push((z, b - a));
        }
    }
    let (mut i, mut j) = (0, 0);
    let mut value = 0.0;
    while i < surplus.len() && j < deficit.len() {
        let m = surplus[i].1.min(deficit[j].1);
        if m > 0.0 {
            plan.push((surplus[i].0, deficit[j].0, m));
            value += m;
        }
        surplus[i].1 -= m;
        deficit[j].1 -= m;
        if surplus[i].1 <= 0.0 {
            i += 1;
        } else {
            j += 1;
        }
    }
    plan.sort_by_key(|e| (e.0, e.1));
    let dual_potential = mu.iter().zip(nu).map(|(a, b)| if a > b { 1.0 } else { 0.0 }).collect();
    TransportPlan {
        plan,
        value,
        dual_potential,
    }
}

fn simplex_plan(mu: &[f64], nu: &[f64], sources: &[usize], sinks: &[usize], metric: &MetricData) -> Result<TransportPlan> {
    let n = metric.n();
    let supply: Vec<f64> = sources.iter().map(|&x| mu[x]).collect();
    let demand: Vec<f64> = sinks.iter().map(|&y| nu[y]).collect();
    let cost: Vec<f64> = sources
        .iter()
        .flat_map(|&x| sinks.iter().map(move |&y| metric.dist(x, y) as f64))
        .collect();

    let solution = TransportationProblem::new(&supply, &demand, &cost).solve()?;

    let cols = sinks.len();
    let mut plan = Vec::new();
    let mut value = 0.0;
    for (&(i, j), &m) in solution.cells.iter().zip(&solution.flow) {
        if m > 0.0 {
            plan.push((sources[i], sinks[j], m));
            value += m * cost[i * cols + j];
        }
    }
    plan.sort_by_key(|e| (e.0, e.1));
    // c-transform of the sink potentials: min of 1-Lipschitz functions.
    let dual_potential = (0..n)
        .map(|z| {
            sinks
                .iter()
                .zip(&solution.v)
                .map(|(&y, vj)| metric.dist(z, y) as f64 - vj)
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    Ok(TransportPlan {
        plan,
        value,
        dual_potential,
    })
}

/// `W1` between two laws given as sparse `(state, mass)` lists with
/// positive masses; value only.
pub fn transport_cost(
    mu: &[(usize, f64)],
    nu: &[(usize, f64)],
    metric: &MetricData,
) -> Result<f64> {
    if mu.is_empty() || nu.is_empty() {
        return Err(Error::InvalidDistribution("empty support".into()));
    }
    if metric.diameter <= 1 {
        let mut diff = vec![0.0; metric.n()];
        for &(x, m) in mu {
            diff[x] += m;
        }
        for &(y, m) in nu {
            diff[y] -= m;
        }
        return Ok(diff.iter().filter(|d| **d > 0.0).sum());
    }
    let supply: Vec<f64> = mu.iter().map(|e| e.1).collect();
    let demand: Vec<f64> = nu.iter().map(|e| e.1).collect();
    let cost: Vec<f64> = mu
        .iter()
        .flat_map(|&(x, _)| nu.iter().map(move |&(y, _)| metric.dist(x, y) as f64))
        .collect();
    let solution = TransportationProblem::new(&supply, &demand, &cost).solve()?;
    Ok(solution
        .cells
        .iter()
        .zip(&solution.flow)
        .map(|(&(i, j), &m)| m * cost[i * nu.len() + j])
        .sum())
}

struct TransportationProblem<'a> {
    supply: &'a [f64],
    demand: &'a [f64],
    cost: &'a [f64],
    m: usize,
    n: usize,
}

struct Solution {
    cells: Vec<(usize, usize)>,
    flow: Vec<f64>,
    v: Vec<f64>,
}

impl<'a> TransportationProblem<'a> {
    fn new(supply: &'a [f64], demand: &'a [f64], cost: &'a [f64]) -> Self {
        Self {
            supply,
            demand,
            cost,
            m: supply.len(),
            n: demand.len(),
        }
    }

    fn c(&self, i: usize, j: usize) -> f64 {
        self.cost[i * self.n + j]
    }

    /// North-west corner rule; always yields `m + n - 1` basic cells forming
    /// a spanning tree of the bipartite row/column graph.
    fn initial_basis(&self) -> (Vec<(usize, usize)>, Vec<f64>) {
        let mut a = self.supply.to_vec();
        let mut b = self.demand.to_vec();
        let (mut i, mut j) = (0, 0);
        let mut cells = Vec::with_capacity(self.m + self.n - 1);
        let mut flow = Vec::with_capacity(self.m + self.n - 1);
        loop {
            let x = a[i].min(b[j]).max(0.0);
            cells.push((i, j));
            flow.push(x);
            a[i] -= x;
            b[j] -= x;
            if i == self.m - 1 && j == self.n - 1 {
                break;
            }
            if j == self.n - 1 || (i < self.m - 1 && a[i] <= b[j]) {
                i += 1;
            } else {
                j += 1;
            }
        }
        (cells, flow)
    }

    fn potentials(&self, cells: &[(usize, usize)]) -> (Vec<f64>, Vec<f64>) {
        let (m, n) = (self.m, self.n);
        let mut adj = vec![Vec::new(); m + n];
        for (k, &(i, j)) in cells.iter().enumerate() {
            adj[i].push(k);
            adj[m + j].push(k);
        }
        let mut u = vec![f64::NAN; m];
        let mut v = vec![f64::NAN; n];
        u[0] = 0.0;
        let mut queue = VecDeque::from([0usize]);
        while let Some(node) = queue.pop_front() {
            for &k in &adj[node] {
                let (i, j) = cells[k];
                if node < m {
                    if v[j].is_nan() {
                        v[j] = self.c(i, j) - u[i];
                        queue.push_back(m + j);
                    }
                } else if u[i].is_nan() {
                    u[i] = self.c(i, j) - v[j];
                    queue.push_back(i);
                }
            }
        }
        (u, v)
    }

    /// Basic cells on the tree path from column `q` back to row `p`.
    fn tree_path(&self, cells: &[(usize, usize)], p: usize, q: usize) -> Vec<usize> {
        let m = self.m;
        let mut adj = vec![Vec::new(); m + self.n];
        for (k, &(i, j)) in cells.iter().enumerate() {
            adj[i].push(k);
            adj[m + j].push(k);
        }
        let mut parent: Vec<Option<usize>> = vec![None; m + self.n];
        let mut seen = vec![false; m + self.n];
        seen[p] = true;
        let mut queue = VecDeque::from([p]);
        let target = m + q;
        while let Some(node) = queue.pop_front() {
            if node == target {
                break;
            }
            for &k in &adj[node] {
                let (i, j) = cells[k];
                let other = if node < m { m + j } else { i };
                if !seen[other] {
                    seen[other] = true;
                    parent[other] = Some(k);
                    queue.push_back(other);
                }
            }
        }
        let mut path = Vec::new();
        let mut node = target;
        while node != p {
            let k = parent[node].expect("basis is a spanning tree");
            path.push(k);
            let (i, j) = cells[k];
            node = if node < m { m + j } else { i };
        }
        path
    }

    fn solve(&self) -> Result<Solution> {
        let (m, n) = (self.m, self.n);
        let (mut cells, mut flow) = self.initial_basis();
        let mut basic = vec![false; m * n];
        for &(i, j) in &cells {
            basic[i * n + j] = true;
        }
        let max_iter = 100_000 + 50 * m * n;
        let mut degenerate_run = 0usize;
        for _ in 0..max_iter {
            let (u, v) = self.potentials(&cells);
            let bland = degenerate_run > 2 * (m + n);
            let mut entering = None;
            let mut best = -REDUCED_COST_TOL;
            'scan: for i in 0..m {
                for j in 0..n {
                    if basic[i * n + j] {
                        continue;
                    }
                    let r = self.c(i, j) - u[i] - v[j];
                    if r < best {
                        entering = Some((i, j));
                        if bland {
                            break 'scan;
                        }
                        best = r;
                    }
                }
            }
            let Some((p, q)) = entering else {
                flow.iter_mut().for_each(|x| *x = x.max(0.0));
                return Ok(Solution { cells, flow, v });
            };
            let path = self.tree_path(&cells, p, q);
            // Path cells alternate -, +, -, ... starting next to column q.
            let mut theta = f64::INFINITY;
            let mut leaving = usize::MAX;
            for &k in path.iter().step_by(2) {
                let key = cells[k].0 * n + cells[k].1;
                let better = flow[k] < theta
                    || (flow[k] == theta
                        && key < cells[leaving].0 * n + cells[leaving].1);
                if better {
                    theta = flow[k];
                    leaving = k;
                }
            }
            let theta = theta.max(0.0);
            for (pos, &k) in path.iter().enumerate() {
                if pos % 2 == 0 {
                    flow[k] -= theta;
                } else {
                    flow[k] += theta;
                }
            }
            degenerate_run = if theta > 0.0 { 0 } else { degenerate_run + 1 };
            let (li, lj) = cells[leaving];
            basic[li * n + lj] = false;
            basic[p * n + q] = true;
            cells[leaving] = (p, q);
            flow[leaving] = theta;
        }
        Err(Error::Numerical("transportation simplex hit its iteration cap".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{metric_data, StochasticMatrix};

    fn path_metric(n: usize) -> MetricData {
        let mut e = vec![0.0; n * n];
        for x in 0..n {
            let nb: Vec<usize> = [x.wrapping_sub(1), x + 1].into_iter().filter(|&y| y < n).collect();
            for &y in &nb {
                e[x * n + y] = 1.0 / nb.len() as f64;
            }
        }
        metric_data(&StochasticMatrix::new(n, e).unwrap()).unwrap()
    }

    #[test]
    fn complete_graph_shortcut_matches_simplex() {
        let n = 7;
        let e: Vec<f64> = (0..n * n).map(|k| if k / n == k % n { 0.0 } else { 1.0 / (n - 1) as f64 }).collect();
        let metric = metric_data(&StochasticMatrix::new(n, e).unwrap()).unwrap();
        assert_eq!(metric.diameter, 1);
        let mut seed = 11u64;
        let mut next = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let u = (seed >> 11) as f64 / (1u64 << 53) as f64;
            if u < 0.3 { 0.0 } else { u }
        };
        for _ in 0..50 {
            let mut mu: Vec<f64> = (0..n).map(|_| next()).collect();
            let mut nu: Vec<f64> = (0..n).map(|_| next()).collect();
            mu[0] += 0.1;
            nu[n - 1] += 0.1;
            let (a, b): (f64, f64) = (mu.iter().sum(), nu.iter().sum());
            mu.iter_mut().for_each(|v| *v /= a);
            nu.iter_mut().for_each(|v| *v /= b);
            let sources: Vec<usize> = (0..n).filter(|&x| mu[x] > 0.0).collect();
            let sinks: Vec<usize> = (0..n).filter(|&y| nu[y] > 0.0).collect();
            let simplex = simplex_plan(&mu, &nu, &sources, &sinks, &metric).unwrap();
            let closed = wasserstein1(&mu, &nu, &metric).unwrap();
            assert!((closed.value - simplex.value).abs() < 1e-12);
            let cert = closed.certificate(&mu, &nu, &metric);
            assert!(cert.gap < 1e-12 && cert.lipschitz_excess <= 0.0 && cert.marginal_error < 1e-12);
            let sparse = |v: &[f64]| -> Vec<(usize, f64)> { v.iter().copied().enumerate().filter(|e| e.1 > 0.0).collect() };
            let value = transport_cost(&sparse(&mu), &sparse(&nu), &metric).unwrap();
            assert!((value - simplex.value).abs() < 1e-12);
        }
    }

    #[test]
    fn equal_measures_cost_nothing() {
        let metric = path_metric(4);
        let mu = [0.1, 0.2, 0.3, 0.4];
        let plan = wasserstein1(&mu, &mu, &metric).unwrap();
        assert_eq!(plan.value, 0.0);
        assert!(plan.plan.iter().all(|&(x, y, _)| x == y));
    }

    #[test]
    fn point_masses_cost_their_distance() {
        let metric = path_metric(5);
        let mut mu = [0.0; 5];
        let mut nu = [0.0; 5];
        mu[0] = 1.0;
        nu[4] = 1.0;
        let plan = wasserstein1(&mu, &nu, &metric).unwrap();
        assert_eq!(plan.value, 4.0);
        let cert = plan.certificate(&mu, &nu, &metric);
        assert!(cert.gap < 1e-12 && cert.lipschitz_excess <= 1e-12);
    }

    #[test]
    fn line_transport_matches_cdf_formula() {
        // On a path W1 is the L1 distance of the cumulative distributions.
        let metric = path_metric(5);
        let mu = [0.3, 0.0, 0.2, 0.4, 0.1];
        let nu = [0.1, 0.4, 0.1, 0.0, 0.4];
        let mut cdf = 0.0;
        let mut expected = 0.0;
        for x in 0..5 {
            cdf += mu[x] - nu[x];
            expected += f64::abs(cdf);
        }
        let plan = wasserstein1(&mu, &nu, &metric).unwrap();
        assert!((plan.value - expected).abs() < 1e-12);
    }

    #[test]
    fn mismatched_lengths_are_rejected() {
        let metric = path_metric(3);
        assert!(matches!(
            wasserstein1(&[1.0, 0.0], &[0.0, 0.0, 1.0], &metric),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
