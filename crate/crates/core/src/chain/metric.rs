use std::collections::VecDeque;

use super::matrix::StochasticMatrix;
use crate::error::{Error, Result};

/// Graph metric of the support, its diameter and the sparsity parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricData {
    n: usize,
    dist: Vec<u32>,
    pub diameter: u32,
    /// `max 1/P(x,y)` over adjacent pairs `x ~ y`.
    pub delta: f64,
}

impl MetricData {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dist(&self, x: usize, y: usize) -> u32 {
        self.dist[x * self.n + y]
    }

    pub fn row(&self, x: usize) -> &[u32] {
        &self.dist[x * self.n..(x + 1) * self.n]
    }
}

/// All-pairs BFS distances on the support graph.
pub fn metric_data(p: &StochasticMatrix) -> Result<MetricData> {
    if !p.has_symmetric_support() {
        return Err(Error::AsymmetricSupport);
    }
    let n = p.n();
    let mut dist = vec![u32::MAX; n * n];
    for source in 0..n {
        let row = &mut dist[source * n..(source + 1) * n];
        row[source] = 0;
        let mut queue = VecDeque::from([source]);
        while let Some(x) = queue.pop_front() {
            let d = row[x] + 1;
            for (y, _) in p.neighbors(x) {
                if row[y] == u32::MAX {
                    row[y] = d;
                    queue.push_back(y);
                }
            }
        }
    }
    if dist.contains(&u32::MAX) {
        return Err(Error::NotIrreducible);
    }
    let diameter = dist.iter().copied().max().unwrap_or(0);
    let delta = (0..n)
        .flat_map(|x| p.neighbors(x).map(|(_, w)| 1.0 / w))
        .fold(0.0f64, f64::max);
    Ok(MetricData {
        n,
        dist,
        diameter,
        delta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn directed_cycle_is_rejected() {
        let p = StochasticMatrix::new(3, vec![0., 1., 0., 0., 0., 1., 1., 0., 0.]).unwrap();
        assert_eq!(metric_data(&p), Err(Error::AsymmetricSupport));
    }

    #[test]
    fn path_of_three() {
        let p = StochasticMatrix::new(3, vec![0.5, 0.5, 0., 0.25, 0.5, 0.25, 0., 0.5, 0.5]).unwrap();
        let m = metric_data(&p).unwrap();
        assert_eq!(m.dist(0, 2), 2);
        assert_eq!(m.diameter, 2);
        assert_eq!(m.delta, 4.0);
    }
}
