use std::collections::BTreeMap;

use rayon::prelude::*;

use super::transport::transport_cost;
use crate::chain::{metric_data, MetricData, StochasticMatrix};
use crate::error::{Error, Result};

/// One-step Ollivier curvature `1 - W1(P(x,.), P(y,.))` on every edge.
#[derive(Debug, Clone, PartialEq)]
pub struct OllivierCurvature {
    /// Keyed by `(x, y)` with `x < y`.
    pub edges: BTreeMap<(usize, usize), f64>,
    pub min: f64,
}

pub fn ollivier_curvature(p: &StochasticMatrix) -> Result<OllivierCurvature> {
    if !p.has_symmetric_support() {
        return Err(Error::AsymmetricSupport);
    }
    let metric = metric_data(p)?;
    ollivier_with_metric(p, &metric)
}

pub fn ollivier_with_metric(p: &StochasticMatrix, metric: &MetricData) -> Result<OllivierCurvature> {
    let values: Vec<((usize, usize), f64)> = p
        .edges()
        .into_par_iter()
        .map(|(x, y)| {
            let w = transport_cost(p.support_row(x), p.support_row(y), metric)?;
            Ok(((x, y), 1.0 - w))
        })
        .collect::<Result<_>>()?;
    let min = values.iter().map(|e| e.1).fold(f64::INFINITY, f64::min);
    Ok(OllivierCurvature {
        edges: values.into_iter().collect(),
        min,
    })
}
