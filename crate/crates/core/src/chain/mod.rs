//! Finite chains: transition matrices, invariant law, support metric and
//! heat kernel.

mod file;
mod heat;
mod matrix;
mod metric;
mod stationary;

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

pub use file::{format_chain, parse_chain, RawChain};
pub use heat::{
    evolve, heat_kernel, heat_kernel_row, heat_kernel_rows, kernel_apply, poisson_weights,
    DEFAULT_TOL, MAX_TOL,
};
pub use matrix::{validate_entries, Diagnostics, Distribution, StochasticMatrix, ROW_SUM_TOL};
pub use metric::{metric_data, MetricData};
pub use stationary::{stationary, stationary_residual, STATIONARY_RESIDUAL};

use crate::error::Result;
use crate::spectral::{relaxation_time, SpectralReport};

/// Which heat-kernel rows a worst-case maximization scans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StartSet {
    All,
    /// A single representative start; exact for vertex-transitive chains.
    Single(usize),
}

/// Cache key for a block of heat-kernel rows.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct KernelKey {
    pub matrix_hash: [u8; 32],
    pub t_bits: u64,
    pub tol_bits: u64,
    pub starts: StartSet,
}

impl KernelKey {
    pub fn new(matrix: &StochasticMatrix, t: f64, tol: f64, starts: StartSet) -> Self {
        Self {
            matrix_hash: matrix.content_hash(),
            t_bits: t.to_bits(),
            tol_bits: tol.to_bits(),
            starts,
        }
    }
}

/// Storage for heat-kernel rows. Implementations must tolerate concurrent
/// readers alongside a writer.
pub trait KernelCache: Send + Sync {
    fn get(&self, key: &KernelKey) -> Option<Vec<Vec<f64>>>;
    fn put(&self, key: &KernelKey, rows: &[Vec<f64>]);
}

/// In-process cache behind a read-write lock.
#[derive(Default)]
pub struct MemoryCache {
    map: RwLock<HashMap<KernelKey, Vec<Vec<f64>>>>,
}

impl MemoryCache {
    pub fn len(&self) -> usize {
        self.map.read().map(|m| m.len()).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl KernelCache for MemoryCache {
    fn get(&self, key: &KernelKey) -> Option<Vec<Vec<f64>>> {
        self.map.read().ok()?.get(key).cloned()
    }

    fn put(&self, key: &KernelKey, rows: &[Vec<f64>]) {
        if let Ok(mut map) = self.map.write() {
            map.entry(key.clone()).or_insert_with(|| rows.to_vec());
        }
    }
}

/// An irreducible chain together with its invariant law and lazily computed
/// geometry. Immutable once built; safe to share across threads.
pub struct Chain {
    matrix: StochasticMatrix,
    stationary: Distribution,
    transitive: bool,
    cache: Option<Arc<dyn KernelCache>>,
    metric: OnceLock<Result<MetricData>>,
    spectral: OnceLock<Result<SpectralReport>>,
}

impl fmt::Debug for Chain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Chain")
            .field("n", &self.n())
            .field("transitive", &self.transitive)
            .field("cached", &self.cache.is_some())
            .finish()
    }
}

impl Chain {
    /// Fails with `NotIrreducible` for reducible matrices.
    pub fn new(matrix: StochasticMatrix) -> Result<Self> {
        let stationary = stationary(&matrix)?;
        Ok(Self {
            matrix,
            stationary,
            transitive: false,
            cache: None,
            metric: OnceLock::new(),
            spectral: OnceLock::new(),
        })
    }

    /// Declares the chain vertex-transitive so worst cases over starting
    /// states are read off state 0 alone.
    pub fn with_transitivity(mut self, transitive: bool) -> Self {
        self.transitive = transitive;
        self
    }

    pub fn with_cache(mut self, cache: Arc<dyn KernelCache>) -> Self {
        self.cache = Some(cache);
        self
    }

    pub fn matrix(&self) -> &StochasticMatrix {
        &self.matrix
    }

    pub fn pi(&self) -> &Distribution {
        &self.stationary
    }

    pub fn n(&self) -> usize {
        self.matrix.n()
    }

    pub fn is_transitive(&self) -> bool {
        self.transitive
    }

    pub fn start_set(&self) -> StartSet {
        if self.transitive {
            StartSet::Single(0)
        } else {
            StartSet::All
        }
    }

    pub fn starts(&self) -> Vec<usize> {
        match self.start_set() {
            StartSet::All => (0..self.n()).collect(),
            StartSet::Single(o) => vec![o],
        }
    }

    pub fn metric(&self) -> Result<&MetricData> {
        self.metric
            .get_or_init(|| metric_data(&self.matrix))
            .as_ref()
            .map_err(Clone::clone)
    }

    pub fn spectral(&self) -> Result<&SpectralReport> {
        self.spectral
            .get_or_init(|| relaxation_time(&self.matrix, &self.stationary))
            .as_ref()
            .map_err(Clone::clone)
    }

    pub fn t_rel(&self) -> Result<f64> {
        self.spectral().map(|s| s.t_rel)
    }

    /// Heat-kernel rows for every state in [`Self::starts`], through the
    /// cache when one is attached.
    pub fn start_rows(&self, t: f64, tol: f64) -> Result<Vec<Vec<f64>>> {
        let key = self
            .cache
            .as_ref()
            .map(|_| KernelKey::new(&self.matrix, t, tol, self.start_set()));
        if let (Some(cache), Some(key)) = (&self.cache, &key) {
            if let Some(rows) = cache.get(key) {
                return Ok(rows);
            }
        }
        let rows = heat_kernel_rows(&self.matrix, &self.starts(), t, tol)?;
        if let (Some(cache), Some(key)) = (&self.cache, &key) {
            cache.put(key, &rows);
        }
        Ok(rows)
    }

    pub fn heat_kernel(&self, t: f64, tol: f64) -> Result<Vec<Distribution>> {
        heat_kernel(&self.matrix, t, tol)
    }
}
