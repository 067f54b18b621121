use std::collections::VecDeque;
use std::fmt::Write as _;
use std::ops::Index;
use std::sync::OnceLock;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Row sums must match 1 to this precision.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// A probability vector over the states of a chain.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty".into()));
        }
        if let Some(i) = probs.iter().position(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidDistribution(format!(
                "entry {i} is {}",
                probs[i]
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > ROW_SUM_TOL {
            return Err(Error::InvalidDistribution(format!("mass {total}")));
        }
        Ok(Self { probs })
    }

    /// Wraps a vector whose mass deficit is controlled by the caller, such as
    /// a truncated heat-kernel row.
    pub(crate) fn from_vec_unchecked(probs: Vec<f64>) -> Self {
        Self { probs }
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            probs: vec![1.0 / n as f64; n],
        }
    }

    pub fn point_mass(n: usize, state: usize) -> Self {
        let mut probs = vec![0.0; n];
        probs[state] = 1.0;
        Self { probs }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.probs
    }

    pub fn mass(&self) -> f64 {
        self.probs.iter().sum()
    }
}

impl Index<usize> for Distribution {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.probs[i]
    }
}

impl AsRef<[f64]> for Distribution {
    fn as_ref(&self) -> &[f64] {
        &self.probs
    }
}

/// Report produced by [`validate_entries`]; never an error by itself.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub n: usize,
    /// `sum_y P(x,y) - 1` per row.
    pub row_residuals: Vec<f64>,
    pub max_row_residual: f64,
    pub negative_entries: usize,
    pub non_finite_entries: usize,
    pub irreducible: bool,
    pub symmetric_support: bool,
    /// At least three states, the non-degeneracy assumption of the theory.
    pub at_least_three_states: bool,
}

impl Diagnostics {
    /// Entries form a stochastic matrix (nonnegative, rows sum to one).
    pub fn is_stochastic(&self) -> bool {
        self.negative_entries == 0
            && self.non_finite_entries == 0
            && self.max_row_residual <= ROW_SUM_TOL
    }

    /// Stochastic, irreducible and with symmetric support.
    pub fn ok(&self) -> bool {
        self.is_stochastic() && self.irreducible && self.symmetric_support
    }

    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.non_finite_entries > 0 {
            out.push(format!("{} non-finite entries", self.non_finite_entries));
        }
        if self.negative_entries > 0 {
            out.push(format!("{} negative entries", self.negative_entries));
        }
        if self.max_row_residual > ROW_SUM_TOL {
            let (row, res) = self
                .row_residuals
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
                .map(|(i, r)| (i, *r))
                .unwrap_or((0, 0.0));
            out.push(format!("row {row} sums to 1{res:+e}"));
        }
        if !self.irreducible {
            out.push("not irreducible".into());
        }
        if !self.symmetric_support {
            out.push("support not symmetric".into());
        }
        out
    }
}

/// Diagnose a raw row-major `n x n` array without constructing a matrix.
pub fn validate_entries(n: usize, entries: &[f64]) -> Result<Diagnostics> {
    if entries.len() != n * n {
        return Err(Error::DimensionMismatch {
            expected: n * n,
            got: entries.len(),
        });
    }
    let row_residuals: Vec<f64> = entries
        .chunks(n.max(1))
        .map(|row| row.iter().sum::<f64>() - 1.0)
        .collect();
    let max_row_residual = row_residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    let negative_entries = entries.iter().filter(|p| **p < 0.0).count();
    let non_finite_entries = entries.iter().filter(|p| !p.is_finite()).count();
    let adjacency = out_neighbors(n, entries);
    Ok(Diagnostics {
        n,
        row_residuals,
        max_row_residual,
        negative_entries,
        non_finite_entries,
        irreducible: strongly_connected(n, &adjacency),
        symmetric_support: support_is_symmetric(n, entries),
        at_least_three_states: n >= 3,
    })
}

fn out_neighbors(n: usize, entries: &[f64]) -> Vec<Vec<usize>> {
    (0..n)
        .map(|x| (0..n).filter(|&y| entries[x * n + y] > 0.0).collect())
        .collect()
}

fn support_is_symmetric(n: usize, entries: &[f64]) -> bool {
    (0..n).all(|x| (x + 1..n).all(|y| (entries[x * n + y] > 0.0) == (entries[y * n + x] > 0.0)))
}

fn reaches_all(n: usize, start: usize, adjacency: &[Vec<usize>]) -> bool {
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    let mut count = 1;
    while let Some(x) = queue.pop_front() {
        for &y in &adjacency[x] {
            if !seen[y] {
                seen[y] = true;
                count += 1;
                queue.push_back(y);
            }
        }
    }
    count == n
}

/// Kosaraju's single-component test: state 0 reaches everything in the
/// positive-entry digraph and in its reverse.
fn strongly_connected(n: usize, adjacency: &[Vec<usize>]) -> bool {
    if n == 0 {
        return false;
    }
    let mut reverse = vec![Vec::new(); n];
    for (x, ys) in adjacency.iter().enumerate() {
        for &y in ys {
            reverse[y].push(x);
        }
    }
    reaches_all(n, 0, adjacency) && reaches_all(n, 0, &reverse)
}

/// Row-stochastic transition matrix on `n >= 2` states, stored dense.
#[derive(Debug)]
pub struct StochasticMatrix {
    n: usize,
    entries: Vec<f64>,
    labels: Option<Vec<String>>,
    irreducible: bool,
    symmetric_support: bool,
    /// Positive entries of each row, used for vector-matrix products.
    rows: Vec<Vec<(usize, f64)>>,
    hash: OnceLock<[u8; 32]>,
}

impl Clone for StochasticMatrix {
    fn clone(&self) -> Self {
        Self {
            n: self.n,
            entries: self.entries.clone(),
            labels: self.labels.clone(),
            irreducible: self.irreducible,
            symmetric_support: self.symmetric_support,
            rows: self.rows.clone(),
            hash: self.hash.clone(),
        }
    }
}

impl PartialEq for StochasticMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.entries == other.entries && self.labels == other.labels
    }
}

impl StochasticMatrix {
    /// Builds a matrix from row-major entries, rejecting anything that is not
    /// stochastic to within [`ROW_SUM_TOL`].
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidMatrix(format!("need at least 2 states, got {n}")));
        }
        let diag = validate_entries(n, &entries)?;
        if !diag.is_stochastic() {
            return Err(Error::InvalidMatrix(diag.problems().join("; ")));
        }
        let rows = (0..n)
            .map(|x| {
                (0..n)
                    .filter_map(|y| {
                        let p = entries[x * n + y];
                        (p > 0.0).then_some((y, p))
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            n,
            entries,
            labels: None,
            irreducible: diag.irreducible,
            symmetric_support: diag.symmetric_support,
            rows,
            hash: OnceLock::new(),
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: bad.len(),
            });
        }
        Self::new(n, rows.concat())
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.entries[x * self.n + y]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.entries[x * self.n..(x + 1) * self.n]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn is_irreducible(&self) -> bool {
        self.irreducible
    }

    pub fn has_symmetric_support(&self) -> bool {
        self.symmetric_support
    }

    /// Positive entries `(y, P(x,y))` of row `x`, including the diagonal.
    pub fn support_row(&self, x: usize) -> &[(usize, f64)] {
        &self.rows[x]
    }

    /// Neighbors `y != x` with `P(x,y) > 0`.
    pub fn neighbors(&self, x: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.rows[x].iter().copied().filter(move |&(y, _)| y != x)
    }

    /// Support edges `x < y` (both directions positive when support is symmetric).
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .flat_map(|x| {
                self.rows[x]
                    .iter()
                    .filter(move |&&(y, _)| y > x)
                    .map(move |&(y, _)| (x, y))
            })
            .collect()
    }

    pub fn validate(&self) -> Diagnostics {
        validate_entries(self.n, &self.entries).expect("shape checked at construction")
    }

    /// `v P` for a row vector `v`.
    pub fn left_mul(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.left_mul_into(v, &mut out);
        out
    }

    pub(crate) fn left_mul_into(&self, v: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (x, &vx) in v.iter().enumerate() {
            if vx == 0.0 {
                continue;
            }
            for &(y, p) in &self.rows[x] {
                out[y] += vx * p;
            }
        }
    }

    /// `P f` for a column vector `f`.
    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|&(y, p)| p * f[y]).sum())
            .collect()
    }

    /// Column sums all equal one, so the uniform law is invariant.
    pub fn is_doubly_stochastic(&self) -> bool {
        let mut cols = vec![0.0; self.n];
        for row in &self.rows {
            for &(y, p) in row {
                cols[y] += p;
            }
        }
        cols.iter().all(|c| (c - 1.0).abs() <= ROW_SUM_TOL)
    }

    /// Canonical decimal serialization: `n`, then every entry at 17
    /// significant digits in row-major order.
    pub fn canonical_text(&self) -> String {
        let mut s = String::with_capacity(self.n * self.n * 24 + 16);
        let _ = writeln!(s, "{}", self.n);
        for row in self.entries.chunks(self.n) {
            for (j, p) in row.iter().enumerate() {
                if j > 0 {
                    s.push(' ');
                }
                let _ = write!(s, "{p:.16e}");
            }
            s.push('\n');
        }
        s
    }

    /// SHA-256 of [`Self::canonical_text`].
    pub fn content_hash(&self) -> [u8; 32] {
        *self.hash.get_or_init(|| {
            let mut hasher = Sha256::new();
            hasher.update(self.canonical_text().as_bytes());
            hasher.finalize().into()
        })
    }

    pub fn content_hash_hex(&self) -> String {
        self.content_hash().iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}
