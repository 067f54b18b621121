//! Plain-text chain files.
//!
//! ```text
//! # comment
//! 3
//! labels: a b c
//! 0.5 0.5 0
//! 0.25 0.5 0.25
//! 0 0.5 0.5
//! ```

use std::fmt::Write as _;

use super::matrix::{validate_entries, Diagnostics, StochasticMatrix};
use crate::error::{Error, Result};

/// Parsed contents of a chain file before any stochasticity check.
#[derive(Debug, Clone, PartialEq)]
pub struct RawChain {
    pub n: usize,
    pub entries: Vec<f64>,
    pub labels: Option<Vec<String>>,
}

impl RawChain {
    pub fn diagnostics(&self) -> Diagnostics {
        validate_entries(self.n, &self.entries).expect("shape checked by parser")
    }

    pub fn into_matrix(self) -> Result<StochasticMatrix> {
        let m = StochasticMatrix::new(self.n, self.entries)?;
        match self.labels {
            Some(labels) => m.with_labels(labels),
            None => Ok(m),
        }
    }
}

pub fn parse_chain(text: &str) -> Result<RawChain> {
    let mut n = None;
    let mut labels = None;
    let mut entries = Vec::new();
    let mut rows = 0usize;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| Error::Parse {
            line: line_no,
            message,
        };
        if let Some(rest) = line.strip_prefix("labels:") {
            if labels.is_some() {
                return Err(err("duplicate labels line".into()));
            }
            labels = Some(rest.split_whitespace().map(str::to_owned).collect::<Vec<_>>());
            continue;
        }
        let Some(size) = n else {
            let size: usize = line
                .parse()
                .map_err(|_| err(format!("expected state count, found {line:?}")))?;
            if size < 2 {
                return Err(err(format!("need at least 2 states, got {size}")));
            }
            n = Some(size);
            continue;
        };
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|_| err(format!("bad probability {tok:?}")))
            })
            .collect::<Result<_>>()?;
        if row.len() != size {
            return Err(err(format!("expected {size} entries, found {}", row.len())));
        }
        if rows == size {
            return Err(err("too many rows".into()));
        }
        entries.extend(row);
        rows += 1;
    }
    let n = n.ok_or(Error::Parse {
        line: 0,
        message: "missing state count".into(),
    })?;
    if rows != n {
        return Err(Error::Parse {
            line: 0,
            message: format!("expected {n} rows, found {rows}"),
        });
    }
    if let Some(l) = &labels {
        if l.len() != n {
            return Err(Error::Parse {
                line: 0,
                message: format!("expected {n} labels, found {}", l.len()),
            });
        }
    }
    Ok(RawChain { n, entries, labels })
}

/// Writes a matrix in the chain-file format (17 significant digits).
pub fn format_chain(p: &StochasticMatrix) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{}", p.n());
    if let Some(labels) = p.labels() {
        let _ = writeln!(s, "labels: {}", labels.join(" "));
    }
    for x in 0..p.n() {
        let row: Vec<String> = p.row(x).iter().map(|v| format!("{v:.16e}")).collect();
        let _ = writeln!(s, "{}", row.join(" "));
    }
    s
}
