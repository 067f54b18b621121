//! Chain families: abelian Cayley walks (fixed and random generators),
//! hypercubes, cycles, complete graphs, birth-death chains, a walk on the
//! symmetric group, and the perturbation towards equilibrium.

mod group;
mod spec;

use std::collections::HashMap;
use std::fmt;

pub use group::{abelian_cayley, random_abelian_cayley, GroupSpec, MAX_REDRAWS};
pub use spec::{expand_range, parse_family, FamilySpec, GenSpec, Theta};

use crate::chain::{stationary, Chain, StochasticMatrix};
use crate::error::{Error, Result};

/// Largest state space any family builds by default.
pub const DEFAULT_STATE_CAP: usize = 5000;
/// `6!`, the size limit of the symmetric-group walk.
pub const SYMMETRIC_GROUP_CAP: usize = 720;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CurvatureClaim {
    /// Walk on an abelian group.
    NonnegAbelian,
    /// Known non-negatively curved for another reason.
    NonnegOther,
    Unknown,
}

impl CurvatureClaim {
    pub fn is_nonnegative(self) -> bool {
        !matches!(self, Self::Unknown)
    }
}

impl fmt::Display for CurvatureClaim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::NonnegAbelian => "nonneg-abelian",
            Self::NonnegOther => "nonneg-other",
            Self::Unknown => "unknown",
        })
    }
}

/// A generated chain with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainInstance {
    pub matrix: StochasticMatrix,
    pub family: String,
    pub params: Vec<(String, String)>,
    pub transitive: bool,
    pub curvature_claim: CurvatureClaim,
}

impl ChainInstance {
    pub fn n(&self) -> usize {
        self.matrix.n()
    }

    pub fn param(&self, key: &str) -> Option<&str> {
        self.params.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    fn with_param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.push((key.into(), value.to_string()));
        self
    }

    pub fn to_chain(&self) -> Result<Chain> {
        Ok(Chain::new(self.matrix.clone())?.with_transitivity(self.transitive))
    }
}

pub(crate) fn check_cap(size: usize, cap: usize) -> Result<()> {
    if size > cap {
        Err(Error::StateCapExceeded { size, cap })
    } else {
        Ok(())
    }
}

pub(crate) fn hypercube_capped(d: usize, lazy: f64, cap: usize) -> Result<ChainInstance> {
    if d == 0 {
        return Err(Error::InvalidParameter("hypercube dimension must be positive".into()));
    }
    if !(0.0..1.0).contains(&lazy) {
        return Err(Error::InvalidParameter(format!("laziness {lazy} is not in [0,1)")));
    }
    if d >= usize::BITS as usize - 1 {
        return Err(Error::StateCapExceeded { size: usize::MAX, cap });
    }
    check_cap(1 << d, cap)?;
    let group = GroupSpec::new(vec![2; d])?;
    let mut gens = Vec::with_capacity(d);
    for i in 0..d {
        let mut e = vec![0; d];
        e[i] = 1;
        gens.push(e);
    }
    let base = group::cayley_capped(&group, &gens, cap)?;
    let n = base.n();
    let mut entries = base.matrix.entries().to_vec();
    if lazy > 0.0 {
        for (i, v) in entries.iter_mut().enumerate() {
            *v *= 1.0 - lazy;
            if i / n == i % n {
                *v += lazy;
            }
        }
    }
    Ok(ChainInstance {
        matrix: StochasticMatrix::new(n, entries)?,
        family: "hypercube".into(),
        params: vec![("d".into(), d.to_string()), ("lazy".into(), lazy.to_string())],
        transitive: true,
        curvature_claim: CurvatureClaim::NonnegAbelian,
    })
}

/// Walk on `{0,1}^d` flipping a uniform coordinate, held with probability
/// `lazy`.
pub fn hypercube(d: usize, lazy: f64) -> Result<ChainInstance> {
    hypercube_capped(d, lazy, DEFAULT_STATE_CAP)
}

pub(crate) fn cycle_capped(n: usize, cap: usize) -> Result<ChainInstance> {
    if n < 2 {
        return Err(Error::InvalidParameter("cycle needs at least 2 states".into()));
    }
    let group = GroupSpec::cyclic(n)?;
    let gens = vec![vec![1], vec![n - 1]];
    let mut inst = group::cayley_capped(&group, &gens, cap)?;
    inst.family = "cycle".into();
    inst.params = vec![("n".into(), n.to_string())];
    Ok(inst)
}

/// Simple random walk on the `n`-cycle.
pub fn cycle(n: usize) -> Result<ChainInstance> {
    cycle_capped(n, DEFAULT_STATE_CAP)
}

pub(crate) fn complete_capped(n: usize, cap: usize) -> Result<ChainInstance> {
    if n < 2 {
        return Err(Error::InvalidParameter("complete graph needs at least 2 states".into()));
    }
    let group = GroupSpec::cyclic(n)?;
    let gens: Vec<Vec<usize>> = (1..n).map(|a| vec![a]).collect();
    let mut inst = group::cayley_capped(&group, &gens, cap)?;
    inst.family = "complete".into();
    inst.params = vec![("n".into(), n.to_string())];
    Ok(inst)
}

/// Simple random walk on `K_n`, viewed as the Cayley walk on `Z_n` with
/// every non-zero step.
pub fn complete_graph(n: usize) -> Result<ChainInstance> {
    complete_capped(n, DEFAULT_STATE_CAP)
}

pub(crate) fn birth_death_capped(up: &[f64], down: &[f64], cap: usize) -> Result<ChainInstance> {
    if up.is_empty() || up.len() != down.len() {
        return Err(Error::InvalidParameter(format!(
            "need equally many up and down rates, got {} and {}",
            up.len(),
            down.len()
        )));
    }
    let n = up.len() + 1;
    check_cap(n, cap)?;
    if let Some(r) = up.iter().chain(down).find(|&&r| !(r > 0.0 && r <= 1.0)) {
        return Err(Error::InvalidParameter(format!("rate {r} is not in (0,1]")));
    }
    let mut entries = vec![0.0; n * n];
    for x in 0..n {
        let go_up = if x + 1 < n { up[x] } else { 0.0 };
        let go_down = if x > 0 { down[x - 1] } else { 0.0 };
        let stay = 1.0 - go_up - go_down;
        if stay < -1e-12 {
            return Err(Error::InvalidParameter(format!("rates out of state {x} exceed one")));
        }
        if x + 1 < n {
            entries[x * n + x + 1] = go_up;
        }
        if x > 0 {
            entries[x * n + x - 1] = go_down;
        }
        entries[x * n + x] = stay.max(0.0);
    }
    Ok(ChainInstance {
        matrix: StochasticMatrix::new(n, entries)?,
        family: "bd".into(),
        params: vec![("n".into(), n.to_string())],
        transitive: false,
        curvature_claim: CurvatureClaim::NonnegOther,
    })
}

/// Birth-death chain on `{0..=up.len()}`: `P(x,x+1) = up[x]`,
/// `P(x+1,x) = down[x]`, reflecting ends, holding the rest.
pub fn birth_death(up: &[f64], down: &[f64]) -> Result<ChainInstance> {
    birth_death_capped(up, down, DEFAULT_STATE_CAP)
}

/// `(1 - theta) P + theta 1 pi'`. Keeps `pi`, transitivity and the group
/// structure; `Delta` grows to at least `1 / (theta min pi)`.
pub fn perturb_toward_uniform(inner: &ChainInstance, theta: f64) -> Result<ChainInstance> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::InvalidParameter(format!("theta {theta} is not in [0,1]")));
    }
    let p = &inner.matrix;
    let n = p.n();
    let pi = stationary(p)?;
    let entries: Vec<f64> = p
        .entries()
        .iter()
        .enumerate()
        .map(|(i, &v)| (1.0 - theta) * v + theta * pi[i % n])
        .collect();
    let min_pi = pi.as_slice().iter().copied().fold(f64::INFINITY, f64::min);
    let claim = match inner.curvature_claim {
        CurvatureClaim::NonnegAbelian => CurvatureClaim::NonnegAbelian,
        _ => CurvatureClaim::Unknown,
    };
    let mut params = inner.params.clone();
    params.push(("theta".into(), theta.to_string()));
    let inst = ChainInstance {
        matrix: StochasticMatrix::new(n, entries)?,
        family: format!("perturb({})", inner.family),
        params,
        transitive: inner.transitive,
        curvature_claim: claim,
    };
    Ok(if theta > 0.0 {
        inst.with_param("delta_floor", 1.0 / (theta * min_pi))
    } else {
        inst
    })
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).expect("pivot has a successor");
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Non-trivial cycle lengths in decreasing order.
pub fn cycle_type(perm: &[usize]) -> Vec<usize> {
    let mut seen = vec![false; perm.len()];
    let mut lengths = Vec::new();
    for start in 0..perm.len() {
        let mut len = 0;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = perm[i];
            len += 1;
        }
        if len > 1 {
            lengths.push(len);
        }
    }
    lengths.sort_unstable_by(|a, b| b.cmp(a));
    lengths
}

/// Uniform step in a conjugacy class of `S_k`, given by its non-trivial
/// cycle lengths (`[2]` for transpositions). States are permutations in
/// lexicographic order.
pub fn conjugacy_walk(k: usize, class: &[usize]) -> Result<ChainInstance> {
    if k < 2 {
        return Err(Error::InvalidParameter("need k >= 2".into()));
    }
    let size: usize = (1..=k).product();
    if k > 6 {
        return Err(Error::StateCapExceeded {
            size,
            cap: SYMMETRIC_GROUP_CAP,
        });
    }
    let mut class: Vec<usize> = class.iter().copied().filter(|&c| c > 1).collect();
    class.sort_unstable_by(|a, b| b.cmp(a));
    if class.is_empty() || class.iter().sum::<usize>() > k {
        return Err(Error::InvalidParameter(format!("no class with cycle type {class:?} in S_{k}")));
    }
    let mut perms = Vec::with_capacity(size);
    let mut p: Vec<usize> = (0..k).collect();
    loop {
        perms.push(p.clone());
        if !next_permutation(&mut p) {
            break;
        }
    }
    let index: HashMap<Vec<usize>, usize> = perms.iter().cloned().enumerate().map(|(i, q)| (q, i)).collect();
    let steps: Vec<&Vec<usize>> = perms.iter().filter(|q| cycle_type(q) == class).collect();
    let w = 1.0 / steps.len() as f64;
    let mut entries = vec![0.0; size * size];
    for (x, perm) in perms.iter().enumerate() {
        for s in &steps {
            let y: Vec<usize> = s.iter().map(|&i| perm[i]).collect();
            entries[x * size + index[&y]] += w;
        }
    }
    let matrix = StochasticMatrix::new(size, entries)?;
    if !matrix.is_irreducible() {
        return Err(Error::NotGenerating);
    }
    let labels: Vec<String> = perms
        .iter()
        .map(|q| q.iter().map(|v| v.to_string()).collect::<String>())
        .collect();
    let class_name: Vec<String> = class.iter().map(|c| c.to_string()).collect();
    Ok(ChainInstance {
        matrix: matrix.with_labels(labels)?,
        family: "sym".into(),
        params: vec![("k".into(), k.to_string()), ("class".into(), class_name.join(","))],
        transitive: true,
        curvature_claim: CurvatureClaim::NonnegOther,
    })
}
