use std::collections::{HashMap, VecDeque};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{check_cap, ChainInstance, CurvatureClaim};
use crate::chain::StochasticMatrix;
use crate::error::{Error, Result};

/// Redraw budget of the random Cayley model.
pub const MAX_REDRAWS: usize = 100;

/// `Z_{m_1} x ... x Z_{m_k}`, elements encoded in mixed radix with the
/// last factor varying fastest.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroupSpec {
    factors: Vec<usize>,
}

impl GroupSpec {
    pub fn new(factors: Vec<usize>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidParameter("group needs at least one factor".into()));
        }
        if let Some(m) = factors.iter().find(|&&m| m < 2) {
            return Err(Error::InvalidParameter(format!("cyclic factor Z_{m}")));
        }
        let mut order: usize = 1;
        for &m in &factors {
            order = order.checked_mul(m).ok_or_else(|| Error::InvalidParameter("group order overflows".into()))?;
        }
        Ok(Self { factors })
    }

    pub fn cyclic(m: usize) -> Result<Self> {
        Self::new(vec![m])
    }

    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    /// `N`, the number of elements.
    pub fn order(&self) -> usize {
        self.factors.iter().product()
    }

    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    pub fn encode(&self, element: &[usize]) -> usize {
        element
            .iter()
            .zip(&self.factors)
            .fold(0, |acc, (&a, &m)| acc * m + a % m)
    }

    pub fn decode(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.factors.len()];
        for (slot, &m) in out.iter_mut().zip(&self.factors).rev() {
            *slot = index % m;
            index /= m;
        }
        out
    }

    pub fn add(&self, a: &[usize], b: &[usize]) -> Vec<usize> {
        a.iter()
            .zip(b)
            .zip(&self.factors)
            .map(|((x, y), m)| (x + y) % m)
            .collect()
    }

    pub fn neg(&self, a: &[usize]) -> Vec<usize> {
        a.iter().zip(&self.factors).map(|(x, m)| (m - x % m) % m).collect()
    }

    /// Reduces signed coordinates into the group.
    pub fn element(&self, coords: &[i64]) -> Result<Vec<usize>> {
        if coords.len() != self.factors.len() {
            return Err(Error::InvalidParameter(format!(
                "element has {} coordinates, group has {} factors",
                coords.len(),
                self.factors.len()
            )));
        }
        Ok(coords
            .iter()
            .zip(&self.factors)
            .map(|(&c, &m)| c.rem_euclid(m as i64) as usize)
            .collect())
    }

    /// `+-e_i` for every factor.
    pub fn standard_generators(&self) -> Vec<Vec<usize>> {
        let mut gens = Vec::new();
        for i in 0..self.rank() {
            let mut e = vec![0; self.rank()];
            e[i] = 1;
            gens.push(e.clone());
            gens.push(self.neg(&e));
        }
        gens
    }

    pub fn is_generating(&self, gens: &[Vec<usize>]) -> bool {
        let n = self.order();
        let steps: Vec<Vec<usize>> = gens.to_vec();
        let mut seen = vec![false; n];
        seen[0] = true;
        let mut count = 1;
        let mut queue = VecDeque::from([vec![0; self.rank()]]);
        while let Some(x) = queue.pop_front() {
            for s in &steps {
                let y = self.add(&x, s);
                let iy = self.encode(&y);
                if !seen[iy] {
                    seen[iy] = true;
                    count += 1;
                    queue.push_back(y);
                }
            }
        }
        count == n
    }

    /// Multiset closed under negation.
    pub fn is_symmetric(&self, gens: &[Vec<usize>]) -> bool {
        let mut counts: HashMap<Vec<usize>, i64> = HashMap::new();
        for g in gens {
            *counts.entry(g.clone()).or_default() += 1;
        }
        counts.iter().all(|(g, c)| counts.get(&self.neg(g)) == Some(c))
    }
}

impl std::fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.factors.iter().map(|m| format!("Z{m}")).collect();
        f.write_str(&parts.join("x"))
    }
}

pub(crate) fn cayley_capped(group: &GroupSpec, gens: &[Vec<usize>], cap: usize) -> Result<ChainInstance> {
    check_cap(group.order(), cap)?;
    if gens.is_empty() {
        return Err(Error::NotGenerating);
    }
    let gens: Vec<Vec<usize>> = gens
        .iter()
        .map(|g| {
            if g.len() == group.rank() {
                Ok(g.iter().zip(group.factors()).map(|(a, m)| a % m).collect())
            } else {
                Err(Error::InvalidParameter(format!("generator {g:?} has the wrong rank")))
            }
        })
        .collect::<Result<_>>()?;
    if !group.is_symmetric(&gens) {
        return Err(Error::NotSymmetricSet);
    }
    if !group.is_generating(&gens) {
        return Err(Error::NotGenerating);
    }
    let n = group.order();
    let w = 1.0 / gens.len() as f64;
    let mut entries = vec![0.0; n * n];
    for x in 0..n {
        let ex = group.decode(x);
        for g in &gens {
            let y = group.encode(&group.add(&ex, g));
            entries[x * n + y] += w;
        }
    }
    let matrix = StochasticMatrix::new(n, entries)?;
    let listed: Vec<String> = gens.iter().map(|g| format!("{g:?}")).collect();
    Ok(ChainInstance {
        matrix,
        family: "cayley".into(),
        params: vec![("group".into(), group.to_string()), ("gens".into(), listed.join(" "))],
        transitive: true,
        curvature_claim: CurvatureClaim::NonnegAbelian,
    })
}

/// Walk `P(x, y) = #{z in S : y = x + z} / |S|` on an abelian group.
pub fn abelian_cayley(group: &GroupSpec, gens: &[Vec<usize>]) -> Result<ChainInstance> {
    cayley_capped(group, gens, super::DEFAULT_STATE_CAP)
}

pub(crate) fn random_cayley_capped(group: &GroupSpec, d: usize, seed: u64, cap: usize) -> Result<ChainInstance> {
    if d == 0 {
        return Err(Error::InvalidParameter("need at least one generator".into()));
    }
    check_cap(group.order(), cap)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 0..MAX_REDRAWS {
        let draws: Vec<Vec<usize>> = (0..d)
            .map(|_| group.factors().iter().map(|&m| rng.random_range(0..m)).collect())
            .collect();
        let mut gens = draws.clone();
        gens.extend(draws.iter().map(|g| group.neg(g)));
        if group.is_generating(&gens) {
            let mut inst = cayley_capped(group, &gens, cap)?;
            inst.family = "cayley-random".into();
            inst.params.push(("d".into(), d.to_string()));
            inst.params.push(("seed".into(), seed.to_string()));
            inst.params.push(("redraws".into(), attempt.to_string()));
            return Ok(inst);
        }
    }
    Err(Error::GenerationFailed(MAX_REDRAWS))
}

/// `d` uniform draws `g_i` and the walk on `S = {g_i} + {-g_i}` (multiset),
/// redrawn until `S` generates.
pub fn random_abelian_cayley(group: &GroupSpec, d: usize, seed: u64) -> Result<ChainInstance> {
    random_cayley_capped(group, d, seed, super::DEFAULT_STATE_CAP)
}
