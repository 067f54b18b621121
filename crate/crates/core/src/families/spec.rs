//! Family spec strings.
//!
//! ```text
//! cayley:Z12xZ2:gens=(1,0),(-1,0),(0,1)
//! cayley:Z12:gens=1,-1,5,-5
//! cayley:Z2^8:gens=basis
//! cayley-random:Z2^8:d=16:seed=42
//! hypercube:d=8:lazy=0.0
//! cycle:n=32
//! complete:n=50
//! bd:p=0.3,0.3;q=0.4,0.4
//! bd:n=20:p=0.3:q=0.3
//! perturb:theta=0.01:hypercube:d=8      (also θ=, and theta=5/tmix)
//! sym:k=4:class=transpositions
//! ```
//!
//! A bare integer generator `a` stands for `(a, a, ..., a)`.

use std::fmt;

use super::{
    birth_death_capped, complete_capped, conjugacy_walk, cycle_capped, group, hypercube_capped,
    perturb_toward_uniform, ChainInstance, GroupSpec, SYMMETRIC_GROUP_CAP,
};
use crate::entropy::{mixing_time, DEFAULT_TOL_T};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum GenSpec {
    /// `+-e_i` for every factor.
    Basis,
    /// Each entry has one coordinate per factor, or a single broadcast one.
    List(Vec<Vec<i64>>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Theta {
    Absolute(f64),
    /// `c / t_mix(1/4)` of the unperturbed chain.
    OverMixingTime(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub enum FamilySpec {
    Cayley { group: GroupSpec, gens: GenSpec },
    RandomCayley { group: GroupSpec, d: usize, seed: u64 },
    Hypercube { d: usize, lazy: f64 },
    Cycle { n: usize },
    Complete { n: usize },
    BirthDeath { up: Vec<f64>, down: Vec<f64> },
    Perturb { theta: Theta, inner: Box<FamilySpec> },
    Sym { k: usize, class: Vec<usize> },
}

fn err(msg: impl Into<String>) -> Error {
    Error::SpecParse(msg.into())
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| err(format!("bad value {v:?} for {key}")))
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').map(|x| parse_num(key, x)).collect()
}

fn parse_group(s: &str) -> Result<GroupSpec> {
    let mut factors = Vec::new();
    for part in s.split('x') {
        let body = part
            .strip_prefix('Z')
            .ok_or_else(|| err(format!("group factor {part:?} must look like Z<m> or Z<m>^<k>")))?;
        let (m, k) = match body.split_once('^') {
            Some((m, k)) => (parse_num::<usize>("group", m)?, parse_num::<usize>("group", k)?),
            None => (parse_num::<usize>("group", body)?, 1),
        };
        factors.extend(std::iter::repeat_n(m, k));
    }
    GroupSpec::new(factors).map_err(|e| err(e.to_string()))
}

fn parse_gens(v: &str) -> Result<GenSpec> {
    let v = v.trim();
    if v == "basis" {
        return Ok(GenSpec::Basis);
    }
    let mut out = Vec::new();
    let mut rest = v;
    while !rest.is_empty() {
        rest = rest.trim_start_matches(',').trim_start();
        if rest.is_empty() {
            break;
        }
        if let Some(inner) = rest.strip_prefix('(') {
            let close = inner.find(')').ok_or_else(|| err("unclosed generator tuple"))?;
            let coords = inner[..close]
                .split(',')
                .map(|c| parse_num::<i64>("gens", c))
                .collect::<Result<Vec<_>>>()?;
            out.push(coords);
            rest = &inner[close + 1..];
        } else {
            let end = rest.find(',').unwrap_or(rest.len());
            out.push(vec![parse_num::<i64>("gens", &rest[..end])?]);
            rest = &rest[end..];
        }
    }
    if out.is_empty() {
        return Err(err("empty generator list"));
    }
    Ok(GenSpec::List(out))
}

fn parse_class(v: &str) -> Result<Vec<usize>> {
    match v {
        "transpositions" => Ok(vec![2]),
        _ => {
            if let Some(m) = v.strip_suffix("-cycles") {
                Ok(vec![parse_num("class", m)?])
            } else {
                v.split(',').map(|c| parse_num("class", c)).collect()
            }
        }
    }
}

fn parse_theta(v: &str) -> Result<Theta> {
    match v.split_once('/') {
        Some((c, "tmix" | "t_mix")) => Ok(Theta::OverMixingTime(parse_num("theta", c)?)),
        Some(_) => Err(err(format!("theta {v:?}: expected a number or c/tmix"))),
        None => Ok(Theta::Absolute(parse_num("theta", v)?)),
    }
}

/// Key-value pairs from the segments after the kind and positional parts.
fn key_values<'a>(segments: &[&'a str]) -> Result<Vec<(&'a str, &'a str)>> {
    let mut out = Vec::new();
    for seg in segments {
        // `;` only separates pairs; commas inside values stay put.
        for pair in seg.split(';').filter(|p| !p.is_empty()) {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| err(format!("expected key=value, found {pair:?}")))?;
            out.push((k.trim(), v.trim()));
        }
    }
    Ok(out)
}

fn take<'a>(kv: &[(&'a str, &'a str)], key: &str) -> Option<&'a str> {
    kv.iter().find(|(k, _)| *k == key).map(|(_, v)| *v)
}

fn require<'a>(kv: &[(&'a str, &'a str)], key: &str) -> Result<&'a str> {
    take(kv, key).ok_or_else(|| err(format!("missing {key}=")))
}

fn reject_unknown(kv: &[(&str, &str)], allowed: &[&str]) -> Result<()> {
    match kv.iter().find(|(k, _)| !allowed.contains(k)) {
        Some((k, _)) => Err(err(format!("unknown key {k:?}"))),
        None => Ok(()),
    }
}

pub fn parse_family(spec: &str) -> Result<FamilySpec> {
    let spec = spec.trim();
    let segments: Vec<&str> = spec.split(':').collect();
    let kind = segments[0];
    let rest = &segments[1..];
    match kind {
        "cayley" | "cayley-random" => {
            let group = parse_group(rest.first().ok_or_else(|| err("missing group"))?)?;
            let kv = key_values(&rest[1..])?;
            if kind == "cayley" {
                reject_unknown(&kv, &["gens"])?;
                Ok(FamilySpec::Cayley {
                    group,
                    gens: parse_gens(require(&kv, "gens")?)?,
                })
            } else {
                reject_unknown(&kv, &["d", "seed"])?;
                Ok(FamilySpec::RandomCayley {
                    group,
                    d: parse_num("d", require(&kv, "d")?)?,
                    seed: take(&kv, "seed").map(|s| parse_num("seed", s)).transpose()?.unwrap_or(0),
                })
            }
        }
        "hypercube" => {
            let kv = key_values(rest)?;
            reject_unknown(&kv, &["d", "lazy"])?;
            Ok(FamilySpec::Hypercube {
                d: parse_num("d", require(&kv, "d")?)?,
                lazy: take(&kv, "lazy").map(|s| parse_num("lazy", s)).transpose()?.unwrap_or(0.0),
            })
        }
        "cycle" | "complete" => {
            let kv = key_values(rest)?;
            reject_unknown(&kv, &["n"])?;
            let n = parse_num("n", require(&kv, "n")?)?;
            Ok(if kind == "cycle" {
                FamilySpec::Cycle { n }
            } else {
                FamilySpec::Complete { n }
            })
        }
        "bd" => {
            let kv = key_values(rest)?;
            reject_unknown(&kv, &["n", "p", "q"])?;
            let mut up = parse_list("p", require(&kv, "p")?)?;
            let mut down = parse_list("q", require(&kv, "q")?)?;
            if let Some(n) = take(&kv, "n") {
                let n: usize = parse_num("n", n)?;
                if n < 2 {
                    return Err(err("bd needs n >= 2"));
                }
                for rates in [&mut up, &mut down] {
                    if rates.len() == 1 {
                        *rates = vec![rates[0]; n - 1];
                    } else if rates.len() != n - 1 {
                        return Err(err(format!("expected 1 or {} rates", n - 1)));
                    }
                }
            }
            Ok(FamilySpec::BirthDeath { up, down })
        }
        "perturb" => {
            let first = rest.first().ok_or_else(|| err("missing theta"))?;
            let (k, v) = first.split_once('=').ok_or_else(|| err("expected theta=..."))?;
            if k != "theta" && k != "θ" {
                return Err(err(format!("expected theta=, found {k:?}")));
            }
            let inner = rest[1..].join(":");
            if inner.is_empty() {
                return Err(err("missing inner spec"));
            }
            Ok(FamilySpec::Perturb {
                theta: parse_theta(v)?,
                inner: Box::new(parse_family(&inner)?),
            })
        }
        "sym" => {
            let kv = key_values(rest)?;
            reject_unknown(&kv, &["k", "class"])?;
            Ok(FamilySpec::Sym {
                k: parse_num("k", require(&kv, "k")?)?,
                class: take(&kv, "class").map(parse_class).transpose()?.unwrap_or(vec![2]),
            })
        }
        other => Err(err(format!("unknown family {other:?}"))),
    }
}

fn resolve_gens(group: &GroupSpec, gens: &GenSpec) -> Result<Vec<Vec<usize>>> {
    match gens {
        GenSpec::Basis => Ok(group.standard_generators()),
        GenSpec::List(list) => list
            .iter()
            .map(|g| {
                if g.len() == 1 {
                    group.element(&vec![g[0]; group.rank()])
                } else {
                    group.element(g)
                }
            })
            .collect(),
    }
}

impl FamilySpec {
    /// Number of states, saturating on overflow.
    pub fn size(&self) -> usize {
        match self {
            Self::Cayley { group, .. } | Self::RandomCayley { group, .. } => group.order(),
            Self::Hypercube { d, .. } => 1usize.checked_shl(*d as u32).unwrap_or(usize::MAX),
            Self::Cycle { n } | Self::Complete { n } => *n,
            Self::BirthDeath { up, .. } => up.len() + 1,
            Self::Perturb { inner, .. } => inner.size(),
            Self::Sym { k, .. } => (1..=*k).try_fold(1usize, |a, b| a.checked_mul(b)).unwrap_or(usize::MAX),
        }
    }

    /// Builds the instance, refusing anything larger than `cap` states.
    pub fn build(&self, cap: usize) -> Result<ChainInstance> {
        let size = self.size();
        if size > cap {
            return Err(Error::StateCapExceeded { size, cap });
        }
        let mut inst = match self {
            Self::Cayley { group, gens } => group::cayley_capped(group, &resolve_gens(group, gens)?, cap),
            Self::RandomCayley { group, d, seed } => group::random_cayley_capped(group, *d, *seed, cap),
            Self::Hypercube { d, lazy } => hypercube_capped(*d, *lazy, cap),
            Self::Cycle { n } => cycle_capped(*n, cap),
            Self::Complete { n } => complete_capped(*n, cap),
            Self::BirthDeath { up, down } => birth_death_capped(up, down, cap),
            Self::Perturb { theta, inner } => {
                let base = inner.build(cap)?;
                let theta = match *theta {
                    Theta::Absolute(v) => v,
                    Theta::OverMixingTime(c) => {
                        let t_mix = mixing_time(&base.to_chain()?, 0.25, DEFAULT_TOL_T)?;
                        let v = c / t_mix;
                        if !(v <= 1.0) {
                            return Err(Error::InvalidParameter(format!(
                                "theta = {c}/{t_mix} exceeds one"
                            )));
                        }
                        v
                    }
                };
                perturb_toward_uniform(&base, theta)
            }
            Self::Sym { k, class } => {
                if *k > 6 {
                    return Err(Error::StateCapExceeded {
                        size,
                        cap: SYMMETRIC_GROUP_CAP,
                    });
                }
                conjugacy_walk(*k, class)
            }
        }?;
        inst.params.insert(0, ("spec".into(), self.to_string()));
        Ok(inst)
    }
}

fn join<T: fmt::Display>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Cayley { group, gens } => {
                write!(f, "cayley:{group}:gens=")?;
                match gens {
                    GenSpec::Basis => f.write_str("basis"),
                    GenSpec::List(list) => {
                        let parts: Vec<String> = list
                            .iter()
                            .map(|g| if g.len() == 1 { g[0].to_string() } else { format!("({})", join(g)) })
                            .collect();
                        f.write_str(&parts.join(","))
                    }
                }
            }
            Self::RandomCayley { group, d, seed } => write!(f, "cayley-random:{group}:d={d}:seed={seed}"),
            Self::Hypercube { d, lazy } => write!(f, "hypercube:d={d}:lazy={lazy}"),
            Self::Cycle { n } => write!(f, "cycle:n={n}"),
            Self::Complete { n } => write!(f, "complete:n={n}"),
            Self::BirthDeath { up, down } => write!(f, "bd:p={};q={}", join(up), join(down)),
            Self::Perturb { theta, inner } => match theta {
                Theta::Absolute(v) => write!(f, "perturb:theta={v}:{inner}"),
                Theta::OverMixingTime(c) => write!(f, "perturb:theta={c}/tmix:{inner}"),
            },
            Self::Sym { k, class } => write!(f, "sym:k={k}:class={}", join(class)),
        }
    }
}

/// Expands one integer range `key=a..b` or `key=a..b/step` (inclusive) in
/// a spec string into `(value, spec)` pairs. A spec without a range
/// expands to itself with value `NaN`.
pub fn expand_range(spec: &str) -> Result<Vec<(f64, String)>> {
    let Some(dots) = spec.find("..") else {
        return Ok(vec![(f64::NAN, spec.to_owned())]);
    };
    let start = spec[..dots].rfind('=').map(|i| i + 1).ok_or_else(|| err("range without key"))?;
    let end = spec[dots + 2..]
        .find([':', ';', ','])
        .map(|i| dots + 2 + i)
        .unwrap_or(spec.len());
    let lo: i64 = parse_num("range", &spec[start..dots])?;
    let (hi, step) = match spec[dots + 2..end].split_once('/') {
        Some((h, s)) => (parse_num::<i64>("range", h)?, parse_num::<i64>("range", s)?),
        None => (parse_num::<i64>("range", &spec[dots + 2..end])?, 1),
    };
    if step <= 0 || hi < lo {
        return Err(err(format!("empty range {lo}..{hi}/{step}")));
    }
    if spec[end..].contains("..") {
        return Err(err("only one range per spec"));
    }
    Ok((lo..=hi)
        .step_by(step as usize)
        .map(|v| (v as f64, format!("{}{v}{}", &spec[..start], &spec[end..])))
        .collect())
}
