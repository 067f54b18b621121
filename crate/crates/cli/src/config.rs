//! Command-line flags, the optional config file, and their merge.
//!
//! Precedence is flag, then config file, then built-in default. The config
//! file is flat TOML using the flag names with underscores:
//!
//! ```toml
//! spec = "hypercube:d=6"
//! eps = [0.25, 0.75]
//! tgrid = "0:10:21"
//! seed = 7
//! threads = 1
//! no_cache = true
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use cutoff_lab::chain::{DEFAULT_TOL, MAX_TOL};
use cutoff_lab::entropy::EPS_GRID;
use cutoff_lab::families::DEFAULT_STATE_CAP;
use serde::Deserialize;

#[derive(Debug, Parser)]
#[command(name = "cutoff-lab", version, about = "Mixing, curvature and entropic cutoff diagnostics for finite Markov chains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Mixing times, relaxation time, curvature and entropy profile of one chain.
    Analyze(CommonArgs),
    /// Run every inequality check on one chain; exit 3 if any fails.
    Verify(CommonArgs),
    /// One row per member of a family range such as `hypercube:d=4..10`.
    Scan(CommonArgs),
    /// Per-edge Ollivier and per-state Bakry-Émery curvature, with semigroup checks.
    Curvature(CommonArgs),
    /// Sample random abelian Cayley walks and write them as chain files.
    RandomCayley(RandomCayleyArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// Family spec, e.g. `hypercube:d=8` (same as `--spec`).
    pub target: Option<String>,
    #[arg(long)]
    pub spec: Option<String>,
    #[arg(long)]
    pub chain_file: Option<PathBuf>,
    /// Comma-separated levels in (0,1).
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    /// `auto` or `a:b:steps`.
    #[arg(long)]
    pub tgrid: Option<String>,
    /// Heat-kernel truncation tolerance, in (0, 1e-6].
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; 0 lets the pool decide.
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub no_cache: bool,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Random observables per time in the concentration checks.
    #[arg(long)]
    pub draws: Option<usize>,
    #[arg(long)]
    pub state_cap: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct RandomCayleyArgs {
    /// Group such as `Z2^8` or `Z12xZ2`.
    #[arg(long)]
    pub group: Option<String>,
    /// Number of uniform draws before symmetrization.
    #[arg(long = "gens")]
    pub d: Option<usize>,
    /// Instances, with seeds `seed, seed+1, ...`.
    #[arg(long)]
    pub count: Option<usize>,
    #[command(flatten)]
    pub common: CommonArgs,
}

/// Keys accepted in a config file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub spec: Option<String>,
    pub chain_file: Option<PathBuf>,
    pub eps: Option<Vec<f64>>,
    pub tgrid: Option<String>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub no_cache: Option<bool>,
    pub draws: Option<usize>,
    pub state_cap: Option<usize>,
    pub group: Option<String>,
    pub gens: Option<usize>,
    pub count: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).map_err(|e| ConfigError(format!("{}: {e}", path.display())).into())
    }
}

/// Bad flags or config values; maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "configuration error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Analyze,
    Verify,
    Scan,
    Curvature,
    RandomCayley,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Spec(String),
    ChainFile(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub enum TimeGrid {
    Auto,
    Linear { from: f64, to: f64, steps: usize },
}

impl TimeGrid {
    pub fn parse(s: &str) -> Result<Self> {
        if s.trim() == "auto" {
            return Ok(Self::Auto);
        }
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || ConfigError(format!("time grid {s:?}: expected auto or a:b:steps"));
        if parts.len() != 3 {
            return Err(bad().into());
        }
        let from: f64 = parts[0].trim().parse().map_err(|_| bad())?;
        let to: f64 = parts[1].trim().parse().map_err(|_| bad())?;
        let steps: usize = parts[2].trim().parse().map_err(|_| bad())?;
        if !(from >= 0.0 && to >= from && from.is_finite() && to.is_finite()) || steps == 0 {
            return Err(bad().into());
        }
        Ok(Self::Linear { from, to, steps })
    }

    /// `steps` evenly spaced points including both ends.
    pub fn points(&self) -> Option<Vec<f64>> {
        match *self {
            Self::Auto => None,
            Self::Linear { from, steps: 1, .. } => Some(vec![from]),
            Self::Linear { from, to, steps } => {
                Some((0..steps).map(|i| from + (to - from) * i as f64 / (steps - 1) as f64).collect())
            }
        }
    }
}

/// Fully resolved settings for one run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: CommandKind,
    pub source: Option<Source>,
    pub eps: Vec<f64>,
    pub tgrid: TimeGrid,
    pub tol: f64,
    pub seed: u64,
    pub out: PathBuf,
    pub cache: bool,
    pub threads: usize,
    pub draws: usize,
    pub state_cap: usize,
    pub group: Option<String>,
    pub gens: Option<usize>,
    pub count: usize,
}

impl RunConfig {
    pub fn from_command(command: &Command) -> Result<Self> {
        let (kind, common, rc) = match command {
            Command::Analyze(c) => (CommandKind::Analyze, c, None),
            Command::Verify(c) => (CommandKind::Verify, c, None),
            Command::Scan(c) => (CommandKind::Scan, c, None),
            Command::Curvature(c) => (CommandKind::Curvature, c, None),
            Command::RandomCayley(r) => (CommandKind::RandomCayley, &r.common, Some(r)),
        };
        let file = match &common.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        Self::merge(kind, common, rc, file)
    }

    fn merge(kind: CommandKind, cli: &CommonArgs, rc: Option<&RandomCayleyArgs>, file: FileConfig) -> Result<Self> {
        if cli.target.is_some() && cli.spec.is_some() {
            bail!(ConfigError("give the family spec either positionally or with --spec".into()));
        }
        let spec = cli.target.clone().or_else(|| cli.spec.clone());
        let source = match (spec, &cli.chain_file) {
            (Some(_), Some(_)) => bail!(ConfigError("--spec and --chain-file are exclusive".into())),
            (Some(s), None) => Some(Source::Spec(s)),
            (None, Some(p)) => Some(Source::ChainFile(p.clone())),
            (None, None) => match (file.spec, file.chain_file) {
                (Some(_), Some(_)) => bail!(ConfigError("config sets both spec and chain_file".into())),
                (Some(s), None) => Some(Source::Spec(s)),
                (None, Some(p)) => Some(Source::ChainFile(p)),
                (None, None) => None,
            },
        };
        if source.is_none() && kind != CommandKind::RandomCayley {
            bail!(ConfigError("no chain given: pass a family spec or --chain-file".into()));
        }
        if kind == CommandKind::Scan && !matches!(source, Some(Source::Spec(_))) {
            bail!(ConfigError("scan needs a family spec with a range".into()));
        }

        let default_eps = match kind {
            CommandKind::Verify => EPS_GRID.to_vec(),
            _ => vec![0.25, 0.75],
        };
        let eps = cli.eps.clone().or(file.eps).unwrap_or(default_eps);
        if eps.is_empty() {
            bail!(ConfigError("empty eps list".into()));
        }
        if let Some(e) = eps.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
            bail!(ConfigError(format!("eps {e} is not in (0,1)")));
        }
        let tgrid = match cli.tgrid.as_deref().or(file.tgrid.as_deref()) {
            Some(s) => TimeGrid::parse(s)?,
            None => TimeGrid::Auto,
        };
        let tol = cli.tol.or(file.tol).unwrap_or(DEFAULT_TOL);
        if !(tol > 0.0 && tol <= MAX_TOL) {
            bail!(ConfigError(format!("tol {tol} is not in (0, {MAX_TOL}]")));
        }
        let out = cli.out.clone().or(file.out).unwrap_or_else(|| PathBuf::from("cutoff-lab-out"));
        Ok(Self {
            command: kind,
            source,
            eps,
            tgrid,
            tol,
            seed: cli.seed.or(file.seed).unwrap_or(0),
            out,
            cache: !(cli.no_cache || file.no_cache.unwrap_or(false)),
            threads: cli.threads.or(file.threads).unwrap_or(0),
            draws: cli.draws.or(file.draws).unwrap_or(100),
            state_cap: cli.state_cap.or(file.state_cap).unwrap_or(DEFAULT_STATE_CAP),
            group: rc.and_then(|r| r.group.clone()).or(file.group),
            gens: rc.and_then(|r| r.d).or(file.gens),
            count: rc.and_then(|r| r.count).or(file.count).unwrap_or(1),
        })
    }

    /// Creates the output directory and checks that it is writable.
    pub fn prepare_out(&self) -> Result<()> {
        fs::create_dir_all(&self.out).with_context(|| format!("creating {}", self.out.display()))?;
        let probe = self.out.join(".write-probe");
        fs::write(&probe, b"").with_context(|| format!("{} is not writable", self.out.display()))?;
        fs::remove_file(&probe).ok();
        Ok(())
    }
}
