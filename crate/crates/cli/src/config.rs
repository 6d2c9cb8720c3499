use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use gmvi_core::io::parse_key_values;
use gmvi_core::problems::GameDecomposition;
use gmvi_core::Family;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solver {
    RemLazy,
    RemDense,
    MirrorProx,
    Popov,
}

impl Solver {
    pub fn name(self) -> &'static str {
        match self {
            Solver::RemLazy => "rem-lazy",
            Solver::RemDense => "rem-dense",
            Solver::MirrorProx => "mirror-prox",
            Solver::Popov => "popov",
        }
    }

    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "rem-lazy" => Ok(Solver::RemLazy),
            "rem-dense" => Ok(Solver::RemDense),
            "mirror-prox" => Ok(Solver::MirrorProx),
            "popov" => Ok(Solver::Popov),
            _ => Err(CliError::Config(format!("unknown solver {s:?}"))),
        }
    }

    pub fn is_rem(self) -> bool {
        matches!(self, Solver::RemLazy | Solver::RemDense)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampling {
    Uniform,
    Importance,
    /// The family's own plan.
    Problem,
}

impl Sampling {
    pub fn name(self) -> &'static str {
        match self {
            Sampling::Uniform => "uniform",
            Sampling::Importance => "importance",
            Sampling::Problem => "problem",
        }
    }

    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "uniform" => Ok(Sampling::Uniform),
            "importance" => Ok(Sampling::Importance),
            "problem" => Ok(Sampling::Problem),
            _ => Err(CliError::Config(format!("unknown sampling mode {s:?}"))),
        }
    }
}

/// Parameters of a generated instance.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorParams {
    pub family: Family,
    /// Rows, or states for policy evaluation.
    pub n: usize,
    /// Columns, or the feature dimension for policy evaluation.
    pub d: usize,
    pub density: f64,
    pub exponent: f64,
    pub seed: u64,
    pub decomposition: GameDecomposition,
    pub beta: f64,
    pub mu: f64,
}

impl GeneratorParams {
    pub fn new(family: Family, n: usize, d: usize) -> Self {
        Self {
            family,
            n,
            d,
            density: 1.0,
            exponent: 0.0,
            seed: 0,
            decomposition: GameDecomposition::TwoSided,
            beta: 0.9,
            mu: 0.1,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.family == Family::Custom {
            return Err(CliError::Config("custom instances cannot be generated".into()));
        }
        if self.n == 0 || self.d == 0 {
            return Err(CliError::Config("sizes must be >= 1".into()));
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return Err(CliError::Config(format!("density {} outside (0, 1]", self.density)));
        }
        if !(self.exponent >= 0.0 && self.exponent.is_finite()) {
            return Err(CliError::Config(format!("exponent {} must be >= 0", self.exponent)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSource {
    Generated(GeneratorParams),
    /// Path to an instance sidecar.
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub problem: ProblemSource,
    pub solver: Solver,
    pub sampling: Sampling,
    pub gamma: Option<f64>,
    /// Baseline step size; the default is derived from the Lipschitz constant.
    pub step: Option<f64>,
    pub iterations: u64,
    /// 0 selects the solver default.
    pub stride: u64,
    pub seeds: Vec<u64>,
    pub out: PathBuf,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if let ProblemSource::Generated(g) = &self.problem {
            g.validate()?;
        }
        if self.iterations == 0 {
            return Err(CliError::Config("iterations must be >= 1".into()));
        }
        if self.seeds.is_empty() {
            return Err(CliError::Config("at least one seed is required".into()));
        }
        if self.seeds.iter().collect::<BTreeSet<_>>().len() != self.seeds.len() {
            return Err(CliError::Config("seeds must be distinct".into()));
        }
        if let Some(g) = self.gamma {
            if !self.solver.is_rem() {
                return Err(CliError::Config("gamma applies only to rem solvers".into()));
            }
            if !(g >= 0.0 && g.is_finite()) {
                return Err(CliError::Config(format!("gamma {g} must be >= 0")));
            }
        }
        if let Some(s) = self.step {
            if self.solver.is_rem() {
                return Err(CliError::Config("step applies only to baseline solvers".into()));
            }
            if !(s > 0.0 && s.is_finite()) {
                return Err(CliError::Config(format!("step {s} must be > 0")));
            }
        }
        if !self.solver.is_rem() && self.sampling != Sampling::Problem {
            return Err(CliError::Config("baselines do not sample; drop --sampling".into()));
        }
        Ok(())
    }
}

/// Parses `1,2,5` into seeds.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>, CliError> {
    s.split(',')
        .map(|t| t.trim().parse::<u64>().map_err(|_| CliError::Config(format!("bad seed {t:?}"))))
        .collect()
}

pub fn parse_family(s: &str) -> Result<Family, CliError> {
    match Family::parse(s) {
        Some(f) if f != Family::Custom => Ok(f),
        _ => Err(CliError::Config(format!("unknown family {s:?}"))),
    }
}

pub fn parse_decomposition(s: &str) -> Result<GameDecomposition, CliError> {
    match s {
        "two-sided" => Ok(GameDecomposition::TwoSided),
        "row-sided" => Ok(GameDecomposition::RowSided),
        _ => Err(CliError::Config(format!("unknown decomposition {s:?}"))),
    }
}

/// Flat `key -> value` settings, from a config file and/or flags.
pub type Settings = BTreeMap<String, String>;

/// Keys accepted by `run`.
pub const RUN_KEYS: &[&str] = &[
    "problem", "solver", "sampling", "iters", "gamma", "step", "seeds", "stride", "out", "n", "d", "density", "exponent",
    "gen-seed", "beta", "mu", "decomposition",
];

/// Reads a `key = value` config file.
pub fn read_settings(path: &Path) -> Result<Settings, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let map = parse_key_values(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let mut out = Settings::new();
    for (k, (line, v)) in map {
        if !RUN_KEYS.contains(&k.as_str()) {
            return Err(CliError::Config(format!("{}:{line}: unknown key {k:?}", path.display())));
        }
        out.insert(k, v);
    }
    Ok(out)
}

fn get<T: FromStr>(s: &Settings, key: &str) -> Result<Option<T>, CliError> {
    s.get(key)
        .map(|v| v.parse::<T>().map_err(|_| CliError::Config(format!("{key}: cannot parse {v:?}"))))
        .transpose()
}

fn require<T: FromStr>(s: &Settings, key: &str) -> Result<T, CliError> {
    get(s, key)?.ok_or_else(|| CliError::Config(format!("missing {key}")))
}

impl GeneratorParams {
    pub fn from_settings(family: Family, s: &Settings, seed_key: &str) -> Result<Self, CliError> {
        let mut g = GeneratorParams::new(family, get(s, "n")?.unwrap_or(10), get(s, "d")?.unwrap_or(10));
        if let Some(v) = get(s, "density")? {
            g.density = v;
        }
        if let Some(v) = get(s, "exponent")? {
            g.exponent = v;
        }
        if let Some(v) = get(s, seed_key)? {
            g.seed = v;
        }
        if let Some(v) = get(s, "beta")? {
            g.beta = v;
        }
        if let Some(v) = get(s, "mu")? {
            g.mu = v;
        }
        if let Some(v) = s.get("decomposition") {
            g.decomposition = parse_decomposition(v)?;
        }
        g.validate()?;
        Ok(g)
    }
}

impl ExperimentConfig {
    /// Builds and validates a run configuration.
    pub fn from_settings(s: &Settings) -> Result<Self, CliError> {
        let problem: String = require(s, "problem")?;
        let problem = match Family::parse(&problem) {
            Some(f) => ProblemSource::Generated(GeneratorParams::from_settings(f, s, "gen-seed")?),
            None => ProblemSource::File(PathBuf::from(problem)),
        };
        let cfg = ExperimentConfig {
            problem,
            solver: Solver::parse(&require::<String>(s, "solver")?)?,
            sampling: s.get("sampling").map(|v| Sampling::parse(v)).transpose()?.unwrap_or(Sampling::Problem),
            gamma: get(s, "gamma")?,
            step: get(s, "step")?,
            iterations: require(s, "iters")?,
            stride: get(s, "stride")?.unwrap_or(0),
            seeds: parse_seeds(s.get("seeds").map(String::as_str).unwrap_or("0"))?,
            out: PathBuf::from(require::<String>(s, "out")?),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
