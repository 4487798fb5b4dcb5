//! TOML benchmark configuration.
//!
//! ```toml
//! seed = 42
//! output_dir = "results"        # relative paths resolve against the config file
//! emit_traces = false
//! default_suite = true          # include the nine built-in synthetic instances
//! parallel = true               # fan runs out over a thread pool
//! algorithms = ["admm", "alm_ar_fista_cd"]   # optional subset, default all five
//!
//! [defaults]                    # applied to every algorithm
//! epsilon = 0.1
//! delta = 1e-6
//!
//! [algorithms.alm_ar_adss]      # per-algorithm overrides
//! c = 0.5
//! jr = "inf"
//!
//! [[instances]]
//! name = "mydata"
//! category = "gene"             # selects default c, J1, Jr
//! path = "data/mydata"          # reads data/mydata.A.csv and data/mydata.b.csv
//!
//! [[instances]]
//! name = "synthetic"
//! category = "pixel"
//! generator = { obs = 50, n = 200, sparsity = 0.05, noise_sigma = 0.01 }
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use super::generate::{default_suite, GeneratorSpec};
use super::Category;
use crate::fenchel::GammaRule;
use crate::outer::{Algorithm, AlgorithmConfig, TerminationPoint};
use crate::{Error, Result};

/// Where an instance comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum InstanceSource {
    /// CSV file prefix (`<prefix>.A.csv`, `<prefix>.b.csv`).
    Csv(PathBuf),
    Generator(GeneratorSpec),
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceSpec {
    pub name: String,
    pub category: Category,
    pub source: InstanceSource,
}

/// `Jr` as written in a config file or on the command line: a positive
/// integer, or `inf` / `none` to disable resets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResetThreshold(pub Option<usize>);

impl FromStr for ResetThreshold {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "none" | "off" => Ok(Self(None)),
            t => t
                .parse::<usize>()
                .map(|v| Self(Some(v)))
                .map_err(|_| Error::Config(format!("jr must be a positive integer or `inf`, got `{s}`"))),
        }
    }
}

impl<'de> Deserialize<'de> for ResetThreshold {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(usize),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(v) => Ok(Self(Some(v))),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Optional parameter overrides; unset fields keep the category default.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamOverrides {
    pub c: Option<f64>,
    pub epsilon: Option<f64>,
    pub a: Option<f64>,
    pub j1: Option<usize>,
    pub jr: Option<ResetThreshold>,
    pub delta: Option<f64>,
    pub max_outer: Option<usize>,
    pub max_inner: Option<usize>,
    pub gamma: Option<String>,
    pub termination: Option<String>,
}

impl ParamOverrides {
    pub fn apply(&self, cfg: &mut AlgorithmConfig) -> Result<()> {
        if let Some(v) = self.c {
            cfg.c = v;
        }
        if let Some(v) = self.epsilon {
            cfg.epsilon = v;
        }
        if let Some(v) = self.a {
            cfg.a = v;
        }
        if let Some(v) = self.j1 {
            cfg.j1 = v;
        }
        if let Some(v) = self.jr {
            cfg.jr = v.0;
        }
        if let Some(v) = self.delta {
            cfg.delta = v;
        }
        if let Some(v) = self.max_outer {
            cfg.max_outer = v;
        }
        if let Some(v) = self.max_inner {
            cfg.max_inner = v;
        }
        if let Some(v) = &self.gamma {
            cfg.gamma_rule = v.parse::<GammaRule>()?;
        }
        if let Some(v) = &self.termination {
            cfg.termination = v.parse::<TerminationPoint>()?;
        }
        Ok(())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstanceEntry {
    name: String,
    category: Category,
    path: Option<PathBuf>,
    generator: Option<GeneratorSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum AlgorithmsField {
    List(Vec<String>),
    Table(BTreeMap<String, ParamOverrides>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    seed: u64,
    output_dir: Option<PathBuf>,
    #[serde(default)]
    emit_traces: bool,
    default_suite: Option<bool>,
    #[serde(default = "default_true")]
    parallel: bool,
    #[serde(default)]
    instances: Vec<RawInstanceEntry>,
    #[serde(default)]
    defaults: ParamOverrides,
    algorithms: Option<AlgorithmsField>,
    #[serde(default)]
    overrides: BTreeMap<String, ParamOverrides>,
}

fn default_true() -> bool {
    true
}

/// A fully validated benchmark configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub instances: Vec<InstanceSpec>,
    pub algorithms: Vec<Algorithm>,
    pub defaults: ParamOverrides,
    pub overrides: BTreeMap<Algorithm, ParamOverrides>,
    pub seed: u64,
    pub output_dir: PathBuf,
    pub emit_traces: bool,
    pub parallel: bool,
}

impl BenchConfig {
    /// The nine-instance suite with every algorithm at its category defaults.
    pub fn default_suite(seed: u64, output_dir: impl Into<PathBuf>) -> Self {
        Self {
            instances: suite_specs(),
            algorithms: Algorithm::ALL.to_vec(),
            defaults: ParamOverrides::default(),
            overrides: BTreeMap::new(),
            seed,
            output_dir: output_dir.into(),
            emit_traces: false,
            parallel: true,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io { path: path.to_path_buf(), source })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::from_toml(&text, base)
    }

    /// Parse a config; relative paths resolve against `base`.
    pub fn from_toml(text: &str, base: &Path) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let resolve = |p: PathBuf| if p.is_absolute() { p } else { base.join(p) };

        let mut instances = Vec::new();
        if raw.default_suite.unwrap_or(raw.instances.is_empty()) {
            instances.extend(suite_specs());
        }
        for entry in raw.instances {
            let source = match (entry.path, entry.generator) {
                (Some(p), None) => InstanceSource::Csv(resolve(p)),
                (None, Some(g)) => {
                    g.validate()?;
                    InstanceSource::Generator(g)
                }
                _ => {
                    return Err(Error::Config(format!(
                        "instance `{}` needs exactly one of `path` or `generator`",
                        entry.name
                    )))
                }
            };
            instances.push(InstanceSpec { name: entry.name, category: entry.category, source });
        }
        let mut seen = std::collections::BTreeSet::new();
        for i in &instances {
            if !seen.insert(i.name.as_str()) {
                return Err(Error::Config(format!("duplicate instance name `{}`", i.name)));
            }
        }

        let mut overrides = BTreeMap::new();
        let mut add_overrides = |table: BTreeMap<String, ParamOverrides>| -> Result<()> {
            for (id, o) in table {
                overrides.insert(id.parse::<Algorithm>()?, o);
            }
            Ok(())
        };
        let algorithms = match raw.algorithms {
            None => Algorithm::ALL.to_vec(),
            Some(AlgorithmsField::List(ids)) => {
                let mut algs = ids.iter().map(|s| s.parse::<Algorithm>()).collect::<Result<Vec<_>>>()?;
                algs.sort();
                algs.dedup();
                algs
            }
            Some(AlgorithmsField::Table(table)) => {
                add_overrides(table)?;
                Algorithm::ALL.to_vec()
            }
        };
        add_overrides(raw.overrides)?;

        let cfg = Self {
            instances,
            algorithms,
            defaults: raw.defaults,
            overrides,
            seed: raw.seed,
            output_dir: resolve(raw.output_dir.unwrap_or_else(|| PathBuf::from("results"))),
            emit_traces: raw.emit_traces,
            parallel: raw.parallel,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Every (category, algorithm) binding must yield a valid configuration.
    pub fn validate(&self) -> Result<()> {
        if self.instances.is_empty() {
            return Err(Error::Config("no instances configured".into()));
        }
        if self.algorithms.is_empty() {
            return Err(Error::Config("no algorithms configured".into()));
        }
        for inst in &self.instances {
            for &alg in &self.algorithms {
                self.resolve(inst.category, alg)?;
            }
        }
        Ok(())
    }

    /// Category defaults, then `[defaults]`, then the per-algorithm section.
    pub fn resolve(&self, category: Category, alg: Algorithm) -> Result<AlgorithmConfig> {
        let mut cfg = category.default_config(alg);
        self.defaults.apply(&mut cfg)?;
        if let Some(o) = self.overrides.get(&alg) {
            o.apply(&mut cfg)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn suite_specs() -> Vec<InstanceSpec> {
    default_suite()
        .into_iter()
        .map(|e| InstanceSpec { name: e.name, category: e.category, source: InstanceSource::Generator(e.spec) })
        .collect()
}
