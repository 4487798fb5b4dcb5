//! Benchmark harness: instance ingestion and generation, configuration, the
//! algorithm × instance run matrix and CSV reporting.

pub mod config;
pub mod generate;
pub mod io;
pub mod matrix;
pub mod stats;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::outer::{Algorithm, AlgorithmConfig};
use crate::Error;

pub use config::{BenchConfig, InstanceSource};
pub use generate::{default_suite, generate_instance, suite_entry, GeneratedInstance, GeneratorSpec, SuiteEntry};
pub use io::{load_csv_instance, write_csv_instance};
pub use matrix::{run_matrix, Execution, MatrixReport, ResultRow};
pub use stats::geometric_mean;

/// Problem family that selects the default parameter bindings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Pixel,
    Gene,
    Engine,
}

impl Category {
    pub const ALL: [Category; 3] = [Category::Pixel, Category::Gene, Category::Engine];

    pub fn as_str(self) -> &'static str {
        match self {
            Category::Pixel => "pixel",
            Category::Gene => "gene",
            Category::Engine => "engine",
        }
    }

    pub(crate) fn suite_prefix(self) -> &'static str {
        match self {
            Category::Pixel => "pixel-like",
            Category::Gene => "gene-like",
            Category::Engine => "engine-like",
        }
    }

    /// Tuned penalty `c` per algorithm.
    pub fn default_c(self, alg: Algorithm) -> f64 {
        use Algorithm::*;
        match (self, alg) {
            (Category::Pixel, Admm) => 2.0,
            (Category::Pixel, AlmFistaCd) => 3.0,
            (Category::Pixel, AlmArFistaCd) => 3.0,
            (Category::Pixel, AlmAdss) => 2.0,
            (Category::Pixel, AlmArAdss) => 2.0,
            (Category::Gene, Admm) => 2.0,
            (Category::Gene, AlmFistaCd) => 4.0,
            (Category::Gene, AlmArFistaCd) => 4.0,
            (Category::Gene, AlmAdss) => 3.0,
            (Category::Gene, AlmArAdss) => 7.0,
            (Category::Engine, Admm) => 0.01,
            (Category::Engine, AlmFistaCd) => 0.007,
            (Category::Engine, AlmArFistaCd) => 0.009,
            (Category::Engine, AlmAdss) => 0.0007,
            (Category::Engine, AlmArAdss) => 0.0006,
        }
    }

    /// Forced-acceptance threshold `J1` (adaptive variants only; 0 otherwise).
    pub fn default_j1(self, alg: Algorithm) -> usize {
        use Algorithm::*;
        match (self, alg) {
            (Category::Pixel, AlmArFistaCd) => 2,
            (Category::Gene | Category::Engine, AlmArFistaCd) => 6,
            (_, AlmArAdss) => 1,
            _ => 0,
        }
    }

    /// Reset threshold `Jr` (ALM variants only; `None` for ADMM).
    pub fn default_jr(self, alg: Algorithm) -> Option<usize> {
        use Algorithm::*;
        let jr = match (self, alg) {
            (_, Admm) => return None,
            (Category::Pixel, AlmFistaCd) => 3,
            (Category::Pixel, AlmArFistaCd) => 4,
            (Category::Pixel, AlmAdss) => 4,
            (Category::Gene, AlmFistaCd) => 3,
            (Category::Gene, AlmArFistaCd) => 2,
            (Category::Gene, AlmAdss) => 10,
            (Category::Engine, AlmFistaCd) => 10,
            (Category::Engine, AlmArFistaCd) => 7,
            (Category::Engine, AlmAdss) => 10,
            (_, AlmArAdss) => 1,
        };
        Some(jr)
    }

    /// Full default configuration for `alg` on this category.
    pub fn default_config(self, alg: Algorithm) -> AlgorithmConfig {
        let mut cfg = AlgorithmConfig::new(alg, self.default_c(alg));
        cfg.j1 = self.default_j1(alg);
        cfg.jr = self.default_jr(alg);
        cfg
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Category {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        Category::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown category `{s}` (expected pixel, gene or engine)")))
    }
}
