//! Seeded synthetic LASSO instances and the default desk-scale suite.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::lasso::RawInstance;
use crate::{Error, Matrix, Result, Vector};

use super::Category;

/// Shape and noise model of a synthetic instance.
///
/// The generator is `ChaCha8Rng` seeded with `seed + seed_offset` (wrapping);
/// draws happen in a fixed order: `A` column-major, then the support of `x★`,
/// then its signs, then the noise vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorSpec {
    pub obs: usize,
    pub n: usize,
    pub sparsity: f64,
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default)]
    pub seed_offset: i64,
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<()> {
        if self.obs == 0 || self.n == 0 {
            return Err(Error::Config(format!(
                "generator needs obs >= 1 and n >= 1, got {}x{}",
                self.obs, self.n
            )));
        }
        if !(self.sparsity > 0.0 && self.sparsity <= 1.0) {
            return Err(Error::Config(format!("sparsity must lie in (0, 1], got {}", self.sparsity)));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::Config(format!(
                "noise_sigma must be a nonnegative real, got {}",
                self.noise_sigma
            )));
        }
        Ok(())
    }

    /// Number of nonzero entries in the ground truth, `⌈sparsity·n⌉`.
    pub fn support_size(&self) -> usize {
        ((self.sparsity * self.n as f64).ceil() as usize).clamp(1, self.n)
    }
}

/// A generated instance together with its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedInstance {
    pub raw: RawInstance,
    pub x_true: Vector,
}

pub fn generate_instance(spec: &GeneratorSpec, seed: u64) -> Result<GeneratedInstance> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(spec.seed_offset as u64));
    let a = Matrix::from_fn(spec.obs, spec.n, |_, _| rng.sample::<f64, _>(StandardNormal));
    let mut x_true = Vector::zeros(spec.n);
    let mut support = sample(&mut rng, spec.n, spec.support_size()).into_vec();
    support.sort_unstable();
    for i in support {
        x_true[i] = if rng.random::<bool>() { 1.0 } else { -1.0 };
    }
    let noise = Vector::from_fn(spec.obs, |_, _| rng.sample::<f64, _>(StandardNormal));
    let b = &a * &x_true + noise * spec.noise_sigma;
    Ok(GeneratedInstance { raw: RawInstance { a, b }, x_true })
}

/// One entry of the built-in suite.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteEntry {
    pub name: String,
    pub category: Category,
    pub spec: GeneratorSpec,
}

/// Nine instances: three shapes (square-ish, wide, tall) times three seed offsets.
pub fn default_suite() -> Vec<SuiteEntry> {
    let shapes = [
        (Category::Pixel, 100, 400, 0.05, 0.01),
        (Category::Gene, 40, 800, 0.01, 0.01),
        (Category::Engine, 2000, 24, 0.5, 0.1),
    ];
    let mut out = Vec::new();
    for (category, obs, n, sparsity, noise_sigma) in shapes {
        for offset in 0..3i64 {
            out.push(SuiteEntry {
                name: format!("{}-{}", category.suite_prefix(), offset + 1),
                category,
                spec: GeneratorSpec { obs, n, sparsity, noise_sigma, seed_offset: 1000 * (category as i64 + 1) + offset },
            });
        }
    }
    out
}

/// Look up a built-in suite instance by name (e.g. `pixel-like-2`).
pub fn suite_entry(name: &str) -> Option<SuiteEntry> {
    default_suite().into_iter().find(|e| e.name == name)
}
