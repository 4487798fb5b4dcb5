//! Summary statistics for result tables.

use crate::{Error, Result};

/// `exp(mean(ln v))`; every value must be positive and finite.
pub fn geometric_mean(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidInput("geometric mean of an empty list".into()));
    }
    let mut sum = 0.0;
    for &v in values {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidInput(format!("geometric mean needs positive values, got {v}")));
        }
        sum += v.ln();
    }
    Ok((sum / values.len() as f64).exp())
}
