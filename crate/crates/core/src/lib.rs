//! Inexact augmented Lagrangian solvers for problems of the form
//! `min f(x) + g(Mx)`, with adaptive relaxation of the multiplier step and
//! proximal-gradient-class inner loops run on the subproblem dual.
//!
//! The crate is organised bottom-up:
//!
//! - [`fenchel`]: problem-agnostic outer-loop arithmetic (acceptance test,
//!   relaxation factor, multiplier and auxiliary-vector updates).
//! - [`lasso`]: the LASSO instantiation (`f = ½‖Ax − b‖²`, `g = ν‖·‖₁`, `M = I`).
//! - [`inner`]: alternating minimization (ADSS) and FISTA-CD subproblem solvers.
//! - [`outer`]: full runs of the four ALM variants and of ADMM.
//! - [`reference`](mod@reference): an independent proximal-gradient solver used as a test oracle.
//! - [`harness`]: instance I/O, synthetic generation and the benchmark matrix.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fenchel;
pub mod harness;
pub mod inner;
pub mod lasso;
pub mod outer;
pub mod reference;

pub use error::{Error, Result};

pub type Vector = nalgebra::DVector<f64>;
pub type Matrix = nalgebra::DMatrix<f64>;

pub(crate) fn check_len(what: &'static str, v: &Vector, expected: usize) -> Result<()> {
    if v.len() != expected {
        return Err(Error::DimensionMismatch {
            what,
            expected,
            got: v.len(),
        });
    }
    Ok(())
}
