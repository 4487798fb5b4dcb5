//! Slow, independent LASSO solver used as a test oracle.
//!
//! Plain proximal gradient with stepsize `1/L`, `L = λ_max(AᵀA)` from power
//! iteration, followed by a support-polishing step: once the active set and
//! signs are identified, the stationarity system restricted to the support is
//! solved directly, which removes the slow tail of the first-order method. The
//! polished point is kept only when its KKT residual is no worse. The module
//! shares only the soft-threshold and KKT-residual kernels with the rest of
//! the crate.

use crate::fenchel::OuterState;
use crate::lasso::{kkt_residual_inf, objective, soft_threshold, ProblemInstance};
use crate::{Error, Matrix, Result, Vector};
use nalgebra::Cholesky;

/// Default iteration cap of [`solve_reference`].
pub const REFERENCE_MAX_ITER: usize = 10_000_000;

/// A saddle point `(x*, z*, p*)` of the LASSO Lagrangian.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSolution {
    pub x_star: Vector,
    pub z_star: Vector,
    pub p_star: Vector,
    pub residual: f64,
    pub objective: f64,
    pub iterations: usize,
}

impl ReferenceSolution {
    /// `‖p − p*‖² + ‖w − (x*, z*)‖²`, the distance that decreases
    /// monotonically along exact-criterion outer iterations.
    pub fn fejer_distance(&self, state: &OuterState) -> f64 {
        (&state.p - &self.p_star).norm_squared()
            + (&state.w_x - &self.x_star).norm_squared()
            + (&state.w_z - &self.z_star).norm_squared()
    }
}

/// Largest eigenvalue of `AᵀA` by power iteration.
pub fn lipschitz_constant(inst: &ProblemInstance) -> f64 {
    let a = inst.a();
    let n = inst.n();
    let mut v = Vector::from_fn(n, |i, _| 1.0 + (i % 7) as f64 * 0.1).normalize();
    let mut lambda = 0.0;
    for _ in 0..10_000 {
        let w = a.tr_mul(&(a * &v));
        let next = w.norm();
        if next == 0.0 {
            return 0.0;
        }
        v = w / next;
        if (next - lambda).abs() <= 1e-13 * next {
            return next;
        }
        lambda = next;
    }
    lambda
}

/// Proximal gradient from `x = 0` until the KKT residual is at most `tol`.
pub fn solve_reference(inst: &ProblemInstance, tol: f64) -> Result<ReferenceSolution> {
    solve_reference_capped(inst, tol, REFERENCE_MAX_ITER)
}

pub fn solve_reference_capped(
    inst: &ProblemInstance,
    tol: f64,
    max_iter: usize,
) -> Result<ReferenceSolution> {
    if !(tol > 0.0) {
        return Err(Error::Config(format!("tolerance must be positive, got {tol}")));
    }
    let step = 1.0 / lipschitz_constant(inst);
    let mut x = Vector::zeros(inst.n());
    for it in 0..=max_iter {
        if kkt_residual_inf(inst, &x) <= tol {
            return Ok(finish(inst, polish(inst, x), it));
        }
        if it < max_iter {
            x = prox_grad_step(inst, &x, step);
        }
    }
    Err(Error::ReferenceCap(max_iter))
}

/// Exactly `iters` proximal-gradient steps from zero, then support polishing.
pub fn proximal_gradient(inst: &ProblemInstance, iters: usize) -> ReferenceSolution {
    let step = 1.0 / lipschitz_constant(inst);
    let mut x = Vector::zeros(inst.n());
    for _ in 0..iters {
        x = prox_grad_step(inst, &x, step);
    }
    finish(inst, polish(inst, x), iters)
}

/// Solve `A_Sᵀ(A_S x_S − b) + ν·sign(x_S) = 0` on the support `S` of `x`.
/// Returns `x` unchanged when the restricted system is singular, flips a sign,
/// or does not lower the KKT residual.
fn polish(inst: &ProblemInstance, x: Vector) -> Vector {
    let support: Vec<usize> = (0..x.len()).filter(|&i| x[i] != 0.0).collect();
    if support.is_empty() || support.len() > inst.obs() {
        return x;
    }
    let a = inst.a();
    let a_s = Matrix::from_fn(a.nrows(), support.len(), |r, c| a[(r, support[c])]);
    let rhs = Vector::from_fn(support.len(), |i, _| {
        inst.atb()[support[i]] - inst.nu() * x[support[i]].signum()
    });
    let Some(chol) = Cholesky::new(a_s.tr_mul(&a_s)) else {
        return x;
    };
    let x_s = chol.solve(&rhs);
    let mut candidate = Vector::zeros(x.len());
    for (k, &i) in support.iter().enumerate() {
        if x_s[k].signum() != x[i].signum() {
            return x;
        }
        candidate[i] = x_s[k];
    }
    if kkt_residual_inf(inst, &candidate) <= kkt_residual_inf(inst, &x) {
        candidate
    } else {
        x
    }
}

fn prox_grad_step(inst: &ProblemInstance, x: &Vector, step: f64) -> Vector {
    let a = inst.a();
    let grad = a.tr_mul(&(a * x - inst.b()));
    let tau = step * inst.nu();
    (x - grad * step).map(|v| soft_threshold(v, tau))
}

fn finish(inst: &ProblemInstance, x: Vector, iterations: usize) -> ReferenceSolution {
    let a = inst.a();
    let p_star = -a.tr_mul(&(a * &x - inst.b()));
    ReferenceSolution {
        residual: kkt_residual_inf(inst, &x),
        objective: objective(inst, &x),
        z_star: x.clone(),
        p_star,
        x_star: x,
        iterations,
    }
}
