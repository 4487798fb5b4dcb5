//! Subproblem solvers for the augmented Lagrangian minimization
//! `min_{x,z} f(x) + g(z) + ⟨p, Mx − z⟩ + (c/2)‖Mx − z‖²`.
//!
//! Both solvers alternate an exact x-minimization with an exact
//! z-minimization. Seen from the dual of the subproblem this is a proximal
//! gradient step on `f_k + g` with stepsize `1/c`; FISTA-CD adds
//! Chambolle–Dossal momentum on `z`. Each step reports the subgradient
//! `s = (s_x, 0)` and the residual `u = z − Mx` the outer loop needs.

use crate::fenchel::{OuterState, Subgradient};
use crate::lasso::{objective, solve_x_subproblem, solve_z_subproblem, ProblemInstance, XSolverCache};
use crate::{Error, Result, Vector};

/// Iterate of an inner loop.
///
/// `j` counts completed (x, z) minimization pairs. `t` is the FISTA-CD
/// counter belonging to the *next* step, so a fresh state has `t = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerState {
    pub x: Vector,
    pub z: Vector,
    pub y: Vector,
    pub z_prev: Vector,
    pub t: f64,
    pub j: usize,
    pub s: Subgradient,
    pub u: Vector,
}

impl InnerState {
    /// Starts an inner loop from `z`, with `y = z` and `t = 1`.
    pub fn warm_start(z: &Vector) -> Self {
        let n = z.len();
        Self {
            x: Vector::zeros(n),
            z: z.clone(),
            y: z.clone(),
            z_prev: z.clone(),
            t: 1.0,
            j: 0,
            s: Subgradient::zeros(n, n),
            u: Vector::zeros(n),
        }
    }
}

/// The two compatible subproblem processes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InnerSolver {
    /// Alternating minimization.
    Adss,
    /// FISTA with `t_j = (j + a − 1)/a`, `a > 2`.
    FistaCd { a: f64 },
}

impl InnerSolver {
    pub fn step(
        self,
        state: &InnerState,
        outer: &OuterState,
        inst: &ProblemInstance,
        cache: &XSolverCache,
    ) -> Result<InnerState> {
        match self {
            InnerSolver::Adss => adss_step(state, outer, inst, cache),
            InnerSolver::FistaCd { a } => fista_cd_step(state, outer, inst, cache, a),
        }
    }
}

/// One alternating-minimization sweep from `state.z`.
pub fn adss_step(
    state: &InnerState,
    outer: &OuterState,
    inst: &ProblemInstance,
    cache: &XSolverCache,
) -> Result<InnerState> {
    let (p, c) = (&outer.p, outer.c);
    let x = solve_x_subproblem(inst, cache, p, c, &state.z)?;
    let z = solve_z_subproblem(inst, p, c, &x)?;
    let s_x = (&state.z - &z) * c;
    let u = &z - &x;
    Ok(InnerState {
        s: Subgradient::from_x_block(s_x, z.len()),
        u,
        y: z.clone(),
        z_prev: state.z.clone(),
        x,
        z,
        t: state.t,
        j: state.j + 1,
    })
}

/// FISTA-CD counter `t_j = (j + a − 1)/a` for the 1-based step index `j`.
pub fn fista_t(j: usize, a: f64) -> f64 {
    (j as f64 + a - 1.0) / a
}

/// One FISTA-CD step: minimize from the extrapolated point `y`, then
/// extrapolate again with coefficient `(t_j − 1)/t_{j+1} = (j − 1)/(j + a)`.
pub fn fista_cd_step(
    state: &InnerState,
    outer: &OuterState,
    inst: &ProblemInstance,
    cache: &XSolverCache,
    a: f64,
) -> Result<InnerState> {
    if !(a > 2.0) {
        return Err(Error::Config(format!("FISTA-CD requires a > 2, got {a}")));
    }
    let t_next = fista_t(state.j + 2, a);
    let momentum = (state.t - 1.0) / t_next;
    accelerated_step(state, outer, inst, cache, momentum, t_next)
}

/// Minimization pair from `state.y` followed by `y ← z + momentum·(z − z_old)`.
///
/// With `momentum = 0` this is exactly [`adss_step`].
pub fn accelerated_step(
    state: &InnerState,
    outer: &OuterState,
    inst: &ProblemInstance,
    cache: &XSolverCache,
    momentum: f64,
    t_next: f64,
) -> Result<InnerState> {
    let (p, c) = (&outer.p, outer.c);
    let x = solve_x_subproblem(inst, cache, p, c, &state.y)?;
    let z = solve_z_subproblem(inst, p, c, &x)?;
    let s_x = (&state.y - &z) * c;
    let u = &z - &x;
    let y = if momentum == 0.0 {
        z.clone()
    } else {
        &z + (&z - &state.z) * momentum
    };
    Ok(InnerState {
        s: Subgradient::from_x_block(s_x, z.len()),
        u,
        y,
        z_prev: state.z.clone(),
        x,
        z,
        t: t_next,
        j: state.j + 1,
    })
}

/// Gradient of the smooth part `f_k` of the subproblem dual at `z`:
/// `−(p + c(Mx̄ − z))` with `x̄` the x-minimizer for target `z`.
pub fn dual_gradient(
    inst: &ProblemInstance,
    cache: &XSolverCache,
    p: &Vector,
    c: f64,
    z: &Vector,
) -> Result<Vector> {
    let x_bar = solve_x_subproblem(inst, cache, p, c, z)?;
    Ok(-(p + (x_bar - z) * c))
}

/// `f(x) + g(z) + ⟨p, Mx − z⟩ + (c/2)‖Mx − z‖²`.
pub fn augmented_lagrangian(inst: &ProblemInstance, p: &Vector, c: f64, x: &Vector, z: &Vector) -> f64 {
    let gap = x - z;
    let smooth = objective(inst, x) - inst.nu() * x.lp_norm(1);
    smooth + inst.nu() * z.lp_norm(1) + p.dot(&gap) + 0.5 * c * gap.norm_squared()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lasso::{soft_threshold, RawInstance};
    use crate::Matrix;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_instance(seed: u64, obs: usize, n: usize) -> ProblemInstance {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw = RawInstance {
            a: Matrix::from_fn(obs, n, |_, _| rng.random_range(-1.0..1.0)),
            b: Vector::from_fn(obs, |_, _| rng.random_range(-1.0..1.0)),
        };
        ProblemInstance::from_raw(&raw).unwrap()
    }

    fn outer_with(p: Vector, c: f64) -> OuterState {
        let n = p.len();
        let mut st = OuterState::new(n, n, c, 0.1).unwrap();
        st.p = p;
        st
    }

    fn scalar_instance() -> ProblemInstance {
        ProblemInstance::new(Matrix::identity(1, 1), Vector::from_element(1, 1.0), 0.1).unwrap()
    }

    #[test]
    fn adss_scalar_example() {
        let inst = scalar_instance();
        let cache = XSolverCache::new(&inst, 1.0).unwrap();
        let outer = outer_with(Vector::zeros(1), 1.0);
        let next = adss_step(&InnerState::warm_start(&Vector::zeros(1)), &outer, &inst, &cache).unwrap();
        // grid oracle: argmin ½(x − 1)² + ½x² → 0.5; argmin 0.1|z| + ½(0.5 − z)² → 0.4
        let grid_x = (0..=20_000)
            .map(|i| -1.0 + i as f64 * 1e-4)
            .min_by(|a, b| {
                let fa = 0.5 * (a - 1.0f64).powi(2) + 0.5 * a * a;
                let fb = 0.5 * (b - 1.0f64).powi(2) + 0.5 * b * b;
                fa.total_cmp(&fb)
            })
            .unwrap();
        assert!((grid_x - 0.5).abs() < 1e-4);
        assert_relative_eq!(next.x[0], 0.5, epsilon = 1e-15);
        assert_relative_eq!(next.z[0], 0.4, epsilon = 1e-15);
        assert_relative_eq!(next.u[0], -0.1, epsilon = 1e-15);
        assert_relative_eq!(next.s.s_x[0], -0.4, epsilon = 1e-15);
        assert_eq!(next.j, 1);
    }

    #[test]
    fn saddle_point_is_a_fixed_point() {
        // A = 1, b = 1, ν = 0.1: x* = z* = 0.9, p* = −(x* − b) = 0.1
        let inst = scalar_instance();
        let cache = XSolverCache::new(&inst, 2.0).unwrap();
        let outer = outer_with(Vector::from_element(1, 0.1), 2.0);
        let start = InnerState::warm_start(&Vector::from_element(1, 0.9));
        let next = adss_step(&start, &outer, &inst, &cache).unwrap();
        assert_relative_eq!(next.z[0], 0.9, epsilon = 1e-15);
        assert!(next.s.s_x.amax() <= 1e-15);
        assert!(next.u.amax() <= 1e-15);
    }

    #[test]
    fn adss_matches_explicit_dual_prox_gradient() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let inst = random_instance(77, 6, 10);
        for _ in 0..20 {
            let c = rng.random_range(0.1..5.0);
            let cache = XSolverCache::new(&inst, c).unwrap();
            let p = Vector::from_fn(10, |_, _| rng.random_range(-0.2..0.2));
            let z = Vector::from_fn(10, |_, _| rng.random_range(-1.0..1.0));
            let outer = outer_with(p.clone(), c);
            let next = adss_step(&InnerState::warm_start(&z), &outer, &inst, &cache).unwrap();
            let grad = dual_gradient(&inst, &cache, &p, c, &z).unwrap();
            let fwd = &z - grad / c;
            let prox = fwd.map(|v| soft_threshold(v, inst.nu() / c));
            assert!((next.z - prox).amax() <= 1e-9);
        }
    }

    #[test]
    fn first_fista_step_is_an_adss_step() {
        let inst = random_instance(4, 8, 5);
        let cache = XSolverCache::new(&inst, 1.3).unwrap();
        let outer = outer_with(Vector::from_element(5, 0.01), 1.3);
        let start = InnerState::warm_start(&Vector::from_element(5, 0.2));
        let f = fista_cd_step(&start, &outer, &inst, &cache, 3.0).unwrap();
        let a = adss_step(&start, &outer, &inst, &cache).unwrap();
        assert_eq!(f.x, a.x);
        assert_eq!(f.z, a.z);
        assert_eq!(f.y, f.z);
        assert_eq!(f.s, a.s);
        assert_relative_eq!(f.t, 4.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn fista_counter_and_momentum() {
        let a = 3.0;
        let expected = [1.0, 4.0 / 3.0, 5.0 / 3.0, 2.0];
        for (j, want) in expected.iter().enumerate() {
            assert_relative_eq!(fista_t(j + 1, a), *want, epsilon = 1e-15);
        }
        for a in [2.5, 3.0, 10.0] {
            for j in 1..500 {
                let (tj, tn) = (fista_t(j, a), fista_t(j + 1, a));
                assert!(tn * tn - tn <= tj * tj + 1e-12);
                let beta = (tj - 1.0) / tn;
                assert_relative_eq!(beta, (j as f64 - 1.0) / (j as f64 + a), epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn fista_steps_use_the_documented_momentum() {
        let inst = random_instance(9, 7, 4);
        let c = 0.8;
        let cache = XSolverCache::new(&inst, c).unwrap();
        let outer = outer_with(Vector::zeros(4), c);
        let mut st = InnerState::warm_start(&Vector::zeros(4));
        for j in 1..=6usize {
            let next = fista_cd_step(&st, &outer, &inst, &cache, 3.0).unwrap();
            let beta = (j as f64 - 1.0) / (j as f64 + 3.0);
            let y = &next.z + (&next.z - &st.z) * beta;
            assert!((&next.y - y).amax() <= 1e-14);
            assert!((&next.s.s_x - (&st.y - &next.z) * c).amax() <= 1e-14);
            assert_eq!(next.u, &next.z - &next.x);
            st = next;
        }
    }

    #[test]
    fn zero_momentum_reproduces_adss() {
        let inst = random_instance(12, 10, 6);
        let c = 2.0;
        let cache = XSolverCache::new(&inst, c).unwrap();
        let outer = outer_with(Vector::from_element(6, -0.02), c);
        let mut a = InnerState::warm_start(&Vector::zeros(6));
        let mut f = a.clone();
        for _ in 0..25 {
            a = adss_step(&a, &outer, &inst, &cache).unwrap();
            f = accelerated_step(&f, &outer, &inst, &cache, 0.0, f.t).unwrap();
            assert_eq!(a, f);
        }
    }

    #[test]
    fn fista_rejects_small_a() {
        let inst = scalar_instance();
        let cache = XSolverCache::new(&inst, 1.0).unwrap();
        let outer = outer_with(Vector::zeros(1), 1.0);
        let st = InnerState::warm_start(&Vector::zeros(1));
        assert!(matches!(
            fista_cd_step(&st, &outer, &inst, &cache, 2.0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn dual_gradient_at_consistent_point_is_minus_p() {
        // z equal to the x-minimizer for target z: x̄ = z
        let inst = scalar_instance();
        let c = 1.0;
        let cache = XSolverCache::new(&inst, c).unwrap();
        let p = Vector::from_element(1, 0.3);
        // (1 + c)x = 1 − p + c z with x = z → z = 1 − p
        let z = Vector::from_element(1, 0.7);
        let g = dual_gradient(&inst, &cache, &p, c, &z).unwrap();
        assert_relative_eq!(g[0], -0.3, epsilon = 1e-15);
    }

    #[test]
    fn adss_descends_the_augmented_lagrangian() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for seed in 0..5 {
            let inst = random_instance(200 + seed, 12, 20);
            let c = rng.random_range(0.5..4.0);
            let cache = XSolverCache::new(&inst, c).unwrap();
            let p = Vector::from_fn(20, |_, _| rng.random_range(-0.05..0.05));
            let outer = outer_with(p.clone(), c);
            let mut st = adss_step(&InnerState::warm_start(&Vector::zeros(20)), &outer, &inst, &cache)
                .unwrap();
            let mut prev = augmented_lagrangian(&inst, &p, c, &st.x, &st.z);
            for _ in 0..100 {
                st = adss_step(&st, &outer, &inst, &cache).unwrap();
                let val = augmented_lagrangian(&inst, &p, c, &st.x, &st.z);
                assert!(val <= prev + 1e-12 * prev.abs().max(1.0), "{val} > {prev}");
                prev = val;
            }
        }
    }
}
