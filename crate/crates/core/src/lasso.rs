//! LASSO, `min ½‖Ax − b‖² + ν‖x‖₁`, cast as `f(x) + g(Mx)` with
//! `f = ½‖A· − b‖²`, `g = ν‖·‖₁` and `M = I`.

use nalgebra::{Cholesky, Dyn};

use crate::{check_len, Error, Matrix, Result, Vector};

/// Entries with magnitude at or below this are treated as exact zeros by
/// [`kkt_residual_inf`].
pub const ZERO_ENTRY_TOL: f64 = 1e-12;

/// Unscaled design matrix and observations, as read from disk or generated.
#[derive(Debug, Clone, PartialEq)]
pub struct RawInstance {
    pub a: Matrix,
    pub b: Vector,
}

/// Design matrix with unit-norm columns and unit-norm observations.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledData {
    pub a: Matrix,
    pub b: Vector,
}

/// Divides every column of `a_raw` and the vector `b_raw` by their ℓ2 norms.
pub fn scale_instance(a_raw: &Matrix, b_raw: &Vector) -> Result<ScaledData> {
    if a_raw.nrows() == 0 || a_raw.ncols() == 0 {
        return Err(Error::EmptyMatrix);
    }
    check_len("b", b_raw, a_raw.nrows())?;
    let mut a = a_raw.clone();
    for (j, mut col) in a.column_iter_mut().enumerate() {
        let norm = col.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroColumn(j));
        }
        col /= norm;
    }
    let norm_b = b_raw.norm();
    if norm_b == 0.0 || !norm_b.is_finite() {
        return Err(Error::ZeroObservations);
    }
    Ok(ScaledData {
        a,
        b: b_raw / norm_b,
    })
}

/// `ν = 0.1 ‖Aᵀb‖∞`, computed on the scaled data.
pub fn regularization_weight(data: &ScaledData) -> Result<f64> {
    let nu = 0.1 * data.a.tr_mul(&data.b).amax();
    if nu > 0.0 {
        Ok(nu)
    } else {
        Err(Error::DegenerateInstance)
    }
}

/// A LASSO instance with its regularization weight and cached products.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    a: Matrix,
    b: Vector,
    nu: f64,
    atb: Vector,
    /// `AᵀA`, kept only for tall or square designs where it is the cheaper
    /// route to `Aᵀ(Ax − b)`.
    gram: Option<Matrix>,
}

impl ProblemInstance {
    /// Builds an instance from data as given; no scaling is applied.
    pub fn new(a: Matrix, b: Vector, nu: f64) -> Result<Self> {
        if a.nrows() == 0 || a.ncols() == 0 {
            return Err(Error::EmptyMatrix);
        }
        check_len("b", &b, a.nrows())?;
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::Config(format!("regularization weight must be positive, got {nu}")));
        }
        let atb = a.tr_mul(&b);
        let gram = (a.nrows() >= a.ncols()).then(|| a.tr_mul(&a));
        Ok(Self {
            a,
            b,
            nu,
            atb,
            gram,
        })
    }

    /// Scales the raw data and sets `ν` by the default rule.
    pub fn from_raw(raw: &RawInstance) -> Result<Self> {
        let scaled = scale_instance(&raw.a, &raw.b)?;
        let nu = regularization_weight(&scaled)?;
        Self::new(scaled.a, scaled.b, nu)
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Vector {
        &self.b
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// `Aᵀb`.
    pub fn atb(&self) -> &Vector {
        &self.atb
    }

    /// Number of features.
    pub fn n(&self) -> usize {
        self.a.ncols()
    }

    /// Number of observations.
    pub fn obs(&self) -> usize {
        self.a.nrows()
    }

    /// `Aᵀ(Ax − b)`, the gradient of the smooth part.
    pub fn smooth_gradient(&self, x: &Vector) -> Vector {
        match &self.gram {
            Some(g) => g * x - &self.atb,
            None => self.a.tr_mul(&(&self.a * x - &self.b)),
        }
    }
}

/// Which Gram matrix a [`XSolverCache`] factored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GramSide {
    /// `AᵀA + cI` (n × n).
    Features,
    /// `AAᵀ + cI` (obs × obs), used through the matrix inversion lemma.
    Observations,
}

/// Cholesky factor of the x-subproblem system for one penalty `c`.
#[derive(Debug, Clone)]
pub struct XSolverCache {
    c: f64,
    side: GramSide,
    factor: Cholesky<f64, Dyn>,
}

impl XSolverCache {
    /// Factors the smaller of the two Gram systems.
    pub fn new(inst: &ProblemInstance, c: f64) -> Result<Self> {
        let side = if inst.obs() < inst.n() {
            GramSide::Observations
        } else {
            GramSide::Features
        };
        Self::with_side(inst, c, side)
    }

    pub fn with_side(inst: &ProblemInstance, c: f64, side: GramSide) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Config(format!("penalty c must be positive, got {c}")));
        }
        let a = inst.a();
        let mut system = match side {
            GramSide::Features => inst.gram.clone().unwrap_or_else(|| a.tr_mul(a)),
            GramSide::Observations => a * a.transpose(),
        };
        for i in 0..system.nrows() {
            system[(i, i)] += c;
        }
        let factor = Cholesky::new(system).ok_or(Error::Factorization)?;
        Ok(Self { c, side, factor })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn side(&self) -> GramSide {
        self.side
    }
}

/// Minimizes `f(x) + ⟨p, x⟩ + (c/2)‖x − target‖²`, i.e. solves
/// `(AᵀA + cI)x = Aᵀb − p + c·target`.
pub fn solve_x_subproblem(
    inst: &ProblemInstance,
    cache: &XSolverCache,
    p: &Vector,
    c: f64,
    target: &Vector,
) -> Result<Vector> {
    if c != cache.c {
        return Err(Error::Contract(format!(
            "x-solver cache was built for c = {}, called with c = {c}",
            cache.c
        )));
    }
    check_len("p", p, inst.n())?;
    check_len("target", target, inst.n())?;
    let rhs = inst.atb() - p + target * c;
    Ok(match cache.side {
        GramSide::Features => cache.factor.solve(&rhs),
        GramSide::Observations => {
            // (cI + AᵀA)⁻¹ = (1/c)(I − Aᵀ(cI + AAᵀ)⁻¹A)
            let a = inst.a();
            let inner = cache.factor.solve(&(a * &rhs));
            (rhs - a.tr_mul(&inner)) / c
        }
    })
}

/// `sign(v) · max(|v| − τ, 0)`.
#[inline]
pub fn soft_threshold(v: f64, tau: f64) -> f64 {
    if v > tau {
        v - tau
    } else if v < -tau {
        v + tau
    } else {
        0.0
    }
}

/// Minimizes `ν‖z‖₁ − ⟨p, z⟩ + (c/2)‖mx − z‖²` in closed form.
pub fn solve_z_subproblem(inst: &ProblemInstance, p: &Vector, c: f64, mx: &Vector) -> Result<Vector> {
    check_len("p", p, inst.n())?;
    check_len("Mx", mx, inst.n())?;
    let tau = inst.nu() / c;
    Ok(mx.zip_map(p, |m, pi| soft_threshold(m + pi / c, tau)))
}

/// ℓ∞ distance from the origin to `∂[½‖Ax − b‖² + ν‖x‖₁]` at `x`.
pub fn kkt_residual_inf(inst: &ProblemInstance, x: &Vector) -> f64 {
    let q = inst.smooth_gradient(x);
    let nu = inst.nu();
    x.iter()
        .zip(q.iter())
        .map(|(&xi, &qi)| {
            if xi.abs() > ZERO_ENTRY_TOL {
                (qi + nu * xi.signum()).abs()
            } else {
                (qi.abs() - nu).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

/// `½‖Ax − b‖² + ν‖x‖₁`.
pub fn objective(inst: &ProblemInstance, x: &Vector) -> f64 {
    0.5 * (inst.a() * x - inst.b()).norm_squared() + inst.nu() * x.lp_norm(1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Matrix {
        Matrix::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0))
    }

    fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vector {
        Vector::from_fn(n, |_, _| rng.random_range(-1.0..1.0))
    }

    fn random_instance(seed: u64, obs: usize, n: usize) -> ProblemInstance {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw = RawInstance {
            a: random_matrix(&mut rng, obs, n),
            b: random_vector(&mut rng, obs),
        };
        ProblemInstance::from_raw(&raw).unwrap()
    }

    #[test]
    fn scaling_examples() {
        let a = Matrix::from_row_slice(2, 2, &[3.0, 1.0, 4.0, 0.0]);
        let b = Vector::from_column_slice(&[0.0, 2.0]);
        let s = scale_instance(&a, &b).unwrap();
        assert_relative_eq!(s.a[(0, 0)], 0.6, epsilon = 1e-15);
        assert_relative_eq!(s.a[(1, 0)], 0.8, epsilon = 1e-15);
        // the unit column is unchanged
        assert_eq!(s.a.column(1), a.column(1));
        assert_eq!(s.b, Vector::from_column_slice(&[0.0, 1.0]));
    }

    #[test]
    fn scaling_rejects_degenerate_data() {
        let a = Matrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 0.0]);
        let b = Vector::from_column_slice(&[1.0, 1.0]);
        assert!(matches!(scale_instance(&a, &b), Err(Error::ZeroColumn(1))));
        let a = Matrix::identity(2, 2);
        assert!(matches!(
            scale_instance(&a, &Vector::zeros(2)),
            Err(Error::ZeroObservations)
        ));
        assert!(matches!(
            scale_instance(&a, &Vector::zeros(3)),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            scale_instance(&Matrix::zeros(0, 0), &Vector::zeros(0)),
            Err(Error::EmptyMatrix)
        ));
    }

    #[test]
    fn scaled_instance_has_unit_norms() {
        let inst = random_instance(3, 7, 4);
        for col in inst.a().column_iter() {
            assert!((col.norm() - 1.0).abs() <= 1e-12);
        }
        assert!((inst.b().norm() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn nu_examples() {
        // Aᵀb = (0.5, −0.8)
        let data = ScaledData {
            a: Matrix::identity(2, 2),
            b: Vector::from_column_slice(&[0.5, -0.8]),
        };
        assert_relative_eq!(regularization_weight(&data).unwrap(), 0.08, epsilon = 1e-16);

        let data = ScaledData {
            a: Matrix::identity(3, 2),
            b: Vector::from_column_slice(&[1.0, 0.0, 0.0]),
        };
        assert_relative_eq!(regularization_weight(&data).unwrap(), 0.1, epsilon = 1e-16);

        let data = ScaledData {
            a: Matrix::from_row_slice(2, 1, &[1.0, 0.0]),
            b: Vector::from_column_slice(&[0.0, 1.0]),
        };
        assert!(matches!(regularization_weight(&data), Err(Error::DegenerateInstance)));
    }

    #[test]
    fn nu_matches_explicit_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let data = scale_instance(&random_matrix(&mut rng, 5, 3), &random_vector(&mut rng, 5)).unwrap();
        let mut best: f64 = 0.0;
        for j in 0..3 {
            let mut dot = 0.0;
            for i in 0..5 {
                dot += data.a[(i, j)] * data.b[i];
            }
            best = best.max(dot.abs());
        }
        assert_relative_eq!(regularization_weight(&data).unwrap(), 0.1 * best, epsilon = 1e-15);
    }

    #[test]
    fn x_subproblem_examples() {
        let inst = ProblemInstance::new(Matrix::identity(2, 2), Vector::zeros(2), 0.1).unwrap();
        let cache = XSolverCache::new(&inst, 1.0).unwrap();
        let z = Vector::zeros(2);
        assert_eq!(solve_x_subproblem(&inst, &cache, &z, 1.0, &z).unwrap(), z);

        let inst =
            ProblemInstance::new(Matrix::identity(2, 2), Vector::from_column_slice(&[1.0, 0.0]), 0.1)
                .unwrap();
        let cache = XSolverCache::new(&inst, 1.0).unwrap();
        let x = solve_x_subproblem(&inst, &cache, &z, 1.0, &z).unwrap();
        assert_relative_eq!(x, Vector::from_column_slice(&[0.5, 0.0]), epsilon = 1e-15);
    }

    #[test]
    fn x_subproblem_rejects_foreign_penalty() {
        let inst = random_instance(1, 3, 2);
        let cache = XSolverCache::new(&inst, 1.0).unwrap();
        let z = Vector::zeros(2);
        assert!(matches!(
            solve_x_subproblem(&inst, &cache, &z, 2.0, &z),
            Err(Error::Contract(_))
        ));
    }

    // ½‖Ax − b‖² + ⟨p, x⟩ + (c/2)‖x − t‖²
    fn x_minimand(inst: &ProblemInstance, p: &Vector, c: f64, t: &Vector, x: &Vector) -> f64 {
        0.5 * (inst.a() * x - inst.b()).norm_squared() + p.dot(x) + 0.5 * c * (x - t).norm_squared()
    }

    #[test]
    fn x_subproblem_is_stationary_by_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let inst = random_instance(5, 3, 2);
        let c = 1.7;
        let cache = XSolverCache::new(&inst, c).unwrap();
        let p = random_vector(&mut rng, 2);
        let t = random_vector(&mut rng, 2);
        let x = solve_x_subproblem(&inst, &cache, &p, c, &t).unwrap();
        let grad = inst.smooth_gradient(&x) + &p + (&x - &t) * c;
        assert!(grad.norm() <= 1e-8);
        let h = 1e-6;
        for _ in 0..5 {
            let d = random_vector(&mut rng, 2).normalize();
            let fd = (x_minimand(&inst, &p, c, &t, &(&x + &d * h))
                - x_minimand(&inst, &p, c, &t, &(&x - &d * h)))
                / (2.0 * h);
            assert!(fd.abs() <= 1e-8, "directional derivative {fd}");
        }
    }

    #[test]
    fn gram_sides_agree_on_wide_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for seed in 0..5 {
            let inst = random_instance(100 + seed, 6, 15);
            let c = 0.3 + seed as f64;
            let wide = XSolverCache::new(&inst, c).unwrap();
            assert_eq!(wide.side(), GramSide::Observations);
            let direct = XSolverCache::with_side(&inst, c, GramSide::Features).unwrap();
            let p = random_vector(&mut rng, 15);
            let t = random_vector(&mut rng, 15);
            let x1 = solve_x_subproblem(&inst, &wide, &p, c, &t).unwrap();
            let x2 = solve_x_subproblem(&inst, &direct, &p, c, &t).unwrap();
            assert!((&x1 - &x2).norm() <= 1e-9 * x2.norm().max(1.0));
            let rhs = inst.atb() - &p + &t * c;
            let residual = inst.a().tr_mul(&(inst.a() * &x1)) + &x1 * c - &rhs;
            assert!(residual.norm() <= 1e-10 * (1.0 + rhs.norm()));
        }
    }

    #[test]
    fn z_subproblem_examples() {
        let inst = ProblemInstance::new(Matrix::identity(2, 2), Vector::zeros(2), 1.0).unwrap();
        let zero = Vector::zeros(2);
        assert_eq!(solve_z_subproblem(&inst, &zero, 1.0, &zero).unwrap(), zero);
        let small = Vector::from_column_slice(&[0.5, -0.9]);
        assert_eq!(solve_z_subproblem(&inst, &zero, 1.0, &small).unwrap(), zero);

        let scalar = ProblemInstance::new(Matrix::identity(1, 1), Vector::zeros(1), 1.0).unwrap();
        let z = solve_z_subproblem(&scalar, &Vector::zeros(1), 1.0, &Vector::from_element(1, 1.5))
            .unwrap();
        assert_eq!(z[0], 0.5);
    }

    #[test]
    fn kkt_examples() {
        // ‖Aᵀb‖∞ = 1 ≤ ν = 1 → 0 is optimal
        let inst =
            ProblemInstance::new(Matrix::identity(2, 2), Vector::from_column_slice(&[1.0, 0.5]), 1.0)
                .unwrap();
        assert_eq!(kkt_residual_inf(&inst, &Vector::zeros(2)), 0.0);

        // x = 0.9 on A = 1, b = 1, ν = 0.1: q = −0.1 = −ν
        let inst = ProblemInstance::new(Matrix::identity(1, 1), Vector::from_element(1, 1.0), 0.1)
            .unwrap();
        assert!(kkt_residual_inf(&inst, &Vector::from_element(1, 0.9)) <= 1e-15);
        // an entry below the zero tolerance is treated as zero, not as +ν
        let tiny = Vector::from_element(1, 1e-13);
        assert_relative_eq!(kkt_residual_inf(&inst, &tiny), 0.9, epsilon = 1e-12);
    }

    #[test]
    fn objective_examples() {
        let inst = random_instance(2, 4, 3);
        assert_relative_eq!(objective(&inst, &Vector::zeros(3)), 0.5, epsilon = 1e-12);
        let inst = ProblemInstance::new(Matrix::identity(1, 1), Vector::from_element(1, 1.0), 0.1)
            .unwrap();
        assert_relative_eq!(objective(&inst, &Vector::from_element(1, 0.9)), 0.095, epsilon = 1e-15);
    }

    #[test]
    fn smooth_gradient_routes_agree() {
        let tall = random_instance(21, 9, 4);
        let wide = random_instance(22, 4, 9);
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for inst in [&tall, &wide] {
            let x = random_vector(&mut rng, inst.n());
            let direct = inst.a().tr_mul(&(inst.a() * &x - inst.b()));
            assert!((inst.smooth_gradient(&x) - direct).amax() <= 1e-13);
        }
    }

    proptest! {
        #[test]
        fn soft_threshold_matches_grid_search(v in -3.0..3.0f64, tau in 0.0..2.0f64) {
            // argmin_z τ|z| + ½(z − v)² on a 1e−4 grid over [−3, 3]
            let mut best = (f64::INFINITY, 0.0);
            for i in 0..=60_000 {
                let z = -3.0 + i as f64 * 1e-4;
                let val = tau * z.abs() + 0.5 * (z - v) * (z - v);
                if val < best.0 {
                    best = (val, z);
                }
            }
            prop_assert!((soft_threshold(v, tau) - best.1).abs() <= 1e-3);
        }
    }
}
