//! Outer-loop arithmetic of the adaptively relaxed augmented Lagrangian
//! method for `min f(x) + g(Mx)`.
//!
//! Nothing here depends on the concrete `f`, `g` or `M`: an inner solver
//! hands over an iterate `(x, z)`, the constraint residual `u = z − Mx` and a
//! subgradient `s = (s_x, s_z)` of the augmented Lagrangian at that iterate,
//! and this module decides whether the iterate is accurate enough, which
//! relaxation factor `ρ` it certifies, and how the multiplier `p` and the
//! auxiliary vector `w = (w_x, w_z)` move.

use std::fmt;
use std::str::FromStr;

use crate::{check_len, Error, Result, Vector};

/// Absolute threshold under which `‖u‖²` and `‖s‖²` count as zero when
/// detecting an exact saddle point.
pub const TOL_ZERO: f64 = 1e-14;

/// Multiplier estimate, auxiliary vector and penalty of the outer loop.
#[derive(Debug, Clone, PartialEq)]
pub struct OuterState {
    pub p: Vector,
    pub w_x: Vector,
    pub w_z: Vector,
    pub c: f64,
    pub epsilon: f64,
    pub k: usize,
}

impl OuterState {
    /// Zero multiplier and auxiliary vector for `x ∈ ℝⁿ`, `z ∈ ℝᵐ`.
    pub fn new(n: usize, m: usize, c: f64, epsilon: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Config(format!("penalty c must be positive, got {c}")));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::Config(format!(
                "epsilon must lie in (0, 1), got {epsilon}"
            )));
        }
        Ok(Self {
            p: Vector::zeros(m),
            w_x: Vector::zeros(n),
            w_z: Vector::zeros(m),
            c,
            epsilon,
            k: 0,
        })
    }

    pub fn n(&self) -> usize {
        self.w_x.len()
    }

    pub fn m(&self) -> usize {
        self.p.len()
    }
}

/// Subgradient `(s_x, s_z)` of the augmented Lagrangian certifying an
/// inner iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct Subgradient {
    pub s_x: Vector,
    pub s_z: Vector,
}

impl Subgradient {
    pub fn zeros(n: usize, m: usize) -> Self {
        Self {
            s_x: Vector::zeros(n),
            s_z: Vector::zeros(m),
        }
    }

    /// `s_z = 0`, which is what both inner solvers of this crate produce.
    pub fn from_x_block(s_x: Vector, m: usize) -> Self {
        Self {
            s_x,
            s_z: Vector::zeros(m),
        }
    }

    pub fn norm_squared(&self) -> f64 {
        self.s_x.norm_squared() + self.s_z.norm_squared()
    }
}

/// The scalars `U = ‖u‖²`, `S = ‖s‖²`, `A = |⟨(x, z) − w, s⟩| / c` and the
/// discriminant `Δ = (U − A)² − εU(U + S)` of one candidate iterate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubproblemStats {
    pub residual_sq: f64,
    pub subgrad_sq: f64,
    pub cross_term: f64,
    pub discriminant: f64,
    pub epsilon: f64,
}

impl SubproblemStats {
    pub fn new(residual_sq: f64, subgrad_sq: f64, cross_term: f64, epsilon: f64) -> Self {
        let gap = residual_sq - cross_term;
        let discriminant = gap * gap - epsilon * residual_sq * (residual_sq + subgrad_sq);
        Self {
            residual_sq,
            subgrad_sq,
            cross_term,
            discriminant,
            epsilon,
        }
    }
}

/// Computes the acceptance statistics of the iterate `(x, z)`.
///
/// `mx` is `Mx`; the constraint residual is `u = z − Mx`.
pub fn compute_stats(
    x: &Vector,
    z: &Vector,
    mx: &Vector,
    s: &Subgradient,
    state: &OuterState,
) -> Result<SubproblemStats> {
    let (n, m) = (state.n(), state.m());
    check_len("x", x, n)?;
    check_len("z", z, m)?;
    check_len("Mx", mx, m)?;
    check_len("s_x", &s.s_x, n)?;
    check_len("s_z", &s.s_z, m)?;

    let residual_sq = (mx - z).norm_squared();
    let subgrad_sq = s.norm_squared();
    let cross_x = (x - &state.w_x).dot(&s.s_x).abs();
    let cross_z = (z - &state.w_z).dot(&s.s_z).abs();
    let cross_term = (cross_x + cross_z) / state.c;
    Ok(SubproblemStats::new(
        residual_sq,
        subgrad_sq,
        cross_term,
        state.epsilon,
    ))
}

/// How the relaxation factor of an outer step is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RelaxationMode {
    /// `ρ` is picked from the interval certified by `Δ`.
    Adaptive,
    /// `ρ ≡ 1`, the classical multiplier step.
    FixedUnit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Accept,
    Continue,
}

/// Inner-loop stopping test.
///
/// In adaptive mode the iterate is accepted once `A < U` and `Δ ≥ 0`; while
/// `inner_j ≤ j1` the test additionally demands `Δ ≥ (A + S)²`, i.e. that
/// some `ρ ≥ 1` be admissible. In fixed mode the iterate is accepted once
/// `2A + S ≤ (1 − ε)U`.
pub fn acceptance_test(
    stats: &SubproblemStats,
    mode: RelaxationMode,
    inner_j: usize,
    j1: usize,
) -> Verdict {
    let SubproblemStats {
        residual_sq: u,
        subgrad_sq: s,
        cross_term: a,
        discriminant: delta,
        epsilon,
    } = *stats;
    let ok = match mode {
        RelaxationMode::Adaptive => {
            let floor = if inner_j <= j1 { (a + s) * (a + s) } else { 0.0 };
            a < u && delta >= floor
        }
        RelaxationMode::FixedUnit => 2.0 * a + s <= (1.0 - epsilon) * u,
    };
    if ok {
        Verdict::Accept
    } else {
        Verdict::Continue
    }
}

/// Selection rule for `γ ∈ (γ_min, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum GammaRule {
    /// `γ = 1`: the largest admissible `ρ`.
    #[default]
    Max,
    /// Midpoint of `(γ_min, 1]`.
    Midpoint,
    /// A fixed `γ ∈ [−1, 1]`, falling back to the midpoint when it would
    /// make `ρ` nonpositive.
    Fixed(f64),
}

impl GammaRule {
    /// `ratio` is `(A − U)/√Δ`; any `γ > ratio` yields `ρ > 0`.
    fn choose(self, gamma_min: f64, ratio: f64) -> f64 {
        let mid = 0.5 * (gamma_min + 1.0);
        match self {
            GammaRule::Max => 1.0,
            GammaRule::Midpoint => mid,
            GammaRule::Fixed(g) if g > ratio && (-1.0..=1.0).contains(&g) => g,
            GammaRule::Fixed(_) => mid,
        }
    }
}

impl fmt::Display for GammaRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GammaRule::Max => f.write_str("max"),
            GammaRule::Midpoint => f.write_str("mid"),
            GammaRule::Fixed(g) => write!(f, "fixed:{g}"),
        }
    }
}

impl FromStr for GammaRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max" => Ok(GammaRule::Max),
            "mid" | "midpoint" => Ok(GammaRule::Midpoint),
            other => {
                let g = other
                    .strip_prefix("fixed:")
                    .and_then(|v| v.parse::<f64>().ok())
                    .ok_or_else(|| Error::Config(format!("unknown gamma rule {other:?}")))?;
                if !(-1.0..=1.0).contains(&g) {
                    return Err(Error::Config(format!("fixed gamma {g} outside [-1, 1]")));
                }
                Ok(GammaRule::Fixed(g))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxationDecision {
    pub gamma_min: f64,
    pub gamma: f64,
    pub rho: f64,
    pub mode: RelaxationMode,
}

impl RelaxationDecision {
    pub fn fixed_unit() -> Self {
        Self {
            gamma_min: -1.0,
            gamma: 1.0,
            rho: 1.0,
            mode: RelaxationMode::FixedUnit,
        }
    }
}

/// `[1 − √(1 − ε), 1 + √(1 − ε)]`, the range every admissible `ρ` lies in.
pub fn rho_bounds(epsilon: f64) -> (f64, f64) {
    let r = (1.0 - epsilon).sqrt();
    (1.0 - r, 1.0 + r)
}

/// Relaxation factor `ρ = (U − A + γ√Δ)/(U + S)` for an accepted iterate.
///
/// The result is clamped into [`rho_bounds`], which only absorbs rounding:
/// in exact arithmetic every admissible `ρ` already lies there.
pub fn relaxation_factor(stats: &SubproblemStats, rule: GammaRule) -> Result<RelaxationDecision> {
    let SubproblemStats {
        residual_sq: u,
        subgrad_sq: s,
        cross_term: a,
        discriminant: delta,
        epsilon,
    } = *stats;
    if !(a < u) || !(delta >= 0.0) {
        return Err(Error::Contract(format!(
            "relaxation factor requested for a rejected iterate (U={u}, A={a}, Δ={delta})"
        )));
    }
    let root = delta.sqrt();
    let ratio = if root > 0.0 {
        (a - u) / root
    } else {
        f64::NEG_INFINITY
    };
    let gamma_min = ratio.max(-1.0);
    let gamma = rule.choose(gamma_min, ratio);
    let (lo, hi) = rho_bounds(epsilon);
    let rho = ((u - a + gamma * root) / (u + s)).clamp(lo, hi);
    Ok(RelaxationDecision {
        gamma_min,
        gamma,
        rho,
        mode: RelaxationMode::Adaptive,
    })
}

/// Applies `w ← w − ρcs`, `p̄ = p − cu`, `p ← p − ρcu` and advances `k`.
///
/// Returns the new state together with `p̄`.
pub fn outer_update(
    state: &OuterState,
    u: &Vector,
    s: &Subgradient,
    rho: f64,
) -> Result<(OuterState, Vector)> {
    check_len("u", u, state.m())?;
    check_len("s_x", &s.s_x, state.n())?;
    check_len("s_z", &s.s_z, state.m())?;
    if !(rho > 0.0) {
        return Err(Error::Contract(format!("relaxation factor must be positive, got {rho}")));
    }
    let c = state.c;
    let step = rho * c;
    let p_bar = &state.p - u * c;
    let next = OuterState {
        p: &state.p - u * step,
        w_x: &state.w_x - &s.s_x * step,
        w_z: &state.w_z - &s.s_z * step,
        c,
        epsilon: state.epsilon,
        k: state.k + 1,
    };
    Ok((next, p_bar))
}

/// `U = 0` and `S = 0` up to [`TOL_ZERO`]: the iterate is a saddle point.
pub fn declare_exact_optimum(stats: &SubproblemStats) -> bool {
    stats.residual_sq <= TOL_ZERO && stats.subgrad_sq <= TOL_ZERO
}
