//! Full solver runs: the four inexact ALM variants and classical ADMM.

use std::fmt;
use std::str::FromStr;

use crate::fenchel::{
    acceptance_test, compute_stats, declare_exact_optimum, outer_update, relaxation_factor,
    GammaRule, OuterState, RelaxationDecision, RelaxationMode, SubproblemStats, Verdict,
};
use crate::inner::{InnerSolver, InnerState};
use crate::lasso::{
    kkt_residual_inf, objective, solve_x_subproblem, solve_z_subproblem, ProblemInstance,
    XSolverCache,
};
use crate::{Error, Result, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Admm,
    AlmFistaCd,
    AlmArFistaCd,
    AlmAdss,
    AlmArAdss,
}

impl Algorithm {
    /// All algorithms, in reporting order.
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Admm,
        Algorithm::AlmFistaCd,
        Algorithm::AlmArFistaCd,
        Algorithm::AlmAdss,
        Algorithm::AlmArAdss,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Algorithm::Admm => "admm",
            Algorithm::AlmFistaCd => "alm_fista_cd",
            Algorithm::AlmArFistaCd => "alm_ar_fista_cd",
            Algorithm::AlmAdss => "alm_adss",
            Algorithm::AlmArAdss => "alm_ar_adss",
        }
    }

    pub fn is_adaptive(self) -> bool {
        matches!(self, Algorithm::AlmArFistaCd | Algorithm::AlmArAdss)
    }

    pub fn is_alm(self) -> bool {
        self != Algorithm::Admm
    }

    pub fn relaxation_mode(self) -> RelaxationMode {
        if self.is_adaptive() {
            RelaxationMode::Adaptive
        } else {
            RelaxationMode::FixedUnit
        }
    }

    fn uses_fista(self) -> bool {
        matches!(self, Algorithm::AlmFistaCd | Algorithm::AlmArFistaCd)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.id() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm {s:?}")))
    }
}

/// Which iterate the termination residual is evaluated at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TerminationPoint {
    /// The x-block iterate (the linear-solve output).
    X,
    /// The z-block iterate (the soft-thresholding output).
    #[default]
    Z,
}

impl FromStr for TerminationPoint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" => Ok(TerminationPoint::X),
            "z" => Ok(TerminationPoint::Z),
            _ => Err(Error::Config(format!("termination point must be x or z, got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmConfig {
    pub algorithm: Algorithm,
    pub c: f64,
    pub epsilon: f64,
    /// FISTA-CD constant, `a > 2`.
    pub a: f64,
    /// Inner iterations during which adaptive runs insist on `ρ ≥ 1`.
    pub j1: usize,
    /// Inner-iteration count above which `w` is reset to `(x, z)`; `None`
    /// disables the reset.
    pub jr: Option<usize>,
    pub delta: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    pub gamma_rule: GammaRule,
    pub termination: TerminationPoint,
}

impl AlgorithmConfig {
    pub fn new(algorithm: Algorithm, c: f64) -> Self {
        Self {
            algorithm,
            c,
            epsilon: 0.1,
            a: 3.0,
            j1: 0,
            jr: None,
            delta: 1e-6,
            max_outer: 100_000,
            max_inner: 10_000,
            gamma_rule: GammaRule::Max,
            termination: TerminationPoint::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.c > 0.0 && self.c.is_finite()) {
            return bad(format!("c must be positive, got {}", self.c));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad(format!("epsilon must lie in (0, 1), got {}", self.epsilon));
        }
        if !(self.a > 2.0) {
            return bad(format!("a must exceed 2, got {}", self.a));
        }
        if self.jr == Some(0) {
            return bad("jr must be positive".into());
        }
        if !(self.delta > 0.0) {
            return bad(format!("delta must be positive, got {}", self.delta));
        }
        if self.max_outer == 0 || self.max_inner == 0 {
            return bad("iteration caps must be positive".into());
        }
        Ok(())
    }

    fn inner_solver(&self) -> InnerSolver {
        if self.algorithm.uses_fista() {
            InnerSolver::FistaCd { a: self.a }
        } else {
            InnerSolver::Adss
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RunStatus {
    Converged,
    ExactOptimum,
    MaxOuter,
    MaxInner,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Converged => "converged",
            RunStatus::ExactOptimum => "exact_optimum",
            RunStatus::MaxOuter => "max_outer",
            RunStatus::MaxInner => "max_inner",
        }
    }

    pub fn is_success(self) -> bool {
        matches!(self, RunStatus::Converged | RunStatus::ExactOptimum)
    }
}

impl fmt::Display for RunStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One row of a per-run trace, written once per outer iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub k: usize,
    /// Inner iterations spent in this outer iteration.
    pub j: usize,
    pub residual_sq: f64,
    pub subgrad_sq: f64,
    /// `A` and `Δ` are not defined for ADMM.
    pub cross_term: Option<f64>,
    pub discriminant: Option<f64>,
    pub rho: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub algorithm: Algorithm,
    pub outer_iterations: usize,
    pub inner_iterations_cumulative: usize,
    pub final_residual: f64,
    pub final_objective: f64,
    pub status: RunStatus,
    pub rho_trace: Vec<f64>,
    pub residual_trace: Vec<f64>,
    pub objective_trace: Vec<f64>,
    pub trace: Vec<TraceRow>,
    /// Reported primal solution (the termination iterate).
    pub x: Vector,
    pub p: Vector,
}

/// Everything that happened in one accepted outer iteration of an ALM run.
#[derive(Debug)]
pub struct OuterStep<'a> {
    pub before: &'a OuterState,
    pub after: &'a OuterState,
    pub inner: &'a InnerState,
    pub stats: SubproblemStats,
    pub decision: RelaxationDecision,
    pub p_bar: &'a Vector,
    /// Whether `w` was reset to `(x, z)` after the update.
    pub reset: bool,
}

fn termination_iterate(point: TerminationPoint, x: &Vector, z: &Vector) -> Vector {
    match point {
        TerminationPoint::X => x.clone(),
        TerminationPoint::Z => z.clone(),
    }
}

/// Runs any of the five algorithms.
pub fn run(inst: &ProblemInstance, cfg: &AlgorithmConfig) -> Result<RunRecord> {
    if cfg.algorithm.is_alm() {
        run_alm(inst, cfg)
    } else {
        run_admm(inst, cfg)
    }
}

pub fn run_alm(inst: &ProblemInstance, cfg: &AlgorithmConfig) -> Result<RunRecord> {
    run_alm_observed(inst, cfg, |_| {})
}

/// Inexact ALM run from `p = 0`, `w = 0`, `z = 0`, calling `observer` after
/// every accepted outer iteration.
pub fn run_alm_observed(
    inst: &ProblemInstance,
    cfg: &AlgorithmConfig,
    mut observer: impl FnMut(&OuterStep<'_>),
) -> Result<RunRecord> {
    cfg.validate()?;
    if !cfg.algorithm.is_alm() {
        return Err(Error::Config(format!("{} is not an ALM variant", cfg.algorithm)));
    }
    let n = inst.n();
    let cache = XSolverCache::new(inst, cfg.c)?;
    let solver = cfg.inner_solver();
    let mode = cfg.algorithm.relaxation_mode();

    let mut state = OuterState::new(n, n, cfg.c, cfg.epsilon)?;
    let mut z_k = Vector::zeros(n);
    let mut rec = RunRecord {
        algorithm: cfg.algorithm,
        outer_iterations: 0,
        inner_iterations_cumulative: 0,
        final_residual: f64::INFINITY,
        final_objective: f64::NAN,
        status: RunStatus::MaxOuter,
        rho_trace: Vec::new(),
        residual_trace: Vec::new(),
        objective_trace: Vec::new(),
        trace: Vec::new(),
        x: Vector::zeros(n),
        p: Vector::zeros(n),
    };

    for _ in 0..cfg.max_outer {
        let mut inner = InnerState::warm_start(&z_k);
        let stats = loop {
            inner = solver.step(&inner, &state, inst, &cache)?;
            // M = I, so Mx is x itself
            let stats = compute_stats(&inner.x, &inner.z, &inner.x, &inner.s, &state)?;
            if declare_exact_optimum(&stats) {
                rec.inner_iterations_cumulative += inner.j;
                let x = termination_iterate(cfg.termination, &inner.x, &inner.z);
                rec.final_residual = kkt_residual_inf(inst, &x);
                rec.final_objective = objective(inst, &x);
                rec.x = x;
                rec.p = state.p.clone();
                rec.status = RunStatus::ExactOptimum;
                return Ok(rec);
            }
            if acceptance_test(&stats, mode, inner.j, cfg.j1) == Verdict::Accept {
                break stats;
            }
            if inner.j >= cfg.max_inner {
                rec.inner_iterations_cumulative += inner.j;
                let x = termination_iterate(cfg.termination, &inner.x, &inner.z);
                rec.final_residual = kkt_residual_inf(inst, &x);
                rec.final_objective = objective(inst, &x);
                rec.x = x;
                rec.p = state.p.clone();
                rec.status = RunStatus::MaxInner;
                return Ok(rec);
            }
        };

        let decision = match mode {
            RelaxationMode::Adaptive => relaxation_factor(&stats, cfg.gamma_rule)?,
            RelaxationMode::FixedUnit => RelaxationDecision::fixed_unit(),
        };
        let (mut next, p_bar) = outer_update(&state, &inner.u, &inner.s, decision.rho)?;
        let reset = cfg.jr.is_some_and(|jr| inner.j > jr);
        if reset {
            next.w_x.copy_from(&inner.x);
            next.w_z.copy_from(&inner.z);
        } else {
            debug_assert!(next.w_z == state.w_z, "w_z moved without a z-subgradient");
        }
        observer(&OuterStep {
            before: &state,
            after: &next,
            inner: &inner,
            stats,
            decision,
            p_bar: &p_bar,
            reset,
        });

        state = next;
        rec.outer_iterations += 1;
        rec.inner_iterations_cumulative += inner.j;
        let x = termination_iterate(cfg.termination, &inner.x, &inner.z);
        let residual = kkt_residual_inf(inst, &x);
        let obj = objective(inst, &x);
        rec.rho_trace.push(decision.rho);
        rec.residual_trace.push(residual);
        rec.objective_trace.push(obj);
        rec.trace.push(TraceRow {
            k: rec.outer_iterations,
            j: inner.j,
            residual_sq: stats.residual_sq,
            subgrad_sq: stats.subgrad_sq,
            cross_term: Some(stats.cross_term),
            discriminant: Some(stats.discriminant),
            rho: decision.rho,
            residual,
        });
        rec.final_residual = residual;
        rec.final_objective = obj;
        rec.x = x;
        z_k = inner.z;
        if residual <= cfg.delta {
            rec.p = state.p;
            rec.status = RunStatus::Converged;
            return Ok(rec);
        }
    }
    rec.p = state.p;
    rec.status = RunStatus::MaxOuter;
    Ok(rec)
}

pub fn run_admm(inst: &ProblemInstance, cfg: &AlgorithmConfig) -> Result<RunRecord> {
    let n = inst.n();
    run_admm_from(inst, cfg, Vector::zeros(n), Vector::zeros(n))
}

/// ADMM with constant penalty from the given `(z⁰, p⁰)`.
pub fn run_admm_from(
    inst: &ProblemInstance,
    cfg: &AlgorithmConfig,
    z0: Vector,
    p0: Vector,
) -> Result<RunRecord> {
    cfg.validate()?;
    if cfg.algorithm != Algorithm::Admm {
        return Err(Error::Config(format!("{} is not ADMM", cfg.algorithm)));
    }
    crate::check_len("z0", &z0, inst.n())?;
    crate::check_len("p0", &p0, inst.n())?;
    let c = cfg.c;
    let cache = XSolverCache::new(inst, c)?;
    let mut z = z0;
    let mut p = p0;
    let mut rec = RunRecord {
        algorithm: Algorithm::Admm,
        outer_iterations: 0,
        inner_iterations_cumulative: 0,
        final_residual: f64::INFINITY,
        final_objective: f64::NAN,
        status: RunStatus::MaxOuter,
        rho_trace: Vec::new(),
        residual_trace: Vec::new(),
        objective_trace: Vec::new(),
        trace: Vec::new(),
        x: Vector::zeros(inst.n()),
        p: Vector::zeros(inst.n()),
    };

    for k in 1..=cfg.max_outer {
        let x = solve_x_subproblem(inst, &cache, &p, c, &z)?;
        let z_next = solve_z_subproblem(inst, &p, c, &x)?;
        let gap = &x - &z_next;
        p += &gap * c;
        let s_x = (&z - &z_next) * c;
        z = z_next;

        let iterate = termination_iterate(cfg.termination, &x, &z);
        let residual = kkt_residual_inf(inst, &iterate);
        let obj = objective(inst, &iterate);
        rec.outer_iterations = k;
        rec.inner_iterations_cumulative = k;
        rec.rho_trace.push(1.0);
        rec.residual_trace.push(residual);
        rec.objective_trace.push(obj);
        rec.trace.push(TraceRow {
            k,
            j: 1,
            residual_sq: gap.norm_squared(),
            subgrad_sq: s_x.norm_squared(),
            cross_term: None,
            discriminant: None,
            rho: 1.0,
            residual,
        });
        rec.final_residual = residual;
        rec.final_objective = obj;
        rec.x = iterate;
        if residual <= cfg.delta {
            rec.status = RunStatus::Converged;
            break;
        }
    }
    rec.p = p;
    Ok(rec)
}
