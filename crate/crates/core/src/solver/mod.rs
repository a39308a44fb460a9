//! Exact solvers for the two closed-form green-time laws.

pub mod exponential;
pub mod uniform;

use std::fmt;

use serde::Serialize;

use crate::cost::expected_arrival;
use crate::distributions::GreenDistribution;
use crate::error::{Error, Result};
use crate::kinematics::{validate_problem, Phase, PhasePattern, ProblemSpec, Trajectory};

pub use exponential::{
    classify_region, f_of_vc, solve_exponential, solve_vc_star, vc_prime, ExpRegime, ExpSolverState, VcStar,
};
pub use uniform::{solve_uniform, tank_area_at_level, uniform_phase_region, UniformTank};

/// Region of the `(v0, d)` plane.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RegionLabel {
    Infeasible,
    Trivial,
    Pattern(PhasePattern),
}

impl fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegionLabel::Infeasible => f.write_str("infeasible"),
            RegionLabel::Trivial => f.write_str("trivial"),
            RegionLabel::Pattern(p) => p.fmt(f),
        }
    }
}

/// Entry into a phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Transition {
    pub time: f64,
    pub velocity: f64,
    pub position: f64,
    #[serde(serialize_with = "phase_token")]
    pub phase: Phase,
}

fn phase_token<S: serde::Serializer>(p: &Phase, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(p.token())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Diagnostics {
    /// `|∫v - d| / d`.
    pub distance_residual: f64,
    pub lipschitz_violation: f64,
    pub continuity_gap: f64,
}

/// Solver output.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub pattern: PhasePattern,
    pub transitions: Vec<Transition>,
    pub expected_arrival: f64,
    /// Fill level intercept (uniform law).
    pub level: Option<f64>,
    /// Exponential-law state.
    pub exponential: Option<ExpSolverState>,
    pub diagnostics: Diagnostics,
    pub trajectory: Trajectory,
}

impl SolveReport {
    pub(crate) fn assemble(
        p: &ProblemSpec,
        trajectory: Trajectory,
        level: Option<f64>,
        exponential: Option<ExpSolverState>,
    ) -> Result<Self> {
        let transitions = trajectory
            .segments()
            .iter()
            .map(|s| Transition {
                time: s.t_start(),
                velocity: s.v_start(),
                position: s.x_start(),
                phase: s.kind().phase(),
            })
            .collect();
        let diagnostics = Diagnostics {
            distance_residual: (trajectory.total_distance() - p.d).abs() / p.d,
            lipschitz_violation: trajectory.check_lipschitz(2000),
            continuity_gap: trajectory.continuity_gap(),
        };
        Ok(Self {
            pattern: trajectory.pattern(),
            transitions,
            expected_arrival: expected_arrival(&trajectory, p)?,
            level,
            exponential,
            diagnostics,
            trajectory,
        })
    }
}

/// Validates and dispatches to the solver for the instance's law.
pub fn solve(p: &ProblemSpec) -> Result<SolveReport> {
    let v = validate_problem(p);
    if !v.is_solvable() {
        return Err(Error::Rejected(v));
    }
    match p.dist {
        GreenDistribution::Uniform { .. } => solve_uniform(p),
        GreenDistribution::Exponential { .. } => solve_exponential(p),
        GreenDistribution::Excess(_) => Err(Error::UnsupportedDistribution("solve", "uniform or exponential")),
    }
}

/// Closed-form region of `(v0, d)` for the instance's law.
pub fn classify(p: &ProblemSpec, v0: f64, d: f64) -> Result<RegionLabel> {
    match p.dist {
        GreenDistribution::Uniform { .. } => uniform_phase_region(p, v0, d),
        GreenDistribution::Exponential { .. } => {
            let st = ExpSolverState::new(p)?;
            classify_region(v0, d, &st, p)
        }
        GreenDistribution::Excess(_) => Err(Error::UnsupportedDistribution("classify", "uniform or exponential")),
    }
}

/// Region boundaries in `d` at fixed `v0`, sorted.
pub fn region_boundaries(p: &ProblemSpec, v0: f64) -> Result<Vec<f64>> {
    match p.dist {
        GreenDistribution::Uniform { .. } => {
            Ok(UniformTank::new(&p.with_start(v0, p.d)).region_boundaries().into_iter().map(|b| b.0).collect())
        }
        GreenDistribution::Exponential { .. } => {
            let st = ExpSolverState::new(p)?;
            exponential::boundaries(v0, &st, p)
        }
        GreenDistribution::Excess(_) => {
            Err(Error::UnsupportedDistribution("region_boundaries", "uniform or exponential"))
        }
    }
}

/// Picks the pattern with fewer phases; ties go to `a`.
pub(crate) fn fewer_phases(a: PhasePattern, b: PhasePattern) -> PhasePattern {
    if b.len() < a.len() {
        b
    } else {
        a
    }
}
