use std::fmt;

use serde::Serialize;

use crate::distributions::{DistributionKind, GreenDistribution};
use crate::error::{check_positive, Error, Result};

/// One approach to the light.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub alpha: f64,
    pub beta: f64,
    pub v_max: f64,
    pub v0: f64,
    pub d: f64,
    /// Distance from first sighting to the destination beyond the light.
    pub l: f64,
    pub dist: GreenDistribution,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationCode {
    InvalidParameter,
    StoppingInfeasible,
    DestinationTooClose,
    LightBeyondDestination,
    BrakingWeakerThanAcceleration,
    DensityInvalid,
    LightUnreachable,
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).ok();
        f.write_str(s.as_ref().and_then(|v| v.as_str()).unwrap_or("?"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub code: ViolationCode,
    pub message: String,
}

/// Outcome of [`validate_problem`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProblemValidation {
    pub feasible: bool,
    pub trivial: bool,
    pub reasons: Vec<Violation>,
}

impl ProblemValidation {
    /// True when the solvers accept the instance.
    pub fn is_solvable(&self) -> bool {
        self.reasons.is_empty()
    }
}

impl fmt::Display for ProblemValidation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let codes: Vec<String> = self.reasons.iter().map(|r| r.code.to_string()).collect();
        write!(f, "{}", codes.join(", "))
    }
}

/// Relative slack applied to the boundary inequalities.
const EDGE_RTOL: f64 = 1e-12;

impl ProblemSpec {
    pub fn new(alpha: f64, beta: f64, v_max: f64, v0: f64, d: f64, l: f64, dist: GreenDistribution) -> Result<Self> {
        let p = Self { alpha, beta, v_max, v0, d, l, dist };
        p.check_parameters()?;
        Ok(p)
    }

    pub fn check_parameters(&self) -> Result<()> {
        check_positive("alpha", self.alpha)?;
        check_positive("beta", self.beta)?;
        check_positive("v_max", self.v_max)?;
        check_positive("d", self.d)?;
        check_positive("L", self.l)?;
        if !(self.v0 >= 0.0 && self.v0 <= self.v_max) {
            return Err(Error::InvalidParameter {
                name: "v0",
                reason: format!("{} is outside [0, v_max = {}]", self.v0, self.v_max),
            });
        }
        Ok(())
    }

    /// Shortest distance at which the vehicle can be held before the support ends.
    pub fn min_distance(&self) -> f64 {
        let q = self.dist.q_support();
        let t1 = self.v0 / self.beta;
        if q >= t1 {
            self.v0 * self.v0 / (2.0 * self.beta)
        } else {
            q * (self.v0 - 0.5 * q * self.beta)
        }
    }

    /// Longest distance coverable before the support ends.
    pub fn max_distance(&self) -> f64 {
        let q = self.dist.q_support();
        if q.is_infinite() {
            return f64::INFINITY;
        }
        let t3 = (self.v_max - self.v0) / self.alpha;
        if q <= t3 {
            q * (self.v0 + 0.5 * q * self.alpha)
        } else {
            (self.v_max * self.v_max - self.v0 * self.v0) / (2.0 * self.alpha) + self.v_max * (q - t3)
        }
    }

    /// Time still needed at the moment of green from position `x` at speed `v`.
    pub fn k_remainder(&self, x: f64, v: f64) -> f64 {
        let dv = self.v_max - v;
        dv * dv / (2.0 * self.alpha * self.v_max) + (self.l - x) / self.v_max
    }

    pub fn with_start(&self, v0: f64, d: f64) -> Self {
        Self { v0, d, ..self.clone() }
    }
}

/// Feasibility and non-triviality report.
pub fn validate_problem(p: &ProblemSpec) -> ProblemValidation {
    let mut reasons = Vec::new();
    let mut push = |code, message: String| reasons.push(Violation { code, message });
    if let Err(e) = p.check_parameters() {
        push(ViolationCode::InvalidParameter, e.to_string());
        return ProblemValidation { feasible: false, trivial: false, reasons };
    }
    let min_d = p.min_distance();
    let feasible = p.d >= min_d * (1.0 - EDGE_RTOL);
    if !feasible {
        push(ViolationCode::StoppingInfeasible, format!("d = {} is below the braking distance {}", p.d, min_d));
    }
    let reach = p.max_distance();
    let trivial = p.d > reach * (1.0 + EDGE_RTOL);
    if trivial {
        push(ViolationCode::LightUnreachable, format!("d = {} exceeds the reachable distance {}", p.d, reach));
    }
    let l_min = p.v_max * p.v_max / (2.0 * p.alpha);
    if p.l < l_min {
        push(ViolationCode::DestinationTooClose, format!("L = {} is below v_max^2/(2 alpha) = {}", p.l, l_min));
    }
    if p.d > p.l {
        push(ViolationCode::LightBeyondDestination, format!("d = {} exceeds L = {}", p.d, p.l));
    }
    match p.dist.kind() {
        DistributionKind::Uniform if p.beta < p.alpha => push(
            ViolationCode::BrakingWeakerThanAcceleration,
            format!("beta = {} is below alpha = {}", p.beta, p.alpha),
        ),
        DistributionKind::Excess => {
            let report = p.dist.validate_density(10_000);
            if !report.is_ok() {
                push(
                    ViolationCode::DensityInvalid,
                    format!("{} grid violations, worst {}", report.violations.len(), report.max_violation),
                );
            }
        }
        _ => {}
    }
    ProblemValidation { feasible, trivial, reasons }
}
