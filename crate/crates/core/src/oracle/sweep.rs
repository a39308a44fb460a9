//! Cost of a pattern family as a function of the switch speed.

use serde::Serialize;

use crate::cost::expected_arrival;
use crate::error::{Error, Result};
use crate::euler_lagrange::v_beta;
use crate::kinematics::{Phase, PhasePattern, ProblemSpec};
use crate::solver::exponential::family_trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub v_c: f64,
    /// `None` when no member of the family meets the distance constraint.
    pub cost: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCurve {
    pub family: PhasePattern,
    pub points: Vec<SweepPoint>,
    pub argmin: Option<SweepPoint>,
}

/// Evaluates the family on `points` switch speeds spanning `[max(v_β, 0), v_max]`.
pub fn sweep_switch_velocity(p: &ProblemSpec, family: &PhasePattern, points: usize) -> Result<SweepCurve> {
    let seq = &family.sequence;
    let switches = seq.windows(2).any(|w| w == [Phase::El, Phase::Beta]);
    if !switches {
        return Err(Error::Oracle(format!("family {family} has no switch from the isobar to braking")));
    }
    let lo = v_beta(p)?.max(0.0);
    let hi = p.v_max;
    if !(lo < hi) || points < 2 {
        return Err(Error::Oracle(format!("empty switch range [{lo}, {hi}]")));
    }
    let mut out = Vec::with_capacity(points);
    for i in 0..points {
        let v_c = lo + (hi - lo) * i as f64 / (points - 1) as f64;
        let cost = match family_trajectory(p, family, v_c)? {
            Some(t) => Some(expected_arrival(&t, p)?),
            None => None,
        };
        out.push(SweepPoint { v_c, cost });
    }
    let argmin =
        out.iter().filter(|s| s.cost.is_some()).min_by(|a, b| a.cost.unwrap().total_cmp(&b.cost.unwrap())).copied();
    Ok(SweepCurve { family: family.clone(), points: out, argmin })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::GreenDistribution;

    #[test]
    fn rejects_families_without_switch() {
        let p = ProblemSpec::new(6.0, 20.0, 200.0, 200.0, 4000.0, 4000.0, GreenDistribution::exponential(0.1).unwrap())
            .unwrap();
        let fam: PhasePattern = "alpha~>beta~>0".parse().unwrap();
        assert!(sweep_switch_velocity(&p, &fam, 11).is_err());
    }

    #[test]
    fn infeasible_candidates_are_absent() {
        let p = ProblemSpec::new(6.0, 20.0, 200.0, 100.0, 600.0, 4000.0, GreenDistribution::exponential(0.1).unwrap())
            .unwrap();
        let fam: PhasePattern = "beta~>el~>beta~>0".parse().unwrap();
        let c = sweep_switch_velocity(&p, &fam, 21).unwrap();
        assert!(c.points.iter().any(|s| s.cost.is_none()));
        assert!(c.points.iter().all(|s| s.cost.is_none_or(f64::is_finite)));
    }
}
