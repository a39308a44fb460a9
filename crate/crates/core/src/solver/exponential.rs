//! Exponential green time: isobars `A - b e^{λt}` and the optimal switch to braking.

use serde::Serialize;

use crate::distributions::GreenDistribution;
use crate::error::{Error, Result};
use crate::euler_lagrange::{el_distance, v_beta};
use crate::kinematics::{
    validate_problem, Phase, PhasePattern, ProblemSpec, SegmentKind, Trajectory, TrajectoryBuilder,
};
use crate::roots;

use super::{RegionLabel, SolveReport};

const EDGE_RTOL: f64 = 1e-12;

/// Which boundary set applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExpRegime {
    /// `v_β > 0` and the switch speed is below `v_max`.
    SwitchBelowVmax,
    /// `v_β > 0` and the switch speed is at or above `v_max`.
    SwitchAboveVmax,
    /// `v_β <= 0`: isobars are never steeper than braking.
    NoSwitch,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum VcStar {
    NoSwitch,
    Root { v_c_star: f64, exceeds_vmax: bool },
}

impl VcStar {
    pub fn value(&self) -> Option<f64> {
        match self {
            VcStar::NoSwitch => None,
            VcStar::Root { v_c_star, .. } => Some(*v_c_star),
        }
    }
}

/// Constants of an exponential instance plus the solved transition data.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpSolverState {
    pub lambda: f64,
    #[serde(rename = "A")]
    pub a_const: f64,
    pub v_beta: f64,
    pub v_c_star: VcStar,
    pub regime: ExpRegime,
    pub region: Option<PhasePattern>,
    /// Entry into the isobar.
    pub t0: Option<f64>,
    /// Switch from the isobar to braking.
    pub t_c: Option<f64>,
    /// Peak speed of a leading acceleration.
    pub v_a: Option<f64>,
}

fn lambda_of(p: &ProblemSpec, op: &'static str) -> Result<f64> {
    match p.dist {
        GreenDistribution::Exponential { lambda } => Ok(lambda),
        _ => Err(Error::UnsupportedDistribution(op, "exponential")),
    }
}

impl ExpSolverState {
    pub fn new(p: &ProblemSpec) -> Result<Self> {
        let lambda = lambda_of(p, "ExpSolverState")?;
        let v_c_star = solve_vc_star(p)?;
        let regime = match v_c_star {
            VcStar::NoSwitch => ExpRegime::NoSwitch,
            VcStar::Root { exceeds_vmax: false, .. } => ExpRegime::SwitchBelowVmax,
            VcStar::Root { exceeds_vmax: true, .. } => ExpRegime::SwitchAboveVmax,
        };
        Ok(Self {
            lambda,
            a_const: p.v_max + p.alpha / lambda,
            v_beta: v_beta(p)?,
            v_c_star,
            regime,
            region: None,
            t0: None,
            t_c: None,
            v_a: None,
        })
    }

    fn vc(&self) -> f64 {
        self.v_c_star.value().unwrap_or(0.0)
    }

    fn el(&self, v_hi: f64, v_lo: f64) -> f64 {
        el_distance(v_hi, v_lo, self.lambda, self.a_const).unwrap_or(f64::NAN)
    }
}

/// Switch function whose positive root is the optimal switch speed.
pub fn f_of_vc(v_c: f64, p: &ProblemSpec) -> Result<f64> {
    let lambda = lambda_of(p, "f_of_vc")?;
    let a = p.v_max + p.alpha / lambda;
    let k = p.beta + lambda * a;
    Ok(-(lambda * lambda / p.beta) * v_c * v_c + (lambda / p.beta) * k * v_c + (-lambda * v_c / p.beta).exp_m1() * k)
}

/// Root of the switch function on `[v_β, ∞)`.
pub fn solve_vc_star(p: &ProblemSpec) -> Result<VcStar> {
    let vb = v_beta(p)?;
    if vb <= 0.0 {
        return Ok(VcStar::NoSwitch);
    }
    let f = |v: f64| f_of_vc(v, p).unwrap_or(f64::NAN);
    let cap = 1e6 * p.v_max;
    let lo = vb;
    let f_lo = f(lo);
    let root = if f_lo <= 0.0 {
        lo
    } else {
        let mut hi = 2.0 * lo;
        while f(hi) >= 0.0 {
            if hi > cap {
                return Err(Error::NoSwitchRoot { cap });
            }
            hi *= 2.0;
        }
        roots::find_root(f, lo, hi, 1e-15)?
    };
    Ok(VcStar::Root { v_c_star: root, exceeds_vmax: root >= p.v_max })
}

/// Rate of change of the switch speed with the switch time.
pub fn vc_prime(v_c: f64, p: &ProblemSpec) -> Result<f64> {
    let lambda = lambda_of(p, "vc_prime")?;
    let a = p.v_max + p.alpha / lambda;
    Ok(-lambda * p.beta * p.v_max * (a - v_c) / (p.beta * (p.v_max - v_c) + lambda * (a - v_c) * v_c))
}

fn pat(seq: &[Phase]) -> PhasePattern {
    PhasePattern::new(seq.to_vec(), true)
}

/// Closed-form region boundaries in `d` at fixed `v0`, sorted.
pub fn boundaries(v0: f64, st: &ExpSolverState, p: &ProblemSpec) -> Result<Vec<f64>> {
    let (a, b, vm) = (p.alpha, p.beta, p.v_max);
    let d_min = v0 * v0 / (2.0 * b);
    let mut out = vec![d_min];
    match st.regime {
        ExpRegime::SwitchBelowVmax => {
            let vc = st.vc();
            let d3 = (vm * vm - v0 * v0) / (2.0 * a) + st.el(vm, vc) + vc * vc / (2.0 * b);
            if v0 < vc {
                out.push(vc * vc * (1.0 / (2.0 * b) + 1.0 / (2.0 * a)) - v0 * v0 / (2.0 * a));
            } else {
                out.push(st.el(v0, vc) + vc * vc / (2.0 * b));
            }
            out.push(d3);
        }
        ExpRegime::SwitchAboveVmax => {
            out.push(vm * vm * (1.0 / (2.0 * a) + 1.0 / (2.0 * b)) - v0 * v0 / (2.0 * a));
        }
        ExpRegime::NoSwitch => {
            out.push(st.el(v0, 0.0));
            out.push((vm * vm - v0 * v0) / (2.0 * a) + st.el(vm, 0.0));
        }
    }
    Ok(out)
}

/// Closed-form region of `(v0, d)`.
pub fn classify_region(v0: f64, d: f64, st: &ExpSolverState, p: &ProblemSpec) -> Result<RegionLabel> {
    use Phase::*;
    let bnd = boundaries(v0, st, p)?;
    let d_min = bnd[0];
    let eps = EDGE_RTOL * d.abs().max(f64::MIN_POSITIVE);
    if d < d_min - eps {
        return Ok(RegionLabel::Infeasible);
    }
    if (d - d_min).abs() <= eps {
        return Ok(RegionLabel::Pattern(pat(&[Beta])));
    }
    let at_top = v0 >= p.v_max * (1.0 - EDGE_RTOL);
    let seq: &[Phase] = match st.regime {
        ExpRegime::SwitchBelowVmax => {
            let (mid, d3) = (bnd[1], bnd[2]);
            if v0 < st.vc() {
                if d <= mid + eps {
                    &[Alpha, Beta]
                } else if d <= d3 + eps {
                    &[Alpha, El, Beta]
                } else {
                    &[Alpha, VMax, El, Beta]
                }
            } else if d < mid - eps {
                &[Beta, El, Beta]
            } else if d <= mid + eps {
                &[El, Beta]
            } else if d <= d3 + eps && !at_top {
                &[Alpha, El, Beta]
            } else if at_top {
                &[VMax, El, Beta]
            } else {
                &[Alpha, VMax, El, Beta]
            }
        }
        ExpRegime::SwitchAboveVmax => {
            if d <= bnd[1] + eps {
                &[Alpha, Beta]
            } else if at_top {
                &[VMax, Beta]
            } else {
                &[Alpha, VMax, Beta]
            }
        }
        ExpRegime::NoSwitch => {
            let (d_el, d_top) = (bnd[1], bnd[2]);
            if d < d_el - eps {
                &[Beta, El]
            } else if d <= d_el + eps {
                &[El]
            } else if d <= d_top + eps && !at_top {
                &[Alpha, El]
            } else if at_top {
                &[VMax, El]
            } else {
                &[Alpha, VMax, El]
            }
        }
    };
    Ok(RegionLabel::Pattern(pat(seq)))
}

/// Solves a monotone increasing `g` on `[lo, hi]`, tolerating slight misses at the ends.
fn increasing_root<G: Fn(f64) -> f64>(g: G, lo: f64, hi: f64, slack: f64) -> Option<f64> {
    if lo > hi {
        return None;
    }
    let (g_lo, g_hi) = (g(lo), g(hi));
    if g_lo >= 0.0 {
        return (g_lo <= slack).then_some(lo);
    }
    if g_hi <= 0.0 {
        return (-g_hi <= slack).then_some(hi);
    }
    roots::find_root(g, lo, hi, 1e-15).ok()
}

/// Builds the member of `family` that switches from the isobar at speed `v_switch` and covers `d`.
///
/// Families ending on an isobar ride it to standstill and ignore `v_switch`.
/// Returns `None` when no member of the family meets the distance constraint.
pub fn family_trajectory(p: &ProblemSpec, family: &PhasePattern, v_switch: f64) -> Result<Option<Trajectory>> {
    use Phase::*;
    let lambda = lambda_of(p, "family_trajectory")?;
    let big_a = p.v_max + p.alpha / lambda;
    let (a, b, vm, v0, d) = (p.alpha, p.beta, p.v_max, p.v0, p.d);
    let el = |hi: f64, lo: f64| el_distance(hi, lo, lambda, big_a).unwrap_or(f64::NAN);
    let slack = 1e-10 * d;
    let seq = family.sequence.as_slice();
    let final_brake = seq.last() == Some(&Beta) && seq.len() > 1 || seq == [Beta];
    let vs = if seq.last() == Some(&El) { 0.0 } else { v_switch };
    if seq.contains(&El) && !(0.0..=vm).contains(&vs) {
        return Ok(None);
    }
    let tail = if final_brake { vs * vs / (2.0 * b) } else { 0.0 };
    let mut tb = TrajectoryBuilder::new(p);
    let core: &[Phase] = if final_brake && seq.len() > 1 { &seq[..seq.len() - 1] } else { seq };
    match core {
        [Beta] => {
            if (v0 * v0 / (2.0 * b) - d).abs() > slack {
                return Ok(None);
            }
            tb.brake_to(0.0);
        }
        [Alpha] => {
            // α⇝β: peak from the distance constraint.
            let vp = ((d + v0 * v0 / (2.0 * a)) / (1.0 / (2.0 * a) + 1.0 / (2.0 * b))).sqrt();
            if vp < v0 * (1.0 - 1e-12) || vp > vm * (1.0 + 1e-12) {
                return Ok(None);
            }
            tb.accelerate_to(vp.clamp(v0, vm)).brake_to(0.0);
        }
        [Alpha, VMax] | [VMax] if final_brake && !seq.contains(&El) => {
            let hold = (d - (vm * vm - v0 * v0) / (2.0 * a) - vm * vm / (2.0 * b)) / vm;
            if hold < -slack / vm || (core == [VMax] && v0 < vm * (1.0 - 1e-12)) {
                return Ok(None);
            }
            tb.accelerate_to(vm).hold(hold.max(0.0))?.brake_to(0.0);
        }
        [Alpha, El] => {
            let g = |va: f64| (va * va - v0 * v0) / (2.0 * a) + el(va, vs) + tail - d;
            let Some(va) = increasing_root(g, v0.max(vs), vm, slack) else { return Ok(None) };
            tb.accelerate_to(va).follow_isobar_to(vs)?;
        }
        [Alpha, VMax, El] | [VMax, El] => {
            let hold = (d - (vm * vm - v0 * v0) / (2.0 * a) - el(vm, vs) - tail) / vm;
            if hold < -slack / vm || (core[0] == VMax && v0 < vm * (1.0 - 1e-12)) {
                return Ok(None);
            }
            tb.accelerate_to(vm).hold(hold.max(0.0))?.follow_isobar_to(vs)?;
        }
        [Beta, El] => {
            let g = |vb: f64| (v0 * v0 - vb * vb) / (2.0 * b) + el(vb, vs) + tail - d;
            let Some(vb) = increasing_root(g, vs, v0, slack) else { return Ok(None) };
            tb.brake_to(vb).follow_isobar_to(vs)?;
        }
        [El] => {
            if v0 < vs || (el(v0, vs) + tail - d).abs() > slack {
                return Ok(None);
            }
            tb.follow_isobar_to(vs)?;
        }
        _ => return Err(Error::Oracle(format!("family {family} is not supported"))),
    }
    if final_brake {
        tb.brake_to(0.0);
    }
    tb.hold(f64::INFINITY)?;
    Ok(Some(tb.finish()))
}

/// Solves an exponential instance.
pub fn solve_exponential(p: &ProblemSpec) -> Result<SolveReport> {
    lambda_of(p, "solve_exponential")?;
    let v = validate_problem(p);
    if !v.is_solvable() {
        return Err(Error::Rejected(v));
    }
    let mut st = ExpSolverState::new(p)?;
    let RegionLabel::Pattern(region) = classify_region(p.v0, p.d, &st, p)? else {
        return Err(Error::Rejected(v));
    };
    log::debug!("exponential region {region} (regime {:?})", st.regime);
    let traj = family_trajectory(p, &region, st.vc())?.ok_or(Error::BoundaryDegenerate { nearest: region.clone() })?;
    for s in traj.segments() {
        match s.kind() {
            SegmentKind::EulerLagrange(_) => {
                st.t0 = Some(s.t_start());
                st.t_c = Some(s.t_end());
            }
            SegmentKind::Alpha => st.v_a = Some(s.v_end()),
            _ => {}
        }
    }
    st.region = Some(region);
    SolveReport::assemble(p, traj, None, Some(st))
}
