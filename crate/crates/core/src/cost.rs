//! Expected arrival time and the pressure field.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::distributions::GreenDistribution;
use crate::error::{Error, Result};
use crate::kinematics::{ProblemSpec, Trajectory};
use crate::quadrature;

/// Absolute tolerance per integration piece.
pub const QUAD_TOL: f64 = 1e-10;

/// Checked remainder time `(v_max - v)^2/(2 α v_max) + (L - x)/v_max`.
pub fn k_remainder(x: f64, v: f64, p: &ProblemSpec) -> Result<f64> {
    if v > p.v_max || v < 0.0 {
        return Err(Error::InvalidParameter { name: "v", reason: format!("{v} outside [0, {}]", p.v_max) });
    }
    if x > p.l {
        return Err(Error::InvalidParameter { name: "x", reason: format!("{x} beyond L = {}", p.l) });
    }
    Ok(p.k_remainder(x, v))
}

fn table_knots(dist: &GreenDistribution) -> Vec<f64> {
    match dist {
        GreenDistribution::Excess(t) => t.knots().to_vec(),
        _ => Vec::new(),
    }
}

/// `∫_a^∞ (t + k(x_a + v (t - a), v)) λ e^{-λt} dt` for a constant speed `v`.
fn exponential_hold_tail(p: &ProblemSpec, lambda: f64, a: f64, x_a: f64, v: f64) -> f64 {
    let slope = 1.0 - v / p.v_max;
    let intercept = p.k_remainder(x_a, v) + v * a / p.v_max;
    (-lambda * a).exp() * (slope * (a + 1.0 / lambda) + intercept)
}

/// Expected arrival time at the destination, by quadrature split at segment boundaries.
pub fn expected_arrival(traj: &Trajectory, p: &ProblemSpec) -> Result<f64> {
    traj.audit()?;
    let dist = &p.dist;
    let q = dist.q_support();
    let knots = table_knots(dist);
    let integrand = |t: f64| (t + p.k_remainder(traj.position_at(t), traj.velocity_at(t))) * dist.pdf(t);
    let mut total = 0.0;
    let mut covered = 0.0;
    for s in traj.segments() {
        let a = s.t_start();
        if a >= q {
            break;
        }
        let b = s.t_end().min(q);
        if b.is_infinite() {
            let GreenDistribution::Exponential { lambda } = *dist else {
                return Err(Error::Trajectory("unbounded segment on a bounded support".into()));
            };
            total += exponential_hold_tail(p, lambda, a, s.x_start(), s.v_start());
            covered = f64::INFINITY;
            break;
        }
        let seg_integrand = |t: f64| (t + p.k_remainder(s.position(t), s.velocity(t))) * dist.pdf(t);
        total += quadrature::integrate_with_breaks(seg_integrand, a, b, &knots, QUAD_TOL)?;
        covered = b;
    }
    if covered < q {
        if q.is_infinite() {
            let GreenDistribution::Exponential { lambda } = *dist else { unreachable!() };
            total += exponential_hold_tail(p, lambda, covered, traj.position_at(covered), traj.velocity_at(covered));
        } else {
            total += quadrature::integrate_with_breaks(integrand, covered, q, &knots, QUAD_TOL)?;
        }
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
}

/// Monte-Carlo estimate of the expected arrival time by sampling the green time.
pub fn expected_arrival_mc(traj: &Trajectory, p: &ProblemSpec, n: usize, seed: u64) -> McEstimate {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for i in 0..n {
        let t = p.dist.sample(&mut rng);
        let y = t + p.k_remainder(traj.position_at(t), traj.velocity_at(t));
        let delta = y - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (y - mean);
    }
    let var = if n > 1 { m2 / (n - 1) as f64 } else { 0.0 };
    McEstimate { mean, std_error: (var / n.max(1) as f64).sqrt(), n }
}

/// `P_B(t, C) = -(v_max - C) f(t) + α F(t) + B`.
#[derive(Debug, Clone, PartialEq)]
pub struct PressureField {
    pub offset: f64,
    pub dist: GreenDistribution,
    pub alpha: f64,
    pub v_max: f64,
}

impl PressureField {
    pub fn new(p: &ProblemSpec, offset: f64) -> Self {
        Self { offset, dist: p.dist.clone(), alpha: p.alpha, v_max: p.v_max }
    }

    pub fn pressure(&self, t: f64, c: f64) -> f64 {
        -(self.v_max - c) * self.dist.pdf(t) + self.alpha * self.dist.cdf(t) + self.offset
    }
}

/// `∫ ∫_0^{v(t)} P_B(t, C) dC dt` over the support.
///
/// P is affine in C, so the inner integral is `v P(t, v/2)`.
pub fn pressure_action(traj: &Trajectory, pf: &PressureField) -> Result<f64> {
    let q = pf.dist.q_support();
    let end = traj.finite_end().min(q);
    let mut knots = table_knots(&pf.dist);
    knots.extend(traj.breakpoints());
    let f = |t: f64| {
        let v = traj.velocity_at(t);
        v * pf.pressure(t, 0.5 * v)
    };
    let mut total = quadrature::integrate_with_breaks(f, 0.0, end, &knots, QUAD_TOL)?;
    if end < q && traj.velocity_at(end) != 0.0 {
        if q.is_infinite() {
            return Err(Error::Trajectory("moving forever on an unbounded support".into()));
        }
        total += quadrature::integrate_with_breaks(f, end, q, &knots, QUAD_TOL)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::TrajectoryBuilder;

    fn exp_problem(v0: f64, d: f64) -> ProblemSpec {
        ProblemSpec::new(6.0, 20.0, 200.0, v0, d, 4000.0, GreenDistribution::exponential(0.1).unwrap()).unwrap()
    }

    fn brake_then_stop(p: &ProblemSpec) -> Trajectory {
        let mut b = TrajectoryBuilder::new(p);
        b.brake_to(0.0).hold(f64::INFINITY).unwrap();
        b.finish()
    }

    #[test]
    fn remainder_checks() {
        let p = exp_problem(0.0, 1000.0);
        assert!(k_remainder(0.0, 201.0, &p).is_err());
        assert!(k_remainder(4001.0, 0.0, &p).is_err());
        assert!((k_remainder(4000.0, 0.0, &p).unwrap() - 16.666_666_666_666_668).abs() < 1e-12);
    }

    #[test]
    fn standstill_under_uniform() {
        let u = GreenDistribution::uniform(8.0).unwrap();
        let p = ProblemSpec { alpha: 6.0, beta: 20.0, v_max: 200.0, v0: 0.0, d: 1.0, l: 4000.0, dist: u };
        let mut b = TrajectoryBuilder::new(&p);
        b.hold_to_horizon().unwrap();
        let s = expected_arrival(&b.finish(), &p).unwrap();
        assert!((s - (4.0 + p.k_remainder(0.0, 0.0))).abs() < 1e-10);
    }

    #[test]
    fn exponential_tail_matches_numeric() {
        let p = exp_problem(200.0, 1000.0);
        let traj = brake_then_stop(&p);
        let s = expected_arrival(&traj, &p).unwrap();
        let horizon = 60.0 / 0.1;
        let num = quadrature::integrate_with_breaks(
            |t| (t + p.k_remainder(traj.position_at(t), traj.velocity_at(t))) * p.dist.pdf(t),
            0.0,
            horizon,
            &[10.0, 50.0, 100.0],
            1e-12,
        )
        .unwrap();
        assert!(((s - num) / s).abs() < 1e-9);
        let stop = 10.0;
        let tail = (-0.1f64 * stop).exp() * (stop + 10.0 + p.k_remainder(1000.0, 0.0));
        let head = quadrature::integrate(
            |t| (t + p.k_remainder(traj.position_at(t), traj.velocity_at(t))) * p.dist.pdf(t),
            0.0,
            stop,
            1e-12,
        )
        .unwrap();
        assert!((head + tail - s).abs() < 1e-9);
    }

    #[test]
    fn monte_carlo_is_deterministic_and_close() {
        let p = exp_problem(120.0, 2000.0);
        let mut b = TrajectoryBuilder::new(&p);
        b.accelerate_to(200.0);
        let left = 2000.0 - b.position() - 1000.0;
        b.hold(left / 200.0).unwrap().brake_to(0.0).hold(f64::INFINITY).unwrap();
        let traj = b.finish();
        let a = expected_arrival_mc(&traj, &p, 20_000, 7);
        let b = expected_arrival_mc(&traj, &p, 20_000, 7);
        assert_eq!(a, b);
        let s = expected_arrival(&traj, &p).unwrap();
        assert!((a.mean - s).abs() < 4.0 * a.std_error);
    }

    #[test]
    fn pressure_examples() {
        let p = exp_problem(0.0, 1000.0);
        let pf = PressureField::new(&p, 3.0);
        assert!((pf.pressure(0.0, 200.0) - 3.0).abs() < 1e-15);
        let t = 4.0;
        let c = 50.0;
        let want = -(200.0 - c) * 0.1 * (-0.4f64).exp() + 6.0 * (1.0 - (-0.4f64).exp()) + 3.0;
        assert!((pf.pressure(t, c) - want).abs() < 1e-12);
        // Along an isobar with the matching offset the pressure vanishes.
        let curve = crate::euler_lagrange::ElCurve::through(&p.dist, 6.0, 200.0, 2.0, 150.0);
        let pf = PressureField::new(&p, curve.offset());
        for t in [0.0, 1.0, 5.0] {
            assert!(pf.pressure(t, curve.velocity(t)).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_profile_has_zero_action() {
        let u = GreenDistribution::uniform(8.0).unwrap();
        let p = ProblemSpec { alpha: 6.0, beta: 20.0, v_max: 200.0, v0: 0.0, d: 1.0, l: 4000.0, dist: u };
        let mut b = TrajectoryBuilder::new(&p);
        b.hold_to_horizon().unwrap();
        assert_eq!(pressure_action(&b.finish(), &PressureField::new(&p, 2.0)).unwrap(), 0.0);
    }

    #[test]
    fn action_identity_and_offset_shift() {
        let p = exp_problem(200.0, 1000.0);
        let traj = brake_then_stop(&p);
        let s = expected_arrival(&traj, &p).unwrap();
        for offset in [0.0, -4.0, 11.0] {
            let pa = pressure_action(&traj, &PressureField::new(&p, offset)).unwrap();
            let rebuilt = p.dist.mean()
                + p.v_max / (2.0 * p.alpha)
                + p.l / p.v_max
                + (pa - (offset + p.alpha) * p.d) / (p.alpha * p.v_max);
            assert!((rebuilt - s).abs() < 1e-9);
        }
        let a0 = pressure_action(&traj, &PressureField::new(&p, 0.0)).unwrap();
        let a1 = pressure_action(&traj, &PressureField::new(&p, 2.5)).unwrap();
        assert!((a1 - a0 - 2.5 * p.d).abs() < 1e-8);
    }
}
