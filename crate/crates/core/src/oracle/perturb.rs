//! Random distance-preserving perturbations of a trajectory.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::kinematics::{ProblemSpec, Trajectory};
use crate::quadrature;

/// Quadratic smooth step up, a plateau, and a quadratic smooth step down.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bump {
    pub start: f64,
    pub rise_end: f64,
    pub fall_start: f64,
    pub end: f64,
}

fn step(u: f64) -> (f64, f64) {
    if u <= 0.5 {
        (2.0 * u * u, 4.0 * u)
    } else {
        let w = 1.0 - u;
        (1.0 - 2.0 * w * w, 4.0 * w)
    }
}

impl Bump {
    pub fn value(&self, t: f64) -> f64 {
        self.eval(t).0
    }

    pub fn slope(&self, t: f64) -> f64 {
        self.eval(t).1
    }

    fn eval(&self, t: f64) -> (f64, f64) {
        if t <= self.start || t >= self.end {
            (0.0, 0.0)
        } else if t < self.rise_end {
            let w = self.rise_end - self.start;
            let (s, ds) = step((t - self.start) / w);
            (s, ds / w)
        } else if t <= self.fall_start {
            (1.0, 0.0)
        } else {
            let w = self.end - self.fall_start;
            let (s, ds) = step((self.end - t) / w);
            (s, -ds / w)
        }
    }

    /// Integral of the unit-height bump.
    pub fn mass(&self) -> f64 {
        0.5 * (self.rise_end - self.start) + (self.fall_start - self.rise_end) + 0.5 * (self.end - self.fall_start)
    }

    fn knots(&self) -> [f64; 6] {
        [
            self.start,
            0.5 * (self.start + self.rise_end),
            self.rise_end,
            self.fall_start,
            0.5 * (self.fall_start + self.end),
            self.end,
        ]
    }
}

/// `h = amplitude (add - (|add| / |remove|) remove)`, which integrates to zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Perturbation {
    pub add: Bump,
    pub remove: Bump,
    pub amplitude: f64,
    pub delta: f64,
}

impl Perturbation {
    fn ratio(&self) -> f64 {
        self.add.mass() / self.remove.mass()
    }

    /// Unit-amplitude shape and its slope.
    fn shape(&self, t: f64) -> (f64, f64) {
        let r = self.ratio();
        let (a, da) = self.add.eval(t);
        let (b, db) = self.remove.eval(t);
        (a - r * b, da - r * db)
    }

    fn knots(&self) -> Vec<f64> {
        let mut k: Vec<f64> = self.add.knots().into_iter().chain(self.remove.knots()).collect();
        k.sort_by(f64::total_cmp);
        k
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbationReport {
    pub n: usize,
    pub min_delta: f64,
    pub worst: Option<Perturbation>,
    /// Draws discarded because no nonzero amplitude was feasible.
    pub resampled: usize,
}

/// Exact change in expected arrival time when `h` is added to the velocity.
///
/// With `x` the running integral of `v`, the objective differs from
/// `∫ (v_max - v)^2 f / (2 α v_max) - ∫ v (1 - F) / v_max` by a constant.
pub fn perturbation_delta(traj: &Trajectory, p: &ProblemSpec, pert: &Perturbation) -> Result<f64> {
    if pert.amplitude == 0.0 {
        return Ok(0.0);
    }
    let (alpha, vm) = (p.alpha, p.v_max);
    let integrand = |t: f64| {
        let h = pert.amplitude * pert.shape(t).0;
        if h == 0.0 {
            return 0.0;
        }
        let v = traj.velocity_at(t);
        let f = p.dist.pdf(t);
        let surv = p.dist.survival(t);
        h * (-(vm - v) * f / alpha - surv) / vm + h * h * f / (2.0 * alpha * vm)
    };
    let mut breaks = pert.knots();
    breaks.extend(traj.breakpoints());
    let lo = pert.add.start.min(pert.remove.start);
    let hi = pert.add.end.max(pert.remove.end).min(p.dist.q_support());
    quadrature::integrate_with_breaks(integrand, lo, hi, &breaks, 1e-13)
}

/// Largest feasible amplitudes `(lo <= 0, hi >= 0)` keeping speed in `[0, v_max]` and slope in `[-β, α]`.
fn amplitude_range(traj: &Trajectory, p: &ProblemSpec, pert: &Perturbation) -> (f64, f64) {
    let mut pts = pert.knots();
    let (a, b) = (pts[0], pts[pts.len() - 1]);
    pts.extend(traj.breakpoints().into_iter().filter(|&t| t > a && t < b));
    pts.extend((1..256).map(|i| a + (b - a) * i as f64 / 256.0));
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    let mut clamp = |c: f64, k: f64, min: f64, max: f64| {
        if k.abs() < 1e-300 {
            return;
        }
        // c + A k stays in [min, max]; current violations from rounding count as zero slack.
        let up = (max - c).max(0.0) / k;
        let down = (min - c).min(0.0) / k;
        let (l, h) = if k > 0.0 { (down, up) } else { (up, down) };
        lo = lo.max(l);
        hi = hi.min(h);
    };
    let seg_slope = |t: f64| traj.segments().iter().rev().find(|s| s.t_start() <= t).map_or(0.0, |s| s.slope(t));
    for &t in &pts {
        clamp(traj.velocity_at(t), pert.shape(t).0, 0.0, p.v_max);
    }
    for w in pts.windows(2) {
        let width = w[1] - w[0];
        if width <= 0.0 {
            continue;
        }
        for t in [w[0] + 1e-9 * width, 0.5 * (w[0] + w[1]), w[1] - 1e-9 * width] {
            clamp(seg_slope(t), pert.shape(t).1, -p.beta, p.alpha);
        }
    }
    (lo.min(0.0), hi.max(0.0))
}

fn sample_bump<R: Rng>(rng: &mut R, span: f64, boundaries: &[f64]) -> Bump {
    let len = span * 10f64.powf(rng.random_range(-3.0..-0.3));
    let mode = if boundaries.is_empty() { 0 } else { rng.random_range(0..4) };
    let tau = if boundaries.is_empty() { 0.0 } else { boundaries[rng.random_range(0..boundaries.len())] };
    let start = match mode {
        0 | 1 => rng.random::<f64>() * (span - len),
        2 => tau - len * rng.random::<f64>(),
        _ if rng.random_bool(0.5) => tau,
        _ => tau - len,
    };
    let start = start.clamp(0.0, (span - len).max(0.0));
    let mut parts = [rng.random_range(0.05..1.0), rng.random_range(0.0..1.0), rng.random_range(0.05..1.0)];
    let total: f64 = parts.iter().sum();
    parts.iter_mut().for_each(|x| *x *= len / total);
    Bump { start, rise_end: start + parts[0], fall_start: start + parts[0] + parts[1], end: start + len }
}

/// Samples `n` feasible distance-preserving perturbations and reports the most negative cost change.
pub fn perturbation_test(traj: &Trajectory, p: &ProblemSpec, n: usize, seed: u64) -> Result<PerturbationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = p.dist.q_support();
    let span = if q.is_finite() { q } else { 1.25 * traj.finite_end().max(1e-9) };
    let boundaries: Vec<f64> = traj.breakpoints().into_iter().filter(|&t| t > 0.0 && t < span).collect();
    let mut report = PerturbationReport { n: 0, min_delta: f64::INFINITY, worst: None, resampled: 0 };
    let max_draws = 50 * n.max(1);
    let mut draws = 0;
    while report.n < n && draws < max_draws {
        draws += 1;
        let add = sample_bump(&mut rng, span, &boundaries);
        let remove = sample_bump(&mut rng, span, &boundaries);
        let mut pert = Perturbation { add, remove, amplitude: 1.0, delta: 0.0 };
        let (lo, hi) = amplitude_range(traj, p, &pert);
        let positive = rng.random_bool(0.5);
        let cap = match (positive, hi > 0.0, lo < 0.0) {
            (true, true, _) | (false, true, false) => hi,
            (false, _, true) | (true, false, true) => lo,
            _ => {
                report.resampled += 1;
                continue;
            }
        };
        let scale = if rng.random_bool(0.5) { 1.0 } else { 10f64.powf(rng.random_range(-3.0..0.0)) };
        pert.amplitude = 0.999 * cap * scale;
        pert.delta = perturbation_delta(traj, p, &pert)?;
        report.n += 1;
        if pert.delta < report.min_delta {
            report.min_delta = pert.delta;
            report.worst = Some(pert);
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::GreenDistribution;
    use crate::kinematics::TrajectoryBuilder;

    #[test]
    fn bump_mass_and_continuity() {
        let b = Bump { start: 1.0, rise_end: 2.0, fall_start: 2.5, end: 4.5 };
        let num = quadrature::integrate_with_breaks(|t| b.value(t), 0.0, 5.0, &b.knots(), 1e-13).unwrap();
        assert!((num - b.mass()).abs() < 1e-12);
        for t in [1.5, 2.0, 2.5, 3.5] {
            assert!((b.value(t + 1e-9) - b.value(t - 1e-9)).abs() < 1e-8);
        }
    }

    #[test]
    fn zero_amplitude_gives_zero() {
        let p = ProblemSpec::new(6.0, 20.0, 200.0, 200.0, 1000.0, 4000.0, GreenDistribution::exponential(0.1).unwrap())
            .unwrap();
        let mut b = TrajectoryBuilder::new(&p);
        b.brake_to(0.0).hold(f64::INFINITY).unwrap();
        let t = b.finish();
        let bump = Bump { start: 1.0, rise_end: 2.0, fall_start: 2.0, end: 3.0 };
        let pert = Perturbation { add: bump, remove: bump, amplitude: 0.0, delta: 0.0 };
        assert_eq!(perturbation_delta(&t, &p, &pert).unwrap(), 0.0);
    }

    #[test]
    fn delta_matches_direct_difference() {
        let u = GreenDistribution::uniform(20.0).unwrap();
        let p = ProblemSpec::new(6.0, 20.0, 200.0, 50.0, 1000.0, 4000.0, u).unwrap();
        let mut b = TrajectoryBuilder::new(&p);
        b.accelerate_for(2.0).brake_for(1.0).accelerate_for(1.0).brake_for(2.0);
        let base = b.finish();
        let add = Bump { start: 0.0, rise_end: 1.0, fall_start: 1.0, end: 2.0 };
        let remove = Bump { start: 2.0, rise_end: 2.5, fall_start: 3.5, end: 4.0 };
        let pert = Perturbation { add, remove, amplitude: 0.7, delta: 0.0 };
        let delta = perturbation_delta(&base, &p, &pert).unwrap();
        // Direct evaluation by quadrature of the objective for v and v + h.
        let eval = |h_amp: f64| {
            let v = |t: f64| base.velocity_at(t) + h_amp * pert.shape(t).0;
            let knots: Vec<f64> = (0..=400).map(|i| i as f64 * 0.05).collect();
            let x = |t: f64| quadrature::integrate_with_breaks(v, 0.0, t, &knots, 1e-12).unwrap();
            quadrature::integrate_with_breaks(
                |t| (t + p.k_remainder(x(t), v(t))) * p.dist.pdf(t),
                0.0,
                6.0,
                &knots,
                1e-10,
            )
            .unwrap()
        };
        let direct = eval(0.7) - eval(0.0);
        assert!((delta - direct).abs() < 1e-8, "{delta} vs {direct}");
    }
}
