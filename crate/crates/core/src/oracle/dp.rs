//! Brute-force dynamic program over a (time, speed) grid.
//!
//! The distance constraint is priced with a multiplier `μ` and `μ` is bisected
//! until the traced distance brackets `d`; the two bracketing traces are mixed
//! so the reported profile covers exactly `d`. The reported cost is the exact
//! expected arrival time of that profile, so it is an upper bound on the optimum.

use serde::Serialize;

use crate::distributions::GreenDistribution;
use crate::error::{Error, Result};
use crate::kinematics::{Phase, PhasePattern, ProblemSpec};
use crate::quadrature;

const GL4: [(f64, f64); 4] = [
    (0.069_431_844_202_973_71, 0.173_927_422_568_726_93),
    (0.330_009_478_207_571_87, 0.326_072_577_431_273_07),
    (0.669_990_521_792_428_1, 0.326_072_577_431_273_07),
    (0.930_568_155_797_026_3, 0.173_927_422_568_726_93),
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DpGrid {
    /// Time steps.
    pub steps: usize,
    /// Speed intervals; nodes are `j v_max / speeds`.
    pub speeds: usize,
    pub horizon: f64,
    pub accel_choices: Vec<f64>,
    pub memory_budget_bytes: usize,
}

impl DpGrid {
    pub fn default_for(p: &ProblemSpec) -> Self {
        let q = p.dist.q_support();
        let horizon = if q.is_finite() {
            q
        } else {
            p.dist.quantile(1.0 - 1e-9) + p.d / p.v_max + p.v_max / p.alpha + p.v_max / p.beta
        };
        let mut accel_choices: Vec<f64> =
            (0..5).map(|i| -p.beta * (1.0 - i as f64 / 4.0)).chain((1..5).map(|i| p.alpha * i as f64 / 4.0)).collect();
        if !accel_choices.iter().any(|&a| (a + p.alpha).abs() <= 1e-12 * p.alpha) {
            accel_choices.push(-p.alpha);
        }
        Self { steps: 400, speeds: 200, horizon, accel_choices, memory_budget_bytes: 1 << 30 }
    }

    /// Same grid with twice the resolution in time and speed.
    pub fn refined(&self) -> Self {
        Self { steps: 2 * self.steps, speeds: 2 * self.speeds, ..self.clone() }
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    fn bytes(&self) -> usize {
        let nodes = self.speeds + 1;
        8 * (self.steps * nodes * self.accel_choices.len() + (self.steps + 1) * nodes)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DpResult {
    /// Exact expected arrival time of the traced profile.
    pub cost: f64,
    /// Discrete Lagrangian value at the final multiplier.
    pub dual_value: f64,
    pub mu: f64,
    pub distance: f64,
    /// `[t, v, x]` at every grid time.
    pub trace: Vec<[f64; 3]>,
    pub pattern: PhasePattern,
}

struct Dp<'a> {
    p: &'a ProblemSpec,
    grid: &'a DpGrid,
    dt: f64,
    dv: f64,
    /// Per step: density at the Gauss nodes and survival at the step end.
    pdf: Vec<[f64; 4]>,
    surv_end: Vec<f64>,
    /// `stage[(k * nodes + j) * actions + a]`, without the `μ Δx` term.
    stage: Vec<f64>,
    /// Per `(j, a)`: landing speed.
    landing: Vec<f64>,
    /// Per `(j, a)`: lower interpolation node and upper weight.
    landing_node: Vec<(usize, f64)>,
    terminal_zero: bool,
}

impl<'a> Dp<'a> {
    fn new(p: &'a ProblemSpec, grid: &'a DpGrid) -> Self {
        let dt = grid.dt();
        let dv = p.v_max / grid.speeds as f64;
        let nodes = grid.speeds + 1;
        let na = grid.accel_choices.len();
        let pdf: Vec<[f64; 4]> = (0..grid.steps)
            .map(|k| {
                let t0 = k as f64 * dt;
                GL4.map(|(u, _)| p.dist.pdf(t0 + u * dt))
            })
            .collect();
        let surv_end = (0..grid.steps).map(|k| p.dist.survival((k + 1) as f64 * dt)).collect();
        let mut landing = Vec::with_capacity(nodes * na);
        for j in 0..nodes {
            let v = j as f64 * dv;
            for &a in &grid.accel_choices {
                landing.push(step_to(v, a, dt, p.v_max));
            }
        }
        let landing_node = landing.iter().map(|&v| node_weight(v, dv, grid.speeds)).collect();
        let mut dp = Self {
            p,
            grid,
            dt,
            dv,
            pdf,
            surv_end,
            stage: Vec::new(),
            landing,
            landing_node,
            terminal_zero: !p.dist.q_support().is_finite(),
        };
        let mut stage = Vec::with_capacity(grid.steps * nodes * na);
        for k in 0..grid.steps {
            for j in 0..nodes {
                for a in 0..na {
                    stage.push(dp.stage_cost(k, j as f64 * dv, dp.landing[j * na + a]));
                }
            }
        }
        dp.stage = stage;
        dp
    }

    /// `∫ [(v_max - v)^2/(2 α v_max) - (x - x_k)/v_max] f - Δx (1 - F(t_{k+1}))/v_max` over step `k`.
    fn stage_cost(&self, k: usize, v0: f64, v1: f64) -> f64 {
        let (alpha, vm, dt) = (self.p.alpha, self.p.v_max, self.dt);
        let s = (v1 - v0) / dt;
        let mut acc = 0.0;
        for (i, (u, w)) in GL4.iter().enumerate() {
            let tau = u * dt;
            let v = v0 + s * tau;
            let dx = v0 * tau + 0.5 * s * tau * tau;
            acc += w * ((vm - v).powi(2) / (2.0 * alpha * vm) - dx / vm) * self.pdf[k][i];
        }
        acc * dt - 0.5 * (v0 + v1) * dt * self.surv_end[k] / vm
    }

    fn terminal(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.grid.speeds + 1];
        if self.terminal_zero {
            v[1..].iter_mut().for_each(|x| *x = f64::INFINITY);
        }
        v
    }

    fn interp(&self, layer: &[f64], v: f64) -> f64 {
        interp_at(layer, node_weight(v, self.dv, self.grid.speeds))
    }

    /// Value layers `0..=steps` for multiplier `mu`.
    fn backward(&self, mu: f64) -> Vec<Vec<f64>> {
        let nodes = self.grid.speeds + 1;
        let na = self.grid.accel_choices.len();
        let mut layers = vec![Vec::new(); self.grid.steps + 1];
        layers[self.grid.steps] = self.terminal();
        for k in (0..self.grid.steps).rev() {
            let next = &layers[k + 1];
            let mut cur = vec![f64::INFINITY; nodes];
            for (j, slot) in cur.iter_mut().enumerate() {
                let v = j as f64 * self.dv;
                for a in 0..na {
                    let v1 = self.landing[j * na + a];
                    let tail = interp_at(next, self.landing_node[j * na + a]);
                    if tail.is_infinite() {
                        continue;
                    }
                    let c = self.stage[(k * nodes + j) * na + a] + mu * 0.5 * (v + v1) * self.dt + tail;
                    if c < *slot {
                        *slot = c;
                    }
                }
            }
            layers[k] = cur;
        }
        layers
    }

    /// Greedy continuous-speed trace through the value layers.
    fn forward(&self, mu: f64, layers: &[Vec<f64>]) -> Vec<f64> {
        let mut vs = Vec::with_capacity(self.grid.steps + 1);
        let mut v = self.p.v0;
        vs.push(v);
        for k in 0..self.grid.steps {
            let mut best = (f64::INFINITY, step_to(v, -self.p.beta, self.dt, self.p.v_max));
            for &a in &self.grid.accel_choices {
                let v1 = step_to(v, a, self.dt, self.p.v_max);
                let c = self.stage_cost(k, v, v1) + mu * 0.5 * (v + v1) * self.dt + self.interp(&layers[k + 1], v1);
                if c < best.0 {
                    best = (c, v1);
                }
            }
            v = best.1;
            vs.push(v);
        }
        vs
    }

    fn distance(&self, vs: &[f64]) -> f64 {
        vs.windows(2).map(|w| 0.5 * (w[0] + w[1]) * self.dt).sum()
    }

    fn run(&self, mu: f64) -> (Vec<f64>, f64, f64) {
        let layers = self.backward(mu);
        let vs = self.forward(mu, &layers);
        let dual = self.interp(&layers[0], self.p.v0);
        let dist = self.distance(&vs);
        (vs, dist, dual)
    }
}

fn node_weight(v: f64, dv: f64, speeds: usize) -> (usize, f64) {
    let s = (v / dv).clamp(0.0, speeds as f64);
    let j = (s.floor() as usize).min(speeds);
    (j, s - j as f64)
}

/// Linear interpolation where any infinite node with positive weight wins.
fn interp_at(layer: &[f64], (j, w): (usize, f64)) -> f64 {
    if w <= 0.0 || j + 1 >= layer.len() {
        return layer[j];
    }
    if w >= 1.0 {
        return layer[j + 1];
    }
    let (lo, hi) = (layer[j], layer[j + 1]);
    if lo.is_infinite() || hi.is_infinite() {
        return f64::INFINITY;
    }
    (1.0 - w) * lo + w * hi
}

fn step_to(v: f64, a: f64, dt: f64, v_max: f64) -> f64 {
    let v1 = (v + a * dt).clamp(0.0, v_max);
    if v1 < 1e-12 * v_max {
        0.0
    } else {
        v1
    }
}

/// Exact expected arrival time of a piecewise-linear profile on the grid.
fn exact_cost(p: &ProblemSpec, dt: f64, vs: &[f64]) -> Result<(f64, Vec<f64>)> {
    let mut xs = Vec::with_capacity(vs.len());
    let mut x = 0.0;
    xs.push(x);
    for w in vs.windows(2) {
        x += 0.5 * (w[0] + w[1]) * dt;
        xs.push(x);
    }
    let n = vs.len() - 1;
    let end = n as f64 * dt;
    let state = |t: f64| {
        let k = ((t / dt).floor() as usize).min(n - 1);
        let tau = t - k as f64 * dt;
        let s = (vs[k + 1] - vs[k]) / dt;
        (xs[k] + vs[k] * tau + 0.5 * s * tau * tau, (vs[k] + s * tau).clamp(0.0, p.v_max))
    };
    let integrand = |t: f64| {
        let (x, v) = state(t);
        (t + p.k_remainder(x, v)) * p.dist.pdf(t)
    };
    let breaks: Vec<f64> = (1..n).map(|k| k as f64 * dt).collect();
    let mut total = quadrature::integrate_with_breaks(integrand, 0.0, end, &breaks, 1e-11)?;
    if let GreenDistribution::Exponential { lambda } = p.dist {
        let xn = xs[n];
        total += (-lambda * end).exp() * (end + 1.0 / lambda + p.k_remainder(xn, vs[n]));
    }
    Ok((total, xs))
}

fn classify_step(p: &ProblemSpec, v0: f64, v1: f64, dt: f64) -> Phase {
    let tol = 1e-9 * p.v_max;
    if v0 <= tol && v1 <= tol {
        return Phase::Zero;
    }
    if v0 >= p.v_max - tol && v1 >= p.v_max - tol {
        return Phase::VMax;
    }
    let s = (v1 - v0) / dt;
    if s >= p.alpha * (1.0 - 1e-6) {
        Phase::Alpha
    } else if s <= -p.beta * (1.0 - 1e-6) {
        Phase::Beta
    } else {
        Phase::El
    }
}

/// Phase pattern of a gridded profile, ignoring runs shorter than `min_run` steps.
fn extract_pattern(p: &ProblemSpec, vs: &[f64], dt: f64, min_run: usize) -> PhasePattern {
    let mut runs: Vec<(Phase, usize)> = Vec::new();
    for w in vs.windows(2) {
        let ph = classify_step(p, w[0], w[1], dt);
        match runs.last_mut() {
            Some((last, n)) if *last == ph => *n += 1,
            _ => runs.push((ph, 1)),
        }
    }
    let long: Vec<Phase> = runs
        .iter()
        .enumerate()
        .filter(|(i, (_, n))| *n >= min_run || (*i == 0 && runs.len() == 1))
        .map(|(_, (ph, _))| *ph)
        .collect();
    PhasePattern::from_phases(long)
}

/// Minimizes expected arrival time on a grid, independent of the closed-form solvers.
pub fn dp_min_cost(p: &ProblemSpec, grid: &DpGrid) -> Result<DpResult> {
    p.check_parameters()?;
    if grid.steps == 0 || grid.speeds == 0 || grid.accel_choices.is_empty() || !(grid.horizon > 0.0) {
        return Err(Error::Oracle("empty grid".into()));
    }
    let needed = grid.bytes();
    if needed > grid.memory_budget_bytes {
        return Err(Error::MemoryBudget { needed, budget: grid.memory_budget_bytes });
    }
    let dp = Dp::new(p, grid);
    let d = p.d;
    let (mut lo_trace, mut lo_dist, mut lo_dual) = dp.run(0.0);
    let mut mu_lo = 0.0;
    if lo_dist < d * (1.0 - 1e-6) {
        return Err(Error::Oracle(format!("grid reaches at most {lo_dist} of {d}")));
    }
    let (vs, dist, dual, mu) = if lo_dist <= d {
        (lo_trace, lo_dist, lo_dual, 0.0)
    } else {
        let mut mu_hi = 1.0 / p.v_max;
        let mut hi = dp.run(mu_hi);
        let mut expansions = 0;
        while hi.1 > d {
            mu_lo = mu_hi;
            (lo_trace, lo_dist, lo_dual) = hi;
            mu_hi *= 2.0;
            hi = dp.run(mu_hi);
            expansions += 1;
            if expansions > 200 {
                return Err(Error::Oracle(format!("no multiplier brings the distance down to {d}")));
            }
        }
        for _ in 0..50 {
            if mu_hi - mu_lo <= 1e-9 * mu_hi {
                break;
            }
            let mid = 0.5 * (mu_lo + mu_hi);
            let r = dp.run(mid);
            if r.1 > d {
                mu_lo = mid;
                (lo_trace, lo_dist, lo_dual) = r;
            } else {
                mu_hi = mid;
                hi = r;
            }
        }
        let (hi_trace, hi_dist, hi_dual) = hi;
        let theta = if lo_dist > hi_dist { (d - hi_dist) / (lo_dist - hi_dist) } else { 1.0 };
        let vs: Vec<f64> = lo_trace.iter().zip(&hi_trace).map(|(a, b)| theta * a + (1.0 - theta) * b).collect();
        let dist = dp.distance(&vs);
        (vs, dist, theta * lo_dual + (1.0 - theta) * hi_dual, 0.5 * (mu_lo + mu_hi))
    };
    let c0 = p.dist.mean() + p.l / p.v_max;
    let tail = if dp.terminal_zero { p.v_max * p.dist.survival(grid.horizon) / (2.0 * p.alpha) } else { 0.0 };
    let (cost, xs) = exact_cost(p, dp.dt, &vs)?;
    let trace = vs.iter().zip(&xs).enumerate().map(|(k, (&v, &x))| [k as f64 * dp.dt, v, x]).collect();
    let min_run = (grid.steps / 100).max(2);
    Ok(DpResult {
        cost,
        dual_value: c0 + tail + dual - mu * d,
        mu,
        distance: dist,
        trace,
        pattern: extract_pattern(p, &vs, dp.dt, min_run),
    })
}
