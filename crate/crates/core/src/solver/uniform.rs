//! Uniform green time: fill the feasible region with level lines of slope -α.

use crate::error::{Error, Result};
use crate::euler_lagrange::ElCurve;
use crate::kinematics::{validate_problem, Phase, PhasePattern, ProblemSpec, TrajectoryBuilder};
use crate::roots;

use super::{fewer_phases, RegionLabel, SolveReport};

const EDGE_RTOL: f64 = 1e-12;

/// Feasible `(t, v)` region for a uniform law on `[0, q)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformTank {
    pub v0: f64,
    pub alpha: f64,
    pub beta: f64,
    pub v_max: f64,
    pub q: f64,
    /// Braking ramp reaches zero.
    pub t1: f64,
    /// Level line through the start reaches zero.
    pub t2: f64,
    /// Acceleration ramp reaches `v_max`.
    pub t3: f64,
    /// Level line through the top corner reaches zero.
    pub t4: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Piece {
    Floor,
    Ceiling,
    Level,
}

impl UniformTank {
    pub fn new(p: &ProblemSpec) -> Self {
        let t3 = (p.v_max - p.v0) / p.alpha;
        Self {
            v0: p.v0,
            alpha: p.alpha,
            beta: p.beta,
            v_max: p.v_max,
            q: p.dist.q_support(),
            t1: p.v0 / p.beta,
            t2: p.v0 / p.alpha,
            t3,
            t4: t3 + p.v_max / p.alpha,
        }
    }

    pub fn lower(&self, t: f64) -> f64 {
        (self.v0 - self.beta * t).max(0.0)
    }

    pub fn upper(&self, t: f64) -> f64 {
        (self.v0 + self.alpha * t).min(self.v_max)
    }

    /// Height of the filled region at `t` for level intercept `c`.
    pub fn surface(&self, c: f64, t: f64) -> f64 {
        (c - self.alpha * t).clamp(self.lower(t), self.upper(t))
    }

    /// Largest useful level: the line clears the whole region.
    pub fn max_level(&self) -> f64 {
        self.v_max + self.alpha * self.q
    }

    fn breakpoints(&self, c: f64) -> Vec<f64> {
        let a = self.alpha;
        let mut pts = vec![self.t1, self.t3, c / a, (c - self.v0) / (2.0 * a), (c - self.v_max) / a];
        if self.beta > a {
            pts.push((self.v0 - c) / (self.beta - a));
        }
        pts.retain(|&t| t > 0.0 && t < self.q);
        pts.push(0.0);
        pts.push(self.q);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// Area under the surface; exact since the surface is linear between break points.
    pub fn area(&self, c: f64) -> f64 {
        let pts = self.breakpoints(c);
        pts.windows(2).map(|w| 0.5 * (self.surface(c, w[0]) + self.surface(c, w[1])) * (w[1] - w[0])).sum()
    }

    pub fn min_area(&self) -> f64 {
        self.area(0.0)
    }

    pub fn full_area(&self) -> f64 {
        self.area(self.max_level())
    }

    fn piece(&self, c: f64, t: f64) -> Piece {
        let s = c - self.alpha * t;
        let tol = 1e-12 * self.v_max;
        if s < self.lower(t) - tol {
            Piece::Floor
        } else if s > self.upper(t) + tol {
            Piece::Ceiling
        } else {
            Piece::Level
        }
    }

    /// Pattern of the surface at a level that is not critical.
    pub fn pattern_at_level(&self, c: f64) -> PhasePattern {
        let a = self.alpha;
        let q = self.q;
        let mut seq = Vec::new();
        let mut zero = false;
        if c < self.v0 {
            seq.push(Phase::Beta);
            let meet = if self.beta > a { (self.v0 - c) / (self.beta - a) } else { f64::INFINITY };
            if meet < q && meet < self.t1 {
                seq.push(Phase::El);
                zero = c / a < q;
            } else {
                zero = self.t1 < q;
            }
        } else if c > self.v0 {
            if self.v0 < self.v_max {
                seq.push(Phase::Alpha);
            }
            let meet = (c - self.v0) / (2.0 * a);
            if meet < self.t3 {
                if meet < q {
                    seq.push(Phase::El);
                    zero = c / a < q;
                }
            } else if self.t3 < q {
                seq.push(Phase::VMax);
                if (c - self.v_max) / a < q {
                    seq.push(Phase::El);
                    zero = c / a < q;
                }
            }
        } else {
            seq.push(Phase::El);
            zero = c / a < q;
        }
        PhasePattern::new(seq, zero)
    }

    fn critical_levels(&self) -> Vec<f64> {
        let (a, q, v0, vm) = (self.alpha, self.q, self.v0, self.v_max);
        let top = self.max_level();
        let mut levels =
            vec![0.0, top, a * v0 / self.beta, v0, 2.0 * vm - v0, a * q, v0 - (self.beta - a) * q, v0 + 2.0 * a * q];
        levels.retain(|&c| (0.0..=top).contains(&c));
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        levels
    }

    /// Distances at which the optimal pattern changes, with the patterns below and above.
    ///
    /// The first entry is the braking limit and the last the full region.
    pub fn region_boundaries(&self) -> Vec<(f64, Option<PhasePattern>, Option<PhasePattern>)> {
        let levels = self.critical_levels();
        let mut out: Vec<(f64, Option<PhasePattern>, Option<PhasePattern>)> = vec![(self.min_area(), None, None)];
        let mut current: Option<PhasePattern> = None;
        for w in levels.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let (a_lo, a_hi) = (self.area(lo), self.area(hi));
            if a_hi <= a_lo {
                continue;
            }
            let pat = self.pattern_at_level(0.5 * (lo + hi));
            match &current {
                None => out[0].2 = Some(pat.clone()),
                Some(prev) if *prev != pat => out.push((a_lo, Some(prev.clone()), Some(pat.clone()))),
                _ => {}
            }
            current = Some(pat);
        }
        out.push((self.full_area(), current, None));
        out
    }
}

/// Area of the filled region at level intercept `c`.
pub fn tank_area_at_level(tank: &UniformTank, c: f64) -> f64 {
    tank.area(c)
}

/// Closed-form region classification at `(v0, d)`.
pub fn uniform_phase_region(p: &ProblemSpec, v0: f64, d: f64) -> Result<RegionLabel> {
    let tank = UniformTank::new(&p.with_start(v0, d));
    let bounds = tank.region_boundaries();
    let scale = d.abs().max(f64::MIN_POSITIVE);
    let (d_min, d_full) = (bounds[0].0, bounds[bounds.len() - 1].0);
    if d < d_min * (1.0 - EDGE_RTOL) {
        return Ok(RegionLabel::Infeasible);
    }
    if d > d_full * (1.0 + EDGE_RTOL) {
        return Ok(RegionLabel::Trivial);
    }
    if (d - d_min).abs() <= EDGE_RTOL * scale {
        return Ok(RegionLabel::Pattern(tank.pattern_at_level(0.0)));
    }
    if (d - d_full).abs() <= EDGE_RTOL * scale {
        return Ok(RegionLabel::Pattern(tank.pattern_at_level(tank.max_level() * 2.0 + 1.0)));
    }
    for (b, below, above) in &bounds[1..bounds.len() - 1] {
        if (d - b).abs() <= EDGE_RTOL * scale {
            if let (Some(x), Some(y)) = (below, above) {
                return Ok(RegionLabel::Pattern(fewer_phases(x.clone(), y.clone())));
            }
        }
    }
    let idx = bounds.partition_point(|(b, _, _)| *b < d);
    let pattern = bounds[idx.saturating_sub(1)].2.clone().or_else(|| bounds[idx].1.clone());
    pattern.map(RegionLabel::Pattern).ok_or_else(|| Error::Oracle(format!("no region found for d = {d}")))
}

/// Solves a uniform instance by bisection on the fill level.
pub fn solve_uniform(p: &ProblemSpec) -> Result<SolveReport> {
    let q = match p.dist {
        crate::distributions::GreenDistribution::Uniform { q } => q,
        _ => return Err(Error::UnsupportedDistribution("solve_uniform", "uniform")),
    };
    let v = validate_problem(p);
    if !v.is_solvable() {
        return Err(Error::Rejected(v));
    }
    let tank = UniformTank::new(p);
    let c = if p.d >= tank.full_area() * (1.0 - EDGE_RTOL) {
        tank.max_level()
    } else if p.d <= tank.min_area() * (1.0 + EDGE_RTOL) {
        0.0
    } else {
        roots::bisect(|c| tank.area(c), 0.0, tank.max_level(), p.d, 200)
    };
    let area = tank.area(c);
    if (area - p.d).abs() > 1e-9 * p.d.max(1.0) {
        return Err(Error::Oracle(format!("fill level {c} gives area {area}, wanted {}", p.d)));
    }
    let curve = ElCurve::Uniform { v_max: p.v_max, alpha: p.alpha, q, offset: (p.v_max - c) / q };
    let pts = tank.breakpoints(c);
    let mut runs: Vec<(Phase, f64)> = Vec::new();
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let m = 0.5 * (a + b);
        let phase = match tank.piece(c, m) {
            Piece::Floor if m < tank.t1 => Phase::Beta,
            Piece::Floor => Phase::Zero,
            Piece::Ceiling if m < tank.t3 => Phase::Alpha,
            Piece::Ceiling => Phase::VMax,
            Piece::Level => Phase::El,
        };
        match runs.last_mut() {
            Some((last, dur)) if *last == phase => *dur += b - a,
            _ => runs.push((phase, b - a)),
        }
    }
    let mut b = TrajectoryBuilder::new(p);
    for (phase, dur) in runs {
        match phase {
            Phase::Alpha => {
                b.accelerate_for(dur);
            }
            Phase::Beta => {
                b.brake_for(dur);
            }
            Phase::VMax | Phase::Zero => {
                b.hold(dur)?;
            }
            Phase::El => {
                b.follow_curve_for(curve.clone(), dur);
            }
        }
    }
    SolveReport::assemble(p, b.finish(), Some(c), None)
}
