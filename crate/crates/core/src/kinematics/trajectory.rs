use crate::distributions::GreenDistribution;
use crate::error::{Error, Result};
use crate::euler_lagrange::ElCurve;

use super::pattern::{Phase, PhasePattern};
use super::problem::ProblemSpec;

/// Segments shorter than this are dropped while building.
pub const DROP_DURATION: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum SegmentKind {
    Alpha,
    Beta,
    VMaxHold,
    ZeroHold,
    EulerLagrange(ElCurve),
}

impl SegmentKind {
    pub fn phase(&self) -> Phase {
        match self {
            SegmentKind::Alpha => Phase::Alpha,
            SegmentKind::Beta => Phase::Beta,
            SegmentKind::VMaxHold => Phase::VMax,
            SegmentKind::ZeroHold => Phase::Zero,
            SegmentKind::EulerLagrange(_) => Phase::El,
        }
    }
}

/// A piece of trajectory with a closed-form velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    kind: SegmentKind,
    t_start: f64,
    duration: f64,
    v_start: f64,
    x_start: f64,
    rate: f64,
}

impl Segment {
    pub fn kind(&self) -> &SegmentKind {
        &self.kind
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn t_end(&self) -> f64 {
        self.t_start + self.duration
    }

    pub fn v_start(&self) -> f64 {
        self.v_start
    }

    pub fn x_start(&self) -> f64 {
        self.x_start
    }

    /// Constant slope of linear pieces; zero for isobars.
    pub fn rate(&self) -> f64 {
        self.rate
    }

    fn offset(&self, t: f64) -> f64 {
        (t - self.t_start).clamp(0.0, self.duration)
    }

    pub fn velocity(&self, t: f64) -> f64 {
        let tau = self.offset(t);
        match &self.kind {
            SegmentKind::EulerLagrange(c) => c.velocity(self.t_start + tau),
            _ => self.v_start + self.rate * tau,
        }
    }

    pub fn position(&self, t: f64) -> f64 {
        let tau = self.offset(t);
        if tau == 0.0 {
            return self.x_start;
        }
        match &self.kind {
            SegmentKind::EulerLagrange(c) => self.x_start + c.distance(self.t_start, self.t_start + tau),
            SegmentKind::ZeroHold => self.x_start,
            _ => self.x_start + self.v_start * tau + 0.5 * self.rate * tau * tau,
        }
    }

    pub fn slope(&self, t: f64) -> f64 {
        match &self.kind {
            SegmentKind::EulerLagrange(c) => c.slope(self.t_start + self.offset(t)),
            _ => self.rate,
        }
    }

    pub fn v_end(&self) -> f64 {
        if self.duration.is_infinite() {
            self.v_start
        } else {
            self.velocity(self.t_end())
        }
    }

    pub fn x_end(&self) -> f64 {
        if self.duration.is_infinite() {
            if self.v_start == 0.0 {
                self.x_start
            } else {
                f64::INFINITY
            }
        } else {
            self.position(self.t_end())
        }
    }
}

/// Velocity profile as an ordered list of closed-form segments.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    segments: Vec<Segment>,
    alpha: f64,
    beta: f64,
    v_max: f64,
    v0: f64,
    horizon: f64,
}

impl Trajectory {
    /// Rebuilds a trajectory from segment kinds, start times, durations and start speeds.
    ///
    /// Positions are recomputed; start times and speeds must chain to within 1e-9.
    pub fn from_parts(p: &ProblemSpec, parts: Vec<(SegmentKind, f64, f64, f64)>) -> Result<Self> {
        let mut b = TrajectoryBuilder::new(p);
        for (i, (kind, t_start, duration, v_start)) in parts.into_iter().enumerate() {
            let tol = 1e-9 * (1.0 + b.t.abs());
            if (t_start - b.t).abs() > tol {
                return Err(Error::Trajectory(format!("segment {i} starts at {t_start}, previous ends at {}", b.t)));
            }
            if (v_start - b.v).abs() > 1e-9 * p.v_max.max(1.0) {
                return Err(Error::Trajectory(format!(
                    "segment {i} starts at speed {v_start}, previous ends at {}",
                    b.v
                )));
            }
            if !(duration >= 0.0) {
                return Err(Error::Trajectory(format!("segment {i} has duration {duration}")));
            }
            b.t = t_start;
            b.v = v_start;
            let (rate, v_end) = match &kind {
                SegmentKind::Alpha => (p.alpha, v_start + p.alpha * duration),
                SegmentKind::Beta => (-p.beta, v_start - p.beta * duration),
                SegmentKind::VMaxHold | SegmentKind::ZeroHold => (0.0, v_start),
                SegmentKind::EulerLagrange(c) => (0.0, c.velocity(t_start + duration)),
            };
            if duration.is_infinite() && !matches!(kind, SegmentKind::ZeroHold | SegmentKind::VMaxHold) {
                return Err(Error::Trajectory(format!("segment {i} is unbounded but not a hold")));
            }
            b.push(kind, rate, duration, v_end);
        }
        let traj = b.finish();
        traj.audit()?;
        Ok(traj)
    }

    /// Checks speed bounds and continuity.
    pub fn audit(&self) -> Result<()> {
        let gap = self.continuity_gap();
        if gap > 1e-9 * self.v_max.max(1.0) {
            return Err(Error::Trajectory(format!("velocity jumps by {gap}")));
        }
        let over = self.speed_violation();
        if over > 1e-9 * self.v_max.max(1.0) {
            return Err(Error::Trajectory(format!("speed leaves [0, v_max] by {over}")));
        }
        Ok(())
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn v0(&self) -> f64 {
        self.v0
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn v_max(&self) -> f64 {
        self.v_max
    }

    /// End of the support the trajectory was built for.
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// End of the last segment, possibly infinite.
    pub fn end_time(&self) -> f64 {
        self.segments.last().map_or(0.0, Segment::t_end)
    }

    /// End of the last finite segment.
    pub fn finite_end(&self) -> f64 {
        match self.segments.last() {
            Some(s) if s.duration.is_infinite() => s.t_start,
            Some(s) => s.t_end(),
            None => 0.0,
        }
    }

    fn locate(&self, t: f64) -> Option<&Segment> {
        let i = self.segments.partition_point(|s| s.t_start <= t);
        if i == 0 {
            self.segments.first()
        } else {
            Some(&self.segments[i - 1])
        }
    }

    pub fn velocity_at(&self, t: f64) -> f64 {
        match self.locate(t) {
            None => self.v0,
            Some(s) => s.velocity(t),
        }
    }

    pub fn position_at(&self, t: f64) -> f64 {
        match self.locate(t) {
            None => self.v0 * t.max(0.0),
            Some(s) if t > s.t_end() => s.x_end() + s.v_end() * (t - s.t_end()),
            Some(s) => s.position(t),
        }
    }

    /// Distance covered over the support.
    pub fn total_distance(&self) -> f64 {
        if self.horizon.is_finite() {
            return self.position_at(self.horizon);
        }
        match self.segments.last() {
            None => {
                if self.v0 == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Some(s) => {
                if s.v_end() == 0.0 || (s.duration.is_infinite() && s.v_start == 0.0) {
                    s.x_end()
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    /// Time of arrival at standstill, if any.
    pub fn stop_time(&self) -> Option<f64> {
        self.segments
            .iter()
            .find(|s| matches!(s.kind, SegmentKind::ZeroHold))
            .map(|s| s.t_start)
            .or_else(|| self.segments.last().filter(|s| s.v_end() == 0.0).map(Segment::t_end))
    }

    /// Segment boundary times, excluding infinity.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.segments.iter().map(|s| s.t_start).collect();
        if let Some(s) = self.segments.last() {
            if s.duration.is_finite() {
                out.push(s.t_end());
            }
        }
        out
    }

    pub fn pattern(&self) -> PhasePattern {
        PhasePattern::from_phases(self.segments.iter().map(|s| s.kind.phase()))
    }

    /// Largest velocity mismatch between consecutive segments.
    pub fn continuity_gap(&self) -> f64 {
        let mut gap = match self.segments.first() {
            Some(s) => (s.v_start - self.v0).abs(),
            None => 0.0,
        };
        for w in self.segments.windows(2) {
            gap = gap.max((w[0].v_end() - w[1].v_start).abs());
            gap = gap.max((w[0].t_end() - w[1].t_start).abs());
        }
        gap
    }

    /// Largest excursion of the velocity outside `[0, v_max]` at segment ends.
    pub fn speed_violation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for s in &self.segments {
            for v in [s.v_start, s.v_end()] {
                worst = worst.max(v - self.v_max).max(-v);
            }
        }
        worst
    }

    /// Largest violation of the slope cone `[-β, α]` over sampled consecutive pairs.
    pub fn check_lipschitz(&self, samples: usize) -> f64 {
        let span = if self.finite_end() > 0.0 { self.finite_end() } else { 1.0 };
        let n = samples.max(2);
        let mut ts: Vec<f64> = (0..n).map(|i| span * i as f64 / (n - 1) as f64).collect();
        ts.extend(self.breakpoints());
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        let mut worst: f64 = 0.0;
        let mut check = |slope: f64| {
            worst = worst.max(slope - self.alpha).max(-self.beta - slope);
        };
        for w in ts.windows(2) {
            let (a, b) = (w[0], w[1]);
            let Some(s) = self.locate(0.5 * (a + b)) else { continue };
            match s.kind {
                SegmentKind::EulerLagrange(_) if b - a >= 1e-6 => check((s.velocity(b) - s.velocity(a)) / (b - a)),
                SegmentKind::EulerLagrange(_) => check(s.slope(0.5 * (a + b))),
                _ => check(s.rate),
            }
        }
        for s in &self.segments {
            if let SegmentKind::EulerLagrange(_) = s.kind {
                check(s.slope(s.t_start));
                check(s.slope(s.t_end()));
            }
        }
        worst
    }

    /// Samples `(t, v, x)` every `step` up to the last finite segment end.
    pub fn sample(&self, step: f64) -> Vec<[f64; 3]> {
        let end = self.finite_end().min(self.horizon);
        let n = if step > 0.0 { (end / step).ceil() as usize } else { 0 };
        let mut out: Vec<[f64; 3]> = (0..n)
            .map(|i| i as f64 * step)
            .filter(|&t| t < end)
            .map(|t| [t, self.velocity_at(t), self.position_at(t)])
            .collect();
        out.push([end, self.velocity_at(end), self.position_at(end)]);
        out
    }
}

/// Appends segments from the current state, dropping negligible ones.
#[derive(Debug, Clone)]
pub struct TrajectoryBuilder {
    alpha: f64,
    beta: f64,
    v_max: f64,
    v0: f64,
    horizon: f64,
    dist: GreenDistribution,
    segs: Vec<Segment>,
    t: f64,
    v: f64,
    x: f64,
}

impl TrajectoryBuilder {
    pub fn new(p: &ProblemSpec) -> Self {
        Self {
            alpha: p.alpha,
            beta: p.beta,
            v_max: p.v_max,
            v0: p.v0,
            horizon: p.dist.q_support(),
            dist: p.dist.clone(),
            segs: Vec::new(),
            t: 0.0,
            v: p.v0,
            x: 0.0,
        }
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn velocity(&self) -> f64 {
        self.v
    }

    pub fn position(&self) -> f64 {
        self.x
    }

    fn push(&mut self, kind: SegmentKind, rate: f64, duration: f64, v_end: f64) {
        if duration < DROP_DURATION {
            return;
        }
        let seg = Segment { kind, t_start: self.t, duration, v_start: self.v, x_start: self.x, rate };
        if duration.is_finite() {
            self.x = seg.position(seg.t_end());
            self.t += duration;
            self.v = v_end;
        }
        self.segs.push(seg);
    }

    pub fn accelerate_to(&mut self, v: f64) -> &mut Self {
        let dur = (v - self.v) / self.alpha;
        if dur > 0.0 {
            self.push(SegmentKind::Alpha, self.alpha, dur, v);
        }
        self
    }

    pub fn accelerate_for(&mut self, duration: f64) -> &mut Self {
        let v = self.v + self.alpha * duration;
        self.push(SegmentKind::Alpha, self.alpha, duration, v);
        self
    }

    pub fn brake_to(&mut self, v: f64) -> &mut Self {
        let dur = (self.v - v) / self.beta;
        if dur > 0.0 {
            self.push(SegmentKind::Beta, -self.beta, dur, v);
        }
        self
    }

    pub fn brake_for(&mut self, duration: f64) -> &mut Self {
        let v = self.v - self.beta * duration;
        self.push(SegmentKind::Beta, -self.beta, duration, v);
        self
    }

    /// Holds the current speed, which must be `0` or `v_max`.
    pub fn hold(&mut self, duration: f64) -> Result<&mut Self> {
        let kind = if (self.v - self.v_max).abs() <= 1e-9 * self.v_max {
            self.v = self.v_max;
            SegmentKind::VMaxHold
        } else if self.v.abs() <= 1e-9 * self.v_max {
            self.v = 0.0;
            SegmentKind::ZeroHold
        } else {
            return Err(Error::Trajectory(format!("cannot hold at speed {}", self.v)));
        };
        let v = self.v;
        self.push(kind, 0.0, duration, v);
        Ok(self)
    }

    /// Holds the current bound speed until the end of the support.
    pub fn hold_to_horizon(&mut self) -> Result<&mut Self> {
        let d = self.horizon - self.t;
        self.hold(d)
    }

    /// Rides the isobar through the current state down (or up) to speed `v`.
    pub fn follow_isobar_to(&mut self, v: f64) -> Result<&mut Self> {
        let curve = ElCurve::through(&self.dist, self.alpha, self.v_max, self.t, self.v);
        let t_end = curve
            .time_at(v)
            .ok_or_else(|| Error::Trajectory(format!("isobar through ({}, {}) never reaches {v}", self.t, self.v)))?;
        let dur = t_end - self.t;
        if dur > 0.0 {
            self.push(SegmentKind::EulerLagrange(curve), 0.0, dur, v);
        }
        Ok(self)
    }

    /// Rides a given isobar for `duration`.
    pub fn follow_curve_for(&mut self, curve: ElCurve, duration: f64) -> &mut Self {
        let v = curve.velocity(self.t + duration);
        self.push(SegmentKind::EulerLagrange(curve), 0.0, duration, v);
        self
    }

    pub fn finish(self) -> Trajectory {
        Trajectory {
            segments: self.segs,
            alpha: self.alpha,
            beta: self.beta,
            v_max: self.v_max,
            v0: self.v0,
            horizon: self.horizon,
        }
    }
}
