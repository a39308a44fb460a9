//! Laws of the remaining red time.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_positive, Error, Result};
use crate::quadrature;

/// Horizon multiple of 1/λ used when the support is unbounded.
pub const EXP_HORIZON_RATES: f64 = 28.0;

/// Piecewise-linear density on `[0, q)` with its exact running integral.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedDensity {
    inner: Arc<Table>,
}

#[derive(Debug, PartialEq)]
struct Table {
    x: Vec<f64>,
    f: Vec<f64>,
    cum: Vec<f64>,
    q: f64,
    origin: Option<Interarrival>,
}

/// The interarrival table a density was built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interarrival {
    pub cdf_knots: Vec<[f64; 2]>,
    pub mean: f64,
}

impl TabulatedDensity {
    /// Builds the stationary residual-time density `(1 - Θ)/mean`.
    pub fn from_interarrival(cdf_knots: &[[f64; 2]], mean: f64) -> Result<Self> {
        check_positive("mean", mean)?;
        if cdf_knots.len() < 2 {
            return Err(Error::InvalidTable("need at least two knots".into()));
        }
        if cdf_knots[0][0] != 0.0 {
            return Err(Error::InvalidTable("first knot must be at x = 0".into()));
        }
        for (i, w) in cdf_knots.windows(2).enumerate() {
            let ([x0, p0], [x1, p1]) = (w[0], w[1]);
            if !(x1 >= x0) || !(p1 >= p0) {
                return Err(Error::InvalidTable(format!("knots not non-decreasing at index {}", i + 1)));
            }
        }
        for (i, &[x, p]) in cdf_knots.iter().enumerate() {
            if !x.is_finite() || !(0.0..=1.0 + 1e-12).contains(&p) {
                return Err(Error::InvalidTable(format!("bad knot at index {i}")));
            }
        }
        let end = cdf_knots.iter().position(|k| k[1] >= 1.0 - 1e-15).unwrap_or(cdf_knots.len() - 1);
        let mut x = Vec::with_capacity(end + 1);
        let mut f = Vec::with_capacity(end + 1);
        for &[xi, p] in &cdf_knots[..=end] {
            x.push(xi);
            f.push((1.0 - p.min(1.0)) / mean);
        }
        let origin = Interarrival { cdf_knots: cdf_knots.to_vec(), mean };
        Self::build(x, f, Some(origin))
    }

    /// Builds from density knots directly; monotonicity is not checked.
    pub fn from_density(knots: &[[f64; 2]]) -> Result<Self> {
        if knots.len() < 2 || knots[0][0] != 0.0 {
            return Err(Error::InvalidTable("need at least two knots starting at 0".into()));
        }
        if knots.windows(2).any(|w| !(w[1][0] >= w[0][0])) {
            return Err(Error::InvalidTable("abscissae must be non-decreasing".into()));
        }
        let x = knots.iter().map(|k| k[0]).collect();
        let f = knots.iter().map(|k| k[1]).collect();
        Self::build(x, f, None)
    }

    fn build(x: Vec<f64>, mut f: Vec<f64>, origin: Option<Interarrival>) -> Result<Self> {
        let q = *x.last().unwrap();
        if !(q > 0.0) {
            return Err(Error::InvalidTable("support has zero length".into()));
        }
        let mut cum = vec![0.0; x.len()];
        for i in 1..x.len() {
            cum[i] = cum[i - 1] + 0.5 * (f[i] + f[i - 1]) * (x[i] - x[i - 1]);
        }
        let total = cum[x.len() - 1];
        if !(total > 0.0) {
            return Err(Error::InvalidTable("density integrates to zero".into()));
        }
        for v in f.iter_mut() {
            *v /= total;
        }
        for v in cum.iter_mut() {
            *v /= total;
        }
        Ok(Self { inner: Arc::new(Table { x, f, cum, q, origin }) })
    }

    pub fn support_end(&self) -> f64 {
        self.inner.q
    }

    pub fn knots(&self) -> &[f64] {
        &self.inner.x
    }

    pub fn origin(&self) -> Option<&Interarrival> {
        self.inner.origin.as_ref()
    }

    /// Index `i` with `x[i] <= t < x[i+1]`, taking the last duplicate knot.
    fn interval(&self, t: f64) -> usize {
        let x = &self.inner.x;
        let i = x.partition_point(|&xi| xi <= t);
        i.saturating_sub(1).min(x.len() - 2)
    }

    fn pdf(&self, t: f64) -> f64 {
        let tb = &*self.inner;
        if t < 0.0 || t >= tb.q {
            return 0.0;
        }
        let i = self.interval(t);
        let h = tb.x[i + 1] - tb.x[i];
        if h <= 0.0 {
            return tb.f[i + 1];
        }
        let s = (t - tb.x[i]) / h;
        tb.f[i] + s * (tb.f[i + 1] - tb.f[i])
    }

    fn cdf(&self, t: f64) -> f64 {
        let tb = &*self.inner;
        if t <= 0.0 {
            return 0.0;
        }
        if t >= tb.q {
            return 1.0;
        }
        let i = self.interval(t);
        let h = tb.x[i + 1] - tb.x[i];
        let u = t - tb.x[i];
        let slope = if h > 0.0 { (tb.f[i + 1] - tb.f[i]) / h } else { 0.0 };
        (tb.cum[i] + tb.f[i] * u + 0.5 * slope * u * u).min(1.0)
    }

    fn quantile(&self, p: f64) -> f64 {
        let tb = &*self.inner;
        let n = tb.x.len();
        let i = tb.cum.partition_point(|&c| c <= p).saturating_sub(1).min(n - 2);
        let h = tb.x[i + 1] - tb.x[i];
        if h <= 0.0 {
            return tb.x[i];
        }
        let r = p - tb.cum[i];
        let a = 0.5 * (tb.f[i + 1] - tb.f[i]) / h;
        let b = tb.f[i];
        let disc = (b * b + 4.0 * a * r).max(0.0);
        let denom = b + disc.sqrt();
        let s = if denom > 0.0 { 2.0 * r / denom } else { 0.0 };
        (tb.x[i] + s.clamp(0.0, h)).min(tb.q)
    }

    fn max_density(&self) -> f64 {
        self.inner.f.iter().copied().fold(0.0, f64::max)
    }
}

/// Distribution of the time until the light turns green.
#[derive(Debug, Clone, PartialEq)]
pub enum GreenDistribution {
    Uniform { q: f64 },
    Exponential { lambda: f64 },
    Excess(TabulatedDensity),
}

/// Short name of a distribution family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistributionKind {
    Uniform,
    Exponential,
    Excess,
}

impl fmt::Display for DistributionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Uniform => "uniform",
            Self::Exponential => "exponential",
            Self::Excess => "excess",
        })
    }
}

impl GreenDistribution {
    pub fn uniform(q: f64) -> Result<Self> {
        check_positive("q", q)?;
        Ok(Self::Uniform { q })
    }

    pub fn exponential(lambda: f64) -> Result<Self> {
        check_positive("lambda", lambda)?;
        Ok(Self::Exponential { lambda })
    }

    pub fn excess_from_interarrival(cdf_knots: &[[f64; 2]], mean: f64) -> Result<Self> {
        Ok(Self::Excess(TabulatedDensity::from_interarrival(cdf_knots, mean)?))
    }

    pub fn kind(&self) -> DistributionKind {
        match self {
            Self::Uniform { .. } => DistributionKind::Uniform,
            Self::Exponential { .. } => DistributionKind::Exponential,
            Self::Excess(_) => DistributionKind::Excess,
        }
    }

    /// Right end of the support; infinite for the exponential law.
    pub fn q_support(&self) -> f64 {
        match self {
            Self::Uniform { q } => *q,
            Self::Exponential { .. } => f64::INFINITY,
            Self::Excess(t) => t.support_end(),
        }
    }

    /// Finite integration horizon covering the support up to a negligible tail.
    pub fn horizon(&self) -> f64 {
        match self {
            Self::Exponential { lambda } => EXP_HORIZON_RATES / lambda,
            _ => self.q_support(),
        }
    }

    /// Sup of the density.
    pub fn density_bound(&self) -> f64 {
        match self {
            Self::Uniform { q } => 1.0 / q,
            Self::Exponential { lambda } => *lambda,
            Self::Excess(t) => t.max_density(),
        }
    }

    pub fn pdf(&self, t: f64) -> f64 {
        match self {
            Self::Uniform { q } => {
                if (0.0..*q).contains(&t) {
                    1.0 / q
                } else {
                    0.0
                }
            }
            Self::Exponential { lambda } => {
                if t >= 0.0 {
                    lambda * (-lambda * t).exp()
                } else {
                    0.0
                }
            }
            Self::Excess(tab) => tab.pdf(t),
        }
    }

    pub fn cdf(&self, t: f64) -> f64 {
        match self {
            Self::Uniform { q } => (t / q).clamp(0.0, 1.0),
            Self::Exponential { lambda } => {
                if t <= 0.0 {
                    0.0
                } else {
                    -(-lambda * t).exp_m1()
                }
            }
            Self::Excess(tab) => tab.cdf(t),
        }
    }

    /// `1 - F(t)` without cancellation for the exponential law.
    pub fn survival(&self, t: f64) -> f64 {
        match self {
            Self::Exponential { lambda } => (-lambda * t.max(0.0)).exp(),
            _ => 1.0 - self.cdf(t),
        }
    }

    /// Derivative of ln f at `t`.
    pub fn log_density_slope(&self, t: f64) -> f64 {
        match self {
            Self::Uniform { .. } => 0.0,
            Self::Exponential { lambda } => -lambda,
            Self::Excess(_) => {
                let (fp, f) = self.fd_density_slope(t);
                fp / f
            }
        }
    }

    /// Derivative of f at `t`.
    pub fn density_slope(&self, t: f64) -> f64 {
        match self {
            Self::Uniform { .. } => 0.0,
            Self::Exponential { lambda } => -lambda * self.pdf(t),
            Self::Excess(_) => self.fd_density_slope(t).0,
        }
    }

    fn fd_density_slope(&self, t: f64) -> (f64, f64) {
        let h = 1e-5 * t.max(1.0);
        let q = self.q_support();
        let (a, b) = if t - h < 0.0 {
            (t, t + h)
        } else if t + h >= q {
            (t - h, t)
        } else {
            (t - h, t + h)
        };
        ((self.pdf(b) - self.pdf(a)) / (b - a), self.pdf(t))
    }

    /// Expected remaining red time.
    pub fn mean(&self) -> f64 {
        match self {
            Self::Uniform { q } => 0.5 * q,
            Self::Exponential { lambda } => 1.0 / lambda,
            Self::Excess(tab) => {
                quadrature::integrate_with_breaks(|t| 1.0 - tab.cdf(t), 0.0, tab.support_end(), tab.knots(), 1e-12)
                    .unwrap_or(f64::NAN)
            }
        }
    }

    /// Inverse CDF.
    pub fn quantile(&self, p: f64) -> f64 {
        match self {
            Self::Uniform { q } => p * q,
            Self::Exponential { lambda } => -(-p).ln_1p() / lambda,
            Self::Excess(tab) => tab.quantile(p),
        }
    }

    /// Draws one green time by inverse-CDF sampling.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(rng.random::<f64>())
    }

    /// Checks positivity and monotone non-increase of f on a uniform grid.
    pub fn validate_density(&self, grid_points: usize) -> DensityReport {
        let n = grid_points.max(2);
        let h_end = self.q_support().min(self.horizon());
        let scale = self.density_bound().max(f64::MIN_POSITIVE);
        let mut violations = Vec::new();
        let mut prev = f64::NAN;
        for i in 0..n {
            let t = h_end * i as f64 / n as f64;
            let v = self.pdf(t);
            if !(v > 0.0) {
                violations.push(DensityViolation { index: i, t, kind: ViolationKind::NonPositive, amount: -v });
            }
            if i > 0 && v > prev + 1e-12 * scale {
                violations.push(DensityViolation { index: i, t, kind: ViolationKind::Increasing, amount: v - prev });
            }
            prev = v;
        }
        let max_violation = violations.iter().map(|v| v.amount).fold(0.0, f64::max);
        DensityReport { violations, max_violation }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    NonPositive,
    Increasing,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityViolation {
    pub index: usize,
    pub t: f64,
    pub kind: ViolationKind,
    pub amount: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityReport {
    pub violations: Vec<DensityViolation>,
    pub max_violation: f64,
}

impl DensityReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}
