//! Euler-Lagrange isobars of the pressure field.

use crate::distributions::GreenDistribution;
use crate::error::{Error, Result};
use crate::kinematics::ProblemSpec;
use crate::quadrature;
use crate::roots;

/// One member of the Euler-Lagrange family, in absolute time.
#[derive(Debug, Clone, PartialEq)]
pub enum ElCurve {
    /// `v = v_max - α t - q B`.
    Uniform { v_max: f64, alpha: f64, q: f64, offset: f64 },
    /// `v = A - b e^{λt}` with `A = v_max + α/λ`.
    Exponential { v_max: f64, alpha: f64, lambda: f64, b: f64 },
    /// `v = v_max - (B + α F)/f`.
    General { v_max: f64, alpha: f64, offset: f64, dist: GreenDistribution },
}

impl ElCurve {
    /// The curve with pressure offset `offset` (the multiplier B).
    pub fn with_offset(dist: &GreenDistribution, alpha: f64, v_max: f64, offset: f64) -> Self {
        match dist {
            GreenDistribution::Uniform { q } => Self::Uniform { v_max, alpha, q: *q, offset },
            GreenDistribution::Exponential { lambda } => {
                Self::Exponential { v_max, alpha, lambda: *lambda, b: (offset + alpha) / lambda }
            }
            GreenDistribution::Excess(_) => Self::General { v_max, alpha, offset, dist: dist.clone() },
        }
    }

    /// The unique curve passing through `(t, v)`.
    pub fn through(dist: &GreenDistribution, alpha: f64, v_max: f64, t: f64, v: f64) -> Self {
        match dist {
            GreenDistribution::Uniform { q } => {
                Self::Uniform { v_max, alpha, q: *q, offset: (v_max - alpha * t - v) / q }
            }
            GreenDistribution::Exponential { lambda } => {
                let a = v_max + alpha / lambda;
                Self::Exponential { v_max, alpha, lambda: *lambda, b: (a - v) * (-lambda * t).exp() }
            }
            GreenDistribution::Excess(_) => {
                let offset = (v_max - v) * dist.pdf(t) - alpha * dist.cdf(t);
                Self::General { v_max, alpha, offset, dist: dist.clone() }
            }
        }
    }

    /// Pressure offset B.
    pub fn offset(&self) -> f64 {
        match self {
            Self::Uniform { offset, .. } | Self::General { offset, .. } => *offset,
            Self::Exponential { alpha, lambda, b, .. } => lambda * b - alpha,
        }
    }

    /// Coefficient of `e^{λt}` for exponential curves.
    pub fn coefficient(&self) -> Option<f64> {
        match self {
            Self::Exponential { b, .. } => Some(*b),
            _ => None,
        }
    }

    pub fn velocity(&self, t: f64) -> f64 {
        match self {
            Self::Uniform { v_max, alpha, q, offset } => v_max - alpha * t - q * offset,
            Self::Exponential { v_max, alpha, lambda, b } => v_max + alpha / lambda - b * (lambda * t).exp(),
            Self::General { v_max, alpha, offset, dist } => v_max - (offset + alpha * dist.cdf(t)) / dist.pdf(t),
        }
    }

    /// Time derivative of the velocity.
    pub fn slope(&self, t: f64) -> f64 {
        match self {
            Self::Uniform { alpha, .. } => -alpha,
            Self::Exponential { lambda, b, .. } => -lambda * b * (lambda * t).exp(),
            Self::General { alpha, offset, dist, .. } => {
                let f = dist.pdf(t);
                -alpha + (offset + alpha * dist.cdf(t)) * dist.density_slope(t) / (f * f)
            }
        }
    }

    /// Distance covered between `t0` and `t1`.
    pub fn distance(&self, t0: f64, t1: f64) -> f64 {
        let dt = t1 - t0;
        match self {
            Self::Uniform { .. } => 0.5 * (self.velocity(t0) + self.velocity(t1)) * dt,
            Self::Exponential { v_max, alpha, lambda, b } => {
                let a = v_max + alpha / lambda;
                a * dt - b * (lambda * t0).exp() * (lambda * dt).exp_m1() / lambda
            }
            Self::General { dist, .. } => {
                let breaks: Vec<f64> = match dist {
                    GreenDistribution::Excess(tab) => tab.knots().to_vec(),
                    _ => Vec::new(),
                };
                quadrature::integrate_with_breaks(|t| self.velocity(t), t0, t1, &breaks, 1e-11).unwrap_or(f64::NAN)
            }
        }
    }

    /// Time at which the curve passes through velocity `v`, if it does.
    pub fn time_at(&self, v: f64) -> Option<f64> {
        match self {
            Self::Uniform { v_max, alpha, q, offset } => Some((v_max - q * offset - v) / alpha),
            Self::Exponential { v_max, alpha, lambda, b } => {
                let a = v_max + alpha / lambda;
                ((a - v) / b > 0.0).then(|| ((a - v) / b).ln() / lambda)
            }
            Self::General { dist, .. } => {
                let hi = dist.q_support() * (1.0 - 1e-12);
                roots::find_root(|t| self.velocity(t) - v, 0.0, hi, 1e-14).ok()
            }
        }
    }
}

/// Velocity of the curve at `t`.
pub fn el_velocity(curve: &ElCurve, t: f64) -> f64 {
    curve.velocity(t)
}

/// Residual of `v' + (ln f)' v - (ln f)' v_max + α` along the curve.
pub fn el_ode_residual(curve: &ElCurve, dist: &GreenDistribution, t: f64) -> f64 {
    let (v_max, alpha) = match curve {
        ElCurve::Uniform { v_max, alpha, .. }
        | ElCurve::Exponential { v_max, alpha, .. }
        | ElCurve::General { v_max, alpha, .. } => (*v_max, *alpha),
    };
    let g = dist.log_density_slope(t);
    curve.slope(t) + g * (curve.velocity(t) - v_max) + alpha
}

/// Velocity below which an exponential isobar is steeper than braking.
pub fn v_beta(p: &ProblemSpec) -> Result<f64> {
    match p.dist {
        GreenDistribution::Exponential { lambda } => Ok(p.v_max + (p.alpha - p.beta) / lambda),
        _ => Err(Error::UnsupportedDistribution("v_beta", "exponential")),
    }
}

/// Distance covered descending an exponential isobar from `v_hi` to `v_lo`.
pub fn el_distance(v_hi: f64, v_lo: f64, lambda: f64, a: f64) -> Result<f64> {
    if !(v_hi < a) {
        return Err(Error::InvalidParameter { name: "v_hi", reason: format!("{v_hi} must be below A = {a}") });
    }
    if v_lo > v_hi {
        return Err(Error::InvalidParameter { name: "v_lo", reason: format!("{v_lo} exceeds v_hi = {v_hi}") });
    }
    let dv = v_hi - v_lo;
    Ok((a * (dv / (a - v_hi)).ln_1p() - dv) / lambda)
}

/// Time spent descending an exponential isobar from `v_hi` to `v_lo`.
pub fn el_duration(v_hi: f64, v_lo: f64, lambda: f64, a: f64) -> f64 {
    ((v_hi - v_lo) / (a - v_hi)).ln_1p() / lambda
}

/// Maximum deviation between the curve with offset `b2` and the time-shifted curve with offset `b1`.
pub fn el_translation_check(
    dist: &GreenDistribution,
    alpha: f64,
    v_max: f64,
    b1: f64,
    b2: f64,
    grid: &[f64],
) -> Result<f64> {
    let c1 = ElCurve::with_offset(dist, alpha, v_max, b1);
    let c2 = ElCurve::with_offset(dist, alpha, v_max, b2);
    let shift = match (&c1, &c2) {
        (ElCurve::Exponential { lambda, b: k1, .. }, ElCurve::Exponential { b: k2, .. }) => (k2 / k1).ln() / lambda,
        (ElCurve::Uniform { q, .. }, _) => q * (b2 - b1) / alpha,
        _ => return Err(Error::UnsupportedDistribution("el_translation_check", "uniform or exponential")),
    };
    Ok(grid.iter().map(|&t| (c2.velocity(t) - c1.velocity(t + shift)).abs()).fold(0.0, f64::max))
}
