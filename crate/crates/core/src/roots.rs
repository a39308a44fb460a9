//! Bracketed scalar root finding.

use crate::error::{Error, Result};

/// Finds a root of `f` in `[lo, hi]` given a sign change.
///
/// Secant steps are taken when they land well inside the bracket, otherwise
/// the bracket is bisected. Stops when the bracket is below `rtol` relative
/// width or `f` vanishes.
pub fn find_root<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, rtol: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.signum() != fb.signum()) || !fa.is_finite() || !fb.is_finite() {
        return Err(Error::NoBracket { lo, hi, f_lo: fa, f_hi: fb });
    }
    let mut use_secant = true;
    for _ in 0..400 {
        let width = b - a;
        if width.abs() <= rtol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE) {
            break;
        }
        let mut x = 0.5 * (a + b);
        if use_secant {
            let s = b - fb * (b - a) / (fb - fa);
            let margin = 0.01 * width;
            if s.is_finite() && s > a + margin && s < b - margin {
                x = s;
            }
        }
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        let old = width;
        if fx.signum() == fa.signum() {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
        // Fall back to bisection on the next step if the bracket barely shrank.
        use_secant = (b - a) < 0.5 * old;
        if !use_secant {
            let m = 0.5 * (a + b);
            let fm = f(m);
            if fm == 0.0 {
                return Ok(m);
            }
            if fm.signum() == fa.signum() {
                a = m;
                fa = fm;
            } else {
                b = m;
                fb = fm;
            }
            use_secant = true;
        }
    }
    Ok(if fa.abs() < fb.abs() { a } else { b })
}

/// Plain bisection for a monotone function; runs a fixed number of halvings.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, target: f64, iterations: usize) -> f64 {
    for _ in 0..iterations {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_root() {
        let r = find_root(|x| x * x * x - 2.0, 0.0, 2.0, 1e-15).unwrap();
        assert!((r - 2f64.cbrt()).abs() < 1e-14);
    }

    #[test]
    fn rejects_missing_bracket() {
        assert!(find_root(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_err());
    }

    #[test]
    fn flat_function_still_converges() {
        let r = find_root(|x: f64| (x - 1.0).powi(7), 0.0, 3.0, 1e-14).unwrap();
        assert!((r - 1.0).abs() < 1e-2);
        let r = bisect(|x| x * x, 0.0, 4.0, 2.0, 200);
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
    }
}
