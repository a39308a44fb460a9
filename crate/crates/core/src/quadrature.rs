//! Adaptive Gauss-Kronrod quadrature.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_8,
];
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

const MAX_DEPTH: u32 = 48;

fn kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> Result<f64> {
    let (val, err) = kronrod(f, a, b);
    if !val.is_finite() {
        return Err(Error::Quadrature { a, b });
    }
    // Below the roundoff floor further splitting cannot help.
    if err <= tol || err <= 64.0 * f64::EPSILON * val.abs() || (b - a) <= 1e-14 * (1.0 + a.abs().max(b.abs())) {
        return Ok(val);
    }
    if depth >= MAX_DEPTH {
        return Err(Error::Quadrature { a, b });
    }
    let m = 0.5 * (a + b);
    Ok(adapt(f, a, m, 0.5 * tol, depth + 1)? + adapt(f, m, b, 0.5 * tol, depth + 1)?)
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    adapt(&f, a, b, tol, 0)
}

/// Integrates over `[a, b]` split at every break point inside the interval.
pub fn integrate_with_breaks<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64], tol: f64) -> Result<f64> {
    if b <= a {
        return Ok(0.0);
    }
    let mut pts: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut prev = a;
    let pieces = pts.len() + 1;
    let mut total = 0.0;
    for x in pts.into_iter().chain(std::iter::once(b)) {
        total += adapt(&f, prev, x, tol / pieces as f64, 0)?;
        prev = x;
    }
    Ok(total)
}
