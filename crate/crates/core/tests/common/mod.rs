#![allow(dead_code)]

use rand::Rng;
use redlight::distributions::GreenDistribution;
use redlight::{solve, ProblemSpec, SolveReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Law {
    Uniform,
    Exponential,
}

/// Random feasible, non-trivial instance with `d` on the scale of the light.
pub fn random_instance<R: Rng>(rng: &mut R, law: Law) -> ProblemSpec {
    let alpha = rng.random_range(2.0..8.0);
    let beta = alpha * rng.random_range(1.0..4.0);
    let v_max = rng.random_range(80.0..300.0);
    let v0 = match rng.random_range(0..10) {
        0 => 0.0,
        1 => v_max,
        _ => v_max * rng.random::<f64>(),
    };
    let (dist, reach) = match law {
        Law::Uniform => {
            let q = rng.random_range(5.0..80.0);
            (GreenDistribution::uniform(q).unwrap(), f64::INFINITY)
        }
        Law::Exponential => {
            let lambda = rng.random_range(0.03..0.4);
            (GreenDistribution::exponential(lambda).unwrap(), 3.0 * v_max / lambda)
        }
    };
    let mut p = ProblemSpec { alpha, beta, v_max, v0, d: 1.0, l: 1.0, dist };
    let d_min = p.min_distance();
    let d_max = p.max_distance().min(d_min + reach);
    p.d = d_min + (d_max - d_min) * rng.random_range(0.01..0.99);
    p.l = p.d + v_max * v_max / (2.0 * alpha) * rng.random_range(1.0..2.0);
    p
}

/// Random instance together with its solution.
pub fn random_solved<R: Rng>(rng: &mut R, law: Law) -> (ProblemSpec, SolveReport) {
    loop {
        let p = random_instance(rng, law);
        if let Ok(r) = solve(&p) {
            return (p, r);
        }
    }
}

/// Reference exponential instance: λ = 0.1, α = 6, β = 20, v_max = 200.
pub fn figure_exponential(v0: f64, d: f64, l: f64) -> ProblemSpec {
    ProblemSpec::new(6.0, 20.0, 200.0, v0, d, l, GreenDistribution::exponential(0.1).unwrap()).unwrap()
}
