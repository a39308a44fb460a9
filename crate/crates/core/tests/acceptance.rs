//! One line per acceptance criterion, then a single assertion over all of them.

mod common;

use std::io::Write;
use std::time::Instant;

use common::{figure_exponential, random_solved, Law};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use redlight::cost::{expected_arrival, expected_arrival_mc};
use redlight::distributions::GreenDistribution;
use redlight::euler_lagrange::{el_ode_residual, el_translation_check, v_beta, ElCurve};
use redlight::kinematics::SegmentKind;
use redlight::oracle::{dp_min_cost, perturbation_test, sweep_switch_velocity, DpGrid};
use redlight::solver::{
    classify, exponential::family_trajectory, f_of_vc, region_boundaries, solve_vc_star, ExpRegime, ExpSolverState,
    RegionLabel,
};
use redlight::{solve, Error, PhasePattern, ProblemSpec};

struct Outcome {
    id: usize,
    pass: bool,
    detail: String,
}

fn report(id: usize, pass: bool, detail: String) -> Outcome {
    // Direct handle writes bypass the harness capture, so passing runs still show the summary.
    let mut out = std::io::stdout().lock();
    writeln!(out, "criterion {id:>2}: {} {detail}", if pass { "PASS" } else { "FAIL" }).unwrap();
    Outcome { id, pass, detail }
}

fn c1() -> Outcome {
    let p = figure_exponential(200.0, 4000.0, 4000.0);
    let start = Instant::now();
    let v = solve_vc_star(&p).unwrap().value().unwrap();
    let elapsed = start.elapsed();
    report(1, (v - 86.94).abs() <= 0.01 && elapsed.as_secs_f64() < 1e-3, format!("v_c* = {v:.6} in {elapsed:?}"))
}

fn c2() -> Outcome {
    let p = figure_exponential(200.0, 4000.0, 4000.0);
    let vc = solve_vc_star(&p).unwrap().value().unwrap();
    let family: PhasePattern = "vmax~>el~>beta~>0".parse().unwrap();
    let start = Instant::now();
    let curve = sweep_switch_velocity(&p, &family, 401).unwrap();
    let elapsed = start.elapsed();
    let step = (p.v_max - v_beta(&p).unwrap()) / 400.0;
    let arg = curve.argmin.map_or(f64::NAN, |a| a.v_c);
    report(
        2,
        (arg - vc).abs() <= step && elapsed.as_secs_f64() < 5.0,
        format!("argmin {arg:.4} vs v_c* {vc:.4} (step {step:.3}) in {elapsed:?}"),
    )
}

fn c3() -> Outcome {
    let p = figure_exponential(200.0, 4000.0, 4000.0);
    let vb = v_beta(&p).unwrap();
    let lo = f_of_vc(60.0, &p).unwrap();
    let hi = f_of_vc(p.v_max, &p).unwrap();
    report(3, vb == 60.0 && lo > 0.0 && hi < 0.0, format!("v_beta = {vb}, F(60) = {lo:.6e}, F(v_max) = {hi:.6e}"))
}

fn c4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let uni = GreenDistribution::uniform(40.0).unwrap();
    let exp = GreenDistribution::exponential(0.1).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        for dist in [&uni, &exp] {
            let horizon = dist.q_support().min(60.0);
            let t = rng.random_range(0.0..horizon);
            let offset = rng.random_range(-50.0..50.0);
            let curve = ElCurve::with_offset(dist, 6.0, 200.0, offset);
            worst = worst.max(el_ode_residual(&curve, dist, t).abs());
        }
    }
    let grid: Vec<f64> = (0..200).map(|i| i as f64 * 0.15).collect();
    let mut shift: f64 = 0.0;
    for dist in [&uni, &exp] {
        for (b1, b2) in [(-3.0, 7.0), (2.0, 30.0), (10.0, -1.5)] {
            shift = shift.max(el_translation_check(dist, 6.0, 200.0, b1, b2, &grid).unwrap());
        }
    }
    report(4, worst <= 1e-9 && shift <= 1e-9, format!("max residual {worst:.3e}, translation deviation {shift:.3e}"))
}

fn c5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut dist, mut lip, mut bad) = (0.0f64, 0.0f64, 0);
    for i in 0..500 {
        let law = if i % 2 == 0 { Law::Uniform } else { Law::Exponential };
        let (p, r) = random_solved(&mut rng, law);
        let rel = (r.trajectory.total_distance() - p.d).abs() / p.d;
        let l = r.trajectory.check_lipschitz(2000);
        dist = dist.max(rel);
        lip = lip.max(l);
        if rel > 1e-8 || l > 1e-9 {
            bad += 1;
        }
    }
    report(5, bad == 0, format!("max distance residual {dist:.3e}, max slope excess {lip:.3e}, failures {bad}/500"))
}

fn c6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let start = Instant::now();
    let (mut dominated, mut shrunk, mut worst) = (0, [0; 2], f64::INFINITY);
    for i in 0..40 {
        let law = if i < 20 { Law::Uniform } else { Law::Exponential };
        let (p, r) = random_solved(&mut rng, law);
        let grid = DpGrid::default_for(&p);
        let coarse = dp_min_cost(&p, &grid).unwrap();
        let fine = dp_min_cost(&p, &grid.refined()).unwrap();
        let s = r.expected_arrival;
        let rel = (coarse.cost - s) / s;
        worst = worst.min(rel).min((fine.cost - s) / s);
        if coarse.cost >= s - 0.005 * s && fine.cost >= s - 0.005 * s {
            dominated += 1;
        }
        if (fine.cost - s).abs() < (coarse.cost - s).abs() {
            shrunk[i / 20] += 1;
        }
    }
    let elapsed = start.elapsed();
    report(
        6,
        dominated == 40 && shrunk.iter().all(|&k| k >= 18) && elapsed.as_secs_f64() < 120.0,
        format!(
            "dominance {dominated}/40, gap shrinks {}/20 uniform and {}/20 exponential, min relative gap {worst:.3e}, {elapsed:?}",
            shrunk[0], shrunk[1]
        ),
    )
}

fn c7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut min_delta = f64::INFINITY;
    for i in 0..10 {
        let law = if i % 2 == 0 { Law::Exponential } else { Law::Uniform };
        let (p, r) = random_solved(&mut rng, law);
        let rep = perturbation_test(&r.trajectory, &p, 1000, 70 + i).unwrap();
        min_delta = min_delta.min(rep.min_delta);
    }
    // On the reference instance the whole gap between switching at v_beta and at v_c* is below 1e-4,
    // so the control uses a larger rate where the gap is about 1e-2.
    let reference = figure_exponential(200.0, 4000.0, 4000.0);
    let family: PhasePattern = "vmax~>el~>beta~>0".parse().unwrap();
    let reference_gap = expected_arrival(
        &family_trajectory(&reference, &family, v_beta(&reference).unwrap()).unwrap().unwrap(),
        &reference,
    )
    .unwrap()
        - solve(&reference).unwrap().expected_arrival;
    let p = ProblemSpec::new(6.0, 20.0, 200.0, 200.0, 1500.0, 4000.0, GreenDistribution::exponential(0.2).unwrap())
        .unwrap();
    let optimum = solve(&p).unwrap();
    let control = family_trajectory(&p, &optimum.pattern, v_beta(&p).unwrap()).unwrap().unwrap();
    let gap = expected_arrival(&control, &p).unwrap() - optimum.expected_arrival;
    let beaten = perturbation_test(&control, &p, 10_000, 77).unwrap().min_delta;
    report(
        7,
        min_delta >= -1e-7 && beaten < -1e-4,
        format!(
            "min delta on optima {min_delta:.3e}, control gap {gap:.3e} beaten by {beaten:.3e} (reference gap {reference_gap:.3e})"
        ),
    )
}

fn c8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst: f64 = 0.0;
    for i in 0..10 {
        let law = if i % 2 == 0 { Law::Exponential } else { Law::Uniform };
        let (p, r) = random_solved(&mut rng, law);
        let exact = expected_arrival(&r.trajectory, &p).unwrap();
        let mc = expected_arrival_mc(&r.trajectory, &p, 1_000_000, 800 + i);
        worst = worst.max((mc.mean - exact).abs() / mc.std_error);
    }
    report(8, worst <= 3.0, format!("largest deviation {worst:.3} standard errors"))
}

/// Compares closed-form labels with solved patterns on a 100 x 100 grid.
fn phase_grid(p: &ProblemSpec, d_max: f64) -> (usize, usize, usize) {
    let (mut agree, mut skipped, mut total) = (0, 0, 0);
    for i in 0..100 {
        let v0 = p.v_max * i as f64 / 99.0;
        let bounds = region_boundaries(p, v0).unwrap();
        for j in 0..100 {
            let d = d_max * (j as f64 + 0.5) / 100.0;
            total += 1;
            if bounds.iter().any(|&b| (d - b).abs() <= 1e-6 * d) {
                skipped += 1;
                continue;
            }
            let q = p.with_start(v0, d);
            let label = classify(&q, v0, d).unwrap();
            let ok = match (&label, solve(&q)) {
                (RegionLabel::Pattern(want), Ok(r)) => &r.pattern == want,
                (RegionLabel::Infeasible | RegionLabel::Trivial, Err(Error::Rejected(_))) => true,
                _ => false,
            };
            if ok {
                agree += 1;
            } else {
                println!("  mismatch at v0 = {v0}, d = {d}: {label}");
            }
        }
    }
    (agree, skipped, total)
}

fn c9() -> Outcome {
    let exp = |alpha: f64, beta: f64, v_max: f64, lambda: f64| {
        ProblemSpec::new(alpha, beta, v_max, 0.0, 1.0, 1e9, GreenDistribution::exponential(lambda).unwrap()).unwrap()
    };
    let cases = [
        ("switch below v_max", exp(6.0, 20.0, 200.0, 0.1), 12_000.0, Some(ExpRegime::SwitchBelowVmax)),
        ("switch above v_max", exp(6.0, 6.5, 200.0, 0.1), 12_000.0, Some(ExpRegime::SwitchAboveVmax)),
        ("no switch", exp(6.0, 30.0, 20.0, 0.1), 400.0, Some(ExpRegime::NoSwitch)),
        (
            "uniform q = 80",
            ProblemSpec::new(6.0, 20.0, 200.0, 0.0, 1.0, 1e9, GreenDistribution::uniform(80.0).unwrap()).unwrap(),
            16_000.0,
            None,
        ),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, p, d_max, regime) in cases {
        if let Some(want) = regime {
            let got = ExpSolverState::new(&p).unwrap().regime;
            pass &= got == want;
        }
        let (agree, skipped, total) = phase_grid(&p, d_max);
        pass &= agree + skipped == total;
        parts.push(format!("{name}: {agree}/{} agree", total - skipped));
    }
    report(9, pass, parts.join(", "))
}

fn c10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut margin = f64::INFINITY;
    let mut seen = 0;
    let mut check = |p: &ProblemSpec, traj: &redlight::Trajectory| {
        let st = ExpSolverState::new(p).unwrap();
        let Some(vc) = st.v_c_star.value() else { return };
        if st.regime != ExpRegime::SwitchBelowVmax || vc <= st.v_beta {
            return;
        }
        let segs = traj.segments();
        for w in segs.windows(2) {
            if let (SegmentKind::EulerLagrange(_), SegmentKind::Beta) = (w[0].kind(), w[1].kind()) {
                margin = margin.min(w[0].slope(w[0].t_end()) + p.beta);
                seen += 1;
            }
        }
    };
    let p = figure_exponential(200.0, 4000.0, 4000.0);
    check(&p, &solve(&p).unwrap().trajectory);
    for _ in 0..300 {
        let (p, r) = random_solved(&mut rng, Law::Exponential);
        check(&p, &r.trajectory);
    }
    report(10, seen > 0 && margin > 0.0, format!("{seen} switches, smallest margin {margin:.6}"))
}

#[test]
fn acceptance() {
    let outcomes = [c1(), c2(), c3(), c4(), c5(), c6(), c7(), c8(), c9(), c10()];
    let failed: Vec<String> = outcomes.iter().filter(|o| !o.pass).map(|o| format!("{}: {}", o.id, o.detail)).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
