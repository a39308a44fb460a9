mod common;

use common::{figure_exponential, random_instance, random_solved, Law};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use redlight::cost::{expected_arrival, pressure_action, PressureField};
use redlight::distributions::GreenDistribution;
use redlight::io::{parse_trajectory, to_json, ReportFile};
use redlight::oracle::{dp_min_cost, DpGrid};
use redlight::solver::exponential::family_trajectory;
use redlight::solver::{classify, RegionLabel};
use redlight::{solve, PhasePattern, ProblemSpec};

#[test]
fn uniform_regions_agree_with_solver() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..500 {
        let p = random_instance(&mut rng, Law::Uniform);
        let label = classify(&p, p.v0, p.d).unwrap();
        let r = solve(&p).unwrap();
        assert_eq!(label, RegionLabel::Pattern(r.pattern.clone()), "{p:?}");
    }
}

#[test]
fn pressure_action_ranks_equal_distance_profiles() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let family: PhasePattern = "vmax~>el~>beta~>0".parse().unwrap();
    let mut pairs = 0;
    while pairs < 100 {
        let d = rng.random_range(1500.0..8000.0);
        let p = figure_exponential(200.0, d, d + 5000.0);
        let (a, b) = (rng.random_range(60.0..200.0), rng.random_range(60.0..200.0));
        let (Some(ta), Some(tb)) =
            (family_trajectory(&p, &family, a).unwrap(), family_trajectory(&p, &family, b).unwrap())
        else {
            continue;
        };
        let pf = PressureField::new(&p, rng.random_range(-1.0..1.0));
        let ds = expected_arrival(&ta, &p).unwrap() - expected_arrival(&tb, &p).unwrap();
        let da = (pressure_action(&ta, &pf).unwrap() - pressure_action(&tb, &pf).unwrap()) / (p.alpha * p.v_max);
        assert!((ds - da).abs() <= 1e-8 * (1.0 + ds.abs()), "{ds} vs {da}");
        pairs += 1;
    }
}

#[test]
fn dp_recovers_uniform_pattern() {
    let p = ProblemSpec::new(6.0, 20.0, 200.0, 0.0, 1500.0, 6000.0, GreenDistribution::uniform(40.0).unwrap()).unwrap();
    let r = solve(&p).unwrap();
    assert_eq!(r.pattern.to_string(), "alpha~>el~>0");
    let dp = dp_min_cost(&p, &DpGrid::default_for(&p)).unwrap();
    assert_eq!(dp.pattern, r.pattern);
    assert!(dp.cost >= r.expected_arrival * (1.0 - 1e-9));
    assert!(dp.cost - r.expected_arrival < 1e-2 * r.expected_arrival);
}

#[test]
fn reports_round_trip_through_json() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for law in [Law::Uniform, Law::Exponential] {
        for _ in 0..50 {
            let (p, r) = random_solved(&mut rng, law);
            let text = to_json(&ReportFile::new(&r)).unwrap();
            let back = parse_trajectory(&text).unwrap().to_trajectory(&p).unwrap();
            let cost = expected_arrival(&back, &p).unwrap();
            assert!(
                (cost - r.expected_arrival).abs() <= 1e-12 * r.expected_arrival,
                "{cost} vs {}",
                r.expected_arrival
            );
            assert_eq!(back.pattern(), r.pattern);
        }
    }
}
