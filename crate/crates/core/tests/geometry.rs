use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use shubinlab::geometry::density::{self, sample_points};
use shubinlab::geometry::*;

fn half_space(offset: f64) -> SensorSet {
    SensorSet::HalfSpace { normal: vec![1.0], offset }
}

/// `|ω ∩ B(c, ρ)|` in `d = 1` by brute-force midpoint counting.
fn brute_measure_1d(set: &SensorSet, c: f64, rho: f64) -> f64 {
    let n = 200_000;
    let h = 2.0 * rho / n as f64;
    (0..n).filter(|i| set.contains(&[c - rho + (*i as f64 + 0.5) * h]).unwrap()).count() as f64 * h
}

#[test]
fn ball_measures_match_counting() {
    let sets = [
        half_space(0.3),
        SensorSet::BallComplement { d: 1, radius: 1.2 },
        SensorSet::BallLattice { d: 1, spacing: 1.0, radius: RadialFn::Constant { value: 0.2 } },
        SensorSet::Union { parts: vec![half_space(2.0), SensorSet::BallComplement { d: 1, radius: 3.0 }] },
    ];
    for set in &sets {
        for (c, rho) in [(0.0, 1.0), (1.7, 0.5), (-2.3, 2.5)] {
            let exact = set.ball_measure(&[c], rho).unwrap();
            let brute = brute_measure_1d(set, c, rho);
            assert!((exact - brute).abs() < 1e-4, "{set:?} at ({c}, {rho}): {exact} vs {brute}");
        }
    }
}

#[test]
fn planar_half_space_measure_is_a_segment() {
    // a chord at distance s from the centre of the unit disc cuts off
    // acos(s) − s√(1 − s²)
    let set = SensorSet::HalfSpace { normal: vec![0.0, 1.0], offset: 0.4 };
    let m = set.ball_measure(&[0.0, 0.0], 1.0).unwrap();
    let s: f64 = 0.4;
    assert!((m - (s.acos() - s * (1.0 - s * s).sqrt())).abs() < 1e-12);
}

#[test]
fn constant_profile_parameters_do_not_depend_on_lambda() {
    let p = DensityProfile::constant(0.3, 2.0);
    for lambda in [0.0, 1.0, 10.0, 1e4] {
        assert_eq!(geom_params(&p, lambda, 2).unwrap(), (0.3, 2.0));
    }
}

#[test]
fn power_profile_parameters_match_closed_forms() {
    let p =
        DensityProfile { rho: RhoProfile::Power { l: 1.5, delta: 0.5 }, sigma: SigmaProfile::PowerExp { theta: 0.5, a: 0.25 } };
    for (lambda, k) in [(3.0, 1usize), (50.0, 2), (200.0, 3)] {
        let r = (2.0f64 * lambda).powf(0.5 / k as f64);
        let jr = (1.0 + r * r).sqrt();
        let (theta, l) = geom_params(&p, lambda, k).unwrap();
        assert!((l - 1.5 * jr.sqrt()).abs() < 1e-12 * l);
        assert!((theta - 0.5f64.powf(jr.powf(0.25))).abs() < 1e-12);
    }
}

#[test]
fn half_space_is_not_thick() {
    let rep = thickness_check(&half_space(0.0), 0.1, 1.0, &SampleSpec::default()).unwrap();
    assert!(!rep.thick);
}

#[test]
fn dense_lattice_is_thick() {
    let set = SensorSet::BallLattice { d: 1, spacing: 1.0, radius: RadialFn::Constant { value: 0.25 } };
    // every window of length 4 holds at least three full balls
    let rep = thickness_check(&set, 0.3, 2.0, &SampleSpec { half_width: 20.0, count: 500, include_critical: true }).unwrap();
    assert!(rep.thick, "margin {}", rep.margin);
}

#[test]
fn covers_are_certified_and_valid() {
    let mut rng = ChaCha20Rng::seed_from_u64(3);
    for (centre, radius, rho) in [
        (vec![0.0], 5.0, RhoProfile::Constant { l: 0.7 }),
        (vec![3.0], 4.0, RhoProfile::Power { l: 0.5, delta: 0.5 }),
        (vec![0.0, 0.0], 2.0, RhoProfile::Constant { l: 0.6 }),
        (vec![1.0, -1.0], 1.5, RhoProfile::Power { l: 0.4, delta: 1.0 }),
    ] {
        let d = centre.len();
        let cover = besicovitch_cover(&centre, radius, &rho, None).unwrap();
        assert!(cover.certified, "overlap {} over {}^{d}", cover.max_overlap, cover.k_bes);
        let limit = cover.k_bes.pow(d as u32);
        for _ in 0..10_000 {
            // uniform point of B(centre, radius) by rejection
            let p: Vec<f64> = loop {
                let q: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
                if q.iter().map(|v| v * v).sum::<f64>() < 1.0 {
                    break q.iter().zip(&centre).map(|(a, c)| c + radius * a).collect();
                }
            };
            let hits = cover
                .balls
                .iter()
                .filter(|(c, r)| c.iter().zip(&p).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt() <= *r)
                .count();
            assert!(hits >= 1 && hits <= limit, "point {p:?} lies in {hits} balls");
        }
    }
}

#[test]
fn example_lattice_weights() {
    let ex = construct_example_set(&ExampleSpec::BallLattice {
        d: 1,
        l: 2.0,
        w: RadialFn::Power { coef: 1.0, exponent: -2.0 },
        window: 50.0,
    })
    .unwrap();
    assert_eq!(ex.finite_measure, Some(true));
    let ex = construct_example_set(&ExampleSpec::BallLattice {
        d: 1,
        l: 2.0,
        w: RadialFn::Power { coef: 1.0, exponent: -0.5 },
        window: 50.0,
    })
    .unwrap();
    assert_eq!(ex.finite_measure, Some(false));
}

#[test]
fn descriptors_reject_unknown_keys() {
    let ok: SensorSet = serde_json::from_str(r#"{"type":"ball_complement","d":1,"radius":2}"#).unwrap();
    assert_eq!(ok, SensorSet::BallComplement { d: 1, radius: 2.0 });
    assert!(serde_json::from_str::<SensorSet>(r#"{"type":"ball_complement","d":1,"radius":2,"x":0}"#).is_err());
}

fn profile() -> DensityProfile {
    DensityProfile { rho: RhoProfile::Constant { l: 1.0 }, sigma: SigmaProfile::Constant { theta: 0.2 } }
}

fn sample() -> SampleSpec {
    SampleSpec { half_width: 8.0, count: 200, include_critical: true }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn enlarging_the_set_never_lowers_the_margin(offset in -3.0f64..3.0, radius in 0.5f64..4.0, spacing in 0.5f64..3.0) {
        let base = half_space(offset);
        let extra = SensorSet::BallLattice { d: 1, spacing, radius: RadialFn::Constant { value: 0.2 * spacing } };
        let bigger = SensorSet::Union { parts: vec![base.clone(), extra, SensorSet::BallComplement { d: 1, radius }] };
        let pts = sample_points(&bigger, &sample());
        let a = density::density_margin_at(&base, &profile(), &pts).unwrap();
        let b = density::density_margin_at(&bigger, &profile(), &pts).unwrap();
        prop_assert!(b.margin >= a.margin - 1e-12);
    }

    #[test]
    fn ball_measure_is_bounded_by_the_ball(c in -5.0f64..5.0, rho in 0.1f64..3.0, offset in -2.0f64..2.0) {
        let m = half_space(offset).ball_measure(&[c], rho).unwrap();
        prop_assert!((-1e-15..=2.0 * rho + 1e-12).contains(&m));
    }
}
