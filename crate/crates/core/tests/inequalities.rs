use proptest::prelude::*;
use shubinlab::geometry::{DensityProfile, SensorSet};
use shubinlab::inequalities::*;
use shubinlab::spectral_core::*;
use std::path::PathBuf;

fn load_battery(name: &str) -> Battery {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(format!("batteries/{name}.json"));
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn half_space(offset: f64) -> SensorSet {
    SensorSet::HalfSpace { normal: vec![1.0], offset }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

#[test]
fn harmonic_bound_by_direct_evaluation() {
    // (K/θ)^{K(1 + L² + L√λ)} evaluated without logs
    for (theta, l, lambda, kk) in [(0.5f64, 1.0, 4.0, 2.0), (0.8, 0.3, 9.0, 1.5), (0.25, 0.5, 1.0, 1.0)] {
        let direct: f64 = (kk / theta).powf(kk * (1.0 + l * l + l * f64::sqrt(lambda)));
        let b = bound_harmonic(theta, l, lambda, kk).unwrap();
        assert!((b.value() - direct).abs() < 1e-12 * direct);
    }
    let a = bound_harmonic(0.3, 1.0, 10.0, 2.0).unwrap().ln;
    let b = bound_harmonic(0.6, 1.0, 10.0, 2.0).unwrap().ln;
    assert!(a > b);
}

#[test]
fn shubin_bound_adds_the_log_term() {
    let (theta, l, lambda, kk): (f64, f64, f64, f64) = (0.4, 1.3, 25.0, 2.0);
    let h = bound_harmonic(theta, l, lambda, kk).unwrap().ln;
    let s = bound_shubin(theta, l, lambda, 1, 1, kk).unwrap().ln;
    assert!((s - h - kk * lambda.ln_1p() * (kk / theta).ln()).abs() < 1e-10 * s);
    // λ = 0 leaves (K/θ)^{K(1 + L^{1+k/m})}
    let z = bound_shubin(theta, l, 0.0, 3, 2, kk).unwrap().ln;
    assert!((z - kk * (1.0 + l.powf(2.5)) * (kk / theta).ln()).abs() < 1e-12);
}

#[test]
fn profile_bound_log_slope() {
    // with a = 0 the log of the log-bound grows like λ^{δ/2k + 1/2m}
    for (k, m, delta) in [(1usize, 1usize, 1.0), (2, 1, 0.5), (1, 2, 0.0)] {
        let ll = |lambda: f64| bound_shubin_profile(0.5, 0.0, 1.0, delta, lambda, k, m, 2.0).unwrap().ln.ln();
        let (a, b) = (1e10, 1e12);
        let slope = (ll(b) - ll(a)) / (b / a).ln();
        let expect = delta / (2.0 * k as f64) + 0.5 / m as f64;
        assert!((slope - expect).abs() < 0.02, "(k,m,δ)=({k},{m},{delta}): slope {slope} vs {expect}");
    }
}

#[test]
fn bernstein_term_ratio() {
    let consts = BoundConstants::default_for(2, 1, 1);
    let (lambda, delta) = (7.0, 0.3);
    for n in 0..12 {
        let a = bernstein_constant(n, lambda, delta, 2, 1, 1, &consts, false).unwrap().ln;
        let b = bernstein_constant(n + 1, lambda, delta, 2, 1, 1, &consts, false).unwrap().ln;
        let expect = (consts.bern_c_big * delta * (n + 1) as f64).powi(2);
        assert!(((b - a).exp() - expect).abs() < 1e-10 * expect);
    }
}

#[test]
fn harmonic_and_general_bernstein_share_the_growth_order() {
    let consts = BoundConstants::default_for(1, 1, 1);
    let (lambda, delta) = (3.0, 0.5);
    let r: Vec<f64> = (0..=10)
        .map(|n| {
            let g = bernstein_constant(n, lambda, delta, 1, 1, 1, &consts, false).unwrap().ln;
            let h = bernstein_constant(n, lambda, delta, 1, 1, 1, &consts, true).unwrap().ln;
            g - h
        })
        .collect();
    // the (n!)² factors cancel and the ratio is geometric in n
    let step = r[1] - r[0];
    assert!((step - 2.0 * (consts.bern_c_big / 2.0).ln()).abs() < 1e-12);
    for w in r.windows(2) {
        assert!((w[1] - w[0] - step).abs() < 1e-10);
    }
    let normalised: Vec<f64> = r.iter().enumerate().map(|(n, v)| v - n as f64 * step).collect();
    let spread =
        normalised.iter().copied().fold(f64::NEG_INFINITY, f64::max) - normalised.iter().copied().fold(f64::INFINITY, f64::min);
    assert!(spread < 1e-10);
}

#[test]
fn canonical_h_series_ratio_is_one_half() {
    let consts = BoundConstants::default_for(1, 1, 1);
    for (l, lambda) in [(0.5, 1.0), (2.0, 40.0)] {
        let h = h_series(l, lambda, 1, 1, 1, &consts).unwrap();
        // √(C_B(n+1)/C_B(n))·10dl/(n+1) = 10dlCδ
        assert!((h.tail_ratio - 0.5).abs() < 1e-12);
    }
    let h = h_series(1.0, 0.0, 1, 1, 1, &consts).unwrap();
    assert!(h.value.ln.is_finite() && h.terms > 1);
}

#[test]
fn exact_ratio_reference_values() {
    let dec = eigendecompose(&SpectralModel::new(1, 1, 1), 4).unwrap();
    let sub = spectral_projector(&dec, 2.0).unwrap();
    let full = exact_observability_ratio(&sub, &SensorSet::Full { d: 1 }).unwrap();
    assert!((full.ratio - 1.0).abs() < 1e-8);
    let r = exact_observability_ratio(&sub, &SensorSet::BallComplement { d: 1, radius: 1.0 }).unwrap();
    assert!((r.ratio - 1.0 / statrs::function::erf::erfc(1.0)).abs() < 1e-6);
}

#[test]
fn exact_ratio_grows_with_lambda() {
    let dec = eigendecompose_up_to(&SpectralModel::new(1, 1, 1), 60.0).unwrap();
    let set = half_space(0.5);
    let mut last = 0.0;
    for lambda in [2.0, 4.0, 8.0, 16.0, 30.0, 60.0] {
        let (_, r) = ratio_or_trivial(&dec, lambda, &set).unwrap();
        assert!(r.ln_ratio >= last - 1e-9, "λ={lambda}: {} after {last}", r.ln_ratio);
        last = r.ln_ratio;
    }
}

#[test]
fn exact_ratio_grows_as_the_set_shrinks() {
    let dec = eigendecompose_up_to(&SpectralModel::new(2, 1, 1), 20.0).unwrap();
    let sub = spectral_projector(&dec, 20.0).unwrap();
    let mut last = 0.0;
    for offset in [-1.0, -0.5, 0.0, 0.5, 1.0] {
        let r = exact_observability_ratio(&sub, &half_space(offset)).unwrap();
        assert!(r.ln_ratio >= last - 1e-9);
        last = r.ln_ratio;
    }
}

#[test]
fn whole_space_holds_for_any_constant() {
    let v = verify_spectral_inequality(
        &SpectralModel::new(2, 1, 1),
        &DensityProfile::constant(0.9, 1.0),
        &SensorSet::Full { d: 1 },
        &[1.0, 10.0, 30.0],
        &BoundConstants::default_for(2, 1, 1),
    )
    .unwrap();
    assert!(v.reports.iter().all(|r| r.verdict == Verdict::Holds && r.exact_ratio == 1.0));
}

#[test]
fn calibrated_constants_make_every_calibration_case_hold() {
    let battery = load_battery("calibration");
    let table = calibrate_constants(&battery).unwrap();
    for case in &battery.cases {
        let consts = table.get(case.model.k, case.model.m, case.model.d).unwrap();
        assert_eq!(consts.provenance, Provenance::Fitted { battery_id: battery.id.clone() });
        let v = verify_spectral_inequality(&case.model, &case.profile, &case.set, &[case.lambda], consts).unwrap();
        assert_eq!(v.reports[0].verdict, Verdict::Holds, "{}", case.id);
    }
    // calibration is deterministic
    let again = calibrate_constants(&battery).unwrap();
    assert_eq!(serde_json::to_value(&table).unwrap(), serde_json::to_value(&again).unwrap());
}

#[test]
fn whole_space_battery_needs_no_constant_above_one() {
    let model = SpectralModel::new(1, 1, 1);
    let battery = Battery {
        id: "full".into(),
        cases: [5.0, 20.0]
            .iter()
            .enumerate()
            .map(|(i, &lambda)| BatteryCase {
                id: format!("full-{i}"),
                model: model.clone(),
                profile: DensityProfile::constant(0.5, 1.0),
                set: SensorSet::Full { d: 1 },
                lambda,
            })
            .collect(),
    };
    let table = calibrate_constants(&battery).unwrap();
    let c = table.get(1, 1, 1).unwrap();
    assert_eq!((c.k_harm, c.k_shubin), (1.0, 1.0));
    assert!(calibrate_constants(&Battery { id: "empty".into(), cases: vec![] }).is_err());
}

#[test]
fn minimal_constant_bisects_to_one_percent() {
    let k = minimal_constant(|kk| Ok(kk >= 3.7)).unwrap();
    assert!((3.7..=3.7 * 1.01).contains(&k));
    assert_eq!(minimal_constant(|_| Ok(true)).unwrap(), 1.0);
    assert!(minimal_constant(|_| Ok(false)).is_err());
}

#[test]
fn failing_default_constants_ask_for_calibration() {
    // θ near 1 and tiny L force the bound towards K^K
    let profile = DensityProfile::constant(0.99, 0.01);
    let model = SpectralModel::new(1, 1, 1);
    let set = half_space(0.0);
    let default = BoundConstants { k_harm: 1.0, ..BoundConstants::default_for(1, 1, 1) };
    let v = verify_spectral_inequality(&model, &profile, &set, &[10.0], &default).unwrap();
    assert_eq!(v.reports[0].verdict, Verdict::CalibrationNeeded);
    let fitted = BoundConstants { provenance: Provenance::Fitted { battery_id: "t".into() }, ..default };
    let v = verify_spectral_inequality(&model, &profile, &set, &[10.0], &fitted).unwrap();
    assert_eq!(v.reports[0].verdict, Verdict::Violated);
}

#[test]
fn sampled_derivatives_respect_the_fitted_bernstein_constant() {
    let dec = eigendecompose_up_to(&SpectralModel::new(1, 1, 1), 20.0).unwrap();
    let lambdas = [3.0, 8.0, 20.0];
    let deltas = [0.25, 0.5, 1.0];
    let fit = calibrate_bernstein(&dec, &lambdas, 8, &deltas, 1.0).unwrap();
    let consts = BoundConstants {
        bern_c_big: fit.bern_c_big,
        bern_c: fit.bern_c,
        c_prime: fit.c_prime,
        ..BoundConstants::default_for(1, 1, 1)
    };
    for &lambda in &lambdas {
        let sub = spectral_projector(&dec, lambda).unwrap();
        for seed in 0..20 {
            let f = sample_subspace_function(&sub, seed).unwrap();
            let norm_sq = f.norm * f.norm;
            for n in 0..=8 {
                let measured = factorial(n) * derivative_norms(&f, n).unwrap();
                for &delta in &deltas {
                    let cb = bernstein_constant(n, lambda, delta, 1, 1, 1, &consts, false).unwrap();
                    assert!(measured.ln() <= cb.ln - 2f64.ln() + norm_sq.ln() + 1e-9, "λ={lambda} n={n} δ={delta}");
                }
            }
        }
    }
}

#[test]
fn agmon_growth_exponent() {
    // c₁ = ν with t inside the admissible [0, 1); for k = 2 the weighted
    // tail of high levels sits below double precision unless t is smaller.
    // Thresholds between consecutive eigenvalues keep the subspaces from
    // jumping inside the grid.
    for (k, t) in [(1usize, 0.5), (2, 0.35)] {
        let e = ExponentTriple::new(k, 1);
        let top = 200.0;
        let dec = eigendecompose_up_to(&SpectralModel::new(k, 1, 1).balanced_for(top), top).unwrap();
        let ev = &dec.eigenvalues;
        let lambdas: Vec<f64> = ev.windows(2).map(|w| 0.5 * (w[0] + w[1])).filter(|l| (8.0..top).contains(l)).collect();
        let fit = agmon_fit(&dec, &lambdas, e.nu, t, 4, 1).unwrap();
        assert!(fit.exponent <= e.zeta + 0.1, "k={k}: exponent {} vs ζ={}", fit.exponent, e.zeta);
        assert!(fit.prefactor_power <= e.zeta, "k={k}: prefactor power {}", fit.prefactor_power);
        assert!(fit.ln_c2.is_finite() && fit.c3 > 0.0);
        // the fitted envelope covers every measured point up to the fit residual
        for p in &fit.points {
            let env = fit.ln_c2 + fit.prefactor_power * p.lambda.ln() + fit.c3 * t * p.lambda.powf(fit.exponent);
            assert!((p.log_weighted - env).abs() < 0.1, "λ={}: {} vs {env}", p.lambda, p.log_weighted);
        }
    }
}

#[test]
fn log_refined_bound_values() {
    let r = log_refined_bound(1.0, 3.0, 100.0, 1.0).unwrap();
    // independent sup of L⟨x⟩/((g∘g)^α g) over |x| < √200 with g = log(e + ·)
    let g = |s: f64| (std::f64::consts::E + s).ln();
    let rho = |x: f64| (1.0 + x * x).sqrt() / (g(g(x)).powi(3) * g(x));
    let sup = (0..=200_000).map(|i| rho(i as f64 * 200f64.sqrt() / 200_000.0)).fold(0.0, f64::max);
    assert!((r.l_lambda - sup).abs() < 1e-8 * sup);
    let den = 100f64.ln().ln().powi(3) * 100f64.ln();
    assert!((r.log_bound - 100.0 / den).abs() < 1e-12);
    assert!(r.hypothesis_alpha_gt_2);
    // L_λ stays within a fixed multiple of the reference scale
    let ratios: Vec<f64> = [4.0, 10.0, 1e2, 1e4, 1e6]
        .iter()
        .map(|&lambda| {
            let r = log_refined_bound(1.0, 3.0, lambda, 1.0).unwrap();
            r.l_lambda / r.reference
        })
        .collect();
    assert!(ratios.iter().all(|q| *q > 0.0 && *q < 10.0), "{ratios:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn h_series_stays_below_its_majorant(l in 0.05f64..3.0, lambda in 0.0f64..200.0) {
        let consts = BoundConstants::default_for(1, 1, 1);
        let h = h_series(l, lambda, 1, 1, 1, &consts).unwrap();
        prop_assert!(h.value.ln <= h.majorant.ln + 1e-9, "h {} vs majorant {}", h.value.ln, h.majorant.ln);
    }
}
