mod common;

use common::{fd_oracle, rel};
use num_rational::Ratio;
use proptest::prelude::*;
use shubinlab::anharmonic::anharmonic_ground;
use shubinlab::controllability::*;
use shubinlab::geometry::{DensityProfile, RhoProfile, SensorSet, SigmaProfile};
use shubinlab::spectral_core::{eigendecompose, spectral_projector, SpectralModel};
use statrs::function::erf::erf;

fn half_space(offset: f64) -> SensorSet {
    SensorSet::HalfSpace { normal: vec![1.0], offset }
}

fn obs(d0: f64, d1: f64, eta: f64, t: f64) -> ObservabilityInput {
    ObservabilityInput { d0, d1, eta, t, c1: 1.0, c2: 1.0, c3: 1.0 }
}

#[test]
fn observability_constant_values() {
    let v = observability_constant(&obs(1.0, 1.0, 0.5, 1.0)).unwrap().value();
    assert!((v - 3.0 * std::f64::consts::E).abs() < 1e-12);
    let inp = ObservabilityInput { c1: 0.7, c2: 1.3, ..obs(2.0, 0.0, 0.3, 0.5) };
    let v = observability_constant(&inp).unwrap().value();
    assert!((v - 0.7 * 2.0 * 5f64.powf(1.3)).abs() < 1e-12 * v);
    let mut last = f64::INFINITY;
    for t in [0.1, 0.5, 1.0, 4.0] {
        let ln = observability_constant(&obs(1.0, 2.0, 0.5, t)).unwrap().ln;
        assert!(ln < last);
        last = ln;
    }
    assert!(observability_constant(&obs(1.0, 1.0, 1.0, 1.0)).is_err());
}

#[test]
fn fractional_subspaces() {
    let dec = eigendecompose(&SpectralModel::new(1, 1, 1), 8).unwrap();
    assert_eq!(fractional_subspace(&dec, 1.0, 6.0).unwrap().members, spectral_projector(&dec, 6.0).unwrap().members);
    assert_eq!(fractional_subspace(&dec, 2.0, 9.0).unwrap().eigenvalues, vec![1.0, 3.0]);
    assert_eq!(fractional_subspace(&dec, 0.5, 2.0).unwrap().eigenvalues, vec![1.0, 3.0]);
}

#[test]
fn regimes_at_the_critical_exponent() {
    assert_eq!(regime_classify(1, Ratio::from_integer(1)).unwrap(), Regime::Critical);
    assert_eq!(regime_classify(2, Ratio::from_integer(2)).unwrap(), Regime::Strong);
    assert_eq!(regime_classify(3, Ratio::from_integer(1)).unwrap(), Regime::Weak);
    assert_eq!(regime_classify(2, parse_rational("3/2").unwrap()).unwrap(), Regime::Critical);
    assert_eq!(regime_classify(2, parse_rational("1.5").unwrap()).unwrap(), Regime::Critical);
    assert!(regime_classify(0, Ratio::from_integer(1)).is_err());
}

fn profile(delta: f64, a: f64) -> DensityProfile {
    DensityProfile {
        rho: RhoProfile::Power { l: 1.0, delta },
        sigma: if a == 0.0 { SigmaProfile::Constant { theta: 0.5 } } else { SigmaProfile::PowerExp { theta: 0.5, a } },
    }
}

#[test]
fn shubin_regime_cases() {
    let one = Ratio::from_integer(1);
    assert_eq!(shubin_regime(1, 1, one, &profile(0.0, 0.0)).unwrap().verdict, ShubinVerdict::ControllableAllT);
    assert_eq!(shubin_regime(1, 1, one, &profile(1.0, 0.0)).unwrap().verdict, ShubinVerdict::OutsideTheory);
    assert_eq!(shubin_regime(2, 1, Ratio::new(3, 4), &profile(0.5, 0.0)).unwrap().verdict, ShubinVerdict::ControllableAllT);
    assert_eq!(shubin_regime(1, 1, one, &profile(1.5, 0.0)).unwrap().verdict, ShubinVerdict::OutsideTheory);
    let log = DensityProfile { rho: RhoProfile::LogRefined { l: 1.0, alpha: 3.0 }, sigma: SigmaProfile::Constant { theta: 0.5 } };
    assert_eq!(shubin_regime(1, 1, one, &log).unwrap().verdict, ShubinVerdict::ControllableAllT);
    assert_eq!(shubin_regime(2, 1, one, &log).unwrap().verdict, ShubinVerdict::OutsideTheory);
    let weak_log = DensityProfile { rho: RhoProfile::LogRefined { l: 1.0, alpha: 2.0 }, ..log };
    assert_eq!(shubin_regime(1, 1, one, &weak_log).unwrap().verdict, ShubinVerdict::OutsideTheory);
}

#[test]
fn minimal_time_formulas() {
    assert!((minimal_time_lower(1, 1.0, 2f64.sqrt()).unwrap() - 1.0).abs() < 1e-14);
    for d in 1..=3 {
        let lg = anharmonic_ground(1, d).unwrap();
        let dist = 1.7;
        assert!((minimal_time_lower(1, lg, dist).unwrap() - dist * dist / (2.0 * d as f64)).abs() < 1e-10);
    }
    // quartic ground energy from the finite-difference oracle
    let t = minimal_time_lower(2, fd_oracle(2, 0), 1.0).unwrap();
    assert!((t - fd_oracle(2, 0).powf(-1.5) / 3.0).abs() < 1e-9);
    assert!((t - 0.3053).abs() < 1e-4);
    // θ = 1 leaves c log c, negative for c < 1, and it is kept
    let up = minimal_time_upper(1, 1.0, 1.0, 1.0, 0.5).unwrap();
    assert!((up - 0.5 * 0.5f64.ln()).abs() < 1e-15);
    for d in 1..=3 {
        let b = ball_complement_bracket(1, d, d as f64, 1.0, 1.0, 2.0).unwrap();
        assert!(b.consistent && b.lower <= b.upper);
        assert!((b.theta_eps - (1.0 - 0.5f64.powi(d as i32))).abs() < 1e-15);
    }
}

#[test]
fn witness_sequences() {
    let w = nonobservability_witness(1, 1.0, 1.0, 1.0, 0.1, 0.9, 20).unwrap();
    assert!((w.critical_threshold - 0.45).abs() < 1e-15);
    assert!(w.contradiction && w.decreasing_from.is_some_and(|n| n <= 10));
    for (n, e) in &w.exponents {
        assert!((e - (0.2 - 0.9) * *n as f64).abs() < 1e-12);
    }
    assert!(w.schrodinger.windows(2).all(|p| p[1].1 < p[0].1 && p[1].1 < 0.0));
    let weak = nonobservability_witness(2, 1.0, fd_oracle(2, 0), 1.0, 1.0, 0.5, 1000).unwrap();
    assert!(weak.contradiction);
    let above = nonobservability_witness(1, 1.0, 1.0, 1.0, 1.0, 0.5, 100).unwrap();
    assert!(!above.contradiction && above.increasing_from.is_some());
}

#[test]
fn grushin_ground_matches_the_anharmonic_solver() {
    for (gamma, d) in [(1u32, 1usize), (2, 1), (3, 1), (1, 2), (2, 2)] {
        let p = GrushinParams::new(gamma, 1.0, d, 3).unwrap();
        assert_eq!(p.lambda_gamma.to_bits(), anharmonic_ground(gamma as usize, d).unwrap().to_bits());
    }
}

#[test]
fn grushin_mode_spectra() {
    let p = GrushinParams::new(2, 0.75, 1, 4).unwrap();
    match grushin_mode_spectrum(&p, &[1]).unwrap() {
        ModeSpectrum::Scaled { values, .. } => {
            for (v, l) in values.iter().zip(&p.spectrum) {
                assert!((v - l.powf(0.75)).abs() < 1e-12);
            }
        }
        other => panic!("{other:?}"),
    }
    let p = GrushinParams::new(1, 1.0, 1, 3).unwrap();
    match grushin_mode_spectrum(&p, &[4]).unwrap() {
        ModeSpectrum::Scaled { values, .. } => assert!((values[0] - 4.0).abs() < 1e-12),
        other => panic!("{other:?}"),
    }
    assert!(matches!(grushin_mode_spectrum(&p, &[0]).unwrap(), ModeSpectrum::FreeLaplacian { .. }));
    assert!(grushin_mode_spectrum(&p, &[1, 1]).is_err());
}

#[test]
fn dilation_identity_at_matrix_level() {
    for (gamma, r) in [(1u32, 2.0), (1, 5.0), (2, 3.0), (3, 2.0)] {
        let s = scaling_defect(gamma, r, 320, 24).unwrap();
        assert!(s.relative_defect < 1e-6, "γ={gamma} r={r}: {}", s.relative_defect);
    }
}

fn harmonic_truncation(n: usize) -> shubinlab::spectral_core::SpectralSubspace {
    leading_subspace(&eigendecompose(&SpectralModel::new(1, 1, 1), n).unwrap(), n).unwrap()
}

#[test]
fn hum_on_the_whole_line_matches_the_diagonal_gramian() {
    let sub = harmonic_truncation(5);
    let f0 = [0.3, -1.0, 0.5, 0.2, -0.7];
    let t = 0.8;
    let run = hum_control(&sub, 1.0, &SensorSet::Full { d: 1 }, t, &f0, 8).unwrap();
    // W = diag((1 − e^{−2λT})/(2λ)) with λ = 1, 3, 5, 7, 9
    let oracle: f64 = f0
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let l = (2 * i + 1) as f64;
            2.0 * l * f * f / (2.0 * l * t).exp_m1()
        })
        .sum();
    assert!(rel(run.gramian_cost, oracle) < 1e-10);
    assert!(rel(run.cost, oracle) < 1e-8);
    let norm_sq: f64 = f0.iter().map(|f| f * f).sum();
    assert!(run.cost <= norm_sq * 2.0 * 9.0 / (1.0 - (-2.0 * t).exp()));
    assert!(run.final_norm <= 1e-8 * norm_sq.sqrt());
}

#[test]
fn hum_on_a_half_line() {
    let sub = harmonic_truncation(6);
    let f0 = [1.0, 0.5, -0.25, 0.1, 0.3, -0.2];
    let norm = f0.iter().map(|f| f * f).sum::<f64>().sqrt();
    let mut last = 0.0;
    for t in [2.0, 1.0, 0.5] {
        let run = hum_control(&sub, 1.0, &half_space(0.0), t, &f0, 8).unwrap();
        assert!(rel(run.cost, run.gramian_cost) < 1e-8, "T={t}: {} vs {}", run.cost, run.gramian_cost);
        assert!(run.final_norm <= 1e-8 * norm);
        assert!(run.cost <= run.truncated_observability_constant * norm * norm * (1.0 + 1e-10));
        assert!(run.cost >= last);
        last = run.cost;
    }
    let zero = hum_control(&sub, 1.0, &half_space(0.0), 1.0, &[0.0; 6], 4).unwrap();
    assert_eq!((zero.cost, zero.final_norm), (0.0, 0.0));
    assert!(zero.control_trajectory.iter().all(|(_, c)| c.iter().all(|v| *v == 0.0)));
}

#[test]
fn hum_rejects_a_blind_set() {
    let sub = harmonic_truncation(3);
    assert!(hum_control(&sub, 1.0, &SensorSet::Empty { d: 1 }, 1.0, &[1.0, 0.0, 0.0], 4).is_err());
}

#[test]
fn heat_probe_matches_the_error_function() {
    // ĝ = e^{−ξ²/2} evolves to a Gaussian of variance 1 + 2t; with a = 1/2 + t
    // the mass of |u|² on (x₀ − L, x₀ + L) is erf(L/√(2a))/(2√(2πa))
    let (t, l) = (0.3, 1.2);
    let a = 0.5 + t;
    let pts = gaussian_necessity_probe(&SensorSet::Full { d: 1 }, 1.0, t, l, &[0.0, 5.0], 30.0).unwrap();
    let norm = 1.0 / (2.0 * (2.0 * std::f64::consts::PI * a).sqrt());
    for p in &pts {
        assert!(rel(p.total_mass, norm) < 1e-10);
        assert!(rel(p.captured, norm * erf(l / (2.0 * a).sqrt())) < 1e-8);
    }
    let wide = gaussian_necessity_probe(&SensorSet::Full { d: 1 }, 0.5, 0.2, 30.0, &[0.0], 30.0).unwrap();
    assert!(rel(wide[0].captured, wide[0].total_mass) < 1e-6);
}

#[test]
fn translates_escape_a_half_line() {
    let grid: Vec<f64> = (0..9).map(|i| 1.0 - i as f64).collect();
    let pts = gaussian_necessity_probe(&half_space(0.0), 1.0, 0.5, 2.0, &grid, 30.0).unwrap();
    assert!(pts.windows(2).all(|w| w[1].captured <= w[0].captured));
    assert!(pts.last().unwrap().captured < 1e-6 * pts[0].captured);
    assert!(pts[0].half_mass_radius.is_some());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn regime_survives_integer_scaling(gamma in 1u32..6, p in 1i64..40, q in 1i64..40, c in 1i64..50) {
        let base = regime_classify(gamma, Ratio::new(p, q)).unwrap();
        prop_assert_eq!(regime_classify(gamma, Ratio::new_raw(p * c, q * c)).unwrap(), base);
        // 2p against (1+γ)q decides the same comparison in integers
        let expect = match (2 * p).cmp(&((1 + gamma as i64) * q)) {
            std::cmp::Ordering::Greater => Regime::Strong,
            std::cmp::Ordering::Equal => Regime::Critical,
            std::cmp::Ordering::Less => Regime::Weak,
        };
        prop_assert_eq!(base, expect);
    }

    #[test]
    fn modes_decay_at_least_at_their_ground_rate(
        gamma in 1u32..4, s in 0.25f64..2.0, r in 1i64..30, t in 0.0f64..2.0,
        g in proptest::collection::vec(-1.0f64..1.0, 4),
    ) {
        let p = GrushinParams::new(gamma, s, 1, 4).unwrap();
        let ModeSpectrum::Scaled { values, .. } = grushin_mode_spectrum(&p, &[r]).unwrap() else {
            return Err(TestCaseError::fail("mode r ≥ 1 must scale"));
        };
        let rate = p.lambda_gamma.powf(s) * (r as f64).powf(2.0 * s / (1.0 + gamma as f64));
        let evolved: f64 = values.iter().zip(&g).map(|(v, c)| (-2.0 * t * v).exp() * c * c).sum();
        let norm: f64 = g.iter().map(|c| c * c).sum();
        prop_assert!(evolved <= (-2.0 * t * rate).exp() * norm * (1.0 + 1e-12));
    }
}
