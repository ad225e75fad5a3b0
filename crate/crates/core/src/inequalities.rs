//! Spectral-inequality bounds, Bernstein constants and the `h`-series,
//! exact observability ratios over spectral subspaces, verification and
//! calibration of the existential constants.

use crate::error::{Error, Result};
use crate::geometry::{check_density, geom_params, DensityProfile, SampleSpec, SensorSet};
use crate::hermite;
use crate::logval::LogValue;
use crate::precise;
use crate::spectral_core::{
    eigendecompose_up_to, restricted_gram, sample_matrix_1d, sample_subspace_function, spectral_projector, weighted_norm_sq,
    BasisKind, EigenDecomposition, ExponentTriple, FunctionRep, SpectralModel, SpectralSubspace, WeightExponent,
};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Slack on log-scale comparisons between an exact ratio and a bound,
/// absorbing quadrature rounding when both are close to 1.
pub const LOG_COMPARE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Default,
    Fitted { battery_id: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants {
    pub k_harm: f64,
    pub k_shubin: f64,
    pub bern_c_big: f64,
    pub bern_c: f64,
    pub c_prime: f64,
    pub provenance: Provenance,
}

impl BoundConstants {
    /// Uncalibrated placeholders; reports using them say so.
    pub fn default_for(k: usize, m: usize, d: usize) -> Self {
        let (big, small) = (2.0, 1.0);
        Self {
            k_harm: 2.0,
            k_shubin: 2.0,
            bern_c_big: big,
            bern_c: small,
            c_prime: c_prime(big, small, k, m, d),
            provenance: Provenance::Default,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Violated,
    CalibrationNeeded,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub lambda: f64,
    pub k: usize,
    pub m: usize,
    pub d: usize,
    pub theta: f64,
    #[serde(rename = "L")]
    pub l: f64,
    pub dim: usize,
    pub theoretical_bound: LogValue,
    pub exact_ratio: f64,
    pub log_ratio: f64,
    pub verdict: Verdict,
    pub constant_used: f64,
    pub provenance: Provenance,
}

fn check_bound_args(theta: f64, l: f64, lambda: f64, k: f64) -> Result<()> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::InvalidParameter(format!("theta must lie in (0, 1], got {theta}")));
    }
    if !(l > 0.0) || !(lambda >= 0.0) || !(k >= 1.0) {
        return Err(Error::InvalidParameter(format!("need L > 0, λ ≥ 0, K ≥ 1 (got {l}, {lambda}, {k})")));
    }
    Ok(())
}

/// `(K/θ)^{K(1 + L² + L√λ)}`.
pub fn bound_harmonic(theta: f64, l: f64, lambda: f64, k: f64) -> Result<LogValue> {
    check_bound_args(theta, l, lambda, k)?;
    Ok(LogValue::from_ln(k * harmonic_exponent(l, lambda) * (k / theta).ln()))
}

pub fn harmonic_exponent(l: f64, lambda: f64) -> f64 {
    1.0 + l * l + l * lambda.sqrt()
}

/// `(K/θ)^{K(1 + L^{1+k/m} + Lλ^{1/2m} + log(1+λ))}`.
pub fn bound_shubin(theta: f64, l: f64, lambda: f64, k: usize, m: usize, kk: f64) -> Result<LogValue> {
    check_bound_args(theta, l, lambda, kk)?;
    Ok(LogValue::from_ln(kk * shubin_exponent(l, lambda, k, m) * (kk / theta).ln()))
}

pub fn shubin_exponent(l: f64, lambda: f64, k: usize, m: usize) -> f64 {
    let (kf, mf) = (k as f64, m as f64);
    1.0 + l.powf(1.0 + kf / mf) + l * lambda.powf(0.5 / mf) + lambda.ln_1p()
}

/// The bound in terms of the profile parameters `σ = θ^{⟨x⟩^a}`,
/// `ρ = L⟨x⟩^δ`.
#[allow(clippy::too_many_arguments)]
pub fn bound_shubin_profile(
    theta: f64,
    a: f64,
    l: f64,
    delta: f64,
    lambda: f64,
    k: usize,
    m: usize,
    kk: f64,
) -> Result<LogValue> {
    check_bound_args(theta, l, lambda, kk)?;
    let (kf, mf) = (k as f64, m as f64);
    let z = 0.5 / kf + 0.5 / mf;
    let e = kk.powf(1.0 + a + delta)
        * (1.0 + lambda.powf(a / (2.0 * kf)))
        * (1.0
            + l.powf(1.0 + kf / mf) * lambda.powf(delta * z)
            + l * lambda.powf(delta / (2.0 * kf) + 0.5 / mf)
            + lambda.ln_1p());
    Ok(LogValue::from_ln(e * (kk / theta).ln()))
}

fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|i| (i as f64).ln()).sum()
}

/// `C_B(n, λ, δ)` in log form; `harmonic` selects the variant with explicit
/// constants valid for `k = m = 1`.
#[allow(clippy::too_many_arguments)]
pub fn bernstein_constant(
    n: usize,
    lambda: f64,
    delta: f64,
    k: usize,
    m: usize,
    d: usize,
    consts: &BoundConstants,
    harmonic: bool,
) -> Result<LogValue> {
    if !(delta > 0.0) || !(lambda >= 0.0) {
        return Err(Error::InvalidParameter("Bernstein constant needs δ > 0 and λ ≥ 0".into()));
    }
    let nf = n as f64;
    if harmonic {
        if k != 1 || m != 1 {
            return Err(Error::InvalidParameter("harmonic Bernstein variant needs k = m = 1".into()));
        }
        let ln = 2f64.ln()
            + 2.0 * nf * (2.0 * delta).ln()
            + 2.0 * ln_factorial(n)
            + std::f64::consts::E / (delta * delta)
            + 2.0 * lambda.sqrt() / delta;
        return Ok(LogValue::from_ln(ln));
    }
    let e = ExponentTriple::new(k, m);
    let (big, c) = (consts.bern_c_big, consts.bern_c);
    let dz = d as f64 * e.zeta;
    let ln = 2f64.ln()
        + 2.0 * (1.0 + nf) * big.ln()
        + 2.0 * nf * delta.ln()
        + 2.0 * ln_factorial(n)
        + (1.0 + lambda.powf(dz)).ln()
        + (c + d as f64) * delta.powf(-1.0 / e.nu)
        + c / delta * lambda.powf(0.5 / m as f64);
    Ok(LogValue::from_ln(ln))
}

/// `C' = max(2√2 C, (c+d)/2 (20dC)^{1/ν}, 10dcC)`.
pub fn c_prime(big: f64, c: f64, k: usize, m: usize, d: usize) -> f64 {
    let nu = ExponentTriple::new(k, m).nu;
    let df = d as f64;
    (2.0 * 2f64.sqrt() * big).max(0.5 * (c + df) * (20.0 * df * big).powf(1.0 / nu)).max(10.0 * df * c * big)
}

#[derive(Debug, Clone, Serialize)]
pub struct HSeries {
    pub value: LogValue,
    pub tail_ratio: f64,
    pub terms: usize,
    /// `C'(1+λ^{dζ})^{1/2} e^{C' l^{1/ν}} e^{C' l λ^{1/2m}}`
    pub majorant: LogValue,
}

/// `h(l, λ) = Σ_n √C_B(n, λ, δ) (10dl)^n / n!` at `δ = (20dlC)^{-1}`.
pub fn h_series(l: f64, lambda: f64, k: usize, m: usize, d: usize, consts: &BoundConstants) -> Result<HSeries> {
    let delta = 1.0 / (20.0 * d as f64 * l * consts.bern_c_big);
    h_series_at(l, lambda, delta, k, m, d, consts)
}

pub fn h_series_at(l: f64, lambda: f64, delta: f64, k: usize, m: usize, d: usize, consts: &BoundConstants) -> Result<HSeries> {
    if !(l > 0.0) {
        return Err(Error::InvalidParameter("h-series needs l > 0".into()));
    }
    let df = d as f64;
    let ln_term = |n: usize| -> Result<f64> {
        Ok(0.5 * bernstein_constant(n, lambda, delta, k, m, d, consts, false)?.ln + n as f64 * (10.0 * df * l).ln()
            - ln_factorial(n))
    };
    let t0 = ln_term(0)?;
    let t1 = ln_term(1)?;
    let tail_ratio = (t1 - t0).exp();
    if tail_ratio >= 1.0 {
        return Err(Error::InvalidParameter(format!("h-series diverges: term ratio {tail_ratio}")));
    }
    // logsumexp over terms until they no longer matter
    let mut acc = 0.0f64;
    let mut n = 0;
    loop {
        let t = ln_term(n)?;
        acc += (t - t0).exp();
        n += 1;
        if (t - t0).exp() < 1e-18 * acc || n > 100_000 {
            break;
        }
    }
    let e = ExponentTriple::new(k, m);
    let cp = consts.c_prime;
    let majorant =
        cp.ln() + 0.5 * (1.0 + lambda.powf(df * e.zeta)).ln() + cp * l.powf(1.0 / e.nu) + cp * l * lambda.powf(0.5 / m as f64);
    Ok(HSeries { value: LogValue::from_ln(t0 + acc.ln()), tail_ratio, terms: n, majorant: LogValue::from_ln(majorant) })
}

/// How an exact ratio was resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioMethod {
    Double,
    DoubleDouble,
    Trivial,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RatioReport {
    pub ratio: f64,
    pub ln_ratio: f64,
    pub min_gram_eigenvalue: f64,
    pub method: RatioMethod,
}

/// Coordinate rows of a subspace basis made of unit vectors.
fn coordinate_rows(sub: &SpectralSubspace) -> Option<Vec<usize>> {
    if !sub.is_coordinate() {
        return None;
    }
    let mut rows: Vec<usize> = sub.basis.column_iter().map(|c| c.iter().position(|v| *v == 1.0).unwrap_or(usize::MAX)).collect();
    rows.sort_unstable();
    Some(rows)
}

/// `sup_{f ∈ E_λ \ {0}} ‖f‖² / ‖f‖²_ω = 1/λ_min(G_ω)`.
pub fn exact_observability_ratio(sub: &SpectralSubspace, set: &SensorSet) -> Result<RatioReport> {
    if sub.dim() == 0 {
        return Err(Error::EmptySubspace);
    }
    let spec = &sub.quadrature;
    match &sub.kind {
        BasisKind::Hermite { scale } => {
            if matches!(set, SensorSet::Full { .. }) {
                return Ok(RatioReport { ratio: 1.0, ln_ratio: 0.0, min_gram_eigenvalue: 1.0, method: RatioMethod::Trivial });
            }
            let s = sample_matrix_1d(&sub.basis, *scale, set, spec)?;
            let min_sv = if s.nrows() < s.ncols() {
                0.0
            } else {
                let r = s.qr().r();
                r.singular_values().iter().copied().fold(f64::INFINITY, f64::min)
            };
            let g = min_sv * min_sv;
            if g > 1e-12 {
                return Ok(RatioReport {
                    ratio: 1.0 / g,
                    ln_ratio: -g.ln(),
                    min_gram_eigenvalue: g,
                    method: RatioMethod::Double,
                });
            }
            let rows = coordinate_rows(sub).filter(|r| r.iter().enumerate().all(|(i, &v)| i == v));
            let Some(rows) = rows else {
                return Err(Error::DegenerateGram { min_eig: g });
            };
            let r = rows.len();
            let w = spec.half_width.unwrap_or_else(|| precise::precise_half_width(r, *scale));
            let iv = set.intervals(-w, w)?;
            let (lo, hi) = precise::hermite_interval_singular_values(r, *scale, &iv, spec.nodes_per_cell, spec.cell_width)?;
            if !(lo > 1e-30 * hi.max(1e-300)) {
                return Err(Error::DegenerateGram { min_eig: lo * lo });
            }
            let g = lo * lo;
            Ok(RatioReport {
                ratio: 1.0 / g,
                ln_ratio: -2.0 * lo.ln(),
                min_gram_eigenvalue: g,
                method: RatioMethod::DoubleDouble,
            })
        }
        BasisKind::Product { .. } => {
            let gram = restricted_gram(&sub.basis, &sub.kind, set, spec)?;
            let g = SymmetricEigen::new(gram).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
            if !(g > 1e-13) {
                return Err(Error::DegenerateGram { min_eig: g });
            }
            Ok(RatioReport { ratio: 1.0 / g, ln_ratio: -g.ln(), min_gram_eigenvalue: g, method: RatioMethod::Double })
        }
    }
}

/// Ratio of `E_λ`, with `1` for the trivial subspace.
pub fn ratio_or_trivial(decomp: &EigenDecomposition, lambda: f64, set: &SensorSet) -> Result<(usize, RatioReport)> {
    let sub = spectral_projector(decomp, lambda)?;
    if sub.dim() == 0 {
        return Ok((0, RatioReport { ratio: 1.0, ln_ratio: 0.0, min_gram_eigenvalue: 1.0, method: RatioMethod::Trivial }));
    }
    Ok((sub.dim(), exact_observability_ratio(&sub, set)?))
}

/// `K` applied to a class: the harmonic constant for `k = m = 1`.
pub fn constant_for(k: usize, m: usize, consts: &BoundConstants) -> f64 {
    if k == 1 && m == 1 {
        consts.k_harm
    } else {
        consts.k_shubin
    }
}

/// Log of the bound used for verification.
pub fn log_bound_for(k: usize, m: usize, theta: f64, l: f64, lambda: f64, kk: f64) -> Result<LogValue> {
    if k == 1 && m == 1 {
        bound_harmonic(theta, l, lambda, kk)
    } else {
        bound_shubin(theta, l, lambda, k, m, kk)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Verification {
    pub reports: Vec<BoundReport>,
    /// Sampled density margin of the set under the profile.
    pub density_margin: Option<f64>,
    pub warnings: Vec<String>,
}

pub fn verify_spectral_inequality(
    model: &SpectralModel,
    profile: &DensityProfile,
    set: &SensorSet,
    lambda_grid: &[f64],
    consts: &BoundConstants,
) -> Result<Verification> {
    set.validate()?;
    profile.validate()?;
    if set.dim() != model.d {
        return Err(Error::InvalidParameter("set and model dimensions differ".into()));
    }
    let lmax = lambda_grid.iter().copied().fold(0.0, f64::max);
    let mut warnings = Vec::new();
    let r_max = (2.0 * lmax).powf(0.5 / model.k as f64) + 1.0;
    let density_margin = match check_density(set, profile, &SampleSpec { half_width: r_max, count: 256, include_critical: true })
    {
        Ok(rep) => {
            if rep.margin < 0.0 {
                warnings
                    .push(format!("density condition fails on the sample (margin {:.3e} at {:?})", rep.margin, rep.worst_point));
            }
            Some(rep.margin)
        }
        Err(e) => {
            warnings.push(format!("density check unavailable: {e}"));
            None
        }
    };
    let decomp = eigendecompose_up_to(model, lmax)?;
    let kk = constant_for(model.k, model.m, consts);
    let reports: Vec<Result<BoundReport>> = lambda_grid
        .par_iter()
        .map(|&lambda| {
            let (dim, ratio) = ratio_or_trivial(&decomp, lambda, set)?;
            let (theta, l) = geom_params(profile, lambda, model.k)?;
            let bound = log_bound_for(model.k, model.m, theta, l, lambda, kk)?;
            let holds = ratio.ln_ratio <= bound.ln + LOG_COMPARE_TOL;
            let verdict = match (holds, &consts.provenance) {
                (true, _) => Verdict::Holds,
                (false, Provenance::Default) => Verdict::CalibrationNeeded,
                (false, Provenance::Fitted { .. }) => Verdict::Violated,
            };
            Ok(BoundReport {
                lambda,
                k: model.k,
                m: model.m,
                d: model.d,
                theta,
                l,
                dim,
                theoretical_bound: bound,
                exact_ratio: ratio.ratio,
                log_ratio: ratio.ln_ratio,
                verdict,
                constant_used: kk,
                provenance: consts.provenance.clone(),
            })
        })
        .collect();
    Ok(Verification { reports: reports.into_iter().collect::<Result<Vec<_>>>()?, density_margin, warnings })
}

/// One calibration or validation case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatteryCase {
    pub id: String,
    pub model: SpectralModel,
    pub profile: DensityProfile,
    pub set: SensorSet,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Battery {
    pub id: String,
    pub cases: Vec<BatteryCase>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseEvaluation {
    pub id: String,
    pub k: usize,
    pub m: usize,
    pub d: usize,
    pub lambda: f64,
    pub theta: f64,
    pub l: f64,
    pub log_ratio: f64,
}

/// Exact ratios and geometric parameters of every case; decompositions are
/// shared between cases with the same model.
pub fn evaluate_battery(battery: &Battery) -> Result<Vec<CaseEvaluation>> {
    let mut by_model: Vec<(SpectralModel, f64)> = Vec::new();
    for c in &battery.cases {
        match by_model.iter_mut().find(|(m, _)| *m == c.model) {
            Some(entry) => entry.1 = entry.1.max(c.lambda),
            None => by_model.push((c.model.clone(), c.lambda)),
        }
    }
    let decomps: Vec<Result<EigenDecomposition>> = by_model.par_iter().map(|(m, l)| eigendecompose_up_to(m, *l)).collect();
    let decomps = decomps.into_iter().collect::<Result<Vec<_>>>()?;
    battery
        .cases
        .par_iter()
        .map(|c| {
            let i = by_model.iter().position(|(m, _)| *m == c.model).expect("model registered");
            let (_, ratio) = ratio_or_trivial(&decomps[i], c.lambda, &c.set)?;
            let (theta, l) = geom_params(&c.profile, c.lambda, c.model.k)?;
            Ok(CaseEvaluation {
                id: c.id.clone(),
                k: c.model.k,
                m: c.model.m,
                d: c.model.d,
                lambda: c.lambda,
                theta,
                l,
                log_ratio: ratio.ln_ratio,
            })
        })
        .collect()
}

/// Smallest `K ≥ 1` (to 1 %) with `bound(K) ≥ ratio` for all cases.
pub fn minimal_constant<F: Fn(f64) -> Result<bool>>(holds_all: F) -> Result<f64> {
    if holds_all(1.0)? {
        return Ok(1.0);
    }
    let mut hi = 2.0;
    while !holds_all(hi)? {
        hi *= 2.0;
        if hi > 1e8 {
            return Err(Error::InvalidParameter("no finite constant makes the bound hold on the battery".into()));
        }
    }
    let mut lo = hi / 2.0;
    while hi / lo > 1.01 {
        let mid = (lo * hi).sqrt();
        if holds_all(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Constants per `(k, m, d)` class.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CalibrationTable {
    pub battery_id: String,
    pub classes: BTreeMap<String, BoundConstants>,
}

pub fn class_key(k: usize, m: usize, d: usize) -> String {
    format!("k{k}_m{m}_d{d}")
}

impl CalibrationTable {
    pub fn get(&self, k: usize, m: usize, d: usize) -> Option<&BoundConstants> {
        self.classes.get(&class_key(k, m, d))
    }
}

pub fn calibrate_constants(battery: &Battery) -> Result<CalibrationTable> {
    if battery.cases.is_empty() {
        return Err(Error::InvalidParameter("calibration battery is empty".into()));
    }
    let evals = evaluate_battery(battery)?;
    calibrate_from_evaluations(&battery.id, &evals)
}

pub fn calibrate_from_evaluations(battery_id: &str, evals: &[CaseEvaluation]) -> Result<CalibrationTable> {
    let mut classes = BTreeMap::new();
    let mut keys: Vec<(usize, usize, usize)> = evals.iter().map(|e| (e.k, e.m, e.d)).collect();
    keys.sort_unstable();
    keys.dedup();
    for (k, m, d) in keys {
        let cases: Vec<&CaseEvaluation> = evals.iter().filter(|e| (e.k, e.m, e.d) == (k, m, d)).collect();
        let shubin = minimal_constant(|kk| {
            for c in &cases {
                if c.log_ratio > bound_shubin(c.theta, c.l, c.lambda, k, m, kk)?.ln + LOG_COMPARE_TOL {
                    return Ok(false);
                }
            }
            Ok(true)
        })?;
        let harm = if k == 1 && m == 1 {
            minimal_constant(|kk| {
                for c in &cases {
                    if c.log_ratio > bound_harmonic(c.theta, c.l, c.lambda, kk)?.ln + LOG_COMPARE_TOL {
                        return Ok(false);
                    }
                }
                Ok(true)
            })?
        } else {
            shubin
        };
        let mut consts = BoundConstants::default_for(k, m, d);
        consts.k_harm = harm;
        consts.k_shubin = shubin;
        consts.provenance = Provenance::Fitted { battery_id: battery_id.to_string() };
        classes.insert(class_key(k, m, d), consts);
    }
    Ok(CalibrationTable { battery_id: battery_id.to_string(), classes })
}

/// `sup_{f ∈ E_λ} ‖f^{(n)}‖² / ‖f‖²` (`d = 1`), the largest eigenvalue of
/// the Gram matrix of the `n`-th derivatives of the subspace basis.
pub fn derivative_sup(sub: &SpectralSubspace, n: usize) -> Result<f64> {
    let BasisKind::Hermite { scale } = sub.kind else {
        return Err(Error::Unsupported("derivative suprema need d = 1".into()));
    };
    if sub.dim() == 0 {
        return Ok(0.0);
    }
    let cols: Vec<Vec<f64>> = sub
        .basis
        .column_iter()
        .map(|c| {
            let mut v = c.iter().copied().collect::<Vec<_>>();
            for _ in 0..n {
                v = hermite::differentiate(&v);
                v.iter_mut().for_each(|x| *x *= scale);
            }
            v
        })
        .collect();
    let r = cols.len();
    let g = DMatrix::from_fn(r, r, |i, j| cols[i].iter().zip(&cols[j]).map(|(a, b)| a * b).sum::<f64>());
    Ok(SymmetricEigen::new(g).eigenvalues.iter().copied().fold(0.0, f64::max))
}

#[derive(Debug, Clone, Serialize)]
pub struct BernsteinFit {
    pub bern_c_big: f64,
    pub bern_c: f64,
    pub c_prime: f64,
    /// `(n, λ, δ)` realising the fitted `C`.
    pub binding: (usize, f64, f64),
}

/// Minimal `C` (closed form, `c` fixed) such that the exact derivative
/// suprema respect `C_B/2` over the `(n, λ, δ)` grid.
pub fn calibrate_bernstein(
    decomp: &EigenDecomposition,
    lambdas: &[f64],
    n_max: usize,
    deltas: &[f64],
    c: f64,
) -> Result<BernsteinFit> {
    let (k, m, d) = (decomp.k, decomp.m, decomp.d);
    let unit = BoundConstants { bern_c_big: 1.0, bern_c: c, ..BoundConstants::default_for(k, m, d) };
    let mut best = (f64::NEG_INFINITY, (0, 0.0, 0.0));
    for &lambda in lambdas {
        let sub = spectral_projector(decomp, lambda)?;
        if sub.dim() == 0 {
            continue;
        }
        for n in 0..=n_max {
            let sup = derivative_sup(&sub, n)?;
            for &delta in deltas {
                // C_B/2 with C = 1, then solve sup ≤ C^{2(1+n)} · that
                let base = bernstein_constant(n, lambda, delta, k, m, d, &unit, false)?.ln - 2f64.ln();
                let need = (sup.ln() - base) / (2.0 * (1.0 + n as f64));
                if need > best.0 {
                    best = (need, (n, lambda, delta));
                }
            }
        }
    }
    let big = best.0.exp().max(f64::MIN_POSITIVE);
    Ok(BernsteinFit { bern_c_big: big * (1.0 + 1e-9), bern_c: c, c_prime: c_prime(big, c, k, m, d), binding: best.1 })
}

#[derive(Debug, Clone, Serialize)]
pub struct AgmonPoint {
    pub lambda: f64,
    /// `max_f log ‖e^{c₁t⟨x⟩^{1/ν}}f‖²` over sampled unit `f ∈ E_λ`.
    pub log_weighted: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AgmonFit {
    pub points: Vec<AgmonPoint>,
    /// `ln c₂`, `q` and `c₃` in `log W ≈ ln c₂ + q log λ + c₃ t λ^{p}`;
    /// the bound has `q = dζ`, measured prefactors come out smaller
    pub ln_c2: f64,
    pub prefactor_power: f64,
    pub c3: f64,
    /// Fitted growth exponent `p`.
    pub exponent: f64,
}

/// Weighted norms of sampled members of `E_λ` over a `λ`-grid and a fit of
/// their growth.
pub fn agmon_fit(decomp: &EigenDecomposition, lambdas: &[f64], c1: f64, t: f64, samples: usize, seed: u64) -> Result<AgmonFit> {
    let e = ExponentTriple::new(decomp.k, decomp.m);
    let w = WeightExponent { c1, t, power: 1.0 / e.nu };
    let mut points = Vec::new();
    for (i, &lambda) in lambdas.iter().enumerate() {
        let sub = spectral_projector(decomp, lambda)?;
        if sub.dim() == 0 {
            continue;
        }
        let vals: Vec<Result<f64>> = (0..samples)
            .into_par_iter()
            .map(|s| {
                let f = sample_subspace_function(&sub, seed.wrapping_add((i * samples + s) as u64))?;
                Ok(weighted_norm_sq(&f, w)?.ln())
            })
            .collect();
        let mut best = f64::NEG_INFINITY;
        for v in vals {
            best = best.max(v?);
        }
        // the eigenfunctions themselves belong to E_λ and carry the heaviest
        // tails, which steadies the maximum against sampling noise
        for j in 0..sub.dim() {
            let mut c = vec![0.0; sub.dim()];
            c[j] = 1.0;
            best = best.max(weighted_norm_sq(&FunctionRep::from_subspace(&sub, c, None)?, w)?.ln());
        }
        points.push(AgmonPoint { lambda, log_weighted: best });
    }
    if points.len() < 3 {
        return Err(Error::InvalidParameter("Agmon fit needs three nonempty thresholds".into()));
    }
    // least squares in (ln c₂, q, c₃) for each p on a grid
    let ys = DVector::from_iterator(points.len(), points.iter().map(|p| p.log_weighted));
    let mut best = (f64::INFINITY, 0.0, 0.0, 0.0, 0.0);
    for i in 10..=600 {
        let p = i as f64 * 0.005;
        let a = DMatrix::from_fn(points.len(), 3, |r, c| match c {
            0 => 1.0,
            1 => points[r].lambda.ln(),
            _ => t * points[r].lambda.powf(p),
        });
        let Ok(sol) = a.clone().svd(true, true).solve(&ys, 1e-12) else {
            continue;
        };
        if sol[2] < 0.0 {
            continue;
        }
        let res = (&a * &sol - &ys).norm_squared();
        if res < best.0 {
            best = (res, p, sol[0], sol[1], sol[2]);
        }
    }
    let (_, p, ln_c2, prefactor_power, c3) = best;
    Ok(AgmonFit { points, ln_c2, prefactor_power, c3, exponent: p })
}

#[derive(Debug, Clone, Serialize)]
pub struct LogRefinedReport {
    pub lambda: f64,
    /// `sup_{|x| < √(2λ)} ρ(x)`
    pub l_lambda: f64,
    /// `L√λ / ((log log λ)^α log λ)`
    pub reference: f64,
    /// `log` of `c e^{cλ/((log log λ)^α log λ)}`
    pub log_bound: f64,
    pub hypothesis_alpha_gt_2: bool,
}

pub fn log_refined_bound(l: f64, alpha: f64, lambda: f64, c: f64) -> Result<LogRefinedReport> {
    if !(lambda > std::f64::consts::E) {
        return Err(Error::InvalidParameter(format!("λ must exceed e, got {lambda}")));
    }
    if !(l > 0.0) || !(c > 0.0) {
        return Err(Error::InvalidParameter("L and c must be positive".into()));
    }
    let rho = crate::geometry::RhoProfile::LogRefined { l, alpha };
    let l_lambda = rho.sup_on_ball((2.0 * lambda).sqrt())?;
    let den = lambda.ln().ln().powf(alpha) * lambda.ln();
    Ok(LogRefinedReport {
        lambda,
        l_lambda,
        reference: l * lambda.sqrt() / den,
        log_bound: c.ln() + c * lambda / den,
        hypothesis_alpha_gt_2: alpha > 2.0,
    })
}
