//! Null-controllability tools: the observability constant, fractional
//! spectral subspaces, regime classification, minimal-time calculators,
//! non-observability witnesses, the Gaussian necessity probe, HUM control
//! synthesis and the Baouendi–Grushin mode reduction.

pub mod grushin;
pub mod hum;

pub use grushin::{grushin_mode_spectrum, scaling_defect, GrushinParams, ModeSpectrum, ScalingDefect};
pub use hum::{hum_control, leading_subspace, ControlRun};

use crate::error::{Error, Result};
use crate::geometry::{DensityProfile, RhoProfile, SensorSet, SigmaProfile};
use crate::logval::LogValue;
use crate::quadrature::{composite, intersect_intervals, GaussLegendre};
use crate::spectral_core::{spectral_projector, EigenDecomposition, SpectralSubspace};
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

/// Inputs of the observability constant
/// `c₁d₀(2d₀+1)^{c₂} exp(c₃(d₁/T^η)^{1/(1−η)})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservabilityInput {
    pub d0: f64,
    pub d1: f64,
    pub eta: f64,
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(default = "one")]
    pub c1: f64,
    #[serde(default = "one")]
    pub c2: f64,
    #[serde(default = "one")]
    pub c3: f64,
}

fn one() -> f64 {
    1.0
}

impl ObservabilityInput {
    pub fn validate(&self) -> Result<()> {
        if !(self.d0 > 0.0) || !(self.d1 >= 0.0) || !(self.t > 0.0) {
            return Err(Error::InvalidParameter("need d0 > 0, d1 ≥ 0, T > 0".into()));
        }
        if !(self.eta > 0.0 && self.eta < 1.0) {
            return Err(Error::InvalidParameter("eta must lie strictly inside (0, 1)".into()));
        }
        if !(self.c1 > 0.0 && self.c2 > 0.0 && self.c3 > 0.0) {
            return Err(Error::InvalidParameter("c1, c2, c3 must be positive".into()));
        }
        Ok(())
    }
}

pub fn observability_constant(inp: &ObservabilityInput) -> Result<LogValue> {
    inp.validate()?;
    let ln = inp.c1.ln()
        + inp.d0.ln()
        + inp.c2 * (2.0 * inp.d0 + 1.0).ln()
        + inp.c3 * (inp.d1 / inp.t.powf(inp.eta)).powf(1.0 / (1.0 - inp.eta));
    Ok(LogValue::from_ln(ln))
}

/// `1_{(−∞,λ]}(H^s) = 1_{(−∞,λ^{1/s}]}(H)`.
pub fn fractional_subspace(decomp: &EigenDecomposition, s: f64, lambda: f64) -> Result<SpectralSubspace> {
    if !(s > 0.0) {
        return Err(Error::InvalidParameter("fractional power must be positive".into()));
    }
    spectral_projector(decomp, lambda.max(0.0).powf(1.0 / s))
}

/// Exact rational from a decimal or `p/q` string.
pub fn parse_rational(text: &str) -> Result<Ratio<i64>> {
    let bad = || Error::InvalidParameter(format!("not a rational number: {text:?}"));
    let t = text.trim();
    if let Some((p, q)) = t.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| bad())?;
        let q: i64 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(bad());
        }
        return Ok(Ratio::new(p, q));
    }
    let (neg, body) = match t.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, t),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() || frac.len() > 15 || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    let num: i64 = digits.parse().map_err(|_| bad())?;
    let r = Ratio::new(num, 10i64.pow(frac.len() as u32));
    Ok(if neg { -r } else { r })
}

/// Rational nearest to a float, for parameters supplied as reals.
pub fn rational_of(x: f64) -> Result<Ratio<i64>> {
    Ratio::approximate_float(x).ok_or_else(|| Error::InvalidParameter(format!("{x} has no rational approximation")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    Strong,
    Critical,
    Weak,
}

/// Position of `s` against the critical exponent `(1+γ)/2`.
pub fn regime_classify(gamma: u32, s: Ratio<i64>) -> Result<Regime> {
    if gamma == 0 {
        return Err(Error::InvalidParameter("gamma must be a positive integer".into()));
    }
    let crit = Ratio::new(1 + gamma as i64, 2);
    Ok(match s.cmp(&crit) {
        std::cmp::Ordering::Greater => Regime::Strong,
        std::cmp::Ordering::Equal => Regime::Critical,
        std::cmp::Ordering::Less => Regime::Weak,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShubinVerdict {
    ControllableAllT,
    OutsideTheory,
}

#[derive(Debug, Clone, Serialize)]
pub struct ShubinRegime {
    pub verdict: ShubinVerdict,
    /// Which hypothesis decided the verdict.
    pub criterion: String,
}

/// Controllability of `∂_t f + H^s_{k,m} f = h1_ω` from a `(ρ, σ)`-dense
/// set with profiles in the power or log-refined families.
pub fn shubin_regime(k: usize, m: usize, s: Ratio<i64>, profile: &DensityProfile) -> Result<ShubinRegime> {
    if k == 0 || m == 0 || s <= Ratio::from_integer(0) {
        return Err(Error::InvalidParameter("need k, m ≥ 1 and s > 0".into()));
    }
    let outside = |why: &str| ShubinRegime { verdict: ShubinVerdict::OutsideTheory, criterion: why.into() };
    let a = match &profile.sigma {
        SigmaProfile::Constant { .. } => Ratio::from_integer(0),
        SigmaProfile::PowerExp { a, .. } => rational_of(*a)?,
        SigmaProfile::Radial { .. } => return Ok(outside("sigma is not in the power family")),
    };
    let delta = match &profile.rho {
        RhoProfile::Constant { .. } => Ratio::from_integer(0),
        RhoProfile::Power { delta, .. } => rational_of(*delta)?,
        RhoProfile::LogRefined { alpha, .. } => {
            let sigma_const = matches!(profile.sigma, SigmaProfile::Constant { .. });
            let one = Ratio::from_integer(1);
            if k == 1 && m == 1 && s == one && sigma_const && *alpha > 2.0 {
                return Ok(ShubinRegime {
                    verdict: ShubinVerdict::ControllableAllT,
                    criterion: "log-refined scale with alpha > 2, constant sigma, k = m = s = 1".into(),
                });
            }
            return Ok(outside("log-refined scale needs alpha > 2, constant sigma and k = m = s = 1"));
        }
        RhoProfile::Radial { .. } => return Ok(outside("rho is not in the power family")),
    };
    let zero = Ratio::from_integer(0);
    if delta < zero || delta > Ratio::from_integer(1) || a < zero {
        return Ok(outside("power profile needs delta in [0, 1] and a ≥ 0"));
    }
    let lhs = (delta + a) / Ratio::from_integer(2 * k as i64) + Ratio::new(1, 2 * m as i64);
    if lhs < s {
        Ok(ShubinRegime {
            verdict: ShubinVerdict::ControllableAllT,
            criterion: format!("(delta + a)/(2k) + 1/(2m) = {lhs} < s = {s}"),
        })
    } else {
        Ok(outside(&format!("(delta + a)/(2k) + 1/(2m) = {lhs} is not below s = {s}")))
    }
}

/// `T_* = (1/(1+γ))(dist/√λ_γ)^{1+γ}`.
pub fn minimal_time_lower(gamma: u32, lambda_gamma: f64, dist: f64) -> Result<f64> {
    if !(dist > 0.0) || !(lambda_gamma > 0.0) || gamma == 0 {
        return Err(Error::InvalidParameter("need dist > 0, λ_γ > 0, γ ≥ 1".into()));
    }
    let g = gamma as f64;
    Ok((dist / lambda_gamma.sqrt()).powf(1.0 + g) / (1.0 + g))
}

/// `T^* = c_γ(L/√λ_γ)^{1+γ} log(c_γ/θ)`, reported as computed even when the
/// logarithm is not positive.
pub fn minimal_time_upper(gamma: u32, lambda_gamma: f64, theta: f64, l: f64, c_gamma: f64) -> Result<f64> {
    if !(theta > 0.0 && theta <= 1.0) || !(l > 0.0) || !(c_gamma > 0.0) || !(lambda_gamma > 0.0) || gamma == 0 {
        return Err(Error::InvalidParameter("need θ ∈ (0,1], L > 0, c_γ > 0, λ_γ > 0, γ ≥ 1".into()));
    }
    Ok(c_gamma * (l / lambda_gamma.sqrt()).powf(1.0 + gamma as f64) * (c_gamma / theta).ln())
}

#[derive(Debug, Clone, Serialize)]
pub struct TimeBracket {
    pub lower: f64,
    pub upper: f64,
    /// `1 − L^d/(L+ε)^d`, the thickness at scale `L+ε`.
    pub theta_eps: f64,
    pub consistent: bool,
}

/// Bracket of the minimal time for the complement of `B(0, L)` in `ℝ^d`.
pub fn ball_complement_bracket(gamma: u32, d: usize, lambda_gamma: f64, l: f64, eps: f64, c_gamma: f64) -> Result<TimeBracket> {
    if !(eps > 0.0) || d == 0 {
        return Err(Error::InvalidParameter("need ε > 0 and d ≥ 1".into()));
    }
    let lower = minimal_time_lower(gamma, lambda_gamma, l)?;
    let le = l + eps;
    let theta_eps = 1.0 - (l / le).powi(d as i32);
    let upper = minimal_time_upper(gamma, lambda_gamma, theta_eps, le, c_gamma)?;
    Ok(TimeBracket { lower, upper, theta_eps, consistent: lower <= upper })
}

#[derive(Debug, Clone, Serialize)]
pub struct WitnessReport {
    pub exponents: Vec<(usize, f64)>,
    /// `−2ε|n|L^{1+γ}/(1+γ)`, the Schrödinger variant.
    pub schrodinger: Vec<(usize, f64)>,
    /// First `n₀` after which `E` is strictly decreasing to the end of the grid.
    pub decreasing_from: Option<usize>,
    /// First `n₀` after which `E` is strictly increasing to the end of the grid.
    pub increasing_from: Option<usize>,
    pub contradiction: bool,
    /// `(ε/(1+γ))(L/√λ_γ)^{1+γ}` at the critical exponent.
    pub critical_threshold: f64,
}

/// `E(n) = 2n^{2s/(1+γ)}λ_γ^s T − 2εnL^{1+γ}/(1+γ)`, `n = 1..n_max`.
pub fn nonobservability_witness(
    gamma: u32,
    s: f64,
    lambda_gamma: f64,
    l_dist: f64,
    t: f64,
    eps: f64,
    n_max: usize,
) -> Result<WitnessReport> {
    if !(eps > 0.0 && eps < 1.0) || !(l_dist > 0.0) || !(t > 0.0) || !(s > 0.0) || n_max < 3 || gamma == 0 {
        return Err(Error::InvalidParameter("need ε ∈ (0,1), L > 0, T > 0, s > 0, n_max ≥ 3".into()));
    }
    let g = gamma as f64;
    let decay = 2.0 * eps * l_dist.powf(1.0 + g) / (1.0 + g);
    let exponents: Vec<(usize, f64)> = (1..=n_max)
        .map(|n| {
            let nf = n as f64;
            (n, 2.0 * nf.powf(2.0 * s / (1.0 + g)) * lambda_gamma.powf(s) * t - decay * nf)
        })
        .collect();
    let schrodinger = (1..=n_max).map(|n| (n, -decay * n as f64)).collect();
    let tail_from = |pred: &dyn Fn(f64, f64) -> bool| -> Option<usize> {
        let mut start = None;
        for w in exponents.windows(2).rev() {
            if pred(w[0].1, w[1].1) {
                start = Some(w[0].0);
            } else {
                break;
            }
        }
        start
    };
    let decreasing_from = tail_from(&|a, b| b < a);
    let increasing_from = tail_from(&|a, b| b > a);
    let last = exponents.last().map_or(0.0, |e| e.1);
    Ok(WitnessReport {
        contradiction: decreasing_from.is_some() && last < 0.0,
        decreasing_from,
        increasing_from,
        critical_threshold: eps / (1.0 + g) * (l_dist / lambda_gamma.sqrt()).powf(1.0 + g),
        exponents,
        schrodinger,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbePoint {
    pub x0: f64,
    pub total_mass: f64,
    /// Mass of the evolved profile on `ω ∩ B(x₀, L)`.
    pub captured: f64,
    /// Smallest radius whose window captures half the mass, if any.
    pub half_mass_radius: Option<f64>,
}

/// Frequency cutoff and node count for the inverse transform.
const PROBE_XI_MAX: f64 = 10.0;

/// Translated Gaussians evolved by `e^{−t|ξ|^{2s}}` on the line, observed on
/// the slice `ω` (`d = 1`).
pub fn gaussian_necessity_probe(
    set: &SensorSet,
    s: f64,
    t: f64,
    l: f64,
    x0_grid: &[f64],
    box_half_width: f64,
) -> Result<Vec<ProbePoint>> {
    if set.dim() != 1 {
        return Err(Error::Unsupported("the necessity probe works on one-dimensional slices".into()));
    }
    if !(s > 0.0) || !(t >= 0.0) || !(l > 0.0) || !(box_half_width > 0.0) {
        return Err(Error::InvalidParameter("need s > 0, t ≥ 0, L > 0".into()));
    }
    let rule = GaussLegendre::new(32);
    let xi_nodes = composite(&[(0.0, PROBE_XI_MAX)], 0.25, &rule);
    let symbol: Vec<(f64, f64)> =
        xi_nodes.iter().map(|&(xi, w)| (xi, w * (-0.5 * xi * xi - t * xi.powf(2.0 * s)).exp())).collect();
    // u(x₀ + y) = (1/π)∫₀^∞ cos(ξy) e^{−ξ²/2 − tξ^{2s}} dξ, even in y
    let profile = |y: f64| symbol.iter().map(|&(xi, w)| w * (xi * y).cos()).sum::<f64>() / std::f64::consts::PI;
    // Plancherel: ‖u‖² = (1/π)∫₀^∞ e^{−ξ² − 2tξ^{2s}} dξ
    let total: f64 =
        xi_nodes.iter().map(|&(xi, w)| w * (-xi * xi - 2.0 * t * xi.powf(2.0 * s)).exp()).sum::<f64>() / std::f64::consts::PI;
    let y_nodes = composite(&[(-box_half_width, box_half_width)], 0.05, &rule);
    let values: Vec<(f64, f64, f64)> = y_nodes.iter().map(|&(y, w)| (y, w, profile(y).powi(2))).collect();
    let in_box: f64 = values.iter().map(|v| v.1 * v.2).sum();
    if in_box < total * (1.0 - 1e-6) {
        return Err(Error::Quadrature(format!(
            "box half-width {box_half_width} holds only {:.3e} of the mass; enlarge it",
            in_box / total
        )));
    }
    x0_grid
        .iter()
        .map(|&x0| {
            let window = |radius: f64| -> Result<f64> {
                let iv = set.intervals(x0 - radius, x0 + radius)?;
                let sel = intersect_intervals(&iv, &[(x0 - box_half_width, x0 + box_half_width)]);
                let nodes = composite(&sel, 0.05, &rule);
                // + 0.0 turns the empty sum's -0.0 into 0.0
                Ok(nodes.iter().map(|&(x, w)| w * profile(x - x0).powi(2)).sum::<f64>() + 0.0)
            };
            let captured = window(l)?;
            let half_mass_radius = if window(box_half_width)? < 0.5 * total {
                None
            } else {
                let (mut lo, mut hi) = (0.0, box_half_width);
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if window(mid)? >= 0.5 * total {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                Some(hi)
            };
            Ok(ProbePoint { x0, total_mass: total, captured, half_mass_radius })
        })
        .collect()
}
