//! Radial profile families for the local scale `ρ` and the density `σ`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// `⟨t⟩ = (1 + t²)^{1/2}`.
pub fn japanese(t: f64) -> f64 {
    (1.0 + t * t).sqrt()
}

/// A function of the radius `t = |x| ≥ 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum RadialFn {
    Constant {
        value: f64,
    },
    /// `coef · ⟨t⟩^exponent`
    Power {
        coef: f64,
        exponent: f64,
    },
    /// `intercept + slope · t`
    Affine {
        intercept: f64,
        slope: f64,
    },
    /// Piecewise linear through `(t, value)` pairs with ascending `t`.
    Tabulated {
        points: Vec<[f64; 2]>,
    },
}

impl RadialFn {
    pub fn eval(&self, t: f64) -> Result<f64> {
        Ok(match self {
            RadialFn::Constant { value } => *value,
            RadialFn::Power { coef, exponent } => coef * japanese(t).powf(*exponent),
            RadialFn::Affine { intercept, slope } => intercept + slope * t,
            RadialFn::Tabulated { points } => {
                let (first, last) = match (points.first(), points.last()) {
                    (Some(f), Some(l)) => (f, l),
                    _ => return Err(Error::TableRange("an empty table".into())),
                };
                if t < first[0] - 1e-12 || t > last[0] + 1e-12 {
                    return Err(Error::TableRange(format!("radius {t} (table spans [{}, {}])", first[0], last[0])));
                }
                let i = points.partition_point(|p| p[0] <= t).clamp(1, points.len().max(2) - 1);
                if points.len() == 1 {
                    return Ok(first[1]);
                }
                let ([t0, v0], [t1, v1]) = (points[i - 1], points[i]);
                v0 + (v1 - v0) * ((t - t0) / (t1 - t0)).clamp(0.0, 1.0)
            }
        })
    }

    /// Upper end of the tabulated range, if any.
    pub fn table_limit(&self) -> Option<f64> {
        match self {
            RadialFn::Tabulated { points } => points.last().map(|p| p[0]),
            _ => None,
        }
    }
}

/// Local scale `ρ(x)`, depending on `|x|` only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum RhoProfile {
    Constant {
        l: f64,
    },
    /// `L⟨x⟩^δ`
    Power {
        l: f64,
        delta: f64,
    },
    /// `L⟨x⟩ / ((g∘g)^α(|x|) g(|x|))` with `g(r) = log(e + r)`
    LogRefined {
        l: f64,
        alpha: f64,
    },
    Radial {
        f: RadialFn,
    },
}

/// Density `σ(x) ∈ (0, 1]`, depending on `|x|` only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SigmaProfile {
    Constant {
        theta: f64,
    },
    /// `θ^{⟨x⟩^a}`
    PowerExp {
        theta: f64,
        a: f64,
    },
    Radial {
        f: RadialFn,
    },
}

pub fn log_refined(l: f64, alpha: f64, r: f64) -> f64 {
    let g = |s: f64| (std::f64::consts::E + s).ln();
    l * japanese(r) / (g(g(r)).powf(alpha) * g(r))
}

impl RhoProfile {
    pub fn eval(&self, r: f64) -> Result<f64> {
        Ok(match self {
            RhoProfile::Constant { l } => *l,
            RhoProfile::Power { l, delta } => l * japanese(r).powf(*delta),
            RhoProfile::LogRefined { l, alpha } => log_refined(*l, *alpha, r),
            RhoProfile::Radial { f } => f.eval(r)?,
        })
    }

    /// `sup_{|x| < r} ρ(x)`.
    pub fn sup_on_ball(&self, r: f64) -> Result<f64> {
        match self {
            RhoProfile::Constant { l } => Ok(*l),
            RhoProfile::Power { l, delta } => Ok(if *delta >= 0.0 { l * japanese(r).powf(*delta) } else { *l }),
            _ => extremum(|t| self.eval(t), r, true),
        }
    }

    /// `inf_{|x| < r} ρ(x)`.
    pub fn inf_on_ball(&self, r: f64) -> Result<f64> {
        match self {
            RhoProfile::Constant { l } => Ok(*l),
            RhoProfile::Power { l, delta } => Ok(if *delta >= 0.0 { *l } else { l * japanese(r).powf(*delta) }),
            _ => extremum(|t| self.eval(t), r, false),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            RhoProfile::Constant { l } | RhoProfile::Power { l, .. } | RhoProfile::LogRefined { l, .. } => *l > 0.0,
            RhoProfile::Radial { .. } => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter("rho scale L must be positive".into()))
        }
    }
}

impl SigmaProfile {
    pub fn eval(&self, r: f64) -> Result<f64> {
        Ok(match self {
            SigmaProfile::Constant { theta } => *theta,
            SigmaProfile::PowerExp { theta, a } => theta.powf(japanese(r).powf(*a)),
            SigmaProfile::Radial { f } => f.eval(r)?,
        })
    }

    /// `inf_{|x| < r} σ(x)`.
    pub fn inf_on_ball(&self, r: f64) -> Result<f64> {
        match self {
            SigmaProfile::Constant { theta } => Ok(*theta),
            SigmaProfile::PowerExp { theta, a } => {
                let t = if *a >= 0.0 { japanese(r) } else { 1.0 };
                Ok(theta.powf(t.powf(*a)))
            }
            SigmaProfile::Radial { f } => extremum(|t| f.eval(t), r, false),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            SigmaProfile::Constant { theta } | SigmaProfile::PowerExp { theta, .. } => *theta > 0.0 && *theta <= 1.0,
            SigmaProfile::Radial { .. } => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter("sigma parameter theta must lie in (0, 1]".into()))
        }
    }
}

/// The pair `(ρ, σ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityProfile {
    pub rho: RhoProfile,
    pub sigma: SigmaProfile,
}

impl DensityProfile {
    pub fn constant(theta: f64, l: f64) -> Self {
        Self { rho: RhoProfile::Constant { l }, sigma: SigmaProfile::Constant { theta } }
    }

    pub fn validate(&self) -> Result<()> {
        self.rho.validate()?;
        self.sigma.validate()
    }
}

/// Extremum of a radial function on `[0, r]` by a uniform scan followed by
/// golden-section refinement around the best grid point.
fn extremum<F: Fn(f64) -> Result<f64>>(f: F, r: f64, maximize: bool) -> Result<f64> {
    let sign = if maximize { 1.0 } else { -1.0 };
    let n = 2000;
    let mut best_t = 0.0;
    let mut best = sign * f(0.0)?;
    for i in 1..=n {
        let t = r * i as f64 / n as f64;
        let v = sign * f(t)?;
        if v > best {
            best = v;
            best_t = t;
        }
    }
    let step = r / n as f64;
    let (mut a, mut b) = ((best_t - step).max(0.0), (best_t + step).min(r));
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        if b - a < 1e-15 * (1.0 + r) {
            break;
        }
        let c = b - phi * (b - a);
        let d = a + phi * (b - a);
        if sign * f(c)? >= sign * f(d)? {
            b = d;
        } else {
            a = c;
        }
    }
    let refined = sign * f(0.5 * (a + b))?;
    Ok(sign * best.max(refined))
}

/// `(θ_{λ,k}, L_{λ,k})`: infimum of `σ` and supremum of `ρ` over the ball of
/// radius `(2λ)^{1/2k}`.
pub fn geom_params(profile: &DensityProfile, lambda: f64, k: usize) -> Result<(f64, f64)> {
    if !(lambda >= 0.0) {
        return Err(Error::InvalidParameter(format!("lambda must be nonnegative, got {lambda}")));
    }
    let r = (2.0 * lambda).powf(1.0 / (2.0 * k as f64));
    Ok((profile.sigma.inf_on_ball(r)?, profile.rho.sup_on_ball(r)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tabulated_interpolates_and_rejects_out_of_range() {
        let f = RadialFn::Tabulated { points: vec![[0.0, 1.0], [2.0, 3.0]] };
        assert!((f.eval(1.0).unwrap() - 2.0).abs() < 1e-15);
        assert!(matches!(f.eval(2.5), Err(Error::TableRange(_))));
    }

    #[test]
    fn power_profiles_match_closed_forms() {
        let p = DensityProfile {
            rho: RhoProfile::Power { l: 1.5, delta: 0.5 },
            sigma: SigmaProfile::PowerExp { theta: 0.3, a: 1.0 },
        };
        for (lambda, k) in [(1.0, 1usize), (7.5, 2), (40.0, 3)] {
            let (th, l) = geom_params(&p, lambda, k).unwrap();
            let s = 1.0 + (2.0f64 * lambda).powf(1.0 / k as f64);
            assert!((th / 0.3f64.powf(s.powf(0.5)) - 1.0).abs() < 1e-14);
            assert!((l - 1.5 * s.powf(0.25)).abs() < 1e-14);
        }
    }

    #[test]
    fn scanned_sup_agrees_with_monotone_closed_form() {
        let radial = RhoProfile::Radial { f: RadialFn::Power { coef: 1.5, exponent: 0.5 } };
        let closed = RhoProfile::Power { l: 1.5, delta: 0.5 };
        let a = radial.sup_on_ball(3.0).unwrap();
        let b = closed.sup_on_ball(3.0).unwrap();
        assert!((a - b).abs() < 1e-13);
    }
}
