//! Sampled verification of the variable-density condition
//! `|ω ∩ B(x, ρ(x))| ≥ σ(x)|B(x, ρ(x))|` and of thickness.

use super::profile::{DensityProfile, RhoProfile, SigmaProfile};
use super::set::{ball_volume, SensorSet};
use crate::error::{Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Sample points: a Halton sequence in `[-half_width, half_width]^d`,
/// optionally augmented with descriptor-specific critical points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSpec {
    pub half_width: f64,
    pub count: usize,
    #[serde(default = "yes")]
    pub include_critical: bool,
}

fn yes() -> bool {
    true
}

impl Default for SampleSpec {
    fn default() -> Self {
        Self { half_width: 10.0, count: 1000, include_critical: true }
    }
}

const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// First `count` Halton points (skipping the origin) mapped to the box.
pub fn halton(d: usize, count: usize, half_width: f64) -> Vec<Vec<f64>> {
    (1..=count as u64)
        .map(|i| (0..d).map(|a| half_width * (2.0 * radical_inverse(i, PRIMES[a % PRIMES.len()]) - 1.0)).collect())
        .collect()
}

pub fn sample_points(set: &SensorSet, spec: &SampleSpec) -> Vec<Vec<f64>> {
    let mut pts = halton(set.dim(), spec.count, spec.half_width);
    if spec.include_critical {
        pts.extend(set.critical_points(spec.half_width));
    }
    pts
}

#[derive(Debug, Clone, Serialize)]
pub struct DensityReport {
    /// `min_x |ω∩B(x,ρ)|/|B(x,ρ)| − σ(x)` over the sample.
    pub margin: f64,
    pub worst_point: Vec<f64>,
    pub samples: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ThicknessReport {
    pub thick: bool,
    pub margin: f64,
    pub worst_point: Vec<f64>,
    pub samples: usize,
}

fn norm(p: &[f64]) -> f64 {
    p.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Density margin over an explicit point list.
pub fn density_margin_at(set: &SensorSet, profile: &DensityProfile, pts: &[Vec<f64>]) -> Result<DensityReport> {
    set.validate()?;
    profile.validate()?;
    let d = set.dim();
    let margins: Vec<Result<f64>> = pts
        .par_iter()
        .map(|p| {
            let r = norm(p);
            let rho = profile.rho.eval(r)?;
            let sigma = profile.sigma.eval(r)?;
            if !(rho > 0.0) || !(sigma > 0.0 && sigma <= 1.0) {
                return Err(Error::InvalidParameter(format!("profile values ρ={rho}, σ={sigma} at |x|={r}")));
            }
            Ok(set.ball_measure(p, rho)? / ball_volume(d, rho) - sigma)
        })
        .collect();
    let mut best = (f64::INFINITY, 0usize);
    for (i, m) in margins.into_iter().enumerate() {
        let m = m?;
        if m < best.0 {
            best = (m, i);
        }
    }
    Ok(DensityReport { margin: best.0, worst_point: pts.get(best.1).cloned().unwrap_or_default(), samples: pts.len() })
}

pub fn check_density(set: &SensorSet, profile: &DensityProfile, spec: &SampleSpec) -> Result<DensityReport> {
    density_margin_at(set, profile, &sample_points(set, spec))
}

pub fn thickness_check(set: &SensorSet, theta: f64, l: f64, spec: &SampleSpec) -> Result<ThicknessReport> {
    let profile = DensityProfile { rho: RhoProfile::Constant { l }, sigma: SigmaProfile::Constant { theta } };
    let r = check_density(set, &profile, spec)?;
    Ok(ThicknessReport { thick: r.margin >= 0.0, margin: r.margin, worst_point: r.worst_point, samples: r.samples })
}
