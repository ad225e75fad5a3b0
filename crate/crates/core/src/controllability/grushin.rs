//! Fourier-mode reduction of the Baouendi–Grushin operator: mode spectra
//! `|n|^{2s/(γ+1)} spec(H_γ)^s` and a matrix-level check of the dilation
//! identity `M*H_{γ;r}M = r^{2/(γ+1)}H_γ`.

use crate::anharmonic::anharmonic_ground;
use crate::error::{Error, Result};
use crate::hermite;
use crate::quadrature::{composite, GaussLegendre};
use crate::spectral_core::{eigendecompose, SpectralModel};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct GrushinParams {
    pub gamma: u32,
    pub s: f64,
    pub d: usize,
    /// `min spec(H_γ)`, from the anharmonic ground-state solver.
    pub lambda_gamma: f64,
    /// Leading eigenvalues of `H_γ`.
    pub spectrum: Vec<f64>,
}

impl GrushinParams {
    /// Parameters with the first `levels` eigenvalues of `H_γ` stored.
    pub fn new(gamma: u32, s: f64, d: usize, levels: usize) -> Result<Self> {
        if gamma == 0 || !(s > 0.0) || d == 0 || levels == 0 {
            return Err(Error::InvalidParameter("need γ ≥ 1, s > 0, d ≥ 1, levels ≥ 1".into()));
        }
        let lambda_gamma = anharmonic_ground(gamma as usize, d)?;
        let spectrum = if d == 1 {
            let mut v = eigendecompose(&SpectralModel::new(gamma as usize, 1, 1), levels)?.eigenvalues;
            v.truncate(levels);
            v[0] = lambda_gamma;
            v
        } else if gamma == 1 {
            // 2|a| + d with multiplicity C(|a|+d-1, d-1)
            let mut v = Vec::new();
            let mut shell = 0usize;
            while v.len() < levels {
                let mult = binomial(shell + d - 1, d - 1);
                v.extend(std::iter::repeat_n((2 * shell + d) as f64, mult));
                shell += 1;
            }
            v.truncate(levels);
            v
        } else {
            vec![lambda_gamma]
        };
        Ok(Self { gamma, s, d, lambda_gamma, spectrum })
    }
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "branch", rename_all = "snake_case")]
pub enum ModeSpectrum {
    /// Mode `|n| = r ≥ 1`: `r^{2s/(γ+1)} λ_j^s`.
    Scaled { r: f64, values: Vec<f64> },
    /// Mode `0` is the free fractional Laplacian; `surrogate` lists the
    /// band-limited Galerkin values `(πj/(2a))^{2s}` on `(-a, a)` and is
    /// labelled as such.
    FreeLaplacian { surrogate: Vec<f64>, box_half_width: f64 },
}

pub fn grushin_mode_spectrum(params: &GrushinParams, n: &[i64]) -> Result<ModeSpectrum> {
    if n.len() != params.d {
        return Err(Error::InvalidParameter(format!("mode vector needs {} entries", params.d)));
    }
    let r = n.iter().map(|&v| (v as f64).powi(2)).sum::<f64>().sqrt();
    let s = params.s;
    if r == 0.0 {
        let a = 10.0;
        let surrogate =
            (1..=params.spectrum.len()).map(|j| (std::f64::consts::PI * j as f64 / (2.0 * a)).powf(2.0 * s)).collect();
        return Ok(ModeSpectrum::FreeLaplacian { surrogate, box_half_width: a });
    }
    let factor = r.powf(2.0 * s / (params.gamma as f64 + 1.0));
    Ok(ModeSpectrum::Scaled { r, values: params.spectrum.iter().map(|l| factor * l.powf(s)).collect() })
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingDefect {
    pub gamma: u32,
    pub r: f64,
    pub basis_size: usize,
    pub block: usize,
    /// `‖P(M*A_rM − r^{2/(γ+1)}A_1)P‖₂ / ‖r^{2/(γ+1)}PA_1P‖₂`
    pub relative_defect: f64,
}

/// Galerkin matrices of `H_{γ;r}` and `H_γ` on `N` Hermite functions, the
/// dilation as the quadrature matrix `⟨h_i, M h_j⟩`, and the defect of the
/// identity on the leading `block × block` corner (`d = 1`).
pub fn scaling_defect(gamma: u32, r: f64, basis_size: usize, block: usize) -> Result<ScalingDefect> {
    if gamma == 0 || !(r >= 1.0) || block == 0 || block * 4 > basis_size {
        return Err(Error::InvalidParameter("need γ ≥ 1, r ≥ 1 and basis_size ≥ 4·block".into()));
    }
    let g = gamma as usize;
    let n = basis_size;
    let a_r = hermite::galerkin(n, g, 1, r * r, 1.0);
    let a_1 = hermite::galerkin(n, g, 1, 1.0, 1.0);
    let beta = r.powf(1.0 / (gamma as f64 + 1.0));
    let half = hermite::envelope_radius(n, 1e-34);
    let rule = GaussLegendre::new(32);
    let nodes = composite(&[(-half, half)], 0.25, &rule);
    // M_{ij} = ∫ h_i(x) √β h_j(βx) dx for j < block
    let parts: Vec<DMatrix<f64>> = nodes
        .par_chunks(256)
        .map(|chunk| {
            let mut acc = DMatrix::<f64>::zeros(n, block);
            let mut hx = vec![0.0; n];
            let mut hb = vec![0.0; block];
            for &(x, w) in chunk {
                hermite::values_into(x, &mut hx);
                hermite::values_into(beta * x, &mut hb);
                for j in 0..block {
                    let c = w * beta.sqrt() * hb[j];
                    if c != 0.0 {
                        for i in 0..n {
                            acc[(i, j)] += c * hx[i];
                        }
                    }
                }
            }
            acc
        })
        .collect();
    let m = parts.into_iter().fold(DMatrix::<f64>::zeros(n, block), |a, b| a + b);
    let conj = m.transpose() * &a_r * &m;
    let c = r.powf(2.0 / (gamma as f64 + 1.0));
    let target = a_1.view((0, 0), (block, block)) * c;
    let defect = (&conj - &target).singular_values().max();
    Ok(ScalingDefect { gamma, r, basis_size: n, block, relative_defect: defect / target.singular_values().max() })
}
