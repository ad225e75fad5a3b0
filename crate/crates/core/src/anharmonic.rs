//! Large-`k` asymptotics of the ground energy `λ_k` of `-Δ + |x|^{2k}`:
//! the Dirichlet ball eigenpair, the correction integral of the min-max
//! upper bound, the large-coupling well operators and convergence tables.

use crate::error::{Error, Result};
use crate::quadrature;
use crate::radial;
use crate::spectral_core::{eigendecompose, SpectralModel};
use rayon::prelude::*;
use serde::Serialize;

/// Steps of the shooting grid on `[0, 1]`.
const SHOOT_STEPS: usize = 4000;

/// `Γ(x)` for `x` a positive integer or half-integer.
fn gamma_half(x: f64) -> f64 {
    let twice = (2.0 * x).round() as i64;
    if twice % 2 == 0 {
        (1..(twice / 2)).map(|i| i as f64).product()
    } else {
        let mut g = std::f64::consts::PI.sqrt();
        let mut t = 0.5;
        while t < x - 0.25 {
            g *= t;
            t += 1.0;
        }
        g
    }
}

/// `|S^{d-1}| = 2π^{d/2}/Γ(d/2)`; `2` for `d = 1`.
pub fn sphere_area(d: usize) -> f64 {
    2.0 * std::f64::consts::PI.powf(d as f64 / 2.0) / gamma_half(d as f64 / 2.0)
}

/// `J_ν(x)` by its power series; `ν` integer or half-integer, moderate `x`.
pub fn bessel_j(nu: f64, x: f64) -> f64 {
    let h = 0.5 * x;
    let mut term = h.powf(nu) / gamma_half(nu + 1.0);
    let mut sum = term;
    for k in 1..200 {
        let kf = k as f64;
        term *= -h * h / (kf * (kf + nu));
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// First positive zero of `J_ν` by a scan and bisection.
pub fn bessel_first_zero(nu: f64) -> f64 {
    let mut a = 0.5f64.max(nu);
    let step = 0.05;
    while bessel_j(nu, a) * bessel_j(nu, a + step) > 0.0 {
        a += step;
    }
    let (mut lo, mut hi) = (a, a + step);
    let flo = bessel_j(nu, lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if bessel_j(nu, mid) * flo > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Radial Dirichlet ground state on the unit ball.
#[derive(Debug, Clone, Serialize)]
pub struct DirichletBallData {
    pub d: usize,
    pub lambda_d: f64,
    /// Uniform grid on `[0, 1]`.
    pub r: Vec<f64>,
    /// `ψ_D(r)`, normalised in `L²(B(0,1))` and positive inside.
    pub psi: Vec<f64>,
    pub dpsi: Vec<f64>,
    /// `φ_D = ψ_D²`
    pub phi: Vec<f64>,
    /// `φ_D^{(j)}(1)` for `j = 0..=4`
    pub phi_boundary: [f64; 5],
    /// Largest radial ODE residual over interior collocation points.
    pub residual: f64,
}

impl DirichletBallData {
    /// `ψ_D(r)` by cubic Hermite interpolation of the shooting solution.
    pub fn psi_at(&self, r: f64) -> f64 {
        let n = self.r.len() - 1;
        let h = 1.0 / n as f64;
        let t = (r.clamp(0.0, 1.0) / h).min(n as f64 - 1e-12);
        let i = t.floor() as usize;
        let s = t - i as f64;
        let (p0, p1) = (self.psi[i], self.psi[i + 1]);
        let (m0, m1) = (self.dpsi[i] * h, self.dpsi[i + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * p0 + (s3 - 2.0 * s2 + s) * m0 + (-2.0 * s3 + 3.0 * s2) * p1 + (s3 - s2) * m1
    }

    pub fn phi_at(&self, r: f64) -> f64 {
        self.psi_at(r).powi(2)
    }
}

/// Radius up to which the regular solution is taken from its power series.
const SERIES_START: f64 = 0.05;

/// Regular solution `Σ (-λr²/4)^j / (j! (d/2)_j)` and its derivative.
fn regular_series(d: usize, lambda: f64, r: f64) -> (f64, f64) {
    let q = -lambda * r * r / 4.0;
    let half = d as f64 / 2.0;
    let (mut term, mut y, mut z) = (1.0, 1.0, 0.0);
    for j in 1..60 {
        let jf = j as f64;
        term *= q / (jf * (half + jf - 1.0));
        y += term;
        // d/dr of q^j is 2j q^j / r
        if r > 0.0 {
            z += 2.0 * jf * term / r;
        }
        if term.abs() < 1e-20 {
            break;
        }
    }
    (y, z)
}

/// `(ψ, ψ')` on the uniform grid for `ψ'' + ((d-1)/r)ψ' + λψ = 0`,
/// `ψ(0) = 1`: the power series near the regular singular point, then
/// classical RK4.
fn shoot(d: usize, lambda: f64, steps: usize) -> (Vec<f64>, Vec<f64>) {
    let h = 1.0 / steps as f64;
    let a = d as f64 - 1.0;
    let rhs = |r: f64, y: f64, z: f64| -> (f64, f64) { (z, -a / r * z - lambda * y) };
    let mut psi = vec![0.0; steps + 1];
    let mut dpsi = vec![0.0; steps + 1];
    let start = ((SERIES_START / h).round() as usize).max(1);
    for i in 0..=start {
        (psi[i], dpsi[i]) = regular_series(d, lambda, i as f64 * h);
    }
    for i in start..steps {
        let r = i as f64 * h;
        let (y, z) = (psi[i], dpsi[i]);
        let (k1y, k1z) = rhs(r, y, z);
        let (k2y, k2z) = rhs(r + 0.5 * h, y + 0.5 * h * k1y, z + 0.5 * h * k1z);
        let (k3y, k3z) = rhs(r + 0.5 * h, y + 0.5 * h * k2y, z + 0.5 * h * k2z);
        let (k4y, k4z) = rhs(r + h, y + h * k3y, z + h * k3z);
        psi[i + 1] = y + h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
        dpsi[i + 1] = z + h / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z);
    }
    (psi, dpsi)
}

pub fn dirichlet_ball_eigenvalue(d: usize) -> Result<DirichletBallData> {
    if d == 0 {
        return Err(Error::InvalidParameter("dimension must be at least 1".into()));
    }
    let lambda_d = if d == 1 { std::f64::consts::PI.powi(2) / 4.0 } else { bessel_first_zero(d as f64 / 2.0 - 1.0).powi(2) };
    let (mut psi, mut dpsi) = shoot(d, lambda_d, SHOOT_STEPS);
    let n = SHOOT_STEPS;
    let h = 1.0 / n as f64;
    let r: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
    // normalise with Simpson's rule on |S^{d-1}| r^{d-1} ψ²
    let f: Vec<f64> = (0..=n).map(|i| r[i].powi(d as i32 - 1) * psi[i] * psi[i]).collect();
    let simpson = h / 3.0 * (f[0] + f[n] + (1..n).map(|i| if i % 2 == 1 { 4.0 } else { 2.0 } * f[i]).sum::<f64>());
    let scale = 1.0 / (sphere_area(d) * simpson).sqrt();
    psi.iter_mut().for_each(|v| *v *= scale);
    dpsi.iter_mut().for_each(|v| *v *= scale);
    // ODE residual at interior points, ψ'' from fourth-order differences of ψ'
    let a = d as f64 - 1.0;
    let mut residual = 0.0f64;
    for i in (2..n - 1).step_by(37) {
        let ddpsi = (-dpsi[i + 2] + 8.0 * dpsi[i + 1] - 8.0 * dpsi[i - 1] + dpsi[i - 2]) / (12.0 * h);
        let res = ddpsi + a / r[i] * dpsi[i] + lambda_d * psi[i];
        residual = residual.max(res.abs());
    }
    let phi = psi.iter().map(|v| v * v).collect();
    let phi_boundary = boundary_phi_derivatives(d, lambda_d, psi[n], dpsi[n]);
    Ok(DirichletBallData { d, lambda_d, r, psi, dpsi, phi, phi_boundary, residual })
}

/// `φ^{(j)}(1)`, `j ≤ 4`, from `ψ(1), ψ'(1)` and the radial ODE.
fn boundary_phi_derivatives(d: usize, lambda: f64, p0: f64, p1: f64) -> [f64; 5] {
    let c = d as f64 - 1.0;
    // a = c/r and its derivatives at r = 1
    let (a0, a1, a2) = (c, -c, 2.0 * c);
    let p2 = -a0 * p1 - lambda * p0;
    let p3 = -a1 * p1 - a0 * p2 - lambda * p1;
    let p4 = -a2 * p1 - 2.0 * a1 * p2 - a0 * p3 - lambda * p2;
    [
        p0 * p0,
        2.0 * p0 * p1,
        2.0 * (p1 * p1 + p0 * p2),
        2.0 * (3.0 * p1 * p2 + p0 * p3),
        2.0 * (3.0 * p2 * p2 + 4.0 * p1 * p3 + p0 * p4),
    ]
}

/// `|S^{d-1}| ∫₀¹ r^{2k+d-1} φ_D(r) dr`.
pub fn correction_integral(k: usize, data: &DirichletBallData) -> Result<f64> {
    let p = (2 * k + data.d - 1) as i32;
    let f = |r: f64| r.powi(p) * data.phi_at(r);
    // the integrand concentrates near r = 1 for large k
    let split = (1.0 - 20.0 / (p as f64 + 1.0)).max(0.0);
    let mut total = quadrature::adaptive(&f, split, 1.0, 1e-15)?;
    if split > 0.0 {
        total += quadrature::adaptive(&f, 0.0, split, 1e-15)?;
    }
    Ok(sphere_area(data.d) * total)
}

#[derive(Debug, Clone, Serialize)]
pub struct SeriesCheck {
    pub k: usize,
    pub quadrature: f64,
    /// Terms `φ^{(j-1)}(1)/(p+j)^j`, `p = 2k+d-1`, as printed.
    pub printed: f64,
    /// `Σ (-1)^{j-1} φ^{(j-1)}(1)/((p+1)⋯(p+j))` from integrating by parts.
    pub by_parts: f64,
    pub terms: usize,
}

/// Truncated boundary series for the correction integral, in both forms.
pub fn correction_series(k: usize, data: &DirichletBallData, terms: usize) -> Result<SeriesCheck> {
    if terms == 0 || terms > 5 {
        return Err(Error::InvalidParameter("series supports 1 to 5 terms".into()));
    }
    let p = (2 * k + data.d - 1) as f64;
    let s = sphere_area(data.d);
    let mut printed = 0.0;
    let mut by_parts = 0.0;
    let mut prod = 1.0;
    for j in 1..=terms {
        let jf = j as f64;
        let dphi = data.phi_boundary[j - 1];
        printed += dphi / (p + jf).powi(j as i32);
        prod *= p + jf;
        by_parts += if j % 2 == 1 { 1.0 } else { -1.0 } * dphi / prod;
    }
    Ok(SeriesCheck { k, quadrature: correction_integral(k, data)?, printed: s * printed, by_parts: s * by_parts, terms })
}

/// Box radius beyond which `r^{k+1}` exceeds `40(k+1)+1`.
fn ground_box(k: usize) -> f64 {
    (40.0 * (k as f64 + 1.0) + 1.0).powf(1.0 / (k as f64 + 1.0))
}

/// Base grid for the radial solver; the wall at `r = 1` is about `1/(2k)` wide.
fn ground_cells(k: usize) -> usize {
    3000.max(100 * k)
}

/// Largest `k` handled by the Hermite–Galerkin path in `d = 1`.
pub const GALERKIN_K_MAX: usize = 3;

/// `λ_k = min spec(-Δ + |x|^{2k})` on `ℝ^d`.
pub fn anharmonic_ground(k: usize, d: usize) -> Result<f64> {
    if k == 0 || d == 0 {
        return Err(Error::InvalidParameter("k and d must be positive".into()));
    }
    if k == 1 {
        return Ok(d as f64);
    }
    if d == 1 && k <= GALERKIN_K_MAX {
        let dec = eigendecompose(&SpectralModel::new(k, 1, 1), 1)?;
        return Ok(dec.eigenvalues[0]);
    }
    let kk = 2 * k as i32;
    let v = move |r: f64| r.powi(kk);
    let est = radial::ground_energy(d, &v, ground_box(k), ground_cells(k));
    if !(est.error_estimate < 1e-8) {
        return Err(Error::NotConverged {
            basis_size: 4 * ground_cells(k),
            drift: est.error_estimate,
            tol: 1e-8,
            last: vec![est.value],
            previous: vec![],
        });
    }
    Ok(est.value)
}

/// `min spec(-Δ + M·1_{|x|>1})` on `B(0, 4)` with Dirichlet walls.
pub fn large_coupling_ground(coupling: f64, d: usize) -> Result<f64> {
    if !(coupling > 0.0) || d == 0 {
        return Err(Error::InvalidParameter("coupling must be positive and d ≥ 1".into()));
    }
    // cells aligned so that r = 1 is a face; no extrapolation across the jump
    let cells = 16_000;
    let v = move |r: f64| if r > 1.0 { coupling } else { 0.0 };
    Ok(radial::lowest_on_grid(d, &v, 4.0, cells))
}

#[derive(Debug, Clone, Serialize)]
pub struct BracketReport {
    pub k: usize,
    pub lambda_k: f64,
    pub lambda_d: f64,
    pub upper: f64,
    pub upper_holds: bool,
    /// `λ_D/(1+ε)²`
    pub lower_expr: f64,
    /// `λ_k − λ_D/(1+ε)²`
    pub residual: f64,
}

pub fn two_sided_check(k: usize, eps: f64, data: &DirichletBallData) -> Result<BracketReport> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter("ε must be positive".into()));
    }
    let lambda_k = anharmonic_ground(k, data.d)?;
    let upper = data.lambda_d + correction_integral(k, data)?;
    let lower_expr = data.lambda_d / (1.0 + eps).powi(2);
    Ok(BracketReport {
        k,
        lambda_k,
        lambda_d: data.lambda_d,
        upper,
        upper_holds: lambda_k <= upper,
        lower_expr,
        residual: lambda_k - lower_expr,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub k: usize,
    pub lambda_k: f64,
    pub upper: f64,
    pub lower_expr: f64,
    pub correction: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceTable {
    pub d: usize,
    pub lambda_d: f64,
    pub eps: f64,
    pub rows: Vec<ConvergenceRow>,
    /// Log-log slope of `|λ_k − λ_D|` against `k`.
    pub gap_decay_exponent: f64,
    /// Log-log slope of the correction integral against `k`.
    pub correction_decay_exponent: f64,
}

pub fn convergence_study(k_grid: &[usize], d: usize, eps: f64) -> Result<ConvergenceTable> {
    if k_grid.len() < 2 {
        return Err(Error::InvalidParameter("convergence study needs two grid points".into()));
    }
    let data = dirichlet_ball_eigenvalue(d)?;
    let rows: Vec<Result<ConvergenceRow>> = k_grid
        .par_iter()
        .map(|&k| {
            let b = two_sided_check(k, eps, &data)?;
            Ok(ConvergenceRow {
                k,
                lambda_k: b.lambda_k,
                upper: b.upper,
                lower_expr: b.lower_expr,
                correction: b.upper - data.lambda_d,
            })
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = rows.iter().map(|r| (r.k as f64).ln()).collect();
    let gap: Vec<f64> = rows.iter().map(|r| (r.lambda_k - data.lambda_d).abs().ln()).collect();
    let corr: Vec<f64> = rows.iter().map(|r| r.correction.ln()).collect();
    Ok(ConvergenceTable {
        d,
        lambda_d: data.lambda_d,
        eps,
        gap_decay_exponent: crate::spectral_core::least_squares(&xs, &gap).0,
        correction_decay_exponent: crate::spectral_core::least_squares(&xs, &corr).0,
        rows,
    })
}
