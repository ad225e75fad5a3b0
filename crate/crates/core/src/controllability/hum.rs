//! Minimum-norm (HUM) controls for `ḟ = −Λf + G_ω h` on the span of the
//! leading eigenfunctions, with the controllability Gramian in closed form.

use crate::error::{Error, Result};
use crate::geometry::SensorSet;
use crate::quadrature::GaussLegendre;
use crate::spectral_core::{restricted_gram, EigenDecomposition, SpectralSubspace};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

/// Nodes of the Gauss–Legendre rule used on each time cell.
const TIME_NODES: usize = 48;

#[derive(Debug, Clone, Serialize)]
pub struct ControlRun {
    /// Indices of the eigenfunctions spanned by the truncation.
    pub truncation: Vec<usize>,
    pub target_time: f64,
    /// `(t, c(t))` with `h(t) = 1_ω Σ c_i(t) φ_i`.
    pub control_trajectory: Vec<(f64, Vec<f64>)>,
    /// `‖f(T)‖` from the Duhamel formula integrated by quadrature.
    pub final_norm: f64,
    /// `∫₀ᵀ ‖h‖² dt` by quadrature.
    pub cost: f64,
    /// `⟨W_T^{-1}e^{−TΛ}f₀, e^{−TΛ}f₀⟩`
    pub gramian_cost: f64,
    pub min_gramian_eigenvalue: f64,
    /// `sup cost/‖f₀‖²` over the truncation: the exact observability
    /// constant of the truncated system.
    pub truncated_observability_constant: f64,
}

/// The first `n` eigenfunctions of a decomposition.
pub fn leading_subspace(decomp: &EigenDecomposition, n: usize) -> Result<SpectralSubspace> {
    if n == 0 || n > decomp.eigenvalues.len() {
        return Err(Error::InvalidParameter(format!("truncation {n} outside 1..={}", decomp.eigenvalues.len())));
    }
    let members: Vec<usize> = (0..n).collect();
    Ok(SpectralSubspace {
        lambda: decomp.eigenvalues[n - 1],
        eigenvalues: decomp.eigenvalues[..n].to_vec(),
        basis: decomp.eigenvectors.columns(0, n).into_owned(),
        members,
        kind: decomp.basis.clone(),
        quadrature: decomp.quadrature.clone(),
    })
}

/// `(1 − e^{−aT})/a`, continuous at `a = 0`.
fn exp_integral(a: f64, t: f64) -> f64 {
    if (a * t).abs() < 1e-8 {
        t * (1.0 - 0.5 * a * t)
    } else {
        -(-a * t).exp_m1() / a
    }
}

/// HUM control for the truncation `sub` of `H^s` observed on `set`.
pub fn hum_control(
    sub: &SpectralSubspace,
    s: f64,
    set: &SensorSet,
    t_final: f64,
    f0: &[f64],
    time_cells: usize,
) -> Result<ControlRun> {
    let n = sub.dim();
    if f0.len() != n {
        return Err(Error::InvalidParameter(format!("initial datum has {} coefficients, truncation has {n}", f0.len())));
    }
    if !(t_final > 0.0) || !(s > 0.0) || time_cells == 0 {
        return Err(Error::InvalidParameter("need T > 0, s > 0 and at least one time cell".into()));
    }
    let lam: Vec<f64> = sub.eigenvalues.iter().map(|e| e.powf(s)).collect();
    let g = restricted_gram(&sub.basis, &sub.kind, set, &sub.quadrature)?;
    let w = DMatrix::from_fn(n, n, |i, j| g[(i, j)] * exp_integral(lam[i] + lam[j], t_final));
    let eig = SymmetricEigen::new(w.clone());
    let min_eig = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let max_eig = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    if !(min_eig > 1e-14 * max_eig.max(1e-300)) {
        return Err(Error::GramianSingular { min_eig });
    }
    let decay = |tau: f64| DVector::from_fn(n, |i, _| (-tau * lam[i]).exp());
    let ft = decay(t_final).component_mul(&DVector::from_column_slice(f0));
    let chol = w.clone().cholesky().ok_or(Error::GramianSingular { min_eig })?;
    let y = chol.solve(&ft);
    let gramian_cost = ft.dot(&y);
    // e^{−TΛ}W^{-1}e^{−TΛ}
    let winv = chol.inverse();
    let dt = decay(t_final);
    let obs = DMatrix::from_fn(n, n, |i, j| dt[i] * winv[(i, j)] * dt[j]);
    let truncated_observability_constant = SymmetricEigen::new(obs).eigenvalues.iter().copied().fold(0.0, f64::max);
    // c(t) = −e^{−(T−t)Λ} W^{-1} e^{−TΛ} f₀
    let coeff = |t: f64| -> DVector<f64> { -decay(t_final - t).component_mul(&y) };
    let rule = GaussLegendre::new(TIME_NODES);
    let h = t_final / time_cells as f64;
    let mut state = ft.clone();
    let mut cost = 0.0;
    let mut trajectory = Vec::new();
    for c in 0..time_cells {
        let mut nodes = Vec::new();
        rule.push_mapped(c as f64 * h, (c + 1) as f64 * h, &mut nodes);
        for (t, wt) in nodes {
            let ct = coeff(t);
            let gc = &g * &ct;
            cost += wt * ct.dot(&gc);
            state += decay(t_final - t).component_mul(&gc) * wt;
        }
        trajectory.push((c as f64 * h, coeff(c as f64 * h).iter().copied().collect()));
    }
    trajectory.push((t_final, coeff(t_final).iter().copied().collect()));
    Ok(ControlRun {
        truncation: sub.members.clone(),
        target_time: t_final,
        control_trajectory: trajectory,
        final_norm: state.norm(),
        cost,
        gramian_cost,
        min_gramian_eigenvalue: min_eig,
        truncated_observability_constant,
    })
}
