//! Double-double singular values of restricted Hermite sample matrices.
//!
//! Restricted Gram matrices of `h_0, …, h_{r-1}` over a half-line become
//! ill-conditioned far beyond double precision as `r` grows. Rows of the
//! sample matrix are `s_q · p_j(x_q)` with `p_j` the polynomial part of
//! `h_j`; the positive row factors `s_q = √w_q e^{-x_q²/2}` carry a relative
//! error of one rounding each, which perturbs singular values by the same
//! relative amount, so only the polynomial values and the factorisation are
//! carried in double-double.

use crate::error::{Error, Result};
use crate::hermite;
use crate::quadrature::{composite, GaussLegendre};
use twofloat::TwoFloat;

fn tf(x: f64) -> TwoFloat {
    TwoFloat::from(x)
}

/// `p_0(x), …, p_{r-1}(x)` with `h_j(x) = π^{-1/4} e^{-x²/2} p_j(x)`.
fn hermite_polys(r: usize, x: TwoFloat, sqrt_tab: &[(TwoFloat, TwoFloat)], out: &mut [TwoFloat]) {
    out[0] = tf(1.0);
    if r > 1 {
        out[1] = sqrt_tab[0].0 * x;
    }
    for j in 1..r.saturating_sub(1) {
        let (a, b) = sqrt_tab[j];
        out[j + 1] = a * x * out[j] - b * out[j - 1];
    }
}

/// Extreme singular values `(σ_min, σ_max)` of the matrix whose Gram matrix
/// is `∫_ω φ_i φ_j`, `φ_j(x) = √α h_j(αx)`, `j < r`, with `ω ∩ [-R, R]`
/// given as intervals.
pub fn hermite_interval_singular_values(
    r: usize,
    scale: f64,
    intervals: &[(f64, f64)],
    nodes_per_cell: usize,
    cell_width: f64,
) -> Result<(f64, f64)> {
    if r == 0 {
        return Err(Error::EmptySubspace);
    }
    let rule = GaussLegendre::new(nodes_per_cell);
    let nodes = composite(intervals, cell_width.min(0.25), &rule);
    // √(2/(j+1)) and √(j/(j+1)) in double-double
    let sqrt_tab: Vec<(TwoFloat, TwoFloat)> = (0..r.max(1))
        .map(|j| {
            let jf = j as f64;
            ((tf(2.0) / tf(jf + 1.0)).sqrt(), (tf(jf) / tf(jf + 1.0)).sqrt())
        })
        .collect();
    let c0 = scale.sqrt() * std::f64::consts::PI.powf(-0.25);
    let mut cols: Vec<Vec<TwoFloat>> = vec![Vec::with_capacity(nodes.len()); r];
    let mut p = vec![tf(0.0); r];
    for &(x, w) in &nodes {
        let y = scale * x;
        let s = c0 * w.sqrt() * (-0.5 * y * y).exp();
        if s == 0.0 {
            continue;
        }
        hermite_polys(r, tf(scale) * tf(x), &sqrt_tab, &mut p);
        for (j, col) in cols.iter_mut().enumerate() {
            let v = p[j] * s;
            if !v.hi().is_finite() {
                return Err(Error::Quadrature("double-double sample entry overflowed".into()));
            }
            col.push(v);
        }
    }
    if cols[0].len() < r {
        return Ok((0.0, 0.0));
    }
    let rmat = householder_r(cols);
    let sv = jacobi_singular_values(rmat);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let max = sv.iter().copied().fold(0.0, f64::max);
    Ok((min, max))
}

/// Upper-triangular factor of a tall matrix given by columns.
fn householder_r(mut a: Vec<Vec<TwoFloat>>) -> Vec<Vec<TwoFloat>> {
    let n = a.len();
    let m = a[0].len();
    for k in 0..n {
        let mut norm2 = tf(0.0);
        for x in &a[k][k..m] {
            norm2 += *x * *x;
        }
        let norm = norm2.sqrt();
        if norm.hi() == 0.0 {
            continue;
        }
        let alpha = if a[k][k].hi() > 0.0 { -norm } else { norm };
        // v = x - alpha e_k, stored in place
        let mut v: Vec<TwoFloat> = a[k][k..].to_vec();
        v[0] -= alpha;
        let mut vnorm2 = tf(0.0);
        for t in &v {
            vnorm2 += *t * *t;
        }
        if vnorm2.hi() == 0.0 {
            continue;
        }
        for col in a.iter_mut().skip(k) {
            let mut dot = tf(0.0);
            for (i, t) in v.iter().enumerate() {
                dot += *t * col[k + i];
            }
            let f = tf(2.0) * dot / vnorm2;
            for (i, t) in v.iter().enumerate() {
                col[k + i] -= f * *t;
            }
        }
    }
    a.into_iter()
        .enumerate()
        .map(|(j, col)| {
            let mut c = col[..n].to_vec();
            c.iter_mut().skip(j + 1).for_each(|v| *v = tf(0.0));
            c
        })
        .collect()
}

/// Singular values by one-sided Jacobi rotations on the columns.
fn jacobi_singular_values(mut c: Vec<Vec<TwoFloat>>) -> Vec<f64> {
    let n = c.len();
    let dot = |a: &[TwoFloat], b: &[TwoFloat]| {
        let mut s = tf(0.0);
        for (x, y) in a.iter().zip(b) {
            s += *x * *y;
        }
        s
    };
    for _sweep in 0..60 {
        let mut rotated = false;
        for i in 0..n {
            for j in (i + 1)..n {
                let aii = dot(&c[i], &c[i]);
                let ajj = dot(&c[j], &c[j]);
                let aij = dot(&c[i], &c[j]);
                if aij.hi() == 0.0 || aij.abs().hi() <= 1e-31 * (aii * ajj).sqrt().hi() {
                    continue;
                }
                rotated = true;
                let zeta = (ajj - aii) / (tf(2.0) * aij);
                let sgn = if zeta.hi() >= 0.0 { 1.0 } else { -1.0 };
                let t = tf(sgn) / (zeta.abs() + (tf(1.0) + zeta * zeta).sqrt());
                let cs = tf(1.0) / (tf(1.0) + t * t).sqrt();
                let sn = cs * t;
                let (ci, cj) = (c[i].clone(), c[j].clone());
                for k in 0..ci.len() {
                    c[i][k] = cs * ci[k] - sn * cj[k];
                    c[j][k] = sn * ci[k] + cs * cj[k];
                }
            }
        }
        if !rotated {
            break;
        }
    }
    c.iter().map(|col| dot(col, col).sqrt().hi()).collect()
}

/// Box half-width used for double-double sample matrices of `r` functions.
pub fn precise_half_width(r: usize, scale: f64) -> f64 {
    hermite::envelope_radius(r, 1e-90) / scale
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_line_gives_identity() {
        let r = 12;
        let w = precise_half_width(r, 1.0);
        let (lo, hi) = hermite_interval_singular_values(r, 1.0, &[(-w, w)], 32, 0.5).unwrap();
        assert!((lo - 1.0).abs() < 1e-14 && (hi - 1.0).abs() < 1e-14, "{lo} {hi}");
    }

    #[test]
    fn ground_state_tail() {
        let w = precise_half_width(1, 1.0);
        let (lo, _) = hermite_interval_singular_values(1, 1.0, &[(-w, -1.0), (1.0, w)], 32, 0.5).unwrap();
        // erfc(1)
        assert!((lo * lo - 0.157_299_207_050_285_13).abs() < 1e-15);
    }
}
