//! Hermite functions and exact Galerkin matrices of polynomial Shubin-type
//! operators in the Hermite basis.
//!
//! With `X = (a + a†)/√2` and `P = -i d/dx = i(a† - a)/√2`, the operators
//! `X^{2k}` and `P^{2m} = (-1)^m 2^{-m} (a† - a)^{2m}` are assembled in the
//! unnormalised basis `|n⟩' = √(n!) |n⟩`, where both ladder operators have
//! integer entries. Every path contributing to a given entry carries the same
//! sign, so the powers are formed without cancellation and converted to the
//! orthonormal basis at the end.

use nalgebra::DMatrix;

const RESCALE: f64 = 1e200;

/// Values `h_0(x), …, h_{n-1}(x)` of the normalised Hermite functions.
///
/// The three-term recurrence runs on a rescaled copy so that large `|x|`
/// neither underflows the seed `e^{-x²/2}` nor overflows intermediate terms.
pub fn values(n: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; n];
    values_into(x, &mut out);
    out
}

pub fn values_into(x: f64, out: &mut [f64]) {
    let s = scaled_values_into(x, out);
    let f = s.exp();
    out.iter_mut().for_each(|v| *v *= f);
}

/// Like [`values_into`] but leaves a common factor `e^s` out, returning `s`;
/// entries far below the largest one may be flushed to zero.
pub fn scaled_values_into(x: f64, out: &mut [f64]) -> f64 {
    let n = out.len();
    if n == 0 {
        return 0.0;
    }
    let mut log_scale = -0.5 * x * x - 0.25 * std::f64::consts::PI.ln();
    let (mut prev, mut cur) = (0.0, 1.0);
    out[0] = 1.0;
    let mut rescales = vec![0usize; n];
    let mut count = 0usize;
    for j in 1..n {
        let jf = (j - 1) as f64;
        let next = (2.0 / (jf + 1.0)).sqrt() * x * cur - (jf / (jf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE {
            cur /= RESCALE;
            prev /= RESCALE;
            log_scale += RESCALE.ln();
            count += 1;
        }
        out[j] = cur;
        rescales[j] = count;
    }
    if count > 0 {
        for j in 0..n {
            let behind = (count - rescales[j]) as i32;
            if behind > 0 {
                out[j] *= RESCALE.powi(-behind);
            }
        }
    }
    log_scale
}

/// Entries of `(a† + s·a)^p` in the primed basis restricted to `n × n`,
/// with `s = +1` for `a + a†` and `s = -1` for `a† - a`.
fn ladder_power(n: usize, p: usize, s: f64) -> DMatrix<f64> {
    let m = n + p + 1;
    let mut out = DMatrix::zeros(n, n);
    let mut v = vec![0.0; m];
    let mut w = vec![0.0; m];
    for j in 0..n {
        v.iter_mut().for_each(|x| *x = 0.0);
        v[j] = 1.0;
        let (mut lo, mut hi) = (j, j);
        for _ in 0..p {
            let new_lo = lo.saturating_sub(1);
            let new_hi = (hi + 1).min(m - 1);
            for i in new_lo..=new_hi {
                let raise = if i >= 1 { v[i - 1] } else { 0.0 };
                let lower = if i + 1 < m { s * (i + 1) as f64 * v[i + 1] } else { 0.0 };
                w[i] = raise + lower;
            }
            for i in new_lo..=new_hi {
                v[i] = w[i];
                w[i] = 0.0;
            }
            lo = new_lo;
            hi = new_hi;
        }
        for i in lo..=hi.min(n - 1) {
            out[(i, j)] = v[i];
        }
    }
    out
}

/// `√(i!/j!)`, converting primed-basis entries to the orthonormal basis.
fn factorial_ratio_sqrt(i: usize, j: usize) -> f64 {
    if i >= j {
        ((j + 1)..=i).map(|t| t as f64).product::<f64>().sqrt()
    } else {
        1.0 / ((i + 1)..=j).map(|t| t as f64).product::<f64>().sqrt()
    }
}

/// Galerkin matrix of `kin_coef·P^{2m} + pot_coef·X^{2k}` on the first `n`
/// Hermite functions. Exact up to rounding: no quadrature is involved.
pub fn galerkin(n: usize, k: usize, m: usize, pot_coef: f64, kin_coef: f64) -> DMatrix<f64> {
    let cx = ladder_power(n, 2 * k, 1.0);
    let cp = ladder_power(n, 2 * m, -1.0);
    let sx = pot_coef * 0.5f64.powi(k as i32);
    let sp = kin_coef * if m.is_multiple_of(2) { 1.0 } else { -1.0 } * 0.5f64.powi(m as i32);
    let band = 2 * k.max(m);
    let mut h = DMatrix::zeros(n, n);
    for j in 0..n {
        let lo = j.saturating_sub(band);
        let hi = (j + band).min(n - 1);
        for i in lo..=hi {
            let c = sx * cx[(i, j)] + sp * cp[(i, j)];
            if c != 0.0 {
                h[(i, j)] = c * factorial_ratio_sqrt(i, j);
            }
        }
    }
    let ht = h.transpose();
    (h + ht) * 0.5
}

/// Coefficients of `f'` given those of `f`; the result has one more entry.
/// Uses `d/dx = (a - a†)/√2`.
pub fn differentiate(c: &[f64]) -> Vec<f64> {
    let n = c.len();
    let mut out = vec![0.0; n + 1];
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for (i, o) in out.iter_mut().enumerate() {
        let up = if i + 1 < n { ((i + 1) as f64).sqrt() * c[i + 1] } else { 0.0 };
        let down = if i >= 1 && i - 1 < n { (i as f64).sqrt() * c[i - 1] } else { 0.0 };
        *o = r * (up - down);
    }
    out
}

/// Smallest `R` beyond which every `h_j(x)²`, `j < n`, stays below `floor`,
/// found by an outward scan.
pub fn envelope_radius(n: usize, floor: f64) -> f64 {
    let start = (2.0 * n as f64 + 1.0).sqrt();
    let stop = start + 40.0;
    let mut last = 0.0;
    let mut buf = vec![0.0; n];
    let mut x = 0.0;
    while x <= stop {
        values_into(x, &mut buf);
        if buf.iter().any(|v| v * v > floor) {
            last = x;
        } else if x > start {
            break;
        }
        x += 0.25;
    }
    last + 1.0
}
