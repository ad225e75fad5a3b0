//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

/// Number of eigenvalues below `x` of the symmetric tridiagonal matrix with
/// diagonal `a` and constant off-diagonal `b` (Sturm sequence count).
fn sturm_count(a: &[f64], b: f64, x: f64) -> usize {
    let mut count = 0;
    let mut q = a[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for &ai in &a[1..] {
        let prev = if q == 0.0 { f64::EPSILON * b.abs() } else { q };
        q = ai - x - b * b / prev;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// `j`-th eigenvalue (from 0) of the Dirichlet finite-difference operator
/// `-u'' + x^{2k}u` on `[-half, half]` with `cells` cells.
fn fd_eigenvalue(k: usize, half: f64, cells: usize, j: usize) -> f64 {
    let h = 2.0 * half / cells as f64;
    let a: Vec<f64> = (1..cells)
        .map(|i| {
            let x = -half + i as f64 * h;
            2.0 / (h * h) + x.powi(2 * k as i32)
        })
        .collect();
    let b = -1.0 / (h * h);
    let (mut lo, mut hi) = (0.0, a.iter().copied().fold(0.0, f64::max) + 4.0 / (h * h));
    while hi - lo > 1e-13 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if sturm_count(&a, b, mid) > j {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Richardson-extrapolated finite-difference eigenvalue of
/// `-u'' + x^{2k}u` on the line; the second-order error cancels.
pub fn fd_oracle(k: usize, j: usize) -> f64 {
    let half = if k == 1 { 10.0 } else { 7.0 };
    let coarse = fd_eigenvalue(k, half, 4000, j);
    let fine = fd_eigenvalue(k, half, 8000, j);
    (4.0 * fine - coarse) / 3.0
}

/// Least-squares slope of `ys` against `xs`.
pub fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
