//! Ground energy of radial Schrödinger operators
//! `-u'' - ((d-1)/r) u' + V(r) u` on `[0, r_max]` by a cell-centred finite
//! volume scheme, Sturm-count bisection and Richardson extrapolation.

use serde::Serialize;

/// Extrapolated eigenvalue and the size of the last Richardson correction.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RadialEstimate {
    pub value: f64,
    pub error_estimate: f64,
}

/// Symmetric tridiagonal discretisation: diagonal and off-diagonal.
fn assemble<V: Fn(f64) -> f64>(d: usize, v: &V, r_max: f64, cells: usize) -> (Vec<f64>, Vec<f64>) {
    let h = r_max / cells as f64;
    let p = d as i32 - 1;
    let face = |i: usize| (i as f64 * h).powi(p);
    let centre = |i: usize| ((i as f64 + 0.5) * h).powi(p);
    let mut diag = vec![0.0; cells];
    let mut off = vec![0.0; cells.saturating_sub(1)];
    let h2 = h * h;
    for i in 0..cells {
        let w = centre(i);
        // zero flux through r = 0; Dirichlet at r_max through a ghost cell
        let left = if i == 0 { 0.0 } else { face(i) };
        let right = if i + 1 == cells { 2.0 * face(cells) } else { face(i + 1) };
        diag[i] = (left + right) / (h2 * w) + v((i as f64 + 0.5) * h);
        if i + 1 < cells {
            off[i] = -face(i + 1) / (h2 * (w * centre(i + 1)).sqrt());
        }
    }
    (diag, off)
}

/// Number of eigenvalues below `sigma` (Sturm sequence count).
fn count_below(diag: &[f64], off: &[f64], sigma: f64) -> usize {
    let mut count = 0;
    let mut q = diag[0] - sigma;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..diag.len() {
        let denom = if q == 0.0 { f64::EPSILON * (off[i - 1].abs() + 1.0) } else { q };
        q = diag[i] - sigma - off[i - 1] * off[i - 1] / denom;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Smallest eigenvalue of the symmetric tridiagonal matrix by bisection.
pub fn lowest_tridiagonal(diag: &[f64], off: &[f64]) -> f64 {
    // Gershgorin bounds
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    // runs until the midpoint stops moving, since steep walls give huge upper bounds
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count_below(diag, off, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Lowest eigenvalue on a single grid.
pub fn lowest_on_grid<V: Fn(f64) -> f64>(d: usize, v: &V, r_max: f64, cells: usize) -> f64 {
    let (diag, off) = assemble(d, v, r_max, cells);
    lowest_tridiagonal(&diag, &off)
}

/// Lowest eigenvalue extrapolated from grids of `base`, `2·base` and
/// `4·base` cells (two Richardson levels).
pub fn ground_energy<V: Fn(f64) -> f64>(d: usize, v: &V, r_max: f64, base: usize) -> RadialEstimate {
    let l1 = lowest_on_grid(d, v, r_max, base);
    let l2 = lowest_on_grid(d, v, r_max, 2 * base);
    let l4 = lowest_on_grid(d, v, r_max, 4 * base);
    let r1 = (4.0 * l2 - l1) / 3.0;
    let r1b = (4.0 * l4 - l2) / 3.0;
    let r2 = (16.0 * r1b - r1) / 15.0;
    RadialEstimate { value: r2, error_estimate: (r2 - r1b).abs() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_ground_energy_equals_dimension() {
        for d in 1..=3 {
            let e = ground_energy(d, &|r: f64| r * r, 9.0, 1000);
            assert!((e.value - d as f64).abs() < 1e-8, "d={d}: {}", e.value);
        }
    }

    #[test]
    fn sturm_count_matches_known_matrix() {
        // tridiag(-1, 2, -1) of size 4 has eigenvalues 2 - 2cos(jπ/5)
        let diag = vec![2.0; 4];
        let off = vec![-1.0; 3];
        let want = 2.0 - 2.0 * (std::f64::consts::PI / 5.0).cos();
        assert!((lowest_tridiagonal(&diag, &off) - want).abs() < 1e-14);
        assert_eq!(count_below(&diag, &off, 2.0), 2);
    }
}
