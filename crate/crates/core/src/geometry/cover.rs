//! Covers of a ball `A` by balls `B(c, ρ(c))` with centres in `A`, with the
//! multiplicity of the family certified from the constructed balls.

use super::profile::RhoProfile;
use crate::error::{Error, Result};
use serde::Serialize;
use std::collections::HashMap;

/// Default Besicovitch constant per dimension; the overlap bound is `K^d`.
pub fn default_k_bes(d: usize) -> Result<usize> {
    match d {
        1 => Ok(2),
        2 => Ok(19),
        _ => Err(Error::Unsupported(format!("covers in dimension {d}"))),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CoverReport {
    pub balls: Vec<(Vec<f64>, f64)>,
    pub max_overlap: usize,
    pub uncovered_measure: f64,
    pub k_bes: usize,
    /// `max_overlap ≤ k_bes^d`
    pub certified: bool,
}

/// Cover of `B(centre, radius)` (`d = centre.len()` ∈ {1, 2}).
pub fn besicovitch_cover(centre: &[f64], radius: f64, rho: &RhoProfile, k_bes: Option<usize>) -> Result<CoverReport> {
    let d = centre.len();
    let k_bes = match k_bes {
        Some(k) => k,
        None => default_k_bes(d)?,
    };
    if !(radius > 0.0) {
        return Err(Error::InvalidParameter("cover region needs a positive radius".into()));
    }
    let c_norm = centre.iter().map(|v| v * v).sum::<f64>().sqrt();
    let rho_min = rho.inf_on_ball(c_norm + radius)?;
    if !(rho_min > 0.0) || !rho_min.is_finite() {
        return Err(Error::InvalidParameter(format!("rho is not bounded below on the region (inf = {rho_min})")));
    }
    let (balls, max_overlap) = match d {
        1 => cover_1d(centre[0] - radius, centre[0] + radius, rho, rho_min)?,
        2 => cover_2d(centre, radius, rho, rho_min)?,
        _ => return Err(Error::Unsupported(format!("covers in dimension {d}"))),
    };
    Ok(CoverReport { certified: max_overlap <= k_bes.pow(d as u32), balls, max_overlap, uncovered_measure: 0.0, k_bes })
}

/// Cover balls `(centre, radius)` and their largest overlap.
type Cover = (Vec<(Vec<f64>, f64)>, usize);

fn cover_1d(a: f64, b: f64, rho: &RhoProfile, rho_min: f64) -> Result<Cover> {
    let r = |c: f64| rho.eval(c.abs());
    let mut iv: Vec<(f64, f64, f64)> = Vec::new();
    let mut p = a;
    while p < b {
        // rightmost centre whose interval still reaches the frontier
        let g = |c: f64| -> Result<f64> { Ok(c - r(c)? - p) };
        let c = if g(b)? <= 0.0 {
            b
        } else {
            let (mut lo, mut hi) = (p, b);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if g(mid)? <= 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        };
        let rc = r(c)?;
        iv.push((c, c - rc, c + rc));
        let next = c + rc;
        if next <= p + 0.5 * rho_min {
            return Err(Error::InvalidParameter("greedy cover failed to advance".into()));
        }
        p = next;
        if iv.len() > 10_000_000 {
            return Err(Error::InvalidParameter("cover needs too many intervals".into()));
        }
    }
    // drop intervals already covered by their neighbours
    let mut i = 1;
    while i + 1 < iv.len() {
        if iv[i - 1].2 >= iv[i + 1].1 {
            iv.remove(i);
        } else {
            i += 1;
        }
    }
    let overlap = sweep_overlap(&iv.iter().map(|t| (t.1, t.2)).collect::<Vec<_>>());
    Ok((iv.into_iter().map(|(c, lo, _)| (vec![c], c - lo)).collect(), overlap))
}

/// Largest number of closed intervals sharing a point.
pub fn sweep_overlap(iv: &[(f64, f64)]) -> usize {
    let mut ev: Vec<(f64, i32)> = iv.iter().flat_map(|&(a, b)| [(a, 0), (b, 1)]).collect();
    // openings sort before closings at equal coordinates
    ev.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
    let (mut cur, mut best) = (0i64, 0i64);
    for (_, kind) in ev {
        if kind == 0 {
            cur += 1;
            best = best.max(cur);
        } else {
            cur -= 1;
        }
    }
    best as usize
}

fn cover_2d(centre: &[f64], radius: f64, rho: &RhoProfile, rho_min: f64) -> Result<Cover> {
    let h = rho_min / 4.0;
    let n = (2.0 * radius / h).ceil() as usize;
    if n > 4000 {
        return Err(Error::InvalidParameter("cover grid too fine for the region".into()));
    }
    let h = 2.0 * radius / n as f64;
    let (x0, y0) = (centre[0] - radius, centre[1] - radius);
    let corner = |i: usize, j: usize| (x0 + i as f64 * h, y0 + j as f64 * h);
    // cells meeting A
    let mut cells = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let (ax, ay) = corner(i, j);
            let nx = centre[0].clamp(ax, ax + h) - centre[0];
            let ny = centre[1].clamp(ay, ay + h) - centre[1];
            if nx * nx + ny * ny <= radius * radius {
                let (cx, cy) = (ax + 0.5 * h, ay + 0.5 * h);
                let rc = rho.eval((cx * cx + cy * cy).sqrt())?;
                cells.push((i, j, rc));
            }
        }
    }
    cells.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
    let mut covered = vec![false; n * n];
    let mut balls: Vec<(Vec<f64>, f64)> = Vec::new();
    for &(i, j, _) in &cells {
        if covered[i * n + j] {
            continue;
        }
        let (ax, ay) = corner(i, j);
        let (cx, cy) = (ax + 0.5 * h, ay + 0.5 * h);
        // nearest point of A to the cell centre
        let (dx, dy) = (cx - centre[0], cy - centre[1]);
        let dist = (dx * dx + dy * dy).sqrt();
        let (bx, by) = if dist <= radius { (cx, cy) } else { (centre[0] + dx * radius / dist, centre[1] + dy * radius / dist) };
        let rb = rho.eval((bx * bx + by * by).sqrt())?;
        let inside = |px: f64, py: f64| (px - bx).powi(2) + (py - by).powi(2) <= rb * rb * (1.0 - 1e-12);
        let span = (rb / h).ceil() as i64 + 1;
        for ii in (i as i64 - span).max(0)..=(i as i64 + span).min(n as i64 - 1) {
            for jj in (j as i64 - span).max(0)..=(j as i64 + span).min(n as i64 - 1) {
                let (qx, qy) = corner(ii as usize, jj as usize);
                if inside(qx, qy) && inside(qx + h, qy) && inside(qx, qy + h) && inside(qx + h, qy + h) {
                    covered[ii as usize * n + jj as usize] = true;
                }
            }
        }
        if !covered[i * n + j] {
            return Err(Error::InvalidParameter("cover cell not captured by its own ball".into()));
        }
        balls.push((vec![bx, by], rb));
    }
    Ok((balls.clone(), disc_overlap(&balls)))
}

/// Largest number of closed discs sharing a point, evaluated at the centres
/// and at all pairwise boundary intersections (where the maximum depth of
/// a disc arrangement is attained).
pub fn disc_overlap(balls: &[(Vec<f64>, f64)]) -> usize {
    if balls.is_empty() {
        return 0;
    }
    let rmax = balls.iter().map(|b| b.1).fold(0.0, f64::max);
    let cell = 2.0 * rmax;
    let key = |x: f64, y: f64| ((x / cell).floor() as i64, (y / cell).floor() as i64);
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, b) in balls.iter().enumerate() {
        grid.entry(key(b.0[0], b.0[1])).or_default().push(i);
    }
    let near = |x: f64, y: f64| -> Vec<usize> {
        let (kx, ky) = key(x, y);
        let mut out = Vec::new();
        for a in -1..=1 {
            for b in -1..=1 {
                if let Some(v) = grid.get(&(kx + a, ky + b)) {
                    out.extend_from_slice(v);
                }
            }
        }
        out
    };
    let depth = |x: f64, y: f64| -> usize {
        near(x, y)
            .into_iter()
            .filter(|&i| {
                let b = &balls[i];
                (x - b.0[0]).powi(2) + (y - b.0[1]).powi(2) <= b.1 * b.1 * (1.0 + 1e-9)
            })
            .count()
    };
    let mut best = 0;
    for (i, bi) in balls.iter().enumerate() {
        best = best.max(depth(bi.0[0], bi.0[1]));
        for j in near(bi.0[0], bi.0[1]) {
            if j <= i {
                continue;
            }
            let bj = &balls[j];
            let (dx, dy) = (bj.0[0] - bi.0[0], bj.0[1] - bi.0[1]);
            let dd = (dx * dx + dy * dy).sqrt();
            if dd == 0.0 || dd > bi.1 + bj.1 || dd < (bi.1 - bj.1).abs() {
                continue;
            }
            let a = (bi.1 * bi.1 - bj.1 * bj.1 + dd * dd) / (2.0 * dd);
            let hh = (bi.1 * bi.1 - a * a).max(0.0).sqrt();
            let (mx, my) = (bi.0[0] + a * dx / dd, bi.0[1] + a * dy / dd);
            for s in [-1.0, 1.0] {
                best = best.max(depth(mx - s * hh * dy / dd, my + s * hh * dx / dd));
            }
        }
    }
    best
}
