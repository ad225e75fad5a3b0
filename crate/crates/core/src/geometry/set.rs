//! Symbolic sensor sets `ω ⊂ ℝ^d` with membership, one-dimensional
//! sections and ball measures.

use super::profile::RadialFn;
use crate::error::{Error, Result};
use crate::quadrature::{adaptive, intersect_intervals, merge_intervals, total_length, GaussLegendre};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum SensorSet {
    /// The whole space.
    Full {
        d: usize,
    },
    Empty {
        d: usize,
    },
    /// `{|x| ≥ radius}`
    BallComplement {
        d: usize,
        radius: f64,
    },
    /// `⋃_{j ∈ spacing·ℤ^d} B(j, r(|j|))`
    BallLattice {
        d: usize,
        spacing: f64,
        radius: RadialFn,
    },
    /// `{(x, y) ∈ ℝ²: |y| > R(|x|)(1 - r(|x|))}`
    Wedge {
        r: RadialFn,
        big_r: RadialFn,
    },
    /// `{x: n̂·x > offset}` with `n̂ = normal/|normal|`
    HalfSpace {
        normal: Vec<f64>,
        offset: f64,
    },
    /// Union of the filled cells `lower + resolution·(i + [0,1]^d)` of a
    /// regular grid; `mask` holds one `0`/`1` per cell, last axis fastest.
    GridIndicator {
        lower: Vec<f64>,
        resolution: f64,
        shape: Vec<usize>,
        mask: String,
    },
    Union {
        parts: Vec<SensorSet>,
    },
}

/// Volume of the unit ball in `ℝ^d`.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(d - 2) * 2.0 * std::f64::consts::PI / d as f64,
    }
}

pub fn ball_volume(d: usize, r: f64) -> f64 {
    unit_ball_volume(d) * r.powi(d as i32)
}

/// Volume of `{x ∈ B(0, ρ): x_1 > s}`.
pub fn cap_volume(d: usize, rho: f64, s: f64) -> f64 {
    if s >= rho {
        return 0.0;
    }
    if s <= -rho {
        return ball_volume(d, rho);
    }
    match d {
        1 => rho - s,
        2 => {
            let th = (s / rho).acos();
            rho * rho * (th - th.sin() * th.cos())
        }
        3 => std::f64::consts::PI * (rho - s).powi(2) * (2.0 * rho + s) / 3.0,
        _ => {
            let th = (s / rho).acos();
            let rule = GaussLegendre::new(64);
            let i = rule.integrate(|t| t.sin().powi(d as i32), 0.0, th);
            unit_ball_volume(d - 1) * rho.powi(d as i32) * i
        }
    }
}

/// Volume of `B(c, ρ) ∩ B(0, L)` with `|c| = dist`.
pub fn lens_volume(d: usize, dist: f64, rho: f64, l: f64) -> f64 {
    if dist >= rho + l {
        return 0.0;
    }
    if dist <= (l - rho).abs() {
        return ball_volume(d, rho.min(l));
    }
    // radical plane at distance a from c towards the origin
    let a = (dist * dist + rho * rho - l * l) / (2.0 * dist);
    cap_volume(d, rho, a) + cap_volume(d, l, dist - a)
}

fn norm(p: &[f64]) -> f64 {
    p.iter().map(|x| x * x).sum::<f64>().sqrt()
}

impl SensorSet {
    pub fn dim(&self) -> usize {
        match self {
            SensorSet::Full { d }
            | SensorSet::Empty { d }
            | SensorSet::BallComplement { d, .. }
            | SensorSet::BallLattice { d, .. } => *d,
            SensorSet::Wedge { .. } => 2,
            SensorSet::HalfSpace { normal, .. } => normal.len(),
            SensorSet::GridIndicator { shape, .. } => shape.len(),
            SensorSet::Union { parts } => parts.first().map_or(1, |p| p.dim()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        match self {
            SensorSet::Full { d } | SensorSet::Empty { d } if *d == 0 => bad("dimension must be positive"),
            SensorSet::BallComplement { radius, .. } if !(*radius >= 0.0) => bad("ball radius must be nonnegative"),
            SensorSet::BallLattice { spacing, radius, .. } => {
                if !(*spacing > 0.0) {
                    return bad("lattice spacing must be positive");
                }
                let limit = radius.table_limit().unwrap_or(1e4);
                for i in 0..=4000 {
                    let t = limit * (i as f64 / 4000.0).powi(2);
                    let r = radius.eval(t)?;
                    if r > *spacing * (1.0 + 1e-12) || r < 0.0 {
                        return bad("lattice radii must lie in [0, spacing]");
                    }
                }
                Ok(())
            }
            SensorSet::Wedge { r, big_r } => {
                let limit = r.table_limit().unwrap_or(1e4).min(big_r.table_limit().unwrap_or(1e4));
                let (mut pr, mut pbig) = (f64::INFINITY, 0.0);
                for i in 0..=4000 {
                    let t = limit * (i as f64 / 4000.0).powi(2);
                    let (rv, bv) = (r.eval(t)?, big_r.eval(t)?);
                    if !(rv > 0.0 && rv < 1.0) || !(bv > 0.0) {
                        return bad("wedge profiles need r in (0,1) and R > 0");
                    }
                    if rv > pr + 1e-12 || bv < pbig - 1e-12 {
                        return bad("wedge profiles need r non-increasing and R non-decreasing");
                    }
                    pr = rv;
                    pbig = bv;
                }
                Ok(())
            }
            SensorSet::HalfSpace { normal, offset } => {
                if normal.is_empty() || !(norm(normal) > 0.0) || !offset.is_finite() {
                    return bad("half-space needs a nonzero normal and finite offset");
                }
                Ok(())
            }
            SensorSet::GridIndicator { lower, resolution, shape, mask } => {
                if !(*resolution > 0.0) {
                    return bad("grid resolution must be positive");
                }
                if lower.len() != shape.len() || shape.is_empty() {
                    return bad("grid lower corner and shape must have equal, positive length");
                }
                if mask.len() != shape.iter().product::<usize>() || mask.chars().any(|c| c != '0' && c != '1') {
                    return bad("grid mask must hold one 0/1 character per cell");
                }
                Ok(())
            }
            SensorSet::Union { parts } => {
                let d = self.dim();
                for p in parts {
                    p.validate()?;
                    if p.dim() != d {
                        return bad("union members must share the dimension");
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn unit_normal(normal: &[f64]) -> Vec<f64> {
        let n = norm(normal);
        normal.iter().map(|v| v / n).collect()
    }

    fn wedge_gap(r: &RadialFn, big_r: &RadialFn, x: f64) -> Result<f64> {
        Ok(big_r.eval(x.abs())? * (1.0 - r.eval(x.abs())?))
    }

    fn grid_cell(lower: &[f64], resolution: f64, shape: &[usize], p: &[f64]) -> Option<usize> {
        let mut idx = 0usize;
        for ((&lo, &n), &x) in lower.iter().zip(shape).zip(p) {
            let c = ((x - lo) / resolution).floor();
            if c < 0.0 || c >= n as f64 {
                return None;
            }
            idx = idx * n + c as usize;
        }
        Some(idx)
    }

    pub fn contains(&self, p: &[f64]) -> Result<bool> {
        Ok(match self {
            SensorSet::Full { .. } => true,
            SensorSet::Empty { .. } => false,
            SensorSet::BallComplement { radius, .. } => norm(p) >= *radius,
            SensorSet::BallLattice { d, spacing, radius } => {
                let l = *spacing;
                let base: Vec<f64> = p.iter().map(|x| (x / l).floor()).collect();
                for corner in 0..(1usize << d) {
                    let j: Vec<f64> = (0..*d).map(|i| (base[i] + ((corner >> i) & 1) as f64) * l).collect();
                    let dist = norm(&p.iter().zip(&j).map(|(a, b)| a - b).collect::<Vec<_>>());
                    if dist < radius.eval(norm(&j))? {
                        return Ok(true);
                    }
                }
                false
            }
            SensorSet::Wedge { r, big_r } => p[1].abs() > Self::wedge_gap(r, big_r, p[0])?,
            SensorSet::HalfSpace { normal, offset } => {
                let n = Self::unit_normal(normal);
                n.iter().zip(p).map(|(a, b)| a * b).sum::<f64>() > *offset
            }
            SensorSet::GridIndicator { lower, resolution, shape, mask } => {
                Self::grid_cell(lower, *resolution, shape, p).is_some_and(|i| mask.as_bytes()[i] == b'1')
            }
            SensorSet::Union { parts } => {
                for s in parts {
                    if s.contains(p)? {
                        return Ok(true);
                    }
                }
                false
            }
        })
    }

    /// `ω ∩ [lo, hi]` as sorted disjoint intervals (`d = 1`).
    pub fn intervals(&self, lo: f64, hi: f64) -> Result<Vec<(f64, f64)>> {
        if self.dim() != 1 {
            return Err(Error::Unsupported("interval sections need a one-dimensional set".into()));
        }
        let clip = |v: Vec<(f64, f64)>| merge_intervals(v.into_iter().map(|(a, b)| (a.max(lo), b.min(hi))).collect());
        Ok(match self {
            SensorSet::Full { .. } => clip(vec![(lo, hi)]),
            SensorSet::Empty { .. } => vec![],
            SensorSet::BallComplement { radius, .. } => clip(vec![(lo, -radius), (*radius, hi)]),
            SensorSet::BallLattice { spacing, radius, .. } => {
                let l = *spacing;
                let (i0, i1) = (((lo - l) / l).ceil() as i64, ((hi + l) / l).floor() as i64);
                let mut v = Vec::new();
                for i in i0..=i1 {
                    let c = i as f64 * l;
                    let r = radius.eval(c.abs())?;
                    v.push((c - r, c + r));
                }
                clip(v)
            }
            SensorSet::HalfSpace { normal, offset } => {
                if normal[0] > 0.0 {
                    clip(vec![(*offset, hi)])
                } else {
                    clip(vec![(lo, -offset)])
                }
            }
            SensorSet::GridIndicator { lower, resolution, shape, mask } => {
                let v = mask
                    .bytes()
                    .enumerate()
                    .filter(|(_, b)| *b == b'1')
                    .map(|(i, _)| {
                        let a = lower[0] + i as f64 * resolution;
                        (a, a + resolution)
                    })
                    .collect::<Vec<_>>();
                let _ = shape;
                clip(v)
            }
            SensorSet::Union { parts } => {
                let mut v = Vec::new();
                for s in parts {
                    v.extend(s.intervals(lo, hi)?);
                }
                merge_intervals(v)
            }
            SensorSet::Wedge { .. } => unreachable!(),
        })
    }

    /// Section `{y ∈ [lo, hi]: (x, y) ∈ ω}` as sorted disjoint intervals
    /// (`d = 2`).
    pub fn slice(&self, x: f64, lo: f64, hi: f64) -> Result<Vec<(f64, f64)>> {
        if self.dim() != 2 {
            return Err(Error::Unsupported("planar sections need a two-dimensional set".into()));
        }
        let clip = |v: Vec<(f64, f64)>| merge_intervals(v.into_iter().map(|(a, b)| (a.max(lo), b.min(hi))).collect());
        Ok(match self {
            SensorSet::Full { .. } => clip(vec![(lo, hi)]),
            SensorSet::Empty { .. } => vec![],
            SensorSet::BallComplement { radius, .. } => {
                if x.abs() >= *radius {
                    clip(vec![(lo, hi)])
                } else {
                    let c = (radius * radius - x * x).sqrt();
                    clip(vec![(lo, -c), (c, hi)])
                }
            }
            SensorSet::BallLattice { spacing, radius, .. } => {
                let l = *spacing;
                let mut v = Vec::new();
                let (c0, c1) = ((x / l).floor() as i64, (x / l).floor() as i64 + 1);
                let (j0, j1) = (((lo - l) / l).ceil() as i64, ((hi + l) / l).floor() as i64);
                for ci in c0..=c1 {
                    let cx = ci as f64 * l;
                    let dx = x - cx;
                    if dx.abs() >= l {
                        continue;
                    }
                    for cj in j0..=j1 {
                        let cy = cj as f64 * l;
                        let r = radius.eval((cx * cx + cy * cy).sqrt())?;
                        if r > dx.abs() {
                            let h = (r * r - dx * dx).sqrt();
                            v.push((cy - h, cy + h));
                        }
                    }
                }
                clip(v)
            }
            SensorSet::Wedge { r, big_r } => {
                let b = Self::wedge_gap(r, big_r, x)?;
                clip(vec![(lo, -b), (b, hi)])
            }
            SensorSet::HalfSpace { normal, offset } => {
                let n = Self::unit_normal(normal);
                let rest = offset - n[0] * x;
                if n[1] > 0.0 {
                    clip(vec![(rest / n[1], hi)])
                } else if n[1] < 0.0 {
                    clip(vec![(lo, rest / n[1])])
                } else if 0.0 > rest {
                    clip(vec![(lo, hi)])
                } else {
                    vec![]
                }
            }
            SensorSet::GridIndicator { lower, resolution, shape, mask } => {
                let ci = ((x - lower[0]) / resolution).floor();
                if ci < 0.0 || ci >= shape[0] as f64 {
                    return Ok(vec![]);
                }
                let row = ci as usize * shape[1];
                let v = (0..shape[1])
                    .filter(|&j| mask.as_bytes()[row + j] == b'1')
                    .map(|j| {
                        let a = lower[1] + j as f64 * resolution;
                        (a, a + resolution)
                    })
                    .collect();
                clip(v)
            }
            SensorSet::Union { parts } => {
                let mut v = Vec::new();
                for s in parts {
                    v.extend(s.slice(x, lo, hi)?);
                }
                merge_intervals(v)
            }
        })
    }

    /// `|ω ∩ B(c, ρ)|`. Closed forms for half-spaces and ball complements in
    /// any dimension, exact interval lengths in `d = 1`, adaptive quadrature
    /// over planar sections in `d = 2`.
    pub fn ball_measure(&self, c: &[f64], rho: f64) -> Result<f64> {
        let d = c.len();
        match self {
            SensorSet::Full { .. } => return Ok(ball_volume(d, rho)),
            SensorSet::Empty { .. } => return Ok(0.0),
            SensorSet::HalfSpace { normal, offset } => {
                let n = Self::unit_normal(normal);
                let s = offset - n.iter().zip(c).map(|(a, b)| a * b).sum::<f64>();
                return Ok(cap_volume(d, rho, s));
            }
            SensorSet::BallComplement { radius, .. } => {
                return Ok(ball_volume(d, rho) - lens_volume(d, norm(c), rho, *radius));
            }
            _ => {}
        }
        match d {
            1 => Ok(total_length(&self.intervals(c[0] - rho, c[0] + rho)?)),
            2 => {
                let (x0, y0) = (c[0], c[1]);
                let chord = |t: f64| -> f64 {
                    // t ∈ [-π/2, π/2] parametrises x = x0 + ρ sin t
                    let x = x0 + rho * t.sin();
                    let h = rho * t.cos();
                    match self.slice(x, y0 - h, y0 + h) {
                        Ok(v) => total_length(&v) * rho * t.cos(),
                        Err(_) => f64::NAN,
                    }
                };
                let area = ball_volume(2, rho);
                let v = adaptive(&chord, -std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2, 1e-11 * area)?;
                if !v.is_finite() {
                    return Err(Error::Quadrature("section evaluation failed inside a ball".into()));
                }
                Ok(v.clamp(0.0, area))
            }
            _ => Err(Error::Unsupported(format!("ball measures for this descriptor in dimension {d}"))),
        }
    }

    /// `dist(0, ω)`.
    pub fn dist_to_origin(&self) -> Result<f64> {
        Ok(match self {
            SensorSet::Full { .. } => 0.0,
            SensorSet::Empty { .. } => f64::INFINITY,
            SensorSet::BallComplement { radius, .. } => *radius,
            SensorSet::HalfSpace { offset, .. } => offset.max(0.0),
            SensorSet::BallLattice { d, spacing, radius } => {
                // lattice points in a growing window; radii never exceed the spacing
                let mut best = f64::INFINITY;
                let w = 8i64;
                let count = (2 * w + 1).pow(*d as u32);
                for idx in 0..count {
                    let mut rem = idx;
                    let mut j = Vec::with_capacity(*d);
                    for _ in 0..*d {
                        j.push(((rem % (2 * w + 1)) - w) as f64 * spacing);
                        rem /= 2 * w + 1;
                    }
                    let n = norm(&j);
                    let r = radius.eval(n)?;
                    if r > 0.0 {
                        best = best.min((n - r).max(0.0));
                    }
                }
                best
            }
            SensorSet::Wedge { r, big_r } => {
                // inf over t ≥ 0 of |(t, b(t))|; only t ≤ b(0) can beat t = 0
                let b0 = Self::wedge_gap(r, big_r, 0.0)?;
                let f = |t: f64| -> Result<f64> { Ok((t * t + Self::wedge_gap(r, big_r, t)?.powi(2)).sqrt()) };
                let n = 4000;
                let mut best = f(0.0)?;
                let mut best_t = 0.0;
                for i in 1..=n {
                    let t = b0 * i as f64 / n as f64;
                    let v = f(t)?;
                    if v < best {
                        best = v;
                        best_t = t;
                    }
                }
                let step = b0 / n as f64;
                let (mut a, mut b) = ((best_t - step).max(0.0), best_t + step);
                let phi = 0.5 * (5f64.sqrt() - 1.0);
                for _ in 0..100 {
                    let c = b - phi * (b - a);
                    let dd = a + phi * (b - a);
                    if f(c)? <= f(dd)? {
                        b = dd;
                    } else {
                        a = c;
                    }
                }
                best.min(f(0.5 * (a + b))?)
            }
            SensorSet::GridIndicator { lower, resolution, shape, mask } => {
                let mut best = f64::INFINITY;
                for (i, b) in mask.bytes().enumerate() {
                    if b != b'1' {
                        continue;
                    }
                    let mut rem = i;
                    let mut dist2 = 0.0;
                    for axis in (0..shape.len()).rev() {
                        let ci = rem % shape[axis];
                        rem /= shape[axis];
                        let a = lower[axis] + ci as f64 * resolution;
                        let near = 0f64.clamp(a, a + resolution);
                        dist2 += near * near;
                    }
                    best = best.min(dist2.sqrt());
                }
                best
            }
            SensorSet::Union { parts } => {
                let mut best = f64::INFINITY;
                for p in parts {
                    best = best.min(p.dist_to_origin()?);
                }
                best
            }
        })
    }

    /// Points that tend to realise the worst density margin for this
    /// descriptor, restricted to `[-half_width, half_width]^d`.
    pub fn critical_points(&self, half_width: f64) -> Vec<Vec<f64>> {
        let d = self.dim();
        let mut pts = vec![vec![0.0; d]];
        let axis_points = |r: f64, out: &mut Vec<Vec<f64>>| {
            for axis in 0..d {
                for s in [-1.0, 1.0] {
                    let mut p = vec![0.0; d];
                    p[axis] = s * r;
                    if r <= half_width {
                        out.push(p);
                    }
                }
            }
        };
        match self {
            SensorSet::BallComplement { radius, .. } => {
                for f in [0.25, 0.5, 1.0, 1.5, 2.0] {
                    axis_points(radius * f, &mut pts);
                }
            }
            SensorSet::BallLattice { spacing, .. } => {
                let l = *spacing;
                let m = ((half_width / l).floor() as i64).min(if d == 1 { 400 } else { 20 });
                let side = (2 * m + 1) as usize;
                for idx in 0..side.pow(d as u32) {
                    let mut rem = idx;
                    let mut p = Vec::with_capacity(d);
                    for _ in 0..d {
                        p.push(((rem % side) as i64 - m) as f64 * l);
                        rem /= side;
                    }
                    let half: Vec<f64> = p.iter().map(|v| v + 0.5 * l).collect();
                    if half.iter().all(|v| v.abs() <= half_width) {
                        pts.push(half);
                    }
                    pts.push(p);
                }
            }
            SensorSet::HalfSpace { normal, offset } => {
                let n = Self::unit_normal(normal);
                for t in [-4.0, -2.0, -1.0, -0.5, 0.0, 0.5, 1.0] {
                    let p: Vec<f64> = n.iter().map(|v| v * (offset + t)).collect();
                    if p.iter().all(|v| v.abs() <= half_width) {
                        pts.push(p);
                    }
                }
            }
            SensorSet::Wedge { r, big_r } => {
                for i in -20..=20 {
                    let x = half_width * i as f64 / 20.0;
                    pts.push(vec![x, 0.0]);
                    if let Ok(b) = Self::wedge_gap(r, big_r, x) {
                        if b <= half_width {
                            pts.push(vec![x, b]);
                        }
                    }
                }
            }
            SensorSet::GridIndicator { lower, resolution, shape, .. } => {
                let cells: usize = shape.iter().product();
                if cells <= 4096 {
                    for i in 0..cells {
                        let mut rem = i;
                        let mut p = vec![0.0; d];
                        for axis in (0..d).rev() {
                            p[axis] = lower[axis] + (rem % shape[axis]) as f64 * resolution;
                            rem /= shape[axis];
                        }
                        pts.push(p.clone());
                        pts.push(p.iter().map(|v| v + 0.5 * resolution).collect());
                    }
                }
            }
            SensorSet::Union { parts } => {
                for s in parts {
                    pts.extend(s.critical_points(half_width));
                }
            }
            _ => {}
        }
        pts.retain(|p| p.iter().all(|v| v.abs() <= half_width));
        pts
    }
}

/// Sensor sets from the examples of variable-density sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "which", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExampleSpec {
    /// Lattice of balls `B(j, l·w(j)^{1/d})`, `l = L/(√d + 1)`.
    BallLattice { d: usize, l: f64, w: RadialFn, window: f64 },
    /// `{|y| > R(|x|)(1 - r(|x|))}`.
    Wedge { r: RadialFn, big_r: RadialFn },
}

#[derive(Debug, Clone, Serialize)]
pub struct ExampleSet {
    pub set: SensorSet,
    /// Lattice spacing `l`, for the lattice example.
    pub spacing: Option<f64>,
    /// `Σ_j w(j)` over the truncation window.
    pub window_weight_sum: Option<f64>,
    /// Whether `Σ_j w(j) < ∞` (decided analytically for power weights).
    pub finite_measure: Option<bool>,
}

pub fn construct_example_set(spec: &ExampleSpec) -> Result<ExampleSet> {
    match spec {
        ExampleSpec::BallLattice { d, l, w, window } => {
            let d = *d;
            if d == 0 || !(*l > 0.0) {
                return Err(Error::InvalidParameter("lattice example needs d ≥ 1 and L > 0".into()));
            }
            let spacing = l / ((d as f64).sqrt() + 1.0);
            let m = (window / spacing).floor() as i64;
            let side = (2 * m + 1) as usize;
            if side.pow(d as u32) > 50_000_000 {
                return Err(Error::InvalidParameter("lattice truncation window too large".into()));
            }
            let mut sum = 0.0;
            for idx in 0..side.pow(d as u32) {
                let mut rem = idx;
                let mut n2 = 0.0;
                for _ in 0..d {
                    let c = ((rem % side) as i64 - m) as f64 * spacing;
                    n2 += c * c;
                    rem /= side;
                }
                let wv = w.eval(n2.sqrt())?;
                if !(wv > 0.0 && wv <= 1.0) {
                    return Err(Error::InvalidParameter(format!("lattice weight {wv} outside (0, 1]")));
                }
                sum += wv;
            }
            let radius = scale_profile(w, spacing, 1.0 / d as f64);
            let finite = match w {
                RadialFn::Power { exponent, .. } => Some(*exponent < -(d as f64)),
                RadialFn::Constant { .. } => Some(false),
                _ => None,
            };
            Ok(ExampleSet {
                set: SensorSet::BallLattice { d, spacing, radius },
                spacing: Some(spacing),
                window_weight_sum: Some(sum),
                finite_measure: finite,
            })
        }
        ExampleSpec::Wedge { r, big_r } => {
            let set = SensorSet::Wedge { r: r.clone(), big_r: big_r.clone() };
            set.validate()?;
            Ok(ExampleSet { set, spacing: None, window_weight_sum: None, finite_measure: None })
        }
    }
}

/// `t ↦ scale · w(t)^{power}` within the radial families.
fn scale_profile(w: &RadialFn, scale: f64, power: f64) -> RadialFn {
    match w {
        RadialFn::Constant { value } => RadialFn::Constant { value: scale * value.powf(power) },
        RadialFn::Power { coef, exponent } => RadialFn::Power { coef: scale * coef.powf(power), exponent: exponent * power },
        other => {
            // tabulate on a fine grid
            let limit = other.table_limit().unwrap_or(1e3);
            let points = (0..=4000)
                .map(|i| {
                    let t = limit * (i as f64 / 4000.0).powi(2);
                    [t, scale * other.eval(t).unwrap_or(0.0).powf(power)]
                })
                .collect();
            RadialFn::Tabulated { points }
        }
    }
}

/// Intersection of interval lists, exposed for the union/intersection
/// monotonicity checks.
pub fn intersect(a: &[(f64, f64)], b: &[(f64, f64)]) -> Vec<(f64, f64)> {
    intersect_intervals(a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn volumes() {
        assert!((unit_ball_volume(3) - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-14);
        for d in 1..=5 {
            let half = cap_volume(d, 1.3, 0.0);
            assert!((half - 0.5 * ball_volume(d, 1.3)).abs() < 1e-12, "d={d}");
        }
        // numeric branch agrees with the d = 3 closed form through d = 4 vs recursion sanity
        let v4 = cap_volume(4, 1.0, 0.3);
        assert!(v4 > 0.0 && v4 < ball_volume(4, 1.0) / 2.0);
    }

    #[test]
    fn lens_limits() {
        assert_eq!(lens_volume(2, 10.0, 1.0, 1.0), 0.0);
        assert!((lens_volume(2, 0.0, 1.0, 2.0) - std::f64::consts::PI).abs() < 1e-14);
    }

    #[test]
    fn planar_measure_matches_closed_form() {
        let bc = SensorSet::BallComplement { d: 2, radius: 1.0 };
        let closed = bc.ball_measure(&[0.7, 0.2], 1.1).unwrap();
        let as_union = SensorSet::Union { parts: vec![bc.clone()] };
        let numeric = as_union.ball_measure(&[0.7, 0.2], 1.1).unwrap();
        assert!((closed - numeric).abs() < 1e-8, "{closed} vs {numeric}");
        let hs = SensorSet::HalfSpace { normal: vec![1.0, 1.0], offset: 0.3 };
        let numeric = SensorSet::Union { parts: vec![hs.clone()] }.ball_measure(&[0.1, -0.4], 0.9).unwrap();
        assert!((hs.ball_measure(&[0.1, -0.4], 0.9).unwrap() - numeric).abs() < 1e-8);
    }

    #[test]
    fn serde_round_trip_rejects_unknown_keys() {
        let s = SensorSet::HalfSpace { normal: vec![1.0], offset: 0.0 };
        let j = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<SensorSet>(&j).unwrap(), s);
        let bad = r#"{"type":"half_space","normal":[1.0],"offset":0.0,"extra":1}"#;
        assert!(serde_json::from_str::<SensorSet>(bad).is_err());
    }
}
