//! Gauss–Legendre rules, composite rules over unions of intervals, and a
//! simple adaptive integrator.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Box and resolution used for spatial quadrature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSpec {
    /// Half-width `R` of the box `[-R, R]^d`; chosen from the decay of the
    /// basis when absent.
    #[serde(default)]
    pub half_width: Option<f64>,
    #[serde(default = "default_nodes")]
    pub nodes_per_cell: usize,
    #[serde(default = "default_cell")]
    pub cell_width: f64,
}

fn default_nodes() -> usize {
    32
}

fn default_cell() -> f64 {
    0.5
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { half_width: None, nodes_per_cell: default_nodes(), cell_width: default_cell() }
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, nodes ascending.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Legendre polynomial `P_n(x)` and its derivative.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * x * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre(n, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integral of `f` over `[a, b]`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
        self.nodes.iter().zip(&self.weights).map(|(&t, &w)| w * f(m + h * t)).sum::<f64>() * h
    }

    /// Nodes and weights mapped to `[a, b]`, appended to `out`.
    pub fn push_mapped(&self, a: f64, b: f64, out: &mut Vec<(f64, f64)>) {
        let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
        for (&t, &w) in self.nodes.iter().zip(&self.weights) {
            out.push((m + h * t, w * h));
        }
    }
}

/// Composite rule over a union of disjoint intervals: each interval is split
/// into cells no wider than `cell_width`.
pub fn composite(intervals: &[(f64, f64)], cell_width: f64, rule: &GaussLegendre) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for &(a, b) in intervals {
        if !(b > a) {
            continue;
        }
        let cells = ((b - a) / cell_width).ceil().max(1.0) as usize;
        let h = (b - a) / cells as f64;
        for c in 0..cells {
            let lo = a + c as f64 * h;
            let hi = if c + 1 == cells { b } else { lo + h };
            rule.push_mapped(lo, hi, &mut out);
        }
    }
    out
}

/// Merge overlapping or touching intervals, dropping empty ones.
pub fn merge_intervals(mut v: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    v.retain(|&(a, b)| b > a);
    v.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(v.len());
    for (a, b) in v {
        match out.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

/// Intersection of two sorted disjoint interval lists.
pub fn intersect_intervals(x: &[(f64, f64)], y: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < x.len() && j < y.len() {
        let a = x[i].0.max(y[j].0);
        let b = x[i].1.min(y[j].1);
        if b > a {
            out.push((a, b));
        }
        if x[i].1 < y[j].1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

pub fn total_length(v: &[(f64, f64)]) -> f64 {
    v.iter().map(|&(a, b)| (b - a).max(0.0)).sum()
}

/// Adaptive Gauss–Legendre integration by interval bisection.
pub fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    let rule = GaussLegendre::new(15);
    let whole = rule.integrate(f, a, b);
    let mut stack = vec![(a, b, whole, 0usize)];
    let mut total = 0.0;
    let mut evals = 0usize;
    let scale_tol = tol.max(1e-300);
    while let Some((lo, hi, est, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = rule.integrate(f, lo, mid);
        let right = rule.integrate(f, mid, hi);
        evals += 2;
        let refined = left + right;
        let local_tol = scale_tol * (hi - lo) / (b - a);
        if (refined - est).abs() <= local_tol.max(1e-15 * refined.abs()) || depth >= 40 {
            total += refined;
        } else {
            stack.push((lo, mid, left, depth + 1));
            stack.push((mid, hi, right, depth + 1));
        }
        if evals > 2_000_000 {
            return Err(Error::Quadrature(format!("adaptive integration on [{a}, {b}] did not reach tolerance {tol:e}")));
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let rule = GaussLegendre::new(8);
        for p in 0..16 {
            let got = rule.integrate(|x| x.powi(p), -1.0, 1.0);
            let want = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
            assert!((got - want).abs() < 1e-14, "p={p}: {got} vs {want}");
        }
    }

    #[test]
    fn weights_sum_to_two() {
        for n in [1, 2, 5, 32, 64] {
            let s: f64 = GaussLegendre::new(n).weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-13);
        }
    }

    #[test]
    fn composite_over_union() {
        let rule = GaussLegendre::new(16);
        let pts = composite(&[(-2.0, -1.0), (0.5, 3.0)], 0.5, &rule);
        let s: f64 = pts.iter().map(|&(x, w)| w * x.exp()).sum();
        let want = (-1f64).exp() - (-2f64).exp() + 3f64.exp() - 0.5f64.exp();
        assert!((s - want).abs() < 1e-12);
    }

    #[test]
    fn interval_algebra() {
        let m = merge_intervals(vec![(0.0, 1.0), (0.5, 2.0), (3.0, 4.0), (5.0, 5.0)]);
        assert_eq!(m, vec![(0.0, 2.0), (3.0, 4.0)]);
        let i = intersect_intervals(&m, &[(1.5, 3.5)]);
        assert_eq!(i, vec![(1.5, 2.0), (3.0, 3.5)]);
        assert!((total_length(&i) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn adaptive_handles_kinks() {
        let v = adaptive(&|x: f64| (1.0 - x * x).max(0.0).sqrt(), -2.0, 2.0, 1e-11).unwrap();
        assert!((v - std::f64::consts::FRAC_PI_2).abs() < 1e-9);
    }
}
