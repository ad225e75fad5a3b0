//! Discretised Shubin operators `H_{k,m} = (-Δ)^m + |x|^{2k}`: assembly,
//! converged eigendecompositions, spectral projectors, counting functions,
//! sampled members of spectral subspaces and their norms.

use crate::error::{Error, Result};
use crate::geometry::SensorSet;
use crate::hermite;
use crate::quadrature::{composite, GaussLegendre, QuadratureSpec};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// Parameters of a discretised `H_{k,m}` on `ℝ^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralModel {
    pub k: usize,
    pub m: usize,
    pub d: usize,
    /// Initial basis size `N`; doubled until the requested eigenvalues settle.
    pub basis_size: usize,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    /// Dilation `α` of the basis `√α h_n(αx)` (`d = 1` only).
    #[serde(default = "one")]
    pub basis_scale: f64,
    #[serde(default = "default_max_basis")]
    pub max_basis: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn one() -> f64 {
    1.0
}

fn default_max_basis() -> usize {
    2048
}

fn default_tol() -> f64 {
    1e-8
}

impl SpectralModel {
    pub fn new(k: usize, m: usize, d: usize) -> Self {
        Self {
            k,
            m,
            d,
            basis_size: 64,
            quadrature: QuadratureSpec::default(),
            basis_scale: 1.0,
            max_basis: default_max_basis(),
            tol: default_tol(),
        }
    }

    /// `self` with the basis dilation balancing the position and momentum
    /// extents `E^{1/2k}` and `E^{1/2m}` at energy `energy`.
    pub fn balanced_for(mut self, energy: f64) -> Self {
        self.basis_scale = Self::balanced_scale(self.k, self.m, energy);
        self
    }

    pub fn balanced_scale(k: usize, m: usize, energy: f64) -> f64 {
        let e = energy.max(1.0);
        (e.powf(0.5 / m as f64 - 0.5 / k as f64)).sqrt()
    }

    pub fn exponents(&self) -> ExponentTriple {
        ExponentTriple::new(self.k, self.m)
    }

    pub fn is_harmonic(&self) -> bool {
        self.k == 1 && self.m == 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.m == 0 || self.d == 0 {
            return Err(Error::InvalidModel("k, m and d must be positive".into()));
        }
        if self.basis_size < 2 {
            return Err(Error::InvalidModel("basis size must be at least 2".into()));
        }
        if !(self.basis_scale > 0.0) || !self.basis_scale.is_finite() {
            return Err(Error::InvalidModel("basis scale must be positive".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidModel("tolerance must be positive".into()));
        }
        if self.d >= 2 {
            if !self.is_harmonic() {
                return Err(Error::Unsupported(
                    "d ≥ 2 eigenbases are available for k = m = 1 only; use the radial ground-state solver otherwise".into(),
                ));
            }
            if self.basis_scale != 1.0 {
                return Err(Error::Unsupported("basis dilation with d ≥ 2".into()));
            }
        }
        Ok(())
    }
}

/// `μ = k/(k+m)`, `ν = m/(k+m)`, `ζ = 1/(2k) + 1/(2m)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentTriple {
    pub mu: f64,
    pub nu: f64,
    pub zeta: f64,
}

impl ExponentTriple {
    pub fn new(k: usize, m: usize) -> Self {
        let mu = k as f64 / (k + m) as f64;
        Self { mu, nu: 1.0 - mu, zeta: 0.5 / k as f64 + 0.5 / m as f64 }
    }
}

/// Computation basis of an eigendecomposition.
#[derive(Debug, Clone, PartialEq)]
pub enum BasisKind {
    /// `√α h_n(αx)`, `n = 0, 1, …`
    Hermite { scale: f64 },
    /// Products `h_{a_1}(x_1)⋯h_{a_d}(x_d)` in the listed order.
    Product { indices: Vec<Vec<usize>> },
}

impl BasisKind {
    pub fn dim(&self) -> usize {
        match self {
            BasisKind::Hermite { .. } => 1,
            BasisKind::Product { indices } => indices.first().map_or(1, |i| i.len()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub k: usize,
    pub m: usize,
    pub d: usize,
    pub eigenvalues: Vec<f64>,
    /// Columns are orthonormal eigenvectors in the computation basis.
    pub eigenvectors: DMatrix<f64>,
    /// Eigenvalues at the previous (half) basis size.
    pub previous: Vec<f64>,
    /// Achieved maximal relative drift.
    pub convergence_tol: f64,
    pub basis_size: usize,
    pub basis: BasisKind,
    pub quadrature: QuadratureSpec,
}

impl EigenDecomposition {
    /// `|λ_j(N) - λ_j(N/2)|` for each reported eigenvalue.
    pub fn drift(&self, j: usize) -> f64 {
        (self.eigenvalues[j] - self.previous[j]).abs()
    }

    pub fn max_converged(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(f64::NEG_INFINITY)
    }
}

/// Galerkin matrix of `H_{k,m}` in the computation basis.
pub fn build_hamiltonian(model: &SpectralModel) -> Result<DMatrix<f64>> {
    model.validate()?;
    let n = model.basis_size;
    let band = 2 * model.k.max(model.m);
    if n <= band {
        return Err(Error::BasisTooSmall { n, bandwidth: band });
    }
    if model.d == 1 {
        let a = model.basis_scale;
        Ok(hermite::galerkin(n, model.k, model.m, a.powi(-2 * model.k as i32), a.powi(2 * model.m as i32)))
    } else {
        let idx = product_indices(model.d, n);
        Ok(DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(idx.len(), idx.iter().map(|i| harmonic_product_energy(i)))))
    }
}

fn harmonic_product_energy(i: &[usize]) -> f64 {
    (2 * i.iter().sum::<usize>() + i.len()) as f64
}

/// Multi-indices in shells of increasing `|a|`, complete shells, at least
/// `n` of them; lexicographic within a shell.
pub fn product_indices(d: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut shell = 0;
    while out.len() < n {
        let mut cur = vec![0; d];
        shell_members(d, shell, 0, &mut cur, &mut out);
        shell += 1;
    }
    out
}

fn shell_members(d: usize, rest: usize, pos: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if pos + 1 == d {
        cur[pos] = rest;
        out.push(cur.clone());
        return;
    }
    for a in (0..=rest).rev() {
        cur[pos] = a;
        shell_members(d, rest - a, pos + 1, cur, out);
    }
}

/// Full eigendecomposition of a symmetric matrix coupling only indices of
/// equal parity; ascending eigenvalues, eigenvector signs fixed so that the
/// largest component is positive.
pub fn diagonalize_parity(h: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = h.nrows();
    let mut pairs: Vec<(f64, Vec<(usize, f64)>)> = Vec::with_capacity(n);
    for parity in 0..2 {
        let idx: Vec<usize> = (parity..n).step_by(2).collect();
        if idx.is_empty() {
            continue;
        }
        let block = DMatrix::from_fn(idx.len(), idx.len(), |i, j| h[(idx[i], idx[j])]);
        if block.iter().enumerate().all(|(p, v)| *v == 0.0 || p % (idx.len() + 1) == 0) {
            // already diagonal: skip the solver's rescaling round-off
            for (c, &r) in idx.iter().enumerate() {
                pairs.push((block[(c, c)], vec![(r, 1.0)]));
            }
            continue;
        }
        let eig = SymmetricEigen::new(block);
        for c in 0..idx.len() {
            let col = eig.eigenvectors.column(c);
            let (mut big, mut sign) = (0.0, 1.0);
            for v in col.iter() {
                if v.abs() > big {
                    big = v.abs();
                    sign = v.signum();
                }
            }
            pairs.push((eig.eigenvalues[c], idx.iter().zip(col.iter()).map(|(&r, &v)| (r, sign * v)).collect()));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut vecs = DMatrix::zeros(n, n);
    for (c, (_, col)) in pairs.iter().enumerate() {
        for &(r, v) in col {
            vecs[(r, c)] = v;
        }
    }
    (pairs.into_iter().map(|p| p.0).collect(), vecs)
}

/// Lowest `n_wanted` eigenpairs, converged under basis doubling.
pub fn eigendecompose(model: &SpectralModel, n_wanted: usize) -> Result<EigenDecomposition> {
    model.validate()?;
    if n_wanted == 0 {
        return Err(Error::InvalidParameter("n_wanted must be positive".into()));
    }
    let band = 2 * model.k.max(model.m);
    if model.basis_size <= band {
        return Err(Error::BasisTooSmall { n: model.basis_size, bandwidth: band });
    }
    if model.d >= 2 {
        let idx = product_indices(model.d, n_wanted.max(model.basis_size));
        let vals: Vec<f64> = idx.iter().map(|i| harmonic_product_energy(i)).collect();
        let n = idx.len();
        let keep = {
            // complete the last shell so degenerate eigenvalues stay together
            let mut r = n_wanted.min(n);
            while r < n && vals[r] == vals[r - 1] {
                r += 1;
            }
            r
        };
        return Ok(EigenDecomposition {
            k: 1,
            m: 1,
            d: model.d,
            eigenvalues: vals[..keep].to_vec(),
            eigenvectors: DMatrix::identity(n, keep),
            previous: vals[..keep].to_vec(),
            convergence_tol: 0.0,
            basis_size: n,
            basis: BasisKind::Product { indices: idx },
            quadrature: model.quadrature.clone(),
        });
    }
    let mut n = model.basis_size.max(64).max(2 * n_wanted + 8);
    let solve = |n: usize| -> Result<(Vec<f64>, DMatrix<f64>)> {
        let mut mm = model.clone();
        mm.basis_size = n;
        Ok(diagonalize_parity(&build_hamiltonian(&mm)?))
    };
    if n > model.max_basis {
        return Err(Error::InvalidModel(format!("initial basis size {n} exceeds the maximal basis size {}", model.max_basis)));
    }
    let (mut prev_vals, _) = solve(n)?;
    loop {
        let big = 2 * n;
        if big > model.max_basis {
            let (last, previous) = (prev_vals[..n_wanted].to_vec(), prev_vals[..n_wanted].to_vec());
            return Err(Error::NotConverged { basis_size: n, drift: f64::NAN, tol: model.tol, last, previous });
        }
        let (vals, vecs) = solve(big)?;
        let drift =
            (0..n_wanted).map(|j| (vals[j] - prev_vals[j]).abs() / vals[j].abs().max(f64::MIN_POSITIVE)).fold(0.0, f64::max);
        if drift < model.tol {
            return Ok(EigenDecomposition {
                k: model.k,
                m: model.m,
                d: 1,
                eigenvalues: vals[..n_wanted].to_vec(),
                eigenvectors: vecs.columns(0, n_wanted).into_owned(),
                previous: prev_vals[..n_wanted].to_vec(),
                convergence_tol: drift,
                basis_size: big,
                basis: BasisKind::Hermite { scale: model.basis_scale },
                quadrature: model.quadrature.clone(),
            });
        }
        if 2 * big > model.max_basis {
            return Err(Error::NotConverged {
                basis_size: big,
                drift,
                tol: model.tol,
                last: vals[..n_wanted].to_vec(),
                previous: prev_vals[..n_wanted].to_vec(),
            });
        }
        prev_vals = vals;
        n = big;
    }
}

/// Decomposition containing every eigenvalue `≤ lambda_max` and at least
/// one beyond it.
pub fn eigendecompose_up_to(model: &SpectralModel, lambda_max: f64) -> Result<EigenDecomposition> {
    let mut n_wanted = 8;
    loop {
        let dec = eigendecompose(model, n_wanted)?;
        if dec.max_converged() > lambda_max {
            return Ok(dec);
        }
        n_wanted *= 2;
    }
}

#[derive(Debug, Clone)]
pub struct SpectralSubspace {
    pub lambda: f64,
    pub members: Vec<usize>,
    pub eigenvalues: Vec<f64>,
    /// Orthonormal columns in the computation basis.
    pub basis: DMatrix<f64>,
    pub kind: BasisKind,
    pub quadrature: QuadratureSpec,
}

impl SpectralSubspace {
    pub fn dim(&self) -> usize {
        self.members.len()
    }

    /// Whether every basis column is a coordinate unit vector (an exact
    /// eigenbasis of the harmonic oscillator).
    pub fn is_coordinate(&self) -> bool {
        self.basis.column_iter().all(|c| {
            let nz: Vec<f64> = c.iter().copied().filter(|v| *v != 0.0).collect();
            nz.len() == 1 && nz[0] == 1.0
        })
    }
}

/// `E_λ`: eigenpairs with eigenvalue `≤ lambda`. Thresholds closer to an
/// eigenvalue than its observed drift are refused; an exact tie with an
/// eigenvalue that did not move under basis doubling is included.
pub fn spectral_projector(decomp: &EigenDecomposition, lambda: f64) -> Result<SpectralSubspace> {
    let max = decomp.max_converged();
    if !(lambda < max) {
        return Err(Error::OutOfConvergedRange { lambda, max });
    }
    let mut members = Vec::new();
    for (j, &e) in decomp.eigenvalues.iter().enumerate() {
        let margin = decomp.drift(j);
        let gap = (lambda - e).abs();
        if gap <= margin && !(gap == 0.0 && margin == 0.0) {
            return Err(Error::AmbiguousThreshold { lambda, eigenvalue: e, margin });
        }
        if e <= lambda {
            members.push(j);
        }
    }
    let basis = DMatrix::from_fn(decomp.eigenvectors.nrows(), members.len(), |i, c| decomp.eigenvectors[(i, members[c])]);
    Ok(SpectralSubspace {
        lambda,
        eigenvalues: members.iter().map(|&j| decomp.eigenvalues[j]).collect(),
        members,
        basis,
        kind: decomp.basis.clone(),
        quadrature: decomp.quadrature.clone(),
    })
}

/// `N(λ) = #{eigenvalues ≤ λ}`.
pub fn counting_function(decomp: &EigenDecomposition, lambda: f64) -> Result<usize> {
    let max = decomp.max_converged();
    if !(lambda < max) {
        return Err(Error::OutOfConvergedRange { lambda, max });
    }
    Ok(decomp.eigenvalues.iter().filter(|&&e| e <= lambda).count())
}

#[derive(Debug, Clone, Serialize)]
pub struct WeylFit {
    pub exponent: f64,
    /// `c'` in `N(λ) ≈ c' λ^exponent`.
    pub constant: f64,
    pub points: usize,
}

/// Least-squares slope of `log N(λ)` against `log λ`.
pub fn weyl_fit(decomp: &EigenDecomposition, lambda_grid: &[f64]) -> Result<WeylFit> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &l in lambda_grid {
        let n = counting_function(decomp, l)?;
        if n > 0 {
            xs.push(l.ln());
            ys.push((n as f64).ln());
        }
    }
    if xs.len() < 2 {
        return Err(Error::InvalidParameter("Weyl fit needs two thresholds with N(λ) > 0".into()));
    }
    let (slope, intercept) = least_squares(&xs, &ys);
    Ok(WeylFit { exponent: slope, constant: intercept.exp(), points: xs.len() })
}

/// Slope and intercept of the least-squares line through `(x, y)`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// A member of a spectral subspace.
#[derive(Debug, Clone)]
pub struct FunctionRep {
    /// Coefficients over the subspace basis.
    pub coefficients: Vec<f64>,
    pub seed: Option<u64>,
    /// Coefficients in the computation basis.
    pub expansion: Vec<f64>,
    pub basis: BasisKind,
    pub norm: f64,
    pub quadrature: QuadratureSpec,
}

impl FunctionRep {
    pub fn from_subspace(sub: &SpectralSubspace, coefficients: Vec<f64>, seed: Option<u64>) -> Result<Self> {
        if coefficients.len() != sub.dim() {
            return Err(Error::InvalidParameter(format!(
                "{} coefficients for a subspace of dimension {}",
                coefficients.len(),
                sub.dim()
            )));
        }
        let c = nalgebra::DVector::from_column_slice(&coefficients);
        let e = &sub.basis * &c;
        Ok(Self {
            norm: c.norm(),
            coefficients,
            seed,
            expansion: e.as_slice().to_vec(),
            basis: sub.kind.clone(),
            quadrature: sub.quadrature.clone(),
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// Values at `x` (`d = 1`).
    pub fn eval_1d(&self, x: f64) -> Result<f64> {
        let BasisKind::Hermite { scale } = self.basis else {
            return Err(Error::Unsupported("pointwise evaluation of product expansions".into()));
        };
        let n = effective_len(&self.expansion);
        let mut buf = vec![0.0; n];
        hermite::values_into(scale * x, &mut buf);
        Ok(scale.sqrt() * buf.iter().zip(&self.expansion).map(|(h, c)| h * c).sum::<f64>())
    }
}

/// Index past the last coefficient that matters at double precision.
fn effective_len(c: &[f64]) -> usize {
    let big = c.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    c.iter().rposition(|v| v.abs() > 1e-18 * big).map_or(1, |i| i + 1)
}

/// Random unit-norm member of `sub`, standard-normal coefficients.
pub fn sample_subspace_function(sub: &SpectralSubspace, seed: u64) -> Result<FunctionRep> {
    if sub.dim() == 0 {
        return Err(Error::EmptySubspace);
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut c: Vec<f64> = (0..sub.dim()).map(|_| StandardNormal.sample(&mut rng)).collect();
    let n = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    c.iter_mut().for_each(|v| *v /= n);
    FunctionRep::from_subspace(sub, c, Some(seed))
}

/// Half-width of the quadrature box for expansions of length `n`.
pub fn box_half_width(spec: &QuadratureSpec, n: usize, scale: f64) -> f64 {
    spec.half_width.unwrap_or_else(|| hermite::envelope_radius(n, 1e-34) / scale)
}

/// Composite Gauss–Legendre nodes on `ω ∩ [-R, R]` (`d = 1`).
pub fn nodes_1d(set: &SensorSet, r: f64, spec: &QuadratureSpec) -> Result<Vec<(f64, f64)>> {
    let iv = set.intervals(-r, r)?;
    Ok(composite(&iv, spec.cell_width, &GaussLegendre::new(spec.nodes_per_cell)))
}

/// Square-root-weighted sample matrix `√w_q φ_i(x_q)` of the columns of
/// `basis` (rows: nodes of `ω ∩ box`), `d = 1`.
pub fn sample_matrix_1d(basis: &DMatrix<f64>, scale: f64, set: &SensorSet, spec: &QuadratureSpec) -> Result<DMatrix<f64>> {
    let n_eff = (0..basis.ncols()).map(|c| effective_len(basis.column(c).as_slice())).max().unwrap_or(1);
    let r = box_half_width(spec, n_eff, scale);
    let nodes = nodes_1d(set, r, spec)?;
    let mut phi = DMatrix::zeros(nodes.len(), n_eff);
    let mut buf = vec![0.0; n_eff];
    let sa = scale.sqrt();
    for (q, &(x, w)) in nodes.iter().enumerate() {
        hermite::values_into(scale * x, &mut buf);
        let f = w.sqrt() * sa;
        for (j, v) in buf.iter().enumerate() {
            phi[(q, j)] = f * v;
        }
    }
    Ok(phi * basis.rows(0, n_eff))
}

/// Restricted Gram matrix `∫_ω φ_i φ_j` of the columns of `basis`.
pub fn restricted_gram(basis: &DMatrix<f64>, kind: &BasisKind, set: &SensorSet, spec: &QuadratureSpec) -> Result<DMatrix<f64>> {
    if set.dim() != kind.dim() {
        return Err(Error::InvalidParameter(format!("set of dimension {} for functions on ℝ^{}", set.dim(), kind.dim())));
    }
    match kind {
        BasisKind::Hermite { scale } => {
            let s = sample_matrix_1d(basis, *scale, set, spec)?;
            Ok(s.transpose() * s)
        }
        BasisKind::Product { indices } => {
            if indices[0].len() != 2 {
                return Err(Error::Unsupported("restricted norms in dimension ≥ 3".into()));
            }
            let used: Vec<usize> = (0..basis.nrows()).filter(|&i| basis.row(i).iter().any(|v| *v != 0.0)).collect();
            let g = product_gram_2d(&used.iter().map(|&i| indices[i].clone()).collect::<Vec<_>>(), set, spec)?;
            let b = DMatrix::from_fn(used.len(), basis.ncols(), |i, c| basis[(used[i], c)]);
            Ok(b.transpose() * g * b)
        }
    }
}

/// Gram matrix of planar products `h_a(x)h_b(y)` over `ω ∩ [-R, R]²`.
fn product_gram_2d(idx: &[Vec<usize>], set: &SensorSet, spec: &QuadratureSpec) -> Result<DMatrix<f64>> {
    let p = idx.len();
    let amax = idx.iter().map(|i| i[0]).max().unwrap_or(0) + 1;
    let bmax = idx.iter().map(|i| i[1]).max().unwrap_or(0) + 1;
    let r = box_half_width(spec, amax.max(bmax), 1.0);
    let rule = GaussLegendre::new(spec.nodes_per_cell);
    let xs = composite(&[(-r, r)], spec.cell_width, &rule);
    use rayon::prelude::*;
    let parts: Vec<Result<DMatrix<f64>>> = xs
        .par_chunks(64)
        .map(|chunk| {
            let mut g = DMatrix::zeros(p, p);
            let mut hx = vec![0.0; amax];
            let mut hy = vec![0.0; bmax];
            for &(x, wx) in chunk {
                let iv = set.slice(x, -r, r)?;
                if iv.is_empty() {
                    continue;
                }
                hermite::values_into(x, &mut hx);
                let mut ymat = DMatrix::<f64>::zeros(bmax, bmax);
                for (y, wy) in composite(&iv, spec.cell_width, &rule) {
                    hermite::values_into(y, &mut hy);
                    for b in 0..bmax {
                        let t = wy * hy[b];
                        for b2 in b..bmax {
                            ymat[(b, b2)] += t * hy[b2];
                        }
                    }
                }
                for i in 0..p {
                    let (a, b) = (idx[i][0], idx[i][1]);
                    for j in i..p {
                        let (a2, b2) = (idx[j][0], idx[j][1]);
                        let y = if b <= b2 { ymat[(b, b2)] } else { ymat[(b2, b)] };
                        g[(i, j)] += wx * hx[a] * hx[a2] * y;
                    }
                }
            }
            Ok(g)
        })
        .collect();
    let mut g = DMatrix::zeros(p, p);
    for part in parts {
        g += part?;
    }
    for i in 0..p {
        for j in 0..i {
            g[(i, j)] = g[(j, i)];
        }
    }
    Ok(g)
}

/// `∫_ω |f|²`.
pub fn restricted_norm_sq(f: &FunctionRep, set: &SensorSet, spec: &QuadratureSpec) -> Result<f64> {
    let col = DMatrix::from_column_slice(f.expansion.len(), 1, &f.expansion);
    let g = restricted_gram(&col, &f.basis, set, spec)?;
    Ok(g[(0, 0)].max(0.0))
}

/// `(c₁, t, power)` in `‖e^{c₁ t ⟨x⟩^power} f‖²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightExponent {
    pub c1: f64,
    pub t: f64,
    pub power: f64,
}

/// `‖e^{c₁t⟨x⟩^power} f‖²` (`d = 1`), integrated outward until the
/// integrand is negligible.
pub fn weighted_norm_sq(f: &FunctionRep, w: WeightExponent) -> Result<f64> {
    let BasisKind::Hermite { scale } = f.basis else {
        return Err(Error::Unsupported("weighted norms in dimension ≥ 2".into()));
    };
    let n = effective_len(&f.expansion);
    let rule = GaussLegendre::new(f.quadrature.nodes_per_cell);
    let cell = f.quadrature.cell_width;
    let log_weight = |x: f64| 2.0 * w.c1 * w.t * (1.0 + x * x).sqrt().powf(w.power);
    let mut buf = vec![0.0; n];
    let mut integrand = |x: f64| -> Result<(f64, f64)> {
        let s = hermite::scaled_values_into(scale * x, &mut buf);
        let v: f64 = buf.iter().zip(&f.expansion).map(|(h, c)| h * c).sum();
        let lw = log_weight(x);
        if lw > 700.0 {
            return Err(Error::WeightOverflow { log_weight: lw, radius: x.abs() });
        }
        if v == 0.0 {
            return Ok((0.0, 0.0));
        }
        let ln_sq = 2.0 * (s + v.abs().ln());
        Ok((scale * (ln_sq + lw).exp(), scale * ln_sq.exp()))
    };
    let core = hermite::envelope_radius(n, 1e-34) / scale;
    let mut total = 0.0;
    let mut plain = 0.0;
    for dir in [-1.0, 1.0] {
        let mut a = 0.0;
        let mut quiet = 0;
        let mut prev_cell = f64::INFINITY;
        let mut rising = 0;
        loop {
            let b = a + cell;
            let (m, h) = (0.5 * (a + b), 0.5 * cell);
            let (mut c, mut u) = (0.0, 0.0);
            for (&t, &wt) in rule.nodes.iter().zip(&rule.weights) {
                let (wv, pv) = integrand(dir * (m + h * t))?;
                c += wt * h * wv;
                u += wt * h * pv;
            }
            total += c;
            plain += u;
            // below round-off the expansion no longer describes f, and its
            // Gaussian tail would be amplified by weights growing faster
            // than ⟨x⟩²; the cut is accepted while the last cell is below
            // 1e-6 of the total
            if w.power > 2.0 && u <= 1e-30 * plain {
                if c > 1e-6 * total {
                    return Err(Error::WeightOverflow { log_weight: log_weight(b), radius: b });
                }
                break;
            }
            if a > core {
                if c > prev_cell * (1.0 + 1e-12) && c > 1e-300 {
                    rising += 1;
                    if rising > 8 {
                        return Err(Error::WeightOverflow { log_weight: log_weight(b), radius: b });
                    }
                } else {
                    rising = 0;
                }
                if c <= 1e-18 * total {
                    quiet += 1;
                    if quiet >= 4 {
                        break;
                    }
                } else {
                    quiet = 0;
                }
            }
            prev_cell = c;
            a = b;
        }
    }
    Ok(total)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// `Σ_{|α|=n} (1/α!) ‖∂^α f‖²`.
pub fn derivative_norms(f: &FunctionRep, n: usize) -> Result<f64> {
    if n > 64 {
        return Err(Error::InvalidParameter(format!("derivative order {n} exceeds 64")));
    }
    match &f.basis {
        BasisKind::Hermite { scale } => {
            Ok(derivative_coefficients(&f.expansion, n, *scale).iter().map(|v| v * v).sum::<f64>() / factorial(n))
        }
        BasisKind::Product { indices } => {
            if indices[0].len() != 2 {
                return Err(Error::Unsupported("derivative norms in dimension ≥ 3".into()));
            }
            let amax = indices.iter().map(|i| i[0]).max().unwrap_or(0) + 1;
            let bmax = indices.iter().map(|i| i[1]).max().unwrap_or(0) + 1;
            let mut total = 0.0;
            for a1 in 0..=n {
                let a2 = n - a1;
                // apply ∂_x^{a1} along rows and ∂_y^{a2} along columns
                let mut c = vec![vec![0.0; bmax]; amax];
                for (i, ix) in indices.iter().enumerate() {
                    c[ix[0]][ix[1]] += f.expansion[i];
                }
                let rows: Vec<Vec<f64>> = c.iter().map(|r| derivative_coefficients(r, a2, 1.0)).collect();
                let width = bmax + a2;
                let mut s = 0.0;
                for col in 0..width {
                    let column: Vec<f64> = rows.iter().map(|r| r[col]).collect();
                    s += derivative_coefficients(&column, a1, 1.0).iter().map(|v| v * v).sum::<f64>();
                }
                total += s / (factorial(a1) * factorial(a2));
            }
            Ok(total)
        }
    }
}

/// `‖f^{(n)}‖²` (`d = 1`).
pub fn derivative_norm_plain(f: &FunctionRep, n: usize) -> Result<f64> {
    match &f.basis {
        BasisKind::Hermite { scale } => Ok(derivative_coefficients(&f.expansion, n, *scale).iter().map(|v| v * v).sum()),
        BasisKind::Product { .. } => Err(Error::Unsupported("plain derivative norms need d = 1".into())),
    }
}

fn derivative_coefficients(c: &[f64], n: usize, scale: f64) -> Vec<f64> {
    let mut v = c.to_vec();
    for _ in 0..n {
        v = hermite::differentiate(&v);
        v.iter_mut().for_each(|x| *x *= scale);
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_hamiltonian_is_diag() {
        let mut m = SpectralModel::new(1, 1, 1);
        m.basis_size = 4;
        let h = build_hamiltonian(&m).unwrap();
        assert_eq!(h, DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 3.0, 5.0, 7.0])));
        m.basis_size = 2;
        assert!(matches!(build_hamiltonian(&m), Err(Error::BasisTooSmall { .. })));
    }

    #[test]
    fn exponent_triple() {
        let e = ExponentTriple::new(1, 1);
        assert_eq!(e.mu + e.nu, 1.0);
        assert_eq!(e.zeta, 1.0);
        let e = ExponentTriple::new(2, 1);
        assert_eq!(e.mu + e.nu, 1.0);
        assert_eq!(e.zeta, 0.75);
    }

    #[test]
    fn product_shells() {
        let idx = product_indices(2, 4);
        assert_eq!(idx, vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![2, 0], vec![1, 1], vec![0, 2]]);
    }

    #[test]
    fn projector_and_counting() {
        let dec = eigendecompose(&SpectralModel::new(1, 1, 1), 10).unwrap();
        assert_eq!(spectral_projector(&dec, 4.0).unwrap().dim(), 2);
        assert_eq!(spectral_projector(&dec, 0.5).unwrap().dim(), 0);
        assert_eq!(counting_function(&dec, 6.0).unwrap(), 3);
        assert_eq!(spectral_projector(&dec, 3.0).unwrap().dim(), 2);
        assert!(matches!(counting_function(&dec, 100.0), Err(Error::OutOfConvergedRange { .. })));
    }

    #[test]
    fn ground_state_derivatives() {
        let dec = eigendecompose(&SpectralModel::new(1, 1, 1), 4).unwrap();
        let sub = spectral_projector(&dec, 2.0).unwrap();
        let f = sample_subspace_function(&sub, 1).unwrap();
        let f = FunctionRep::from_subspace(&sub, vec![1.0], None).unwrap_or(f);
        assert!((derivative_norms(&f, 0).unwrap() - 1.0).abs() < 1e-14);
        assert!((derivative_norms(&f, 1).unwrap() - 0.5).abs() < 1e-14);
        assert!((derivative_norms(&f, 2).unwrap() - 0.375).abs() < 1e-14);
        assert!((derivative_norm_plain(&f, 2).unwrap() - 0.75).abs() < 1e-14);
    }
}
