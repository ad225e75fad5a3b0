//! Numerical laboratory for anisotropic Shubin operators `(-Δ)^m + |x|^{2k}`:
//! Hermite–Galerkin spectra and spectral projectors, sensor-set geometry,
//! spectral-inequality bounds against exact observability ratios,
//! controllability tools for fractional Shubin and Baouendi–Grushin
//! dynamics, and large-`k` ground-state asymptotics.

// `!(x > 0.0)` is the NaN-rejecting form used for every parameter check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod anharmonic;
pub mod cli;
pub mod controllability;
pub mod error;
pub mod geometry;
pub mod hermite;
pub mod inequalities;
pub mod logval;
pub mod precise;
pub mod quadrature;
pub mod radial;
pub mod spectral_core;

pub use error::{Error, Result};
pub use logval::LogValue;
