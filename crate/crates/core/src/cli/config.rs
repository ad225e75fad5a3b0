//! Experiment configurations: the JSON envelope and the typed parameters of
//! every command. Unknown keys are rejected throughout.

use crate::controllability::parse_rational;
use crate::error::{Error, Result};
use crate::geometry::{DensityProfile, ExampleSpec, RhoProfile, SampleSpec, SensorSet};
use crate::spectral_core::SpectralModel;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
#[value(rename_all = "kebab-case")]
pub enum Command {
    Eig,
    Projector,
    Geometry,
    VerifyIneq,
    Calibrate,
    ObsConst,
    Hum,
    Grushin,
    Asymptotics,
}

impl Command {
    pub fn default_format(self) -> Format {
        match self {
            Command::Eig => Format::Csv,
            _ => Format::Json,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    #[serde(default = "empty_object")]
    pub params: Value,
    #[serde(default = "no_output")]
    pub output: OutputSpec,
    #[serde(default)]
    pub seed: u64,
}

fn empty_object() -> Value {
    Value::Object(Default::default())
}

fn no_output() -> OutputSpec {
    OutputSpec { path: None, format: None }
}

impl ExperimentConfig {
    pub fn format(&self) -> Format {
        self.output.format.unwrap_or(self.command.default_format())
    }

    pub fn parse_params<T: for<'de> Deserialize<'de>>(&self) -> Result<T> {
        serde_json::from_value(self.params.clone()).map_err(|e| Error::InvalidParameter(format!("params: {e}")))
    }
}

/// A rational given either as a JSON number or as a `p/q` / decimal string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RationalInput {
    Number(f64),
    Text(String),
}

impl RationalInput {
    pub fn exact(&self) -> Result<Ratio<i64>> {
        match self {
            // the shortest round-trip decimal of the number
            RationalInput::Number(x) => parse_rational(&format!("{x}")),
            RationalInput::Text(t) => parse_rational(t),
        }
    }

    pub fn value(&self) -> Result<f64> {
        let r = self.exact()?;
        Ok(*r.numer() as f64 / *r.denom() as f64)
    }
}

/// A real parameter that also accepts `p/q` text.
fn real<'de, D: serde::Deserializer<'de>>(de: D) -> std::result::Result<f64, D::Error> {
    match RationalInput::deserialize(de)? {
        RationalInput::Number(x) => Ok(x),
        text => text.value().map_err(serde::de::Error::custom),
    }
}

fn real_opt<'de, D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Option<f64>, D::Error> {
    real(de).map(Some)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigParams {
    pub k: usize,
    pub m: usize,
    pub d: usize,
    pub n: usize,
    #[serde(default)]
    pub basis_size: Option<usize>,
    #[serde(default)]
    pub basis_scale: Option<f64>,
    #[serde(default)]
    pub tol: Option<f64>,
}

impl EigParams {
    pub fn model(&self) -> SpectralModel {
        let mut m = SpectralModel::new(self.k, self.m, self.d);
        if let Some(n) = self.basis_size {
            m.basis_size = n;
        }
        if let Some(s) = self.basis_scale {
            m.basis_scale = s;
        }
        if let Some(t) = self.tol {
            m.tol = t;
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProjectorParams {
    pub k: usize,
    pub m: usize,
    pub d: usize,
    pub lambda: f64,
    /// Fractional power: the threshold applies to `H^s`.
    #[serde(default, deserialize_with = "real_opt")]
    pub s: Option<f64>,
    #[serde(default)]
    pub basis_scale: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GeometryParams {
    Density {
        set: SensorSet,
        profile: DensityProfile,
        #[serde(default)]
        sample: Option<SampleSpec>,
    },
    Thickness {
        set: SensorSet,
        theta: f64,
        #[serde(rename = "L")]
        l: f64,
        #[serde(default)]
        sample: Option<SampleSpec>,
    },
    Cover {
        centre: Vec<f64>,
        radius: f64,
        rho: RhoProfile,
        #[serde(default)]
        k_bes: Option<usize>,
    },
    Example {
        example: ExampleSpec,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyParams {
    #[serde(default)]
    pub model: Option<SpectralModel>,
    #[serde(default)]
    pub profile: Option<DensityProfile>,
    #[serde(default)]
    pub set: Option<SensorSet>,
    #[serde(default)]
    pub lambdas: Option<Vec<f64>>,
    /// Battery file verified case by case instead of a single model.
    #[serde(default)]
    pub battery: Option<String>,
    /// Calibration table produced by `calibrate`; defaults otherwise.
    #[serde(default)]
    pub calibration: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BernsteinSpec {
    pub k: usize,
    pub m: usize,
    pub lambdas: Vec<f64>,
    pub n_max: usize,
    pub deltas: Vec<f64>,
    #[serde(default = "one")]
    pub c: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrateParams {
    pub battery: String,
    #[serde(default)]
    pub bernstein: Option<BernsteinSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ObsParams {
    Constant {
        d0: f64,
        d1: f64,
        eta: f64,
        #[serde(rename = "T")]
        t: f64,
        #[serde(default = "one")]
        c1: f64,
        #[serde(default = "one")]
        c2: f64,
        #[serde(default = "one")]
        c3: f64,
    },
    ShubinRegime {
        k: usize,
        m: usize,
        s: RationalInput,
        profile: DensityProfile,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HumParams {
    #[serde(default = "one_usize")]
    pub k: usize,
    #[serde(default = "one_usize")]
    pub m: usize,
    pub dim: usize,
    pub set: SensorSet,
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(default = "one", deserialize_with = "real")]
    pub s: f64,
    /// Explicit initial coefficients; random unit data from the seed otherwise.
    #[serde(default)]
    pub f0: Option<Vec<f64>>,
    #[serde(default = "one_usize")]
    pub samples: usize,
    #[serde(default = "four")]
    pub time_cells: usize,
}

fn one_usize() -> usize {
    1
}

fn four() -> usize {
    4
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GrushinOp {
    Regimes {
        gamma: u32,
        s: RationalInput,
    },
    Spectrum {
        gamma: u32,
        #[serde(deserialize_with = "real")]
        s: f64,
        #[serde(default = "one_usize")]
        d: usize,
        n: Vec<i64>,
        #[serde(default = "five")]
        levels: usize,
    },
    Scaling {
        gamma: u32,
        r: f64,
        #[serde(default = "default_scaling_basis")]
        basis_size: usize,
        #[serde(default = "default_block")]
        block: usize,
    },
    Witness {
        gamma: u32,
        #[serde(deserialize_with = "real")]
        s: f64,
        #[serde(default = "one_usize")]
        d: usize,
        #[serde(rename = "L_dist")]
        l_dist: f64,
        #[serde(rename = "T")]
        t: f64,
        eps: f64,
        n_max: usize,
    },
    Times {
        gamma: u32,
        #[serde(default = "one_usize")]
        d: usize,
        dist: f64,
        #[serde(default)]
        theta: Option<f64>,
        #[serde(default, rename = "L")]
        l: Option<f64>,
        #[serde(default = "one")]
        c_gamma: f64,
        #[serde(default)]
        eps: Option<f64>,
    },
    Probe {
        set: SensorSet,
        #[serde(deserialize_with = "real")]
        s: f64,
        t: f64,
        #[serde(rename = "L")]
        l: f64,
        x0: Vec<f64>,
        #[serde(default = "default_probe_box")]
        box_half_width: f64,
    },
}

fn five() -> usize {
    5
}

fn default_scaling_basis() -> usize {
    320
}

fn default_block() -> usize {
    24
}

fn default_probe_box() -> f64 {
    30.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case", deny_unknown_fields)]
pub enum AsymptoticsOp {
    Dirichlet {
        d: usize,
    },
    Ground {
        k: usize,
        #[serde(default = "one_usize")]
        d: usize,
    },
    Bracket {
        k: usize,
        #[serde(default = "one_usize")]
        d: usize,
        eps: f64,
    },
    Study {
        k_grid: Vec<usize>,
        #[serde(default = "one_usize")]
        d: usize,
        #[serde(default = "tenth")]
        eps: f64,
    },
    Coupling {
        couplings: Vec<f64>,
        #[serde(default = "one_usize")]
        d: usize,
    },
    Series {
        k_grid: Vec<usize>,
        #[serde(default = "one_usize")]
        d: usize,
        terms: usize,
    },
}

fn tenth() -> f64 {
    0.1
}
