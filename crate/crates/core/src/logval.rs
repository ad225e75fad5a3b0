//! Positive reals stored by their natural logarithm.

use serde::{Deserialize, Serialize};
use std::f64::consts::LN_10;

/// Values beyond this many decades are flagged as astronomical.
pub const ASTRONOMICAL_DECADES: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct LogValue {
    pub ln: f64,
}

impl LogValue {
    pub fn from_ln(ln: f64) -> Self {
        Self { ln }
    }

    pub fn from_value(v: f64) -> Self {
        Self { ln: v.ln() }
    }

    /// The plain value; `inf` once it leaves the f64 range.
    pub fn value(self) -> f64 {
        self.ln.exp()
    }

    pub fn decades(self) -> f64 {
        self.ln / LN_10
    }

    pub fn is_astronomical(self) -> bool {
        self.decades() > ASTRONOMICAL_DECADES
    }
}
