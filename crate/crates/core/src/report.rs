//! Machine-readable report schema.
//!
//! Reports must be byte-identical across runs and worker counts for a fixed
//! (config, seed) pair, so every floating-point number serializes as a
//! decimal string with 17 significant digits — enough to round-trip an IEEE
//! double exactly — and maps are ordered.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

/// An f64 that serializes as a 17-significant-digit decimal string.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct F17(pub f64);

impl From<f64> for F17 {
    fn from(x: f64) -> Self {
        F17(x)
    }
}

impl fmt::Display for F17 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.16e}", self.0)
    }
}

impl Serialize for F17 {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&format!("{:.16e}", self.0))
    }
}

impl<'de> Deserialize<'de> for F17 {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse::<f64>().map(F17).map_err(serde::de::Error::custom)
    }
}

/// Library version embedded in every report.
pub fn library_version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}

/// One checked inequality with its margin (how far from violation).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckRow {
    pub name: String,
    pub passed: bool,
    /// Positive margins mean the inequality held with room to spare.
    pub margin: F17,
}

impl CheckRow {
    pub fn new(name: impl Into<String>, margin: f64) -> Self {
        CheckRow { name: name.into(), passed: margin >= 0.0, margin: F17(margin) }
    }
}
