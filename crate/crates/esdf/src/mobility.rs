//! The six-component community mobility vector.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Column order shared by every interface that names the six indices:
/// retail & recreation, grocery & pharmacy, parks, transit stations,
/// workplaces, residential.
pub const MOBILITY_NAMES: [&str; 6] = ["rr", "gp", "pa", "ts", "wp", "re"];

/// Signed fractions relative to the pre-virus baseline, one per index.
/// A zero vector is a baseline day.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(transparent)]
pub struct MobilityVector(pub [f64; 6]);

impl MobilityVector {
    pub const ZERO: MobilityVector = MobilityVector([0.0; 6]);

    pub fn new(values: [f64; 6]) -> Self {
        Self(values)
    }

    /// Validates the `[-1, 1]` bound on every component.
    pub fn validated(values: [f64; 6], context: &str) -> Result<Self> {
        for (k, &v) in values.iter().enumerate() {
            if !v.is_finite() || v.abs() > 1.0 {
                return Err(Error::OutOfRange {
                    context: format!("{context} ({})", MOBILITY_NAMES[k]),
                    value: v,
                    range: "[-1, 1]".into(),
                });
            }
        }
        Ok(Self(values))
    }

    #[inline]
    pub fn dot(&self, weights: &[f64; 6]) -> f64 {
        self.0.iter().zip(weights).map(|(a, b)| a * b).sum()
    }

    /// Componentwise mean of a non-empty slice of vectors.
    pub fn mean(vectors: &[MobilityVector]) -> MobilityVector {
        let mut acc = [0.0; 6];
        for v in vectors {
            for k in 0..6 {
                acc[k] += v.0[k];
            }
        }
        let n = vectors.len() as f64;
        for a in &mut acc {
            *a /= n;
        }
        MobilityVector(acc)
    }

    pub fn max_abs_component(&self) -> f64 {
        self.0.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

impl std::ops::Add for MobilityVector {
    type Output = MobilityVector;
    fn add(self, rhs: MobilityVector) -> MobilityVector {
        let mut out = [0.0; 6];
        for k in 0..6 {
            out[k] = self.0[k] + rhs.0[k];
        }
        MobilityVector(out)
    }
}

impl std::ops::Mul<f64> for MobilityVector {
    type Output = MobilityVector;
    fn mul(self, rhs: f64) -> MobilityVector {
        MobilityVector(self.0.map(|v| v * rhs))
    }
}
