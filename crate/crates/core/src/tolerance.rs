//! Numeric comparison policies.

use serde::{Deserialize, Serialize};

/// An absolute/relative tolerance pair.
///
/// Two values `a` and `b` are close when `|a - b| <= max(abs, rel * |b|)`,
/// with `b` playing the reference role.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Tolerance { abs, rel }
    }

    /// Default policy for checking a claimed annotation result against its
    /// exact evaluation.
    pub const fn annotation() -> Self {
        Tolerance::new(1e-6, 1e-4)
    }

    /// Default policy for comparing an extracted final answer against gold.
    pub const fn answer() -> Self {
        Tolerance::new(1e-3, 1e-4)
    }

    /// `|a - b| <= max(abs, rel * |b|)` with `b` as the reference value.
    pub fn close(&self, a: f64, b: f64) -> bool {
        (a - b).abs() <= self.abs.max(self.rel * b.abs())
    }
}

/// The two tolerance policies threaded through the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Annotation check: claimed result vs exact evaluation.
    pub annotation: Tolerance,
    /// Final answer vs gold.
    pub answer: Tolerance,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            annotation: Tolerance::annotation(),
            answer: Tolerance::answer(),
        }
    }
}
