use serde::{Deserialize, Serialize};

/// Numeric thresholds shared by every analysis.
///
/// The built-in sets have amplitudes in `{0, ±1}/√N`, so all decisions made with
/// these thresholds sit far from the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Orthogonality, support and ray-equality threshold on amplitudes.
    pub amplitude: f64,
    /// Relative singular-value cutoff for rank decisions.
    pub rank: f64,
    /// An eigenvalue below `-witness` counts as negative.
    pub witness: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            amplitude: 1e-9,
            rank: 1e-8,
            witness: 1e-9,
        }
    }
}
