//! Shared numerical tolerances.

/// Absolute Hermiticity / PSD tolerance before scaling.
pub const DEFAULT: f64 = 1e-9;

/// `DEFAULT * (1 + norm)`.
pub fn scaled(norm: f64) -> f64 {
    DEFAULT * (1.0 + norm)
}
