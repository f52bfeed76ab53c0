//! Shared numerical tolerances.

/// Relative accuracy targeted by root refinement.
pub const EPS_ROOT: f64 = 1e-12;

/// Tolerance for ordering and strictness decisions.
pub const EPS_CMP: f64 = 1e-9;

/// Multiple of machine epsilon (per degree) under which a polynomial value
/// is indistinguishable from zero relative to its evaluation magnitude.
pub const ZERO_GUARD: f64 = 8.0 * f64::EPSILON;
