//! Numerical thresholds.
//!
//! Coefficients are complex doubles, so every exact zero test of the
//! underlying algebra becomes a comparison against one of these values.

/// Zero test for coefficients and constant terms.
pub const ZERO: f64 = 1e-10;

/// Coefficients below this may be dropped when a caller asks for pruning.
pub const PRUNE: f64 = 1e-14;

/// Exceptional-set threshold on |1 - minus*plus|.
pub const EXCEPTIONAL: f64 = 1e-8;

/// Finite sections with a larger condition estimate are treated as singular.
pub const MAX_CONDITION: f64 = 1e12;

/// Largest admissible l1 norm for the truncated exponential series.
pub const EXP_NORM_BOUND: f64 = 40.0;

/// Tail bound for the truncated exponential series.
pub const EXP_TAIL: f64 = 1e-17;

/// Positive-power residual allowed in the outer Birkhoff factor.
pub const CONVERGENCE: f64 = 1e-8;

/// Residual allowed in the consistency condition of full-loop recovery.
pub const CONSISTENCY: f64 = 1e-6;

/// Allowed bounds for user overrides of any threshold.
pub const OVERRIDE_RANGE: (f64, f64) = (1e-14, 1e-2);

/// Thresholds that can raise domain errors, bundled so callers can override
/// them per run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub exceptional: f64,
    pub zero: f64,
    pub max_condition: f64,
    pub convergence: f64,
    pub consistency: f64,
}

impl Tolerances {
    pub const DEFAULT: Tolerances = Tolerances {
        exceptional: EXCEPTIONAL,
        zero: ZERO,
        max_condition: MAX_CONDITION,
        convergence: CONVERGENCE,
        consistency: CONSISTENCY,
    };
}

impl Default for Tolerances {
    fn default() -> Self {
        Self::DEFAULT
    }
}
