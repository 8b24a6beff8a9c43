//! Domain errors shared by every module.

use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("constant term {value:e} is below the zero tolerance")]
    ZeroConstantTerm { value: f64 },

    #[error("determinant defect {defect:e} exceeds tolerance")]
    NotUnimodular { defect: f64 },

    #[error("point at modulus {modulus} is off the unit circle")]
    OffCircle { modulus: f64 },

    #[error("l1 norm {norm} exceeds the exponential series bound {bound}")]
    DivergentNorm { norm: f64, bound: f64 },

    #[error("pair index {index} is exceptional: |1 - minus*plus| = {gap:e}")]
    ExceptionalPair { index: usize, gap: f64 },

    #[error("pair index {index} is exceptional for the square-root-free blocks: |1 + minus*plus| = {gap:e}")]
    ExceptionalPairAlt { index: usize, gap: f64 },

    /// Recursive recovery broke down at `step`; `minus`/`plus` are the values
    /// computed at that step.
    #[error("recovery hit the exceptional set at step {step} (minus = {minus}, plus = {plus})")]
    ExceptionalSet {
        step: usize,
        minus: Complex64,
        plus: Complex64,
    },

    #[error("degree mismatch at step {step}: {detail}")]
    DegreeMismatch { step: usize, detail: String },

    #[error("finite section is singular (condition estimate {condition:e})")]
    SectionSingular { condition: f64 },

    #[error("factorization did not converge: residual {residual:e}")]
    NotConverged { residual: f64 },

    #[error("constant factor has vanishing (1,1) pivot {pivot:e}")]
    ConstantNotLDU { pivot: f64 },

    #[error("shape violation: {0}")]
    ShapeViolation(String),

    #[error("logarithm is not single valued: winding number {winding}")]
    LogBranchFailure { winding: i64 },

    #[error("consistency condition violated: residual {residual:e}")]
    ConsistencyViolation { residual: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Stable machine-readable name used in CLI error reports.
    pub fn name(&self) -> &'static str {
        match self {
            Error::ZeroConstantTerm { .. } => "ZeroConstantTerm",
            Error::NotUnimodular { .. } => "NotUnimodular",
            Error::OffCircle { .. } => "OffCircle",
            Error::DivergentNorm { .. } => "DivergentNorm",
            Error::ExceptionalPair { .. } => "ExceptionalPair",
            Error::ExceptionalPairAlt { .. } => "ExceptionalPairAlt",
            Error::ExceptionalSet { .. } => "ExceptionalSet",
            Error::DegreeMismatch { .. } => "DegreeMismatch",
            Error::SectionSingular { .. } => "SectionSingular",
            Error::NotConverged { .. } => "NotConverged",
            Error::ConstantNotLDU { .. } => "ConstantNotLDU",
            Error::ShapeViolation(_) => "ShapeViolation",
            Error::LogBranchFailure { .. } => "LogBranchFailure",
            Error::ConsistencyViolation { .. } => "ConsistencyViolation",
            Error::InvalidInput(_) => "InvalidInput",
        }
    }

    /// Step or pair index carried by the error, if any.
    pub fn step(&self) -> Option<usize> {
        match self {
            Error::ExceptionalSet { step, .. } | Error::DegreeMismatch { step, .. } => Some(*step),
            Error::ExceptionalPair { index, .. } | Error::ExceptionalPairAlt { index, .. } => {
                Some(*index)
            }
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn names_are_distinct() {
        let c = Complex64::new(0.0, 0.0);
        let all = [
            Error::ZeroConstantTerm { value: 0.0 },
            Error::NotUnimodular { defect: 0.0 },
            Error::OffCircle { modulus: 0.0 },
            Error::DivergentNorm { norm: 0.0, bound: 0.0 },
            Error::ExceptionalPair { index: 0, gap: 0.0 },
            Error::ExceptionalPairAlt { index: 0, gap: 0.0 },
            Error::ExceptionalSet { step: 1, minus: c, plus: c },
            Error::DegreeMismatch { step: 1, detail: String::new() },
            Error::SectionSingular { condition: 0.0 },
            Error::NotConverged { residual: 0.0 },
            Error::ConstantNotLDU { pivot: 0.0 },
            Error::ShapeViolation(String::new()),
            Error::LogBranchFailure { winding: 1 },
            Error::ConsistencyViolation { residual: 0.0 },
            Error::InvalidInput(String::new()),
        ];
        let names: HashSet<_> = all.iter().map(Error::name).collect();
        assert_eq!(names.len(), all.len());
    }
}
