//! Root subgroup coordinates, triangular factorization and block Toeplitz
//! determinants for SL(2,C) loops with finite Fourier series.
//!
//! Layers, bottom up:
//!
//! * [`laurent`]: Laurent polynomials and 2×2 matrix loops.
//! * [`rootsubgroup`]: loops built from coordinate pairs and the recursive recovery of those pairs.
//! * [`toeplitz`]: finite sections, Birkhoff and triangular factorization, determinants.
//! * [`fullloop`]: the composite loops `g1* · diag(e^χ, e^-χ) · g2` and their determinant formulas.
//! * [`cli`]: the batch command line front end.

pub mod cli;
pub mod error;
pub mod fullloop;
pub mod laurent;
pub mod rootsubgroup;
pub mod sample;
pub mod suites;
pub mod toeplitz;
pub mod tol;

pub use error::{Error, Result};
pub use laurent::{LaurentPoly, Mat2, MatrixLoop, C64};
pub use tol::Tolerances;
pub use toeplitz::{DetMode, TriangularFactors};
pub use rootsubgroup::{ParamPair, ParamSeq, SeqKind, CoeffSeries};
pub use fullloop::{ChiSeries, FullLoopParams};
