//! Seeded random parameters for the verification suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fullloop::{ChiSeries, FullLoopParams};
use crate::laurent::{LaurentPoly, C64};
use crate::rootsubgroup::{ParamPair, ParamSeq};

/// Default seed for every randomized suite.
pub const DEFAULT_SEED: u64 = 0x5EED;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform point of the closed disk of radius `r`.
pub fn disk_point<R: Rng>(rng: &mut R, r: f64) -> C64 {
    let rho = r * rng.random::<f64>().sqrt();
    let theta = rng.random_range(0.0..std::f64::consts::TAU);
    C64::from_polar(rho, theta)
}

/// Pair with both coordinates in the disk of radius `r` and
/// `|1 - minus·plus| >= min_gap` (rejection sampling).
pub fn regular_pair<R: Rng>(rng: &mut R, r: f64, min_gap: f64) -> ParamPair {
    loop {
        let p = ParamPair::new(disk_point(rng, r), disk_point(rng, r));
        if p.gap().norm() >= min_gap {
            return p;
        }
    }
}

pub fn zeta_seq<R: Rng>(rng: &mut R, len: usize, r: f64, min_gap: f64) -> ParamSeq {
    ParamSeq::zeta((0..len).map(|_| regular_pair(rng, r, min_gap)).collect())
}

pub fn eta_seq<R: Rng>(rng: &mut R, len: usize, r: f64, min_gap: f64) -> ParamSeq {
    ParamSeq::eta((0..len).map(|_| regular_pair(rng, r, min_gap)).collect())
}

/// χ with coefficients in the disk of radius `r` on `-width..=width`.
pub fn chi<R: Rng>(rng: &mut R, width: i64, r: f64) -> ChiSeries {
    ChiSeries(LaurentPoly::from_terms(
        (-width..=width).map(|j| (j, disk_point(rng, r))),
    ))
}

/// Composite parameters: sequence lengths `0..=max_len`, χ on `[-3, 3]`,
/// every coordinate in the disk of radius `r`.
pub fn full_params<R: Rng>(rng: &mut R, max_len: usize, r: f64) -> FullLoopParams {
    let ne = rng.random_range(0..=max_len);
    let nz = rng.random_range(0..=max_len);
    FullLoopParams {
        etas: eta_seq(rng, ne, r, 0.1),
        chi: chi(rng, 3, r),
        zetas: zeta_seq(rng, nz, r, 0.1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_draws_repeat() {
        let a = full_params(&mut rng(DEFAULT_SEED), 4, 0.4);
        let b = full_params(&mut rng(DEFAULT_SEED), 4, 0.4);
        assert_eq!(a, b);
    }

    #[test]
    fn draws_respect_bounds() {
        let mut r = rng(7);
        for _ in 0..200 {
            let p = regular_pair(&mut r, 0.6, 0.1);
            assert!(p.minus.norm() <= 0.6 && p.plus.norm() <= 0.6);
            assert!(p.gap().norm() >= 0.1);
        }
    }
}
