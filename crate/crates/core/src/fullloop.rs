//! Composite loops `g = g1* · diag(e^χ, e^-χ) · g2`.
//!
//! Here `g1 = build_g1(η)` and `g2 = build_g2(ζ)`. This module gives their
//! explicit triangular factors, recovers `(η, χ, ζ)` from the factorizations
//! of `g` and `g^-*`, and evaluates the determinant product formulas.
//!
//! Entry names follow the shapes `g1 = [[a1, b1], [c1*, d1*]]` and
//! `g2 = [[a2*, b2*], [c2, d2]]`.

use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laurent::{circle_grid, exp_term_count, LaurentPoly, MatrixLoop, C64};
use crate::rootsubgroup::{
    build_g1, build_g1_noroot, build_g2, build_g2_noroot, recover_eta, recover_zeta, CoeffSeries,
    ParamSeq, SeqKind,
};
use crate::tol::{self, Tolerances};
use crate::toeplitz::{hankel_det, toeplitz_det_pair, toeplitz_det_pair_shifted, triangular_factor, DetMode, TriangularFactors};

const ONE: C64 = C64::new(1.0, 0.0);

/// Finitely supported exponent `χ = Σ χ_j z^j`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ChiSeries(pub LaurentPoly);

impl ChiSeries {
    /// Strictly negative powers.
    pub fn minus(&self) -> LaurentPoly {
        self.0.minus_part()
    }

    pub fn zero_mode(&self) -> C64 {
        self.0.coeff(0)
    }

    /// Strictly positive powers.
    pub fn plus(&self) -> LaurentPoly {
        self.0.plus_part()
    }

    /// `Σ_{j>=1} j χ_j χ_{-j}`.
    pub fn cross_sum(&self) -> C64 {
        match self.0.support() {
            None => C64::new(0.0, 0.0),
            Some((lo, hi)) => (1..=hi.max(-lo))
                .map(|j| self.0.coeff(j) * self.0.coeff(-j) * j as f64)
                .sum(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FullLoopParams {
    pub etas: ParamSeq,
    pub chi: ChiSeries,
    pub zetas: ParamSeq,
}

impl FullLoopParams {
    pub fn empty() -> Self {
        FullLoopParams {
            etas: ParamSeq::eta(Vec::new()),
            chi: ChiSeries::default(),
            zetas: ParamSeq::zeta(Vec::new()),
        }
    }

    /// Largest coordinate difference over `η`, `χ` and `ζ`.
    pub fn max_diff(&self, other: &FullLoopParams) -> f64 {
        self.etas
            .max_diff(&other.etas)
            .max(self.zetas.max_diff(&other.zetas))
            .max((&self.chi.0 - &other.chi.0).max_abs())
    }

    fn check_kinds(&self) -> Result<()> {
        if self.etas.kind != SeqKind::Eta || self.zetas.kind != SeqKind::Zeta {
            return Err(Error::InvalidInput(
                "etas must have kind eta and zetas kind zeta".into(),
            ));
        }
        Ok(())
    }
}

/// Clip radius at which the truncated `e^f` is not clipped at all: the
/// series keeps `K` powers of `f`, so its support is at most `K` times that of `f`.
pub fn exp_radius(f: &LaurentPoly) -> usize {
    let width = f.support().map_or(0, |(lo, hi)| lo.abs().max(hi.abs())) as usize;
    exp_term_count(f.norm1(), tol::EXP_TAIL) * width
}

/// Truncated `e^f` with no clipping beyond the series truncation.
pub fn exp_full(f: &LaurentPoly) -> Result<LaurentPoly> {
    f.exp_series(exp_radius(f))
}

/// `diag(e^f, e^-f)`.
pub fn diag_exp(f: &LaurentPoly) -> Result<MatrixLoop> {
    Ok(MatrixLoop::diag(exp_full(f)?, exp_full(&-f)?))
}

/// `g1* · diag(e^χ, e^-χ) · g2`.
pub fn build_full(params: &FullLoopParams, tol: &Tolerances) -> Result<MatrixLoop> {
    params.check_kinds()?;
    let g1 = build_g1(&params.etas, tol)?;
    let g2 = build_g2(&params.zetas, tol)?;
    Ok(&(&g1.star() * &diag_exp(&params.chi.0)?) * &g2)
}

/// [`build_full`] with the square-root-free blocks on both sides.
pub fn build_full_noroot(params: &FullLoopParams) -> Result<MatrixLoop> {
    params.check_kinds()?;
    let g1 = build_g1_noroot(&params.etas)?;
    let g2 = build_g2_noroot(&params.zetas)?;
    Ok(&(&g1.star() * &diag_exp(&params.chi.0)?) * &g2)
}

fn reach_below(p: &LaurentPoly) -> usize {
    p.min_degree().map_or(0, |m| (-m).max(0) as usize)
}

/// Triangular factors of the composite loop in closed form.
///
/// Each side is first split on its own:
/// `g1 = [[1, 0], [y*, 1]] · diag(𝐚1, 1/𝐚1) · Φ1` with `y* = P_{<=0}(c1*/a1)`,
/// and `g2 = [[1, x*], [0, 1]] · diag(𝐚2, 1/𝐚2) · Φ2` with
/// `x* = P_{<0}(b2*/d2)`, where `Φ = [[α, β], [γ, δ]]`. The two unipotent
/// pieces and the middle exponential then combine through
/// `H = y e^{-2χ_-} + x* e^{2χ_0 + 2χ_+}`, split at `z^0`.
pub fn explicit_factors(params: &FullLoopParams, tol: &Tolerances) -> Result<TriangularFactors> {
    params.check_kinds()?;
    let g1 = build_g1(&params.etas, tol)?;
    let g2 = build_g2(&params.zetas, tol)?;

    let a1 = g1.a.coeff(0);
    let y_star = (&g1.c * &g1.a.reciprocal_series(reach_below(&g1.c))?).nonpos_part();
    let gamma1 = (&g1.c - &(&y_star * &g1.a)).scale(a1);
    let delta1 = (&g1.d - &(&y_star * &g1.b)).scale(a1);
    let alpha1 = g1.a.scale(a1.inv());
    let beta1 = g1.b.scale(a1.inv());

    let a2 = g2.d.coeff(0).inv();
    let x_star = (&g2.b * &g2.d.reciprocal_series(reach_below(&g2.b))?).minus_part();
    let gamma2 = g2.c.scale(a2);
    let delta2 = g2.d.scale(a2);
    let alpha2 = (&g2.a - &(&x_star * &g2.c)).scale(a2.inv());
    let beta2 = (&g2.b - &(&x_star * &g2.d)).scale(a2.inv());

    let chi = &params.chi;
    let (chi_m, chi_0, chi_p) = (chi.minus(), chi.zero_mode(), chi.plus());
    let e0 = chi_0.exp();
    let h = &(&y_star.star() * &exp_full(&chi_m.scale(C64::new(-2.0, 0.0)))?)
        + &(&x_star * &exp_full(&chi_p.scale(C64::new(2.0, 0.0)))?).scale(e0 * e0);

    let phi1_star = MatrixLoop::new(alpha1, beta1, gamma1, delta1).star();
    let l = &(&phi1_star * &diag_exp(&chi_m)?)
        * &MatrixLoop::upper_unipotent(h.minus_part().scale(a1.conj() * a1.conj()));

    let phi2 = MatrixLoop::new(alpha2, beta2, gamma2, delta2);
    let u = &(&MatrixLoop::upper_unipotent(h.nonneg_part().scale((e0 * a2 * e0 * a2).inv()))
        * &diag_exp(&chi_p)?)
        * &phi2;

    let d = a1.conj() * a2 * e0;
    let a0 = d.norm();
    Ok(TriangularFactors {
        l,
        m0: d / a0,
        a0,
        u,
    })
}

/// Largest number of coordinate pairs [`recover_full`] reads on each side.
pub const MAX_RECOVERED: usize = 12;

/// Pairs below this modulus at the end of a recovered sequence are dropped.
const TRIM: f64 = 1e-9;

/// Outcome of [`recover_full`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recovered {
    #[serde(flatten)]
    pub params: FullLoopParams,
    /// Coefficient residual of the consistency condition between the two
    /// scalar combinations built from `l, l'` and `u, u'`.
    pub consistency: f64,
}

fn trim(mut s: ParamSeq) -> ParamSeq {
    while s
        .pairs
        .last()
        .is_some_and(|p| p.minus.norm() < TRIM && p.plus.norm() < TRIM)
    {
        s.pairs.pop();
    }
    s
}

fn series_from(values: impl Iterator<Item = C64>, start: i64) -> CoeffSeries {
    CoeffSeries {
        start,
        values: values.collect(),
    }
}

/// Recovers `(η, χ, ζ)` from the triangular factorizations of `g` and `g^-*`.
pub fn recover_full(g: &MatrixLoop, n: usize, tol: &Tolerances) -> Result<Recovered> {
    let f = triangular_factor(g, n, tol)?;
    let fp = triangular_factor(&g.inverse_star()?, n, tol)?;
    let count = MAX_RECOVERED.min(n);

    // ζ from the bottom rows of u and u'
    let r_u = f.u.c.series_div(&f.u.d, count)?;
    let r_up = fp.u.c.series_div(&fp.u.d, count)?;
    let xi = series_from((1..=count as i64).map(|k| r_u.coeff(k)), 1);
    let xi_star = series_from((1..=count as i64).map(|k| -r_up.coeff(k).conj()), 1);
    let zetas = trim(recover_zeta(&xi, &xi_star, count, tol)?);

    // η from the first columns of l and l'
    let r_l = f.l.c.reflect().series_div(&f.l.a.reflect(), count)?;
    let r_lp = fp.l.c.reflect().series_div(&fp.l.a.reflect(), count)?;
    let psi = series_from((0..=count as i64).map(|k| r_l.coeff(k).conj()), 0);
    let psi_star = series_from((0..=count as i64).map(|k| -r_lp.coeff(k)), 0);
    let etas = trim(recover_eta(&psi, &psi_star, count + 1, tol)?);

    // the two scalar combinations, each e^{χ_- - χ_+} up to a constant
    let s_u = &(&f.u.d * &fp.u.d.star()) + &(&f.u.c * &fp.u.c.star());
    let s_l = &(&f.l.a * &fp.l.a.star()) + &(&f.l.c * &fp.l.c.star());

    let g1 = build_g1(&etas, tol)?;
    let g2 = build_g2(&zetas, tol)?;
    let a1 = g1.a.coeff(0);
    let a1p = g1.inverse_star()?.a.coeff(0);
    let a2 = g2.d.coeff(0).inv();
    let a2p = g2.inverse_star()?.d.coeff(0).inv();
    let kappa = a2 * a2p.conj() * a1.conj() * a1p;
    let consistency = (&s_u - &s_l.scale(kappa)).max_abs() / (1.0 + s_u.max_abs());
    if consistency > tol.consistency {
        return Err(Error::ConsistencyViolation {
            residual: consistency,
        });
    }

    let log = log_coefficients(&s_u)?;
    let chi_m = log.minus_part();
    let chi_p = -&log.plus_part();
    let chi_0 = (f.d() / (a1.conj() * a2)).ln();
    let chi = (&(&chi_m + &LaurentPoly::constant(chi_0)) + &chi_p).prune(tol::ZERO * 0.1);

    Ok(Recovered {
        params: FullLoopParams {
            etas,
            chi: ChiSeries(chi),
            zetas,
        },
        consistency,
    })
}

/// Fourier coefficients of a continuous logarithm of a zero-free function.
///
/// The phase is unwrapped along an equispaced grid; a nonzero winding number
/// means no single-valued logarithm exists.
fn log_coefficients(f: &LaurentPoly) -> Result<LaurentPoly> {
    let width = f.support().map_or(1, |(lo, hi)| lo.abs().max(hi.abs()) as usize);
    let m = (4 * width).max(256).next_power_of_two();
    let values: Vec<C64> = circle_grid(m).into_iter().map(|z| f.eval(z)).collect();
    if values.iter().any(|v| v.norm() == 0.0) {
        return Err(Error::LogBranchFailure { winding: 0 });
    }
    let mut phase = values[0].arg();
    let mut logs = Vec::with_capacity(m);
    logs.push(C64::new(values[0].norm().ln(), phase));
    for k in 1..=m {
        let step = (values[k % m] / values[k - 1]).arg();
        phase += step;
        if k < m {
            logs.push(C64::new(values[k].norm().ln(), phase));
        }
    }
    let winding = ((phase - values[0].arg()) / std::f64::consts::TAU).round() as i64;
    if winding != 0 {
        return Err(Error::LogBranchFailure { winding });
    }
    FftPlanner::new().plan_fft_forward(m).process(&mut logs);
    let half = (m / 2) as i64;
    let scale = 1.0 / m as f64;
    Ok(LaurentPoly::from_terms((1 - half..half).map(|n| {
        let idx = n.rem_euclid(m as i64) as usize;
        (n, logs[idx] * scale)
    })))
}

fn pair_powers(seq: &ParamSeq, exponent: impl Fn(usize) -> i32, tol: &Tolerances) -> Result<C64> {
    seq.indexed().try_fold(ONE, |acc, (i, p)| {
        let gap = p.gap();
        if gap.norm() <= tol.exceptional {
            return Err(Error::ExceptionalPair {
                index: i,
                gap: gap.norm(),
            });
        }
        Ok(acc * gap.powi(-exponent(i)))
    })
}

/// `conj(∏_i (1 - η⁻_i η⁺_i)^{-i}) · exp(2 Σ_j j χ_j χ_{-j}) · ∏_k (1 - ζ⁻_k ζ⁺_k)^{-k}`.
pub fn det_product_formula(params: &FullLoopParams, tol: &Tolerances) -> Result<C64> {
    params.check_kinds()?;
    let eta = pair_powers(&params.etas, |i| i as i32, tol)?;
    let zeta = pair_powers(&params.zetas, |k| k as i32, tol)?;
    Ok(eta.conj() * (params.chi.cross_sum() * 2.0).exp() * zeta)
}

/// Shifted formula: exponents `i + 1` on the η factors and `k - 1` on the ζ factors.
pub fn det_product_formula_shifted(params: &FullLoopParams, tol: &Tolerances) -> Result<C64> {
    params.check_kinds()?;
    let eta = pair_powers(&params.etas, |i| i as i32 + 1, tol)?;
    let zeta = pair_powers(&params.zetas, |k| k as i32 - 1, tol)?;
    Ok(eta.conj() * (params.chi.cross_sum() * 2.0).exp() * zeta)
}

/// Formula for [`build_full_noroot`]:
/// `conj(∏_i (1 + η⁻_i η⁺_i)^i) · exp(2 Σ_j j χ_j χ_{-j}) · ∏_k (1 + ζ⁻_k ζ⁺_k)^k`.
pub fn det_product_formula_noroot(params: &FullLoopParams, tol: &Tolerances) -> Result<C64> {
    params.check_kinds()?;
    let side = |seq: &ParamSeq| {
        seq.indexed().try_fold(ONE, |acc, (i, p)| {
            let gap = p.alt_gap();
            if gap.norm() <= tol.exceptional {
                return Err(Error::ExceptionalPairAlt {
                    index: i,
                    gap: gap.norm(),
                });
            }
            Ok(acc * gap.powi(i as i32))
        })
    };
    Ok(side(&params.etas)?.conj() * (params.chi.cross_sum() * 2.0).exp() * side(&params.zetas)?)
}

/// Residuals reported by [`det_factorization_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// `|section_value - formula|`.
    pub formula: f64,
    /// `|shifted_section_value - shifted_formula|`.
    pub shifted: f64,
    /// `|E(g) - E(g1*) E(diag(e^χ, e^-χ)) E(g2)|` with `E` the section value.
    pub factorization: f64,
    /// `|det(1 - B_N C_N) - section_value|`.
    pub hankel: f64,
}

/// Section values of the three factors of the composite loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorValues {
    pub g1_star: C64,
    pub middle: C64,
    pub g2: C64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetReport {
    pub formula: C64,
    pub section_value: C64,
    pub shifted_formula: C64,
    pub shifted_section_value: C64,
    pub factors: FactorValues,
    pub residuals: Residuals,
    pub mode: DetMode,
    #[serde(rename = "N")]
    pub n: usize,
}

/// Evaluates every determinant quantity at section order `N`.
pub fn det_factorization_check(
    params: &FullLoopParams,
    n: usize,
    mode: DetMode,
    tol: &Tolerances,
) -> Result<DetReport> {
    let g = build_full(params, tol)?;
    let g1s = build_g1(&params.etas, tol)?.star();
    let mid = diag_exp(&params.chi.0)?;
    let g2 = build_g2(&params.zetas, tol)?;

    let formula = det_product_formula(params, tol)?;
    let shifted_formula = det_product_formula_shifted(params, tol)?;
    let section_value = toeplitz_det_pair(&g, n, mode);
    let shifted_section_value = toeplitz_det_pair_shifted(&g, n, mode);
    let factors = FactorValues {
        g1_star: toeplitz_det_pair(&g1s, n, mode),
        middle: toeplitz_det_pair(&mid, n, mode),
        g2: toeplitz_det_pair(&g2, n, mode),
    };
    let product = factors.g1_star * factors.middle * factors.g2;
    let residuals = Residuals {
        formula: (section_value - formula).norm(),
        shifted: (shifted_section_value - shifted_formula).norm(),
        factorization: (section_value - product).norm(),
        hankel: (hankel_det(&g, n) - section_value).norm(),
    };
    Ok(DetReport {
        formula,
        section_value,
        shifted_formula,
        shifted_section_value,
        factors,
        residuals,
        mode,
        n,
    })
}
