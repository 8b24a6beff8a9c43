//! Loops built from root subgroup coordinates, and the inverse recovery.
//!
//! A ζ-sequence `(ζ_1, .., ζ_n)` produces
//! `g2 = 𝐚(ζ_n)[[1, ζ⁻_n z^-n], [ζ⁺_n z^n, 1]] ⋯ 𝐚(ζ_1)[[1, ζ⁻_1 z^-1], [ζ⁺_1 z, 1]]`
//! and an η-sequence `(η_0, .., η_n)` produces
//! `g1 = 𝐚(η_n)[[1, η⁺_n z^n], [η⁻_n z^-n, 1]] ⋯ 𝐚(η_0)[[1, η⁺_0], [η⁻_0, 1]]`,
//! with `𝐚(ζ) = (1 - ζ⁻ζ⁺)^{-1/2}` on the principal branch. The highest index
//! is always the leftmost factor.
//!
//! Recovery reads the coordinates back from Taylor coefficients of entry
//! ratios, one index at a time. At step `k` the partial loop built from the
//! coordinates found so far is expanded again, and the difference of the two
//! `k`-th coefficients isolates the new coordinate up to the accumulated
//! product `∏_{s<k}(1 - ζ⁻_s ζ⁺_s)`.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::laurent::{LaurentPoly, MatrixLoop, C64};
use crate::tol::Tolerances;

const ONE: C64 = C64::new(1.0, 0.0);

/// One coordinate pair `(ζ⁻, ζ⁺)` or `(η⁻, η⁺)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ParamPair {
    pub minus: C64,
    pub plus: C64,
}

impl ParamPair {
    pub fn new(minus: C64, plus: C64) -> Self {
        ParamPair { minus, plus }
    }

    /// `1 - minus·plus`.
    pub fn gap(&self) -> C64 {
        ONE - self.minus * self.plus
    }

    /// `1 + minus·plus`, the block diagonal of the square-root-free variant.
    pub fn alt_gap(&self) -> C64 {
        ONE + self.minus * self.plus
    }

    pub fn is_regular(&self, tol: &Tolerances) -> bool {
        self.gap().norm() > tol.exceptional
    }

    fn dist(&self, other: &ParamPair) -> f64 {
        (self.minus - other.minus)
            .norm()
            .max((self.plus - other.plus).norm())
    }
}

impl Serialize for ParamPair {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.minus.re, self.minus.im, self.plus.re, self.plus.im].serialize(s)
    }
}

impl<'de> Deserialize<'de> for ParamPair {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [a, b, c, e] = <[f64; 4]>::deserialize(d)?;
        Ok(ParamPair::new(C64::new(a, b), C64::new(c, e)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SeqKind {
    /// Indices `0..n`, powers `z^i` in the upper corner.
    Eta,
    /// Indices `1..n`, powers `z^-k` in the upper corner.
    Zeta,
}

/// Finite coordinate sequence. For `Zeta`, `pairs[k-1]` is `ζ_k`; for `Eta`,
/// `pairs[i]` is `η_i`. Square roots always use the principal branch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSeq {
    pub kind: SeqKind,
    pub pairs: Vec<ParamPair>,
}

impl ParamSeq {
    pub fn zeta(pairs: Vec<ParamPair>) -> Self {
        ParamSeq { kind: SeqKind::Zeta, pairs }
    }

    pub fn eta(pairs: Vec<ParamPair>) -> Self {
        ParamSeq { kind: SeqKind::Eta, pairs }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Coordinate index of `pairs[pos]`.
    pub fn index_of(&self, pos: usize) -> usize {
        match self.kind {
            SeqKind::Zeta => pos + 1,
            SeqKind::Eta => pos,
        }
    }

    /// `(index, pair)` in ascending index order.
    pub fn indexed(&self) -> impl Iterator<Item = (usize, &ParamPair)> + '_ {
        self.pairs.iter().enumerate().map(|(p, q)| (self.index_of(p), q))
    }

    /// Largest coordinate difference, padding the shorter sequence with zeros.
    pub fn max_diff(&self, other: &ParamSeq) -> f64 {
        let n = self.len().max(other.len());
        (0..n)
            .map(|i| {
                let a = self.pairs.get(i).copied().unwrap_or_default();
                let b = other.pairs.get(i).copied().unwrap_or_default();
                a.dist(&b)
            })
            .fold(0.0, f64::max)
    }

    /// `∏ 𝐚(pair)` over the sequence.
    pub fn a_product(&self, tol: &Tolerances) -> Result<C64> {
        self.indexed()
            .try_fold(ONE, |acc, (i, p)| Ok(acc * a_factor_at(p, i, tol)?))
    }

    fn expect(&self, kind: SeqKind) -> Result<()> {
        if self.kind == kind {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!(
                "expected a {kind:?} sequence, got {:?}",
                self.kind
            )))
        }
    }
}

/// Taylor coefficients `values[k] = f_{start+k}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffSeries {
    pub start: i64,
    pub values: Vec<C64>,
}

impl CoeffSeries {
    pub fn get(&self, n: i64) -> C64 {
        let k = n - self.start;
        if k < 0 {
            return C64::new(0.0, 0.0);
        }
        self.values.get(k as usize).copied().unwrap_or_default()
    }

    pub fn zeros(start: i64, len: usize) -> Self {
        CoeffSeries {
            start,
            values: vec![C64::new(0.0, 0.0); len],
        }
    }
}

/// `(1 - minus·plus)^{-1/2}`, principal branch.
pub fn a_factor(pair: &ParamPair, tol: &Tolerances) -> Result<C64> {
    a_factor_at(pair, 0, tol)
}

fn a_factor_at(pair: &ParamPair, index: usize, tol: &Tolerances) -> Result<C64> {
    let gap = pair.gap();
    if gap.norm() <= tol.exceptional {
        return Err(Error::ExceptionalPair {
            index,
            gap: gap.norm(),
        });
    }
    Ok(gap.sqrt().inv())
}

fn elementary(tl: C64, upper: LaurentPoly, lower: LaurentPoly, br: C64) -> MatrixLoop {
    MatrixLoop::new(
        LaurentPoly::constant(tl),
        upper,
        lower,
        LaurentPoly::constant(br),
    )
}

/// `𝐚(ζ)[[1, ζ⁻ z^-k], [ζ⁺ z^k, 1]]`.
pub fn zeta_block(pair: &ParamPair, k: usize, tol: &Tolerances) -> Result<MatrixLoop> {
    let a = a_factor_at(pair, k, tol)?;
    let k = k as i64;
    Ok(elementary(
        a,
        LaurentPoly::monomial(a * pair.minus, -k),
        LaurentPoly::monomial(a * pair.plus, k),
        a,
    ))
}

/// `𝐚(η)[[1, η⁺ z^i], [η⁻ z^-i, 1]]`.
pub fn eta_block(pair: &ParamPair, i: usize, tol: &Tolerances) -> Result<MatrixLoop> {
    let a = a_factor_at(pair, i, tol)?;
    let i = i as i64;
    Ok(elementary(
        a,
        LaurentPoly::monomial(a * pair.plus, i),
        LaurentPoly::monomial(a * pair.minus, -i),
        a,
    ))
}

fn ordered_product(
    seq: &ParamSeq,
    block: impl Fn(&ParamPair, usize) -> Result<MatrixLoop>,
) -> Result<MatrixLoop> {
    let mut g = MatrixLoop::identity();
    for (i, p) in seq.indexed().collect::<Vec<_>>().into_iter().rev() {
        g = &g * &block(p, i)?;
    }
    Ok(g)
}

/// Ordered product of ζ-blocks, highest index leftmost.
pub fn build_g2(zetas: &ParamSeq, tol: &Tolerances) -> Result<MatrixLoop> {
    zetas.expect(SeqKind::Zeta)?;
    ordered_product(zetas, |p, k| zeta_block(p, k, tol))
}

/// Ordered product of η-blocks, highest index leftmost.
pub fn build_g1(etas: &ParamSeq, tol: &Tolerances) -> Result<MatrixLoop> {
    etas.expect(SeqKind::Eta)?;
    ordered_product(etas, |p, i| eta_block(p, i, tol))
}

/// Square-root-free ζ-blocks `[[1 + ζ⁻ζ⁺, ζ⁻ z^-k], [ζ⁺ z^k, 1]]`, each of
/// determinant one and polynomial in the coordinates.
pub fn build_g2_noroot(zetas: &ParamSeq) -> Result<MatrixLoop> {
    zetas.expect(SeqKind::Zeta)?;
    ordered_product(zetas, |p, k| {
        let k = k as i64;
        Ok(elementary(
            p.alt_gap(),
            LaurentPoly::monomial(p.minus, -k),
            LaurentPoly::monomial(p.plus, k),
            ONE,
        ))
    })
}

/// η analogue of [`build_g2_noroot`]: blocks `[[1 + η⁻η⁺, η⁺ z^i], [η⁻ z^-i, 1]]`.
pub fn build_g1_noroot(etas: &ParamSeq) -> Result<MatrixLoop> {
    etas.expect(SeqKind::Eta)?;
    ordered_product(etas, |p, i| {
        let i = i as i64;
        Ok(elementary(
            p.alt_gap(),
            LaurentPoly::monomial(p.plus, i),
            LaurentPoly::monomial(p.minus, -i),
            ONE,
        ))
    })
}

/// Bottom row `(γ, δ)` of `∏_{k=n..1} [[1, ζ⁻_k z^-k], [ζ⁺_k z^k, 1]]`
/// through order `N`, by direct enumeration of alternating index chains.
///
/// `γ` collects chains `i_1 < j_1 < … < j_r < i_{r+1}` weighted by
/// `ζ⁺_{i_1} ζ⁻_{j_1} ⋯ ζ⁺_{i_{r+1}}` at `z^{Σi - Σj}`; `δ` collects chains
/// `j_1 < i_1 < … < i_r` likewise. No matrix products are formed. The cost is
/// exponential in the sequence length.
pub fn gamma_delta_oracle(zetas: &ParamSeq, order: usize) -> Result<(LaurentPoly, LaurentPoly)> {
    zetas.expect(SeqKind::Zeta)?;
    let n = zetas.len();
    if n > 24 {
        return Err(Error::InvalidInput(format!(
            "enumeration over {n} indices is too large"
        )));
    }
    let mut gamma = Vec::new();
    let mut delta = Vec::new();
    for mask in 0u32..(1u32 << n) {
        // ascending indices in the chain
        let chain: Vec<usize> = (0..n).filter(|b| mask & (1 << b) != 0).collect();
        let odd = chain.len() % 2 == 1;
        let mut weight = ONE;
        let mut degree = 0i64;
        for (pos, &b) in chain.iter().enumerate() {
            let pair = &zetas.pairs[b];
            let k = (b + 1) as i64;
            // γ starts with a plus coordinate, δ with a minus one
            if (pos % 2 == 0) == odd {
                weight *= pair.plus;
                degree += k;
            } else {
                weight *= pair.minus;
                degree -= k;
            }
        }
        if degree as usize > order {
            continue;
        }
        if odd {
            gamma.push((degree, weight));
        } else {
            delta.push((degree, weight));
        }
    }
    Ok((LaurentPoly::from_terms(gamma), LaurentPoly::from_terms(delta)))
}

fn forward_series(num: &LaurentPoly, den: &LaurentPoly, start: i64, order: usize) -> Result<CoeffSeries> {
    if num.min_degree().is_some_and(|m| m < 0) || den.min_degree().is_some_and(|m| m < 0) {
        return Err(Error::ShapeViolation(
            "ratio series needs entries without negative powers".into(),
        ));
    }
    let q = num.series_div(den, order)?;
    Ok(CoeffSeries {
        start,
        values: (start..=order as i64).map(|n| q.coeff(n)).collect(),
    })
}

/// Coefficients `ξ_1..ξ_N` of `c/d`.
pub fn taylor_ratio_bottom(g: &MatrixLoop, order: usize) -> Result<CoeffSeries> {
    forward_series(&g.c, &g.d, 1, order)
}

/// Coefficients `ξ*_1..ξ*_N` of `b/a` at `z^-1..z^-N`.
pub fn taylor_ratio_top(g: &MatrixLoop, order: usize) -> Result<CoeffSeries> {
    forward_series(&g.b.reflect(), &g.a.reflect(), 1, order)
}

/// Coefficients `ψ_0..ψ_N` of `b/a`.
pub fn taylor_ratio_upper(g: &MatrixLoop, order: usize) -> Result<CoeffSeries> {
    forward_series(&g.b, &g.a, 0, order)
}

/// Coefficients `ψ*_0..ψ*_N` of `c/d` at `z^0..z^-N`.
pub fn taylor_ratio_lower(g: &MatrixLoop, order: usize) -> Result<CoeffSeries> {
    forward_series(&g.c.reflect(), &g.d.reflect(), 0, order)
}

/// `(ξ, ξ*)` through order `N` for a loop of the ζ shape.
pub fn zeta_series(g: &MatrixLoop, order: usize) -> Result<(CoeffSeries, CoeffSeries)> {
    Ok((taylor_ratio_bottom(g, order)?, taylor_ratio_top(g, order)?))
}

/// `(ψ, ψ*)` through order `N` for a loop of the η shape.
pub fn eta_series(g: &MatrixLoop, order: usize) -> Result<(CoeffSeries, CoeffSeries)> {
    Ok((taylor_ratio_upper(g, order)?, taylor_ratio_lower(g, order)?))
}

fn check_gap(step: usize, pair: ParamPair, tol: &Tolerances) -> Result<ParamPair> {
    if pair.gap().norm() <= tol.exceptional {
        return Err(Error::ExceptionalSet {
            step,
            minus: pair.minus,
            plus: pair.plus,
        });
    }
    Ok(pair)
}

/// Recovers `ζ_1..ζ_n` from `ξ` (coefficients of `c/d`) and `ξ*` (coefficients
/// of `b/a` at negative powers).
pub fn recover_zeta(xi: &CoeffSeries, xi_star: &CoeffSeries, n: usize, tol: &Tolerances) -> Result<ParamSeq> {
    let mut rec = ParamSeq::zeta(Vec::new());
    let mut acc = ONE;
    for k in 1..=n {
        let partial = build_g2(&rec, tol)?;
        let (pxi, pxs) = zeta_series(&partial, k)?;
        let kk = k as i64;
        let pair = ParamPair::new(
            (xi_star.get(kk) - pxs.get(kk)) / acc,
            (xi.get(kk) - pxi.get(kk)) / acc,
        );
        let pair = check_gap(k, pair, tol)?;
        acc *= pair.gap();
        rec.pairs.push(pair);
    }
    Ok(rec)
}

/// Recovers `η_0..η_{len-1}` from `ψ` (coefficients of `b/a`) and `ψ*`
/// (coefficients of `c/d` at non-positive powers).
pub fn recover_eta(psi: &CoeffSeries, psi_star: &CoeffSeries, len: usize, tol: &Tolerances) -> Result<ParamSeq> {
    let mut rec = ParamSeq::eta(Vec::new());
    let mut acc = ONE;
    for i in 0..len {
        let partial = build_g1(&rec, tol)?;
        let (pps, ppss) = eta_series(&partial, i)?;
        let ii = i as i64;
        let pair = ParamPair::new(
            (psi_star.get(ii) - ppss.get(ii)) / acc,
            (psi.get(ii) - pps.get(ii)) / acc,
        );
        let pair = check_gap(i, pair, tol)?;
        acc *= pair.gap();
        rec.pairs.push(pair);
    }
    Ok(rec)
}

/// Recovery for [`build_g2_noroot`] loops.
///
/// Here `ζ⁺_k` appears in `ξ_k` with coefficient one, while the `ξ*_k`
/// residual equals `ζ⁻_k/(1 + ζ⁻_kζ⁺_k)` divided by `∏_{s<k}(1 + ζ⁻_sζ⁺_s)²`.
pub fn recover_zeta_noroot(xi: &CoeffSeries, xi_star: &CoeffSeries, n: usize, tol: &Tolerances) -> Result<ParamSeq> {
    let mut rec = ParamSeq::zeta(Vec::new());
    let mut acc = ONE;
    for k in 1..=n {
        let partial = build_g2_noroot(&rec)?;
        let (pxi, pxs) = zeta_series(&partial, k)?;
        let kk = k as i64;
        let plus = xi.get(kk) - pxi.get(kk);
        let r = (xi_star.get(kk) - pxs.get(kk)) * acc * acc;
        let denom = ONE - r * plus;
        if denom.norm() <= tol.exceptional {
            return Err(Error::ExceptionalSet {
                step: k,
                minus: r,
                plus,
            });
        }
        let pair = ParamPair::new(r / denom, plus);
        acc *= pair.alt_gap();
        rec.pairs.push(pair);
    }
    Ok(rec)
}

/// Recovers the ζ-coordinates by peeling off the top degree repeatedly.
///
/// With `n` the largest degree present, `ζ⁺_n = c_n / a_0` and
/// `ζ⁻_n = b_{-n} / d_0`; multiplying on the left by the inverse block
/// `𝐚(ζ_n)[[1, -ζ⁻_n z^-n], [-ζ⁺_n z^n, 1]]` must lower the degree by one.
pub fn recover_zeta_by_reduction(g: &MatrixLoop, tol: &Tolerances) -> Result<ParamSeq> {
    let n = match g.support() {
        None => 0,
        Some((lo, hi)) => hi.max(-lo).max(0) as usize,
    };
    let scale = 1.0 + g.max_abs();
    let mut cur = g.clone();
    let mut found = vec![ParamPair::default(); n];
    for k in (1..=n).rev() {
        let kk = k as i64;
        let (a0, d0) = (cur.a.coeff(0), cur.d.coeff(0));
        if a0.norm() < tol.zero || d0.norm() < tol.zero {
            return Err(Error::DegreeMismatch {
                step: k,
                detail: "vanishing constant diagonal".into(),
            });
        }
        let pair = ParamPair::new(cur.b.coeff(-kk) / d0, cur.c.coeff(kk) / a0);
        let pair = check_gap(k, pair, tol)?;
        let a = a_factor_at(&pair, k, tol)?;
        let inv = elementary(
            a,
            LaurentPoly::monomial(-a * pair.minus, -kk),
            LaurentPoly::monomial(-a * pair.plus, kk),
            a,
        );
        cur = &inv * &cur;
        let outside = cur
            .entries()
            .iter()
            .flat_map(|p| p.terms().filter(|(m, _)| m.abs() >= kk))
            .map(|(_, c)| c.norm())
            .fold(0.0, f64::max);
        if outside > tol.zero * scale {
            return Err(Error::DegreeMismatch {
                step: k,
                detail: format!("degree {k} survives peeling (|coeff| = {outside:e})"),
            });
        }
        cur = cur.clip(-(kk - 1), kk - 1);
        found[k - 1] = pair;
    }
    let rest = (&cur - &MatrixLoop::identity()).max_abs();
    if rest > tol.zero * scale {
        return Err(Error::DegreeMismatch {
            step: 0,
            detail: format!("remainder differs from the identity by {rest:e}"),
        });
    }
    Ok(ParamSeq::zeta(found))
}
