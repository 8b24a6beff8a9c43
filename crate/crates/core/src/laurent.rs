//! Scalar Laurent polynomials with complex coefficients and 2×2 matrix loops.
//!
//! A [`LaurentPoly`] stores a dense coefficient block `coeffs[k] = f_{lo+k}`.
//! Both end coefficients are nonzero, so the support is tracked exactly; the
//! zero polynomial has no coefficients at all. Arithmetic never truncates
//! unless an explicit order is passed.
//!
//! On the unit circle `f*(z) = Σ conj(f_n) z^{-n}` agrees with pointwise
//! conjugation, and the matrix star (entrywise star, then transpose) agrees
//! with the pointwise Hermitian adjoint.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::tol;

pub type C64 = Complex64;

/// A constant 2×2 complex matrix.
pub type Mat2 = Matrix2<C64>;

const ZERO_C: C64 = C64::new(0.0, 0.0);
const ONE_C: C64 = C64::new(1.0, 0.0);

/// Finitely supported Laurent polynomial `Σ f_n z^n`.
#[derive(Clone, PartialEq, Default)]
pub struct LaurentPoly {
    lo: i64,
    coeffs: Vec<C64>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(ONE_C)
    }

    pub fn constant(c: C64) -> Self {
        Self::monomial(c, 0)
    }

    /// `c z^n`.
    pub fn monomial(c: C64, n: i64) -> Self {
        Self::from_coeffs(n, vec![c])
    }

    /// Coefficients `coeffs[k]` of `z^{lo+k}`.
    pub fn from_coeffs(lo: i64, coeffs: Vec<C64>) -> Self {
        let mut p = LaurentPoly { lo, coeffs };
        p.normalize();
        p
    }

    /// Builds from `(exponent, coefficient)` terms; repeated exponents add up.
    pub fn from_terms<I: IntoIterator<Item = (i64, C64)>>(terms: I) -> Self {
        let terms: Vec<(i64, C64)> = terms.into_iter().collect();
        let Some(lo) = terms.iter().map(|t| t.0).min() else {
            return Self::zero();
        };
        let hi = terms.iter().map(|t| t.0).max().unwrap();
        let mut coeffs = vec![ZERO_C; (hi - lo + 1) as usize];
        for (n, c) in terms {
            coeffs[(n - lo) as usize] += c;
        }
        Self::from_coeffs(lo, coeffs)
    }

    /// Real-coefficient convenience constructor.
    pub fn from_real(lo: i64, coeffs: &[f64]) -> Self {
        Self::from_coeffs(lo, coeffs.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    fn normalize(&mut self) {
        let first = self.coeffs.iter().position(|c| *c != ZERO_C);
        match first {
            None => {
                self.coeffs.clear();
                self.lo = 0;
            }
            Some(start) => {
                let end = self.coeffs.iter().rposition(|c| *c != ZERO_C).unwrap();
                self.coeffs.truncate(end + 1);
                self.coeffs.drain(..start);
                self.lo += start as i64;
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `(m_min, m_max)`, or `None` for the zero polynomial.
    pub fn support(&self) -> Option<(i64, i64)> {
        if self.is_zero() {
            None
        } else {
            Some((self.lo, self.lo + self.coeffs.len() as i64 - 1))
        }
    }

    pub fn min_degree(&self) -> Option<i64> {
        self.support().map(|s| s.0)
    }

    pub fn max_degree(&self) -> Option<i64> {
        self.support().map(|s| s.1)
    }

    pub fn coeff(&self, n: i64) -> C64 {
        let k = n - self.lo;
        if k < 0 || k >= self.coeffs.len() as i64 {
            ZERO_C
        } else {
            self.coeffs[k as usize]
        }
    }

    /// All `(n, f_n)` in the support, including interior zeros.
    pub fn terms(&self) -> impl Iterator<Item = (i64, C64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(k, c)| (self.lo + k as i64, *c))
    }

    /// Coefficients of `z^lo ..= z^hi` as a dense vector (zero padded).
    pub fn dense(&self, lo: i64, hi: i64) -> Vec<C64> {
        (lo..=hi).map(|n| self.coeff(n)).collect()
    }

    pub fn norm1(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `f*(z) = Σ conj(f_n) z^{-n}`.
    pub fn star(&self) -> Self {
        match self.support() {
            None => Self::zero(),
            Some((_, hi)) => LaurentPoly {
                lo: -hi,
                coeffs: self.coeffs.iter().rev().map(|c| c.conj()).collect(),
            },
        }
    }

    /// `f(1/z)` without conjugation.
    pub fn reflect(&self) -> Self {
        match self.support() {
            None => Self::zero(),
            Some((_, hi)) => LaurentPoly {
                lo: -hi,
                coeffs: self.coeffs.iter().rev().copied().collect(),
            },
        }
    }

    /// Multiplication by `z^k`.
    pub fn shift(&self, k: i64) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        LaurentPoly {
            lo: self.lo + k,
            coeffs: self.coeffs.clone(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::from_coeffs(self.lo, self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn conj_coeffs(&self) -> Self {
        Self::from_coeffs(self.lo, self.coeffs.iter().map(|c| c.conj()).collect())
    }

    /// Keeps only the coefficients with exponent in `[lo, hi]`.
    pub fn clip(&self, lo: i64, hi: i64) -> Self {
        match self.support() {
            None => Self::zero(),
            Some((a, b)) => {
                let (l, h) = (a.max(lo), b.min(hi));
                if l > h {
                    return Self::zero();
                }
                Self::from_coeffs(l, self.dense(l, h))
            }
        }
    }

    /// Strictly negative powers.
    pub fn minus_part(&self) -> Self {
        self.clip(i64::MIN, -1)
    }

    /// Strictly positive powers.
    pub fn plus_part(&self) -> Self {
        self.clip(1, i64::MAX)
    }

    pub fn nonneg_part(&self) -> Self {
        self.clip(0, i64::MAX)
    }

    pub fn nonpos_part(&self) -> Self {
        self.clip(i64::MIN, 0)
    }

    /// `f = f_- + f_0 + f_+` with `f_-` in negative and `f_+` in positive powers.
    pub fn split(&self) -> (Self, C64, Self) {
        (self.minus_part(), self.coeff(0), self.plus_part())
    }

    /// Zeroes coefficients with modulus at most `tol` and trims the ends.
    pub fn prune(&self, tol: f64) -> Self {
        Self::from_coeffs(
            self.lo,
            self.coeffs
                .iter()
                .map(|c| if c.norm() <= tol { ZERO_C } else { *c })
                .collect(),
        )
    }

    /// Pointwise value; no check that `z` lies on the circle.
    pub fn eval(&self, z: C64) -> C64 {
        if self.is_zero() {
            return ZERO_C;
        }
        // Horner in z over the block, then the z^lo prefactor.
        let mut acc = ZERO_C;
        for c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc * z.powi(self.lo as i32)
    }

    /// Coefficient-wise comparison: `max_n |f_n - g_n| <= tol`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        (self - other).max_abs() <= tol
    }

    /// Truncated reciprocal `g` of a power series with `f·g = 1 + O(z^{N+1})`.
    pub fn reciprocal_series(&self, order: usize) -> Result<Self> {
        let f0 = self.coeff(0);
        if f0.norm() < tol::ZERO {
            return Err(Error::ZeroConstantTerm { value: f0.norm() });
        }
        if let Some(lo) = self.min_degree() {
            if lo < 0 {
                return Err(Error::InvalidInput(format!(
                    "reciprocal series needs support in n >= 0, found z^{lo}"
                )));
            }
        }
        let inv0 = f0.inv();
        let mut g = vec![ZERO_C; order + 1];
        g[0] = inv0;
        for n in 1..=order {
            let mut s = ZERO_C;
            for k in 1..=n {
                s += self.coeff(k as i64) * g[n - k];
            }
            g[n] = -s * inv0;
        }
        Ok(Self::from_coeffs(0, g))
    }

    /// Power series quotient `self / den` through order `N` (both supported in n >= 0).
    pub fn series_div(&self, den: &Self, order: usize) -> Result<Self> {
        let r = den.reciprocal_series(order)?;
        Ok((self * &r).clip(0, order as i64))
    }

    /// Truncated exponential `Σ_{k<=K} f^k / k!`, with `K` large enough that the
    /// omitted tail is below [`tol::EXP_TAIL`], then clipped to `[-N, N]`.
    pub fn exp_series(&self, radius: usize) -> Result<Self> {
        let r = radius as i64;
        if let Some((lo, hi)) = self.support() {
            if lo < -r || hi > r {
                return Err(Error::InvalidInput(format!(
                    "exponent support [{lo}, {hi}] exceeds clip radius {r}"
                )));
            }
        }
        let norm = self.norm1();
        if norm > tol::EXP_NORM_BOUND {
            return Err(Error::DivergentNorm {
                norm,
                bound: tol::EXP_NORM_BOUND,
            });
        }
        let terms = exp_term_count(norm, tol::EXP_TAIL);
        let mut sum = Self::one();
        let mut term = Self::one();
        for k in 1..=terms {
            term = (&term * self).scale(C64::new(1.0 / k as f64, 0.0));
            sum += &term;
        }
        Ok(sum.clip(-r, r))
    }
}

/// Smallest `K` with `Σ_{k>K} s^k/k! < tail`.
pub fn exp_term_count(s: f64, tail: f64) -> usize {
    let mut k = 0usize;
    let mut t = 1.0; // s^k / k!
    loop {
        let next = t * s / (k + 1) as f64;
        // geometric bound on the tail after index k
        let ratio = s / (k + 2) as f64;
        if ratio < 1.0 && next / (1.0 - ratio) < tail {
            return k;
        }
        t = next;
        k += 1;
    }
}

impl fmt::Debug for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (n, c) in self.terms() {
            if c == ZERO_C {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({}{:+}i)z^{}", c.re, c.im, n)?;
        }
        Ok(())
    }
}

impl AddAssign<&LaurentPoly> for LaurentPoly {
    fn add_assign(&mut self, rhs: &LaurentPoly) {
        *self = &*self + rhs;
    }
}

impl<'a> Add<&'a LaurentPoly> for &'a LaurentPoly {
    type Output = LaurentPoly;

    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        let (Some((a, b)), Some((c, d))) = (self.support(), rhs.support()) else {
            return if self.is_zero() { rhs.clone() } else { self.clone() };
        };
        let (lo, hi) = (a.min(c), b.max(d));
        let coeffs = (lo..=hi).map(|n| self.coeff(n) + rhs.coeff(n)).collect();
        LaurentPoly::from_coeffs(lo, coeffs)
    }
}

impl<'a> Sub<&'a LaurentPoly> for &'a LaurentPoly {
    type Output = LaurentPoly;

    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        self + &(-rhs)
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;

    fn neg(self) -> LaurentPoly {
        LaurentPoly {
            lo: self.lo,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl<'a> Mul<&'a LaurentPoly> for &'a LaurentPoly {
    type Output = LaurentPoly;

    /// Convolution of coefficient sequences.
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        if self.is_zero() || rhs.is_zero() {
            return LaurentPoly::zero();
        }
        let mut out = vec![ZERO_C; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, x) in self.coeffs.iter().enumerate() {
            if *x == ZERO_C {
                continue;
            }
            for (j, y) in rhs.coeffs.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        LaurentPoly::from_coeffs(self.lo + rhs.lo, out)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<LaurentPoly> for LaurentPoly {
            type Output = LaurentPoly;
            fn $m(self, rhs: LaurentPoly) -> LaurentPoly {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&LaurentPoly> for LaurentPoly {
            type Output = LaurentPoly;
            fn $m(self, rhs: &LaurentPoly) -> LaurentPoly {
                (&self).$m(rhs)
            }
        }
        impl $tr<LaurentPoly> for &LaurentPoly {
            type Output = LaurentPoly;
            fn $m(self, rhs: LaurentPoly) -> LaurentPoly {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        -&self
    }
}

#[derive(Serialize, Deserialize)]
struct TermsRepr {
    terms: Vec<(i64, f64, f64)>,
}

impl Serialize for LaurentPoly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TermsRepr {
            terms: self
                .terms()
                .filter(|(_, c)| *c != ZERO_C)
                .map(|(n, c)| (n, c.re, c.im))
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for LaurentPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = TermsRepr::deserialize(d)?;
        let mut seen = std::collections::BTreeSet::new();
        for (n, _, _) in &repr.terms {
            if !seen.insert(*n) {
                return Err(serde::de::Error::custom(format!("duplicate exponent {n}")));
            }
        }
        Ok(LaurentPoly::from_terms(
            repr.terms.into_iter().map(|(n, re, im)| (n, C64::new(re, im))),
        ))
    }
}

/// 2×2 matrix of Laurent polynomials, row-major `[[a, b], [c, d]]`.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct MatrixLoop {
    pub a: LaurentPoly,
    pub b: LaurentPoly,
    pub c: LaurentPoly,
    pub d: LaurentPoly,
}

impl MatrixLoop {
    pub fn new(a: LaurentPoly, b: LaurentPoly, c: LaurentPoly, d: LaurentPoly) -> Self {
        MatrixLoop { a, b, c, d }
    }

    pub fn identity() -> Self {
        Self::diag(LaurentPoly::one(), LaurentPoly::one())
    }

    pub fn diag(a: LaurentPoly, d: LaurentPoly) -> Self {
        Self::new(a, LaurentPoly::zero(), LaurentPoly::zero(), d)
    }

    /// `[[1, f], [0, 1]]`.
    pub fn upper_unipotent(f: LaurentPoly) -> Self {
        Self::new(LaurentPoly::one(), f, LaurentPoly::zero(), LaurentPoly::one())
    }

    /// `[[1, 0], [f, 1]]`.
    pub fn lower_unipotent(f: LaurentPoly) -> Self {
        Self::new(LaurentPoly::one(), LaurentPoly::zero(), f, LaurentPoly::one())
    }

    pub fn constant(m: &Mat2) -> Self {
        Self::new(
            LaurentPoly::constant(m[(0, 0)]),
            LaurentPoly::constant(m[(0, 1)]),
            LaurentPoly::constant(m[(1, 0)]),
            LaurentPoly::constant(m[(1, 1)]),
        )
    }

    pub fn entries(&self) -> [&LaurentPoly; 4] {
        [&self.a, &self.b, &self.c, &self.d]
    }

    pub fn map(&self, f: impl Fn(&LaurentPoly) -> LaurentPoly) -> Self {
        Self::new(f(&self.a), f(&self.b), f(&self.c), f(&self.d))
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map(|p| p.scale(s))
    }

    /// Smallest and largest exponent over all entries.
    pub fn support(&self) -> Option<(i64, i64)> {
        self.entries()
            .iter()
            .filter_map(|p| p.support())
            .reduce(|x, y| (x.0.min(y.0), x.1.max(y.1)))
    }

    /// Fourier coefficient `g_n` as a constant matrix.
    pub fn coeff(&self, n: i64) -> Mat2 {
        Mat2::new(
            self.a.coeff(n),
            self.b.coeff(n),
            self.c.coeff(n),
            self.d.coeff(n),
        )
    }

    pub fn clip(&self, lo: i64, hi: i64) -> Self {
        self.map(|p| p.clip(lo, hi))
    }

    pub fn prune(&self, tol: f64) -> Self {
        self.map(|p| p.prune(tol))
    }

    pub fn max_abs(&self) -> f64 {
        self.entries().iter().map(|p| p.max_abs()).fold(0.0, f64::max)
    }

    /// Entrywise star followed by transpose.
    pub fn star(&self) -> Self {
        Self::new(self.a.star(), self.c.star(), self.b.star(), self.d.star())
    }

    /// `[[d, -b], [-c, a]]`; the inverse when the determinant is one.
    pub fn adjugate(&self) -> Self {
        Self::new(self.d.clone(), -&self.b, -&self.c, self.a.clone())
    }

    pub fn det(&self) -> LaurentPoly {
        &(&self.a * &self.d) - &(&self.b * &self.c)
    }

    /// `det(g) - 1`.
    pub fn det_defect(&self) -> LaurentPoly {
        &self.det() - &LaurentPoly::one()
    }

    /// Inverse of a loop with unit determinant, via the adjugate.
    pub fn inverse(&self) -> Result<Self> {
        let defect = self.det_defect().max_abs();
        if defect > tol::ZERO {
            return Err(Error::NotUnimodular { defect });
        }
        Ok(self.adjugate())
    }

    /// `g^{-*} = (g^{-1})^*`.
    pub fn inverse_star(&self) -> Result<Self> {
        Ok(self.inverse()?.star())
    }

    /// Pointwise value on the unit circle.
    pub fn eval(&self, z: C64) -> Result<Mat2> {
        let modulus = z.norm();
        if (modulus - 1.0).abs() > tol::ZERO {
            return Err(Error::OffCircle { modulus });
        }
        Ok(self.eval_unchecked(z))
    }

    pub fn eval_unchecked(&self, z: C64) -> Mat2 {
        Mat2::new(self.a.eval(z), self.b.eval(z), self.c.eval(z), self.d.eval(z))
    }

    /// Coefficient-wise comparison over all four entries.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.max_coeff_diff(other) <= tol
    }

    pub fn max_coeff_diff(&self, other: &Self) -> f64 {
        (self - other).max_abs()
    }

    /// Largest entrywise deviation over `m` equispaced circle points.
    pub fn grid_deviation(&self, other: &Self, m: usize) -> f64 {
        circle_grid(m)
            .into_iter()
            .map(|z| {
                let d = self.eval_unchecked(z) - other.eval_unchecked(z);
                d.iter().map(|c| c.norm()).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }
}

impl<'a> Mul<&'a MatrixLoop> for &'a MatrixLoop {
    type Output = MatrixLoop;

    fn mul(self, h: &MatrixLoop) -> MatrixLoop {
        let g = self;
        MatrixLoop::new(
            &(&g.a * &h.a) + &(&g.b * &h.c),
            &(&g.a * &h.b) + &(&g.b * &h.d),
            &(&g.c * &h.a) + &(&g.d * &h.c),
            &(&g.c * &h.b) + &(&g.d * &h.d),
        )
    }
}

impl Mul<MatrixLoop> for MatrixLoop {
    type Output = MatrixLoop;
    fn mul(self, h: MatrixLoop) -> MatrixLoop {
        &self * &h
    }
}

impl<'a> Sub<&'a MatrixLoop> for &'a MatrixLoop {
    type Output = MatrixLoop;

    fn sub(self, h: &MatrixLoop) -> MatrixLoop {
        MatrixLoop::new(&self.a - &h.a, &self.b - &h.b, &self.c - &h.c, &self.d - &h.d)
    }
}

impl<'a> Add<&'a MatrixLoop> for &'a MatrixLoop {
    type Output = MatrixLoop;

    fn add(self, h: &MatrixLoop) -> MatrixLoop {
        MatrixLoop::new(&self.a + &h.a, &self.b + &h.b, &self.c + &h.c, &self.d + &h.d)
    }
}

/// `m` equispaced points `e^{2πik/m}`.
pub fn circle_grid(m: usize) -> Vec<C64> {
    (0..m)
        .map(|k| C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / m as f64))
        .collect()
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn r(re: f64) -> C64 {
    C64::new(re, 0.0)
}
