//! Finite sections of block Toeplitz operators, Birkhoff and triangular
//! factorization by Toeplitz inversion, and determinants.
//!
//! Basis of the Hardy space: `ε_1 z^j, ε_2 z^j` for `j >= 0`. Inside a section
//! the order is interleaved, position `2j` for `ε_1 z^j` and `2j + 1` for
//! `ε_2 z^j`, so block `(j, k)` is the Fourier coefficient `g_{j-k}`.
//!
//! The shifted section uses `{ε_1} ∪ {ε_1 z^j, ε_2 z^j : 1 <= j <= N}` in the
//! same order, `ε_1` first.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laurent::{LaurentPoly, Mat2, MatrixLoop, C64};
use crate::tol::Tolerances;

/// Outer involution `[[a, b], [c, d]] -> [[d, c z^-1], [b z, a]]`.
///
/// It equals conjugation by `diag(1, z)` composed with the swap of basis
/// vectors, so it is multiplicative and commutes with the star.
pub fn sigma(g: &MatrixLoop) -> MatrixLoop {
    MatrixLoop::new(g.d.clone(), g.c.shift(-1), g.b.shift(1), g.a.clone())
}

/// Position in `assemble_A(g, N + 1)` of the basis vector that the σ-shift
/// sends position `p` of `assemble_A(sigma(g), N)` to.
///
/// The shift maps `ε_1 z^j -> ε_2 z^{j+1}` and `ε_2 z^j -> ε_1 z^j`, so
/// `A_N(σ(g))[p, q] = A_{N+1}(g)[sigma_shift_index(p), sigma_shift_index(q)]`.
pub fn sigma_shift_index(p: usize) -> usize {
    if p.is_multiple_of(2) {
        p + 3
    } else {
        p - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SectionKind {
    /// Compression to `ε_i z^j`, `0 <= j <= N`.
    A,
    /// Compression to `ε_1` and `ε_i z^j`, `1 <= j <= N`.
    A1,
}

/// Dense finite section of a block Toeplitz operator.
#[derive(Debug, Clone, PartialEq)]
pub struct ToeplitzSection {
    pub n: usize,
    pub kind: SectionKind,
    pub matrix: DMatrix<C64>,
}

impl ToeplitzSection {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn det(&self) -> C64 {
        self.matrix.clone().determinant()
    }

    /// Ratio of extreme singular values; infinite when the smallest is zero.
    pub fn condition(&self) -> f64 {
        condition_number(&self.matrix)
    }

    /// Dense export `{N, kind, dim, rows}` with entries as `[re, im]`.
    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<Vec<[f64; 2]>> = self
            .matrix
            .row_iter()
            .map(|r| r.iter().map(|c| [c.re, c.im]).collect())
            .collect();
        serde_json::json!({
            "N": self.n,
            "kind": self.kind,
            "dim": self.dim(),
            "rows": rows,
        })
    }
}

/// A basis vector `ε_{comp+1} z^deg`.
type Basis = (usize, i64);

fn hardy_basis(lo: i64, hi: i64) -> Vec<Basis> {
    (lo..=hi).flat_map(|j| [(0, j), (1, j)]).collect()
}

fn shifted_basis(n: usize) -> Vec<Basis> {
    let mut b = vec![(0, 0)];
    b.extend(hardy_basis(1, n as i64));
    b
}

/// Matrix of `M_g` between two lists of basis vectors.
fn compress(g: &MatrixLoop, rows: &[Basis], cols: &[Basis]) -> DMatrix<C64> {
    let entries = g.entries();
    DMatrix::from_fn(rows.len(), cols.len(), |r, c| {
        let (i, j) = rows[r];
        let (k, m) = cols[c];
        entries[2 * i + k].coeff(j - m)
    })
}

/// `A_N(g)`: block `(j, k)` is `g_{j-k}`, `0 <= j, k <= N`.
#[allow(non_snake_case)]
pub fn assemble_A(g: &MatrixLoop, n: usize) -> ToeplitzSection {
    let b = hardy_basis(0, n as i64);
    ToeplitzSection {
        n,
        kind: SectionKind::A,
        matrix: compress(g, &b, &b),
    }
}

/// Shifted section `A_{1,N}(g)` of dimension `2N + 1`.
///
/// It is the principal submatrix of `A_N(σ(g))` obtained by dropping the row
/// and column of `ε_1 z^N`, read through [`sigma_shift_index`].
#[allow(non_snake_case)]
pub fn assemble_A1(g: &MatrixLoop, n: usize) -> ToeplitzSection {
    let b = shifted_basis(n);
    ToeplitzSection {
        n,
        kind: SectionKind::A1,
        matrix: compress(g, &b, &b),
    }
}

pub(crate) fn condition_number(m: &DMatrix<C64>) -> f64 {
    if m.is_empty() {
        return 1.0;
    }
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.max();
    let min = sv.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// `g = g_minus · g0 · g_plus` with `g_minus(∞) = 1` and `g_plus(0) = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Birkhoff {
    pub minus: MatrixLoop,
    pub g0: Mat2,
    pub plus: MatrixLoop,
}

/// Birkhoff factorization from the first two columns of `A_N(g)^{-1}`.
///
/// Those columns are the Taylor coefficients of `(g0 g_plus)^{-1}` through
/// order `N`. The outer factor is the non-positive part of `g (g0 g_plus)^{-1}`;
/// its positive part beyond order `N` is the truncation residual.
pub fn birkhoff_factor(g: &MatrixLoop, n: usize, tol: &Tolerances) -> Result<Birkhoff> {
    let a = assemble_A(g, n);
    let condition = a.condition();
    if condition > tol.max_condition {
        return Err(Error::SectionSingular { condition });
    }
    let dim = a.dim();
    let mut rhs = DMatrix::<C64>::zeros(dim, 2);
    rhs[(0, 0)] = C64::new(1.0, 0.0);
    rhs[(1, 1)] = C64::new(1.0, 0.0);
    let x = a
        .matrix
        .lu()
        .solve(&rhs)
        .ok_or(Error::SectionSingular { condition })?;

    let column = |i: usize, k: usize| -> LaurentPoly {
        LaurentPoly::from_coeffs(0, (0..=n).map(|j| x[(2 * j + i, k)]).collect())
    };
    let inv = MatrixLoop::new(column(0, 0), column(0, 1), column(1, 0), column(1, 1));

    // (g0 g_plus) = adj(X) / det(X) as a power series
    let det_recip = inv.det().clip(0, n as i64).reciprocal_series(n)?;
    let y = inv.adjugate().map(|p| (p * &det_recip).clip(0, n as i64));
    let g0 = y.coeff(0);
    let g0_inv = g0
        .try_inverse()
        .ok_or(Error::SectionSingular { condition })?;
    let plus = &MatrixLoop::constant(&g0_inv) * &y;

    let outer = g * &inv;
    let residual = outer
        .entries()
        .iter()
        .map(|p| p.plus_part().max_abs())
        .fold(0.0, f64::max);
    if residual > tol.convergence * (1.0 + g.max_abs()) {
        return Err(Error::NotConverged { residual });
    }
    Ok(Birkhoff {
        minus: outer.clip(i64::MIN, 0),
        g0,
        plus,
    })
}

/// `g = l · diag(m0, 1/m0) · diag(a0, 1/a0) · u`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriangularFactors {
    pub l: MatrixLoop,
    pub m0: C64,
    pub a0: f64,
    pub u: MatrixLoop,
}

impl TriangularFactors {
    pub fn identity() -> Self {
        TriangularFactors {
            l: MatrixLoop::identity(),
            m0: C64::new(1.0, 0.0),
            a0: 1.0,
            u: MatrixLoop::identity(),
        }
    }

    /// Diagonal constant `m0 · a0`.
    pub fn d(&self) -> C64 {
        self.m0 * self.a0
    }

    pub fn reconstruct(&self) -> MatrixLoop {
        let d = self.d();
        let mid = MatrixLoop::diag(LaurentPoly::constant(d), LaurentPoly::constant(d.inv()));
        &(&self.l * &mid) * &self.u
    }

    /// Largest violation of the normalizations: support of `l` in `n <= 0`,
    /// of `u` in `n >= 0`, `l(∞)` lower and `u(0)` upper unipotent, `|m0| = 1`.
    pub fn normalization_defect(&self) -> f64 {
        let one = C64::new(1.0, 0.0);
        let l_inf = self.l.coeff(0);
        let u_zero = self.u.coeff(0);
        let support = self
            .l
            .entries()
            .iter()
            .map(|p| p.plus_part().max_abs())
            .chain(self.u.entries().iter().map(|p| p.minus_part().max_abs()))
            .fold(0.0, f64::max);
        [
            support,
            (l_inf[(0, 0)] - one).norm(),
            (l_inf[(1, 1)] - one).norm(),
            l_inf[(0, 1)].norm(),
            (u_zero[(0, 0)] - one).norm(),
            (u_zero[(1, 1)] - one).norm(),
            u_zero[(1, 0)].norm(),
            (self.m0.norm() - 1.0).abs(),
        ]
        .into_iter()
        .fold(if self.a0 > 0.0 { 0.0 } else { f64::INFINITY }, f64::max)
    }
}

/// Triangular factorization: Birkhoff factorization followed by the LDU split
/// of the constant middle factor.
pub fn triangular_factor(g: &MatrixLoop, n: usize, tol: &Tolerances) -> Result<TriangularFactors> {
    let b = birkhoff_factor(g, n, tol)?;
    let (p, q, r) = (b.g0[(0, 0)], b.g0[(0, 1)], b.g0[(1, 0)]);
    if p.norm() < tol.zero {
        return Err(Error::ConstantNotLDU { pivot: p.norm() });
    }
    let lower = MatrixLoop::lower_unipotent(LaurentPoly::constant(r / p));
    let upper = MatrixLoop::upper_unipotent(LaurentPoly::constant(q / p));
    let a0 = p.norm();
    Ok(TriangularFactors {
        l: &b.minus * &lower,
        m0: p / a0,
        a0,
        u: &upper * &b.plus,
    })
}

/// Which finite-section determinant to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DetMode {
    /// `det A_N(g)`.
    Section,
    /// `det A_N(g) · det A_N(g^-1)`.
    SectionPair,
    /// `det P_N A(g) A(g^-1) P_N`, with the intermediate range taken large
    /// enough that the product is exact.
    OperatorPair,
}

impl std::str::FromStr for DetMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "section" => Ok(DetMode::Section),
            "section-pair" => Ok(DetMode::SectionPair),
            "operator" | "operator-pair" => Ok(DetMode::OperatorPair),
            other => Err(Error::InvalidInput(format!("unknown determinant mode {other:?}"))),
        }
    }
}

/// Finite-section determinant of `A(g)` or of `A(g)A(g^-1)` for a loop of
/// unit determinant; `g^-1` is the adjugate.
pub fn toeplitz_det_pair(g: &MatrixLoop, n: usize, mode: DetMode) -> C64 {
    let g_inv = g.adjugate();
    match mode {
        DetMode::Section => assemble_A(g, n).det(),
        DetMode::SectionPair => assemble_A(g, n).det() * assemble_A(&g_inv, n).det(),
        DetMode::OperatorPair => {
            let reach = g.min_degree_below_zero();
            let outer = hardy_basis(0, n as i64);
            let inner = hardy_basis(0, n as i64 + reach);
            (compress(g, &outer, &inner) * compress(&g_inv, &inner, &outer)).determinant()
        }
    }
}

/// Shifted analogue of [`toeplitz_det_pair`], built on the σ-conjugate loop.
pub fn toeplitz_det_pair_shifted(g: &MatrixLoop, n: usize, mode: DetMode) -> C64 {
    match mode {
        DetMode::Section => assemble_A1(g, n).det(),
        DetMode::SectionPair => assemble_A1(g, n).det() * assemble_A1(&g.adjugate(), n).det(),
        DetMode::OperatorPair => toeplitz_det_pair(&sigma(g), n, mode),
    }
}

/// `det(1 - B_N C_N)` with `B = P_+ M_g P_-` and `C = P_- M_{g^-1} P_+`.
///
/// Row block `j` of `B` against negative mode `z^{-m-1}` is `g_{j+m+1}`; the
/// negative modes run as far as `g` has positive powers, so
/// `A_N(g)`-row products are reproduced without truncation.
pub fn hankel_det(g: &MatrixLoop, n: usize) -> C64 {
    let reach = g.max_degree_above_zero();
    let g_inv = g.adjugate();
    let outer = hardy_basis(0, n as i64);
    let negative = hardy_basis(-reach, -1);
    let dim = outer.len();
    if negative.is_empty() {
        return C64::new(1.0, 0.0);
    }
    let b = compress(g, &outer, &negative);
    let c = compress(&g_inv, &negative, &outer);
    (DMatrix::<C64>::identity(dim, dim) - b * c).determinant()
}

impl MatrixLoop {
    fn min_degree_below_zero(&self) -> i64 {
        self.support().map_or(0, |(lo, _)| (-lo).max(0))
    }

    fn max_degree_above_zero(&self) -> i64 {
        self.support().map_or(0, |(_, hi)| hi.max(0))
    }
}

/// Shape-checked multiplicativity residual
/// `max |P_+(g1* P_+(g2 f)) - P_+(g1* g2 f)|` over coefficients.
///
/// Requires `a1, b1` (top row of `g1`), `c2, d2` (bottom row of `g2`) and both
/// entries of `f` to have no negative powers.
pub fn multiplicativity_residual(
    g1: &MatrixLoop,
    g2: &MatrixLoop,
    f: &(LaurentPoly, LaurentPoly),
) -> Result<f64> {
    let holo = |p: &LaurentPoly| p.min_degree().is_none_or(|m| m >= 0);
    for (name, p) in [("a1", &g1.a), ("b1", &g1.b), ("c2", &g2.c), ("d2", &g2.d), ("f1", &f.0), ("f2", &f.1)] {
        if !holo(p) {
            return Err(Error::ShapeViolation(format!("{name} has negative powers")));
        }
    }
    Ok(multiplicativity_gap(g1, g2, f))
}

/// [`multiplicativity_residual`] below `1e-12`.
pub fn multiplicativity_check(
    g1: &MatrixLoop,
    g2: &MatrixLoop,
    f: &(LaurentPoly, LaurentPoly),
) -> Result<bool> {
    Ok(multiplicativity_residual(g1, g2, f)? < 1e-12)
}

/// The same residual without shape checks, for probing the precondition.
pub fn multiplicativity_gap(g1: &MatrixLoop, g2: &MatrixLoop, f: &(LaurentPoly, LaurentPoly)) -> f64 {
    let apply = |g: &MatrixLoop, v: &(LaurentPoly, LaurentPoly)| {
        (&(&g.a * &v.0) + &(&g.b * &v.1), &(&g.c * &v.0) + &(&g.d * &v.1))
    };
    let pplus = |v: (LaurentPoly, LaurentPoly)| (v.0.nonneg_part(), v.1.nonneg_part());
    let s1 = g1.star();
    let lhs = pplus(apply(&s1, &pplus(apply(g2, f))));
    let rhs = pplus(apply(&s1, &apply(g2, f)));
    (&lhs.0 - &rhs.0).max_abs().max((&lhs.1 - &rhs.1).max_abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::{c, r};
    use crate::rootsubgroup::{build_g2, ParamPair, ParamSeq};
    use proptest::prelude::*;

    const TOL: Tolerances = Tolerances::DEFAULT;

    fn arb_poly(lo: i64, width: usize) -> impl Strategy<Value = LaurentPoly> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 0..=width)
            .prop_map(move |cs| LaurentPoly::from_coeffs(lo, cs.into_iter().map(|(a, b)| c(a, b)).collect()))
    }

    fn arb_loop() -> impl Strategy<Value = MatrixLoop> {
        (arb_poly(-3, 6), arb_poly(-3, 6), arb_poly(-3, 6), arb_poly(-3, 6))
            .prop_map(|(a, b, c, d)| MatrixLoop::new(a, b, c, d))
    }

    fn counterexample_loop() -> MatrixLoop {
        MatrixLoop::new(
            LaurentPoly::from_real(-2, &[1.0, -1.0, 1.0]),
            LaurentPoly::from_real(-3, &[1.0, 0.0, 1.0]),
            LaurentPoly::from_real(1, &[1.0, -2.0, 1.0]),
            LaurentPoly::from_real(0, &[1.0, -1.0, 1.0]),
        )
    }

    fn det1_loop() -> MatrixLoop {
        // product of elementary unipotents, so the determinant is exactly one
        let l = MatrixLoop::lower_unipotent(LaurentPoly::from_coeffs(-1, vec![c(0.2, 0.1), c(0.1, 0.0), c(-0.3, 0.2)]));
        let u = MatrixLoop::upper_unipotent(LaurentPoly::from_coeffs(-2, vec![c(0.1, -0.2), c(0.0, 0.0), c(0.3, 0.1), c(0.2, 0.0)]));
        &l * &u
    }

    #[test]
    fn sigma_identity_and_unipotent() {
        assert_eq!(sigma(&MatrixLoop::identity()), MatrixLoop::identity());
        let g = counterexample_loop();
        assert_eq!(sigma(&sigma(&g)), g);
    }

    #[test]
    fn sigma_is_multiplicative() {
        let g = det1_loop();
        let h = counterexample_loop();
        let lhs = sigma(&(&g * &h));
        let rhs = &sigma(&g) * &sigma(&h);
        assert!(lhs.approx_eq(&rhs, 1e-15));
        assert!(sigma(&g.star()).approx_eq(&sigma(&g).star(), 0.0));
    }

    #[test]
    fn section_of_identity_and_unipotent() {
        let a = assemble_A(&MatrixLoop::identity(), 5);
        assert_eq!(a.matrix, DMatrix::identity(12, 12));
        let g = MatrixLoop::lower_unipotent(LaurentPoly::monomial(c(0.7, 0.2), 1));
        let s = assemble_A(&g, 6);
        assert!((s.det() - r(1.0)).norm() < 1e-14);
        // block (j, j-1) carries g_1
        assert_eq!(s.matrix[(2 * 3 + 1, 2 * 2)], c(0.7, 0.2));
    }

    #[test]
    fn shifted_section_examples() {
        let a1 = assemble_A1(&MatrixLoop::identity(), 4);
        assert_eq!(a1.dim(), 9);
        assert_eq!(a1.matrix, DMatrix::identity(9, 9));
        let g = MatrixLoop::lower_unipotent(LaurentPoly::monomial(c(0.4, -0.3), 1));
        let n = 5;
        let a1 = assemble_A1(&g, n);
        let s = assemble_A(&sigma(&g), n);
        let inv: Vec<usize> = {
            // σ-preimages of the shifted basis, ε_1 z^N omitted
            let b = shifted_basis(n);
            b.iter()
                .map(|&(i, j)| if i == 1 { 2 * (j as usize - 1) } else { 2 * j as usize + 1 })
                .collect()
        };
        for (p, &pp) in inv.iter().enumerate() {
            for (q, &qq) in inv.iter().enumerate() {
                assert_eq!(a1.matrix[(p, q)], s.matrix[(pp, qq)]);
            }
        }
    }

    #[test]
    fn brown_halmos_lower_upper() {
        // analytic symbols give lower triangular sections, and then the
        // section of the product is the product of sections
        let g = MatrixLoop::lower_unipotent(LaurentPoly::from_real(0, &[0.3, 0.5]));
        let h = MatrixLoop::upper_unipotent(LaurentPoly::from_real(0, &[0.1, 0.2, -0.4]));
        let n = 6;
        let lhs = assemble_A(&(&g * &h), n).matrix;
        let rhs = assemble_A(&g, n).matrix * assemble_A(&h, n).matrix;
        assert!((lhs - rhs).iter().all(|z| z.norm() < 1e-15));

        // with an antianalytic right factor the identity fails
        let h = MatrixLoop::upper_unipotent(LaurentPoly::from_real(-2, &[0.1, 0.2]));
        let lhs = assemble_A(&(&g * &h), n).matrix;
        let rhs = assemble_A(&g, n).matrix * assemble_A(&h, n).matrix;
        assert!((lhs - rhs).iter().any(|z| z.norm() > 1e-3));
    }

    #[test]
    fn birkhoff_of_upper_type() {
        let g = MatrixLoop::upper_unipotent(LaurentPoly::from_real(0, &[0.0, 0.5, 0.25]));
        let b = birkhoff_factor(&g, 8, &TOL).unwrap();
        assert!(b.minus.approx_eq(&MatrixLoop::identity(), 1e-14));
        assert!((b.g0 - Mat2::identity()).iter().all(|z| z.norm() < 1e-14));
        assert!(b.plus.approx_eq(&g, 1e-14));
    }

    #[test]
    fn counterexample_factors() {
        let g = counterexample_loop();
        let f = triangular_factor(&g, 16, &TOL).unwrap();
        let l = MatrixLoop::upper_unipotent(LaurentPoly::from_real(-3, &[1.0, 1.0, 1.0]));
        let u = MatrixLoop::new(
            LaurentPoly::from_real(0, &[1.0, 1.0, -1.0]),
            LaurentPoly::monomial(r(-1.0), 1),
            LaurentPoly::from_real(1, &[1.0, -2.0, 1.0]),
            LaurentPoly::from_real(0, &[1.0, -1.0, 1.0]),
        );
        assert!(f.l.prune(1e-12).approx_eq(&l, 1e-10));
        assert!(f.u.prune(1e-12).approx_eq(&u, 1e-10));
        assert!((f.m0 - r(1.0)).norm() < 1e-10 && (f.a0 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn singular_section_detected() {
        // c and d share the zero z = 0 inside the disk
        let g = MatrixLoop::new(
            LaurentPoly::monomial(r(1.0), -1),
            LaurentPoly::zero(),
            LaurentPoly::monomial(r(1.0), 2),
            LaurentPoly::monomial(r(1.0), 1),
        );
        assert!(g.det_defect().is_zero());
        assert!(matches!(birkhoff_factor(&g, 8, &TOL), Err(Error::SectionSingular { .. })));
    }

    #[test]
    fn constant_not_ldu() {
        // g = J: the Birkhoff factorization is trivial with g0 = [[0, 1], [-1, 0]]
        let g = MatrixLoop::new(LaurentPoly::zero(), LaurentPoly::one(), -LaurentPoly::one(), LaurentPoly::zero());
        assert!(matches!(triangular_factor(&g, 4, &TOL), Err(Error::ConstantNotLDU { .. })));
    }

    #[test]
    fn not_converged_when_section_too_short() {
        let chi = LaurentPoly::from_real(-1, &[-0.9, 0.0, 0.9]);
        let g = MatrixLoop::diag(chi.exp_series(60).unwrap(), (-&chi).exp_series(60).unwrap());
        assert!(matches!(birkhoff_factor(&g, 3, &TOL), Err(Error::NotConverged { .. })));
        assert!(birkhoff_factor(&g, 40, &TOL).is_ok());
    }

    #[test]
    fn diagonal_loop_splits() {
        let t = 0.1;
        let chi = LaurentPoly::from_real(-1, &[-t, 0.0, t]);
        let e = |f: &LaurentPoly| f.exp_series(40).unwrap();
        let g = MatrixLoop::diag(e(&chi), e(&-&chi));
        let f = triangular_factor(&g, 24, &TOL).unwrap();
        let (m, _, p) = chi.split();
        let l = MatrixLoop::diag(e(&m), e(&-&m));
        let u = MatrixLoop::diag(e(&p).clip(0, 24), e(&-&p).clip(0, 24));
        assert!(f.l.approx_eq(&l, 1e-13));
        assert!(f.u.approx_eq(&u, 1e-13));
        assert!((f.d() - r(1.0)).norm() < 1e-13);
    }

    #[test]
    fn det_pair_examples() {
        let id = MatrixLoop::identity();
        for mode in [DetMode::Section, DetMode::SectionPair, DetMode::OperatorPair] {
            assert!((toeplitz_det_pair(&id, 5, mode) - r(1.0)).norm() < 1e-15);
        }
        assert_eq!(hankel_det(&id, 5), r(1.0));
        let g = MatrixLoop::upper_unipotent(LaurentPoly::monomial(r(1.0), -1));
        for n in [1, 4, 9] {
            assert!((toeplitz_det_pair(&g, n, DetMode::SectionPair) - r(1.0)).norm() < 1e-14);
            assert!((toeplitz_det_pair(&g, n, DetMode::OperatorPair) - r(1.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn single_factor_det_limit() {
        let (m, p) = (r(0.3), r(0.4));
        let g = build_g2(&ParamSeq::zeta(vec![ParamPair::new(m, p)]), &TOL).unwrap();
        let limit = r(1.0) / (r(1.0) - m * p);
        let v = toeplitz_det_pair(&g, 32, DetMode::OperatorPair);
        assert!((v - limit).norm() < 1e-10);
        assert!((hankel_det(&g, 32) - v).norm() < 1e-8);
        assert!((toeplitz_det_pair(&g, 32, DetMode::Section) - limit).norm() < 1e-10);
    }

    #[test]
    fn hankel_support_is_banded() {
        let g = counterexample_loop();
        let w = 3;
        let n = 8;
        let outer = hardy_basis(0, n);
        let neg = hardy_basis(-w, -1);
        let b = compress(&g, &outer, &neg);
        // block row j vanishes once j + 1 > w
        for row in 2 * w as usize..b.nrows() {
            assert!(b.row(row).iter().all(|z| *z == r(0.0)));
        }
    }

    #[test]
    fn multiplicativity_examples() {
        let id = MatrixLoop::identity();
        let f = (LaurentPoly::from_real(0, &[1.0, 2.0]), LaurentPoly::from_real(0, &[0.0, 1.0]));
        assert!(multiplicativity_check(&id, &id, &f).unwrap());
        let bad = MatrixLoop::upper_unipotent(LaurentPoly::monomial(r(1.0), -1));
        assert!(matches!(multiplicativity_residual(&bad, &id, &f), Err(Error::ShapeViolation(_))));
        let g2 = MatrixLoop::new(LaurentPoly::monomial(r(1.0), -1), LaurentPoly::zero(), LaurentPoly::zero(), LaurentPoly::monomial(r(1.0), 1));
        let g2 = &g2 * &MatrixLoop::lower_unipotent(LaurentPoly::monomial(r(1.0), 1));
        assert!(multiplicativity_gap(&bad, &g2, &f) > 0.5);
    }

    #[test]
    fn section_json_export() {
        let s = assemble_A(&MatrixLoop::identity(), 1);
        let v = s.to_json();
        assert_eq!(v["dim"], 4);
        assert_eq!(v["kind"], "A");
        assert_eq!(v["rows"][0][0], serde_json::json!([1.0, 0.0]));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn sigma_involution_and_shift(g in arb_loop(), n in 2usize..7) {
            prop_assert_eq!(sigma(&sigma(&g)), g.clone());
            let a = assemble_A(&sigma(&g), n).matrix;
            let b = assemble_A(&g, n + 1).matrix;
            for p in 0..a.nrows() {
                for q in 0..a.ncols() {
                    prop_assert_eq!(a[(p, q)], b[(sigma_shift_index(p), sigma_shift_index(q))]);
                }
            }
        }

        #[test]
        fn operator_pair_equals_hankel(coefs in prop::collection::vec((-0.4f64..0.4, -0.4f64..0.4), 6)) {
            let cs: Vec<C64> = coefs.into_iter().map(|(a, b)| c(a, b)).collect();
            let l = MatrixLoop::lower_unipotent(LaurentPoly::from_coeffs(-1, cs[..3].to_vec()));
            let u = MatrixLoop::upper_unipotent(LaurentPoly::from_coeffs(-1, cs[3..].to_vec()));
            let g = &l * &u;
            for n in [4, 8] {
                let a = toeplitz_det_pair(&g, n, DetMode::OperatorPair);
                let h = hankel_det(&g, n);
                prop_assert!((a - h).norm() < 1e-12);
            }
        }

        #[test]
        fn factorization_properties(coefs in prop::collection::vec((-0.3f64..0.3, -0.3f64..0.3), 7)) {
            let cs: Vec<C64> = coefs.into_iter().map(|(a, b)| c(a, b)).collect();
            let l = MatrixLoop::lower_unipotent(LaurentPoly::from_coeffs(-2, cs[..4].to_vec()));
            let u = MatrixLoop::upper_unipotent(LaurentPoly::from_coeffs(-1, cs[4..].to_vec()));
            let g = &l * &u;
            let scale = 1.0 + g.max_abs();
            let f = triangular_factor(&g, 24, &TOL).unwrap();
            prop_assert!(f.reconstruct().grid_deviation(&g, 32) < 1e-8 * scale);
            prop_assert!(f.normalization_defect() < 1e-12);

            // uniqueness across section orders
            let f4 = triangular_factor(&g, 28, &TOL).unwrap();
            prop_assert!(f.l.approx_eq(&f4.l, 1e-8));
            prop_assert!(f.u.approx_eq(&f4.u.clip(0, 24), 1e-8));

            // adjoint symmetry: g* = u* · conj(d) · l*
            let fs = triangular_factor(&g.star(), 24, &TOL).unwrap();
            prop_assert!(fs.l.approx_eq(&f.u.star(), 1e-8));
            prop_assert!(fs.u.clip(0, 20).approx_eq(&f.l.star().clip(0, 20), 1e-8));
            prop_assert!((fs.d() - f.d().conj()).norm() < 1e-8);
        }

        #[test]
        fn multiplicativity_holds_on_shape(
            a1 in arb_poly(0, 6), b1 in arb_poly(0, 6), c1 in arb_poly(-3, 6), d1 in arb_poly(-3, 6),
            a2 in arb_poly(-3, 6), b2 in arb_poly(-3, 6), c2 in arb_poly(0, 6), d2 in arb_poly(0, 6),
            f1 in arb_poly(0, 6), f2 in arb_poly(0, 6),
        ) {
            let g1 = MatrixLoop::new(a1, b1, c1, d1);
            let g2 = MatrixLoop::new(a2, b2, c2, d2);
            prop_assert!(multiplicativity_check(&g1, &g2, &(f1, f2)).unwrap());
        }
    }
}
