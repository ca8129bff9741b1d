//! Divided differences, B-splines (pointwise and exact piecewise form),
//! Bernstein bases, and exact integrals of piecewise-polynomial products.
//!
//! B-splines here are normalized to unit integral,
//! `B(x|t_{i:j}) = (k+1)·∇(t_{i:j}) (max(·-x,0))^k` with `k = j-i-1`,
//! which on consecutive integer knots coincides with the span-scaled
//! divided-difference form. The partition-of-unity spline is
//! `N = (t_j-t_i)/(k+1) · B`.

use crate::exact::{binom, rat, RatMatrix, RatPoly, Rational};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum KnotError {
    #[error("knot sequence must be non-decreasing")]
    NotSorted,
    #[error("B-spline window has zero-length support")]
    DegenerateWindow,
}

/// Non-decreasing rational knot sequence.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct KnotVector {
    knots: Vec<Rational>,
}

impl KnotVector {
    pub fn new(knots: Vec<Rational>) -> Result<Self, KnotError> {
        if knots.windows(2).any(|w| w[0] > w[1]) {
            return Err(KnotError::NotSorted);
        }
        Ok(KnotVector { knots })
    }

    pub fn from_i64(knots: &[i64]) -> Self {
        Self::new(knots.iter().map(|&k| rat(k)).collect()).expect("integer knots sorted")
    }

    /// Validates a window defining a degree-`len-2` B-spline: the span
    /// must be nonzero. Within a single window any smaller multiplicity
    /// is admissible.
    pub fn validate_bspline_window(&self) -> Result<(), KnotError> {
        let n = self.knots.len();
        assert!(n >= 2, "B-spline window needs at least 2 knots");
        if self.knots[0] == self.knots[n - 1] {
            return Err(KnotError::DegenerateWindow);
        }
        Ok(())
    }

    /// Largest multiplicity of any value in the sequence.
    pub fn max_multiplicity(&self) -> usize {
        let mut best = 0;
        let mut run = 0;
        for i in 0..self.knots.len() {
            if i > 0 && self.knots[i] == self.knots[i - 1] {
                run += 1;
            } else {
                run = 1;
            }
            best = best.max(run);
        }
        best
    }

    pub fn knots(&self) -> &[Rational] {
        &self.knots
    }

    pub fn len(&self) -> usize {
        self.knots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.knots.is_empty()
    }

    pub fn first(&self) -> &Rational {
        self.knots.first().expect("nonempty knot vector")
    }

    pub fn last(&self) -> &Rational {
        self.knots.last().expect("nonempty knot vector")
    }

    /// Subsequence `t_{i..=j}`.
    pub fn window(&self, i: usize, j: usize) -> KnotVector {
        KnotVector {
            knots: self.knots[i..=j].to_vec(),
        }
    }

    /// Distinct knot values in order.
    pub fn distinct(&self) -> Vec<Rational> {
        let mut out: Vec<Rational> = Vec::new();
        for k in &self.knots {
            if out.last() != Some(k) {
                out.push(k.clone());
            }
        }
        out
    }

    /// `a·t + b` applied entrywise; `a` may be negative (sequence is
    /// re-sorted by reversal).
    pub fn affine(&self, a: &Rational, b: &Rational) -> KnotVector {
        let mut knots: Vec<Rational> = self.knots.iter().map(|t| t * a + b).collect();
        if a.is_negative() {
            knots.reverse();
        }
        KnotVector { knots }
    }

    /// Mirror image about the origin.
    pub fn mirrored(&self) -> KnotVector {
        self.affine(&rat(-1), &rat(0))
    }
}

/// Value type usable inside the divided-difference recursion.
pub trait DdValue: Clone {
    fn dd_sub(&self, rhs: &Self) -> Self;
    fn dd_div(&self, s: &Rational) -> Self;
}

impl DdValue for Rational {
    fn dd_sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn dd_div(&self, s: &Rational) -> Self {
        self / s
    }
}

impl DdValue for RatPoly {
    fn dd_sub(&self, rhs: &Self) -> Self {
        self - rhs
    }
    fn dd_div(&self, s: &Rational) -> Self {
        self.scale(&s.recip())
    }
}

/// Divided difference over possibly repeated knots. `confluent(i, nu)`
/// must return `g^(nu)(t_i) / nu!`; it is called with `nu = 0` for simple
/// values and with `nu = j - i` when `t_i = t_j`.
pub fn divided_difference<T: DdValue>(
    knots: &[Rational],
    confluent: &mut impl FnMut(usize, usize) -> T,
) -> T {
    let n = knots.len();
    assert!(n >= 1, "divided difference needs at least one knot");
    let mut table: Vec<T> = (0..n).map(|i| confluent(i, 0)).collect();
    for span in 1..n {
        let mut next: Vec<T> = Vec::with_capacity(n - span);
        for i in 0..n - span {
            let j = i + span;
            let v = if knots[i] == knots[j] {
                confluent(i, span)
            } else {
                let denom = &knots[j] - &knots[i];
                table[i + 1].dd_sub(&table[i]).dd_div(&denom)
            };
            next.push(v);
        }
        table = next;
    }
    table.into_iter().next().expect("nonempty table")
}

/// Complete homogeneous symmetric polynomial `h_deg` of the knot values.
fn homogeneous_sum(knots: &[Rational], deg: usize) -> Rational {
    let mut h = vec![Rational::zero(); deg + 1];
    h[0] = Rational::one();
    for t in knots {
        for d in 1..=deg {
            let add = t * &h[d - 1];
            h[d] += add;
        }
    }
    h.pop().expect("deg entry")
}

/// Divided difference of `t^power` over the knots, by the Steffensen
/// multi-index sum: `sum_{|w| = power - (#knots-1)} t^w`, zero when the
/// power is too small.
pub fn divdiff_monomial(knots: &KnotVector, power: usize) -> Rational {
    let order = knots.len() - 1;
    if power < order {
        return Rational::zero();
    }
    homogeneous_sum(knots.knots(), power - order)
}

/// Recursive form of the divided difference of `t^power`, with the
/// derivative rule at repeated knots. Agrees with [`divdiff_monomial`].
pub fn divdiff_monomial_recursive(knots: &KnotVector, power: usize) -> Rational {
    divided_difference(knots.knots(), &mut |i, nu| {
        // d^nu/dt^nu t^power / nu! = C(power, nu) t^(power-nu)
        if nu > power {
            return Rational::zero();
        }
        binom(power as i64, nu as i64) * knots.knots()[i].pow((power - nu) as i32)
    })
}

/// Unit-integral B-spline value at `x`; support is the half-open
/// interval `[t_first, t_last)`.
pub fn bspline_eval(x: &Rational, knots: &KnotVector) -> Rational {
    knots
        .validate_bspline_window()
        .expect("invalid B-spline window");
    let degree = knots.len() - 2;
    if x < knots.first() || x >= knots.last() {
        return Rational::zero();
    }
    let dd = divided_difference(knots.knots(), &mut |i, nu| {
        // g(t) = max(t-x, 0)^degree; g^(nu)(t)/nu! = C(degree,nu)(t-x)^(degree-nu)
        // for t > x, zero for t <= x (strict at t = x for the 0-power case).
        let t = &knots.knots()[i];
        if nu > degree || t <= x {
            return Rational::zero();
        }
        binom(degree as i64, nu as i64) * (t - x).pow((degree - nu) as i32)
    });
    rat(degree as i64 + 1) * dd
}

/// Piecewise polynomial with strictly increasing rational breakpoints;
/// identically zero outside the support.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct PiecewisePoly {
    breakpoints: Vec<Rational>,
    pieces: Vec<RatPoly>,
}

impl PiecewisePoly {
    pub fn new(breakpoints: Vec<Rational>, pieces: Vec<RatPoly>) -> Self {
        assert!(
            (breakpoints.is_empty() && pieces.is_empty())
                || breakpoints.len() == pieces.len() + 1,
            "breakpoints/pieces length mismatch"
        );
        assert!(
            breakpoints.windows(2).all(|w| w[0] < w[1]),
            "breakpoints must be strictly increasing"
        );
        PiecewisePoly { breakpoints, pieces }
    }

    pub fn zero() -> Self {
        PiecewisePoly::default()
    }

    pub fn breakpoints(&self) -> &[Rational] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[RatPoly] {
        &self.pieces
    }

    pub fn support(&self) -> Option<(&Rational, &Rational)> {
        if self.breakpoints.is_empty() {
            None
        } else {
            Some((&self.breakpoints[0], self.breakpoints.last().unwrap()))
        }
    }

    /// Value at `x` with half-open pieces `[b_i, b_{i+1})`.
    pub fn eval(&self, x: &Rational) -> Rational {
        match self.piece_index(x) {
            Some(i) => self.pieces[i].eval(x),
            None => Rational::zero(),
        }
    }

    /// Value at `x` taking the left limit at the final breakpoint.
    pub fn eval_left_limit(&self, x: &Rational) -> Rational {
        if !self.breakpoints.is_empty() && x == self.breakpoints.last().unwrap() {
            return self.pieces.last().unwrap().eval(x);
        }
        self.eval(x)
    }

    fn piece_index(&self, x: &Rational) -> Option<usize> {
        if self.breakpoints.is_empty() {
            return None;
        }
        if x < &self.breakpoints[0] || x >= self.breakpoints.last().unwrap() {
            return None;
        }
        let i = self.breakpoints.partition_point(|b| b <= x);
        Some(i - 1)
    }

    /// Piece covering the open interval `(p, q)`, if any.
    fn piece_on(&self, p: &Rational, q: &Rational) -> Option<&RatPoly> {
        let mid = (p + q) / rat(2);
        self.piece_index(&mid).map(|i| &self.pieces[i])
    }

    /// Exact integral over `[a, b]`.
    pub fn integrate(&self, a: &Rational, b: &Rational) -> Rational {
        assert!(a <= b, "integrate requires a <= b");
        let mut cuts: Vec<Rational> = vec![a.clone(), b.clone()];
        cuts.extend(
            self.breakpoints
                .iter()
                .filter(|&t| t > a && t < b)
                .cloned(),
        );
        cuts.sort();
        cuts.dedup();
        let mut acc = Rational::zero();
        for w in cuts.windows(2) {
            if let Some(p) = self.piece_on(&w[0], &w[1]) {
                acc += p.integrate_on(&w[0], &w[1]);
            }
        }
        acc
    }

    /// Integral over the full support.
    pub fn integrate_all(&self) -> Rational {
        match self.support() {
            Some((a, b)) => {
                let (a, b) = (a.clone(), b.clone());
                self.integrate(&a, &b)
            }
            None => Rational::zero(),
        }
    }

    pub fn scale_values(&self, s: &Rational) -> PiecewisePoly {
        if s.is_zero() {
            return PiecewisePoly::zero();
        }
        PiecewisePoly {
            breakpoints: self.breakpoints.clone(),
            pieces: self.pieces.iter().map(|p| p.scale(s)).collect(),
        }
    }

    /// `x -> f(a1·x + a0)` with `a1 != 0`; orientation flips for `a1 < 0`.
    pub fn precompose_affine(&self, a1: &Rational, a0: &Rational) -> PiecewisePoly {
        assert!(!a1.is_zero(), "affine precompose needs a1 != 0");
        if self.breakpoints.is_empty() {
            return PiecewisePoly::zero();
        }
        let inv = a1.recip();
        let mut breakpoints: Vec<Rational> = self
            .breakpoints
            .iter()
            .map(|b| (b - a0) * &inv)
            .collect();
        let mut pieces: Vec<RatPoly> = self
            .pieces
            .iter()
            .map(|p| p.compose_affine(a1, a0))
            .collect();
        if a1.is_negative() {
            breakpoints.reverse();
            pieces.reverse();
        }
        PiecewisePoly { breakpoints, pieces }
    }

    /// Pointwise sum of scaled piecewise polynomials over merged breakpoints.
    pub fn linear_combination(terms: &[(Rational, &PiecewisePoly)]) -> PiecewisePoly {
        let mut cuts: Vec<Rational> = terms
            .iter()
            .flat_map(|(_, f)| f.breakpoints.iter().cloned())
            .collect();
        cuts.sort();
        cuts.dedup();
        if cuts.len() < 2 {
            return PiecewisePoly::zero();
        }
        let mut pieces = Vec::with_capacity(cuts.len() - 1);
        for w in cuts.windows(2) {
            let mut acc = RatPoly::zero();
            for (c, f) in terms {
                if let Some(p) = f.piece_on(&w[0], &w[1]) {
                    acc = &acc + &p.scale(c);
                }
            }
            pieces.push(acc);
        }
        PiecewisePoly {
            breakpoints: cuts,
            pieces,
        }
    }
}

/// Exact `∫_a^b f·g` by merging breakpoints and integrating polynomial
/// products piecewise.
pub fn integrate_piecewise_product(
    f: &PiecewisePoly,
    g: &PiecewisePoly,
    a: &Rational,
    b: &Rational,
) -> Rational {
    assert!(a <= b, "integrate requires a <= b");
    let mut cuts: Vec<Rational> = vec![a.clone(), b.clone()];
    for pp in [f, g] {
        cuts.extend(pp.breakpoints.iter().filter(|&t| t > a && t < b).cloned());
    }
    cuts.sort();
    cuts.dedup();
    let mut acc = Rational::zero();
    for w in cuts.windows(2) {
        if let (Some(pf), Some(pg)) = (f.piece_on(&w[0], &w[1]), g.piece_on(&w[0], &w[1])) {
            acc += (pf * pg).integrate_on(&w[0], &w[1]);
        }
    }
    acc
}

/// Exact polynomial pieces of the unit-integral B-spline over `knots`.
/// Piece boundaries are the distinct knot values.
pub fn bspline_pieces(knots: &KnotVector) -> PiecewisePoly {
    knots
        .validate_bspline_window()
        .expect("invalid B-spline window");
    let degree = knots.len() - 2;
    let breakpoints = knots.distinct();
    let scale = rat(degree as i64 + 1);
    let mut pieces = Vec::with_capacity(breakpoints.len() - 1);
    for m in 0..breakpoints.len() - 1 {
        let right = breakpoints[m + 1].clone();
        let dd = divided_difference(knots.knots(), &mut |i, nu| {
            // On (b_m, b_{m+1}) the knot t_i contributes (t_i - x)^degree
            // only when t_i lies at or beyond the right edge.
            let t = &knots.knots()[i];
            if nu > degree || t < &right {
                return RatPoly::zero();
            }
            // C(degree,nu) (t_i - x)^(degree-nu) as a polynomial in x
            let base = RatPoly::from_coeffs(vec![t.clone(), rat(-1)]);
            let mut pow = RatPoly::one();
            for _ in 0..degree - nu {
                pow = &pow * &base;
            }
            pow.scale(&binom(degree as i64, nu as i64))
        });
        pieces.push(dd.scale(&scale));
    }
    PiecewisePoly::new(breakpoints, pieces)
}

/// Bernstein polynomial `C(d,l)·u^l·(1-u)^(d-l)`, `u = (x-lo)/(hi-lo)`,
/// as a polynomial in `x`. On unit-width cells this is
/// `C(d,l)(x-lo)^l(hi-x)^(d-l)`.
pub fn bernstein_poly(d: usize, l: usize, lo: &Rational, hi: &Rational) -> RatPoly {
    assert!(l <= d, "Bernstein index out of range");
    assert!(lo < hi, "empty cell");
    let w_inv = (hi - lo).recip();
    let u = RatPoly::from_coeffs(vec![-lo * &w_inv, w_inv.clone()]);
    let one_minus_u = &RatPoly::one() - &u;
    let mut p = RatPoly::constant(binom(d as i64, l as i64));
    for _ in 0..l {
        p = &p * &u;
    }
    for _ in 0..d - l {
        p = &p * &one_minus_u;
    }
    p
}

/// Bernstein basis function as a piecewise polynomial supported on one cell.
pub fn bernstein_basis(d: usize, l: usize, lo: &Rational, hi: &Rational) -> PiecewisePoly {
    PiecewisePoly::new(
        vec![lo.clone(), hi.clone()],
        vec![bernstein_poly(d, l, lo, hi)],
    )
}

/// Bernstein coefficients of a polynomial of degree <= d on `[lo, hi]`.
pub fn poly_to_bernstein(p: &RatPoly, lo: &Rational, hi: &Rational, d: usize) -> Vec<Rational> {
    assert!(p.degree() <= d || p.is_zero(), "degree too high for basis");
    let w = hi - lo;
    // q(u) = p(lo + w u) on [0,1]
    let q = p.compose_affine(&w, lo);
    // Monomial coefficients of C(d,l) u^l (1-u)^(d-l): row m, column l.
    let basis = RatMatrix::from_fn(d + 1, d + 1, |m, l| {
        if m < l {
            Rational::zero()
        } else {
            let sign = if (m - l) % 2 == 0 { rat(1) } else { rat(-1) };
            sign * binom(d as i64, l as i64) * binom((d - l) as i64, (m - l) as i64)
        }
    });
    let rhs = RatMatrix::from_fn(d + 1, 1, |m, _| q.coeff(m));
    let sol = basis.solve(&rhs).expect("Bernstein basis is nonsingular");
    sol.column(0)
}

/// Bernstein-Bezier coefficient vectors `[b_0 .. b_d]` of the `d+1`
/// unit-interval pieces of the degree-`d` uniform B-spline on knots
/// `0..=(d+1)`. Column `rho` holds the coefficients of the piece on
/// `[rho, rho+1]`.
pub fn uniform_bspline_bb_coeffs(d: usize) -> RatMatrix {
    let knots = KnotVector::from_i64(&(0..=(d as i64 + 1)).collect::<Vec<_>>());
    let pieces = bspline_pieces(&knots);
    RatMatrix::from_fn(d + 1, d + 1, |l, rho| {
        let lo = rat(rho as i64);
        let hi = rat(rho as i64 + 1);
        poly_to_bernstein(&pieces.pieces()[rho], &lo, &hi, d)[l].clone()
    })
}

/// Bernstein mass matrix on the unit interval:
/// `M_d(l,j) = C(d,l)·C(d,j) / ((2d+1)·C(2d,l+j))`.
pub fn bernstein_mass_matrix(d: usize) -> RatMatrix {
    RatMatrix::from_fn(d + 1, d + 1, |l, j| {
        binom(d as i64, l as i64) * binom(d as i64, j as i64)
            / (rat(2 * d as i64 + 1) * binom(2 * d as i64, (l + j) as i64))
    })
}
