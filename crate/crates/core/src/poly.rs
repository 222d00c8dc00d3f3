//! Dense univariate polynomials (ascending powers) in double precision and in
//! exact rational arithmetic, with real root isolation on closed intervals.

use num_traits::{One, Signed, Zero};

use crate::rational::{self, Rational};

/// Bisection stops once the bracket is this narrow.
pub const ROOT_WIDTH: f64 = 1e-12;

/// Polynomial with `f64` coefficients, `coeffs[i]` multiplies `x^i`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && coeffs[coeffs.len() - 1] == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Poly { coeffs }
    }

    pub fn constant(c: f64) -> Self {
        Poly::new(vec![c])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// Sum of `|c_i| |x|^i`, the natural scale of rounding error in `eval`.
    pub fn magnitude(&self, x: f64) -> f64 {
        let ax = x.abs();
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * ax + c.abs())
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() == 1 {
            return Poly::constant(0.0);
        }
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * i as f64)
                .collect(),
        )
    }

    /// Antiderivative vanishing at 0.
    pub fn antiderivative(&self) -> Poly {
        let mut out = vec![0.0];
        out.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(i, &c)| c / (i as f64 + 1.0)),
        );
        Poly::new(out)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new(
            (0..n)
                .map(|i| {
                    self.coeffs.get(i).copied().unwrap_or(0.0)
                        + other.coeffs.get(i).copied().unwrap_or(0.0)
                })
                .collect(),
        )
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    /// `x * p(x)`.
    pub fn mul_x(&self) -> Poly {
        let mut out = vec![0.0];
        out.extend_from_slice(&self.coeffs);
        Poly::new(out)
    }

    /// `p(-x)`.
    pub fn reflect(&self) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(i, &c)| if i % 2 == 1 { -c } else { c })
                .collect(),
        )
    }

    /// True when every coefficient is within `tol` of zero.
    pub fn is_negligible(&self, tol: f64) -> bool {
        self.coeffs.iter().all(|c| c.abs() <= tol)
    }

    /// All real roots in `[a, b]`, ascending, each to within [`ROOT_WIDTH`].
    ///
    /// The interval is split at the roots of the derivative (found recursively)
    /// so `self` is monotone on every sub-interval and has at most one root
    /// there. Critical points where the value vanishes up to rounding are
    /// reported as (multiple) roots. Returns nothing for the zero polynomial.
    pub fn roots_in(&self, a: f64, b: f64) -> Vec<f64> {
        debug_assert!(a <= b);
        if self.is_negligible(0.0) {
            return Vec::new();
        }
        let deg = self.degree();
        if deg == 0 {
            return Vec::new();
        }
        let mut roots = Vec::new();
        if deg == 1 {
            let r = -self.coeffs[0] / self.coeffs[1];
            if r >= a && r <= b {
                roots.push(r);
            }
            return roots;
        }
        let crit = self.derivative().roots_in(a, b);
        let mut points = Vec::with_capacity(crit.len() + 2);
        points.push(a);
        points.extend(crit.iter().copied().filter(|&c| c > a && c < b));
        points.push(b);

        for (idx, &x) in points.iter().enumerate() {
            if self.vanishes_at(x) {
                roots.push(x);
            }
            if idx + 1 < points.len() {
                let y = points[idx + 1];
                let (fx, fy) = (self.eval(x), self.eval(y));
                if (fx < 0.0 && fy > 0.0) || (fx > 0.0 && fy < 0.0) {
                    if !self.vanishes_at(x) && !self.vanishes_at(y) {
                        roots.push(bisect(|t| self.eval(t), x, y, fx));
                    }
                }
            }
        }
        roots.sort_by(|p, q| p.total_cmp(q));
        roots.dedup_by(|p, q| (*p - *q).abs() <= 1e-10 * (1.0 + q.abs()));
        roots
    }

    fn vanishes_at(&self, x: f64) -> bool {
        self.eval(x).abs() <= 16.0 * f64::EPSILON * self.magnitude(x)
    }

    /// Minimum and maximum of the polynomial over `[a, b]` with their locations.
    pub fn extrema(&self, a: f64, b: f64) -> ((f64, f64), (f64, f64)) {
        let mut cands = vec![a, b];
        cands.extend(self.derivative().roots_in(a, b));
        let mut min = (a, self.eval(a));
        let mut max = min;
        for x in cands {
            let v = self.eval(x);
            if v < min.1 {
                min = (x, v);
            }
            if v > max.1 {
                max = (x, v);
            }
        }
        (min, max)
    }
}

/// Bisection on a bracket with a strict sign change; `fa` is `f(a)`.
pub fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, fa: f64) -> f64 {
    let neg_at_a = fa < 0.0;
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if b - a <= ROOT_WIDTH * 0.5 || m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if (fm < 0.0) == neg_at_a {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Polynomial with exact rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct RatPoly {
    coeffs: Vec<Rational>,
}

impl RatPoly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        RatPoly { coeffs }
    }

    pub fn constant(c: Rational) -> Self {
        RatPoly::new(vec![c])
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.coeffs
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> RatPoly {
        RatPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * rational::int(i as i64))
                .collect(),
        )
    }

    pub fn antiderivative(&self) -> RatPoly {
        let mut out = vec![Rational::zero()];
        out.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| c / rational::int(i as i64 + 1)),
        );
        RatPoly::new(out)
    }

    pub fn add(&self, other: &RatPoly) -> RatPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = Rational::zero();
        RatPoly::new(
            (0..n)
                .map(|i| self.coeffs.get(i).unwrap_or(&zero) + other.coeffs.get(i).unwrap_or(&zero))
                .collect(),
        )
    }

    pub fn sub(&self, other: &RatPoly) -> RatPoly {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn scale(&self, s: &Rational) -> RatPoly {
        RatPoly::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn mul(&self, other: &RatPoly) -> RatPoly {
        if self.is_zero() || other.is_zero() {
            return RatPoly::default();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        RatPoly::new(out)
    }

    pub fn mul_x(&self) -> RatPoly {
        if self.is_zero() {
            return RatPoly::default();
        }
        let mut out = vec![Rational::zero()];
        out.extend(self.coeffs.iter().cloned());
        RatPoly::new(out)
    }

    pub fn reflect(&self) -> RatPoly {
        RatPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| if i % 2 == 1 { -c.clone() } else { c.clone() })
                .collect(),
        )
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, divisor: &RatPoly) -> (RatPoly, RatPoly) {
        assert!(!divisor.is_zero(), "division by zero polynomial");
        let dlead = divisor.coeffs.last().unwrap();
        let dd = divisor.degree();
        let mut rem = self.coeffs.clone();
        if rem.len() < divisor.coeffs.len() {
            return (RatPoly::default(), self.clone());
        }
        let mut quot = vec![Rational::zero(); rem.len() - dd];
        for i in (0..quot.len()).rev() {
            let c = &rem[i + dd] / dlead;
            if !c.is_zero() {
                for (j, dc) in divisor.coeffs.iter().enumerate() {
                    rem[i + j] -= &c * dc;
                }
            }
            quot[i] = c;
        }
        rem.truncate(dd);
        (RatPoly::new(quot), RatPoly::new(rem))
    }

    pub fn monic(&self) -> RatPoly {
        match self.coeffs.last() {
            Some(lead) => self.scale(&(Rational::one() / lead)),
            None => RatPoly::default(),
        }
    }

    pub fn gcd(&self, other: &RatPoly) -> RatPoly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// `p / gcd(p, p')`: same real roots, all simple.
    pub fn square_free(&self) -> RatPoly {
        if self.degree() < 1 {
            return self.clone();
        }
        let g = self.gcd(&self.derivative());
        if g.degree() == 0 {
            return self.clone();
        }
        self.div_rem(&g).0
    }

    pub fn to_poly(&self) -> Poly {
        Poly::new(self.coeffs.iter().map(rational::to_f64).collect())
    }

    /// Roots in `[a, b]` isolated on the square-free part, so multiple roots
    /// become simple sign changes before the floating-point bisection runs.
    pub fn roots_in(&self, a: f64, b: f64) -> Vec<f64> {
        if self.is_zero() {
            return Vec::new();
        }
        // rescale so the largest coefficient is 1 before converting
        let sf = self.square_free();
        let max = sf
            .coeffs
            .iter()
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(Rational::one);
        sf.scale(&(Rational::one() / max)).to_poly().roots_in(a, b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    #[test]
    fn eval_and_calculus() {
        let p = Poly::new(vec![1.0, 0.0, 0.25]);
        assert_eq!(p.eval(1.0), 1.25);
        assert_eq!(p.derivative().eval(1.0), 0.5);
        assert!((p.antiderivative().eval(1.0) - (1.0 + 1.0 / 12.0)).abs() < 1e-15);
    }

    #[test]
    fn simple_and_double_roots() {
        // (x - 0.3)(x + 0.7)
        let p = Poly::new(vec![-0.21, 0.4, 1.0]);
        let r = p.roots_in(-1.0, 1.0);
        assert_eq!(r.len(), 2);
        assert!((r[0] + 0.7).abs() < 1e-12 && (r[1] - 0.3).abs() < 1e-12);
        // x^2 has a double root at 0
        let q = Poly::new(vec![0.0, 0.0, 1.0]);
        assert_eq!(q.roots_in(-1.0, 1.0), vec![0.0]);
        // no root
        assert!(Poly::new(vec![1.0, 0.0, 1.0]).roots_in(-2.0, 2.0).is_empty());
    }

    #[test]
    fn cubic_three_roots() {
        // (x-0.1)(x-0.5)(x+0.4)
        let p = Poly::new(vec![0.02, -0.19, -0.2, 1.0]);
        let r = p.roots_in(-1.0, 1.0);
        assert_eq!(r.len(), 3, "{r:?}");
        for (got, want) in r.iter().zip([-0.4, 0.1, 0.5]) {
            assert!((got - want).abs() < 1e-11);
        }
    }

    #[test]
    fn exact_square_free() {
        // (x-1)^2 (x+2)
        let p = RatPoly::new(vec![int(2), int(-3), int(0), int(1)]);
        let sf = p.square_free();
        assert_eq!(sf.degree(), 2);
        let r = p.roots_in(-3.0, 3.0);
        assert_eq!(r.len(), 2);
        assert!((r[0] + 2.0).abs() < 1e-12 && (r[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_division() {
        let p = RatPoly::new(vec![int(-1), int(0), int(1)]);
        let d = RatPoly::new(vec![int(1), int(1)]);
        let (q, r) = p.div_rem(&d);
        assert_eq!(q, RatPoly::new(vec![int(-1), int(1)]));
        assert!(r.is_zero());
        assert_eq!(RatPoly::new(vec![int(1), rat(1, 2)]).eval(&int(2)), int(2));
    }
}
