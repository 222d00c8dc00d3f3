//! Piecewise-polynomial potentials `J` on a closed interval `[k_min, k_max]`.
//!
//! Polynomials are expressed in the global variable `k` (not shifted to the
//! piece start). A potential built from exact rational data keeps that data
//! alongside the `f64` view so integrals and constant slopes stay exact.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::poly::{Poly, RatPoly};
use crate::rational::{self, Rational};

/// Matching tolerance for values and slopes at interior breakpoints of
/// floating-point potentials.
pub const C1_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ExactPieces {
    pub breaks: Vec<Rational>,
    pub polys: Vec<RatPoly>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    breaks: Vec<f64>,
    polys: Vec<Poly>,
    exact: Option<ExactPieces>,
}

/// Location and value of the smallest return time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauMin {
    pub k: f64,
    pub value: f64,
}

impl Potential {
    /// `breaks` has one more entry than `pieces`; first and last are the domain ends.
    pub fn from_floats(breaks: Vec<f64>, pieces: Vec<Vec<f64>>) -> Result<Self> {
        let polys = pieces.into_iter().map(Poly::new).collect();
        let p = Potential {
            breaks,
            polys,
            exact: None,
        };
        p.check_structure()?;
        Ok(p)
    }

    pub fn from_exact(breaks: Vec<Rational>, pieces: Vec<Vec<Rational>>) -> Result<Self> {
        let polys: Vec<RatPoly> = pieces.into_iter().map(RatPoly::new).collect();
        let p = Potential {
            breaks: breaks.iter().map(rational::to_f64).collect(),
            polys: polys.iter().map(RatPoly::to_poly).collect(),
            exact: Some(ExactPieces { breaks, polys }),
        };
        p.check_structure()?;
        Ok(p)
    }

    /// Single polynomial piece with `f64` coefficients.
    pub fn polynomial(k_min: f64, k_max: f64, coeffs: Vec<f64>) -> Result<Self> {
        Potential::from_floats(vec![k_min, k_max], vec![coeffs])
    }

    /// Single polynomial piece with exact coefficients.
    pub fn exact_polynomial(k_min: Rational, k_max: Rational, coeffs: Vec<Rational>) -> Result<Self> {
        Potential::from_exact(vec![k_min, k_max], vec![coeffs])
    }

    fn check_structure(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidPotential(m));
        if self.polys.is_empty() {
            return bad("no pieces".into());
        }
        if self.breaks.len() != self.polys.len() + 1 {
            return bad(format!(
                "{} breakpoints for {} pieces",
                self.breaks.len(),
                self.polys.len()
            ));
        }
        if self.breaks.iter().any(|b| !b.is_finite())
            || self.polys.iter().any(|p| p.coeffs().iter().any(|c| !c.is_finite()))
        {
            return bad("non-finite number".into());
        }
        match &self.exact {
            Some(ex) => {
                if ex.breaks.windows(2).any(|w| w[0] >= w[1]) {
                    return bad("breakpoints must be strictly increasing".into());
                }
                for (i, b) in ex.breaks[1..ex.breaks.len() - 1].iter().enumerate() {
                    let (l, r) = (&ex.polys[i], &ex.polys[i + 1]);
                    if l.eval(b) != r.eval(b) || l.derivative().eval(b) != r.derivative().eval(b) {
                        return bad(format!("not C1 at breakpoint {}", rational::format(b)));
                    }
                }
            }
            None => {
                if self.breaks.windows(2).any(|w| w[0] >= w[1]) {
                    return bad("breakpoints must be strictly increasing".into());
                }
                for (i, &b) in self.breaks[1..self.breaks.len() - 1].iter().enumerate() {
                    let (l, r) = (&self.polys[i], &self.polys[i + 1]);
                    let tol = |p: &Poly, q: &Poly| C1_TOLERANCE * p.magnitude(b).max(q.magnitude(b)).max(1.0);
                    let (dl, dr) = (l.derivative(), r.derivative());
                    if (l.eval(b) - r.eval(b)).abs() > tol(l, r)
                        || (dl.eval(b) - dr.eval(b)).abs() > tol(&dl, &dr)
                    {
                        return bad(format!("not C1 at breakpoint {b}"));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn k_min(&self) -> f64 {
        self.breaks[0]
    }

    pub fn k_max(&self) -> f64 {
        self.breaks[self.breaks.len() - 1]
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn polys(&self) -> &[Poly] {
        &self.polys
    }

    pub fn exact(&self) -> Option<&ExactPieces> {
        self.exact.as_ref()
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn num_pieces(&self) -> usize {
        self.polys.len()
    }

    /// Pieces as `(lo, hi, poly)`.
    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64, &Poly)> + '_ {
        self.polys
            .iter()
            .enumerate()
            .map(move |(i, p)| (self.breaks[i], self.breaks[i + 1], p))
    }

    pub fn contains(&self, k: f64) -> bool {
        k >= self.k_min() && k <= self.k_max()
    }

    fn piece_index(&self, k: f64) -> Result<usize> {
        if !self.contains(k) {
            return Err(Error::OutOfDomain {
                k,
                k_min: self.k_min(),
                k_max: self.k_max(),
            });
        }
        let idx = self.breaks[1..].partition_point(|&b| b < k);
        Ok(idx.min(self.polys.len() - 1))
    }

    pub fn eval(&self, k: f64) -> Result<f64> {
        Ok(self.polys[self.piece_index(k)?].eval(k))
    }

    pub fn deriv(&self, k: f64) -> Result<f64> {
        Ok(self.polys[self.piece_index(k)?].derivative().eval(k))
    }

    /// Second derivative; at a breakpoint the left piece is used.
    pub fn second_deriv(&self, k: f64) -> Result<f64> {
        Ok(self.polys[self.piece_index(k)?].derivative().derivative().eval(k))
    }

    /// Return time `J(k) - k J'(k)` of the first-return map at level `k`.
    pub fn return_time(&self, k: f64) -> Result<f64> {
        let p = &self.polys[self.piece_index(k)?];
        Ok(p.eval(k) - k * p.derivative().eval(k))
    }

    fn exact_piece_index(&self, k: &Rational) -> Option<usize> {
        let ex = self.exact.as_ref()?;
        if k < &ex.breaks[0] || k > ex.breaks.last()? {
            return None;
        }
        let idx = ex.breaks[1..].partition_point(|b| b < k);
        Some(idx.min(ex.polys.len() - 1))
    }

    pub fn eval_exact(&self, k: &Rational) -> Option<Rational> {
        let i = self.exact_piece_index(k)?;
        Some(self.exact.as_ref()?.polys[i].eval(k))
    }

    pub fn deriv_exact(&self, k: &Rational) -> Option<Rational> {
        let i = self.exact_piece_index(k)?;
        Some(self.exact.as_ref()?.polys[i].derivative().eval(k))
    }

    pub fn return_time_exact(&self, k: &Rational) -> Option<Rational> {
        let i = self.exact_piece_index(k)?;
        let p = &self.exact.as_ref()?.polys[i];
        Some(p.eval(k) - k * p.derivative().eval(k))
    }

    /// Return time polynomial `P - k P'` of each piece.
    pub fn tau_polys(&self) -> Vec<Poly> {
        self.polys
            .iter()
            .map(|p| p.sub(&p.derivative().mul_x()))
            .collect()
    }

    pub fn exact_tau_polys(&self) -> Option<Vec<RatPoly>> {
        Some(
            self.exact
                .as_ref()?
                .polys
                .iter()
                .map(|p| p.sub(&p.derivative().mul_x()))
                .collect(),
        )
    }

    /// Roots of `J''` inside piece `i` (exact square-free isolation when available).
    pub(crate) fn second_deriv_roots(&self, i: usize) -> Vec<f64> {
        let (lo, hi) = (self.breaks[i], self.breaks[i + 1]);
        match &self.exact {
            Some(ex) => ex.polys[i].derivative().derivative().roots_in(lo, hi),
            None => self.polys[i].derivative().derivative().roots_in(lo, hi),
        }
    }

    /// Global minimum of the return time over the closed domain.
    ///
    /// Since `tau' = -k J''`, candidates are piece ends, `k = 0` and the roots
    /// of `J''`. Candidates that are rational are evaluated exactly when the
    /// potential is exact.
    pub fn tau_min(&self) -> TauMin {
        let mut best = TauMin {
            k: self.k_min(),
            value: f64::INFINITY,
        };
        let taus = self.tau_polys();
        for (i, tau) in taus.iter().enumerate() {
            let (lo, hi) = (self.breaks[i], self.breaks[i + 1]);
            let mut cands: Vec<(f64, Option<Rational>)> = Vec::new();
            if let Some(ex) = &self.exact {
                cands.push((lo, Some(ex.breaks[i].clone())));
                cands.push((hi, Some(ex.breaks[i + 1].clone())));
                if lo < 0.0 && hi > 0.0 {
                    cands.push((0.0, Some(Rational::zero())));
                }
            } else {
                cands.push((lo, None));
                cands.push((hi, None));
                if lo < 0.0 && hi > 0.0 {
                    cands.push((0.0, None));
                }
            }
            cands.extend(self.second_deriv_roots(i).into_iter().map(|r| (r, None)));
            for (k, exact_k) in cands {
                let v = match (&self.exact, exact_k) {
                    (Some(ex), Some(kq)) => {
                        let p = &ex.polys[i];
                        rational::to_f64(&(p.eval(&kq) - &kq * p.derivative().eval(&kq)))
                    }
                    _ => tau.eval(k),
                };
                if v < best.value {
                    best = TauMin { k, value: v };
                }
            }
        }
        best
    }

    /// Largest return time over the closed domain.
    pub fn tau_max(&self) -> f64 {
        self.tau_polys()
            .iter()
            .zip(self.breaks.windows(2))
            .map(|(t, w)| t.extrema(w[0], w[1]).1 .1)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `∫ (J - k J') dk` over the domain, via the antiderivative `2∫J - kJ`.
    pub fn volume_contribution(&self) -> f64 {
        if let Some(v) = self.volume_contribution_exact() {
            return rational::to_f64(&v);
        }
        self.pieces()
            .map(|(lo, hi, p)| {
                let f = volume_antiderivative(p);
                f.eval(hi) - f.eval(lo)
            })
            .sum()
    }

    pub fn volume_contribution_exact(&self) -> Option<Rational> {
        let ex = self.exact.as_ref()?;
        Some(
            ex.polys
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    let f = exact_volume_antiderivative(p);
                    f.eval(&ex.breaks[i + 1]) - f.eval(&ex.breaks[i])
                })
                .fold(Rational::zero(), |a, b| a + b),
        )
    }

    /// Restriction to `[lo, hi]`, which must lie inside the domain.
    pub fn restrict(&self, lo: &Rational, hi: &Rational) -> Result<Potential> {
        let (flo, fhi) = (rational::to_f64(lo), rational::to_f64(hi));
        if !(flo < fhi) || !self.contains(flo) || !self.contains(fhi) {
            return Err(Error::OutOfDomain {
                k: if self.contains(flo) { fhi } else { flo },
                k_min: self.k_min(),
                k_max: self.k_max(),
            });
        }
        match &self.exact {
            Some(ex) => {
                let mut breaks = vec![lo.clone()];
                let mut pieces = Vec::new();
                for (i, p) in ex.polys.iter().enumerate() {
                    let (a, b) = (&ex.breaks[i], &ex.breaks[i + 1]);
                    if b <= lo || a >= hi {
                        continue;
                    }
                    pieces.push(p.coeffs().to_vec());
                    breaks.push(if b < hi { b.clone() } else { hi.clone() });
                }
                Potential::from_exact(breaks, pieces)
            }
            None => {
                let mut breaks = vec![flo];
                let mut pieces = Vec::new();
                for (a, b, p) in self.pieces() {
                    if b <= flo || a >= fhi {
                        continue;
                    }
                    pieces.push(p.coeffs().to_vec());
                    breaks.push(b.min(fhi));
                }
                Potential::from_floats(breaks, pieces)
            }
        }
    }

    /// `k ↦ λ J(k / λ)` on `[λ k_min, λ k_max]`, for `λ > 0`.
    pub fn rescaled(&self, lambda: f64) -> Result<Potential> {
        assert!(lambda > 0.0);
        let scale_poly = |c: &[f64]| -> Vec<f64> {
            c.iter()
                .enumerate()
                .map(|(n, &a)| a * lambda.powi(1 - n as i32))
                .collect()
        };
        Potential::from_floats(
            self.breaks.iter().map(|b| b * lambda).collect(),
            self.polys.iter().map(|p| scale_poly(p.coeffs())).collect(),
        )
    }

    /// Same as [`Potential::rescaled`] with an exact factor.
    pub fn rescaled_exact(&self, lambda: &Rational) -> Option<Result<Potential>> {
        let ex = self.exact.as_ref()?;
        let pieces = ex
            .polys
            .iter()
            .map(|p| {
                let mut f = lambda.clone();
                p.coeffs()
                    .iter()
                    .map(|c| {
                        let out = c * &f;
                        f /= lambda;
                        out
                    })
                    .collect()
            })
            .collect();
        Some(Potential::from_exact(
            ex.breaks.iter().map(|b| b * lambda).collect(),
            pieces,
        ))
    }

    /// Adds a constant to every piece.
    pub fn shifted(&self, c: &Rational) -> Potential {
        let mut out = self.clone();
        let cf = rational::to_f64(c);
        out.polys = out.polys.iter().map(|p| p.add(&Poly::constant(cf))).collect();
        if let Some(ex) = &mut out.exact {
            ex.polys = ex.polys.iter().map(|p| p.add(&RatPoly::constant(c.clone()))).collect();
        }
        out
    }

    /// Largest absolute coefficient, used to scale tolerances.
    pub fn coefficient_scale(&self) -> f64 {
        self.polys
            .iter()
            .flat_map(|p| p.coeffs().iter().map(|c| c.abs()))
            .fold(1.0, f64::max)
    }
}

/// `F = 2∫P - kP`, so that `F' = P - kP'`.
pub fn volume_antiderivative(p: &Poly) -> Poly {
    p.antiderivative().scale(2.0).sub(&p.mul_x())
}

pub fn exact_volume_antiderivative(p: &RatPoly) -> RatPoly {
    p.antiderivative()
        .scale(&rational::int(2))
        .sub(&p.mul_x())
}
