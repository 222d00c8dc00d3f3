//! Stern–Brocot / Farey helpers on exact rationals.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::rational::Rational;

fn floor(x: &Rational) -> BigInt {
    x.numer().div_floor(x.denom())
}

/// The simplest rational strictly inside `(lo, hi)`: smallest denominator,
/// then smallest absolute value. `hi = None` stands for `+∞`.
///
/// Descends the Stern–Brocot tree one continued-fraction term at a time.
pub fn simplest_between(lo: &Rational, hi: Option<&Rational>) -> Rational {
    if let Some(h) = hi {
        assert!(lo < h, "empty interval");
    }
    let above_lo = floor(lo) + BigInt::one();
    let inside = |n: &BigInt| hi.map_or(true, |h| Rational::from_integer(n.clone()) < *h);
    if inside(&above_lo) {
        // an integer lies inside; pick the one closest to zero
        if lo.is_negative() {
            let h = match hi {
                Some(h) if !h.is_positive() => h,
                _ => return Rational::zero(),
            };
            let below_hi = {
                let c = -floor(&-h.clone()); // ceil(h)
                c - BigInt::one()
            };
            return Rational::from_integer(below_hi);
        }
        return Rational::from_integer(above_lo);
    }
    // lo and hi lie in [f, f + 1]; write x = f + 1/y
    let h = hi.expect("bounded here");
    let f = Rational::from_integer(floor(lo));
    let y_lo = Rational::one() / (h - &f);
    let y_hi = if *lo == f {
        None
    } else {
        Some(Rational::one() / (lo - &f))
    };
    let y = simplest_between(&y_lo, y_hi.as_ref());
    f + Rational::one() / y
}

/// Neighbours of `x` in the Farey sequence of order `n`: the closest
/// fractions with denominator `<= n` strictly below and above `x`. Returns
/// `None` when `x` itself has denominator `<= n`.
pub fn farey_neighbors(x: &Rational, n: u64) -> Option<(Rational, Rational)> {
    let n = BigInt::from(n);
    if *x.denom() <= n {
        return None;
    }
    let f = floor(x);
    let frac = x - Rational::from_integer(f.clone());
    let (mut ln, mut ld) = (BigInt::zero(), BigInt::one());
    let (mut rn, mut rd) = (BigInt::one(), BigInt::one());
    loop {
        // jump as many mediant steps toward one side as the order permits
        let md = &ld + &rd;
        if md > n {
            break;
        }
        let m = Rational::new(&ln + &rn, md.clone());
        if frac < m {
            // move right endpoint left: r = (l*k + r) for the largest k keeping x < r
            let mut k = BigInt::one();
            loop {
                let k2 = &k * 2u32;
                let cand_d = &ld * &k2 + &rd;
                if cand_d > n || !(frac < Rational::new(&ln * &k2 + &rn, cand_d)) {
                    break;
                }
                k = k2;
            }
            rn = &ln * &k + &rn;
            rd = &ld * &k + &rd;
        } else {
            let mut k = BigInt::one();
            loop {
                let k2 = &k * 2u32;
                let cand_d = &rd * &k2 + &ld;
                if cand_d > n || !(frac > Rational::new(&rn * &k2 + &ln, cand_d)) {
                    break;
                }
                k = k2;
            }
            ln = &rn * &k + &ln;
            ld = &rd * &k + &ld;
        }
    }
    let fr = Rational::from_integer(f);
    Some((
        Rational::new(ln, ld) + &fr,
        Rational::new(rn, rd) + fr,
    ))
}
