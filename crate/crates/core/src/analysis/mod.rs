//! Verifiers for the analytic lemmas behind the systolic bound: a volume
//! bound for functions with positive return time, the slope-pinning lemma
//! under the rational sieve, and the almost-linearity estimate for
//! potentials satisfying C1–C3.
//!
//! Hypotheses are certified first and reported separately; a conclusion is
//! only evaluated once every hypothesis holds.

mod generate;
mod suite;

pub use generate::{generate_admissible, Admissible, GeneratorConfig, Profile};
pub use suite::{run_suite, Lemma, TrialRecord};

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::farey;
use crate::orbits::{self, C1Outcome, SieveOutcome};
use crate::poly::Poly;
use crate::potential::Potential;
use crate::rational::{self, int, rat, Rational};

/// Relative slack for strict comparisons on floating-point values.
pub const FLOAT_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub passed: bool,
    /// Human-readable witnesses: where each check was decided and by how much.
    pub witnesses: Vec<String>,
}

impl Verdict {
    fn new() -> Self {
        Verdict {
            passed: true,
            witnesses: Vec::new(),
        }
    }

    fn record(&mut self, ok: bool, msg: String) {
        self.passed &= ok;
        self.witnesses.push(msg);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaReport {
    pub hypothesis: Verdict,
    /// `None` when a hypothesis failed.
    pub conclusion: Option<Verdict>,
    /// Left and right sides of the concluded strict inequality `lhs < rhs`.
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`: the smallest slack observed.
    pub extremal_margin: f64,
}

impl LemmaReport {
    fn hypothesis_failed(hypothesis: Verdict) -> Self {
        LemmaReport {
            hypothesis,
            conclusion: None,
            lhs: f64::NAN,
            rhs: f64::NAN,
            extremal_margin: f64::NAN,
        }
    }

    fn concluded(hypothesis: Verdict, lhs: f64, rhs: f64, passed: bool, witness: String) -> Self {
        LemmaReport {
            hypothesis,
            conclusion: Some(Verdict {
                passed,
                witnesses: vec![witness],
            }),
            lhs,
            rhs,
            extremal_margin: rhs - lhs,
        }
    }

    pub fn hypothesis_passed(&self) -> bool {
        self.hypothesis.passed
    }

    /// `Some(false)` is a genuine violation of the lemma.
    pub fn conclusion_passed(&self) -> Option<bool> {
        self.conclusion.as_ref().map(|c| c.passed)
    }
}

fn slack(scale: f64) -> f64 {
    FLOAT_SLACK * (1.0 + scale.abs())
}

/// Extremum of `g(piece)` over `[a, b]`, where `g` maps each piece
/// polynomial to the polynomial to examine. Returns `(x, value)` of the
/// maximum of `|g|` when `abs` is set, otherwise of the minimum of `g`.
fn piecewise_extremum(
    pot: &Potential,
    a: f64,
    b: f64,
    g: impl Fn(&Poly) -> Poly,
    abs: bool,
) -> (f64, f64) {
    let mut best: Option<(f64, f64)> = None;
    for (lo, hi, p) in pot.pieces() {
        let (u, v) = (lo.max(a), hi.min(b));
        if u > v {
            continue;
        }
        let q = g(p);
        let ((xmin, vmin), (xmax, vmax)) = q.extrema(u, v);
        let cand = if abs {
            if vmax.abs() >= vmin.abs() {
                (xmax, vmax.abs())
            } else {
                (xmin, vmin.abs())
            }
        } else {
            (xmin, vmin)
        };
        let better = match best {
            None => true,
            Some((_, w)) if abs => cand.1 > w,
            Some((_, w)) => cand.1 < w,
        };
        if better {
            best = Some(cand);
        }
    }
    best.expect("interval meets the domain")
}

fn check_domain(pot: &Potential, lo: f64, hi: f64, hyp: &mut Verdict) -> bool {
    let ok = pot.k_min() == lo && pot.k_max() == hi;
    hyp.record(
        ok,
        format!(
            "domain [{}, {}] (required [{lo}, {hi}])",
            pot.k_min(),
            pot.k_max()
        ),
    );
    ok
}

fn record_c1(pot: &Potential, hyp: &mut Verdict, name: &str) {
    match orbits::check_c1(pot) {
        C1Outcome::Pass { tau_min } => hyp.record(true, format!("{name}: min f - x f' = {tau_min}")),
        C1Outcome::Violation { k, tau } => {
            hyp.record(false, format!("{name}: f - x f' = {tau} at x = {k}"))
        }
    }
}

fn record_sieve(outcome: SieveOutcome, hyp: &mut Verdict, name: &str) {
    match outcome {
        SieveOutcome::Pass { q_scanned } => {
            hyp.record(true, format!("{name}: rational slopes checked for q <= {q_scanned}"))
        }
        SieveOutcome::Violation { k, p, q, tau } => hyp.record(
            false,
            format!("{name}: slope {p}/{q} at x = {k} has return time {tau} < 1/{q}"),
        ),
        SieveOutcome::Undecided { tau_min } => hyp.record(
            false,
            format!("{name}: min return time {tau_min} is not positive, scan is not finite"),
        ),
    }
}

/// `f >= 0` and `f - x f' > 0` on `(0, 1)` imply `x f(x) < 2 ∫₀¹ f` on `[0, 1]`.
pub fn verify_lemma_5_1(f: &Potential) -> LemmaReport {
    let mut hyp = Verdict::new();
    if !check_domain(f, 0.0, 1.0, &mut hyp) {
        return LemmaReport::hypothesis_failed(hyp);
    }
    let (xm, fmin) = piecewise_extremum(f, 0.0, 1.0, Poly::clone, false);
    let nonneg = fmin >= -slack(f.coefficient_scale());
    hyp.record(nonneg, format!("min f = {fmin} at x = {xm}"));
    record_c1(f, &mut hyp, "f - x f' > 0");
    if !hyp.passed {
        return LemmaReport::hypothesis_failed(hyp);
    }

    let integral = match &f.exact() {
        Some(ex) => rational::to_f64(
            &ex.polys
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    let a = p.antiderivative();
                    a.eval(&ex.breaks[i + 1]) - a.eval(&ex.breaks[i])
                })
                .fold(Rational::zero(), |s, v| s + v),
        ),
        None => f
            .pieces()
            .map(|(lo, hi, p)| {
                let a = p.antiderivative();
                a.eval(hi) - a.eval(lo)
            })
            .sum(),
    };
    let rhs = 2.0 * integral;
    let (x, lhs) = piecewise_extremum(f, 0.0, 1.0, |p| p.mul_x().scale(-1.0), false);
    let lhs = -lhs;
    let ok = lhs < rhs + slack(rhs);
    LemmaReport::concluded(hyp, lhs, rhs, ok, format!("max x f(x) = {lhs} at x = {x}"))
}

/// Sieve on `[0, 1/2]`, `a ∈ (0, 1/20)` and `max_{[1/4,1/2]} |f - b x| < a`
/// imply `max_{[0,1/4]} |f' - b| < 28 a`.
pub fn verify_lemma_5_2(f: &Potential, a: &Rational, b: &Rational) -> LemmaReport {
    let mut hyp = Verdict::new();
    if !check_domain(f, 0.0, 0.5, &mut hyp) {
        return LemmaReport::hypothesis_failed(hyp);
    }
    let (af, bf) = (rational::to_f64(a), rational::to_f64(b));
    hyp.record(
        a.is_positive() && *a < rat(1, 20),
        format!("a = {} in (0, 1/20)", rational::format(a)),
    );
    let linear = Poly::new(vec![0.0, bf]);
    let (x, dev) = piecewise_extremum(f, 0.25, 0.5, |p| p.sub(&linear), true);
    hyp.record(
        dev < af - slack(af),
        format!("max |f - b x| on [1/4, 1/2] = {dev} at x = {x}"),
    );
    record_sieve(orbits::check_sieve(f), &mut hyp, "sieve");
    if !hyp.passed {
        return LemmaReport::hypothesis_failed(hyp);
    }
    let slope = Poly::constant(bf);
    let (x, lhs) = piecewise_extremum(f, 0.0, 0.25, |p| p.derivative().sub(&slope), true);
    let rhs = 28.0 * af;
    let ok = lhs < rhs + slack(rhs);
    LemmaReport::concluded(hyp, lhs, rhs, ok, format!("max |f' - b| on [0, 1/4] = {lhs} at x = {x}"))
}

/// C1, C2, C3 on `[-1, 1]` imply `|J(1) + J(-1)| < 224 ∫ τ`.
pub fn verify_prop_5_3(j: &Potential) -> LemmaReport {
    let mut hyp = Verdict::new();
    if !check_domain(j, -1.0, 1.0, &mut hyp) {
        return LemmaReport::hypothesis_failed(hyp);
    }
    match orbits::check_c1(j) {
        C1Outcome::Pass { tau_min } => hyp.record(true, format!("C1: min tau = {tau_min}")),
        C1Outcome::Violation { k, tau } => hyp.record(false, format!("C1: tau = {tau} at k = {k}")),
    }
    record_sieve(orbits::check_sieve(j), &mut hyp, "C2");
    let c3 = orbits::check_c3(j).expect("domain is [-1, 1]");
    hyp.record(c3.passed, format!("C3: integral of tau = {}", c3.integral));
    if !hyp.passed {
        return LemmaReport::hypothesis_failed(hyp);
    }
    let exact = match (
        j.eval_exact(&int(1)),
        j.eval_exact(&int(-1)),
        c3.exact_integral.clone(),
    ) {
        (Some(p), Some(m), Some(v)) => Some((rational::abs(&(p + m)), v * int(224))),
        _ => None,
    };
    let (lhs, rhs, ok) = match exact {
        Some((l, r)) => (rational::to_f64(&l), rational::to_f64(&r), l < r),
        None => {
            let l = (j.eval(1.0).unwrap() + j.eval(-1.0).unwrap()).abs();
            let r = 224.0 * c3.integral;
            (l, r, l < r + slack(r))
        }
    };
    LemmaReport::concluded(hyp, lhs, rhs, ok, format!("|J(1) + J(-1)| = {lhs}, 224 * integral = {rhs}"))
}

/// A fraction `p/q` in the closed interval `[lo, hi]` with the smallest
/// denominator, hence `1/q >= (hi - lo)/2`.
pub fn sieve_rational(lo: &Rational, hi: &Rational) -> Result<(i64, i64)> {
    let len = hi - lo;
    if !len.is_positive() || len >= int(1) {
        return Err(Error::Interval {
            lo: rational::format(lo),
            hi: rational::format(hi),
            reason: "length must lie in (0, 1)".into(),
        });
    }
    let inner = farey::simplest_between(lo, Some(hi));
    let simpler = |x: &Rational, y: &Rational| {
        (x.denom(), rational::abs(x)) < (y.denom(), rational::abs(y))
    };
    let mut best = inner;
    for end in [lo, hi] {
        if simpler(end, &best) {
            best = end.clone();
        }
    }
    let to_i64 = |v: &num_bigint::BigInt| {
        i64::try_from(v.clone()).map_err(|_| Error::Interval {
            lo: rational::format(lo),
            hi: rational::format(hi),
            reason: "fraction does not fit in 64 bits".into(),
        })
    };
    Ok((to_i64(best.numer())?, to_i64(best.denom())?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact(lo: Rational, hi: Rational, c: Vec<Rational>) -> Potential {
        Potential::exact_polynomial(lo, hi, c).unwrap()
    }

    #[test]
    fn nonnegativity_examples() {
        let r = verify_lemma_5_1(&exact(int(0), int(1), vec![int(1)]));
        assert_eq!(r.conclusion_passed(), Some(true));
        assert_eq!((r.lhs, r.rhs), (1.0, 2.0));

        let r = verify_lemma_5_1(&exact(int(0), int(1), vec![int(1), int(0), rat(-1, 2)]));
        assert_eq!(r.conclusion_passed(), Some(true));
        // x (1 - x^2/2) peaks at x = sqrt(2/3) with value (2/3)^{3/2}
        assert!((r.lhs - (2.0f64 / 3.0).powf(1.5)).abs() < 1e-12);
        assert!((r.rhs - 5.0 / 3.0).abs() < 1e-15);

        let r = verify_lemma_5_1(&exact(int(0), int(1), vec![int(0), int(1)]));
        assert!(!r.hypothesis_passed());
        assert_eq!(r.conclusion_passed(), None);
    }

    #[test]
    fn near_linear_examples() {
        let half = rat(1, 2);
        let r = verify_lemma_5_2(&exact(int(0), half.clone(), vec![int(0), int(1)]), &rat(1, 25), &int(1));
        assert!(!r.hypothesis_passed());
        let r = verify_lemma_5_2(
            &exact(int(0), half.clone(), vec![int(1), rat(1, 2)]),
            &rat(1, 25),
            &rat(1, 2),
        );
        assert!(!r.hypothesis_passed());
        assert!(r.hypothesis.witnesses.iter().any(|w| w.contains("|f - b x|")));
        // f = 1/30 + (2/5 + 1/1000) x: slope between 2/5 and 3/7, tau = 1/30
        let f = exact(int(0), half, vec![rat(1, 30), rat(401, 1000)]);
        let r = verify_lemma_5_2(&f, &rat(2, 45), &rat(401, 1000));
        assert!(r.hypothesis_passed(), "{:?}", r.hypothesis);
        assert_eq!(r.conclusion_passed(), Some(true));
    }

    #[test]
    fn c1_c2_c3_examples() {
        let r = verify_prop_5_3(&exact(int(-1), int(1), vec![rat(1, 200)]));
        assert!(!r.hypothesis_passed());
        assert!(r.hypothesis.witnesses.iter().any(|w| w.contains("slope 0/1")));
        let r = verify_prop_5_3(&exact(int(-1), int(1), vec![rat(1, 200), int(1)]));
        assert!(!r.hypothesis_passed());
        // tau = 1/200 and the only slope 501/1000 has q = 1000 > 200
        let j = exact(int(-1), int(1), vec![rat(1, 200), rat(501, 1000)]);
        let r = verify_prop_5_3(&j);
        assert!(r.hypothesis_passed(), "{:?}", r.hypothesis);
        assert_eq!(r.conclusion_passed(), Some(true));
        assert_eq!(r.lhs, 0.01);
        assert!((r.rhs - 2.24).abs() < 1e-12);
    }

    #[test]
    fn sieve_examples() {
        assert_eq!(sieve_rational(&rat(3, 10), &rat(1, 2)).unwrap(), (1, 2));
        assert_eq!(sieve_rational(&rat(-1, 10), &rat(1, 10)).unwrap(), (0, 1));
        let (p, q) = sieve_rational(&rat(1, 100), &rat(21, 100)).unwrap();
        assert_eq!((p, q), (1, 5));
        assert!(sieve_rational(&int(0), &int(1)).is_err());
        assert!(sieve_rational(&int(1), &int(1)).is_err());
    }
}
