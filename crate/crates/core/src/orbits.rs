//! Closed Reeb orbits inside a component: levels `k` where the slope `J'(k)`
//! equals a rational `p/q`, each giving an orbit of minimal period
//! `q (J(k) - k J'(k))`.
//!
//! Rather than testing sampled slopes for rationality, every candidate `p/q`
//! is solved for exactly: `J'` is split into monotone segments at the roots of
//! `J''`, and each segment hits `p/q` at most once. Pieces on which `J'` is
//! constant are reported once, as a band.

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::farey;
use crate::poly::{bisect, Poly};
use crate::potential::Potential;
use crate::rational::{self, Rational};

/// Hard ceiling on the denominators a single scan may visit.
pub const MAX_SCAN_Q: u64 = 20_000_000;

/// Default denominator limit for [`min_orbit_period`].
pub const DEFAULT_MAX_Q: u64 = 2_000_000;

/// Relative tolerance for slope comparisons on the floating-point path.
const SLOPE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum OrbitKind {
    IsolatedRoot,
    /// `J'` is identically `p/q` on `[lo, hi]`: a single family of orbits.
    ConstantSlopeBand { lo: f64, hi: f64 },
}

impl OrbitKind {
    pub fn label(&self) -> &'static str {
        match self {
            OrbitKind::IsolatedRoot => "isolated-root",
            OrbitKind::ConstantSlopeBand { .. } => "constant-slope-band",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub k: f64,
    pub p: i64,
    pub q: i64,
    pub minimal_period: f64,
    pub kind: OrbitKind,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    piece: usize,
    u: f64,
    v: f64,
    su: f64,
    sv: f64,
}

#[derive(Debug, Clone)]
struct Band {
    lo: f64,
    hi: f64,
    p: i64,
    q: i64,
    tau: f64,
    tau_exact: Option<Rational>,
}

/// Precomputed monotone structure of `J'` for repeated `J'(k) = p/q` solves.
#[derive(Debug, Clone)]
pub struct SlopeScanner<'a> {
    pot: &'a Potential,
    slopes: Vec<Poly>,
    segments: Vec<Segment>,
    bands: Vec<Band>,
}

impl<'a> SlopeScanner<'a> {
    pub fn new(pot: &'a Potential) -> Self {
        let slopes: Vec<Poly> = pot.polys().iter().map(Poly::derivative).collect();
        let mut segments = Vec::new();
        let mut bands = Vec::new();
        for (i, (lo, hi, poly)) in pot.pieces().enumerate() {
            let constant_slope = match pot.exact() {
                Some(ex) => ex.polys[i].degree() <= 1,
                None => poly
                    .derivative()
                    .derivative()
                    .is_negligible(SLOPE_TOL * pot.coefficient_scale()),
            };
            if constant_slope {
                if let Some(b) = Self::band(pot, i, lo, hi, &slopes[i]) {
                    bands.push(b);
                }
                continue;
            }
            let mut cuts = vec![lo];
            cuts.extend(
                pot.second_deriv_roots(i)
                    .into_iter()
                    .filter(|&r| r > lo && r < hi),
            );
            cuts.push(hi);
            for w in cuts.windows(2) {
                let (u, v) = (w[0], w[1]);
                segments.push(Segment {
                    piece: i,
                    u,
                    v,
                    su: slopes[i].eval(u),
                    sv: slopes[i].eval(v),
                });
            }
        }
        SlopeScanner {
            pot,
            slopes,
            segments,
            bands,
        }
    }

    fn band(pot: &Potential, i: usize, lo: f64, hi: f64, slope: &Poly) -> Option<Band> {
        let mid = 0.5 * (lo + hi);
        let (s, tau_exact) = match pot.exact() {
            Some(ex) => {
                let p = &ex.polys[i];
                let s = p.derivative().eval(&ex.breaks[i]);
                let t = p.eval(&ex.breaks[i]) - &ex.breaks[i] * &s;
                (s, Some(t))
            }
            None => {
                let s = slope.eval(mid);
                let tol = SLOPE_TOL * s.abs().max(1.0);
                let lo_r = rational::from_f64(s - tol)?;
                let hi_r = rational::from_f64(s + tol)?;
                (farey::simplest_between(&lo_r, Some(&hi_r)), None)
            }
        };
        let p = s.numer().to_i64()?;
        let q = s.denom().to_i64()?;
        let tau = match &tau_exact {
            Some(t) => rational::to_f64(t),
            None => pot.polys()[i].eval(mid) - mid * slope.eval(mid),
        };
        Some(Band {
            lo,
            hi,
            p,
            q,
            tau,
            tau_exact,
        })
    }

    pub fn potential(&self) -> &Potential {
        self.pot
    }

    /// Numerators `p` for which `p/q` may be attained on a non-band segment.
    pub fn numerators(&self, q: i64) -> Vec<i64> {
        let qf = q as f64;
        let mut out: Vec<i64> = Vec::new();
        for s in &self.segments {
            let (a, b) = (s.su.min(s.sv), s.su.max(s.sv));
            let tol = SLOPE_TOL * a.abs().max(b.abs()).max(1.0);
            let lo = ((a - tol) * qf).ceil() as i64;
            let hi = ((b + tol) * qf).floor() as i64;
            out.extend(lo..=hi);
        }
        out.sort_unstable();
        out.dedup();
        out.retain(|p| p.gcd(&q) == 1);
        out
    }

    /// Levels where `J'(k) = p/q` outside constant-slope bands. `closed`
    /// decides whether the domain ends are admissible.
    pub fn roots(&self, p: i64, q: i64, closed: bool) -> Vec<f64> {
        let t = p as f64 / q as f64;
        let tol = SLOPE_TOL * t.abs().max(1.0);
        let mut out: Vec<f64> = Vec::new();
        for s in &self.segments {
            let (a, b) = (s.su.min(s.sv), s.su.max(s.sv));
            if t < a - tol || t > b + tol {
                continue;
            }
            let k = if (s.su - t).abs() <= tol {
                s.u
            } else if (s.sv - t).abs() <= tol {
                s.v
            } else {
                let f = |k: f64| self.slopes[s.piece].eval(k) - t;
                bisect(f, s.u, s.v, s.su - t)
            };
            out.push(k);
        }
        let (kmin, kmax) = (self.pot.k_min(), self.pot.k_max());
        out.retain(|&k| closed || (k > kmin && k < kmax));
        out.retain(|&k| {
            !self
                .bands
                .iter()
                .any(|b| b.p == p && b.q == q && k >= b.lo && k <= b.hi)
        });
        out.sort_by(f64::total_cmp);
        out.dedup_by(|x, y| (*x - *y).abs() <= 1e-10 * (1.0 + y.abs()));
        out
    }

    fn band_records(&self) -> impl Iterator<Item = (OrbitRecord, &Band)> + '_ {
        self.bands.iter().map(|b| {
            (
                OrbitRecord {
                    k: 0.5 * (b.lo + b.hi),
                    p: b.p,
                    q: b.q,
                    minimal_period: b.q as f64 * b.tau,
                    kind: OrbitKind::ConstantSlopeBand { lo: b.lo, hi: b.hi },
                },
                b,
            )
        })
    }

    fn record(&self, k: f64, p: i64, q: i64) -> OrbitRecord {
        OrbitRecord {
            k,
            p,
            q,
            minimal_period: orbit_period(self.pot, k, q),
            kind: OrbitKind::IsolatedRoot,
        }
    }
}

/// `q · τ(k)`; also used to re-derive a certified period.
pub fn orbit_period(pot: &Potential, k: f64, q: i64) -> f64 {
    q as f64 * pot.return_time(k).expect("orbit level inside domain")
}

fn positive_tau_min(pot: &Potential) -> Result<f64> {
    let t = pot.tau_min().value;
    if t > 0.0 {
        Ok(t)
    } else {
        Err(Error::Degenerate { tau_min: t })
    }
}

/// Every closed orbit in the open domain with period `<= period_bound`,
/// sorted by `(q, p, k)`.
///
/// Only `q <= period_bound / tau_min` can contribute, so the scan is finite.
pub fn closed_orbits(pot: &Potential, period_bound: f64) -> Result<Vec<OrbitRecord>> {
    let tau_min = positive_tau_min(pot)?;
    let q_max = (period_bound / tau_min).floor();
    if q_max > MAX_SCAN_Q as f64 {
        return Err(Error::InvalidPotential(format!(
            "period bound {period_bound} needs denominators up to {q_max}, above the scan limit {MAX_SCAN_Q}"
        )));
    }
    let scanner = SlopeScanner::new(pot);
    let mut out: Vec<OrbitRecord> = scanner
        .band_records()
        .map(|(r, _)| r)
        .filter(|r| r.minimal_period <= period_bound)
        .collect();
    for q in 1..=(q_max as i64) {
        for p in scanner.numerators(q) {
            for k in scanner.roots(p, q, false) {
                let rec = scanner.record(k, p, q);
                if rec.minimal_period <= period_bound {
                    out.push(rec);
                }
            }
        }
    }
    out.sort_by(|a, b| (a.q, a.p).cmp(&(b.q, b.p)).then(a.k.total_cmp(&b.k)));
    Ok(out)
}

/// Result of the minimal-period search over one component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MinPeriod {
    /// The shortest closed orbit (below the cap, when one was given).
    Found(OrbitRecord),
    /// No closed orbit has period below the cap.
    AboveCap,
    /// The denominator limit was reached first: every orbit not yet seen has
    /// period at least `bound`; `best` is the shortest orbit seen so far.
    LowerBound {
        bound: f64,
        best: Option<OrbitRecord>,
    },
}

impl MinPeriod {
    pub fn period(&self) -> Option<f64> {
        match self {
            MinPeriod::Found(r) => Some(r.minimal_period),
            _ => None,
        }
    }
}

/// Infimum of orbit periods over the open domain, scanning `q = 1, 2, …`
/// and stopping as soon as `q · tau_min` cannot beat the best period found
/// (or `cap`).
pub fn min_orbit_period(pot: &Potential, cap: Option<f64>, max_q: u64) -> Result<MinPeriod> {
    let tau_min = positive_tau_min(pot)?;
    let scanner = SlopeScanner::new(pot);
    let mut best: Option<OrbitRecord> = None;
    let mut best_val = cap.unwrap_or(f64::INFINITY);
    for (r, _) in scanner.band_records() {
        if r.minimal_period < best_val {
            best_val = r.minimal_period;
            best = Some(r);
        }
    }
    let mut q: i64 = 1;
    loop {
        if q as f64 * tau_min > best_val {
            break;
        }
        if q as u64 > max_q.min(MAX_SCAN_Q) {
            return Ok(MinPeriod::LowerBound {
                bound: q as f64 * tau_min,
                best,
            });
        }
        for p in scanner.numerators(q) {
            for k in scanner.roots(p, q, false) {
                let rec = scanner.record(k, p, q);
                if rec.minimal_period < best_val {
                    best_val = rec.minimal_period;
                    best = Some(rec);
                }
            }
        }
        q += 1;
    }
    Ok(match best {
        Some(r) => MinPeriod::Found(r),
        None => MinPeriod::AboveCap,
    })
}

/// Outcome of checking `τ(k) >= 1/q` at every level with rational slope `p/q`.
#[derive(Debug, Clone, PartialEq)]
pub enum SieveOutcome {
    Pass { q_scanned: i64 },
    Violation { k: f64, p: i64, q: i64, tau: f64 },
    /// `tau_min <= 0`: the finite scan argument does not apply.
    Undecided { tau_min: f64 },
}

impl SieveOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, SieveOutcome::Pass { .. })
    }
}

/// Slack on the floating-point path for non-strict comparisons.
pub const FLOAT_SLACK: f64 = 1e-12;

/// Checks `τ(k) >= 1/q` for every `k` in the closed domain with `J'(k) = p/q`.
///
/// Only `q <= ceil(1 / tau_min)` can violate it, which makes the check a
/// finite scan.
pub fn check_sieve(pot: &Potential) -> SieveOutcome {
    let tau_min = pot.tau_min().value;
    if !(tau_min > 0.0) {
        return SieveOutcome::Undecided { tau_min };
    }
    let q_max = (1.0 / tau_min).ceil().min(MAX_SCAN_Q as f64) as i64;
    let scanner = SlopeScanner::new(pot);
    for (rec, band) in scanner.band_records() {
        let ok = match &band.tau_exact {
            Some(t) => *t >= Rational::new(One::one(), band.q.into()),
            None => band.tau >= 1.0 / band.q as f64 - FLOAT_SLACK,
        };
        if !ok {
            return SieveOutcome::Violation {
                k: rec.k,
                p: band.p,
                q: band.q,
                tau: band.tau,
            };
        }
    }
    for q in 1..=q_max {
        for p in scanner.numerators(q) {
            for k in scanner.roots(p, q, true) {
                let tau = pot.return_time(k).expect("root inside domain");
                if tau < 1.0 / q as f64 - FLOAT_SLACK {
                    return SieveOutcome::Violation { k, p, q, tau };
                }
            }
        }
    }
    SieveOutcome::Pass { q_scanned: q_max }
}

#[derive(Debug, Clone, PartialEq)]
pub enum C1Outcome {
    Pass { tau_min: f64 },
    Violation { k: f64, tau: f64 },
}

impl C1Outcome {
    pub fn passed(&self) -> bool {
        matches!(self, C1Outcome::Pass { .. })
    }
}

/// `τ > 0` on the open domain. Zeros of `τ` at the domain ends are allowed.
pub fn check_c1(pot: &Potential) -> C1Outcome {
    let tm = pot.tau_min();
    if tm.value > 0.0 {
        return C1Outcome::Pass { tau_min: tm.value };
    }
    let (kmin, kmax) = (pot.k_min(), pot.k_max());
    if tm.value < 0.0 {
        return C1Outcome::Violation {
            k: tm.k,
            tau: tm.value,
        };
    }
    // minimum is exactly zero: fine only if attained at the domain ends alone
    let taus = pot.tau_polys();
    let exact_taus = pot.exact_tau_polys();
    for (i, (lo, hi, _)) in pot.pieces().enumerate() {
        let identically_zero = match &exact_taus {
            Some(t) => t[i].is_zero(),
            None => taus[i].is_negligible(0.0),
        };
        if identically_zero {
            let k = 0.5 * (lo + hi);
            return C1Outcome::Violation { k, tau: 0.0 };
        }
        let zeros = match &exact_taus {
            Some(t) => t[i].roots_in(lo, hi),
            None => taus[i].roots_in(lo, hi),
        };
        if let Some(&k) = zeros.iter().find(|&&k| k > kmin && k < kmax) {
            return C1Outcome::Violation { k, tau: 0.0 };
        }
    }
    C1Outcome::Pass { tau_min: 0.0 }
}

/// `C2` on `[-1, 1]`: the sieve check on the restriction.
pub fn check_c2(pot: &Potential) -> Result<SieveOutcome> {
    let r = pot.restrict(&rational::int(-1), &rational::int(1))?;
    Ok(check_sieve(&r))
}

#[derive(Debug, Clone, PartialEq)]
pub struct C3Outcome {
    pub passed: bool,
    pub integral: f64,
    pub exact_integral: Option<Rational>,
}

/// `∫_{-1}^{1} τ < 1/80`.
pub fn check_c3(pot: &Potential) -> Result<C3Outcome> {
    let r = pot.restrict(&rational::int(-1), &rational::int(1))?;
    let exact = r.volume_contribution_exact();
    let integral = r.volume_contribution();
    let passed = match &exact {
        Some(v) => *v < rational::rat(1, 80),
        None => integral < 1.0 / 80.0,
    };
    Ok(C3Outcome {
        passed,
        integral,
        exact_integral: exact,
    })
}

/// Exact check that a rational band slope is positive, for callers that
/// only have the record.
pub fn is_positive_slope(rec: &OrbitRecord) -> bool {
    Rational::new(rec.p.into(), rec.q.into()).is_positive()
}
