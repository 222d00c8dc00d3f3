//! Seeded generators of potentials satisfying a requested hypothesis set.
//!
//! Every candidate is `base + ε H` where `H` is a random C¹ piecewise
//! polynomial of unit size. For the sieve profiles the base slope is placed
//! in the middle of a Farey gap of order `N` and `ε` is small enough that
//! `J'` never leaves the gap, so any slope `p/q` met has `q > N`; a return
//! time floor of `1/(N+1)` then settles the sieve. Each candidate is still
//! certified by the checkers before it is returned.

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{piecewise_extremum, verify_lemma_5_1, verify_lemma_5_2};
use crate::error::{Error, Result};
use crate::farey;
use crate::orbits::{self, C1Outcome, SieveOutcome};
use crate::poly::RatPoly;
use crate::potential::Potential;
use crate::rational::{self, int, rat, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Profile {
    C1Only,
    C1C2,
    C1C2C3,
    Lemma51,
    Lemma52,
}

impl Profile {
    pub fn name(&self) -> &'static str {
        match self {
            Profile::C1Only => "c1",
            Profile::C1C2 => "c1-c2",
            Profile::C1C2C3 => "c1-c2-c3",
            Profile::Lemma51 => "lemma-5.1",
            Profile::Lemma52 => "lemma-5.2",
        }
    }

    pub fn parse(s: &str) -> Option<Profile> {
        [
            Profile::C1Only,
            Profile::C1C2,
            Profile::C1C2C3,
            Profile::Lemma51,
            Profile::Lemma52,
        ]
        .into_iter()
        .find(|p| p.name() == s)
    }
}

#[derive(Debug, Clone)]
pub struct GeneratorConfig {
    pub max_attempts: usize,
    pub max_pieces: usize,
    pub max_degree: usize,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            max_attempts: 10_000,
            max_pieces: 4,
            max_degree: 5,
        }
    }
}

/// A certified instance. `a` and `b` are set for the slope-pinning lemma.
#[derive(Debug, Clone)]
pub struct Admissible {
    pub potential: Potential,
    pub a: Option<Rational>,
    pub b: Option<Rational>,
    pub attempts: usize,
}

fn uniform(rng: &mut ChaCha8Rng, lo: &Rational, hi: &Rational, denom: i64) -> Rational {
    let u = rat(rng.gen_range(0..=denom), denom);
    lo + (hi - lo) * u
}

/// Rational close to `x` from below with a small denominator.
fn simple_below(x: f64) -> Rational {
    let hi = rational::from_f64(x).expect("finite");
    let lo = rational::from_f64(x * 0.9).expect("finite");
    farey::simplest_between(&lo, Some(&hi))
}

/// Random C¹ piecewise polynomial with coefficients in `[-1, 1]`:
/// `P_{j+1} = P_j + (k - b_j)^2 h_j`.
fn random_shape(rng: &mut ChaCha8Rng, lo: &Rational, hi: &Rational, cfg: &GeneratorConfig) -> Potential {
    let pieces = rng.gen_range(1..=cfg.max_pieces.max(1));
    let mut inner: Vec<Rational> = (1..pieces).map(|_| uniform(rng, lo, hi, 64)).collect();
    inner.sort();
    inner.dedup();
    inner.retain(|b| b > lo && b < hi);
    let mut breaks = vec![lo.clone()];
    breaks.extend(inner);
    breaks.push(hi.clone());

    let coeff = |rng: &mut ChaCha8Rng| rat(rng.gen_range(-1024..=1024), 1024);
    let deg = rng.gen_range(1..=cfg.max_degree.max(1));
    let mut p = RatPoly::new((0..=deg).map(|_| coeff(rng)).collect());
    let mut polys = vec![p.clone()];
    for b in &breaks[1..breaks.len() - 1] {
        let hdeg = rng.gen_range(0..=cfg.max_degree.saturating_sub(2));
        let h = RatPoly::new((0..=hdeg).map(|_| coeff(rng)).collect());
        let shift = RatPoly::new(vec![-b.clone(), Rational::one()]);
        p = p.add(&shift.mul(&shift).mul(&h));
        polys.push(p.clone());
    }
    Potential::from_exact(breaks, polys.into_iter().map(|p| p.coeffs().to_vec()).collect())
        .expect("C1 by construction")
}

/// `base0 + base1 k + ε H`.
fn combine(shape: &Potential, base0: &Rational, base1: &Rational, eps: &Rational) -> Potential {
    let ex = shape.exact().expect("shapes are exact");
    let base = RatPoly::new(vec![base0.clone(), base1.clone()]);
    Potential::from_exact(
        ex.breaks.clone(),
        ex.polys
            .iter()
            .map(|p| base.add(&p.scale(eps)).coeffs().to_vec())
            .collect(),
    )
    .expect("C1 preserved")
}

/// `(max |H'|, max |H - k H'|)` over the domain.
fn shape_bounds(shape: &Potential) -> (f64, f64) {
    let (lo, hi) = (shape.k_min(), shape.k_max());
    let d = piecewise_extremum(shape, lo, hi, |p| p.derivative(), true).1;
    let t = piecewise_extremum(shape, lo, hi, |p| p.sub(&p.derivative().mul_x()), true).1;
    (d.max(1e-300), t.max(1e-300))
}

struct FareyCandidate {
    potential: Potential,
    slope: Rational,
    width: Rational,
}

/// Slope in the middle of a Farey gap of order `n`, return time floor
/// `1/(n+1) < c0`, perturbation confined to the gap.
fn farey_candidate(
    rng: &mut ChaCha8Rng,
    lo: &Rational,
    hi: &Rational,
    n: u64,
    c0_max: &Rational,
    cfg: &GeneratorConfig,
) -> Option<FareyCandidate> {
    let floor = rat(1, n as i64 + 1);
    let c0_min = &floor * rat(6, 5);
    if c0_min >= *c0_max {
        return None;
    }
    let target = rational::from_f64(rng.gen_range(-1.5..1.5)).expect("finite");
    let (l, r) = farey::farey_neighbors(&target, n)?;
    let slope = (&l + &r) / int(2);
    let width = &r - &l;
    let c0 = uniform(rng, &c0_min, c0_max, 1 << 20);
    let shape = random_shape(rng, lo, hi, cfg);
    let (d, t) = shape_bounds(&shape);
    let eps_max = (rational::to_f64(&width) / (4.0 * d))
        .min(rational::to_f64(&(&c0 - &floor)) / (2.0 * t));
    let eps = simple_below(eps_max * rng.gen_range(0.05..1.0));
    Some(FareyCandidate {
        potential: combine(&shape, &c0, &slope, &eps),
        slope,
        width,
    })
}

fn describe_sieve(o: &SieveOutcome) -> String {
    format!("{o:?}")
}

pub fn generate_admissible(seed: u64, profile: Profile, cfg: &GeneratorConfig) -> Result<Admissible> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut last = String::from("no attempt made");
    for attempt in 1..=cfg.max_attempts {
        match try_once(&mut rng, profile, cfg) {
            Ok((potential, a, b)) => {
                return Ok(Admissible {
                    potential,
                    a,
                    b,
                    attempts: attempt,
                })
            }
            Err(why) => last = why,
        }
    }
    Err(Error::BudgetExhausted {
        profile: profile.name().into(),
        attempts: cfg.max_attempts,
        last_failure: last,
    })
}

type Candidate = (Potential, Option<Rational>, Option<Rational>);

fn try_once(rng: &mut ChaCha8Rng, profile: Profile, cfg: &GeneratorConfig) -> std::result::Result<Candidate, String> {
    let (m1, p1) = (int(-1), int(1));
    match profile {
        Profile::C1Only => {
            let c0 = uniform(rng, &rat(1, 4), &int(2), 1024);
            let c1 = uniform(rng, &m1, &p1, 1024);
            let eps = &c0 * uniform(rng, &Rational::zero(), &p1, 64);
            let j = combine(&random_shape(rng, &m1, &p1, cfg), &c0, &c1, &eps);
            match orbits::check_c1(&j) {
                C1Outcome::Pass { .. } => Ok((j, None, None)),
                v => Err(format!("C1 failed: {v:?}")),
            }
        }
        Profile::Lemma51 => {
            let c0 = uniform(rng, &rat(1, 20), &int(2), 1024);
            let c1 = uniform(rng, &-c0.clone(), &int(2), 1024);
            let eps = &c0 * uniform(rng, &Rational::zero(), &p1, 64);
            let f = combine(&random_shape(rng, &int(0), &p1, cfg), &c0, &c1, &eps);
            let rep = verify_lemma_5_1(&f);
            if rep.hypothesis_passed() {
                Ok((f, None, None))
            } else {
                Err(format!("hypothesis failed: {:?}", rep.hypothesis.witnesses))
            }
        }
        Profile::C1C2 => {
            let n = rng.gen_range(2..=40);
            let c = farey_candidate(rng, &m1, &p1, n, &int(2), cfg).ok_or("no Farey gap")?;
            certify_c1_c2(c.potential).map(|j| (j, None, None))
        }
        Profile::C1C2C3 => {
            let n = rng.gen_range(320..=800);
            let c = farey_candidate(rng, &m1, &p1, n, &rat(1, 250), cfg).ok_or("no Farey gap")?;
            let j = certify_c1_c2(c.potential)?;
            let c3 = orbits::check_c3(&j).map_err(|e| e.to_string())?;
            if c3.passed {
                Ok((j, None, None))
            } else {
                Err(format!("C3 failed: integral {}", c3.integral))
            }
        }
        Profile::Lemma52 => {
            let n = rng.gen_range(30..=200);
            let c = farey_candidate(rng, &int(0), &rat(1, 2), n, &rat(1, 30), cfg)
                .ok_or("no Farey gap")?;
            let room = rat(1, 20) - rat(1, 30);
            let delta = uniform(rng, &(-room.clone() * rat(3, 2)), &(room * rat(3, 2)), 1 << 16)
                + &c.width * uniform(rng, &m1, &p1, 64);
            let b = &c.slope + delta;
            let bf = rational::to_f64(&b);
            let lin = crate::poly::Poly::new(vec![0.0, bf]);
            let dev = piecewise_extremum(&c.potential, 0.25, 0.5, |p| p.sub(&lin), true).1;
            let dev_r = rational::from_f64(dev * (1.0 + 1e-9) + 1e-12).expect("finite");
            if dev_r >= rat(1, 20) {
                return Err(format!("max |f - b x| = {dev} leaves no room for a"));
            }
            let a = farey::simplest_between(
                &uniform(rng, &dev_r, &rat(1, 20), 1 << 20),
                Some(&rat(1, 20)),
            );
            let rep = verify_lemma_5_2(&c.potential, &a, &b);
            if rep.hypothesis_passed() {
                Ok((c.potential, Some(a), Some(b)))
            } else {
                Err(format!("hypothesis failed: {:?}", rep.hypothesis.witnesses))
            }
        }
    }
}

fn certify_c1_c2(j: Potential) -> std::result::Result<Potential, String> {
    if let C1Outcome::Violation { k, tau } = orbits::check_c1(&j) {
        return Err(format!("C1 failed at {k}: {tau}"));
    }
    match orbits::check_c2(&j).map_err(|e| e.to_string())? {
        SieveOutcome::Pass { .. } => Ok(j),
        o => Err(format!("C2 failed: {}", describe_sieve(&o))),
    }
}
