//! Contact models: invariant cylinders with their potentials, glued along
//! critical circles of `K`. Validation, systole, volume and systolic ratio.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{build_graph, ContactGraph};
use crate::orbits::{self, C1Outcome, MinPeriod, OrbitRecord};
use crate::poly::Poly;
use crate::potential::Potential;
use crate::rational::{self, Rational};
use crate::seifert::SurgeryData;

/// Slack for non-strict sign checks of floating-point level functions,
/// relative to their magnitude.
const LEVEL_SLACK: f64 = 1e-12;

/// A critical circle of `K` bounding a cylinder.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryOrbit {
    pub k_crit: Rational,
    /// Order of the stabilizer of the circle.
    pub p: i64,
    /// Shared by the components meeting along this circle.
    pub id: String,
}

impl BoundaryOrbit {
    pub fn new(k_crit: Rational, p: i64, id: &str) -> Self {
        BoundaryOrbit {
            k_crit,
            p,
            id: id.to_string(),
        }
    }

    pub fn sign(&self) -> i8 {
        if self.k_crit.is_positive() {
            1
        } else if self.k_crit.is_negative() {
            -1
        } else {
            0
        }
    }

    pub fn k(&self) -> f64 {
        rational::to_f64(&self.k_crit)
    }

    /// `|K| / p`.
    pub fn period_exact(&self) -> Rational {
        rational::abs(&self.k_crit) / Rational::from_integer(self.p.into())
    }

    pub fn period(&self) -> f64 {
        rational::to_f64(&self.period_exact())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub potential: Potential,
    pub lower: BoundaryOrbit,
    pub upper: BoundaryOrbit,
}

impl Component {
    /// `K` vanishes inside the cylinder.
    pub fn crosses_zero(&self) -> bool {
        self.lower.k_crit.is_negative() && self.upper.k_crit.is_positive()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContactModel {
    pub surgery: SurgeryData,
    pub components: Vec<Component>,
    /// Critical levels are isolated circles, so the volume is exactly the sum
    /// of the potential integrals.
    pub tame: bool,
}

/// A reason a model is rejected, with a nonnegative deficit usable as a
/// search penalty.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    Structure { message: String },
    BoundaryMismatch { component: usize, side: String, k_crit: f64, domain_end: f64 },
    Stabilizer { id: String, p: i64 },
    /// Return time not positive inside a component.
    C1 { component: usize, k: f64, tau: f64 },
    /// `c e + Σ_{I₀} (J(c) + J(-c))` fails to be positive at level `c`.
    Realizability { c: f64, value: f64 },
    /// The volume outside `[-c, c]` is below what the boundary terms force.
    Budget { c: f64, deficit: f64 },
}

impl Violation {
    pub fn deficit(&self) -> f64 {
        match self {
            Violation::C1 { tau, .. } => tau.abs(),
            Violation::Realizability { value, .. } => value.abs(),
            Violation::Budget { deficit, .. } => deficit.abs(),
            Violation::BoundaryMismatch { k_crit, domain_end, .. } => (k_crit - domain_end).abs(),
            _ => 1.0,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Violation::Structure { .. } => "structure",
            Violation::BoundaryMismatch { .. } => "boundary-mismatch",
            Violation::Stabilizer { .. } => "stabilizer",
            Violation::C1 { .. } => "c1",
            Violation::Realizability { .. } => "realizability",
            Violation::Budget { .. } => "budget",
        }
    }
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::Structure { message } => write!(f, "structure: {message}"),
            Violation::BoundaryMismatch { component, side, k_crit, domain_end } => write!(
                f,
                "component {component}: {side} boundary K = {k_crit} differs from domain end {domain_end}"
            ),
            Violation::Stabilizer { id, p } => write!(
                f,
                "boundary {id}: stabilizer order {p} has no matching surgery pair"
            ),
            Violation::C1 { component, k, tau } => {
                write!(f, "component {component}: return time {tau} at k = {k}")
            }
            Violation::Realizability { c, value } => {
                write!(f, "realizability: c e + sum (J(c) + J(-c)) = {value} at c = {c}")
            }
            Violation::Budget { c, deficit } => {
                write!(f, "volume budget: short by {deficit} at level c = {c}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum SystoleWitness {
    Boundary { id: String, k_crit: f64, p: i64 },
    Orbit { component: usize, orbit: OrbitRecord },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Systole {
    pub value: f64,
    pub witness: SystoleWitness,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremReport {
    pub ratio: f64,
    pub bound: f64,
    pub margin: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZollReport {
    pub sys: Rational,
    pub vol: Rational,
    pub ratio: Rational,
}

/// One interval `[a, b]` of levels `c` on which every `I₀` potential is a
/// single polynomial at both `c` and `-c`.
struct LevelPiece {
    a: f64,
    b: f64,
    /// `c e + Σ (J(c) + J(-c))`
    s: Poly,
    /// `Σ (τ(c) + τ(-c))`
    t: Poly,
}

impl ContactModel {
    pub fn euler_number(&self) -> Rational {
        self.surgery.euler_number()
    }

    /// Components on which `K` vanishes.
    pub fn zero_crossing(&self) -> Vec<usize> {
        (0..self.components.len())
            .filter(|&i| self.components[i].crosses_zero())
            .collect()
    }

    /// Distinct boundary orbits in order of first reference.
    pub fn boundary_orbits(&self) -> Vec<&BoundaryOrbit> {
        let mut seen = BTreeMap::new();
        let mut out = Vec::new();
        for c in &self.components {
            for b in [&c.lower, &c.upper] {
                if seen.insert(b.id.as_str(), ()).is_none() {
                    out.push(b);
                }
            }
        }
        out
    }

    /// Boundary orbits with nontrivial stabilizer, each matched to a distinct
    /// normalized surgery pair with the same `p`.
    pub fn singular_labels(&self) -> Result<Vec<(String, (i64, i64))>> {
        let mut pairs = self.surgery.singular_pairs();
        let mut out = Vec::new();
        for b in self.boundary_orbits() {
            if b.p < 2 {
                continue;
            }
            match pairs.iter().position(|&(p, _)| p == b.p) {
                Some(i) => out.push((b.id.clone(), pairs.remove(i))),
                None => {
                    return Err(Error::InvalidModel(format!(
                        "boundary {} has stabilizer order {} but no surgery pair with that p",
                        b.id, b.p
                    )))
                }
            }
        }
        Ok(out)
    }

    /// Smallest `|K|` over boundary orbits: every level `c` up to it leaves
    /// only zero-crossing components meeting `[-c, c]`.
    pub fn c_max(&self) -> f64 {
        self.boundary_orbits()
            .iter()
            .map(|b| b.k().abs())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn graph(&self) -> Result<ContactGraph> {
        build_graph(self)
    }

    /// All violations; empty means the model is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        let structure = |m: String| Violation::Structure { message: m };
        if let Err(e) = self.surgery.validate() {
            v.push(structure(e.to_string()));
        }
        if self.components.is_empty() {
            v.push(structure("model has no components".into()));
            return v;
        }
        let mut by_id: BTreeMap<&str, &BoundaryOrbit> = BTreeMap::new();
        for (ci, c) in self.components.iter().enumerate() {
            for (side, b, end) in [
                ("lower", &c.lower, 0usize),
                ("upper", &c.upper, c.potential.num_pieces()),
            ] {
                if b.p < 1 {
                    v.push(structure(format!("boundary {}: stabilizer order must be positive", b.id)));
                }
                if b.k_crit.is_zero() {
                    v.push(structure(format!("boundary {}: K must be nonzero", b.id)));
                }
                let matches = match c.potential.exact() {
                    Some(ex) => ex.breaks[end] == b.k_crit,
                    None => c.potential.breaks()[end] == b.k(),
                };
                if !matches {
                    v.push(Violation::BoundaryMismatch {
                        component: ci,
                        side: side.into(),
                        k_crit: b.k(),
                        domain_end: c.potential.breaks()[end],
                    });
                }
                match by_id.get(b.id.as_str()) {
                    Some(o) if o.k_crit != b.k_crit || o.p != b.p => v.push(structure(format!(
                        "boundary {} is referenced with different K or p",
                        b.id
                    ))),
                    Some(_) => {}
                    None => {
                        by_id.insert(&b.id, b);
                    }
                }
            }
        }
        if !v.is_empty() {
            return v;
        }
        match self.graph() {
            Ok(g) if !g.is_bipartite() => v.push(structure("graph is not bipartite".into())),
            Ok(_) => {}
            Err(e) => v.push(structure(e.to_string())),
        }
        if let Err(Error::InvalidModel(_)) = self.singular_labels() {
            for b in self.boundary_orbits() {
                if b.p >= 2 && !self.surgery.singular_pairs().iter().any(|&(p, _)| p == b.p) {
                    v.push(Violation::Stabilizer { id: b.id.clone(), p: b.p });
                }
            }
            if !v.iter().any(|x| matches!(x, Violation::Stabilizer { .. })) {
                v.push(structure("more singular boundary orbits than surgery pairs".into()));
            }
        }
        let mut c1_ok = true;
        for (ci, c) in self.components.iter().enumerate() {
            if let C1Outcome::Violation { k, tau } = orbits::check_c1(&c.potential) {
                c1_ok = false;
                v.push(Violation::C1 { component: ci, k, tau });
            }
        }
        v.extend(self.realizability_violations(c1_ok));
        v
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    fn level_pieces(&self) -> Vec<LevelPiece> {
        let c_max = self.c_max();
        let e = rational::to_f64(&self.euler_number());
        let i0 = self.zero_crossing();
        let mut cuts = vec![0.0, c_max];
        for &i in &i0 {
            for &b in self.components[i].potential.breaks() {
                if b.abs() > 0.0 && b.abs() < c_max {
                    cuts.push(b.abs());
                }
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        cuts.windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| {
                let (a, b) = (w[0], w[1]);
                let m = 0.5 * (a + b);
                let mut s = Poly::new(vec![0.0, e]);
                let mut t = Poly::constant(0.0);
                for &i in &i0 {
                    let pot = &self.components[i].potential;
                    let polys = pot.polys();
                    let taus = pot.tau_polys();
                    let at = |k: f64| pot.breaks()[1..].partition_point(|&x| x < k).min(polys.len() - 1);
                    let (ip, im) = (at(m), at(-m));
                    s = s.add(&polys[ip]).add(&polys[im].reflect());
                    t = t.add(&taus[ip]).add(&taus[im].reflect());
                }
                LevelPiece { a, b, s, t }
            })
            .collect()
    }

    /// Realizability: `S(c) = c e + Σ_{I₀} (J(c) + J(-c)) > 0` on `(0, c_max)`
    /// and `>= 0` at `c_max`. For tame models additionally the budget
    /// `V_out(c) >= c S(c)`, where `V_out(c)` is the potential volume at
    /// levels `|k| > c`; with `I₀` empty this reads `V >= c_max² |e|`.
    fn realizability_violations(&self, c1_ok: bool) -> Vec<Violation> {
        let mut v = Vec::new();
        let c_max = self.c_max();
        let total: f64 = self.components.iter().map(|c| c.potential.volume_contribution()).sum();
        let e = rational::to_f64(&self.euler_number());
        if self.zero_crossing().is_empty() {
            let need = c_max * c_max * e.abs();
            if self.tame && c1_ok && total < need * (1.0 - LEVEL_SLACK) {
                v.push(Violation::Budget {
                    c: c_max,
                    deficit: need - total,
                });
            }
            return v;
        }
        let mut v_in = 0.0;
        let mut worst_s: Option<(f64, f64)> = None;
        let mut worst_budget: Option<(f64, f64)> = None;
        for piece in self.level_pieces() {
            let ((x, val), _) = piece.s.extrema(piece.a, piece.b);
            let slack = LEVEL_SLACK * (1.0 + piece.s.magnitude(x));
            let interior = x < c_max * (1.0 - 1e-9);
            if val < -slack || (interior && val <= slack) {
                if worst_s.map_or(true, |(_, w)| val < w) {
                    worst_s = Some((x, val));
                }
            }
            if self.tame && c1_ok {
                // G(c) = total - V_in(a) - ∫_a^c T - c S(c)
                let anti = piece.t.antiderivative();
                let g = Poly::constant(total - v_in + anti.eval(piece.a))
                    .sub(&anti)
                    .sub(&piece.s.mul_x());
                let ((gx, gv), _) = g.extrema(piece.a, piece.b);
                let gslack = LEVEL_SLACK * (1.0 + total + g.magnitude(gx));
                if gv < -gslack && worst_budget.map_or(true, |(_, w)| gv < w) {
                    worst_budget = Some((gx, gv));
                }
            }
            v_in += piece.t.antiderivative().eval(piece.b) - piece.t.antiderivative().eval(piece.a);
        }
        if let Some((c, value)) = worst_s {
            v.push(Violation::Realizability { c, value });
        }
        if let Some((c, g)) = worst_budget {
            v.push(Violation::Budget { c, deficit: -g });
        }
        v
    }

    /// `R(c) = e + (1/c) Σ_{I₀} (J(c) + J(-c))` sampled at `n` levels in
    /// `(0, c_max]`.
    pub fn realizability_curve(&self, n: usize) -> Vec<(f64, f64)> {
        let c_max = self.c_max();
        let pieces = self.level_pieces();
        (1..=n)
            .map(|i| {
                let c = c_max * i as f64 / n as f64;
                let s = pieces
                    .iter()
                    .find(|p| c <= p.b)
                    .map_or(f64::NAN, |p| p.s.eval(c));
                (c, s / c)
            })
            .collect()
    }

    fn ensure_valid(&self) -> Result<()> {
        match self.validate().first() {
            None => Ok(()),
            Some(v) => Err(Error::InvalidModel(v.to_string())),
        }
    }

    pub fn systole(&self) -> Result<Systole> {
        self.systole_with_limit(orbits::DEFAULT_MAX_Q)
    }

    /// Minimum over boundary periods `|K|/p` and the shortest interior orbit of
    /// every component. Boundary orbits win ties.
    pub fn systole_with_limit(&self, max_q: u64) -> Result<Systole> {
        let mut best: Option<Systole> = None;
        for b in self.boundary_orbits() {
            let val = b.period();
            if best.as_ref().map_or(true, |s| val < s.value) {
                best = Some(Systole {
                    value: val,
                    witness: SystoleWitness::Boundary {
                        id: b.id.clone(),
                        k_crit: b.k(),
                        p: b.p,
                    },
                });
            }
        }
        let mut best = best.ok_or_else(|| Error::InvalidModel("no boundary orbits".into()))?;
        let cap = best.value;
        let interior: Vec<Result<MinPeriod>> = self
            .components
            .par_iter()
            .map(|c| orbits::min_orbit_period(&c.potential, Some(cap), max_q))
            .collect();
        for (ci, r) in interior.into_iter().enumerate() {
            match r? {
                MinPeriod::Found(o) if o.minimal_period < best.value => {
                    best = Systole {
                        value: o.minimal_period,
                        witness: SystoleWitness::Orbit {
                            component: ci,
                            orbit: o,
                        },
                    };
                }
                MinPeriod::LowerBound { bound, .. } => {
                    return Err(Error::ScanLimit {
                        q_limit: max_q,
                        lower_bound: bound,
                    })
                }
                _ => {}
            }
        }
        Ok(best)
    }

    /// Sum of the potential volume integrals; only an equality for tame models.
    pub fn volume(&self) -> Result<f64> {
        if !self.tame {
            return Err(Error::NotTame);
        }
        Ok(self.components.iter().map(|c| c.potential.volume_contribution()).sum())
    }

    pub fn volume_exact(&self) -> Option<Rational> {
        if !self.tame {
            return None;
        }
        self.components
            .iter()
            .map(|c| c.potential.volume_contribution_exact())
            .try_fold(Rational::zero(), |a, b| Some(a + b?))
    }

    /// `sys² / vol` of a valid tame model.
    pub fn systolic_ratio(&self) -> Result<f64> {
        self.ensure_valid()?;
        Ok(self.ratio_unchecked()?.0)
    }

    /// Ratio and systole certificate without re-running validation.
    pub fn ratio_unchecked(&self) -> Result<(f64, Systole)> {
        let vol = self.volume()?;
        let sys = self.systole()?;
        Ok((sys.value * sys.value / vol, sys))
    }

    pub fn check_theorem_bound(&self) -> Result<TheoremReport> {
        let bound = theorem_bound(&self.euler_number())?;
        let ratio = self.systolic_ratio()?;
        Ok(TheoremReport {
            ratio,
            bound,
            margin: bound - ratio,
            holds: ratio <= bound,
        })
    }

    /// `J_i(k) ↦ λ J_i(k/λ)` and `K ↦ λ K`.
    pub fn rescaled(&self, lambda: &Rational) -> Result<ContactModel> {
        assert!(lambda.is_positive());
        let lf = rational::to_f64(lambda);
        let components = self
            .components
            .iter()
            .map(|c| {
                let potential = match c.potential.rescaled_exact(lambda) {
                    Some(p) => p?,
                    None => c.potential.rescaled(lf)?,
                };
                let scale = |b: &BoundaryOrbit, end: f64| BoundaryOrbit {
                    k_crit: if potential.is_exact() {
                        &b.k_crit * lambda
                    } else {
                        rational::from_f64(end).expect("finite domain end")
                    },
                    p: b.p,
                    id: b.id.clone(),
                };
                let lower = scale(&c.lower, potential.k_min());
                let upper = scale(&c.upper, potential.k_max());
                Ok(Component {
                    potential,
                    lower,
                    upper,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ContactModel {
            surgery: self.surgery.clone(),
            components,
            tame: self.tame,
        })
    }
}

/// `max(80, 225/|e|)`.
pub fn theorem_bound(e: &Rational) -> Result<f64> {
    if e.is_zero() {
        return Err(Error::ZeroEuler);
    }
    let b = Rational::from_integer(225.into()) / rational::abs(e);
    Ok(rational::to_f64(&b).max(80.0))
}

/// Closed-form invariants of the Zoll/Besse form with `K ≡ K0`:
/// `sys = K0 / max p`, `vol = K0² |e|`.
pub fn zoll_besse_evaluate(k0: &Rational, d: &SurgeryData) -> Result<ZollReport> {
    let e = d.euler_number();
    if e.is_zero() {
        return Err(Error::ZeroEuler);
    }
    if !k0.is_positive() {
        return Err(Error::InvalidModel("K0 must be positive".into()));
    }
    let sys = k0 / Rational::from_integer(d.max_stabilizer().into());
    let vol = k0 * k0 * rational::abs(&e);
    let ratio = &sys * &sys / &vol;
    Ok(ZollReport { sys, vol, ratio })
}

/// `1/|e|`, the sharp bound for models on which `K` does not vanish.
pub fn nonvanishing_bound(e: &Rational) -> Result<Rational> {
    if e.is_zero() {
        return Err(Error::ZeroEuler);
    }
    Ok(Rational::one() / rational::abs(e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn component(lo: i64, hi: i64, coeffs: Vec<Rational>, p_lo: i64, p_hi: i64) -> Component {
        Component {
            potential: Potential::exact_polynomial(int(lo), int(hi), coeffs).unwrap(),
            lower: BoundaryOrbit::new(int(lo), p_lo, &format!("b{lo}")),
            upper: BoundaryOrbit::new(int(hi), p_hi, &format!("b{hi}")),
        }
    }

    fn model(surgery: Vec<(i64, i64)>, components: Vec<Component>) -> ContactModel {
        ContactModel {
            surgery: SurgeryData::new(0, surgery).unwrap(),
            components,
            tame: true,
        }
    }

    fn flat(e_pairs: Vec<(i64, i64)>) -> ContactModel {
        model(e_pairs, vec![component(-1, 1, vec![int(1)], 1, 1)])
    }

    #[test]
    fn validate_examples() {
        // e = -2: S(c) = 2 - 2c vanishes only at c_max = 1
        assert!(flat(vec![(1, 2)]).is_valid());
        // e = 3: S(c) = 3c + 2 stays positive, but nothing lies outside
        // [-1, 1] to carry the volume it forces
        let v = flat(vec![(1, -3)]).validate();
        assert!(!v.iter().any(|x| matches!(x, Violation::Realizability { .. })));
        assert!(matches!(v[..], [Violation::Budget { c, .. }] if c == 1.0), "{v:?}");
        let v = flat(vec![(1, 3)]).validate();
        assert!(matches!(v[0], Violation::Realizability { c, value } if c == 1.0 && value == -1.0), "{v:?}");
        let neg = model(vec![(1, 2)], vec![component(-1, 1, vec![rat(1, 10), int(0), int(1)], 1, 1)]);
        assert!(neg.validate().iter().any(|x| matches!(x, Violation::C1 { .. })));
    }

    #[test]
    fn validate_boundary_consistency() {
        let mut m = flat(vec![(1, 2)]);
        m.components[0].upper.k_crit = int(2);
        assert!(matches!(m.validate()[0], Violation::BoundaryMismatch { .. }));
        let mut m = flat(vec![(1, 2)]);
        m.components[0].upper.p = 2;
        assert!(m.validate().iter().any(|x| matches!(x, Violation::Stabilizer { p: 2, .. })));
    }

    #[test]
    fn budget_rejects_oversized_euler_number() {
        // K > 0 only: vol = 1 but c_max² |e| = 6
        let m = model(vec![(1, 6)], vec![component(1, 2, vec![int(1)], 1, 1)]);
        assert!(m.validate().iter().any(|x| matches!(x, Violation::Budget { .. })));
        let m = model(vec![(1, 1)], vec![component(1, 2, vec![int(1)], 1, 1)]);
        assert!(m.is_valid());
    }

    #[test]
    fn systole_examples() {
        let quad = vec![int(1), int(0), rat(1, 4)];
        let m = model(vec![(1, 2)], vec![component(-1, 1, quad.clone(), 1, 1)]);
        let s = m.systole().unwrap();
        assert_eq!(s.value, 1.0);
        assert!(matches!(s.witness, SystoleWitness::Boundary { .. }));
        let m = model(vec![(2, 1), (1, 1)], vec![component(-1, 1, quad, 1, 2)]);
        assert_eq!(m.systole().unwrap().value, 0.5);
        let m = model(vec![(1, 1)], vec![component(1, 2, vec![int(5)], 1, 1)]);
        let s = m.systole().unwrap();
        assert_eq!(s.value, 1.0);
        assert_eq!(
            s.witness,
            SystoleWitness::Boundary { id: "b1".into(), k_crit: 1.0, p: 1 }
        );
    }

    #[test]
    fn interior_orbit_certificate_reproduces_systole() {
        // boundary periods 2; interior slope 0 at k = 0 with tau = 3/2
        let m = model(
            vec![(1, 1)],
            vec![component(-2, 2, vec![rat(3, 2), int(0), rat(1, 16)], 1, 1)],
        );
        let s = m.systole().unwrap();
        assert_eq!(s.value, 1.5);
        match s.witness {
            SystoleWitness::Orbit { component, orbit } => {
                let again = orbits::orbit_period(&m.components[component].potential, orbit.k, orbit.q);
                assert_eq!(again, s.value);
            }
            w => panic!("{w:?}"),
        }
    }

    #[test]
    fn volume_examples() {
        assert_eq!(flat(vec![(1, 2)]).volume().unwrap(), 2.0);
        let mut two = flat(vec![(1, 2)]);
        let mut c = two.components[0].clone();
        c.lower.id = "x".into();
        c.upper.id = "y".into();
        two.components.push(c);
        assert_eq!(two.volume().unwrap(), 4.0);
        let quad = model(vec![(1, 2)], vec![component(-1, 1, vec![int(1), int(0), rat(1, 4)], 1, 1)]);
        assert_eq!(quad.volume_exact(), Some(rat(11, 6)));
        let mut wild = flat(vec![(1, 2)]);
        wild.tame = false;
        assert_eq!(wild.volume(), Err(Error::NotTame));
    }

    #[test]
    fn ratio_examples() {
        assert_eq!(flat(vec![(1, 2)]).systolic_ratio().unwrap(), 0.5);
        let m = model(vec![(2, 1), (2, 3)], vec![component(-1, 1, vec![int(1)], 1, 2)]);
        assert!(m.is_valid(), "{:?}", m.validate());
        assert_eq!(m.systolic_ratio().unwrap(), 0.125);
    }

    #[test]
    fn ratio_is_scale_invariant() {
        // e = -7/4 makes S(2) = 0; the interior orbit at slope 0 is shortest
        let m = model(
            vec![(4, 7)],
            vec![component(-2, 2, vec![rat(3, 2), rat(1, 7), rat(1, 16)], 1, 1)],
        );
        assert!(matches!(m.systole().unwrap().witness, SystoleWitness::Orbit { .. }));
        let r = m.systolic_ratio().unwrap();
        for l in [rat(1, 3), int(2), int(10)] {
            let s = m.rescaled(&l).unwrap();
            assert!((s.systolic_ratio().unwrap() - r).abs() < 1e-9);
        }
    }

    #[test]
    fn theorem_bound_examples() {
        let rep = flat(vec![(1, 2)]).check_theorem_bound().unwrap();
        assert_eq!((rep.ratio, rep.bound), (0.5, 112.5));
        assert!(rep.holds);
        assert_eq!(rep.margin, 112.0);
        let zero = model(vec![(1, 0)], vec![component(-1, 1, vec![int(1)], 1, 1)]);
        assert_eq!(zero.check_theorem_bound(), Err(Error::ZeroEuler));
        assert_eq!(theorem_bound(&int(1)).unwrap(), 225.0);
        assert_eq!(theorem_bound(&int(6)).unwrap(), 80.0);
    }

    #[test]
    fn zoll_examples() {
        let d = SurgeryData::new(0, vec![(1, -1)]).unwrap();
        let r = zoll_besse_evaluate(&int(1), &d).unwrap();
        assert_eq!((r.sys, r.vol, r.ratio), (int(1), int(1), int(1)));
        let d = SurgeryData::new(0, vec![(1, -3)]).unwrap();
        let r = zoll_besse_evaluate(&int(2), &d).unwrap();
        assert_eq!((r.sys, r.vol, r.ratio), (int(2), int(12), rat(1, 3)));
        let d = SurgeryData::new(0, vec![(2, 1), (1, -1)]).unwrap();
        let r = zoll_besse_evaluate(&int(1), &d).unwrap();
        assert_eq!((r.sys, r.vol, r.ratio), (rat(1, 2), rat(1, 2), rat(1, 2)));
        let d = SurgeryData::new(0, vec![(1, 0)]).unwrap();
        assert_eq!(zoll_besse_evaluate(&int(1), &d), Err(Error::ZeroEuler));
    }
}
