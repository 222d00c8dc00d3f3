//! Search over parametrized model families for large systolic ratios.
//!
//! A family is a model skeleton whose numbers may be affine in a parameter
//! vector. The search is an evolution strategy with restarts: each
//! generation samples Gaussian steps around the incumbent, evaluates them
//! in parallel, and adapts the step size. All randomness comes from ChaCha
//! streams keyed by `(seed, restart, generation, index)`.

use std::time::Instant;

use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{
    theorem_bound, BoundaryOrbit, Component, ContactModel, Systole, Violation,
};
use crate::potential::Potential;
use crate::rational::{self, Rational};
use crate::seifert::{realize_euler, SurgeryData};

/// A number in a family template.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Exact(Rational),
    Float(f64),
    /// `constant + Σ coef · θ[index]`
    Affine {
        constant: Box<Value>,
        terms: Vec<(usize, f64)>,
    },
}

impl Value {
    pub fn is_exact(&self) -> bool {
        matches!(self, Value::Exact(_))
    }

    pub fn eval(&self, theta: &[f64]) -> f64 {
        match self {
            Value::Exact(r) => rational::to_f64(r),
            Value::Float(x) => *x,
            Value::Affine { constant, terms } => {
                terms
                    .iter()
                    .fold(constant.eval(theta), |acc, &(i, c)| acc + c * theta[i])
            }
        }
    }

    /// Exact value when there is no parameter dependence.
    pub fn exact(&self) -> Option<&Rational> {
        match self {
            Value::Exact(r) => Some(r),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Parameter {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTemplate {
    pub k: Value,
    pub p: i64,
    pub id: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentTemplate {
    pub k_min: Value,
    pub k_max: Value,
    /// Interior breakpoints.
    pub breaks: Vec<Value>,
    pub pieces: Vec<Vec<Value>>,
    pub lower: BoundaryTemplate,
    pub upper: BoundaryTemplate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialFamily {
    pub parameters: Vec<Parameter>,
    pub genus: u32,
    pub surgeries: Vec<(i64, i64)>,
    pub components: Vec<ComponentTemplate>,
    pub tame: bool,
}

impl PotentialFamily {
    pub fn dim(&self) -> usize {
        self.parameters.len()
    }

    pub fn in_box(&self, theta: &[f64]) -> bool {
        theta.len() == self.dim()
            && self
                .parameters
                .iter()
                .zip(theta)
                .all(|(p, &t)| t >= p.lo && t <= p.hi)
    }

    fn clamp(&self, theta: &mut [f64]) {
        for (t, p) in theta.iter_mut().zip(&self.parameters) {
            *t = t.clamp(p.lo, p.hi);
        }
    }

    pub fn euler_number(&self) -> Result<Rational> {
        Ok(SurgeryData::new(self.genus, self.surgeries.clone())?.euler_number())
    }

    /// Concrete model at `theta`. Components whose numbers are all exact
    /// stay on the exact path.
    pub fn decode(&self, theta: &[f64]) -> Result<ContactModel> {
        if theta.len() != self.dim() {
            return Err(Error::Family(format!(
                "expected {} parameters, got {}",
                self.dim(),
                theta.len()
            )));
        }
        let surgery = SurgeryData::new(self.genus, self.surgeries.clone())?;
        let components = self
            .components
            .iter()
            .enumerate()
            .map(|(i, c)| decode_component(c, theta).map_err(|e| Error::Family(format!("component {i}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(ContactModel {
            surgery,
            components,
            tame: self.tame,
        })
    }
}

fn decode_component(c: &ComponentTemplate, theta: &[f64]) -> Result<Component> {
    let mut ends = vec![&c.k_min];
    ends.extend(&c.breaks);
    ends.push(&c.k_max);
    let exact = ends.iter().all(|v| v.is_exact())
        && c.pieces.iter().flatten().all(Value::is_exact)
        && c.lower.k.is_exact()
        && c.upper.k.is_exact();
    let boundary = |b: &BoundaryTemplate| -> Result<BoundaryOrbit> {
        let k = match b.k.exact() {
            Some(r) if exact => r.clone(),
            _ => rational::from_f64(b.k.eval(theta))
                .ok_or_else(|| Error::Family(format!("boundary {}: K is not finite", b.id)))?,
        };
        Ok(BoundaryOrbit::new(k, b.p, &b.id))
    };
    let potential = if exact {
        Potential::from_exact(
            ends.iter().map(|v| v.exact().unwrap().clone()).collect(),
            c.pieces
                .iter()
                .map(|p| p.iter().map(|v| v.exact().unwrap().clone()).collect())
                .collect(),
        )?
    } else {
        Potential::from_floats(
            ends.iter().map(|v| v.eval(theta)).collect(),
            c.pieces
                .iter()
                .map(|p| p.iter().map(|v| v.eval(theta)).collect())
                .collect(),
        )?
    };
    Ok(Component {
        potential,
        lower: boundary(&c.lower)?,
        upper: boundary(&c.upper)?,
    })
}

/// Outcome of one evaluation. `ratio` is `-∞` for rejected candidates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub ratio: f64,
    pub violations: Vec<Violation>,
    /// Set when decoding or orbit scanning failed.
    pub error: Option<String>,
    pub certificate: Option<Systole>,
}

impl Evaluation {
    fn rejected(error: String) -> Self {
        Evaluation {
            ratio: f64::NEG_INFINITY,
            violations: Vec::new(),
            error: Some(error),
            certificate: None,
        }
    }

    pub fn is_valid(&self) -> bool {
        self.ratio.is_finite()
    }

    /// Summed deficits; decode or scan failures count as a unit deficit.
    pub fn penalty(&self) -> f64 {
        self.violations.iter().map(Violation::deficit).sum::<f64>()
            + if self.error.is_some() { 1.0 } else { 0.0 }
    }

    /// Larger is better: valid candidates by ratio, others by penalty.
    fn score(&self) -> (bool, f64) {
        if self.is_valid() {
            (true, self.ratio)
        } else {
            (false, -self.penalty())
        }
    }
}

fn better(a: &Evaluation, b: &Evaluation) -> bool {
    let (sa, sb) = (a.score(), b.score());
    sa.0 & !sb.0 || (sa.0 == sb.0 && sa.1 > sb.1)
}

pub fn evaluate_candidate(fam: &PotentialFamily, theta: &[f64]) -> Evaluation {
    if !fam.in_box(theta) {
        return Evaluation::rejected("parameters outside the box".into());
    }
    let model = match fam.decode(theta) {
        Ok(m) => m,
        Err(e) => return Evaluation::rejected(e.to_string()),
    };
    let violations = model.validate();
    if !violations.is_empty() {
        return Evaluation {
            ratio: f64::NEG_INFINITY,
            violations,
            error: None,
            certificate: None,
        };
    }
    match model.ratio_unchecked() {
        Ok((ratio, sys)) => Evaluation {
            ratio,
            violations,
            error: None,
            certificate: Some(sys),
        },
        Err(e) => Evaluation::rejected(e.to_string()),
    }
}

#[derive(Debug, Clone)]
pub struct SearchConfig {
    /// Total number of candidate evaluations.
    pub budget: usize,
    pub seed: u64,
    pub restarts: usize,
    pub population: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            budget: 10_000,
            seed: 0,
            restarts: 4,
            population: 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViolationRecord {
    pub evaluation: usize,
    pub labels: Vec<String>,
    pub penalty: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OptimizationReport {
    pub best_parameters: Vec<f64>,
    pub best_ratio: f64,
    pub best_certificate: Option<Systole>,
    /// Best-so-far ratio after each evaluation.
    pub trace: Vec<f64>,
    pub violation_history: Vec<ViolationRecord>,
    pub evaluations: usize,
    pub wall_time_secs: f64,
}

impl PartialEq for OptimizationReport {
    /// Everything except wall time.
    fn eq(&self, o: &Self) -> bool {
        self.best_parameters == o.best_parameters
            && self.best_ratio == o.best_ratio
            && self.best_certificate == o.best_certificate
            && self.trace == o.trace
            && self.violation_history == o.violation_history
            && self.evaluations == o.evaluations
    }
}

fn stream(seed: u64, restart: usize, generation: usize, index: usize) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(restart as u64).to_le_bytes());
    key[16..24].copy_from_slice(&(generation as u64).to_le_bytes());
    key[24..].copy_from_slice(&(index as u64).to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

struct Tracker {
    bound: f64,
    best: Option<(Vec<f64>, Evaluation)>,
    report: OptimizationReport,
}

impl Tracker {
    fn absorb(&mut self, batch: Vec<(Vec<f64>, Evaluation)>) -> Result<()> {
        for (theta, ev) in batch {
            let n = self.report.evaluations;
            self.report.evaluations += 1;
            if ev.is_valid() && ev.ratio > self.bound {
                return Err(Error::TheoremViolation {
                    ratio: ev.ratio,
                    bound: self.bound,
                });
            }
            if !ev.is_valid() {
                let mut labels: Vec<String> =
                    ev.violations.iter().map(|v| v.label().to_string()).collect();
                if let Some(e) = &ev.error {
                    labels.push(format!("error: {e}"));
                }
                self.report.violation_history.push(ViolationRecord {
                    evaluation: n,
                    labels,
                    penalty: ev.penalty(),
                });
            }
            if self.best.as_ref().map_or(true, |(_, b)| better(&ev, b)) {
                self.best = Some((theta, ev));
            }
            let so_far = self
                .best
                .as_ref()
                .map_or(f64::NEG_INFINITY, |(_, b)| b.ratio);
            self.report.trace.push(so_far);
        }
        Ok(())
    }
}

/// Evolution strategy with restarts. Aborts with
/// [`Error::TheoremViolation`] if any valid candidate beats
/// `max(80, 225/|e|)`.
pub fn maximize_ratio(fam: &PotentialFamily, cfg: &SearchConfig) -> Result<OptimizationReport> {
    let start = Instant::now();
    if fam.dim() == 0 {
        return Err(Error::Family("family has no parameters".into()));
    }
    if let Some(p) = fam.parameters.iter().find(|p| !(p.lo <= p.hi)) {
        return Err(Error::Family(format!("parameter {} has an empty box", p.name)));
    }
    let bound = theorem_bound(&fam.euler_number()?)?;
    let mut t = Tracker {
        bound,
        best: None,
        report: OptimizationReport {
            best_parameters: Vec::new(),
            best_ratio: f64::NEG_INFINITY,
            best_certificate: None,
            trace: Vec::new(),
            violation_history: Vec::new(),
            evaluations: 0,
            wall_time_secs: 0.0,
        },
    };
    let widths: Vec<f64> = fam.parameters.iter().map(|p| (p.hi - p.lo).max(1e-300)).collect();
    let restarts = cfg.restarts.max(1);
    let lambda = cfg.population.max(2);
    let per_restart = cfg.budget / restarts;

    for r in 0..restarts {
        let quota = if r + 1 == restarts {
            cfg.budget - per_restart * (restarts - 1)
        } else {
            per_restart
        };
        if quota == 0 {
            continue;
        }
        let mut rng = stream(cfg.seed, r, 0, usize::MAX);
        let mut center: Vec<f64> = fam
            .parameters
            .iter()
            .map(|p| if p.lo == p.hi { p.lo } else { rng.gen_range(p.lo..=p.hi) })
            .collect();
        let mut center_eval = evaluate_candidate(fam, &center);
        t.absorb(vec![(center.clone(), center_eval.clone())])?;
        let mut used = 1;
        let mut sigma = 0.25;
        let mut generation = 1;
        while used < quota && sigma > 1e-12 {
            let n = lambda.min(quota - used);
            let batch: Vec<(Vec<f64>, Evaluation)> = (0..n)
                .into_par_iter()
                .map(|i| {
                    let mut rng = stream(cfg.seed, r, generation, i);
                    let mut theta: Vec<f64> = center
                        .iter()
                        .zip(&widths)
                        .map(|(c, w)| {
                            let z: f64 = rng.sample(StandardNormal);
                            c + sigma * w * z
                        })
                        .collect();
                    fam.clamp(&mut theta);
                    let ev = evaluate_candidate(fam, &theta);
                    (theta, ev)
                })
                .collect();
            used += n;
            generation += 1;
            let mut gen_best: Option<&(Vec<f64>, Evaluation)> = None;
            for cand in &batch {
                if gen_best.map_or(true, |b| better(&cand.1, &b.1)) {
                    gen_best = Some(cand);
                }
            }
            match gen_best {
                Some((theta, ev)) if better(ev, &center_eval) => {
                    center = theta.clone();
                    center_eval = ev.clone();
                    sigma = (sigma * 1.5).min(0.5);
                }
                _ => sigma *= 0.6,
            }
            t.absorb(batch)?;
        }
    }
    let mut report = t.report;
    if let Some((theta, ev)) = t.best {
        report.best_parameters = theta;
        report.best_ratio = ev.ratio;
        report.best_certificate = ev.certificate;
    }
    report.wall_time_secs = start.elapsed().as_secs_f64();
    Ok(report)
}

/// One-parameter Zoll family for Euler number `e`: a single cylinder with
/// `K ∈ [1, 1 + |e|]` and `J ≡ θ`, so that every interior orbit has period
/// `θ`. Valid for `θ >= 1`, where the ratio is `1/(θ|e|)`.
pub fn zoll_family(e: &Rational) -> Result<PotentialFamily> {
    if e.is_zero() {
        return Err(Error::ZeroEuler);
    }
    let d = realize_euler(0, e);
    let top = rational::int(1) + rational::abs(e);
    let exact = |n: i64| Value::Exact(rational::int(n));
    Ok(PotentialFamily {
        parameters: vec![Parameter {
            name: "theta".into(),
            lo: 0.5,
            hi: 3.0,
        }],
        genus: d.genus,
        surgeries: d.coefficients,
        components: vec![ComponentTemplate {
            k_min: exact(1),
            k_max: Value::Exact(top.clone()),
            breaks: Vec::new(),
            pieces: vec![vec![Value::Affine {
                constant: Box::new(Value::Float(0.0)),
                terms: vec![(0, 1.0)],
            }]],
            lower: BoundaryTemplate {
                k: exact(1),
                p: 1,
                id: "lower".into(),
            },
            upper: BoundaryTemplate {
                k: Value::Exact(top),
                p: 1,
                id: "upper".into(),
            },
        }],
        tame: true,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeRow {
    pub e: String,
    pub best_ratio: f64,
    pub inverse_euler: f64,
    pub bound: f64,
    pub evaluations: usize,
    pub error: Option<String>,
}

/// Runs the search once per Euler number and tabulates the best ratio
/// against `1/|e|` and `max(80, 225/|e|)`. A failing row does not stop the
/// others.
pub fn sharpness_probe(
    e_list: &[Rational],
    fam_builder: impl Fn(&Rational) -> Result<PotentialFamily>,
    cfg: &SearchConfig,
) -> Vec<ProbeRow> {
    e_list
        .iter()
        .map(|e| {
            let mut row = ProbeRow {
                e: rational::format(e),
                best_ratio: f64::NAN,
                inverse_euler: f64::NAN,
                bound: f64::NAN,
                evaluations: 0,
                error: None,
            };
            let mut run = || -> Result<OptimizationReport> {
                row.bound = theorem_bound(e)?;
                row.inverse_euler = 1.0 / rational::to_f64(&rational::abs(e));
                maximize_ratio(&fam_builder(e)?, cfg)
            };
            match run() {
                Ok(rep) => {
                    row.best_ratio = rep.best_ratio;
                    row.evaluations = rep.evaluations;
                }
                Err(err) => row.error = Some(err.to_string()),
            }
            row
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, rat};

    fn small(budget: usize, seed: u64) -> SearchConfig {
        SearchConfig {
            budget,
            seed,
            restarts: 2,
            population: 8,
        }
    }

    #[test]
    fn zoll_family_at_optimum() {
        let fam = zoll_family(&int(-1)).unwrap();
        let ev = evaluate_candidate(&fam, &[1.0]);
        assert_eq!(ev.ratio, 1.0);
        let ev = evaluate_candidate(&fam, &[2.0]);
        assert_eq!(ev.ratio, 0.5);
        let ev = evaluate_candidate(&fam, &[0.9]);
        assert!(!ev.is_valid());
        assert!(ev.violations.iter().any(|v| v.label() == "budget"));
    }

    #[test]
    fn negative_tau_reports_c1_deficit() {
        let mut fam = zoll_family(&int(-1)).unwrap();
        fam.parameters[0].lo = -1.0;
        fam.components[0].pieces[0].push(Value::Float(0.0));
        fam.components[0].pieces[0].push(Value::Float(0.25));
        // J = θ + k²/4 on [1, 2]: tau = θ - k²/4, smallest at k = 2
        let ev = evaluate_candidate(&fam, &[-0.5]);
        let c1 = ev.violations.iter().find(|v| v.label() == "c1").unwrap();
        assert!((c1.deficit() - 1.5).abs() < 1e-12);
    }

    #[test]
    fn evaluation_is_pure() {
        let fam = zoll_family(&rat(-3, 2)).unwrap();
        assert_eq!(evaluate_candidate(&fam, &[2.0]), evaluate_candidate(&fam, &[2.0]));
    }

    #[test]
    fn search_is_deterministic_and_monotone() {
        let fam = zoll_family(&int(-1)).unwrap();
        let a = maximize_ratio(&fam, &small(400, 5)).unwrap();
        let b = maximize_ratio(&fam, &small(400, 5)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.evaluations, 400);
        assert!(a.trace.windows(2).all(|w| w[1] >= w[0]));
        assert!(a.best_ratio > 0.95 && a.best_ratio <= 1.0);
        let again = evaluate_candidate(&fam, &a.best_parameters);
        assert!((again.ratio - a.best_ratio).abs() < 1e-10);
    }

    #[test]
    fn infeasible_family_reports_history() {
        let mut fam = zoll_family(&int(-1)).unwrap();
        fam.parameters[0].hi = 0.9;
        let rep = maximize_ratio(&fam, &small(60, 1)).unwrap();
        assert_eq!(rep.best_ratio, f64::NEG_INFINITY);
        assert_eq!(rep.violation_history.len(), 60);
    }

    #[test]
    fn probe_rows() {
        let rows = sharpness_probe(&[int(-1), rat(-1, 2)], zoll_family, &small(200, 3));
        assert_eq!(rows[0].bound, 225.0);
        assert!(rows[0].best_ratio > 0.9);
        assert_eq!(rows[1].bound, 450.0);
        assert!(rows[1].best_ratio > 1.8 && rows[1].best_ratio <= 2.0 + 1e-9);
        assert!(sharpness_probe(&[], zoll_family, &small(10, 0)).is_empty());
        let bad = sharpness_probe(&[int(0)], zoll_family, &small(10, 0));
        assert!(bad[0].error.is_some());
    }
}
