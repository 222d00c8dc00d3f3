//! `systole`: command-line front end for the systole-core library.
//!
//! Exit status is 0 on success, 1 when a model, hypothesis or file fails
//! validation, and 2 on usage errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use systole_core::analysis::{run_suite, GeneratorConfig, Lemma};
use systole_core::io::{format_sig, model_to_json, parse_family, parse_model};
use systole_core::model::{
    nonvanishing_bound, theorem_bound, zoll_besse_evaluate, ContactModel, Systole, SystoleWitness,
};
use systole_core::optimizer::{maximize_ratio, sharpness_probe, zoll_family, SearchConfig};
use systole_core::orbits::{closed_orbits, DEFAULT_MAX_Q};
use systole_core::rational::{self, Rational};
use systole_core::seifert::SurgeryData;
use systole_core::Error;

const THREADS_VAR: &str = "SYSTOLE_THREADS";

#[derive(Parser)]
#[command(name = "systole", version, about = "Systolic ratios of S1-invariant contact forms on Seifert bundles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SurgeryArg {
    /// Surgery pairs as JSON, e.g. '[[2,1],[3,1]]', or a model file
    surgery: String,
    /// Genus of the base (ignored when reading a model file)
    #[arg(long, default_value_t = 0)]
    genus: u32,
}

#[derive(Subcommand)]
enum Command {
    /// Print the Euler number -Σ q/p
    Euler(SurgeryArg),
    /// Print the normalized surgery pairs
    Normalize(SurgeryArg),
    /// Decide whether two surgery descriptions give the same bundle
    Equiv {
        a: String,
        b: String,
        #[arg(long, default_value_t = 0)]
        genus_a: u32,
        #[arg(long, default_value_t = 0)]
        genus_b: u32,
    },
    /// Print the contact graph of a model
    Graph {
        model: PathBuf,
        /// Emit Graphviz dot instead of an adjacency list
        #[arg(long)]
        dot: bool,
    },
    /// Validate a model and print systole, volume and ratio
    Eval {
        model: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_Q)]
        qmax: u64,
        /// Directory for plot CSVs (tau, J', realizability curve)
        #[arg(long)]
        plot: Option<PathBuf>,
        /// Samples per plotted curve
        #[arg(long, default_value_t = 201)]
        samples: usize,
    },
    /// List closed interior orbits of period at most BOUND as CSV
    Orbits {
        model: PathBuf,
        #[arg(long)]
        bound: f64,
        /// Restrict to one component
        #[arg(long)]
        component: Option<usize>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Run a randomized lemma suite
    VerifyLemmas {
        #[arg(long, value_parser = parse_lemma)]
        lemma: Lemma,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Compare a model's ratio against max(80, 225/|e|)
    CheckTheorem {
        model: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MAX_Q)]
        qmax: u64,
    },
    /// Maximize the systolic ratio over a parametrized family
    Optimize {
        #[arg(long)]
        family: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        restarts: usize,
        #[arg(long, default_value_t = 16)]
        population: usize,
        /// Trace CSV: evaluation, best ratio so far
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the best model found as JSON
        #[arg(long)]
        best: Option<PathBuf>,
        /// CSV of rejected candidates and their violation labels
        #[arg(long)]
        violations: Option<PathBuf>,
    },
    /// Exact invariants of the Zoll/Besse form K = K0, or a sharpness probe
    Zoll {
        /// Surgery pairs or model file (omit with --probe)
        surgery: Option<String>,
        #[arg(long, default_value_t = 0)]
        genus: u32,
        #[arg(long, default_value = "1")]
        k0: String,
        /// Comma-separated Euler numbers to probe with the one-parameter family
        #[arg(long, allow_hyphen_values = true)]
        probe: Option<String>,
        #[arg(long, default_value_t = 2000)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn parse_lemma(s: &str) -> Result<Lemma, String> {
    Lemma::parse(s).ok_or_else(|| format!("unknown lemma {s:?}; expected 5.1, 5.2 or 5.3"))
}

/// A failure with its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: 1,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

fn invalid(message: impl Into<String>) -> Failure {
    Failure {
        code: 1,
        message: message.into(),
    }
}

type Outcome = std::result::Result<(), Failure>;

fn read(path: &Path) -> std::result::Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Outcome {
    fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_model(path: &Path) -> std::result::Result<ContactModel, Failure> {
    parse_model(&read(path)?).map_err(|e| invalid(format!("{}: {e}", path.display())))
}

fn surgery(arg: &str, genus: u32) -> std::result::Result<SurgeryData, Failure> {
    if arg.trim_start().starts_with('[') {
        let pairs: Vec<(i64, i64)> = serde_json::from_str(arg)
            .map_err(|e| usage(format!("surgery pairs {arg:?}: {e}")))?;
        return Ok(SurgeryData::new(genus, pairs)?);
    }
    let fam = parse_family(&read(Path::new(arg))?).map_err(|e| invalid(format!("{arg}: {e}")))?;
    Ok(SurgeryData::new(fam.genus, fam.surgeries)?)
}

fn pairs_json(d: &SurgeryData) -> String {
    serde_json::to_string(&d.coefficients).expect("pairs serialize")
}

fn csv_text(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}

fn emit_csv(dest: Option<&Path>, text: &str) -> Outcome {
    match dest {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn describe(sys: &Systole) -> String {
    match &sys.witness {
        SystoleWitness::Boundary { id, k_crit, p } => {
            format!("boundary orbit {id} (K = {}, p = {p})", format_sig(*k_crit))
        }
        SystoleWitness::Orbit { component, orbit } => format!(
            "component {component}: {} orbit at k = {}, slope {}/{}",
            orbit.kind.label(),
            format_sig(orbit.k),
            orbit.p,
            orbit.q
        ),
    }
}

fn print_violations(m: &ContactModel) -> Outcome {
    let v = m.validate();
    if v.is_empty() {
        return Ok(());
    }
    for x in &v {
        println!("violation: {x}");
    }
    Err(invalid(format!("model violates {} condition(s)", v.len())))
}

fn eval(path: &Path, qmax: u64, plot: Option<&Path>, samples: usize) -> Outcome {
    let m = load_model(path)?;
    let e = m.euler_number();
    println!("euler: {}", rational::format(&e));
    if let Some(dir) = plot {
        write_plots(&m, dir, samples)?;
    }
    print_violations(&m)?;
    let sys = m.systole_with_limit(qmax)?;
    let vol = m.volume()?;
    let ratio = sys.value * sys.value / vol;
    println!("sys: {}", format_sig(sys.value));
    println!("vol: {}", format_sig(vol));
    if let Some(v) = m.volume_exact() {
        println!("vol exact: {}", rational::format(&v));
    }
    println!("ratio: {}", format_sig(ratio));
    println!("certificate: {}", describe(&sys));
    match theorem_bound(&e) {
        Ok(b) => {
            println!("bound: {}", format_sig(b));
            println!("margin: {}", format_sig(b - ratio));
        }
        Err(err) => println!("bound: {err}"),
    }
    Ok(())
}

fn write_plots(m: &ContactModel, dir: &Path, samples: usize) -> Outcome {
    fs::create_dir_all(dir).map_err(|e| usage(format!("{}: {e}", dir.display())))?;
    let n = samples.max(2);
    for (i, c) in m.components.iter().enumerate() {
        let pot = &c.potential;
        let (a, b) = (pot.k_min(), pot.k_max());
        let ks: Vec<f64> = (0..n).map(|j| a + (b - a) * j as f64 / (n - 1) as f64).collect();
        let tau = ks.iter().map(|&k| {
            vec![format_sig(k), format_sig(pot.return_time(k).unwrap_or(f64::NAN))]
        });
        write(&dir.join(format!("component{i}_tau.csv")), &csv_text(&["k", "tau"], tau))?;
        let jp = ks
            .iter()
            .map(|&k| vec![format_sig(k), format_sig(pot.deriv(k).unwrap_or(f64::NAN))]);
        write(&dir.join(format!("component{i}_jprime.csv")), &csv_text(&["k", "jprime"], jp))?;
    }
    let curve = m
        .realizability_curve(n)
        .into_iter()
        .map(|(c, r)| vec![format_sig(c), format_sig(r)]);
    write(&dir.join("realizability.csv"), &csv_text(&["c", "R"], curve))
}

fn orbits(path: &Path, bound: f64, component: Option<usize>, out: Option<&Path>) -> Outcome {
    let m = load_model(path)?;
    if !(bound.is_finite() && bound > 0.0) {
        return Err(usage("--bound must be positive"));
    }
    let picks: Vec<usize> = match component {
        Some(i) if i < m.components.len() => vec![i],
        Some(i) => return Err(usage(format!("model has no component {i}"))),
        None => (0..m.components.len()).collect(),
    };
    let mut rows = Vec::new();
    for i in picks {
        for o in closed_orbits(&m.components[i].potential, bound)? {
            rows.push(vec![
                format_sig(o.k),
                o.p.to_string(),
                o.q.to_string(),
                format_sig(o.minimal_period),
                o.kind.label().to_string(),
            ]);
        }
    }
    emit_csv(out, &csv_text(&["k", "p", "q", "period", "kind"], rows))
}

fn verify(lemma: Lemma, trials: usize, seed: u64, out: Option<&Path>) -> Outcome {
    let records = run_suite(lemma, trials, seed, &GeneratorConfig::default());
    let certified = records.iter().filter(|r| r.hypothesis_passed()).count();
    let violations = records
        .iter()
        .filter(|r| r.conclusion_passed() == Some(false))
        .count();
    let min_margin = records
        .iter()
        .filter(|r| r.hypothesis_passed())
        .map(|r| r.margin())
        .fold(f64::INFINITY, f64::min);
    if let Some(p) = out {
        let rows = records.iter().map(|r| {
            let verdict = |b: Option<bool>| match b {
                Some(true) => "pass".to_string(),
                Some(false) => "fail".to_string(),
                None => "n/a".to_string(),
            };
            let (lhs, rhs) = r.report.as_ref().map_or((f64::NAN, f64::NAN), |x| (x.lhs, x.rhs));
            vec![
                r.trial.to_string(),
                r.seed.to_string(),
                verdict(r.report.as_ref().map(|x| x.hypothesis_passed())),
                verdict(r.conclusion_passed()),
                format_sig(lhs),
                format_sig(rhs),
                format_sig(r.margin()),
                r.note.clone(),
            ]
        });
        write(
            p,
            &csv_text(
                &["trial", "seed", "hypothesis", "conclusion", "lhs", "rhs", "slack", "note"],
                rows,
            ),
        )?;
    }
    println!("lemma: {}", lemma.name());
    println!("trials: {trials}");
    println!("hypotheses certified: {certified}");
    println!("hypothesis failures: {}", trials - certified);
    println!("conclusion violations: {violations}");
    if certified > 0 {
        println!("smallest slack: {}", format_sig(min_margin));
    }
    if violations > 0 {
        return Err(invalid(format!("{violations} conclusion violation(s)")));
    }
    Ok(())
}

fn check_theorem(path: &Path, qmax: u64) -> Outcome {
    let m = load_model(path)?;
    let e = m.euler_number();
    println!("euler: {}", rational::format(&e));
    let bound = theorem_bound(&e)?;
    print_violations(&m)?;
    let sys = m.systole_with_limit(qmax)?;
    let ratio = sys.value * sys.value / m.volume()?;
    println!("ratio: {}", format_sig(ratio));
    println!("bound: {}", format_sig(bound));
    println!("margin: {}", format_sig(bound - ratio));
    if ratio > bound {
        return Err(Error::TheoremViolation { ratio, bound }.into());
    }
    println!("holds: true");
    Ok(())
}

fn optimize(
    family: &Path,
    cfg: SearchConfig,
    out: Option<&Path>,
    best: Option<&Path>,
    violations: Option<&Path>,
) -> Outcome {
    let fam = parse_family(&read(family)?).map_err(|e| invalid(format!("{}: {e}", family.display())))?;
    let rep = maximize_ratio(&fam, &cfg)?;
    if let Some(p) = out {
        let rows = rep
            .trace
            .iter()
            .enumerate()
            .map(|(i, r)| vec![(i + 1).to_string(), format_sig(*r)]);
        write(p, &csv_text(&["evaluation", "best_ratio"], rows))?;
    }
    if let Some(p) = violations {
        let rows = rep.violation_history.iter().map(|v| {
            vec![
                (v.evaluation + 1).to_string(),
                v.labels.join(";"),
                format_sig(v.penalty),
            ]
        });
        write(p, &csv_text(&["evaluation", "violations", "penalty"], rows))?;
    }
    println!("evaluations: {}", rep.evaluations);
    println!("rejected: {}", rep.violation_history.len());
    println!("wall time: {} s", format_sig(rep.wall_time_secs));
    let Some(cert) = &rep.best_certificate else {
        return Err(invalid("no valid candidate found"));
    };
    println!("best ratio: {}", format_sig(rep.best_ratio));
    for (p, x) in fam.parameters.iter().zip(&rep.best_parameters) {
        println!("{} = {}", p.name, format_sig(*x));
    }
    println!("certificate: {}", describe(cert));
    if let Some(p) = best {
        write(p, &model_to_json(&fam.decode(&rep.best_parameters)?))?;
    }
    Ok(())
}

fn zoll(
    surgery_arg: Option<&str>,
    genus: u32,
    k0: &str,
    probe: Option<&str>,
    cfg: SearchConfig,
    out: Option<&Path>,
) -> Outcome {
    if let Some(list) = probe {
        let es = list
            .split(',')
            .map(|s| rational::parse(s.trim()).map_err(|_| usage(format!("bad Euler number {s:?}"))))
            .collect::<std::result::Result<Vec<Rational>, _>>()?;
        let rows = sharpness_probe(&es, zoll_family, &cfg);
        let text = csv_text(
            &["e", "best_ratio", "inverse_euler", "bound", "evaluations", "error"],
            rows.iter().map(|r| {
                vec![
                    r.e.clone(),
                    format_sig(r.best_ratio),
                    format_sig(r.inverse_euler),
                    format_sig(r.bound),
                    r.evaluations.to_string(),
                    r.error.clone().unwrap_or_default(),
                ]
            }),
        );
        emit_csv(out, &text)?;
        return match rows.iter().find_map(|r| r.error.as_ref()) {
            Some(e) => Err(invalid(e.clone())),
            None => Ok(()),
        };
    }
    let arg = surgery_arg.ok_or_else(|| usage("zoll needs surgery data or --probe"))?;
    let d = surgery(arg, genus)?;
    let k0 = rational::parse(k0).map_err(|_| usage(format!("bad K0 {k0:?}")))?;
    let z = zoll_besse_evaluate(&k0, &d)?;
    println!("sys: {}", rational::format(&z.sys));
    println!("vol: {}", rational::format(&z.vol));
    println!("ratio: {}", rational::format(&z.ratio));
    println!("1/|e|: {}", rational::format(&nonvanishing_bound(&d.euler_number())?));
    Ok(())
}

fn dispatch(cli: Cli) -> Outcome {
    match cli.command {
        Command::Euler(a) => {
            println!("{}", rational::format(&surgery(&a.surgery, a.genus)?.euler_number()));
            Ok(())
        }
        Command::Normalize(a) => {
            println!("{}", pairs_json(&surgery(&a.surgery, a.genus)?.normalize()));
            Ok(())
        }
        Command::Equiv { a, b, genus_a, genus_b } => {
            println!("{}", surgery(&a, genus_a)?.equivalent(&surgery(&b, genus_b)?));
            Ok(())
        }
        Command::Graph { model, dot } => {
            let g = load_model(&model)?.graph()?;
            print!("{}", if dot { g.to_dot() } else { g.adjacency_list() });
            Ok(())
        }
        Command::Eval { model, qmax, plot, samples } => eval(&model, qmax, plot.as_deref(), samples),
        Command::Orbits { model, bound, component, csv } => {
            orbits(&model, bound, component, csv.as_deref())
        }
        Command::VerifyLemmas { lemma, trials, seed, csv } => verify(lemma, trials, seed, csv.as_deref()),
        Command::CheckTheorem { model, qmax } => check_theorem(&model, qmax),
        Command::Optimize {
            family,
            budget,
            seed,
            restarts,
            population,
            out,
            best,
            violations,
        } => optimize(
            &family,
            SearchConfig {
                budget,
                seed,
                restarts,
                population,
            },
            out.as_deref(),
            best.as_deref(),
            violations.as_deref(),
        ),
        Command::Zoll {
            surgery,
            genus,
            k0,
            probe,
            budget,
            seed,
            csv,
        } => zoll(
            surgery.as_deref(),
            genus,
            &k0,
            probe.as_deref(),
            SearchConfig {
                budget,
                seed,
                ..SearchConfig::default()
            },
            csv.as_deref(),
        ),
    }
}

fn configure_threads() -> Outcome {
    let Ok(v) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .map_err(|_| usage(format!("{THREADS_VAR}={v:?} is not a thread count")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| usage(e.to_string()))
}

/// Parses `argv`, runs the command and returns the exit status.
pub fn run<I, T>(argv: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match configure_threads().and_then(|_| dispatch(cli)) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(run(std::env::args_os()))
}
