use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn systole(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_systole"))
        .args(args)
        .env_remove("SYSTOLE_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn euler_of_poincare_sphere_data() {
    let o = systole(&["euler", "[[2,1],[3,1],[5,1]]"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "-31/30\n");
}

#[test]
fn surgery_algebra_commands() {
    let o = systole(&["equiv", "[[1,1],[1,1]]", "[[1,2]]"]);
    assert_eq!(stdout(&o), "true\n");
    let o = systole(&["equiv", "[[2,1]]", "[[2,1]]", "--genus-b", "1"]);
    assert_eq!(stdout(&o), "false\n");
    let o = systole(&["normalize", "[[2,3],[1,1]]"]);
    assert_eq!(stdout(&o), "[[2,1],[1,2]]\n");
    let o = systole(&["euler", &data("flat.json")]);
    assert_eq!(stdout(&o), "-2\n");
}

#[test]
fn eval_flat_model() {
    let o = systole(&["eval", &data("flat.json")]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    for line in ["sys: 1\n", "vol: 2\n", "ratio: 0.5\n", "bound: 112.5\n"] {
        assert!(out.contains(line), "missing {line:?} in {out}");
    }
}

#[test]
fn check_theorem_rejects_zero_euler_number() {
    let o = systole(&["check-theorem", &data("euler_zero.json")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("Euler number must be nonzero"));
}

#[test]
fn malformed_files_name_the_field() {
    let o = systole(&["eval", &data("malformed.json")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("$.components[0].k_max"), "{}", stderr(&o));
    let o = systole(&["eval", &data("truncated.json")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));
}

#[test]
fn exit_code_contract() {
    let cases: &[(&[&str], i32)] = &[
        (&["eval", &data("flat.json")], 0),
        (&["eval", &data("quadratic.json")], 0),
        (&["check-theorem", &data("flat.json")], 0),
        (&["graph", &data("flat.json")], 0),
        (&["eval", &data("budget_short.json")], 1),
        (&["check-theorem", &data("budget_short.json")], 1),
        (&["eval", &data("euler_zero.json")], 1),
        (&["eval", &data("malformed.json")], 1),
        (&["verify-lemmas", "--lemma", "5.4"], 2),
        (&["eval"], 2),
        (&["frobnicate"], 2),
        (&["eval", "/nonexistent/model.json"], 2),
        (&["orbits", &data("flat.json"), "--bound", "-1"], 2),
        (&["euler", "[[0,1]]"], 1),
    ];
    for (args, code) in cases {
        let o = systole(args);
        assert_eq!(o.status.code(), Some(*code), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn thread_override_is_validated() {
    let o = Command::new(env!("CARGO_BIN_EXE_systole"))
        .args(["euler", "[[1,1]]"])
        .env("SYSTOLE_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_systole"))
        .args(["euler", "[[1,1]]"])
        .env("SYSTOLE_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(stdout(&o), "-1\n");
}

#[test]
fn graph_outputs() {
    let o = systole(&["graph", &data("flat.json")]);
    assert_eq!(stdout(&o), "0- []: 1\n1+ []: 0\n");
    let o = systole(&["graph", "--dot", &data("flat.json")]);
    assert!(stdout(&o).starts_with("graph G {"));
}

#[test]
fn orbits_csv() {
    let o = systole(&["orbits", &data("quadratic.json"), "--bound", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("k,p,q,period,kind"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(&row[1..3], ["0", "1"]);
    assert_eq!(row[4], "isolated-root");
    // J'(k) = 1/7 + k/8 vanishes at k = -8/7, where J = 3/2 - 8/49 + 4/49
    let k: f64 = row[0].parse().unwrap();
    let period: f64 = row[3].parse().unwrap();
    assert!((k + 8.0 / 7.0).abs() < 1e-10);
    assert!((period - (1.5 - 4.0 / 49.0)).abs() < 1e-10);
}

#[test]
fn plots_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_string_lossy().into_owned();
    let o = systole(&["eval", &data("quadratic.json"), "--plot", &d, "--samples", "11"]);
    assert_eq!(o.status.code(), Some(0));
    for f in ["component0_tau.csv", "component0_jprime.csv", "realizability.csv"] {
        let text = std::fs::read_to_string(dir.path().join(f)).unwrap();
        assert_eq!(text.lines().count(), 12, "{f}");
    }
    let tau = std::fs::read_to_string(dir.path().join("component0_tau.csv")).unwrap();
    assert!(tau.starts_with("k,tau\n-2,"));
}

#[test]
fn lemma_csv_is_bit_stable() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = systole(&[
            "verify-lemmas",
            "--lemma",
            "5.2",
            "--trials",
            "20",
            "--seed",
            "11",
            "--csv",
            &p.to_string_lossy(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        assert!(stdout(&o).contains("conclusion violations: 0"));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    assert_eq!(text.lines().count(), 21);
    assert!(text.starts_with("trial,seed,hypothesis,conclusion,lhs,rhs,slack,note\n"));
}

#[test]
fn optimize_zoll_family() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let best = dir.path().join(format!("{name}.json"));
        let o = systole(&[
            "optimize",
            "--family",
            &data("zoll_family.json"),
            "--budget",
            "500",
            "--seed",
            "4",
            "--out",
            &out.to_string_lossy(),
            "--best",
            &best.to_string_lossy(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        (
            std::fs::read_to_string(out).unwrap(),
            std::fs::read_to_string(best).unwrap(),
        )
    };
    let (trace, best) = run("one");
    assert_eq!(run("two"), (trace.clone(), best.clone()));
    let last: f64 = trace.lines().last().unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!(last > 0.95 && last <= 1.0);
    let best_path = dir.path().join("one.json");
    let o = systole(&["eval", &best_path.to_string_lossy()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn zoll_exact_and_probe() {
    let o = systole(&["zoll", "[[2,1],[2,1]]", "--k0", "2"]);
    assert_eq!(stdout(&o), "sys: 1\nvol: 4\nratio: 1/4\n1/|e|: 1\n");
    let o = systole(&["zoll", "--probe=-1,-2", "--budget", "300"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("e,best_ratio,inverse_euler,bound,evaluations,error\n"));
    assert!(out.contains("\n-2,"));
    let o = systole(&["zoll", "--probe", "0"]);
    assert_eq!(o.status.code(), Some(1));
}
