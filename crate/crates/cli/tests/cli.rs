use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_marginalis"));
    c.env_remove("MARGINALIS_SEED");
    c
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)).unwrap()
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout)
        .unwrap_or_else(|e| panic!("bad JSON ({e}): {}", String::from_utf8_lossy(&o.stdout)))
}

fn f(name: &str) -> String {
    fixture(name).to_str().unwrap().to_string()
}

/// Equal up to `tol` on numbers; builds at different optimization levels
/// may round the random fixtures differently in the last place.
fn close(a: &Value, b: &Value, tol: f64) -> bool {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => (x.as_f64().unwrap() - y.as_f64().unwrap()).abs() <= tol,
        (Value::Array(x), Value::Array(y)) => x.len() == y.len() && x.iter().zip(y).all(|(p, q)| close(p, q, tol)),
        (Value::Object(x), Value::Object(y)) => {
            x.len() == y.len() && x.iter().all(|(k, v)| y.get(k).is_some_and(|w| close(v, w, tol)))
        }
        _ => a == b,
    }
}

#[test]
fn shipped_fixtures_match_constructors() {
    for (name, v) in marginalis_cli::fixtures::fixture_files() {
        let text = std::fs::read_to_string(fixture(&name)).unwrap_or_else(|_| panic!("missing fixture {name}"));
        let shipped: Value = serde_json::from_str(&text).unwrap();
        let exact = !name.starts_with("rand") && !name.starts_with("psi");
        let ok = if exact {
            shipped == v
        } else {
            close(&shipped, &v, 1e-14)
        };
        assert!(ok, "{name} is stale; rerun the gen_fixtures example");
    }
}

#[test]
fn rand_state_is_deterministic_and_normalized() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let o = run(&[
            "rand-state",
            "--dims",
            "2,2",
            "--seed",
            "1",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0);
    }
    let ta = std::fs::read_to_string(&a).unwrap();
    assert_eq!(ta, std::fs::read_to_string(&b).unwrap());
    assert_eq!(ta, golden("rand_state_2x2_seed1.json"));
    let psi = marginalis::io::pure_state_from_json(&ta, true).unwrap();
    assert!((psi.amps().norm() - 1.0).abs() < 1e-12);
    assert_eq!(psi.sig().dims(), &[2, 2]);
}

#[test]
fn rand_state_seed_from_env() {
    let flag = run(&["rand-state", "--dims", "2,3", "--seed", "9"]);
    let env = bin()
        .args(["rand-state", "--dims", "2,3"])
        .env("MARGINALIS_SEED", "9")
        .output()
        .unwrap();
    let default = run(&["rand-state", "--dims", "2,3"]);
    assert_eq!(flag.stdout, env.stdout);
    assert_ne!(flag.stdout, default.stdout);
}

#[test]
fn rand_state_rejects_unit_dimension() {
    assert_eq!(code(&run(&["rand-state", "--dims", "1,2"])), 64);
    assert_eq!(code(&run(&["rand-state"])), 64);
    assert_eq!(code(&run(&["rand-state", "--dims", "x"])), 64);
}

#[test]
fn help_and_unknown_commands() {
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["frobnicate"])), 64);
    assert_eq!(code(&run(&[])), 64);
}

#[test]
fn check_bell_triple_is_infeasible() {
    let o = run(&[
        "check",
        "--marginals",
        &f("bell_01.json"),
        &f("bell_12.json"),
        &f("bell_02.json"),
        "--mode",
        "mixed",
    ]);
    assert_eq!(code(&o), 1);
    let v = stdout_json(&o);
    assert_eq!(v["verdict"], "infeasible");
    assert_eq!(v["precheck"]["overlap_ok"], true);
    assert_eq!(v["format"], 1);
}

#[test]
fn check_random_marginals_are_feasible() {
    let args = [
        "check",
        "--marginals",
        &f("rand3_01.json"),
        &f("rand3_02.json"),
        &f("rand3_12.json"),
    ];
    let o = run(&args);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["verdict"], "feasible");
    assert!(v["residual"].as_f64().unwrap() < 1e-7);
    // same flags, same bytes
    assert_eq!(o.stdout, run(&args).stdout);
}

#[test]
fn check_pure_sigma_tau_eta_is_heuristic_infeasible() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = run(&[
        "check",
        "--marginals",
        &f("ste_01.json"),
        &f("ste_12.json"),
        &f("ste_02.json"),
        "--mode",
        "pure",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 1);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["verdict"], "infeasible");
    assert_eq!(v["heuristic"], true);
    assert_eq!(v["mode"], "pure");
    assert!(v["residual"].as_f64().unwrap() > 1e-2);
    assert_eq!(v["precheck"]["schmidt_ok"], true);

    let o = run(&[
        "check",
        "--marginals",
        &f("ste_12.json"),
        &f("ste_02.json"),
        "--mode",
        "pure",
    ]);
    assert_eq!(code(&o), 0);
}

#[test]
fn check_file_and_parse_errors() {
    assert_eq!(code(&run(&["check", "--marginals", "/nonexistent/m.json"])), 64);
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(code(&run(&["check", "--marginals", bad.to_str().unwrap()])), 64);
    std::fs::write(
        &bad,
        r#"{"format": 2, "system_dims": [2], "subset": [0], "mat": [[[1,0]]]}"#,
    )
    .unwrap();
    assert_eq!(code(&run(&["check", "--marginals", bad.to_str().unwrap()])), 64);
    // trace 2 fails validation unless skipped
    std::fs::write(
        &bad,
        r#"{"format": 1, "system_dims": [2], "subset": [0], "mat": [[[1,0],[0,0]],[[0,0],[1,0]]]}"#,
    )
    .unwrap();
    assert_eq!(code(&run(&["check", "--marginals", bad.to_str().unwrap()])), 64);
    assert_eq!(
        code(&run(&["check", "--marginals", &f("bell_01.json"), "--feas-tol", "0"])),
        64
    );
}

#[test]
fn uda_exit_codes() {
    let o = run(&["uda", "--state", &f("psi4.json"), "--scenario-style", "half-plus-one"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout_json(&o)["verdict"], "unique");
    let o = run(&[
        "uda",
        "--state",
        &f("psi4.json"),
        "--scenario",
        &f("sc_half_plus_one_4.json"),
    ]);
    assert_eq!(code(&o), 0);

    let o = run(&["uda", "--state", &f("ghz4.json"), "--scenario", &f("sc_all3_4.json")]);
    assert_eq!(code(&o), 1);
    let v = stdout_json(&o);
    assert_eq!(v["verdict"], "not_unique");
    assert!(v["alternative_residual"].as_f64().unwrap() < 1e-7);
    let o2 = run(&[
        "uda",
        "--state",
        &f("ghz4.json"),
        "--scenario-style",
        "all-m",
        "--m",
        "3",
    ]);
    assert_eq!(code(&o2), 1);

    let o = run(&["uda", "--state", &f("bell.json"), "--scenario", &f("sc_all1_2.json")]);
    assert_eq!(code(&o), 1);
}

#[test]
fn uda_usage_errors() {
    assert_eq!(code(&run(&["uda", "--state", &f("psi4.json")])), 64);
    assert_eq!(
        code(&run(&["uda", "--state", &f("psi4.json"), "--scenario-style", "all-m"])),
        64
    );
    assert_eq!(
        code(&run(&[
            "uda",
            "--state",
            &f("psi4.json"),
            "--scenario-style",
            "all-m",
            "--m",
            "5"
        ])),
        64
    );
    // scenario for another system
    assert_eq!(
        code(&run(&[
            "uda",
            "--state",
            &f("bell.json"),
            "--scenario",
            &f("sc_all3_4.json")
        ])),
        64
    );
    assert_eq!(
        code(&run(&["uda", "--state", &f("psi4.json"), "--scenario-style", "odd"])),
        64
    );
}

#[test]
fn counts_table() {
    let o = run(&["counts", "--n", "4..8", "--d", "2"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text, golden("counts_4_8.txt"));
    assert!(text
        .lines()
        .any(|l| l.split_whitespace().collect::<Vec<_>>() == ["4", "2", "2", "2816", "2656", "160"]));

    let o = run(&["counts", "--n", "4", "--m", "2", "--json"]);
    let v = stdout_json(&o);
    assert_eq!(v["rows"][0]["margin"], "160");
    assert_eq!(code(&run(&["counts", "--n", "4", "--m", "5"])), 64);
    assert_eq!(code(&run(&["counts", "--n", "4", "--d", "1"])), 64);
    assert_eq!(code(&run(&["counts", "--n", "8..4"])), 64);
}

#[test]
fn export_poly_zero_correlations() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sys.txt");
    let o = run(&[
        "export-poly",
        "--known",
        &f("zero_corr_3q.json"),
        "--unknown",
        "Q",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text, golden("zero_corr_3q.poly"));
    let ps = marginalis::compat::read_polysystem(&out).unwrap();
    assert_eq!(ps.variables.len(), 27);
    assert!(ps.p1.is_exact() && ps.p2.is_exact());
    let p1 = text.lines().find(|l| l.starts_with("p1:")).unwrap();
    assert!(p1.contains("1/8*Q_111^2") && p1.ends_with("- 7/8 = 0"), "{p1}");
    let p2 = text.lines().find(|l| l.starts_with("p2:")).unwrap();
    assert!(p2.contains("3/64*Q_111^2") && p2.ends_with("- 63/64 = 0"), "{p2}");
}

#[test]
fn export_poly_errors() {
    let dir = tempfile::tempdir().unwrap();
    let known = dir.path().join("k.json");
    std::fs::write(
        &known,
        r#"{"format": 1, "dims": [2, 2, 2], "coeff": {"0,0,0": 1.0, "1,1,1": 0.5}}"#,
    )
    .unwrap();
    // explicit value for an unknown slot
    assert_eq!(
        code(&run(&[
            "export-poly",
            "--known",
            known.to_str().unwrap(),
            "--unknown",
            "Q"
        ])),
        64
    );
    // without fill the zero slots are gaps
    assert_eq!(
        code(&run(&[
            "export-poly",
            "--known",
            &f("zero_corr_3q.json"),
            "--unknown",
            "Q",
            "--no-fill"
        ])),
        64
    );
    assert_eq!(
        code(&run(&[
            "export-poly",
            "--known",
            &f("zero_corr_3q.json"),
            "--unknown",
            "Z"
        ])),
        64
    );
    std::fs::write(&known, r#"{"format": 1, "dims": [2, 2, 2], "coeff": {"0,0,0": 2.0}}"#).unwrap();
    assert_eq!(
        code(&run(&[
            "export-poly",
            "--known",
            known.to_str().unwrap(),
            "--unknown",
            "Q"
        ])),
        64
    );
}

#[test]
fn reproduce_cases() {
    let o = run(&["reproduce", "--case", "diag-counterexample"]);
    assert_eq!(code(&o), 0);
    assert_eq!(String::from_utf8(o.stdout).unwrap(), golden("reproduce_diag.txt"));

    let o = run(&["reproduce", "--case", "bloch-polys", "--seed", "3"]);
    assert_eq!(code(&o), 0);
    let line = String::from_utf8(o.stdout).unwrap();
    assert!(
        line.starts_with("PASS bloch-polys: 100/100 density and 100/100 Hermitian oracle matches"),
        "{line}"
    );

    for case in ["counts-table", "diosi", "bell-triple"] {
        let o = run(&["reproduce", "--case", case]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    }
}

#[test]
fn reproduce_usage_errors() {
    assert_eq!(code(&run(&["reproduce", "--case", "no-such-case"])), 64);
    assert_eq!(code(&run(&["reproduce"])), 64);
    assert_eq!(code(&run(&["reproduce", "--all", "--case", "diosi"])), 64);
}
