use std::path::Path;
use std::process::{Command, Output};

fn heatlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_heatlab")).args(args).env("HEATLAB_THREADS", "2").output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn probe_line_is_complete() {
    let o = heatlab(&["probe", "--zoo", "line", "--radii", "5,10,20", "--times", "0.5,1"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.starts_with("R,t,deficit,monotone_ok\n"));
    assert!(out.ends_with("verdict: complete-trend\n"), "{out}");
}

#[test]
fn probe_birth_death_is_incomplete() {
    let o = heatlab(&["probe", "--zoo", "birth_death:3"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("verdict: incomplete-trend"));
}

#[test]
fn csv_output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let o = heatlab(&["probe", "--zoo", "huang", "--radii", "5,10", "--out", p.to_str().unwrap()]);
        assert!(o.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn refine_single_edge() {
    let dir = tempfile::tempdir().unwrap();
    let edges = write(dir.path(), "g.edges", "0 1 1\n");
    let prefix = dir.path().join("r");
    let o = heatlab(&[
        "refine",
        "--edges",
        &edges,
        "--g-bound",
        "const:0.3",
        "--out-prefix",
        prefix.to_str().unwrap(),
        "--radii",
        "0.5,0.8,1",
    ]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("inserted vertices: 3"), "{out}");
    let chains = std::fs::read_to_string(dir.path().join("r.chains")).unwrap();
    assert!(chains.lines().any(|l| l == "0 0 1 3 2 3 4"), "{chains}");
    let measure = std::fs::read_to_string(dir.path().join("r.measure")).unwrap();
    // inserted measure 2 b d^2 / (n + 1) = 1/2
    assert!(measure.contains("2 5.0000000000000000e-1"), "{measure}");
    // the upper volume bound fails here: m'(B'_0.8) = 2.5 > 2 m(B_0.8)
    assert!(out.contains("sandwich violated at r = 8.0000000000000004e-1"), "{out}");
    let report = std::fs::read_to_string(dir.path().join("r_report.csv")).unwrap();
    assert_eq!(report.lines().count(), 4);
}

#[test]
fn duplicate_edge_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let edges = write(dir.path(), "g.edges", "0 1 1\n1 0 2\n");
    let o = heatlab(&["probe", "--edges", &edges]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("duplicate edge"));
}

#[test]
fn unknown_zoo_name_is_an_input_error() {
    assert_eq!(heatlab(&["probe", "--zoo", "nowhere"]).status.code(), Some(2));
}

#[test]
fn precondition_failure_exits_four() {
    let o = heatlab(&["check", "--zoo", "huang", "--check", "grigoryan", "--r", "4"]);
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn numeric_failure_exits_three() {
    let o = heatlab(&[
        "counterexample",
        "--n-max",
        "60",
        "--t-grid",
        "0.3",
        "--precision-bits",
        "64",
        "--out",
        "/nonexistent/x",
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn gl_verdicts_on_huang() {
    let o = heatlab(&["check", "--zoo", "huang", "--check", "gl", "--f", "power:2", "--r-max", "1e4"]);
    assert!(o.status.success());
    assert!(stdout(&o).ends_with("verdict: bounded\n"));
    let o = heatlab(&["check", "--zoo", "huang", "--check", "gl", "--f", "power_log:2", "--r-max", "1e4"]);
    assert!(stdout(&o).ends_with("verdict: unbounded-trend\n"));
}

#[test]
fn witness_is_accepted_on_birth_death() {
    let o = heatlab(&["check", "--zoo", "birth_death:3", "--check", "witness", "--lift-g", "const:0.5"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).ends_with("verdict: accepted\n"), "{}", stdout(&o));
}

#[test]
fn zoo_list_and_export() {
    let o = heatlab(&["zoo", "list"]);
    assert!(stdout(&o).lines().any(|l| l == "huang"));
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("h");
    let o = heatlab(&["zoo", "export", "huang", "--out-prefix", prefix.to_str().unwrap()]);
    assert!(o.status.success());
    let edges = std::fs::read_to_string(dir.path().join("h.edges")).unwrap();
    assert_eq!(edges.lines().filter(|l| !l.starts_with('#')).count(), 100);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("h.json")).unwrap()).unwrap();
    assert_eq!(json["name"], "huang");
    assert_eq!(json["window"][0], -50);
    // exported files load back through the file interface
    let o = heatlab(&[
        "probe",
        "--edges",
        dir.path().join("h.edges").to_str().unwrap(),
        "--measure",
        dir.path().join("h.measure").to_str().unwrap(),
        "--metric",
        dir.path().join("h.metric").to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn bad_thread_count_is_rejected() {
    let o = Command::new(env!("CARGO_BIN_EXE_heatlab"))
        .args(["zoo", "list"])
        .env("HEATLAB_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}
