use std::io::Write;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_canon-szego"))
}

fn corpus(name: &str) -> String {
    format!("{}/corpus/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn temp_json(content: &str) -> std::path::PathBuf {
    let path = std::env::temp_dir().join(format!("canon-szego-{}-{}.json", std::process::id(), content.len()));
    std::fs::File::create(&path).unwrap().write_all(content.as_bytes()).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

#[test]
fn truncated_json_exits_2_with_position() {
    let path = temp_json("{\"breakpoints\": [0, 1],\n \"h1\": [2, ");
    let out = run(&["entropy", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2"), "{err}");
    std::fs::remove_file(path).unwrap();
}

#[test]
fn missing_field_and_bad_flags_exit_2() {
    let path = temp_json(r#"{"breakpoints": [0], "pieces": []}"#);
    let out = run(&["szego", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::remove_file(path).unwrap();
    let out = run(&["density", "--input", &corpus("bump.json"), "--grid", "0:1"]);
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["verify"]).env("CANON_SZEGO_THREADS", "zero").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn hypothesis_violation_exits_3() {
    // √det ∈ L¹: rank-one tail after a finite stretch.
    let path = temp_json(r#"{"breakpoints": [0, 1], "h1": [1, 1], "h2": [1, 0]}"#);
    let out = run(&["szego", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("hypothesis"));
    std::fs::remove_file(path).unwrap();
}

#[test]
fn entropy_on_bump_reports_k() {
    let out = run(&["entropy", "--input", &corpus("bump.json"), "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("route,r,i,j,k"));
    let exact: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(exact[0], "exact_tail");
    let k: f64 = exact[4].parse().unwrap();
    assert!((k - 0.1157).abs() < 1e-4);
    assert_eq!(exact[4].trim_start_matches("0.").len(), 15);
}

#[test]
fn grid_commands_are_thread_independent() {
    let args = ["simulate", "--input", &corpus("bump.json"), "--grid", "-3:3:25", "--method", "disk"];
    let one = bin().args(args).env("CANON_SZEGO_THREADS", "1").output().unwrap();
    let four = bin().args(args).env("CANON_SZEGO_THREADS", "4").output().unwrap();
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn output_flag_writes_file() {
    let path = std::env::temp_dir().join(format!("canon-szego-out-{}.csv", std::process::id()));
    let out = run(&[
        "string",
        "analyze",
        "--input",
        &corpus("geometric.json"),
        "--format",
        "csv",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("n,t_n,t_n_via_eta,t_n2,mass,term\n"));
    std::fs::remove_file(path).unwrap();
}
