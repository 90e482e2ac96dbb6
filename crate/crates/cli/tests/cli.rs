use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use polyiso::io::{parse_certificate, parse_space, print_certificate};
use polyiso::space::{l1_sum, PolySpace};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polyiso")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 output")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn path(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

#[test]
fn dual_of_l1_is_linf() {
    let l1 = fixture("l1_2.json");
    let out = run(&["space", "dual", "--in", path(&l1)]);
    assert_eq!(code(&out), 0);
    let linf = parse_space(&std::fs::read_to_string(fixture("linf_2.json")).unwrap()).unwrap();
    assert_eq!(parse_space(&stdout(&out)).unwrap(), linf);
    assert!(stdout(&out).ends_with('\n'));
}

#[test]
fn binary_space_operations() {
    let l1 = fixture("l1_2.json");
    let out = run(&["space", "l1sum", "--in", path(&l1), "--in", path(&l1)]);
    assert_eq!(code(&out), 0);
    let expected = l1_sum(&PolySpace::l1(2), &PolySpace::l1(2));
    assert_eq!(parse_space(&stdout(&out)).unwrap(), expected);

    let out = run(&["space", "linfsum", "--in", path(&l1)]);
    assert_eq!(code(&out), 2);
}

#[test]
fn quotient_and_subspace() {
    let l1 = fixture("l1_2.json");
    let out = run(&["space", "quotient", "--in", path(&l1), "--basis", "1,1"]);
    assert_eq!(code(&out), 0);
    // l1 plane modulo the diagonal: the class of e_1 has norm 1.
    let q = parse_space(&stdout(&out)).unwrap();
    assert_eq!(q, PolySpace::l1(1));

    let out = run(&["space", "subspace", "--in", path(&l1), "--basis", "1,1"]);
    assert_eq!(parse_space(&stdout(&out)).unwrap(), PolySpace::line(polyiso::arith::rat(1, 2)));

    let out = run(&["space", "subspace", "--in", path(&l1), "--basis", "1,1;2,2"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn demo_table_matches_halving_witness() {
    let out = run(&["demo", "gurarii", "--n-max", "8"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 8);
    for (i, row) in rows.iter().enumerate() {
        let n = i + 1;
        let cols: Vec<&str> = row.split_whitespace().collect();
        let denom = 1u64 << (n - 1);
        let rhs = if n == 1 { "0".to_string() } else { format!("{}/{}", denom - 1, denom) };
        assert_eq!(cols, vec![n.to_string().as_str(), "false", "1", rhs.as_str()]);
    }
}

#[test]
fn search_counterexample_is_unknown() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("unknown.json");
    let o = fixture("gurarii_counterexample.json");
    let out = run(&["search", "--in", path(&o), "--n-max", "6", "--out", cert.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert_eq!(stdout(&out), "unknown up to 6\n");
    let verified = run(&["verify", "--in", cert.to_str().unwrap()]);
    assert_eq!((code(&verified), stdout(&verified).as_str()), (0, "sound\n"));
}

#[test]
fn search_rotation_certificate_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let cert = dir.path().join("ext.json");
    let o = fixture("rotation_j.json");
    let out = run(&["search", "--in", path(&o), "--n-max", "6", "--out", cert.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "extends at n = 4\n");
    let verified = run(&["verify", "--in", cert.to_str().unwrap()]);
    assert_eq!(code(&verified), 0);

    // Claiming the wrong order makes the certificate unsound.
    let text = std::fs::read_to_string(&cert).unwrap();
    let tampered = text.replace("\"order\": 4", "\"order\": 2");
    assert_ne!(tampered, text);
    std::fs::write(&cert, tampered).unwrap();
    let verified = run(&["verify", "--in", cert.to_str().unwrap()]);
    assert_eq!((code(&verified), stdout(&verified).as_str()), (1, "unsound\n"));
}

#[test]
fn check_emits_verifiable_certificates() {
    let o = fixture("gurarii_counterexample.json");
    for n in 1..=4 {
        let out = run(&["check", "--in", path(&o), "--n", &n.to_string(), "--json"]);
        assert_eq!(code(&out), 1);
        let cert = parse_certificate(&stdout(&out)).unwrap();
        assert!(cert.verify().unwrap());
        assert_eq!(print_certificate(&cert), stdout(&out));
    }
    let j = fixture("rotation_j.json");
    let out = run(&["check", "--in", path(&j), "--n", "4"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).starts_with("holds at n = 4"));
}

#[test]
fn output_is_deterministic() {
    let o = fixture("rotation_j.json");
    let a = run(&["search", "--in", path(&o), "--n-max", "5", "--json"]);
    let b = run(&["search", "--in", path(&o), "--n-max", "5", "--json"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn bad_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"kind": "space", "dim": 2, "vertices": [["1", "0"], ["0", "1/0"]]}"#).unwrap();
    let out = run(&["space", "dual", "--in", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("vertices[1][1]"), "{err}");

    std::fs::write(&bad, "{\"dim\": 2,\n \"vertices\": [[\"1\", \"0\"]").unwrap();
    let out = run(&["space", "dual", "--in", bad.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8(out.stderr).unwrap().contains("line 2"));

    let out = run(&["space", "dual", "--in", "/nonexistent/file.json"]);
    assert_eq!(code(&out), 2);
    let out = run(&["check", "--n", "2"]);
    assert_eq!(code(&out), 2);
    let out = run(&["frobnicate"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn validate_reports_violations() {
    let dir = tempfile::tempdir().unwrap();
    let o = fixture("gurarii_counterexample.json");
    let out = run(&["partiso", "validate", "--in", path(&o)]);
    assert_eq!((code(&out), stdout(&out).as_str()), (0, "valid\n"));

    let text = std::fs::read_to_string(&o).unwrap().replace("\"1/2\"", "\"1\"");
    let bad = dir.path().join("doubling.json");
    std::fs::write(&bad, text).unwrap();
    let out = run(&["partiso", "validate", "--in", bad.to_str().unwrap(), "--json"]);
    assert_eq!(code(&out), 1);
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["valid"], false);
    assert!(report["violation"].as_str().unwrap().contains("norm 1 maps to norm 2"));

    // Invalid partial isometries are input errors for the other commands.
    let out = run(&["search", "--in", bad.to_str().unwrap(), "--n-max", "2"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn isometry_groups_of_fixtures() {
    let out = run(&["isogroup", "--in", path(&fixture("l1_2.json"))]);
    assert!(stdout(&out).starts_with("order 8\n"));
    let out = run(&["isogroup", "--in", path(&fixture("hexagon.json")), "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["order"], 12);
    let out = run(&["isogroup", "--in", path(&fixture("hexagon.json")), "--cap", "2"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn core_of_counterexample() {
    let out = run(&["core", "--in", path(&fixture("gurarii_counterexample.json"))]);
    assert_eq!(code(&out), 0);
    assert_eq!(stdout(&out), "core dimension 0 after 2 steps; basis []\n");
    let out = run(&["core", "--in", path(&fixture("rotation_j.json")), "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["steps"], 0);
    assert_eq!(v["core"]["ambient_dim"], 2);
}
