use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pseudoval"))
        .args(args)
        .env_remove("PSEUDOVAL_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn classify_gf8_succeeds() {
    let o = run(&["classify", "--n", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let s = stdout(&o);
    assert!(s.contains("2 classes (2 expected)"), "{s}");
    assert!(s.contains("all elementary"), "{s}");
}

#[test]
fn classify_report_is_deterministic_without_timings() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let o = run(&["classify", "--n", "3", "--no-timings", "--report", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn long_runs_need_flag() {
    assert_eq!(run(&["classify", "--n", "5"]).status.code(), Some(4));
    assert_eq!(run(&["classify", "--n", "7"]).status.code(), Some(4));
}

#[test]
fn enumerate_gf16_counts() {
    let o = run(&["enumerate", "--n", "4", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["classes"], 3);
    assert_eq!(v["opolynomials"], 2058);
    assert_eq!(v["opermutations"], 30870);
}

#[test]
fn oracle_matches_expansion() {
    for n in ["3", "4"] {
        let o = run(&["oracle", "--n", n]);
        assert_eq!(o.status.code(), Some(0));
        assert!(stdout(&o).contains("sets equal"));
    }
    assert_eq!(run(&["oracle", "--n", "5"]).status.code(), Some(4));
}

#[test]
fn bad_catalog_entry_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.txt");
    // x^3 is not an o-polynomial over GF(8)
    fs::write(&p, "3 11 cube 3:1\n").unwrap();
    let o = run(&["enumerate", "--n", "3", "--catalog", p.to_str().unwrap()]);
    assert_ne!(o.status.code(), Some(0));
    let p2 = dir.path().join("garbled.txt");
    fs::write(&p2, "3 11 conic 2:x\n").unwrap();
    assert_eq!(run(&["enumerate", "--n", "3", "--catalog", p2.to_str().unwrap()]).status.code(), Some(4));
}

#[test]
fn incomplete_catalog_is_a_count_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("partial.txt");
    fs::write(&p, "5 37 conic 2:1\n").unwrap();
    let o = run(&["enumerate", "--n", "5", "--catalog", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

fn tamper_edge_list(path: &Path) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let i = lines.iter().position(|l| !l.starts_with('#')).unwrap();
    lines.remove(i);
    fs::write(path, lines.join("\n") + "\n").unwrap();
}

#[test]
fn tgq_roundtrip_and_tamper() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("gq.txt");
    let o = run(&["build-tgq", "--n", "3", "--out", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("585 points"));
    assert_eq!(run(&["verify", p.to_str().unwrap()]).status.code(), Some(0));
    tamper_edge_list(&p);
    assert_eq!(run(&["verify", p.to_str().unwrap()]).status.code(), Some(3));
}

#[test]
fn laguerre_roundtrip_and_tamper() {
    let dir = tempfile::tempdir().unwrap();
    for model in ["cone", "elation"] {
        let p = dir.path().join(format!("{model}.txt"));
        let o = run(&["build-laguerre", "--n", "3", "--model", model, "--out", p.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
        assert!(stdout(&o).contains("order 8"));
        assert_eq!(run(&["verify", p.to_str().unwrap()]).status.code(), Some(0));
        tamper_edge_list(&p);
        assert_eq!(run(&["verify", p.to_str().unwrap()]).status.code(), Some(3));
    }
}

#[test]
fn pseudo_oval_roundtrip_and_tamper() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("o.json");
    let o = run(&["pseudo-oval", "--n", "3", "--class", "1", "--out", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(run(&["verify", p.to_str().unwrap()]).status.code(), Some(0));

    let mut v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&p).unwrap()).unwrap();
    // make element 1 equal to element 0
    v["elements"][1] = v["elements"][0].clone();
    fs::write(&p, serde_json::to_string(&v).unwrap()).unwrap();
    let o = run(&["verify", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("not a pseudo-oval"));
}

#[test]
fn non_opolynomial_source_is_rejected() {
    let o = run(&["build-tgq", "--n", "3", "--coeffs", "3:1"]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(run(&["build-tgq", "--n", "3", "--coeffs", "9:1"]).status.code(), Some(4));
    assert_eq!(run(&["build-tgq", "--n", "3", "--class", "9"]).status.code(), Some(4));
}

#[test]
fn checkpoint_resume_matches_uninterrupted_run() {
    let dir = tempfile::tempdir().unwrap();
    let full = dir.path().join("full.json");
    let resumed = dir.path().join("resumed.json");
    let ck = dir.path().join("ck.json");
    let o = run(&["classify", "--n", "4", "--no-timings", "--report", full.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let o = run(&[
        "classify", "--n", "4", "--no-timings", "--checkpoint", ck.to_str().unwrap(),
        "--checkpoint-interval", "300", "--stop-after", "700",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(ck.exists());
    let o = run(&[
        "classify", "--n", "4", "--no-timings", "--resume", ck.to_str().unwrap(),
        "--checkpoint-interval", "300", "--report", resumed.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read(&full).unwrap(), fs::read(&resumed).unwrap());
}

#[test]
fn cache_dir_is_populated_and_reused() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let a = run(&["classify", "--n", "4", "--no-timings", "--cache-dir", d]);
    assert_eq!(a.status.code(), Some(0));
    let files = fs::read_dir(dir.path()).unwrap().count();
    assert_eq!(files, 3);
    let b = run(&["classify", "--n", "4", "--no-timings", "--cache-dir", d]);
    assert_eq!(stdout(&a), stdout(&b));
}
