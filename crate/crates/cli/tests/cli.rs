use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const SMALL_GRID: &str = r#""grid": {"angular": 64, "radial": 32, "boundary_samples": 64, "radius_scan": 8}"#;
const BRANCH_23: &str = r#"{"field": {"variant": "branch_family", "k": 2, "q": 3}}"#;

fn qfreq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qfreq")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p
}

fn run(cmd: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![cmd, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    qfreq(&args)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn branch_config(dir: &Path) -> PathBuf {
    write_config(
        dir,
        "branch.json",
        &format!(r#"{{"fields": [{{"label": "branch(2,3)", "spec": {BRANCH_23}}}], {SMALL_GRID}, "blowup": {{"radii": [0.5, 0.1]}}}}"#),
    )
}

#[test]
fn analyze_reports_the_branch_exponent_and_plots() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = branch_config(dir.path());
    let out = dir.path().join("out");
    let o = run("analyze", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("exponent 0.666667"), "{}", stdout(&o));
    let svg = fs::read_to_string(out.join("branch-2-3-0.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.contains("<polyline") && svg.contains("H(r)/r"));
    let a = read_json(&out.join("analyze.json"));
    assert_eq!(a["schema"], "qfreq.analyze/1");
    let alpha = a["profiles"][0]["holder"]["alpha"].as_f64().unwrap();
    assert!((alpha - 2.0 / 3.0).abs() < 1e-6);
    assert!(fs::read_to_string(out.join("profiles.csv")).unwrap().starts_with("label,u,v,r,D,H,N,H/r\n"));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = branch_config(dir.path());
    for cmd in ["analyze", "verify", "blowup", "scan"] {
        let (a, b) = (dir.path().join(format!("{cmd}-a")), dir.path().join(format!("{cmd}-b")));
        assert_eq!(run(cmd, &cfg, &a, &[]).status.code(), Some(0), "{cmd}");
        assert_eq!(run(cmd, &cfg, &b, &[]).status.code(), Some(0), "{cmd}");
        let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
        names.sort();
        assert!(!names.is_empty());
        for name in names {
            assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap(), "{cmd}: {name:?}");
        }
        assert!(!fs::read_dir(&a).unwrap().any(|e| e.unwrap().file_name().to_string_lossy().starts_with(".tmp")));
    }
}

#[test]
fn verify_passes_on_a_constant_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        &format!(
            r#"{{"fields": [{{"label": "const", "spec": {{"field": {{"variant": "single_harmonic", "sheet": {{"kind": "holomorphic", "coeffs": [[1, 2]]}}}}}}}}], {SMALL_GRID}}}"#
        ),
    );
    let out = dir.path().join("out");
    let o = run("verify", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let rep = read_json(&out.join("report.json"));
    assert_eq!(rep["schema"], "qfreq.report/1");
    assert!(rep["rows"].as_array().unwrap().iter().all(|r| r["pass"] == true));
    assert!(fs::read_to_string(out.join("report.csv")).unwrap().starts_with("check,anchor,measured,bound,slack,pass,note\n"));
}

#[test]
fn scan_over_branch_families_finds_the_smallest_ratio() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "k.json", &format!(r#"{{"corpus": "kq", {SMALL_GRID}}}"#));
    let out = dir.path().join("out");
    let o = run("scan", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("delta_hat = 0.200000"), "{}", stdout(&o));
    let s = read_json(&out.join("scan.json"));
    assert!((s["gap"]["delta_hat"].as_f64().unwrap() - 0.2).abs() < 1e-3);
    assert_eq!(s["gap"]["rows"].as_array().unwrap().len(), 10);
}

#[test]
fn failed_checks_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "f.json",
        &format!(r#"{{"fields": [{{"label": "b", "spec": {BRANCH_23}, "branch_points": [[0.5, 0.0]]}}], {SMALL_GRID}}}"#),
    );
    let o = run("scan", &cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("not a branch point"), "{}", stderr(&o));
}

#[test]
fn config_errors_name_the_offending_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.json", r#"{"corpus": "kq", "grid": {"angular": 64, "radail": 32}}"#);
    let o = run("verify", &cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("grid") && err.contains("radail"), "{err}");

    let cfg = write_config(dir.path(), "bad2.json", r#"{"fields": [{"label": "x", "spec": {"field": {"variant": "branch_family", "k": "two", "q": 3}}}]}"#);
    let err = stderr(&run("verify", &cfg, &dir.path().join("out"), &[]));
    assert!(err.contains("fields[0].spec"), "{err}");
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = branch_config(dir.path());
    let out = dir.path().join("out");
    assert_eq!(run("verify", &cfg, &out, &["--tol", "bogus=1"]).status.code(), Some(2));
    assert_eq!(run("verify", &cfg, &out, &["--grid", "64"]).status.code(), Some(2));
    assert_eq!(run("frobnicate", &cfg, &out, &[]).status.code(), Some(2));
    assert_eq!(qfreq(&["verify"]).status.code(), Some(2));
    assert_eq!(run("verify", &dir.path().join("missing.json"), &out, &[]).status.code(), Some(2));
    let empty = write_config(dir.path(), "empty.json", "{}");
    assert_eq!(run("verify", &empty, &out, &[]).status.code(), Some(2));
    assert_eq!(run("export", &cfg, &out, &[]).status.code(), Some(2));
}

#[test]
fn flags_override_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "c.json",
        &format!(r#"{{"command": "scan", "fields": [{{"label": "b", "spec": {BRANCH_23}}}], {SMALL_GRID}, "out": "from-config", "tolerances": {{"monotonicity": 1e-3}}}}"#),
    );
    let o = run("verify", &cfg, &dir.path().join("flag-out"), &["--grid", "48,24", "--tol", "monotonicity=1e-4"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(!dir.path().join("from-config").exists());
    let rep = read_json(&dir.path().join("flag-out/report.json"));
    assert_eq!(rep["grid"]["angular"], 48);
    assert_eq!(rep["grid"]["radial"], 24);
    let mono = rep["rows"].as_array().unwrap().iter().find(|r| r["anchor"] == "frequency:monotone").unwrap();
    assert_eq!(mono["bound"], 1e-4);

    let o = qfreq(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(dir.path().join("from-config/report.json").exists());
}

#[test]
fn seed_selects_the_random_fields() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "r.json",
        &format!(r#"{{"fields": [{{"label": "b", "spec": {BRANCH_23}}}], {SMALL_GRID}, "random_fields": 3, "seed": 1}}"#),
    );
    let read = |name: &str, extra: &[&str]| {
        let out = dir.path().join(name);
        assert_eq!(run("verify", &cfg, &out, extra).status.code(), Some(0));
        fs::read_to_string(out.join("report.csv")).unwrap()
    };
    let a = read("a", &[]);
    let b = read("b", &["--seed", "1"]);
    let c = read("c", &["--seed", "2"]);
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert_eq!(a.lines().filter(|l| l.starts_with("random-")).count(), 3);
}

#[test]
fn export_round_trips_each_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = branch_config(dir.path());
    let out = dir.path().join("out");
    for cmd in ["analyze", "verify", "blowup", "scan"] {
        assert_eq!(run(cmd, &cfg, &out, &[]).status.code(), Some(0), "{cmd}");
    }
    let cases = [
        ("analyze.json", "label,r,D,H,N,H/r"),
        ("report.json", "check,anchor,measured,bound,slack,pass,note"),
        ("blowup.json", "label,j,r_j,H(1),D(1),r0,osc,H(r0),gap"),
        ("scan.json", "label,u,v,frequency,flag"),
    ];
    for (input, header) in cases {
        let ex = write_config(
            dir.path(),
            "export.json",
            &format!(r#"{{"export": {{"input": "out/{input}", "format": "csv"}}}}"#),
        );
        let dest = dir.path().join("exported");
        let o = run("export", &ex, &dest, &[]);
        assert_eq!(o.status.code(), Some(0), "{input}: {}", stderr(&o));
        let csv = fs::read_to_string(dest.join(input.replace(".json", ".csv"))).unwrap();
        assert_eq!(csv.lines().next().unwrap(), header);
    }
    let direct = fs::read_to_string(out.join("report.csv")).unwrap();
    assert_eq!(fs::read_to_string(dir.path().join("exported/report.csv")).unwrap(), direct);
    let ex = write_config(dir.path(), "export.json", r#"{"export": {"input": "out/scan.json", "format": "json"}}"#);
    let dest = dir.path().join("json");
    assert_eq!(run("export", &ex, &dest, &[]).status.code(), Some(0));
    assert_eq!(read_json(&dest.join("scan.json")), read_json(&out.join("scan.json")));
}

#[test]
fn every_row_anchor_is_documented() {
    let index = fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../docs/equation-index.md")).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let cfg = branch_config(dir.path());
    let out = dir.path().join("out");
    for cmd in ["analyze", "verify", "blowup", "scan"] {
        assert_eq!(run(cmd, &cfg, &out, &[]).status.code(), Some(0), "{cmd}");
    }
    for (file, key) in [("analyze.json", "rows"), ("report.json", "rows"), ("blowup.json", "rows")] {
        for row in read_json(&out.join(file))[key].as_array().unwrap() {
            let anchor = row["anchor"].as_str().unwrap();
            assert!(index.contains(&format!("| `{anchor}` |")), "{file}: undocumented anchor {anchor}");
        }
    }
}
