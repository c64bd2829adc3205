use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn loopreg(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_loopreg"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn samples_json(n: usize, f: impl Fn(f64) -> (f64, f64)) -> String {
    let samples: Vec<[f64; 2]> = (0..n)
        .map(|j| {
            let (re, im) = f(j as f64 / n as f64);
            [re, im]
        })
        .collect();
    serde_json::json!({ "n": n, "samples": samples }).to_string()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn regularize_constant_loop() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("z.json"), samples_json(8, |_| (2.0, 0.0))).unwrap();
    let out = loopreg(&["regularize", "z.json", "--out", "r.json"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let r = read_json(&dir.path().join("r.json"));
    assert_eq!(r["n"], 16);
    for s in r["samples"].as_array().unwrap() {
        assert!((s[0].as_f64().unwrap() - 4.0).abs() < 1e-12);
        assert!(s[1].as_f64().unwrap().abs() < 1e-12);
    }
    let diag = read_json(&dir.path().join("r.diagnostics.json"));
    assert_eq!(diag["winding_input"], 0);
    assert_eq!(diag["winding_output"], 0);
    assert_eq!(diag["profile_input"]["norms"].as_array().unwrap().len(), 5);
}

#[test]
fn regularize_pure_mode_doubles_winding() {
    let dir = tempfile::tempdir().unwrap();
    let tau = 2.0 * std::f64::consts::PI;
    fs::write(
        dir.path().join("z.json"),
        samples_json(32, |t| ((tau * t).cos(), (tau * t).sin())),
    )
    .unwrap();
    let out = loopreg(&["regularize", "z.json", "--out", "r.json"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let r = read_json(&dir.path().join("r.json"));
    let samples = r["samples"].as_array().unwrap();
    assert_eq!(samples.len(), 64);
    for (j, s) in samples.iter().enumerate() {
        let t = j as f64 / 64.0;
        assert!((s[0].as_f64().unwrap() - (2.0 * tau * t).cos()).abs() < 1e-10);
        assert!((s[1].as_f64().unwrap() - (2.0 * tau * t).sin()).abs() < 1e-10);
    }
    let diag = read_json(&dir.path().join("r.diagnostics.json"));
    assert_eq!(diag["winding_input"], 1);
    assert_eq!(diag["winding_output"], 2);
    assert!(diag["clock_residual"].as_f64().unwrap() < 1e-12);
}

#[test]
fn sample_at_origin_is_a_guard_failure() {
    let dir = tempfile::tempdir().unwrap();
    let text = samples_json(8, |t| if t == 0.0 { (0.0, 0.0) } else { (1.0, 0.0) });
    fs::write(dir.path().join("z.json"), text).unwrap();
    let out = loopreg(&["regularize", "z.json", "--out", "r.json"], dir.path());
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("collision guard"));
    assert!(!dir.path().join("r.json").exists());
}

#[test]
fn parse_and_io_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.json"), r#"{"n": 12, "samples": []}"#).unwrap();
    assert_eq!(
        code(&loopreg(
            &["regularize", "bad.json", "--out", "r.json"],
            dir.path()
        )),
        2
    );
    assert_eq!(
        code(&loopreg(
            &["regularize", "missing.json", "--out", "r.json"],
            dir.path()
        )),
        2
    );
    fs::write(dir.path().join("junk.json"), "not json").unwrap();
    assert_eq!(
        code(&loopreg(
            &["regularize", "junk.json", "--out", "r.json"],
            dir.path()
        )),
        2
    );
    assert_eq!(
        code(&loopreg(&["--n", "48", "verify", "fd"], dir.path())),
        2
    );
    assert_eq!(
        code(&loopreg(
            &["--tol", "nonsense=1", "verify", "fd"],
            dir.path()
        )),
        2
    );
    assert_eq!(code(&loopreg(&["verify", "everything"], dir.path())), 2);
}

#[test]
fn verify_all_passes_with_controls() {
    let dir = tempfile::tempdir().unwrap();
    let out = loopreg(
        &["verify", "all", "--seed", "42", "--n", "64", "--out", "rep"],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let reports = read_json(&dir.path().join("rep/reports.json"));
    let reports = reports.as_array().unwrap();
    assert!(reports.len() >= 60);
    let controls: Vec<_> = reports
        .iter()
        .filter(|r| r["negative_control"] == true)
        .collect();
    assert!(!controls.is_empty());
    assert!(controls.iter().all(|r| r["verdict"] == "fail"));
    assert!(reports
        .iter()
        .filter(|r| r["negative_control"] == false)
        .all(|r| r["verdict"] == "pass"));

    let csv = fs::read_to_string(dir.path().join("rep/reports.csv")).unwrap();
    assert!(csv.starts_with("case,map_name,kind,level,negative_control,h,error,excluded\n"));
    assert!(csv.lines().count() > reports.len());
}

#[test]
fn verify_detects_injected_corruption() {
    let dir = tempfile::tempdir().unwrap();
    let out = loopreg(
        &["verify", "fd", "--inject-corruption", "--out", "rep"],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let reports = read_json(&dir.path().join("rep/reports.json"));
    assert!(reports
        .as_array()
        .unwrap()
        .iter()
        .all(|r| r["negative_control"] == true && r["verdict"] == "fail"));
}

#[test]
fn tightened_tolerance_makes_verification_fail() {
    // no finite-difference sweep reaches 1e-20 relative error
    let dir = tempfile::tempdir().unwrap();
    let out = loopreg(
        &["verify", "fd", "--tol", "fd_rel_tol=1e-20", "--out", "rep"],
        dir.path(),
    );
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("unexpected:"));
}

#[test]
fn verify_sc1_reports_both_level_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let out = loopreg(&["verify", "sc1", "--k", "0,1", "--out", "rep"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let reports = read_json(&dir.path().join("rep/reports.json"));
    let levels: std::collections::BTreeSet<u64> = reports
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["level"].as_u64().unwrap())
        .collect();
    assert_eq!(levels.into_iter().collect::<Vec<_>>(), vec![0, 1]);
}

#[test]
fn gallery_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&loopreg(&["gallery", "--out", "a"], dir.path())), 0);
    assert_eq!(code(&loopreg(&["gallery", "--out", "b"], dir.path())), 0);

    let manifest = read_json(&dir.path().join("a/manifest.json"));
    let entries = manifest["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 3);
    let mut names: Vec<String> = vec!["manifest.json".into(), "tz_profile.csv".into()];
    for e in entries {
        names.push(e["input"].as_str().unwrap().into());
        names.push(e["expected"].as_str().unwrap().into());
    }
    for name in names {
        let a = fs::read(dir.path().join("a").join(&name)).unwrap();
        let b = fs::read(dir.path().join("b").join(&name)).unwrap();
        assert_eq!(a, b, "{name} differs between runs");
    }
}

#[test]
fn gallery_outputs_regularize_to_expected() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&loopreg(&["gallery", "--out", "g"], dir.path())), 0);
    let manifest = read_json(&dir.path().join("g/manifest.json"));
    for e in manifest["entries"].as_array().unwrap() {
        let input = format!("g/{}", e["input"].as_str().unwrap());
        let out = loopreg(&["regularize", &input, "--out", "r.json"], dir.path());
        assert_eq!(code(&out), 0);
        let got = read_json(&dir.path().join("r.json"));
        let want = read_json(&dir.path().join("g").join(e["expected"].as_str().unwrap()));
        let (got, want) = (
            got["samples"].as_array().unwrap(),
            want["samples"].as_array().unwrap(),
        );
        assert_eq!(got.len(), want.len());
        for (x, y) in got.iter().zip(want) {
            for c in 0..2 {
                assert!((x[c].as_f64().unwrap() - y[c].as_f64().unwrap()).abs() < 1e-9);
            }
        }
    }
}
