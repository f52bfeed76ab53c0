use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gisk_cli::io::*;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

struct Fixture {
    dir: tempfile::TempDir,
}

impl Fixture {
    fn new() -> Self {
        Fixture {
            dir: tempfile::tempdir().unwrap(),
        }
    }

    fn file(&self, name: &str, body: &str) -> PathBuf {
        let p = self.dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        p
    }
}

fn gisk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gisk"))
        .args(args)
        .env_remove("GISK_SEED")
        .output()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

/// Parse into the typed schema, print, and parse again: text and value are fixed points.
fn fixpoint<T: Serialize + DeserializeOwned + PartialEq + std::fmt::Debug>(out: &Output) -> T {
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let first: T = serde_json::from_str(&text).unwrap();
    let printed = serde_json::to_string_pretty(&first).unwrap();
    assert_eq!(printed, text.trim_end());
    let second: T = serde_json::from_str(&printed).unwrap();
    assert_eq!(first, second);
    first
}

#[test]
fn check_exit_codes_and_strata() {
    let fx = Fixture::new();
    let out = gisk(&["check", s(&fx.file("a.json", r#"{"n":3,"d":[1,2]}"#))]);
    assert_eq!(out.status.code(), Some(0));
    let v = fixpoint::<CheckOutput>(&out);
    assert_eq!(v.certificate.roots.unwrap().x, vec![1.0, 2.0]);
    assert_eq!(v.certificate.strata.unwrap().dimension, 2);

    let out = gisk(&["check", s(&fx.file("cy.json", r#"{"n":3,"d":[0,8]}"#))]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["certificate"]["strata"]["dimension"], 1);

    let out = gisk(&["check", s(&fx.file("u.json", r#"{"n":3,"d":[-1,0]}"#))]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["certificate"]["status"], "unstable");

    for bad in [r#"{"n":3,"d":[1]}"#, r#"{"n":3}"#, r#"{"n":3,"d":[1,2],"c":[0,1,2]}"#, "not json"] {
        let out = gisk(&["check", s(&fx.file("bad.json", bad))]);
        assert_eq!(out.status.code(), Some(2), "{bad}");
    }
    assert_eq!(gisk(&["check", "/nonexistent/file.json"]).status.code(), Some(2));
    assert_eq!(gisk(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn full_format_is_reduced_with_shift() {
    let fx = Fixture::new();
    let out = gisk(&["check", s(&fx.file("f.json", r#"{"n":3,"c":[1,0,0]}"#))]);
    let v = fixpoint::<CheckOutput>(&out);
    assert_eq!(v.input.format, InputFormat::Full);
    assert_eq!(v.input.shift, Some(1.0));
    assert_eq!(v.input.coeffs.d, vec![1.0, 2.0]);

    let out = gisk(&["reduce", s(&fx.file("f.json", r#"{"n":3,"c":[1,0,0]}"#))]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(fixpoint::<ReduceOutput>(&out).reduction.reduced.d, vec![1.0, 2.0]);
}

#[test]
fn phi_psi_round_trip() {
    let fx = Fixture::new();
    let out = gisk(&["phi", "--roundtrip", s(&fx.file("a.json", r#"{"n":4,"d":[1,0.5,3]}"#))]);
    assert_eq!(out.status.code(), Some(0));
    let v = fixpoint::<PhiOutput>(&out);
    assert!(v.roundtrip_error.unwrap() < 1e-12);

    let out = gisk(&["psi", "--roundtrip", s(&fx.file("r.json", r#"{"n":3,"x":[1,2]}"#))]);
    let v = fixpoint::<PsiOutput>(&out);
    assert_eq!(v.coeffs.d, vec![1.0, 2.0]);
    assert!(v.roundtrip_error.unwrap() < 1e-12);

    let out = gisk(&["psi", s(&fx.file("r.json", r#"{"n":3,"x":[2,1]}"#))]);
    assert_eq!(out.status.code(), Some(1));
    let out = gisk(&["phi", s(&fx.file("u.json", r#"{"n":3,"d":[-1,0]}"#))]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn tee_polyhedron_dominance() {
    let fx = Fixture::new();
    let a = fx.file("a.json", r#"{"n":3,"d":[1,2]}"#);
    let c = fx.file("c.json", r#"{"n":3,"d":[0.5,2]}"#);
    let out = gisk(&["tee", s(&a)]);
    assert_eq!(fixpoint::<TeeOutput>(&out).tee.as_f64(), 4.0);
    let out = gisk(&["tee", s(&fx.file("cy.json", r#"{"n":3,"d":[0,8]}"#))]);
    assert_eq!(json(&out)["tee"], "inf");
    fixpoint::<TeeOutput>(&out);

    let out = gisk(&["polyhedron", "--c", s(&c), "--d", s(&a)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(fixpoint::<PolyhedronOutput>(&out).inside);
    assert_eq!(gisk(&["polyhedron", "--c", s(&a), "--d", s(&a)]).status.code(), Some(0));
    let far = fx.file("far.json", r#"{"n":3,"d":[3,20]}"#);
    assert_eq!(gisk(&["polyhedron", "--c", s(&far), "--d", s(&a)]).status.code(), Some(1));

    let out = gisk(&["dominance", "--c", s(&c), "--d", s(&a)]);
    assert_eq!(out.status.code(), Some(0));
    let v = fixpoint::<DominanceOutput>(&out);
    assert!(v.verdict.dominates && v.root_dominates);
}

#[test]
fn dhym_expansion_and_scan() {
    let out = gisk(&["dhym", "--n", "3", "--theta", "0.7"]);
    assert_eq!(out.status.code(), Some(0));
    let v = fixpoint::<DhymOutput>(&out);
    assert!((v.full.c[0] - 0.7f64.tan()).abs() < 1e-12);

    let out = gisk(&["dhym", "--n", "3", "--theta", "1.5707963267948966"]);
    assert_eq!(out.status.code(), Some(1));

    let out = gisk(&["dhym", "--n", "4", "--scan", "30"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(fixpoint::<ScanOutput>(&out).scan.stable_window.is_some());
    assert_eq!(gisk(&["dhym", "--n", "3"]).status.code(), Some(2));
}

#[test]
fn path_commands() {
    let fx = Fixture::new();
    let m = fx.file("m.json", r#"{"n":3,"mu":[3,3,3],"d0":[{"v":18,"w":1}]}"#);
    let d = fx.file("d.json", r#"{"n":3,"d":[1,18]}"#);
    let csv = fx.dir.path().join("path.csv");
    let out = gisk(&["path", "--model", s(&m), "--coeffs", s(&d), "--csv", s(&csv)]);
    assert_eq!(out.status.code(), Some(0));
    let report = fixpoint::<PathOutput>(&out);
    assert!(report.all_pass);
    assert_eq!(report.samples.len(), 101);
    let table = std::fs::read_to_string(&csv).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next().unwrap(), "t,z,d1,d0,x1,x0,topological,diagonal_at_x1,claim");
    assert_eq!(lines.count(), 101);

    let out = gisk(&["path", "--model", s(&m), "--coeffs", s(&d), "--which", "p42", "--grid", "11"]);
    assert_eq!(out.status.code(), Some(0));

    let bad = fx.file("d17.json", r#"{"n":3,"d":[1,17]}"#);
    let out = gisk(&["path", "--model", s(&m), "--coeffs", s(&bad)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("residual 1"));

    let out = gisk(&["path", "--model", s(&m), "--coeffs", s(&d), "--grid", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn figures_output() {
    let out = gisk(&["figures", "--which", "map21", "--points", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("series,x1,x0,c1,c0\n"));
    assert_eq!(text.lines().count(), 1 + 5 * 11);

    let out = gisk(&["figures", "--which", "path41", "--format", "json"]);
    let fig: gisk_core::figures::FigureData = fixpoint(&out);
    assert_eq!(fig.columns, vec!["t", "c2", "c1"]);

    assert_eq!(gisk(&["figures", "--which", "map21", "--n", "4"]).status.code(), Some(2));
    assert_eq!(gisk(&["figures", "--which", "path41", "--n", "3"]).status.code(), Some(2));
}

const SMALL: [&str; 6] = ["--samples", "20", "--draws", "2", "--dims", "3,4"];

#[test]
fn verify_is_deterministic() {
    let run = |extra: &[&str]| {
        let mut args = vec!["verify", "--suite", "levelset", "--seed", "9"];
        args.extend_from_slice(&SMALL);
        args.extend_from_slice(extra);
        gisk(&args)
    };
    let a = run(&[]);
    let b = run(&["--jobs", "3"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v = fixpoint::<VerifyOutput>(&a);
    assert!(v.passed && v.suites[0].cases_run == 80);

    let single = run(&["--case", "17"]);
    assert_eq!(json(&single)["suites"][0]["cases_run"], 1);
}

#[test]
fn verify_usage_errors() {
    assert_eq!(gisk(&["verify", "--samples", "0"]).status.code(), Some(2));
    assert_eq!(gisk(&["verify", "--suite", "nope"]).status.code(), Some(2));
    assert_eq!(gisk(&["verify", "--case", "3"]).status.code(), Some(2));
    assert_eq!(gisk(&["verify", "--dims", "1"]).status.code(), Some(2));
}

#[test]
fn seed_comes_from_environment() {
    let mut args = vec!["verify", "--suite", "hadamard"];
    args.extend_from_slice(&SMALL);
    let out = Command::new(env!("CARGO_BIN_EXE_gisk")).args(&args).env("GISK_SEED", "123").output().unwrap();
    assert_eq!(json(&out)["suites"][0]["master_seed"], 123);
}

#[test]
fn levelset_points() {
    let fx = Fixture::new();
    let a = fx.file("a.json", r#"{"n":3,"d":[1,2]}"#);
    let out = gisk(&["levelset", s(&a), "--count", "4", "--seed", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let v = fixpoint::<LevelSetOutput>(&out);
    assert_eq!(v.points.len(), 4);
    assert_eq!(gisk(&["levelset", s(&a), "--count", "4", "--seed", "5"]).stdout, out.stdout);
    let out = gisk(&["levelset", s(&a), "--count", "2", "--format", "csv"]);
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("lambda1,lambda2,lambda3\n"));
    let u = fx.file("u.json", r#"{"n":3,"d":[-1,0]}"#);
    assert_eq!(gisk(&["levelset", s(&u)]).status.code(), Some(1));
}
