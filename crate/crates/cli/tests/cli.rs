use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use kxp_core::io;
use kxp_core::model::validate_execution;
use serde_json::Value;
use tempfile::TempDir;

fn kxp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kxp")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().expect("utf-8 path")
}

/// Generates a small GridWorld execution of length `k` into `dir`.
fn generate(dir: &Path, k: usize) {
    let o = kxp(&["gen-exec", "--env", "gridworld-small", "--k", &k.to_string(), "--seed", "3", "--out", p(dir)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

fn explain(dir: &Path, exec: &str, methods: &str, out: &Path) -> Output {
    kxp(&[
        "explain",
        "--system",
        p(&dir.join("system.json")),
        "--network",
        p(&dir.join("network.json")),
        "--exec",
        p(&dir.join(exec)),
        "--methods",
        methods,
        "--out",
        p(out),
    ])
}

fn validate(dir: &Path, exec: &str, mask: &Path, catalog: Option<&Path>) -> Output {
    let (sys, net, ex) = (dir.join("system.json"), dir.join("network.json"), dir.join(exec));
    let mut args = vec!["validate", "--system", p(&sys), "--network", p(&net), "--exec", p(&ex), "--mask", p(mask)];
    if let Some(c) = catalog {
        args.extend(["--catalog", p(c)]);
    }
    kxp(&args)
}

fn read(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn gen_exec_writes_every_prefix() {
    let dir = TempDir::new().unwrap();
    generate(dir.path(), 4);
    let sys = io::load_system(&dir.path().join("system.json")).unwrap();
    let net = io::load_network(&dir.path().join("network.json")).unwrap();
    let execs: Vec<_> =
        (1..=4).map(|k| io::load_execution(&dir.path().join(format!("exec-k{k}.json"))).unwrap()).collect();
    assert!(!dir.path().join("exec-k5.json").exists());
    for (i, e) in execs.iter().enumerate() {
        assert_eq!(e.len(), i + 1);
        validate_execution(&sys, &net, e).unwrap();
        if i + 1 < execs.len() {
            assert_eq!(&execs[i + 1].prefix(i + 1), e);
        }
    }

    let one = TempDir::new().unwrap();
    generate(one.path(), 1);
    let files: Vec<_> = fs::read_dir(one.path())
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().starts_with("exec-"))
        .collect();
    assert_eq!(files.len(), 1);
}

#[test]
fn rationals_are_written_as_strings() {
    let dir = TempDir::new().unwrap();
    generate(dir.path(), 1);
    let exec = read(&dir.path().join("exec-k1.json"));
    assert!(exec["states"][0].as_array().unwrap().iter().all(Value::is_string));
    let net = read(&dir.path().join("network.json"));
    assert!(net["layers"][0]["bias"].as_array().unwrap().iter().all(Value::is_string));
}

#[test]
fn explain_is_deterministic_and_ordered() {
    let dir = TempDir::new().unwrap();
    generate(dir.path(), 2);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(code(&explain(dir.path(), "exec-k2.json", "2,3,4", &a)), 0);
    assert_eq!(code(&explain(dir.path(), "exec-k2.json", "2,3,4", &b)), 0);
    let mut sizes = Vec::new();
    for name in ["exec-k2.m2.minimal.json", "exec-k2.m3.minimal.json", "exec-k2.m4.minimum.json"] {
        let (ra, rb) = (read(&a.join(name)), read(&b.join(name)));
        assert_eq!(ra["mask"], rb["mask"]);
        assert_eq!(ra["queries"], rb["queries"]);
        sizes.push(ra["size"].as_u64().unwrap());
    }
    assert!(sizes[2] <= sizes[1] && sizes[1] <= sizes[0], "{sizes:?}");
    assert_eq!(read(&a.join("exec-k2.m2.minimal.json"))["guarantee"], "none");
    assert_eq!(read(&a.join("exec-k2.m4.minimum.json"))["guarantee"], "minimum");
}

#[test]
fn validate_verdicts() {
    let dir = TempDir::new().unwrap();
    generate(dir.path(), 2);
    let full = dir.path().join("full.json");
    fs::write(&full, r#"{"role":"explanation","steps":[[0,1,2,3,4,5,6,7],[0,1,2,3,4,5,6,7]]}"#).unwrap();
    let o = validate(dir.path(), "exec-k2.json", &full, None);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("valid"));

    let empty = dir.path().join("empty.json");
    fs::write(&empty, r#"{"role":"explanation","steps":[[],[]]}"#).unwrap();
    let o = validate(dir.path(), "exec-k2.json", &empty, None);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("witness"));

    let out = dir.path().join("res");
    assert_eq!(code(&explain(dir.path(), "exec-k2.json", "4", &out)), 0);
    let result = out.join("exec-k2.m4.minimum.json");
    let catalog = out.join("exec-k2.m4.catalog.json");
    assert_eq!(code(&validate(dir.path(), "exec-k2.json", &result, Some(&catalog))), 0);
    assert_eq!(code(&validate(dir.path(), "exec-k2.json", &result, None)), 0);
    assert_eq!(code(&validate(dir.path(), "exec-k2.json", &empty, Some(&catalog))), 1);
}

#[test]
fn plot_single_result() {
    let dir = TempDir::new().unwrap();
    generate(dir.path(), 1);
    let out = dir.path().join("res");
    assert_eq!(code(&explain(dir.path(), "exec-k1.json", "3", &out)), 0);
    let o = kxp(&["plot", "--results", p(&out)]);
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(out.join("solved.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(fs::read_to_string(out.join("solved.svg")).unwrap().contains("<circle"));
    assert!(out.join("sizes.svg").exists() && out.join("sizes.csv").exists());
}

#[test]
fn plot_curves_are_monotone() {
    let dir = TempDir::new().unwrap();
    generate(dir.path(), 2);
    let out = dir.path().join("res");
    for exec in ["exec-k1.json", "exec-k2.json"] {
        assert_eq!(code(&explain(dir.path(), exec, "2,3", &out)), 0);
    }
    assert_eq!(code(&kxp(&["plot", "--results", p(&out)])), 0);
    let csv = fs::read_to_string(out.join("solved.csv")).unwrap();
    let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 4);
    for m in ["2", "3"] {
        let ys: Vec<u64> = rows.iter().filter(|r| r[0] == m).map(|r| r[3].parse().unwrap()).collect();
        let xs: Vec<f64> = rows.iter().filter(|r| r[0] == m).map(|r| r[2].parse().unwrap()).collect();
        assert!(ys.windows(2).all(|w| w[0] <= w[1]) && xs.windows(2).all(|w| w[0] <= w[1]));
    }
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    generate(dir.path(), 2);
    let out = dir.path().join("res");
    let missing = dir.path().join("missing.json");
    let o = kxp(&["explain", "--system", p(&missing), "--network", p(&missing), "--exec", p(&missing)]);
    assert_eq!(code(&o), 2);
    assert_eq!(code(&explain(dir.path(), "exec-k2.json", "7", &out)), 2);

    let o = kxp(&[
        "explain",
        "--system",
        p(&dir.path().join("system.json")),
        "--network",
        p(&dir.path().join("network.json")),
        "--exec",
        p(&dir.path().join("exec-k2.json")),
        "--methods",
        "4",
        "--timeout-per-step",
        "0.000001",
        "--out",
        p(&out),
    ]);
    assert_eq!(code(&o), 3);
    let record = read(&out.join("exec-k2.m4.minimum.json"));
    assert_eq!(record["solved"], false);

    let o = kxp(&["gen-exec", "--env", "turtlebot", "--k", "40", "--out", p(&dir.path().join("tb"))]);
    assert_eq!(code(&o), 4);

    let empty = dir.path().join("nothing");
    fs::create_dir_all(&empty).unwrap();
    assert_eq!(code(&kxp(&["plot", "--results", p(&empty)])), 2);
}

#[test]
fn bench_writes_summary() {
    let dir = TempDir::new().unwrap();
    let o = kxp(&["bench", "--k-max", "2", "--count", "1", "--methods", "2,3", "--out", p(dir.path())]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + 4);
    assert_eq!(fs::read_dir(dir.path().join("results")).unwrap().count(), 4);
}
