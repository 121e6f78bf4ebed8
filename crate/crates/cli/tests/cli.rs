use std::path::Path;
use std::process::{Command, Output};

fn rpw(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rpw"))
        .args(args)
        .current_dir(dir)
        .env_remove("RPW_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn k1_prints_density_and_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = rpw(dir.path(), &["k1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let k1 = summary["k1"].as_f64().unwrap();
    assert!((k1 - 1.0 / (2.0 * 3f64.sqrt() * std::f64::consts::PI)).abs() < 1e-15);
    let text = std::fs::read_to_string(dir.path().join("k1.csv")).unwrap();
    assert!(text.starts_with("# command=k1\n"));
    assert!(text.lines().any(|l| l.starts_with("# version=")));
    assert!(!text.contains("# seed="));
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_rpw"))
        .args(["k1", "--format", "json"])
        .current_dir(dir.path())
        .env("RPW_OUT_DIR", dir.path().join("artifacts"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("artifacts/k1.json")).unwrap()).unwrap();
    assert_eq!(doc["meta"]["command"], "k1");
    assert!(doc["data"].is_object());
}

#[test]
fn negative_separation_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = rpw(dir.path(), &["k2", "--r", "-1", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("r"), "{}", stderr(&o));
    assert!(std::fs::read_dir(dir.path()).unwrap().next().is_none());
}

#[test]
fn stochastic_commands_require_a_seed() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["k2", "--r", "0.5"][..],
        &["mc-moments", "--rho", "0.5"],
        &["sample-field"],
    ] {
        let o = rpw(dir.path(), args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(stderr(&o).contains("--seed"), "{}", stderr(&o));
    }
}

#[test]
fn unknown_flag_and_bad_threads() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(rpw(dir.path(), &["k1", "--bogus"]).status.code(), Some(2));
    assert_eq!(rpw(dir.path(), &["nonsense"]).status.code(), Some(2));
    assert_eq!(rpw(dir.path(), &["k1", "--threads", "0"]).status.code(), Some(2));
    assert_eq!(
        rpw(dir.path(), &["k2-typed", "--r", "0.5", "--pair", "odd", "--seed", "1"]).status.code(),
        Some(2)
    );
    assert_eq!(rpw(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn k2_csv_header_and_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("k2.csv");
    let o = rpw(
        dir.path(),
        &["k2", "--r", "0.5", "--samples", "20000", "--seed", "7", "--out", out.to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = std::fs::read_to_string(&out).unwrap();
    let header: Vec<&str> = text.lines().filter(|l| l.starts_with('#')).collect();
    for key in ["# command=k2", "# r=0.5", "# samples=20000", "# seed=7", "# tool=rpw"] {
        assert!(header.contains(&key), "missing {key} in {header:?}");
    }
    let mut sorted = header.clone();
    sorted.sort();
    assert_eq!(header, sorted);
    let table: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert!(table.len() >= 2);
    assert_eq!(table[0], "r,k2,se,samples,type_pair");
    assert!(table[1].starts_with("0.5,") && table[1].ends_with(",20000,all"), "{}", table[1]);
}

#[test]
fn same_seed_same_bytes_different_seed_different_values() {
    let dir = tempfile::tempdir().unwrap();
    let run = |seed: &str, name: &str| {
        let out = dir.path().join(name);
        let o = rpw(
            dir.path(),
            &[
                "find-critical", "--rho", "3", "--seed", seed, "--format", "json", "--out",
                out.to_str().unwrap(),
            ],
        );
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        std::fs::read(out).unwrap()
    };
    let a = run("5", "a.json");
    assert_eq!(a, run("5", "b.json"));
    assert_ne!(a, run("6", "c.json"));
}
