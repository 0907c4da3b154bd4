use std::path::Path;
use std::process::{Command, Output};

fn bin(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bethe-pt"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn verify_passes_and_writes_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(
        &["verify", "--branching", "3,2,4", "--gamma0", "0.2", "--gammaN", "0.7"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["verify_report.json", "oracle.csv", "spectrum.svg", "manifest.json"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let m = manifest(dir.path());
    assert_eq!(m["passed"], true);
    assert!(m["outputs"].as_array().unwrap().len() >= 3);
}

#[test]
fn failed_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin(
        &[
            "verify",
            "--branching",
            "2,3",
            "--gamma0",
            "0.6",
            "--tol-residual",
            "1e-300",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(manifest(dir.path())["passed"], false);
}

#[test]
fn bad_input_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let zero = bin(&["verify", "--branching", "2,0", "--gamma0", "0.5"], dir.path());
    assert_eq!(zero.status.code(), Some(2));
    let unknown = bin(&["frobnicate"], dir.path());
    assert_eq!(unknown.status.code(), Some(2));
    let config = dir.path().join("bad.toml");
    std::fs::write(&config, "branchng = [2]\n").unwrap();
    let o = bin(&["verify", "--config", config.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.json");
    std::fs::write(
        &config,
        r#"{"N": 3, "branching": [2], "gamma0": 0.4, "seed": 7, "plot": false}"#,
    )
    .unwrap();
    let out = dir.path().join("run");
    let o = bin(&["spectrum", "--config", config.to_str().unwrap()], &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!out.join("spectrum.svg").exists());
    assert_eq!(manifest(&out)["seed"], 7);

    let o = bin(
        &[
            "spectrum",
            "--config",
            config.to_str().unwrap(),
            "--seed",
            "9",
            "--plot",
        ],
        &out,
    );
    assert_eq!(o.status.code(), Some(0));
    assert!(out.join("spectrum.svg").exists());
    assert_eq!(manifest(&out)["seed"], 9);
}

#[test]
fn ensemble_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        let o = bin(
            &[
                "random-ensemble",
                "--N",
                "5",
                "--samples",
                "6",
                "--delta",
                "0.05,0.1",
                "--seed",
                seed,
                "--no-plot",
            ],
            &out,
        );
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        (
            std::fs::read(out.join("samples.csv")).unwrap(),
            std::fs::read(out.join("aggregates.csv")).unwrap(),
        )
    };
    let a = run("a", "11");
    assert_eq!(a, run("b", "11"));
    assert_ne!(a.0, run("c", "12").0);
}

#[test]
fn sweeps_and_scattering_run() {
    let dir = tempfile::tempdir().unwrap();
    for (args, file) in [
        (vec!["chain", "--N", "4", "--points", "40"], "roots.csv"),
        (vec!["current", "--N", "3", "--points", "40"], "current_sweep.csv"),
        (vec!["scatter", "--gamma", "0.5,1.2", "--points", "51"], "scatter.csv"),
    ] {
        let out = dir.path().join(args[0]);
        let o = bin(&args, &out);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        assert!(out.join(file).exists());
    }
}
