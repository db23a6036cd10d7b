use std::path::Path;
use std::process::Command;

fn mpsd() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mpsd"))
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn simulate_is_bit_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let args = |out: &Path| {
        vec![
            "simulate".into(),
            "--model".into(),
            "ring".into(),
            "--n".into(),
            "16".into(),
            "--seed".into(),
            "3".into(),
            "--realizations".into(),
            "2".into(),
            "--t-end".into(),
            "256".into(),
            "--dt".into(),
            "1".into(),
            "--out-dir".into(),
            out.to_str().unwrap().to_string(),
        ]
    };
    let (d1, d2) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(mpsd().args(args(&d1)).status().unwrap().success());
    assert!(mpsd().args(args(&d2)).status().unwrap().success());
    for name in ["config.txt", "periodogram.csv", "trajectory.csv", "summary.json"] {
        assert_eq!(read(&d1, name), read(&d2, name), "{name} differs between runs");
    }
}

#[test]
fn config_snapshot_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let (d1, d2) = (tmp.path().join("a"), tmp.path().join("b"));
    let status = mpsd()
        .args(["spectrum", "--model", "ring", "--n", "64", "--out-dir"])
        .arg(&d1)
        .status()
        .unwrap();
    assert!(status.success());
    // re-run purely from the snapshot
    let status = mpsd()
        .args(["spectrum", "--config"])
        .arg(d1.join("config.txt"))
        .arg("--out-dir")
        .arg(&d2)
        .status()
        .unwrap();
    assert!(status.success());
    for name in ["config.txt", "eigenstructure.csv", "psd.csv"] {
        assert_eq!(read(&d1, name), read(&d2, name), "{name} differs after round trip");
    }
}

#[test]
fn flags_override_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.cfg");
    std::fs::write(&cfg, "model = ring\nn = 64\n# comment\n").unwrap();
    let out = tmp.path().join("out");
    let status = mpsd()
        .args(["spectrum", "--config"])
        .arg(&cfg)
        .args(["--n", "32", "--out-dir"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(read(&out, "config.txt").contains("n = 32"));
    // 32 ring states -> 16 distinct positive modes (conjugate pairs merged)
    assert_eq!(read(&out, "eigenstructure.csv").lines().count(), 17);
}

#[test]
fn invalid_input_exits_2() {
    let out = mpsd().args(["spectrum", "--model", "nope"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = mpsd().args(["simulate", "--model", "ring"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "simulate without --seed must be rejected");
    let out = mpsd()
        .args(["spectrum", "--model", "ring", "--lambda", "1", "--mu", "2"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "biased ring is not reversible");
}

#[test]
fn fit_recovers_ring_exponents() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("fit");
    let status = mpsd()
        .args(["fit", "--model", "ring", "--n", "500", "--out-dir"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let report: serde_json::Value =
        serde_json::from_str(&read(&out, "fit.json")).unwrap();
    assert!((report["alpha"].as_f64().unwrap() - 2.0).abs() < 0.05);
    assert!((report["beta"].as_f64().unwrap() + 1.0).abs() < 0.05);
    assert!(report["admissible"].as_bool().unwrap());
    assert!((report["zeta_predicted"].as_f64().unwrap() + 1.5).abs() < 0.01);
    assert!(
        (report["zeta_measured"].as_f64().unwrap()
            - report["zeta_predicted"].as_f64().unwrap())
        .abs()
            < 0.1
    );
}

#[test]
fn fit_reads_synthetic_eigenstructure_file() {
    let tmp = tempfile::tempdir().unwrap();
    // alpha = 2, beta = -1/2: exact 1/f case, zeta = -1
    let mut csv = String::from("k,omega,gamma_sq\n");
    for k in 1..=1000u32 {
        let k = k as f64;
        csv.push_str(&format!("{k},{:.16e},{:.16e}\n", k * k, 1.0 / k));
    }
    let input = tmp.path().join("modes.csv");
    std::fs::write(&input, csv).unwrap();
    let out = tmp.path().join("fit");
    let status = mpsd()
        .args(["fit", "--input"])
        .arg(&input)
        .arg("--out-dir")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let report: serde_json::Value =
        serde_json::from_str(&read(&out, "fit.json")).unwrap();
    assert!((report["alpha"].as_f64().unwrap() - 2.0).abs() < 1e-9);
    assert!((report["beta"].as_f64().unwrap() + 0.5).abs() < 1e-9);
    assert!((report["zeta_predicted"].as_f64().unwrap() + 1.0).abs() < 1e-9);
}
