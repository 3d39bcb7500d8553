use std::fs;
use std::process::Command;

fn tubelab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tubelab"))
}

#[test]
fn sweep_writes_reports_and_flags_override_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("sweep.ini");
    fs::write(
        &config,
        "geometry.kind = circle\nsweep.eps = 0.2, 0.1\nsweep.n_max = 2\noutput.formats = csv\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let status = tubelab()
        .args(["sweep", "--config"])
        .arg(&config)
        .args(["--eps", "0.1,0.05", "--format", "csv,json", "--workers", "2", "--out"])
        .arg(&out)
        .env("TUBELAB_WORKERS", "1")
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let mut reader = csv::Reader::from_path(out.join("sweep.csv")).unwrap();
    let eps: Vec<String> = reader.records().map(|r| r.unwrap()[1].to_string()).collect();
    assert_eq!(eps.len(), 4);
    assert!(eps[0].starts_with("1.0000000000000001e-1"));
    assert!(out.join("sweep.json").exists());
}

#[test]
fn repeated_sweeps_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |sub: &str, workers: &str| {
        let out = dir.path().join(sub);
        let o = tubelab()
            .args(["sweep", "--geometry", "ellipse:orientation=inward", "--eps", "0.1,0.05", "--n-max", "2"])
            .args(["--format", "csv", "--out"])
            .arg(&out)
            .env("TUBELAB_WORKERS", workers)
            .output()
            .unwrap();
        assert!(o.status.success());
        fs::read(out.join("sweep.csv")).unwrap()
    };
    assert_eq!(run("a", "1"), run("b", "3"));
}

#[test]
fn invalid_config_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.ini");
    fs::write(&config, "geometry.kind = circle\nsweep.eps = 0.05, 0.1\n").unwrap();
    let o = tubelab().args(["sweep", "--config"]).arg(&config).output().unwrap();
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn oracle_prints_closed_forms() {
    let o = tubelab()
        .args(["oracle", "--geometry", "segment:length=3.141592653589793", "--eps", "0.1", "--k", "1"])
        .output()
        .unwrap();
    assert!(o.status.success());
    let text = String::from_utf8_lossy(&o.stdout);
    let value: f64 = text.split_whitespace().last().unwrap().parse().unwrap();
    assert!((value - (1.0 + 25.0 * std::f64::consts::PI.powi(2))).abs() < 1e-9, "{text}");
}

#[test]
fn verify_exit_status_follows_the_criteria() {
    let ok = tubelab().args(["verify", "--only", "9"]).output().unwrap();
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stdout));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("[PASS] 9"));

    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("verify.ini");
    fs::write(&config, format!("output.dir = {}\n", dir.path().join("csv").display())).unwrap();
    let failing = tubelab()
        .args(["verify", "--only", "5,11", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    let text = String::from_utf8_lossy(&failing.stdout);
    assert!(!failing.status.success(), "{text}");
    assert!(text.contains("[FAIL] 5") && text.contains("[PASS] 11"), "{text}");
    assert!(dir.path().join("csv").join("determinism.csv").exists());
}
