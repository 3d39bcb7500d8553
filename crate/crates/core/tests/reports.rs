use std::fs;

use tubelab::harness::report::{read_json, render_csv, CSV_HEADER};
use tubelab::harness::{emit_all, emit_report, run_sweep, Config, Format, RawConfig};
use tubelab::Error;

const SMALL: &str = "\
# two eps, three eigenvalues
[geometry]
kind = ellipse
orientation = inward
[sweep]
eps = 0.1, 0.05
n_max = 3
[output]
formats = csv, json, plot
";

fn small_report() -> tubelab::harness::SweepReport {
    let config = RawConfig::parse(SMALL).unwrap().build().unwrap();
    run_sweep(&config).unwrap()
}

#[test]
fn csv_has_one_row_per_eps_and_n() {
    let report = small_report();
    let text = render_csv(&report.records);
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(reader.headers().unwrap().iter().collect::<Vec<_>>(), CSV_HEADER);
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 6);
    for row in &rows {
        let lambda: f64 = row[3].parse().unwrap();
        let leading: f64 = row[4].parse().unwrap();
        let mu: f64 = row[5].parse().unwrap();
        let residual: f64 = row[6].parse().unwrap();
        assert_eq!(residual, lambda - leading - mu);
        assert_eq!(row[8].to_string(), "true");
    }
    assert!(!rows[0][9].is_empty() && rows[1][9].is_empty());
}

#[test]
fn json_round_trip_is_bit_exact() {
    let report = small_report();
    let dir = tempfile::tempdir().unwrap();
    let written = emit_all(&report, dir.path(), &[Format::Csv, Format::Json, Format::Plot]).unwrap();
    assert_eq!(written.len(), 3);
    let back = read_json(dir.path().join("sweep.json")).unwrap();
    assert_eq!(back, report);
    for (a, b) in back.records.iter().zip(&report.records) {
        assert_eq!(a.lambda.map(f64::to_bits), b.lambda.map(f64::to_bits));
        assert_eq!(a.residual.map(f64::to_bits), b.residual.map(f64::to_bits));
    }
    let script = fs::read_to_string(dir.path().join("plot_sweep.py")).unwrap();
    assert!(script.contains("sweep.csv") && script.contains("1/eps"));
}

#[test]
fn identical_configs_give_identical_csv() {
    let a = render_csv(&small_report().records);
    let b = render_csv(&small_report().records);
    assert_eq!(a, b);
}

#[test]
fn io_errors_name_the_path() {
    let report = small_report();
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let target = blocker.join("sweep.csv");
    match emit_report(&report, Format::Csv, &target) {
        Err(Error::Io { path, .. }) => assert!(path.starts_with(&blocker)),
        other => panic!("expected an I/O error, got {other:?}"),
    }
    match Config::from_file(dir.path().join("missing.ini")) {
        Err(e @ Error::Io { .. }) => assert!(e.to_string().contains("missing.ini")),
        other => panic!("expected an I/O error, got {other:?}"),
    }
}

#[test]
fn failed_solves_are_recorded_and_the_sweep_continues() {
    // One sphere block cannot hold four eigenvalues below the next block
    // and no extra blocks are allowed. The sweep still returns every row.
    let config = RawConfig::parse(
        "geometry.kind = sphere\nsweep.eps = 0.1, 0.05\nsweep.n_max = 4\nsweep.cases = dn, neumann\nresolution.mode_cutoff = 1\nresolution.max_extra_modes = 0\n",
    )
    .unwrap()
    .build()
    .unwrap();
    let report = run_sweep(&config).unwrap();
    assert!(report.failed());
    assert_eq!(report.records.len(), 16);
    for r in &report.records {
        if r.case == "dn" {
            assert!(r.error.as_deref().unwrap().contains("cutoff"), "{:?}", r.error);
            assert!(r.lambda.is_none());
        }
    }
    let csv = render_csv(&report.records);
    assert_eq!(csv.lines().count(), 17);
}
