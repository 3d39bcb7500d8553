//! CSV, JSON and plot-script output.

use std::fs;
use std::path::{Path, PathBuf};

use super::config::Format;
use super::sweep::{SweepRecord, SweepReport};
use crate::{Error, Result};

pub const CSV_HEADER: [&str; 12] = [
    "case",
    "eps",
    "n",
    "lambda",
    "leading",
    "mu",
    "residual",
    "nu",
    "sandwich_ok",
    "orth_fraction",
    "err_lambda",
    "err_mu",
];

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn csv_row(r: &SweepRecord) -> [String; 12] {
    [
        r.case.clone(),
        num(r.eps),
        r.n.to_string(),
        opt(r.lambda),
        opt(r.leading),
        opt(r.mu),
        opt(r.residual),
        opt(r.nu),
        r.sandwich_ok.map(|b| b.to_string()).unwrap_or_default(),
        opt(r.orth_fraction),
        opt(r.err_lambda),
        opt(r.err_mu),
    ]
}

/// Records as CSV text, 17 significant digits, empty cells for missing
/// values.
pub fn render_csv(records: &[SweepRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    // Writing to a Vec cannot fail.
    w.write_record(CSV_HEADER).expect("in-memory write");
    for r in records {
        w.write_record(csv_row(r)).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

pub fn render_json(report: &SweepReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(report)?)
}

pub fn read_json(path: impl AsRef<Path>) -> Result<SweepReport> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Python script plotting `r_n` against `1/ε` and `ε μ_1` against `inf κ`
/// from the CSV next to it.
pub fn render_plot_script(report: &SweepReport, csv_name: &str) -> String {
    format!(
        r#"#!/usr/bin/env python3
# geometry: {geometry}
# config hash: {hash}
import csv
import os
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
rows = list(csv.DictReader(open(os.path.join(here, "{csv_name}"))))
inf_kappa = {inf_kappa:?}

fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4))
series = {{}}
for r in rows:
    if r["residual"]:
        series.setdefault((r["case"], int(r["n"])), []).append((1.0 / float(r["eps"]), float(r["residual"])))
for (case, n), pts in sorted(series.items()):
    pts.sort()
    ax1.plot([p[0] for p in pts], [p[1] for p in pts], "o-", label=f"{{case}} n={{n}}")
ax1.set_xlabel("1/eps")
ax1.set_ylabel("residual r_n")
ax1.legend(fontsize="small")

ground = sorted((float(r["eps"]), float(r["eps"]) * float(r["mu"]))
                for r in rows if r["n"] == "1" and r["mu"] and r["case"] in ("dn", "effective"))
if ground:
    ax2.plot([g[0] for g in ground], [g[1] for g in ground], "o-", label="eps * mu_1")
ax2.axhline(inf_kappa, color="k", ls="--", label="inf kappa")
ax2.set_xscale("log")
ax2.set_xlabel("eps")
ax2.legend(fontsize="small")

fig.tight_layout()
fig.savefig(os.path.join(here, "sweep.png"), dpi=150)
"#,
        geometry = report.geometry,
        hash = report.provenance.config_hash,
        inf_kappa = report.extrema.inf_kappa,
    )
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Writes one format to `path`.
pub fn emit_report(report: &SweepReport, format: Format, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = match format {
        Format::Csv => render_csv(&report.records),
        Format::Json => render_json(report)?,
        Format::Plot => render_plot_script(report, "sweep.csv"),
    };
    write(path, &text)
}

/// Writes `sweep.csv`, `sweep.json` and `plot_sweep.py` as requested.
/// The plot script always comes with its CSV.
pub fn emit_all(report: &SweepReport, dir: impl AsRef<Path>, formats: &[Format]) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    let mut written = Vec::new();
    let wants = |f| formats.contains(&f);
    if wants(Format::Csv) || wants(Format::Plot) {
        let p = dir.join("sweep.csv");
        emit_report(report, Format::Csv, &p)?;
        written.push(p);
    }
    if wants(Format::Json) {
        let p = dir.join("sweep.json");
        emit_report(report, Format::Json, &p)?;
        written.push(p);
    }
    if wants(Format::Plot) {
        let p = dir.join("plot_sweep.py");
        emit_report(report, Format::Plot, &p)?;
        written.push(p);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_report_is_header_only() {
        let text = render_csv(&[]);
        assert_eq!(text, format!("{}\n", CSV_HEADER.join(",")));
    }

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(num(0.1).parse::<f64>().unwrap(), 0.1);
    }
}
