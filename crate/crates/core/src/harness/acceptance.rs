//! The acceptance suite, shared by the `acceptance` test target and the
//! `verify` command. Sweeps are cached per configuration so criteria that
//! reuse a sweep do not recompute it.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, OnceLock};
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::checks::{localization_ratios, neumann_convergence, residual_trend, strong_coupling_check};
use super::config::RawConfig;
use super::report::render_csv;
use super::sweep::{run_sweep, SweepReport};
use crate::assembly::{assemble_tube, Resolution, TubeCase};
use crate::eigensolve::{dense_reference, smallest_eigenpairs, SolverOptions};
use crate::geometry::{Geometry, Orientation};
use crate::oracles::{rectangle_spectrum, shell_block_spectrum, tube_oracle, DEFAULT_RADIAL_RESOLUTION};
use crate::sparse::CsrMatrix;

#[derive(Clone, Debug)]
pub struct Outcome {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub wall_time_s: f64,
}

impl Outcome {
    pub fn line(&self) -> String {
        format!(
            "[{}] {} {}: {} ({:.1}s)",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.detail,
            self.wall_time_s
        )
    }
}

pub const CRITERIA: [(u32, &str); 11] = [
    (1, "flat-exactness"),
    (2, "oracle-2d"),
    (3, "oracle-3d"),
    (4, "residual-trend"),
    (5, "strong-coupling"),
    (6, "sandwich"),
    (7, "dirichlet-case"),
    (8, "neumann-case"),
    (9, "eigensolver-equivalence"),
    (10, "transverse-localization"),
    (11, "determinism"),
];

/// Settings that do not change any computed value.
#[derive(Clone, Debug, Default)]
pub struct VerifyOptions {
    pub workers: Option<usize>,
    /// Where each sweep's CSV is written, if anywhere.
    pub out_dir: Option<PathBuf>,
}

impl VerifyOptions {
    pub fn from_config(path: impl AsRef<Path>) -> crate::Result<Self> {
        let c = RawConfig::load(path)?.build()?;
        Ok(VerifyOptions {
            workers: c.workers,
            out_dir: Some(c.out_dir),
        })
    }
}

type Cached = Arc<OnceLock<Result<Arc<SweepReport>, String>>>;

fn cache() -> &'static Mutex<HashMap<String, Cached>> {
    static CACHE: OnceLock<Mutex<HashMap<String, Cached>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

fn configure(text: &str, opts: &VerifyOptions) -> crate::Result<super::config::Config> {
    let mut raw = RawConfig::parse(text)?;
    if let Some(w) = opts.workers {
        raw.set("run.workers", &w.to_string())?;
    }
    raw.build()
}

/// Runs the sweep for `text` once per process.
fn sweep(name: &str, text: &str, opts: &VerifyOptions) -> Result<Arc<SweepReport>, String> {
    let slot = cache()
        .lock()
        .unwrap_or_else(|p| p.into_inner())
        .entry(text.to_string())
        .or_default()
        .clone();
    let report = slot
        .get_or_init(|| {
            let config = configure(text, opts).map_err(|e| e.to_string())?;
            run_sweep(&config).map(Arc::new).map_err(|e| e.to_string())
        })
        .clone()?;
    if let Some(dir) = &opts.out_dir {
        let path = dir.join(format!("{name}.csv"));
        std::fs::create_dir_all(dir)
            .and_then(|_| std::fs::write(&path, render_csv(&report.records)))
            .map_err(|e| format!("{}: {e}", path.display()))?;
    }
    if report.failed() {
        let first = report
            .records
            .iter()
            .find_map(|r| r.error.clone())
            .unwrap_or_default();
        return Err(format!("{name}: sweep had failed solves: {first}"));
    }
    Ok(report)
}

const SEGMENT_DN: &str = "geometry.kind = segment\ngeometry.length = 3.141592653589793\nsweep.eps = 0.1, 0.05\nsweep.n_max = 5\n";
const CIRCLE_OUT: &str = "geometry.kind = circle\ngeometry.orientation = outward\nsweep.eps = 0.1, 0.05\nsweep.n_max = 5\n";
const CIRCLE_IN: &str = "geometry.kind = circle\ngeometry.orientation = inward\nsweep.eps = 0.1, 0.05\nsweep.n_max = 5\n";
const SPHERE_OUT: &str = "geometry.kind = sphere\ngeometry.orientation = outward\nsweep.eps = 0.1\nsweep.n_max = 25\n";
const CIRCLE_TREND: &str = "geometry.kind = circle\ngeometry.orientation = outward\nsweep.eps = 0.2, 0.1, 0.05, 0.025\nsweep.n_max = 3\n";
const ELLIPSE_TREND: &str = "geometry.kind = ellipse\ngeometry.a = 1\ngeometry.b = 0.5\ngeometry.orientation = inward\nsweep.eps = 0.2, 0.1, 0.05, 0.025\nsweep.n_max = 3\n";
const ELLIPSE_COUPLING: &str = "geometry.kind = ellipse\ngeometry.a = 1\ngeometry.b = 0.5\ngeometry.orientation = inward\nsweep.cases = effective\nsweep.eps = 0.2, 0.1, 0.05, 0.025, 0.0125\nsweep.n_max = 1\n";
const CIRCLE_DIRICHLET: &str = "geometry.kind = circle\ngeometry.orientation = outward\nsweep.cases = dirichlet\nsweep.eps = 0.2, 0.1, 0.05, 0.025\nsweep.n_max = 3\n";
const SEGMENT_NEUMANN: &str = "geometry.kind = segment\ngeometry.length = 3.141592653589793\nsweep.cases = neumann\nsweep.eps = 0.2, 0.1, 0.05, 0.025\nsweep.n_max = 5\n";
const CIRCLE_NEUMANN: &str = "geometry.kind = circle\ngeometry.orientation = outward\nsweep.cases = neumann\nsweep.eps = 0.2, 0.1, 0.05, 0.025\nsweep.n_max = 5\n";
const DETERMINISM: &str = "geometry.kind = ellipse\ngeometry.orientation = inward\nsweep.cases = dn, effective\nsweep.eps = 0.1, 0.05\nsweep.n_max = 3\n";

fn timed(id: u32, body: impl FnOnce() -> Result<(bool, String), String>) -> Outcome {
    let name = CRITERIA[(id - 1) as usize].1;
    let start = Instant::now();
    let (passed, detail) = body().unwrap_or_else(|e| (false, format!("error: {e}")));
    Outcome {
        id,
        name,
        passed,
        detail,
        wall_time_s: start.elapsed().as_secs_f64(),
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Segment(π), DN, ε ∈ {0.1, 0.05}: `λ_n` within 1e-3 of
/// `(π/2ε)² + n²` and `r_n` within 1e-3 of zero, in under 10 s.
pub fn flat_exactness(opts: &VerifyOptions) -> Outcome {
    timed(1, || {
        let report = sweep("flat_exactness", SEGMENT_DN, opts)?;
        let mut worst_lambda: f64 = 0.0;
        let mut worst_residual: f64 = 0.0;
        for &eps in &[0.1, 0.05] {
            let exact = rectangle_spectrum(PI, eps, TubeCase::DirichletNeumann, 5);
            for n in 1..=5 {
                let r = report.record("dn", eps, n).ok_or("missing record")?;
                let l = r.lambda.ok_or("missing lambda")?;
                worst_lambda = worst_lambda.max((l - exact.eigenvalues[n - 1]).abs());
                worst_residual = worst_residual.max(r.residual.ok_or("missing residual")?.abs());
            }
        }
        let t = report.provenance.wall_time_s;
        let passed = worst_lambda <= 1e-3 && worst_residual <= 1e-3 && t < 10.0;
        Ok((
            passed,
            format!("max |λ-exact| = {worst_lambda:.2e}, max |r| = {worst_residual:.2e} (≤ 1e-3), sweep {t:.1}s (< 10s)"),
        ))
    })
}

/// Circle(1), both orientations, ε ∈ {0.1, 0.05}, n ≤ 5, against the
/// radial oracle to 1e-4 relative, in under 60 s.
pub fn oracle_2d(opts: &VerifyOptions) -> Outcome {
    timed(2, || {
        let mut worst: f64 = 0.0;
        let mut time = 0.0;
        for (name, text, orientation) in [
            ("oracle_2d_outward", CIRCLE_OUT, Orientation::Outward),
            ("oracle_2d_inward", CIRCLE_IN, Orientation::Inward),
        ] {
            let report = sweep(name, text, opts)?;
            time += report.provenance.wall_time_s;
            let geom = Geometry::circle(1.0, orientation).map_err(|e| e.to_string())?;
            for &eps in &[0.1, 0.05] {
                let oracle = tube_oracle(&geom, eps, TubeCase::DirichletNeumann, 5, DEFAULT_RADIAL_RESOLUTION)
                    .map_err(|e| e.to_string())?;
                for n in 1..=5 {
                    let l = report.record("dn", eps, n).and_then(|r| r.lambda).ok_or("missing lambda")?;
                    worst = worst.max(rel(l, oracle.eigenvalues[n - 1]));
                }
            }
        }
        Ok((
            worst <= 1e-4 && time < 60.0,
            format!("max relative deviation {worst:.2e} (≤ 1e-4), sweeps {time:.1}s (< 60s)"),
        ))
    })
}

/// Sphere(1) outward, ε = 0.1: each degree `l ≤ 4` against the radial
/// oracle and repeated exactly `2l + 1` times in the merged spectrum.
pub fn oracle_3d(opts: &VerifyOptions) -> Outcome {
    timed(3, || {
        let report = sweep("oracle_3d", SPHERE_OUT, opts)?;
        let geom = Geometry::sphere(1.0, Orientation::Outward).map_err(|e| e.to_string())?;
        let values: Vec<f64> = (1..=25)
            .map(|n| report.record("dn", 0.1, n).and_then(|r| r.lambda))
            .collect::<Option<_>>()
            .ok_or("missing lambda")?;
        let mut worst: f64 = 0.0;
        let mut multiplicities = Vec::new();
        let mut start = 0;
        for l in 0..=4u32 {
            let m = 2 * l as usize + 1;
            let group = &values[start..start + m];
            let exact_repeat = group.iter().all(|&v| v == group[0]);
            let separated = values.get(start + m).is_none_or(|&next| next != group[0]);
            multiplicities.push(exact_repeat && separated);
            let oracle = shell_block_spectrum(&geom, 0.1, TubeCase::DirichletNeumann, l, 1, DEFAULT_RADIAL_RESOLUTION)
                .map_err(|e| e.to_string())?;
            worst = worst.max(rel(group[0], oracle.eigenvalues[0]));
            start += m;
        }
        let mult_ok = multiplicities.iter().all(|&b| b);
        Ok((
            worst <= 1e-4 && mult_ok,
            format!("max relative deviation {worst:.2e} (≤ 1e-4), multiplicities 1,3,5,7,9 exact: {mult_ok}"),
        ))
    })
}

fn trend_summary(report: &SweepReport, case: &str, n_max: usize, tol_disc: f64) -> (bool, String) {
    let rows = residual_trend(report, case, n_max, tol_disc);
    let mut passed = rows.len() == n_max;
    let mut text = String::new();
    for row in &rows {
        let growth_ok = row.leading_growth >= 64.0 * (1.0 - 1e-12);
        passed &= row.passed() && growth_ok;
        let _ = write!(
            text,
            " n={}: max {:.3} median {:.3} |slope|·ε {:.1e} growth {:.0}×;",
            row.n,
            row.max_abs,
            row.median_abs,
            row.slope.abs() * row.eps_min,
            row.leading_growth
        );
    }
    (passed, text.trim_end_matches(';').to_string())
}

/// No `1/ε` growth of `|r_n|`, n ≤ 3, on the outward circle and the inward
/// ellipse, while the leading term grows 64×.
pub fn residual_trend_criterion(opts: &VerifyOptions) -> Outcome {
    timed(4, || {
        let mut passed = true;
        let mut detail = String::new();
        for (name, text) in [("trend_circle", CIRCLE_TREND), ("trend_ellipse", ELLIPSE_TREND)] {
            let report = sweep(name, text, opts)?;
            let tol_disc = configure(text, opts).map_err(|e| e.to_string())?.refinement.tol_disc;
            let (ok, summary) = trend_summary(&report, "dn", 3, tol_disc);
            passed &= ok;
            let _ = write!(detail, "{name}:{summary}. ");
        }
        Ok((passed, detail.trim_end().to_string()))
    })
}

/// Inward ellipse: `|ε μ_1 - 1/2|` decreasing along the sweep and ≤ 0.05 at
/// ε = 0.0125. Circle: `ε μ_1 = inf κ` to solver tolerance.
pub fn strong_coupling(opts: &VerifyOptions) -> Outcome {
    timed(5, || {
        let ellipse = sweep("strong_coupling_ellipse", ELLIPSE_COUPLING, opts)?;
        let config = configure(ELLIPSE_COUPLING, opts).map_err(|e| e.to_string())?;
        let table = strong_coupling_check(&ellipse, "effective", 1, config.strong_coupling_fraction, &config.refinement);
        let target_ok = (table.inf_kappa - 0.5).abs() < 1e-6;
        let last = table.rows.last().ok_or("no strong-coupling rows")?;
        let ellipse_ok = target_ok && table.monotone && last.eps == 0.0125 && last.error <= 0.05;

        let circle = sweep("trend_circle", CIRCLE_TREND, opts)?;
        let circle_config = configure(CIRCLE_TREND, opts).map_err(|e| e.to_string())?;
        let circle_table = strong_coupling_check(&circle, "dn", 1, circle_config.strong_coupling_fraction, &circle_config.refinement);
        let circle_ok = circle_table.passed == Some(true);
        let circle_worst = circle_table.rows.iter().map(|r| r.error).fold(0.0, f64::max);

        let errors: Vec<String> = table.rows.iter().map(|r| format!("{:.4}", r.error)).collect();
        Ok((
            ellipse_ok && circle_ok,
            format!(
                "ellipse inf κ = {:.6}, |εμ_1 - inf κ| = [{}] (monotone {}, final ≤ 0.05: {}); circle max deviation {:.1e} (≤ {:.1e})",
                table.inf_kappa,
                errors.join(", "),
                table.monotone,
                last.error <= 0.05,
                circle_worst,
                circle_table.threshold
            ),
        ))
    })
}

/// Sandwich flag on every record of the sweeps behind criteria 1 to 5.
pub fn sandwich(opts: &VerifyOptions) -> Outcome {
    timed(6, || {
        let mut total = 0;
        let mut failed = Vec::new();
        for (name, text) in [
            ("flat_exactness", SEGMENT_DN),
            ("oracle_2d_outward", CIRCLE_OUT),
            ("oracle_2d_inward", CIRCLE_IN),
            ("oracle_3d", SPHERE_OUT),
            ("trend_circle", CIRCLE_TREND),
            ("trend_ellipse", ELLIPSE_TREND),
            ("strong_coupling_ellipse", ELLIPSE_COUPLING),
        ] {
            let report = sweep(name, text, opts)?;
            for r in &report.records {
                total += 1;
                if r.sandwich_ok != Some(true) {
                    failed.push(format!("{name} ε={} n={}", r.eps, r.n));
                }
            }
        }
        let circle = sweep("oracle_2d_outward", CIRCLE_OUT, opts)?;
        let saturated = circle.record("dn", 0.1, 1).ok_or("missing circle record")?;
        let gap = 0.1 * (saturated.mu.unwrap_or(f64::NAN) - saturated.nu.unwrap_or(f64::NAN));
        Ok((
            failed.is_empty() && saturated.sandwich_ok == Some(true),
            if failed.is_empty() {
                format!("{total} records hold; circle saturation ε(μ_1-ν_1) = {gap:.12} against ‖κ‖ = 1")
            } else {
                format!("{} of {total} records violate: {}", failed.len(), failed.join("; "))
            },
        ))
    })
}

/// Dirichlet circle: residual trend-bounded against `(π/ε)²`. Sphere:
/// `V_eff ≡ 0` at 100 sample points.
pub fn dirichlet_case(opts: &VerifyOptions) -> Outcome {
    timed(7, || {
        let report = sweep("dirichlet_circle", CIRCLE_DIRICHLET, opts)?;
        let tol_disc = configure(CIRCLE_DIRICHLET, opts).map_err(|e| e.to_string())?.refinement.tol_disc;
        let (trend_ok, summary) = trend_summary(&report, "dirichlet", 3, tol_disc);
        let sphere = Geometry::sphere(1.0, Orientation::Outward).map_err(|e| e.to_string())?;
        let points = sphere.sample_points(10);
        let worst = points
            .iter()
            .map(|p| sphere.v_eff(p).map(f64::abs))
            .collect::<crate::Result<Vec<_>>>()
            .map_err(|e| e.to_string())?
            .into_iter()
            .fold(0.0, f64::max);
        let veff_ok = points.len() >= 100 && worst <= 4.0 * f64::EPSILON;
        Ok((
            trend_ok && veff_ok,
            format!("circle:{summary}. sphere max |V_eff| = {worst:.1e} at {} points", points.len()),
        ))
    })
}

/// Neumann segment and circle: `|λ_n - μ_n| ≤ 0.05 (1 + |μ_n|)` at
/// ε = 0.025 and not growing along the sweep.
pub fn neumann_case(opts: &VerifyOptions) -> Outcome {
    timed(8, || {
        let mut passed = true;
        let mut detail = String::new();
        for (name, text) in [("neumann_segment", SEGMENT_NEUMANN), ("neumann_circle", CIRCLE_NEUMANN)] {
            let report = sweep(name, text, opts)?;
            let tol_disc = configure(text, opts).map_err(|e| e.to_string())?.refinement.tol_disc;
            let rows = neumann_convergence(&report, 5, tol_disc);
            let worst = rows
                .iter()
                .map(|r| r.gaps.last().map_or(f64::INFINITY, |g| g.1 / r.bound))
                .fold(0.0, f64::max);
            let ok = rows.iter().all(|r| r.passed) && rows.iter().all(|r| r.gaps.last().is_some_and(|g| g.0 == 0.025));
            passed &= ok;
            let _ = write!(detail, "{name}: worst final gap/bound {worst:.2e}, non-increasing {}. ", rows.iter().all(|r| r.decreasing));
        }
        Ok((passed, detail.trim_end().to_string()))
    })
}

/// Random symmetric `A`, `B = LᵀL + δI`, dimension ≤ 60.
pub fn random_pair(rng: &mut ChaCha8Rng, n: usize) -> (CsrMatrix, CsrMatrix) {
    let mut a = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() * 2.0 - 1.0);
    a = (&a + a.transpose()) * 0.5;
    let l = DMatrix::from_fn(n, n, |_, _| rng.random::<f64>() * 2.0 - 1.0);
    let delta = 0.1 + rng.random::<f64>();
    let b = l.transpose() * &l + DMatrix::identity(n, n) * delta;
    (CsrMatrix::from_dense(&a, 0.0), CsrMatrix::from_dense(&b, 0.0))
}

/// 200 random pairs against the dense reference to 1e-8 on the five
/// lowest eigenvalues; scaling the pencil leaves the spectrum unchanged.
pub fn eigensolver_equivalence(_opts: &VerifyOptions) -> Outcome {
    timed(9, || {
        let mut rng = ChaCha8Rng::seed_from_u64(crate::eigensolve::DEFAULT_SEED);
        let opts = SolverOptions::default().with_k(5);
        let mut worst: f64 = 0.0;
        for _ in 0..200 {
            let n = rng.random_range(6..=60);
            let (a, b) = random_pair(&mut rng, n);
            let got = smallest_eigenpairs(&a, &b, &opts).map_err(|e| e.to_string())?;
            let want = dense_reference(&a, &b, 5, 4000).map_err(|e| e.to_string())?;
            for (g, w) in got.eigenvalues.iter().zip(&want.eigenvalues) {
                worst = worst.max((g - w).abs());
            }
        }

        // Gauge: (cA, cB) has the spectrum of (A, B).
        let geom = Geometry::ellipse(1.0, 0.5, Orientation::Inward).map_err(|e| e.to_string())?;
        let pair = assemble_tube(&geom, 0.1, &Resolution::new(32, 8).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        let shift = Some(crate::assembly::discrete_transverse_bottom(TubeCase::DirichletNeumann, 8, 0.1) - 100.0);
        let gauge_opts = SolverOptions { shift, ..SolverOptions::default() };
        let base = smallest_eigenpairs(&pair.a, &pair.b, &gauge_opts).map_err(|e| e.to_string())?;
        let mut gauge_worst: f64 = 0.0;
        for c in [1e-3, 7.0, 1e3] {
            let scaled = pair.scaled(c);
            let s = smallest_eigenpairs(&scaled.a, &scaled.b, &gauge_opts).map_err(|e| e.to_string())?;
            for (x, y) in s.eigenvalues.iter().zip(&base.eigenvalues) {
                gauge_worst = gauge_worst.max((x - y).abs() / y.abs().max(1.0));
            }
        }
        let gauge_ok = gauge_worst <= gauge_opts.tol;
        Ok((
            worst <= 1e-8 && gauge_ok,
            format!("max |Δλ| over 200 pairs {worst:.1e} (≤ 1e-8); gauge max relative change {gauge_worst:.1e} (≤ {:.0e})", gauge_opts.tol),
        ))
    })
}

/// Outward circle ground state: `orth_fraction(0.05) / orth_fraction(0.1)`
/// in `[0.3, 0.8]`.
pub fn transverse_localization(opts: &VerifyOptions) -> Outcome {
    timed(10, || {
        let report = sweep("oracle_2d_outward", CIRCLE_OUT, opts)?;
        let ratios = localization_ratios(&report);
        let (e0, e1, ratio) = ratios
            .iter()
            .copied()
            .find(|&(a, b, _)| a == 0.1 && b == 0.05)
            .ok_or("missing orth_fraction at ε = 0.1, 0.05")?;
        let f0 = report.record("dn", e0, 1).and_then(|r| r.orth_fraction).unwrap_or(f64::NAN);
        let f1 = report.record("dn", e1, 1).and_then(|r| r.orth_fraction).unwrap_or(f64::NAN);
        Ok((
            (0.3..=0.8).contains(&ratio),
            format!("orth_fraction {f0:.4e} → {f1:.4e}, ratio {ratio:.4} (in [0.3, 0.8])"),
        ))
    })
}

/// Two uncached sweeps with different worker counts give byte-identical
/// CSV.
pub fn determinism(opts: &VerifyOptions) -> Outcome {
    timed(11, || {
        let mut outputs = Vec::new();
        for workers in [1, 4] {
            let mut raw = RawConfig::parse(DETERMINISM).map_err(|e| e.to_string())?;
            raw.set("run.workers", &workers.to_string()).map_err(|e| e.to_string())?;
            let config = raw.build().map_err(|e| e.to_string())?;
            let report = run_sweep(&config).map_err(|e| e.to_string())?;
            if report.failed() {
                return Err("determinism sweep had failed solves".into());
            }
            outputs.push(render_csv(&report.records));
        }
        if let Some(dir) = &opts.out_dir {
            let path = dir.join("determinism.csv");
            std::fs::create_dir_all(dir)
                .and_then(|_| std::fs::write(&path, &outputs[0]))
                .map_err(|e| format!("{}: {e}", path.display()))?;
        }
        let same = outputs[0] == outputs[1];
        Ok((
            same,
            format!("{} bytes, identical with 1 and 4 workers: {same}", outputs[0].len()),
        ))
    })
}

pub fn run_criterion(id: u32, opts: &VerifyOptions) -> Option<Outcome> {
    Some(match id {
        1 => flat_exactness(opts),
        2 => oracle_2d(opts),
        3 => oracle_3d(opts),
        4 => residual_trend_criterion(opts),
        5 => strong_coupling(opts),
        6 => sandwich(opts),
        7 => dirichlet_case(opts),
        8 => neumann_case(opts),
        9 => eigensolver_equivalence(opts),
        10 => transverse_localization(opts),
        11 => determinism(opts),
        _ => return None,
    })
}

/// All criteria in order.
pub fn run_all(opts: &VerifyOptions) -> Vec<Outcome> {
    CRITERIA
        .iter()
        .filter_map(|&(id, _)| run_criterion(id, opts))
        .collect()
}
