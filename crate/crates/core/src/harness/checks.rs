//! Diagnostics computed from a finished sweep.

use serde::{Deserialize, Serialize};

use super::config::SweepCase;
use super::solve::Refinement;
use super::sweep::{SweepRecord, SweepReport};
use crate::assembly::TubeCase;
use crate::geometry::KappaExtrema;

/// Sandwich between the effective and bare surface eigenvalues.
///
/// DN: `|ε μ_n - ε ν_n| ≤ ‖κ‖_∞`. Dirichlet: `|μ_n - ν_n| ≤ ‖V_eff‖_∞`.
/// Neumann compares an operator with itself. The slack is the combined
/// discretization and solver tolerance.
pub fn sandwich_holds(
    case: SweepCase,
    eps: f64,
    mu: (f64, f64),
    nu: (f64, f64),
    ext: &KappaExtrema,
    r: &Refinement,
) -> bool {
    let (scale, bound) = match case {
        SweepCase::Tube(TubeCase::DirichletNeumann) | SweepCase::Effective => (eps, ext.kappa_norm),
        SweepCase::Tube(TubeCase::Dirichlet) => (1.0, ext.v_eff_norm),
        SweepCase::Tube(TubeCase::Neumann) => (1.0, 0.0),
    };
    let slack = scale * (mu.1 + nu.1 + r.tol_disc) + r.solver_tol * (scale * mu.0.abs()).max(1.0);
    (scale * (mu.0 - nu.0)).abs() <= bound + slack
}

/// Re-evaluates a record's sandwich flag from its stored values.
pub fn sandwich_check(record: &SweepRecord, ext: &KappaExtrema, r: &Refinement) -> Option<bool> {
    let case = SweepCase::parse(&record.case).ok()?;
    let mu = (record.mu?, record.err_mu.unwrap_or(0.0));
    let nu = (record.nu?, 0.0);
    Some(sandwich_holds(case, record.eps, mu, nu, ext, r))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrongCouplingRow {
    pub eps: f64,
    pub eps_mu: f64,
    /// `|ε μ_n - inf κ|`, or `|ε μ_n - inf κ - ε ν_n|` for constant κ.
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrongCouplingTable {
    pub n: usize,
    pub inf_kappa: f64,
    pub rows: Vec<StrongCouplingRow>,
    pub monotone: bool,
    /// Bound the final error is held to.
    pub threshold: f64,
    /// `None` when fewer than three ε values are available.
    pub passed: Option<bool>,
}

/// `ε μ_n(ε) → inf κ`. For non-constant κ the error must decrease along
/// the sweep and end below `fraction · (sup κ - inf κ)`. For constant κ
/// the bare eigenvalue `ν_n` is subtracted and the remainder must vanish
/// to solver tolerance.
pub fn strong_coupling_check(
    report: &SweepReport,
    case: &str,
    n: usize,
    fraction: f64,
    r: &Refinement,
) -> StrongCouplingTable {
    let ext = &report.extrema;
    let constant = report.constant_curvature;
    let mut rows = Vec::new();
    let mut tol: f64 = 0.0;
    for rec in report.case_records(case).filter(|rec| rec.n == n) {
        let (Some(mu), Some(nu)) = (rec.mu, rec.nu) else {
            continue;
        };
        let eps_mu = rec.eps * mu;
        let error = if constant {
            (eps_mu - ext.inf_kappa - rec.eps * nu).abs()
        } else {
            (eps_mu - ext.inf_kappa).abs()
        };
        tol = tol.max(r.solver_tol * eps_mu.abs().max(1.0));
        rows.push(StrongCouplingRow {
            eps: rec.eps,
            eps_mu,
            error,
        });
    }
    let monotone = rows.windows(2).all(|w| w[1].error < w[0].error);
    let threshold = if constant {
        tol
    } else {
        fraction * (ext.sup_kappa - ext.inf_kappa)
    };
    let final_ok = rows.last().is_some_and(|row| row.error <= threshold);
    let passed = if constant {
        Some(!rows.is_empty() && rows.iter().all(|row| row.error <= threshold))
    } else if rows.len() >= 3 {
        Some(monotone && final_ok)
    } else {
        None
    };
    StrongCouplingTable {
        n,
        inf_kappa: ext.inf_kappa,
        rows,
        monotone,
        threshold,
        passed,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendRow {
    pub n: usize,
    pub max_abs: f64,
    pub median_abs: f64,
    /// Least-squares slope of `|r_n|` against `1/ε`.
    pub slope: f64,
    pub eps_min: f64,
    /// `leading(ε_min) / leading(ε_max)`.
    pub leading_growth: f64,
    pub tol: f64,
    pub bounded: bool,
    pub flat: bool,
}

impl TrendRow {
    pub fn passed(&self) -> bool {
        self.bounded && self.flat
    }
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m == 0 {
        f64::NAN
    } else if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

fn slope(x: &[f64], y: &[f64]) -> f64 {
    let m = x.len() as f64;
    let mx = x.iter().sum::<f64>() / m;
    let my = y.iter().sum::<f64>() / m;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx > 0.0 {
        sxy / sxx
    } else {
        0.0
    }
}

/// Boundedness of `r_n(ε)` along the sweep, per `n`:
/// `max |r_n| ≤ 3 median |r_n| + tol` and `|slope| ε_min ≤ 0.1 median |r_n| + tol`,
/// where `tol` is the discretization tolerance plus the largest error
/// estimate of `λ_n` and `μ_n` along the sweep.
pub fn residual_trend(report: &SweepReport, case: &str, n_max: usize, tol_disc: f64) -> Vec<TrendRow> {
    (1..=n_max)
        .filter_map(|n| {
            let rows: Vec<&SweepRecord> = report
                .case_records(case)
                .filter(|r| r.n == n && r.residual.is_some())
                .collect();
            if rows.len() < 2 {
                return None;
            }
            let abs: Vec<f64> = rows.iter().map(|r| r.residual.unwrap_or(0.0).abs()).collect();
            let inv: Vec<f64> = rows.iter().map(|r| 1.0 / r.eps).collect();
            let tol = tol_disc
                + rows
                    .iter()
                    .map(|r| r.err_lambda.unwrap_or(0.0) + r.err_mu.unwrap_or(0.0))
                    .fold(0.0, f64::max);
            let eps_min = rows.iter().map(|r| r.eps).fold(f64::INFINITY, f64::min);
            let eps_max = rows.iter().map(|r| r.eps).fold(0.0, f64::max);
            let leading = |e: f64| rows.iter().find(|r| r.eps == e).and_then(|r| r.leading).unwrap_or(0.0);
            let leading_growth = if leading(eps_max) > 0.0 {
                leading(eps_min) / leading(eps_max)
            } else {
                f64::NAN
            };
            let max_abs = abs.iter().copied().fold(0.0, f64::max);
            let median_abs = median(&abs);
            let s = slope(&inv, &abs);
            Some(TrendRow {
                n,
                max_abs,
                median_abs,
                slope: s,
                eps_min,
                leading_growth,
                tol,
                bounded: max_abs <= 3.0 * median_abs + tol,
                flat: s.abs() * eps_min <= 0.1 * median_abs + tol,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeumannRow {
    pub n: usize,
    /// `(ε, |λ_n^N - μ_n^N|)` along the sweep.
    pub gaps: Vec<(f64, f64)>,
    pub bound: f64,
    pub decreasing: bool,
    pub passed: bool,
}

/// `λ_n^N(ε) → μ_n^N`: the gap may not grow along the sweep beyond
/// `tol_disc`, and ends below `0.05 (1 + |μ_n^N|)`.
pub fn neumann_convergence(report: &SweepReport, n_max: usize, tol_disc: f64) -> Vec<NeumannRow> {
    (1..=n_max)
        .map(|n| {
            let rows: Vec<&SweepRecord> = report.case_records("neumann").filter(|r| r.n == n).collect();
            let gaps: Vec<(f64, f64)> = rows
                .iter()
                .filter_map(|r| Some((r.eps, (r.lambda? - r.mu?).abs())))
                .collect();
            let mu_last = rows.last().and_then(|r| r.mu).unwrap_or(0.0);
            let bound = 0.05 * (1.0 + mu_last.abs());
            let decreasing = gaps.windows(2).all(|w| w[1].1 <= w[0].1 + tol_disc);
            let complete = !gaps.is_empty() && gaps.len() == rows.len();
            let passed = complete && decreasing && gaps.last().is_some_and(|g| g.1 <= bound);
            NeumannRow {
                n,
                gaps,
                bound,
                decreasing,
                passed,
            }
        })
        .collect()
}

/// `orth_fraction(ε_{k+1}) / orth_fraction(ε_k)` for the DN ground state.
pub fn localization_ratios(report: &SweepReport) -> Vec<(f64, f64, f64)> {
    let ground: Vec<(f64, f64)> = report
        .case_records("dn")
        .filter(|r| r.n == 1)
        .filter_map(|r| Some((r.eps, r.orth_fraction?)))
        .collect();
    ground
        .windows(2)
        .map(|w| (w[0].0, w[1].0, w[1].1 / w[0].1))
        .collect()
}
