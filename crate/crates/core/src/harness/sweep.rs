//! ε-sweeps: tube, effective and bare surface spectra on matched grids.

use std::f64::consts::PI;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Config, SweepCase};
use super::solve::{
    at_levels, block_of, build_surface, build_tube, cutoff_is_safe, merge_blocks, refine, surface_shift,
    tube_shift, BlockSpectrum, Converged, Refinement, SurfaceOperator,
};
use crate::assembly::{Bc, Block, TubeCase};
use crate::geometry::{Geometry, KappaExtrema};
use crate::transverse::transverse_project;
use crate::Result;

/// Environment variable read when no worker count is configured.
pub const WORKERS_ENV: &str = "TUBELAB_WORKERS";

/// Grid resolution used for curvature extrema.
const EXTREMA_RESOLUTION: usize = 512;

/// One `(case, ε, n)` row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub case: String,
    pub eps: f64,
    pub n: usize,
    pub lambda: Option<f64>,
    pub leading: Option<f64>,
    pub mu: Option<f64>,
    pub residual: Option<f64>,
    pub nu: Option<f64>,
    pub sandwich_ok: Option<bool>,
    pub orth_fraction: Option<f64>,
    pub err_lambda: Option<f64>,
    pub err_mu: Option<f64>,
    /// Set when a solve for this row failed.
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrongCouplingPoint {
    pub case: String,
    pub eps: f64,
    /// `ε μ_1(ε)`.
    pub eps_mu1: Option<f64>,
    pub inf_kappa: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveTiming {
    pub case: String,
    pub eps: f64,
    pub wall_time_s: f64,
    /// Finest `(n_surface, n_t)` reached by the tube or surface solve.
    pub finest: Option<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config_hash: String,
    pub config: String,
    pub version: String,
    pub workers: usize,
    pub wall_time_s: f64,
    pub solves: Vec<SolveTiming>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub geometry: String,
    pub constant_curvature: bool,
    pub extrema: KappaExtrema,
    pub cases: Vec<String>,
    pub records: Vec<SweepRecord>,
    pub strong_coupling: Vec<StrongCouplingPoint>,
    pub provenance: Provenance,
}

impl SweepReport {
    pub fn failed(&self) -> bool {
        self.records.iter().any(|r| r.error.is_some())
    }

    pub fn case_records<'a>(&'a self, case: &'a str) -> impl Iterator<Item = &'a SweepRecord> + 'a {
        self.records.iter().filter(move |r| r.case == case)
    }

    pub fn record(&self, case: &str, eps: f64, n: usize) -> Option<&SweepRecord> {
        self.records
            .iter()
            .find(|r| r.case == case && r.eps == eps && r.n == n)
    }
}

/// `(π/2ε)²`, `(π/ε)²` or `0`.
pub fn leading_term(case: TubeCase, eps: f64) -> f64 {
    match case {
        TubeCase::DirichletNeumann => (PI / (2.0 * eps)).powi(2),
        TubeCase::Dirichlet => (PI / eps).powi(2),
        TubeCase::Neumann => 0.0,
    }
}

/// Surface operator paired with a sweep case, and the bare operator `ν`
/// is compared with.
fn surface_operators(case: SweepCase) -> (SurfaceOperator, SurfaceOperator) {
    match case {
        SweepCase::Tube(TubeCase::DirichletNeumann) | SweepCase::Effective => (
            SurfaceOperator::EffectiveDn,
            SurfaceOperator::LaplaceBeltrami(Bc::Dirichlet),
        ),
        SweepCase::Tube(TubeCase::Dirichlet) => (
            SurfaceOperator::EffectiveDirichlet,
            SurfaceOperator::LaplaceBeltrami(Bc::Dirichlet),
        ),
        SweepCase::Tube(TubeCase::Neumann) => (
            SurfaceOperator::LaplaceBeltrami(Bc::Neumann),
            SurfaceOperator::LaplaceBeltrami(Bc::Neumann),
        ),
    }
}

/// Merged `(value, error)` lists of one sweep point.
#[derive(Clone, Debug, Default)]
struct PointSpectra {
    lambda: Vec<(f64, f64)>,
    mu: Vec<(f64, f64)>,
    nu: Vec<(f64, f64)>,
    orth_fraction: Option<f64>,
    finest: Option<(usize, usize)>,
}

struct Point<'a> {
    config: &'a Config,
    ext: &'a KappaExtrema,
    case: SweepCase,
    eps: f64,
}

impl Point<'_> {
    fn geom(&self) -> &Geometry {
        &self.config.geometry
    }

    fn refinement(&self) -> &Refinement {
        &self.config.refinement
    }

    /// Converged primary solve of one block: the tube, or the effective
    /// operator when there is no tube.
    fn primary(&self, block: Option<Block>, k: usize) -> Result<Converged> {
        let r = self.refinement();
        let mut base = r.base()?;
        if let Some(b) = block {
            base = base.with_block(b);
        }
        match self.case {
            SweepCase::Tube(case) => refine(
                build_tube(self.geom(), self.eps, case),
                base,
                k,
                tube_shift(case, self.eps, base.n_t, self.ext),
                r,
            ),
            SweepCase::Effective => {
                let op = SurfaceOperator::EffectiveDn;
                refine(build_surface(self.geom(), self.eps, op), base, k, surface_shift(op, self.eps, self.ext), r)
            }
        }
    }

    fn surface(&self, op: SurfaceOperator, primary: &Converged, k: usize) -> Result<Converged> {
        at_levels(
            build_surface(self.geom(), self.eps, op),
            &primary.levels,
            k,
            surface_shift(op, self.eps, self.ext),
            self.refinement(),
        )
    }

    fn blocks(&self) -> Vec<Option<Block>> {
        match block_of(self.geom(), 0) {
            None => vec![None],
            Some(_) => (0..self.config.mode_cutoff.max(1))
                .map(|i| block_of(self.geom(), i))
                .collect(),
        }
    }

    fn solve(&self) -> Result<PointSpectra> {
        let k = self.config.n_max;
        let (mu_op, nu_op) = surface_operators(self.case);
        let mut blocks = self.blocks();

        let mut primaries: Vec<Converged> = blocks
            .par_iter()
            .map(|b| self.primary(*b, k))
            .collect::<Result<_>>()?;

        // Add blocks until the first omitted one clears the reported range.
        if block_of(self.geom(), 0).is_some() {
            let mut next = blocks.len() as u32;
            loop {
                let listed: Vec<BlockSpectrum> = blocks
                    .iter()
                    .zip(&primaries)
                    .map(|(b, s)| BlockSpectrum {
                        block: *b,
                        solve: s.clone(),
                    })
                    .collect();
                let merged = merge_blocks(&listed, k);
                let omitted = block_of(self.geom(), next);
                let probe = self.primary(omitted, 1)?;
                if cutoff_is_safe(&merged, probe.eigenvalues[0]) {
                    break;
                }
                if next >= self.config.mode_cutoff + self.config.max_extra_modes {
                    return Err(crate::Error::InvalidArgument(format!(
                        "block cutoff {next} does not clear the lowest {k} eigenvalues"
                    )));
                }
                blocks.push(omitted);
                primaries.push(self.primary(omitted, k)?);
                next += 1;
            }
        }

        let surfaces: Vec<(Converged, Converged)> = primaries
            .par_iter()
            .map(|p| {
                let mu = self.surface(mu_op, p, k)?;
                let nu = if nu_op == mu_op {
                    mu.clone()
                } else {
                    self.surface(nu_op, p, k)?
                };
                Ok((mu, nu))
            })
            .collect::<Result<_>>()?;

        let listed = |pick: &dyn Fn(usize) -> Converged| -> Vec<BlockSpectrum> {
            blocks
                .iter()
                .enumerate()
                .map(|(i, b)| BlockSpectrum {
                    block: *b,
                    solve: pick(i),
                })
                .collect()
        };
        let strip = |m: Vec<(f64, f64, usize)>| m.into_iter().map(|(v, e, _)| (v, e)).collect::<Vec<_>>();
        let primary_merged = merge_blocks(&listed(&|i| primaries[i].clone()), k);
        let mu = strip(merge_blocks(&listed(&|i| surfaces[i].0.clone()), k));
        let nu = strip(merge_blocks(&listed(&|i| surfaces[i].1.clone()), k));

        let orth_fraction = match (self.case, primary_merged.first()) {
            (SweepCase::Tube(TubeCase::DirichletNeumann), Some(&(_, _, pos))) => {
                let ground = &primaries[pos];
                match ground.finest.eigenvectors.as_ref().and_then(|v| v.first()) {
                    Some(x) => Some(transverse_project(&ground.dofs.tensor_field(x)?, &ground.dofs.surface_weights)?.orthogonal_fraction),
                    None => None,
                }
            }
            _ => None,
        };
        let finest = primary_merged
            .first()
            .and_then(|&(_, _, pos)| primaries[pos].levels.last())
            .map(|r| (r.n_surface, r.n_t));
        let primary_merged = strip(primary_merged);
        Ok(match self.case {
            SweepCase::Tube(_) => PointSpectra {
                lambda: primary_merged,
                mu,
                nu,
                orth_fraction,
                finest,
            },
            SweepCase::Effective => PointSpectra {
                lambda: Vec::new(),
                mu,
                nu,
                orth_fraction: None,
                finest,
            },
        })
    }

    fn records(&self, spectra: Result<PointSpectra>) -> Vec<SweepRecord> {
        let case = self.case.name().to_string();
        let r = self.refinement();
        (1..=self.config.n_max)
            .map(|n| {
                let mut rec = SweepRecord {
                    case: case.clone(),
                    eps: self.eps,
                    n,
                    lambda: None,
                    leading: None,
                    mu: None,
                    residual: None,
                    nu: None,
                    sandwich_ok: None,
                    orth_fraction: None,
                    err_lambda: None,
                    err_mu: None,
                    error: None,
                };
                let s = match &spectra {
                    Ok(s) => s,
                    Err(e) => {
                        rec.error = Some(e.to_string());
                        return rec;
                    }
                };
                let mu = s.mu.get(n - 1).copied();
                let nu = s.nu.get(n - 1).copied();
                rec.mu = mu.map(|m| m.0);
                rec.err_mu = mu.map(|m| m.1);
                rec.nu = nu.map(|m| m.0);
                if let SweepCase::Tube(tc) = self.case {
                    let lambda = s.lambda.get(n - 1).copied();
                    rec.lambda = lambda.map(|l| l.0);
                    rec.err_lambda = lambda.map(|l| l.1);
                    rec.leading = Some(leading_term(tc, self.eps));
                    if let (Some(l), Some(m)) = (rec.lambda, rec.mu) {
                        rec.residual = Some(l - leading_term(tc, self.eps) - m);
                    }
                    if n == 1 {
                        rec.orth_fraction = s.orth_fraction;
                    }
                    if rec.lambda.is_none() {
                        rec.error = Some(format!("only {} tube eigenvalues available", s.lambda.len()));
                    }
                }
                if let (Some(mu), Some(nu)) = (mu, nu) {
                    rec.sandwich_ok = Some(super::checks::sandwich_holds(
                        self.case,
                        self.eps,
                        mu,
                        nu,
                        self.ext,
                        r,
                    ));
                } else if rec.error.is_none() {
                    rec.error = Some(format!("only {} surface eigenvalues available", s.mu.len().min(s.nu.len())));
                }
                rec
            })
            .collect()
    }
}

/// Worker count: the configured value, else the environment variable,
/// else the number of available cores.
pub fn resolve_workers(config: &Config) -> usize {
    config
        .workers
        .or_else(|| std::env::var(WORKERS_ENV).ok().and_then(|v| v.trim().parse().ok()))
        .filter(|&w| w > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Runs every `(case, ε)` point concurrently and collects the records in
/// `(case, ε, n)` order. Failed solves are recorded, not propagated.
pub fn run_sweep(config: &Config) -> Result<SweepReport> {
    let start = Instant::now();
    let ext = config.geometry.kappa_extrema(EXTREMA_RESOLUTION)?;
    let workers = resolve_workers(config);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| crate::Error::InvalidArgument(format!("thread pool: {e}")))?;

    let jobs: Vec<(SweepCase, f64)> = config
        .cases
        .iter()
        .flat_map(|&c| config.eps.iter().map(move |&e| (c, e)))
        .collect();
    let results: Vec<(Vec<SweepRecord>, SolveTiming)> = pool.install(|| {
        jobs.par_iter()
            .map(|&(case, eps)| {
                let t = Instant::now();
                let point = Point {
                    config,
                    ext: &ext,
                    case,
                    eps,
                };
                let spectra = point.solve();
                let finest = spectra.as_ref().ok().and_then(|s| s.finest);
                let records = point.records(spectra);
                let timing = SolveTiming {
                    case: case.name().to_string(),
                    eps,
                    wall_time_s: t.elapsed().as_secs_f64(),
                    finest,
                };
                (records, timing)
            })
            .collect()
    });

    let mut records = Vec::new();
    let mut solves = Vec::new();
    for (r, t) in results {
        records.extend(r);
        solves.push(t);
    }
    let strong_coupling = records
        .iter()
        .filter(|r| r.n == 1 && (r.case == "dn" || r.case == "effective"))
        .map(|r| StrongCouplingPoint {
            case: r.case.clone(),
            eps: r.eps,
            eps_mu1: r.mu.map(|m| r.eps * m),
            inf_kappa: ext.inf_kappa,
        })
        .collect();
    Ok(SweepReport {
        geometry: config.geometry_spec.clone(),
        constant_curvature: config.geometry.is_constant_curvature(),
        extrema: ext,
        cases: config.cases.iter().map(|c| c.name().to_string()).collect(),
        records,
        strong_coupling,
        provenance: Provenance {
            config_hash: config.hash(),
            config: config.canonical(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            workers,
            wall_time_s: start.elapsed().as_secs_f64(),
            solves,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::RawConfig;

    fn config(text: &str) -> Config {
        RawConfig::parse(text).unwrap().build().unwrap()
    }

    #[test]
    fn flat_segment_residual_vanishes() {
        let c = config("geometry.kind = segment\nsweep.eps = 0.1\nsweep.n_max = 3\nresolution.n_surface = 16\n");
        let report = run_sweep(&c).unwrap();
        assert_eq!(report.records.len(), 3);
        for r in &report.records {
            assert!(r.error.is_none(), "{:?}", r.error);
            assert!(r.residual.unwrap().abs() < 1e-3, "{r:?}");
            assert_eq!(r.sandwich_ok, Some(true));
        }
        assert!(report.records[0].orth_fraction.unwrap() < 1e-6);
    }

    #[test]
    fn records_follow_case_eps_n_order() {
        let c = config(
            "geometry.kind = segment\nsweep.eps = 0.2, 0.1\nsweep.n_max = 2\nsweep.cases = neumann, dn, effective\nresolution.n_surface = 16\nrun.workers = 3\n",
        );
        let report = run_sweep(&c).unwrap();
        let keys: Vec<(String, f64, usize)> = report
            .records
            .iter()
            .map(|r| (r.case.clone(), r.eps, r.n))
            .collect();
        let mut expected = Vec::new();
        for case in ["dn", "neumann", "effective"] {
            for eps in [0.2, 0.1] {
                for n in 1..=2 {
                    expected.push((case.to_string(), eps, n));
                }
            }
        }
        assert_eq!(keys, expected);
        assert!(!report.failed());
        let eff = report.record("effective", 0.1, 1).unwrap();
        assert!(eff.lambda.is_none() && eff.mu.is_some());
        assert_eq!(report.strong_coupling.len(), 4);
    }

    #[test]
    fn sphere_blocks_merge_with_multiplicity() {
        let c = config("geometry.kind = sphere\nsweep.eps = 0.1\nsweep.n_max = 4\n");
        let report = run_sweep(&c).unwrap();
        let l: Vec<f64> = report.records.iter().map(|r| r.lambda.unwrap()).collect();
        assert!(l[1] > l[0]);
        assert_eq!(l[1], l[2]);
        assert_eq!(l[2], l[3]);
        let mu1 = report.records[0].mu.unwrap();
        assert!((mu1 + 2.0 / 0.1).abs() < 1e-9, "{mu1}");
    }
}
