use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use tubelab::harness::acceptance::{run_all, run_criterion, VerifyOptions};
use tubelab::harness::{emit_all, run_sweep, RawConfig, SweepCase};
use tubelab::oracles::{tube_oracle, DEFAULT_RADIAL_RESOLUTION};

#[derive(Parser)]
#[command(name = "tubelab", version, about = "Thin-tube spectral sweeps, oracles and acceptance checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an ε-sweep and write reports.
    Sweep(SweepArgs),
    /// Print closed-form or radial-oracle eigenvalues.
    Oracle(OracleArgs),
    /// Run the acceptance suite; exits nonzero if any criterion fails.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct SweepArgs {
    /// Config file; flags below override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated cases: dn, dirichlet, neumann, effective.
    #[arg(long)]
    case: Option<String>,
    /// Geometry spec `kind:key=value,...`, e.g. `ellipse:a=1,b=0.5,orientation=inward`.
    #[arg(long)]
    geometry: Option<String>,
    /// Comma-separated, strictly decreasing ε values.
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    n_max: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated: csv, json, plot.
    #[arg(long)]
    format: Option<String>,
    /// Worker threads (default: TUBELAB_WORKERS, then all cores).
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    geometry: String,
    /// Comma-separated ε values.
    #[arg(long)]
    eps: String,
    #[arg(long, default_value = "dn")]
    case: String,
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long, default_value_t = DEFAULT_RADIAL_RESOLUTION)]
    resolution: usize,
}

#[derive(Args)]
struct VerifyArgs {
    /// Config supplying `run.workers` and `output.dir` for the sweep CSVs.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Run only these criteria (comma-separated numbers).
    #[arg(long)]
    only: Option<String>,
}

fn sweep(args: SweepArgs) -> Result<ExitCode> {
    let mut raw = match &args.config {
        Some(path) => RawConfig::load(path)?,
        None => RawConfig::default(),
    };
    if let Some(g) = &args.geometry {
        raw.set_geometry(g)?;
    }
    let overrides = [
        ("sweep.cases", args.case.clone()),
        ("sweep.eps", args.eps.clone()),
        ("sweep.n_max", args.n_max.map(|n| n.to_string())),
        ("output.formats", args.format.clone()),
        ("run.workers", args.workers.map(|w| w.to_string())),
        ("solver.seed", args.seed.map(|s| s.to_string())),
    ];
    for (key, value) in overrides {
        if let Some(v) = value {
            raw.set(key, &v)?;
        }
    }
    if let Some(out) = &args.out {
        raw.set("output.dir", &out.to_string_lossy())?;
    }
    let config = raw.build()?;
    let report = run_sweep(&config)?;

    println!("{}  (config {})", report.geometry, &report.provenance.config_hash[..12]);
    println!("{:<10} {:>8} {:>3} {:>22} {:>22} {:>14}", "case", "eps", "n", "lambda", "mu", "residual");
    let show = |x: Option<f64>| x.map_or_else(|| "-".to_string(), |v| format!("{v:.10}"));
    for r in &report.records {
        println!(
            "{:<10} {:>8} {:>3} {:>22} {:>22} {:>14}{}",
            r.case,
            r.eps,
            r.n,
            show(r.lambda),
            show(r.mu),
            show(r.residual),
            r.error.as_ref().map(|e| format!("  error: {e}")).unwrap_or_default()
        );
    }
    for path in emit_all(&report, &config.out_dir, &config.formats)? {
        println!("wrote {}", path.display());
    }
    Ok(if report.failed() {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    })
}

fn oracle(args: OracleArgs) -> Result<ExitCode> {
    let mut raw = RawConfig::default();
    raw.set_geometry(&args.geometry)?;
    let geometry = raw.build()?.geometry;
    let case = match SweepCase::parse(&args.case)? {
        SweepCase::Tube(c) => c,
        SweepCase::Effective => bail!("oracles exist for tube cases only"),
    };
    for eps in args.eps.split(',').filter(|s| !s.trim().is_empty()) {
        let eps: f64 = eps.trim().parse().with_context(|| format!("bad eps '{eps}'"))?;
        let o = tube_oracle(&geometry, eps, case, args.k, args.resolution)?;
        let values: Vec<String> = o.eigenvalues.iter().map(|v| format!("{v:.12}")).collect();
        println!(
            "{} eps={eps} {:?} accuracy={:.1e}: {}",
            case.name(),
            o.source,
            o.accuracy,
            values.join(" ")
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn verify(args: VerifyArgs) -> Result<ExitCode> {
    let opts = match &args.config {
        Some(path) => VerifyOptions::from_config(path)?,
        None => VerifyOptions::default(),
    };
    let outcomes = match &args.only {
        None => run_all(&opts),
        Some(list) => list
            .split(',')
            .map(|s| {
                let id: u32 = s.trim().parse().with_context(|| format!("bad criterion '{s}'"))?;
                run_criterion(id, &opts).with_context(|| format!("no criterion {id}"))
            })
            .collect::<Result<_>>()?,
    };
    let mut failed = 0;
    for o in &outcomes {
        println!("{}", o.line());
        if !o.passed {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed", outcomes.len() - failed, outcomes.len());
    Ok(if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sweep(a) => sweep(a),
        Command::Oracle(a) => oracle(a),
        Command::Verify(a) => verify(a),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::FAILURE
    })
}
