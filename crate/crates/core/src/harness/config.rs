//! Flat `key = value` configuration with dotted keys.
//!
//! ```text
//! # circle sweep
//! geometry.kind = circle
//! geometry.radius = 1
//! geometry.orientation = outward
//! sweep.eps = 0.2, 0.1, 0.05, 0.025
//! sweep.n_max = 3
//! [solver]
//! tol = 1e-9
//! ```
//!
//! A `[section]` line prefixes the keys below it. `#` and `;` start
//! comments.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::solve::Refinement;
use crate::assembly::TubeCase;
use crate::eigensolve::DEFAULT_SEED;
use crate::geometry::{Geometry, GeometryKind, Orientation, Profile};
use crate::{Error, Result};

/// One column of a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SweepCase {
    Tube(TubeCase),
    /// Only the effective operator `-Δ_g + κ/ε` and `-Δ_g`, no tube.
    Effective,
}

impl SweepCase {
    pub fn name(self) -> &'static str {
        match self {
            SweepCase::Tube(c) => c.name(),
            SweepCase::Effective => "effective",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dn" => Ok(SweepCase::Tube(TubeCase::DirichletNeumann)),
            "dirichlet" | "dd" => Ok(SweepCase::Tube(TubeCase::Dirichlet)),
            "neumann" | "nn" => Ok(SweepCase::Tube(TubeCase::Neumann)),
            "effective" | "effective-only" => Ok(SweepCase::Effective),
            other => Err(Error::InvalidArgument(format!("unknown case '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Format {
    Csv,
    Json,
    Plot,
}

impl Format {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "plot" | "plotscript" => Ok(Format::Plot),
            other => Err(Error::InvalidArgument(format!("unknown format '{other}'"))),
        }
    }
}

/// Validated configuration.
#[derive(Clone, Debug)]
pub struct Config {
    pub geometry: Geometry,
    /// Canonical `kind:key=value,...` description of `geometry`.
    pub geometry_spec: String,
    pub eps: Vec<f64>,
    pub n_max: usize,
    pub cases: Vec<SweepCase>,
    pub refinement: Refinement,
    /// Number of symmetry blocks solved before the cutoff check.
    pub mode_cutoff: u32,
    /// Extra blocks the cutoff check may add.
    pub max_extra_modes: u32,
    pub out_dir: PathBuf,
    pub formats: Vec<Format>,
    pub workers: Option<usize>,
    pub strong_coupling_fraction: f64,
}

impl Config {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        RawConfig::load(path)?.build()
    }

    /// Deterministic text of every resolved setting except output and
    /// worker options, which do not change results.
    pub fn canonical(&self) -> String {
        let r = &self.refinement;
        let mut s = String::new();
        let _ = writeln!(s, "geometry = {}", self.geometry_spec);
        let eps: Vec<String> = self.eps.iter().map(|e| format!("{e:?}")).collect();
        let _ = writeln!(s, "eps = {}", eps.join(","));
        let _ = writeln!(s, "n_max = {}", self.n_max);
        let cases: Vec<&str> = self.cases.iter().map(|c| c.name()).collect();
        let _ = writeln!(s, "cases = {}", cases.join(","));
        let _ = writeln!(s, "n_surface = {}", r.n_surface);
        let _ = writeln!(s, "n_t = {}", r.n_t);
        let _ = writeln!(s, "max_levels = {}", r.max_levels);
        let _ = writeln!(s, "mode_cutoff = {}", self.mode_cutoff);
        let _ = writeln!(s, "max_extra_modes = {}", self.max_extra_modes);
        let _ = writeln!(s, "tol = {:?}", r.solver_tol);
        let _ = writeln!(s, "tol_disc = {:?}", r.tol_disc);
        let _ = writeln!(s, "extrapolate = {}", r.extrapolate);
        let _ = writeln!(s, "seed = {}", r.seed);
        let _ = writeln!(s, "strong_coupling_fraction = {:?}", self.strong_coupling_fraction);
        s
    }

    /// SHA-256 of [`Config::canonical`], hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }
}

/// Unvalidated key/value pairs, in file order of last assignment.
#[derive(Clone, Debug, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, (usize, String)>,
}

const KNOWN_KEYS: &[&str] = &[
    "geometry.kind",
    "geometry.radius",
    "geometry.length",
    "geometry.a",
    "geometry.b",
    "geometry.major",
    "geometry.minor",
    "geometry.samples",
    "geometry.profile",
    "geometry.orientation",
    "geometry.eps_ceiling",
    "sweep.eps",
    "sweep.n_max",
    "sweep.cases",
    "resolution.n_surface",
    "resolution.n_t",
    "resolution.mode_cutoff",
    "resolution.max_extra_modes",
    "resolution.max_levels",
    "solver.tol",
    "solver.tol_disc",
    "solver.extrapolate",
    "solver.seed",
    "output.dir",
    "output.formats",
    "run.workers",
    "checks.strong_coupling_fraction",
];

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut raw = RawConfig::default();
        let mut section = String::new();
        for (idx, line) in text.lines().enumerate() {
            let lineno = idx + 1;
            let line = line
                .split(['#', ';'])
                .next()
                .unwrap_or("")
                .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| Error::Config {
                    line: lineno,
                    message: "unterminated section header".into(),
                })?;
                section = name.trim().to_string();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
                line: lineno,
                message: format!("expected 'key = value', got '{line}'"),
            })?;
            let key = key.trim();
            let key = if section.is_empty() || key.contains('.') {
                key.to_string()
            } else {
                format!("{section}.{key}")
            };
            raw.insert(lineno, &key, value.trim())?;
        }
        Ok(raw)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    fn insert(&mut self, line: usize, key: &str, value: &str) -> Result<()> {
        if !KNOWN_KEYS.contains(&key) {
            return Err(Error::Config {
                line,
                message: format!("unknown key '{key}'"),
            });
        }
        self.entries.insert(key.to_string(), (line, value.to_string()));
        Ok(())
    }

    /// Overrides one key, as from a command-line flag.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        self.insert(0, key, value)
    }

    /// Replaces all `geometry.*` keys by a `kind:key=value,...` spec.
    pub fn set_geometry(&mut self, spec: &str) -> Result<()> {
        self.entries.retain(|k, _| !k.starts_with("geometry."));
        let (kind, params) = spec.split_once(':').unwrap_or((spec, ""));
        self.set("geometry.kind", kind.trim())?;
        for param in params.split(',').filter(|p| !p.trim().is_empty()) {
            let (k, v) = param.split_once('=').ok_or_else(|| {
                Error::InvalidArgument(format!("geometry parameter '{param}' is not key=value"))
            })?;
            self.set(&format!("geometry.{}", k.trim()), v.trim())?;
        }
        Ok(())
    }

    fn get(&self, key: &str) -> Option<(usize, &str)> {
        self.entries.get(key).map(|(l, v)| (*l, v.as_str()))
    }

    fn num<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.get(key) {
            None => Ok(default),
            Some((line, v)) => v.parse().map_err(|_| Error::Config {
                line,
                message: format!("{key}: cannot parse '{v}'"),
            }),
        }
    }

    fn list<T>(&self, key: &str, default: Vec<T>, parse: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
        match self.get(key) {
            None => Ok(default),
            Some((line, v)) => v
                .split(',')
                .filter(|s| !s.trim().is_empty())
                .map(|s| {
                    parse(s.trim()).map_err(|e| Error::Config {
                        line,
                        message: format!("{key}: {e}"),
                    })
                })
                .collect(),
        }
    }

    fn invalid(&self, key: &str, message: String) -> Error {
        Error::Config {
            line: self.get(key).map_or(0, |(l, _)| l),
            message,
        }
    }

    fn geometry(&self) -> Result<(Geometry, String)> {
        let kind = self.get("geometry.kind").map_or("circle", |(_, v)| v).to_ascii_lowercase();
        let orientation = match self.get("geometry.orientation").map(|(_, v)| v.to_ascii_lowercase()) {
            None => Orientation::Outward,
            Some(o) if o == "outward" => Orientation::Outward,
            Some(o) if o == "inward" => Orientation::Inward,
            Some(o) => return Err(self.invalid("geometry.orientation", format!("unknown orientation '{o}'"))),
        };
        let samples: usize = self.num("geometry.samples", 256)?;
        let (geom_kind, params) = match kind.as_str() {
            "segment" => {
                let length = self.num("geometry.length", std::f64::consts::PI)?;
                (GeometryKind::Segment { length }, format!("length={length:?}"))
            }
            "circle" => {
                let radius = self.num("geometry.radius", 1.0)?;
                (GeometryKind::Circle { radius }, format!("radius={radius:?}"))
            }
            "ellipse" => {
                let a = self.num("geometry.a", 1.0)?;
                let b = self.num("geometry.b", 0.5)?;
                (GeometryKind::Ellipse { a, b }, format!("a={a:?},b={b:?}"))
            }
            "sphere" => {
                let radius = self.num("geometry.radius", 1.0)?;
                (GeometryKind::Sphere { radius }, format!("radius={radius:?}"))
            }
            "torus" => {
                let major = self.num("geometry.major", 2.0)?;
                let minor = self.num("geometry.minor", 1.0)?;
                let profile = Profile::torus(major, minor, samples)?;
                (
                    GeometryKind::Revolution(profile),
                    format!("major={major:?},minor={minor:?},samples={samples}"),
                )
            }
            "cylinder" => {
                let radius = self.num("geometry.radius", 1.0)?;
                let length = self.num("geometry.length", std::f64::consts::PI)?;
                let profile = Profile::cylinder(radius, length, samples)?;
                (
                    GeometryKind::Revolution(profile),
                    format!("radius={radius:?},length={length:?},samples={samples}"),
                )
            }
            "revolution" => {
                let (_, path) = self
                    .get("geometry.profile")
                    .ok_or_else(|| self.invalid("geometry.kind", "revolution needs geometry.profile".into()))?;
                (GeometryKind::Revolution(Profile::load(path)?), format!("profile={path}"))
            }
            other => return Err(self.invalid("geometry.kind", format!("unknown geometry kind '{other}'"))),
        };
        let ceiling: f64 = self.num("geometry.eps_ceiling", 1.0)?;
        let geometry = Geometry::new(geom_kind, orientation)?.with_eps_ceiling(ceiling);
        let spec = format!("{kind}:{params},orientation={orientation},eps_ceiling={ceiling:?}");
        Ok((geometry, spec))
    }

    /// Applies defaults and validates.
    pub fn build(&self) -> Result<Config> {
        let (geometry, geometry_spec) = self.geometry()?;
        let parse_f64 = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("'{s}' is not a number")))
        };
        let eps = self.list("sweep.eps", vec![0.2, 0.1, 0.05, 0.025], parse_f64)?;
        if eps.is_empty() {
            return Err(self.invalid("sweep.eps", "sweep.eps is empty".into()));
        }
        let max_eps = geometry.max_admissible_eps();
        for &e in &eps {
            if !(e > 0.0 && e < max_eps) {
                return Err(self.invalid(
                    "sweep.eps",
                    format!("eps {e} outside (0, {max_eps}) for this geometry"),
                ));
            }
        }
        if eps.windows(2).any(|w| w[1] >= w[0]) {
            return Err(self.invalid("sweep.eps", "sweep.eps must be strictly decreasing".into()));
        }
        let n_max: usize = self.num("sweep.n_max", 5)?;
        if n_max == 0 {
            return Err(self.invalid("sweep.n_max", "sweep.n_max must be at least 1".into()));
        }
        let mut cases = self.list(
            "sweep.cases",
            vec![SweepCase::Tube(TubeCase::DirichletNeumann)],
            SweepCase::parse,
        )?;
        cases.sort();
        cases.dedup();
        if cases.is_empty() {
            return Err(self.invalid("sweep.cases", "sweep.cases is empty".into()));
        }

        let defaults = Refinement::default();
        let refinement = Refinement {
            n_surface: self.num("resolution.n_surface", defaults.n_surface)?,
            n_t: self.num("resolution.n_t", defaults.n_t)?,
            tol_disc: self.num("solver.tol_disc", defaults.tol_disc)?,
            extrapolate: self.num("solver.extrapolate", defaults.extrapolate)?,
            max_levels: self.num("resolution.max_levels", defaults.max_levels)?,
            solver_tol: self.num("solver.tol", defaults.solver_tol)?,
            seed: self.num("solver.seed", DEFAULT_SEED)?,
        };
        refinement.base()?;
        if !(refinement.solver_tol > 0.0 && refinement.tol_disc > 0.0) {
            return Err(self.invalid("solver.tol", "tolerances must be positive".into()));
        }

        let formats = self.list("output.formats", vec![Format::Csv, Format::Json], Format::parse)?;
        let workers = match self.get("run.workers") {
            None => None,
            Some(_) => Some(self.num("run.workers", 1usize)?.max(1)),
        };
        Ok(Config {
            geometry,
            geometry_spec,
            eps,
            n_max,
            cases,
            refinement,
            mode_cutoff: self.num("resolution.mode_cutoff", 8)?,
            max_extra_modes: self.num("resolution.max_extra_modes", 8)?,
            out_dir: PathBuf::from(self.get("output.dir").map_or("tubelab-out", |(_, v)| v)),
            formats,
            workers,
            strong_coupling_fraction: self.num("checks.strong_coupling_fraction", 0.1)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_sections() {
        let raw = RawConfig::parse(
            "# comment\ngeometry.kind = ellipse\ngeometry.orientation = inward ; trailing\n[sweep]\nn_max = 3\n",
        )
        .unwrap();
        let c = raw.build().unwrap();
        assert_eq!(c.n_max, 3);
        assert_eq!(c.eps, vec![0.2, 0.1, 0.05, 0.025]);
        assert_eq!(c.geometry.orientation, Orientation::Inward);
        assert_eq!(c.cases, vec![SweepCase::Tube(TubeCase::DirichletNeumann)]);
        assert_eq!(c.mode_cutoff, 8);
    }

    #[test]
    fn rejects_bad_values_with_line_numbers() {
        let err = RawConfig::parse("\nsweep.eps = 0.1, 0.2\n").unwrap().build().unwrap_err();
        assert!(matches!(err, Error::Config { line: 2, .. }), "{err}");
        let err = RawConfig::parse("geometry.kind = circle\ngeometry.orientation = inward\nsweep.eps = 1.5\n")
            .unwrap()
            .build()
            .unwrap_err();
        assert!(matches!(err, Error::Config { line: 3, .. }), "{err}");
        assert!(RawConfig::parse("sweep.n_max = 0").unwrap().build().is_err());
        assert!(matches!(RawConfig::parse("bogus = 1"), Err(Error::Config { line: 1, .. })));
        assert!(matches!(RawConfig::parse("no equals sign"), Err(Error::Config { line: 1, .. })));
    }

    #[test]
    fn geometry_spec_overrides_file_keys() {
        let mut raw = RawConfig::parse("geometry.kind = circle\ngeometry.radius = 3\n").unwrap();
        raw.set_geometry("ellipse:a=2,b=1,orientation=inward").unwrap();
        let c = raw.build().unwrap();
        assert_eq!(c.geometry.kind, GeometryKind::Ellipse { a: 2.0, b: 1.0 });
        assert_eq!(c.geometry.orientation, Orientation::Inward);
    }

    #[test]
    fn hash_ignores_output_settings_only() {
        let a = RawConfig::parse("output.dir = x").unwrap().build().unwrap();
        let b = RawConfig::parse("output.dir = y").unwrap().build().unwrap();
        let c = RawConfig::parse("solver.seed = 7").unwrap().build().unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
