//! Reference spectra for geometries that reduce to one dimension.
//!
//! Rectangles (flat tubes over a segment) have closed forms. Annuli and
//! spherical shells separate in polar coordinates; the radial problem
//!
//! ```text
//! -u'' - ((d - 1)/r) u' + c/r² u = λ u   on (r₀, r₀ + ε)
//! ```
//!
//! is discretized in the physical radius, reduced to a symmetric
//! tridiagonal matrix and solved by Sturm bisection at two resolutions.
//! None of this goes through the Fermi-coordinate assembly.

use serde::{Deserialize, Serialize};

use crate::assembly::{Bc, TubeCase};
use crate::geometry::{Geometry, GeometryKind, Orientation};
use crate::{Error, Result};

/// Smallest resolution the radial oracle accepts.
pub const MIN_RADIAL_RESOLUTION: usize = 64;

/// Default radial intervals.
pub const DEFAULT_RADIAL_RESOLUTION: usize = 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleSource {
    ClosedForm,
    RadialOde,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleSpectrum {
    /// Ascending, repeated by multiplicity.
    pub eigenvalues: Vec<f64>,
    pub source: OracleSource,
    /// Absolute accuracy estimate (largest over the reported values).
    pub accuracy: f64,
}

/// Conditions at `t = 0` and `t = 1` for a tube case.
fn transverse_conditions(case: TubeCase) -> (Bc, Bc) {
    match case {
        TubeCase::DirichletNeumann => (Bc::Dirichlet, Bc::Neumann),
        TubeCase::Dirichlet => (Bc::Dirichlet, Bc::Dirichlet),
        TubeCase::Neumann => (Bc::Neumann, Bc::Neumann),
    }
}

/// `j`-th (1-based) eigenvalue of `-d²/dt²` on `(0, ε)`.
fn transverse_closed_form(case: TubeCase, j: usize, eps: f64) -> f64 {
    let pi = std::f64::consts::PI;
    let j = j as f64;
    match case {
        TubeCase::DirichletNeumann => ((2.0 * j - 1.0) * pi / (2.0 * eps)).powi(2),
        TubeCase::Dirichlet => (j * pi / eps).powi(2),
        TubeCase::Neumann => ((j - 1.0) * pi / eps).powi(2),
    }
}

/// `k` smallest values of `(nπ/L)² + τ_j(ε)` with Dirichlet lateral ends
/// (`n ≥ 1`).
pub fn rectangle_spectrum(length: f64, eps: f64, case: TubeCase, k: usize) -> OracleSpectrum {
    rectangle_spectrum_with(length, eps, case, Bc::Dirichlet, k)
}

/// As [`rectangle_spectrum`] with a chosen lateral condition; Neumann ends
/// admit `n = 0`.
pub fn rectangle_spectrum_with(
    length: f64,
    eps: f64,
    case: TubeCase,
    lateral: Bc,
    k: usize,
) -> OracleSpectrum {
    let pi = std::f64::consts::PI;
    let n0 = match lateral {
        Bc::Dirichlet => 1,
        Bc::Neumann => 0,
    };
    let mut values: Vec<f64> = (n0..n0 + k)
        .flat_map(|n| {
            let along = (n as f64 * pi / length).powi(2);
            (1..=k).map(move |j| along + transverse_closed_form(case, j, eps))
        })
        .collect();
    values.sort_by(f64::total_cmp);
    values.truncate(k);
    OracleSpectrum {
        eigenvalues: values,
        source: OracleSource::ClosedForm,
        accuracy: 0.0,
    }
}

/// Symmetric tridiagonal matrix.
struct Tridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
}

impl Tridiagonal {
    /// Eigenvalues below `x`.
    fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.diag.len() {
            let e2 = if i == 0 { 0.0 } else { self.off[i - 1] * self.off[i - 1] };
            q = self.diag[i] - x - if i == 0 { 0.0 } else { e2 / q };
            if q == 0.0 {
                q = -f64::EPSILON * (self.diag[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.diag.len();
        (0..n).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), i| {
            let r = if i > 0 { self.off[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.off[i].abs() } else { 0.0 };
            (lo.min(self.diag[i] - r), hi.max(self.diag[i] + r))
        })
    }

    /// The `k` smallest eigenvalues by bisection.
    fn lowest(&self, k: usize) -> Vec<f64> {
        let (lo, hi) = self.gershgorin();
        (0..k.min(self.diag.len()))
            .map(|i| {
                let (mut a, mut b) = (lo, hi);
                while b - a > 4.0 * f64::EPSILON * a.abs().max(b.abs()).max(1.0) {
                    let mid = 0.5 * (a + b);
                    if mid <= a || mid >= b {
                        break;
                    }
                    if self.count_below(mid) > i {
                        b = mid;
                    } else {
                        a = mid;
                    }
                }
                0.5 * (a + b)
            })
            .collect()
    }
}

/// Lumped second-order discretization of the radial form, symmetrized.
fn radial_matrix(dim: u32, r0: f64, width: f64, inner: Bc, outer: Bc, c: f64, n: usize) -> Tridiagonal {
    let h = width / n as f64;
    let p = (dim - 1) as i32;
    let r = |j: f64| r0 + j * h;
    let first = if inner == Bc::Dirichlet { 1 } else { 0 };
    let last = if outer == Bc::Dirichlet { n - 1 } else { n };
    let nodes: Vec<usize> = (first..=last).collect();
    let mass: Vec<f64> = nodes
        .iter()
        .map(|&j| {
            let w = if j == 0 || j == n { 0.5 * h } else { h };
            w * r(j as f64).powi(p)
        })
        .collect();
    let edge = |j: usize| r(j as f64 + 0.5).powi(p) / h;
    let mut diag = vec![0.0; nodes.len()];
    let mut off = vec![0.0; nodes.len().saturating_sub(1)];
    for (idx, &j) in nodes.iter().enumerate() {
        let mut s = mass[idx] * c / r(j as f64).powi(2);
        if j > 0 {
            s += edge(j - 1);
        }
        if j < n {
            s += edge(j);
        }
        diag[idx] = s / mass[idx];
        if idx + 1 < nodes.len() {
            off[idx] = -edge(j) / (mass[idx] * mass[idx + 1]).sqrt();
        }
    }
    Tridiagonal { diag, off }
}

/// Lowest `k` eigenvalues of the radial operator on `(r₀, r₀ + ε)` with
/// `c = m²` (`dim = 2`) or `c = l(l+1)` (`dim = 3`).
///
/// Extrapolates over `(N, 2N)`; the accuracy is `max |λ_2N - λ_N| / 3`.
#[allow(clippy::too_many_arguments)]
pub fn radial_shell_spectrum(
    dim: u32,
    inner_radius: f64,
    eps: f64,
    inner_bc: Bc,
    outer_bc: Bc,
    mode: u32,
    k: usize,
    resolution: usize,
) -> Result<OracleSpectrum> {
    radial_pairs(dim, inner_radius, eps, inner_bc, outer_bc, mode, k, resolution).map(from_pairs)
}

/// Extrapolated eigenvalues with their own accuracy estimates.
#[allow(clippy::too_many_arguments)]
fn radial_pairs(
    dim: u32,
    inner_radius: f64,
    eps: f64,
    inner_bc: Bc,
    outer_bc: Bc,
    mode: u32,
    k: usize,
    resolution: usize,
) -> Result<Vec<(f64, f64)>> {
    if resolution < MIN_RADIAL_RESOLUTION {
        return Err(Error::OracleResolution(resolution));
    }
    if !(inner_radius > 0.0 && eps > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "shell needs positive inner radius and width, got {inner_radius} and {eps}"
        )));
    }
    let c = match dim {
        2 => (mode as f64).powi(2),
        3 => mode as f64 * (mode as f64 + 1.0),
        _ => {
            return Err(Error::InvalidArgument(format!(
                "radial oracle supports dim 2 or 3, got {dim}"
            )))
        }
    };
    let coarse = radial_matrix(dim, inner_radius, eps, inner_bc, outer_bc, c, resolution).lowest(k);
    let fine = radial_matrix(dim, inner_radius, eps, inner_bc, outer_bc, c, 2 * resolution).lowest(k);
    let pairs: Vec<(f64, f64)> = coarse
        .iter()
        .zip(&fine)
        .map(|(&lc, &lf)| ((4.0 * lf - lc) / 3.0, (lf - lc).abs() / 3.0))
        .collect();
    Ok(pairs)
}

/// Spectrum from `(value, accuracy)` pairs.
fn from_pairs(pairs: Vec<(f64, f64)>) -> OracleSpectrum {
    OracleSpectrum {
        eigenvalues: pairs.iter().map(|p| p.0).collect(),
        source: OracleSource::RadialOde,
        accuracy: pairs.iter().map(|p| p.1).fold(0.0, f64::max),
    }
}

/// Radial data of a circle or sphere tube: `(dim, inner radius, inner bc,
/// outer bc)`.
fn shell_setup(geom: &Geometry, eps: f64, case: TubeCase) -> Result<(u32, f64, Bc, Bc)> {
    let (dim, radius) = match geom.kind {
        GeometryKind::Circle { radius } => (2, radius),
        GeometryKind::Sphere { radius } => (3, radius),
        _ => {
            return Err(Error::UnsupportedGeometry(format!(
                "no radial oracle for {}",
                geom.id()
            )))
        }
    };
    let (base, far) = transverse_conditions(case);
    Ok(match geom.orientation {
        Orientation::Outward => (dim, radius, base, far),
        Orientation::Inward => {
            if eps >= radius {
                return Err(Error::DegenerateTube { eps, h: 1.0 - eps / radius });
            }
            (dim, radius - eps, far, base)
        }
    })
}

/// Single symmetry block (`m` for circles, `l` for spheres) of the tube
/// around a circle or sphere.
pub fn shell_block_spectrum(
    geom: &Geometry,
    eps: f64,
    case: TubeCase,
    mode: u32,
    k: usize,
    resolution: usize,
) -> Result<OracleSpectrum> {
    let (dim, r0, inner, outer) = shell_setup(geom, eps, case)?;
    radial_shell_spectrum(dim, r0, eps, inner, outer, mode, k, resolution)
}

/// Lowest `k` eigenvalues of the whole tube around a circle or sphere,
/// blocks merged with multiplicities `2` (`m ≥ 1`) or `2l + 1`.
pub fn shell_tube_spectrum(
    geom: &Geometry,
    eps: f64,
    case: TubeCase,
    k: usize,
    resolution: usize,
) -> Result<OracleSpectrum> {
    let (dim, r0, inner, outer) = shell_setup(geom, eps, case)?;
    let mut merged: Vec<(f64, f64)> = Vec::new();
    for mode in 0u32.. {
        let block = radial_pairs(dim, r0, eps, inner, outer, mode, k, resolution)?;
        // Block bottoms increase with the mode.
        if merged.len() >= k && block[0].0 > merged[k - 1].0 {
            break;
        }
        let mult = match (dim, mode) {
            (_, 0) => 1,
            (2, _) => 2,
            _ => 2 * mode as usize + 1,
        };
        for v in block {
            merged.extend(std::iter::repeat_n(v, mult));
        }
        merged.sort_by(|a, b| a.0.total_cmp(&b.0));
        merged.truncate(k);
    }
    Ok(from_pairs(merged))
}

/// Oracle spectrum for any geometry that has one.
pub fn tube_oracle(
    geom: &Geometry,
    eps: f64,
    case: TubeCase,
    k: usize,
    resolution: usize,
) -> Result<OracleSpectrum> {
    match geom.kind {
        GeometryKind::Segment { length } => {
            let lateral = match case {
                TubeCase::Neumann => Bc::Neumann,
                _ => Bc::Dirichlet,
            };
            Ok(rectangle_spectrum_with(length, eps, case, lateral, k))
        }
        GeometryKind::Circle { .. } | GeometryKind::Sphere { .. } => {
            shell_tube_spectrum(geom, eps, case, k, resolution)
        }
        _ => Err(Error::UnsupportedGeometry(format!(
            "no oracle for {}",
            geom.id()
        ))),
    }
}
