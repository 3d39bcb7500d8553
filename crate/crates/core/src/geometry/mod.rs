//! Supported hypersurfaces and the Fermi-coordinate data of their tubes.
//!
//! Every supported kind is described in curvature-line coordinates, so both
//! the surface metric `g` and the tube metric `G` are diagonal:
//!
//! ```text
//! G = Σ_μ (1 - ε κ_μ t)² g_μμ (dx^μ)² + ε² dt²,    |G| = ε² |g| h_ε²,
//! h_ε(x, t) = Π_μ (1 - ε κ_μ t).
//! ```
//!
//! Principal curvatures carry the sign that makes `h_ε` the Jacobian of the
//! tube map `(x, t) ↦ x + ε t n(x)`. With the outward normal a circle of
//! radius `R` therefore has `κ = -1/R`; flipping the orientation negates every
//! curvature.

mod profile;

pub use profile::{Profile, ProfilePoint, ProfileSample};

use std::f64::consts::{PI, TAU};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Ceiling returned by [`Geometry::max_admissible_eps`] when the geometry
/// itself puts no bound on the tube width.
pub const DEFAULT_EPS_CEILING: f64 = 1.0;

/// Side of `Σ` on which the parallel surface is built.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    /// Normal pointing away from the enclosed region. For a surface of
    /// revolution this is the right-hand normal `(z', -r')` of the profile,
    /// which points outward for counter-clockwise closed profiles.
    Outward,
    Inward,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Outward => 1.0,
            Orientation::Inward => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Orientation::Outward => Orientation::Inward,
            Orientation::Inward => Orientation::Outward,
        }
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Orientation::Outward => f.write_str("outward"),
            Orientation::Inward => f.write_str("inward"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum GeometryKind {
    /// Straight segment `[0, L]` in the plane, parameterized by arclength.
    Segment { length: f64 },
    /// Circle parameterized by angle `θ ∈ [0, 2π]`.
    Circle { radius: f64 },
    /// Ellipse `(a cos θ, b sin θ)` parameterized by `θ ∈ [0, 2π]`.
    Ellipse { a: f64, b: f64 },
    /// Round sphere in polar/azimuthal coordinates `(ϑ, φ)`.
    Sphere { radius: f64 },
    /// Surface of revolution `(r(s) cos φ, r(s) sin φ, z(s))`.
    Revolution(Profile),
}

/// A supported hypersurface together with its orientation.
#[derive(Clone, Debug, PartialEq)]
pub struct Geometry {
    pub kind: GeometryKind,
    pub orientation: Orientation,
    /// Cap for [`Geometry::max_admissible_eps`] when unconstrained.
    pub eps_ceiling: f64,
}

/// Principal curvatures at one point of `Σ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvatureSample {
    pub point: Vec<f64>,
    pub kappas: Vec<f64>,
    /// `κ = κ_1 + … + κ_{d-1}`.
    pub kappa_sum: f64,
}

impl CurvatureSample {
    pub fn new(point: Vec<f64>, kappas: Vec<f64>) -> Self {
        let kappa_sum = kappas.iter().sum();
        CurvatureSample {
            point,
            kappas,
            kappa_sum,
        }
    }
}

/// Diagonal metric data of the tube at `(x, t)` for a given `ε`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FermiMetric {
    /// `g_μμ` of the surface.
    pub g_diag: Vec<f64>,
    /// `G_μμ = (1 - ε κ_μ t)² g_μμ`, followed by `G_tt = ε²`.
    pub tube_diag: Vec<f64>,
    pub h: f64,
    /// `ε |g|^{1/2} h`.
    pub sqrt_det: f64,
}

/// Grid extrema of the curvatures, see [`Geometry::kappa_extrema`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KappaExtrema {
    /// Infimum of `κ = Σ κ_μ`.
    pub inf_kappa: f64,
    /// Supremum of `κ = Σ κ_μ`.
    pub sup_kappa: f64,
    /// `‖κ_μ‖_∞` for each principal curvature.
    pub sup_norms: Vec<f64>,
    /// `‖κ‖_∞` of the curvature sum.
    pub kappa_norm: f64,
    /// `‖V_eff‖_∞` of the Dirichlet effective potential.
    pub v_eff_norm: f64,
    /// Infimum of the Dirichlet effective potential.
    pub v_eff_inf: f64,
}

impl KappaExtrema {
    /// `C = sup_μ ‖κ_μ‖_∞`.
    pub fn max_principal(&self) -> f64 {
        self.sup_norms.iter().copied().fold(0.0, f64::max)
    }
}

/// `-(Σ κ_μ²)/2 + (Σ κ_μ)²/4`.
pub fn v_eff_from_kappas(kappas: &[f64]) -> f64 {
    let sum: f64 = kappas.iter().sum();
    let sum_sq: f64 = kappas.iter().map(|k| k * k).sum();
    -0.5 * sum_sq + 0.25 * sum * sum
}

impl Geometry {
    pub fn new(kind: GeometryKind, orientation: Orientation) -> Result<Self> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")))
            }
        };
        match &kind {
            GeometryKind::Segment { length } => positive("length", *length)?,
            GeometryKind::Circle { radius } | GeometryKind::Sphere { radius } => {
                positive("radius", *radius)?
            }
            GeometryKind::Ellipse { a, b } => {
                positive("a", *a)?;
                positive("b", *b)?;
            }
            GeometryKind::Revolution(_) => {}
        }
        Ok(Geometry {
            kind,
            orientation,
            eps_ceiling: DEFAULT_EPS_CEILING,
        })
    }

    pub fn segment(length: f64) -> Result<Self> {
        Self::new(GeometryKind::Segment { length }, Orientation::Outward)
    }

    pub fn circle(radius: f64, orientation: Orientation) -> Result<Self> {
        Self::new(GeometryKind::Circle { radius }, orientation)
    }

    pub fn ellipse(a: f64, b: f64, orientation: Orientation) -> Result<Self> {
        Self::new(GeometryKind::Ellipse { a, b }, orientation)
    }

    pub fn sphere(radius: f64, orientation: Orientation) -> Result<Self> {
        Self::new(GeometryKind::Sphere { radius }, orientation)
    }

    pub fn revolution(profile: Profile, orientation: Orientation) -> Result<Self> {
        Self::new(GeometryKind::Revolution(profile), orientation)
    }

    pub fn with_eps_ceiling(mut self, ceiling: f64) -> Self {
        self.eps_ceiling = ceiling;
        self
    }

    pub fn with_orientation(mut self, orientation: Orientation) -> Self {
        self.orientation = orientation;
        self
    }

    /// Short identifier used in reports and operator metadata.
    pub fn id(&self) -> String {
        let o = self.orientation;
        match &self.kind {
            GeometryKind::Segment { length } => format!("segment(L={length})"),
            GeometryKind::Circle { radius } => format!("circle(R={radius},{o})"),
            GeometryKind::Ellipse { a, b } => format!("ellipse(a={a},b={b},{o})"),
            GeometryKind::Sphere { radius } => format!("sphere(R={radius},{o})"),
            GeometryKind::Revolution(p) => format!(
                "revolution({},length={},{o})",
                if p.is_closed() { "closed" } else { "open" },
                p.length()
            ),
        }
    }

    /// Dimension `d` of the ambient space.
    pub fn ambient_dim(&self) -> usize {
        self.surface_dim() + 1
    }

    /// Dimension `d - 1` of `Σ`.
    pub fn surface_dim(&self) -> usize {
        match self.kind {
            GeometryKind::Segment { .. }
            | GeometryKind::Circle { .. }
            | GeometryKind::Ellipse { .. } => 1,
            GeometryKind::Sphere { .. } | GeometryKind::Revolution(_) => 2,
        }
    }

    /// Whether `∂Σ` is non-empty.
    pub fn has_boundary(&self) -> bool {
        match &self.kind {
            GeometryKind::Segment { .. } => true,
            GeometryKind::Revolution(p) => !p.is_closed(),
            _ => false,
        }
    }

    /// Curvatures are constant over `Σ` (closed-form kinds only).
    pub fn is_constant_curvature(&self) -> bool {
        match &self.kind {
            GeometryKind::Segment { .. }
            | GeometryKind::Circle { .. }
            | GeometryKind::Sphere { .. } => true,
            GeometryKind::Ellipse { a, b } => a == b,
            GeometryKind::Revolution(_) => false,
        }
    }

    /// Parameter box of the intrinsic coordinates, one `(lo, hi)` per axis.
    pub fn parameter_domain(&self) -> Vec<(f64, f64)> {
        match &self.kind {
            GeometryKind::Segment { length } => vec![(0.0, *length)],
            GeometryKind::Circle { .. } | GeometryKind::Ellipse { .. } => vec![(0.0, TAU)],
            GeometryKind::Sphere { .. } => vec![(0.0, PI), (0.0, TAU)],
            GeometryKind::Revolution(p) => vec![(0.0, p.length()), (0.0, TAU)],
        }
    }

    fn check_point(&self, point: &[f64]) -> Result<()> {
        let domain = self.parameter_domain();
        let inside = point.len() == domain.len()
            && point
                .iter()
                .zip(&domain)
                .all(|(&x, &(lo, hi))| x.is_finite() && x >= lo && x <= hi);
        if inside {
            Ok(())
        } else {
            Err(Error::Domain {
                geometry: self.id(),
                point: point.to_vec(),
            })
        }
    }

    /// Principal curvatures at `point` under the Jacobian sign convention.
    pub fn principal_curvatures(&self, point: &[f64]) -> Result<CurvatureSample> {
        self.check_point(point)?;
        let sigma = self.orientation.sign();
        let kappas = match &self.kind {
            GeometryKind::Segment { .. } => vec![0.0],
            GeometryKind::Circle { radius } => vec![-sigma / radius],
            GeometryKind::Ellipse { a, b } => {
                let theta = point[0];
                let speed_sq = ellipse_speed_sq(*a, *b, theta);
                vec![-sigma * a * b / (speed_sq * speed_sq.sqrt())]
            }
            GeometryKind::Sphere { radius } => vec![-sigma / radius, -sigma / radius],
            GeometryKind::Revolution(p) => {
                let q = p.eval(point[0]);
                vec![-sigma * q.curvature, -sigma * q.dz / q.r]
            }
        };
        Ok(CurvatureSample::new(point.to_vec(), kappas))
    }

    /// Diagonal coefficients `g_μμ` of the induced metric.
    pub fn surface_metric(&self, point: &[f64]) -> Result<Vec<f64>> {
        self.check_point(point)?;
        Ok(match &self.kind {
            GeometryKind::Segment { .. } => vec![1.0],
            GeometryKind::Circle { radius } => vec![radius * radius],
            GeometryKind::Ellipse { a, b } => vec![ellipse_speed_sq(*a, *b, point[0])],
            GeometryKind::Sphere { radius } => {
                let s = point[0].sin();
                vec![radius * radius, radius * radius * s * s]
            }
            GeometryKind::Revolution(p) => {
                let r = p.eval(point[0]).r;
                vec![1.0, r * r]
            }
        })
    }

    /// `h_ε(x, t) = Π_μ (1 - ε κ_μ t)`.
    pub fn h_eps(&self, point: &[f64], t: f64, eps: f64) -> Result<f64> {
        check_t_eps(t, eps)?;
        let sample = self.principal_curvatures(point)?;
        let h = h_from_kappas(&sample.kappas, t, eps);
        if h <= 0.0 {
            return Err(Error::DegenerateTube { eps, h });
        }
        Ok(h)
    }

    pub fn fermi_metric(&self, point: &[f64], t: f64, eps: f64) -> Result<FermiMetric> {
        check_t_eps(t, eps)?;
        let sample = self.principal_curvatures(point)?;
        let g_diag = self.surface_metric(point)?;
        let h = h_from_kappas(&sample.kappas, t, eps);
        if h <= 0.0 {
            return Err(Error::DegenerateTube { eps, h });
        }
        let mut tube_diag: Vec<f64> = g_diag
            .iter()
            .zip(&sample.kappas)
            .map(|(g, k)| {
                let f = 1.0 - eps * k * t;
                f * f * g
            })
            .collect();
        tube_diag.push(eps * eps);
        let det_g: f64 = g_diag.iter().product();
        Ok(FermiMetric {
            sqrt_det: eps * det_g.sqrt() * h,
            g_diag,
            tube_diag,
            h,
        })
    }

    /// Largest `ε₀` such that every `ε < ε₀` gives a non-degenerate tube.
    ///
    /// Only the local condition `h_ε > 0` and the closed-form convex bounds
    /// are checked; global injectivity of non-convex profiles is not.
    pub fn max_admissible_eps(&self) -> f64 {
        let sigma = self.orientation.sign();
        let bound = match &self.kind {
            GeometryKind::Segment { .. } => None,
            GeometryKind::Circle { radius } | GeometryKind::Sphere { radius } => {
                (sigma < 0.0).then_some(*radius)
            }
            GeometryKind::Ellipse { a, b } => {
                // Largest inward curvature max(a,b)/min(a,b)² sits at the ends of the major axis.
                let (major, minor) = if a >= b { (*a, *b) } else { (*b, *a) };
                (sigma < 0.0).then_some(minor * minor / major)
            }
            GeometryKind::Revolution(p) => {
                let max_k = p
                    .knots()
                    .filter_map(|s| self.principal_curvatures(&[s, 0.0]).ok())
                    .flat_map(|c| c.kappas)
                    .fold(0.0, f64::max);
                (max_k > 0.0).then(|| 1.0 / max_k)
            }
        };
        bound.unwrap_or(self.eps_ceiling)
    }

    /// Sample points of `Σ` used for curvature extrema, `resolution` per axis
    /// (the azimuthal axis of symmetric kinds is not sampled).
    pub fn sample_points(&self, resolution: usize) -> Vec<Vec<f64>> {
        let n = resolution.max(2);
        match &self.kind {
            GeometryKind::Segment { length } => (0..n)
                .map(|i| vec![length * (i as f64 / (n - 1) as f64)])
                .collect(),
            GeometryKind::Circle { .. } | GeometryKind::Ellipse { .. } => {
                (0..n).map(|i| vec![TAU * i as f64 / n as f64]).collect()
            }
            GeometryKind::Sphere { .. } => (0..n)
                .flat_map(|i| {
                    let theta = PI * (i as f64 / (n - 1) as f64);
                    (0..n).map(move |j| vec![theta, TAU * j as f64 / n as f64])
                })
                .collect(),
            GeometryKind::Revolution(p) => {
                let len = p.length();
                let denom = if p.is_closed() { n } else { n - 1 } as f64;
                (0..n)
                    .map(|i| vec![len * (i as f64 / denom), 0.0])
                    .chain(p.knots().map(|s| vec![s, 0.0]))
                    .collect()
            }
        }
    }

    /// Extrema of the curvatures over a sample grid. Exact for
    /// constant-curvature kinds, a grid approximation otherwise.
    pub fn kappa_extrema(&self, resolution: usize) -> Result<KappaExtrema> {
        if resolution < 2 {
            return Err(Error::InvalidArgument(format!(
                "kappa_extrema needs at least 2 samples, got {resolution}"
            )));
        }
        let mut out = KappaExtrema {
            inf_kappa: f64::INFINITY,
            sup_kappa: f64::NEG_INFINITY,
            sup_norms: vec![0.0; self.surface_dim()],
            kappa_norm: 0.0,
            v_eff_norm: 0.0,
            v_eff_inf: f64::INFINITY,
        };
        for p in self.sample_points(resolution) {
            let c = self.principal_curvatures(&p)?;
            out.inf_kappa = out.inf_kappa.min(c.kappa_sum);
            out.sup_kappa = out.sup_kappa.max(c.kappa_sum);
            out.kappa_norm = out.kappa_norm.max(c.kappa_sum.abs());
            for (norm, k) in out.sup_norms.iter_mut().zip(&c.kappas) {
                *norm = norm.max(k.abs());
            }
            let v = v_eff_from_kappas(&c.kappas);
            out.v_eff_norm = out.v_eff_norm.max(v.abs());
            out.v_eff_inf = out.v_eff_inf.min(v);
        }
        Ok(out)
    }

    /// Dirichlet effective potential at `point`.
    pub fn v_eff(&self, point: &[f64]) -> Result<f64> {
        Ok(v_eff_from_kappas(&self.principal_curvatures(point)?.kappas))
    }
}

fn check_t_eps(t: f64, eps: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidArgument(format!("t = {t} outside [0, 1]")));
    }
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    Ok(())
}

pub(crate) fn h_from_kappas(kappas: &[f64], t: f64, eps: f64) -> f64 {
    kappas.iter().map(|k| 1.0 - eps * k * t).product()
}

fn ellipse_speed_sq(a: f64, b: f64, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    a * a * s * s + b * b * c * c
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    /// Signed curvature of the plane curve `p(θ)` from central differences,
    /// positive when the curve turns towards its inward normal.
    fn fd_curvature(p: impl Fn(f64) -> (f64, f64), theta: f64) -> f64 {
        let h = 1e-4;
        let (x0, y0) = p(theta - h);
        let (x1, y1) = p(theta);
        let (x2, y2) = p(theta + h);
        let (dx, dy) = ((x2 - x0) / (2.0 * h), (y2 - y0) / (2.0 * h));
        let (ddx, ddy) = ((x2 - 2.0 * x1 + x0) / (h * h), (y2 - 2.0 * y1 + y0) / (h * h));
        (dx * ddy - dy * ddx) / (dx * dx + dy * dy).powf(1.5)
    }

    #[test]
    fn segment_is_flat() {
        let g = Geometry::segment(1.0).unwrap();
        for x in [0.0, 0.3, 1.0] {
            let c = g.principal_curvatures(&[x]).unwrap();
            assert_eq!(c.kappas, vec![0.0]);
            assert_eq!(g.h_eps(&[x], 0.7, 0.4).unwrap(), 1.0);
        }
    }

    #[test]
    fn circle_and_sphere_signs() {
        let c = Geometry::circle(2.0, Orientation::Outward).unwrap();
        assert_eq!(c.principal_curvatures(&[1.0]).unwrap().kappas, vec![-0.5]);
        let s = Geometry::sphere(1.0, Orientation::Outward).unwrap();
        let k = s.principal_curvatures(&[0.4, 2.0]).unwrap();
        assert_eq!(k.kappas, vec![-1.0, -1.0]);
        assert_eq!(k.kappa_sum, -2.0);
    }

    #[test]
    fn ellipse_major_axis_curvature_matches_finite_differences() {
        let (a, b) = (1.0, 0.5);
        let g = Geometry::ellipse(a, b, Orientation::Inward).unwrap();
        let fd = fd_curvature(|t| (a * t.cos(), b * t.sin()), 0.0);
        let k = g.principal_curvatures(&[0.0]).unwrap().kappas[0];
        assert!(close(fd, 4.0, 1e-5), "fd oracle {fd}");
        assert!(close(k, fd, 1e-5));
        for theta in [0.3, 1.1, 2.5, 4.0] {
            let fd = fd_curvature(|t| (a * t.cos(), b * t.sin()), theta);
            let k = g.principal_curvatures(&[theta]).unwrap().kappas[0];
            assert!(close(k, fd, 1e-5), "theta {theta}: {k} vs {fd}");
        }
    }

    #[test]
    fn out_of_domain_points() {
        let g = Geometry::segment(1.0).unwrap();
        assert!(matches!(g.principal_curvatures(&[1.5]), Err(Error::Domain { .. })));
        assert!(matches!(g.principal_curvatures(&[0.1, 0.1]), Err(Error::Domain { .. })));
        let s = Geometry::sphere(1.0, Orientation::Inward).unwrap();
        assert!(s.principal_curvatures(&[4.0, 0.0]).is_err());
    }

    #[test]
    fn h_eps_examples() {
        let s = Geometry::sphere(1.0, Orientation::Outward).unwrap();
        assert!(close(s.h_eps(&[1.0, 1.0], 1.0, 0.1).unwrap(), 1.21, 1e-14));
        let c = Geometry::circle(1.0, Orientation::Inward).unwrap();
        assert!(close(c.h_eps(&[0.0], 1.0, 0.5).unwrap(), 0.5, 1e-15));
        assert!(matches!(
            c.h_eps(&[0.0], 1.0, 1.0),
            Err(Error::DegenerateTube { .. })
        ));
    }

    #[test]
    fn fermi_metric_examples() {
        let seg = Geometry::segment(2.0).unwrap();
        let m = seg.fermi_metric(&[0.5], 0.3, 0.1).unwrap();
        assert_eq!(m.tube_diag, vec![1.0, 0.1 * 0.1]);

        let c = Geometry::circle(1.0, Orientation::Inward).unwrap();
        let m = c.fermi_metric(&[0.2], 0.5, 0.1).unwrap();
        assert!(close(m.tube_diag[0], 0.95 * 0.95, 1e-15));
        assert!(close(m.tube_diag[1], 0.01, 1e-17));
        assert!(close(m.sqrt_det, 0.1 * 1.0 * 0.95, 1e-15));

        let s = Geometry::sphere(1.0, Orientation::Outward).unwrap();
        let p = [0.9, 0.3];
        let m = s.fermi_metric(&p, 1.0, 0.1).unwrap();
        for (big, g) in m.tube_diag.iter().zip(&m.g_diag) {
            assert!(close(big / g, 1.21, 1e-14));
        }
        let det_g: f64 = m.g_diag.iter().product();
        assert!(close(m.sqrt_det, 0.1 * det_g.sqrt() * m.h, 1e-15));
    }

    #[test]
    fn admissible_eps() {
        let c = Geometry::circle(1.0, Orientation::Inward).unwrap();
        assert_eq!(c.max_admissible_eps(), 1.0);
        let c = Geometry::circle(3.0, Orientation::Outward).unwrap().with_eps_ceiling(0.5);
        assert_eq!(c.max_admissible_eps(), 0.5);
        assert_eq!(Geometry::segment(1.0).unwrap().max_admissible_eps(), 1.0);

        let e = Geometry::ellipse(1.0, 0.5, Orientation::Inward).unwrap();
        // Oracle: minimize 1/κ over dense curvature samples.
        let brute = (0..20_000)
            .map(|i| TAU * i as f64 / 20_000.0)
            .map(|t| {
                let k = fd_curvature(|t| (t.cos(), 0.5 * t.sin()), t);
                1.0 / k
            })
            .fold(f64::INFINITY, f64::min);
        assert!(close(brute, 0.25, 1e-6));
        assert!(close(e.max_admissible_eps(), brute, 1e-6));
    }

    #[test]
    fn kappa_extrema_examples() {
        let c = Geometry::circle(1.0, Orientation::Inward).unwrap();
        let k = c.kappa_extrema(16).unwrap();
        assert_eq!((k.inf_kappa, k.sup_kappa), (1.0, 1.0));

        let s = Geometry::sphere(1.0, Orientation::Outward).unwrap();
        let k = s.kappa_extrema(8).unwrap();
        assert_eq!((k.inf_kappa, k.sup_kappa), (-2.0, -2.0));
        assert_eq!(k.sup_norms, vec![1.0, 1.0]);

        let e = Geometry::ellipse(1.0, 0.5, Orientation::Inward).unwrap();
        let k = e.kappa_extrema(400).unwrap();
        let brute = (0..100_000)
            .map(|i| fd_curvature(|t| (t.cos(), 0.5 * t.sin()), TAU * i as f64 / 100_000.0))
            .fold(f64::INFINITY, f64::min);
        assert!(close(brute, 0.5, 1e-6));
        assert!(close(k.inf_kappa, brute, 1e-6));
        assert!(close(k.sup_kappa, 4.0, 1e-9));

        assert!(e.kappa_extrema(1).is_err());
    }

    #[test]
    fn v_eff_examples() {
        assert_eq!(v_eff_from_kappas(&[0.0, 0.0]), 0.0);
        assert!(close(v_eff_from_kappas(&[3.0]), -2.25, 1e-15));
        assert_eq!(v_eff_from_kappas(&[0.7, 0.7]), 0.0);
    }

    fn any_geometry() -> impl Strategy<Value = Geometry> {
        prop_oneof![
            (0.2f64..5.0).prop_map(|l| Geometry::segment(l).unwrap()),
            (0.2f64..5.0).prop_map(|r| Geometry::circle(r, Orientation::Outward).unwrap()),
            (0.2f64..3.0, 0.2f64..3.0)
                .prop_map(|(a, b)| Geometry::ellipse(a, b, Orientation::Inward).unwrap()),
            (0.2f64..5.0).prop_map(|r| Geometry::sphere(r, Orientation::Outward).unwrap()),
            (2.0f64..4.0, 0.3f64..1.5).prop_map(|(big, small)| {
                Geometry::revolution(Profile::torus(big, small, 256).unwrap(), Orientation::Outward)
                    .unwrap()
            }),
        ]
    }

    fn point_in(g: &Geometry, u: f64, v: f64) -> Vec<f64> {
        g.parameter_domain()
            .iter()
            .zip([u, v])
            .map(|(&(lo, hi), w)| (lo + w * (hi - lo)).clamp(lo, hi))
            .collect()
    }

    proptest! {
        #[test]
        fn orientation_flip_negates_curvatures(g in any_geometry(), u in 0.0f64..1.0, v in 0.0f64..1.0) {
            let p = point_in(&g, u, v);
            let k = g.principal_curvatures(&p).unwrap();
            let flipped = g.clone().with_orientation(g.orientation.flipped());
            let kf = flipped.principal_curvatures(&p).unwrap();
            for (a, b) in k.kappas.iter().zip(&kf.kappas) {
                prop_assert_eq!(*a, -*b);
            }
            prop_assert_eq!(k.kappa_sum, k.kappas.iter().sum::<f64>());
        }

        #[test]
        fn h_is_one_on_the_base(g in any_geometry(), u in 0.0f64..1.0, v in 0.0f64..1.0, eps in 1e-3f64..0.1) {
            let p = point_in(&g, u, v);
            prop_assert_eq!(g.h_eps(&p, 0.0, eps).unwrap(), 1.0);
        }

        #[test]
        fn metric_sandwich_and_h_expansion(g in any_geometry(), u in 0.0f64..1.0, v in 0.0f64..1.0,
                                           t in 0.0f64..=1.0, frac in 0.01f64..0.9) {
            let p = point_in(&g, u, v);
            let ext = g.kappa_extrema(64).unwrap();
            // Grid extrema may miss the true sup slightly for non-constant kinds.
            let c = ext.max_principal() * 1.01 + 1e-12;
            let eps = frac * g.max_admissible_eps().min(1.0 / c);
            let m = g.fermi_metric(&p, t, eps).unwrap();
            let lo = (1.0 - c * eps).powi(2);
            let hi = (1.0 + c * eps).powi(2);
            for (big, small) in m.tube_diag.iter().zip(&m.g_diag) {
                if *small > 1e-12 {
                    let ratio = big / small;
                    prop_assert!(ratio >= lo * (1.0 - 1e-12) && ratio <= hi * (1.0 + 1e-12));
                }
            }
            let kappa = g.principal_curvatures(&p).unwrap().kappa_sum;
            let d1 = g.surface_dim() as f64;
            let bound = d1 * d1 * (eps * c).powi(2);
            prop_assert!((m.h - (1.0 - eps * kappa * t)).abs() <= bound + 1e-14);
        }
    }
}
