//! Finite-difference discretization of the tube and surface quadratic forms.
//!
//! The tube form in Fermi coordinates is
//!
//! ```text
//! Q_ε[ψ] = ∫∫ ( G^{μν} ∂_μψ ∂_νψ + ε⁻² (∂_t ψ)² ) ε h_ε dΣ dt,
//! ‖ψ‖²   = ∫∫ ψ² ε h_ε dΣ dt,
//! ```
//!
//! with `ψ = 0` on `Σ × {0}` (and on `∂Σ × (0,1)`), natural Neumann on
//! `Σ × {1}`. The surface forms are `∫ g^{μν} ∂_μφ ∂_νφ + V φ² dΣ` with
//! `V = κ/ε` (effective DN operator), `V = V_eff` (Dirichlet layers) or
//! `V = 0` (Laplace-Beltrami).
//!
//! All forms are discretized in summation-by-parts form on uniform tensor
//! grids: edge differences weighted by midpoint coefficients for the
//! stiffness, trapezoidal (lumped) weights for the mass. Dirichlet nodes are
//! eliminated, Neumann ends are left natural, periodic coordinates wrap. The
//! resulting pencils are symmetric with a diagonal positive mass and second
//! order accurate, which is what makes two-level Richardson extrapolation
//! effective.
//!
//! Sphere tubes are split into harmonic blocks of degree `l` (1D in `t`),
//! surfaces of revolution into azimuthal blocks `m` (2D in `(s, t)`).

use std::f64::consts::TAU;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::geometry::{v_eff_from_kappas, Geometry, GeometryKind};
use crate::sparse::{CsrMatrix, Triplets};
use crate::transverse::TensorField;
use crate::{Error, Result};

/// Boundary conditions of the tube: `(t = 0, t = 1, ∂Σ walls)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TubeCase {
    /// Dirichlet on `Σ` and the walls, Neumann on the parallel surface.
    #[serde(rename = "dn")]
    DirichletNeumann,
    /// Dirichlet everywhere.
    Dirichlet,
    /// Neumann everywhere.
    Neumann,
}

impl TubeCase {
    pub fn name(self) -> &'static str {
        match self {
            TubeCase::DirichletNeumann => "dn",
            TubeCase::Dirichlet => "dirichlet",
            TubeCase::Neumann => "neumann",
        }
    }

    fn base_bc(self) -> Bc {
        match self {
            TubeCase::Neumann => Bc::Neumann,
            _ => Bc::Dirichlet,
        }
    }

    fn far_bc(self) -> Bc {
        match self {
            TubeCase::Dirichlet => Bc::Dirichlet,
            _ => Bc::Neumann,
        }
    }

    /// Boundary condition on `∂Σ × (0, 1)`.
    pub fn wall_bc(self) -> Bc {
        self.base_bc()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bc {
    Dirichlet,
    Neumann,
}

/// Symmetry block of a reduced d = 3 problem.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Block {
    /// Azimuthal Fourier mode `m` of a surface of revolution.
    Azimuthal(u32),
    /// Spherical harmonic degree `l`.
    Harmonic(u32),
}

impl Block {
    /// Number of eigenfunctions of the full problem carried by one block
    /// eigenvalue.
    pub fn multiplicity(self) -> usize {
        match self {
            Block::Azimuthal(0) => 1,
            Block::Azimuthal(_) => 2,
            Block::Harmonic(l) => 2 * l as usize + 1,
        }
    }

    pub fn index(self) -> u32 {
        match self {
            Block::Azimuthal(m) => m,
            Block::Harmonic(l) => l,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Resolution {
    /// Intervals along the surface coordinate.
    pub n_surface: usize,
    /// Intervals along `t`.
    pub n_t: usize,
    pub block: Option<Block>,
}

impl Resolution {
    pub fn new(n_surface: usize, n_t: usize) -> Result<Self> {
        let r = Resolution {
            n_surface,
            n_t,
            block: None,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn with_block(mut self, block: Block) -> Self {
        self.block = Some(block);
        self
    }

    pub fn refined(self, factor: usize) -> Self {
        Resolution {
            n_surface: self.n_surface * factor,
            n_t: self.n_t * factor,
            block: self.block,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_surface < 8 || self.n_t < 8 {
            return Err(Error::InvalidArgument(format!(
                "resolution needs n_surface >= 8 and n_t >= 8, got {} x {}",
                self.n_surface, self.n_t
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FormKind {
    Tube(TubeCase),
    EffectiveDn,
    EffectiveDirichlet,
    Surface(Bc),
    Interval(TubeCase),
}

/// How the tube weight and metric enter the tube form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum WeightModel {
    /// `h_ε = Π(1 - εκ_μ t)`, `G^{μμ} = g^{μμ} (1 - εκ_μ t)⁻²`.
    #[default]
    Exact,
    /// First-order truncation: `h_ε ≈ 1 - εκt`, `G^{μμ} ≈ g^{μμ}(1 + 2εκ_μ t)`.
    FirstOrder,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TubeOptions {
    pub case: TubeCase,
    pub weight: WeightModel,
}

impl Default for TubeOptions {
    fn default() -> Self {
        TubeOptions {
            case: TubeCase::DirichletNeumann,
            weight: WeightModel::Exact,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairMeta {
    pub geometry: String,
    pub eps: Option<f64>,
    pub resolution: Resolution,
    pub form: FormKind,
    /// Multiplicity of every eigenvalue of this block in the full problem.
    pub multiplicity: usize,
}

/// Grid node ↔ unknown map. Nodes are numbered surface-major:
/// `node = i * t_nodes + j`.
#[derive(Clone, Debug, PartialEq)]
pub struct DofMap {
    pub surface_points: usize,
    pub t_nodes: usize,
    dof_of_node: Vec<Option<usize>>,
    node_of_dof: Vec<usize>,
    /// Quadrature weights `|g|^{1/2} dx` of the surface grid.
    pub surface_weights: Vec<f64>,
}

impl DofMap {
    fn new(
        surface_points: usize,
        t_nodes: usize,
        surface_weights: Vec<f64>,
        eliminated: impl Fn(usize, usize) -> bool,
    ) -> Self {
        let mut dof_of_node = Vec::with_capacity(surface_points * t_nodes);
        let mut node_of_dof = Vec::new();
        for i in 0..surface_points {
            for j in 0..t_nodes {
                if eliminated(i, j) {
                    dof_of_node.push(None);
                } else {
                    dof_of_node.push(Some(node_of_dof.len()));
                    node_of_dof.push(i * t_nodes + j);
                }
            }
        }
        DofMap {
            surface_points,
            t_nodes,
            dof_of_node,
            node_of_dof,
            surface_weights,
        }
    }

    pub fn dofs(&self) -> usize {
        self.node_of_dof.len()
    }

    pub fn nodes(&self) -> usize {
        self.dof_of_node.len()
    }

    pub fn dof(&self, i: usize, j: usize) -> Option<usize> {
        self.dof_of_node[i * self.t_nodes + j]
    }

    pub fn is_eliminated(&self, i: usize, j: usize) -> bool {
        self.dof(i, j).is_none()
    }

    /// Full grid values, zero on eliminated nodes.
    pub fn expand(&self, x: &[f64]) -> Vec<f64> {
        self.dof_of_node
            .iter()
            .map(|d| d.map_or(0.0, |k| x[k]))
            .collect()
    }

    /// Unknown vector from full grid values.
    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.node_of_dof.iter().map(|&n| full[n]).collect()
    }

    pub fn tensor_field(&self, x: &[f64]) -> Result<TensorField> {
        TensorField::new(self.surface_points, self.t_nodes - 1, self.expand(x))
    }
}

/// Symmetric pencil `(A, B)` of one discretized quadratic form.
#[derive(Clone, Debug)]
pub struct OperatorPair {
    pub a: CsrMatrix,
    pub b: CsrMatrix,
    pub dofs: DofMap,
    pub meta: PairMeta,
}

impl OperatorPair {
    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    /// Same pencil with both matrices multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        OperatorPair {
            a: self.a.scaled(c),
            b: self.b.scaled(c),
            dofs: self.dofs.clone(),
            meta: self.meta.clone(),
        }
    }

    pub fn rayleigh_quotient(&self, x: &[f64]) -> f64 {
        self.a.quadratic_form(x) / self.b.quadratic_form(x)
    }

    /// Writes `<stem>.A.coo` and `<stem>.B.coo` into `dir`.
    pub fn write_coordinate(&self, dir: &Path, stem: &str) -> Result<()> {
        for (m, tag) in [(&self.a, "A"), (&self.b, "B")] {
            let path = dir.join(format!("{stem}.{tag}.coo"));
            let f = File::create(&path).map_err(|e| Error::io(&path, e))?;
            m.write_coordinate(BufWriter::new(f))
                .map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }
}

/// Geometric coefficients at one point of a 1D surface grid.
#[derive(Clone, Debug)]
struct LineSample {
    sqrt_g: f64,
    /// `g^{xx}` along the grid coordinate.
    ginv: f64,
    kappa_along: f64,
    /// Curvature and inverse metric of the symmetry direction (d = 3).
    across: Option<(f64, f64)>,
}

impl LineSample {
    fn kappas(&self) -> Vec<f64> {
        match self.across {
            Some((k, _)) => vec![self.kappa_along, k],
            None => vec![self.kappa_along],
        }
    }

    fn kappa_sum(&self) -> f64 {
        self.kappa_along + self.across.map_or(0.0, |(k, _)| k)
    }

    fn factor(eps: f64, kappa: f64, t: f64) -> f64 {
        1.0 - eps * kappa * t
    }

    fn h(&self, model: WeightModel, eps: f64, t: f64) -> f64 {
        match model {
            WeightModel::Exact => {
                Self::factor(eps, self.kappa_along, t)
                    * self.across.map_or(1.0, |(k, _)| Self::factor(eps, k, t))
            }
            WeightModel::FirstOrder => 1.0 - eps * self.kappa_sum() * t,
        }
    }

    fn metric_scale(model: WeightModel, eps: f64, kappa: f64, t: f64) -> f64 {
        match model {
            WeightModel::Exact => Self::factor(eps, kappa, t).powi(-2),
            WeightModel::FirstOrder => 1.0 + 2.0 * eps * kappa * t,
        }
    }

    /// Smallest Jacobian factor over `t ∈ [0, 1]`.
    fn min_factor(&self, eps: f64) -> f64 {
        self.kappas()
            .iter()
            .map(|&k| Self::factor(eps, k, 1.0))
            .fold(1.0, f64::min)
    }
}

/// Uniform 1D grid along the surface coordinate with sampled coefficients.
struct SurfaceLine {
    periodic: bool,
    dx: f64,
    nodes: Vec<LineSample>,
    /// `mids[e]` sits between nodes `e` and `e + 1` (mod n for periodic).
    mids: Vec<LineSample>,
}

impl SurfaceLine {
    fn build(geom: &Geometry, intervals: usize) -> Result<Self> {
        let (periodic, length) = match &geom.kind {
            GeometryKind::Segment { length } => (false, *length),
            GeometryKind::Circle { .. } | GeometryKind::Ellipse { .. } => (true, TAU),
            GeometryKind::Revolution(p) => (p.is_closed(), p.length()),
            GeometryKind::Sphere { .. } => {
                return Err(Error::UnsupportedGeometry(
                    "sphere tubes are assembled per harmonic block".into(),
                ))
            }
        };
        let dx = length / intervals as f64;
        let sample = |x: f64| -> Result<LineSample> {
            let x = x.clamp(0.0, length);
            let point: Vec<f64> = match geom.surface_dim() {
                1 => vec![x],
                _ => vec![x, 0.0],
            };
            let g = geom.surface_metric(&point)?;
            let k = geom.principal_curvatures(&point)?.kappas;
            Ok(match g.len() {
                1 => LineSample {
                    sqrt_g: g[0].sqrt(),
                    ginv: 1.0 / g[0],
                    kappa_along: k[0],
                    across: None,
                },
                _ => LineSample {
                    sqrt_g: (g[0] * g[1]).sqrt(),
                    ginv: 1.0 / g[0],
                    kappa_along: k[0],
                    across: Some((k[1], 1.0 / g[1])),
                },
            })
        };
        let n_nodes = if periodic { intervals } else { intervals + 1 };
        let nodes = (0..n_nodes)
            .map(|i| sample(i as f64 * dx))
            .collect::<Result<Vec<_>>>()?;
        let mids = (0..intervals)
            .map(|e| sample((e as f64 + 0.5) * dx))
            .collect::<Result<Vec<_>>>()?;
        Ok(SurfaceLine {
            periodic,
            dx,
            nodes,
            mids,
        })
    }

    fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    fn edges(&self) -> impl Iterator<Item = (usize, usize, &LineSample)> + '_ {
        let n = self.n_nodes();
        self.mids
            .iter()
            .enumerate()
            .map(move |(e, s)| (e, (e + 1) % n, s))
    }

    fn node_weight(&self, i: usize) -> f64 {
        if !self.periodic && (i == 0 || i + 1 == self.n_nodes()) {
            0.5 * self.dx
        } else {
            self.dx
        }
    }

    fn is_end(&self, i: usize) -> bool {
        !self.periodic && (i == 0 || i + 1 == self.n_nodes())
    }

    fn quadrature_weights(&self) -> Vec<f64> {
        (0..self.n_nodes())
            .map(|i| self.node_weight(i) * self.nodes[i].sqrt_g)
            .collect()
    }

    fn check_nondegenerate(&self, eps: f64) -> Result<()> {
        for s in self.nodes.iter().chain(&self.mids) {
            let h = s.min_factor(eps);
            if h <= 0.0 {
                return Err(Error::DegenerateTube { eps, h });
            }
        }
        Ok(())
    }
}

fn trapezoid(j: usize, n: usize) -> f64 {
    let dt = 1.0 / n as f64;
    if j == 0 || j == n {
        0.5 * dt
    } else {
        dt
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps.is_finite() && eps > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")))
    }
}

/// Returns the azimuthal mode for revolution surfaces, rejects blocks that
/// do not fit the geometry.
fn azimuthal_mode(geom: &Geometry, res: &Resolution) -> Result<f64> {
    match (&geom.kind, res.block) {
        (GeometryKind::Revolution(_), Some(Block::Azimuthal(m))) => Ok(m as f64),
        (GeometryKind::Revolution(_), _) => Err(Error::UnsupportedGeometry(
            "surface of revolution needs an azimuthal block".into(),
        )),
        (GeometryKind::Sphere { .. }, _) => unreachable!("sphere handled separately"),
        (_, None) => Ok(0.0),
        (_, Some(b)) => Err(Error::UnsupportedGeometry(format!(
            "{} takes no symmetry block, got {b:?}",
            geom.id()
        ))),
    }
}

fn harmonic_degree(geom: &Geometry, res: &Resolution) -> Result<f64> {
    match res.block {
        Some(Block::Harmonic(l)) => Ok(l as f64),
        other => Err(Error::UnsupportedGeometry(format!(
            "{} needs a harmonic block, got {other:?}",
            geom.id()
        ))),
    }
}

fn multiplicity(res: &Resolution) -> usize {
    res.block.map_or(1, Block::multiplicity)
}

/// Tube pencil for the Dirichlet-Neumann layer.
pub fn assemble_tube(geom: &Geometry, eps: f64, res: &Resolution) -> Result<OperatorPair> {
    assemble_tube_with(geom, eps, res, TubeOptions::default())
}

pub fn assemble_tube_with(
    geom: &Geometry,
    eps: f64,
    res: &Resolution,
    opts: TubeOptions,
) -> Result<OperatorPair> {
    check_eps(eps)?;
    res.validate()?;
    if let GeometryKind::Sphere { radius } = geom.kind {
        return assemble_sphere_tube(geom, radius, eps, res, opts);
    }
    let m = azimuthal_mode(geom, res)?;
    let line = SurfaceLine::build(geom, res.n_surface)?;
    line.check_nondegenerate(eps)?;

    let nt = res.n_t;
    let dt = 1.0 / nt as f64;
    let case = opts.case;
    let model = opts.weight;
    let dofs = DofMap::new(line.n_nodes(), nt + 1, line.quadrature_weights(), |i, j| {
        (j == 0 && case.base_bc() == Bc::Dirichlet)
            || (j == nt && case.far_bc() == Bc::Dirichlet)
            || (line.is_end(i) && case.wall_bc() == Bc::Dirichlet)
    });
    let mut a = Triplets::new(dofs.dofs());
    let mut b_diag = vec![0.0; dofs.dofs()];
    let weight = |s: &LineSample, t: f64| eps * s.h(model, eps, t) * s.sqrt_g;

    for (i, k, mid) in line.edges() {
        for j in 0..=nt {
            let t = j as f64 * dt;
            let c = trapezoid(j, nt) * weight(mid, t) * mid.ginv
                * LineSample::metric_scale(model, eps, mid.kappa_along, t)
                / line.dx;
            a.push_difference(dofs.dof(i, j), dofs.dof(k, j), c);
        }
    }
    for (i, node) in line.nodes.iter().enumerate() {
        let wx = line.node_weight(i);
        for j in 0..nt {
            let t_mid = (j as f64 + 0.5) * dt;
            let c = wx * weight(node, t_mid) / (eps * eps) / dt;
            a.push_difference(dofs.dof(i, j), dofs.dof(i, j + 1), c);
        }
        for j in 0..=nt {
            let Some(d) = dofs.dof(i, j) else { continue };
            let t = j as f64 * dt;
            let w = wx * trapezoid(j, nt) * weight(node, t);
            b_diag[d] = w;
            if let Some((k_across, ginv_across)) = node.across {
                let pot = m * m * ginv_across * LineSample::metric_scale(model, eps, k_across, t);
                if pot != 0.0 {
                    a.push(d, d, w * pot);
                }
            }
        }
    }
    Ok(OperatorPair {
        a: a.into_csr(),
        b: CsrMatrix::diagonal(&b_diag),
        dofs,
        meta: PairMeta {
            geometry: geom.id(),
            eps: Some(eps),
            resolution: *res,
            form: FormKind::Tube(case),
            multiplicity: multiplicity(res),
        },
    })
}

fn assemble_sphere_tube(
    geom: &Geometry,
    radius: f64,
    eps: f64,
    res: &Resolution,
    opts: TubeOptions,
) -> Result<OperatorPair> {
    let l = harmonic_degree(geom, res)?;
    let kappa = geom.principal_curvatures(&[0.0, 0.0])?.kappas[0];
    let sample = LineSample {
        sqrt_g: radius * radius,
        ginv: 0.0,
        kappa_along: kappa,
        across: Some((kappa, 1.0 / (radius * radius))),
    };
    let h1 = sample.min_factor(eps);
    if h1 <= 0.0 {
        return Err(Error::DegenerateTube { eps, h: h1 });
    }
    let nt = res.n_t;
    let dt = 1.0 / nt as f64;
    let case = opts.case;
    let model = opts.weight;
    let dofs = DofMap::new(1, nt + 1, vec![1.0], |_, j| {
        (j == 0 && case.base_bc() == Bc::Dirichlet) || (j == nt && case.far_bc() == Bc::Dirichlet)
    });
    let weight = |t: f64| eps * sample.h(model, eps, t) * sample.sqrt_g;
    let mut a = Triplets::new(dofs.dofs());
    let mut b_diag = vec![0.0; dofs.dofs()];
    for j in 0..nt {
        let c = weight((j as f64 + 0.5) * dt) / (eps * eps) / dt;
        a.push_difference(dofs.dof(0, j), dofs.dof(0, j + 1), c);
    }
    let lap = l * (l + 1.0) / (radius * radius);
    for j in 0..=nt {
        let Some(d) = dofs.dof(0, j) else { continue };
        let t = j as f64 * dt;
        let w = trapezoid(j, nt) * weight(t);
        b_diag[d] = w;
        if lap != 0.0 {
            a.push(d, d, w * lap * LineSample::metric_scale(model, eps, kappa, t));
        }
    }
    Ok(OperatorPair {
        a: a.into_csr(),
        b: CsrMatrix::diagonal(&b_diag),
        dofs,
        meta: PairMeta {
            geometry: geom.id(),
            eps: Some(eps),
            resolution: *res,
            form: FormKind::Tube(case),
            multiplicity: multiplicity(res),
        },
    })
}

/// Potential of a surface form.
#[derive(Clone, Copy, Debug)]
enum SurfacePotential {
    CurvatureOverEps(f64),
    Veff,
    None,
}

impl SurfacePotential {
    fn at(self, kappas: &[f64]) -> f64 {
        match self {
            SurfacePotential::CurvatureOverEps(eps) => kappas.iter().sum::<f64>() / eps,
            SurfacePotential::Veff => v_eff_from_kappas(kappas),
            SurfacePotential::None => 0.0,
        }
    }
}

fn assemble_surface_form(
    geom: &Geometry,
    res: &Resolution,
    potential: SurfacePotential,
    bc: Bc,
    form: FormKind,
    eps: Option<f64>,
) -> Result<OperatorPair> {
    res.validate()?;
    let meta = PairMeta {
        geometry: geom.id(),
        eps,
        resolution: *res,
        form,
        multiplicity: multiplicity(res),
    };
    if let GeometryKind::Sphere { radius } = geom.kind {
        // Spherical harmonics diagonalize every constant-curvature form.
        let l = harmonic_degree(geom, res)?;
        let kappas = geom.principal_curvatures(&[0.0, 0.0])?.kappas;
        let value = l * (l + 1.0) / (radius * radius) + potential.at(&kappas);
        return Ok(OperatorPair {
            a: CsrMatrix::diagonal(&[value]),
            b: CsrMatrix::identity(1),
            dofs: DofMap::new(1, 1, vec![1.0], |_, _| false),
            meta,
        });
    }
    let m = azimuthal_mode(geom, res)?;
    let line = SurfaceLine::build(geom, res.n_surface)?;
    let dofs = DofMap::new(line.n_nodes(), 1, line.quadrature_weights(), |i, _| {
        line.is_end(i) && bc == Bc::Dirichlet
    });
    let mut a = Triplets::new(dofs.dofs());
    let mut b_diag = vec![0.0; dofs.dofs()];
    for (i, k, mid) in line.edges() {
        a.push_difference(dofs.dof(i, 0), dofs.dof(k, 0), mid.sqrt_g * mid.ginv / line.dx);
    }
    for (i, node) in line.nodes.iter().enumerate() {
        let Some(d) = dofs.dof(i, 0) else { continue };
        let w = line.node_weight(i) * node.sqrt_g;
        b_diag[d] = w;
        let azimuthal = node.across.map_or(0.0, |(_, ginv)| m * m * ginv);
        let v = potential.at(&node.kappas()) + azimuthal;
        if v != 0.0 {
            a.push(d, d, w * v);
        }
    }
    Ok(OperatorPair {
        a: a.into_csr(),
        b: CsrMatrix::diagonal(&b_diag),
        dofs,
        meta,
    })
}

/// Pencil of `-Δ_g + κ/ε` with Dirichlet conditions on `∂Σ`.
pub fn assemble_effective_dn(geom: &Geometry, eps: f64, res: &Resolution) -> Result<OperatorPair> {
    check_eps(eps)?;
    assemble_surface_form(
        geom,
        res,
        SurfacePotential::CurvatureOverEps(eps),
        Bc::Dirichlet,
        FormKind::EffectiveDn,
        Some(eps),
    )
}

/// Pencil of `-Δ_g + V_eff` with Dirichlet conditions on `∂Σ`.
pub fn assemble_effective_dirichlet(geom: &Geometry, res: &Resolution) -> Result<OperatorPair> {
    assemble_surface_form(
        geom,
        res,
        SurfacePotential::Veff,
        Bc::Dirichlet,
        FormKind::EffectiveDirichlet,
        None,
    )
}

/// Plain Laplace-Beltrami pencil; `bc` only matters when `∂Σ ≠ ∅`.
pub fn assemble_surface(geom: &Geometry, res: &Resolution, bc: Bc) -> Result<OperatorPair> {
    assemble_surface_form(geom, res, SurfacePotential::None, bc, FormKind::Surface(bc), None)
}

/// `-(Σ κ_μ²)/2 + (Σ κ_μ)²/4` at `point`.
pub fn v_eff(geom: &Geometry, point: &[f64]) -> Result<f64> {
    geom.v_eff(point)
}

/// The transverse interval problem `-u'' = τu` on `(0, 1)` with the
/// conditions of `case` at `t = 0` and `t = 1`.
pub fn assemble_interval(intervals: usize, case: TubeCase) -> Result<OperatorPair> {
    if intervals < 8 {
        return Err(Error::InvalidArgument(format!(
            "interval needs at least 8 intervals, got {intervals}"
        )));
    }
    let n = intervals;
    let dt = 1.0 / n as f64;
    let dofs = DofMap::new(1, n + 1, vec![1.0], |_, j| {
        (j == 0 && case.base_bc() == Bc::Dirichlet) || (j == n && case.far_bc() == Bc::Dirichlet)
    });
    let mut a = Triplets::new(dofs.dofs());
    for j in 0..n {
        a.push_difference(dofs.dof(0, j), dofs.dof(0, j + 1), 1.0 / dt);
    }
    let b: Vec<f64> = (0..=n)
        .filter(|&j| dofs.dof(0, j).is_some())
        .map(|j| trapezoid(j, n))
        .collect();
    Ok(OperatorPair {
        a: a.into_csr(),
        b: CsrMatrix::diagonal(&b),
        dofs,
        meta: PairMeta {
            geometry: "interval(0,1)".into(),
            eps: None,
            resolution: Resolution {
                n_surface: 1,
                n_t: n,
                block: None,
            },
            form: FormKind::Interval(case),
            multiplicity: 1,
        },
    })
}

/// Lowest eigenvalue of the discrete transverse operator `ε⁻² (-d²/dt²)`
/// for `case` on `intervals` cells. Used for shift heuristics.
pub fn discrete_transverse_bottom(case: TubeCase, intervals: usize, eps: f64) -> f64 {
    let n = intervals as f64;
    let s = match case {
        TubeCase::DirichletNeumann => (std::f64::consts::PI / (4.0 * n)).sin(),
        TubeCase::Dirichlet => (std::f64::consts::PI / (2.0 * n)).sin(),
        TubeCase::Neumann => 0.0,
    };
    (2.0 * n * s / eps).powi(2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Orientation, Profile};
    use std::f64::consts::PI;

    fn dense_eigs(p: &OperatorPair) -> Vec<f64> {
        let b = p.b.diag();
        let a = p.a.to_dense();
        let n = p.dim();
        let s = nalgebra::DMatrix::from_fn(n, n, |i, j| a[(i, j)] / (b[i] * b[j]).sqrt());
        let mut e: Vec<f64> = s.symmetric_eigenvalues().iter().copied().collect();
        e.sort_by(f64::total_cmp);
        e
    }

    #[test]
    fn pairs_are_symmetric_with_positive_mass() {
        let g = Geometry::ellipse(1.0, 0.5, Orientation::Inward).unwrap();
        let res = Resolution::new(16, 8).unwrap();
        for case in [TubeCase::DirichletNeumann, TubeCase::Dirichlet, TubeCase::Neumann] {
            let opts = TubeOptions { case, ..Default::default() };
            let p = assemble_tube_with(&g, 0.1, &res, opts).unwrap();
            assert!(p.a.is_symmetric(1e-12));
            assert!(p.b.diag().iter().all(|&b| b > 0.0));
        }
        let p = assemble_tube(&g, 0.1, &res).unwrap();
        assert_eq!(p.dim(), 16 * 8);
        for i in 0..16 {
            assert!(p.dofs.is_eliminated(i, 0));
            assert!(!p.dofs.is_eliminated(i, 8));
        }
    }

    #[test]
    fn segment_tube_is_separable() {
        // Rectangle (0,π) x (0,ε): λ = n² + ((2j-1)π/2ε)², and the discrete
        // pencil separates into the two 1D discrete spectra.
        let g = Geometry::segment(PI).unwrap();
        let res = Resolution::new(32, 16).unwrap();
        let eps = 0.1;
        let p = assemble_tube(&g, eps, &res).unwrap();
        let e = dense_eigs(&p);
        let h = PI / 32.0;
        let sx = |n: f64| (2.0 / h * (n * h / 2.0).sin()).powi(2);
        let lead = discrete_transverse_bottom(TubeCase::DirichletNeumann, 16, eps);
        for n in 1..=4 {
            let expect = sx(n as f64) + lead;
            assert!((e[n - 1] - expect).abs() < 1e-8 * expect, "{n}: {} vs {expect}", e[n - 1]);
        }
        assert!((lead - (PI / 0.2).powi(2)).abs() < 2e-3 * lead);
    }

    #[test]
    fn effective_examples() {
        let res = Resolution::new(64, 8).unwrap();
        let c = Geometry::circle(1.0, Orientation::Outward).unwrap();
        let e = dense_eigs(&assemble_effective_dn(&c, 0.1, &res).unwrap());
        assert!((e[0] + 10.0).abs() < 1e-10);
        let h = TAU / 64.0;
        let m1 = (2.0 / h * (h / 2.0).sin()).powi(2);
        assert!((e[1] - (m1 - 10.0)).abs() < 1e-10 && (e[2] - e[1]).abs() < 1e-10);

        let d = dense_eigs(&assemble_effective_dirichlet(&c, &res).unwrap());
        assert!((d[0] + 0.25).abs() < 1e-12);

        let seg = Geometry::segment(PI).unwrap();
        let e = dense_eigs(&assemble_effective_dn(&seg, 0.1, &res).unwrap());
        assert!((e[0] - 1.0).abs() < 1e-3 && (e[1] - 4.0).abs() < 5e-3);
        let n = dense_eigs(&assemble_surface(&seg, &res, Bc::Neumann).unwrap());
        assert!(n[0].abs() < 1e-12 && (n[1] - 1.0).abs() < 1e-3);

        let s = Geometry::sphere(2.0, Orientation::Outward).unwrap();
        for l in 0..4u32 {
            let r = res.with_block(Block::Harmonic(l));
            let nu = dense_eigs(&assemble_surface(&s, &r, Bc::Dirichlet).unwrap())[0];
            assert_eq!(nu, (l * (l + 1)) as f64 / 4.0);
            let s1 = Geometry::sphere(1.0, Orientation::Outward).unwrap();
            let mu = dense_eigs(&assemble_effective_dn(&s1, 0.05, &r).unwrap())[0];
            assert!((mu - ((l * (l + 1)) as f64 - 40.0)).abs() < 1e-12);
            let md = dense_eigs(&assemble_effective_dirichlet(&s1, &r).unwrap())[0];
            assert_eq!(md, (l * (l + 1)) as f64);
        }
    }

    #[test]
    fn v_eff_on_the_sphere_vanishes() {
        let s = Geometry::sphere(1.7, Orientation::Inward).unwrap();
        assert_eq!(v_eff(&s, &[0.3, 0.2]).unwrap(), 0.0);
        let c = Geometry::circle(1.0, Orientation::Outward).unwrap();
        assert_eq!(v_eff(&c, &[0.3]).unwrap(), -0.25);
    }

    #[test]
    fn block_validation() {
        let s = Geometry::sphere(1.0, Orientation::Outward).unwrap();
        let res = Resolution::new(8, 8).unwrap();
        assert!(matches!(assemble_tube(&s, 0.1, &res), Err(Error::UnsupportedGeometry(_))));
        let c = Geometry::circle(1.0, Orientation::Outward).unwrap();
        assert!(assemble_tube(&c, 0.1, &res.with_block(Block::Harmonic(1))).is_err());
        assert!(Resolution::new(4, 8).is_err());
        let inward = Geometry::circle(1.0, Orientation::Inward).unwrap();
        assert!(matches!(
            assemble_tube(&inward, 1.2, &res),
            Err(Error::DegenerateTube { .. })
        ));
    }

    #[test]
    fn interval_second_eigenvalue_respects_poincare_bound() {
        for n in [16, 64, 256] {
            let e = dense_eigs(&assemble_interval(n, TubeCase::DirichletNeumann).unwrap());
            let h = 1.0 / n as f64;
            let target = (1.5 * PI).powi(2);
            let c = (1.5 * PI).powi(4) / 12.0 * 1.01;
            assert!(e[1] >= target - c * h * h, "n={n}: {}", e[1]);
            assert!(e[1] <= target);
        }
    }

    #[test]
    fn cylinder_axisymmetric_block_separates() {
        // Outward cylinder of radius 1: κ = (0, -1). Its m = 0 block is the
        // meridian sine series plus the circle tube's axisymmetric ground
        // state, exactly, on matching t-grids.
        let l = 2.0;
        let g = Geometry::revolution(Profile::cylinder(1.0, l, 64).unwrap(), Orientation::Outward)
            .unwrap();
        let eps = 0.1;
        let res = Resolution::new(16, 16).unwrap().with_block(Block::Azimuthal(0));
        let tube = dense_eigs(&assemble_tube(&g, eps, &res).unwrap());
        let h = l / 16.0;
        let sx = (2.0 / h * (PI * h / l / 2.0).sin()).powi(2);
        let circle = Geometry::circle(1.0, Orientation::Outward).unwrap();
        let ring = dense_eigs(&assemble_tube(&circle, eps, &Resolution::new(16, 16).unwrap()).unwrap());
        assert!((tube[0] - (sx + ring[0])).abs() < 1e-9 * tube[0], "{} vs {}", tube[0], sx + ring[0]);
    }

}
