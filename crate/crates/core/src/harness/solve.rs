//! Grid refinement with Richardson extrapolation, default shifts and
//! symmetry-block merging.

use crate::assembly::{
    assemble_effective_dirichlet, assemble_effective_dn, assemble_surface, assemble_tube_with,
    discrete_transverse_bottom, Bc, Block, DofMap, OperatorPair, Resolution, TubeCase, TubeOptions,
};
use crate::eigensolve::{smallest_eigenpairs, SolverOptions, Spectrum};
use crate::geometry::{Geometry, GeometryKind, KappaExtrema};
use crate::{Error, Result};

/// Resolution and tolerance knobs for one converged solve.
#[derive(Clone, Debug, PartialEq)]
pub struct Refinement {
    pub n_surface: usize,
    pub n_t: usize,
    /// Stop once the extrapolated values move less than this (absolute).
    pub tol_disc: f64,
    pub extrapolate: bool,
    /// Number of grid levels `N, 2N, 4N, ...` allowed.
    pub max_levels: usize,
    pub solver_tol: f64,
    pub seed: u64,
}

impl Default for Refinement {
    fn default() -> Self {
        Refinement {
            n_surface: 32,
            n_t: 16,
            tol_disc: 1e-3,
            extrapolate: true,
            max_levels: 5,
            solver_tol: 1e-9,
            seed: crate::eigensolve::DEFAULT_SEED,
        }
    }
}

impl Refinement {
    pub fn base(&self) -> Result<Resolution> {
        Resolution::new(self.n_surface, self.n_t)
    }
}

/// Eigenvalues after refinement, with the finest-level eigenvectors.
#[derive(Clone, Debug)]
pub struct Converged {
    pub eigenvalues: Vec<f64>,
    /// Per-eigenvalue discretization error estimates.
    pub errors: Vec<f64>,
    /// Resolutions of the last two levels, coarse first.
    pub levels: Vec<Resolution>,
    pub finest: Spectrum,
    pub dofs: DofMap,
    pub converged: bool,
}

fn combine_levels(coarse: &[f64], fine: &[f64], extrapolate: bool) -> Vec<f64> {
    coarse
        .iter()
        .zip(fine)
        .map(|(&c, &f)| if extrapolate { (4.0 * f - c) / 3.0 } else { f })
        .collect()
}

fn solve_level(pair: &OperatorPair, k: usize, shift: f64, r: &Refinement) -> Result<Spectrum> {
    let opts = SolverOptions {
        k: k.min(pair.dim()),
        tol: r.solver_tol,
        shift: Some(shift),
        seed: r.seed,
        ..SolverOptions::default()
    };
    smallest_eigenpairs(&pair.a, &pair.b, &opts)
}

/// Refines `N, 2N, 4N, ...` until successive extrapolated spectra agree to
/// `tol_disc`, or the level budget runs out (then `converged` is false).
pub fn refine<F>(build: F, base: Resolution, k: usize, shift: f64, r: &Refinement) -> Result<Converged>
where
    F: Fn(&Resolution) -> Result<OperatorPair>,
{
    let levels = r.max_levels.max(2);
    let mut raw: Vec<Vec<f64>> = Vec::new();
    let mut resolutions = Vec::new();
    let mut previous: Option<Vec<f64>> = None;

    for level in 0..levels {
        let res = base.refined(1 << level);
        let pair = build(&res)?;
        let k_eff = k.min(pair.dim());
        let spectrum = solve_level(&pair, k_eff, shift, r)?;
        raw.push(spectrum.eigenvalues.clone());
        resolutions.push(res);
        if raw.len() < 2 {
            continue;
        }
        let n = raw.len();
        let current = combine_levels(&raw[n - 2], &raw[n - 1], r.extrapolate);
        let change = previous.as_ref().map(|p| {
            p.iter()
                .zip(&current)
                .map(|(a, b)| (a - b).abs())
                .collect::<Vec<_>>()
        });
        // Pencils with a single level of freedom (sphere surface blocks) are
        // exact at every resolution.
        let trivial = raw[n - 1]
            .iter()
            .zip(&raw[n - 2])
            .all(|(a, b)| a == b);
        let done = trivial
            || change
                .as_ref()
                .is_some_and(|c| c.iter().all(|&d| d < r.tol_disc));
        if done || level + 1 == levels {
            let errors = change.unwrap_or_else(|| {
                raw[n - 2]
                    .iter()
                    .zip(&raw[n - 1])
                    .map(|(c, f)| (f - c).abs() / 3.0)
                    .collect()
            });
            return Ok(Converged {
                eigenvalues: current,
                errors,
                levels: resolutions[n - 2..].to_vec(),
                finest: spectrum,
                dofs: pair.dofs,
                converged: done,
            });
        }
        previous = Some(current);
    }
    unreachable!("loop returns on the last level")
}

/// Solves at exactly the two given levels and extrapolates. Used to put
/// surface operators on the same grids as a converged tube solve.
pub fn at_levels<F>(build: F, levels: &[Resolution], k: usize, shift: f64, r: &Refinement) -> Result<Converged>
where
    F: Fn(&Resolution) -> Result<OperatorPair>,
{
    let mut raw = Vec::with_capacity(2);
    let mut last = None;
    for res in levels {
        let pair = build(res)?;
        let spectrum = solve_level(&pair, k.min(pair.dim()), shift, r)?;
        raw.push(spectrum.eigenvalues.clone());
        last = Some((spectrum, pair.dofs));
    }
    let (finest, dofs) = last.ok_or_else(|| Error::InvalidArgument("no levels given".into()))?;
    let (eigenvalues, errors) = match raw.len() {
        1 => (raw[0].clone(), vec![0.0; raw[0].len()]),
        _ => {
            let n = raw.len();
            let e = combine_levels(&raw[n - 2], &raw[n - 1], r.extrapolate);
            let err = raw[n - 2]
                .iter()
                .zip(&raw[n - 1])
                .map(|(c, f)| (f - c).abs() / 3.0)
                .collect();
            (e, err)
        }
    };
    Ok(Converged {
        eigenvalues,
        errors,
        levels: levels.to_vec(),
        finest,
        dofs,
        converged: true,
    })
}

/// Which surface operator accompanies a tube case.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SurfaceOperator {
    /// `-Δ_g + κ/ε`, Dirichlet on `∂Σ`.
    EffectiveDn,
    /// `-Δ_g + V_eff`, Dirichlet on `∂Σ`.
    EffectiveDirichlet,
    /// `-Δ_g` with the given condition on `∂Σ`.
    LaplaceBeltrami(Bc),
}

/// Default shift just below the expected bottom of a tube spectrum.
pub fn tube_shift(case: TubeCase, eps: f64, n_t: usize, ext: &KappaExtrema) -> f64 {
    match case {
        TubeCase::DirichletNeumann => {
            discrete_transverse_bottom(case, n_t, eps) - 2.0 * ext.kappa_norm / eps - 1.0
        }
        TubeCase::Dirichlet => {
            discrete_transverse_bottom(case, n_t, eps)
                - 2.0 * ext.kappa_norm / eps
                - ext.v_eff_norm
                - 1.0
        }
        TubeCase::Neumann => -1.0,
    }
}

pub fn surface_shift(op: SurfaceOperator, eps: f64, ext: &KappaExtrema) -> f64 {
    match op {
        SurfaceOperator::EffectiveDn => ext.inf_kappa / eps - 1.0,
        SurfaceOperator::EffectiveDirichlet => ext.v_eff_inf - 1.0,
        SurfaceOperator::LaplaceBeltrami(_) => -1.0,
    }
}

/// Symmetry blocks of a geometry, or `None` for genuinely 2D grids.
pub fn block_of(geom: &Geometry, index: u32) -> Option<Block> {
    match geom.kind {
        GeometryKind::Sphere { .. } => Some(Block::Harmonic(index)),
        GeometryKind::Revolution(_) => Some(Block::Azimuthal(index)),
        _ => None,
    }
}

pub fn build_tube(
    geom: &Geometry,
    eps: f64,
    case: TubeCase,
) -> impl Fn(&Resolution) -> Result<OperatorPair> + '_ {
    move |res| {
        assemble_tube_with(
            geom,
            eps,
            res,
            TubeOptions {
                case,
                ..TubeOptions::default()
            },
        )
    }
}

pub fn build_surface(
    geom: &Geometry,
    eps: f64,
    op: SurfaceOperator,
) -> impl Fn(&Resolution) -> Result<OperatorPair> + '_ {
    move |res| match op {
        SurfaceOperator::EffectiveDn => assemble_effective_dn(geom, eps, res),
        SurfaceOperator::EffectiveDirichlet => assemble_effective_dirichlet(geom, res),
        SurfaceOperator::LaplaceBeltrami(bc) => assemble_surface(geom, res, bc),
    }
}

/// One block's converged spectrum with its multiplicity.
#[derive(Clone, Debug)]
pub struct BlockSpectrum {
    pub block: Option<Block>,
    pub solve: Converged,
}

/// Eigenvalues of all blocks merged and sorted, each repeated by its
/// multiplicity, truncated to `k`. Entries carry `(value, error, block
/// position)`.
pub fn merge_blocks(blocks: &[BlockSpectrum], k: usize) -> Vec<(f64, f64, usize)> {
    let mut all: Vec<(f64, f64, usize)> = Vec::new();
    for (pos, b) in blocks.iter().enumerate() {
        let mult = b.block.map_or(1, Block::multiplicity);
        for (v, e) in b.solve.eigenvalues.iter().zip(&b.solve.errors) {
            all.extend(std::iter::repeat_n((*v, *e, pos), mult));
        }
    }
    all.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.2.cmp(&b.2)));
    all.truncate(k);
    all
}

/// Block cutoff is adequate when the next block's bottom clears the
/// reported range: `(λ_omitted - λ_1) ≥ 2 (λ_k - λ_1)`.
pub fn cutoff_is_safe(merged: &[(f64, f64, usize)], omitted_bottom: f64) -> bool {
    match (merged.first(), merged.last()) {
        (Some(first), Some(last)) => omitted_bottom - first.0 >= 2.0 * (last.0 - first.0),
        _ => true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Orientation;
    use std::f64::consts::PI;

    #[test]
    fn segment_tube_reaches_the_closed_form() {
        let g = Geometry::segment(PI).unwrap();
        let r = Refinement {
            n_surface: 16,
            n_t: 16,
            ..Refinement::default()
        };
        let ext = g.kappa_extrema(16).unwrap();
        let shift = tube_shift(TubeCase::DirichletNeumann, 0.1, r.n_t, &ext);
        let c = refine(build_tube(&g, 0.1, TubeCase::DirichletNeumann), r.base().unwrap(), 1, shift, &r).unwrap();
        assert!(c.converged);
        let exact = 1.0 + 25.0 * PI * PI;
        assert!((c.eigenvalues[0] - exact).abs() < 1e-3, "{} vs {exact}", c.eigenvalues[0]);
    }

    #[test]
    fn merged_blocks_repeat_by_multiplicity() {
        let g = Geometry::sphere(1.0, Orientation::Outward).unwrap();
        let r = Refinement::default();
        let ext = g.kappa_extrema(8).unwrap();
        let blocks: Vec<BlockSpectrum> = (0..3)
            .map(|l| {
                let base = r.base().unwrap().with_block(Block::Harmonic(l));
                let op = SurfaceOperator::LaplaceBeltrami(Bc::Dirichlet);
                let solve = refine(build_surface(&g, 0.1, op), base, 1, surface_shift(op, 0.1, &ext), &r).unwrap();
                BlockSpectrum {
                    block: block_of(&g, l),
                    solve,
                }
            })
            .collect();
        let merged = merge_blocks(&blocks, 9);
        let values: Vec<f64> = merged.iter().map(|m| m.0).collect();
        assert_eq!(values, vec![0.0, 2.0, 2.0, 2.0, 6.0, 6.0, 6.0, 6.0, 6.0]);
        assert!(cutoff_is_safe(&merged[..4], 12.0));
        assert!(!cutoff_is_safe(&merged[..4], 3.0));
    }
}
