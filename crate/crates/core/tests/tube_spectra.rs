use std::f64::consts::PI;

use tubelab::assembly::{
    assemble_effective_dn, assemble_tube, assemble_tube_with, Block, Resolution, TubeCase, TubeOptions, WeightModel,
};
use tubelab::eigensolve::{solve_pair, SolverOptions};
use tubelab::geometry::{Geometry, Orientation};
use tubelab::harness::solve::{
    build_surface, build_tube, refine, surface_shift, tube_shift, Refinement, SurfaceOperator,
};
use tubelab::oracles::{rectangle_spectrum, shell_block_spectrum, tube_oracle, DEFAULT_RADIAL_RESOLUTION};
use tubelab::transverse::chi;

fn converged_tube(geom: &Geometry, eps: f64, case: TubeCase, k: usize, block: Option<Block>) -> Vec<f64> {
    let r = Refinement::default();
    let ext = geom.kappa_extrema(256).unwrap();
    let mut base = r.base().unwrap();
    if let Some(b) = block {
        base = base.with_block(b);
    }
    let c = refine(build_tube(geom, eps, case), base, k, tube_shift(case, eps, base.n_t, &ext), &r).unwrap();
    assert!(c.converged);
    c.eigenvalues
}

fn assert_relative(got: &[f64], want: &[f64], tol: f64) {
    for (g, w) in got.iter().zip(want) {
        assert!((g - w).abs() <= tol * w.abs().max(1.0), "{g} vs {w}");
    }
}

#[test]
fn segment_tubes_match_rectangles_in_every_case() {
    let g = Geometry::segment(PI).unwrap();
    for case in [TubeCase::DirichletNeumann, TubeCase::Dirichlet, TubeCase::Neumann] {
        let got = converged_tube(&g, 0.1, case, 4, None);
        let want = tube_oracle(&g, 0.1, case, 4, DEFAULT_RADIAL_RESOLUTION).unwrap();
        for (x, y) in got.iter().zip(&want.eigenvalues) {
            assert!((x - y).abs() <= 1e-3, "{case:?}: {x} vs {y}");
        }
    }
    assert_eq!(
        rectangle_spectrum(PI, 0.1, TubeCase::DirichletNeumann, 1).eigenvalues[0],
        1.0 + 25.0 * PI * PI
    );
}

#[test]
fn circle_tubes_match_the_annulus_in_dirichlet_and_neumann_cases() {
    for orientation in [Orientation::Outward, Orientation::Inward] {
        let g = Geometry::circle(1.0, orientation).unwrap();
        for case in [TubeCase::Dirichlet, TubeCase::Neumann] {
            let got = converged_tube(&g, 0.1, case, 3, None);
            let want = tube_oracle(&g, 0.1, case, 3, DEFAULT_RADIAL_RESOLUTION).unwrap();
            assert_relative(&got, &want.eigenvalues, 1e-4);
        }
    }
}

#[test]
fn sphere_blocks_match_the_shell() {
    let g = Geometry::sphere(1.0, Orientation::Outward).unwrap();
    for l in [0, 3] {
        for case in [TubeCase::DirichletNeumann, TubeCase::Dirichlet] {
            let got = converged_tube(&g, 0.1, case, 2, Some(Block::Harmonic(l)));
            let want = shell_block_spectrum(&g, 0.1, case, l, 2, DEFAULT_RADIAL_RESOLUTION).unwrap();
            assert_relative(&got, &want.eigenvalues, 1e-4);
        }
    }
}

#[test]
fn effective_circle_spectrum_is_fourier_plus_constant() {
    let g = Geometry::circle(1.0, Orientation::Outward).unwrap();
    let r = Refinement::default();
    let ext = g.kappa_extrema(16).unwrap();
    let op = SurfaceOperator::EffectiveDn;
    let c = refine(build_surface(&g, 0.1, op), r.base().unwrap(), 5, surface_shift(op, 0.1, &ext), &r).unwrap();
    assert_relative(&c.eigenvalues, &[-10.0, -9.0, -9.0, -6.0, -6.0], 1e-3);
}

#[test]
fn exact_and_truncated_weights_differ_at_second_order() {
    // On a curve h_ε is exactly linear; only the tangential metric is
    // truncated, so the first Fourier mode (n = 2) carries the difference.
    let g = Geometry::circle(1.0, Orientation::Outward).unwrap();
    let res = Resolution::new(64, 16).unwrap();
    let gap = |eps: f64| {
        let opts = SolverOptions::default().with_k(3).with_shift((PI / (2.0 * eps)).powi(2) - 2.0 / eps - 1.0);
        let solve = |weight| {
            let pair = assemble_tube_with(&g, eps, &res, TubeOptions { weight, ..TubeOptions::default() }).unwrap();
            solve_pair(&pair, &opts).unwrap().eigenvalues
        };
        let exact = solve(WeightModel::Exact);
        let first = solve(WeightModel::FirstOrder);
        assert!((exact[0] - first[0]).abs() < 1e-8);
        (exact[1] - first[1]).abs()
    };
    let ratio = gap(0.1) / gap(0.05);
    assert!((3.0..=5.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn separable_trial_bounds_the_ground_state_from_above() {
    let g = Geometry::ellipse(1.0, 0.5, Orientation::Inward).unwrap();
    let eps = 0.05;
    let res = Resolution::new(64, 16).unwrap();
    let tube = assemble_tube(&g, eps, &res).unwrap();
    let surface = assemble_effective_dn(&g, eps, &res).unwrap();
    let opts = SolverOptions::default().with_k(1);
    let phi = solve_pair(&surface, &opts.clone().with_shift(0.5 / eps - 1.0)).unwrap();
    let phi = surface.dofs.expand(&phi.eigenvectors.unwrap()[0]);
    let nt = tube.dofs.t_nodes;
    let mut full = vec![0.0; tube.dofs.nodes()];
    for (i, p) in phi.iter().enumerate() {
        for j in 0..nt {
            full[i * nt + j] = p * chi(1, j as f64 / (nt - 1) as f64).unwrap();
        }
    }
    let trial = tube.rayleigh_quotient(&tube.dofs.restrict(&full));
    let shift = (PI / (2.0 * eps)).powi(2) - 2.0 * 4.0 / eps - 1.0;
    let lambda = solve_pair(&tube, &opts.with_shift(shift)).unwrap().eigenvalues[0];
    assert!(trial >= lambda, "{trial} < {lambda}");
    assert!(trial - lambda < 0.05 * (PI / (2.0 * eps)).powi(2), "{trial} vs {lambda}");
}

#[test]
fn ellipse_strong_coupling_follows_the_harmonic_law() {
    // ε μ_1 - inf κ ≈ sqrt(ε κ_ss / 2) near the flattest point, κ_ss = 9/8.
    let g = Geometry::ellipse(1.0, 0.5, Orientation::Inward).unwrap();
    let ext = g.kappa_extrema(512).unwrap();
    let r = Refinement::default();
    let op = SurfaceOperator::EffectiveDn;
    for eps in [0.025, 0.0125] {
        let c = refine(build_surface(&g, eps, op), r.base().unwrap(), 1, surface_shift(op, eps, &ext), &r).unwrap();
        let excess = eps * c.eigenvalues[0] - 0.5;
        let harmonic = (eps * 1.125 / 2.0).sqrt();
        assert!(excess > harmonic && excess < 1.15 * harmonic, "ε={eps}: {excess} vs {harmonic}");
    }
}
