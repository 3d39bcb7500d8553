//! Locally optimal block preconditioned conjugate gradient, used when the
//! Cholesky envelope does not fit in memory.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{axpy, combine, dot, sorted_symmetric_eigen, MassInverse, Method, SolverOptions, SolverStats, Spectrum};
use crate::sparse::CsrMatrix;
use crate::{Error, Result};

/// `B`-orthonormal basis of `span(cols)`, dropping near-dependent directions.
fn b_orthonormalize(b: &CsrMatrix, cols: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let cols: Vec<Vec<f64>> = cols
        .iter()
        .filter_map(|c| {
            let norm = b.quadratic_form(c).max(0.0).sqrt();
            (norm > 0.0).then(|| c.iter().map(|x| x / norm).collect())
        })
        .collect();
    let cols = &cols[..];
    let m = cols.len();
    let bcols: Vec<Vec<f64>> = cols.iter().map(|c| b.mul_vec(c)).collect();
    let gram = DMatrix::from_fn(m, m, |i, j| dot(&cols[i], &bcols[j]));
    let (values, vectors) = sorted_symmetric_eigen(gram);
    let top = values.last().copied().unwrap_or(0.0);
    values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > 1e-12 * top && s > 0.0)
        .map(|(c, &s)| {
            let scale = 1.0 / s.sqrt();
            combine(cols, vectors.column(c).iter().map(|y| y * scale))
        })
        .collect()
}

pub(super) fn solve(a: &CsrMatrix, b: &CsrMatrix, mass: &MassInverse, opts: &SolverOptions) -> Result<Spectrum> {
    let n = a.dim();
    let floor = super::residual_floor(a, b);
    let k = opts.k;
    let p = opts.block_size(n);
    let sigma = opts.shift.unwrap_or(0.0);
    let precond: Vec<f64> = a
        .diag()
        .iter()
        .zip(b.diag())
        .map(|(&ad, bd)| {
            let d = (ad - sigma * bd).abs();
            if d > 0.0 {
                1.0 / d
            } else {
                1.0
            }
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let start: Vec<Vec<f64>> = (0..p)
        .map(|_| (0..n).map(|_| rng.random::<f64>() - 0.5).collect())
        .collect();
    let mut x = b_orthonormalize(b, &start);
    let mut directions: Vec<Vec<f64>> = Vec::new();
    let mut theta = vec![0.0; x.len()];
    let mut residuals = vec![f64::INFINITY; x.len()];

    for iteration in 1..=opts.max_iterations {
        // Rayleigh-Ritz on [X, W, P].
        let mut span = x.clone();
        if iteration > 1 {
            for (c, xc) in x.iter().enumerate() {
                let mut r = a.mul_vec(xc);
                axpy(-theta[c], &b.mul_vec(xc), &mut r);
                span.push(r.iter().zip(&precond).map(|(ri, t)| ri * t).collect());
            }
            span.extend(directions.iter().cloned());
        }
        let q = b_orthonormalize(b, &span);
        let aq: Vec<Vec<f64>> = q.iter().map(|c| a.mul_vec(c)).collect();
        let m = q.len();
        let projected = DMatrix::from_fn(m, m, |i, j| dot(&q[i], &aq[j]));
        let (values, y) = sorted_symmetric_eigen(projected);
        let width = p.min(m);

        let new_x: Vec<Vec<f64>> = (0..width)
            .map(|c| combine(&q, y.column(c).iter().copied()))
            .collect();
        theta = values[..width].to_vec();
        residuals = (0..width)
            .map(|c| {
                let mut r = combine(&aq, y.column(c).iter().copied());
                axpy(-theta[c], &b.mul_vec(&new_x[c]), &mut r);
                mass.dual_norm(&r)
            })
            .collect();

        // P = X_new minus its component in span(X_old).
        directions = new_x
            .iter()
            .map(|xn| {
                let bxn = b.mul_vec(xn);
                let mut d = xn.clone();
                for xo in &x {
                    axpy(-dot(xo, &bxn), xo, &mut d);
                }
                d
            })
            .collect();
        x = new_x;

        let converged = (0..k.min(width))
            .filter(|&c| opts.accepts(theta[c], residuals[c], floor))
            .count();
        if converged == k || m >= n {
            return Ok(finish(x, theta, residuals, opts, iteration));
        }
    }
    let converged = (0..k.min(theta.len()))
        .filter(|&c| opts.accepts(theta[c], residuals[c], floor))
        .count();
    Err(Error::NoConvergence {
        iterations: opts.max_iterations,
        converged,
        wanted: k,
        partial: Box::new(finish(x, theta, residuals, opts, opts.max_iterations)),
    })
}

fn finish(
    mut x: Vec<Vec<f64>>,
    mut theta: Vec<f64>,
    mut residuals: Vec<f64>,
    opts: &SolverOptions,
    iterations: usize,
) -> Spectrum {
    x.truncate(opts.k);
    theta.truncate(opts.k);
    residuals.truncate(opts.k);
    Spectrum {
        eigenvalues: theta,
        eigenvectors: opts.want_vectors.then_some(x),
        residual_norms: residuals,
        stats: SolverStats {
            method: Method::Lobpcg,
            iterations,
            factor_entries: 0,
            shift: opts.shift.unwrap_or(0.0),
            shift_retries: 0,
            wall_time_s: 0.0,
        },
    }
}
