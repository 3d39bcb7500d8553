//! Lowest eigenpairs of symmetric-definite pencils `A x = λ B x`.
//!
//! The main path is shift-invert block Lanczos: `A - σB` is factored once
//! by an envelope Cholesky (so `σ` must sit below the wanted eigenvalues;
//! a failed factorization lowers the shift and retries), the Krylov space of
//! `(A - σB)⁻¹ B` is built block by block with full `B`-reorthogonalization,
//! and Ritz pairs are extracted from `Vᵀ A V`. Once the Ritz values locate
//! the bottom of the spectrum the shift is moved up next to it, which keeps
//! iteration counts low even when the initial shift is conservative.
//!
//! When the factor would exceed the memory budget the solver falls back to
//! LOBPCG with a Jacobi preconditioner. [`dense_reference`] is a plain dense
//! solve used to validate both.
//!
//! Residuals are reported as `‖A x - λ B x‖_{B⁻¹}` for `B`-normalized `x`,
//! which bounds the distance from `λ` to the spectrum and does not change
//! when the pencil is rescaled.

mod lanczos;
mod lobpcg;
mod ordering;
mod skyline;

pub use ordering::reverse_cuthill_mckee;
pub use skyline::{SkylineCholesky, SymbolicProfile};

use std::time::Instant;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::assembly::OperatorPair;
use crate::sparse::CsrMatrix;
use crate::{Error, Result};

/// Seed of the random starting block.
pub const DEFAULT_SEED: u64 = 0x5EED;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Lanczos,
    Lobpcg,
    Dense,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub method: Method,
    /// Block steps (Lanczos) or iterations (LOBPCG).
    pub iterations: usize,
    /// Stored entries of the Cholesky factor.
    pub factor_entries: usize,
    /// Shift of the final factorization.
    pub shift: f64,
    pub shift_retries: usize,
    pub wall_time_s: f64,
}

/// Lowest eigenvalues of a pencil with residuals and, optionally,
/// `B`-orthonormal eigenvectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    #[serde(skip)]
    pub eigenvectors: Option<Vec<Vec<f64>>>,
    pub residual_norms: Vec<f64>,
    pub stats: SolverStats,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions {
    pub k: usize,
    /// Residual tolerance, relative to `max(1, |λ|)`.
    pub tol: f64,
    pub shift: Option<f64>,
    pub seed: u64,
    /// Extra block columns beyond `k`.
    pub block_extra: usize,
    pub max_iterations: usize,
    /// Largest Krylov basis before a restart.
    pub max_basis: usize,
    /// Factor entries allowed before switching to LOBPCG.
    pub memory_budget: usize,
    pub max_shift_retries: usize,
    pub refine_shift: bool,
    pub want_vectors: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            k: 5,
            tol: 1e-9,
            shift: None,
            seed: DEFAULT_SEED,
            block_extra: 4,
            max_iterations: 400,
            max_basis: 160,
            memory_budget: 60_000_000,
            max_shift_retries: 60,
            refine_shift: true,
            want_vectors: true,
        }
    }
}

impl SolverOptions {
    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn with_shift(mut self, shift: f64) -> Self {
        self.shift = Some(shift);
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    fn block_size(&self, n: usize) -> usize {
        (self.k + self.block_extra).min(n)
    }

    /// Converged when the residual is below `tol * max(1, |λ|)` or at the
    /// rounding floor of the pencil.
    pub(crate) fn accepts(&self, lambda: f64, residual: f64, floor: f64) -> bool {
        residual <= (self.tol * lambda.abs().max(1.0)).max(floor)
    }
}

/// Applies `B⁻¹` for dual-norm residuals.
pub(crate) enum MassInverse {
    Diagonal(Vec<f64>),
    Factor(SkylineCholesky),
}

impl MassInverse {
    pub(crate) fn new(b: &CsrMatrix) -> Result<Self> {
        if b.is_diagonal() {
            let d = b.diag();
            if let Some((i, &v)) = d.iter().enumerate().find(|(_, &v)| !(v > 0.0)) {
                return Err(Error::NotPositiveDefinite { pivot: i, value: v });
            }
            Ok(MassInverse::Diagonal(d))
        } else {
            Ok(MassInverse::Factor(SkylineCholesky::factor(b)?))
        }
    }

    /// `sqrt(rᵀ B⁻¹ r)`.
    pub(crate) fn dual_norm(&self, r: &[f64]) -> f64 {
        match self {
            MassInverse::Diagonal(d) => r.iter().zip(d).map(|(x, b)| x * x / b).sum::<f64>().sqrt(),
            MassInverse::Factor(f) => dot(r, &f.solve(r)).max(0.0).sqrt(),
        }
    }
}

/// Attainable residual in floating point: a multiple of machine epsilon
/// times the Gershgorin bound of `diag(B)⁻¹ |A|`.
pub(crate) fn residual_floor(a: &CsrMatrix, b: &CsrMatrix) -> f64 {
    let bd = b.diag();
    let bound = (0..a.dim())
        .map(|i| a.row(i).map(|(_, v)| v.abs()).sum::<f64>() / bd[i].abs())
        .fold(0.0, f64::max);
    32.0 * f64::EPSILON * bound
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

/// `Σ_j c_j cols_j`.
pub(crate) fn combine(cols: &[Vec<f64>], coeffs: impl Iterator<Item = f64>) -> Vec<f64> {
    let n = cols.first().map_or(0, Vec::len);
    let mut out = vec![0.0; n];
    for (c, col) in coeffs.zip(cols) {
        if c != 0.0 {
            axpy(c, col, &mut out);
        }
    }
    out
}

/// Ascending eigen-decomposition of a small symmetric matrix.
pub(crate) fn sorted_symmetric_eigen(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let sym = (&m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, idx[c])]);
    (values, vectors)
}

fn check_pencil(a: &CsrMatrix, b: &CsrMatrix, k: usize) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::InvalidArgument(format!(
            "A is {0}x{0} but B is {1}x{1}",
            a.dim(),
            b.dim()
        )));
    }
    if k == 0 || k > a.dim() {
        return Err(Error::InvalidArgument(format!(
            "k = {k} must lie in 1..={}",
            a.dim()
        )));
    }
    Ok(())
}

/// The `k` algebraically smallest eigenpairs of `A x = λ B x`.
pub fn smallest_eigenpairs(a: &CsrMatrix, b: &CsrMatrix, opts: &SolverOptions) -> Result<Spectrum> {
    check_pencil(a, b, opts.k)?;
    let start = Instant::now();
    let mass = MassInverse::new(b)?;
    let sigma0 = opts.shift.unwrap_or(0.0);
    let symbolic = SymbolicProfile::analyze(&a.add_scaled(-sigma0, b));
    let mut spectrum = if symbolic.entries > opts.memory_budget {
        lobpcg::solve(a, b, &mass, opts)?
    } else {
        let factor = factor_with_retries(a, b, sigma0, &symbolic, opts)?;
        lanczos::solve(a, b, &mass, factor, opts)?
    };
    spectrum.stats.wall_time_s = start.elapsed().as_secs_f64();
    Ok(spectrum)
}

/// Convenience wrapper taking an assembled pair.
pub fn solve_pair(pair: &OperatorPair, opts: &SolverOptions) -> Result<Spectrum> {
    smallest_eigenpairs(&pair.a, &pair.b, opts)
}

/// Cholesky of `A - σB` at a successful shift.
pub(crate) struct ShiftedFactor {
    pub shift: f64,
    pub factor: SkylineCholesky,
    pub retries: usize,
}

/// Factors `A - σB`, lowering `σ` by doubling steps until it is positive
/// definite.
pub(crate) fn factor_with_retries(
    a: &CsrMatrix,
    b: &CsrMatrix,
    sigma0: f64,
    symbolic: &SymbolicProfile,
    opts: &SolverOptions,
) -> Result<ShiftedFactor> {
    let step0 = 1e-2 * sigma0.abs().max(1.0);
    let mut sigma = sigma0;
    for retry in 0..=opts.max_shift_retries {
        match SkylineCholesky::factor_with(&a.add_scaled(-sigma, b), symbolic) {
            Ok(factor) => {
                return Ok(ShiftedFactor {
                    shift: sigma,
                    factor,
                    retries: retry,
                })
            }
            Err(Error::NotPositiveDefinite { .. }) => {
                sigma = sigma0 - step0 * ((1u64 << (retry + 1).min(62)) as f64 - 1.0);
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::ShiftRetryExhausted {
        tries: opts.max_shift_retries + 1,
        last_shift: sigma,
    })
}

/// Dense symmetric-definite reference solve; `max_dim` caps the dimension.
pub fn dense_reference(a: &CsrMatrix, b: &CsrMatrix, k: usize, max_dim: usize) -> Result<Spectrum> {
    check_pencil(a, b, k)?;
    let n = a.dim();
    if n > max_dim {
        return Err(Error::DimensionCap { dim: n, cap: max_dim });
    }
    let start = Instant::now();
    let bd = b.to_dense();
    let chol = bd.clone().cholesky().ok_or(Error::NotPositiveDefinite {
        pivot: 0,
        value: f64::NAN,
    })?;
    let l = chol.l();
    let ad = a.to_dense();
    // C = L⁻¹ A L⁻ᵀ
    let y = l.solve_lower_triangular(&ad).expect("triangular factor");
    let c = l
        .solve_lower_triangular(&y.transpose())
        .expect("triangular factor");
    let (values, vectors) = sorted_symmetric_eigen(c);
    let lt = l.transpose();
    let mass = MassInverse::new(b)?;
    let mut eigenvalues = Vec::with_capacity(k);
    let mut eigenvectors = Vec::with_capacity(k);
    let mut residual_norms = Vec::with_capacity(k);
    for (i, &lambda) in values.iter().enumerate().take(k) {
        let x = lt
            .solve_upper_triangular(&vectors.column(i).into_owned())
            .expect("triangular factor");
        let x: Vec<f64> = x.iter().copied().collect();
        let mut r = a.mul_vec(&x);
        axpy(-lambda, &b.mul_vec(&x), &mut r);
        residual_norms.push(mass.dual_norm(&r));
        eigenvalues.push(lambda);
        eigenvectors.push(x);
    }
    Ok(Spectrum {
        eigenvalues,
        eigenvectors: Some(eigenvectors),
        residual_norms,
        stats: SolverStats {
            method: Method::Dense,
            iterations: 1,
            factor_entries: n * (n + 1) / 2,
            shift: 0.0,
            shift_retries: 0,
            wall_time_s: start.elapsed().as_secs_f64(),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{assemble_interval, TubeCase};
    use crate::transverse::transverse_eigenvalue;

    #[test]
    fn diagonal_pencil() {
        let a = CsrMatrix::diagonal(&[1.0, 2.0, 3.0]);
        let b = CsrMatrix::identity(3);
        let s = smallest_eigenpairs(&a, &b, &SolverOptions::default().with_k(2)).unwrap();
        assert!((s.eigenvalues[0] - 1.0).abs() < 1e-12);
        assert!((s.eigenvalues[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn interval_pencil_matches_closed_forms() {
        let p = assemble_interval(2048, TubeCase::DirichletNeumann).unwrap();
        let s = solve_pair(&p, &SolverOptions::default().with_k(3)).unwrap();
        for k in 0..3 {
            let exact = transverse_eigenvalue(k + 1).unwrap();
            assert!((s.eigenvalues[k] - exact).abs() < 1e-4 * exact);
        }
        assert_eq!(s.stats.method, Method::Lanczos);
    }

    #[test]
    fn identity_pencil() {
        let i = CsrMatrix::identity(6);
        let d = dense_reference(&i, &i, 6, 100).unwrap();
        assert!(d.eigenvalues.iter().all(|&v| (v - 1.0).abs() < 1e-14));
        assert!(matches!(
            dense_reference(&i, &i, 2, 5),
            Err(Error::DimensionCap { .. })
        ));
    }

    #[test]
    fn rejects_bad_k() {
        let i = CsrMatrix::identity(3);
        assert!(smallest_eigenpairs(&i, &i, &SolverOptions::default().with_k(0)).is_err());
        assert!(smallest_eigenpairs(&i, &i, &SolverOptions::default().with_k(4)).is_err());
    }

    #[test]
    fn shift_above_the_spectrum_is_retried() {
        let p = assemble_interval(64, TubeCase::DirichletNeumann).unwrap();
        let opts = SolverOptions::default().with_k(2).with_shift(30.0);
        let s = solve_pair(&p, &opts).unwrap();
        assert!(s.stats.shift_retries > 0);
        assert!((s.eigenvalues[0] - transverse_eigenvalue(1).unwrap()).abs() < 1e-3);

        let mut strict = opts.clone();
        strict.max_shift_retries = 0;
        assert!(matches!(
            solve_pair(&p, &strict),
            Err(Error::ShiftRetryExhausted { .. })
        ));
    }

    #[test]
    fn lobpcg_fallback_agrees() {
        let p = assemble_interval(128, TubeCase::DirichletNeumann).unwrap();
        let mut opts = SolverOptions::default().with_k(3);
        opts.memory_budget = 0;
        opts.max_iterations = 4000;
        let s = solve_pair(&p, &opts).unwrap();
        assert_eq!(s.stats.method, Method::Lobpcg);
        let d = dense_reference(&p.a, &p.b, 3, 4000).unwrap();
        for (x, y) in s.eigenvalues.iter().zip(&d.eigenvalues) {
            assert!((x - y).abs() < 1e-6 * y.abs().max(1.0), "{x} vs {y}");
        }
    }
}
