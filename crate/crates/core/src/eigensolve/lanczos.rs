//! Shift-invert block Lanczos with full `B`-reorthogonalization and
//! Rayleigh-Ritz extraction on `Vᵀ A V`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    axpy, combine, dot, factor_with_retries, sorted_symmetric_eigen, MassInverse, Method,
    ShiftedFactor, SolverOptions, SolverStats, Spectrum, SymbolicProfile,
};
use crate::sparse::CsrMatrix;
use crate::{Error, Result};

const MAX_SHIFT_REFINEMENTS: usize = 3;

struct Basis<'a> {
    a: &'a CsrMatrix,
    b: &'a CsrMatrix,
    v: Vec<Vec<f64>>,
    av: Vec<Vec<f64>>,
    /// `Vᵀ A V`, grown column by column.
    projected: Vec<Vec<f64>>,
}

impl<'a> Basis<'a> {
    fn new(a: &'a CsrMatrix, b: &'a CsrMatrix) -> Self {
        Basis {
            a,
            b,
            v: Vec::new(),
            av: Vec::new(),
            projected: Vec::new(),
        }
    }

    fn len(&self) -> usize {
        self.v.len()
    }

    /// Removes the components of `w` along the basis and along `extra`,
    /// twice. Returns the `B`-norm before and after.
    fn orthogonalize(&self, w: &mut [f64], extra: &[Vec<f64>]) -> (f64, f64) {
        let mut bw = self.b.mul_vec(w);
        let before = dot(w, &bw).max(0.0).sqrt();
        for _ in 0..2 {
            for q in self.v.iter().chain(extra) {
                let c = dot(q, &bw);
                axpy(-c, q, w);
            }
            self.b.mul_vec_into(w, &mut bw);
        }
        (before, dot(w, &bw).max(0.0).sqrt())
    }

    fn push(&mut self, v: Vec<f64>) {
        let av = self.a.mul_vec(&v);
        let col: Vec<f64> = self.v.iter().map(|q| dot(q, &av)).collect();
        let diag = dot(&v, &av);
        for (row, &c) in self.projected.iter_mut().zip(&col) {
            row.push(c);
        }
        let mut last = col;
        last.push(diag);
        self.projected.push(last);
        self.v.push(v);
        self.av.push(av);
    }

    fn projected_matrix(&self) -> DMatrix<f64> {
        let m = self.len();
        DMatrix::from_fn(m, m, |i, j| {
            if i <= j {
                self.projected[j][i]
            } else {
                self.projected[i][j]
            }
        })
    }

    /// Replaces the basis by the given Ritz vectors.
    fn restart(&mut self, values: &[f64], vectors: &DMatrix<f64>, keep: usize) {
        let mut v = Vec::with_capacity(keep);
        let mut av = Vec::with_capacity(keep);
        for c in 0..keep {
            let y = vectors.column(c);
            v.push(combine(&self.v, y.iter().copied()));
            av.push(combine(&self.av, y.iter().copied()));
        }
        self.v = v;
        self.av = av;
        self.projected = (0..keep)
            .map(|j| (0..=j).map(|i| if i == j { values[j] } else { 0.0 }).collect())
            .collect();
    }
}

struct Ritz {
    values: Vec<f64>,
    vectors: Vec<Vec<f64>>,
    residuals: Vec<f64>,
}

fn ritz_pairs(basis: &Basis, mass: &MassInverse, count: usize) -> (Ritz, Vec<f64>, DMatrix<f64>) {
    let (values, y) = sorted_symmetric_eigen(basis.projected_matrix());
    let count = count.min(values.len());
    let mut ritz = Ritz {
        values: values[..count].to_vec(),
        vectors: Vec::with_capacity(count),
        residuals: Vec::with_capacity(count),
    };
    for c in 0..count {
        let col = y.column(c);
        let x = combine(&basis.v, col.iter().copied());
        let mut r = combine(&basis.av, col.iter().copied());
        axpy(-values[c], &basis.b.mul_vec(&x), &mut r);
        ritz.residuals.push(mass.dual_norm(&r));
        ritz.vectors.push(x);
    }
    (ritz, values, y)
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random::<f64>() - 0.5).collect()
}

pub(super) fn solve(
    a: &CsrMatrix,
    b: &CsrMatrix,
    mass: &MassInverse,
    shifted: ShiftedFactor,
    opts: &SolverOptions,
) -> Result<Spectrum> {
    let n = a.dim();
    let floor = super::residual_floor(a, b);
    let p = opts.block_size(n);
    let k = opts.k;
    let max_basis = opts.max_basis.max(2 * p + k).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    let ShiftedFactor {
        mut shift,
        mut factor,
        retries,
    } = shifted;
    let mut shift_retries = retries;
    let mut refinements = 0;
    let mut symbolic: Option<SymbolicProfile> = None;

    let mut basis = Basis::new(a, b);
    let mut block: Vec<Vec<f64>> = (0..p).map(|_| random_vector(&mut rng, n)).collect();
    let mut last = Ritz {
        values: Vec::new(),
        vectors: Vec::new(),
        residuals: Vec::new(),
    };

    for iteration in 1..=opts.max_iterations {
        // Orthonormalize the candidate block and append it.
        let mut accepted: Vec<Vec<f64>> = Vec::with_capacity(block.len());
        for mut w in block.drain(..) {
            if basis.len() + accepted.len() >= n {
                break;
            }
            let mut ok = false;
            for _ in 0..3 {
                let (before, after) = basis.orthogonalize(&mut w, &accepted);
                if after > 1e-10 * before && after > 0.0 {
                    w.iter_mut().for_each(|x| *x /= after);
                    ok = true;
                    break;
                }
                w = random_vector(&mut rng, n);
            }
            if ok {
                accepted.push(w);
            }
        }
        let added = accepted.len();
        for w in accepted.iter().cloned() {
            basis.push(w);
        }

        let (ritz, values, y) = ritz_pairs(&basis, mass, k);
        let converged = ritz
            .values
            .iter()
            .zip(&ritz.residuals)
            .filter(|(l, r)| opts.accepts(**l, **r, floor))
            .count();
        let exhausted = basis.len() >= n;
        last = ritz;
        if (converged == k && last.values.len() == k) || exhausted {
            return Ok(finish(last, opts, Method::Lanczos, iteration, &factor, shift, shift_retries));
        }

        // Move the shift up under the lowest Ritz value once it is located.
        if opts.refine_shift && refinements < MAX_SHIFT_REFINEMENTS && !last.values.is_empty() {
            let theta = last.values[0];
            let res = last.residuals[0];
            let top = last.values[last.values.len() - 1];
            let spread = 0.05 * (top - theta).max(1e-3 * theta.abs().max(1.0));
            let candidate = theta - spread.max(2.0 * res);
            if res < 1e-2 * theta.abs().max(1.0) && theta - shift > 4.0 * (theta - candidate) {
                let sym = symbolic.get_or_insert_with(|| SymbolicProfile::analyze(&a.add_scaled(-candidate, b)));
                if let Ok(f) = factor_with_retries(a, b, candidate, sym, &SolverOptions { max_shift_retries: 0, ..opts.clone() }) {
                    factor = f.factor;
                    shift = f.shift;
                    refinements += 1;
                } else {
                    shift_retries += 1;
                    refinements = MAX_SHIFT_REFINEMENTS;
                }
            }
        }

        // Next block: shift-invert images of the newest directions, or of
        // the lowest Ritz vectors after a restart.
        // A basis allowed to span the whole space is never restarted; the
        // last block is cut to the remaining room instead.
        let mut seeds: Vec<Vec<f64>> = if basis.len() + p > max_basis && max_basis < n {
            let keep = (k + p).min(basis.len()).min(max_basis - p);
            basis.restart(&values, &y, keep);
            basis.v[..p.min(keep)].to_vec()
        } else if added == 0 {
            (0..p).map(|_| random_vector(&mut rng, n)).collect()
        } else {
            accepted
        };
        seeds.truncate(max_basis - basis.len().min(max_basis));
        block = seeds
            .drain(..)
            .map(|v| factor.solve(&b.mul_vec(&v)))
            .collect();
    }

    let wanted = k;
    let converged = last
        .values
        .iter()
        .zip(&last.residuals)
        .filter(|(l, r)| opts.accepts(**l, **r, floor))
        .count();
    let partial = finish(last, opts, Method::Lanczos, opts.max_iterations, &factor, shift, shift_retries);
    Err(Error::NoConvergence {
        iterations: opts.max_iterations,
        converged,
        wanted,
        partial: Box::new(partial),
    })
}

fn finish(
    ritz: Ritz,
    opts: &SolverOptions,
    method: Method,
    iterations: usize,
    factor: &super::SkylineCholesky,
    shift: f64,
    shift_retries: usize,
) -> Spectrum {
    Spectrum {
        eigenvalues: ritz.values,
        eigenvectors: opts.want_vectors.then_some(ritz.vectors),
        residual_norms: ritz.residuals,
        stats: SolverStats {
            method,
            iterations,
            factor_entries: factor.entries(),
            shift,
            shift_retries,
            wall_time_s: 0.0,
        },
    }
}
