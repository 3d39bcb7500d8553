//! The transverse Dirichlet-Neumann problem `-u'' = τ u` on `(0, 1)` with
//! `u(0) = 0`, `u'(1) = 0`.
//!
//! Its normalized modes are `χ_k(t) = √2 sin((2k-1)πt/2)` with eigenvalues
//! `((2k-1)π/2)²`. Only odd multiples of `π/2` satisfy the Neumann end.

use std::f64::consts::{FRAC_PI_2, SQRT_2};

use crate::{Error, Result};

/// Mode `χ_k`, `k ≥ 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TransverseMode {
    index: usize,
}

impl TransverseMode {
    pub fn new(index: usize) -> Result<Self> {
        if index == 0 {
            return Err(Error::InvalidArgument("transverse mode index starts at 1".into()));
        }
        Ok(TransverseMode { index })
    }

    pub fn index(self) -> usize {
        self.index
    }

    fn wavenumber(self) -> f64 {
        (2 * self.index - 1) as f64 * FRAC_PI_2
    }

    pub fn eigenvalue(self) -> f64 {
        let k = self.wavenumber();
        k * k
    }

    pub fn value(self, t: f64) -> f64 {
        SQRT_2 * (self.wavenumber() * t).sin()
    }

    pub fn derivative(self, t: f64) -> f64 {
        SQRT_2 * self.wavenumber() * (self.wavenumber() * t).cos()
    }
}

fn check_t(t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("t = {t} outside [0, 1]")))
    }
}

/// `χ_k(t) = √2 sin((2k-1)πt/2)`.
pub fn chi(k: usize, t: f64) -> Result<f64> {
    check_t(t)?;
    Ok(TransverseMode::new(k)?.value(t))
}

pub fn chi_derivative(k: usize, t: f64) -> Result<f64> {
    check_t(t)?;
    Ok(TransverseMode::new(k)?.derivative(t))
}

/// `((2k-1)π/2)²`.
pub fn transverse_eigenvalue(k: usize) -> Result<f64> {
    Ok(TransverseMode::new(k)?.eigenvalue())
}

/// Composite Simpson weights on the uniform grid `t_j = j/n`, `j = 0..=n`.
pub fn simpson_weights(intervals: usize) -> Result<Vec<f64>> {
    if intervals < 2 || !intervals.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "Simpson quadrature needs an even number of intervals, got {intervals}"
        )));
    }
    let h = 1.0 / intervals as f64;
    Ok((0..=intervals)
        .map(|j| {
            let c = if j == 0 || j == intervals {
                1.0
            } else if j % 2 == 1 {
                4.0
            } else {
                2.0
            };
            c * h / 3.0
        })
        .collect())
}

/// Grid function on (surface grid) × (uniform t-grid on `[0, 1]`), stored
/// surface-major: `values[i * (t_intervals + 1) + j] = ψ(x_i, t_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorField {
    pub surface_points: usize,
    pub t_intervals: usize,
    pub values: Vec<f64>,
}

impl TensorField {
    pub fn new(surface_points: usize, t_intervals: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != surface_points * (t_intervals + 1) {
            return Err(Error::InvalidArgument(format!(
                "field has {} values, expected {} x {}",
                values.len(),
                surface_points,
                t_intervals + 1
            )));
        }
        Ok(TensorField {
            surface_points,
            t_intervals,
            values,
        })
    }

    pub fn from_fn(
        surface_points: usize,
        t_intervals: usize,
        f: impl Fn(usize, f64) -> f64,
    ) -> Self {
        let values = (0..surface_points)
            .flat_map(|i| (0..=t_intervals).map(move |j| (i, j as f64 / t_intervals as f64)))
            .map(|(i, t)| f(i, t))
            .collect();
        TensorField {
            surface_points,
            t_intervals,
            values,
        }
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * (self.t_intervals + 1) + j]
    }
}

/// Result of splitting `ψ = φ ⊗ χ_1 + ψ_⊥`.
#[derive(Clone, Debug, PartialEq)]
pub struct Projection {
    /// `φ(x_i) = ∫ ψ(x_i, t) χ_1(t) dt`.
    pub phi: Vec<f64>,
    /// `‖ψ_⊥‖ / ‖ψ‖` in the unweighted product norm.
    pub orthogonal_fraction: f64,
}

/// Projects `field` onto the ground transverse mode. `surface_weights` are
/// the quadrature weights of the surface grid (`|g|^{1/2} dx`); the
/// t-integrals use composite Simpson.
pub fn transverse_project(field: &TensorField, surface_weights: &[f64]) -> Result<Projection> {
    if surface_weights.len() != field.surface_points {
        return Err(Error::InvalidArgument(format!(
            "{} surface weights for {} surface points",
            surface_weights.len(),
            field.surface_points
        )));
    }
    let nt = field.t_intervals;
    let tw = simpson_weights(nt)?;
    let chi1 = TransverseMode::new(1)?;
    let chi: Vec<f64> = (0..=nt).map(|j| chi1.value(j as f64 / nt as f64)).collect();

    let mut phi = Vec::with_capacity(field.surface_points);
    let mut total = 0.0;
    let mut orth = 0.0;
    for (i, w) in surface_weights.iter().enumerate() {
        let p: f64 = (0..=nt).map(|j| tw[j] * field.at(i, j) * chi[j]).sum();
        for j in 0..=nt {
            let v = field.at(i, j);
            let r = v - p * chi[j];
            total += w * tw[j] * v * v;
            orth += w * tw[j] * r * r;
        }
        phi.push(p);
    }
    if !(total > 0.0) {
        return Err(Error::ZeroField);
    }
    Ok(Projection {
        phi,
        orthogonal_fraction: (orth / total).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn chi_examples() {
        assert_eq!(chi(1, 0.0).unwrap(), 0.0);
        assert!((chi(1, 1.0).unwrap() - SQRT_2).abs() < 1e-15);
        assert!((chi(2, 1.0 / 3.0).unwrap() - SQRT_2).abs() < 1e-15);
        assert!(chi(0, 0.5).is_err());
        assert!(chi(1, 1.5).is_err());
    }

    #[test]
    fn boundary_conditions_hold() {
        for k in 1..6 {
            assert_eq!(chi(k, 0.0).unwrap(), 0.0);
            assert!(chi_derivative(k, 1.0).unwrap().abs() < 1e-13);
        }
    }

    /// Dense 1D finite-difference DN operator on `(0, 1)`, refined until the
    /// three lowest eigenvalues settle.
    fn fd_dn_eigenvalues(n: usize) -> Vec<f64> {
        let h = 1.0 / n as f64;
        // Unknowns u_1..u_n (u_0 = 0); ghost node gives u_{n+1} = u_{n-1}.
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 2.0 / (h * h);
            if i > 0 {
                m[(i, i - 1)] = -1.0 / (h * h);
            }
            if i + 1 < n {
                m[(i, i + 1)] = -1.0 / (h * h);
            }
        }
        m[(n - 1, n - 2)] = -2.0 / (h * h);
        // Symmetrize with the half-weight at the Neumann end.
        let mut w = vec![1.0f64; n];
        w[n - 1] = 0.5;
        let s = DMatrix::from_fn(n, n, |i, j| m[(i, j)] * (w[i] / w[j]).sqrt());
        let mut e: Vec<f64> = s.symmetric_eigenvalues().iter().copied().collect();
        e.sort_by(f64::total_cmp);
        e.truncate(3);
        e
    }

    #[test]
    fn eigenvalues_match_refined_finite_differences() {
        let coarse = fd_dn_eigenvalues(400);
        let fine = fd_dn_eigenvalues(800);
        for (k, (c, f)) in coarse.iter().zip(&fine).enumerate() {
            let extrapolated = (4.0 * f - c) / 3.0;
            let exact = transverse_eigenvalue(k + 1).unwrap();
            assert!((extrapolated - exact).abs() < 1e-6 * exact, "k={k}: {extrapolated} vs {exact}");
        }
        assert!((transverse_eigenvalue(1).unwrap() - 2.4674011002723395).abs() < 1e-15);
        assert!((transverse_eigenvalue(2).unwrap() - (1.5 * PI).powi(2)).abs() < 1e-12);
    }

    #[test]
    fn simpson_gram_matrix_is_identity() {
        let n = 256;
        let w = simpson_weights(n).unwrap();
        for a in 1..=5 {
            for b in 1..=5 {
                let g: f64 = (0..=n)
                    .map(|j| {
                        let t = j as f64 / n as f64;
                        w[j] * chi(a, t).unwrap() * chi(b, t).unwrap()
                    })
                    .sum();
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((g - expect).abs() < 1e-7, "({a},{b}) -> {g}");
            }
        }
        assert!(simpson_weights(7).is_err());
    }

    #[test]
    fn separable_fields() {
        let (ns, nt) = (20, 64);
        let weights = vec![0.1; ns];
        let phi0 = |i: usize| 1.0 + (i as f64 * 0.3).sin();
        let f1 = TensorField::from_fn(ns, nt, |i, t| phi0(i) * chi(1, t).unwrap());
        let p = transverse_project(&f1, &weights).unwrap();
        assert!(p.orthogonal_fraction < 1e-6);
        for (i, v) in p.phi.iter().enumerate() {
            assert!((v - phi0(i)).abs() < 1e-6);
        }
        let f2 = TensorField::from_fn(ns, nt, |i, t| phi0(i) * chi(2, t).unwrap());
        let p = transverse_project(&f2, &weights).unwrap();
        assert!((p.orthogonal_fraction - 1.0).abs() < 1e-6);

        let zero = TensorField::from_fn(ns, nt, |_, _| 0.0);
        assert!(matches!(transverse_project(&zero, &weights), Err(Error::ZeroField)));
    }

    proptest! {
        #[test]
        fn projection_is_idempotent(c in proptest::collection::vec(-2.0f64..2.0, 4)) {
            let (ns, nt) = (16, 64);
            let phi0 = |i: usize| c[0] + c[1] * (i as f64 * 0.4).cos() + c[2] * (i as f64 * 0.1).sin();
            prop_assume!((0..ns).any(|i| phi0(i).abs() > 1e-3));
            let f = TensorField::from_fn(ns, nt, |i, t| phi0(i) * chi(1, t).unwrap());
            let p = transverse_project(&f, &vec![1.0; ns]).unwrap();
            prop_assert!(p.orthogonal_fraction < 1e-6);
            let again = TensorField::from_fn(ns, nt, |i, t| p.phi[i] * chi(1, t).unwrap());
            let q = transverse_project(&again, &vec![1.0; ns]).unwrap();
            for (a, b) in p.phi.iter().zip(&q.phi) {
                prop_assert!((a - b).abs() < 1e-6 * (1.0 + a.abs()));
            }
        }

        #[test]
        fn surface_gradient_of_orthogonal_part_stays_orthogonal(c in proptest::collection::vec(-2.0f64..2.0, 4)) {
            // ψ_⊥(x, t) = f(x) χ_2(t) + g(x) χ_3(t); its x-derivative by
            // central differences must still have zero χ_1 component.
            let (ns, nt) = (32, 128);
            let dx = 0.05;
            let f = |x: f64| c[0] * x.sin() + c[1];
            let g = |x: f64| c[2] * (2.0 * x).cos() + c[3] * x;
            let perp = |x: f64, t: f64| f(x) * chi(2, t).unwrap() + g(x) * chi(3, t).unwrap();
            let grad = TensorField::from_fn(ns, nt, |i, t| {
                let x = i as f64 * dx;
                (perp(x + 1e-4, t) - perp(x - 1e-4, t)) / 2e-4
            });
            let w = simpson_weights(nt).unwrap();
            for i in 0..ns {
                let inner: f64 = (0..=nt).map(|j| w[j] * grad.at(i, j) * chi(1, j as f64 / nt as f64).unwrap()).sum();
                prop_assert!(inner.abs() < 1e-6);
            }
        }
    }
}
