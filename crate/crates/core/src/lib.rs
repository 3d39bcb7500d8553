//! Spectral laboratory for thin tubular neighbourhoods of hypersurfaces.
//!
//! A tube `{x + ε t n(x) : x ∈ Σ, t ∈ (0,1)}` carries Dirichlet conditions on
//! the base surface `Σ` and Neumann conditions on the parallel surface at
//! distance `ε`. Its low eigenvalues behave like
//!
//! ```text
//! λ_n(ε) = (π / 2ε)² + μ_n(ε) + O(1)
//! ```
//!
//! where `μ_n(ε)` are eigenvalues of the surface operator `-Δ_g + κ/ε` and
//! `κ` is the sum of the principal curvatures. This crate assembles both sides
//! as sparse symmetric pencils, solves them with a shift-invert block Lanczos
//! eigensolver, cross-checks them against independent radial oracles and runs
//! ε-sweeps that test the expansion.
//!
//! Module map:
//!
//! * [`geometry`]: supported hypersurfaces, curvatures and Fermi metric data.
//! * [`transverse`]: the Dirichlet-Neumann interval modes and projections.
//! * [`assembly`]: finite-difference quadratic forms as [`assembly::OperatorPair`]s.
//! * [`eigensolve`]: lowest eigenpairs of `A x = λ B x`.
//! * [`oracles`]: closed forms and radial ODE reference spectra.
//! * [`harness`]: configuration, sweeps, diagnostics, reports and the
//!   acceptance suite.

pub mod assembly;
pub mod eigensolve;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod oracles;
pub mod sparse;
pub mod transverse;

pub use error::{Error, Result};
