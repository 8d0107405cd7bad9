//! Spectral geometry toolkit for conformal spheres and Euclidean model domains.
//!
//! The crate computes Laplace–Beltrami spectra of radially conformal metrics
//! `g = e^{2f} g₀` on `S^n`, closed-form Dirichlet spectra of boxes and balls,
//! and checks eigenvalue-gap inequalities of the form `λ_{k+1} − A·λ_k ≤ B`
//! against them, reporting a signed margin for every claim.
//!
//! Sign convention: `Δ_g = −div_g grad_g`, so every spectrum is nonnegative.
//!
//! Module map:
//!
//! - [`numerics`]: quadrature, Sturm–Liouville eigensolver, dense symmetric
//!   eigendecomposition, Bessel zeros, damped Newton root solver.
//! - [`sphere`]: closed-form constants, radial profiles, conformal metrics,
//!   their spectra and critical Sobolev norms.
//! - [`moebius`]: conformal automorphisms of `S^m`, discrete measures and
//!   center-of-mass balancing.
//! - [`pipeline`]: the trial-function construction (density measures, the
//!   tangent field `F`, its zero, the bilinear form `G_q`, gap certificate).
//! - [`verify`]: inequality checkers producing [`verify::InequalityReport`].
//! - [`dirichlet`]: rectangle/ball Dirichlet spectra and disjoint unions.

pub mod dirichlet;
pub mod error;
pub mod moebius;
pub mod numerics;
pub mod pipeline;
pub mod spectrum;
pub mod sphere;
pub mod verify;

pub use error::{Error, Result};
pub use spectrum::{Convention, Spectrum, SpectrumEntry};
