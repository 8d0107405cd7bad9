//! Geometry of `S^n` and of radially conformal metrics `g = e^{2f} g₀` on it.

mod constants;
mod grid;
mod harmonics;
mod metric;
mod profile;

pub use constants::{
    ball_volume, geometric_constants, harmonic_dimension, round_spectrum, sphere_volume, GeometricConstants,
    MAX_DIMENSION, MIN_DIMENSION,
};
pub use grid::{FiberRule, GridFunction, ProductGrid};
pub use harmonics::{Harmonic, SphericalHarmonics};
pub use metric::{
    conformal_spectrum, critical_norm, radial_metric_assemble, radial_metric_assemble_with_mesh, ricci_eigenvalues,
    scalar_curvature, yamabe_quotient, ConformalMetric, BRANCH_MERGE_TOL, DEFAULT_MESH_NODES,
};
pub use profile::{ProfileFamily, RadialProfile, TabulatedProfile};
