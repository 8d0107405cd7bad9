//! Trial-function construction: density measures built from eigenfunction
//! combinations, the tangent field `F` on `S^{2k}` and its zero, the bilinear
//! form `G_q`, and the resulting gap certificate.

mod basis;
mod certificate;
mod field;
mod form;

pub use basis::{EigenBasis, Mode, DEFAULT_FIBER_DEGREE, DEFAULT_THETA_POINTS};
pub use field::{
    density_measure, evaluate_field, evaluate_field_f, find_vanishing_point, find_vanishing_point_with, lipschitz_probe,
    FieldValue, SearchOptions, VanishingPoint, DEFAULT_SEEDS, ZERO_TOL,
};
pub use form::{
    assemble_bilinear_form, conformal_energy, conformal_energy_with, product_rule_residual, rotated_coordinates,
    BilinearForm, ENERGY_FIBER_DEGREE, ENERGY_THETA_POINTS,
};
pub use certificate::{
    gap_certificate, gap_certificate_with, LinkSlack, PipelineOptions, TrialData, TrialDiagnostics, MAX_K,
};
