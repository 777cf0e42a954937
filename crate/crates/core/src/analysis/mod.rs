//! Error analysis of the plane-wave discretization. `study` drives the
//! convergence runs; the other modules hold the formulas it tabulates.

pub mod constants;
pub mod correction;
pub mod fits;
pub mod fourier_tail;
pub mod identity;
pub mod study;
pub mod tail;

pub use constants::{
    cubic_tail_constant, spherical_tail_constant, tail_constant, CorrectionConstants,
};
pub use correction::{
    correction_from_values, first_order_correction, interference_prediction, psi_at_nuclei,
};
pub use fits::{richardson_reference, slope_fit};
pub use fourier_tail::{
    fourier_tail_profile, fourier_tail_residuals, fourier_tail_residuals_with,
    tail_corrected_point_values,
};
pub use identity::error_identity_check;
pub use study::{
    cancellation_metrics, convergence_study, default_reference_cutoff, phase_anchor,
    CancellationRow, ConvergenceRecord, ConvergenceStudy, ReferencePolicy, ReferenceSummary,
    StudyOptions,
};
pub use tail::{lattice_zeta, phased_tail_sum, tail_sum};
