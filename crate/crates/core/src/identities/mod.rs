//! Numerical verification of the soliton identities and estimates.

pub mod checks;
pub mod estimates;
pub mod sample;

pub use checks::{
    check_delta_eta, check_delta_eta_weighted, check_grad_h, conserved_quantity, csv_summary, delta_h_residual,
    quotient_residual, run_all, simons_residual, umbilicity_gap, ConservedQuantity, IdentityReport,
};
pub use estimates::{barta_lambda1_bound, height_estimate_check, slice_geometry, BartaReport, HeightReport, Verdict};
pub use sample::{Extent, ImmersionSample, Jet, SampleKind};
