//! Pseudo-spectral heat flow on flat tori and the σ_k identities along it.

pub mod flow;
pub mod grid;
pub mod hessian;
pub mod identities;
pub mod initial;
pub mod snapshot;
pub mod spectral;

pub use flow::{run_flow, TorusFlow};
pub use grid::{ScalarField, TorusGrid};
pub use hessian::{hessian_field, sigma_field, HessianField};
pub use identities::{
    default_quotient_delta, newton_gradient_contraction, quotient_residual, residual_sigma1,
    residual_sigma_k, QuotientFields, QuotientOutcome, QuotientResidual,
};
pub use initial::{initial_data, Mode, TorusPreset};
pub use spectral::{heat_propagate, laplacian, spectral_derivative, Spectrum};
