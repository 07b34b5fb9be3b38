//! Heat flow and covariant tensor calculus on the round 2-sphere.

pub mod flow;
pub mod grid;
pub mod identities;
pub mod initial;
pub mod snapshot;
pub mod tensor;
pub mod transform;

pub use flow::{sphere_run_flow, SphereFlow};
pub use grid::SphereGrid;
pub use identities::{
    commutation_residual, curvature_term_gap, riemannian_sigma2_residual, sphere_sigma1_residual,
    sphere_sigma_fields, CurvatureSign, SphereResidual,
};
pub use initial::{initial_spectrum, sphere_initial_data, SpherePreset};
pub use tensor::{covariant_derivative, covariant_hessian, covariant_third, rough_laplacian, CovariantTensorField};
pub use transform::{sh_analyze, sh_synthesize, sphere_heat_propagate, sphere_laplacian, SphereField, SphericalSpectrum};
