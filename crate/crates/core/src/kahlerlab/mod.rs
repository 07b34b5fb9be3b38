//! Complex Hessians on flat complex tori and the trace evolution along
//! Kähler–Ricci flow on the round sphere.

pub mod complex;
pub mod flow;
pub mod identities;
pub mod shrinking;

pub use complex::{
    complex_hessian, condition_non1_field_check, condition_non1_on_model, ComplexTorusGrid,
    HermitianHessianField, Non1Check,
};
pub use flow::{complex_torus_run_flow, ComplexTorusFlow};
pub use identities::kahler_sigma2_residual;
pub use shrinking::{
    shrinking_run_flow, shrinking_sigma1_adjudication, AdjudicationReport, AdjudicationStep,
    ShrinkingSphereFlow, Verdict, DEFAULT_TIME_SCALE, ZERO_TOL,
};
