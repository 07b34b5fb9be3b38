use nalgebra::DMatrix;
use num_complex::Complex64;

use super::complex::{wirtinger, ComplexTorusGrid};
use crate::error::{Error, Result};
use crate::fields::ResidualField;
use crate::symfun::{newton_sequence, trace_product};
use crate::toruslab::hessian::Jet;
use crate::toruslab::identities::laplacian_of;
use crate::toruslab::ScalarField;

const BAND_TOL: f64 = 1e-13;

/// `(∂_t − Δ)σ_2(A) − [−|∇σ_1(A)|² + Σ_i tr(∇_iA ∇_iA)]` for the complex
/// Hessian `A` along the real heat flow on a flat complex surface, with `Δ`
/// the real Laplacian, `∂_t A = ΔA` and `i` running over the four real
/// coordinates.
///
/// No refinement is needed: `σ_2` has twice the data band and only its
/// Laplacian is taken, whose symbol is even, so nodal values are exact while
/// `2·band ≤ N/2`.
pub fn kahler_sigma2_residual(f: &ScalarField) -> Result<ResidualField> {
    let grid = ComplexTorusGrid::from_torus(f.grid())?;
    if grid.m() != 2 {
        return Err(Error::InvalidArgument(format!(
            "the σ_2 identity needs complex dimension 2, got {}",
            grid.m()
        )));
    }
    let n = f.grid().n();
    let spectrum = f.spectrum();
    let band = spectrum.bandwidth(BAND_TOL);
    let spectrum = if band < n / 2 { spectrum.truncate(band) } else { spectrum };
    let jet = Jet::new(&spectrum, true, true)?;
    let len = f.grid().len();
    let mut sigma2 = Vec::with_capacity(len);
    let mut rest = Vec::with_capacity(len);
    for p in 0..len {
        let a = wirtinger(&jet.hessian_at(p), 2);
        let dt_a = wirtinger(&jet.lap_hessian_at(p), 2);
        let grads: Vec<DMatrix<Complex64>> = (0..4).map(|i| wirtinger(&jet.grad_hessian_at(p, i), 2)).collect();
        let (s, t) = newton_sequence(&a, 2);
        let dt_sigma2 = trace_product(&t[1], &dt_a);
        let grad_sigma1_sq: f64 = grads.iter().map(|g| g.trace().re.powi(2)).sum();
        let gradient_terms: f64 = grads.iter().map(|g| trace_product(g, g)).sum();
        sigma2.push(s[2].re);
        rest.push(dt_sigma2 - (-grad_sigma1_sq + gradient_terms));
    }
    let lap = laplacian_of(sigma2, f.grid(), 2 * band);
    Ok(ResidualField::new(rest.iter().zip(&lap).map(|(r, l)| r - l).collect()))
}
