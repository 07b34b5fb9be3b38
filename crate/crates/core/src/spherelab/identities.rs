//! Residuals of the curved-space identities on the round 2-sphere.
//!
//! Curvature follows the geomodels convention `R(a,b,c,d) = κ(g_ac g_bd −
//! g_ad g_bc)`, `Ric_bd = Σ_a R(a,b,a,d)`. In that convention the commutation
//! formula reads `Hess(Δu) = ΔHess u + 2R(i,k,j,l)u_kl − Ric·A − A·Ric` with
//! `∇Ric = 0`.

use nalgebra::DMatrix;

use super::tensor::{
    covariant_derivative, hessian_in_band, rough_laplacian, third_in_band, CovariantTensorField, BAND_TOL,
};
use super::transform::{laplacian_in_band, sh_analyze, SphereField};
use crate::error::Result;
use crate::fields::ResidualField;
use crate::geomodels::{non2_contraction, RiemannTensor};
use crate::symfun::{newton_sequence, trace_product, SelfAdjoint, SymMatrix};

/// Sign of the Riemann term in the commutation formula. `Flipped` is the
/// discriminating control.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CurvatureSign {
    #[default]
    Correct,
    Flipped,
}

#[derive(Debug, Clone)]
pub struct SphereResidual {
    /// Pointwise frame norm of the residual tensor (or absolute value of a
    /// scalar residual).
    pub residual: ResidualField,
    /// Input spectrum exceeds degree `L/4` or was truncated by the transform.
    pub overflow: bool,
}

/// Detected degree of `u` and whether it overflows `L/4`.
fn data_band(u: &SphereField) -> (usize, bool) {
    let spec = sh_analyze(u);
    let band = spec.degree(BAND_TOL);
    (band, spec.truncated || 4 * band > u.grid().lmax())
}

fn curvature(u: &SphereField) -> RiemannTensor {
    RiemannTensor::constant_curvature(2, u.grid().radius().powi(-2))
}

/// `2 s R(i,k,j,l)A_kl − (Ric·A + A·Ric)_ij` in the orthonormal frame.
fn curvature_terms(a: &DMatrix<f64>, riemann: &RiemannTensor, ric: &DMatrix<f64>, sign: f64) -> DMatrix<f64> {
    let mut out = -(ric * a + a * ric);
    for i in 0..2 {
        for j in 0..2 {
            let mut s = 0.0;
            for k in 0..2 {
                for l in 0..2 {
                    s += riemann.get(i, k, j, l) * a[(k, l)];
                }
            }
            out[(i, j)] += 2.0 * sign * s;
        }
    }
    out
}

/// `Hess(Δu) − [ΔHess u + 2R(i,k,j,l)u_kl − Ric·A − A·Ric]`, the left side
/// computed from the spectral Laplacian of `u`, the right side from two
/// covariant derivatives of the Hessian.
pub fn commutation_residual(u: &SphereField, sign: CurvatureSign) -> Result<SphereResidual> {
    let (band, overflow) = data_band(u);
    let lhs = hessian_in_band(&laplacian_in_band(u, band), band)?;
    let hess = hessian_in_band(u, band)?;
    let rough = rough_laplacian(&hess)?;
    let riemann = curvature(u);
    let ric = riemann.ricci();
    let s = match sign {
        CurvatureSign::Correct => 1.0,
        CurvatureSign::Flipped => -1.0,
    };
    let values = (0..u.grid().len())
        .map(|p| {
            let a = hess.frame_matrix(p)?;
            let r = lhs.frame_matrix(p)? - rough.frame_matrix(p)? - curvature_terms(&a, &riemann, &ric, s);
            Ok(r.norm())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(SphereResidual {
        residual: ResidualField::new(values),
        overflow,
    })
}

/// `|∇f|²` of a scalar field.
pub(crate) fn gradient_norm_sq(f: &SphereField, band: usize) -> Result<Vec<f64>> {
    let grad = covariant_derivative(&CovariantTensorField::scalar_in_band(f, band))?;
    Ok((0..f.grid().len()).map(|p| grad.frame_norm_sq(p)).collect())
}

/// Pointwise frame Hessians `A = Hess u`, `∂_t A = Hess(Δu)` and the third
/// derivative used by the σ-identities.
struct SphereJet {
    band: usize,
    overflow: bool,
    hess: CovariantTensorField,
    dt_hess: CovariantTensorField,
}

impl SphereJet {
    fn new(u: &SphereField) -> Result<Self> {
        let (band, overflow) = data_band(u);
        Ok(Self {
            band,
            overflow,
            hess: hessian_in_band(u, band)?,
            dt_hess: hessian_in_band(&laplacian_in_band(u, band), band)?,
        })
    }
}

/// `(∂_t − Δ)σ_2 − [−|∇σ_1|² + Σ_i tr(∇_iA ∇_iA) − 2u_ij R(i,k,j,l) u_kl +
/// 2u_ij Ric_jl u_il]` along the heat flow, with `∂_t A = Hess(Δu)` taken
/// directly.
pub fn riemannian_sigma2_residual(u: &SphereField) -> Result<SphereResidual> {
    let grid = u.grid();
    let jet = SphereJet::new(u)?;
    let third = third_in_band(u, jet.band)?;
    let riemann = curvature(u);
    let n = grid.len();
    let mut sigma1 = Vec::with_capacity(n);
    let mut sigma2 = Vec::with_capacity(n);
    let mut dt_sigma2 = Vec::with_capacity(n);
    let mut curv = Vec::with_capacity(n);
    for p in 0..n {
        let a = jet.hess.frame_matrix(p)?;
        let b = jet.dt_hess.frame_matrix(p)?;
        let (s, t) = newton_sequence(&a, 2);
        sigma1.push(s[1]);
        sigma2.push(s[2]);
        dt_sigma2.push(trace_product(&t[1], &b));
        curv.push(non2_contraction(&SymMatrix::from_dense_projected(a), &riemann)?);
    }
    let sigma1 = SphereField::from_raw(grid.clone(), sigma1);
    let lap_sigma2 = laplacian_in_band(&SphereField::from_raw(grid.clone(), sigma2), 2 * jet.band);
    let grad_sq = gradient_norm_sq(&sigma1, jet.band)?;
    let values = (0..n)
        .map(|p| {
            let rhs = -grad_sq[p] + third.frame_norm_sq(p) + curv[p];
            (dt_sigma2[p] - lap_sigma2.values()[p] - rhs).abs()
        })
        .collect();
    Ok(SphereResidual {
        residual: ResidualField::new(values),
        overflow: jet.overflow,
    })
}

/// `(∂_t − Δ)σ_1 = tr Hess(Δu) − Δ(tr Hess u)`; zero on a fixed metric.
pub fn sphere_sigma1_residual(u: &SphereField) -> Result<ResidualField> {
    let jet = SphereJet::new(u)?;
    let lap = laplacian_in_band(&jet.hess.trace()?, jet.band);
    let dt = jet.dt_hess.trace()?;
    Ok(ResidualField::new(
        dt.values().iter().zip(lap.values()).map(|(a, b)| a - b).collect(),
    ))
}

/// `sup |brute-force frame contraction − κ(4‖A‖² − 2σ_1²)|` over the grid.
pub fn curvature_term_gap(u: &SphereField) -> Result<f64> {
    let hess = hessian_in_band(u, data_band(u).0)?;
    let riemann = curvature(u);
    let kappa = u.grid().radius().powi(-2);
    let mut gap: f64 = 0.0;
    for p in 0..u.grid().len() {
        let a = SymMatrix::from_dense_projected(hess.frame_matrix(p)?);
        let brute = non2_contraction(&a, &riemann)?;
        let s1 = a.dense().trace();
        gap = gap.max((brute - kappa * (4.0 * a.frobenius_sq() - 2.0 * s1 * s1)).abs());
    }
    Ok(gap)
}

/// Frame `σ_1` and `σ_2` of the covariant Hessian.
pub fn sphere_sigma_fields(u: &SphereField) -> Result<(SphereField, SphereField)> {
    let hess = hessian_in_band(u, data_band(u).0)?;
    let mut s1 = Vec::with_capacity(u.grid().len());
    let mut s2 = Vec::with_capacity(u.grid().len());
    for p in 0..u.grid().len() {
        let (s, _) = newton_sequence(&hess.frame_matrix(p)?, 2);
        s1.push(s[1]);
        s2.push(s[2]);
    }
    Ok((
        SphereField::from_raw(u.grid().clone(), s1),
        SphereField::from_raw(u.grid().clone(), s2),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spherelab::grid::SphereGrid;
    use std::sync::Arc;

    #[test]
    fn cos_theta_commutation() {
        let g = Arc::new(SphereGrid::new(32, 1.0).unwrap());
        let u = SphereField::from_fn(&g, |t, _| t.cos()).unwrap();
        let good = commutation_residual(&u, CurvatureSign::Correct).unwrap();
        assert!(good.residual.sup() < 1e-11, "{}", good.residual.sup());
        assert!(!good.overflow);
        let bad = commutation_residual(&u, CurvatureSign::Flipped).unwrap();
        assert!(bad.residual.sup() > 1.0);
    }

    #[test]
    fn cos_theta_sigma2() {
        let g = Arc::new(SphereGrid::new(32, 1.0).unwrap());
        let u = SphereField::from_fn(&g, |t, _| t.cos()).unwrap();
        assert!(riemannian_sigma2_residual(&u).unwrap().residual.sup() < 1e-7);
        let (_, s2) = sphere_sigma_fields(&u).unwrap();
        let exact = SphereField::from_fn(&g, |t, _| t.cos().powi(2)).unwrap();
        assert!(s2.sup_distance(&exact) < 1e-10);
        assert!(sphere_sigma1_residual(&u).unwrap().sup() < 1e-9);
    }

    #[test]
    fn mixed_modes_across_truncations() {
        for l in [16, 32, 64] {
            let g = Arc::new(SphereGrid::new(l, 1.0).unwrap());
            let u = SphereField::from_fn(&g, |t, p| {
                t.sin().powi(3) * (3.0 * p).cos() + t.cos().powi(4) - t.sin() * t.cos() * p.sin()
            })
            .unwrap();
            let comm = commutation_residual(&u, CurvatureSign::Correct).unwrap();
            assert!(comm.residual.sup() < 1e-9, "L={l}: {}", comm.residual.sup());
            let s2 = riemannian_sigma2_residual(&u).unwrap();
            assert!(s2.residual.sup() < 1e-8, "L={l}: {}", s2.residual.sup());
            assert!(curvature_term_gap(&u).unwrap() < 1e-12);
        }
    }
}
