//! Residuals of the flat-space evolution identities for σ_k of the Hessian
//! along the heat flow.
//!
//! Time derivatives are never taken by stepping: along `u_t = Δu` the Hessian
//! obeys `∂_t A = ΔA`, so `∂_t σ_k = tr(T_{k−1}(A) ΔA)` is evaluated from the
//! Hessian of `Δu` at the same instant. Spatial Laplacians of the nonlinear
//! σ-fields are taken spectrally on a grid fine enough to hold the products
//! without aliasing, then restricted back to the input nodes.

use nalgebra::DMatrix;

use super::grid::{ScalarField, TorusGrid};
use super::hessian::Jet;
use super::spectral::{restrict, Spectrum};
use crate::error::{check_range, Error, Result};
use crate::fields::ResidualField;
use crate::symfun::{newton_sequence, trace_product};

/// Evaluation setting for an identity whose products have `degree` factors:
/// the data spectrum on the smallest refinement (at most 2×) whose Nyquist
/// band clears the products, and the band those products occupy. Modes above
/// the data band carry only roundoff and are dropped so that derivative
/// symbols do not amplify them.
pub(crate) struct Evaluation {
    pub(crate) spectrum: Spectrum,
    pub(crate) product_band: usize,
}

pub(crate) fn evaluation_spectrum(f: &ScalarField, degree: usize) -> Result<Evaluation> {
    let s = f.spectrum();
    let n = f.grid().n();
    let band = s.bandwidth(BAND_TOL);
    let needed = 2 * (degree * band + 1);
    let mut m = n;
    while m < needed && m < 2 * n {
        m *= 2;
    }
    let s = if band < n / 2 { s.truncate(band) } else { s };
    let spectrum = if m == n { s } else { s.resample(m)? };
    Ok(Evaluation {
        spectrum,
        product_band: degree * band,
    })
}

/// Coefficients below this fraction of the largest are treated as roundoff.
const BAND_TOL: f64 = 1e-13;

fn filtered(values: Vec<f64>, grid: &TorusGrid, band: usize) -> Spectrum {
    let s = ScalarField::from_raw(grid.clone(), values).spectrum();
    if band < grid.n() / 2 {
        s.truncate(band)
    } else {
        s
    }
}

pub(crate) fn laplacian_of(values: Vec<f64>, grid: &TorusGrid, band: usize) -> Vec<f64> {
    filtered(values, grid, band).laplacian().into_samples()
}

pub(crate) fn gradient_of(values: Vec<f64>, grid: &TorusGrid, band: usize) -> Result<Vec<Vec<f64>>> {
    let s = filtered(values, grid, band);
    (0..grid.dim())
        .map(|a| Ok(s.derivative(&[a])?.into_samples()))
        .collect()
}

pub(crate) fn back_to(values: &[f64], fine: &TorusGrid, coarse: &TorusGrid) -> Vec<f64> {
    if fine.n() == coarse.n() {
        values.to_vec()
    } else {
        restrict(values, fine, coarse)
    }
}

/// `Σ_i tr(∇_i T_{k−1}(A) ∇_i A)` at one node, with `∇_i T` carried through
/// the Newton recursion
/// `∇_i T_j = (∇_i σ_j) I − (∇_i T_{j−1}) A − T_{j−1} ∇_i A`,
/// `∇_i σ_j = tr(T_{j−1} ∇_i A)`.
pub(crate) fn contraction_at(a: &DMatrix<f64>, grads: &[DMatrix<f64>], k: usize) -> f64 {
    let n = a.nrows();
    let mut t = DMatrix::<f64>::identity(n, n);
    let mut dt: Vec<DMatrix<f64>> = grads.iter().map(|_| DMatrix::zeros(n, n)).collect();
    for j in 1..k {
        let prod = &t * a;
        let sigma = prod.trace() / j as f64;
        let next_dt: Vec<DMatrix<f64>> = grads
            .iter()
            .zip(&dt)
            .map(|(g, d)| {
                let dsigma = trace_product(&t, g);
                let mut m = -(d * a) - &t * g;
                for r in 0..n {
                    m[(r, r)] += dsigma;
                }
                m
            })
            .collect();
        let mut next_t = -prod;
        for r in 0..n {
            next_t[(r, r)] += sigma;
        }
        t = next_t;
        dt = next_dt;
    }
    dt.iter().zip(grads).map(|(d, g)| trace_product(d, g)).sum()
}

fn check_k(f: &ScalarField, k: usize, min_k: usize) -> Result<()> {
    if k < min_k {
        return Err(Error::InvalidArgument(format!("k must be >= {min_k}, got {k}")));
    }
    check_range(k, f.grid().dim())
}

/// `(∂_t − Δ)σ_1` with `∂_t σ_1 = tr(ΔA)`; zero to roundoff in flat space.
pub fn residual_sigma1(f: &ScalarField) -> Result<ResidualField> {
    let ev = evaluation_spectrum(f, 1)?;
    let jet = Jet::new(&ev.spectrum, false, true)?;
    let n = jet.dim();
    let g = &jet.grid;
    let trace = |comps: &Vec<Vec<f64>>, p: usize| -> f64 {
        (0..n).map(|i| comps[jet.index.pair(i, i)][p]).sum()
    };
    let dt: Vec<f64> = (0..g.len()).map(|p| trace(&jet.lap_hessian, p)).collect();
    let sigma1: Vec<f64> = (0..g.len()).map(|p| trace(&jet.hessian, p)).collect();
    let lap = laplacian_of(sigma1, g, ev.product_band);
    let res: Vec<f64> = dt.iter().zip(&lap).map(|(a, b)| a - b).collect();
    Ok(ResidualField::new(back_to(&res, g, f.grid())))
}

/// Pointwise `Σ_i tr(∇_i T_{k−1}(A) ∇_i A)`.
pub fn newton_gradient_contraction(f: &ScalarField, k: usize) -> Result<ScalarField> {
    check_k(f, k, 1)?;
    let jet = Jet::new(&f.spectrum(), true, false)?;
    let n = jet.dim();
    let values = (0..jet.grid.len())
        .map(|p| {
            let a = jet.hessian_at(p);
            let grads: Vec<_> = (0..n).map(|i| jet.grad_hessian_at(p, i)).collect();
            contraction_at(&a, &grads, k)
        })
        .collect();
    Ok(ScalarField::from_raw(jet.grid.clone(), values))
}

/// `(∂_t − Δ)σ_k + Σ_i tr(∇_i T_{k−1} ∇_i A)`, which vanishes identically for
/// solutions of the flat heat equation.
pub fn residual_sigma_k(f: &ScalarField, k: usize) -> Result<ResidualField> {
    check_k(f, k, 2)?;
    let ev = evaluation_spectrum(f, k)?;
    let jet = Jet::new(&ev.spectrum, true, true)?;
    let n = jet.dim();
    let g = &jet.grid;
    let mut sigma = Vec::with_capacity(g.len());
    let mut partial = Vec::with_capacity(g.len());
    for p in 0..g.len() {
        let a = jet.hessian_at(p);
        let (s, t) = newton_sequence(&a, k);
        let dt = trace_product(&t[k - 1], &jet.lap_hessian_at(p));
        let grads: Vec<_> = (0..n).map(|i| jet.grad_hessian_at(p, i)).collect();
        sigma.push(s[k]);
        partial.push(dt + contraction_at(&a, &grads, k));
    }
    let lap = laplacian_of(sigma, g, ev.product_band);
    let res: Vec<f64> = partial.iter().zip(&lap).map(|(a, b)| a - b).collect();
    Ok(ResidualField::new(back_to(&res, g, f.grid())))
}

/// `F = σ_1²/2` and `H = σ_2/F`, the latter only on the mask `{σ_1 > δ}`.
#[derive(Debug, Clone)]
pub struct QuotientFields {
    pub f: ScalarField,
    /// `σ_2/F` on the mask, `0` elsewhere.
    pub h: Vec<f64>,
    pub mask: Vec<bool>,
    pub delta: f64,
}

impl QuotientFields {
    pub fn min_h(&self) -> Option<f64> {
        ResidualField::masked(self.h.clone(), self.mask.clone()).min()
    }
}

#[derive(Debug, Clone)]
pub struct QuotientResidual {
    pub fields: QuotientFields,
    /// `G = (∂_t − Δ)H − 2⟨∇H, ∇F⟩/F` assembled with the quotient rule.
    pub g: ResidualField,
    /// `Lσ_2/F + σ_2|∇σ_1|²/F²`.
    pub reduced: ResidualField,
    /// `sup |G − reduced|` over the mask.
    pub reduced_gap: f64,
    /// `sup |LF + |∇σ_1|²|` over the whole grid.
    pub lf_gap: f64,
    pub min_g: f64,
}

#[derive(Debug, Clone)]
pub enum QuotientOutcome {
    MaskEmpty { delta: f64 },
    Evaluated(Box<QuotientResidual>),
}

impl QuotientOutcome {
    pub fn evaluated(&self) -> Option<&QuotientResidual> {
        match self {
            QuotientOutcome::Evaluated(q) => Some(q),
            QuotientOutcome::MaskEmpty { .. } => None,
        }
    }
}

/// Default mask threshold `1e−3 · max σ_1`.
pub fn default_quotient_delta(f: &ScalarField) -> Result<f64> {
    let s1 = super::hessian::sigma_field(f, 1)?;
    Ok(1e-3 * s1.min_max().1)
}

/// Quotient analysis on `{σ_1 > δ}`. Reports the sign of `G`; asserts nothing.
pub fn quotient_residual(f: &ScalarField, delta: f64) -> Result<QuotientOutcome> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidArgument(format!("mask threshold must be positive, got {delta}")));
    }
    if f.grid().dim() < 2 {
        return Err(Error::InvalidArgument("quotient analysis needs dimension >= 2".into()));
    }
    let ev = evaluation_spectrum(f, 2)?;
    let jet = Jet::new(&ev.spectrum, true, true)?;
    let pb = ev.product_band;
    let n = jet.dim();
    let g = jet.grid.clone();
    let len = g.len();

    let mut sigma1 = vec![0.0; len];
    let mut sigma2 = vec![0.0; len];
    let mut dt_sigma2 = vec![0.0; len];
    let mut dt_f = vec![0.0; len];
    let mut grad_sigma1_sq = vec![0.0; len];
    for p in 0..len {
        let a = jet.hessian_at(p);
        let lap_a = jet.lap_hessian_at(p);
        let (s, t) = newton_sequence(&a, 2);
        sigma1[p] = s[1];
        sigma2[p] = s[2];
        dt_sigma2[p] = trace_product(&t[1], &lap_a);
        dt_f[p] = s[1] * lap_a.trace();
        grad_sigma1_sq[p] = (0..n)
            .map(|i| {
                let d: f64 = (0..n).map(|a| jet.third[jet.index.triple(a, a, i)][p]).sum();
                d * d
            })
            .sum();
    }
    let f_vals: Vec<f64> = sigma1.iter().map(|s| 0.5 * s * s).collect();
    let lap_sigma2 = laplacian_of(sigma2.clone(), &g, pb);
    let lap_f = laplacian_of(f_vals.clone(), &g, pb);
    let grad_f = gradient_of(f_vals.clone(), &g, pb)?;
    let grad_sigma2 = gradient_of(sigma2.clone(), &g, pb)?;

    let coarse = f.grid();
    let r = |v: &[f64]| back_to(v, &g, coarse);
    let (sigma1, sigma2, f_vals) = (r(&sigma1), r(&sigma2), r(&f_vals));
    let l_sigma2: Vec<f64> = r(&dt_sigma2).iter().zip(r(&lap_sigma2)).map(|(a, b)| a - b).collect();
    let l_f: Vec<f64> = r(&dt_f).iter().zip(r(&lap_f)).map(|(a, b)| a - b).collect();
    let grad_f: Vec<Vec<f64>> = grad_f.iter().map(|v| r(v)).collect();
    let grad_sigma2: Vec<Vec<f64>> = grad_sigma2.iter().map(|v| r(v)).collect();
    let grad_sigma1_sq = r(&grad_sigma1_sq);

    let mask: Vec<bool> = sigma1.iter().map(|&s| s > delta).collect();
    let lf_gap = l_f
        .iter()
        .zip(&grad_sigma1_sq)
        .fold(0.0, |acc: f64, (lf, g2)| acc.max((lf + g2).abs()));

    let m = coarse.len();
    let mut h = vec![0.0; m];
    let mut g_field = vec![0.0; m];
    let mut reduced = vec![0.0; m];
    for p in (0..m).filter(|&p| mask[p]) {
        let ff = f_vals[p];
        let s2 = sigma2[p];
        h[p] = s2 / ff;
        let dot = |x: &[Vec<f64>], y: &[Vec<f64>]| -> f64 { (0..n).map(|i| x[i][p] * y[i][p]).sum() };
        let grad_f_sq = dot(&grad_f, &grad_f);
        let sig2_dot_f = dot(&grad_sigma2, &grad_f);
        // quotient rule for L(σ_2 / F)
        let l_h = l_sigma2[p] / ff - s2 * l_f[p] / (ff * ff) - 2.0 * s2 / (ff * ff * ff) * grad_f_sq
            + 2.0 / (ff * ff) * sig2_dot_f;
        // ⟨∇H, ∇F⟩ with ∇H = ∇σ_2/F − σ_2 ∇F/F²
        let grad_h_dot_f = sig2_dot_f / ff - s2 * grad_f_sq / (ff * ff);
        g_field[p] = l_h - 2.0 * grad_h_dot_f / ff;
        reduced[p] = l_sigma2[p] / ff + s2 * grad_sigma1_sq[p] / (ff * ff);
    }

    let fields = QuotientFields {
        f: ScalarField::from_raw(coarse.clone(), f_vals),
        h,
        mask: mask.clone(),
        delta,
    };
    let g_res = ResidualField::masked(g_field, mask.clone());
    let Some(min_g) = g_res.min() else {
        return Ok(QuotientOutcome::MaskEmpty { delta });
    };
    let reduced = ResidualField::masked(reduced, mask);
    let reduced_gap = g_res
        .active()
        .zip(reduced.active())
        .fold(0.0, |acc: f64, (a, b)| acc.max((a - b).abs()));
    Ok(QuotientOutcome::Evaluated(Box::new(QuotientResidual {
        fields,
        g: g_res,
        reduced,
        reduced_gap,
        lf_gap,
        min_g,
    })))
}
