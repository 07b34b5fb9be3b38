//! Covariant calculus on the round sphere.
//!
//! Tensors are held by their components in the orthonormal frame
//! `ê_θ = r⁻¹∂_θ`, `ê_φ = (r sin θ)⁻¹∂_φ`; coordinate components are available
//! on request. The frame connection follows from the Christoffel symbols
//! `Γ^θ_{φφ} = −sin θ cos θ`, `Γ^φ_{θφ} = cot θ`:
//! `∇_{ê_φ} ê_θ = (cot θ/r) ê_φ`, `∇_{ê_φ} ê_φ = −(cot θ/r) ê_θ`,
//! `∇_{ê_θ} = ∂` on frame components.
//!
//! Each `φ`-Fourier mode `m` of a rank-`k` frame component, continued through
//! the pole by `(θ, φ) → (−θ, φ + π)`, is a trigonometric polynomial in `θ` of
//! parity `(−1)^{m+k}`. `θ`-derivatives fit the matching cosine or sine
//! series on the Gauss nodes and differentiate it exactly, so nothing is ever
//! evaluated at a pole.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::FftDirection;

use super::grid::SphereGrid;
use super::transform::{rows_fft, sh_analyze, signed_m, SphereField};
use crate::error::{Error, Result};

const THETA: usize = 0;
const PHI: usize = 1;

/// Relative coefficient size below which a degree counts as absent.
pub(crate) const BAND_TOL: f64 = 1e-13;

/// `∂_θ` of a field whose `φ`-modes have `θ`-parity `(−1)^{m+parity}`.
pub(crate) fn d_theta(grid: &SphereGrid, values: &[f64], parity: usize) -> Vec<f64> {
    let (nt, np) = (grid.n_theta(), grid.n_phi());
    let mut rows: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    for row in rows.chunks_mut(np) {
        rows_fft(row, np, FftDirection::Forward);
    }
    let mut out = vec![Complex64::default(); nt * np];
    let mut column = vec![Complex64::default(); nt];
    for j in 0..np {
        let m = signed_m(j, np);
        let odd = (m.unsigned_abs() as usize + parity) % 2 == 1;
        let d = grid.d_theta_matrix(odd);
        for i in 0..nt {
            column[i] = rows[i * np + j];
        }
        for i in 0..nt {
            let mut acc = Complex64::default();
            for k in 0..nt {
                acc += column[k] * d[(i, k)];
            }
            out[i * np + j] = acc;
        }
    }
    for row in out.chunks_mut(np) {
        rows_fft(row, np, FftDirection::Inverse);
    }
    out.iter().map(|z| z.re / np as f64).collect()
}

/// Zero the `φ`-modes above `band` and project each remaining mode onto
/// `θ`-series of degree at most `band`.
pub(crate) fn band_filter(grid: &SphereGrid, values: &[f64], parity: usize, band: usize) -> Vec<f64> {
    if band >= grid.lmax() {
        return values.to_vec();
    }
    let (nt, np) = (grid.n_theta(), grid.n_phi());
    let mut rows: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    for row in rows.chunks_mut(np) {
        rows_fft(row, np, FftDirection::Forward);
    }
    let mut column = vec![Complex64::default(); nt];
    for j in 0..np {
        let m = signed_m(j, np).unsigned_abs() as usize;
        if m > band {
            for i in 0..nt {
                rows[i * np + j] = Complex64::default();
            }
            continue;
        }
        let odd = (m + parity) % 2 == 1;
        let Some(proj) = grid.theta_projection(odd, band) else {
            continue;
        };
        for i in 0..nt {
            column[i] = rows[i * np + j];
        }
        for i in 0..nt {
            let mut acc = Complex64::default();
            for k in 0..nt {
                acc += column[k] * proj[(i, k)];
            }
            rows[i * np + j] = acc;
        }
    }
    for row in rows.chunks_mut(np) {
        rows_fft(row, np, FftDirection::Inverse);
    }
    rows.iter().map(|z| z.re / np as f64).collect()
}

/// `∂_φ` by Fourier multiplication (the unpaired Nyquist slot is zeroed).
pub(crate) fn d_phi(grid: &SphereGrid, values: &[f64]) -> Vec<f64> {
    let np = grid.n_phi();
    let mut rows: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    for row in rows.chunks_mut(np) {
        rows_fft(row, np, FftDirection::Forward);
        for (j, z) in row.iter_mut().enumerate() {
            *z *= if j == np / 2 {
                Complex64::default()
            } else {
                Complex64::new(0.0, signed_m(j, np) as f64)
            };
        }
        rows_fft(row, np, FftDirection::Inverse);
    }
    rows.iter().map(|z| z.re / np as f64).collect()
}

/// Covariant tensor of rank 0 to 4 stored as `2^rank` frame component
/// fields. Component `(a_1, …, a_r)`, `a_s ∈ {0 = θ, 1 = φ}`, sits at
/// `Σ a_s 2^{r−s}`.
///
/// `band` bounds the spherical-harmonic degree of the underlying scalar.
/// Frame components of its covariant derivatives are spin-weighted harmonics
/// of the same degree, so each derivative first projects its input onto that
/// band; this keeps roundoff in high `φ`-modes from being amplified by
/// `1/sin θ` near the poles.
#[derive(Debug, Clone)]
pub struct CovariantTensorField {
    grid: Arc<SphereGrid>,
    rank: usize,
    band: usize,
    components: Vec<Vec<f64>>,
}

fn flat_index(idx: &[usize]) -> usize {
    idx.iter().fold(0, |acc, &a| 2 * acc + a)
}

fn multi_index(flat: usize, rank: usize) -> Vec<usize> {
    (0..rank).map(|s| (flat >> (rank - 1 - s)) & 1).collect()
}

impl CovariantTensorField {
    pub const MAX_RANK: usize = 4;

    fn check(grid: &SphereGrid, rank: usize, components: &[Vec<f64>]) -> Result<()> {
        if rank > Self::MAX_RANK {
            return Err(Error::Unsupported(format!("tensor rank {rank}")));
        }
        if components.len() != 1 << rank {
            return Err(Error::DimensionMismatch {
                expected: 1 << rank,
                got: components.len(),
            });
        }
        if let Some(c) = components.iter().find(|c| c.len() != grid.len()) {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: c.len(),
            });
        }
        Ok(())
    }

    pub fn from_frame(grid: Arc<SphereGrid>, rank: usize, components: Vec<Vec<f64>>) -> Result<Self> {
        Self::check(&grid, rank, &components)?;
        Ok(Self {
            band: grid.lmax(),
            grid,
            rank,
            components,
        })
    }

    /// From `(θ, φ)` coordinate components.
    pub fn from_coordinates(grid: Arc<SphereGrid>, rank: usize, components: Vec<Vec<f64>>) -> Result<Self> {
        Self::check(&grid, rank, &components)?;
        let components = components
            .into_iter()
            .enumerate()
            .map(|(f, c)| {
                let idx = multi_index(f, rank);
                c.iter().enumerate().map(|(p, v)| v / frame_scale(&grid, &idx, p)).collect()
            })
            .collect();
        Ok(Self {
            band: grid.lmax(),
            grid,
            rank,
            components,
        })
    }

    /// A scalar, with `band` its detected spherical-harmonic degree.
    pub fn scalar(f: &SphereField) -> Self {
        Self {
            grid: f.grid().clone(),
            rank: 0,
            band: sh_analyze(f).degree(BAND_TOL),
            components: vec![f.values().to_vec()],
        }
    }

    /// The round metric `r²(dθ² + sin²θ dφ²)`.
    pub fn metric(grid: &Arc<SphereGrid>) -> Self {
        let one = vec![1.0; grid.len()];
        let zero = vec![0.0; grid.len()];
        Self {
            grid: grid.clone(),
            rank: 2,
            band: 0,
            components: vec![one.clone(), zero.clone(), zero, one],
        }
    }

    /// A scalar known to have degree at most `band`.
    pub(crate) fn scalar_in_band(f: &SphereField, band: usize) -> Self {
        Self {
            grid: f.grid().clone(),
            rank: 0,
            band: band.min(f.grid().lmax()),
            components: vec![f.values().to_vec()],
        }
    }

    pub fn band(&self) -> usize {
        self.band
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn frame_components(&self, idx: &[usize]) -> &[f64] {
        &self.components[flat_index(idx)]
    }

    pub fn frame_component(&self, idx: &[usize], p: usize) -> f64 {
        self.components[flat_index(idx)][p]
    }

    /// `(θ, φ)` coordinate component: the frame component times `r` per `θ`
    /// index and `r sin θ` per `φ` index.
    pub fn coordinate_component(&self, idx: &[usize]) -> Vec<f64> {
        self.components[flat_index(idx)]
            .iter()
            .enumerate()
            .map(|(p, v)| v * frame_scale(&self.grid, idx, p))
            .collect()
    }

    /// Rank-2 tensor as a 2×2 matrix in the orthonormal frame.
    pub fn frame_matrix(&self, p: usize) -> Result<DMatrix<f64>> {
        if self.rank != 2 {
            return Err(Error::InvalidArgument(format!("frame matrix of a rank-{} tensor", self.rank)));
        }
        Ok(DMatrix::from_fn(2, 2, |a, b| self.components[2 * a + b][p]))
    }

    /// Pointwise squared norm: the sum of squared frame components.
    pub fn frame_norm_sq(&self, p: usize) -> f64 {
        self.components.iter().map(|c| c[p] * c[p]).sum()
    }

    /// Largest pointwise norm over the grid.
    pub fn sup_norm(&self) -> f64 {
        (0..self.grid.len())
            .map(|p| self.frame_norm_sq(p).sqrt())
            .fold(0.0, f64::max)
    }

    /// `g^{ab} T_{ab}` of a rank-2 tensor.
    pub fn trace(&self) -> Result<SphereField> {
        if self.rank != 2 {
            return Err(Error::InvalidArgument(format!("trace of a rank-{} tensor", self.rank)));
        }
        let values = self.components[0].iter().zip(&self.components[3]).map(|(a, b)| a + b).collect();
        Ok(SphereField::from_raw(self.grid.clone(), values))
    }
}

fn frame_scale(grid: &SphereGrid, idx: &[usize], p: usize) -> f64 {
    let r = grid.radius();
    let s = grid.sin_theta()[p / grid.n_phi()];
    idx.iter().map(|&a| if a == THETA { r } else { r * s }).product()
}

/// `(∇T)(a_1…a_r, c) = ê_c(T_{a_1…a_r}) − Σ_s T(…, ∇_{ê_c} ê_{a_s}, …)`, the
/// derivative index last.
fn nabla(t: &CovariantTensorField) -> Result<CovariantTensorField> {
    let rank = t.rank + 1;
    if rank > CovariantTensorField::MAX_RANK {
        return Err(Error::Unsupported(format!("covariant derivative of a rank-{} tensor", t.rank)));
    }
    let grid = &t.grid;
    let np = grid.n_phi();
    let r = grid.radius();
    let mut components = vec![Vec::new(); 1 << rank];
    let filtered: Vec<Vec<f64>> = t
        .components
        .iter()
        .map(|c| band_filter(grid, c, t.rank, t.band))
        .collect();
    for flat in 0..(1usize << t.rank) {
        let base = multi_index(flat, t.rank);
        let src = &filtered[flat];
        let mut theta_part = d_theta(grid, src, t.rank);
        for v in &mut theta_part {
            *v /= r;
        }
        let mut with_theta = base.clone();
        with_theta.push(THETA);
        components[flat_index(&with_theta)] = theta_part;

        let dphi = d_phi(grid, src);
        let mut phi_part: Vec<f64> = (0..grid.len())
            .map(|p| dphi[p] / (r * grid.sin_theta()[p / np]))
            .collect();
        for s in 0..t.rank {
            // ∇_{ê_φ} ê_θ = (cot θ/r) ê_φ,  ∇_{ê_φ} ê_φ = −(cot θ/r) ê_θ
            let mut swapped = base.clone();
            let sign = if base[s] == THETA { 1.0 } else { -1.0 };
            swapped[s] = 1 - base[s];
            let other = &filtered[flat_index(&swapped)];
            for (p, v) in phi_part.iter_mut().enumerate() {
                let i = p / np;
                *v -= sign * grid.cos_theta()[i] / (r * grid.sin_theta()[i]) * other[p];
            }
        }
        let mut with_phi = base;
        with_phi.push(PHI);
        components[flat_index(&with_phi)] = phi_part;
    }
    Ok(CovariantTensorField {
        grid: grid.clone(),
        rank,
        band: t.band,
        components,
    })
}

/// Covariant derivative of a tensor of rank at most 2; the derivative index
/// is appended last.
pub fn covariant_derivative(t: &CovariantTensorField) -> Result<CovariantTensorField> {
    if t.rank > 2 {
        return Err(Error::Unsupported(format!(
            "covariant derivative of a rank-{} tensor (at most 2)",
            t.rank
        )));
    }
    nabla(t)
}

/// `u_{ij} = ∇_i ∇_j u`.
pub fn covariant_hessian(u: &SphereField) -> Result<CovariantTensorField> {
    nabla(&nabla(&CovariantTensorField::scalar(u))?)
}

pub(crate) fn hessian_in_band(u: &SphereField, band: usize) -> Result<CovariantTensorField> {
    nabla(&nabla(&CovariantTensorField::scalar_in_band(u, band))?)
}

/// Third covariant derivative `u_{ijk} = ∇_k u_{ij}`.
pub fn covariant_third(u: &SphereField) -> Result<CovariantTensorField> {
    nabla(&covariant_hessian(u)?)
}

pub(crate) fn third_in_band(u: &SphereField, band: usize) -> Result<CovariantTensorField> {
    nabla(&hessian_in_band(u, band)?)
}

/// Rough Laplacian `Σ_c ∇_c ∇_c T` of a rank-2 tensor.
pub fn rough_laplacian(t: &CovariantTensorField) -> Result<CovariantTensorField> {
    if t.rank != 2 {
        return Err(Error::InvalidArgument(format!("rough Laplacian of a rank-{} tensor", t.rank)));
    }
    let dd = nabla(&nabla(t)?)?;
    let components = (0..4)
        .map(|flat| {
            let ab = multi_index(flat, 2);
            let tt = dd.frame_components(&[ab[0], ab[1], THETA, THETA]);
            let pp = dd.frame_components(&[ab[0], ab[1], PHI, PHI]);
            tt.iter().zip(pp).map(|(a, b)| a + b).collect()
        })
        .collect();
    Ok(CovariantTensorField {
        grid: t.grid.clone(),
        rank: 2,
        band: t.band,
        components,
    })
}
