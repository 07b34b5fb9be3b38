//! Discrete Fourier calculus on the torus: derivatives, Laplacian, the exact
//! heat propagator and band-preserving resampling.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

use super::grid::{ScalarField, TorusGrid, MAX_DIM};
use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft(n, direction))
}

/// In-place unnormalized n-dimensional FFT over a row-major cube.
fn fft_nd(data: &mut [Complex64], dim: usize, n: usize, direction: FftDirection) {
    let fft = plan(n, direction);
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    // last axis is contiguous: one batched call
    fft.process_with_scratch(data, &mut scratch);
    let mut line = vec![Complex64::default(); n];
    for axis in 0..dim.saturating_sub(1) {
        let stride = n.pow((dim - 1 - axis) as u32);
        let block = stride * n;
        for base in (0..data.len()).step_by(block) {
            for offset in 0..stride {
                let start = base + offset;
                for (j, slot) in line.iter_mut().enumerate() {
                    *slot = data[start + j * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (j, v) in line.iter().enumerate() {
                    data[start + j * stride] = *v;
                }
            }
        }
    }
}

/// Unnormalized DFT coefficients of a field.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: TorusGrid,
    coeffs: Vec<Complex64>,
}

impl ScalarField {
    pub fn spectrum(&self) -> Spectrum {
        let mut coeffs: Vec<Complex64> = self.samples().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft_nd(&mut coeffs, self.grid().dim(), self.grid().n(), FftDirection::Forward);
        Spectrum {
            grid: self.grid().clone(),
            coeffs,
        }
    }
}

impl Spectrum {
    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub(crate) fn from_coeffs(grid: TorusGrid, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(grid.len(), coeffs.len());
        Self { grid, coeffs }
    }

    /// Inverse transform; the imaginary residue (roundoff, or an odd symbol
    /// applied to the Nyquist slot) is discarded.
    pub fn to_field(&self) -> ScalarField {
        let mut data = self.coeffs.clone();
        fft_nd(&mut data, self.grid.dim(), self.grid.n(), FftDirection::Inverse);
        let scale = 1.0 / self.grid.len() as f64;
        ScalarField::from_raw(self.grid.clone(), data.iter().map(|z| z.re * scale).collect())
    }

    /// Multiply every coefficient by `symbol(indices)`.
    pub fn map_symbol(&self, symbol: impl Fn(&[usize; MAX_DIM]) -> Complex64) -> Spectrum {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(flat, &c)| c * symbol(&self.grid.unflatten(flat)))
            .collect();
        Spectrum {
            grid: self.grid.clone(),
            coeffs,
        }
    }

    /// Derivative along the listed axes (`[0, 0, 1]` is `∂²_x ∂_y`), order ≤ 3.
    pub fn derivative(&self, axes: &[usize]) -> Result<ScalarField> {
        Ok(self.derivative_spectrum(axes, 3)?.to_field())
    }

    pub(crate) fn derivative_spectrum(&self, axes: &[usize], max_order: usize) -> Result<Spectrum> {
        if axes.len() > max_order {
            return Err(Error::Unsupported(format!(
                "derivative of order {} (at most {max_order})",
                axes.len()
            )));
        }
        let dim = self.grid.dim();
        let mut orders = [0u32; MAX_DIM];
        for &a in axes {
            if a >= dim {
                return Err(Error::InvalidArgument(format!("axis {a} on a {dim}-torus")));
            }
            orders[a] += 1;
        }
        let grid = &self.grid;
        Ok(self.map_symbol(|idx| {
            let mut s = Complex64::new(1.0, 0.0);
            for axis in 0..dim {
                let p = orders[axis];
                if p == 0 {
                    continue;
                }
                if p % 2 == 1 && grid.is_nyquist(idx[axis]) {
                    return Complex64::new(0.0, 0.0);
                }
                s *= Complex64::new(0.0, grid.wavenumber(axis, idx[axis])).powu(p);
            }
            s
        }))
    }

    /// Multiplier `−|k|²` of the Laplacian at a multi-index.
    fn laplace_symbol(&self, idx: &[usize; MAX_DIM]) -> f64 {
        (0..self.grid.dim())
            .map(|a| {
                let k = self.grid.wavenumber(a, idx[a]);
                -k * k
            })
            .sum()
    }

    pub fn laplacian_spectrum(&self) -> Spectrum {
        self.map_symbol(|idx| Complex64::new(self.laplace_symbol(idx), 0.0))
    }

    pub fn laplacian(&self) -> ScalarField {
        self.laplacian_spectrum().to_field()
    }

    /// Exact heat propagator: mode `k` scaled by `exp(−|k|² dt)`.
    pub fn propagate(&self, dt: f64) -> Result<Spectrum> {
        if !(dt >= 0.0 && dt.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "heat propagation needs dt >= 0, got {dt}"
            )));
        }
        Ok(self.map_symbol(|idx| Complex64::new((self.laplace_symbol(idx) * dt).exp(), 0.0)))
    }

    /// Same trigonometric interpolant on an `n`-point grid. Refinement is exact;
    /// coarsening drops the modes that do not fit. A populated Nyquist slot is
    /// split evenly between `±N/2` on refinement.
    pub fn resample(&self, n: usize) -> Result<Spectrum> {
        let target = self.grid.with_resolution(n)?;
        let dim = self.grid.dim();
        let ratio = (target.len() as f64) / (self.grid.len() as f64);
        let mut coeffs = vec![Complex64::default(); target.len()];
        let half_src = (self.grid.n() / 2) as i64;
        let half_dst = (n / 2) as i64;
        for (flat, &c) in self.coeffs.iter().enumerate() {
            if c == Complex64::default() {
                continue;
            }
            let idx = self.grid.unflatten(flat);
            // list of (target multi-index, weight) pairs for this coefficient
            let mut targets: Vec<([usize; MAX_DIM], f64)> = vec![([0; MAX_DIM], 1.0)];
            let mut fits = true;
            for axis in 0..dim {
                let k = self.grid.signed_mode(idx[axis]);
                let options: Vec<(i64, f64)> = if k == -half_src && n > self.grid.n() {
                    vec![(-half_src, 0.5), (half_src, 0.5)]
                } else {
                    vec![(k, 1.0)]
                };
                let mut next = Vec::with_capacity(targets.len() * options.len());
                for (t, w) in &targets {
                    for &(kk, ww) in &options {
                        if kk < -half_dst || kk >= half_dst {
                            continue;
                        }
                        let mut t2 = *t;
                        t2[axis] = target.mode_index(kk);
                        next.push((t2, w * ww));
                    }
                }
                if next.is_empty() {
                    fits = false;
                    break;
                }
                targets = next;
            }
            if !fits {
                continue;
            }
            for (t, w) in targets {
                coeffs[target.flatten(&t)] += c * (w * ratio);
            }
        }
        Ok(Spectrum {
            grid: target,
            coeffs,
        })
    }

    /// Zero every coefficient with some `|k_axis| > band`.
    pub(crate) fn truncate(&self, band: usize) -> Spectrum {
        let dim = self.grid.dim();
        self.map_symbol(|idx| {
            let inside = (0..dim).all(|a| self.grid.signed_mode(idx[a]).unsigned_abs() as usize <= band);
            Complex64::new(if inside { 1.0 } else { 0.0 }, 0.0)
        })
    }

    /// Largest `max_axis |k_axis|` over coefficients above `tol · max|c|`.
    pub fn bandwidth(&self, tol: f64) -> usize {
        let cmax = self.coeffs.iter().fold(0.0, |a: f64, c| a.max(c.norm()));
        if cmax == 0.0 {
            return 0;
        }
        let mut band = 0usize;
        for (flat, c) in self.coeffs.iter().enumerate() {
            if c.norm() > tol * cmax {
                let idx = self.grid.unflatten(flat);
                for axis in 0..self.grid.dim() {
                    band = band.max(self.grid.signed_mode(idx[axis]).unsigned_abs() as usize);
                }
            }
        }
        band
    }
}

/// Derivative of the trigonometric interpolant along `axes`, order ≤ 3.
pub fn spectral_derivative(f: &ScalarField, axes: &[usize]) -> Result<ScalarField> {
    f.spectrum().derivative(axes)
}

pub fn laplacian(f: &ScalarField) -> ScalarField {
    f.spectrum().laplacian()
}

/// Solution of `u_t = Δu` after time `dt`, by the exact Fourier propagator.
pub fn heat_propagate(f: &ScalarField, dt: f64) -> Result<ScalarField> {
    Ok(f.spectrum().propagate(dt)?.to_field())
}

/// Pointwise restriction of a field on a refined grid back to every
/// `factor`-th node.
pub(crate) fn restrict(values: &[f64], fine: &TorusGrid, coarse: &TorusGrid) -> Vec<f64> {
    let factor = fine.n() / coarse.n();
    (0..coarse.len())
        .map(|flat| {
            let mut idx = coarse.unflatten(flat);
            for v in idx.iter_mut().take(coarse.dim()) {
                *v *= factor;
            }
            values[fine.flatten(&idx)]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn derivative_of_constant_is_zero() {
        let g = TorusGrid::periodic_box(2, 16).unwrap();
        let f = ScalarField::constant(&g, 3.5);
        for axes in [&[0][..], &[1, 1], &[0, 1, 1]] {
            assert!(spectral_derivative(&f, axes).unwrap().sup_norm() < 1e-13);
        }
    }

    #[test]
    fn derivative_of_sine() {
        let l = 3.0;
        let g = TorusGrid::new(2, 32, vec![l, 1.0]).unwrap();
        let w = 2.0 * PI / l;
        let f = ScalarField::from_fn(&g, |x| (w * x[0]).sin()).unwrap();
        let d = spectral_derivative(&f, &[0]).unwrap();
        let exact = ScalarField::from_fn(&g, |x| w * (w * x[0]).cos()).unwrap();
        assert!(d.sup_distance(&exact) < 1e-12);
    }

    #[test]
    fn separable_hessian() {
        let g = TorusGrid::periodic_box(2, 32).unwrap();
        let f = ScalarField::from_fn(&g, |x| x[0].sin() + x[1].cos()).unwrap();
        let s = f.spectrum();
        let fxx = s.derivative(&[0, 0]).unwrap();
        let fyy = s.derivative(&[1, 1]).unwrap();
        let fxy = s.derivative(&[0, 1]).unwrap();
        assert!(fxx.sup_distance(&ScalarField::from_fn(&g, |x| -x[0].sin()).unwrap()) < 1e-12);
        assert!(fyy.sup_distance(&ScalarField::from_fn(&g, |x| -x[1].cos()).unwrap()) < 1e-12);
        assert!(fxy.sup_norm() < 1e-12);
    }

    #[test]
    fn order_four_unsupported() {
        let g = TorusGrid::periodic_box(2, 16).unwrap();
        let f = ScalarField::constant(&g, 0.0);
        assert!(matches!(
            spectral_derivative(&f, &[0, 0, 1, 1]),
            Err(Error::Unsupported(_))
        ));
        assert!(spectral_derivative(&f, &[2]).is_err());
    }

    #[test]
    fn heat_mode_decay_and_semigroup() {
        let l = 5.0;
        let g = TorusGrid::new(2, 32, vec![l, l]).unwrap();
        let w = 2.0 * PI / l;
        let f = ScalarField::from_fn(&g, |x| (w * x[0]).sin()).unwrap();
        let t = 0.37;
        let u = heat_propagate(&f, t).unwrap();
        let decay = (-w * w * t).exp();
        let exact = f.map(|v| v * decay);
        assert!(u.sup_distance(&exact) <= 1e-10 * decay);

        let two = heat_propagate(&heat_propagate(&f, 0.1).unwrap(), 0.27).unwrap();
        assert!(two.sup_distance(&u) < 1e-12);
        assert_eq!(heat_propagate(&f, 0.0).unwrap().sup_distance(&f) < 1e-15, true);
        assert!(heat_propagate(&f, -1.0).is_err());
    }

    #[test]
    fn constant_is_stationary_and_mean_preserved() {
        let g = TorusGrid::periodic_box(3, 16).unwrap();
        let c = ScalarField::constant(&g, -2.0);
        assert!(heat_propagate(&c, 4.0).unwrap().sup_distance(&c) < 1e-14);
        let f = ScalarField::from_fn(&g, |x| 1.0 + (x[0] + 2.0 * x[2]).sin() * x[1].cos()).unwrap();
        let u = heat_propagate(&f, 0.5).unwrap();
        assert!((u.mean() - f.mean()).abs() < 1e-14);
    }

    #[test]
    fn resample_is_exact_for_band_limited_data() {
        let g = TorusGrid::periodic_box(2, 16).unwrap();
        let f = ScalarField::from_fn(&g, |x| (3.0 * x[0] - x[1]).cos() + (5.0 * x[1]).sin()).unwrap();
        let fine = f.spectrum().resample(64).unwrap().to_field();
        let exact = ScalarField::from_fn(fine.grid(), |x| (3.0 * x[0] - x[1]).cos() + (5.0 * x[1]).sin()).unwrap();
        assert!(fine.sup_distance(&exact) < 1e-13);
        let back = restrict(fine.samples(), fine.grid(), &g);
        assert!(back.iter().zip(f.samples()).all(|(a, b)| (a - b).abs() < 1e-13));
        assert_eq!(f.spectrum().bandwidth(1e-12), 5);
    }
}
