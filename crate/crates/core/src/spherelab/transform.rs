use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use super::grid::SphereGrid;
use crate::error::{Error, Result};
use crate::fields::min_max;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Unnormalized DFT of every `θ` row along `φ`.
pub(crate) fn rows_fft(values: &mut [Complex64], n_phi: usize, direction: FftDirection) {
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft(n_phi, direction));
    fft.process(values);
}

/// Signed azimuthal wavenumber of DFT slot `j`.
pub(crate) fn signed_m(j: usize, n_phi: usize) -> i64 {
    if j < n_phi / 2 {
        j as i64
    } else {
        j as i64 - n_phi as i64
    }
}

/// Real samples on a [`SphereGrid`].
#[derive(Debug, Clone)]
pub struct SphereField {
    grid: Arc<SphereGrid>,
    values: Vec<f64>,
}

impl SphereField {
    pub fn new(grid: Arc<SphereGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("sphere sample {i}")));
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_raw(grid: Arc<SphereGrid>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    /// Sample `f(θ, φ)` at every node.
    pub fn from_fn(grid: &Arc<SphereGrid>, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let values = (0..grid.len())
            .map(|p| {
                let (t, ph) = grid.point(p);
                f(t, ph)
            })
            .collect();
        Self::new(grid.clone(), values)
    }

    pub fn constant(grid: &Arc<SphereGrid>, value: f64) -> Self {
        Self::from_raw(grid.clone(), vec![value; grid.len()])
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn min_max(&self) -> (f64, f64) {
        min_max(&self.values)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    pub fn sup_distance(&self, other: &SphereField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |a, (x, y)| a.max((x - y).abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(self.grid.clone(), self.values.iter().map(|&v| f(v)).collect())
    }

    /// `∫ f dΩ` over the unit sphere by the product quadrature.
    pub fn integrate(&self) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(p, v)| v * self.grid.solid_angle_weight(p))
            .sum()
    }

    /// Average with respect to area.
    pub fn mean(&self) -> f64 {
        self.integrate() / (4.0 * std::f64::consts::PI)
    }
}

/// Coefficients `a_lm` of `Σ a_lm Y_lm`, `0 ≤ l ≤ L`, `|m| ≤ l`, stored at
/// `l² + l + m`.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalSpectrum {
    lmax: usize,
    coeffs: Vec<Complex64>,
    /// Set by analysis when the sampled field is not reproduced by its
    /// degree-`L` expansion.
    pub truncated: bool,
}

impl SphericalSpectrum {
    pub fn zeros(lmax: usize) -> Self {
        Self {
            lmax,
            coeffs: vec![Complex64::default(); (lmax + 1) * (lmax + 1)],
            truncated: false,
        }
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    fn slot(&self, l: usize, m: i64) -> Result<usize> {
        if l > self.lmax || m.unsigned_abs() as usize > l {
            return Err(Error::OutOfRange {
                k: l,
                max: self.lmax,
            });
        }
        Ok(((l * l + l) as i64 + m) as usize)
    }

    pub fn get(&self, l: usize, m: i64) -> Result<Complex64> {
        Ok(self.coeffs[self.slot(l, m)?])
    }

    pub fn set(&mut self, l: usize, m: i64, v: Complex64) -> Result<()> {
        let s = self.slot(l, m)?;
        self.coeffs[s] = v;
        Ok(())
    }

    /// Set `a_lm` and its partner `a_{l,−m} = (−1)^m conj(a_lm)` so the
    /// synthesized field is real.
    pub fn set_real(&mut self, l: usize, m: i64, v: Complex64) -> Result<()> {
        let v = if m == 0 { Complex64::new(v.re, 0.0) } else { v };
        self.set(l, m, v)?;
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        self.set(l, -m, v.conj() * sign)
    }

    /// `(l, m, a_lm)` in storage order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, i64, Complex64)> + '_ {
        (0..=self.lmax).flat_map(move |l| {
            (-(l as i64)..=l as i64).map(move |m| (l, m, self.coeffs[((l * l + l) as i64 + m) as usize]))
        })
    }

    /// Multiply `a_lm` by `f(l)`.
    pub fn map_degree(&self, f: impl Fn(usize) -> f64) -> Self {
        let mut out = self.clone();
        for l in 0..=self.lmax {
            let s = f(l);
            for m in -(l as i64)..=l as i64 {
                out.coeffs[((l * l + l) as i64 + m) as usize] *= s;
            }
        }
        out
    }

    /// Largest `l` with some `|a_lm| > tol · max|a|` (`0` for the zero spectrum).
    pub fn degree(&self, tol: f64) -> usize {
        let cmax = self.coeffs.iter().fold(0.0, |a: f64, c| a.max(c.norm()));
        self.iter()
            .filter(|(_, _, c)| c.norm() > tol * cmax && cmax > 0.0)
            .map(|(l, _, _)| l)
            .max()
            .unwrap_or(0)
    }

    pub fn norm_sq(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }
}

fn azimuthal_sign(m: i64) -> f64 {
    if m < 0 && m % 2 != 0 {
        -1.0
    } else {
        1.0
    }
}

fn analyze_raw(grid: &SphereGrid, values: &[f64]) -> SphericalSpectrum {
    let (nt, np, lmax) = (grid.n_theta(), grid.n_phi(), grid.lmax());
    let mut rows: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    for row in rows.chunks_mut(np) {
        rows_fft(row, np, FftDirection::Forward);
    }
    let dphi = 2.0 * std::f64::consts::PI / np as f64;
    let mut spec = SphericalSpectrum::zeros(lmax);
    for l in 0..=lmax {
        for m in -(l as i64)..=l as i64 {
            let j = m.rem_euclid(np as i64) as usize;
            let am = m.unsigned_abs() as usize;
            let mut acc = Complex64::default();
            for i in 0..nt {
                acc += rows[i * np + j] * (grid.weights()[i] * grid.legendre(i, l, am));
            }
            spec.coeffs[((l * l + l) as i64 + m) as usize] = acc * (dphi * azimuthal_sign(m));
        }
    }
    spec
}

/// Forward transform by Gauss–Legendre quadrature in `θ` and DFT in `φ`.
/// Content above degree `L` cannot be represented; if the synthesized
/// expansion misses the samples by more than `1e−8` relative, the result is
/// flagged `truncated`.
pub fn sh_analyze(field: &SphereField) -> SphericalSpectrum {
    let mut spec = analyze_raw(field.grid(), field.values());
    let back = synthesize_raw(field.grid(), &spec);
    let scale = field.sup_norm().max(1e-300);
    let gap = back
        .iter()
        .zip(field.values())
        .fold(0.0, |a: f64, (x, y)| a.max((x - y).abs()));
    spec.truncated = gap > 1e-8 * scale;
    spec
}

fn synthesize_raw(grid: &SphereGrid, spec: &SphericalSpectrum) -> Vec<f64> {
    let (nt, np) = (grid.n_theta(), grid.n_phi());
    let lmax = grid.lmax().min(spec.lmax);
    let mut rows = vec![Complex64::default(); nt * np];
    for i in 0..nt {
        for l in 0..=lmax {
            for m in -(l as i64)..=l as i64 {
                let c = spec.coeffs[((l * l + l) as i64 + m) as usize];
                if c == Complex64::default() {
                    continue;
                }
                let j = m.rem_euclid(np as i64) as usize;
                rows[i * np + j] += c * (azimuthal_sign(m) * grid.legendre(i, l, m.unsigned_abs() as usize));
            }
        }
    }
    for row in rows.chunks_mut(np) {
        rows_fft(row, np, FftDirection::Inverse);
    }
    rows.iter().map(|z| z.re).collect()
}

/// Inverse transform. Degrees above the grid's `L` are dropped.
pub fn sh_synthesize(spec: &SphericalSpectrum, grid: &Arc<SphereGrid>) -> SphereField {
    SphereField::from_raw(grid.clone(), synthesize_raw(grid, spec))
}

/// `a_lm ← a_lm · exp(−l(l+1)t/r²)`.
pub fn sphere_heat_propagate(spec: &SphericalSpectrum, t: f64, radius: f64) -> Result<SphericalSpectrum> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "heat propagation needs t >= 0, got {t}"
        )));
    }
    Ok(spec.map_degree(|l| (-((l * (l + 1)) as f64) * t / (radius * radius)).exp()))
}

/// Laplace–Beltrami operator of the round metric of the grid's radius.
pub fn sphere_laplacian(field: &SphereField) -> SphereField {
    laplacian_in_band(field, field.grid().lmax())
}

/// Laplacian with every degree above `band` discarded.
pub(crate) fn laplacian_in_band(field: &SphereField, band: usize) -> SphereField {
    let r2 = field.grid().radius().powi(2);
    let spec = analyze_raw(field.grid(), field.values())
        .map_degree(|l| if l > band { 0.0 } else { -((l * (l + 1)) as f64) / r2 });
    sh_synthesize(&spec, field.grid())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(l: usize) -> Arc<SphereGrid> {
        Arc::new(SphereGrid::new(l, 1.0).unwrap())
    }

    #[test]
    fn constant_has_only_monopole() {
        let g = grid(8);
        let s = sh_analyze(&SphereField::constant(&g, 2.0));
        for (l, m, c) in s.iter() {
            if l == 0 {
                assert!((c.re - 2.0 * (4.0 * std::f64::consts::PI).sqrt()).abs() < 1e-13);
            } else {
                assert!(c.norm() < 1e-14, "({l},{m})");
            }
        }
        assert!(!s.truncated);
    }

    #[test]
    fn cos_theta_is_pure_dipole() {
        let g = grid(12);
        let f = SphereField::from_fn(&g, |t, _| t.cos()).unwrap();
        let s = sh_analyze(&f);
        for (l, m, c) in s.iter() {
            if (l, m) != (1, 0) {
                assert!(c.norm() < 1e-14);
            }
        }
        assert!(s.get(1, 0).unwrap().norm() > 1.0);
    }

    #[test]
    fn overflow_is_flagged() {
        let g = grid(8);
        let f = SphereField::from_fn(&g, |t, p| (t.sin().powi(9)) * (9.0 * p).cos()).unwrap();
        assert!(sh_analyze(&f).truncated);
    }

    #[test]
    fn negative_time_rejected() {
        assert!(sphere_heat_propagate(&SphericalSpectrum::zeros(8), -1.0, 1.0).is_err());
    }
}
