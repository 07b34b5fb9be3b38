use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fields::min_max;

/// Uniform periodic grid on a box `[0, L_0) × … × [0, L_{d-1})`, `N` points per
/// axis, stored row-major (last axis fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct TorusGrid {
    dim: usize,
    n: usize,
    lengths: Vec<f64>,
}

pub const MAX_DIM: usize = 4;

impl TorusGrid {
    pub const MIN_N: usize = 16;
    pub const MAX_N: usize = 128;
    const MAX_POINTS: usize = 1 << 24;

    /// `dim` is 2 or 3 for real experiments, 4 for the complex torus of
    /// complex dimension 2. `n` must be a power of two in `16..=128`.
    pub fn new(dim: usize, n: usize, lengths: Vec<f64>) -> Result<Self> {
        if !(Self::MIN_N..=Self::MAX_N).contains(&n) {
            return Err(Error::InvalidArgument(format!(
                "points per axis {n} outside {}..={}",
                Self::MIN_N,
                Self::MAX_N
            )));
        }
        Self::unchecked_resolution(dim, n, lengths)
    }

    /// The `[0, 2π)^dim` box.
    pub fn periodic_box(dim: usize, n: usize) -> Result<Self> {
        Self::new(dim, n, vec![2.0 * PI; dim])
    }

    /// Same as [`TorusGrid::new`] without the `16..=128` bound, used for the
    /// refined evaluation grids.
    pub(crate) fn unchecked_resolution(dim: usize, n: usize, lengths: Vec<f64>) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::InvalidArgument(format!("torus dimension {dim} unsupported")));
        }
        if !n.is_power_of_two() || n < 4 {
            return Err(Error::InvalidArgument(format!(
                "points per axis must be a power of two, got {n}"
            )));
        }
        if lengths.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: lengths.len(),
            });
        }
        if lengths.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::InvalidArgument("side lengths must be positive".into()));
        }
        if n.checked_pow(dim as u32).is_none_or(|p| p > Self::MAX_POINTS) {
            return Err(Error::InvalidArgument(format!(
                "grid {n}^{dim} exceeds the point budget"
            )));
        }
        Ok(Self { dim, n, lengths })
    }

    pub(crate) fn with_resolution(&self, n: usize) -> Result<Self> {
        Self::unchecked_resolution(self.dim, n, self.lengths.clone())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.lengths[axis] / self.n as f64
    }

    /// Per-axis indices of a flat index.
    #[inline]
    pub fn unflatten(&self, mut flat: usize) -> [usize; MAX_DIM] {
        let mut idx = [0; MAX_DIM];
        for axis in (0..self.dim).rev() {
            idx[axis] = flat % self.n;
            flat /= self.n;
        }
        idx
    }

    #[inline]
    pub fn flatten(&self, idx: &[usize]) -> usize {
        idx[..self.dim].iter().fold(0, |acc, &i| acc * self.n + i)
    }

    /// Coordinates of a node.
    pub fn point(&self, flat: usize) -> [f64; MAX_DIM] {
        let idx = self.unflatten(flat);
        let mut x = [0.0; MAX_DIM];
        for axis in 0..self.dim {
            x[axis] = idx[axis] as f64 * self.spacing(axis);
        }
        x
    }

    /// Signed integer mode number of FFT index `idx` (`-N/2` for the Nyquist slot).
    #[inline]
    pub fn signed_mode(&self, idx: usize) -> i64 {
        if idx < self.n / 2 {
            idx as i64
        } else {
            idx as i64 - self.n as i64
        }
    }

    /// FFT index of a signed mode number.
    #[inline]
    pub fn mode_index(&self, k: i64) -> usize {
        k.rem_euclid(self.n as i64) as usize
    }

    pub fn is_nyquist(&self, idx: usize) -> bool {
        idx == self.n / 2
    }

    /// Physical wavenumber `2πk/L` of FFT index `idx` along `axis`.
    pub fn wavenumber(&self, axis: usize, idx: usize) -> f64 {
        2.0 * PI * self.signed_mode(idx) as f64 / self.lengths[axis]
    }
}

/// Real samples of a function on a [`TorusGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: TorusGrid,
    samples: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: TorusGrid, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                got: samples.len(),
            });
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("field sample {i}")));
        }
        Ok(Self { grid, samples })
    }

    pub(crate) fn from_raw(grid: TorusGrid, samples: Vec<f64>) -> Self {
        debug_assert_eq!(samples.len(), grid.len());
        Self { grid, samples }
    }

    /// Sample `f` at every node.
    pub fn from_fn(grid: &TorusGrid, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let samples = (0..grid.len())
            .map(|i| f(&grid.point(i)[..grid.dim()]))
            .collect();
        Self::new(grid.clone(), samples)
    }

    pub fn constant(grid: &TorusGrid, value: f64) -> Self {
        Self::from_raw(grid.clone(), vec![value; grid.len()])
    }

    pub fn grid(&self) -> &TorusGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    pub fn min_max(&self) -> (f64, f64) {
        min_max(&self.samples)
    }

    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// Largest absolute pointwise difference to another field on the same grid.
    pub fn sup_distance(&self, other: &ScalarField) -> f64 {
        self.samples
            .iter()
            .zip(&other.samples)
            .fold(0.0, |acc, (a, b)| acc.max((a - b).abs()))
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(self.grid.clone(), self.samples.iter().map(|&v| f(v)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation() {
        assert!(TorusGrid::periodic_box(2, 24).is_err());
        assert!(TorusGrid::periodic_box(2, 8).is_err());
        assert!(TorusGrid::periodic_box(2, 256).is_err());
        assert!(TorusGrid::periodic_box(5, 16).is_err());
        assert!(TorusGrid::new(2, 16, vec![1.0, -1.0]).is_err());
        let g = TorusGrid::new(3, 16, vec![1.0, 2.0, 4.0]).unwrap();
        assert_eq!(g.len(), 4096);
        assert_eq!(g.spacing(2), 0.25);
    }

    #[test]
    fn indexing_round_trip() {
        let g = TorusGrid::periodic_box(3, 16).unwrap();
        for flat in [0, 1, 17, 300, 4095] {
            let idx = g.unflatten(flat);
            assert_eq!(g.flatten(&idx), flat);
        }
        assert_eq!(g.signed_mode(15), -1);
        assert_eq!(g.signed_mode(8), -8);
        assert_eq!(g.mode_index(-3), 13);
    }

    #[test]
    fn rejects_non_finite_samples() {
        let g = TorusGrid::periodic_box(2, 16).unwrap();
        let mut v = vec![0.0; 256];
        v[7] = f64::NAN;
        assert!(ScalarField::new(g, v).is_err());
    }
}
