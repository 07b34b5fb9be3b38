use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Gauss–Legendre nodes in `θ` (`L+1` of them, interior) times `2(L+1)`
/// uniform nodes in `φ` on a round sphere of radius `r`. Samples are stored
/// `θ`-major: index `i·n_phi + j`.
#[derive(Debug, Clone)]
pub struct SphereGrid {
    lmax: usize,
    radius: f64,
    theta: Vec<f64>,
    cos_theta: Vec<f64>,
    sin_theta: Vec<f64>,
    weights: Vec<f64>,
    /// `P̄_l^m(cos θ_i)` for `m ≥ 0`, row `i`, column `l(l+1)/2 + m`.
    legendre: Vec<Vec<f64>>,
    /// `∂_θ` on the nodes for trig polynomials even / odd in `θ`.
    d_theta_even: DMatrix<f64>,
    d_theta_odd: DMatrix<f64>,
    /// Nodal projections onto the even / odd series of degree at most `b`,
    /// indexed by `b`.
    projections: [Vec<DMatrix<f64>>; 2],
}

impl SphereGrid {
    pub const MIN_LMAX: usize = 8;
    pub const MAX_LMAX: usize = 64;

    pub fn new(lmax: usize, radius: f64) -> Result<Self> {
        if !(Self::MIN_LMAX..=Self::MAX_LMAX).contains(&lmax) {
            return Err(Error::InvalidArgument(format!(
                "truncation degree {lmax} outside {}..={}",
                Self::MIN_LMAX,
                Self::MAX_LMAX
            )));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
        }
        let (x, weights) = gauss_legendre(lmax + 1);
        let theta: Vec<f64> = x.iter().map(|v| v.acos()).collect();
        let sin_theta: Vec<f64> = theta.iter().map(|t| t.sin()).collect();
        let legendre = x
            .iter()
            .zip(&sin_theta)
            .map(|(&c, &s)| normalized_legendre(lmax, c, s))
            .collect();
        let (d_theta_even, d_theta_odd) = theta_derivative_matrices(&theta)?;
        let projections = theta_projections(&theta)?;
        Ok(Self {
            lmax,
            radius,
            theta,
            cos_theta: x,
            sin_theta,
            weights,
            legendre,
            d_theta_even,
            d_theta_odd,
            projections,
        })
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn n_theta(&self) -> usize {
        self.lmax + 1
    }

    pub fn n_phi(&self) -> usize {
        2 * (self.lmax + 1)
    }

    pub fn len(&self) -> usize {
        self.n_theta() * self.n_phi()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn cos_theta(&self) -> &[f64] {
        &self.cos_theta
    }

    pub fn sin_theta(&self) -> &[f64] {
        &self.sin_theta
    }

    /// Gauss–Legendre weights in `cos θ`; they sum to 2.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn phi(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.n_phi() as f64
    }

    /// `(θ, φ)` of a flat index.
    pub fn point(&self, flat: usize) -> (f64, f64) {
        let (i, j) = (flat / self.n_phi(), flat % self.n_phi());
        (self.theta[i], self.phi(j))
    }

    pub(crate) fn legendre(&self, i: usize, l: usize, m: usize) -> f64 {
        self.legendre[i][l * (l + 1) / 2 + m]
    }

    pub(crate) fn d_theta_matrix(&self, odd: bool) -> &DMatrix<f64> {
        if odd {
            &self.d_theta_odd
        } else {
            &self.d_theta_even
        }
    }

    /// Projection onto `θ`-series of degree at most `band` with the given
    /// parity; `None` when nothing is removed.
    pub(crate) fn theta_projection(&self, odd: bool, band: usize) -> Option<&DMatrix<f64>> {
        self.projections[odd as usize].get(band)
    }

    /// Quadrature weight of node `flat` for `∫ · dΩ` on the unit sphere.
    pub fn solid_angle_weight(&self, flat: usize) -> f64 {
        self.weights[flat / self.n_phi()] * 2.0 * PI / self.n_phi() as f64
    }
}

/// Nodes (descending, so `θ` ascends) and weights of `n`-point Gauss–Legendre.
pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, z);
            dp = d;
            let step = p / d;
            z -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_and_derivative(n, z);
        if d != 0.0 {
            dp = d;
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

fn legendre_and_derivative(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// `P̄_l^m(cos θ)` for `0 ≤ m ≤ l ≤ lmax`, normalized so that
/// `Y_lm = P̄_l^m(cos θ) e^{imφ}` is orthonormal on the unit sphere, with the
/// Condon–Shortley phase.
pub(crate) fn normalized_legendre(lmax: usize, x: f64, s: f64) -> Vec<f64> {
    let idx = |l: usize, m: usize| l * (l + 1) / 2 + m;
    let mut p = vec![0.0; (lmax + 1) * (lmax + 2) / 2];
    p[0] = (1.0 / (4.0 * PI)).sqrt();
    for m in 1..=lmax {
        p[idx(m, m)] = -((2 * m + 1) as f64 / (2 * m) as f64).sqrt() * s * p[idx(m - 1, m - 1)];
    }
    for m in 0..lmax {
        p[idx(m + 1, m)] = ((2 * m + 3) as f64).sqrt() * x * p[idx(m, m)];
    }
    for m in 0..=lmax {
        for l in (m + 2)..=lmax {
            let (lf, mf) = (l as f64, m as f64);
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
            p[idx(l, m)] = a * (x * p[idx(l - 1, m)] - b * p[idx(l - 2, m)]);
        }
    }
    p
}

/// Differentiation matrices on the `θ` nodes for `Σ_{k=0}^{L} c_k cos kθ`
/// and `Σ_{k=1}^{L+1} s_k sin kθ`.
fn theta_derivative_matrices(theta: &[f64]) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = theta.len();
    let cos_basis = DMatrix::from_fn(n, n, |i, k| (k as f64 * theta[i]).cos());
    let cos_deriv = DMatrix::from_fn(n, n, |i, k| -(k as f64) * (k as f64 * theta[i]).sin());
    let sin_basis = DMatrix::from_fn(n, n, |i, k| ((k + 1) as f64 * theta[i]).sin());
    let sin_deriv = DMatrix::from_fn(n, n, |i, k| (k + 1) as f64 * ((k + 1) as f64 * theta[i]).cos());
    let singular = || Error::InvalidArgument("singular θ collocation matrix".into());
    let even = cos_deriv * cos_basis.try_inverse().ok_or_else(singular)?;
    let odd = sin_deriv * sin_basis.try_inverse().ok_or_else(singular)?;
    Ok((even, odd))
}

fn theta_projections(theta: &[f64]) -> Result<[Vec<DMatrix<f64>>; 2]> {
    let n = theta.len();
    let singular = || Error::InvalidArgument("singular θ collocation matrix".into());
    let mut out = [Vec::new(), Vec::new()];
    for (odd, slot) in out.iter_mut().enumerate() {
        // column k holds wavenumber k (even) or k+1 (odd)
        let shift = odd;
        let basis = DMatrix::from_fn(n, n, |i, k| {
            let w = (k + shift) as f64 * theta[i];
            if odd == 1 {
                w.sin()
            } else {
                w.cos()
            }
        });
        let inverse = basis.clone().try_inverse().ok_or_else(singular)?;
        for band in 0..n - 1 {
            let keep = (band + 1).saturating_sub(shift);
            slot.push(basis.columns(0, keep) * inverse.rows(0, keep));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_is_exact_to_degree_2l_plus_1() {
        let (x, w) = gauss_legendre(9);
        for d in 0..=17 {
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(d)).sum();
            let exact = if d % 2 == 1 { 0.0 } else { 2.0 / (d as f64 + 1.0) };
            assert!((q - exact).abs() < 1e-14, "degree {d}");
        }
    }

    #[test]
    fn low_degree_legendre_values() {
        let t: f64 = 0.7;
        let p = normalized_legendre(2, t.cos(), t.sin());
        let c = (3.0 / (4.0 * PI)).sqrt();
        assert!((p[1] - c * t.cos()).abs() < 1e-15);
        // Y_11 = −sqrt(3/8π) sin θ e^{iφ}
        assert!((p[2] + (3.0 / (8.0 * PI)).sqrt() * t.sin()).abs() < 1e-15);
        let y20 = (5.0 / (16.0 * PI)).sqrt() * (3.0 * t.cos().powi(2) - 1.0);
        assert!((p[3] - y20).abs() < 1e-15);
    }

    #[test]
    fn grid_shape() {
        let g = SphereGrid::new(16, 2.0).unwrap();
        assert_eq!(g.n_theta(), 17);
        assert_eq!(g.n_phi(), 34);
        assert!(g.theta().windows(2).all(|w| w[1] > w[0]));
        assert!(g.theta()[0] > 0.0 && *g.theta().last().unwrap() < PI);
        let area: f64 = (0..g.len()).map(|p| g.solid_angle_weight(p)).sum();
        assert!((area - 4.0 * PI).abs() < 1e-13);
        assert!(SphereGrid::new(4, 1.0).is_err());
        assert!(SphereGrid::new(16, 0.0).is_err());
    }
}
