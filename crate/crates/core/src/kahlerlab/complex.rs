//! Complex Hessians on flat complex tori.
//!
//! A complex torus of dimension `m` is the real torus with coordinates
//! `(x_1, y_1, …, x_m, y_m)`, `z_α = x_α + i y_α`. With the Wirtinger
//! derivatives `∂_α = ½(∂_{x_α} − i∂_{y_α})`, `∂_β̄ = ½(∂_{x_β} + i∂_{y_β})`,
//!
//! ```text
//! u_{αβ̄} = ¼[(u_{x_α x_β} + u_{y_α y_β}) + i(u_{x_α y_β} − u_{y_α x_β})]
//! ```

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geomodels::{condition_non1_value, non1_contraction, KahlerCurvature, ModelCPn};
use crate::symfun::{newton_sequence, Entry, HermMatrix, SelfAdjoint};
use crate::toruslab::hessian::Jet;
use crate::toruslab::{ScalarField, TorusGrid};

/// Real torus of dimension `2m`, `m ∈ {1, 2}`, read as `C^m` modulo a lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexTorusGrid {
    m: usize,
    torus: TorusGrid,
}

impl ComplexTorusGrid {
    pub const MAX_M: usize = 2;

    /// `lengths` lists the periods of `x_1, y_1, x_2, y_2, …`.
    pub fn new(m: usize, n: usize, lengths: Vec<f64>) -> Result<Self> {
        if !(1..=Self::MAX_M).contains(&m) {
            return Err(Error::InvalidArgument(format!("complex dimension {m} outside 1..=2")));
        }
        if lengths.len() != 2 * m {
            return Err(Error::DimensionMismatch {
                expected: 2 * m,
                got: lengths.len(),
            });
        }
        Ok(Self {
            m,
            torus: TorusGrid::new(2 * m, n, lengths)?,
        })
    }

    /// Every period `2π`.
    pub fn periodic_box(m: usize, n: usize) -> Result<Self> {
        Self::new(m, n, vec![2.0 * std::f64::consts::PI; 2 * m])
    }

    pub fn from_torus(torus: &TorusGrid) -> Result<Self> {
        let d = torus.dim();
        if d % 2 != 0 || d / 2 > Self::MAX_M || d == 0 {
            return Err(Error::InvalidArgument(format!(
                "a complex torus needs real dimension 2 or 4, got {d}"
            )));
        }
        Ok(Self {
            m: d / 2,
            torus: torus.clone(),
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn torus(&self) -> &TorusGrid {
        &self.torus
    }

    pub fn len(&self) -> usize {
        self.torus.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Wirtinger combination of a real `2m × 2m` matrix of second (or
/// differentiated second) derivatives.
pub(crate) fn wirtinger(h: &DMatrix<f64>, m: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(m, m, |a, b| {
        let (xa, ya, xb, yb) = (2 * a, 2 * a + 1, 2 * b, 2 * b + 1);
        Complex64::new(h[(xa, xb)] + h[(ya, yb)], h[(xa, yb)] - h[(ya, xb)]) * 0.25
    })
}

/// `u_{αβ̄}` at every node, all `m²` entries evaluated independently.
#[derive(Debug, Clone)]
pub struct HermitianHessianField {
    grid: ComplexTorusGrid,
    components: Vec<Vec<Complex64>>,
}

impl HermitianHessianField {
    pub fn grid(&self) -> &ComplexTorusGrid {
        &self.grid
    }

    pub fn m(&self) -> usize {
        self.grid.m
    }

    pub fn component(&self, a: usize, b: usize) -> &[Complex64] {
        &self.components[a * self.grid.m + b]
    }

    fn dense_at(&self, p: usize) -> DMatrix<Complex64> {
        let m = self.grid.m;
        DMatrix::from_fn(m, m, |a, b| self.components[a * m + b][p])
    }

    pub fn at(&self, p: usize) -> HermMatrix {
        HermMatrix::from_dense_projected(self.dense_at(p))
    }

    /// `sup |u_{αβ̄} − conj(u_{βᾱ})|` over entries and nodes.
    pub fn hermitian_defect(&self) -> f64 {
        let m = self.grid.m;
        let mut worst: f64 = 0.0;
        for a in 0..m {
            for b in 0..m {
                for (x, y) in self.component(a, b).iter().zip(self.component(b, a)) {
                    worst = worst.max((x - y.conj()).norm());
                }
            }
        }
        worst
    }

    /// `Σ_α u_{αᾱ}` (real part) and the largest imaginary part seen.
    pub fn trace(&self) -> (ScalarField, f64) {
        let m = self.grid.m;
        let mut imag: f64 = 0.0;
        let values = (0..self.grid.len())
            .map(|p| {
                let t: Complex64 = (0..m).map(|a| self.components[a * m + a][p]).sum();
                imag = imag.max(t.im.abs());
                t.re
            })
            .collect();
        (ScalarField::from_raw(self.grid.torus.clone(), values), imag)
    }

    /// Pointwise `σ_k` of the unprojected matrices and the largest imaginary
    /// part seen.
    pub fn sigma(&self, k: usize) -> Result<(ScalarField, f64)> {
        if k == 0 || k > self.grid.m {
            return Err(Error::OutOfRange { k, max: self.grid.m });
        }
        let mut imag: f64 = 0.0;
        let values = (0..self.grid.len())
            .map(|p| {
                let s = newton_sequence(&self.dense_at(p), k).0[k];
                imag = imag.max(s.imag_part().abs());
                s.real_part()
            })
            .collect();
        Ok((ScalarField::from_raw(self.grid.torus.clone(), values), imag))
    }
}

/// Complex Hessian from the spectral real Hessian of `f`.
pub fn complex_hessian(f: &ScalarField) -> Result<HermitianHessianField> {
    let grid = ComplexTorusGrid::from_torus(f.grid())?;
    let m = grid.m;
    let jet = Jet::new(&f.spectrum(), false, false)?;
    let mut components = vec![Vec::with_capacity(grid.len()); m * m];
    for p in 0..grid.len() {
        let w = wirtinger(&jet.hessian_at(p), m);
        for a in 0..m {
            for b in 0..m {
                components[a * m + b].push(w[(a, b)]);
            }
        }
    }
    Ok(HermitianHessianField { grid, components })
}

/// Values of the non1 contraction at sampled nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Non1Check {
    /// Flat indices of the sampled nodes.
    pub nodes: Vec<usize>,
    pub values: Vec<f64>,
}

impl Non1Check {
    /// Every sampled value is `≥ −tol`.
    pub fn holds(&self, tol: f64) -> bool {
        self.values.iter().all(|&v| v >= -tol)
    }
}

fn sample_nodes(len: usize, samples: usize) -> Result<Vec<usize>> {
    if samples == 0 || samples > len {
        return Err(Error::InvalidArgument(format!("sample count {samples} outside 1..={len}")));
    }
    Ok((0..samples).map(|s| s * len / samples).collect())
}

/// The non1 contraction with zero curvature at `samples` evenly spread nodes.
/// Every value is exactly zero on a flat torus.
pub fn condition_non1_field_check(f: &ScalarField, samples: usize) -> Result<Non1Check> {
    let hess = complex_hessian(f)?;
    let flat = KahlerCurvature::flat(hess.m());
    let nodes = sample_nodes(hess.grid.len(), samples)?;
    let values = nodes
        .iter()
        .map(|&p| non1_contraction(&hess.at(p), &flat))
        .collect::<Result<Vec<_>>>()?;
    Ok(Non1Check { nodes, values })
}

/// The same sampled Hessians evaluated against a `CP^m` model.
pub fn condition_non1_on_model(f: &ScalarField, model: &ModelCPn, samples: usize) -> Result<Non1Check> {
    let hess = complex_hessian(f)?;
    let nodes = sample_nodes(hess.grid.len(), samples)?;
    let values = nodes
        .iter()
        .map(|&p| condition_non1_value(&hess.at(p), model))
        .collect::<Result<Vec<_>>>()?;
    Ok(Non1Check { nodes, values })
}
