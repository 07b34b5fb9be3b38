//! Constant-curvature model spaces and the two curvature conditions on the
//! Hessian that drive the σ₂ estimates.
//!
//! All tensors are written at a point in normal coordinates, so the metric is
//! the identity and indices are raised for free.
//!
//! Sign convention for the real Riemann tensor:
//!
//! ```text
//! R(a,b,c,d) = κ (g_ac g_bd − g_ad g_bc),   Ric_bd = Σ_a R(a,b,a,d)
//! ```
//!
//! so the sectional curvature `R(a,b,a,b)` of the unit sphere is `+1` and
//! `Ric = (n−1) κ g`. With this convention the commutation formula for the
//! Hessian reads
//!
//! ```text
//! ∇_i∇_j Δu = Δ ∇_i∇_j u + 2 R(i,k,j,l) u_kl − Ric_il u_jl − Ric_jl u_il
//! ```
//!
//! (spherelab checks this end to end). Every constant-curvature model has
//! parallel Ricci tensor, so the `∇Ric` terms never appear.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symfun::{HermMatrix, SelfAdjoint, SymMatrix};

/// Background space and metric of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum GeometryModel {
    FlatTorus { dim: usize, side_lengths: Vec<f64> },
    RoundSphere2 { radius: f64 },
    ShrinkingSphere { radius0: f64 },
    FlatComplexTorus { m: usize, side_lengths: Vec<f64> },
    ModelSn(ModelSn),
    ModelCPn(ModelCPn),
}

impl GeometryModel {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidArgument(format!("{name} must be positive, got {v}")))
            }
        };
        match self {
            GeometryModel::FlatTorus { dim, side_lengths } => {
                if side_lengths.len() != *dim {
                    return Err(Error::DimensionMismatch {
                        expected: *dim,
                        got: side_lengths.len(),
                    });
                }
                side_lengths.iter().try_for_each(|&l| positive("side length", l))
            }
            GeometryModel::FlatComplexTorus { m, side_lengths } => {
                if side_lengths.len() != 2 * m {
                    return Err(Error::DimensionMismatch {
                        expected: 2 * m,
                        got: side_lengths.len(),
                    });
                }
                side_lengths.iter().try_for_each(|&l| positive("side length", l))
            }
            GeometryModel::RoundSphere2 { radius } => positive("radius", *radius),
            GeometryModel::ShrinkingSphere { radius0 } => positive("radius0", *radius0),
            GeometryModel::ModelSn(s) => positive("kappa", s.kappa),
            GeometryModel::ModelCPn(s) => positive("c", s.c),
        }
    }

    /// Whether the model only exists as an algebraic curvature model (no grid).
    pub fn is_algebraic(&self) -> bool {
        matches!(self, GeometryModel::ModelSn(_) | GeometryModel::ModelCPn(_))
    }
}

/// Round sphere `Sⁿ` of sectional curvature `κ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSn {
    pub n: usize,
    pub kappa: f64,
}

impl ModelSn {
    pub fn new(n: usize, kappa: f64) -> Result<Self> {
        if !(SymMatrix::MIN_DIM..=SymMatrix::MAX_DIM).contains(&n) {
            return Err(Error::InvalidArgument(format!("sphere dimension {n} unsupported")));
        }
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::InvalidArgument(format!("kappa must be positive, got {kappa}")));
        }
        Ok(Self { n, kappa })
    }

    pub fn riemann(&self) -> RiemannTensor {
        RiemannTensor::constant_curvature(self.n, self.kappa)
    }
}

/// Complex projective space `CPⁿ` with the Fubini–Study metric scaled by `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelCPn {
    pub n: usize,
    pub c: f64,
}

impl ModelCPn {
    pub fn new(n: usize, c: f64) -> Result<Self> {
        if !(HermMatrix::MIN_DIM..=HermMatrix::MAX_DIM).contains(&n) {
            return Err(Error::InvalidArgument(format!("CP^n dimension {n} unsupported")));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidArgument(format!("c must be positive, got {c}")));
        }
        Ok(Self { n, c })
    }

    pub fn curvature(&self) -> KahlerCurvature {
        KahlerCurvature::fubini_study(self.n, self.c)
    }
}

/// Dense real curvature tensor `R(a,b,c,d)` at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct RiemannTensor {
    n: usize,
    data: Vec<f64>,
}

impl RiemannTensor {
    pub fn from_fn(n: usize, f: impl Fn(usize, usize, usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(n.pow(4));
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        data.push(f(a, b, c, d));
                    }
                }
            }
        }
        Self { n, data }
    }

    /// `R(a,b,c,d) = κ (δ_ac δ_bd − δ_ad δ_bc)`.
    pub fn constant_curvature(n: usize, kappa: f64) -> Self {
        let d = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
        Self::from_fn(n, |a, b, c, e| kappa * (d(a, c) * d(b, e) - d(a, e) * d(b, c)))
    }

    pub fn flat(n: usize) -> Self {
        Self::from_fn(n, |_, _, _, _| 0.0)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> f64 {
        let n = self.n;
        self.data[((a * n + b) * n + c) * n + d]
    }

    /// `Ric_bd = Σ_a R(a,b,a,d)`.
    pub fn ricci(&self) -> DMatrix<f64> {
        let n = self.n;
        DMatrix::from_fn(n, n, |b, d| (0..n).map(|a| self.get(a, b, a, d)).sum())
    }

    /// Largest violation of the algebraic Riemann symmetries (antisymmetry in
    /// each pair, pair exchange, first Bianchi identity).
    pub fn symmetry_defect(&self) -> f64 {
        let n = self.n;
        let mut worst: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let r = self.get(a, b, c, d);
                        worst = worst
                            .max((r + self.get(b, a, c, d)).abs())
                            .max((r + self.get(a, b, d, c)).abs())
                            .max((r - self.get(c, d, a, b)).abs())
                            .max((r + self.get(b, c, a, d) + self.get(c, a, b, d)).abs());
                    }
                }
            }
        }
        worst
    }
}

/// Dense Kähler curvature `R(α, β̄, γ, δ̄)` at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct KahlerCurvature {
    m: usize,
    data: Vec<Complex64>,
}

impl KahlerCurvature {
    pub fn from_fn(m: usize, f: impl Fn(usize, usize, usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(m.pow(4));
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    for d in 0..m {
                        data.push(f(a, b, c, d));
                    }
                }
            }
        }
        Self { m, data }
    }

    /// `R(α,β̄,γ,δ̄) = c (g_αβ̄ g_γδ̄ + g_αδ̄ g_γβ̄)`.
    pub fn fubini_study(m: usize, c: f64) -> Self {
        let d = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
        Self::from_fn(m, |a, b, g, e| {
            Complex64::new(c * (d(a, b) * d(g, e) + d(a, e) * d(g, b)), 0.0)
        })
    }

    pub fn flat(m: usize) -> Self {
        Self::from_fn(m, |_, _, _, _| Complex64::new(0.0, 0.0))
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize, c: usize, d: usize) -> Complex64 {
        let m = self.m;
        self.data[((a * m + b) * m + c) * m + d]
    }

    /// `Ric_αβ̄ = Σ_γ R(α, β̄, γ, γ̄)`.
    pub fn ricci(&self) -> DMatrix<Complex64> {
        let m = self.m;
        DMatrix::from_fn(m, m, |a, b| (0..m).map(|g| self.get(a, b, g, g)).sum())
    }

    /// Largest violation of the Kähler symmetries: exchange of the holomorphic
    /// slots, exchange of the antiholomorphic slots, and reality.
    pub fn symmetry_defect(&self) -> f64 {
        let m = self.m;
        let mut worst: f64 = 0.0;
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    for d in 0..m {
                        let r = self.get(a, b, c, d);
                        worst = worst
                            .max((r - self.get(c, b, a, d)).norm())
                            .max((r - self.get(a, d, c, b)).norm())
                            .max((r.conj() - self.get(b, a, d, c)).norm());
                    }
                }
            }
        }
        worst
    }
}

/// `−2 u_ij R(i,k,j,l) u_kl + 2 u_ij Ric_jl u_il`, summed over all index tuples.
pub fn non2_contraction(a: &SymMatrix, riemann: &RiemannTensor) -> Result<f64> {
    let n = a.dim();
    if riemann.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: riemann.dim(),
            got: n,
        });
    }
    let ric = riemann.ricci();
    let mut curv = 0.0;
    let mut ricci_term = 0.0;
    for i in 0..n {
        for j in 0..n {
            let uij = a.get(i, j);
            for k in 0..n {
                for l in 0..n {
                    curv += uij * riemann.get(i, k, j, l) * a.get(k, l);
                }
            }
            for l in 0..n {
                ricci_term += uij * ric[(j, l)] * a.get(i, l);
            }
        }
    }
    Ok(-2.0 * curv + 2.0 * ricci_term)
}

/// `−u_βᾱ R(α,β̄,γ,δ̄) u_γ̄δ + u_βᾱ Ric_αs̄ u_sβ̄`, with `u_αβ̄ = A[α][β]`.
pub fn non1_contraction(a: &HermMatrix, curvature: &KahlerCurvature) -> Result<f64> {
    let m = a.dim();
    if curvature.dim() != m {
        return Err(Error::DimensionMismatch {
            expected: curvature.dim(),
            got: m,
        });
    }
    let ric = curvature.ricci();
    let mut curv = Complex64::new(0.0, 0.0);
    let mut ricci_term = Complex64::new(0.0, 0.0);
    for al in 0..m {
        for be in 0..m {
            let u_be_al = a.get(be, al);
            for ga in 0..m {
                for de in 0..m {
                    curv += u_be_al * curvature.get(al, be, ga, de) * a.get(de, ga);
                }
            }
            for s in 0..m {
                ricci_term += u_be_al * ric[(al, s)] * a.get(s, be);
            }
        }
    }
    Ok((ricci_term - curv).re)
}

/// A curvature condition with both a brute-force and a closed-form evaluation.
pub trait CurvatureCondition {
    type Matrix: SelfAdjoint;

    fn dim(&self) -> usize;
    fn brute_force(&self, a: &Self::Matrix) -> Result<f64>;
    fn closed_form(&self, a: &Self::Matrix) -> Result<f64>;
}

impl CurvatureCondition for ModelSn {
    type Matrix = SymMatrix;

    fn dim(&self) -> usize {
        self.n
    }

    fn brute_force(&self, a: &SymMatrix) -> Result<f64> {
        non2_contraction(a, &self.riemann())
    }

    /// `κ (2n‖A‖² − 2σ₁²)`.
    fn closed_form(&self, a: &SymMatrix) -> Result<f64> {
        check_dim(self.n, a.dim())?;
        let tr = a.dense().trace();
        Ok(self.kappa * (2.0 * self.n as f64 * a.frobenius_sq() - 2.0 * tr * tr))
    }
}

impl CurvatureCondition for ModelCPn {
    type Matrix = HermMatrix;

    fn dim(&self) -> usize {
        self.n
    }

    fn brute_force(&self, a: &HermMatrix) -> Result<f64> {
        non1_contraction(a, &self.curvature())
    }

    /// `c (n‖A‖² − (tr A)²)`.
    fn closed_form(&self, a: &HermMatrix) -> Result<f64> {
        check_dim(self.n, a.dim())?;
        let tr = a.dense().trace().re;
        Ok(self.c * (self.n as f64 * a.frobenius_sq() - tr * tr))
    }
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        Err(Error::DimensionMismatch { expected, got })
    } else {
        Ok(())
    }
}

/// Condition (non2) on `Sⁿ(κ)`, by full four-index contraction.
pub fn condition_non2_value(a: &SymMatrix, space: &ModelSn) -> Result<f64> {
    space.brute_force(a)
}

/// Condition (non1) on `CPⁿ(c)`, by full four-index contraction.
pub fn condition_non1_value(a: &HermMatrix, space: &ModelCPn) -> Result<f64> {
    space.brute_force(a)
}

/// `|brute force − closed form|`; regression check for the closed-form reductions.
pub fn closed_form_gap<S: CurvatureCondition>(a: &S::Matrix, space: &S) -> Result<f64> {
    Ok((space.brute_force(a)? - space.closed_form(a)?).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non2_identity_is_equality_case() {
        for n in 2..=6 {
            let s = ModelSn::new(n, 1.7).unwrap();
            let v = condition_non2_value(&SymMatrix::identity(n), &s).unwrap();
            assert!(v.abs() < 1e-12, "n={n}: {v}");
        }
    }

    #[test]
    fn non2_hand_example() {
        let a = SymMatrix::diagonal(&[1.0, -1.0, 0.0]).unwrap();
        let s = ModelSn::new(3, 1.0).unwrap();
        assert!((condition_non2_value(&a, &s).unwrap() - 12.0).abs() < 1e-12);
        assert!((s.closed_form(&a).unwrap() - 12.0).abs() < 1e-12);
    }

    #[test]
    fn non1_examples() {
        let cp2 = ModelCPn::new(2, 1.0).unwrap();
        let id = HermMatrix::identity(2);
        assert!(condition_non1_value(&id, &cp2).unwrap().abs() < 1e-12);
        let a = HermMatrix::diagonal(&[1.0, -1.0]).unwrap();
        assert!((condition_non1_value(&a, &cp2).unwrap() - 4.0).abs() < 1e-12);
        assert_eq!(closed_form_gap(&id, &cp2).unwrap(), 0.0);
    }

    #[test]
    fn ricci_is_trace_of_riemann() {
        let r = RiemannTensor::constant_curvature(4, 0.5);
        let ric = r.ricci();
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i == j { 3.0 * 0.5 } else { 0.0 };
                assert!((ric[(i, j)] - expected).abs() < 1e-15);
            }
        }
        assert_eq!(r.symmetry_defect(), 0.0);
        assert!(r.get(0, 1, 0, 1) > 0.0, "sectional curvature must be positive");

        let k = KahlerCurvature::fubini_study(3, 2.0);
        let ric = k.ricci();
        for a in 0..3 {
            for b in 0..3 {
                let expected = if a == b { 2.0 * 4.0 } else { 0.0 };
                assert!((ric[(a, b)] - Complex64::new(expected, 0.0)).norm() < 1e-15);
            }
        }
        assert_eq!(k.symmetry_defect(), 0.0);
    }

    #[test]
    fn flat_models_give_zero() {
        let a = SymMatrix::from_upper(3, |i, j| (i as f64) - 2.0 * j as f64).unwrap();
        assert_eq!(non2_contraction(&a, &RiemannTensor::flat(3)).unwrap(), 0.0);
        let h = HermMatrix::from_upper(2, |a, b| Complex64::new(a as f64 + 1.0, b as f64)).unwrap();
        assert_eq!(non1_contraction(&h, &KahlerCurvature::flat(2)).unwrap(), 0.0);
    }

    #[test]
    fn dimension_mismatch() {
        let s = ModelSn::new(3, 1.0).unwrap();
        assert!(condition_non2_value(&SymMatrix::identity(2), &s).is_err());
        assert!(s.closed_form(&SymMatrix::identity(2)).is_err());
        let cp = ModelCPn::new(3, 1.0).unwrap();
        assert!(condition_non1_value(&HermMatrix::identity(2), &cp).is_err());
    }

    #[test]
    fn geometry_validation() {
        assert!(GeometryModel::RoundSphere2 { radius: 0.0 }.validate().is_err());
        assert!(GeometryModel::FlatTorus {
            dim: 2,
            side_lengths: vec![1.0]
        }
        .validate()
        .is_err());
        assert!(GeometryModel::FlatComplexTorus {
            m: 2,
            side_lengths: vec![1.0; 4]
        }
        .validate()
        .is_ok());
        assert!(ModelSn::new(3, -1.0).is_err());
        assert!(ModelCPn::new(5, 1.0).is_err());
        assert!(GeometryModel::ModelSn(ModelSn::new(3, 1.0).unwrap()).is_algebraic());
    }
}
