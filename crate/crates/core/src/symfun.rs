//! Elementary symmetric polynomials and Newton transformations of small
//! symmetric and Hermitian matrices.
//!
//! Everything is computed from matrix entries through the Newton recursion
//!
//! ```text
//! T_0 = I,   σ_k = tr(T_{k-1} A) / k,   T_k = σ_k I - T_{k-1} A,
//! ```
//!
//! so no eigen-decomposition is involved. `T_{k-1}` is the derivative of `σ_k`
//! with respect to the matrix, which is what the directional derivative uses.

use nalgebra::{ComplexField, DMatrix};
use num_complex::Complex64;

use crate::error::{check_range, Error, Result};

/// Scalar type of a matrix entry: `f64` for symmetric, `Complex64` for Hermitian.
pub trait Entry: ComplexField<RealField = f64> + Copy {
    fn real_part(self) -> f64;
    fn imag_part(self) -> f64;
}

impl Entry for f64 {
    fn real_part(self) -> f64 {
        self
    }
    fn imag_part(self) -> f64 {
        0.0
    }
}

impl Entry for Complex64 {
    fn real_part(self) -> f64 {
        self.re
    }
    fn imag_part(self) -> f64 {
        self.im
    }
}

/// Common surface of [`SymMatrix`] and [`HermMatrix`].
pub trait SelfAdjoint: Clone + std::fmt::Debug {
    type Entry: Entry;

    fn dense(&self) -> &DMatrix<Self::Entry>;

    /// Wrap a dense matrix, projecting onto the self-adjoint part `(M + M*)/2`
    /// so the exact-symmetry invariant holds after products that are only
    /// self-adjoint up to roundoff.
    fn from_dense_projected(m: DMatrix<Self::Entry>) -> Self;

    fn dim(&self) -> usize {
        self.dense().nrows()
    }

    fn identity(n: usize) -> Self {
        Self::from_dense_projected(DMatrix::identity(n, n))
    }

    /// Squared Frobenius norm, `Σ |a_ij|²`.
    fn frobenius_sq(&self) -> f64 {
        self.dense().iter().map(|v| v.modulus_squared()).sum()
    }

    fn scaled(&self, s: f64) -> Self {
        Self::from_dense_projected(self.dense().map(|v| v.scale(s)))
    }
}

fn project<T: Entry>(m: DMatrix<T>) -> DMatrix<T> {
    let n = m.nrows();
    let mut out = m.clone();
    for i in 0..n {
        out[(i, i)] = T::from_real(m[(i, i)].real_part());
        for j in (i + 1)..n {
            let v = (m[(i, j)] + m[(j, i)].conjugate()).scale(0.5);
            out[(i, j)] = v;
            out[(j, i)] = v.conjugate();
        }
    }
    out
}

/// Real symmetric `n × n` matrix, `2 ≤ n ≤ 8`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    pub const MIN_DIM: usize = 2;
    pub const MAX_DIM: usize = 8;

    /// Build from row-major entries. Symmetry must hold exactly.
    pub fn from_row_major(n: usize, entries: &[f64]) -> Result<Self> {
        check_sym_dim(n)?;
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: entries.len(),
            });
        }
        let m = DMatrix::from_row_slice(n, n, entries);
        for i in 0..n {
            for j in (i + 1)..n {
                if m[(i, j)] != m[(j, i)] {
                    return Err(Error::InvalidArgument(format!(
                        "entries ({i},{j}) and ({j},{i}) differ"
                    )));
                }
            }
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("matrix entry".into()));
        }
        Ok(Self(m))
    }

    /// Build from a closure evaluated on the upper triangle (`i <= j`).
    pub fn from_upper(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        check_sym_dim(n)?;
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        Ok(Self(m))
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        Self::from_upper(values.len(), |i, j| if i == j { values[i] } else { 0.0 })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }
}

fn check_sym_dim(n: usize) -> Result<()> {
    if !(SymMatrix::MIN_DIM..=SymMatrix::MAX_DIM).contains(&n) {
        return Err(Error::InvalidArgument(format!(
            "symmetric dimension {n} outside {}..={}",
            SymMatrix::MIN_DIM,
            SymMatrix::MAX_DIM
        )));
    }
    Ok(())
}

impl SelfAdjoint for SymMatrix {
    type Entry = f64;

    fn dense(&self) -> &DMatrix<f64> {
        &self.0
    }

    fn from_dense_projected(m: DMatrix<f64>) -> Self {
        Self(project(m))
    }
}

/// Complex Hermitian `m × m` matrix, `1 ≤ m ≤ 4`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermMatrix(DMatrix<Complex64>);

impl HermMatrix {
    pub const MIN_DIM: usize = 1;
    pub const MAX_DIM: usize = 4;

    /// Build from row-major entries; requires `a[α][β] == conj(a[β][α])` and a
    /// real diagonal, exactly.
    pub fn from_row_major(m: usize, entries: &[Complex64]) -> Result<Self> {
        check_herm_dim(m)?;
        if entries.len() != m * m {
            return Err(Error::DimensionMismatch {
                expected: m * m,
                got: entries.len(),
            });
        }
        let mat = DMatrix::from_row_slice(m, m, entries);
        for a in 0..m {
            if mat[(a, a)].im != 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "diagonal entry {a} is not real"
                )));
            }
            for b in (a + 1)..m {
                if mat[(a, b)] != mat[(b, a)].conj() {
                    return Err(Error::InvalidArgument(format!(
                        "entries ({a},{b}) and ({b},{a}) are not conjugate"
                    )));
                }
            }
        }
        Ok(Self(mat))
    }

    /// Build from the upper triangle; the diagonal imaginary part is dropped.
    pub fn from_upper(m: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Result<Self> {
        check_herm_dim(m)?;
        let mut mat = DMatrix::zeros(m, m);
        for a in 0..m {
            mat[(a, a)] = Complex64::new(f(a, a).re, 0.0);
            for b in (a + 1)..m {
                let v = f(a, b);
                mat[(a, b)] = v;
                mat[(b, a)] = v.conj();
            }
        }
        Ok(Self(mat))
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        Self::from_upper(values.len(), |a, b| {
            if a == b {
                Complex64::new(values[a], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    pub fn get(&self, a: usize, b: usize) -> Complex64 {
        self.0[(a, b)]
    }
}

fn check_herm_dim(m: usize) -> Result<()> {
    if !(HermMatrix::MIN_DIM..=HermMatrix::MAX_DIM).contains(&m) {
        return Err(Error::InvalidArgument(format!(
            "hermitian dimension {m} outside {}..={}",
            HermMatrix::MIN_DIM,
            HermMatrix::MAX_DIM
        )));
    }
    Ok(())
}

impl SelfAdjoint for HermMatrix {
    type Entry = Complex64;

    fn dense(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    fn from_dense_projected(m: DMatrix<Complex64>) -> Self {
        Self(project(m))
    }
}

/// `σ_1(A), …, σ_n(A)`; `values[k-1] = σ_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaVector {
    pub values: Vec<f64>,
}

impl SigmaVector {
    pub fn sigma(&self, k: usize) -> f64 {
        if k == 0 {
            1.0
        } else {
            self.values[k - 1]
        }
    }
}

/// Newton recursion on a dense matrix. Returns `σ_0..=σ_upto` (as raw traces,
/// possibly carrying a roundoff imaginary part) and `T_0..=T_upto`.
///
/// This is the kernel shared with the field code, which works on dense
/// matrices directly.
pub fn newton_sequence<T: Entry>(a: &DMatrix<T>, upto: usize) -> (Vec<T>, Vec<DMatrix<T>>) {
    let n = a.nrows();
    let mut sigmas = Vec::with_capacity(upto + 1);
    let mut transforms = Vec::with_capacity(upto + 1);
    sigmas.push(T::one());
    transforms.push(DMatrix::identity(n, n));
    for k in 1..=upto {
        let prod = &transforms[k - 1] * a;
        let sigma = prod.trace().scale(1.0 / k as f64);
        let mut t = -prod;
        for i in 0..n {
            t[(i, i)] += sigma;
        }
        sigmas.push(sigma);
        transforms.push(t);
    }
    (sigmas, transforms)
}

/// `σ_k(A)`, with `σ_0 = 1`.
pub fn elementary_symmetric<M: SelfAdjoint>(a: &M, k: usize) -> Result<f64> {
    check_range(k, a.dim())?;
    let (s, _) = newton_sequence(a.dense(), k);
    Ok(s[k].real_part())
}

/// `σ_k(A)` before the real part is taken; for Hermitian input the imaginary
/// part is pure roundoff.
pub fn elementary_symmetric_raw<M: SelfAdjoint>(a: &M, k: usize) -> Result<M::Entry> {
    check_range(k, a.dim())?;
    let (s, _) = newton_sequence(a.dense(), k);
    Ok(s[k])
}

pub fn sigma_vector<M: SelfAdjoint>(a: &M) -> SigmaVector {
    let n = a.dim();
    let (s, _) = newton_sequence(a.dense(), n);
    SigmaVector {
        values: s[1..].iter().map(|v| v.real_part()).collect(),
    }
}

/// `T_k(A) = σ_k I − σ_{k−1} A + … + (−1)^k A^k`, with `T_0 = I`.
pub fn newton_transform<M: SelfAdjoint>(a: &M, k: usize) -> Result<M> {
    check_range(k, a.dim())?;
    let (_, mut t) = newton_sequence(a.dense(), k);
    Ok(M::from_dense_projected(t.swap_remove(k)))
}

/// `tr(T_{k−1}(A) B)`, the derivative of `s ↦ σ_k(A + sB)` at `s = 0`.
pub fn sigma_directional_derivative<M: SelfAdjoint>(a: &M, b: &M, k: usize) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    if k == 0 {
        return Err(Error::InvalidArgument(
            "directional derivative needs k >= 1".into(),
        ));
    }
    check_range(k, a.dim())?;
    let (_, t) = newton_sequence(a.dense(), k - 1);
    Ok(trace_product(&t[k - 1], b.dense()))
}

/// `Re tr(X Y)` without forming the product.
pub fn trace_product<T: Entry>(x: &DMatrix<T>, y: &DMatrix<T>) -> f64 {
    let n = x.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += (x[(i, j)] * y[(j, i)]).real_part();
        }
    }
    acc
}

/// Gårding cone test: `σ_j(A) > 0` for every `j = 1..=k`.
pub fn garding_membership<M: SelfAdjoint>(a: &M, k: usize) -> Result<bool> {
    garding_membership_with_tolerance(a, k, 0.0)
}

/// Like [`garding_membership`] but accepts `σ_j > -eps`.
pub fn garding_membership_with_tolerance<M: SelfAdjoint>(a: &M, k: usize, eps: f64) -> Result<bool> {
    if k == 0 {
        return Err(Error::InvalidArgument("cone order must be >= 1".into()));
    }
    check_range(k, a.dim())?;
    let (s, _) = newton_sequence(a.dense(), k);
    Ok(s[1..=k].iter().all(|v| v.real_part() > -eps))
}
