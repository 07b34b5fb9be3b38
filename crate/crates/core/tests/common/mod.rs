//! Test-only oracles, independent of the production code paths.
#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use pcflow_core::symfun::{HermMatrix, SymMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_sym(rng: &mut impl Rng, n: usize, scale: f64) -> SymMatrix {
    SymMatrix::from_upper(n, |_, _| scale * rng.random_range(-1.0..1.0)).unwrap()
}

pub fn random_herm(rng: &mut impl Rng, m: usize, scale: f64) -> HermMatrix {
    HermMatrix::from_upper(m, |_, _| {
        Complex64::new(
            scale * rng.random_range(-1.0..1.0),
            scale * rng.random_range(-1.0..1.0),
        )
    })
    .unwrap()
}

/// Cyclic Jacobi eigenvalue sweep for a real symmetric matrix.
pub fn jacobi_eigenvalues(a: &DMatrix<f64>) -> Vec<f64> {
    let n = a.nrows();
    let mut m = a.clone();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                if m[(p, q)].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * m[(p, q)]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
            }
        }
    }
    (0..n).map(|i| m[(i, i)]).collect()
}

/// Eigenvalues of a Hermitian matrix via its real `2m × 2m` embedding, whose
/// spectrum is the Hermitian spectrum with every value doubled.
pub fn hermitian_eigenvalues(h: &DMatrix<Complex64>) -> Vec<f64> {
    let m = h.nrows();
    let big = DMatrix::from_fn(2 * m, 2 * m, |i, j| {
        let z = h[(i % m, j % m)];
        match (i < m, j < m) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    let mut ev = jacobi_eigenvalues(&big);
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev.into_iter().step_by(2).collect()
}

/// `e_k(λ_1..λ_n)` by dynamic programming over the eigenvalue list.
pub fn elementary_from_roots(roots: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0; roots.len() + 1];
    e[0] = 1.0;
    for (i, &r) in roots.iter().enumerate() {
        for k in (1..=i + 1).rev() {
            e[k] += r * e[k - 1];
        }
    }
    e
}

/// `Σ_{j=0..k} (−1)^j σ_{k−j} A^j` with eigenvalue-derived σ.
pub fn newton_polynomial(a: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let n = a.nrows();
    let sig = elementary_from_roots(&jacobi_eigenvalues(a));
    let mut power = DMatrix::<f64>::identity(n, n);
    let mut acc = DMatrix::<f64>::zeros(n, n);
    for j in 0..=k {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        acc += &power * (sign * sig[k - j]);
        power = &power * a;
    }
    acc
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// Trigonometric polynomial `Σ a cos(k·x) + b sin(k·x)` on `[0, 2π)^d` with
/// analytic derivatives.
#[derive(Debug, Clone)]
pub struct TrigPoly {
    pub terms: Vec<(Vec<i64>, f64, f64)>,
}

impl TrigPoly {
    pub fn random(rng: &mut impl Rng, dim: usize, band: i64, count: usize) -> Self {
        let terms = (0..count)
            .map(|_| {
                let k = (0..dim).map(|_| rng.random_range(-band..=band)).collect();
                (k, rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
            })
            .collect();
        Self { terms }
    }

    pub fn derivative(&self, axes: &[usize]) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(k, a, b)| {
                let (mut a, mut b) = (*a, *b);
                let mut factor = 1.0;
                for &ax in axes {
                    factor *= k[ax] as f64;
                    (a, b) = (b, -a);
                }
                (k.clone(), factor * a, factor * b)
            })
            .collect();
        Self { terms }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(k, a, b)| {
                let th: f64 = k.iter().zip(x).map(|(&ki, &xi)| ki as f64 * xi).sum();
                a * th.cos() + b * th.sin()
            })
            .sum()
    }
}
