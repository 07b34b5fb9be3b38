mod common;

use common::*;
use nalgebra::DMatrix;
use pcflow_core::geomodels::{
    closed_form_gap, condition_non1_value, condition_non2_value, CurvatureCondition, ModelCPn,
    ModelSn,
};
use pcflow_core::symfun::*;
use proptest::prelude::*;

#[test]
fn sigma_matches_eigenvalue_oracle() {
    let mut r = rng(11);
    for _ in 0..200 {
        let a = random_sym(&mut r, 5, 2.0);
        let e = elementary_from_roots(&jacobi_eigenvalues(a.dense()));
        for k in 0..=5 {
            let s = elementary_symmetric(&a, k).unwrap();
            assert!(
                (s - e[k]).abs() <= 1e-10 * e[k].abs().max(1.0),
                "k={k}: {s} vs {}",
                e[k]
            );
        }
    }
}

#[test]
fn hermitian_sigma_matches_eigenvalue_oracle_and_is_real() {
    let mut r = rng(12);
    for _ in 0..200 {
        let h = random_herm(&mut r, 3, 1.5);
        let e = elementary_from_roots(&hermitian_eigenvalues(h.dense()));
        for k in 1..=3 {
            let raw = elementary_symmetric_raw(&h, k).unwrap();
            assert!(raw.im.abs() < 1e-12);
            assert!((raw.re - e[k]).abs() <= 1e-10 * e[k].abs().max(1.0));
        }
    }
}

#[test]
fn newton_transform_matches_polynomial_oracle() {
    let mut r = rng(13);
    for n in 2..=6 {
        let a = random_sym(&mut r, n, 1.0);
        for k in 0..=n {
            let t = newton_transform(&a, k).unwrap();
            let oracle = newton_polynomial(a.dense(), k);
            assert!(max_abs(&(t.dense() - &oracle)) < 1e-10, "n={n} k={k}");
        }
    }
}

#[test]
fn cayley_hamilton() {
    let mut r = rng(14);
    for n in 2..=6 {
        for _ in 0..100 {
            let a = random_sym(&mut r, n, 3.0);
            let tn = newton_transform(&a, n).unwrap();
            let norm = a.frobenius_sq().sqrt();
            assert!(max_abs(tn.dense()) <= 1e-9 * (1.0 + norm.powi(n as i32)));
            // and the oracle agrees that T_n vanishes
            let oracle = newton_polynomial(a.dense(), n);
            assert!(max_abs(&oracle) <= 1e-9 * (1.0 + norm.powi(n as i32)));
        }
    }
}

#[test]
fn directional_derivative_matches_central_difference() {
    let mut r = rng(15);
    let h = 1e-5;
    for n in 2..=5 {
        for _ in 0..50 {
            let a = random_sym(&mut r, n, 1.0);
            let b = random_sym(&mut r, n, 1.0);
            for k in 1..=n {
                let plus = SymMatrix::from_dense_projected(a.dense() + b.dense() * h);
                let minus = SymMatrix::from_dense_projected(a.dense() - b.dense() * h);
                let fd = (elementary_symmetric(&plus, k).unwrap()
                    - elementary_symmetric(&minus, k).unwrap())
                    / (2.0 * h);
                let d = sigma_directional_derivative(&a, &b, k).unwrap();
                assert!((d - fd).abs() <= 1e-6 * d.abs().max(1.0), "{d} vs {fd}");
            }
        }
    }
}

#[test]
fn garding_membership_ignores_orthogonal_conjugation() {
    let mut r = rng(16);
    for _ in 0..100 {
        let a = random_sym(&mut r, 4, 1.0);
        let shifted = SymMatrix::from_dense_projected(a.dense() + DMatrix::identity(4, 4) * 0.7);
        let q = random_sym(&mut r, 4, 1.0).dense().clone().qr().q();
        let conj = SymMatrix::from_dense_projected(q.transpose() * shifted.dense() * &q);
        for k in 1..=4 {
            // skip cases that sit on the cone boundary to roundoff
            let margin = (1..=k)
                .map(|j| elementary_symmetric(&shifted, j).unwrap().abs())
                .fold(f64::INFINITY, f64::min);
            if margin < 1e-9 {
                continue;
            }
            assert_eq!(
                garding_membership(&shifted, k).unwrap(),
                garding_membership(&conj, k).unwrap()
            );
        }
    }
}

#[test]
fn curvature_conditions_on_models() {
    let mut r = rng(17);
    for n in 2..=6 {
        let s = ModelSn::new(n, 1.0 + n as f64 * 0.25).unwrap();
        for _ in 0..500 {
            let a = random_sym(&mut r, n, 2.0);
            let v = condition_non2_value(&a, &s).unwrap();
            assert!(v >= -1e-12 * (1.0 + a.frobenius_sq()));
            assert!(closed_form_gap(&a, &s).unwrap() < 1e-12 * (1.0 + a.frobenius_sq()));
        }
    }
    let s3 = ModelSn::new(3, 2.0).unwrap();
    let a = random_sym(&mut r, 3, 1.0);
    assert!(closed_form_gap(&a, &s3).unwrap() < 1e-12 * (1.0 + a.frobenius_sq()));

    for m in 1..=4 {
        let cp = ModelCPn::new(m, 1.0).unwrap();
        for _ in 0..500 {
            let h = random_herm(&mut r, m, 2.0);
            let v = condition_non1_value(&h, &cp).unwrap();
            assert!(v >= -1e-12 * (1.0 + h.frobenius_sq()));
            assert!(closed_form_gap(&h, &cp).unwrap() < 1e-12 * (1.0 + h.frobenius_sq()));
        }
    }
}

fn sym_strategy(n: usize) -> impl Strategy<Value = SymMatrix> {
    proptest::collection::vec(-5.0f64..5.0, n * (n + 1) / 2).prop_map(move |v| {
        let mut it = v.into_iter();
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let x = it.next().unwrap();
                m[(i, j)] = x;
                m[(j, i)] = x;
            }
        }
        SymMatrix::from_dense_projected(m)
    })
}

fn any_sym() -> impl Strategy<Value = SymMatrix> {
    (2usize..=6).prop_flat_map(sym_strategy)
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// `|a − b| ≤ tol · (1 + ‖A‖_F)^k`: the size of a degree-`k` expression in `A`.
fn close_at_degree(a: f64, b: f64, m: &SymMatrix, k: usize, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + m.frobenius_sq().sqrt()).powi(k as i32)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn euler_homogeneity(a in any_sym()) {
        let n = a.dim();
        let (sig, t) = newton_sequence(a.dense(), n);
        for k in 1..=n {
            let lhs = trace_product(&t[k - 1], a.dense());
            prop_assert!(close_at_degree(lhs, k as f64 * sig[k], &a, k, 1e-12));
        }
    }

    #[test]
    fn trace_of_newton_transform(a in any_sym()) {
        let n = a.dim();
        for k in 0..=n {
            let t = newton_transform(&a, k).unwrap();
            let s = elementary_symmetric(&a, k).unwrap();
            prop_assert!(close_at_degree(t.dense().trace(), (n - k) as f64 * s, &a, k, 1e-12));
        }
    }

    #[test]
    fn frobenius_identity(a in any_sym()) {
        let s1 = elementary_symmetric(&a, 1).unwrap();
        let s2 = elementary_symmetric(&a, 2).unwrap();
        prop_assert!(rel_close(s1 * s1 - 2.0 * s2, a.frobenius_sq(), 1e-12));
    }

    #[test]
    fn non2_is_quadratic(a in any_sym(), lambda in -3.0f64..3.0) {
        let s = ModelSn::new(a.dim(), 1.3).unwrap();
        let v = s.brute_force(&a).unwrap();
        let scaled = s.brute_force(&a.scaled(lambda)).unwrap();
        prop_assert!((scaled - lambda * lambda * v).abs() <= 1e-10 * (1.0 + v.abs() * lambda * lambda));
    }
}
