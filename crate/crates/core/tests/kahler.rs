mod common;

use std::sync::Arc;

use num_complex::Complex64;

use common::{rng, TrigPoly};
use pcflow_core::geomodels::ModelCPn;
use pcflow_core::kahlerlab::{
    complex_hessian, condition_non1_field_check, condition_non1_on_model, kahler_sigma2_residual,
    shrinking_sigma1_adjudication, ComplexTorusGrid, ShrinkingSphereFlow, Verdict,
};
use pcflow_core::spherelab::{
    sh_synthesize, sphere_heat_propagate, sphere_initial_data, SphereField, SphereGrid, SpherePreset,
};
use pcflow_core::toruslab::{heat_propagate, initial_data, laplacian, ScalarField, TorusPreset};

fn random_field(m: usize, n: usize, band: usize, seed: u64) -> ScalarField {
    let g = ComplexTorusGrid::periodic_box(m, n).unwrap();
    initial_data(&TorusPreset::RandomBandlimited { seed, band }, g.torus()).unwrap()
}

#[test]
fn complex_hessian_matches_analytic_wirtinger_derivatives() {
    let g = ComplexTorusGrid::periodic_box(2, 16).unwrap();
    let p = TrigPoly::random(&mut rng(3), 4, 3, 8);
    let f = ScalarField::from_fn(g.torus(), |x| p.eval(x)).unwrap();
    let h = complex_hessian(&f).unwrap();
    let d2 = |i: usize, j: usize| p.derivative(&[i, j]);
    for a in 0..2 {
        for b in 0..2 {
            let (xa, ya, xb, yb) = (2 * a, 2 * a + 1, 2 * b, 2 * b + 1);
            let (p1, p2, p3, p4) = (d2(xa, xb), d2(ya, yb), d2(xa, yb), d2(ya, xb));
            for (node, u) in h.component(a, b).iter().enumerate() {
                let x = g.torus().point(node);
                let exact = Complex64::new(p1.eval(&x) + p2.eval(&x), p3.eval(&x) - p4.eval(&x)) * 0.25;
                assert!((u - exact).norm() < 1e-11, "({a},{b}) at {node}");
            }
        }
    }
}

#[test]
fn pluriharmonic_direction() {
    let g = ComplexTorusGrid::periodic_box(1, 16).unwrap();
    let f = ScalarField::from_fn(g.torus(), |x| -x[0].cos() + x[1].cos()).unwrap();
    let h = complex_hessian(&f).unwrap();
    for (p, u) in h.component(0, 0).iter().enumerate() {
        let x = g.torus().point(p);
        assert!((u.re - 0.25 * (x[0].cos() - x[1].cos())).abs() < 1e-14);
        if (x[0] - x[1]).abs() < 1e-12 {
            assert!(u.norm() < 1e-14);
        }
    }
}

#[test]
fn trace_is_quarter_real_laplacian() {
    for m in [1, 2] {
        let f = random_field(m, 16, 4, 10 + m as u64);
        let h = complex_hessian(&f).unwrap();
        let (tr, imag) = h.trace();
        assert!(imag < 1e-12);
        let quarter = laplacian(&f).map(|v| 0.25 * v);
        assert!(tr.sup_distance(&quarter) < 1e-10);
    }
}

#[test]
fn sigma_fields_are_real_and_hermitian_symmetry_survives_the_flow() {
    let f = random_field(2, 16, 4, 21);
    for t in [0.0, 0.1, 1.0] {
        let h = complex_hessian(&heat_propagate(&f, t).unwrap()).unwrap();
        assert!(h.hermitian_defect() < 1e-12);
        assert!(h.sigma(1).unwrap().1 < 1e-12);
        assert!(h.sigma(2).unwrap().1 < 1e-12);
    }
}

#[test]
fn kahler_sigma2_identity_separable() {
    let g = ComplexTorusGrid::periodic_box(2, 16).unwrap();
    let f = ScalarField::from_fn(g.torus(), |x| -(x[0].cos() + x[1].cos() + x[2].cos() + x[3].cos())).unwrap();
    assert!(kahler_sigma2_residual(&f).unwrap().sup() < 1e-9);
}

#[test]
fn kahler_sigma2_identity_random_n32_band8() {
    let f = random_field(2, 32, 8, 5);
    let r = kahler_sigma2_residual(&f).unwrap().sup();
    assert!(r < 1e-8, "{r}");
}

#[test]
fn kahler_sigma2_residual_does_not_grow_with_resolution() {
    let coarse = kahler_sigma2_residual(&random_field(2, 16, 4, 8)).unwrap().sup();
    let fine = kahler_sigma2_residual(&random_field(2, 32, 4, 8)).unwrap().sup();
    assert!(fine <= coarse.max(1e-9), "{coarse} -> {fine}");
}

#[test]
fn rank_one_hessian_has_zero_sigma2() {
    let g = ComplexTorusGrid::periodic_box(2, 16).unwrap();
    let p = TrigPoly::random(&mut rng(4), 2, 4, 6);
    let f = ScalarField::from_fn(g.torus(), |x| p.eval(&x[..2])).unwrap();
    let (s2, _) = complex_hessian(&f).unwrap().sigma(2).unwrap();
    assert!(s2.sup_norm() < 1e-10);
    assert!(kahler_sigma2_residual(&f).unwrap().sup() < 1e-10);
}

#[test]
fn non1_wiring() {
    let f = random_field(2, 16, 4, 2);
    let flat = condition_non1_field_check(&f, 100).unwrap();
    assert_eq!(flat.values.len(), 100);
    assert!(flat.values.iter().all(|&v| v == 0.0));
    assert!(flat.holds(0.0));
    let cp2 = condition_non1_on_model(&f, &ModelCPn::new(2, 1.0).unwrap(), 100).unwrap();
    assert_eq!(cp2.nodes, flat.nodes);
    assert!(cp2.values.iter().all(|&v| v >= -1e-12));
}

fn sphere(lmax: usize) -> Arc<SphereGrid> {
    Arc::new(SphereGrid::new(lmax, 1.0).unwrap())
}

#[test]
fn shrinking_cos_theta_closed_form() {
    let g = sphere(16);
    let u = SphereField::from_fn(&g, |t, _| t.cos()).unwrap();
    let cmax = g.cos_theta().iter().fold(0.0, |a: f64, c| a.max(c.abs()));
    for c in [2.0, 1.0] {
        let report = shrinking_sigma1_adjudication(&u, 0.02, 10, c).unwrap();
        for step in &report.steps {
            let s = 1.0 - c * step.t;
            // u = e(t) cos θ with e = e^{−2τ} = s^{2/c}
            let e = s.powf(2.0 / c);
            let r0 = 2.0 * c * e / (s * s) * cmax;
            assert!((step.sup_r0 - r0).abs() < 1e-8, "c={c} t={}", step.t);
            assert!(step.sup_r1 < 1e-8);
            assert!((step.sigma1_sup - 2.0 * e / s * cmax).abs() < 1e-8);
        }
        assert_eq!(report.verdict(), Some(Verdict::R1Zero));
    }
}

#[test]
fn shrinking_adjudication_is_decisive_for_random_data() {
    let g = sphere(24);
    let mut verdicts = Vec::new();
    for seed in 0..5 {
        let u = sphere_initial_data(&SpherePreset::RandomBandlimited { seed, band: 6 }, &g).unwrap();
        let report = shrinking_sigma1_adjudication(&u, 0.01, 20, 2.0).unwrap();
        assert!(report.all_decisive(), "seed {seed}");
        verdicts.push(report.verdict().unwrap());
    }
    assert!(verdicts.iter().all(|&v| v == verdicts[0]));
}

#[test]
fn conformal_time_semigroup() {
    let g = sphere(16);
    let u = sphere_initial_data(&SpherePreset::RandomBandlimited { seed: 2, band: 4 }, &g).unwrap();
    let flow = ShrinkingSphereFlow::new(&u, 2.0).unwrap();
    let (t1, t2) = (0.05, 0.2);
    let via = sphere_heat_propagate(&flow.spectrum_at(t1).unwrap(), flow.conformal_time(t2) - flow.conformal_time(t1), 1.0)
        .unwrap();
    let direct = flow.field_at(t2).unwrap();
    assert!(sh_synthesize(&via, &g).sup_distance(&direct) < 1e-13);
}

#[test]
fn euler_stepping_converges_at_first_order() {
    let g = sphere(16);
    let u = sphere_initial_data(&SpherePreset::RandomBandlimited { seed: 7, band: 4 }, &g).unwrap();
    let flow = ShrinkingSphereFlow::new(&u, 2.0).unwrap();
    let t = 0.2;
    let exact = flow.field_at(t).unwrap();
    let errors: Vec<f64> = [200, 400, 800, 1600]
        .iter()
        .map(|&k| flow.euler_field(t, k).unwrap().sup_distance(&exact))
        .collect();
    for w in errors.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order >= 0.95, "{errors:?}");
    }
}
