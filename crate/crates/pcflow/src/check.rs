//! The acceptance suite run by `pcflow check`.
//!
//! Each criterion returns a pass flag and a one-line detail with the measured
//! numbers. Criteria that need a full run execute catalog experiments below
//! `<out>/check/`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use num_complex::Complex64;
use pcflow_core::geomodels::{closed_form_gap, CurvatureCondition, ModelCPn, ModelSn};
use pcflow_core::kahlerlab::{complex_hessian, kahler_sigma2_residual, ComplexTorusGrid};
use pcflow_core::monitor::{max_decrease, max_increase, Monitor};
use pcflow_core::spherelab::{
    commutation_residual, covariant_derivative, covariant_hessian, curvature_term_gap, riemannian_sigma2_residual,
    sh_analyze, sh_synthesize, sphere_heat_propagate, sphere_initial_data, CovariantTensorField, CurvatureSign,
    SphereField, SphereGrid, SpherePreset,
};
use pcflow_core::symfun::{
    newton_transform, sigma_directional_derivative, sigma_vector, HermMatrix, SelfAdjoint, SymMatrix,
};
use pcflow_core::toruslab::{
    default_quotient_delta, heat_propagate, initial_data, laplacian, newton_gradient_contraction, quotient_residual,
    residual_sigma1, residual_sigma_k, spectral_derivative, ScalarField, TorusGrid, TorusPreset,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::catalog;
use crate::config::{ExperimentConfig, InitialConfig};
use crate::error::{PcflowError, Result};
use crate::run::{read_summary, run_experiment, RunReport};
use crate::sweep::sweep;

/// Random matrices per dimension in the algebra criteria.
const MATRICES_PER_DIM: usize = 1000;
const CURVATURE_SAMPLES: usize = 10_000;
const SHRINKING_SEEDS: u64 = 5;

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionOutcome {
    pub number: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CriterionOutcome {
    /// `PASS c05-flat-identities  <detail>`
    pub fn line(&self) -> String {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        format!("{tag} {}  {}", self.name, self.detail)
    }
}

type CheckFn = fn(&CheckContext) -> Result<(bool, String)>;

pub struct Criterion {
    pub number: u8,
    pub name: &'static str,
    run: CheckFn,
}

pub const CRITERIA: &[Criterion] = &[
    Criterion { number: 1, name: "c01-algebra", run: c01_algebra },
    Criterion { number: 2, name: "c02-derivative", run: c02_derivative },
    Criterion { number: 3, name: "c03-curvature-conditions", run: c03_curvature },
    Criterion { number: 4, name: "c04-torus-spectral", run: c04_torus_spectral },
    Criterion { number: 5, name: "c05-flat-identities", run: c05_flat_identities },
    Criterion { number: 6, name: "c06-maximum-principle", run: c06_maximum_principle },
    Criterion { number: 7, name: "c07-quotient", run: c07_quotient },
    Criterion { number: 8, name: "c08-sphere-calculus", run: c08_sphere_calculus },
    Criterion { number: 9, name: "c09-commutation", run: c09_commutation },
    Criterion { number: 10, name: "c10-sphere-sigma2", run: c10_sphere_sigma2 },
    Criterion { number: 11, name: "c11-kahler-flat", run: c11_kahler },
    Criterion { number: 12, name: "c12-shrinking-adjudication", run: c12_shrinking },
    Criterion { number: 13, name: "c13-determinism", run: c13_determinism },
];

type RunCell = Arc<OnceLock<std::result::Result<RunReport, String>>>;

/// Shared state of one check invocation.
pub struct CheckContext {
    pub out_root: PathBuf,
    pub seed: u64,
    runs: Mutex<HashMap<String, RunCell>>,
}

impl CheckContext {
    pub fn new(out_root: impl Into<PathBuf>, seed: u64) -> Self {
        Self {
            out_root: out_root.into(),
            seed,
            runs: Mutex::new(HashMap::new()),
        }
    }

    fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut r = ChaCha8Rng::seed_from_u64(self.seed);
        r.set_stream(stream);
        r
    }

    fn check_dir(&self) -> PathBuf {
        self.out_root.join("check")
    }

    /// Run a catalog experiment once per context, below `<out>/check/`.
    fn catalog_run(&self, id: &str) -> Result<RunReport> {
        let cell = self.runs.lock().unwrap().entry(id.to_string()).or_default().clone();
        let out = cell.get_or_init(|| {
            catalog::load(id)
                .and_then(|c| run_experiment(&c, &self.check_dir()))
                .map_err(|e| e.to_string())
        });
        out.clone().map_err(PcflowError::runtime)
    }
}

/// Names of the criteria matched by `filter` (a glob over names like `c05-flat-identities`).
pub fn select(filter: Option<&str>) -> Result<Vec<&'static Criterion>> {
    let pattern = filter
        .map(glob::Pattern::new)
        .transpose()
        .map_err(|e| PcflowError::config("filter", e))?;
    Ok(CRITERIA
        .iter()
        .filter(|c| pattern.as_ref().is_none_or(|p| p.matches(c.name)))
        .collect())
}

/// Run the selected criteria in parallel; results come back in criterion order.
pub fn run_check(ctx: &CheckContext, filter: Option<&str>) -> Result<Vec<CriterionOutcome>> {
    let selected = select(filter)?;
    Ok(selected
        .par_iter()
        .map(|c| {
            let (passed, detail) = match (c.run)(ctx) {
                Ok(v) => v,
                Err(e) => (false, format!("error: {e}")),
            };
            CriterionOutcome {
                number: c.number,
                name: c.name,
                passed,
                detail,
            }
        })
        .collect())
}

fn random_sym(rng: &mut impl Rng, n: usize, scale: f64) -> SymMatrix {
    SymMatrix::from_upper(n, |_, _| scale * rng.random_range(-1.0..1.0)).expect("valid dimension")
}

fn random_herm(rng: &mut impl Rng, m: usize, scale: f64) -> HermMatrix {
    HermMatrix::from_upper(m, |a, b| {
        let re = scale * rng.random_range(-1.0..1.0);
        let im = if a == b { 0.0 } else { scale * rng.random_range(-1.0..1.0) };
        Complex64::new(re, im)
    })
    .expect("valid dimension")
}

/// Scales spread over two decades so the relative tolerances are exercised.
fn random_scale(rng: &mut impl Rng) -> f64 {
    10f64.powf(rng.random_range(-1.0..1.0))
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, v| a.max(v.abs()))
}

fn c01_algebra(ctx: &CheckContext) -> Result<(bool, String)> {
    let mut rng = ctx.rng(1);
    let (mut ch, mut euler, mut trace, mut frob) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for n in 2..=6 {
        for _ in 0..MATRICES_PER_DIM {
            let scale = random_scale(&mut rng);
            let a = random_sym(&mut rng, n, scale);
            let norm = a.frobenius_sq().sqrt();
            let sig = sigma_vector(&a);
            let tn = newton_transform(&a, n)?;
            ch = ch.max(max_abs(tn.dense()) / (1.0 + norm.powi(n as i32)));
            for k in 1..=n {
                let size = (1.0 + norm).powi(k as i32);
                let t_prev = newton_transform(&a, k - 1)?;
                let lhs = (t_prev.dense() * a.dense()).trace();
                euler = euler.max((lhs - k as f64 * sig.sigma(k)).abs() / size);
                let tk = newton_transform(&a, k)?;
                trace = trace.max((tk.dense().trace() - (n - k) as f64 * sig.sigma(k)).abs() / size);
            }
            let (s1, s2) = (sig.sigma(1), sig.sigma(2));
            let f = a.frobenius_sq();
            frob = frob.max((s1 * s1 - 2.0 * s2 - f).abs() / f.max(1.0));
        }
    }
    let passed = ch <= 1e-9 && euler <= 1e-10 && trace <= 1e-10 && frob <= 1e-12;
    Ok((
        passed,
        format!(
            "Cayley-Hamilton {ch:.1e} (1e-9), Euler {euler:.1e} (1e-10), trace {trace:.1e} (1e-10), Frobenius {frob:.1e} (1e-12)"
        ),
    ))
}

fn c02_derivative(ctx: &CheckContext) -> Result<(bool, String)> {
    let mut rng = ctx.rng(2);
    let h = 1e-5;
    let mut worst = 0.0f64;
    for _ in 0..MATRICES_PER_DIM {
        let n = rng.random_range(2..=6);
        let k = rng.random_range(1..=n);
        let a = random_sym(&mut rng, n, 1.0);
        let b = random_sym(&mut rng, n, 1.0);
        let d = sigma_directional_derivative(&a, &b, k)?;
        let plus = sigma_vector(&SymMatrix::from_dense_projected(a.dense() + b.dense() * h)).sigma(k);
        let minus = sigma_vector(&SymMatrix::from_dense_projected(a.dense() - b.dense() * h)).sigma(k);
        let fd = (plus - minus) / (2.0 * h);
        worst = worst.max((d - fd).abs() / d.abs().max(1.0));
    }
    Ok((worst < 1e-6, format!("max relative error {worst:.1e} over {MATRICES_PER_DIM} triples (1e-6)")))
}

fn c03_curvature(ctx: &CheckContext) -> Result<(bool, String)> {
    let mut rng = ctx.rng(3);
    let (mut gap_s, mut neg_s, mut gap_c, mut neg_c) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for i in 0..CURVATURE_SAMPLES {
        let n = 2 + i % 5;
        let space = ModelSn::new(n, random_scale(&mut rng))?;
        let scale = random_scale(&mut rng);
        let a = random_sym(&mut rng, n, scale);
        let size = 1.0 + a.frobenius_sq();
        gap_s = gap_s.max(closed_form_gap(&a, &space)? / size);
        neg_s = neg_s.max(-space.brute_force(&a)? / size);

        let m = 2 + i % 3;
        let cp = ModelCPn::new(m, random_scale(&mut rng))?;
        let scale = random_scale(&mut rng);
        let h = random_herm(&mut rng, m, scale);
        let size = 1.0 + h.frobenius_sq();
        gap_c = gap_c.max(closed_form_gap(&h, &cp)? / size);
        neg_c = neg_c.max(-cp.brute_force(&h)? / size);
    }
    let passed = gap_s <= 1e-12 && gap_c <= 1e-12 && neg_s <= 1e-12 && neg_c <= 1e-12;
    Ok((
        passed,
        format!(
            "S^n gap {gap_s:.1e}, min {:.1e}; CP^n gap {gap_c:.1e}, min {:.1e} (relative, 1e-12)",
            -neg_s, -neg_c
        ),
    ))
}

fn c04_torus_spectral(ctx: &CheckContext) -> Result<(bool, String)> {
    let l = 3.0;
    let g = TorusGrid::new(2, 32, vec![l, l])?;
    let f = ScalarField::from_fn(&g, |x| (2.0 * PI * x[0] / l).sin())?;
    let rate = (2.0 * PI / l).powi(2);
    let mut decay = 0.0f64;
    for t in [0.01, 0.1, 1.0] {
        let exact = f.map(|v| v * (-rate * t).exp());
        decay = decay.max(heat_propagate(&f, t)?.sup_distance(&exact) / exact.sup_norm());
    }
    let r = initial_data(&TorusPreset::RandomBandlimited { seed: ctx.seed, band: 8 }, &g)?;
    let (t1, t2) = (0.03, 0.07);
    let semigroup = heat_propagate(&heat_propagate(&r, t1)?, t2)?.sup_distance(&heat_propagate(&r, t1 + t2)?);
    Ok((
        decay < 1e-10 && semigroup < 1e-12,
        format!("mode decay rel {decay:.1e} (1e-10), semigroup {semigroup:.1e} (1e-12)"),
    ))
}

fn c05_flat_identities(ctx: &CheckContext) -> Result<(bool, String)> {
    let g64 = TorusGrid::periodic_box(2, 64)?;
    let f2 = initial_data(&TorusPreset::RandomBandlimited { seed: ctx.seed, band: 16 }, &g64)?;
    let r1 = residual_sigma1(&f2)?.sup();
    let r2 = residual_sigma_k(&f2, 2)?.sup();
    let g32 = TorusGrid::periodic_box(3, 32)?;
    let f3 = initial_data(&TorusPreset::RandomBandlimited { seed: ctx.seed, band: 8 }, &g32)?;
    let r3 = residual_sigma_k(&f3, 3)?.sup();

    // |∇σ_1|² − Σ u_ijk² from plain spectral derivatives
    let contraction = newton_gradient_contraction(&f2, 2)?;
    let s1 = laplacian(&f2);
    let mut closed = vec![0.0; g64.len()];
    for i in 0..2 {
        let d = spectral_derivative(&s1, &[i])?;
        for (c, v) in closed.iter_mut().zip(d.samples()) {
            *c += v * v;
        }
        for j in 0..2 {
            for k in 0..2 {
                let d = spectral_derivative(&f2, &[i, j, k])?;
                for (c, v) in closed.iter_mut().zip(d.samples()) {
                    *c -= v * v;
                }
            }
        }
    }
    let gap = contraction
        .samples()
        .iter()
        .zip(&closed)
        .fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
    let passed = r1 < 1e-9 && r2 < 1e-8 && r3 < 1e-7 && gap < 1e-8;
    Ok((
        passed,
        format!(
            "sigma1 {r1:.1e} (1e-9), sigma2 n=2 N=64 {r2:.1e} (1e-8), sigma3 n=3 N=32 {r3:.1e} (1e-7), contraction gap {gap:.1e} (1e-8)"
        ),
    ))
}

const MONOTONE_SLACK: f64 = 1e-10;

fn monotone(report: &RunReport) -> (usize, f64, f64) {
    let s = &report.series;
    (
        s.len(),
        max_decrease(&s.column(Monitor::MinSigma1)),
        max_increase(&s.column(Monitor::MaxSigma1)),
    )
}

fn c06_maximum_principle(ctx: &CheckContext) -> Result<(bool, String)> {
    let mut passed = true;
    let mut parts = Vec::new();
    for id in ["torus-random", "sphere-random"] {
        let (rows, dec, inc) = monotone(&ctx.catalog_run(id)?);
        passed &= rows >= 100 && dec <= MONOTONE_SLACK && inc <= MONOTONE_SLACK;
        parts.push(format!("{id}: {rows} steps, min drop {dec:.1e}, max rise {inc:.1e}"));
    }
    Ok((passed, format!("{} (slack 1e-10)", parts.join("; "))))
}

/// `(absolute gap, gap / (1 + sup|G|), masked nodes)` of one quotient evaluation.
fn quotient_gaps(f: &ScalarField, delta: f64) -> Result<(f64, f64, usize)> {
    Ok(match quotient_residual(f, delta)?.evaluated() {
        Some(q) => (q.reduced_gap, q.reduced_gap / (1.0 + q.g.sup()), q.g.active_count()),
        None => (0.0, 0.0, 0),
    })
}

fn c07_quotient(ctx: &CheckContext) -> Result<(bool, String)> {
    let g32 = TorusGrid::periodic_box(2, 32)?;
    let cosines = ScalarField::from_fn(&g32, |x| -x[0].cos() - x[1].cos())?;
    let (cos_gap, _, cos_nodes) = quotient_gaps(&cosines, 0.5)?;

    let box64 = TorusGrid::new(2, 64, vec![20.0, 20.0])?;
    let bump = initial_data(&TorusPreset::GaussianBump { width: 1.5, amplitude: -1.0 }, &box64)?;
    let (bump_gap, _, bump_nodes) = quotient_gaps(&bump, default_quotient_delta(&bump)?)?;

    let report = ctx.catalog_run("torus-random")?;
    let config = catalog::load("torus-random")?;
    let g = TorusGrid::periodic_box(2, config.resolution)?;
    let InitialConfig::Torus(preset) = &config.initial else {
        return Err(PcflowError::runtime("expected a torus preset"));
    };
    let f0 = initial_data(preset, &g)?;
    let (mut rand_abs, mut rand_rel, mut rand_nodes) = (0.0f64, 0.0f64, 0);
    for t in [0.0, 0.05, 0.1] {
        let f = heat_propagate(&f0, t)?;
        let (a, r, n) = quotient_gaps(&f, default_quotient_delta(&f)?)?;
        rand_abs = rand_abs.max(a);
        rand_rel = rand_rel.max(r);
        rand_nodes += n;
    }
    let min_g = report
        .summary
        .monitors
        .get(Monitor::QuotientMin.column())
        .and_then(|e| e.min);
    let passed = cos_gap < 1e-8
        && bump_gap < 1e-8
        && rand_rel < 1e-8
        && cos_nodes > 0
        && bump_nodes > 0
        && rand_nodes > 0
        && min_g.is_some();
    Ok((
        passed,
        format!(
            "gap cosines {cos_gap:.1e}, bump {bump_gap:.1e} (1e-8); random {rand_rel:.1e} relative to 1+sup|G| (1e-8), {rand_abs:.1e} absolute; torus-random min G = {}",
            min_g.map_or("none".into(), |v| format!("{v:.4e}"))
        ),
    ))
}

fn sphere(lmax: usize) -> Result<Arc<SphereGrid>> {
    Ok(Arc::new(SphereGrid::new(lmax, 1.0)?))
}

fn c08_sphere_calculus(ctx: &CheckContext) -> Result<(bool, String)> {
    let g = sphere(32)?;
    let u = SphereField::from_fn(&g, |t, _| t.cos())?;
    let hess = covariant_hessian(&u)?;
    let mut hess_err = 0.0f64;
    for p in 0..g.len() {
        let c = g.cos_theta()[p / g.n_phi()];
        for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let exact = if i == j { -c } else { 0.0 };
            hess_err = hess_err.max((hess.frame_component(&[i, j], p) - exact).abs());
        }
    }

    let mut decay = 0.0f64;
    for (l, m) in [(1, 0), (2, 1), (3, 2), (4, 4)] {
        let y = sphere_initial_data(&SpherePreset::Harmonic { l, m, amplitude: 1.0 }, &g)?;
        let t = 0.1;
        let lam = (l * (l + 1)) as f64;
        let evolved = sh_synthesize(&sphere_heat_propagate(&sh_analyze(&y), t, 1.0)?, &g);
        let exact = y.map(|v| v * (-lam * t).exp());
        decay = decay.max(evolved.sup_distance(&exact) / exact.sup_norm());
    }

    let r = sphere_initial_data(&SpherePreset::RandomBandlimited { seed: ctx.seed, band: 8 }, &g)?;
    let round_trip = sh_synthesize(&sh_analyze(&r), &g).sup_distance(&r);
    let metric = covariant_derivative(&CovariantTensorField::metric(&g))?.sup_norm();
    let passed = hess_err < 1e-8 && decay < 1e-8 && round_trip < 1e-10 && metric < 1e-9;
    Ok((
        passed,
        format!(
            "Hess cos θ {hess_err:.1e} (1e-8), Y_lm decay rel {decay:.1e} (1e-8), round trip {round_trip:.1e} (1e-10), ∇g {metric:.1e} (1e-9)"
        ),
    ))
}

fn c09_commutation(_ctx: &CheckContext) -> Result<(bool, String)> {
    let config = catalog::load("sphere-commutation")?;
    let preset = sphere_preset(&config)?;
    let u = sphere_initial_data(&preset, &sphere(32)?)?;
    let good = commutation_residual(&u, CurvatureSign::Correct)?.residual.sup();
    let bad = commutation_residual(&u, CurvatureSign::Flipped)?.residual.sup();
    let ratio = bad / good.max(f64::MIN_POSITIVE);

    let resolutions = [16, 32, 48];
    let report = sweep(&config, &resolutions)?;
    let comm = report
        .residual("res_commutation")
        .ok_or_else(|| PcflowError::runtime("sweep lacks the commutation residual"))?;
    let flipped = sweep(&catalog::load("sphere-flipped")?, &resolutions)?;
    let control_flagged = flipped.residual("res_commutation").is_some_and(|r| r.non_decaying);
    let passed = good < 1e-7 && ratio >= 1e3 && !comm.non_decaying && control_flagged;
    Ok((
        passed,
        format!(
            "L=32 residual {good:.1e} (1e-7), flipped/correct {ratio:.1e} (>=1e3), sups over L=16,32,48 {:?}, flipped control flagged: {control_flagged}",
            comm.sups.iter().map(|s| format!("{s:.1e}")).collect::<Vec<_>>()
        ),
    ))
}

fn sphere_preset(config: &ExperimentConfig) -> Result<SpherePreset> {
    match &config.initial {
        InitialConfig::Sphere(p) => Ok(p.clone()),
        InitialConfig::Torus(_) => Err(PcflowError::runtime("expected a sphere preset")),
    }
}

fn c10_sphere_sigma2(ctx: &CheckContext) -> Result<(bool, String)> {
    let g = sphere(48)?;
    let u = sphere_initial_data(&SpherePreset::RandomBandlimited { seed: ctx.seed, band: 8 }, &g)?;
    let res = riemannian_sigma2_residual(&u)?;
    let r = res.residual.sup();
    let gap = curvature_term_gap(&u)?;
    Ok((
        r < 1e-6 && gap < 1e-9 && !res.overflow,
        format!("residual {r:.1e} at L=48, degree 8 (1e-6); curvature term gap {gap:.1e} (1e-9)"),
    ))
}

fn c11_kahler(ctx: &CheckContext) -> Result<(bool, String)> {
    let g = ComplexTorusGrid::periodic_box(2, 32)?;
    let f = initial_data(&TorusPreset::RandomBandlimited { seed: ctx.seed, band: 8 }, g.torus())?;
    let (tr, imag) = complex_hessian(&f)?.trace();
    let trace_gap = tr.sup_distance(&laplacian(&f).map(|v| 0.25 * v)).max(imag);
    let res = kahler_sigma2_residual(&f)?.sup();

    // depends on (x_1, y_1) only, so the complex Hessian has rank one
    let small = ComplexTorusGrid::periodic_box(2, 16)?;
    let rank1 = ScalarField::from_fn(small.torus(), |x| (x[0] + 2.0 * x[1]).sin() - (2.0 * x[0]).cos() * x[1].sin())?;
    let (s2, _) = complex_hessian(&rank1)?.sigma(2)?;
    let rank1_sup = s2.sup_norm();
    Ok((
        trace_gap < 1e-10 && res < 1e-8 && rank1_sup < 1e-10,
        format!(
            "trace vs Δ/4 {trace_gap:.1e} (1e-10), sigma2 residual m=2 N=32 {res:.1e} (1e-8), rank-1 sigma2 {rank1_sup:.1e}"
        ),
    ))
}

fn c12_shrinking(ctx: &CheckContext) -> Result<(bool, String)> {
    let base = catalog::load("shrinking-random")?;
    let dir = ctx.check_dir();
    let verdicts = (0..SHRINKING_SEEDS)
        .into_par_iter()
        .map(|seed| {
            let mut c = base.clone().with_seed(seed);
            c.output_dir = Some(PathBuf::from(format!("shrinking-random-seed{seed}")));
            c.snapshots = false;
            let report = run_experiment(&c, &dir)?;
            let summary = read_summary(&report.dir.join("summary.json"))?;
            let verdict = summary.verdicts.get("trace_evolution").cloned().unwrap_or_default();
            let decisive = summary.verdicts.get("trace_evolution_decisive").map(String::as_str) == Some("true");
            Ok((verdict, decisive))
        })
        .collect::<Result<Vec<_>>>()?;
    let first = &verdicts[0].0;
    let identical = verdicts.iter().all(|(v, _)| v == first);
    let decisive = verdicts.iter().all(|(_, d)| *d);
    let settled = first != "mixed" && !first.is_empty();
    Ok((
        identical && decisive && settled,
        format!("{SHRINKING_SEEDS} seeds, verdict {first}, identical {identical}, every step decisive {decisive}"),
    ))
}

fn c13_determinism(ctx: &CheckContext) -> Result<(bool, String)> {
    let dir = ctx.check_dir().join("determinism");
    let mut same = true;
    for id in ["torus-random", "sphere-cos-theta", "shrinking-random"] {
        let config = catalog::load(id)?;
        let bytes = |tag: &str| -> Result<Vec<u8>> {
            let report = run_experiment(&config, &dir.join(tag))?;
            Ok(std::fs::read(report.dir.join("monitors.csv"))?)
        };
        same &= bytes("a")? == bytes("b")?;
    }
    Ok((same, format!("repeated runs bit-identical: {same}")))
}

/// Print one line per criterion and fail if any did not pass.
pub fn report(outcomes: &[CriterionOutcome]) -> Result<()> {
    for o in outcomes {
        println!("{}", o.line());
    }
    let failed: Vec<_> = outcomes.iter().filter(|o| !o.passed).map(|o| o.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(PcflowError::Acceptance(format!("failed: {}", failed.join(", "))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn filter_selects_by_glob() {
        assert_eq!(select(None).unwrap().len(), CRITERIA.len());
        let s = select(Some("c0[12]-*")).unwrap();
        assert_eq!(s.iter().map(|c| c.number).collect::<Vec<_>>(), vec![1, 2]);
        assert!(select(Some("[")).is_err());
        assert!(select(Some("zzz")).unwrap().is_empty());
    }

    #[test]
    fn criteria_numbered_in_order() {
        for (i, c) in CRITERIA.iter().enumerate() {
            assert_eq!(c.number as usize, i + 1);
            assert!(c.name.starts_with(&format!("c{:02}-", i + 1)));
        }
    }
}
