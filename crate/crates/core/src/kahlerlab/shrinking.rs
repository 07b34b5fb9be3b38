//! Kähler–Ricci flow on the round sphere, where it is uniform conformal
//! shrinking `g(t) = s(t) g_0`, `s(t) = 1 − c t/r_0²`, with `c = 2` for the
//! real normalization `∂_t g = −2 Ric` and `c = 1` for the complex one.
//!
//! The heat equation `u_t = Δ_{g(t)} u = s⁻¹Δ_0 u` is solved exactly in the
//! conformal time `τ(t) = −(r_0²/c) log s(t)`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geomodels::RiemannTensor;
use crate::monitor::{drive, FlowAbort, FlowModel, Monitor, MonitorRow, MonitorSeries};
use crate::spherelab::grid::SphereGrid;
use crate::spherelab::tensor::{hessian_in_band, BAND_TOL};
use crate::spherelab::transform::laplacian_in_band;
use crate::spherelab::{sh_analyze, sh_synthesize, sphere_heat_propagate, SphereField, SphericalSpectrum};

/// Time scale of the real normalization.
pub const DEFAULT_TIME_SCALE: f64 = 2.0;

/// A residual counts as zero below this.
pub const ZERO_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct ShrinkingSphereFlow {
    grid: Arc<SphereGrid>,
    time_scale: f64,
    band: usize,
    initial: SphericalSpectrum,
}

impl ShrinkingSphereFlow {
    /// The grid radius is `r_0`.
    pub fn new(u0: &SphereField, time_scale: f64) -> Result<Self> {
        if !(time_scale > 0.0 && time_scale.is_finite()) {
            return Err(Error::InvalidArgument(format!("time scale must be positive, got {time_scale}")));
        }
        let initial = sh_analyze(u0);
        Ok(Self {
            grid: u0.grid().clone(),
            time_scale,
            band: initial.degree(BAND_TOL),
            initial,
        })
    }

    pub fn grid(&self) -> &Arc<SphereGrid> {
        &self.grid
    }

    pub fn time_scale(&self) -> f64 {
        self.time_scale
    }

    fn r0_sq(&self) -> f64 {
        self.grid.radius().powi(2)
    }

    pub fn scale(&self, t: f64) -> f64 {
        1.0 - self.time_scale * t / self.r0_sq()
    }

    /// Runs must stay below the time at which the sphere has halved its area.
    pub fn horizon(&self) -> f64 {
        self.r0_sq() / (2.0 * self.time_scale)
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if !(t >= 0.0) {
            return Err(Error::InvalidArgument(format!("time must be >= 0, got {t}")));
        }
        if t >= self.horizon() {
            return Err(Error::Horizon {
                t,
                horizon: self.horizon(),
            });
        }
        Ok(())
    }

    pub fn conformal_time(&self, t: f64) -> f64 {
        -(self.r0_sq() / self.time_scale) * self.scale(t).ln()
    }

    pub fn spectrum_at(&self, t: f64) -> Result<SphericalSpectrum> {
        self.check_time(t)?;
        sphere_heat_propagate(&self.initial, self.conformal_time(t), self.grid.radius())
    }

    pub fn field_at(&self, t: f64) -> Result<SphereField> {
        Ok(sh_synthesize(&self.spectrum_at(t)?, &self.grid))
    }

    /// Explicit Euler for `u_t = s(t)⁻¹Δ_0 u`, applied to each coefficient.
    pub fn euler_field(&self, t: f64, steps: usize) -> Result<SphereField> {
        self.check_time(t)?;
        if steps == 0 {
            return Err(Error::InvalidArgument("Euler needs at least one step".into()));
        }
        let h = t / steps as f64;
        let r0_sq = self.r0_sq();
        let mut spec = self.initial.clone();
        for k in 0..steps {
            let s = self.scale(k as f64 * h);
            spec = spec.map_degree(|l| 1.0 - h * (l * (l + 1)) as f64 / (r0_sq * s));
        }
        Ok(sh_synthesize(&spec, &self.grid))
    }

    /// `σ_1 = tr_{g(t)} Hess u = s⁻¹ tr_{g_0} Hess u` and the `g_0`-frame
    /// Hessian it came from.
    fn sigma1(&self, u: &SphereField, s: f64) -> Result<(Vec<f64>, crate::spherelab::CovariantTensorField)> {
        let hess = hessian_in_band(u, self.band)?;
        let values = hess.trace()?.values().iter().map(|v| v / s).collect();
        Ok((values, hess))
    }

    /// One adjudication sample at time `t`.
    pub fn adjudicate_at(&self, t: f64) -> Result<AdjudicationStep> {
        let spec = self.spectrum_at(t)?;
        let u = sh_synthesize(&spec, &self.grid);
        let s = self.scale(t);
        let r0_sq = self.r0_sq();
        let c = self.time_scale;
        let (sigma1, hess) = self.sigma1(&u, s)?;

        // ∂_t of Σ a_lm (−λ) e^{−λτ(t)} / s(t) Y_lm, with τ' = 1/s
        let dt_spec = spec.map_degree(|l| {
            let lambda = (l * (l + 1)) as f64 / r0_sq;
            -lambda * (c / r0_sq - lambda) / (s * s)
        });
        let dt_sigma1 = sh_synthesize(&dt_spec, &self.grid);
        let sigma1_field = SphereField::from_raw(self.grid.clone(), sigma1.clone());
        let lap_sigma1 = laplacian_in_band(&sigma1_field, self.band);

        // Ric(t) = κ(t) g(t) with κ(t) = 1/(s r_0²); frame components of Hess
        // in g(t) are those in g_0 divided by s
        let ricci = RiemannTensor::constant_curvature(2, 1.0 / (s * r0_sq)).ricci();
        let mut sup_r0: f64 = 0.0;
        let mut sup_r1: f64 = 0.0;
        for p in 0..self.grid.len() {
            let r0 = dt_sigma1.values()[p] - lap_sigma1.values()[p] / s;
            let a = hess.frame_matrix(p)? / s;
            let contraction: f64 = ricci.component_mul(&a).sum();
            sup_r0 = sup_r0.max(r0.abs());
            sup_r1 = sup_r1.max((r0 - c * contraction).abs());
        }
        let sigma1_sup = sigma1.iter().fold(0.0, |a: f64, v| a.max(v.abs()));
        Ok(AdjudicationStep {
            t,
            sup_r0,
            sup_r1,
            sigma1_sup,
            verdict: Verdict::classify(sup_r0, sup_r1),
        })
    }
}

impl FlowModel for ShrinkingSphereFlow {
    /// Extremes of the metric-trace `σ_1` and of `σ_2`; the residual columns
    /// are left to the adjudication report.
    fn sample(&self, t: f64, monitors: &[Monitor]) -> Result<MonitorRow> {
        let u = self.field_at(t)?;
        let s = self.scale(t);
        let (sigma1, hess) = self.sigma1(&u, s)?;
        let mut row = MonitorRow::new(t);
        let (lo, hi) = crate::fields::min_max(&sigma1);
        if monitors.contains(&Monitor::MinSigma1) {
            row.set(Monitor::MinSigma1, lo);
        }
        if monitors.contains(&Monitor::MaxSigma1) {
            row.set(Monitor::MaxSigma1, hi);
        }
        if monitors.contains(&Monitor::MinSigma2) {
            let min = (0..self.grid.len())
                .map(|p| Ok(hess.frame_matrix(p)?.determinant() / (s * s)))
                .collect::<Result<Vec<f64>>>()?
                .into_iter()
                .fold(f64::INFINITY, f64::min);
            row.set(Monitor::MinSigma2, min);
        }
        Ok(row)
    }
}

/// Which candidate residual is at spectral-accuracy zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    R0Zero,
    R1Zero,
    Neither,
    Both,
}

impl Verdict {
    pub fn classify(sup_r0: f64, sup_r1: f64) -> Self {
        match (sup_r0 < ZERO_TOL, sup_r1 < ZERO_TOL) {
            (true, true) => Verdict::Both,
            (true, false) => Verdict::R0Zero,
            (false, true) => Verdict::R1Zero,
            (false, false) => Verdict::Neither,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::R0Zero => "r0_zero",
            Verdict::R1Zero => "r1_zero",
            Verdict::Neither => "neither",
            Verdict::Both => "both",
        }
    }
}

/// `r_0 = (∂_t − Δ_{g(t)})σ_1` and `r_1 = r_0 − C`, `C = c Ric^{ij} u_ij`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjudicationStep {
    pub t: f64,
    pub sup_r0: f64,
    pub sup_r1: f64,
    pub sigma1_sup: f64,
    pub verdict: Verdict,
}

impl AdjudicationStep {
    /// One residual is zero and the other exceeds `1e−2 ‖σ_1‖_∞`.
    pub fn is_decisive(&self) -> bool {
        let big = 1e-2 * self.sigma1_sup;
        match self.verdict {
            Verdict::R0Zero => self.sup_r1 > big,
            Verdict::R1Zero => self.sup_r0 > big,
            Verdict::Neither | Verdict::Both => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjudicationReport {
    pub time_scale: f64,
    pub zero_tol: f64,
    pub steps: Vec<AdjudicationStep>,
}

impl AdjudicationReport {
    /// The verdict shared by every step, if there is one.
    pub fn verdict(&self) -> Option<Verdict> {
        let first = self.steps.first()?.verdict;
        self.steps.iter().all(|s| s.verdict == first).then_some(first)
    }

    pub fn all_decisive(&self) -> bool {
        self.steps.iter().all(AdjudicationStep::is_decisive)
    }
}

/// Adjudicate at `t = dt, 2dt, …, steps·dt`.
pub fn shrinking_sigma1_adjudication(
    u0: &SphereField,
    dt: f64,
    steps: usize,
    time_scale: f64,
) -> Result<AdjudicationReport> {
    let flow = ShrinkingSphereFlow::new(u0, time_scale)?;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    flow.check_time(dt * steps as f64)?;
    let steps = (1..=steps)
        .map(|k| flow.adjudicate_at(dt * k as f64))
        .collect::<Result<Vec<_>>>()?;
    Ok(AdjudicationReport {
        time_scale,
        zero_tol: ZERO_TOL,
        steps,
    })
}

pub fn shrinking_run_flow(
    u0: &SphereField,
    time_scale: f64,
    dt: f64,
    steps: usize,
    monitors: &[Monitor],
) -> std::result::Result<MonitorSeries, FlowAbort> {
    let flow = match ShrinkingSphereFlow::new(u0, time_scale) {
        Ok(f) => f,
        Err(error) => {
            return Err(FlowAbort {
                partial: MonitorSeries::new(monitors.to_vec()),
                step: 0,
                error,
            })
        }
    };
    drive(&flow, dt, steps, monitors)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(l: usize) -> Arc<SphereGrid> {
        Arc::new(SphereGrid::new(l, 1.0).unwrap())
    }

    #[test]
    fn constant_data_is_zero_for_both() {
        let g = unit(8);
        let r = shrinking_sigma1_adjudication(&SphereField::constant(&g, 1.0), 0.01, 3, 2.0).unwrap();
        for s in &r.steps {
            assert!(s.sup_r0 < 1e-12 && s.sup_r1 < 1e-12);
        }
        assert_eq!(r.verdict(), Some(Verdict::Both));
    }

    #[test]
    fn horizon_enforced() {
        let g = unit(8);
        let u = SphereField::constant(&g, 1.0);
        let err = shrinking_sigma1_adjudication(&u, 0.05, 5, 2.0).unwrap_err();
        assert!(matches!(err, Error::Horizon { .. }));
        assert!(shrinking_sigma1_adjudication(&u, 0.05, 5, 1.0).is_ok());
    }

    #[test]
    fn conformal_time_solves_the_scaled_heat_equation() {
        let g = unit(8);
        let u = SphereField::from_fn(&g, |t, _| t.cos()).unwrap();
        let flow = ShrinkingSphereFlow::new(&u, 2.0).unwrap();
        let t = 0.1;
        // e^{−2τ} = 1 − 2t
        let exact = 1.0 - 2.0 * t;
        let got = flow.field_at(t).unwrap();
        assert!(got.sup_distance(&u.map(|v| v * exact)) < 1e-14);
    }
}
