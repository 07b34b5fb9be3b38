use std::sync::Arc;

use super::grid::SphereGrid;
use super::identities::{riemannian_sigma2_residual, sphere_sigma1_residual, sphere_sigma_fields};
use super::transform::{sh_analyze, sh_synthesize, sphere_heat_propagate, SphereField, SphericalSpectrum};
use crate::error::Result;
use crate::monitor::{drive, FlowAbort, FlowModel, Monitor, MonitorRow, MonitorSeries};

/// Heat flow on a fixed round sphere, propagated from `t = 0` by the exact
/// spectral multiplier. `min_H` and `quotient_min` are not defined here and
/// stay empty.
#[derive(Debug, Clone)]
pub struct SphereFlow {
    grid: Arc<SphereGrid>,
    initial: SphericalSpectrum,
}

impl SphereFlow {
    pub fn new(u0: &SphereField) -> Self {
        Self {
            grid: u0.grid().clone(),
            initial: sh_analyze(u0),
        }
    }

    pub fn field_at(&self, t: f64) -> Result<SphereField> {
        let spec = sphere_heat_propagate(&self.initial, t, self.grid.radius())?;
        Ok(sh_synthesize(&spec, &self.grid))
    }
}

impl FlowModel for SphereFlow {
    fn sample(&self, t: f64, monitors: &[Monitor]) -> Result<MonitorRow> {
        let u = self.field_at(t)?;
        let wants = |m: Monitor| monitors.contains(&m);
        let mut row = MonitorRow::new(t);
        if wants(Monitor::MinSigma1) || wants(Monitor::MaxSigma1) || wants(Monitor::MinSigma2) {
            let (s1, s2) = sphere_sigma_fields(&u)?;
            let (lo, hi) = s1.min_max();
            if wants(Monitor::MinSigma1) {
                row.set(Monitor::MinSigma1, lo);
            }
            if wants(Monitor::MaxSigma1) {
                row.set(Monitor::MaxSigma1, hi);
            }
            if wants(Monitor::MinSigma2) {
                row.set(Monitor::MinSigma2, s2.min_max().0);
            }
        }
        if wants(Monitor::ResSigma1Sup) {
            row.set(Monitor::ResSigma1Sup, sphere_sigma1_residual(&u)?.sup());
        }
        if wants(Monitor::ResSigma2Sup) {
            row.set(Monitor::ResSigma2Sup, riemannian_sigma2_residual(&u)?.residual.sup());
        }
        Ok(row)
    }
}

pub fn sphere_run_flow(
    u0: &SphereField,
    dt: f64,
    steps: usize,
    monitors: &[Monitor],
) -> std::result::Result<MonitorSeries, FlowAbort> {
    drive(&SphereFlow::new(u0), dt, steps, monitors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monitor::max_decrease;

    #[test]
    fn cos_theta_minimum_is_analytic() {
        let g = Arc::new(SphereGrid::new(16, 1.0).unwrap());
        let u = SphereField::from_fn(&g, |t, _| t.cos()).unwrap();
        let s = sphere_run_flow(&u, 0.05, 10, &[Monitor::MinSigma1]).unwrap();
        let c0 = g.cos_theta()[0];
        for row in s.rows() {
            let exact = -2.0 * c0 * (-2.0 * row.t).exp();
            assert!((row.get(Monitor::MinSigma1).unwrap() - exact).abs() < 1e-12);
        }
        assert_eq!(max_decrease(&s.column(Monitor::MinSigma1)), 0.0);
    }

    #[test]
    fn constant_gives_zero_monitors() {
        let g = Arc::new(SphereGrid::new(8, 1.0).unwrap());
        let s = sphere_run_flow(&SphereField::constant(&g, 3.0), 0.1, 2, &Monitor::ALL).unwrap();
        for row in s.rows() {
            assert!(row.get(Monitor::MinSigma1).unwrap().abs() < 1e-13);
            assert!(row.get(Monitor::MinSigma2).unwrap().abs() < 1e-13);
            assert_eq!(row.get(Monitor::MinH), None);
        }
    }
}
