use super::grid::ScalarField;
use super::hessian::sigma_field;
use super::identities::{quotient_residual, residual_sigma1, residual_sigma_k, QuotientOutcome};
use super::spectral::Spectrum;
use crate::error::Result;
use crate::monitor::{drive, FlowAbort, FlowModel, Monitor, MonitorRow, MonitorSeries};

/// Heat flow on the torus from fixed initial data. Every sample is propagated
/// from `t = 0` by the exact Fourier multiplier.
#[derive(Debug, Clone)]
pub struct TorusFlow {
    initial: Spectrum,
    /// Mask threshold for the quotient monitors; `None` uses `1e−3 · max σ_1`
    /// at each sampled time.
    pub quotient_delta: Option<f64>,
}

impl TorusFlow {
    pub fn new(f0: &ScalarField) -> Self {
        Self {
            initial: f0.spectrum(),
            quotient_delta: None,
        }
    }

    pub fn field_at(&self, t: f64) -> Result<ScalarField> {
        Ok(self.initial.propagate(t)?.to_field())
    }
}

impl FlowModel for TorusFlow {
    fn sample(&self, t: f64, monitors: &[Monitor]) -> Result<MonitorRow> {
        let u = self.field_at(t)?;
        let mut row = MonitorRow::new(t);
        let wants = |m: Monitor| monitors.contains(&m);
        let mut max_sigma1 = None;
        if wants(Monitor::MinSigma1) || wants(Monitor::MaxSigma1) || wants(Monitor::MinH) || wants(Monitor::QuotientMin) {
            let (lo, hi) = sigma_field(&u, 1)?.min_max();
            max_sigma1 = Some(hi);
            if wants(Monitor::MinSigma1) {
                row.set(Monitor::MinSigma1, lo);
            }
            if wants(Monitor::MaxSigma1) {
                row.set(Monitor::MaxSigma1, hi);
            }
        }
        if wants(Monitor::MinSigma2) {
            row.set(Monitor::MinSigma2, sigma_field(&u, 2)?.min_max().0);
        }
        if wants(Monitor::ResSigma1Sup) {
            row.set(Monitor::ResSigma1Sup, residual_sigma1(&u)?.sup());
        }
        if wants(Monitor::ResSigma2Sup) {
            row.set(Monitor::ResSigma2Sup, residual_sigma_k(&u, 2)?.sup());
        }
        if wants(Monitor::MinH) || wants(Monitor::QuotientMin) {
            let delta = self
                .quotient_delta
                .unwrap_or_else(|| 1e-3 * max_sigma1.unwrap_or(0.0));
            // a flat field has no mask; leave the columns empty
            if delta > 0.0 {
                if let QuotientOutcome::Evaluated(q) = quotient_residual(&u, delta)? {
                    if wants(Monitor::MinH) {
                        if let Some(h) = q.fields.min_h() {
                            row.set(Monitor::MinH, h);
                        }
                    }
                    if wants(Monitor::QuotientMin) {
                        row.set(Monitor::QuotientMin, q.min_g);
                    }
                }
            }
        }
        Ok(row)
    }
}

/// Record the monitors at `t = dt, 2dt, …, steps·dt`.
pub fn run_flow(
    f0: &ScalarField,
    dt: f64,
    steps: usize,
    monitors: &[Monitor],
) -> std::result::Result<MonitorSeries, FlowAbort> {
    drive(&TorusFlow::new(f0), dt, steps, monitors)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monitor::{max_decrease, max_increase};
    use crate::toruslab::grid::TorusGrid;
    use std::f64::consts::PI;

    #[test]
    fn single_mode_matches_analytic_minimum() {
        let l = 2.0 * PI;
        let g = TorusGrid::new(2, 32, vec![l, l]).unwrap();
        let f = ScalarField::from_fn(&g, |x| x[0].sin()).unwrap();
        let s = run_flow(&f, 1e-2, 20, &[Monitor::MinSigma1, Monitor::MaxSigma1]).unwrap();
        for row in s.rows() {
            let exact = -(-row.t).exp();
            assert!((row.get(Monitor::MinSigma1).unwrap() - exact).abs() < 1e-9);
        }
        assert_eq!(max_decrease(&s.column(Monitor::MinSigma1)), 0.0);
        assert_eq!(max_increase(&s.column(Monitor::MaxSigma1)), 0.0);
    }

    #[test]
    fn constant_data_gives_zero_monitors() {
        let g = TorusGrid::periodic_box(2, 16).unwrap();
        let f = ScalarField::constant(&g, 2.0);
        let s = run_flow(&f, 0.1, 3, &Monitor::ALL).unwrap();
        for row in s.rows() {
            for m in [Monitor::MinSigma1, Monitor::MaxSigma1, Monitor::MinSigma2] {
                assert!(row.get(m).unwrap().abs() < 1e-14);
            }
            assert_eq!(row.get(Monitor::MinH), None);
        }
    }
}
