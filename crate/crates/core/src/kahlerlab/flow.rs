use super::complex::{complex_hessian, ComplexTorusGrid};
use super::identities::kahler_sigma2_residual;
use crate::error::Result;
use crate::monitor::{drive, FlowAbort, FlowModel, Monitor, MonitorRow, MonitorSeries};
use crate::toruslab::{ScalarField, TorusFlow};

/// Heat flow on a flat complex torus with monitors taken from the complex
/// Hessian `u_{αβ̄}`. `res_sigma1_sup` is the imaginary part left over in the
/// trace; `min_H` and `quotient_min` stay empty.
#[derive(Debug, Clone)]
pub struct ComplexTorusFlow {
    inner: TorusFlow,
}

impl ComplexTorusFlow {
    pub fn new(f0: &ScalarField) -> Result<Self> {
        ComplexTorusGrid::from_torus(f0.grid())?;
        Ok(Self {
            inner: TorusFlow::new(f0),
        })
    }

    pub fn field_at(&self, t: f64) -> Result<ScalarField> {
        self.inner.field_at(t)
    }
}

impl FlowModel for ComplexTorusFlow {
    fn sample(&self, t: f64, monitors: &[Monitor]) -> Result<MonitorRow> {
        let u = self.field_at(t)?;
        let wants = |m: Monitor| monitors.contains(&m);
        let mut row = MonitorRow::new(t);
        let needs_hessian = [
            Monitor::MinSigma1,
            Monitor::MaxSigma1,
            Monitor::MinSigma2,
            Monitor::ResSigma1Sup,
        ]
        .into_iter()
        .any(wants);
        if needs_hessian {
            let h = complex_hessian(&u)?;
            let (s1, imag) = h.sigma(1)?;
            let (lo, hi) = s1.min_max();
            if wants(Monitor::MinSigma1) {
                row.set(Monitor::MinSigma1, lo);
            }
            if wants(Monitor::MaxSigma1) {
                row.set(Monitor::MaxSigma1, hi);
            }
            if wants(Monitor::ResSigma1Sup) {
                row.set(Monitor::ResSigma1Sup, imag);
            }
            if wants(Monitor::MinSigma2) {
                row.set(Monitor::MinSigma2, h.sigma(2)?.0.min_max().0);
            }
        }
        if wants(Monitor::ResSigma2Sup) && u.grid().dim() == 4 {
            row.set(Monitor::ResSigma2Sup, kahler_sigma2_residual(&u)?.sup());
        }
        Ok(row)
    }
}

pub fn complex_torus_run_flow(
    f0: &ScalarField,
    dt: f64,
    steps: usize,
    monitors: &[Monitor],
) -> std::result::Result<MonitorSeries, FlowAbort> {
    match ComplexTorusFlow::new(f0) {
        Ok(flow) => drive(&flow, dt, steps, monitors),
        Err(error) => Err(FlowAbort {
            partial: MonitorSeries::new(monitors.to_vec()),
            step: 0,
            error,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monitor::max_decrease;

    #[test]
    fn separable_minimum_decays_exactly() {
        let g = ComplexTorusGrid::periodic_box(1, 16).unwrap();
        let f = ScalarField::from_fn(g.torus(), |x| x[0].cos() + x[1].cos()).unwrap();
        let s = complex_torus_run_flow(&f, 0.05, 10, &[Monitor::MinSigma1, Monitor::ResSigma1Sup]).unwrap();
        for row in s.rows() {
            // σ_1 = ¼Δu = −¼(cos x + cos y)e^{−t}
            let exact = -0.5 * (-row.t).exp();
            assert!((row.get(Monitor::MinSigma1).unwrap() - exact).abs() < 1e-12);
            assert!(row.get(Monitor::ResSigma1Sup).unwrap() < 1e-12);
        }
        assert_eq!(max_decrease(&s.column(Monitor::MinSigma1)), 0.0);
    }

    #[test]
    fn odd_dimension_rejected() {
        let g = crate::toruslab::TorusGrid::periodic_box(3, 16).unwrap();
        assert!(ComplexTorusFlow::new(&ScalarField::constant(&g, 1.0)).is_err());
    }
}
