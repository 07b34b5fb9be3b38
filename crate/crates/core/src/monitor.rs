//! Time series of grid extrema and residual norms recorded along a flow.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A scalar recorded once per step. The column names are the monitors.csv header.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Monitor {
    #[serde(rename = "min_sigma1")]
    MinSigma1,
    #[serde(rename = "max_sigma1")]
    MaxSigma1,
    #[serde(rename = "min_sigma2")]
    MinSigma2,
    #[serde(rename = "min_H")]
    MinH,
    #[serde(rename = "res_sigma1_sup")]
    ResSigma1Sup,
    #[serde(rename = "res_sigma2_sup")]
    ResSigma2Sup,
    #[serde(rename = "quotient_min")]
    QuotientMin,
}

impl Monitor {
    pub const ALL: [Monitor; 7] = [
        Monitor::MinSigma1,
        Monitor::MaxSigma1,
        Monitor::MinSigma2,
        Monitor::MinH,
        Monitor::ResSigma1Sup,
        Monitor::ResSigma2Sup,
        Monitor::QuotientMin,
    ];

    pub fn column(self) -> &'static str {
        match self {
            Monitor::MinSigma1 => "min_sigma1",
            Monitor::MaxSigma1 => "max_sigma1",
            Monitor::MinSigma2 => "min_sigma2",
            Monitor::MinH => "min_H",
            Monitor::ResSigma1Sup => "res_sigma1_sup",
            Monitor::ResSigma2Sup => "res_sigma2_sup",
            Monitor::QuotientMin => "quotient_min",
        }
    }

    pub fn from_column(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.column() == name)
    }

    fn slot(self) -> usize {
        Self::ALL.iter().position(|&m| m == self).unwrap()
    }
}

impl fmt::Display for Monitor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.column())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonitorRow {
    pub t: f64,
    values: [Option<f64>; 7],
}

impl MonitorRow {
    pub fn new(t: f64) -> Self {
        Self {
            t,
            values: [None; 7],
        }
    }

    pub fn set(&mut self, m: Monitor, v: f64) {
        self.values[m.slot()] = Some(v);
    }

    pub fn get(&self, m: Monitor) -> Option<f64> {
        self.values[m.slot()]
    }

    fn first_non_finite(&self) -> Option<Monitor> {
        Monitor::ALL
            .into_iter()
            .find(|&m| self.get(m).is_some_and(|v| !v.is_finite()))
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MonitorSeries {
    pub monitors: Vec<Monitor>,
    rows: Vec<MonitorRow>,
}

impl MonitorSeries {
    pub fn new(monitors: Vec<Monitor>) -> Self {
        Self {
            monitors,
            rows: Vec::new(),
        }
    }

    /// Append a row; `t` must be strictly larger than the previous row's.
    pub fn push(&mut self, row: MonitorRow) -> Result<()> {
        if let Some(last) = self.rows.last() {
            if !(row.t > last.t) {
                return Err(Error::InvalidArgument(format!(
                    "monitor time {} does not exceed previous {}",
                    row.t, last.t
                )));
            }
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn rows(&self) -> &[MonitorRow] {
        &self.rows
    }

    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }

    /// Recorded values of one monitor, skipping rows where it is absent.
    pub fn column(&self, m: Monitor) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.get(m)).collect()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Largest drop between consecutive values (`0` for a nondecreasing series).
pub fn max_decrease(values: &[f64]) -> f64 {
    values
        .windows(2)
        .map(|w| w[0] - w[1])
        .fold(0.0, f64::max)
}

/// Largest rise between consecutive values (`0` for a nonincreasing series).
pub fn max_increase(values: &[f64]) -> f64 {
    values
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(0.0, f64::max)
}

/// Something that can report monitor values at an arbitrary time.
pub trait FlowModel {
    fn sample(&self, t: f64, monitors: &[Monitor]) -> Result<MonitorRow>;
}

/// A run that stopped early. `partial` holds every row recorded before the
/// failing step.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowAbort {
    pub partial: MonitorSeries,
    pub step: usize,
    pub error: Error,
}

impl fmt::Display for FlowAbort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "flow aborted at step {}: {}", self.step, self.error)
    }
}

impl std::error::Error for FlowAbort {}

/// Record `steps` rows at `t = dt, 2dt, …`. Each row is sampled from the model
/// at its absolute time, so no error accumulates between steps.
pub fn drive<M: FlowModel + ?Sized>(
    model: &M,
    dt: f64,
    steps: usize,
    monitors: &[Monitor],
) -> std::result::Result<MonitorSeries, FlowAbort> {
    let mut series = MonitorSeries::new(monitors.to_vec());
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(FlowAbort {
            partial: series,
            step: 0,
            error: Error::InvalidArgument(format!("dt must be positive, got {dt}")),
        });
    }
    for step in 1..=steps {
        let t = dt * step as f64;
        let row = match model.sample(t, monitors) {
            Ok(row) => row,
            Err(error) => {
                return Err(FlowAbort {
                    partial: series,
                    step,
                    error,
                })
            }
        };
        if let Some(bad) = row.first_non_finite() {
            return Err(FlowAbort {
                partial: series,
                step,
                error: Error::NonFinite(format!("monitor {bad} at t = {t}")),
            });
        }
        if let Err(error) = series.push(row) {
            return Err(FlowAbort {
                partial: series,
                step,
                error,
            });
        }
    }
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Blowup;

    impl FlowModel for Blowup {
        fn sample(&self, t: f64, _: &[Monitor]) -> Result<MonitorRow> {
            let mut row = MonitorRow::new(t);
            row.set(Monitor::MinSigma1, if t > 0.25 { f64::NAN } else { -t });
            Ok(row)
        }
    }

    #[test]
    fn nan_aborts_with_partial_rows() {
        let err = drive(&Blowup, 0.1, 10, &[Monitor::MinSigma1]).unwrap_err();
        assert_eq!(err.step, 3);
        assert_eq!(err.partial.len(), 2);
        assert!(matches!(err.error, Error::NonFinite(_)));
    }

    #[test]
    fn zero_steps_gives_empty_series() {
        let s = drive(&Blowup, 0.1, 0, &[Monitor::MinSigma1]).unwrap();
        assert!(s.is_empty());
        assert!(drive(&Blowup, 0.0, 1, &[]).is_err());
    }

    #[test]
    fn time_must_increase() {
        let mut s = MonitorSeries::new(vec![]);
        s.push(MonitorRow::new(1.0)).unwrap();
        assert!(s.push(MonitorRow::new(1.0)).is_err());
    }

    #[test]
    fn monotonicity_helpers() {
        assert_eq!(max_decrease(&[1.0, 2.0, 1.5, 3.0]), 0.5);
        assert_eq!(max_increase(&[3.0, 2.0, 2.5]), 0.5);
        assert_eq!(Monitor::from_column("min_H"), Some(Monitor::MinH));
        assert_eq!(Monitor::from_column("nope"), None);
    }
}
