//! Pointwise residual fields shared by the torus, sphere and complex-torus labs.

/// Values of a left-minus-right identity evaluation at grid nodes, optionally
/// restricted to a mask.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualField {
    pub values: Vec<f64>,
    pub mask: Option<Vec<bool>>,
}

impl ResidualField {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values, mask: None }
    }

    pub fn masked(values: Vec<f64>, mask: Vec<bool>) -> Self {
        debug_assert_eq!(values.len(), mask.len());
        Self {
            values,
            mask: Some(mask),
        }
    }

    /// Values inside the mask (all values when unmasked).
    pub fn active(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().enumerate().filter_map(move |(i, &v)| match &self.mask {
            Some(m) if !m[i] => None,
            _ => Some(v),
        })
    }

    /// Sup norm over the active nodes; `0` when nothing is active.
    pub fn sup(&self) -> f64 {
        self.active().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// Minimum over the active nodes; `None` when nothing is active.
    pub fn min(&self) -> Option<f64> {
        self.active().fold(None, |acc, v| Some(acc.map_or(v, |a: f64| a.min(v))))
    }

    pub fn max(&self) -> Option<f64> {
        self.active().fold(None, |acc, v| Some(acc.map_or(v, |a: f64| a.max(v))))
    }

    pub fn active_count(&self) -> usize {
        self.active().count()
    }
}

pub(crate) fn min_max(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}
