//! Named initial data for torus experiments.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::grid::{ScalarField, TorusGrid, MAX_DIM};
use super::spectral::Spectrum;
use crate::error::{Error, Result};

/// One Fourier mode `amplitude · cos(2π k·x/L + phase)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mode {
    pub k: Vec<i64>,
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
}

fn one() -> f64 {
    1.0
}

fn default_bump_width() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum TorusPreset {
    Constant {
        #[serde(default)]
        value: f64,
    },
    /// `amplitude · sin(2π k x_axis / L_axis)`.
    SingleMode {
        #[serde(default)]
        axis: usize,
        #[serde(default = "one_i64")]
        k: i64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    SumOfModes { modes: Vec<Mode> },
    /// Periodized Gaussian centred in the box, mean subtracted.
    GaussianBump {
        #[serde(default = "default_bump_width")]
        width: f64,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// `−(1+r²)^{−α}` about the box centre, smoothly cut off between 0.75 and
    /// 0.95 of the half side.
    RadialProfile { alpha: f64 },
    /// Gaussian Fourier coefficients with weight `(1+|k|²)^{−1}` on the modes
    /// `max_i |k_i| ≤ band`, zero mean, scaled so the coefficient magnitudes
    /// sum to one (so `max |u| ≤ 1`, and the same function at every resolution).
    RandomBandlimited {
        #[serde(default)]
        seed: u64,
        band: usize,
    },
}

fn one_i64() -> i64 {
    1
}

impl TorusPreset {
    pub fn name(&self) -> &'static str {
        match self {
            TorusPreset::Constant { .. } => "constant",
            TorusPreset::SingleMode { .. } => "single_mode",
            TorusPreset::SumOfModes { .. } => "sum_of_modes",
            TorusPreset::GaussianBump { .. } => "gaussian_bump",
            TorusPreset::RadialProfile { .. } => "radial_profile",
            TorusPreset::RandomBandlimited { .. } => "random_bandlimited",
        }
    }

    /// Largest per-axis mode number the preset populates, if it is band-limited.
    pub fn band(&self) -> Option<usize> {
        match self {
            TorusPreset::Constant { .. } => Some(0),
            TorusPreset::SingleMode { k, .. } => Some(k.unsigned_abs() as usize),
            TorusPreset::SumOfModes { modes } => Some(
                modes
                    .iter()
                    .flat_map(|m| m.k.iter().map(|k| k.unsigned_abs() as usize))
                    .max()
                    .unwrap_or(0),
            ),
            TorusPreset::RandomBandlimited { band, .. } => Some(*band),
            TorusPreset::GaussianBump { .. } | TorusPreset::RadialProfile { .. } => None,
        }
    }

    /// Replace the seed of a random preset.
    pub fn reseeded(&self, seed: u64) -> Self {
        match self {
            TorusPreset::RandomBandlimited { band, .. } => TorusPreset::RandomBandlimited { seed, band: *band },
            other => other.clone(),
        }
    }
}

pub fn initial_data(preset: &TorusPreset, grid: &TorusGrid) -> Result<ScalarField> {
    let dim = grid.dim();
    let l = grid.lengths().to_vec();
    match preset {
        TorusPreset::Constant { value } => {
            if !value.is_finite() {
                return Err(Error::InvalidArgument("constant value must be finite".into()));
            }
            Ok(ScalarField::constant(grid, *value))
        }
        TorusPreset::SingleMode { axis, k, amplitude } => {
            if *axis >= dim {
                return Err(Error::OutOfRange { k: *axis, max: dim - 1 });
            }
            let w = 2.0 * PI * *k as f64 / l[*axis];
            ScalarField::from_fn(grid, |x| amplitude * (w * x[*axis]).sin())
        }
        TorusPreset::SumOfModes { modes } => {
            for m in modes {
                if m.k.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        got: m.k.len(),
                    });
                }
            }
            ScalarField::from_fn(grid, |x| {
                modes
                    .iter()
                    .map(|m| {
                        let arg: f64 = (0..dim).map(|a| 2.0 * PI * m.k[a] as f64 * x[a] / l[a]).sum();
                        m.amplitude * (arg + m.phase).cos()
                    })
                    .sum()
            })
        }
        TorusPreset::GaussianBump { width, amplitude } => {
            if !(*width > 0.0) {
                return Err(Error::InvalidArgument(format!("bump width must be positive, got {width}")));
            }
            let f = ScalarField::from_fn(grid, |x| {
                let mut prod = 1.0;
                for a in 0..dim {
                    let d = x[a] - 0.5 * l[a];
                    let s: f64 = (-2..=2)
                        .map(|j| {
                            let y = d + j as f64 * l[a];
                            (-y * y / (2.0 * width * width)).exp()
                        })
                        .sum();
                    prod *= s;
                }
                amplitude * prod
            })?;
            let mean = f.mean();
            Ok(f.map(|v| v - mean))
        }
        TorusPreset::RadialProfile { alpha } => {
            if !alpha.is_finite() {
                return Err(Error::InvalidArgument("alpha must be finite".into()));
            }
            let half = l.iter().cloned().fold(f64::INFINITY, f64::min) / 2.0;
            let (r0, r1) = (0.75 * half, 0.95 * half);
            ScalarField::from_fn(grid, |x| {
                let r2: f64 = (0..dim).map(|a| (x[a] - 0.5 * l[a]).powi(2)).sum();
                -(1.0 + r2).powf(-alpha) * smooth_cutoff((r2.sqrt() - r0) / (r1 - r0))
            })
        }
        TorusPreset::RandomBandlimited { seed, band } => random_bandlimited(grid, *seed, *band),
    }
}

/// `1` for `s ≤ 0`, `0` for `s ≥ 1`, C^∞ in between.
fn smooth_cutoff(s: f64) -> f64 {
    let bump = |t: f64| if t > 0.0 { (-1.0 / t).exp() } else { 0.0 };
    let a = bump(1.0 - s);
    let b = bump(s);
    a / (a + b)
}

fn random_bandlimited(grid: &TorusGrid, seed: u64, band: usize) -> Result<ScalarField> {
    if 4 * band > grid.n() {
        return Err(Error::InvalidArgument(format!(
            "band {band} exceeds a quarter of the resolution {}",
            grid.n()
        )));
    }
    if band == 0 {
        return Ok(ScalarField::constant(grid, 0.0));
    }
    let dim = grid.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeffs = vec![Complex64::default(); grid.len()];
    let b = band as i64;
    let span = (2 * b + 1) as usize;
    let total = span.pow(dim as u32);
    for code in 0..total {
        let mut k = [0i64; MAX_DIM];
        let mut c = code;
        for axis in (0..dim).rev() {
            k[axis] = (c % span) as i64 - b;
            c /= span;
        }
        // visit each ±k pair once, from the lexicographically positive side
        let Some(&lead) = k[..dim].iter().find(|&&v| v != 0) else {
            continue;
        };
        if lead < 0 {
            continue;
        }
        let k2: i64 = k[..dim].iter().map(|v| v * v).sum();
        let w = 1.0 / (1.0 + k2 as f64);
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        let z = Complex64::new(re, im) * w;
        let mut plus = [0usize; MAX_DIM];
        let mut minus = [0usize; MAX_DIM];
        for a in 0..dim {
            plus[a] = grid.mode_index(k[a]);
            minus[a] = grid.mode_index(-k[a]);
        }
        coeffs[grid.flatten(&plus)] = z;
        coeffs[grid.flatten(&minus)] = z.conj();
    }
    let total: f64 = coeffs.iter().map(|c| c.norm()).sum();
    let scale = grid.len() as f64 / total;
    for c in &mut coeffs {
        *c *= scale;
    }
    Ok(Spectrum::from_coeffs(grid.clone(), coeffs).to_field())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_has_zero_mean() {
        let g = TorusGrid::periodic_box(2, 32).unwrap();
        let f = initial_data(&TorusPreset::GaussianBump { width: 0.7, amplitude: 2.0 }, &g).unwrap();
        assert!(f.mean().abs() < 1e-14);
    }

    #[test]
    fn random_is_reproducible_and_normalized() {
        let g = TorusGrid::periodic_box(2, 32).unwrap();
        let p = TorusPreset::RandomBandlimited { seed: 7, band: 8 };
        let a = initial_data(&p, &g).unwrap();
        let b = initial_data(&p, &g).unwrap();
        assert_eq!(a.samples(), b.samples());
        assert!(a.sup_norm() <= 1.0 && a.sup_norm() > 0.05);
        let fine = initial_data(&p, &TorusGrid::periodic_box(2, 64).unwrap()).unwrap();
        assert!((fine.samples()[2 * 64 + 2] - a.samples()[32 + 1]).abs() < 1e-14);
        assert!(a.mean().abs() < 1e-14);
        assert!(a.spectrum().bandwidth(1e-12) <= 8);
        let c = initial_data(&p.reseeded(8), &g).unwrap();
        assert_ne!(a.samples(), c.samples());
    }

    #[test]
    fn band_above_quarter_rejected() {
        let g = TorusGrid::periodic_box(2, 32).unwrap();
        assert!(initial_data(&TorusPreset::RandomBandlimited { seed: 0, band: 9 }, &g).is_err());
    }

    #[test]
    fn cutoff_shape() {
        assert_eq!(smooth_cutoff(-0.5), 1.0);
        assert_eq!(smooth_cutoff(1.5), 0.0);
        assert!((smooth_cutoff(0.5) - 0.5).abs() < 1e-15);
    }
}
