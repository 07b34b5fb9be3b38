//! Named initial data for sphere experiments.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::grid::SphereGrid;
use super::transform::{sh_synthesize, SphereField, SphericalSpectrum};
use crate::error::{Error, Result};

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpherePreset {
    Constant {
        #[serde(default)]
        value: f64,
    },
    /// `amplitude · cos θ`.
    CosTheta {
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// `amplitude · (Y_lm + (−1)^m Y_{l,−m})` for `m > 0`, `amplitude · Y_l0`
    /// for `m = 0`.
    Harmonic {
        l: usize,
        #[serde(default)]
        m: usize,
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// Gaussian coefficients with weight `(1 + l(l+1))^{−1}` on `1 ≤ l ≤ band`,
    /// scaled so `Σ |a_lm| sup|Y_lm| = 1` (hence `max |u| ≤ 1` at every
    /// truncation).
    RandomBandlimited {
        #[serde(default)]
        seed: u64,
        band: usize,
    },
}

impl SpherePreset {
    pub fn name(&self) -> &'static str {
        match self {
            SpherePreset::Constant { .. } => "constant",
            SpherePreset::CosTheta { .. } => "cos_theta",
            SpherePreset::Harmonic { .. } => "harmonic",
            SpherePreset::RandomBandlimited { .. } => "random_bandlimited",
        }
    }

    /// Largest spherical-harmonic degree present.
    pub fn band(&self) -> usize {
        match self {
            SpherePreset::Constant { .. } => 0,
            SpherePreset::CosTheta { .. } => 1,
            SpherePreset::Harmonic { l, .. } => *l,
            SpherePreset::RandomBandlimited { band, .. } => *band,
        }
    }

    pub fn reseeded(&self, seed: u64) -> Self {
        match self {
            SpherePreset::RandomBandlimited { band, .. } => SpherePreset::RandomBandlimited { seed, band: *band },
            other => other.clone(),
        }
    }
}

/// Spectrum of the preset at truncation `lmax`.
pub fn initial_spectrum(preset: &SpherePreset, lmax: usize) -> Result<SphericalSpectrum> {
    let mut spec = SphericalSpectrum::zeros(lmax);
    if preset.band() > lmax {
        return Err(Error::OutOfRange {
            k: preset.band(),
            max: lmax,
        });
    }
    match preset {
        SpherePreset::Constant { value } => {
            spec.set(0, 0, Complex64::new(value * (4.0 * PI).sqrt(), 0.0))?;
        }
        SpherePreset::CosTheta { amplitude } => {
            spec.set(1, 0, Complex64::new(amplitude * (4.0 * PI / 3.0).sqrt(), 0.0))?;
        }
        SpherePreset::Harmonic { l, m, amplitude } => {
            if m > l {
                return Err(Error::OutOfRange { k: *m, max: *l });
            }
            spec.set_real(*l, *m as i64, Complex64::new(*amplitude, 0.0))?;
        }
        SpherePreset::RandomBandlimited { seed, band } => {
            if 4 * band > lmax {
                return Err(Error::InvalidArgument(format!(
                    "band {band} exceeds a quarter of the truncation degree {lmax}"
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut total = 0.0;
            for l in 1..=*band {
                let w = 1.0 / (1.0 + (l * (l + 1)) as f64);
                let peak = ((2 * l + 1) as f64 / (4.0 * PI)).sqrt();
                for m in 0..=l as i64 {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = if m == 0 { 0.0 } else { StandardNormal.sample(&mut rng) };
                    let z = Complex64::new(re, im) * w;
                    spec.set_real(l, m, z)?;
                    total += peak * if m == 0 { z.norm() } else { 2.0 * z.norm() };
                }
            }
            if total > 0.0 {
                spec = spec.map_degree(|_| 1.0 / total);
            }
        }
    }
    Ok(spec)
}

pub fn sphere_initial_data(preset: &SpherePreset, grid: &Arc<SphereGrid>) -> Result<SphereField> {
    Ok(sh_synthesize(&initial_spectrum(preset, grid.lmax())?, grid))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cos_theta_preset_samples_cos_theta() {
        let g = Arc::new(SphereGrid::new(16, 1.0).unwrap());
        let u = sphere_initial_data(&SpherePreset::CosTheta { amplitude: 2.0 }, &g).unwrap();
        let exact = SphereField::from_fn(&g, |t, _| 2.0 * t.cos()).unwrap();
        assert!(u.sup_distance(&exact) < 1e-14);
    }

    #[test]
    fn random_is_bounded_and_resolution_independent() {
        let p = SpherePreset::RandomBandlimited { seed: 3, band: 6 };
        let coarse = initial_spectrum(&p, 24).unwrap();
        let fine = initial_spectrum(&p, 48).unwrap();
        for (l, m, c) in coarse.iter() {
            assert_eq!(fine.get(l, m).unwrap(), c);
        }
        let g = Arc::new(SphereGrid::new(24, 1.0).unwrap());
        let u = sh_synthesize(&coarse, &g);
        assert!(u.sup_norm() <= 1.0 && u.sup_norm() > 0.02);
        assert!(u.mean().abs() < 1e-14);
        assert!(initial_spectrum(&p, 16).is_err());
    }
}
