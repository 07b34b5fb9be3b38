//! Experiment configuration files.
//!
//! A config is a TOML document with four tables:
//!
//! ```toml
//! [experiment]
//! id = "torus-random"      # required, unique within a run set
//! resolution = 64          # required: points per axis (torus) or L_max (sphere)
//! band = 16                # default resolution / 4, must not exceed it
//! dt = 1e-3                # default 1e-3, must be positive
//! steps = 100              # default 0
//! output_dir = "runs/a"    # default: the id, relative to the output root
//! seed = 7                 # reseeds random presets
//! snapshots = false        # write initial and final field snapshots
//! debug_flip_curvature = false  # sphere only: flip the curvature sign in sweeps
//!
//! [geometry]
//! type = "flat_torus"      # flat_torus | round_sphere2 | shrinking_sphere | flat_complex_torus
//! dim = 2
//!
//! [initial]
//! preset = "random_bandlimited"   # band defaults to [experiment].band
//!
//! [monitors]
//! names = ["min_sigma1", "max_sigma1"]   # default: every monitor the geometry supports
//! ```
//!
//! Unknown keys anywhere are errors, and every error carries the dotted key path.

use std::f64::consts::PI;
use std::path::PathBuf;

use pcflow_core::geomodels::GeometryModel;
use pcflow_core::kahlerlab::DEFAULT_TIME_SCALE;
use pcflow_core::monitor::Monitor;
use pcflow_core::spherelab::SpherePreset;
use pcflow_core::toruslab::TorusPreset;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{PcflowError, Result};

pub const DEFAULT_DT: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeometryConfig {
    FlatTorus {
        dim: usize,
        /// Defaults to `2π` on every axis.
        #[serde(default)]
        side_lengths: Option<Vec<f64>>,
    },
    RoundSphere2 {
        #[serde(default = "one")]
        radius: f64,
    },
    ShrinkingSphere {
        #[serde(default = "one")]
        radius0: f64,
        #[serde(default = "default_time_scale")]
        time_scale: f64,
    },
    FlatComplexTorus {
        m: usize,
        #[serde(default)]
        side_lengths: Option<Vec<f64>>,
    },
}

fn one() -> f64 {
    1.0
}

fn default_time_scale() -> f64 {
    DEFAULT_TIME_SCALE
}

impl GeometryConfig {
    pub fn name(&self) -> &'static str {
        match self {
            GeometryConfig::FlatTorus { .. } => "flat_torus",
            GeometryConfig::RoundSphere2 { .. } => "round_sphere2",
            GeometryConfig::ShrinkingSphere { .. } => "shrinking_sphere",
            GeometryConfig::FlatComplexTorus { .. } => "flat_complex_torus",
        }
    }

    pub fn is_sphere(&self) -> bool {
        matches!(
            self,
            GeometryConfig::RoundSphere2 { .. } | GeometryConfig::ShrinkingSphere { .. }
        )
    }

    /// Real dimension of the torus grid, `None` on the sphere.
    pub fn torus_dim(&self) -> Option<usize> {
        match self {
            GeometryConfig::FlatTorus { dim, .. } => Some(*dim),
            GeometryConfig::FlatComplexTorus { m, .. } => Some(2 * m),
            _ => None,
        }
    }

    pub fn side_lengths(&self) -> Option<Vec<f64>> {
        match self {
            GeometryConfig::FlatTorus { side_lengths, .. } | GeometryConfig::FlatComplexTorus { side_lengths, .. } => {
                let d = self.torus_dim()?;
                Some(side_lengths.clone().unwrap_or_else(|| vec![2.0 * PI; d]))
            }
            _ => None,
        }
    }

    pub fn model(&self) -> GeometryModel {
        match self {
            GeometryConfig::FlatTorus { dim, .. } => GeometryModel::FlatTorus {
                dim: *dim,
                side_lengths: self.side_lengths().unwrap_or_default(),
            },
            GeometryConfig::RoundSphere2 { radius } => GeometryModel::RoundSphere2 { radius: *radius },
            GeometryConfig::ShrinkingSphere { radius0, .. } => GeometryModel::ShrinkingSphere { radius0: *radius0 },
            GeometryConfig::FlatComplexTorus { m, .. } => GeometryModel::FlatComplexTorus {
                m: *m,
                side_lengths: self.side_lengths().unwrap_or_default(),
            },
        }
    }

    /// Monitors with a meaning on this geometry, in column order.
    pub fn supported_monitors(&self) -> Vec<Monitor> {
        use Monitor::*;
        match self {
            GeometryConfig::FlatTorus { .. } => Monitor::ALL.to_vec(),
            GeometryConfig::RoundSphere2 { .. } | GeometryConfig::FlatComplexTorus { .. } => {
                vec![MinSigma1, MaxSigma1, MinSigma2, ResSigma1Sup, ResSigma2Sup]
            }
            GeometryConfig::ShrinkingSphere { .. } => vec![MinSigma1, MaxSigma1, MinSigma2],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum InitialConfig {
    Torus(TorusPreset),
    Sphere(SpherePreset),
}

impl InitialConfig {
    pub fn name(&self) -> &'static str {
        match self {
            InitialConfig::Torus(p) => p.name(),
            InitialConfig::Sphere(p) => p.name(),
        }
    }

    /// Largest mode or degree present, `None` for data that is not band-limited.
    pub fn band(&self) -> Option<usize> {
        match self {
            InitialConfig::Torus(p) => p.band(),
            InitialConfig::Sphere(p) => Some(p.band()),
        }
    }

    pub fn reseeded(&self, seed: u64) -> Self {
        match self {
            InitialConfig::Torus(p) => InitialConfig::Torus(p.reseeded(seed)),
            InitialConfig::Sphere(p) => InitialConfig::Sphere(p.reseeded(seed)),
        }
    }
}

/// A validated experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub id: String,
    pub geometry: GeometryConfig,
    pub resolution: usize,
    pub band: usize,
    pub dt: f64,
    pub steps: usize,
    pub initial: InitialConfig,
    pub monitors: Vec<Monitor>,
    pub output_dir: Option<PathBuf>,
    pub seed: Option<u64>,
    pub snapshots: bool,
    pub debug_flip_curvature: bool,
}

impl ExperimentConfig {
    /// Override the seed, reseeding random initial data.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self.initial = self.initial.reseeded(seed);
        self
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    experiment: RawExperiment,
    geometry: GeometryConfig,
    initial: toml::Table,
    #[serde(default)]
    monitors: RawMonitors,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    id: String,
    resolution: usize,
    band: Option<usize>,
    dt: Option<f64>,
    #[serde(default)]
    steps: usize,
    output_dir: Option<PathBuf>,
    seed: Option<u64>,
    #[serde(default)]
    snapshots: bool,
    #[serde(default)]
    debug_flip_curvature: bool,
}

#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMonitors {
    names: Option<Vec<Monitor>>,
}

/// Deserialize a preset table. Tagged enums lose the field path, so the
/// offending key is found as the one whose removal changes the error.
fn deserialize_preset<T: DeserializeOwned>(prefix: &str, table: toml::Table) -> Result<T> {
    let message = match toml::Value::Table(table.clone()).try_into::<T>() {
        Ok(v) => return Ok(v),
        Err(e) => e.message().to_string(),
    };
    let culprit = table.keys().filter(|k| k.as_str() != "preset").find(|k| {
        let mut probe = table.clone();
        probe.remove(k.as_str());
        match toml::Value::Table(probe).try_into::<T>() {
            Ok(_) => true,
            Err(e) => e.message() != message,
        }
    });
    let path = culprit.map_or(prefix.to_string(), |k| format!("{prefix}.{k}"));
    Err(PcflowError::config(path, message))
}

/// Parse and validate config text.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let de = toml::Deserializer::parse(text).map_err(|e| PcflowError::config("", e.message()))?;
    let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        PcflowError::config(path, e.into_inner().message())
    })?;
    build(raw)
}

pub fn load_config(path: &std::path::Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| PcflowError::config("", format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

fn build(raw: RawConfig) -> Result<ExperimentConfig> {
    let e = raw.experiment;
    let geometry = raw.geometry;
    if e.id.trim().is_empty() || e.id.contains(['/', '\\']) {
        return Err(PcflowError::config("experiment.id", "must be a non-empty name without path separators"));
    }
    validate_geometry(&geometry, e.resolution)?;

    let max_band = e.resolution / 4;
    let band = e.band.unwrap_or(max_band);
    if band > max_band {
        return Err(PcflowError::config(
            "experiment.band",
            format!("band {band} exceeds resolution/4 = {max_band}"),
        ));
    }
    let dt = e.dt.unwrap_or(DEFAULT_DT);
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(PcflowError::config("experiment.dt", format!("must be positive, got {dt}")));
    }
    if let GeometryConfig::ShrinkingSphere { radius0, time_scale } = &geometry {
        let horizon = radius0 * radius0 / (2.0 * time_scale);
        if dt * e.steps as f64 >= horizon {
            return Err(PcflowError::config(
                "experiment.steps",
                format!("final time {} reaches the horizon {horizon}", dt * e.steps as f64),
            ));
        }
    }

    let mut table = raw.initial;
    let random = table.get("preset").and_then(|v| v.as_str()) == Some("random_bandlimited");
    if random && !table.contains_key("band") {
        table.insert("band".into(), toml::Value::Integer(band as i64));
    }
    let mut initial = if geometry.is_sphere() {
        InitialConfig::Sphere(deserialize_preset("initial", table)?)
    } else {
        InitialConfig::Torus(deserialize_preset("initial", table)?)
    };
    if let Some(b) = initial.band() {
        if b > band {
            return Err(PcflowError::config(
                "initial.band",
                format!("data band {b} exceeds the experiment band {band}"),
            ));
        }
    }
    if let Some(seed) = e.seed {
        initial = initial.reseeded(seed);
    }

    let supported = geometry.supported_monitors();
    let monitors = match raw.monitors.names {
        None => supported,
        Some(names) => {
            for (i, m) in names.iter().enumerate() {
                if !supported.contains(m) {
                    return Err(PcflowError::config(
                        format!("monitors.names[{i}]"),
                        format!("`{m}` is not available on {}", geometry.name()),
                    ));
                }
                if names[..i].contains(m) {
                    return Err(PcflowError::config(format!("monitors.names[{i}]"), format!("`{m}` listed twice")));
                }
            }
            names
        }
    };
    if e.debug_flip_curvature && !matches!(geometry, GeometryConfig::RoundSphere2 { .. }) {
        return Err(PcflowError::config(
            "experiment.debug_flip_curvature",
            "only meaningful on round_sphere2",
        ));
    }

    Ok(ExperimentConfig {
        id: e.id,
        geometry,
        resolution: e.resolution,
        band,
        dt,
        steps: e.steps,
        initial,
        monitors,
        output_dir: e.output_dir,
        seed: e.seed,
        snapshots: e.snapshots,
        debug_flip_curvature: e.debug_flip_curvature,
    })
}

fn validate_geometry(geometry: &GeometryConfig, resolution: usize) -> Result<()> {
    let positive = |path: &str, v: f64| {
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(PcflowError::config(path, format!("must be positive, got {v}")))
        }
    };
    match geometry {
        GeometryConfig::FlatTorus { dim, side_lengths } | GeometryConfig::FlatComplexTorus { m: dim, side_lengths } => {
            let complex = matches!(geometry, GeometryConfig::FlatComplexTorus { .. });
            let real_dim = if complex { 2 * dim } else { *dim };
            if complex && !(1..=2).contains(dim) {
                return Err(PcflowError::config("geometry.m", format!("complex dimension {dim} outside 1..=2")));
            }
            if !complex && !(1..=3).contains(dim) {
                return Err(PcflowError::config("geometry.dim", format!("dimension {dim} outside 1..=3")));
            }
            if let Some(l) = side_lengths {
                if l.len() != real_dim {
                    return Err(PcflowError::config(
                        "geometry.side_lengths",
                        format!("expected {real_dim} entries, got {}", l.len()),
                    ));
                }
                for (i, &v) in l.iter().enumerate() {
                    positive(&format!("geometry.side_lengths[{i}]"), v)?;
                }
            }
            let lengths = geometry.side_lengths().unwrap_or_default();
            pcflow_core::toruslab::TorusGrid::new(real_dim, resolution, lengths)
                .map_err(|e| PcflowError::config("experiment.resolution", e))?;
        }
        GeometryConfig::RoundSphere2 { radius } => {
            positive("geometry.radius", *radius)?;
            check_lmax(resolution)?;
        }
        GeometryConfig::ShrinkingSphere { radius0, time_scale } => {
            positive("geometry.radius0", *radius0)?;
            positive("geometry.time_scale", *time_scale)?;
            check_lmax(resolution)?;
        }
    }
    Ok(())
}

fn check_lmax(lmax: usize) -> Result<()> {
    use pcflow_core::spherelab::SphereGrid;
    if (SphereGrid::MIN_LMAX..=SphereGrid::MAX_LMAX).contains(&lmax) {
        Ok(())
    } else {
        Err(PcflowError::config(
            "experiment.resolution",
            format!("L_max {lmax} outside {}..={}", SphereGrid::MIN_LMAX, SphereGrid::MAX_LMAX),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_of(text: &str) -> String {
        match parse_config(text).unwrap_err() {
            PcflowError::Config { path, .. } => path,
            other => panic!("{other}"),
        }
    }

    const MINIMAL: &str = r#"
[experiment]
id = "t"
resolution = 32
[geometry]
type = "flat_torus"
dim = 2
[initial]
preset = "single_mode"
"#;

    #[test]
    fn defaults_filled() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.band, 8);
        assert_eq!(c.dt, 1e-3);
        assert_eq!(c.steps, 0);
        assert_eq!(c.monitors, Monitor::ALL.to_vec());
        assert_eq!(c.geometry.side_lengths().unwrap(), vec![2.0 * PI; 2]);
    }

    #[test]
    fn band_above_quarter_resolution_names_band() {
        let text = MINIMAL.replace("resolution = 32", "resolution = 32\nband = 16");
        let err = parse_config(&text).unwrap_err();
        assert_eq!(path_of(&text), "experiment.band");
        assert!(err.to_string().contains("band"));
    }

    #[test]
    fn key_paths_in_errors() {
        assert_eq!(path_of(&MINIMAL.replace("id = \"t\"", "id = \"t\"\ncolour = 1")), "experiment.colour");
        assert_eq!(path_of(&MINIMAL.replace("resolution = 32", "resolution = \"x\"")), "experiment.resolution");
        assert_eq!(path_of(&MINIMAL.replace("preset = \"single_mode\"", "preset = \"single_mode\"\nk = \"a\"")), "initial.k");
        assert_eq!(path_of(&MINIMAL.replace("resolution = 32", "resolution = 24")), "experiment.resolution");
        assert_eq!(path_of(&MINIMAL.replace("resolution = 32", "resolution = 32\ndt = -1.0")), "experiment.dt");
        assert_eq!(path_of(&MINIMAL.replace("preset = \"single_mode\"", "preset = \"single_mode\"\nwidth = 2")), "initial.width");
        assert_eq!(path_of(&MINIMAL.replace("single_mode", "no_such")), "initial");
        assert_eq!(path_of(&format!("{MINIMAL}[monitors]\nnames = [\"min_sigma1\", \"bogus\"]")), "monitors.names[1]");
    }

    #[test]
    fn missing_required_key() {
        let err = parse_config(&MINIMAL.replace("id = \"t\"\n", "")).unwrap_err();
        assert!(err.to_string().contains("id"), "{err}");
    }

    #[test]
    fn random_preset_inherits_band_and_seed() {
        let text = MINIMAL
            .replace("preset = \"single_mode\"", "preset = \"random_bandlimited\"")
            .replace("resolution = 32", "resolution = 32\nseed = 9\nband = 4");
        let c = parse_config(&text).unwrap();
        assert_eq!(c.initial, InitialConfig::Torus(TorusPreset::RandomBandlimited { seed: 9, band: 4 }));
    }

    #[test]
    fn sphere_monitor_restrictions() {
        let text = r#"
[experiment]
id = "s"
resolution = 16
[geometry]
type = "round_sphere2"
[initial]
preset = "cos_theta"
[monitors]
names = ["min_H"]
"#;
        assert_eq!(path_of(text), "monitors.names[0]");
        let ok = parse_config(&text.replace("\"min_H\"", "\"min_sigma2\"")).unwrap();
        assert_eq!(ok.initial, InitialConfig::Sphere(SpherePreset::CosTheta { amplitude: 1.0 }));
    }

    #[test]
    fn shrinking_horizon_enforced() {
        let text = r#"
[experiment]
id = "k"
resolution = 16
dt = 0.01
steps = 30
[geometry]
type = "shrinking_sphere"
[initial]
preset = "cos_theta"
"#;
        assert_eq!(path_of(text), "experiment.steps");
        assert!(parse_config(&text.replace("steps = 30", "steps = 20")).is_ok());
    }
}
