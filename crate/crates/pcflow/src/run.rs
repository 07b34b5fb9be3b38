//! Executing one experiment and writing its artifacts.
//!
//! A run directory holds:
//!
//! - `monitors.csv`: header `t,min_sigma1,max_sigma1,min_sigma2,min_H,res_sigma1_sup,res_sigma2_sup,quotient_min`,
//!   one row per step, absent monitors as empty fields. A run stopped by a
//!   non-finite value ends with a marker row whose `t` field is `#truncated step=<k>`.
//! - `summary.json`: see [`RunSummary`].
//! - `adjudication.csv` on the shrinking sphere: `t,sup_r0,sup_r1,sigma1_sup,verdict`.
//! - `field_initial.*` and `field_final.*` snapshots when `snapshots = true`.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use pcflow_core::kahlerlab::{
    complex_torus_run_flow, shrinking_run_flow, shrinking_sigma1_adjudication, AdjudicationReport,
    ShrinkingSphereFlow,
};
use pcflow_core::monitor::{FlowAbort, Monitor, MonitorSeries};
use pcflow_core::spherelab::{self, sh_analyze, sphere_initial_data, sphere_run_flow, SphereField, SphereFlow, SphereGrid};
use pcflow_core::toruslab::{self, initial_data, run_flow, ScalarField, TorusFlow, TorusGrid};
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, GeometryConfig, InitialConfig};
use crate::error::{PcflowError, Result};
use crate::sweep::ConvergenceReport;

pub const SCHEMA_VERSION: u32 = 1;

pub const CSV_HEADER: [&str; 8] = [
    "t",
    "min_sigma1",
    "max_sigma1",
    "min_sigma2",
    "min_H",
    "res_sigma1_sup",
    "res_sigma2_sup",
    "quotient_min",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    Truncated,
}

/// Extrema of one monitor column; all `None` when nothing was recorded.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MonitorExtrema {
    pub samples: usize,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub first: Option<f64>,
    pub last: Option<f64>,
}

impl MonitorExtrema {
    fn of(values: &[f64]) -> Self {
        Self {
            samples: values.len(),
            min: values.iter().copied().reduce(f64::min),
            max: values.iter().copied().reduce(f64::max),
            first: values.first().copied(),
            last: values.last().copied(),
        }
    }
}

/// Contents of `summary.json`, schema version [`SCHEMA_VERSION`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub schema_version: u32,
    pub id: String,
    pub geometry: String,
    pub initial: String,
    pub resolution: usize,
    pub band: usize,
    pub dt: f64,
    pub steps: usize,
    pub seed: Option<u64>,
    pub status: RunStatus,
    pub error: Option<String>,
    /// Rows written to `monitors.csv`, not counting the header or a marker row.
    pub rows: usize,
    pub wall_time_s: f64,
    /// One entry per configured monitor.
    pub monitors: BTreeMap<String, MonitorExtrema>,
    /// Largest value over the run of every recorded residual.
    pub residual_sups: BTreeMap<String, f64>,
    pub convergence: Option<ConvergenceReport>,
    /// `trace_evolution` holds the shrinking-sphere verdict (`r0_zero`,
    /// `r1_zero`, `neither`, `both`, or `mixed` if steps disagree).
    pub verdicts: BTreeMap<String, String>,
    pub adjudication: Option<AdjudicationReport>,
}

impl RunSummary {
    pub fn new(config: &ExperimentConfig) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            id: config.id.clone(),
            geometry: config.geometry.name().into(),
            initial: config.initial.name().into(),
            resolution: config.resolution,
            band: config.band,
            dt: config.dt,
            steps: config.steps,
            seed: config.seed,
            status: RunStatus::Ok,
            error: None,
            rows: 0,
            wall_time_s: 0.0,
            monitors: config
                .monitors
                .iter()
                .map(|m| (m.column().to_string(), MonitorExtrema::default()))
                .collect(),
            residual_sups: BTreeMap::new(),
            convergence: None,
            verdicts: BTreeMap::new(),
            adjudication: None,
        }
    }

    fn record_series(&mut self, series: &MonitorSeries) {
        self.rows = series.len();
        for &m in &series.monitors {
            let col = series.column(m);
            if matches!(m, Monitor::ResSigma1Sup | Monitor::ResSigma2Sup) && !col.is_empty() {
                self.residual_sups
                    .insert(m.column().into(), col.iter().copied().fold(0.0, f64::max));
            }
            self.monitors.insert(m.column().into(), MonitorExtrema::of(&col));
        }
    }

    fn record_adjudication(&mut self, report: AdjudicationReport) {
        let verdict = report.verdict().map_or("mixed", |v| v.as_str());
        self.verdicts.insert("trace_evolution".into(), verdict.into());
        self.verdicts.insert(
            "trace_evolution_decisive".into(),
            report.all_decisive().to_string(),
        );
        let sup = |f: fn(&pcflow_core::kahlerlab::AdjudicationStep) -> f64| {
            report.steps.iter().map(f).fold(0.0, f64::max)
        };
        self.residual_sups.insert("sup_r0".into(), sup(|s| s.sup_r0));
        self.residual_sups.insert("sup_r1".into(), sup(|s| s.sup_r1));
        self.adjudication = Some(report);
    }
}

/// Initial data on the grid the config describes.
pub enum Prepared {
    Torus(ScalarField),
    ComplexTorus(ScalarField),
    Sphere(SphereField),
    Shrinking { u0: SphereField, time_scale: f64 },
}

/// Build the grid and initial data for `config` at `resolution`.
pub fn prepare_at(config: &ExperimentConfig, resolution: usize) -> Result<Prepared> {
    let initial_err = |e: pcflow_core::Error| PcflowError::config("initial", e);
    match (&config.geometry, &config.initial) {
        (GeometryConfig::FlatTorus { dim, .. } | GeometryConfig::FlatComplexTorus { m: dim, .. }, InitialConfig::Torus(p)) => {
            let complex = matches!(config.geometry, GeometryConfig::FlatComplexTorus { .. });
            let real_dim = if complex { 2 * dim } else { *dim };
            let lengths = config.geometry.side_lengths().unwrap_or_default();
            let grid = TorusGrid::new(real_dim, resolution, lengths)
                .map_err(|e| PcflowError::config("experiment.resolution", e))?;
            let f = initial_data(p, &grid).map_err(initial_err)?;
            Ok(if complex { Prepared::ComplexTorus(f) } else { Prepared::Torus(f) })
        }
        (GeometryConfig::RoundSphere2 { radius }, InitialConfig::Sphere(p)) => {
            let grid = sphere_grid(resolution, *radius)?;
            Ok(Prepared::Sphere(sphere_initial_data(p, &grid).map_err(initial_err)?))
        }
        (GeometryConfig::ShrinkingSphere { radius0, time_scale }, InitialConfig::Sphere(p)) => {
            let grid = sphere_grid(resolution, *radius0)?;
            Ok(Prepared::Shrinking {
                u0: sphere_initial_data(p, &grid).map_err(initial_err)?,
                time_scale: *time_scale,
            })
        }
        _ => Err(PcflowError::config("initial", "preset does not match the geometry")),
    }
}

fn sphere_grid(lmax: usize, radius: f64) -> Result<Arc<SphereGrid>> {
    SphereGrid::new(lmax, radius)
        .map(Arc::new)
        .map_err(|e| PcflowError::config("experiment.resolution", e))
}

impl Prepared {
    fn run(&self, dt: f64, steps: usize, monitors: &[Monitor]) -> std::result::Result<MonitorSeries, FlowAbort> {
        match self {
            Prepared::Torus(f) => run_flow(f, dt, steps, monitors),
            Prepared::ComplexTorus(f) => complex_torus_run_flow(f, dt, steps, monitors),
            Prepared::Sphere(u) => sphere_run_flow(u, dt, steps, monitors),
            Prepared::Shrinking { u0, time_scale } => shrinking_run_flow(u0, *time_scale, dt, steps, monitors),
        }
    }

    fn write_snapshots(&self, dir: &Path, t_final: f64) -> Result<()> {
        match self {
            Prepared::Torus(f) | Prepared::ComplexTorus(f) => {
                let last = TorusFlow::new(f).field_at(t_final)?;
                for (name, field, t) in [("initial", f, 0.0), ("final", &last, t_final)] {
                    toruslab::snapshot::write_binary(create(dir, &format!("field_{name}.bin"))?, field, t)?;
                    if field.grid().len() <= toruslab::snapshot::CSV_MAX_POINTS {
                        toruslab::snapshot::write_csv(create(dir, &format!("field_{name}.csv"))?, field)?;
                    }
                }
            }
            Prepared::Sphere(u) | Prepared::Shrinking { u0: u, .. } => {
                let last = match self {
                    Prepared::Shrinking { time_scale, .. } => ShrinkingSphereFlow::new(u, *time_scale)?.field_at(t_final)?,
                    _ => SphereFlow::new(u).field_at(t_final)?,
                };
                for (name, field, t) in [("initial", u, 0.0), ("final", &last, t_final)] {
                    spherelab::snapshot::write_binary(create(dir, &format!("field_{name}.bin"))?, field, t)?;
                    spherelab::snapshot::write_csv(create(dir, &format!("field_{name}.csv"))?, field)?;
                    spherelab::snapshot::write_spectrum_csv(
                        create(dir, &format!("spectrum_{name}.csv"))?,
                        &sh_analyze(field),
                    )?;
                }
            }
        }
        Ok(())
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

/// Where the run writes: `<root>/<output_dir or id>`.
pub fn run_dir(config: &ExperimentConfig, out_root: &Path) -> PathBuf {
    out_root.join(config.output_dir.clone().unwrap_or_else(|| PathBuf::from(&config.id)))
}

fn format_value(v: f64) -> String {
    format!("{v:e}")
}

/// Write the monitor table, with a marker row when `truncated_at` is set.
pub fn write_monitors_csv<W: Write>(w: W, series: &MonitorSeries, truncated_at: Option<usize>) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let csv_err = |e: csv::Error| PcflowError::runtime(e);
    out.write_record(CSV_HEADER).map_err(csv_err)?;
    for row in series.rows() {
        let mut rec = vec![format_value(row.t)];
        rec.extend(Monitor::ALL.iter().map(|&m| row.get(m).map(format_value).unwrap_or_default()));
        out.write_record(&rec).map_err(csv_err)?;
    }
    if let Some(step) = truncated_at {
        let mut rec = vec![format!("#truncated step={step}")];
        rec.extend(std::iter::repeat_n(String::new(), Monitor::ALL.len()));
        out.write_record(&rec).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_summary(dir: &Path, summary: &RunSummary) -> Result<()> {
    let mut w = create(dir, "summary.json")?;
    serde_json::to_writer_pretty(&mut w, summary).map_err(PcflowError::runtime)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn write_adjudication_csv(dir: &Path, report: &AdjudicationReport) -> Result<()> {
    let mut out = csv::Writer::from_writer(create(dir, "adjudication.csv")?);
    let csv_err = |e: csv::Error| PcflowError::runtime(e);
    out.write_record(["t", "sup_r0", "sup_r1", "sigma1_sup", "verdict"]).map_err(csv_err)?;
    for s in &report.steps {
        out.write_record([
            format_value(s.t),
            format_value(s.sup_r0),
            format_value(s.sup_r1),
            format_value(s.sigma1_sup),
            s.verdict.as_str().to_string(),
        ])
        .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// Result of a finished run.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub dir: PathBuf,
    pub summary: RunSummary,
    pub series: MonitorSeries,
}

/// Run `config`, writing artifacts below `out_root`. A non-finite value
/// still writes the partial table and summary before returning a runtime error.
pub fn run_experiment(config: &ExperimentConfig, out_root: &Path) -> Result<RunReport> {
    let start = Instant::now();
    let prepared = prepare_at(config, config.resolution)?;
    let dir = run_dir(config, out_root);
    std::fs::create_dir_all(&dir)?;
    let mut summary = RunSummary::new(config);

    let outcome = prepared.run(config.dt, config.steps, &config.monitors);
    let (series, abort) = match outcome {
        Ok(s) => (s, None),
        Err(a) => (a.partial.clone(), Some(a)),
    };
    write_monitors_csv(create(&dir, "monitors.csv")?, &series, abort.as_ref().map(|a| a.step))?;
    summary.record_series(&series);

    if let Some(a) = &abort {
        summary.status = RunStatus::Truncated;
        summary.error = Some(a.to_string());
        summary.wall_time_s = start.elapsed().as_secs_f64();
        write_summary(&dir, &summary)?;
        return Err(PcflowError::runtime(format!("{}: {a}", config.id)));
    }

    if let Prepared::Shrinking { u0, time_scale } = &prepared {
        if config.steps > 0 {
            let report = shrinking_sigma1_adjudication(u0, config.dt, config.steps, *time_scale)?;
            write_adjudication_csv(&dir, &report)?;
            summary.record_adjudication(report);
        }
    }
    if config.snapshots {
        prepared.write_snapshots(&dir, config.dt * config.steps as f64)?;
    }
    summary.wall_time_s = start.elapsed().as_secs_f64();
    write_summary(&dir, &summary)?;
    Ok(RunReport { dir, summary, series })
}

/// Read a `summary.json` back.
pub fn read_summary(path: &Path) -> Result<RunSummary> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(PcflowError::runtime)
}

#[cfg(test)]
mod tests {
    use super::*;
    use pcflow_core::monitor::MonitorRow;

    #[test]
    fn csv_layout_and_marker() {
        let mut s = MonitorSeries::new(vec![Monitor::MinSigma1]);
        let mut row = MonitorRow::new(0.5);
        row.set(Monitor::MinSigma1, -0.25);
        s.push(row).unwrap();
        let mut buf = Vec::new();
        write_monitors_csv(&mut buf, &s, Some(2)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER.join(","));
        assert_eq!(lines[1], "5e-1,-2.5e-1,,,,,,");
        assert_eq!(lines[2], "#truncated step=2,,,,,,,");
    }

    #[test]
    fn extrema_of_empty_column() {
        let e = MonitorExtrema::of(&[]);
        assert_eq!(e.samples, 0);
        assert_eq!(e.min, None);
        let e = MonitorExtrema::of(&[2.0, -1.0, 3.0]);
        assert_eq!((e.min, e.max, e.first, e.last), (Some(-1.0), Some(3.0), Some(2.0), Some(3.0)));
    }
}
