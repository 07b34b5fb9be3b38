//! Identity residuals re-evaluated across resolutions.

use std::path::Path;
use std::time::Instant;

use pcflow_core::kahlerlab::{complex_hessian, kahler_sigma2_residual, ShrinkingSphereFlow};
use pcflow_core::spherelab::{
    commutation_residual, riemannian_sigma2_residual, sphere_sigma1_residual, CurvatureSign, SphereFlow,
};
use pcflow_core::toruslab::{laplacian, residual_sigma1, residual_sigma_k, TorusFlow};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{PcflowError, Result};
use crate::run::{prepare_at, run_dir, write_summary, Prepared, RunSummary};

/// Residuals at or below this are roundoff and never flagged.
pub const FLOOR: f64 = 1e-8;
/// A residual above the floor must at least halve between the two finest
/// resolutions.
pub const DECAY_RATIO: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualConvergence {
    pub name: String,
    /// Sup norm at each resolution.
    pub sups: Vec<f64>,
    /// `sups[i+1] / sups[i]` (`0` when `sups[i] = 0`).
    pub ratios: Vec<f64>,
    /// `−ln(ratio) / ln(N_{i+1}/N_i)` while both sups sit above the floor.
    pub orders: Vec<Option<f64>>,
    pub non_decaying: bool,
}

impl ResidualConvergence {
    fn new(name: String, resolutions: &[usize], sups: Vec<f64>) -> Self {
        let ratios: Vec<f64> = sups
            .windows(2)
            .map(|w| if w[0] > 0.0 { w[1] / w[0] } else { 0.0 })
            .collect();
        let orders = sups
            .windows(2)
            .zip(resolutions.windows(2))
            .map(|(s, n)| {
                (s[0] > FLOOR && s[1] > FLOOR).then(|| -(s[1] / s[0]).ln() / (n[1] as f64 / n[0] as f64).ln())
            })
            .collect();
        let finest = *sups.last().unwrap_or(&0.0);
        let last_ratio = *ratios.last().unwrap_or(&0.0);
        let non_decaying = finest > FLOOR && last_ratio > DECAY_RATIO;
        Self {
            name,
            sups,
            ratios,
            orders,
            non_decaying,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub resolutions: Vec<usize>,
    /// Flow time at which the residuals are evaluated.
    pub t: f64,
    pub floor: f64,
    pub residuals: Vec<ResidualConvergence>,
}

impl ConvergenceReport {
    pub fn any_non_decaying(&self) -> bool {
        self.residuals.iter().any(|r| r.non_decaying)
    }

    pub fn residual(&self, name: &str) -> Option<&ResidualConvergence> {
        self.residuals.iter().find(|r| r.name == name)
    }
}

fn check_resolutions(config: &ExperimentConfig, resolutions: &[usize]) -> Result<()> {
    if resolutions.len() < 3 {
        return Err(PcflowError::config(
            "res",
            format!("a sweep needs at least 3 resolutions, got {}", resolutions.len()),
        ));
    }
    if resolutions.windows(2).any(|w| w[1] <= w[0]) {
        return Err(PcflowError::config("res", "resolutions must be strictly increasing"));
    }
    let coarsest = resolutions[0];
    if 4 * config.band > coarsest {
        return Err(PcflowError::config(
            "experiment.band",
            format!("band {} exceeds resolution/4 = {} at the coarsest resolution", config.band, coarsest / 4),
        ));
    }
    Ok(())
}

/// Named identity residual sups of the data propagated to `t`.
fn residuals_at(config: &ExperimentConfig, prepared: &Prepared, t: f64) -> Result<Vec<(String, f64)>> {
    let mut out = Vec::new();
    match prepared {
        Prepared::Torus(f) => {
            let u = TorusFlow::new(f).field_at(t)?;
            out.push(("res_sigma1".into(), residual_sigma1(&u)?.sup()));
            for k in 2..=u.grid().dim() {
                out.push((format!("res_sigma{k}"), residual_sigma_k(&u, k)?.sup()));
            }
        }
        Prepared::ComplexTorus(f) => {
            let u = TorusFlow::new(f).field_at(t)?;
            let (tr, _) = complex_hessian(&u)?.trace();
            out.push(("trace_quarter_laplacian".into(), tr.sup_distance(&laplacian(&u).map(|v| 0.25 * v))));
            if u.grid().dim() == 4 {
                out.push(("res_kahler_sigma2".into(), kahler_sigma2_residual(&u)?.sup()));
            }
        }
        Prepared::Sphere(u0) => {
            let u = SphereFlow::new(u0).field_at(t)?;
            let sign = if config.debug_flip_curvature {
                CurvatureSign::Flipped
            } else {
                CurvatureSign::Correct
            };
            out.push(("res_commutation".into(), commutation_residual(&u, sign)?.residual.sup()));
            out.push(("res_sigma1".into(), sphere_sigma1_residual(&u)?.sup()));
            out.push(("res_sigma2".into(), riemannian_sigma2_residual(&u)?.residual.sup()));
        }
        Prepared::Shrinking { u0, time_scale } => {
            let flow = ShrinkingSphereFlow::new(u0, *time_scale)?;
            let step = flow.adjudicate_at(t.max(config.dt))?;
            out.push(("sup_r1".into(), step.sup_r1));
        }
    }
    Ok(out)
}

/// Evaluate every identity residual of `config` at each resolution, at the
/// final time `dt · steps`.
pub fn sweep(config: &ExperimentConfig, resolutions: &[usize]) -> Result<ConvergenceReport> {
    check_resolutions(config, resolutions)?;
    let t = config.dt * config.steps as f64;
    let per_res = resolutions
        .par_iter()
        .map(|&n| {
            let prepared = prepare_at(config, n)?;
            residuals_at(config, &prepared, t)
        })
        .collect::<Result<Vec<_>>>()?;
    let names: Vec<String> = per_res[0].iter().map(|(n, _)| n.clone()).collect();
    let residuals = names
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let sups = per_res.iter().map(|r| r[i].1).collect();
            ResidualConvergence::new(name.clone(), resolutions, sups)
        })
        .collect();
    Ok(ConvergenceReport {
        resolutions: resolutions.to_vec(),
        t,
        floor: FLOOR,
        residuals,
    })
}

/// Run a sweep and write `sweep.csv` and `summary.json` (whose monitor
/// entries stay empty, since a sweep records no time series).
pub fn run_sweep(config: &ExperimentConfig, resolutions: &[usize], out_root: &Path) -> Result<(ConvergenceReport, RunSummary)> {
    let start = Instant::now();
    let report = sweep(config, resolutions)?;
    let dir = run_dir(config, out_root);
    std::fs::create_dir_all(&dir)?;
    let mut w = csv::Writer::from_path(dir.join("sweep.csv")).map_err(PcflowError::runtime)?;
    w.write_record(["residual", "resolution", "sup", "ratio", "order", "non_decaying"])
        .map_err(PcflowError::runtime)?;
    for r in &report.residuals {
        for (i, (&n, &s)) in report.resolutions.iter().zip(&r.sups).enumerate() {
            let ratio = if i == 0 { String::new() } else { format!("{:e}", r.ratios[i - 1]) };
            let order = if i == 0 {
                String::new()
            } else {
                r.orders[i - 1].map(|o| format!("{o:e}")).unwrap_or_default()
            };
            w.write_record([
                r.name.clone(),
                n.to_string(),
                format!("{s:e}"),
                ratio,
                order,
                r.non_decaying.to_string(),
            ])
            .map_err(PcflowError::runtime)?;
        }
    }
    w.flush()?;
    let mut summary = RunSummary::new(config);
    summary.steps = config.steps;
    for r in &report.residuals {
        summary.residual_sups.insert(r.name.clone(), r.sups.iter().copied().fold(0.0, f64::max));
    }
    summary.convergence = Some(report.clone());
    summary.wall_time_s = start.elapsed().as_secs_f64();
    write_summary(&dir, &summary)?;
    Ok((report, summary))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flag_rules() {
        let res = [16, 32, 64];
        assert!(!ResidualConvergence::new("a".into(), &res, vec![1e-3, 1e-6, 1e-9]).non_decaying);
        assert!(ResidualConvergence::new("b".into(), &res, vec![1.0, 0.9, 0.95]).non_decaying);
        assert!(!ResidualConvergence::new("c".into(), &res, vec![1e-12, 3e-12, 2e-12]).non_decaying);
        let r = ResidualConvergence::new("d".into(), &res, vec![1e-2, 2.5e-3, 0.0]);
        assert_eq!(r.ratios, vec![0.25, 0.0]);
        assert!((r.orders[0].unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(r.orders[1], None);
    }
}
