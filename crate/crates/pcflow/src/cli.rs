//! Command-line interface.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rayon::prelude::*;

use crate::catalog::{self, CATALOG};
use crate::check::{self, CheckContext, CRITERIA};
use crate::config::{load_config, ExperimentConfig};
use crate::error::{PcflowError, Result};
use crate::run::run_experiment;
use crate::sweep::run_sweep;

pub const OUT_ENV: &str = "PCFLOW_OUT";
pub const DEFAULT_OUT: &str = "pcflow-out";

#[derive(Debug, Parser)]
#[command(name = "pcflow", version, about = "Run heat-flow convexity experiments")]
pub struct Cli {
    /// Output root (default: $PCFLOW_OUT, else ./pcflow-out).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed overriding the configs' seeds.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: logical cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one or more experiments; each argument is a config path or a catalog id.
    Run {
        #[arg(required = true)]
        configs: Vec<String>,
    },
    /// Re-evaluate identity residuals across resolutions.
    Sweep {
        config: String,
        /// Comma-separated, strictly increasing resolutions.
        #[arg(long, value_delimiter = ',', required = true)]
        res: Vec<usize>,
    },
    /// List catalog experiments and acceptance criteria.
    List,
    /// Run the acceptance suite.
    Check {
        /// Glob over criterion names, e.g. `c0[1-5]-*`.
        #[arg(long)]
        filter: Option<String>,
    },
}

/// `--out`, else `$PCFLOW_OUT`, else `./pcflow-out`.
pub fn output_root(flag: Option<&Path>) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn resolve_config(arg: &str, seed: Option<u64>) -> Result<ExperimentConfig> {
    let path = Path::new(arg);
    let config = if !path.exists() && catalog::find(arg).is_some() {
        catalog::load(arg)?
    } else {
        load_config(path)?
    };
    Ok(match seed {
        Some(s) => config.with_seed(s),
        None => config,
    })
}

pub fn execute(cli: Cli) -> Result<()> {
    if let Some(k) = cli.threads {
        if k == 0 {
            return Err(PcflowError::config("threads", "must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(PcflowError::runtime)?;
    }
    let out = output_root(cli.out.as_deref());
    match cli.command {
        Command::Run { configs } => {
            let configs = configs
                .iter()
                .map(|c| resolve_config(c, cli.seed))
                .collect::<Result<Vec<_>>>()?;
            for (i, c) in configs.iter().enumerate() {
                if configs[..i].iter().any(|o| o.id == c.id) {
                    return Err(PcflowError::config("experiment.id", format!("`{}` appears twice in the run set", c.id)));
                }
            }
            let results: Vec<Result<_>> = configs.par_iter().map(|c| run_experiment(c, &out)).collect();
            let mut first_err = None;
            for (c, r) in configs.iter().zip(results) {
                match r {
                    Ok(report) => println!("{}: {} rows -> {}", c.id, report.summary.rows, report.dir.display()),
                    Err(e) => {
                        eprintln!("{}: {e}", c.id);
                        first_err.get_or_insert(e);
                    }
                }
            }
            first_err.map_or(Ok(()), Err)
        }
        Command::Sweep { config, res } => {
            let config = resolve_config(&config, cli.seed)?;
            let (report, _) = run_sweep(&config, &res, &out)?;
            println!("{:<26} {}", "residual", "sups (ratios)");
            for r in &report.residuals {
                let sups: Vec<String> = r.sups.iter().map(|s| format!("{s:.2e}")).collect();
                let ratios: Vec<String> = r.ratios.iter().map(|s| format!("{s:.2e}")).collect();
                let flag = if r.non_decaying { "  NON-DECAYING" } else { "" };
                println!("{:<26} {} ({}){flag}", r.name, sups.join(" "), ratios.join(" "));
            }
            Ok(())
        }
        Command::List => {
            println!("catalog experiments:");
            for e in CATALOG {
                println!("  {:<20} {}", e.id, e.description);
            }
            println!("acceptance criteria:");
            for c in CRITERIA {
                println!("  {}", c.name);
            }
            Ok(())
        }
        Command::Check { filter } => {
            let ctx = CheckContext::new(&out, cli.seed.unwrap_or(0));
            let outcomes = check::run_check(&ctx, filter.as_deref())?;
            if outcomes.is_empty() {
                return Err(PcflowError::config("filter", "no criterion matches"));
            }
            check::report(&outcomes)
        }
    }
}
