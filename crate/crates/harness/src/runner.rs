//! Fans trials and analytic windows out over a thread pool and assembles
//! the results in index order.

use std::path::PathBuf;
use std::time::Instant;

use adrx_core::analytic::{expected_net_adsorbed, AnalyticError};
use adrx_core::simulator::{run_trial, ReceiverGeometry, SimError};
use adrx_core::{ChannelParams, SampleSeries};
use rayon::prelude::*;
use thiserror::Error;

use crate::config::{ExperimentConfig, Mode};
use crate::output::{meta_path, write_csv_with_footer, write_meta, NamedSeries, RunMetadata};
use crate::report::{ComparisonReport, TrialSummary};
use crate::HarnessError;

pub const THREADS_VAR: &str = "ADRX_THREADS";

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error(transparent)]
    Simulation(#[from] SimError),
    #[error("thread pool: {0}")]
    Pool(String),
}

/// Results for one channel of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    /// `name=value` for sweeps.
    pub label: Option<String>,
    pub channel: ChannelParams,
    pub analytic: Option<SampleSeries>,
    pub simulated: Option<TrialSummary>,
    pub report: Option<ComparisonReport>,
}

impl PointResult {
    fn column(&self, kind: &str) -> String {
        match &self.label {
            Some(l) => format!("{kind}_{l}"),
            None => kind.to_string(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentResults {
    pub points: Vec<PointResult>,
}

impl ExperimentResults {
    /// Output columns, grouped by sweep point.
    pub fn columns(&self) -> Vec<NamedSeries> {
        let mut out = Vec::new();
        for p in &self.points {
            if let Some(a) = &p.analytic {
                out.push(NamedSeries::new(p.column("analytic"), a.clone()));
            }
            if let Some(s) = &p.simulated {
                out.push(NamedSeries::new(p.column("mean"), s.mean.clone()));
                out.push(NamedSeries::new(p.column("stderr"), s.stderr.clone()));
            }
        }
        out
    }

    pub fn summary_lines(&self) -> Vec<String> {
        self.points
            .iter()
            .filter_map(|p| {
                p.report.as_ref().map(|r| match &p.label {
                    Some(l) => format!("{l}: {}", r.summary_line()),
                    None => r.summary_line(),
                })
            })
            .collect()
    }
}

/// A failed run with whatever sweep points completed before the error.
#[derive(Debug)]
pub struct RunFailure {
    pub partial: ExperimentResults,
    pub error: RunError,
}

/// Worker count: `ADRX_THREADS` if set to a positive integer, otherwise the
/// hardware concurrency.
pub fn threads_from_env() -> usize {
    let hardware = std::thread::available_parallelism().map_or(1, |n| n.get());
    match std::env::var(THREADS_VAR) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => n,
            _ => {
                log::warn!("ignoring {THREADS_VAR}={v:?}; using {hardware} threads");
                hardware
            }
        },
        Err(_) => hardware,
    }
}

fn analytic_series(channel: &ChannelParams, cfg: &ExperimentConfig) -> Result<SampleSeries, AnalyticError> {
    let grid = cfg.sim.window_starts();
    let values = grid
        .par_iter()
        .map(|&t| expected_net_adsorbed(t, channel, &cfg.sim, &cfg.quad))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SampleSeries::new(grid, cfg.sim.ts, values))
}

fn simulated_series(channel: &ChannelParams, cfg: &ExperimentConfig) -> Result<TrialSummary, SimError> {
    let geom = ReceiverGeometry::centered(channel);
    let trials = (0..u64::from(cfg.sim.trials))
        .into_par_iter()
        .map(|trial| run_trial(channel, &geom, &cfg.sim, cfg.emission, trial))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TrialSummary::from_trials(&trials))
}

fn run_point(label: Option<String>, channel: ChannelParams, cfg: &ExperimentConfig) -> Result<PointResult, RunError> {
    let analytic = match cfg.mode {
        Mode::Analytic | Mode::Compare => Some(analytic_series(&channel, cfg)?),
        Mode::Simulate => None,
    };
    let simulated = match cfg.mode {
        Mode::Simulate | Mode::Compare => Some(simulated_series(&channel, cfg)?),
        Mode::Analytic => None,
    };
    let report = match (&analytic, &simulated) {
        (Some(a), Some(s)) => Some(ComparisonReport::new(a, s)),
        _ => None,
    };
    Ok(PointResult {
        label,
        channel,
        analytic,
        simulated,
        report,
    })
}

/// Computes every sweep point on a pool of `threads` workers. Results do
/// not depend on `threads`.
pub fn execute(cfg: &ExperimentConfig, threads: usize) -> Result<ExperimentResults, RunFailure> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| RunFailure {
            partial: ExperimentResults::default(),
            error: RunError::Pool(e.to_string()),
        })?;
    pool.install(|| {
        let mut results = ExperimentResults::default();
        for (label, channel) in cfg.sweep_points() {
            match run_point(label, channel, cfg) {
                Ok(p) => results.points.push(p),
                Err(error) => {
                    return Err(RunFailure {
                        partial: results,
                        error,
                    })
                }
            }
        }
        Ok(results)
    })
}

#[derive(Debug)]
pub struct ExperimentOutput {
    pub results: ExperimentResults,
    pub csv_path: PathBuf,
    pub meta_path: PathBuf,
    pub runtime_seconds: f64,
}

/// Runs `cfg` and writes the CSV and its `.meta` sidecar. On failure the
/// completed sweep points are still written, followed by a failure marker.
pub fn run_experiment(cfg: &ExperimentConfig, threads: usize) -> Result<ExperimentOutput, HarnessError> {
    let started = Instant::now();
    let outcome = execute(cfg, threads);
    let runtime_seconds = started.elapsed().as_secs_f64();
    let (results, failure) = match outcome {
        Ok(r) => (r, None),
        Err(RunFailure { partial, error }) => (partial, Some(error)),
    };

    let csv_path = cfg.output_path.clone();
    let meta = meta_path(&csv_path);
    let marker = failure.as_ref().map(|e| e.to_string());
    write_csv_with_footer(&results.columns(), &csv_path, marker.as_deref())?;
    write_meta(
        &RunMetadata {
            version: crate::VERSION.to_string(),
            seed: cfg.sim.seed,
            threads,
            runtime_seconds,
            status: marker.map_or_else(|| "ok".to_string(), |m| format!("failed: {m}")),
            summary: results.summary_lines(),
            config: cfg.to_file(),
        },
        &meta,
    )?;

    match failure {
        Some(e) => Err(HarnessError::Run(e)),
        None => Ok(ExperimentOutput {
            results,
            csv_path,
            meta_path: meta,
            runtime_seconds,
        }),
    }
}
