//! Experiment configuration files.
//!
//! Configs are TOML with one table per concern:
//!
//! ```toml
//! mode = "compare"          # simulate | analytic | compare
//! output = "fig1.csv"
//!
//! [channel]
//! diffusion = 8.0           # µm²/s
//! r0 = 11.0                 # µm
//! rr = 10.0                 # µm
//! k1 = 20.0                 # µm/s
//! km1 = 5.0                 # 1/s
//! ntx = 1000
//!
//! [sim]
//! dt = 1e-5
//! ts = 0.002
//! t_end = 0.1
//! trials = 100
//! seed = 1
//! emission = "shell"        # shell | point
//!
//! [quadrature]              # optional
//! rel_tol = 1e-8
//!
//! [sweep]                   # optional
//! parameter = "k1"
//! values = [2.0, 20.0, 40.0]
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use adrx_core::analytic::QuadratureSpec;
use adrx_core::simulator::Emission;
use adrx_core::{ChannelParams, SimConfig, ValidationError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_TRIALS: u32 = 100;
pub const DEFAULT_OUTPUT: &str = "adrx.csv";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed config {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("invalid {section}.{field}: {reason}")]
    Validation {
        section: &'static str,
        field: String,
        reason: String,
    },
}

impl ConfigError {
    fn invalid(section: &'static str, e: ValidationError) -> Self {
        Self::Validation {
            section,
            field: e.field.to_string(),
            reason: e.reason,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Simulate,
    Analytic,
    #[default]
    Compare,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Simulate => "simulate",
            Mode::Analytic => "analytic",
            Mode::Compare => "compare",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepParameter {
    K1,
    Km1,
}

impl fmt::Display for SweepParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepParameter::K1 => "k1",
            SweepParameter::Km1 => "km1",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

impl Sweep {
    pub fn apply(&self, base: ChannelParams, value: f64) -> ChannelParams {
        match self.parameter {
            SweepParameter::K1 => base.with_k1(value),
            SweepParameter::Km1 => base.with_km1(value),
        }
    }
}

/// A validated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub channel: ChannelParams,
    pub sim: SimConfig,
    pub quad: QuadratureSpec,
    pub emission: Emission,
    pub mode: Mode,
    pub sweep: Option<Sweep>,
    pub output_path: PathBuf,
}

/// Command-line replacements applied on top of a config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<u32>,
    pub mode: Option<Mode>,
    pub output_path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    pub diffusion: f64,
    pub r0: f64,
    pub rr: f64,
    pub k1: f64,
    pub km1: f64,
    pub ntx: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmissionKind {
    #[default]
    Shell,
    Point,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    pub dt: f64,
    pub ts: f64,
    pub t_end: f64,
    #[serde(default = "default_trials")]
    pub trials: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub emission: EmissionKind,
}

fn default_trials() -> u32 {
    DEFAULT_TRIALS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSection {
    pub w_max: Option<f64>,
    pub rel_tol: Option<f64>,
    pub max_panels: Option<usize>,
}

/// On-disk layout of a config. Also used to record the resolved config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub mode: Mode,
    pub output: Option<PathBuf>,
    pub channel: ChannelSection,
    pub sim: SimSection,
    pub quadrature: Option<QuadratureSection>,
    pub sweep: Option<Sweep>,
}

pub fn load_config(path: impl AsRef<Path>) -> Result<ExperimentConfig, ConfigError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text, path)
}

/// Parses config text; `origin` only labels errors.
pub fn parse_config(text: &str, origin: &Path) -> Result<ExperimentConfig, ConfigError> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| ConfigError::Parse {
        path: origin.to_path_buf(),
        message: e.to_string(),
    })?;
    ExperimentConfig::from_file(file)
}

impl ExperimentConfig {
    pub fn from_file(file: ConfigFile) -> Result<Self, ConfigError> {
        let c = &file.channel;
        let channel = ChannelParams::new(c.diffusion, c.r0, c.rr, c.k1, c.km1, c.ntx)
            .map_err(|e| ConfigError::invalid("channel", e))?;
        let s = &file.sim;
        let sim = SimConfig::new(s.dt, s.ts, s.t_end, s.trials, s.seed).map_err(|e| ConfigError::invalid("sim", e))?;

        let mut quad = QuadratureSpec::default();
        if let Some(q) = &file.quadrature {
            quad.w_max = q.w_max.unwrap_or(quad.w_max);
            quad.rel_tol = q.rel_tol.unwrap_or(quad.rel_tol);
            quad.max_panels = q.max_panels.unwrap_or(quad.max_panels);
        }
        quad.validate().map_err(|e| ConfigError::invalid("quadrature", e))?;

        if let Some(sweep) = &file.sweep {
            if sweep.values.is_empty() {
                return Err(ConfigError::Validation {
                    section: "sweep",
                    field: "values".into(),
                    reason: "at least one value required".into(),
                });
            }
            for &v in &sweep.values {
                sweep
                    .apply(channel, v)
                    .validate()
                    .map_err(|e| ConfigError::Validation {
                        section: "sweep",
                        field: "values".into(),
                        reason: format!("{} = {v}: {}", sweep.parameter, e.reason),
                    })?;
            }
        }

        Ok(Self {
            channel,
            sim,
            quad,
            emission: match s.emission {
                EmissionKind::Shell => Emission::Shell,
                EmissionKind::Point => Emission::Point,
            },
            mode: file.mode,
            sweep: file.sweep,
            output_path: file.output.unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT)),
        })
    }

    pub fn to_file(&self) -> ConfigFile {
        let c = &self.channel;
        ConfigFile {
            mode: self.mode,
            output: Some(self.output_path.clone()),
            channel: ChannelSection {
                diffusion: c.diffusion,
                r0: c.r0,
                rr: c.rr,
                k1: c.k1,
                km1: c.km1,
                ntx: c.ntx,
            },
            sim: SimSection {
                dt: self.sim.dt,
                ts: self.sim.ts,
                t_end: self.sim.t_end,
                trials: self.sim.trials,
                seed: self.sim.seed,
                emission: match self.emission {
                    Emission::Shell => EmissionKind::Shell,
                    Emission::Point => EmissionKind::Point,
                },
            },
            quadrature: Some(QuadratureSection {
                w_max: Some(self.quad.w_max),
                rel_tol: Some(self.quad.rel_tol),
                max_panels: Some(self.quad.max_panels),
            }),
            sweep: self.sweep.clone(),
        }
    }

    pub fn with_overrides(self, o: &Overrides) -> Result<Self, ConfigError> {
        let mut file = self.to_file();
        if let Some(seed) = o.seed {
            file.sim.seed = seed;
        }
        if let Some(trials) = o.trials {
            file.sim.trials = trials;
        }
        if let Some(mode) = o.mode {
            file.mode = mode;
        }
        if let Some(out) = &o.output_path {
            file.output = Some(out.clone());
        }
        Self::from_file(file)
    }

    /// Channel parameters for each sweep value, labelled `name=value`, or
    /// the base channel alone.
    pub fn sweep_points(&self) -> Vec<(Option<String>, ChannelParams)> {
        match &self.sweep {
            None => vec![(None, self.channel)],
            Some(s) => s
                .values
                .iter()
                .map(|&v| (Some(format!("{}={v}", s.parameter)), s.apply(self.channel, v)))
                .collect(),
        }
    }
}
