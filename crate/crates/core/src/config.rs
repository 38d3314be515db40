//! Model-config and results file formats.
//!
//! A model config is a JSON document holding a `draft` and a `target` model
//! plus an optional `run` section. Results are written either as JSON (full
//! run statistics with the resolved config echoed back) or as a flat CSV with
//! one row per position per replicate.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::autoregressive::{SequenceState, ToyModel};
use crate::error::{Error, Result};
use crate::specdec::{check_pair, RunStats, SpecDecodeConfig, DEFAULT_MAX_RESAMPLE_TRIALS};

pub const SCHEMA_VERSION: u32 = 1;

pub const CSV_HEADER: [&str; 6] = ["replicate", "position", "origin", "accepted", "log_ratio", "trials"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub gamma: usize,
    pub len: usize,
    pub rho: f64,
    pub temperature: f64,
    pub max_resample_trials: u32,
    pub seed: u64,
    pub replicates: u64,
    pub shared_noise: bool,
    pub sigma_term: bool,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            gamma: 4,
            len: 16,
            rho: 0.0,
            temperature: 1.0,
            max_resample_trials: DEFAULT_MAX_RESAMPLE_TRIALS,
            seed: 0,
            replicates: 1,
            shared_noise: true,
            sigma_term: true,
        }
    }
}

impl RunSection {
    pub fn decode_config(&self) -> SpecDecodeConfig {
        SpecDecodeConfig {
            gamma: self.gamma,
            len: self.len,
            rho: self.rho,
            temperature: self.temperature,
            max_resample_trials: self.max_resample_trials,
            seed: self.seed,
            shared_noise: self.shared_noise,
            sigma_term: self.sigma_term,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfigFile {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Token dimension `d`.
    pub dim: usize,
    /// Denoising step count `T`, shared by both models.
    pub steps: usize,
    pub draft: ToyModel,
    pub target: ToyModel,
    #[serde(default)]
    pub run: RunSection,
}

impl ModelConfigFile {
    pub fn new(name: &str, draft: ToyModel, target: ToyModel, run: RunSection) -> Result<Self> {
        let cfg = ModelConfigFile {
            schema_version: SCHEMA_VERSION,
            name: Some(name.to_string()),
            dim: target.dim(),
            steps: target.num_steps(),
            draft,
            target,
            run,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let cfg: ModelConfigFile = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("line {}, column {}: {e}", e.line(), e.column())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        for (role, m) in [("draft", &self.draft), ("target", &self.target)] {
            if m.num_steps() != self.steps {
                return Err(Error::Config(format!(
                    "{role}.denoiser.steps has {} entries but steps = {}",
                    m.num_steps(),
                    self.steps
                )));
            }
            if m.dim() != self.dim {
                return Err(Error::Config(format!(
                    "{role} has dimension {} but dim = {}",
                    m.dim(),
                    self.dim
                )));
            }
            m.backbone.validate(self.dim)?;
        }
        check_pair(&self.target, &self.draft)?;
        self.run
            .decode_config()
            .validate()
            .map_err(|e| Error::Config(format!("run: {e}")))
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// JSON results document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsFile {
    pub schema_version: u32,
    pub seed: u64,
    /// The fully resolved config; feeding it back reproduces the run.
    pub config: ModelConfigFile,
    pub runs: Vec<RunStats>,
    /// First coordinate of each token, per replicate.
    pub tokens: Vec<Vec<f64>>,
}

impl ResultsFile {
    pub fn new(config: ModelConfigFile, runs: &[(SequenceState, RunStats)]) -> Self {
        ResultsFile {
            schema_version: SCHEMA_VERSION,
            seed: config.run.seed,
            runs: runs.iter().map(|(_, s)| s.clone()).collect(),
            tokens: runs.iter().map(|(s, _)| s.first_coords()).collect(),
            config,
        }
    }

    pub fn write_json<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        serde_json::to_writer_pretty(&mut out, self)?;
        writeln!(out)
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// `replicate,position,origin,accepted,log_ratio,trials`; absent values are empty.
pub fn write_csv<W: Write>(runs: &[RunStats], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for run in runs {
        for rec in &run.positions {
            w.write_record([
                run.replicate.to_string(),
                rec.position.to_string(),
                rec.origin.as_str().to_string(),
                opt(rec.accepted().map(u8::from)),
                opt(rec.log_ratio),
                opt(rec.trials),
            ])?;
        }
    }
    w.flush()
}
