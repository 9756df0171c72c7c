use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::ValueEnum;
use roadprof::metrics::StopRule;
use roadprof::probgen::{BatchParams, KTable};
use roadprof::superior::Perturbation;
use roadprof::{AlgorithmId, Family};
use serde::{Deserialize, Serialize};

use crate::UsageError;

pub const DEFAULT_TOML: &str = include_str!("../config/default.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum RunMode {
    /// plain feasibility algorithms
    Feas,
    /// superiorized feasibility algorithms
    Super,
    /// best-approximation algorithms
    Ba,
}

impl RunMode {
    pub fn family(self) -> Family {
        match self {
            RunMode::Feas => Family::Feasibility,
            RunMode::Super => Family::Superiorized,
            RunMode::Ba => Family::BestApprox,
        }
    }

    pub fn dir_name(self) -> &'static str {
        match self {
            RunMode::Feas => "feas",
            RunMode::Super => "super",
            RunMode::Ba => "ba",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StopConfig {
    pub eps: f64,
    pub k_max: usize,
}

impl Default for StopConfig {
    fn default() -> Self {
        let r = StopRule::default();
        StopConfig {
            eps: r.eps,
            k_max: r.k_max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BatchConfig {
    pub lengths: Vec<f64>,
    pub speeds: Vec<f64>,
    pub xi_max: Vec<f64>,
    pub sigma_max: f64,
    pub drainage_grade: f64,
    pub k_table: KTable,
}

impl Default for BatchConfig {
    fn default() -> Self {
        let p = BatchParams::nonconvex();
        BatchConfig {
            lengths: p.lengths,
            speeds: p.speeds,
            xi_max: p.xi_max,
            sigma_max: p.sigma_max,
            drainage_grade: p.drainage_grade.unwrap_or_default(),
            k_table: p.k_table,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HarnessConfig {
    pub count: usize,
    pub seed: u64,
    pub out: PathBuf,
    pub mode: RunMode,
    pub nonconvex: bool,
    pub algorithms: Vec<String>,
    /// worker threads; unset means one per core
    pub jobs: Option<usize>,
    pub perturbation: Perturbation,
    pub kappa_step: f64,
    pub stop: StopConfig,
    pub batch: BatchConfig,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig {
            count: 100,
            seed: 1,
            out: PathBuf::from("roadprof-out"),
            mode: RunMode::Feas,
            nonconvex: false,
            algorithms: Vec::new(),
            jobs: None,
            perturbation: Perturbation::default(),
            kappa_step: 0.1,
            stop: StopConfig::default(),
            batch: BatchConfig::default(),
        }
    }
}

impl HarnessConfig {
    pub fn from_toml(s: &str) -> anyhow::Result<Self> {
        toml::from_str(s).map_err(|e| UsageError(format!("bad config: {e}")).into())
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let s = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&s).with_context(|| format!("in {}", path.display()))
    }

    pub fn batch_params(&self) -> BatchParams {
        let b = &self.batch;
        BatchParams {
            lengths: b.lengths.clone(),
            speeds: b.speeds.clone(),
            xi_max: b.xi_max.clone(),
            sigma_max: b.sigma_max,
            drainage_grade: self.nonconvex.then_some(b.drainage_grade),
            k_table: b.k_table.clone(),
        }
    }

    pub fn stop_rule(&self) -> anyhow::Result<StopRule> {
        StopRule::new(self.stop.eps, self.stop.k_max).map_err(|e| UsageError(e.to_string()).into())
    }

    /// The configured algorithms, or every algorithm of the mode.
    pub fn algorithm_ids(&self) -> anyhow::Result<Vec<AlgorithmId>> {
        if self.algorithms.is_empty() {
            return Ok(AlgorithmId::of_family(self.mode.family()));
        }
        let mut ids = Vec::new();
        for a in &self.algorithms {
            let id: AlgorithmId = a.parse().map_err(|e: roadprof::Error| UsageError(e.to_string()))?;
            if id.family() != self.mode.family() {
                log::warn!("{id} does not belong to mode {:?}", self.mode);
            }
            if !ids.contains(&id) {
                ids.push(id);
            }
        }
        Ok(ids)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        if self.count == 0 {
            return Err(UsageError("count must be at least 1".into()).into());
        }
        if !(self.kappa_step > 0.0) {
            return Err(UsageError("kappa_step must be positive".into()).into());
        }
        self.stop_rule()?;
        self.algorithm_ids()?;
        Ok(())
    }

    pub fn problems_dir(&self) -> PathBuf {
        self.out.join("problems")
    }

    pub fn runs_file(&self) -> PathBuf {
        self.out.join("runs").join(self.mode.dir_name()).join("records.jsonl")
    }

    pub fn report_dir(&self) -> PathBuf {
        self.out.join("reports").join(self.mode.dir_name())
    }
}
