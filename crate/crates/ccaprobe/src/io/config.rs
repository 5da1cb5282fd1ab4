//! Run configuration: one JSON document drives the whole pipeline. Unknown
//! keys are rejected and the master seed is mandatory; everything else has a
//! default.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heads::{Metric, TrainHyper};
use crate::nets::SyntheticSpec;
use crate::projectors::Method;

/// Trainer hyperparameters as configured; seeds are derived from the master
/// seed at run time.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainerConfig {
    #[serde(default = "default_lr")]
    pub lr: f64,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_batch")]
    pub batch: usize,
    #[serde(default)]
    pub weight_decay: f64,
}

fn default_lr() -> f64 {
    0.1
}
fn default_epochs() -> usize {
    30
}
fn default_batch() -> usize {
    128
}

impl Default for TrainerConfig {
    fn default() -> Self {
        TrainerConfig {
            lr: default_lr(),
            epochs: default_epochs(),
            batch: default_batch(),
            weight_decay: 0.0,
        }
    }
}

impl TrainerConfig {
    pub fn hyper(&self, seed: u64) -> TrainHyper {
        TrainHyper {
            lr: self.lr,
            epochs: self.epochs,
            batch: self.batch,
            seed,
            weight_decay: self.weight_decay,
        }
    }
}

/// The experiment configuration document.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Master seed; every randomized step derives from it.
    pub seed: u64,
    #[serde(default)]
    pub dataset: SyntheticSpec,
    /// Hidden-layer widths of the per-sensor MLPs.
    #[serde(default = "default_hidden")]
    pub hidden: Vec<usize>,
    #[serde(default)]
    pub trainer: TrainerConfig,
    /// Head-retraining hyperparameters; falls back to `trainer` when unset.
    #[serde(default)]
    pub retrain: Option<TrainerConfig>,
    /// Reduction methods swept by the `curve` command.
    #[serde(default = "default_methods")]
    pub methods: Vec<Method>,
    /// Replaces the component schedule when set.
    #[serde(default)]
    pub schedule_override: Option<Vec<usize>>,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    /// Fresh same-sensor initializations used as CCA partners; defaults to
    /// `repeats`.
    #[serde(default)]
    pub partners: Option<usize>,
    #[serde(default = "default_metric")]
    pub metric: Metric,
    /// Cumulative variance kept by the CCA pre-step.
    #[serde(default = "default_variance_keep")]
    pub variance_keep: f64,
    /// Canonical pairs summed by the `fuse` command; defaults to the class
    /// count.
    #[serde(default)]
    pub fusion_k: Option<usize>,
}

fn default_hidden() -> Vec<usize> {
    vec![64]
}
fn default_methods() -> Vec<Method> {
    Method::ALL.to_vec()
}
fn default_repeats() -> usize {
    5
}
fn default_metric() -> Metric {
    Metric::Accuracy
}
fn default_variance_keep() -> f64 {
    crate::cca::DEFAULT_VARIANCE_KEEP
}

impl RunConfig {
    /// All-defaults configuration for a given master seed.
    pub fn with_seed(seed: u64) -> RunConfig {
        serde_json::from_value(serde_json::json!({ "seed": seed }))
            .expect("default config must deserialize")
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)?;
        let cfg: RunConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Config(e.to_string()))?;
        std::fs::write(path, text + "\n")?;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.dataset.validate().map_err(|e| match e {
            Error::InvalidArgument(msg) => Error::Config(format!("dataset: {msg}")),
            other => other,
        })?;
        if self.hidden.is_empty() || self.hidden.iter().any(|&h| h == 0) {
            return Err(Error::Config(
                "hidden must list at least one positive width".into(),
            ));
        }
        if self.repeats == 0 {
            return Err(Error::Config("repeats must be ≥ 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("methods must not be empty".into()));
        }
        if !(self.variance_keep > 0.0 && self.variance_keep <= 1.0) {
            return Err(Error::Config(format!(
                "variance_keep must lie in (0, 1], got {}",
                self.variance_keep
            )));
        }
        if let Some(schedule) = &self.schedule_override {
            if schedule.is_empty() || schedule.iter().any(|&v| v == 0) {
                return Err(Error::Config(
                    "schedule_override must list positive sizes".into(),
                ));
            }
        }
        if self.partners == Some(0) {
            return Err(Error::Config("partners must be ≥ 1 when set".into()));
        }
        Ok(())
    }

    /// Retraining configuration (falls back to the trainer's).
    pub fn retrain_config(&self) -> &TrainerConfig {
        self.retrain.as_ref().unwrap_or(&self.trainer)
    }

    /// Number of fresh partner initializations to train.
    pub fn partner_count(&self) -> usize {
        self.partners.unwrap_or(self.repeats)
    }

    /// Dataset spec with its seed derived from the master seed.
    pub fn dataset_with_seed(&self) -> SyntheticSpec {
        let mut spec = self.dataset.clone();
        spec.seed = crate::seed::derive(self.seed, &[crate::seed::tag("dataset")]);
        spec
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_defaults() {
        let cfg: RunConfig = serde_json::from_str(r#"{"seed": 7}"#).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.hidden, vec![64]);
        assert_eq!(cfg.repeats, 5);
        assert_eq!(cfg.methods.len(), 7);
        assert_eq!(cfg.variance_keep, 0.9999);
        assert_eq!(cfg.dataset.n_classes, 8);
    }

    #[test]
    fn master_seed_is_mandatory() {
        assert!(serde_json::from_str::<RunConfig>("{}").is_err());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = serde_json::from_str::<RunConfig>(r#"{"seed":1,"typo_field":3}"#);
        assert!(err.is_err());
        let nested = serde_json::from_str::<RunConfig>(r#"{"seed":1,"dataset":{"n_class":8}}"#);
        assert!(nested.is_err());
        // The dataset seed is derived from the master seed, not configured.
        let seeded = serde_json::from_str::<RunConfig>(r#"{"seed":1,"dataset":{"seed":2}}"#);
        assert!(seeded.is_err());
    }

    #[test]
    fn round_trip_through_file() {
        let dir = std::env::temp_dir().join("ccaprobe-config-tests");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("cfg.json");
        let mut cfg = RunConfig::with_seed(11);
        cfg.methods = vec![Method::CcaHighest, Method::PcaTop];
        cfg.schedule_override = Some(vec![2, 4, 8]);
        cfg.save(&path).unwrap();
        let back = RunConfig::load(&path).unwrap();
        assert_eq!(back.seed, 11);
        assert_eq!(back.methods, vec![Method::CcaHighest, Method::PcaTop]);
        assert_eq!(back.schedule_override, Some(vec![2, 4, 8]));
    }

    #[test]
    fn dataset_seed_derives_from_master() {
        let a = RunConfig::with_seed(5).dataset_with_seed();
        let b = RunConfig::with_seed(5).dataset_with_seed();
        let c = RunConfig::with_seed(6).dataset_with_seed();
        assert_eq!(a.seed, b.seed);
        assert_ne!(a.seed, c.seed);
    }
}
