//! Run configuration: one TOML (or JSON) file, overridable from the command
//! line.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{DEFAULT_THRESHOLD, DEFAULT_TOP_N};
use crate::random::RNG_ALGORITHM;
use crate::sampler::{
    default_alpha, Hyperparameters, DEFAULT_BETA, DEFAULT_BURN_IN, DEFAULT_SAVED_SAMPLES, DEFAULT_THINNING,
};
use crate::synth::GeneratorConfig;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Table,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table" => Ok(OutputFormat::Table),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!("unknown format {other:?}, expected json or table"))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub events: Option<PathBuf>,
    pub labels: Option<PathBuf>,
    pub model: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VocabularySettings {
    pub coverage: f64,
}

impl Default for VocabularySettings {
    fn default() -> Self {
        Self { coverage: 0.8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerSettings {
    pub topics: usize,
    /// Defaults to 50 / topics.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub burn_in_sweeps: usize,
    pub n_saved_samples: usize,
    pub thinning_interval: usize,
    pub seed: u64,
    pub rng: String,
    /// Log-likelihood is traced every this many sweeps; 0 disables the trace.
    pub trace_every: usize,
    /// Independent chains, seeded `seed`, `seed + 1`, ...
    pub chains: usize,
}

impl Default for SamplerSettings {
    fn default() -> Self {
        Self {
            topics: 20,
            alpha: None,
            beta: DEFAULT_BETA,
            burn_in_sweeps: DEFAULT_BURN_IN,
            n_saved_samples: DEFAULT_SAVED_SAMPLES,
            thinning_interval: DEFAULT_THINNING,
            seed: 0,
            rng: RNG_ALGORITHM.to_owned(),
            trace_every: 10,
            chains: 1,
        }
    }
}

impl SamplerSettings {
    pub fn hyperparameters(&self) -> Hyperparameters {
        Hyperparameters {
            topics: self.topics,
            alpha: self.alpha.unwrap_or_else(|| default_alpha(self.topics)),
            beta: self.beta,
            burn_in_sweeps: self.burn_in_sweeps,
            n_saved_samples: self.n_saved_samples,
            thinning_interval: self.thinning_interval,
            seed: self.seed,
            rng: self.rng.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSettings {
    pub threshold: f64,
    pub top_n: usize,
}

impl Default for EvalSettings {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
            top_n: DEFAULT_TOP_N,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSettings {
    pub format: OutputFormat,
    /// Write the D×K patient-topic matrix into model files.
    pub include_theta: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub paths: Paths,
    pub vocabulary: VocabularySettings,
    pub sampler: SamplerSettings,
    pub eval: EvalSettings,
    pub synth: GeneratorConfig,
    pub output: OutputSettings,
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Loads a `.json` or TOML config. Relative paths inside it are resolved
    /// against the config file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let is_json = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let mut cfg = if is_json {
            Self::from_json_str(&text)?
        } else {
            Self::from_toml_str(&text)?
        };
        if let Some(dir) = path.parent() {
            cfg.paths.rebase(dir);
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let c = self.vocabulary.coverage;
        if !(c > 0.0 && c <= 1.0) {
            return Err(Error::InvalidCoverage(c));
        }
        if self.sampler.chains == 0 {
            return Err(Error::Config("sampler.chains must be at least 1".into()));
        }
        self.sampler.hyperparameters().validate()
    }
}

impl Paths {
    fn rebase(&mut self, dir: &Path) {
        for p in [&mut self.events, &mut self.labels, &mut self.model, &mut self.out]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_uses_library_defaults() {
        let cfg = RunConfig::from_toml_str("").unwrap();
        let h = cfg.sampler.hyperparameters();
        assert_eq!(h, Hyperparameters::new(20));
        assert_eq!(cfg.vocabulary.coverage, 0.8);
        assert_eq!(cfg.eval.threshold, 0.01);
        assert_eq!(cfg.output.format, OutputFormat::Table);
        cfg.validate().unwrap();
    }

    #[test]
    fn partial_sections_merge_with_defaults() {
        let cfg = RunConfig::from_toml_str(
            "[sampler]\ntopics = 5\nburn_in_sweeps = 200\n[synth]\ndocuments = 10\n[output]\nformat = \"json\"\n",
        )
        .unwrap();
        assert_eq!(cfg.sampler.topics, 5);
        assert_eq!(cfg.sampler.hyperparameters().alpha, 10.0);
        assert_eq!(cfg.sampler.thinning_interval, 100);
        assert_eq!(cfg.synth.documents, 10);
        assert_eq!(cfg.synth.codes, 50);
        assert_eq!(cfg.output.format, OutputFormat::Json);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_toml_str("[sampler]\ntopicz = 5\n").is_err());
        assert!(RunConfig::from_toml_str("bogus = 1\n").is_err());
        assert!(RunConfig::from_json_str("{\"eval\": {\"top\": 3}}").is_err());
    }

    #[test]
    fn validation() {
        let mut cfg = RunConfig::default();
        cfg.vocabulary.coverage = 0.0;
        assert!(cfg.validate().is_err());
        let mut cfg = RunConfig::default();
        cfg.sampler.thinning_interval = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn relative_paths_follow_the_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "[paths]\nevents = \"data/events.csv\"\nlabels = \"/abs/labels.csv\"\n").unwrap();
        let cfg = RunConfig::load(&path).unwrap();
        assert_eq!(cfg.paths.events.unwrap(), dir.path().join("data/events.csv"));
        assert_eq!(cfg.paths.labels.unwrap(), PathBuf::from("/abs/labels.csv"));
    }
}
