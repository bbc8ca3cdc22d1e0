//! Experiment configuration: a small `[section] key = value` file format plus
//! the merged, validated [`ExperimentConfig`] the runners consume.
//!
//! Every file key can also be set from the command line; flags override the
//! file. The format is deliberately dependency-free and diff-friendly so a
//! config file doubles as the record of an experiment.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::samplers::SamplerKind;

/// Parsed `[section] key = value` text; values stay strings until merged.
#[derive(Debug, Default, Clone)]
pub struct RawConfig {
    sections: BTreeMap<String, BTreeMap<String, String>>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<RawConfig> {
        let mut cfg = RawConfig::default();
        let mut section = String::new();
        for (lineno, raw_line) in text.lines().enumerate() {
            let line = raw_line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| Error::Config(format!("line {}: unterminated section header", lineno + 1)))?;
                section = name.trim().to_string();
                cfg.sections.entry(section.clone()).or_default();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            cfg.sections
                .entry(section.clone())
                .or_default()
                .insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(cfg)
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.sections.get(section)?.get(key).map(|s| s.as_str())
    }

    pub fn section(&self, section: &str) -> Option<&BTreeMap<String, String>> {
        self.sections.get(section)
    }

    pub fn set(&mut self, section: &str, key: &str, value: String) {
        self.sections
            .entry(section.to_string())
            .or_default()
            .insert(key.to_string(), value);
    }
}

/// Comma-separated list of floats.
pub fn parse_f64_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Config(format!("invalid number `{}`", t.trim())))
        })
        .collect()
}

fn parse_methods(s: &str) -> Result<Vec<SamplerKind>> {
    s.split(',').map(|t| t.trim().parse()).collect()
}

/// `epsilons` default: 7 log-spaced points in `[1e-3, 1e-1]`.
pub fn default_epsilons() -> Vec<f64> {
    log_spaced(1e-3, 1e-1, 7)
}

/// `count` log-spaced points from `lo` to `hi` inclusive.
pub fn log_spaced(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && count >= 2);
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Fully merged and validated experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub model_name: String,
    /// Whether the model name was set explicitly (file or flag) rather than
    /// left at its default; dt-consistency uses this to reject nonlinear
    /// models without forbidding the default config.
    pub model_explicit: bool,
    pub model_params: ModelParams,
    pub methods: Vec<SamplerKind>,
    pub epsilons: Vec<f64>,
    /// Sample count per method, same length as `methods`.
    pub samples: Vec<usize>,
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Histogram: 1-based step index; defaults to the final step.
    pub step: Option<usize>,
    pub bins: usize,
    /// Crossings: list of start states for the scalar model.
    pub x0_list: Vec<f64>,
    /// dt-consistency: step sizes, linear-model coefficients, horizon.
    pub dts: Vec<f64>,
    pub alpha: f64,
    pub sigma: f64,
    pub obs_y: f64,
    pub obs_var: f64,
    pub horizon: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            model_name: "bm_unimodal".to_string(),
            model_explicit: false,
            model_params: ModelParams::new(),
            methods: vec![
                SamplerKind::Lm,
                SamplerKind::Slm,
                SamplerKind::Dlm,
                SamplerKind::Sdlm,
            ],
            epsilons: default_epsilons(),
            samples: vec![1200],
            seed: 1,
            out_dir: PathBuf::from("out"),
            step: None,
            bins: 50,
            x0_list: vec![1e-1, 1e-3, 1e-5],
            dts: vec![0.1, 0.05, 0.025, 0.0125, 0.00625],
            alpha: 0.0,
            sigma: 1.0,
            obs_y: 1.0,
            obs_var: 1.0,
            horizon: 1.0,
        }
    }
}

const MODEL_PARAM_KEYS: [&str; 7] = ["sigma", "alpha", "dt", "n_steps", "epsilon", "x0", "obs_y"];

impl ExperimentConfig {
    /// Build from parsed raw config; unset keys keep their defaults.
    pub fn from_raw(raw: &RawConfig) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        if let Some(v) = raw.get("experiment", "methods") {
            cfg.methods = parse_methods(v)?;
        }
        if let Some(v) = raw.get("experiment", "epsilons") {
            cfg.epsilons = parse_f64_list(v)?;
        }
        if let Some(v) = raw.get("experiment", "samples") {
            cfg.samples = v
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::Config(format!("invalid sample count `{}`", t.trim())))
                })
                .collect::<Result<_>>()?;
        }
        if let Some(v) = raw.get("experiment", "seed") {
            cfg.seed = v
                .parse()
                .map_err(|_| Error::Config(format!("invalid seed `{v}`")))?;
        }
        if let Some(v) = raw.get("experiment", "out") {
            cfg.out_dir = PathBuf::from(v);
        }
        if let Some(v) = raw.get("model", "name") {
            cfg.model_name = v.to_string();
            cfg.model_explicit = true;
        }
        if let Some(model) = raw.section("model") {
            for (key, value) in model {
                if key == "name" {
                    continue;
                }
                if !MODEL_PARAM_KEYS.contains(&key.as_str()) {
                    return Err(Error::Config(format!("unknown model key `{key}`")));
                }
                cfg.model_params.insert(key.clone(), parse_f64_list(value)?);
            }
        }
        if let Some(v) = raw.get("histogram", "step") {
            cfg.step = Some(
                v.parse()
                    .map_err(|_| Error::Config(format!("invalid step `{v}`")))?,
            );
        }
        if let Some(v) = raw.get("histogram", "bins") {
            cfg.bins = v
                .parse()
                .map_err(|_| Error::Config(format!("invalid bins `{v}`")))?;
        }
        if let Some(v) = raw.get("crossings", "x0_list") {
            cfg.x0_list = parse_f64_list(v)?;
        }
        let scalar = |key: &str| -> Result<Option<f64>> {
            match raw.get("dt_consistency", key) {
                None => Ok(None),
                Some(v) => v
                    .parse::<f64>()
                    .map(Some)
                    .map_err(|_| Error::Config(format!("invalid {key} `{v}`"))),
            }
        };
        cfg.alpha = scalar("alpha")?.unwrap_or(cfg.alpha);
        cfg.sigma = scalar("sigma")?.unwrap_or(cfg.sigma);
        cfg.obs_y = scalar("obs_y")?.unwrap_or(cfg.obs_y);
        cfg.obs_var = scalar("obs_var")?.unwrap_or(cfg.obs_var);
        cfg.horizon = scalar("horizon")?.unwrap_or(cfg.horizon);
        if let Some(v) = raw.get("dt_consistency", "dts") {
            cfg.dts = parse_f64_list(v)?;
        }
        Ok(cfg)
    }

    /// Validate the cross-field invariants.
    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::Config("methods list is empty".to_string()));
        }
        if self.epsilons.is_empty() {
            return Err(Error::Config("epsilons list is empty".to_string()));
        }
        if self.epsilons.iter().any(|e| !(*e > 0.0)) {
            return Err(Error::Config("epsilons must be positive".to_string()));
        }
        if self.samples.is_empty() || self.samples.iter().any(|m| *m == 0) {
            return Err(Error::Config("sample counts must be at least 1".to_string()));
        }
        if self.samples.len() != 1 && self.samples.len() != self.methods.len() {
            return Err(Error::Config(
                "samples must be a single count or one per method".to_string(),
            ));
        }
        if self.bins == 0 {
            return Err(Error::Config("bins must be at least 1".to_string()));
        }
        if self.dts.iter().any(|d| !(*d > 0.0)) || self.horizon <= 0.0 {
            return Err(Error::Config("dts and horizon must be positive".to_string()));
        }
        if self.obs_var <= 0.0 || self.sigma <= 0.0 {
            return Err(Error::Config("sigma and obs_var must be positive".to_string()));
        }
        Ok(())
    }

    /// Sample count for method index `i` (single counts broadcast).
    pub fn samples_for(&self, i: usize) -> usize {
        if self.samples.len() == 1 {
            self.samples[0]
        } else {
            self.samples[i]
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_sections_comments_and_whitespace() {
        let text = "\n# experiment record\n[experiment]\nmethods = lm, slm\nseed = 42\n\n[model]\nname = bm_bimodal\nx0 = 0.01\n";
        let raw = RawConfig::parse(text).unwrap();
        assert_eq!(raw.get("experiment", "methods"), Some("lm, slm"));
        assert_eq!(raw.get("model", "name"), Some("bm_bimodal"));
        let cfg = ExperimentConfig::from_raw(&raw).unwrap();
        assert_eq!(cfg.methods, vec![SamplerKind::Lm, SamplerKind::Slm]);
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.model_params.get("x0"), Some(&vec![0.01]));
        cfg.validate().unwrap();
    }

    #[test]
    fn rejects_malformed_lines_and_bad_values() {
        assert!(RawConfig::parse("[oops\n").is_err());
        assert!(RawConfig::parse("just a line\n").is_err());
        let raw = RawConfig::parse("[experiment]\nmethods = lm,warp\n").unwrap();
        assert!(ExperimentConfig::from_raw(&raw).is_err());
        let raw = RawConfig::parse("[model]\nwarp = 1\n").unwrap();
        assert!(ExperimentConfig::from_raw(&raw).is_err());
    }

    #[test]
    fn validation_catches_empty_and_nonpositive() {
        let mut cfg = ExperimentConfig::default();
        cfg.methods.clear();
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::default();
        cfg.epsilons = vec![0.1, -0.2];
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::default();
        cfg.samples = vec![0];
        assert!(cfg.validate().is_err());
        let mut cfg = ExperimentConfig::default();
        cfg.samples = vec![10, 20, 30];
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn default_epsilon_grid_is_log_spaced() {
        let eps = default_epsilons();
        assert_eq!(eps.len(), 7);
        assert!((eps[0] - 1e-3).abs() <= 1e-15);
        assert!((eps[6] - 1e-1).abs() <= 1e-15);
        let r0 = eps[1] / eps[0];
        for w in eps.windows(2) {
            assert!((w[1] / w[0] - r0).abs() <= 1e-12);
        }
    }
}
