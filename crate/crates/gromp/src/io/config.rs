//! Experiment configuration: a flat `key=value` text format with `#`
//! comments. Unknown keys are rejected so typos fail loudly. Every key has a
//! default; a missing file section simply keeps it.

use std::path::Path;

use thiserror::Error;

use crate::bandit::{DEFAULT_EPSILON, DEFAULT_GAMMA, DEFAULT_TRIALS_PER_UPDATE};
use crate::sim::TaskOverrides;

use super::{content_lines, fmt_f64, parse_f64, parse_usize, IoError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid config: {0}")]
pub struct ConfigError(pub String);

/// Parameters of the interactive experiment protocol.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Task preset name.
    pub task: String,
    /// Demonstration counts per stage, strictly increasing.
    pub demo_stages: Vec<usize>,
    /// Trials per stage for each arm.
    pub trials_per_stage: usize,
    /// Independent replications, each with a fresh episode order.
    pub replications: usize,
    /// Bandit value-update step size.
    pub gamma: f64,
    /// Bandit exploration rate.
    pub epsilon: f64,
    /// Trials pooled per bandit update window.
    pub trials_per_update: usize,
    /// On-manifold coordinate noise while generating demonstrations.
    pub demo_noise_sigma: f64,
    /// Tangent noise per predicted pose of the surrogate policy.
    pub action_noise_sigma: f64,
    /// In-hand observation noise on the (y, z, theta) coordinates.
    pub obs_noise_sigma: f64,
    /// Neighbor count of the surrogate policy.
    pub knn: usize,
    /// Master seed from which all streams are derived.
    pub master_seed: u64,
    /// Default output directory for results (the CLI flag wins over this,
    /// and this wins over the GROMP_OUT_DIR environment variable).
    pub out_dir: Option<String>,
    /// Optional task-preset overrides.
    pub overrides: TaskOverrides,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            task: "peg".to_string(),
            demo_stages: vec![10, 20, 40, 60, 80, 100],
            trials_per_stage: 10,
            replications: 4,
            gamma: DEFAULT_GAMMA,
            epsilon: DEFAULT_EPSILON,
            trials_per_update: DEFAULT_TRIALS_PER_UPDATE,
            demo_noise_sigma: 0.002,
            action_noise_sigma: 0.0012,
            obs_noise_sigma: 0.0003,
            knn: 3,
            master_seed: 2025,
            out_dir: None,
            overrides: TaskOverrides::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.demo_stages.is_empty() {
            return Err(ConfigError("demo_stages must not be empty".into()));
        }
        if self.demo_stages[0] == 0 {
            return Err(ConfigError("demo stages must be at least 1".into()));
        }
        if !self.demo_stages.windows(2).all(|w| w[0] < w[1]) {
            return Err(ConfigError(
                "demo_stages must be strictly increasing".into(),
            ));
        }
        if self.trials_per_stage == 0 || self.replications == 0 {
            return Err(ConfigError("counts must be at least 1".into()));
        }
        if self.trials_per_update == 0 {
            return Err(ConfigError("trials_per_update must be at least 1".into()));
        }
        if self.knn == 0 {
            return Err(ConfigError("knn must be at least 1".into()));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(ConfigError("gamma must be in (0, 1]".into()));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(ConfigError("epsilon must be in [0, 1]".into()));
        }
        for (name, value) in [
            ("demo_noise_sigma", self.demo_noise_sigma),
            ("action_noise_sigma", self.action_noise_sigma),
            ("obs_noise_sigma", self.obs_noise_sigma),
        ] {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(ConfigError(format!("{name} must be finite and >= 0")));
            }
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<(), IoError> {
        let stages: Vec<String> = self.demo_stages.iter().map(|s| s.to_string()).collect();
        let mut out = String::new();
        out.push_str("# gromp experiment config\n");
        out.push_str(&format!("task={}\n", self.task));
        out.push_str(&format!("demo_stages={}\n", stages.join(",")));
        out.push_str(&format!("trials_per_stage={}\n", self.trials_per_stage));
        out.push_str(&format!("replications={}\n", self.replications));
        out.push_str(&format!("gamma={}\n", fmt_f64(self.gamma)));
        out.push_str(&format!("epsilon={}\n", fmt_f64(self.epsilon)));
        out.push_str(&format!("trials_per_update={}\n", self.trials_per_update));
        out.push_str(&format!(
            "demo_noise_sigma={}\n",
            fmt_f64(self.demo_noise_sigma)
        ));
        out.push_str(&format!(
            "action_noise_sigma={}\n",
            fmt_f64(self.action_noise_sigma)
        ));
        out.push_str(&format!(
            "obs_noise_sigma={}\n",
            fmt_f64(self.obs_noise_sigma)
        ));
        out.push_str(&format!("knn={}\n", self.knn));
        out.push_str(&format!("master_seed={}\n", self.master_seed));
        if let Some(dir) = &self.out_dir {
            out.push_str(&format!("out_dir={dir}\n"));
        }
        let o = &self.overrides;
        for (key, value) in [
            ("slip_gain", o.slip_gain),
            ("slip_noise_sigma", o.slip_noise_sigma),
            ("contact_threshold", o.contact_threshold),
            ("success_tol_translation", o.success_tol_translation),
            ("success_tol_rotation", o.success_tol_rotation),
            ("start_coord_sigma", o.start_coord_sigma),
            ("grasp_offset_sigma", o.grasp_offset_sigma),
            ("grasp_yaw_sigma", o.grasp_yaw_sigma),
        ] {
            if let Some(v) = value {
                out.push_str(&format!("{key}={}\n", fmt_f64(v)));
            }
        }
        if let Some(h) = o.horizon {
            out.push_str(&format!("horizon={h}\n"));
        }
        std::fs::write(path, out)?;
        Ok(())
    }

    /// Loads a config, applying file values over the defaults, then
    /// validates it.
    pub fn load(path: &Path) -> Result<Self, IoError> {
        let text = std::fs::read_to_string(path)?;
        let mut config = Self::default();
        for (line_no, line) in content_lines(&text) {
            let (key, value) = line.split_once('=').ok_or_else(|| {
                IoError::parse(line_no, format!("expected key=value, got {line:?}"))
            })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "task" => config.task = value.to_string(),
                "demo_stages" => {
                    config.demo_stages = value
                        .split(',')
                        .map(|tok| parse_usize(tok.trim(), line_no))
                        .collect::<Result<_, _>>()?;
                }
                "trials_per_stage" => config.trials_per_stage = parse_usize(value, line_no)?,
                "replications" => config.replications = parse_usize(value, line_no)?,
                "gamma" => config.gamma = parse_f64(value, line_no)?,
                "epsilon" => config.epsilon = parse_f64(value, line_no)?,
                "trials_per_update" => config.trials_per_update = parse_usize(value, line_no)?,
                "demo_noise_sigma" => config.demo_noise_sigma = parse_f64(value, line_no)?,
                "action_noise_sigma" => config.action_noise_sigma = parse_f64(value, line_no)?,
                "obs_noise_sigma" => config.obs_noise_sigma = parse_f64(value, line_no)?,
                "knn" => config.knn = parse_usize(value, line_no)?,
                "master_seed" => {
                    config.master_seed = value
                        .parse::<u64>()
                        .map_err(|_| IoError::parse(line_no, "master_seed must be a u64"))?;
                }
                "out_dir" => config.out_dir = Some(value.to_string()),
                "slip_gain" => config.overrides.slip_gain = Some(parse_f64(value, line_no)?),
                "slip_noise_sigma" => {
                    config.overrides.slip_noise_sigma = Some(parse_f64(value, line_no)?)
                }
                "contact_threshold" => {
                    config.overrides.contact_threshold = Some(parse_f64(value, line_no)?)
                }
                "success_tol_translation" => {
                    config.overrides.success_tol_translation = Some(parse_f64(value, line_no)?)
                }
                "success_tol_rotation" => {
                    config.overrides.success_tol_rotation = Some(parse_f64(value, line_no)?)
                }
                "start_coord_sigma" => {
                    config.overrides.start_coord_sigma = Some(parse_f64(value, line_no)?)
                }
                "grasp_offset_sigma" => {
                    config.overrides.grasp_offset_sigma = Some(parse_f64(value, line_no)?)
                }
                "grasp_yaw_sigma" => {
                    config.overrides.grasp_yaw_sigma = Some(parse_f64(value, line_no)?)
                }
                "horizon" => config.overrides.horizon = Some(parse_usize(value, line_no)?),
                other => {
                    return Err(IoError::parse(line_no, format!("unknown key {other:?}")));
                }
            }
        }
        config
            .validate()
            .map_err(|e| IoError::parse(0, e.to_string()))?;
        Ok(config)
    }
}
