//! Config file schema, loading, validation, and flag overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use dcee_core::{Scenario, Strategy};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

/// Top-level run/batch configuration. Unknown keys are rejected with a
/// path-precise error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub schema_version: u32,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    pub strategies: Vec<Strategy>,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    pub scenarios: Vec<Scenario>,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_repeats() -> usize {
    1
}

/// A configuration problem, reported with the JSON path of the offending
/// field. Maps to exit code 2.
#[derive(Debug)]
pub struct ConfigFailure {
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for ConfigFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error at `{}`: {}", self.path, self.message)
    }
}

impl std::error::Error for ConfigFailure {}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, ConfigFailure> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigFailure {
            path: path.display().to_string(),
            message: format!("cannot read config: {e}"),
        })?;
        let mut de = serde_json::Deserializer::from_str(&text);
        let cfg: ConfigFile = serde_path_to_error::deserialize(&mut de).map_err(|e| {
            ConfigFailure {
                path: e.path().to_string(),
                message: e.inner().to_string(),
            }
        })?;
        Ok(cfg)
    }

    /// Schema plus semantic validation of every scenario.
    pub fn validate(&self) -> Result<(), ConfigFailure> {
        if self.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(ConfigFailure {
                path: "schema_version".into(),
                message: format!(
                    "unsupported schema version {} (expected {CONFIG_SCHEMA_VERSION})",
                    self.schema_version
                ),
            });
        }
        if self.strategies.is_empty() {
            return Err(ConfigFailure {
                path: "strategies".into(),
                message: "at least one strategy is required".into(),
            });
        }
        if self.scenarios.is_empty() {
            return Err(ConfigFailure {
                path: "scenarios".into(),
                message: "at least one scenario is required".into(),
            });
        }
        if self.repeats < 1 {
            return Err(ConfigFailure {
                path: "repeats".into(),
                message: "must be at least 1".into(),
            });
        }
        for (i, sc) in self.scenarios.iter().enumerate() {
            sc.validate().map_err(|e| ConfigFailure {
                path: format!("scenarios[{i}].{}", e.field),
                message: e.message,
            })?;
        }
        Ok(())
    }
}

/// Command-line overrides; flags take precedence over file values.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub strategy: Option<Strategy>,
    pub repeats: Option<usize>,
    pub out: Option<PathBuf>,
    pub particles: Option<usize>,
    pub horizon: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ConfigFile) {
        if let Some(seed) = self.seed {
            cfg.base_seed = seed;
        }
        if let Some(strategy) = self.strategy {
            cfg.strategies = vec![strategy];
        }
        if let Some(repeats) = self.repeats {
            cfg.repeats = repeats;
        }
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        for sc in &mut cfg.scenarios {
            if let Some(particles) = self.particles {
                sc.particle_count = particles;
            }
            if let Some(horizon) = self.horizon {
                sc.planner.horizon = horizon;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "schema_version": 1,
        "strategies": ["mpc"],
        "scenarios": [{
            "name": "t",
            "ground_truth": {
                "source_pos": {"x": 20.0, "y": 20.0, "z": 1.0},
                "release_rate": 5.0, "wind_speed": 4.0, "wind_dir": 0.0,
                "diffusivity": 1.0, "particle_lifetime": 8.0
            },
            "bounds": {"x_range": [0.0, 50.0], "y_range": [0.0, 50.0], "z_range": [0.0, 8.0]},
            "start": {"x": 2.0, "y": 2.0, "z": 4.0},
            "prior": {
                "source_x": {"uniform": {"lo": 0.0, "hi": 50.0}},
                "source_y": {"uniform": {"lo": 0.0, "hi": 50.0}},
                "source_z": {"uniform": {"lo": 0.0, "hi": 8.0}},
                "release_rate": {"gamma": {"shape": 2.0, "scale": 5.0}},
                "wind_speed": {"fixed": 4.0},
                "wind_dir": {"fixed": 0.0},
                "diffusivity": {"fixed": 1.0},
                "particle_lifetime": {"fixed": 8.0}
            },
            "sensor": {
                "threshold": 5e-4, "detect_prob": 0.7,
                "noise_std_detect": {"proportional": {"coeff": 0.1, "offset": 2e-5}},
                "noise_std_nondetect": 1e-4
            },
            "particle_count": 100,
            "resample_threshold_ratio": 0.5,
            "planner": {
                "step_size": 2.0, "predictions_per_step": 40,
                "strategy": "dcee", "horizon": 1, "entropy_bins": 8
            },
            "step_budget": 10
        }]
    }"#;

    fn write_tmp(text: &str) -> tempfile::NamedTempFile {
        use std::io::Write;
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn minimal_config_loads_and_validates() {
        let f = write_tmp(MINIMAL);
        let cfg = ConfigFile::load(f.path()).unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.repeats, 1);
        assert_eq!(cfg.output_dir, PathBuf::from("out"));
    }

    #[test]
    fn unknown_key_error_names_the_path() {
        let bad = MINIMAL.replace("\"particle_count\": 100,", "\"particle_count\": 100, \"bogus_knob\": 3,");
        let f = write_tmp(&bad);
        let err = ConfigFile::load(f.path()).unwrap_err();
        assert!(err.path.contains("scenarios[0]"), "path: {}", err.path);
        assert!(err.message.contains("bogus_knob"), "message: {}", err.message);
    }

    #[test]
    fn semantic_errors_carry_field_paths() {
        let bad = MINIMAL.replace("\"x\": 2.0", "\"x\": -7.0");
        let f = write_tmp(&bad);
        let cfg = ConfigFile::load(f.path()).unwrap();
        let err = cfg.validate().unwrap_err();
        assert!(err.path.contains("scenarios[0].start"), "path: {}", err.path);
        assert!(err.message.contains("bounds"), "message: {}", err.message);
    }

    #[test]
    fn overrides_take_precedence() {
        let f = write_tmp(MINIMAL);
        let mut cfg = ConfigFile::load(f.path()).unwrap();
        let overrides = Overrides {
            seed: Some(9),
            strategy: Some(Strategy::Entrotaxis),
            repeats: Some(4),
            out: Some(PathBuf::from("elsewhere")),
            particles: Some(33),
            horizon: Some(2),
        };
        overrides.apply(&mut cfg);
        assert_eq!(cfg.base_seed, 9);
        assert_eq!(cfg.strategies, vec![Strategy::Entrotaxis]);
        assert_eq!(cfg.repeats, 4);
        assert_eq!(cfg.output_dir, PathBuf::from("elsewhere"));
        assert_eq!(cfg.scenarios[0].particle_count, 33);
        assert_eq!(cfg.scenarios[0].planner.horizon, 2);
    }
}
