use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tactile_core::pipeline::{PipelineConfig, TwoAxes};
use tactile_core::sim::{SingleForceProtocol, SkinModel, TwoForceProtocol};

use crate::error::{CliError, CliResult};
use crate::Mode;

pub const DEFAULT_CONFIG: &str = "tactile.toml";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub k_single: usize,
    pub k_two: usize,
    pub seed: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            k_single: 10,
            k_two: 5,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub data_dir: PathBuf,
    pub models_dir: PathBuf,
    pub reports_dir: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Self {
            data_dir: "data".into(),
            models_dir: "models".into(),
            reports_dir: "reports".into(),
        }
    }
}

impl Paths {
    pub fn dataset(&self, mode: Mode) -> PathBuf {
        self.data_dir.join(format!("{}.csv", mode.name()))
    }

    pub fn model(&self, mode: Mode) -> PathBuf {
        self.models_dir.join(format!("{}.json", mode.name()))
    }

    pub fn reports(&self, mode: Mode) -> PathBuf {
        self.reports_dir.join(mode.name())
    }
}

/// Everything a run needs. Every field has a default; the defaults
/// reproduce the desk-scale evaluation.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub skin: SkinModel,
    pub single: SingleForceProtocol,
    pub two: TwoForceProtocol,
    /// Learner settings. The two-contact coordinate classes always follow
    /// the `two` protocol axes.
    pub pipeline: PipelineConfig,
    pub eval: EvalConfig,
    pub paths: Paths,
}

impl RunConfig {
    /// An explicit path must exist; without one, `tactile.toml` in the
    /// working directory is read when present.
    pub fn load(explicit: Option<&Path>) -> CliResult<Self> {
        let path = match explicit {
            Some(p) => p.to_path_buf(),
            None => {
                let p = PathBuf::from(DEFAULT_CONFIG);
                if !p.exists() {
                    return Ok(Self::default());
                }
                p
            }
        };
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn validate(&self) -> CliResult<()> {
        let wrap = |e: tactile_core::Error| CliError::Config(e.to_string());
        self.skin.validate().map_err(wrap)?;
        self.single.validate().map_err(wrap)?;
        self.two.validate().map_err(wrap)?;
        for (name, k) in [
            ("eval.k_single", self.eval.k_single),
            ("eval.k_two", self.eval.k_two),
        ] {
            if k < 2 {
                return Err(CliError::Config(format!(
                    "{name} must be at least 2, got {k}"
                )));
            }
        }
        Ok(())
    }

    pub fn pipeline(&self) -> PipelineConfig {
        PipelineConfig {
            two_axes: TwoAxes {
                x: self.two.x_axis.clone(),
                y: self.two.y_axis.clone(),
            },
            ..self.pipeline.clone()
        }
    }
}
