//! Composition of the learners into the contact-decoupling estimators.
//!
//! Single contact: a detector SVM decides whether anything presses the skin;
//! stretch always comes from a linear model, contact location from one forest
//! per axis, force from a Gaussian process (only when a contact is
//! detected). Two contacts: four coordinate forests and two force GPs keyed
//! to node-id order.

mod single;
mod two;

pub use single::{train_single, ContactEstimate, StretchModel, TrainedPipeline};
pub use two::{train_two, TwoAxes, TwoContactEstimate, TwoContactModels};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::{ForestConfig, GpConfig, SvmConfig};
use crate::schema::CapacitanceFrame;

pub const BUNDLE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub svm: SvmConfig,
    /// Tree settings; the seed is replaced by one derived from `seed`.
    pub forest: ForestConfig,
    pub gp: GpConfig,
    /// Reject single-contact training sets that miss any of the 101 nodes.
    pub require_full_grid: bool,
    /// Node axes used as two-contact coordinate classes.
    pub two_axes: TwoAxes,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            svm: SvmConfig::default(),
            forest: ForestConfig::default(),
            gp: GpConfig::default(),
            require_full_grid: true,
            two_axes: TwoAxes::default(),
            seed: 4_242,
        }
    }
}

impl PipelineConfig {
    pub(crate) fn forest_with_seed(&self, stream: u64) -> ForestConfig {
        ForestConfig {
            seed: crate::seed::derive(self.seed, stream),
            ..self.forest.clone()
        }
    }

    pub(crate) fn gp_seed(&self, stream: u64) -> u64 {
        crate::seed::derive(self.seed, 100 + stream)
    }
}

/// A trained model of either mode, as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
#[allow(clippy::large_enum_variant)]
pub enum ModelBundle {
    Single(TrainedPipeline),
    Two(TwoContactModels),
}

impl ModelBundle {
    pub fn mode_name(&self) -> &'static str {
        match self {
            ModelBundle::Single(_) => "single",
            ModelBundle::Two(_) => "two",
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string(self).map_err(|e| Error::Serde(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let b: ModelBundle = serde_json::from_str(text).map_err(|e| Error::Serde(e.to_string()))?;
        let version = match &b {
            ModelBundle::Single(p) => p.bundle_version,
            ModelBundle::Two(m) => m.bundle_version,
        };
        if version != BUNDLE_VERSION {
            return Err(Error::Schema(format!(
                "model bundle version {version}, this build reads {BUNDLE_VERSION}"
            )));
        }
        Ok(b)
    }
}

pub fn infer_single(p: &TrainedPipeline, frame: &CapacitanceFrame) -> ContactEstimate {
    p.infer(frame)
}

pub fn infer_two(models: &TwoContactModels, frame: &CapacitanceFrame) -> TwoContactEstimate {
    models.infer(frame)
}
