use serde::{Deserialize, Serialize};

use super::{PipelineConfig, BUNDLE_VERSION};
use crate::error::{Error, Result};
use crate::learners::{ForestModel, GpModel, LinearModel, Standardizer, SvmModel};
use crate::schema::{CapacitanceFrame, NodeCoord, SingleContactSample, TERMINALS};

/// Stretch regressors. Contact bumps are local and cannot be cancelled by a
/// linear functional of the raw channels, so contact frames are regressed on
/// per-axis sorted channels (the bump lands in the upper order statistics)
/// while contact-free frames use the raw channels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StretchModel {
    pub rest: LinearModel,
    pub contact: LinearModel,
}

impl StretchModel {
    pub fn fit(samples: &[SingleContactSample]) -> Result<Self> {
        let (contact, rest): (Vec<&SingleContactSample>, Vec<&SingleContactSample>) =
            samples.iter().partition(|s| s.is_contact());
        let fit = |set: &[&SingleContactSample], sorted: bool| {
            let x: Vec<[f64; 20]> = set
                .iter()
                .map(|s| {
                    if sorted {
                        s.frame.sorted_features()
                    } else {
                        s.frame.features()
                    }
                })
                .collect();
            let y: Vec<f64> = set.iter().map(|s| s.stretch.value()).collect();
            LinearModel::fit(&x, &y)
        };
        Ok(Self {
            rest: fit(&rest, false)?,
            contact: fit(&contact, true)?,
        })
    }

    pub fn estimate(&self, frame: &CapacitanceFrame, contact: bool) -> f64 {
        let r = if contact {
            self.contact.predict_row(&frame.sorted_features())
        } else {
            self.rest.predict_row(&frame.features())
        };
        r.expect("stretch models are fitted on 20 features")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactEstimate {
    /// Unclamped stretch estimate; may fall slightly below 1.
    pub stretch: f64,
    pub contact_detected: bool,
    pub node: NodeCoord,
    pub force: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedPipeline {
    pub bundle_version: u32,
    pub preprocessing: Standardizer,
    pub stretch_model: StretchModel,
    pub detector: SvmModel,
    /// Classes 0..10 stand for y-terminals 1..=10.
    pub row_clf: ForestModel,
    /// Classes 0..10 stand for x-terminals 1..=10.
    pub col_clf: ForestModel,
    pub force_model: GpModel,
    pub config: PipelineConfig,
}

fn check_coverage(samples: &[SingleContactSample], full_grid: bool) -> Result<()> {
    let mut present = [false; 101];
    for s in samples {
        present[s.node.id() as usize] = true;
    }
    let mut missing = Vec::new();
    if !present[0] {
        missing.push("node 0 (no-contact samples)".to_string());
    }
    if !present[1..].iter().any(|p| *p) {
        missing.push("contact samples (nodes 1..=100)".to_string());
    } else if full_grid {
        missing.extend(
            NodeCoord::grid()
                .filter(|n| !present[n.id() as usize])
                .map(|n| n.to_string()),
        );
    }
    if missing.is_empty() {
        Ok(())
    } else {
        Err(Error::Coverage {
            fold: None,
            missing,
        })
    }
}

/// Trains the five models on one training split. Stretch and the detector
/// see every sample; the localisers and the force GP see contact samples
/// only. Standardisation statistics come from this split alone.
pub fn train_single(
    train: &[SingleContactSample],
    config: &PipelineConfig,
) -> Result<TrainedPipeline> {
    check_coverage(train, config.require_full_grid)?;
    let raw: Vec<[f64; 20]> = train.iter().map(|s| s.frame.features()).collect();
    let preprocessing = Standardizer::fit(&raw)?;
    let z = preprocessing.transform(&raw)?;

    let stretch_model = StretchModel::fit(train)?;
    let labels: Vec<i8> = train
        .iter()
        .map(|s| if s.is_contact() { 1 } else { -1 })
        .collect();
    let detector = SvmModel::fit(&z, &labels, &config.svm)?;

    let contact: Vec<usize> = (0..train.len())
        .filter(|&i| train[i].is_contact())
        .collect();
    let zc: Vec<&[f64]> = contact.iter().map(|&i| z[i].as_slice()).collect();
    let xs: Vec<usize> = contact
        .iter()
        .map(|&i| train[i].node.x() as usize - 1)
        .collect();
    let ys: Vec<usize> = contact
        .iter()
        .map(|&i| train[i].node.y() as usize - 1)
        .collect();
    let forces: Vec<f64> = contact.iter().map(|&i| train[i].force.newtons()).collect();
    let col_clf = ForestModel::fit(&zc, &xs, TERMINALS, &config.forest_with_seed(1))?;
    let row_clf = ForestModel::fit(&zc, &ys, TERMINALS, &config.forest_with_seed(2))?;
    let force_model = GpModel::fit(&zc, &forces, &config.gp, config.gp_seed(0))?;

    Ok(TrainedPipeline {
        bundle_version: BUNDLE_VERSION,
        preprocessing,
        stretch_model,
        detector,
        row_clf,
        col_clf,
        force_model,
        config: config.clone(),
    })
}

impl TrainedPipeline {
    pub fn standardize(&self, frame: &CapacitanceFrame) -> Vec<f64> {
        self.preprocessing
            .transform_row(&frame.features())
            .expect("standardiser is fitted on 20 features")
    }

    pub fn detect(&self, z: &[f64]) -> bool {
        self.detector.decision_row(z) >= 0.0
    }

    pub fn localise(&self, z: &[f64]) -> NodeCoord {
        let q = [z];
        let x = self.col_clf.predict(&q).expect("20 features").labels[0];
        let y = self.row_clf.predict(&q).expect("20 features").labels[0];
        NodeCoord::new(x as u8 + 1, y as u8 + 1).expect("classes map to terminals 1..=10")
    }

    /// GP force estimate, clamped at zero.
    pub fn estimate_force(&self, z: &[f64]) -> f64 {
        self.force_model.predict_mean(&[z]).expect("20 features")[0].max(0.0)
    }

    pub fn infer(&self, frame: &CapacitanceFrame) -> ContactEstimate {
        let z = self.standardize(frame);
        let detected = self.detect(&z);
        let stretch = self.stretch_model.estimate(frame, detected);
        if detected {
            ContactEstimate {
                stretch,
                contact_detected: true,
                node: self.localise(&z),
                force: self.estimate_force(&z),
            }
        } else {
            ContactEstimate {
                stretch,
                contact_detected: false,
                node: NodeCoord::NONE,
                force: 0.0,
            }
        }
    }
}
