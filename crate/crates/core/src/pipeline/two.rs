use serde::{Deserialize, Serialize};

use super::{PipelineConfig, BUNDLE_VERSION};
use crate::error::{Error, Result};
use crate::learners::{ForestModel, GpModel, Standardizer};
use crate::schema::{CapacitanceFrame, NodeCoord, TwoContactSample};

/// Terminal values the two-contact coordinate classifiers choose from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TwoAxes {
    pub x: Vec<u8>,
    pub y: Vec<u8>,
}

impl Default for TwoAxes {
    fn default() -> Self {
        Self {
            x: vec![1, 6, 10],
            y: vec![1, 6, 10],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoContactEstimate {
    /// At most two contacts, sorted by node id.
    pub contacts: Vec<(NodeCoord, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoContactModels {
    pub bundle_version: u32,
    pub preprocessing: Standardizer,
    pub axes: TwoAxes,
    pub x1: ForestModel,
    pub y1: ForestModel,
    pub x2: ForestModel,
    pub y2: ForestModel,
    pub force1: GpModel,
    pub force2: GpModel,
    pub config: PipelineConfig,
}

fn class_of(axis: &[u8], v: u8, what: &str) -> Result<usize> {
    axis.iter().position(|a| *a == v).ok_or_else(|| {
        Error::Validation(format!("{what}={v} is not one of the node axes {axis:?}"))
    })
}

/// Trains the coordinate forests and force GPs. Every axis value must occur
/// in each of the four coordinates of the training split.
pub fn train_two(train: &[TwoContactSample], config: &PipelineConfig) -> Result<TwoContactModels> {
    if train.is_empty() {
        return Err(Error::Coverage {
            fold: None,
            missing: vec!["all samples (dataset is empty)".into()],
        });
    }
    let axes = &config.two_axes;
    let mut labels: [Vec<usize>; 4] = Default::default();
    for s in train {
        labels[0].push(class_of(&axes.x, s.node1.x(), "x1")?);
        labels[1].push(class_of(&axes.y, s.node1.y(), "y1")?);
        labels[2].push(class_of(&axes.x, s.node2.x(), "x2")?);
        labels[3].push(class_of(&axes.y, s.node2.y(), "y2")?);
    }
    let mut missing = Vec::new();
    for (k, name) in ["x1", "y1", "x2", "y2"].iter().enumerate() {
        let axis = if k.is_multiple_of(2) { &axes.x } else { &axes.y };
        for (c, v) in axis.iter().enumerate() {
            if !labels[k].contains(&c) {
                missing.push(format!("{name}={v}"));
            }
        }
    }
    if !missing.is_empty() {
        return Err(Error::Coverage {
            fold: None,
            missing,
        });
    }

    let raw: Vec<[f64; 20]> = train.iter().map(|s| s.frame.features()).collect();
    let preprocessing = Standardizer::fit(&raw)?;
    let z = preprocessing.transform(&raw)?;
    let forest = |k: usize| {
        let n = if k.is_multiple_of(2) {
            axes.x.len()
        } else {
            axes.y.len()
        };
        ForestModel::fit(&z, &labels[k], n, &config.forest_with_seed(10 + k as u64))
    };
    let f1: Vec<f64> = train.iter().map(|s| s.force1.newtons()).collect();
    let f2: Vec<f64> = train.iter().map(|s| s.force2.newtons()).collect();
    Ok(TwoContactModels {
        bundle_version: BUNDLE_VERSION,
        x1: forest(0)?,
        y1: forest(1)?,
        x2: forest(2)?,
        y2: forest(3)?,
        force1: GpModel::fit(&z, &f1, &config.gp, config.gp_seed(1))?,
        force2: GpModel::fit(&z, &f2, &config.gp, config.gp_seed(2))?,
        preprocessing,
        axes: axes.clone(),
        config: config.clone(),
    })
}

impl TwoContactModels {
    pub fn standardize(&self, frame: &CapacitanceFrame) -> Vec<f64> {
        self.preprocessing
            .transform_row(&frame.features())
            .expect("standardiser is fitted on 20 features")
    }

    /// Raw (x1, y1, x2, y2) terminal predictions, before ordering.
    pub fn coordinates(&self, z: &[f64]) -> [u8; 4] {
        let q = [z];
        let pick =
            |m: &ForestModel, axis: &[u8]| axis[m.predict(&q).expect("20 features").labels[0]];
        [
            pick(&self.x1, &self.axes.x),
            pick(&self.y1, &self.axes.y),
            pick(&self.x2, &self.axes.x),
            pick(&self.y2, &self.axes.y),
        ]
    }

    /// (force1, force2), each clamped at zero.
    pub fn forces(&self, z: &[f64]) -> (f64, f64) {
        let q = [z];
        (
            self.force1.predict_mean(&q).expect("20 features")[0].max(0.0),
            self.force2.predict_mean(&q).expect("20 features")[0].max(0.0),
        )
    }

    /// Contacts in node-id order. If both coordinate pairs name the same
    /// node, a single contact carrying the summed force is returned.
    pub fn infer(&self, frame: &CapacitanceFrame) -> TwoContactEstimate {
        let z = self.standardize(frame);
        let [x1, y1, x2, y2] = self.coordinates(&z);
        let (f1, f2) = self.forces(&z);
        let a = NodeCoord::new(x1, y1).expect("axes hold terminals 1..=10");
        let b = NodeCoord::new(x2, y2).expect("axes hold terminals 1..=10");
        let mut contacts = if a == b {
            vec![(a, f1 + f2)]
        } else {
            vec![(a, f1), (b, f2)]
        };
        contacts.sort_by_key(|(n, _)| n.id());
        TwoContactEstimate { contacts }
    }
}
