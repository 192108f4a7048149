//! WebAssembly bindings for the browser demo: simulate frames, plot the
//! force response, and run a small trained single-contact estimator.

use tactile_core::learners::{ForestConfig, GpConfig};
use tactile_core::pipeline::{train_single, PipelineConfig, TrainedPipeline};
use tactile_core::sim::{
    self, generate_single_force_dataset, Contact, SingleForceProtocol, SkinModel,
};
use tactile_core::{CapacitanceFrame, ForceLevel, NodeCoord, StretchRatio, FEATURES};
use wasm_bindgen::prelude::*;

fn js_err(e: impl std::fmt::Display) -> JsError {
    JsError::new(&e.to_string())
}

fn model(noise: bool) -> SkinModel {
    let m = SkinModel::default();
    if noise {
        m
    } else {
        m.noiseless()
    }
}

/// Twenty channel values, cx1..cx10 then cy1..cy10. `nodes` holds (x, y)
/// pairs, one per contact, and `forces` the matching newtons.
#[wasm_bindgen]
pub fn simulate(
    lambda: f64,
    nodes: &[u8],
    forces: &[f64],
    noise: bool,
    seed: u64,
) -> Result<Vec<f64>, JsError> {
    if nodes.len() != 2 * forces.len() {
        return Err(JsError::new("nodes must hold one (x, y) pair per force"));
    }
    let contacts = forces
        .iter()
        .enumerate()
        .map(|(i, &f)| {
            let node = NodeCoord::new(nodes[2 * i], nodes[2 * i + 1]).map_err(js_err)?;
            Contact::new(node, ForceLevel::new(f).map_err(js_err)?).map_err(js_err)
        })
        .collect::<Result<Vec<_>, JsError>>()?;
    let stretch = StretchRatio::new(lambda).map_err(js_err)?;
    let frame = sim::simulate_frame(&model(noise), stretch, &contacts, seed).map_err(js_err)?;
    Ok(frame.features().to_vec())
}

/// Channel increment against force, `steps` samples from 0 to `max_force`,
/// at terminal distance `distance` from the contact.
#[wasm_bindgen]
pub fn force_response(distance: u32, max_force: f64, steps: usize) -> Vec<f64> {
    let m = SkinModel::default();
    let steps = steps.max(2);
    (0..steps)
        .map(|i| {
            let f = max_force * i as f64 / (steps - 1) as f64;
            m.contact_increment(f) * m.spread(distance)
        })
        .collect()
}

/// A single-contact pipeline trained in the page on a reduced protocol.
#[wasm_bindgen]
pub struct Estimator {
    pipeline: TrainedPipeline,
}

#[wasm_bindgen]
impl Estimator {
    #[wasm_bindgen(constructor)]
    pub fn new(reps: u32, seed: u64) -> Result<Estimator, JsError> {
        let protocol = SingleForceProtocol {
            reps_per_cell: reps.max(1),
            seed,
            ..SingleForceProtocol::default()
        };
        let ds = generate_single_force_dataset(&SkinModel::default(), &protocol).map_err(js_err)?;
        let cfg = PipelineConfig {
            forest: ForestConfig {
                n_trees: 40,
                ..ForestConfig::default()
            },
            gp: GpConfig {
                cap: 600,
                ..GpConfig::default()
            },
            seed,
            ..PipelineConfig::default()
        };
        let pipeline = train_single(ds.as_single().map_err(js_err)?, &cfg).map_err(js_err)?;
        Ok(Estimator { pipeline })
    }

    /// JSON object with stretch, contact_detected, node [x, y] and force.
    pub fn estimate(&self, features: &[f64]) -> Result<String, JsError> {
        if features.len() != FEATURES {
            return Err(JsError::new("expected 20 channel values"));
        }
        let frame = CapacitanceFrame::from_features(features).map_err(js_err)?;
        serde_json::to_string(&self.pipeline.infer(&frame)).map_err(js_err)
    }
}
