//! Forward model of the row/column capacitive skin and the acquisition
//! protocols that replay the single- and two-indenter experiments.
//!
//! Each terminal reads
//! `baseline + gain·(λ−1) + Σ_contacts s·(1 − e^(−F/F₀))·w^d + noise`,
//! where `d` is the terminal distance to the contact along that axis and the
//! contact term is zero beyond `neighbor_reach`. Contacts superpose, so two
//! indenters on one row raise that row's terminal twice.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schema::{
    quantize, CapacitanceFrame, Dataset, DatasetMeta, ForceLevel, NodeCoord, Schema,
    SingleContactSample, StretchRatio, TwoContactSample, PROTOCOL_FORCES, PROTOCOL_STRETCHES,
    TERMINALS,
};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SkinModel {
    pub baseline: f64,
    pub stretch_gain_x: f64,
    pub stretch_gain_y: f64,
    /// Saturation amplitude of a contact's increment.
    pub force_scale: f64,
    /// Saturation constant in newtons.
    pub force_sat: f64,
    /// Weight per terminal step away from the contact.
    pub neighbor_decay: f64,
    pub neighbor_reach: u32,
    pub noise_sigma: f64,
}

impl Default for SkinModel {
    fn default() -> Self {
        Self {
            baseline: 1.0,
            stretch_gain_x: 0.30,
            stretch_gain_y: 0.30,
            force_scale: 0.25,
            force_sat: 2.0,
            neighbor_decay: 0.4,
            neighbor_reach: 2,
            noise_sigma: 0.005,
        }
    }
}

impl SkinModel {
    pub fn noiseless(mut self) -> Self {
        self.noise_sigma = 0.0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.baseline,
            self.stretch_gain_x,
            self.stretch_gain_y,
            self.force_scale,
            self.force_sat,
            self.neighbor_decay,
            self.noise_sigma,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidArgument(
                "skin model parameters must be finite".into(),
            ));
        }
        if self.baseline <= 0.0 || self.force_scale <= 0.0 || self.force_sat <= 0.0 {
            return Err(Error::InvalidArgument(
                "baseline, force_scale and force_sat must be positive".into(),
            ));
        }
        if !(self.neighbor_decay > 0.0 && self.neighbor_decay < 1.0) {
            return Err(Error::InvalidArgument(
                "neighbor_decay must lie in (0,1)".into(),
            ));
        }
        if self.noise_sigma < 0.0 {
            return Err(Error::InvalidArgument("noise_sigma must be >= 0".into()));
        }
        Ok(())
    }

    /// Increment on the terminal directly under a contact of `force` newtons.
    pub fn contact_increment(&self, force: f64) -> f64 {
        self.force_scale * (1.0 - (-force / self.force_sat).exp())
    }

    /// Spread weight at terminal distance `d`, zero beyond the reach.
    pub fn spread(&self, d: u32) -> f64 {
        if d <= self.neighbor_reach {
            self.neighbor_decay.powi(d as i32)
        } else {
            0.0
        }
    }

    fn deterministic_values(
        &self,
        stretch: StretchRatio,
        contacts: &[Contact],
    ) -> [[f64; TERMINALS]; 2] {
        let ext = stretch.value() - 1.0;
        let mut cx = [self.baseline + self.stretch_gain_x * ext; TERMINALS];
        let mut cy = [self.baseline + self.stretch_gain_y * ext; TERMINALS];
        for c in contacts {
            let inc = self.contact_increment(c.force.newtons());
            for i in 0..TERMINALS {
                let t = i as u32 + 1;
                cx[i] += inc * self.spread(t.abs_diff(c.node.x() as u32));
                cy[i] += inc * self.spread(t.abs_diff(c.node.y() as u32));
            }
        }
        [cx, cy]
    }
}

/// An indenter pressing `force` on a contact node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Contact {
    pub node: NodeCoord,
    pub force: ForceLevel,
}

impl Contact {
    pub fn new(node: NodeCoord, force: ForceLevel) -> Result<Self> {
        if !node.is_contact() {
            return Err(Error::Validation("a contact cannot sit on node 0".into()));
        }
        Ok(Self { node, force })
    }

    pub fn at(x: u8, y: u8, newtons: f64) -> Result<Self> {
        Self::new(NodeCoord::new(x, y)?, ForceLevel::new(newtons)?)
    }
}

/// Simulates one scan. Noise is drawn from a generator seeded with
/// `rng_seed`, one standard normal per terminal in serialisation order.
pub fn simulate_frame(
    model: &SkinModel,
    stretch: StretchRatio,
    contacts: &[Contact],
    rng_seed: u64,
) -> Result<CapacitanceFrame> {
    if contacts.len() > 2 {
        return Err(Error::UnsupportedArity(contacts.len()));
    }
    if let [a, b] = contacts {
        if a.node == b.node {
            return Err(Error::Validation(format!(
                "duplicate contact at {}",
                a.node
            )));
        }
    }
    if let Some(c) = contacts.iter().find(|c| !c.node.is_contact()) {
        return Err(Error::Validation(format!("contact on {}", c.node)));
    }
    let [mut cx, mut cy] = model.deterministic_values(stretch, contacts);
    let mut rng = seed::rng(rng_seed);
    for v in cx.iter_mut().chain(cy.iter_mut()) {
        let z: f64 = StandardNormal.sample(&mut rng);
        *v += model.noise_sigma * z;
    }
    CapacitanceFrame::new(cx, cy)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SingleForceProtocol {
    pub stretches: Vec<f64>,
    pub forces: Vec<f64>,
    pub reps_per_cell: u32,
    pub seed: u64,
}

impl Default for SingleForceProtocol {
    /// Desk scale: the full grid with 5 repetitions per cell.
    fn default() -> Self {
        Self {
            stretches: PROTOCOL_STRETCHES.to_vec(),
            forces: PROTOCOL_FORCES.to_vec(),
            reps_per_cell: 5,
            seed: 20_200_101,
        }
    }
}

impl SingleForceProtocol {
    /// The full acquisition grid: 20 samples per cell.
    pub fn full() -> Self {
        Self {
            reps_per_cell: 20,
            ..Self::default()
        }
    }

    pub fn expected_len(&self) -> usize {
        self.stretches.len() * 101 * self.forces.len() * self.reps_per_cell as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps_per_cell == 0 {
            return Err(Error::Protocol("reps_per_cell must be >= 1".into()));
        }
        if self.stretches.is_empty() {
            return Err(Error::Protocol(
                "at least one stretch level is required".into(),
            ));
        }
        for s in &self.stretches {
            StretchRatio::new(*s)?;
        }
        for f in &self.forces {
            ForceLevel::new(*f)?;
        }
        if !self.forces.contains(&0.0) {
            return Err(Error::Protocol("force levels must include 0 N".into()));
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct GeneratorConfig<'a, P: Serialize> {
    skin: &'a SkinModel,
    protocol: &'a P,
}

fn canonical_config<P: Serialize>(model: &SkinModel, protocol: &P) -> String {
    serde_json::to_string(&GeneratorConfig {
        skin: model,
        protocol,
    })
    .expect("config serialises")
}

fn quantized(frame: CapacitanceFrame) -> Result<CapacitanceFrame> {
    let mut v = frame.features();
    v.iter_mut().for_each(|x| *x = quantize(*x));
    CapacitanceFrame::from_features(&v)
}

/// Every stretch × node (0..=100) × force × repetition, stretch-major.
/// A zero-force cell carries no contact, so it is labelled node 0.
pub fn generate_single_force_dataset(
    model: &SkinModel,
    protocol: &SingleForceProtocol,
) -> Result<Dataset> {
    model.validate()?;
    protocol.validate()?;
    let mut samples = Vec::with_capacity(protocol.expected_len());
    for &lambda in &protocol.stretches {
        let stretch = StretchRatio::new(lambda)?;
        for node_id in 0..=100u32 {
            let node = NodeCoord::from_id(node_id)?;
            for &f in &protocol.forces {
                let (node, force) = if node.is_contact() && f > 0.0 {
                    (node, ForceLevel::new(f)?)
                } else {
                    (NodeCoord::NONE, ForceLevel::ZERO)
                };
                let contacts: Vec<Contact> = if node.is_contact() {
                    vec![Contact::new(node, force)?]
                } else {
                    vec![]
                };
                for _ in 0..protocol.reps_per_cell {
                    let sub = seed::derive(protocol.seed, samples.len() as u64);
                    let frame = quantized(simulate_frame(model, stretch, &contacts, sub)?)?;
                    samples.push(SingleContactSample::new(frame, force, node, stretch)?);
                }
            }
        }
    }
    let meta = DatasetMeta::generated(
        Schema::SingleContact,
        protocol.seed,
        canonical_config(model, protocol),
    );
    Ok(Dataset::single(meta, samples))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TwoForceProtocol {
    pub x_axis: Vec<u8>,
    pub y_axis: Vec<u8>,
    pub forces: Vec<f64>,
    pub reps: u32,
    pub seed: u64,
}

impl Default for TwoForceProtocol {
    fn default() -> Self {
        Self {
            x_axis: vec![1, 6, 10],
            y_axis: vec![1, 6, 10],
            forces: PROTOCOL_FORCES.to_vec(),
            reps: 2,
            seed: 20_200_202,
        }
    }
}

impl TwoForceProtocol {
    /// Grid nodes in id order.
    pub fn nodes(&self) -> Result<Vec<NodeCoord>> {
        let mut nodes = Vec::new();
        for &y in &self.y_axis {
            for &x in &self.x_axis {
                let n = NodeCoord::new(x, y)?;
                if !n.is_contact() {
                    return Err(Error::Protocol(
                        "node axes must use terminals 1..=10".into(),
                    ));
                }
                nodes.push(n);
            }
        }
        nodes.sort_by_key(|n| n.id());
        nodes.dedup();
        Ok(nodes)
    }

    fn nonzero_forces(&self) -> Vec<f64> {
        self.forces.iter().copied().filter(|f| *f > 0.0).collect()
    }

    pub fn expected_len(&self) -> Result<usize> {
        let n = self.nodes()?.len();
        let f = self.nonzero_forces().len();
        Ok(n * n.saturating_sub(1) / 2 * f * f * self.reps as usize)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes()?.len() < 2 {
            return Err(Error::Protocol(
                "two-force protocol needs at least 2 grid nodes".into(),
            ));
        }
        for f in &self.forces {
            ForceLevel::new(*f)?;
        }
        if self.nonzero_forces().is_empty() {
            return Err(Error::Protocol(
                "at least one non-zero force level is required".into(),
            ));
        }
        if self.reps == 0 {
            return Err(Error::Protocol("reps must be >= 1".into()));
        }
        Ok(())
    }
}

/// All unordered node pairs × nonzero force pairs × repetitions at rest
/// length. The contact with the smaller node id is recorded first.
pub fn generate_two_force_dataset(
    model: &SkinModel,
    protocol: &TwoForceProtocol,
) -> Result<Dataset> {
    model.validate()?;
    protocol.validate()?;
    let nodes = protocol.nodes()?;
    let forces = protocol.nonzero_forces();
    let mut samples = Vec::with_capacity(protocol.expected_len()?);
    for (i, &a) in nodes.iter().enumerate() {
        for &b in &nodes[i + 1..] {
            for &f1 in &forces {
                for &f2 in &forces {
                    let c1 = Contact::new(a, ForceLevel::new(f1)?)?;
                    let c2 = Contact::new(b, ForceLevel::new(f2)?)?;
                    for _ in 0..protocol.reps {
                        let sub = seed::derive(protocol.seed, samples.len() as u64);
                        let frame =
                            quantized(simulate_frame(model, StretchRatio::REST, &[c1, c2], sub)?)?;
                        samples.push(TwoContactSample::new(frame, c1.force, a, c2.force, b)?);
                    }
                }
            }
        }
    }
    let meta = DatasetMeta::generated(
        Schema::TwoContact,
        protocol.seed,
        canonical_config(model, protocol),
    );
    Ok(Dataset::two(meta, samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn quiet() -> SkinModel {
        SkinModel::default().noiseless()
    }

    #[test]
    fn rest_state_is_baseline() {
        let f = simulate_frame(&quiet(), StretchRatio::REST, &[], 1).unwrap();
        assert!(f.features().iter().all(|v| *v == 1.0));
    }

    #[test]
    fn stretch_term_closed_form() {
        let s = StretchRatio::new(1.07921).unwrap();
        let f = simulate_frame(&quiet(), s, &[], 1).unwrap();
        for v in f.features() {
            assert_abs_diff_eq!(v, 1.023_763, epsilon = 1e-12);
        }
    }

    #[test]
    fn single_contact_spread_kernel() {
        let c = Contact::at(5, 5, 1.2936).unwrap();
        let f = simulate_frame(&quiet(), StretchRatio::REST, &[c], 1).unwrap();
        let inc = 0.25 * (1.0 - (-0.6468f64).exp());
        let expect = [0.0, 0.0, 0.16, 0.4, 1.0, 0.4, 0.16, 0.0, 0.0, 0.0];
        for (i, w) in expect.iter().enumerate() {
            assert_abs_diff_eq!(f.cx()[i], 1.0 + w * inc, epsilon = 1e-15);
            assert_abs_diff_eq!(f.cy()[i], 1.0 + w * inc, epsilon = 1e-15);
        }
    }

    #[test]
    fn shared_terminal_is_affected_twice() {
        let m = quiet();
        let f = 2.0;
        let one =
            simulate_frame(&m, StretchRatio::REST, &[Contact::at(1, 1, f).unwrap()], 0).unwrap();
        let two = simulate_frame(
            &m,
            StretchRatio::REST,
            &[Contact::at(1, 1, f).unwrap(), Contact::at(1, 6, f).unwrap()],
            0,
        )
        .unwrap();
        assert_abs_diff_eq!(
            two.cx()[0] - 1.0,
            2.0 * (one.cx()[0] - 1.0),
            epsilon = 1e-15
        );
    }

    #[test]
    fn arity_and_duplicates_rejected() {
        let c = Contact::at(2, 2, 1.0).unwrap();
        let d = Contact::at(3, 3, 1.0).unwrap();
        let e = Contact::at(4, 4, 1.0).unwrap();
        let m = SkinModel::default();
        assert!(matches!(
            simulate_frame(&m, StretchRatio::REST, &[c, d, e], 0),
            Err(Error::UnsupportedArity(3))
        ));
        assert!(matches!(
            simulate_frame(&m, StretchRatio::REST, &[c, c], 0),
            Err(Error::Validation(_))
        ));
        assert!(Contact::new(NodeCoord::NONE, ForceLevel::ZERO).is_err());
    }

    #[test]
    fn protocol_sizes() {
        let m = SkinModel::default();
        assert_eq!(SingleForceProtocol::full().expected_len(), 24_240);
        let desk = generate_single_force_dataset(&m, &SingleForceProtocol::default()).unwrap();
        assert_eq!(desk.len(), 6_060);

        let p = SingleForceProtocol {
            stretches: vec![1.0],
            forces: vec![0.0],
            reps_per_cell: 1,
            seed: 3,
        };
        let ds = generate_single_force_dataset(&m, &p).unwrap();
        let s = ds.as_single().unwrap();
        assert_eq!(s.len(), 101);
        assert!(s
            .iter()
            .all(|x| x.force == ForceLevel::ZERO && !x.node.is_contact()));
    }

    #[test]
    fn single_protocol_order_is_stretch_major() {
        let m = SkinModel::default();
        let p = SingleForceProtocol {
            reps_per_cell: 1,
            ..Default::default()
        };
        let ds = generate_single_force_dataset(&m, &p).unwrap();
        let s = ds.as_single().unwrap();
        assert_eq!(s.len(), 3 * 101 * 4);
        assert_eq!(s[0].stretch.value(), 1.0);
        assert_eq!(s[404].stretch.value(), 1.07921);
        // node 7 at force index 2 (3.2536 N) in the first stretch block
        let k = 7 * 4 + 2;
        assert_eq!(s[k].node.id(), 7);
        assert_eq!(s[k].force.newtons(), 3.2536);
    }

    #[test]
    fn single_protocol_requires_zero_force() {
        let p = SingleForceProtocol {
            forces: vec![1.0, 2.0],
            ..Default::default()
        };
        assert!(generate_single_force_dataset(&SkinModel::default(), &p).is_err());
    }

    #[test]
    fn two_force_protocol() {
        let m = SkinModel::default();
        let ds = generate_two_force_dataset(&m, &TwoForceProtocol::default()).unwrap();
        let s = ds.as_two().unwrap();
        assert_eq!(s.len(), 36 * 9 * 2);
        assert!(s.iter().all(|x| x.node1.id() < x.node2.id()));
        let shared = s.iter().filter(|x| x.shares_terminal()).count();
        assert_eq!(shared, 18 * 9 * 2);

        let tiny = TwoForceProtocol {
            x_axis: vec![1],
            y_axis: vec![1],
            ..Default::default()
        };
        assert!(matches!(
            generate_two_force_dataset(&m, &tiny),
            Err(Error::Protocol(_))
        ));
    }

    #[test]
    fn metadata_records_seed_and_digest() {
        let m = SkinModel::default();
        let p = TwoForceProtocol::default();
        let a = generate_two_force_dataset(&m, &p).unwrap();
        assert_eq!(a.meta.seed, p.seed);
        assert_eq!(a.meta.generator_config_digest.len(), 64);
        let q = TwoForceProtocol { seed: 1, ..p };
        let b = generate_two_force_dataset(&m, &q).unwrap();
        assert_ne!(
            a.meta.generator_config_digest,
            b.meta.generator_config_digest
        );
    }
}
