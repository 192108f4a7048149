//! Domain types shared by every module, plus the CSV dataset format.

mod format;
mod io;

pub use format::{format_real, quantize};
pub use io::{read_dataset, read_frames, write_dataset, write_frames, SINGLE_HEADER, TWO_HEADER};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Terminals per axis.
pub const TERMINALS: usize = 10;
/// Values in one frame: 10 x-terminals followed by 10 y-terminals.
pub const FEATURES: usize = 2 * TERMINALS;
/// Row width of a serialised single-contact sample.
pub const SINGLE_ROW_WIDTH: usize = FEATURES + 4;
/// Row width of a serialised two-contact sample.
pub const TWO_ROW_WIDTH: usize = FEATURES + 6;

/// Standard gravity used to convert indenter mass to force.
pub const GRAVITY: f64 = 9.8;
/// Protocol stretch ratios: 101 mm rest length, 8 mm extension steps.
pub const PROTOCOL_STRETCHES: [f64; 3] = [1.0, 1.07921, 1.15842];
/// Protocol force levels in newtons (132 g indenter plus 200 g steps).
pub const PROTOCOL_FORCES: [f64; 4] = [0.0, 1.2936, 3.2536, 5.2136];

/// Force in newtons exerted by a resting mass of `kg`.
pub fn force_from_mass(kg: f64) -> f64 {
    kg * GRAVITY
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TerminalId {
    axis: Axis,
    index: u8,
}

impl TerminalId {
    pub fn new(axis: Axis, index: u8) -> Result<Self> {
        if !(1..=TERMINALS as u8).contains(&index) {
            return Err(Error::Validation(format!(
                "terminal index {index} outside 1..=10"
            )));
        }
        Ok(Self { axis, index })
    }

    pub fn axis(self) -> Axis {
        self.axis
    }

    pub fn index(self) -> u8 {
        self.index
    }

    /// Position of this terminal in the 20-value feature vector.
    pub fn feature_index(self) -> usize {
        let offset = match self.axis {
            Axis::X => 0,
            Axis::Y => TERMINALS,
        };
        offset + self.index as usize - 1
    }

    /// All 20 terminals in serialisation order.
    pub fn all() -> impl Iterator<Item = TerminalId> {
        [Axis::X, Axis::Y]
            .into_iter()
            .flat_map(|axis| (1..=TERMINALS as u8).map(move |index| TerminalId { axis, index }))
    }
}

/// Intersection of one x- and one y-terminal, or node 0 for "no contact".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "(u8, u8)", into = "(u8, u8)")]
pub struct NodeCoord {
    x: u8,
    y: u8,
}

impl NodeCoord {
    pub const NONE: NodeCoord = NodeCoord { x: 0, y: 0 };

    pub fn new(x: u8, y: u8) -> Result<Self> {
        let valid = (x == 0 && y == 0)
            || ((1..=TERMINALS as u8).contains(&x) && (1..=TERMINALS as u8).contains(&y));
        if valid {
            Ok(Self { x, y })
        } else {
            Err(Error::Validation(format!(
                "invalid node coordinate ({x},{y})"
            )))
        }
    }

    /// Inverse of [`NodeCoord::id`].
    pub fn from_id(id: u32) -> Result<Self> {
        match id {
            0 => Ok(Self::NONE),
            1..=100 => {
                let k = id - 1;
                Ok(Self {
                    x: (k % 10 + 1) as u8,
                    y: (k / 10 + 1) as u8,
                })
            }
            _ => Err(Error::Validation(format!("node id {id} outside 0..=100"))),
        }
    }

    pub fn x(self) -> u8 {
        self.x
    }

    pub fn y(self) -> u8 {
        self.y
    }

    pub fn is_contact(self) -> bool {
        self != Self::NONE
    }

    /// Row-major linear id: 0 for no contact, else (y-1)*10 + x.
    pub fn id(self) -> u32 {
        if self.is_contact() {
            (self.y as u32 - 1) * 10 + self.x as u32
        } else {
            0
        }
    }

    /// Every contact node (1..=100) in id order.
    pub fn grid() -> impl Iterator<Item = NodeCoord> {
        (1..=100).map(|id| NodeCoord::from_id(id).expect("id in range"))
    }
}

impl TryFrom<(u8, u8)> for NodeCoord {
    type Error = Error;
    fn try_from((x, y): (u8, u8)) -> Result<Self> {
        NodeCoord::new(x, y)
    }
}

impl From<NodeCoord> for (u8, u8) {
    fn from(n: NodeCoord) -> Self {
        (n.x, n.y)
    }
}

impl std::fmt::Display for NodeCoord {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "node {} ({},{})", self.id(), self.x, self.y)
    }
}

/// One scan of all 20 terminals, in arbitrary positive capacitance units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacitanceFrame {
    cx: [f64; TERMINALS],
    cy: [f64; TERMINALS],
}

impl CapacitanceFrame {
    pub fn new(cx: [f64; TERMINALS], cy: [f64; TERMINALS]) -> Result<Self> {
        for (i, v) in cx.iter().chain(cy.iter()).enumerate() {
            if !v.is_finite() || *v <= 0.0 {
                return Err(Error::Validation(format!(
                    "capacitance feature {} must be finite and positive, got {v}",
                    i + 1
                )));
            }
        }
        Ok(Self { cx, cy })
    }

    pub fn from_features(values: &[f64]) -> Result<Self> {
        if values.len() != FEATURES {
            return Err(Error::DimensionMismatch {
                expected: FEATURES,
                got: values.len(),
            });
        }
        let mut cx = [0.0; TERMINALS];
        let mut cy = [0.0; TERMINALS];
        cx.copy_from_slice(&values[..TERMINALS]);
        cy.copy_from_slice(&values[TERMINALS..]);
        Self::new(cx, cy)
    }

    pub fn cx(&self) -> &[f64; TERMINALS] {
        &self.cx
    }

    pub fn cy(&self) -> &[f64; TERMINALS] {
        &self.cy
    }

    pub fn get(&self, t: TerminalId) -> f64 {
        match t.axis() {
            Axis::X => self.cx[t.index() as usize - 1],
            Axis::Y => self.cy[t.index() as usize - 1],
        }
    }

    /// cx1..cx10, cy1..cy10.
    pub fn features(&self) -> [f64; FEATURES] {
        let mut out = [0.0; FEATURES];
        out[..TERMINALS].copy_from_slice(&self.cx);
        out[TERMINALS..].copy_from_slice(&self.cy);
        out
    }

    /// Each axis sorted ascending; contact bumps land in the upper half.
    pub fn sorted_features(&self) -> [f64; FEATURES] {
        let mut out = self.features();
        out[..TERMINALS].sort_by(f64::total_cmp);
        out[TERMINALS..].sort_by(f64::total_cmp);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct StretchRatio(f64);

impl StretchRatio {
    pub const REST: StretchRatio = StretchRatio(1.0);

    pub fn new(lambda: f64) -> Result<Self> {
        if lambda.is_finite() && lambda >= 1.0 {
            Ok(Self(lambda))
        } else {
            Err(Error::Validation(format!(
                "stretch ratio must be finite and >= 1, got {lambda}"
            )))
        }
    }

    /// From rest length and extension, in the same length unit.
    pub fn from_extension(rest_length: f64, extension: f64) -> Result<Self> {
        Self::new((rest_length + extension) / rest_length)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for StretchRatio {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<StretchRatio> for f64 {
    fn from(s: StretchRatio) -> f64 {
        s.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct ForceLevel(f64);

impl ForceLevel {
    pub const ZERO: ForceLevel = ForceLevel(0.0);

    pub fn new(newtons: f64) -> Result<Self> {
        if newtons.is_finite() && newtons >= 0.0 {
            Ok(Self(newtons))
        } else {
            Err(Error::Validation(format!(
                "force must be finite and >= 0, got {newtons}"
            )))
        }
    }

    pub fn newtons(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for ForceLevel {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ForceLevel> for f64 {
    fn from(f: ForceLevel) -> f64 {
        f.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingleContactSample {
    pub frame: CapacitanceFrame,
    pub force: ForceLevel,
    pub node: NodeCoord,
    pub stretch: StretchRatio,
}

impl SingleContactSample {
    pub fn new(
        frame: CapacitanceFrame,
        force: ForceLevel,
        node: NodeCoord,
        stretch: StretchRatio,
    ) -> Result<Self> {
        if (force.newtons() == 0.0) != !node.is_contact() {
            return Err(Error::Validation(format!(
                "force {} N at {node}: zero force must coincide with node 0",
                force.newtons()
            )));
        }
        Ok(Self {
            frame,
            force,
            node,
            stretch,
        })
    }

    pub fn is_contact(&self) -> bool {
        self.node.is_contact()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoContactSample {
    pub frame: CapacitanceFrame,
    pub force1: ForceLevel,
    pub node1: NodeCoord,
    pub force2: ForceLevel,
    pub node2: NodeCoord,
}

impl TwoContactSample {
    pub fn new(
        frame: CapacitanceFrame,
        force1: ForceLevel,
        node1: NodeCoord,
        force2: ForceLevel,
        node2: NodeCoord,
    ) -> Result<Self> {
        if node1 == node2 && node1.is_contact() {
            return Err(Error::Validation(format!(
                "both contacts at {node1}; contact nodes must differ"
            )));
        }
        Ok(Self {
            frame,
            force1,
            node1,
            force2,
            node2,
        })
    }

    /// True when the contacts share an x- or a y-terminal.
    pub fn shares_terminal(&self) -> bool {
        self.node1.x() == self.node2.x() || self.node1.y() == self.node2.y()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Schema {
    SingleContact,
    TwoContact,
}

impl Schema {
    pub fn row_width(self) -> usize {
        match self {
            Schema::SingleContact => SINGLE_ROW_WIDTH,
            Schema::TwoContact => TWO_ROW_WIDTH,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Schema::SingleContact => "single-contact",
            Schema::TwoContact => "two-contact",
        }
    }
}

pub const SCHEMA_VERSION: u32 = 1;

/// Where a dataset came from; stored in the sidecar next to the CSV.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub schema: Schema,
    pub schema_version: u32,
    pub seed: u64,
    pub generator_config_digest: String,
    /// Canonical JSON of the generator configuration.
    #[serde(default)]
    pub generator_config: String,
}

impl DatasetMeta {
    /// Metadata for a dataset with no recorded generator.
    pub fn unknown(schema: Schema) -> Self {
        Self {
            schema,
            schema_version: SCHEMA_VERSION,
            seed: 0,
            generator_config_digest: String::new(),
            generator_config: String::new(),
        }
    }

    /// Metadata carrying `config` (canonical JSON) and its SHA-256 digest.
    pub fn generated(schema: Schema, seed: u64, config: String) -> Self {
        use sha2::{Digest, Sha256};
        let digest = Sha256::digest(config.as_bytes());
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        Self {
            schema,
            schema_version: SCHEMA_VERSION,
            seed,
            generator_config_digest: hex,
            generator_config: config,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Samples {
    Single(Vec<SingleContactSample>),
    Two(Vec<TwoContactSample>),
}

impl Samples {
    pub fn schema(&self) -> Schema {
        match self {
            Samples::Single(_) => Schema::SingleContact,
            Samples::Two(_) => Schema::TwoContact,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Samples::Single(s) => s.len(),
            Samples::Two(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub meta: DatasetMeta,
    pub samples: Samples,
}

impl Dataset {
    pub fn single(meta: DatasetMeta, samples: Vec<SingleContactSample>) -> Self {
        Self {
            meta,
            samples: Samples::Single(samples),
        }
    }

    pub fn two(meta: DatasetMeta, samples: Vec<TwoContactSample>) -> Self {
        Self {
            meta,
            samples: Samples::Two(samples),
        }
    }

    pub fn schema(&self) -> Schema {
        self.samples.schema()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn check_schema(&self) -> Result<()> {
        if self.meta.schema != self.samples.schema() {
            return Err(Error::Schema(format!(
                "metadata declares {} but samples are {}",
                self.meta.schema.name(),
                self.samples.schema().name()
            )));
        }
        Ok(())
    }

    pub fn as_single(&self) -> Result<&[SingleContactSample]> {
        match &self.samples {
            Samples::Single(s) => Ok(s),
            Samples::Two(_) => Err(Error::Schema(
                "expected a single-contact dataset, found two-contact".into(),
            )),
        }
    }

    pub fn as_two(&self) -> Result<&[TwoContactSample]> {
        match &self.samples {
            Samples::Two(s) => Ok(s),
            Samples::Single(_) => Err(Error::Schema(
                "expected a two-contact dataset, found single-contact".into(),
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_id_examples() {
        assert_eq!(NodeCoord::NONE.id(), 0);
        assert_eq!(NodeCoord::new(1, 1).unwrap().id(), 1);
        assert_eq!(NodeCoord::new(10, 10).unwrap().id(), 100);
        assert_eq!(NodeCoord::new(3, 4).unwrap().id(), 33);
    }

    #[test]
    fn node_id_is_a_bijection_onto_0_to_100() {
        let mut seen = [false; 101];
        let mut coords = vec![NodeCoord::NONE];
        for x in 1..=10 {
            for y in 1..=10 {
                coords.push(NodeCoord::new(x, y).unwrap());
            }
        }
        assert_eq!(coords.len(), 101);
        for c in coords {
            let id = c.id() as usize;
            assert!(!seen[id], "id {id} produced twice");
            seen[id] = true;
            assert_eq!(NodeCoord::from_id(id as u32).unwrap(), c);
        }
        assert!(seen.iter().all(|s| *s));
    }

    #[test]
    fn invalid_nodes_rejected() {
        assert!(NodeCoord::new(0, 3).is_err());
        assert!(NodeCoord::new(11, 3).is_err());
        assert!(NodeCoord::new(4, 0).is_err());
        assert!(NodeCoord::from_id(101).is_err());
    }

    #[test]
    fn twenty_distinct_terminals() {
        let all: Vec<_> = TerminalId::all().collect();
        assert_eq!(all.len(), 20);
        let idx: Vec<_> = all.iter().map(|t| t.feature_index()).collect();
        assert_eq!(idx, (0..20).collect::<Vec<_>>());
        assert!(TerminalId::new(Axis::X, 0).is_err());
        assert!(TerminalId::new(Axis::Y, 11).is_err());
    }

    #[test]
    fn frame_rejects_non_positive_values() {
        let mut v = [1.0; 20];
        v[7] = 0.0;
        assert!(CapacitanceFrame::from_features(&v).is_err());
        v[7] = f64::NAN;
        assert!(CapacitanceFrame::from_features(&v).is_err());
        assert!(CapacitanceFrame::from_features(&[1.0; 19]).is_err());
    }

    #[test]
    fn protocol_constants() {
        // 132 g indenter, 200 g increments
        for (i, f) in PROTOCOL_FORCES.iter().enumerate().skip(1) {
            let kg = 0.132 + 0.2 * (i - 1) as f64;
            assert!((force_from_mass(kg) - f).abs() < 1e-12);
        }
        for (i, l) in PROTOCOL_STRETCHES.iter().enumerate() {
            let s = StretchRatio::from_extension(101.0, 8.0 * i as f64).unwrap();
            assert!((s.value() - l).abs() < 1e-5);
        }
    }

    #[test]
    fn zero_force_iff_node_zero() {
        let frame = CapacitanceFrame::from_features(&[1.0; 20]).unwrap();
        let n = NodeCoord::new(5, 5).unwrap();
        let f = ForceLevel::new(1.2936).unwrap();
        assert!(SingleContactSample::new(frame, ForceLevel::ZERO, n, StretchRatio::REST).is_err());
        assert!(SingleContactSample::new(frame, f, NodeCoord::NONE, StretchRatio::REST).is_err());
        assert!(SingleContactSample::new(frame, f, n, StretchRatio::REST).is_ok());
    }

    #[test]
    fn two_contact_nodes_distinct() {
        let frame = CapacitanceFrame::from_features(&[1.0; 20]).unwrap();
        let n = NodeCoord::new(5, 5).unwrap();
        let f = ForceLevel::new(1.0).unwrap();
        assert!(TwoContactSample::new(frame, f, n, f, n).is_err());
        let z = ForceLevel::ZERO;
        let none = NodeCoord::NONE;
        assert!(TwoContactSample::new(frame, z, none, z, none).is_ok());
    }
}
