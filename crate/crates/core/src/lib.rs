//! Synthetic capacitive e-skin toolkit.
//!
//! A 10x10 row/column capacitive skin is simulated by [`sim`]; [`learners`]
//! holds from-scratch least squares, Gaussian-process, SVM and random-forest
//! models; [`pipeline`] composes them into the stretch / contact / location /
//! force estimator; [`evalkit`] runs stratified cross-validation and builds
//! metric reports. [`schema`] owns the shared domain types and the CSV
//! interchange format.

pub mod error;
pub mod evalkit;
pub mod learners;
pub mod pipeline;
pub mod schema;
pub mod seed;
pub mod sim;

pub use error::{Error, Result};
pub use schema::{
    CapacitanceFrame, Dataset, DatasetMeta, ForceLevel, NodeCoord, Samples, Schema,
    SingleContactSample, StretchRatio, TwoContactSample, FEATURES, PROTOCOL_FORCES,
    PROTOCOL_STRETCHES, TERMINALS,
};
