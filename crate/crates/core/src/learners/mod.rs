//! The four learning algorithms used by the pipeline, written from scratch
//! on top of dense linear algebra.

pub mod forest;
pub mod gp;
pub mod kernel;
pub mod ols;
pub mod preprocess;
pub mod svm;

pub use forest::{
    best_split, gini, DecisionTree, FeatureSubset, ForestConfig, ForestModel, ForestPrediction,
    Split, TreeNode,
};
pub use gp::{GpConfig, GpGrid, GpHyper, GpModel, GpPrediction};
pub use kernel::rbf_kernel;
pub use ols::LinearModel;
pub use preprocess::Standardizer;
pub use svm::{ClassWeights, SvmConfig, SvmModel};

use crate::error::{Error, Result};

/// Checks that all rows share one width and returns it.
pub(crate) fn row_width<R: AsRef<[f64]>>(x: &[R]) -> Result<usize> {
    let d = x.first().map(|r| r.as_ref().len()).unwrap_or(0);
    for r in x {
        if r.as_ref().len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: r.as_ref().len(),
            });
        }
    }
    Ok(d)
}

pub(crate) fn check_width<R: AsRef<[f64]>>(x: &[R], expected: usize) -> Result<()> {
    for r in x {
        if r.as_ref().len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: r.as_ref().len(),
            });
        }
    }
    Ok(())
}

pub(crate) fn to_rows<R: AsRef<[f64]>>(x: &[R]) -> Vec<Vec<f64>> {
    x.iter().map(|r| r.as_ref().to_vec()).collect()
}
