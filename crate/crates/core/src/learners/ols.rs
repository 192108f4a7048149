use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{check_width, row_width};
use crate::error::{Error, Result};

/// Pivots below this fraction of the largest centred sum of squares count as
/// rank deficiency.
const RANK_TOL: f64 = 1e-12;

/// Ordinary least squares `ŷ = w·x + b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
}

impl LinearModel {
    /// Solves the centred normal equations with a Cholesky factorisation.
    /// Rank-deficient designs are rejected rather than pseudo-inverted.
    pub fn fit<R: AsRef<[f64]>>(x: &[R], y: &[f64]) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                got: y.len(),
            });
        }
        let d = row_width(x)?;
        let n = x.len();
        if n < d + 1 {
            return Err(Error::SingularDesign(format!(
                "{n} samples cannot determine {d} weights and an intercept"
            )));
        }
        let nf = n as f64;
        let mut xmean = vec![0.0; d];
        for r in x {
            for (m, v) in xmean.iter_mut().zip(r.as_ref()) {
                *m += v / nf;
            }
        }
        let ymean = y.iter().sum::<f64>() / nf;

        let mut xtx = DMatrix::<f64>::zeros(d, d);
        let mut xty = DVector::<f64>::zeros(d);
        let mut centred = vec![0.0; d];
        for (r, &yi) in x.iter().zip(y) {
            for (c, (v, m)) in centred.iter_mut().zip(r.as_ref().iter().zip(&xmean)) {
                *c = v - m;
            }
            let yc = yi - ymean;
            for i in 0..d {
                xty[i] += centred[i] * yc;
                for j in 0..=i {
                    xtx[(i, j)] += centred[i] * centred[j];
                }
            }
        }
        for i in 0..d {
            for j in 0..i {
                xtx[(j, i)] = xtx[(i, j)];
            }
        }
        let scale = (0..d).map(|i| xtx[(i, i)]).fold(0.0, f64::max);
        let chol = xtx.clone().cholesky().ok_or_else(|| {
            Error::SingularDesign("normal matrix is not positive definite".into())
        })?;
        let l = chol.l_dirty();
        if (0..d).any(|i| l[(i, i)] * l[(i, i)] <= RANK_TOL * scale) {
            return Err(Error::SingularDesign(
                "design has linearly dependent or constant columns".into(),
            ));
        }
        let w = chol.solve(&xty);
        let intercept = ymean - w.iter().zip(&xmean).map(|(a, b)| a * b).sum::<f64>();
        Ok(Self {
            weights: w.iter().copied().collect(),
            intercept,
        })
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn predict_row(&self, row: &[f64]) -> Result<f64> {
        if row.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: row.len(),
            });
        }
        Ok(self.intercept
            + self
                .weights
                .iter()
                .zip(row)
                .map(|(w, v)| w * v)
                .sum::<f64>())
    }

    pub fn predict<R: AsRef<[f64]>>(&self, x: &[R]) -> Result<Vec<f64>> {
        check_width(x, self.dim())?;
        x.iter().map(|r| self.predict_row(r.as_ref())).collect()
    }
}
