use crate::error::{Error, Result};

fn check_pair<T>(y: &[T], yhat: &[T]) -> Result<()> {
    if y.is_empty() {
        return Err(Error::EmptyInput("metric over zero samples".into()));
    }
    if y.len() != yhat.len() {
        return Err(Error::DimensionMismatch {
            expected: y.len(),
            got: yhat.len(),
        });
    }
    Ok(())
}

pub fn mse(y: &[f64], yhat: &[f64]) -> Result<f64> {
    check_pair(y, yhat)?;
    Ok(y.iter()
        .zip(yhat)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        / y.len() as f64)
}

/// Coefficient of determination. Undefined when the targets are constant.
pub fn r2(y: &[f64], yhat: &[f64]) -> Result<f64> {
    check_pair(y, yhat)?;
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(Error::UndefinedMetric("r2 of constant targets".into()));
    }
    let ss_res: f64 = y.iter().zip(yhat).map(|(a, b)| (a - b).powi(2)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

pub fn accuracy<T: PartialEq>(y: &[T], yhat: &[T]) -> Result<f64> {
    check_pair(y, yhat)?;
    Ok(y.iter().zip(yhat).filter(|(a, b)| a == b).count() as f64 / y.len() as f64)
}
