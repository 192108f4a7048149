//! Exact Gaussian-process regression with a squared-exponential kernel.
//!
//! Training targets are centred on their mean, the kernel matrix
//! `K + σn²I` is Cholesky-factored once, and predictions reuse the factor:
//! mean `μ + k*ᵀα`, variance `k** − ‖L⁻¹k*‖²`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::seq::index;
use serde::{Deserialize, Serialize};

use super::kernel::rbf_kernel;
use super::{check_width, row_width, to_rows};
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GpHyper {
    pub length_scale: f64,
    pub signal_var: f64,
    pub noise_var: f64,
}

impl Default for GpHyper {
    fn default() -> Self {
        Self {
            length_scale: 2.0,
            signal_var: 1.0,
            noise_var: 1e-4,
        }
    }
}

/// Candidate hyperparameters for log-marginal-likelihood selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GpGrid {
    pub length_scales: Vec<f64>,
    pub noise_vars: Vec<f64>,
    /// Points used to score each candidate.
    pub subsample: usize,
}

impl Default for GpGrid {
    fn default() -> Self {
        Self {
            length_scales: vec![1.0, 2.0, 4.0, 8.0],
            noise_vars: vec![1e-4, 1e-3, 1e-2],
            subsample: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GpConfig {
    pub hyper: GpHyper,
    /// Largest training set factorised; bigger inputs are subsampled.
    pub cap: usize,
    pub grid: Option<GpGrid>,
}

impl Default for GpConfig {
    fn default() -> Self {
        Self {
            hyper: GpHyper::default(),
            cap: 2000,
            grid: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GpPrediction {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct GpModelData {
    train_inputs: Vec<Vec<f64>>,
    alpha: Vec<f64>,
    hyper: GpHyper,
    mean_offset: f64,
    log_marginal_likelihood: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "GpModelData", into = "GpModelData")]
pub struct GpModel {
    train_inputs: Vec<Vec<f64>>,
    alpha: Vec<f64>,
    hyper: GpHyper,
    mean_offset: f64,
    log_marginal_likelihood: f64,
    chol: Cholesky<f64, Dyn>,
}

impl PartialEq for GpModel {
    fn eq(&self, other: &Self) -> bool {
        self.train_inputs == other.train_inputs
            && self.alpha == other.alpha
            && self.hyper == other.hyper
            && self.mean_offset == other.mean_offset
    }
}

impl From<GpModel> for GpModelData {
    fn from(m: GpModel) -> Self {
        Self {
            train_inputs: m.train_inputs,
            alpha: m.alpha,
            hyper: m.hyper,
            mean_offset: m.mean_offset,
            log_marginal_likelihood: m.log_marginal_likelihood,
        }
    }
}

impl TryFrom<GpModelData> for GpModel {
    type Error = Error;
    fn try_from(d: GpModelData) -> Result<Self> {
        if d.alpha.len() != d.train_inputs.len() {
            return Err(Error::Serde(
                "GP alpha length differs from training set".into(),
            ));
        }
        row_width(&d.train_inputs)?;
        let chol = factor(&d.train_inputs, &d.hyper)?;
        Ok(Self {
            train_inputs: d.train_inputs,
            alpha: d.alpha,
            hyper: d.hyper,
            mean_offset: d.mean_offset,
            log_marginal_likelihood: d.log_marginal_likelihood,
            chol,
        })
    }
}

fn validate_hyper(h: &GpHyper) -> Result<()> {
    if !(h.length_scale > 0.0 && h.signal_var > 0.0 && h.noise_var >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "GP hyperparameters need ℓ > 0, σf² > 0, σn² >= 0; got {h:?}"
        )));
    }
    Ok(())
}

fn kernel_matrix(x: &[Vec<f64>], h: &GpHyper) -> DMatrix<f64> {
    let n = x.len();
    let mut k = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..i {
            let v = rbf_kernel(&x[i], &x[j], h.length_scale, h.signal_var);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
        k[(i, i)] = h.signal_var + h.noise_var;
    }
    k
}

fn factor(x: &[Vec<f64>], h: &GpHyper) -> Result<Cholesky<f64, Dyn>> {
    kernel_matrix(x, h).cholesky().ok_or_else(|| {
        Error::Factorisation(format!(
            "{} points with noise variance {}",
            x.len(),
            h.noise_var
        ))
    })
}

fn fit_exact(x: Vec<Vec<f64>>, y: &[f64], hyper: GpHyper) -> Result<GpModel> {
    let n = x.len();
    let mean_offset = y.iter().sum::<f64>() / n as f64;
    let centred = DVector::from_iterator(n, y.iter().map(|v| v - mean_offset));
    let chol = factor(&x, &hyper)?;
    let alpha = chol.solve(&centred);
    let log_det_half: f64 = chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum();
    let lml = -0.5 * centred.dot(&alpha)
        - log_det_half
        - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln();
    Ok(GpModel {
        train_inputs: x,
        alpha: alpha.iter().copied().collect(),
        hyper,
        mean_offset,
        log_marginal_likelihood: lml,
        chol,
    })
}

fn subsample(n: usize, cap: usize, seed: u64) -> Vec<usize> {
    if n <= cap {
        return (0..n).collect();
    }
    let mut idx = index::sample(&mut seed::rng(seed), n, cap).into_vec();
    idx.sort_unstable();
    idx
}

impl GpModel {
    /// Fits the posterior. When `n > cap`, a seeded uniform subsample of
    /// `cap` points is used; with a grid configured, the hyperparameters
    /// maximising the log marginal likelihood on a smaller seeded subsample
    /// replace `config.hyper` (σf² is kept).
    pub fn fit<R: AsRef<[f64]>>(x: &[R], y: &[f64], config: &GpConfig, seed: u64) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::EmptyInput(
                "GP needs at least one training point".into(),
            ));
        }
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                got: y.len(),
            });
        }
        if config.cap == 0 {
            return Err(Error::InvalidArgument("GP cap must be >= 1".into()));
        }
        row_width(x)?;
        validate_hyper(&config.hyper)?;

        let mut hyper = config.hyper;
        if let Some(grid) = &config.grid {
            hyper = select_hyper(x, y, grid, hyper, seed::derive(seed, 1))?;
        }
        let idx = subsample(x.len(), config.cap, seed::derive(seed, 0));
        let xs: Vec<Vec<f64>> = idx.iter().map(|&i| x[i].as_ref().to_vec()).collect();
        let ys: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
        fit_exact(xs, &ys, hyper)
    }

    pub fn hyper(&self) -> &GpHyper {
        &self.hyper
    }

    pub fn mean_offset(&self) -> f64 {
        self.mean_offset
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn train_inputs(&self) -> &[Vec<f64>] {
        &self.train_inputs
    }

    pub fn log_marginal_likelihood(&self) -> f64 {
        self.log_marginal_likelihood
    }

    /// Lower-triangular factor of `K + σn²I`.
    pub fn cholesky_factor(&self) -> DMatrix<f64> {
        self.chol.l()
    }

    pub fn dim(&self) -> usize {
        self.train_inputs.first().map_or(0, Vec::len)
    }

    fn cross_kernel(&self, q: &[f64]) -> DVector<f64> {
        let h = &self.hyper;
        DVector::from_iterator(
            self.train_inputs.len(),
            self.train_inputs
                .iter()
                .map(|t| rbf_kernel(t, q, h.length_scale, h.signal_var)),
        )
    }

    pub fn predict_mean<R: AsRef<[f64]>>(&self, x: &[R]) -> Result<Vec<f64>> {
        check_width(x, self.dim())?;
        Ok(x.iter()
            .map(|q| {
                let h = &self.hyper;
                self.mean_offset
                    + self
                        .train_inputs
                        .iter()
                        .zip(&self.alpha)
                        .map(|(t, a)| a * rbf_kernel(t, q.as_ref(), h.length_scale, h.signal_var))
                        .sum::<f64>()
            })
            .collect())
    }

    pub fn predict<R: AsRef<[f64]>>(&self, x: &[R]) -> Result<GpPrediction> {
        check_width(x, self.dim())?;
        let alpha = DVector::from_column_slice(&self.alpha);
        let l = self.chol.l_dirty();
        let mut mean = Vec::with_capacity(x.len());
        let mut std = Vec::with_capacity(x.len());
        for q in x {
            let ks = self.cross_kernel(q.as_ref());
            mean.push(self.mean_offset + ks.dot(&alpha));
            let v = l
                .solve_lower_triangular(&ks)
                .ok_or_else(|| Error::Factorisation("singular triangular factor".into()))?;
            let var = self.hyper.signal_var - v.norm_squared();
            std.push(var.max(0.0).sqrt());
        }
        Ok(GpPrediction { mean, std })
    }
}

fn select_hyper<R: AsRef<[f64]>>(
    x: &[R],
    y: &[f64],
    grid: &GpGrid,
    base: GpHyper,
    seed: u64,
) -> Result<GpHyper> {
    if grid.length_scales.is_empty() || grid.noise_vars.is_empty() || grid.subsample == 0 {
        return Err(Error::InvalidArgument("GP grid must be non-empty".into()));
    }
    let idx = subsample(x.len(), grid.subsample, seed);
    let xs = to_rows(&idx.iter().map(|&i| x[i].as_ref()).collect::<Vec<_>>());
    let ys: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
    let mut best: Option<(f64, GpHyper)> = None;
    for &length_scale in &grid.length_scales {
        for &noise_var in &grid.noise_vars {
            let h = GpHyper {
                length_scale,
                noise_var,
                ..base
            };
            validate_hyper(&h)?;
            // candidates that fail to factor are skipped
            if let Ok(m) = fit_exact(xs.clone(), &ys, h) {
                let lml = m.log_marginal_likelihood;
                if best.as_ref().is_none_or(|(b, _)| lml > *b) {
                    best = Some((lml, h));
                }
            }
        }
    }
    best.map(|(_, h)| h)
        .ok_or_else(|| Error::Factorisation("no grid candidate could be factorised".into()))
}
