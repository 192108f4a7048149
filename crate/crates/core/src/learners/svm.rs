//! Binary RBF support vector classifier trained by sequential minimal
//! optimisation.
//!
//! The dual `min ½αᵀQα − eᵀα` s.t. `yᵀα = 0`, `0 ≤ αᵢ ≤ C·w(yᵢ)` is solved
//! two multipliers at a time. The working pair is picked by maximal violation
//! for the first index and second-order gain for the second; the gradient is
//! kept up to date so each step costs two kernel rows.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use super::kernel::rbf_gamma;
use super::{check_width, row_width, to_rows};
use crate::error::{Error, Result};

const TAU: f64 = 1e-12;
const CACHE_BYTES: usize = 256 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClassWeights {
    /// Inverse class frequency, `n / (2·n_class)`.
    Balanced,
    Fixed {
        negative: f64,
        positive: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvmConfig {
    pub c: f64,
    /// RBF width; `None` uses `1/d`, i.e. unit-variance features.
    pub gamma: Option<f64>,
    pub class_weights: ClassWeights,
    pub tol: f64,
    pub max_passes: usize,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            gamma: None,
            class_weights: ClassWeights::Balanced,
            tol: 1e-3,
            max_passes: 10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AppliedWeights {
    pub negative: f64,
    pub positive: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub support_inputs: Vec<Vec<f64>>,
    /// `αᵢyᵢ` for each support vector.
    pub dual_coefs: Vec<f64>,
    pub bias: f64,
    pub kernel_gamma: f64,
    pub c: f64,
    pub class_weights: AppliedWeights,
    pub iterations: usize,
    pub converged: bool,
}

struct KernelRows<'a> {
    x: &'a [Vec<f64>],
    gamma: f64,
    rows: HashMap<usize, Vec<f64>>,
    order: VecDeque<usize>,
    capacity: usize,
}

impl<'a> KernelRows<'a> {
    fn new(x: &'a [Vec<f64>], gamma: f64) -> Self {
        let row_bytes = x.len().max(1) * std::mem::size_of::<f64>();
        Self {
            x,
            gamma,
            rows: HashMap::new(),
            order: VecDeque::new(),
            capacity: (CACHE_BYTES / row_bytes).max(2),
        }
    }

    fn ensure(&mut self, i: usize) {
        if self.rows.contains_key(&i) {
            return;
        }
        if self.rows.len() >= self.capacity {
            if let Some(old) = self.order.pop_front() {
                self.rows.remove(&old);
            }
        }
        let xi = &self.x[i];
        let row = self
            .x
            .iter()
            .map(|xj| rbf_gamma(xi, xj, self.gamma))
            .collect();
        self.rows.insert(i, row);
        self.order.push_back(i);
    }

    fn pair(&mut self, i: usize, j: usize) -> (&[f64], &[f64]) {
        self.ensure(i);
        self.ensure(j);
        (&self.rows[&i], &self.rows[&j])
    }

    fn row(&mut self, i: usize) -> &[f64] {
        self.ensure(i);
        &self.rows[&i]
    }
}

impl SvmModel {
    /// Labels must be −1 or +1 and both classes must be present.
    pub fn fit<R: AsRef<[f64]>>(x: &[R], y: &[i8], config: &SvmConfig) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                got: y.len(),
            });
        }
        if x.is_empty() {
            return Err(Error::EmptyInput("SVM needs training samples".into()));
        }
        if let Some(bad) = y.iter().find(|v| **v != 1 && **v != -1) {
            return Err(Error::InvalidArgument(format!("SVM label {bad} is not ±1")));
        }
        let n_pos = y.iter().filter(|v| **v == 1).count();
        let n_neg = y.len() - n_pos;
        if n_pos == 0 || n_neg == 0 {
            return Err(Error::DegenerateLabels(
                "SVM training needs both positive and negative samples".into(),
            ));
        }
        if !(config.c > 0.0 && config.tol > 0.0) {
            return Err(Error::InvalidArgument("SVM needs C > 0 and tol > 0".into()));
        }
        let d = row_width(x)?;
        let gamma = config.gamma.unwrap_or(1.0 / d.max(1) as f64);
        if gamma <= 0.0 {
            return Err(Error::InvalidArgument("SVM gamma must be positive".into()));
        }
        let weights = match config.class_weights {
            ClassWeights::Balanced => {
                let n = y.len() as f64;
                AppliedWeights {
                    negative: n / (2.0 * n_neg as f64),
                    positive: n / (2.0 * n_pos as f64),
                }
            }
            ClassWeights::Fixed { negative, positive } => AppliedWeights { negative, positive },
        };
        if !(weights.negative > 0.0 && weights.positive > 0.0) {
            return Err(Error::InvalidArgument(
                "class weights must be positive".into(),
            ));
        }

        let rows = to_rows(x);
        let n = rows.len();
        let yf: Vec<f64> = y.iter().map(|v| *v as f64).collect();
        let bound: Vec<f64> = y
            .iter()
            .map(|v| {
                config.c
                    * if *v > 0 {
                        weights.positive
                    } else {
                        weights.negative
                    }
            })
            .collect();
        let mut alpha = vec![0.0; n];
        let mut grad = vec![-1.0; n];
        let mut cache = KernelRows::new(&rows, gamma);
        let budget = config.max_passes.max(1) * n.max(1000);
        let mut iterations = 0;
        let mut converged = false;

        while iterations < budget {
            // first index: maximal violator in I_up
            let mut gmax = f64::NEG_INFINITY;
            let mut i = None;
            for t in 0..n {
                let up = if yf[t] > 0.0 {
                    alpha[t] < bound[t]
                } else {
                    alpha[t] > 0.0
                };
                if up && -yf[t] * grad[t] >= gmax {
                    gmax = -yf[t] * grad[t];
                    i = Some(t);
                }
            }
            let Some(i) = i else {
                converged = true;
                break;
            };
            let ki = cache.row(i).to_vec();

            // second index: best second-order gain in I_low
            let mut gmin = f64::INFINITY;
            let mut best_obj = f64::INFINITY;
            let mut j = None;
            for t in 0..n {
                let low = if yf[t] > 0.0 {
                    alpha[t] > 0.0
                } else {
                    alpha[t] < bound[t]
                };
                if !low {
                    continue;
                }
                let v = -yf[t] * grad[t];
                gmin = gmin.min(v);
                let b = gmax - v;
                if b > 0.0 {
                    let mut a = 2.0 - 2.0 * ki[t];
                    if a <= 0.0 {
                        a = TAU;
                    }
                    let obj = -(b * b) / a;
                    if obj <= best_obj {
                        best_obj = obj;
                        j = Some(t);
                    }
                }
            }
            if gmax - gmin < config.tol {
                converged = true;
                break;
            }
            let Some(j) = j else {
                converged = true;
                break;
            };

            let (ci, cj) = (bound[i], bound[j]);
            let (old_i, old_j) = (alpha[i], alpha[j]);
            let (kii, kjj, kij) = (1.0, 1.0, ki[j]);
            let mut quad = kii + kjj - 2.0 * kij;
            if quad <= 0.0 {
                quad = TAU;
            }
            let (mut ai, mut aj) = (old_i, old_j);
            if yf[i] != yf[j] {
                let delta = (-grad[i] - grad[j]) / quad;
                let diff = ai - aj;
                ai += delta;
                aj += delta;
                if diff > 0.0 {
                    if aj < 0.0 {
                        aj = 0.0;
                        ai = diff;
                    }
                } else if ai < 0.0 {
                    ai = 0.0;
                    aj = -diff;
                }
                if diff > ci - cj {
                    if ai > ci {
                        ai = ci;
                        aj = ci - diff;
                    }
                } else if aj > cj {
                    aj = cj;
                    ai = cj + diff;
                }
            } else {
                let delta = (grad[i] - grad[j]) / quad;
                let sum = ai + aj;
                ai -= delta;
                aj += delta;
                if sum > ci {
                    if ai > ci {
                        ai = ci;
                        aj = sum - ci;
                    }
                } else if aj < 0.0 {
                    aj = 0.0;
                    ai = sum;
                }
                if sum > cj {
                    if aj > cj {
                        aj = cj;
                        ai = sum - cj;
                    }
                } else if ai < 0.0 {
                    ai = 0.0;
                    aj = sum;
                }
            }
            alpha[i] = ai;
            alpha[j] = aj;
            let (di, dj) = (ai - old_i, aj - old_j);
            let (ri, rj) = cache.pair(i, j);
            for t in 0..n {
                grad[t] += yf[t] * (yf[i] * ri[t] * di + yf[j] * rj[t] * dj);
            }
            iterations += 1;
        }

        // bias from free multipliers, else midpoint of the feasible interval
        let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
        let (mut sum, mut free) = (0.0, 0usize);
        for t in 0..n {
            let yg = yf[t] * grad[t];
            if alpha[t] >= bound[t] {
                if yf[t] < 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else if alpha[t] <= 0.0 {
                if yf[t] > 0.0 {
                    ub = ub.min(yg);
                } else {
                    lb = lb.max(yg);
                }
            } else {
                free += 1;
                sum += yg;
            }
        }
        let rho = if free > 0 {
            sum / free as f64
        } else {
            (ub + lb) / 2.0
        };

        let mut support_inputs = Vec::new();
        let mut dual_coefs = Vec::new();
        for t in 0..n {
            if alpha[t] > 0.0 {
                support_inputs.push(rows[t].clone());
                dual_coefs.push(alpha[t] * yf[t]);
            }
        }
        Ok(Self {
            support_inputs,
            dual_coefs,
            bias: -rho,
            kernel_gamma: gamma,
            c: config.c,
            class_weights: weights,
            iterations,
            converged,
        })
    }

    pub fn dim(&self) -> usize {
        self.support_inputs.first().map_or(0, Vec::len)
    }

    pub fn decision_row(&self, q: &[f64]) -> f64 {
        self.support_inputs
            .iter()
            .zip(&self.dual_coefs)
            .map(|(s, c)| c * rbf_gamma(s, q, self.kernel_gamma))
            .sum::<f64>()
            + self.bias
    }

    pub fn decision_function<R: AsRef<[f64]>>(&self, x: &[R]) -> Result<Vec<f64>> {
        check_width(x, self.dim())?;
        Ok(x.iter().map(|q| self.decision_row(q.as_ref())).collect())
    }

    /// Sign of the decision value; an exact zero counts as positive.
    pub fn predict<R: AsRef<[f64]>>(&self, x: &[R]) -> Result<Vec<i8>> {
        Ok(self
            .decision_function(x)?
            .into_iter()
            .map(|v| if v >= 0.0 { 1 } else { -1 })
            .collect())
    }

    /// Upper bound of each support vector's multiplier.
    pub fn bound_for(&self, dual_coef: f64) -> f64 {
        self.c
            * if dual_coef > 0.0 {
                self.class_weights.positive
            } else {
                self.class_weights.negative
            }
    }
}
