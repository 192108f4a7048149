use serde::{Deserialize, Serialize};

use super::confusion::ConfusionMatrix;
use super::folds::stratified_kfold;
use super::metrics::{accuracy, mse, r2};
use crate::error::{Error, Result};
use crate::pipeline::{train_single, train_two, PipelineConfig};
use crate::schema::{Dataset, SingleContactSample, TwoContactSample, TERMINALS};

/// A metric pooled over all test predictions plus its per-fold values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub pooled: f64,
    pub per_fold: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation across folds.
    pub std: f64,
}

impl Summary {
    fn new(pooled: f64, per_fold: Vec<f64>) -> Self {
        let n = per_fold.len() as f64;
        let mean = per_fold.iter().sum::<f64>() / n;
        let std = if per_fold.len() > 1 {
            (per_fold.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self {
            pooled,
            per_fold,
            mean,
            std,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionMetrics {
    pub n: usize,
    pub mse: Summary,
    pub r2: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionMetrics {
    pub accuracy: Summary,
    /// Classes `none` and `contact`.
    pub confusion: ConfusionMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalisationMetrics {
    pub n: usize,
    pub row_accuracy: Summary,
    pub col_accuracy: Summary,
    pub row_cm: ConfusionMatrix,
    pub col_cm: ConfusionMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingleReport {
    pub k: usize,
    pub seed: u64,
    pub n_samples: usize,
    pub stretch: RegressionMetrics,
    pub force: RegressionMetrics,
    pub detection: DetectionMetrics,
    pub localisation: LocalisationMetrics,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoordinateMetrics {
    pub accuracy: Summary,
    pub confusion: ConfusionMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharingGroup {
    pub n: usize,
    pub force1_mse: f64,
    pub force2_mse: f64,
    /// Over both force estimates together.
    pub mse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SharingBreakdown {
    /// Pairs on a common row or column terminal.
    pub shared: SharingGroup,
    pub disjoint: SharingGroup,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoReport {
    pub k: usize,
    pub seed: u64,
    pub n_samples: usize,
    pub x1: CoordinateMetrics,
    pub y1: CoordinateMetrics,
    pub x2: CoordinateMetrics,
    pub y2: CoordinateMetrics,
    pub force1: RegressionMetrics,
    pub force2: RegressionMetrics,
    pub sharing: SharingBreakdown,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum MetricsReport {
    Single(SingleReport),
    Two(TwoReport),
}

impl MetricsReport {
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| Error::Serde(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Serde(e.to_string()))
    }

    /// Named confusion matrices, in a stable order.
    pub fn confusion_matrices(&self) -> Vec<(&'static str, &ConfusionMatrix)> {
        match self {
            MetricsReport::Single(r) => vec![
                ("detection", &r.detection.confusion),
                ("row", &r.localisation.row_cm),
                ("col", &r.localisation.col_cm),
            ],
            MetricsReport::Two(r) => vec![
                ("x1", &r.x1.confusion),
                ("y1", &r.y1.confusion),
                ("x2", &r.x2.confusion),
                ("y2", &r.y2.confusion),
            ],
        }
    }
}

#[cfg(feature = "parallel")]
fn map_folds<T, F>(k: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    use rayon::prelude::*;
    (0..k).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn map_folds<T, F>(k: usize, f: F) -> Result<Vec<T>>
where
    F: Fn(usize) -> Result<T>,
{
    (0..k).map(f).collect()
}

fn tag_fold(e: Error, fold: usize) -> Error {
    match e {
        Error::Coverage { missing, .. } => Error::Coverage {
            fold: Some(fold),
            missing,
        },
        other => other,
    }
}

#[derive(Default)]
struct Pairs<T> {
    truth: Vec<T>,
    pred: Vec<T>,
}

impl<T: Clone> Pairs<T> {
    fn push(&mut self, t: T, p: T) {
        self.truth.push(t);
        self.pred.push(p);
    }

    fn extend(&mut self, other: &Pairs<T>) {
        self.truth.extend_from_slice(&other.truth);
        self.pred.extend_from_slice(&other.pred);
    }
}

fn regression(folds: &[&Pairs<f64>]) -> Result<RegressionMetrics> {
    let mut all = Pairs::default();
    let mut fold_mse = Vec::new();
    let mut fold_r2 = Vec::new();
    for p in folds {
        fold_mse.push(mse(&p.truth, &p.pred)?);
        fold_r2.push(r2(&p.truth, &p.pred)?);
        all.extend(p);
    }
    Ok(RegressionMetrics {
        n: all.truth.len(),
        mse: Summary::new(mse(&all.truth, &all.pred)?, fold_mse),
        r2: Summary::new(r2(&all.truth, &all.pred)?, fold_r2),
    })
}

fn classification(
    folds: &[&Pairs<usize>],
    labels: Vec<String>,
) -> Result<(Summary, ConfusionMatrix)> {
    let mut cm = ConfusionMatrix::new(labels);
    let mut per_fold = Vec::new();
    for p in folds {
        per_fold.push(accuracy(&p.truth, &p.pred)?);
        cm.add_all(&p.truth, &p.pred)?;
    }
    let pooled = cm.accuracy().unwrap_or(0.0);
    Ok((Summary::new(pooled, per_fold), cm))
}

fn subset<T: Copy>(all: &[T], idx: &[usize]) -> Vec<T> {
    idx.iter().map(|&i| all[i]).collect()
}

struct SingleFold {
    stretch: Pairs<f64>,
    detection: Pairs<usize>,
    force: Pairs<f64>,
    row: Pairs<usize>,
    col: Pairs<usize>,
}

fn terminal_labels(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("{prefix}{i}")).collect()
}

/// k-fold evaluation of the single-contact pipeline, stratified on the
/// pressed node. Force and localisation are scored on test samples that are
/// contacts and were detected as such.
pub fn cross_validate(
    ds: &Dataset,
    k: usize,
    seed: u64,
    config: &PipelineConfig,
) -> Result<MetricsReport> {
    let samples: &[SingleContactSample] = ds.as_single()?;
    if samples.is_empty() {
        return Err(Error::EmptyInput(
            "cross-validation over an empty dataset".into(),
        ));
    }
    let strata: Vec<u64> = samples.iter().map(|s| s.node.id() as u64).collect();
    let plan = stratified_kfold(&strata, k, seed)?;

    let outcomes = map_folds(k, |f| {
        let train = subset(samples, &plan.train_indices(f));
        let test = subset(samples, &plan.test_indices(f));
        let model = train_single(&train, config).map_err(|e| tag_fold(e, f))?;
        let mut out = SingleFold {
            stretch: Pairs::default(),
            detection: Pairs::default(),
            force: Pairs::default(),
            row: Pairs::default(),
            col: Pairs::default(),
        };
        for s in &test {
            let est = model.infer(&s.frame);
            out.stretch.push(s.stretch.value(), est.stretch);
            out.detection
                .push(s.is_contact() as usize, est.contact_detected as usize);
            if s.is_contact() && est.contact_detected {
                out.force.push(s.force.newtons(), est.force);
                out.row
                    .push(s.node.y() as usize - 1, est.node.y() as usize - 1);
                out.col
                    .push(s.node.x() as usize - 1, est.node.x() as usize - 1);
            }
        }
        Ok(out)
    })?;

    let pick = |g: fn(&SingleFold) -> &Pairs<f64>| outcomes.iter().map(g).collect::<Vec<_>>();
    let pick_c = |g: fn(&SingleFold) -> &Pairs<usize>| outcomes.iter().map(g).collect::<Vec<_>>();
    let (det_acc, det_cm) = classification(
        &pick_c(|o| &o.detection),
        vec!["none".into(), "contact".into()],
    )?;
    let (row_acc, row_cm) = classification(&pick_c(|o| &o.row), terminal_labels("y", TERMINALS))?;
    let (col_acc, col_cm) = classification(&pick_c(|o| &o.col), terminal_labels("x", TERMINALS))?;

    Ok(MetricsReport::Single(SingleReport {
        k,
        seed,
        n_samples: samples.len(),
        stretch: regression(&pick(|o| &o.stretch))?,
        force: regression(&pick(|o| &o.force))?,
        detection: DetectionMetrics {
            accuracy: det_acc,
            confusion: det_cm,
        },
        localisation: LocalisationMetrics {
            n: row_cm.total() as usize,
            row_accuracy: row_acc,
            col_accuracy: col_acc,
            row_cm,
            col_cm,
        },
        notes: vec![
            "pooled: metric over all test predictions; mean and std: across folds".into(),
            "force and localisation use test samples that are contacts and were detected".into(),
            "confusion matrices are summed over folds; rows are true classes".into(),
        ],
    }))
}

struct TwoFold {
    coords: [Pairs<usize>; 4],
    force1: Pairs<f64>,
    force2: Pairs<f64>,
    shared: Vec<bool>,
}

fn sharing_group(folds: &[TwoFold], shared: bool) -> Result<SharingGroup> {
    let mut f1 = Pairs::default();
    let mut f2 = Pairs::default();
    for o in folds {
        for (i, &s) in o.shared.iter().enumerate() {
            if s == shared {
                f1.push(o.force1.truth[i], o.force1.pred[i]);
                f2.push(o.force2.truth[i], o.force2.pred[i]);
            }
        }
    }
    let mut both = Pairs::default();
    both.extend(&f1);
    both.extend(&f2);
    Ok(SharingGroup {
        n: f1.truth.len(),
        force1_mse: mse(&f1.truth, &f1.pred)?,
        force2_mse: mse(&f2.truth, &f2.pred)?,
        mse: mse(&both.truth, &both.pred)?,
    })
}

/// k-fold evaluation of the two-contact models, stratified on the node pair.
/// Coordinates are scored per classifier, before the estimates are ordered.
pub fn cross_validate_two(
    ds: &Dataset,
    k: usize,
    seed: u64,
    config: &PipelineConfig,
) -> Result<MetricsReport> {
    let samples: &[TwoContactSample] = ds.as_two()?;
    if samples.is_empty() {
        return Err(Error::EmptyInput(
            "cross-validation over an empty dataset".into(),
        ));
    }
    let strata: Vec<u64> = samples
        .iter()
        .map(|s| s.node1.id() as u64 * 101 + s.node2.id() as u64)
        .collect();
    let plan = stratified_kfold(&strata, k, seed)?;
    let axes = &config.two_axes;
    let class = |axis: &[u8], v: u8| axis.iter().position(|a| *a == v);

    let outcomes = map_folds(k, |f| {
        let train = subset(samples, &plan.train_indices(f));
        let test = subset(samples, &plan.test_indices(f));
        let model = train_two(&train, config).map_err(|e| tag_fold(e, f))?;
        let mut out = TwoFold {
            coords: Default::default(),
            force1: Pairs::default(),
            force2: Pairs::default(),
            shared: Vec::new(),
        };
        for s in &test {
            let z = model.standardize(&s.frame);
            let pred = model.coordinates(&z);
            let truth = [s.node1.x(), s.node1.y(), s.node2.x(), s.node2.y()];
            for c in 0..4usize {
                let axis = if c.is_multiple_of(2) { &axes.x } else { &axes.y };
                let t = class(axis, truth[c]).ok_or_else(|| {
                    Error::Validation(format!(
                        "test coordinate {} is not on the node axes",
                        truth[c]
                    ))
                })?;
                out.coords[c].push(
                    t,
                    class(axis, pred[c]).expect("predictions lie on the axes"),
                );
            }
            let (f1, f2) = model.forces(&z);
            out.force1.push(s.force1.newtons(), f1);
            out.force2.push(s.force2.newtons(), f2);
            out.shared.push(s.shares_terminal());
        }
        Ok(out)
    })?;

    let coordinate = |c: usize, prefix: &str| -> Result<CoordinateMetrics> {
        let axis = if c.is_multiple_of(2) { &axes.x } else { &axes.y };
        let labels = axis.iter().map(|v| format!("{prefix}{v}")).collect();
        let folds: Vec<&Pairs<usize>> = outcomes.iter().map(|o| &o.coords[c]).collect();
        let (accuracy, confusion) = classification(&folds, labels)?;
        Ok(CoordinateMetrics {
            accuracy,
            confusion,
        })
    };

    Ok(MetricsReport::Two(TwoReport {
        k,
        seed,
        n_samples: samples.len(),
        x1: coordinate(0, "x")?,
        y1: coordinate(1, "y")?,
        x2: coordinate(2, "x")?,
        y2: coordinate(3, "y")?,
        force1: regression(&outcomes.iter().map(|o| &o.force1).collect::<Vec<_>>())?,
        force2: regression(&outcomes.iter().map(|o| &o.force2).collect::<Vec<_>>())?,
        sharing: SharingBreakdown {
            shared: sharing_group(&outcomes, true)?,
            disjoint: sharing_group(&outcomes, false)?,
        },
        notes: vec![
            "pooled: metric over all test predictions; mean and std: across folds".into(),
            "contact 1 is the contact with the smaller node id".into(),
            "confusion matrices are summed over folds; rows are true classes".into(),
        ],
    }))
}
