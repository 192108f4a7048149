//! CART classification trees with Gini splits, bagged into a forest.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{check_width, row_width};
use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeatureSubset {
    /// `⌈√d⌉` candidate features per split.
    Sqrt,
    All,
    Count(usize),
}

impl FeatureSubset {
    fn resolve(self, d: usize) -> usize {
        match self {
            FeatureSubset::Sqrt => ((d as f64).sqrt().ceil() as usize).clamp(1, d.max(1)),
            FeatureSubset::All => d,
            FeatureSubset::Count(k) => k.clamp(1, d.max(1)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// `None` grows until leaves are pure or too small.
    pub max_depth: Option<usize>,
    pub min_leaf: usize,
    pub features_per_split: FeatureSubset,
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 100,
            max_depth: None,
            min_leaf: 1,
            features_per_split: FeatureSubset::Sqrt,
            bootstrap: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TreeNode {
    /// Rows with `x[feature] <= threshold` go left.
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    /// Class counts of the training rows that reached this leaf.
    Leaf { counts: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTree {
    pub nodes: Vec<TreeNode>,
}

/// Chosen split of a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    pub feature: usize,
    pub threshold: f64,
    pub gain: f64,
}

pub fn gini(counts: &[usize], total: usize) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let t = total as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / t).powi(2)).sum::<f64>()
}

fn argmax_low(values: impl Iterator<Item = usize>) -> usize {
    let mut best = (0, 0);
    for (i, v) in values.enumerate() {
        if v > best.1 {
            best = (i, v);
        }
    }
    best.0
}

/// Best Gini split of `rows` over the listed features: thresholds at
/// midpoints between adjacent distinct values, both children holding at
/// least `min_leaf` rows. Ties keep the earlier feature and lower threshold.
pub fn best_split<R: AsRef<[f64]>>(
    x: &[R],
    y: &[usize],
    rows: &[usize],
    features: &[usize],
    n_classes: usize,
    min_leaf: usize,
) -> Option<Split> {
    let n = rows.len();
    let mut parent = vec![0usize; n_classes];
    for &r in rows {
        parent[y[r]] += 1;
    }
    let parent_gini = gini(&parent, n);
    let mut best: Option<Split> = None;
    let mut sorted: Vec<(f64, usize)> = Vec::with_capacity(n);
    let mut left = vec![0usize; n_classes];
    let mut right = vec![0usize; n_classes];
    for &f in features {
        sorted.clear();
        sorted.extend(rows.iter().map(|&r| (x[r].as_ref()[f], y[r])));
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        left.iter_mut().for_each(|c| *c = 0);
        right.copy_from_slice(&parent);
        for p in 0..n.saturating_sub(1) {
            let (v, c) = sorted[p];
            left[c] += 1;
            right[c] -= 1;
            let next = sorted[p + 1].0;
            if v >= next {
                continue;
            }
            let nl = p + 1;
            let nr = n - nl;
            if nl < min_leaf || nr < min_leaf {
                continue;
            }
            let child = (nl as f64 * gini(&left, nl) + nr as f64 * gini(&right, nr)) / n as f64;
            let gain = parent_gini - child;
            if best.is_none_or(|b| gain > b.gain) {
                let mid = v + (next - v) / 2.0;
                let threshold = if mid < next { mid } else { v };
                best = Some(Split {
                    feature: f,
                    threshold,
                    gain,
                });
            }
        }
    }
    best
}

struct Grower<'a, R> {
    x: &'a [R],
    y: &'a [usize],
    n_classes: usize,
    n_features: usize,
    per_split: usize,
    config: &'a ForestConfig,
}

impl<R: AsRef<[f64]>> Grower<'_, R> {
    fn grow(&self, rows: Vec<usize>, rng: &mut impl Rng) -> DecisionTree {
        let mut nodes = Vec::new();
        let mut stack = vec![(rows, 0usize, None::<(usize, bool)>)];
        while let Some((rows, depth, parent)) = stack.pop() {
            let id = nodes.len();
            if let Some((p, is_left)) = parent {
                if let TreeNode::Split { left, right, .. } = &mut nodes[p] {
                    if is_left {
                        *left = id;
                    } else {
                        *right = id;
                    }
                }
            }
            let mut counts = vec![0usize; self.n_classes];
            for &r in &rows {
                counts[self.y[r]] += 1;
            }
            let pure = counts.iter().filter(|c| **c > 0).count() <= 1;
            let depth_capped = self.config.max_depth.is_some_and(|m| depth >= m);
            let split = if pure || depth_capped || rows.len() < 2 * self.config.min_leaf.max(1) {
                None
            } else {
                self.choose_split(&rows, rng)
            };
            match split {
                None => nodes.push(TreeNode::Leaf { counts }),
                Some(s) => {
                    nodes.push(TreeNode::Split {
                        feature: s.feature,
                        threshold: s.threshold,
                        left: usize::MAX,
                        right: usize::MAX,
                    });
                    let (l, r): (Vec<usize>, Vec<usize>) = rows
                        .into_iter()
                        .partition(|&i| self.x[i].as_ref()[s.feature] <= s.threshold);
                    // right pushed first so the left subtree is numbered first
                    stack.push((r, depth + 1, Some((id, false))));
                    stack.push((l, depth + 1, Some((id, true))));
                }
            }
        }
        DecisionTree { nodes }
    }

    /// Scans a random subset of features; if none of them can split the
    /// node, keeps drawing from the remaining features.
    fn choose_split(&self, rows: &[usize], rng: &mut impl Rng) -> Option<Split> {
        let mut order: Vec<usize> = (0..self.n_features).collect();
        if self.per_split < self.n_features {
            order.shuffle(rng);
        }
        let min_leaf = self.config.min_leaf.max(1);
        let first = &order[..self.per_split];
        best_split(self.x, self.y, rows, first, self.n_classes, min_leaf).or_else(|| {
            order[self.per_split..]
                .iter()
                .find_map(|&f| best_split(self.x, self.y, rows, &[f], self.n_classes, min_leaf))
        })
    }
}

impl DecisionTree {
    pub fn leaf_counts(&self, q: &[f64]) -> &[usize] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                TreeNode::Leaf { counts } => return counts,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if q[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    }
                }
            }
        }
    }

    /// Majority class at the leaf; ties go to the smaller index.
    pub fn predict_row(&self, q: &[f64]) -> usize {
        argmax_low(self.leaf_counts(q).iter().copied())
    }

    pub fn root(&self) -> &TreeNode {
        &self.nodes[0]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForestPrediction {
    pub labels: Vec<usize>,
    /// Fraction of trees voting for each class, per query row.
    pub votes: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<DecisionTree>,
    pub n_classes: usize,
    pub n_features: usize,
    pub config: ForestConfig,
}

impl ForestModel {
    /// Labels are class indices in `0..n_classes`.
    pub fn fit<R: AsRef<[f64]> + Sync>(
        x: &[R],
        y: &[usize],
        n_classes: usize,
        config: &ForestConfig,
    ) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::EmptyInput("forest needs training samples".into()));
        }
        if x.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                got: y.len(),
            });
        }
        if let Some(bad) = y.iter().find(|c| **c >= n_classes) {
            return Err(Error::InvalidArgument(format!(
                "class label {bad} outside 0..{n_classes}"
            )));
        }
        if config.n_trees == 0 {
            return Err(Error::InvalidArgument(
                "forest needs at least one tree".into(),
            ));
        }
        let d = row_width(x)?;
        let grower = Grower {
            x,
            y,
            n_classes,
            n_features: d,
            per_split: config.features_per_split.resolve(d),
            config,
        };
        let n = x.len();
        let build = |t: usize| {
            let mut rng = seed::rng(seed::derive(config.seed, t as u64));
            let rows: Vec<usize> = if config.bootstrap {
                (0..n).map(|_| rng.random_range(0..n)).collect()
            } else {
                (0..n).collect()
            };
            grower.grow(rows, &mut rng)
        };
        #[cfg(feature = "parallel")]
        let trees = {
            use rayon::prelude::*;
            (0..config.n_trees).into_par_iter().map(build).collect()
        };
        #[cfg(not(feature = "parallel"))]
        let trees = (0..config.n_trees).map(build).collect();
        Ok(Self {
            trees,
            n_classes,
            n_features: d,
            config: config.clone(),
        })
    }

    pub fn predict<R: AsRef<[f64]>>(&self, x: &[R]) -> Result<ForestPrediction> {
        check_width(x, self.n_features)?;
        let mut labels = Vec::with_capacity(x.len());
        let mut votes = Vec::with_capacity(x.len());
        let total = self.trees.len() as f64;
        for q in x {
            let mut tally = vec![0usize; self.n_classes];
            for t in &self.trees {
                tally[t.predict_row(q.as_ref())] += 1;
            }
            labels.push(argmax_low(tally.iter().copied()));
            votes.push(tally.iter().map(|&v| v as f64 / total).collect());
        }
        Ok(ForestPrediction { labels, votes })
    }
}
