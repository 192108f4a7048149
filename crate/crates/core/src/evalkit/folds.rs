use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    /// Test fold of each sample.
    pub assignments: Vec<usize>,
    pub strata: Vec<u64>,
}

impl FoldPlan {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] == fold)
            .collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] != fold)
            .collect()
    }

    /// Count of each stratum in each fold, strata in ascending order.
    pub fn stratum_counts(&self) -> BTreeMap<u64, Vec<usize>> {
        let mut out: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
        for (s, f) in self.strata.iter().zip(&self.assignments) {
            out.entry(*s).or_insert_with(|| vec![0; self.k])[*f] += 1;
        }
        out
    }
}

/// Shuffles each stratum with its own seeded stream and deals its members
/// to folds 0, 1, …, k−1, 0, … . Strata smaller than `k` leave the later
/// folds without a member of that stratum.
pub fn stratified_kfold(strata: &[u64], k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!(
            "k must be at least 2, got {k}"
        )));
    }
    let mut groups: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for (i, s) in strata.iter().enumerate() {
        groups.entry(*s).or_default().push(i);
    }
    let mut assignments = vec![0; strata.len()];
    for (label, mut members) in groups {
        members.shuffle(&mut seed::rng(seed::derive(seed, label)));
        for (j, i) in members.into_iter().enumerate() {
            assignments[i] = j % k;
        }
    }
    Ok(FoldPlan {
        k,
        assignments,
        strata: strata.to_vec(),
    })
}
