use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub labels: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

pub fn confusion(truth: &[usize], pred: &[usize], n_classes: usize) -> Result<ConfusionMatrix> {
    let mut cm = ConfusionMatrix::new((0..n_classes).map(|c| c.to_string()).collect());
    cm.add_all(truth, pred)?;
    Ok(cm)
}

impl ConfusionMatrix {
    pub fn new(labels: Vec<String>) -> Self {
        let n = labels.len();
        Self {
            labels,
            counts: vec![vec![0; n]; n],
        }
    }

    pub fn n_classes(&self) -> usize {
        self.labels.len()
    }

    pub fn add_all(&mut self, truth: &[usize], pred: &[usize]) -> Result<()> {
        if truth.len() != pred.len() {
            return Err(Error::DimensionMismatch {
                expected: truth.len(),
                got: pred.len(),
            });
        }
        let n = self.n_classes();
        if let Some(bad) = truth.iter().chain(pred).find(|&&c| c >= n) {
            return Err(Error::InvalidArgument(format!(
                "label {bad} outside 0..{n}"
            )));
        }
        for (&t, &p) in truth.iter().zip(pred) {
            self.counts[t][p] += 1;
        }
        Ok(())
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) -> Result<()> {
        if other.labels != self.labels {
            return Err(Error::InvalidArgument(
                "confusion matrices over different classes".into(),
            ));
        }
        for (row, orow) in self.counts.iter_mut().zip(&other.counts) {
            for (c, o) in row.iter_mut().zip(orow) {
                *c += o;
            }
        }
        Ok(())
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn row_sums(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn accuracy(&self) -> Option<f64> {
        let total = self.total();
        let trace: u64 = (0..self.n_classes()).map(|i| self.counts[i][i]).sum();
        (total > 0).then(|| trace as f64 / total as f64)
    }

    /// Each diagonal entry exceeds every other entry of its row.
    pub fn strictly_diagonal_dominant(&self) -> bool {
        self.counts
            .iter()
            .enumerate()
            .all(|(i, row)| row.iter().enumerate().all(|(j, &c)| j == i || row[i] > c))
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("true\\pred");
        for l in &self.labels {
            let _ = write!(s, ",{l}");
        }
        s.push('\n');
        for (l, row) in self.labels.iter().zip(&self.counts) {
            s.push_str(l);
            for c in row {
                let _ = write!(s, ",{c}");
            }
            s.push('\n');
        }
        s
    }

    /// Plain-text greymap; each cell is a `cell`×`cell` block whose
    /// brightness is its share of the row total.
    pub fn to_pgm(&self, cell: usize) -> String {
        let n = self.n_classes();
        let side = n * cell;
        let sums = self.row_sums();
        let mut s = format!("P2\n{side} {side}\n255\n");
        for (row, &sum) in self.counts.iter().zip(&sums) {
            let shades: Vec<u64> = row
                .iter()
                .map(|&c| (c * 255 + sum / 2).checked_div(sum).unwrap_or(0))
                .collect();
            let mut line = String::new();
            for (j, v) in shades.iter().enumerate() {
                for k in 0..cell {
                    if j + k > 0 {
                        line.push(' ');
                    }
                    let _ = write!(line, "{v}");
                }
            }
            for _ in 0..cell {
                s.push_str(&line);
                s.push('\n');
            }
        }
        s
    }
}
