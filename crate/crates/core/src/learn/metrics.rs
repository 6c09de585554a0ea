use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Counts indexed `[gold][predicted]` over a fixed class list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub classes: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(classes: Vec<String>) -> Self {
        let k = classes.len();
        ConfusionMatrix {
            classes,
            counts: vec![vec![0; k]; k],
        }
    }

    pub fn from_counts(classes: Vec<String>, counts: Vec<Vec<u64>>) -> Self {
        assert!(counts.len() == classes.len() && counts.iter().all(|r| r.len() == classes.len()));
        ConfusionMatrix { classes, counts }
    }

    fn index(&self, class: &str) -> usize {
        self.classes
            .iter()
            .position(|c| c == class)
            .unwrap_or_else(|| panic!("class {class:?} not in confusion matrix"))
    }

    pub fn add(&mut self, gold: &str, predicted: &str) {
        let (g, p) = (self.index(gold), self.index(predicted));
        self.counts[g][p] += 1;
    }

    pub fn merge(&mut self, other: &ConfusionMatrix) {
        assert_eq!(self.classes, other.classes);
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn row_sum(&self, c: usize) -> u64 {
        self.counts[c].iter().sum()
    }

    pub fn col_sum(&self, c: usize) -> u64 {
        self.counts.iter().map(|r| r[c]).sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.classes.len()).map(|c| self.counts[c][c]).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
    pub predicted: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub per_class: Vec<ClassMetrics>,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub accuracy: f64,
    pub mcc: f64,
    /// Classes never predicted; their precision is 0 by convention.
    pub never_predicted: Vec<String>,
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

pub fn evaluate(cm: &ConfusionMatrix) -> Result<Metrics> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::EmptyMatrix);
    }
    let k = cm.classes.len();
    let mut per_class = Vec::with_capacity(k);
    let mut never_predicted = Vec::new();
    for c in 0..k {
        let tp = cm.counts[c][c];
        let predicted = cm.col_sum(c);
        let support = cm.row_sum(c);
        let precision = ratio(tp, predicted);
        let recall = ratio(tp, support);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        if predicted == 0 {
            never_predicted.push(cm.classes[c].clone());
        }
        per_class.push(ClassMetrics {
            class: cm.classes[c].clone(),
            precision,
            recall,
            f1,
            support,
            predicted,
        });
    }
    let mean = |f: fn(&ClassMetrics) -> f64| per_class.iter().map(f).sum::<f64>() / k as f64;
    Ok(Metrics {
        macro_precision: mean(|m| m.precision),
        macro_recall: mean(|m| m.recall),
        macro_f1: mean(|m| m.f1),
        accuracy: ratio(cm.trace(), total),
        mcc: mcc_multiclass(cm)?,
        per_class,
        never_predicted,
    })
}

/// Multiclass Matthews correlation in covariance form:
/// `(N·tr − Σ t_k p_k) / sqrt((N² − Σ p_k²)(N² − Σ t_k²))` with gold row
/// sums `t` and predicted column sums `p`. Zero when either factor is zero.
pub fn mcc_multiclass(cm: &ConfusionMatrix) -> Result<f64> {
    let n = cm.total() as f64;
    if n == 0.0 {
        return Err(Error::EmptyMatrix);
    }
    let k = cm.classes.len();
    let t: Vec<f64> = (0..k).map(|c| cm.row_sum(c) as f64).collect();
    let p: Vec<f64> = (0..k).map(|c| cm.col_sum(c) as f64).collect();
    let cov = n * cm.trace() as f64 - t.iter().zip(&p).map(|(a, b)| a * b).sum::<f64>();
    let vp = n * n - p.iter().map(|x| x * x).sum::<f64>();
    let vt = n * n - t.iter().map(|x| x * x).sum::<f64>();
    if vp == 0.0 || vt == 0.0 {
        return Ok(0.0);
    }
    Ok((cov / (vp * vt).sqrt()).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cm(counts: Vec<Vec<u64>>) -> ConfusionMatrix {
        let classes = (0..counts.len()).map(|i| format!("c{i}")).collect();
        ConfusionMatrix::from_counts(classes, counts)
    }

    #[test]
    fn perfect_matrix() {
        let m = evaluate(&cm(vec![vec![5, 0], vec![0, 5]])).unwrap();
        assert_eq!((m.macro_precision, m.macro_recall, m.macro_f1, m.mcc), (1.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn worked_example() {
        let m = evaluate(&cm(vec![vec![4, 1], vec![2, 3]])).unwrap();
        let c0 = &m.per_class[0];
        assert!((c0.precision - 4.0 / 6.0).abs() < 1e-15);
        assert!((c0.recall - 0.8).abs() < 1e-15);
        assert!((c0.f1 - 0.727_272_727_272_727_3).abs() < 1e-12);
        assert!((m.mcc - 10.0 / 600f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn never_predicted_class() {
        let m = evaluate(&cm(vec![vec![5, 0], vec![5, 0]])).unwrap();
        assert_eq!(m.per_class[1].precision, 0.0);
        assert_eq!(m.never_predicted, vec!["c1".to_string()]);
        assert_eq!(m.mcc, 0.0);
        assert!(matches!(evaluate(&cm(vec![vec![0, 0], vec![0, 0]])), Err(Error::EmptyMatrix)));
    }
}
