use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureGroup, FeatureSchema, FeatureVector};

/// Feature rows with a parallel list of class names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledDataset {
    pub schema: FeatureSchema,
    pub rows: Vec<FeatureVector>,
    pub labels: Vec<String>,
}

impl LabeledDataset {
    pub fn new(schema: FeatureSchema, rows: Vec<FeatureVector>, labels: Vec<String>) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::LengthMismatch(rows.len(), labels.len()));
        }
        let dims = schema.len();
        if let Some(r) = rows.iter().find(|r| r.values.len() != dims) {
            return Err(Error::SchemaMismatch {
                expected: dims,
                got: r.values.len(),
            });
        }
        Ok(LabeledDataset { schema, rows, labels })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Distinct class names in lexicographic order.
    pub fn classes(&self) -> Vec<String> {
        self.class_counts().into_keys().collect()
    }

    pub fn class_counts(&self) -> BTreeMap<String, usize> {
        let mut counts = BTreeMap::new();
        for l in &self.labels {
            *counts.entry(l.clone()).or_insert(0) += 1;
        }
        counts
    }

    pub fn matrix(&self) -> Vec<Vec<f64>> {
        self.rows.iter().map(|r| r.values.clone()).collect()
    }

    pub fn subset(&self, indices: &[usize]) -> LabeledDataset {
        LabeledDataset {
            schema: self.schema.clone(),
            rows: indices.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i].clone()).collect(),
        }
    }

    /// Keeps only the columns of `groups`. The dataset must carry every
    /// requested group.
    pub fn project(&self, groups: &[FeatureGroup]) -> Result<LabeledDataset> {
        let target = FeatureSchema::new(groups);
        let mut cols = Vec::new();
        let mut offset = 0;
        for g in &self.schema.groups {
            let n = g.dimensions().len();
            if target.groups.contains(g) {
                cols.extend(offset..offset + n);
            }
            offset += n;
        }
        if cols.len() != target.len() {
            return Err(Error::config(
                "groups",
                format!("dataset has {} but {} was requested", self.schema.label(), target.label()),
            ));
        }
        let rows = self
            .rows
            .iter()
            .map(|r| FeatureVector {
                doc_id: r.doc_id.clone(),
                values: cols.iter().map(|&c| r.values[c]).collect(),
            })
            .collect();
        Ok(LabeledDataset {
            schema: target,
            rows,
            labels: self.labels.clone(),
        })
    }

    pub(crate) fn check_finite(&self) -> Result<()> {
        for (row, r) in self.rows.iter().enumerate() {
            if let Some(col) = r.values.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFiniteFeature { row, col });
            }
        }
        Ok(())
    }

    /// Indices of rows grouped by class, classes in lexicographic order.
    pub(crate) fn indices_by_class(&self) -> BTreeMap<&str, Vec<usize>> {
        let mut by: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (i, l) in self.labels.iter().enumerate() {
            by.entry(l.as_str()).or_default().push(i);
        }
        by
    }
}

/// Reduces every class to the minority-class count by seeded sampling
/// without replacement, then shuffles the result.
pub fn downsample(data: &LabeledDataset, seed: u64) -> Result<LabeledDataset> {
    let by = data.indices_by_class();
    if by.len() < 2 {
        return Err(Error::SingleClassDataset);
    }
    let target = by.values().map(Vec::len).min().unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep = Vec::with_capacity(target * by.len());
    for idx in by.values() {
        let mut idx = idx.clone();
        idx.shuffle(&mut rng);
        keep.extend_from_slice(&idx[..target]);
    }
    keep.shuffle(&mut rng);
    Ok(data.subset(&keep))
}

/// Assignment of every row to one test fold.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub k: usize,
    pub assignment: Vec<usize>,
}

impl FoldPlan {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len()).filter(|&i| self.assignment[i] == fold).collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignment.len()).filter(|&i| self.assignment[i] != fold).collect()
    }
}

/// Stratified k-fold partition. Each class is shuffled and dealt round-robin,
/// continuing from the fold where the previous class stopped so total fold
/// sizes also stay within one of each other.
pub fn make_folds(data: &LabeledDataset, k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::config("k", format!("need at least 2 folds, got {k}")));
    }
    let by = data.indices_by_class();
    for (class, idx) in &by {
        if idx.len() < k {
            return Err(Error::TooFewInstances {
                class: class.to_string(),
                have: idx.len(),
                need: k,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0; data.len()];
    let mut next = 0;
    for idx in by.values() {
        let mut idx = idx.clone();
        idx.shuffle(&mut rng);
        for i in idx {
            assignment[i] = next;
            next = (next + 1) % k;
        }
    }
    Ok(FoldPlan { k, assignment })
}
