//! Glue between corpus records, feature extraction and evaluation, shared by
//! the command line and the test suites.

use serde::{Deserialize, Serialize};

use crate::affect::{EmotionSeeds, EmotionSpace, EmotionSpaceOptions};
use crate::corpus::{filter_min_tokens, split_long_documents, CorpusRecord, DroppedRecord};
use crate::error::{Error, Result};
use crate::features::{extract_all, FeatureGroup, FeatureSchema, Resources};
use crate::learn::{cross_validate, prepare, zero_r, CvConfig, EvalReport, LabeledDataset};
use crate::stats::approx_randomization;
use crate::text::Document;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreparedCorpus {
    pub records: Vec<CorpusRecord>,
    pub dropped: Vec<DroppedRecord>,
}

/// Splits long documents, then drops those below `min_tokens`.
pub fn prepare_corpus(records: Vec<CorpusRecord>, min_tokens: usize, max_words: usize) -> Result<PreparedCorpus> {
    let split = split_long_documents(records, max_words, min_tokens)?;
    let (records, dropped) = filter_min_tokens(split, min_tokens);
    Ok(PreparedCorpus { records, dropped })
}

/// Builds an emotion space from record texts with the starter or given
/// seeds.
pub fn build_emotion_space(records: &[CorpusRecord], seeds: &EmotionSeeds, dims: usize, seed: u64) -> Result<EmotionSpace> {
    let texts: Vec<&str> = records.iter().map(|r| r.text.as_str()).collect();
    EmotionSpace::build(
        &texts,
        seeds,
        EmotionSpaceOptions {
            dims,
            seed,
            ..EmotionSpaceOptions::default()
        },
    )
}

pub fn extract_dataset(records: &[CorpusRecord], res: &Resources, groups: &[FeatureGroup], workers: usize) -> Result<LabeledDataset> {
    let docs: Vec<Document> = records.iter().map(CorpusRecord::to_document).collect();
    let rows = extract_all(&docs, res, groups, workers)?;
    let labels = records.iter().map(|r| r.label.clone()).collect();
    LabeledDataset::new(FeatureSchema::new(groups), rows, labels)
}

/// Feature sets evaluated for a group selection: each group on its own,
/// then all of them together when more than one is selected.
pub fn group_runs(groups: &[FeatureGroup]) -> Vec<Vec<FeatureGroup>> {
    let schema = FeatureSchema::new(groups);
    let mut runs: Vec<Vec<FeatureGroup>> = schema.groups.iter().map(|g| vec![*g]).collect();
    if schema.groups.len() > 1 {
        runs.push(schema.groups.clone());
    }
    runs
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossvalSuite {
    pub reports: Vec<EvalReport>,
    pub baseline: EvalReport,
}

/// Cross-validates every run of [`group_runs`] with the same seed, so all
/// runs see the same sample and folds, plus the ZeroR baseline on that
/// sample.
pub fn crossval_suite(data: &LabeledDataset, groups: &[FeatureGroup], cfg: &CvConfig) -> Result<CrossvalSuite> {
    let reports = group_runs(groups)
        .iter()
        .map(|g| cross_validate(data, g, cfg))
        .collect::<Result<Vec<_>>>()?;
    let sample = prepare(data, groups, cfg)?;
    let baseline = zero_r(&sample)?;
    for r in reports.iter().chain([&baseline]) {
        check_report(r)?;
    }
    Ok(CrossvalSuite { reports, baseline })
}

/// Internal consistency of a report; a failure is a bug, not bad input.
pub fn check_report(r: &EvalReport) -> Result<()> {
    let fail = |m: String| Err(Error::Internal(m));
    if r.confusion.total() as usize != r.predictions.len() {
        return fail(format!("{}: confusion total differs from prediction count", r.config.groups));
    }
    let m = &r.metrics;
    let unit = |x: f64| (0.0..=1.0).contains(&x);
    if !(unit(m.macro_f1) && unit(m.macro_precision) && unit(m.macro_recall) && (-1.0..=1.0).contains(&m.mcc)) {
        return fail(format!("{}: metric out of range", r.config.groups));
    }
    if m.per_class.iter().any(|c| !(unit(c.precision) && unit(c.recall) && unit(c.f1))) {
        return fail(format!("{}: per-class metric out of range", r.config.groups));
    }
    Ok(())
}

/// Per-instance `(gold, predicted)` class indices, ordered by document id.
fn outcomes(r: &EvalReport) -> Vec<(usize, usize)> {
    let idx = |c: &str| r.classes.iter().position(|x| x == c).expect("class listed");
    let mut preds: Vec<_> = r.predictions.iter().collect();
    preds.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
    preds.iter().map(|p| (idx(&p.gold), idx(&p.predicted))).collect()
}

/// Macro F1 of index-coded outcomes over `k` classes, with the conventions
/// of [`crate::learn::evaluate`]. Allocation-light for randomization loops.
pub fn macro_f1_of(outcomes: &[(usize, usize)], k: usize) -> f64 {
    let mut tp = vec![0u64; k];
    let mut predicted = vec![0u64; k];
    let mut support = vec![0u64; k];
    for &(g, p) in outcomes {
        support[g] += 1;
        predicted[p] += 1;
        if g == p {
            tp[g] += 1;
        }
    }
    let ratio = |a: u64, b: u64| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let sum: f64 = (0..k)
        .map(|c| {
            let (p, r) = (ratio(tp[c], predicted[c]), ratio(tp[c], support[c]));
            if p + r > 0.0 {
                2.0 * p * r / (p + r)
            } else {
                0.0
            }
        })
        .sum();
    sum / k as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemComparison {
    pub a: String,
    pub b: String,
    pub macro_f1_a: f64,
    pub macro_f1_b: f64,
    pub p: f64,
    pub rounds: usize,
}

/// Approximate randomization on macro F1 between two reports over the same
/// instances.
pub fn compare_systems(a: &EvalReport, b: &EvalReport, rounds: usize, seed: u64) -> Result<SystemComparison> {
    if a.classes != b.classes {
        return Err(Error::Internal("compared reports use different classes".into()));
    }
    let (oa, ob) = (outcomes(a), outcomes(b));
    fn ids(r: &EvalReport) -> Vec<&str> {
        let mut v: Vec<&str> = r.predictions.iter().map(|p| p.doc_id.as_str()).collect();
        v.sort_unstable();
        v
    }
    if ids(a) != ids(b) {
        return Err(Error::LengthMismatch(oa.len(), ob.len()));
    }
    let k = a.classes.len();
    let name = |r: &EvalReport| {
        if r.system == "svm" {
            r.config.groups.clone()
        } else {
            r.system.clone()
        }
    };
    Ok(SystemComparison {
        a: name(a),
        b: name(b),
        macro_f1_a: a.metrics.macro_f1,
        macro_f1_b: b.metrics.macro_f1,
        p: approx_randomization(&oa, &ob, |o| macro_f1_of(o, k), rounds, seed)?,
        rounds,
    })
}
