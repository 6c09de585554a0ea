use std::io::Write;

use serde::{Deserialize, Serialize};

use super::dataset::{downsample, make_folds, LabeledDataset};
use super::metrics::{evaluate, ConfusionMatrix, Metrics};
use super::svm::{train_svm, KernelKind, SvmParams};
use crate::error::{Error, Result};
use crate::features::{FeatureGroup, Scaler, ScalerMode};

/// Version of the feature layout and report format.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub k: usize,
    pub kernel: KernelKind,
    /// RBF gamma; `None` means `1 / num_features`.
    pub gamma: Option<f64>,
    pub c: f64,
    pub scaler: ScalerMode,
    pub seed: u64,
    /// Reduce every class to the minority count before building folds.
    pub downsample: bool,
    pub workers: usize,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            k: 10,
            kernel: KernelKind::Rbf,
            gamma: None,
            c: 1.0,
            scaler: ScalerMode::Fold,
            seed: 0,
            downsample: true,
            workers: 1,
        }
    }
}

/// Settings actually used by a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEcho {
    pub groups: String,
    pub k: usize,
    pub kernel: String,
    pub gamma: Option<f64>,
    pub c: f64,
    pub scaler: ScalerMode,
    pub seed: u64,
    pub downsample: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub accuracy: f64,
    pub macro_f1: f64,
    pub confusion: ConfusionMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub doc_id: String,
    pub gold: String,
    pub predicted: String,
    pub fold: Option<usize>,
}

impl Prediction {
    pub fn correct(&self) -> bool {
        self.gold == self.predicted
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub system: String,
    pub schema_version: u32,
    pub schema_hash: String,
    pub config: RunEcho,
    pub classes: Vec<String>,
    /// Confusion summed over all folds; metrics are computed from it.
    pub confusion: ConfusionMatrix,
    pub metrics: Metrics,
    pub folds: Vec<FoldResult>,
    /// One entry per evaluated row, in dataset order.
    pub predictions: Vec<Prediction>,
}

impl EvalReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// `class,precision,recall,f1,support` rows followed by `macro` and `mcc`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["system", "groups", "class", "precision", "recall", "f1", "support"])?;
        let m = &self.metrics;
        for c in &m.per_class {
            out.write_record([
                self.system.clone(),
                self.config.groups.clone(),
                c.class.clone(),
                c.precision.to_string(),
                c.recall.to_string(),
                c.f1.to_string(),
                c.support.to_string(),
            ])?;
        }
        out.write_record([
            self.system.clone(),
            self.config.groups.clone(),
            "macro".into(),
            m.macro_precision.to_string(),
            m.macro_recall.to_string(),
            m.macro_f1.to_string(),
            self.confusion.total().to_string(),
        ])?;
        out.write_record([
            self.system.clone(),
            self.config.groups.clone(),
            "mcc".into(),
            String::new(),
            String::new(),
            m.mcc.to_string(),
            self.confusion.total().to_string(),
        ])?;
        out.flush().map_err(|e| Error::io("<report csv>", e))
    }
}

struct FoldOutput {
    result: FoldResult,
    predictions: Vec<(usize, String)>,
}

fn run_fold(data: &LabeledDataset, plan: &super::dataset::FoldPlan, fold: usize, cfg: &CvConfig, global: Option<&Scaler>, classes: &[String]) -> Result<FoldOutput> {
    let train_idx = plan.train_indices(fold);
    let test_idx = plan.test_indices(fold);
    let mut train = data.subset(&train_idx);
    let mut test = data.subset(&test_idx);
    let fitted;
    let scaler = match global {
        Some(s) => s,
        None => {
            fitted = Scaler::fit(&train.matrix())?;
            &fitted
        }
    };
    for r in train.rows.iter_mut().chain(test.rows.iter_mut()) {
        r.values = scaler.apply(&r.values);
    }
    let kernel = cfg.kernel.resolve(cfg.gamma, data.schema.len());
    let model = train_svm(&train, &SvmParams::new(kernel, cfg.c))?;
    let mut cm = ConfusionMatrix::new(classes.to_vec());
    let mut predictions = Vec::with_capacity(test.len());
    for ((row, gold), &i) in test.rows.iter().zip(&test.labels).zip(&test_idx) {
        let p = model.predict(&row.values)?;
        cm.add(gold, &p);
        predictions.push((i, p));
    }
    let m = evaluate(&cm)?;
    Ok(FoldOutput {
        result: FoldResult {
            fold,
            train_size: train.len(),
            test_size: test.len(),
            accuracy: m.accuracy,
            macro_f1: m.macro_f1,
            confusion: cm,
        },
        predictions,
    })
}

fn echo(groups: &str, cfg: &CvConfig, dims: usize) -> RunEcho {
    let kernel = cfg.kernel.resolve(cfg.gamma, dims);
    RunEcho {
        groups: groups.to_string(),
        k: cfg.k,
        kernel: kernel.name().into(),
        gamma: match kernel {
            super::svm::Kernel::Rbf { gamma } => Some(gamma),
            super::svm::Kernel::Linear => None,
        },
        c: cfg.c,
        scaler: cfg.scaler,
        seed: cfg.seed,
        downsample: cfg.downsample,
    }
}

/// Dataset actually classified: projected to `groups` and, if configured,
/// downsampled with the run seed.
pub fn prepare(data: &LabeledDataset, groups: &[FeatureGroup], cfg: &CvConfig) -> Result<LabeledDataset> {
    let projected = data.project(groups)?;
    if projected.classes().len() < 2 {
        return Err(Error::SingleClassDataset);
    }
    if cfg.downsample {
        downsample(&projected, cfg.seed)
    } else {
        Ok(projected)
    }
}

/// Stratified k-fold SVM evaluation. Scaling is fitted per training split
/// (or once on all rows in global mode); fold confusions are summed before
/// metrics are computed.
pub fn cross_validate(data: &LabeledDataset, groups: &[FeatureGroup], cfg: &CvConfig) -> Result<EvalReport> {
    let data = prepare(data, groups, cfg)?;
    let plan = make_folds(&data, cfg.k, cfg.seed.wrapping_add(1))?;
    let classes = data.classes();
    let global = match cfg.scaler {
        ScalerMode::Global => Some(Scaler::fit(&data.matrix())?),
        ScalerMode::Fold => None,
    };
    let run = |f: usize| run_fold(&data, &plan, f, cfg, global.as_ref(), &classes);
    let outputs: Vec<FoldOutput> = if cfg.workers > 1 {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::config("workers", e.to_string()))?;
        pool.install(|| (0..cfg.k).into_par_iter().map(run).collect::<Result<_>>())?
    } else {
        (0..cfg.k).map(run).collect::<Result<_>>()?
    };

    let mut confusion = ConfusionMatrix::new(classes.clone());
    let mut predicted = vec![String::new(); data.len()];
    let mut folds = Vec::with_capacity(cfg.k);
    for out in outputs {
        confusion.merge(&out.result.confusion);
        for (i, p) in out.predictions {
            predicted[i] = p;
        }
        folds.push(out.result);
    }
    let predictions = predicted
        .into_iter()
        .enumerate()
        .map(|(i, p)| Prediction {
            doc_id: data.rows[i].doc_id.clone(),
            gold: data.labels[i].clone(),
            predicted: p,
            fold: Some(plan.assignment[i]),
        })
        .collect();
    Ok(EvalReport {
        system: "svm".into(),
        schema_version: SCHEMA_VERSION,
        schema_hash: data.schema.hash(),
        config: echo(&data.schema.label(), cfg, data.schema.len()),
        classes,
        metrics: evaluate(&confusion)?,
        confusion,
        folds,
        predictions,
    })
}

/// Majority-class baseline evaluated on every row of `data`. Ties go to the
/// lexicographically smaller class.
pub fn zero_r(data: &LabeledDataset) -> Result<EvalReport> {
    if data.is_empty() {
        return Err(Error::InsufficientRows { got: 0, needed: 1 });
    }
    let counts = data.class_counts();
    let max = counts.values().copied().max().unwrap_or(0);
    let majority = counts
        .iter()
        .find(|(_, &n)| n == max)
        .map(|(c, _)| c.clone())
        .expect("non-empty");
    let classes = data.classes();
    let mut confusion = ConfusionMatrix::new(classes.clone());
    let mut predictions = Vec::with_capacity(data.len());
    for (row, gold) in data.rows.iter().zip(&data.labels) {
        confusion.add(gold, &majority);
        predictions.push(Prediction {
            doc_id: row.doc_id.clone(),
            gold: gold.clone(),
            predicted: majority.clone(),
            fold: None,
        });
    }
    Ok(EvalReport {
        system: "zero_r".into(),
        schema_version: SCHEMA_VERSION,
        schema_hash: data.schema.hash(),
        config: RunEcho {
            groups: data.schema.label(),
            k: 0,
            kernel: "none".into(),
            gamma: None,
            c: 0.0,
            scaler: ScalerMode::Fold,
            seed: 0,
            downsample: false,
        },
        classes,
        metrics: evaluate(&confusion)?,
        confusion,
        folds: Vec::new(),
        predictions,
    })
}
