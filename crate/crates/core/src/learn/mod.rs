//! SVM training, cross-validation with majority-class downsampling, and
//! classification metrics.

mod cv;
mod dataset;
mod metrics;
mod svm;

pub use cv::{cross_validate, prepare, zero_r, CvConfig, EvalReport, FoldResult, Prediction, RunEcho, SCHEMA_VERSION};
pub use dataset::{downsample, make_folds, FoldPlan, LabeledDataset};
pub use metrics::{evaluate, mcc_multiclass, ClassMetrics, ConfusionMatrix, Metrics};
pub use svm::{train_svm, BinarySvm, Kernel, KernelKind, PairMargin, SvmModel, SvmParams, VOTE_EPSILON};
