//! Command-line front end. Every artifact carries the tool version, the
//! schema version, the full run configuration and its hash.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::affect::{EmotionSeeds, EmotionSpace, PolarityLexicon};
use crate::corpus::{load_corpus, load_corpus_with_label, write_corpus, CorpusRecord, DroppedRecord, DEFAULT_MAX_WORDS, MIN_TOKENS};
use crate::error::{Error, Result};
use crate::experiment::{build_emotion_space, compare_systems, crossval_suite, extract_dataset, prepare_corpus, CrossvalSuite, SystemComparison};
use crate::features::{write_feature_csv, FeatureGroup, FeatureSchema, Resources, ScalerMode};
use crate::learn::{CvConfig, EvalReport, KernelKind, LabeledDataset, SCHEMA_VERSION};
use crate::ner::Gazetteer;
use crate::stats::{describe, f_test, generate_synthetic_corpus, t_test, GroupSummary, SynthSpec};
use crate::timex::TimexGrammar;

pub const TOOL: &str = "ulstyle";

#[derive(Debug, Parser)]
#[command(name = "ulstyle", version, about = "Stylometric genre analysis: feature extraction, statistics and SVM cross-validation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write one feature vector per document as CSV.
    Extract(CorpusArgs),
    /// Per-label mean and standard deviation of every feature.
    Describe(CorpusArgs),
    /// Stratified k-fold SVM evaluation of each group, their union and ZeroR.
    Crossval {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        cv: CvArgs,
    },
    /// Per-dimension t and F tests between labels, randomization tests between systems.
    Significance {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        cv: CvArgs,
        #[command(flatten)]
        sig: SigArgs,
    },
    /// Generate a labeled synthetic corpus.
    Synth(SynthArgs),
    /// Merge artifacts of earlier runs into one document.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CorpusArgs {
    /// JSONL corpus; repeat for one file per label (labels default to file stems).
    #[arg(long = "corpus", required = true)]
    pub corpus: Vec<PathBuf>,
    /// Comma list of ne, timex, aff, read, or all.
    #[arg(long, default_value = "all")]
    pub groups: String,
    #[arg(long)]
    pub seed: u64,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub gazetteer: Option<PathBuf>,
    #[arg(long = "timex-rules")]
    pub timex_rules: Option<PathBuf>,
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    /// Precomputed emotion space.
    #[arg(long = "emotion-space", conflicts_with = "emotion_build_corpus")]
    pub emotion_space: Option<PathBuf>,
    /// JSONL corpus to build the emotion space from; defaults to the input corpora.
    #[arg(long = "emotion-build-corpus")]
    pub emotion_build_corpus: Option<PathBuf>,
    /// Emotion seed words, one `emotion<TAB>word` per line.
    #[arg(long = "emotion-seeds")]
    pub emotion_seeds: Option<PathBuf>,
    #[arg(long = "emotion-dims", default_value_t = 100)]
    pub emotion_dims: usize,
    #[arg(long = "min-tokens", default_value_t = MIN_TOKENS)]
    pub min_tokens: usize,
    #[arg(long = "max-words", default_value_t = DEFAULT_MAX_WORDS)]
    pub max_words: usize,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum DownsampleMode {
    /// Downsample two-class tasks only.
    Auto,
    On,
    Off,
}

impl DownsampleMode {
    pub fn enabled(self, classes: usize) -> bool {
        match self {
            DownsampleMode::Auto => classes == 2,
            DownsampleMode::On => true,
            DownsampleMode::Off => false,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct CvArgs {
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    /// linear or rbf.
    #[arg(long, default_value = "rbf")]
    pub kernel: KernelKind,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    /// RBF gamma; defaults to 1 / number of features.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// fold or global.
    #[arg(long, default_value = "fold")]
    pub scaler: ScalerMode,
    #[arg(long, value_enum, default_value_t = DownsampleMode::Auto)]
    pub downsample: DownsampleMode,
}

#[derive(Debug, Clone, Args)]
pub struct SigArgs {
    #[arg(long, default_value_t = 10_000)]
    pub rounds: usize,
    /// Welch's unequal-variance t-test instead of the pooled one.
    #[arg(long)]
    pub welch: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Documents per label for the built-in three-genre template.
    #[arg(long, default_value_t = 150, conflicts_with = "spec")]
    pub documents: usize,
    /// JSON generator spec replacing the built-in template.
    #[arg(long)]
    pub spec: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    /// JSON artifact of an earlier run; repeatable.
    #[arg(long = "input", required = true)]
    pub input: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceConfig {
    pub gazetteer: Option<String>,
    pub timex_rules: Option<String>,
    pub lexicon: Option<String>,
    pub emotion_space: Option<String>,
    pub emotion_build_corpus: Option<String>,
    pub emotion_seeds: Option<String>,
    pub emotion_dims: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvSettings {
    pub k: usize,
    pub kernel: KernelKind,
    pub c: f64,
    pub gamma: Option<f64>,
    pub scaler: ScalerMode,
    pub downsample: DownsampleMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigSettings {
    pub rounds: usize,
    pub welch: bool,
}

/// Everything that determines a run's results. Output directory and
/// worker count are excluded: they do not change any number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: String,
    pub corpora: Vec<String>,
    pub groups: Vec<FeatureGroup>,
    pub seed: u64,
    pub min_tokens: usize,
    pub max_words: usize,
    pub resources: ResourceConfig,
    pub cv: Option<CvSettings>,
    pub significance: Option<SigSettings>,
}

/// Envelope written around every JSON result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Artifact<T> {
    pub tool: String,
    pub version: String,
    pub schema_version: u32,
    pub command: String,
    pub config_hash: String,
    pub config: serde_json::Value,
    pub result: T,
}

/// sha256 of the compact JSON form of `config`.
pub fn config_hash<C: Serialize>(config: &C) -> Result<String> {
    Ok(hex::encode(Sha256::digest(serde_json::to_vec(config)?)))
}

fn artifact<C: Serialize, T>(command: &str, config: &C, result: T) -> Result<Artifact<T>> {
    Ok(Artifact {
        tool: TOOL.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        schema_version: SCHEMA_VERSION,
        command: command.into(),
        config_hash: config_hash(config)?,
        config: serde_json::to_value(config)?,
        result,
    })
}

/// First line of every CSV and text artifact.
fn preamble(hash: &str) -> String {
    format!("# {TOOL} {} schema {SCHEMA_VERSION} config {hash}\n", env!("CARGO_PKG_VERSION"))
}

fn path_str(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

/// Exit status for an error: 1 configuration, 2 data, 3 internal.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. } | Error::InvalidThreshold(_) | Error::InvalidSpec(_) | Error::MissingResource(_) => 1,
        Error::Internal(_) => 3,
        Error::InDocument { source, .. } => exit_code(source),
        _ => 2,
    }
}

/// Parses `args`, runs the command and returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match std::panic::catch_unwind(|| run(&cli)) {
        Ok(Ok(())) => 0,
        Ok(Err(e)) => {
            let mut msg = format!("error: {e}");
            let mut src = std::error::Error::source(&e);
            while let Some(s) = src {
                let _ = write!(msg, "\n  caused by: {s}");
                src = s.source();
            }
            eprintln!("{msg}");
            exit_code(&e)
        }
        Err(_) => 3,
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Extract(a) => cmd_extract(a),
        Command::Describe(a) => cmd_describe(a),
        Command::Crossval { corpus, cv } => cmd_crossval(corpus, cv),
        Command::Significance { corpus, cv, sig } => cmd_significance(corpus, cv, sig),
        Command::Synth(a) => cmd_synth(a),
        Command::Report(a) => cmd_report(a),
    }
}

fn require_exists(field: &str, p: &Path) -> Result<()> {
    if p.exists() {
        Ok(())
    } else {
        Err(Error::config(field, format!("{} does not exist", p.display())))
    }
}

fn validate_corpus_args(a: &CorpusArgs) -> Result<Vec<FeatureGroup>> {
    for (i, p) in a.corpus.iter().enumerate() {
        require_exists(&format!("corpus[{i}]"), p)?;
    }
    let optional = [
        ("gazetteer", &a.gazetteer),
        ("timex-rules", &a.timex_rules),
        ("lexicon", &a.lexicon),
        ("emotion-space", &a.emotion_space),
        ("emotion-build-corpus", &a.emotion_build_corpus),
        ("emotion-seeds", &a.emotion_seeds),
    ];
    for (field, p) in optional {
        if let Some(p) = p {
            require_exists(field, p)?;
        }
    }
    if a.workers == 0 {
        return Err(Error::config("workers", "must be at least 1"));
    }
    if a.emotion_dims == 0 {
        return Err(Error::config("emotion-dims", "must be at least 1"));
    }
    if a.min_tokens == 0 || a.max_words < 2 * a.min_tokens {
        return Err(Error::config("max-words", "need min-tokens >= 1 and max-words >= 2 * min-tokens"));
    }
    FeatureGroup::parse_list(&a.groups)
}

fn validate_cv_args(c: &CvArgs) -> Result<()> {
    if c.k < 2 {
        return Err(Error::config("k", "need at least 2 folds"));
    }
    if !(c.c.is_finite() && c.c > 0.0) {
        return Err(Error::config("c", "must be positive and finite"));
    }
    if let Some(g) = c.gamma {
        if !(g.is_finite() && g > 0.0) {
            return Err(Error::config("gamma", "must be positive and finite"));
        }
    }
    Ok(())
}

fn experiment_config(command: &str, a: &CorpusArgs, groups: &[FeatureGroup], cv: Option<&CvArgs>, sig: Option<&SigArgs>) -> ExperimentConfig {
    ExperimentConfig {
        command: command.into(),
        corpora: a.corpus.iter().map(|p| path_str(p)).collect(),
        groups: groups.to_vec(),
        seed: a.seed,
        min_tokens: a.min_tokens,
        max_words: a.max_words,
        resources: ResourceConfig {
            gazetteer: a.gazetteer.as_deref().map(path_str),
            timex_rules: a.timex_rules.as_deref().map(path_str),
            lexicon: a.lexicon.as_deref().map(path_str),
            emotion_space: a.emotion_space.as_deref().map(path_str),
            emotion_build_corpus: a.emotion_build_corpus.as_deref().map(path_str),
            emotion_seeds: a.emotion_seeds.as_deref().map(path_str),
            emotion_dims: a.emotion_dims,
        },
        cv: cv.map(|c| CvSettings {
            k: c.k,
            kernel: c.kernel,
            c: c.c,
            gamma: c.gamma,
            scaler: c.scaler,
            downsample: c.downsample,
        }),
        significance: sig.map(|s| SigSettings {
            rounds: s.rounds,
            welch: s.welch,
        }),
    }
}

/// One file holds all labels; several files are labeled by file stem
/// where a record has no label of its own.
pub fn load_corpora(paths: &[PathBuf]) -> Result<Vec<CorpusRecord>> {
    let mut all = Vec::new();
    if let [single] = paths {
        all = load_corpus(single)?;
    } else {
        for p in paths {
            let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned());
            all.extend(load_corpus_with_label(p, stem.as_deref())?);
        }
    }
    let mut seen = BTreeSet::new();
    for r in &all {
        if !seen.insert(r.id.as_str()) {
            return Err(Error::DuplicateId(r.id.clone()));
        }
    }
    Ok(all)
}

fn load_resources(a: &CorpusArgs, groups: &[FeatureGroup], records: &[CorpusRecord]) -> Result<Resources> {
    let mut res = Resources::starter();
    if let Some(p) = &a.gazetteer {
        res.gazetteer = Gazetteer::load(p)?;
    }
    if let Some(p) = &a.timex_rules {
        res.timex = TimexGrammar::load(p)?;
    }
    if let Some(p) = &a.lexicon {
        res.lexicon = PolarityLexicon::load(p)?;
    }
    if groups.contains(&FeatureGroup::Aff) {
        res.emotion = Some(match (&a.emotion_space, &a.emotion_build_corpus) {
            (Some(p), _) => EmotionSpace::load(p)?,
            (None, build) => {
                let seeds = match &a.emotion_seeds {
                    Some(p) => EmotionSeeds::load(p)?,
                    None => EmotionSeeds::starter(),
                };
                let source = match build {
                    Some(p) => load_corpus_with_label(p, Some("unlabeled"))?,
                    None => records.to_vec(),
                };
                build_emotion_space(&source, &seeds, a.emotion_dims, a.seed)?
            }
        });
    }
    Ok(res)
}

struct Prepared {
    records: Vec<CorpusRecord>,
    dropped: Vec<DroppedRecord>,
}

fn load_prepared(a: &CorpusArgs) -> Result<Prepared> {
    let p = prepare_corpus(load_corpora(&a.corpus)?, a.min_tokens, a.max_words)?;
    if p.records.is_empty() {
        return Err(Error::InsufficientRows { got: 0, needed: 1 });
    }
    Ok(Prepared {
        records: p.records,
        dropped: p.dropped,
    })
}

fn label_counts(records: &[CorpusRecord]) -> BTreeMap<String, usize> {
    let mut counts = BTreeMap::new();
    for r in records {
        *counts.entry(r.label.clone()).or_insert(0) += 1;
    }
    counts
}

/// Fails before any feature is computed when the folds cannot be built.
fn check_folds(counts: &BTreeMap<String, usize>, k: usize) -> Result<()> {
    if counts.len() < 2 {
        return Err(Error::SingleClassDataset);
    }
    let (class, n) = counts.iter().min_by_key(|(_, n)| **n).expect("two classes");
    if k > *n {
        return Err(Error::config("k", format!("{k} folds exceed the smallest class {class:?} with {n} documents")));
    }
    Ok(())
}

fn dataset(a: &CorpusArgs, groups: &[FeatureGroup], prepared: &Prepared) -> Result<LabeledDataset> {
    let res = load_resources(a, groups, &prepared.records)?;
    extract_dataset(&prepared.records, &res, groups, a.workers)
}

fn cv_config(c: &CvArgs, seed: u64, workers: usize, classes: usize) -> CvConfig {
    CvConfig {
        k: c.k,
        kernel: c.kernel,
        gamma: c.gamma,
        c: c.c,
        scaler: c.scaler,
        seed,
        downsample: c.downsample.enabled(classes),
        workers,
    }
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_file(path, text.as_bytes())
}

fn out_dir(p: &Path) -> Result<()> {
    std::fs::create_dir_all(p).map_err(|e| Error::io(p, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractResult {
    pub documents: usize,
    pub labels: BTreeMap<String, usize>,
    pub schema: FeatureSchema,
    pub schema_hash: String,
    pub dropped: Vec<DroppedRecord>,
}

fn cmd_extract(a: &CorpusArgs) -> Result<()> {
    let groups = validate_corpus_args(a)?;
    let config = experiment_config("extract", a, &groups, None, None);
    let prepared = load_prepared(a)?;
    let data = dataset(a, &groups, &prepared)?;
    out_dir(&a.out)?;
    let hash = config_hash(&config)?;
    let mut csv = preamble(&hash).into_bytes();
    write_feature_csv(&mut csv, &data.schema, &data.rows, &data.labels)?;
    write_file(&a.out.join("features.csv"), &csv)?;
    let result = ExtractResult {
        documents: data.len(),
        labels: label_counts(&prepared.records),
        schema_hash: data.schema.hash(),
        schema: data.schema,
        dropped: prepared.dropped,
    };
    write_json(&a.out.join("extract.json"), &artifact("extract", &config, result)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DescribeResult {
    pub summary: GroupSummary,
    pub dropped: Vec<DroppedRecord>,
}

fn cmd_describe(a: &CorpusArgs) -> Result<()> {
    let groups = validate_corpus_args(a)?;
    let config = experiment_config("describe", a, &groups, None, None);
    let prepared = load_prepared(a)?;
    let data = dataset(a, &groups, &prepared)?;
    let summary = describe(&data)?;
    out_dir(&a.out)?;
    let hash = config_hash(&config)?;
    let mut csv = preamble(&hash).into_bytes();
    summary.write_csv(&mut csv)?;
    write_file(&a.out.join("summary.csv"), &csv)?;
    write_file(&a.out.join("summary.txt"), (preamble(&hash) + &summary.render_table()).as_bytes())?;
    let result = DescribeResult {
        summary,
        dropped: prepared.dropped,
    };
    write_json(&a.out.join("summary.json"), &artifact("describe", &config, result)?)
}

/// Metric rows of several reports under one header.
fn suite_csv(hash: &str, reports: &[&EvalReport]) -> Result<Vec<u8>> {
    let mut out = preamble(hash).into_bytes();
    for (i, r) in reports.iter().enumerate() {
        let mut buf = Vec::new();
        r.write_csv(&mut buf)?;
        let text = String::from_utf8(buf).map_err(|e| Error::Internal(e.to_string()))?;
        let skip = usize::from(i > 0);
        for line in text.lines().skip(skip) {
            out.extend_from_slice(line.as_bytes());
            out.push(b'\n');
        }
    }
    Ok(out)
}

/// Aligned macro metric table, one row per system.
pub fn render_suite(suite: &CrossvalSuite) -> String {
    let rows: Vec<&EvalReport> = suite.reports.iter().chain([&suite.baseline]).collect();
    let name = |r: &EvalReport| if r.system == "svm" { r.config.groups.clone() } else { r.system.clone() };
    let w = rows.iter().map(|r| name(r).len()).max().unwrap_or(0).max("system".len());
    let mut out = format!("{:w$} | {:>9} | {:>9} | {:>9} | {:>9} | {:>9}\n", "system", "precision", "recall", "F1", "MCC", "accuracy");
    out.push_str(&"-".repeat(w + 5 * 12));
    out.push('\n');
    for r in rows {
        let m = &r.metrics;
        let _ = writeln!(
            out,
            "{:w$} | {:>9.4} | {:>9.4} | {:>9.4} | {:>9.4} | {:>9.4}",
            name(r),
            m.macro_precision,
            m.macro_recall,
            m.macro_f1,
            m.mcc,
            m.accuracy
        );
    }
    out
}

fn run_suite(a: &CorpusArgs, c: &CvArgs, groups: &[FeatureGroup]) -> Result<(LabeledDataset, CrossvalSuite)> {
    let prepared = load_prepared(a)?;
    let counts = label_counts(&prepared.records);
    check_folds(&counts, c.k)?;
    let data = dataset(a, groups, &prepared)?;
    let cfg = cv_config(c, a.seed, a.workers, counts.len());
    let suite = crossval_suite(&data, groups, &cfg)?;
    Ok((data, suite))
}

fn cmd_crossval(a: &CorpusArgs, c: &CvArgs) -> Result<()> {
    let groups = validate_corpus_args(a)?;
    validate_cv_args(c)?;
    let config = experiment_config("crossval", a, &groups, Some(c), None);
    let (_, suite) = run_suite(a, c, &groups)?;
    out_dir(&a.out)?;
    let hash = config_hash(&config)?;
    let reports: Vec<&EvalReport> = suite.reports.iter().chain([&suite.baseline]).collect();
    write_file(&a.out.join("crossval.csv"), &suite_csv(&hash, &reports)?)?;
    write_file(&a.out.join("crossval.txt"), (preamble(&hash) + &render_suite(&suite)).as_bytes())?;
    write_json(&a.out.join("crossval.json"), &artifact("crossval", &config, suite)?)
}

/// t and F tests of one dimension between two labels. A test that is
/// undefined for the samples is reported as absent with a note.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionTest {
    pub a: String,
    pub b: String,
    pub dimension: String,
    pub mean_a: f64,
    pub mean_b: f64,
    pub t: Option<f64>,
    pub t_df: Option<f64>,
    pub t_p: Option<f64>,
    pub f: Option<f64>,
    pub f_p: Option<f64>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignificanceResult {
    pub dimensions: Vec<DimensionTest>,
    pub systems: Vec<SystemComparison>,
}

/// Every label pair and every dimension, labels in lexicographic order.
pub fn dimension_tests(data: &LabeledDataset, welch: bool) -> Result<Vec<DimensionTest>> {
    let classes = data.classes();
    let names = data.schema.names();
    let column = |label: &str, col: usize| -> Vec<f64> {
        data.rows
            .iter()
            .zip(&data.labels)
            .filter(|(_, l)| *l == label)
            .map(|(r, _)| r.values[col])
            .collect()
    };
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    let mut out = Vec::new();
    for (i, a) in classes.iter().enumerate() {
        for b in &classes[i + 1..] {
            for (col, dim) in names.iter().enumerate() {
                let (xa, xb) = (column(a, col), column(b, col));
                let mut test = DimensionTest {
                    a: a.clone(),
                    b: b.clone(),
                    dimension: dim.to_string(),
                    mean_a: mean(&xa),
                    mean_b: mean(&xb),
                    t: None,
                    t_df: None,
                    t_p: None,
                    f: None,
                    f_p: None,
                    notes: Vec::new(),
                };
                match t_test(&xa, &xb, welch) {
                    Ok(t) => (test.t, test.t_df, test.t_p) = (Some(t.t), Some(t.df), Some(t.p)),
                    Err(e @ Error::DegenerateSample(_)) => test.notes.push(format!("t: {e}")),
                    Err(e) => return Err(e),
                }
                match f_test(&xa, &xb) {
                    Ok(f) => (test.f, test.f_p) = (Some(f.f), Some(f.p)),
                    Err(e @ (Error::ZeroVariance | Error::DegenerateSample(_))) => test.notes.push(format!("f: {e}")),
                    Err(e) => return Err(e),
                }
                out.push(test);
            }
        }
    }
    Ok(out)
}

/// Each system against ZeroR, and the union of groups against each group.
pub fn system_comparisons(suite: &CrossvalSuite, rounds: usize, seed: u64) -> Result<Vec<SystemComparison>> {
    let mut out = Vec::new();
    for r in &suite.reports {
        out.push(compare_systems(r, &suite.baseline, rounds, seed)?);
    }
    if let Some((union, singles)) = suite.reports.split_last() {
        if !singles.is_empty() {
            for s in singles {
                out.push(compare_systems(union, s, rounds, seed)?);
            }
        }
    }
    Ok(out)
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn cmd_significance(a: &CorpusArgs, c: &CvArgs, s: &SigArgs) -> Result<()> {
    let groups = validate_corpus_args(a)?;
    validate_cv_args(c)?;
    if s.rounds == 0 {
        return Err(Error::config("rounds", "need at least one round"));
    }
    let config = experiment_config("significance", a, &groups, Some(c), Some(s));
    let (data, suite) = run_suite(a, c, &groups)?;
    let result = SignificanceResult {
        dimensions: dimension_tests(&data, s.welch)?,
        systems: system_comparisons(&suite, s.rounds, a.seed)?,
    };
    out_dir(&a.out)?;
    let hash = config_hash(&config)?;

    let mut dims = csv::Writer::from_writer(preamble(&hash).into_bytes());
    dims.write_record(["a", "b", "dimension", "mean_a", "mean_b", "t", "t_df", "t_p", "f", "f_p"])?;
    for d in &result.dimensions {
        dims.write_record([
            d.a.clone(),
            d.b.clone(),
            d.dimension.clone(),
            d.mean_a.to_string(),
            d.mean_b.to_string(),
            opt(d.t),
            opt(d.t_df),
            opt(d.t_p),
            opt(d.f),
            opt(d.f_p),
        ])?;
    }
    let dims = dims.into_inner().map_err(|e| Error::Internal(e.to_string()))?;
    write_file(&a.out.join("significance_dimensions.csv"), &dims)?;

    let mut sys = csv::Writer::from_writer(preamble(&hash).into_bytes());
    sys.write_record(["a", "b", "macro_f1_a", "macro_f1_b", "p", "rounds"])?;
    for c in &result.systems {
        sys.write_record([
            c.a.clone(),
            c.b.clone(),
            c.macro_f1_a.to_string(),
            c.macro_f1_b.to_string(),
            c.p.to_string(),
            c.rounds.to_string(),
        ])?;
    }
    let sys = sys.into_inner().map_err(|e| Error::Internal(e.to_string()))?;
    write_file(&a.out.join("significance_systems.csv"), &sys)?;
    write_json(&a.out.join("significance.json"), &artifact("significance", &config, result)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub command: String,
    pub seed: u64,
    pub spec: SynthSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthResult {
    pub corpus: String,
    pub labels: BTreeMap<String, usize>,
}

fn cmd_synth(a: &SynthArgs) -> Result<()> {
    let spec = match &a.spec {
        Some(p) => {
            require_exists("spec", p)?;
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            serde_json::from_str(&text).map_err(|e| Error::config("spec", e.to_string()))?
        }
        None => SynthSpec::genre_template(a.documents),
    };
    spec.validate()?;
    let config = SynthConfig {
        command: "synth".into(),
        seed: a.seed,
        spec,
    };
    let records = generate_synthetic_corpus(&config.spec, a.seed)?;
    out_dir(&a.out)?;
    let mut buf = Vec::new();
    write_corpus(&mut buf, &records)?;
    write_file(&a.out.join("corpus.jsonl"), &buf)?;
    let result = SynthResult {
        corpus: "corpus.jsonl".into(),
        labels: label_counts(&records),
    };
    write_json(&a.out.join("synth.json"), &artifact("synth", &config, result)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub command: String,
    pub inputs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportResult {
    pub runs: Vec<Artifact<serde_json::Value>>,
}

fn read_artifact(p: &Path) -> Result<Artifact<serde_json::Value>> {
    let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
    let bad = |message: String| Error::Format {
        path: path_str(p),
        line: 0,
        message,
    };
    let art: Artifact<serde_json::Value> = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
    if art.tool != TOOL {
        return Err(bad(format!("not a {TOOL} artifact")));
    }
    if art.schema_version != SCHEMA_VERSION {
        return Err(bad(format!("schema version {} differs from {SCHEMA_VERSION}", art.schema_version)));
    }
    Ok(art)
}

/// Markdown rendering of merged runs.
pub fn render_report(runs: &[Artifact<serde_json::Value>]) -> Result<String> {
    let mut out = String::from("# ulstyle report\n");
    for run in runs {
        let _ = write!(out, "\n## {} (config {})\n\n", run.command, &run.config_hash[..12]);
        match run.command.as_str() {
            "crossval" => {
                let suite: CrossvalSuite = serde_json::from_value(run.result.clone())?;
                let _ = write!(out, "```\n{}```\n", render_suite(&suite));
            }
            "describe" => {
                let r: DescribeResult = serde_json::from_value(run.result.clone())?;
                let _ = write!(out, "```\n{}```\n", r.summary.render_table());
            }
            "significance" => {
                let r: SignificanceResult = serde_json::from_value(run.result.clone())?;
                out.push_str("| a | b | F1 a | F1 b | p |\n|---|---|---|---|---|\n");
                for c in &r.systems {
                    let _ = writeln!(out, "| {} | {} | {:.4} | {:.4} | {:.4} |", c.a, c.b, c.macro_f1_a, c.macro_f1_b, c.p);
                }
            }
            "extract" => {
                let r: ExtractResult = serde_json::from_value(run.result.clone())?;
                let _ = writeln!(out, "{} documents over {}; {} dropped.", r.documents, r.schema.label(), r.dropped.len());
            }
            "synth" => {
                let r: SynthResult = serde_json::from_value(run.result.clone())?;
                for (l, n) in &r.labels {
                    let _ = writeln!(out, "- {l}: {n} documents");
                }
            }
            other => {
                let _ = writeln!(out, "Unrecognized command {other:?}; included verbatim in report.json.");
            }
        }
    }
    Ok(out)
}

fn cmd_report(a: &ReportArgs) -> Result<()> {
    for (i, p) in a.input.iter().enumerate() {
        require_exists(&format!("input[{i}]"), p)?;
    }
    let config = ReportConfig {
        command: "report".into(),
        inputs: a.input.iter().map(|p| path_str(p)).collect(),
    };
    let runs = a.input.iter().map(|p| read_artifact(p)).collect::<Result<Vec<_>>>()?;
    let hash = config_hash(&config)?;
    let text = render_report(&runs)?;
    out_dir(&a.out)?;
    write_file(&a.out.join("report.md"), format!("<!-- {}-->\n{text}", preamble(&hash).trim_start_matches("# ")).as_bytes())?;
    write_json(&a.out.join("report.json"), &artifact("report", &config, ReportResult { runs })?)
}
