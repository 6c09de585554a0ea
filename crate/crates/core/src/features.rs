//! Coverage, feature-vector assembly and z-score scaling.
//!
//! The full schema has 21 dimensions in four groups, always in this order:
//!
//! | group | dimensions |
//! |-------|------------|
//! | NE    | PER LOC ORG MISC NE_ALL |
//! | TIMEX | DATE DURATION TIME TIMEX_ALL |
//! | AFF   | POS_sent NEG_sent ALL_sent POS_emo NEG_emo ALL_emo |
//! | READ  | Fog Flesch Kincaid CpxRatio SyllRatio WordsPerSent |
//!
//! Coverages are fractions of the document's word count; a multi-token span
//! counts as one occurrence.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::affect::{document_sentiment, EmotionLoad, EmotionSpace, PolarityLexicon};
use crate::annotation::Span;
use crate::error::{Error, Result};
use crate::ner::{recognize_entities, EntitySpan, EntityTag, Gazetteer};
use crate::readability::compute_readability;
use crate::text::{profile_tokens, sentences_from_tokens, tokenize, Document, TextProfile};
use crate::timex::{TimexGrammar, TimexSpan, TimexTag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum FeatureGroup {
    Ne,
    Timex,
    Aff,
    Read,
}

impl FeatureGroup {
    pub const ALL: [FeatureGroup; 4] = [FeatureGroup::Ne, FeatureGroup::Timex, FeatureGroup::Aff, FeatureGroup::Read];

    pub fn name(self) -> &'static str {
        match self {
            FeatureGroup::Ne => "NE",
            FeatureGroup::Timex => "TIMEX",
            FeatureGroup::Aff => "AFF",
            FeatureGroup::Read => "READ",
        }
    }

    pub fn dimensions(self) -> &'static [&'static str] {
        match self {
            FeatureGroup::Ne => &["PER", "LOC", "ORG", "MISC", "NE_ALL"],
            FeatureGroup::Timex => &["DATE", "DURATION", "TIME", "TIMEX_ALL"],
            FeatureGroup::Aff => &["POS_sent", "NEG_sent", "ALL_sent", "POS_emo", "NEG_emo", "ALL_emo"],
            FeatureGroup::Read => &["Fog", "Flesch", "Kincaid", "CpxRatio", "SyllRatio", "WordsPerSent"],
        }
    }

    /// Parses a comma list such as `ne,read` or `all`.
    pub fn parse_list(s: &str) -> Result<Vec<FeatureGroup>> {
        let mut out = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            if part.eq_ignore_ascii_case("all") {
                out.extend(FeatureGroup::ALL);
            } else {
                out.push(part.parse()?);
            }
        }
        if out.is_empty() {
            return Err(Error::config("groups", "no feature group selected"));
        }
        out.sort();
        out.dedup();
        Ok(out)
    }
}

impl fmt::Display for FeatureGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FeatureGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "NE" => Ok(FeatureGroup::Ne),
            "TIMEX" => Ok(FeatureGroup::Timex),
            "AFF" => Ok(FeatureGroup::Aff),
            "READ" => Ok(FeatureGroup::Read),
            _ => Err(Error::config("groups", format!("unknown feature group {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub groups: Vec<FeatureGroup>,
}

impl FeatureSchema {
    pub fn new(groups: &[FeatureGroup]) -> Self {
        let mut groups = groups.to_vec();
        groups.sort();
        groups.dedup();
        FeatureSchema { groups }
    }

    pub fn full() -> Self {
        FeatureSchema::new(&FeatureGroup::ALL)
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.groups.iter().flat_map(|g| g.dimensions().iter().copied()).collect()
    }

    pub fn len(&self) -> usize {
        self.groups.iter().map(|g| g.dimensions().len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    /// Column indices of this schema inside the full 21-dimension layout.
    pub fn columns_in_full(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut offset = 0;
        for g in FeatureGroup::ALL {
            let n = g.dimensions().len();
            if self.groups.contains(&g) {
                out.extend(offset..offset + n);
            }
            offset += n;
        }
        out
    }

    /// Hex SHA-256 of the dimension names, used to tag models and reports.
    pub fn hash(&self) -> String {
        use sha2::{Digest, Sha256};
        hex::encode(Sha256::digest(self.names().join(",").as_bytes()))
    }

    pub fn label(&self) -> String {
        if self.groups.len() == FeatureGroup::ALL.len() {
            "ALL".into()
        } else {
            self.groups.iter().map(|g| g.name()).collect::<Vec<_>>().join("+")
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub doc_id: String,
    pub values: Vec<f64>,
}

/// Occurrences of spans tagged in `set`, divided by the word count.
pub fn coverage<T: PartialEq>(spans: &[Span<T>], set: &[T], profile: &TextProfile) -> Result<f64> {
    if profile.words == 0 {
        return Err(Error::DegenerateProfile {
            words: profile.words,
            sentences: profile.sentences,
        });
    }
    let hits = spans.iter().filter(|s| set.contains(&s.tag)).count();
    Ok(hits as f64 / profile.words as f64)
}

/// Everything needed to extract features. Emotion space is optional; the
/// AFF group cannot be extracted without it.
#[derive(Debug, Clone)]
pub struct Resources {
    pub gazetteer: Gazetteer,
    pub timex: TimexGrammar,
    pub lexicon: PolarityLexicon,
    pub emotion: Option<EmotionSpace>,
}

impl Resources {
    /// Shipped gazetteer, grammar and lexicon, no emotion space.
    pub fn starter() -> Self {
        Resources {
            gazetteer: Gazetteer::starter(),
            timex: TimexGrammar::default_rules(),
            lexicon: PolarityLexicon::starter(),
            emotion: None,
        }
    }
}

/// Annotation layers of one document.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub profile: TextProfile,
    pub entities: Vec<EntitySpan>,
    pub timexes: Vec<TimexSpan>,
}

pub fn analyze(doc: &Document, res: &Resources) -> Result<Analysis> {
    let tokens = tokenize(&doc.text);
    let sentences = sentences_from_tokens(&tokens);
    let profile = profile_tokens(&tokens, sentences.len());
    if profile.words == 0 {
        return Err(Error::EmptyDocument);
    }
    Ok(Analysis {
        profile,
        entities: recognize_entities(&tokens, &sentences, &res.gazetteer),
        timexes: res.timex.recognize(&tokens),
    })
}

pub fn extract_features(doc: &Document, res: &Resources, groups: &[FeatureGroup]) -> Result<FeatureVector> {
    let schema = FeatureSchema::new(groups);
    if schema.groups.contains(&FeatureGroup::Aff) && res.emotion.is_none() {
        return Err(Error::MissingResource("AFF"));
    }
    let tokens = tokenize(&doc.text);
    let sentences = sentences_from_tokens(&tokens);
    let profile = profile_tokens(&tokens, sentences.len());
    if profile.words == 0 {
        return Err(Error::EmptyDocument);
    }

    let mut values = Vec::with_capacity(schema.len());
    for group in &schema.groups {
        match group {
            FeatureGroup::Ne => {
                let spans = recognize_entities(&tokens, &sentences, &res.gazetteer);
                for tag in EntityTag::ALL {
                    values.push(coverage(&spans, &[tag], &profile)?);
                }
                values.push(coverage(&spans, &EntityTag::ALL, &profile)?);
            }
            FeatureGroup::Timex => {
                let spans = res.timex.recognize(&tokens);
                for tag in TimexTag::ALL {
                    values.push(coverage(&spans, &[tag], &profile)?);
                }
                values.push(coverage(&spans, &TimexTag::ALL, &profile)?);
            }
            FeatureGroup::Aff => {
                let sent = document_sentiment(&tokens, &res.lexicon)?;
                let space = res.emotion.as_ref().ok_or(Error::MissingResource("AFF"))?;
                let emo = match space.emotion_load(&tokens) {
                    Ok(load) => load,
                    Err(Error::OutOfVocabularyDocument) => EmotionLoad::neutral(),
                    Err(e) => return Err(e),
                };
                values.extend([sent.pos, sent.neg, sent.all, emo.pos, emo.neg, emo.all]);
            }
            FeatureGroup::Read => {
                let r = compute_readability(&profile)?;
                values.extend([r.fog, r.flesch, r.kincaid, r.cpx_ratio, r.syll_ratio, r.words_per_sentence]);
            }
        }
    }
    Ok(FeatureVector {
        doc_id: doc.id.clone(),
        values,
    })
}

/// Extracts features for every document, in input order. With `workers > 1`
/// documents are processed on a dedicated thread pool.
pub fn extract_all(docs: &[Document], res: &Resources, groups: &[FeatureGroup], workers: usize) -> Result<Vec<FeatureVector>> {
    let one = |d: &Document| {
        extract_features(d, res, groups).map_err(|e| Error::InDocument {
            id: d.id.clone(),
            source: Box::new(e),
        })
    };
    if workers <= 1 {
        return docs.iter().map(one).collect();
    }
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::config("workers", e.to_string()))?;
    pool.install(|| docs.par_iter().map(one).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScalerMode {
    /// Fit on the training folds only.
    #[default]
    Fold,
    /// Fit once on the whole dataset before cross-validation.
    Global,
}

impl FromStr for ScalerMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fold" => Ok(ScalerMode::Fold),
            "global" => Ok(ScalerMode::Global),
            _ => Err(Error::config("scaler", format!("expected fold|global, got {s:?}"))),
        }
    }
}

/// Per-dimension z-score parameters (population standard deviation).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Scaler {
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.len() < 2 {
            return Err(Error::InsufficientRows {
                got: rows.len(),
                needed: 2,
            });
        }
        let dims = rows[0].len();
        let n = rows.len() as f64;
        let mut mean = vec![0.0; dims];
        for r in rows {
            if r.len() != dims {
                return Err(Error::SchemaMismatch {
                    expected: dims,
                    got: r.len(),
                });
            }
            for (m, x) in mean.iter_mut().zip(r) {
                *m += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; dims];
        for r in rows {
            for ((v, x), m) in var.iter_mut().zip(r).zip(&mean) {
                *v += (x - m) * (x - m);
            }
        }
        let std = var.into_iter().map(|v| (v / n).sqrt()).collect();
        Ok(Scaler { mean, std })
    }

    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(x, (m, s))| if *s > 0.0 { (x - m) / s } else { 0.0 })
            .collect()
    }

    pub fn apply_all(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.apply(r)).collect()
    }

    /// Undoes [`Scaler::apply`] on dimensions with non-zero spread.
    pub fn invert(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(z, (m, s))| if *s > 0.0 { z * s + m } else { *m })
            .collect()
    }
}

/// Writes `doc_id,label,<dims...>` CSV.
pub fn write_feature_csv<W: Write>(w: W, schema: &FeatureSchema, rows: &[FeatureVector], labels: &[String]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["doc_id", "label"];
    header.extend(schema.names());
    out.write_record(&header)?;
    for (row, label) in rows.iter().zip(labels) {
        let mut rec = vec![row.doc_id.clone(), label.clone()];
        rec.extend(row.values.iter().map(|v| v.to_string()));
        out.write_record(&rec)?;
    }
    out.flush().map_err(|e| Error::io("<feature csv>", e))
}

/// Drops leading `#` lines that precede a CSV header.
pub(crate) fn skip_preamble<R: Read>(mut r: R) -> Result<std::io::Cursor<String>> {
    let mut text = String::new();
    r.read_to_string(&mut text).map_err(|e| Error::io("<csv>", e))?;
    let mut start = 0;
    while text[start..].starts_with('#') {
        start += text[start..].find('\n').map_or(text.len() - start, |i| i + 1);
    }
    Ok(std::io::Cursor::new(text.split_off(start)))
}

/// Reads a feature CSV written by [`write_feature_csv`], optionally preceded
/// by `#` comment lines.
pub fn read_feature_csv<R: Read>(r: R) -> Result<(FeatureSchema, Vec<FeatureVector>, Vec<String>)> {
    let mut rdr = csv::Reader::from_reader(skip_preamble(r)?);
    let parse_err = |line: usize, message: String| Error::Parse { line, message };
    let header = rdr.headers().map_err(|e| parse_err(1, e.to_string()))?.clone();
    let dims: Vec<&str> = header.iter().skip(2).collect();
    let groups: Vec<FeatureGroup> = FeatureGroup::ALL
        .into_iter()
        .filter(|g| g.dimensions().iter().all(|d| dims.contains(d)))
        .collect();
    let schema = FeatureSchema::new(&groups);
    if schema.names() != dims || header.get(0) != Some("doc_id") || header.get(1) != Some("label") {
        return Err(parse_err(1, format!("unrecognized header {header:?}")));
    }
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| parse_err(line, e.to_string()))?;
        let values = rec
            .iter()
            .skip(2)
            .map(|v| v.parse::<f64>().map_err(|e| parse_err(line, e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        if values.len() != schema.len() {
            return Err(parse_err(line, "wrong number of fields".into()));
        }
        rows.push(FeatureVector {
            doc_id: rec[0].to_string(),
            values,
        });
        labels.push(rec[1].to_string());
    }
    Ok((schema, rows, labels))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn profile(words: usize) -> TextProfile {
        TextProfile {
            words,
            sentences: 1,
            syllables: words,
            complex_words: 0,
        }
    }

    #[test]
    fn multi_token_span_counts_once() {
        let spans = vec![Span::new(EntityTag::Loc, 3, 6)];
        assert_eq!(coverage(&spans, &[EntityTag::Loc], &profile(50)).unwrap(), 0.02);
        assert_eq!(coverage::<EntityTag>(&[], &[EntityTag::Loc], &profile(50)).unwrap(), 0.0);
        assert!(matches!(
            coverage(&spans, &[EntityTag::Loc], &profile(0)),
            Err(Error::DegenerateProfile { .. })
        ));
    }

    #[test]
    fn schema_layout() {
        let full = FeatureSchema::full();
        assert_eq!(full.len(), 21);
        assert_eq!(full.names().len(), 21);
        assert_eq!(full.label(), "ALL");
        let read = FeatureSchema::new(&[FeatureGroup::Read]);
        assert_eq!(read.len(), 6);
        assert_eq!(read.columns_in_full(), (15..21).collect::<Vec<_>>());
        assert_eq!(
            FeatureGroup::parse_list("read, ne").unwrap(),
            vec![FeatureGroup::Ne, FeatureGroup::Read]
        );
        assert_eq!(FeatureGroup::parse_list("all").unwrap().len(), 4);
        assert!(FeatureGroup::parse_list("ne,vibes").is_err());
    }

    fn toy_resources() -> Resources {
        use crate::affect::{EmotionSeeds, EMOTIONS};
        let mut seeds = EmotionSeeds::default();
        let mut vocab = Vec::new();
        let mut vectors = Vec::new();
        for (i, e) in EMOTIONS.iter().enumerate() {
            seeds.words[i].push(e.to_string());
            vocab.push(e.to_string());
            let mut v = vec![0.0f32; 6];
            v[i] = 1.0;
            vectors.extend(v);
        }
        let mut res = Resources::starter();
        res.emotion = Some(EmotionSpace::from_vectors(6, vocab, vectors, &seeds).unwrap());
        res
    }

    #[test]
    fn vector_sizes_follow_groups() {
        let res = toy_resources();
        let doc = Document::new("d", "The sad operator waited in silence. Nobody came to help.", "UL");
        let all = extract_features(&doc, &res, &FeatureGroup::ALL).unwrap();
        assert_eq!(all.values.len(), 21);
        assert!(all.values.iter().all(|v| v.is_finite()));
        let read = extract_features(&doc, &res, &[FeatureGroup::Read]).unwrap();
        assert_eq!(read.values.len(), 6);
        assert_eq!(read.values[..], all.values[15..]);
        assert!(all.values[..9].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn aff_needs_an_emotion_space() {
        let doc = Document::new("d", "Some words here.", "UL");
        assert!(matches!(
            extract_features(&doc, &Resources::starter(), &[FeatureGroup::Aff]),
            Err(Error::MissingResource("AFF"))
        ));
        assert!(extract_features(&doc, &Resources::starter(), &[FeatureGroup::Ne]).is_ok());
    }

    #[test]
    fn scaler_examples() {
        let rows = vec![vec![1.0, 5.0], vec![2.0, 5.0], vec![3.0, 5.0]];
        let s = Scaler::fit(&rows).unwrap();
        let z: Vec<f64> = s.apply_all(&rows).iter().map(|r| r[0]).collect();
        let k = (1.5f64).sqrt();
        assert!((z[0] + k).abs() < 1e-12 && z[1].abs() < 1e-12 && (z[2] - k).abs() < 1e-12);
        assert!(s.apply_all(&rows).iter().all(|r| r[1] == 0.0));
        assert_eq!(s.invert(&s.apply(&rows[2])), rows[2]);
        assert!(matches!(Scaler::fit(&rows[..1]), Err(Error::InsufficientRows { .. })));
    }

    #[test]
    fn csv_round_trip() {
        let schema = FeatureSchema::new(&[FeatureGroup::Timex]);
        let rows = vec![
            FeatureVector {
                doc_id: "a,1".into(),
                values: vec![0.1, 1.0 / 3.0, 0.0, 7e-300],
            },
            FeatureVector {
                doc_id: "b".into(),
                values: vec![-0.0, 2.5, 1e10, 0.2],
            },
        ];
        let labels = vec!["UL".to_string(), "GN".to_string()];
        let mut buf = Vec::new();
        write_feature_csv(&mut buf, &schema, &rows, &labels).unwrap();
        let (s2, r2, l2) = read_feature_csv(&buf[..]).unwrap();
        assert_eq!((s2, r2, l2), (schema, rows, labels));
    }
}
