//! Prior-polarity sentiment and emotion load.
//!
//! A word's prior polarity is the harmonic-weighted mean of its sense
//! scores, so the first (most frequent) sense weighs most. Emotion load is
//! the cosine similarity between a document vector and six emotion
//! centroids in an LSA space, mapped to `[0, 1]`.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::lsa::{truncated_svd, SparseMatrix, SvdOptions};
use crate::text::{Token, TokenKind};

static STARTER_LEXICON: &str = include_str!("../data/polarity.tsv");
static STARTER_SEEDS: &str = include_str!("../data/emotion_seeds.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SenseEntry {
    pub sense_rank: u32,
    pub pos_score: f64,
    pub neg_score: f64,
}

#[derive(Debug, Clone, Default)]
pub struct PolarityLexicon {
    entries: HashMap<String, Vec<SenseEntry>>,
    priors: HashMap<String, (f64, f64)>,
}

/// Harmonic-weighted prior polarity over senses ordered by rank.
pub fn weighted_prior(senses: &[SenseEntry]) -> (f64, f64) {
    let mut weight_sum = 0.0;
    let mut pos = 0.0;
    let mut neg = 0.0;
    for s in senses {
        let w = 1.0 / s.sense_rank as f64;
        weight_sum += w;
        pos += w * s.pos_score;
        neg += w * s.neg_score;
    }
    if weight_sum == 0.0 {
        return (0.0, 0.0);
    }
    (pos / weight_sum, neg / weight_sum)
}

impl PolarityLexicon {
    pub fn starter() -> Self {
        PolarityLexicon::parse(STARTER_LEXICON, "<starter>").expect("starter lexicon is well formed")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        PolarityLexicon::parse(&text, &path.display().to_string())
    }

    /// Parses `lemma<TAB>rank<TAB>pos<TAB>neg` rows. Blank lines and `#`
    /// comments are skipped.
    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut rows: BTreeMap<String, Vec<(SenseEntry, usize)>> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim_end_matches('\r');
            if trimmed.trim().is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fail = |message: String| Error::Format {
                path: source.to_string(),
                line,
                message,
            };
            let fields: Vec<&str> = trimmed.split('\t').collect();
            if fields.len() != 4 {
                return Err(fail(format!("expected 4 tab-separated fields, got {}", fields.len())));
            }
            let lemma = fields[0].trim().to_lowercase();
            if lemma.is_empty() {
                return Err(fail("empty lemma".into()));
            }
            let rank: u32 = fields[1]
                .trim()
                .parse()
                .ok()
                .filter(|&r| r > 0)
                .ok_or_else(|| fail(format!("bad sense rank {:?}", fields[1])))?;
            let score = |s: &str| -> Result<f64> {
                s.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|v| (0.0..=1.0).contains(v))
                    .ok_or_else(|| fail(format!("bad score {s:?}")))
            };
            let pos_score = score(fields[2])?;
            let neg_score = score(fields[3])?;
            if pos_score + neg_score > 1.0 + 1e-12 {
                return Err(Error::Invariant {
                    path: source.to_string(),
                    line,
                    message: format!("pos + neg = {} exceeds 1", pos_score + neg_score),
                });
            }
            let senses = rows.entry(lemma.clone()).or_default();
            if senses.iter().any(|(s, _)| s.sense_rank == rank) {
                return Err(fail(format!("duplicate sense {rank} for {lemma:?}")));
            }
            senses.push((
                SenseEntry {
                    sense_rank: rank,
                    pos_score,
                    neg_score,
                },
                line,
            ));
        }

        let mut lex = PolarityLexicon::default();
        for (lemma, mut senses) in rows {
            senses.sort_by_key(|(s, _)| s.sense_rank);
            for (expected, (s, line)) in (1..).zip(&senses) {
                if s.sense_rank != expected {
                    return Err(Error::Invariant {
                        path: source.to_string(),
                        line: *line,
                        message: format!("sense ranks for {lemma:?} skip {expected}"),
                    });
                }
            }
            let senses: Vec<SenseEntry> = senses.into_iter().map(|(s, _)| s).collect();
            lex.priors.insert(lemma.clone(), weighted_prior(&senses));
            lex.entries.insert(lemma, senses);
        }
        Ok(lex)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn senses(&self, lemma: &str) -> Option<&[SenseEntry]> {
        self.entries.get(&lemma.to_lowercase()).map(Vec::as_slice)
    }

    pub fn lemmas(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// `(POS, NEG)` prior polarity of a lemma, case-insensitive.
    pub fn prior_polarity(&self, lemma: &str) -> Result<(f64, f64)> {
        self.priors
            .get(&lemma.to_lowercase())
            .copied()
            .ok_or_else(|| Error::UnknownLemma(lemma.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sentiment {
    pub pos: f64,
    pub neg: f64,
    pub all: f64,
}

/// Polarity mass per hundred words. Unknown words count as neutral but stay
/// in the denominator, which covers word and number tokens.
pub fn document_sentiment(tokens: &[Token<'_>], lexicon: &PolarityLexicon) -> Result<Sentiment> {
    let mut words = 0usize;
    let mut pos = 0.0;
    let mut neg = 0.0;
    for tok in tokens {
        match tok.kind {
            TokenKind::Word => {
                words += 1;
                if let Ok((p, n)) = lexicon.prior_polarity(tok.surface) {
                    pos += p;
                    neg += n;
                }
            }
            TokenKind::Number => words += 1,
            TokenKind::Punctuation => {}
        }
    }
    if words == 0 {
        return Err(Error::EmptyDocument);
    }
    let pos = 100.0 * pos / words as f64;
    let neg = 100.0 * neg / words as f64;
    Ok(Sentiment {
        pos,
        neg,
        all: pos + neg,
    })
}

pub const EMOTIONS: [&str; 6] = ["anger", "disgust", "fear", "joy", "sadness", "surprise"];
const POSITIVE_EMOTIONS: [usize; 2] = [3, 5];
const NEGATIVE_EMOTIONS: [usize; 4] = [0, 1, 2, 4];

/// Seed words per emotion label, in [`EMOTIONS`] order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EmotionSeeds {
    pub words: [Vec<String>; 6],
}

impl EmotionSeeds {
    pub fn starter() -> Self {
        EmotionSeeds::parse(STARTER_SEEDS, "<starter>").expect("starter seeds are well formed")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        EmotionSeeds::parse(&text, &path.display().to_string())
    }

    /// Parses `label<TAB>word` rows.
    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut seeds = EmotionSeeds::default();
        for (idx, raw) in text.lines().enumerate() {
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fail = |message: String| Error::Format {
                path: source.to_string(),
                line: idx + 1,
                message,
            };
            let (label, word) = trimmed
                .split_once('\t')
                .ok_or_else(|| fail("expected label<TAB>word".into()))?;
            let slot = EMOTIONS
                .iter()
                .position(|e| *e == label.trim())
                .ok_or_else(|| fail(format!("unknown emotion label {label:?}")))?;
            let word = word.trim().to_lowercase();
            if word.is_empty() || word.contains('\t') {
                return Err(fail("bad seed word".into()));
            }
            seeds.words[slot].push(word);
        }
        Ok(seeds)
    }
}

/// Word vectors plus one unit centroid per emotion. Stored as `f32` so a
/// saved space reloads bit-identically.
#[derive(Debug, Clone, PartialEq)]
pub struct EmotionSpace {
    dims: usize,
    index: HashMap<String, usize>,
    vocabulary: Vec<String>,
    vectors: Vec<f32>,
    centroids: [Vec<f32>; 6],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmotionLoad {
    /// `(1 + cos) / 2` per emotion, in [`EMOTIONS`] order.
    pub similarities: [f64; 6],
    pub pos: f64,
    pub neg: f64,
    pub all: f64,
}

impl EmotionLoad {
    pub fn from_similarities(similarities: [f64; 6]) -> Self {
        let mean = |idx: &[usize]| idx.iter().map(|&i| similarities[i]).sum::<f64>() / idx.len() as f64;
        EmotionLoad {
            similarities,
            pos: mean(&POSITIVE_EMOTIONS),
            neg: mean(&NEGATIVE_EMOTIONS),
            all: similarities.iter().sum::<f64>() / 6.0,
        }
    }

    /// Load recorded for documents with no in-vocabulary word.
    pub fn neutral() -> Self {
        EmotionLoad::from_similarities([0.5; 6])
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EmotionSpaceOptions {
    pub dims: usize,
    pub seed: u64,
    pub min_documents: usize,
    pub power_iterations: usize,
    pub oversample: usize,
}

impl Default for EmotionSpaceOptions {
    fn default() -> Self {
        EmotionSpaceOptions {
            dims: 100,
            seed: 0,
            min_documents: 100,
            power_iterations: 4,
            oversample: 10,
        }
    }
}

fn lowercase_words(text: &str) -> Vec<String> {
    crate::text::tokenize(text)
        .iter()
        .filter(|t| t.kind == TokenKind::Word)
        .map(|t| t.surface.to_lowercase())
        .collect()
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

const SPACE_FORMAT: &str = "ulstyle-emotion-space";
const SPACE_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct SpaceHeader {
    format: String,
    version: u32,
    dims: usize,
    vocab_size: usize,
    emotions: Vec<String>,
    /// SHA-256 of the float payload.
    checksum: String,
    vocabulary: Vec<String>,
}

impl EmotionSpace {
    /// Builds the space from raw texts. Word vectors are the top left singular
    /// vectors of the `ln(1 + tf)` word-document matrix; each centroid is the
    /// normalized mean of its in-vocabulary seed vectors.
    pub fn build<S: AsRef<str>>(texts: &[S], seeds: &EmotionSeeds, opts: EmotionSpaceOptions) -> Result<Self> {
        if texts.len() < opts.min_documents {
            return Err(Error::InsufficientCorpus {
                got: texts.len(),
                needed: opts.min_documents,
            });
        }
        let docs: Vec<BTreeMap<String, u32>> = texts
            .iter()
            .map(|t| {
                let mut counts = BTreeMap::new();
                for w in lowercase_words(t.as_ref()) {
                    *counts.entry(w).or_insert(0) += 1;
                }
                counts
            })
            .collect();
        let mut vocabulary: Vec<String> = docs.iter().flat_map(|d| d.keys().cloned()).collect();
        vocabulary.sort();
        vocabulary.dedup();
        let index: HashMap<String, usize> = vocabulary.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();

        let max_dims = vocabulary.len().min(docs.len());
        if opts.dims == 0 || opts.dims > max_dims {
            return Err(Error::config(
                "emotion.dims",
                format!("dims must be in 1..={max_dims} for this corpus, got {}", opts.dims),
            ));
        }

        for (label, words) in EMOTIONS.iter().zip(&seeds.words) {
            if !words.iter().any(|w| index.contains_key(w)) {
                return Err(Error::EmotionWithoutSeeds(label.to_string()));
            }
        }

        let matrix = SparseMatrix {
            rows: vocabulary.len(),
            cols: docs
                .iter()
                .map(|d| d.iter().map(|(w, &tf)| (index[w], (1.0 + tf as f64).ln())).collect())
                .collect(),
        };
        let svd = truncated_svd(
            &matrix,
            opts.dims,
            SvdOptions {
                oversample: opts.oversample,
                power_iterations: opts.power_iterations,
                seed: opts.seed,
            },
        );
        let vectors: Vec<f32> = svd.u.iter().flatten().map(|&x| x as f32).collect();
        EmotionSpace::assemble(opts.dims, vocabulary, vectors, seeds)
    }

    /// Builds a space from explicit word vectors (row-major, `dims` per word).
    pub fn from_vectors(dims: usize, vocabulary: Vec<String>, vectors: Vec<f32>, seeds: &EmotionSeeds) -> Result<Self> {
        if dims == 0 || vectors.len() != dims * vocabulary.len() {
            return Err(Error::SpaceFormat("vector buffer does not match vocabulary".into()));
        }
        EmotionSpace::assemble(dims, vocabulary, vectors, seeds)
    }

    fn assemble(dims: usize, vocabulary: Vec<String>, vectors: Vec<f32>, seeds: &EmotionSeeds) -> Result<Self> {
        let index: HashMap<String, usize> = vocabulary.iter().enumerate().map(|(i, w)| (w.clone(), i)).collect();
        let mut centroids: [Vec<f32>; 6] = Default::default();
        for (slot, (label, words)) in EMOTIONS.iter().zip(&seeds.words).enumerate() {
            let mut sum = vec![0.0f64; dims];
            let mut count = 0usize;
            for w in words {
                if let Some(&i) = index.get(w) {
                    for (s, &x) in sum.iter_mut().zip(&vectors[i * dims..(i + 1) * dims]) {
                        *s += x as f64;
                    }
                    count += 1;
                }
            }
            if count == 0 {
                return Err(Error::EmotionWithoutSeeds(label.to_string()));
            }
            sum.iter_mut().for_each(|s| *s /= count as f64);
            if normalize(&mut sum) == 0.0 {
                return Err(Error::DegenerateCentroid(label.to_string()));
            }
            centroids[slot] = sum.iter().map(|&x| x as f32).collect();
        }
        Ok(EmotionSpace {
            dims,
            index,
            vocabulary,
            vectors,
            centroids,
        })
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    pub fn vector(&self, word: &str) -> Option<&[f32]> {
        self.index
            .get(word)
            .map(|&i| &self.vectors[i * self.dims..(i + 1) * self.dims])
    }

    pub fn centroid(&self, emotion: usize) -> &[f32] {
        &self.centroids[emotion]
    }

    /// Emotion load of a token sequence. Fails with
    /// [`Error::OutOfVocabularyDocument`] when no word is in the space.
    pub fn emotion_load(&self, tokens: &[Token<'_>]) -> Result<EmotionLoad> {
        let mut sum = vec![0.0f64; self.dims];
        let mut count = 0usize;
        for tok in tokens.iter().filter(|t| t.kind == TokenKind::Word) {
            if let Some(v) = self.vector(&tok.surface.to_lowercase()) {
                for (s, &x) in sum.iter_mut().zip(v) {
                    *s += x as f64;
                }
                count += 1;
            }
        }
        if count == 0 {
            return Err(Error::OutOfVocabularyDocument);
        }
        sum.iter_mut().for_each(|s| *s /= count as f64);
        let norm = normalize(&mut sum);
        let mut sims = [0.5; 6];
        if norm > 0.0 {
            for (sim, centroid) in sims.iter_mut().zip(&self.centroids) {
                let cos: f64 = sum.iter().zip(centroid).map(|(a, &b)| a * b as f64).sum();
                *sim = ((1.0 + cos.clamp(-1.0, 1.0)) / 2.0).clamp(0.0, 1.0);
            }
        }
        Ok(EmotionLoad::from_similarities(sims))
    }

    fn payload(&self) -> Vec<u8> {
        let mut bytes = Vec::with_capacity(4 * (self.vectors.len() + 6 * self.dims));
        for x in self.vectors.iter().chain(self.centroids.iter().flatten()) {
            bytes.extend_from_slice(&x.to_le_bytes());
        }
        bytes
    }

    /// Writes a one-line JSON header followed by little-endian `f32` word
    /// vectors and the six centroids.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let payload = self.payload();
        let header = SpaceHeader {
            format: SPACE_FORMAT.into(),
            version: SPACE_VERSION,
            dims: self.dims,
            vocab_size: self.vocabulary.len(),
            emotions: EMOTIONS.iter().map(|s| s.to_string()).collect(),
            checksum: hex::encode(Sha256::digest(&payload)),
            vocabulary: self.vocabulary.clone(),
        };
        let io = |e| Error::io("<emotion space>", e);
        serde_json::to_writer(&mut w, &header)?;
        w.write_all(b"\n").map_err(io)?;
        w.write_all(&payload).map_err(io)?;
        Ok(())
    }

    pub fn read_from<R: BufRead>(mut r: R) -> Result<Self> {
        let io = |e| Error::io("<emotion space>", e);
        let mut line = String::new();
        r.read_line(&mut line).map_err(io)?;
        let header: SpaceHeader = serde_json::from_str(line.trim_end())?;
        if header.format != SPACE_FORMAT || header.version != SPACE_VERSION {
            return Err(Error::SpaceFormat(format!(
                "unsupported format {} v{}",
                header.format, header.version
            )));
        }
        if header.vocabulary.len() != header.vocab_size || header.emotions != EMOTIONS {
            return Err(Error::SpaceFormat("header fields disagree".into()));
        }
        let mut payload = Vec::new();
        r.read_to_end(&mut payload).map_err(io)?;
        let expected = 4 * header.dims * (header.vocab_size + 6);
        if payload.len() != expected {
            return Err(Error::SpaceFormat(format!(
                "payload has {} bytes, expected {expected}",
                payload.len()
            )));
        }
        if hex::encode(Sha256::digest(&payload)) != header.checksum {
            return Err(Error::SpaceFormat("checksum mismatch".into()));
        }
        let floats: Vec<f32> = payload
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        let split = header.dims * header.vocab_size;
        let vectors = floats[..split].to_vec();
        let mut centroids: [Vec<f32>; 6] = Default::default();
        for (i, c) in centroids.iter_mut().enumerate() {
            *c = floats[split + i * header.dims..split + (i + 1) * header.dims].to_vec();
        }
        let index = header
            .vocabulary
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        Ok(EmotionSpace {
            dims: header.dims,
            index,
            vocabulary: header.vocabulary,
            vectors,
            centroids,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_to(&mut w)?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        EmotionSpace::read_from(std::io::BufReader::new(file))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::tokenize;

    fn sense(rank: u32, pos: f64) -> SenseEntry {
        SenseEntry {
            sense_rank: rank,
            pos_score: pos,
            neg_score: 0.0,
        }
    }

    #[test]
    fn prior_polarity_examples() {
        assert_eq!(weighted_prior(&[sense(1, 0.75)]).0, 0.75);
        let (p, _) = weighted_prior(&[sense(1, 0.5), sense(2, 0.25)]);
        assert!((p - 0.625 / 1.5).abs() < 1e-12);
        let (p, _) = weighted_prior(&[sense(1, 1.0), sense(2, 0.0), sense(3, 0.0)]);
        assert!((p - 6.0 / 11.0).abs() < 1e-12);
    }

    #[test]
    fn lexicon_parsing() {
        let lex = PolarityLexicon::parse("good\t1\t0.75\t0.0\n", "t").unwrap();
        assert_eq!(lex.len(), 1);
        assert_eq!(lex.prior_polarity("Good").unwrap(), (0.75, 0.0));

        let lex = PolarityLexicon::parse("cool\t1\t0.5\t0\ncool\t2\t0.25\t0.125\nice\t1\t0\t0\n", "t").unwrap();
        assert_eq!(lex.len(), 2);
        assert_eq!(lex.senses("cool").unwrap().len(), 2);

        assert!(matches!(
            PolarityLexicon::parse("a\t1\t0.5\t0\na\t1\t0.5\t0\n", "t"),
            Err(Error::Format { line: 2, .. })
        ));
        assert!(matches!(
            PolarityLexicon::parse("a\t1\tx\t0\n", "t"),
            Err(Error::Format { line: 1, .. })
        ));
        assert!(matches!(
            PolarityLexicon::parse("a\t1\t0.75\t0.5\n", "t"),
            Err(Error::Invariant { line: 1, .. })
        ));
        assert!(matches!(
            PolarityLexicon::parse("a\t1\t0.5\t0\na\t3\t0.5\t0\n", "t"),
            Err(Error::Invariant { .. })
        ));
        assert!(matches!(
            PolarityLexicon::parse("a\t0\t0.5\t0\n", "t"),
            Err(Error::Format { .. })
        ));
    }

    #[test]
    fn unknown_lemma() {
        let lex = PolarityLexicon::starter();
        assert!(matches!(lex.prior_polarity("zzzz"), Err(Error::UnknownLemma(_))));
    }

    #[test]
    fn sentiment_per_hundred_words() {
        let lex = PolarityLexicon::parse("nice\t1\t0.5\t0\n", "t").unwrap();
        let text = "one two three four nice six seven eight nine ten";
        let s = document_sentiment(&tokenize(text), &lex).unwrap();
        assert!((s.pos - 5.0).abs() < 1e-12);
        assert_eq!(s.neg, 0.0);
        assert_eq!(s.all, s.pos + s.neg);

        let s = document_sentiment(&tokenize("plain words only"), &lex).unwrap();
        assert_eq!((s.pos, s.neg, s.all), (0.0, 0.0, 0.0));
        assert!(matches!(document_sentiment(&tokenize("..."), &lex), Err(Error::EmptyDocument)));
    }

    fn orthogonal_space() -> EmotionSpace {
        let mut vocab = Vec::new();
        let mut vectors = Vec::new();
        let mut seeds = EmotionSeeds::default();
        for (i, e) in EMOTIONS.iter().enumerate() {
            vocab.push(format!("{e}word"));
            let mut v = vec![0.0f32; 7];
            v[i] = 2.0;
            vectors.extend(v);
            seeds.words[i].push(format!("{e}word"));
        }
        vocab.push("flat".into());
        let mut v = vec![0.0f32; 7];
        v[6] = 1.0;
        vectors.extend(v);
        EmotionSpace::from_vectors(7, vocab, vectors, &seeds).unwrap()
    }

    #[test]
    fn emotion_load_identities() {
        let space = orthogonal_space();
        let load = space.emotion_load(&tokenize("joyword")).unwrap();
        assert!((load.similarities[3] - 1.0).abs() < 1e-12);
        for i in [0, 1, 2, 4, 5] {
            assert!((load.similarities[i] - 0.5).abs() < 1e-12);
        }
        assert!((load.all - 3.5 / 6.0).abs() < 1e-12);
        assert!((load.pos - 0.75).abs() < 1e-12);
        assert!((load.neg - 0.5).abs() < 1e-12);

        let flat = space.emotion_load(&tokenize("flat")).unwrap();
        assert_eq!(flat.similarities, [0.5; 6]);
        assert!(matches!(
            space.emotion_load(&tokenize("unknown words")),
            Err(Error::OutOfVocabularyDocument)
        ));
    }

    #[test]
    fn missing_seed_label() {
        let mut seeds = EmotionSeeds::starter();
        seeds.words[3].clear();
        let texts: Vec<String> = (0..120).map(|i| format!("anger disgust fear sad shock word{i}")).collect();
        let err = EmotionSpace::build(
            &texts,
            &seeds,
            EmotionSpaceOptions {
                dims: 3,
                ..Default::default()
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::EmotionWithoutSeeds(ref l) if l == "joy"));
    }

    #[test]
    fn too_few_documents() {
        let texts = vec!["joy"; 10];
        assert!(matches!(
            EmotionSpace::build(&texts, &EmotionSeeds::starter(), EmotionSpaceOptions::default()),
            Err(Error::InsufficientCorpus { got: 10, .. })
        ));
    }

    #[test]
    fn seed_file_parsing() {
        let s = EmotionSeeds::parse("joy\thappy\n# c\nfear\tAfraid\n", "t").unwrap();
        assert_eq!(s.words[3], vec!["happy"]);
        assert_eq!(s.words[2], vec!["afraid"]);
        assert!(EmotionSeeds::parse("glee\thappy\n", "t").is_err());
        assert!(EmotionSeeds::parse("joy happy\n", "t").is_err());
    }

    #[test]
    fn space_file_round_trip_and_corruption() {
        let space = orthogonal_space();
        let mut buf = Vec::new();
        space.write_to(&mut buf).unwrap();
        let back = EmotionSpace::read_from(&buf[..]).unwrap();
        assert_eq!(back, space);

        let last = buf.len() - 1;
        buf[last] ^= 0x40;
        assert!(matches!(EmotionSpace::read_from(&buf[..]), Err(Error::SpaceFormat(_))));
    }
}
