//! Seeded synthetic corpora with controlled feature densities.
//!
//! Documents are neutral filler text with entity names, temporal
//! expressions, polarity words and emotion words injected at per-label
//! rates. Injected items are never adjacent, so each one is recognized as
//! exactly one span. Entity and temporal counts are allocated by error
//! diffusion, which keeps each label's mean coverage on target even for
//! very small rates.

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::affect::{EmotionSeeds, PolarityLexicon};
use crate::corpus::{CorpusRecord, MIN_TOKENS};
use crate::error::{Error, Result};
use crate::text::word_count;

pub const PER_NAMES: &[&str] = &[
    "John", "Mary", "Robert", "Linda", "David", "Sarah", "Michael", "Susan", "James", "Karen",
    "Thomas", "Nancy", "Daniel", "Laura", "Peter", "Helen",
];
pub const LOC_NAMES: &[&str] = &[
    "Paris", "Texas", "Chicago", "Brazil", "London", "Ohio", "Tokyo", "Canada", "Boston",
    "Florida", "New Orleans", "Los Angeles", "Kenya", "Norway",
];
pub const ORG_NAMES: &[&str] = &[
    "Google", "NASA", "FBI", "Walmart", "Reuters", "Boeing", "Interpol", "Greenpeace",
    "United Nations", "Red Cross", "General Motors", "Supreme Court",
];
pub const MISC_NAMES: &[&str] = &[
    "Christmas", "Halloween", "Internet", "Olympics", "American", "French", "Japanese",
    "Super Bowl", "World Cup", "Easter",
];

pub const DATE_PHRASES: &[&str] = &[
    "yesterday", "last week", "next Friday", "October", "15 March 2012", "1998",
    "three years ago", "last summer", "Tuesday", "today",
];
pub const DURATION_PHRASES: &[&str] = &[
    "three days", "45 minutes", "a few weeks", "several months", "an hour", "overnight",
    "all night", "two years", "a couple of hours",
];
pub const TIME_PHRASES: &[&str] = &[
    "midnight", "noon", "5:30 pm", "11pm", "3 o'clock", "last night", "this morning", "17:45",
];

/// Neutral words of one or two syllables.
pub const SIMPLE_FILLER: &[&str] = &[
    "the", "and", "then", "he", "she", "they", "we", "it", "was", "had", "said", "went", "saw",
    "took", "left", "came", "told", "asked", "found", "put", "made", "got", "gave", "kept",
    "held", "heard", "walked", "turned", "looked", "opened", "closed", "car", "door", "room",
    "table", "window", "phone", "box", "bag", "note", "letter", "paper", "friend", "neighbor",
    "driver", "girl", "boy", "child", "wife", "husband", "man", "woman", "people", "town",
    "house", "floor", "wall", "water", "food", "bed", "chair", "glass", "cup", "shop", "store",
    "job", "bus", "train", "desk", "key", "coin", "wallet", "shoe", "coat", "dog", "cat",
    "bird", "tree", "field", "farm", "barn", "book", "pen", "sign", "lamp", "card", "name",
    "word", "thing", "place", "side", "part", "way", "back", "top", "small", "old", "young",
    "tall", "short", "quiet", "slow", "plain", "green", "blue", "big", "to", "from", "with",
    "on", "by", "for", "his", "her", "their", "our", "that", "there", "when", "while", "after",
    "before", "again", "once", "still", "just", "also", "only", "soon",
];
/// Neutral words of three or more syllables.
pub const COMPLEX_FILLER: &[&str] = &[
    "information", "government", "community", "investigation", "officials", "authorities",
    "eventually", "apparently", "immediately", "emergency", "customers", "restaurant",
    "apartment", "computer", "telephone", "camera", "photograph", "evidence", "another",
    "family", "everybody", "anything", "everyone", "library", "medical", "political",
    "national", "international", "industry", "population", "economy", "technology",
    "development", "experience", "operator", "article", "activity", "situation", "condition",
    "position", "education", "director", "manager", "official", "agreement", "regular",
    "popular", "similar", "particular", "important", "different", "available", "possible",
    "generally", "actually", "usually", "probably", "especially", "already", "uniform",
    "newspaper", "material", "energy",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelSpec {
    pub label: String,
    pub documents: usize,
    /// Inclusive range of words per document.
    pub words: (usize, usize),
    /// Spans per word for PER, LOC, ORG, MISC.
    pub entity_density: [f64; 4],
    /// Spans per word for DATE, DURATION, TIME.
    pub timex_density: [f64; 3],
    /// Fraction of words drawn from positive and negative polarity words.
    pub positive_rate: f64,
    pub negative_rate: f64,
    /// Fraction of words drawn from each emotion's seed words.
    pub emotion_rate: [f64; 6],
    /// Fraction of filler words with three or more syllables.
    pub complex_rate: f64,
    /// Mean and standard deviation of words per sentence.
    pub sentence_length: (f64, f64),
    /// Relative per-document variation of every rate, in `[0, 1)`.
    pub jitter: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub labels: Vec<LabelSpec>,
}

impl SynthSpec {
    /// Three genres, FT (fairy tales), UL (urban legends) and GN (news),
    /// with coverage, lexical and sentence-length targets shaped after
    /// published genre means.
    pub fn genre_template(documents: usize) -> Self {
        let base = |label: &str| LabelSpec {
            label: label.into(),
            documents,
            words: (200, 500),
            entity_density: [0.0; 4],
            timex_density: [0.0; 3],
            positive_rate: 0.0,
            negative_rate: 0.0,
            emotion_rate: [0.0; 6],
            complex_rate: 0.0,
            sentence_length: (20.0, 8.0),
            jitter: 0.5,
        };
        SynthSpec {
            labels: vec![
                LabelSpec {
                    entity_density: [0.0086, 0.0031, 0.0027, 0.0015],
                    timex_density: [0.0042, 0.0008, 0.0001],
                    positive_rate: 0.030,
                    negative_rate: 0.032,
                    emotion_rate: [0.002, 0.002, 0.004, 0.010, 0.006, 0.004],
                    complex_rate: 0.05,
                    sentence_length: (26.0, 8.4),
                    ..base("FT")
                },
                LabelSpec {
                    entity_density: [0.0129, 0.0112, 0.0117, 0.0057],
                    timex_density: [0.0070, 0.0020, 0.0002],
                    positive_rate: 0.024,
                    negative_rate: 0.026,
                    emotion_rate: [0.002, 0.003, 0.008, 0.002, 0.002, 0.005],
                    complex_rate: 0.11,
                    sentence_length: (18.7, 8.0),
                    ..base("UL")
                },
                LabelSpec {
                    entity_density: [0.0165, 0.0202, 0.0163, 0.0093],
                    timex_density: [0.0120, 0.0020, 0.0006],
                    positive_rate: 0.026,
                    negative_rate: 0.026,
                    emotion_rate: [0.001, 0.001, 0.001, 0.001, 0.001, 0.001],
                    complex_rate: 0.17,
                    sentence_length: (22.1, 8.0),
                    ..base("GN")
                },
            ],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if self.labels.is_empty() {
            return bad("no labels".into());
        }
        for l in &self.labels {
            let name = &l.label;
            if name.trim().is_empty() {
                return bad("empty label name".into());
            }
            if l.documents == 0 {
                return bad(format!("{name}: document count must be positive"));
            }
            if l.words.0 < MIN_TOKENS || l.words.0 > l.words.1 {
                return bad(format!("{name}: word range {:?} must start at {MIN_TOKENS} or more", l.words));
            }
            let rates = l
                .entity_density
                .iter()
                .chain(&l.timex_density)
                .chain(&l.emotion_rate)
                .chain([&l.positive_rate, &l.negative_rate, &l.complex_rate]);
            let mut total = 0.0;
            for &r in rates {
                if !(0.0..=1.0).contains(&r) {
                    return bad(format!("{name}: rate {r} outside [0, 1]"));
                }
                total += r;
            }
            if (total - l.complex_rate) * (1.0 + l.jitter) > 0.3 {
                return bad(format!("{name}: injected rates leave too little filler"));
            }
            if !(0.0..1.0).contains(&l.jitter) {
                return bad(format!("{name}: jitter must be in [0, 1)"));
            }
            if !(l.sentence_length.0 >= 3.0 && l.sentence_length.1 >= 0.0) {
                return bad(format!("{name}: sentence length must average at least 3 words"));
            }
        }
        Ok(())
    }
}

struct Vocab {
    positive: Vec<String>,
    negative: Vec<String>,
    emotion: [Vec<String>; 6],
}

impl Vocab {
    fn starter() -> Self {
        let seeds = EmotionSeeds::starter();
        let is_seed = |w: &str| seeds.words.iter().any(|ws| ws.iter().any(|s| s == w));
        let lex = PolarityLexicon::starter();
        let mut lemmas: Vec<&str> = lex.lemmas().filter(|w| !is_seed(w)).collect();
        lemmas.sort_unstable();
        let mut positive = Vec::new();
        let mut negative = Vec::new();
        for w in lemmas {
            let (p, n) = lex.prior_polarity(w).expect("listed lemma");
            if p > n {
                positive.push(w.to_string());
            } else if n > p {
                negative.push(w.to_string());
            }
        }
        Vocab {
            positive,
            negative,
            emotion: seeds.words,
        }
    }
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

/// Rounds `x` up with probability equal to its fractional part.
fn stochastic_round(x: f64, rng: &mut ChaCha8Rng) -> usize {
    let floor = x.floor();
    let up = rng.gen::<f64>() < x - floor;
    floor as usize + usize::from(up)
}

/// Generates every label's documents in spec order. The same spec and seed
/// always produce identical records.
pub fn generate_synthetic_corpus(spec: &SynthSpec, seed: u64) -> Result<Vec<CorpusRecord>> {
    spec.validate()?;
    let vocab = Vocab::starter();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for l in &spec.labels {
        let mut entity_carry = [0.0f64; 4];
        let mut timex_carry = [0.0f64; 3];
        let sentence_len = Normal::new(l.sentence_length.0, l.sentence_length.1)
            .map_err(|e| Error::InvalidSpec(e.to_string()))?;
        for i in 0..l.documents {
            let words = rng.gen_range(l.words.0..=l.words.1);
            let vary = |rate: f64, rng: &mut ChaCha8Rng| rate * (1.0 + l.jitter * rng.gen_range(-1.0..1.0));

            let mut specials: Vec<String> = Vec::new();
            let pools = [PER_NAMES, LOC_NAMES, ORG_NAMES, MISC_NAMES];
            for (t, pool) in pools.iter().enumerate() {
                let want = entity_carry[t] + vary(l.entity_density[t], &mut rng);
                let n = (want * words as f64).round().max(0.0) as usize;
                entity_carry[t] = want - n as f64 / words as f64;
                specials.extend((0..n).map(|_| pool.choose(&mut rng).expect("non-empty").to_string()));
            }
            let pools = [DATE_PHRASES, DURATION_PHRASES, TIME_PHRASES];
            for (t, pool) in pools.iter().enumerate() {
                let want = timex_carry[t] + vary(l.timex_density[t], &mut rng);
                let n = (want * words as f64).round().max(0.0) as usize;
                timex_carry[t] = want - n as f64 / words as f64;
                specials.extend((0..n).map(|_| pool.choose(&mut rng).expect("non-empty").to_string()));
            }
            let lexical = [(l.positive_rate, &vocab.positive), (l.negative_rate, &vocab.negative)];
            for (rate, pool) in lexical {
                let n = stochastic_round(vary(rate, &mut rng) * words as f64, &mut rng);
                specials.extend((0..n).map(|_| pool.choose(&mut rng).expect("non-empty").clone()));
            }
            for (e, pool) in vocab.emotion.iter().enumerate() {
                let n = stochastic_round(vary(l.emotion_rate[e], &mut rng) * words as f64, &mut rng);
                specials.extend((0..n).map(|_| pool.choose(&mut rng).expect("non-empty").clone()));
            }
            specials.shuffle(&mut rng);

            // Every special needs a filler word of its own in front of it.
            let mut special_words: usize = specials.iter().map(|s| word_count(s)).sum();
            while special_words + specials.len() > words {
                special_words -= specials.pop().map_or(0, |s| word_count(&s));
            }
            let filler_n = words - special_words;
            let complex = vary(l.complex_rate, &mut rng).clamp(0.0, 1.0);
            let filler: Vec<&str> = (0..filler_n)
                .map(|_| {
                    let pool = if rng.gen::<f64>() < complex { COMPLEX_FILLER } else { SIMPLE_FILLER };
                    *pool.choose(&mut rng).expect("non-empty")
                })
                .collect();

            // Each special goes into its own gap after a filler word.
            let mut slots: Vec<Option<String>> = vec![None; filler_n];
            let mut gaps = index::sample(&mut rng, filler_n, specials.len()).into_vec();
            gaps.sort_unstable();
            for (g, s) in gaps.into_iter().zip(specials) {
                slots[g] = Some(s);
            }

            let mut text = String::new();
            let mut sentence: Vec<String> = Vec::new();
            let mut sentence_words = 0;
            let mut target = sentence_len.sample(&mut rng).round().max(4.0) as usize;
            for (f, slot) in filler.iter().zip(slots) {
                if sentence_words >= target {
                    push_sentence(&mut text, &sentence);
                    sentence.clear();
                    sentence_words = 0;
                    target = sentence_len.sample(&mut rng).round().max(4.0) as usize;
                }
                sentence.push(f.to_string());
                sentence_words += 1;
                if let Some(s) = slot {
                    sentence_words += word_count(&s);
                    sentence.push(s);
                }
            }
            push_sentence(&mut text, &sentence);
            out.push(CorpusRecord {
                id: format!("{}-{:04}", l.label, i),
                text,
                label: l.label.clone(),
                source: Some("synthetic".into()),
            });
        }
    }
    Ok(out)
}

fn push_sentence(text: &mut String, items: &[String]) {
    if items.is_empty() {
        return;
    }
    if !text.is_empty() {
        text.push(' ');
    }
    text.push_str(&capitalize(&items[0]));
    for w in &items[1..] {
        text.push(' ');
        text.push_str(w);
    }
    text.push('.');
}
