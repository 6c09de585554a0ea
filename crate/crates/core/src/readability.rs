//! Gunning Fog, Flesch Reading Ease and Flesch-Kincaid grade level.
//!
//! Scores are kept at full precision. Flesch is not clamped to `[0, 100]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::TextProfile;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReadabilityScores {
    pub fog: f64,
    pub flesch: f64,
    pub kincaid: f64,
    pub cpx_ratio: f64,
    pub syll_ratio: f64,
    pub words_per_sentence: f64,
}

pub fn compute_readability(profile: &TextProfile) -> Result<ReadabilityScores> {
    if profile.words == 0 || profile.sentences == 0 {
        return Err(Error::DegenerateProfile {
            words: profile.words,
            sentences: profile.sentences,
        });
    }
    let words = profile.words as f64;
    let words_per_sentence = words / profile.sentences as f64;
    let cpx_ratio = profile.complex_words as f64 / words;
    let syll_ratio = profile.syllables as f64 / words;
    Ok(ReadabilityScores {
        fog: 0.4 * (words_per_sentence + 100.0 * cpx_ratio),
        flesch: 206.835 - 1.015 * words_per_sentence - 84.6 * syll_ratio,
        kincaid: 0.39 * words_per_sentence + 11.8 * syll_ratio - 15.59,
        cpx_ratio,
        syll_ratio,
        words_per_sentence,
    })
}
