//! Tokenization, sentence splitting, syllable counting and per-document
//! count profiles.
//!
//! Every extractor in the crate works over the same token stream, so all
//! offsets produced here are byte offsets into the original UTF-8 text and
//! `&text[tok.start..tok.end] == tok.surface` always holds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Abbreviations whose trailing period belongs to the word. A period glued
/// to one of these never ends a sentence.
pub const ABBREVIATIONS: &[&str] = &[
    "mr.", "mrs.", "ms.", "dr.", "st.", "jr.", "sr.", "prof.", "gen.", "col.", "capt.", "lt.",
    "sgt.", "rev.", "gov.", "sen.", "rep.", "mt.", "ft.", "ave.", "inc.", "corp.", "ltd.", "co.",
    "vs.", "u.s.", "u.k.", "e.g.", "i.e.", "etc.", "a.m.", "p.m.", "no.", "jan.", "feb.", "mar.",
    "apr.", "jun.", "jul.", "aug.", "sep.", "sept.", "oct.", "nov.", "dec.",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub label: String,
}

impl Document {
    pub fn new(id: impl Into<String>, text: impl Into<String>, label: impl Into<String>) -> Self {
        Document {
            id: id.into(),
            text: text.into(),
            label: label.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TokenKind {
    Word,
    Number,
    Punctuation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token<'a> {
    pub surface: &'a str,
    pub start: usize,
    pub end: usize,
    pub kind: TokenKind,
}

impl Token<'_> {
    pub fn is_wordlike(&self) -> bool {
        matches!(self.kind, TokenKind::Word | TokenKind::Number)
    }

    pub fn is_capitalized(&self) -> bool {
        self.kind == TokenKind::Word && self.surface.chars().next().is_some_and(char::is_uppercase)
    }
}

/// A sentence as a half-open range of token indices plus its byte span.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sentence {
    pub token_start: usize,
    pub token_end: usize,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TextProfile {
    pub words: usize,
    pub sentences: usize,
    pub syllables: usize,
    pub complex_words: usize,
}

fn is_punct(c: char) -> bool {
    !c.is_alphanumeric()
}

fn is_abbreviation(lowered: &str) -> bool {
    ABBREVIATIONS.contains(&lowered)
}

fn classify(core: &str) -> TokenKind {
    let first = core.chars().next();
    let last = core.chars().next_back();
    let numeric = first.is_some_and(|c| c.is_ascii_digit())
        && last.is_some_and(|c| c.is_ascii_digit())
        && core
            .chars()
            .all(|c| c.is_ascii_digit() || matches!(c, '.' | ',' | ':' | '/' | '-'));
    if numeric {
        TokenKind::Number
    } else {
        TokenKind::Word
    }
}

fn push_chunk<'a>(text: &'a str, offset: usize, chunk: &'a str, out: &mut Vec<Token<'a>>) {
    let punct_token = |start: usize, c: char| Token {
        surface: &text[start..start + c.len_utf8()],
        start,
        end: start + c.len_utf8(),
        kind: TokenKind::Punctuation,
    };

    let mut lo = 0;
    for (i, c) in chunk.char_indices() {
        if !is_punct(c) {
            break;
        }
        out.push(punct_token(offset + i, c));
        lo = i + c.len_utf8();
    }
    if lo == chunk.len() {
        return;
    }

    let mut hi = chunk.len();
    let mut trailing = Vec::new();
    for (i, c) in chunk[lo..].char_indices().rev() {
        if !is_punct(c) {
            break;
        }
        trailing.push((lo + i, c));
        hi = lo + i;
    }

    // Let an abbreviation keep its period.
    if let Some(&(i, '.')) = trailing.last() {
        let candidate = &chunk[lo..i + 1];
        if is_abbreviation(&candidate.to_lowercase()) {
            trailing.pop();
            hi = i + 1;
        }
    }

    let core = &chunk[lo..hi];
    let kind = if core.ends_with('.') {
        TokenKind::Word
    } else {
        classify(core)
    };
    out.push(Token {
        surface: &text[offset + lo..offset + hi],
        start: offset + lo,
        end: offset + hi,
        kind,
    });
    for &(i, c) in trailing.iter().rev() {
        out.push(punct_token(offset + i, c));
    }
}

/// Splits `text` into word, number and punctuation tokens.
pub fn tokenize(text: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut chunk_start = None;
    for (i, c) in text.char_indices() {
        match (c.is_whitespace(), chunk_start) {
            (true, Some(s)) => {
                push_chunk(text, s, &text[s..i], &mut out);
                chunk_start = None;
            }
            (false, None) => chunk_start = Some(i),
            _ => {}
        }
    }
    if let Some(s) = chunk_start {
        push_chunk(text, s, &text[s..], &mut out);
    }
    out
}

fn is_terminal(tok: &Token<'_>) -> bool {
    tok.kind == TokenKind::Punctuation && matches!(tok.surface, "." | "!" | "?")
}

fn is_closer(tok: &Token<'_>) -> bool {
    tok.kind == TokenKind::Punctuation
        && matches!(tok.surface, "\"" | "'" | ")" | "]" | "”" | "’" | "»")
}

fn opens_sentence(tok: &Token<'_>) -> bool {
    tok.kind == TokenKind::Number || tok.is_capitalized()
}

/// Groups tokens into sentences. Boundaries fall only after `.`, `!` or `?`
/// (plus any closing quotes or brackets) when the next word starts with a
/// capital or digit after whitespace, or at the end of the text.
pub fn sentences_from_tokens(tokens: &[Token<'_>]) -> Vec<Sentence> {
    let mut out = Vec::new();
    let mut begin = 0;
    let mut i = 0;
    while i < tokens.len() {
        if !is_terminal(&tokens[i]) {
            i += 1;
            continue;
        }
        let mut last = i;
        while last + 1 < tokens.len() && (is_terminal(&tokens[last + 1]) || is_closer(&tokens[last + 1]))
        {
            if tokens[last + 1].start != tokens[last].end {
                break;
            }
            last += 1;
        }
        let boundary = match tokens.get(last + 1) {
            None => true,
            Some(next) => {
                let gap = next.start > tokens[last].end;
                let first_word = tokens[last + 1..]
                    .iter()
                    .find(|t| t.kind != TokenKind::Punctuation);
                gap && first_word.is_some_and(opens_sentence)
            }
        };
        if boundary {
            out.push(Sentence {
                token_start: begin,
                token_end: last + 1,
                start: tokens[begin].start,
                end: tokens[last].end,
            });
            begin = last + 1;
        }
        i = last + 1;
    }
    if begin < tokens.len() {
        out.push(Sentence {
            token_start: begin,
            token_end: tokens.len(),
            start: tokens[begin].start,
            end: tokens[tokens.len() - 1].end,
        });
    }
    out
}

pub fn split_sentences(text: &str) -> Vec<Sentence> {
    sentences_from_tokens(&tokenize(text))
}

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u' | 'y')
}

fn syllables_in_part(letters: &[char]) -> usize {
    let mut groups = 0;
    let mut prev_vowel = false;
    for &c in letters {
        let v = is_vowel(c);
        if v && !prev_vowel {
            groups += 1;
        }
        prev_vowel = v;
    }
    let n = letters.len();
    if groups > 1 && n >= 2 {
        let last = letters[n - 1];
        let before = letters[n - 2];
        let consonant = |c: char| !is_vowel(c);
        let silent = match (before, last) {
            // silent final e, except consonant + "le"
            (b, 'e') if consonant(b) => !(b == 'l' && n >= 3 && consonant(letters[n - 3])),
            // -ed not after t/d
            ('e', 'd') if n >= 3 => consonant(letters[n - 3]) && !matches!(letters[n - 3], 't' | 'd'),
            // -es not after a sibilant
            ('e', 's') if n >= 3 => {
                let c = letters[n - 3];
                let sibilant = matches!(c, 's' | 'x' | 'z' | 'c' | 'g')
                    || (n >= 4 && letters[n - 4..n - 2] == ['c', 'h'])
                    || (n >= 4 && letters[n - 4..n - 2] == ['s', 'h']);
                consonant(c) && !sibilant
            }
            _ => false,
        };
        if silent {
            groups -= 1;
        }
    }
    groups
}

/// Heuristic syllable count: vowel groups per hyphen-separated part, minus
/// silent endings, never below 1.
pub fn count_syllables(word: &str) -> usize {
    let lowered = word.to_lowercase();
    let total: usize = lowered
        .split('-')
        .map(|part| {
            let letters: Vec<char> = part.chars().filter(|c| c.is_alphabetic()).collect();
            syllables_in_part(&letters)
        })
        .sum();
    total.max(1)
}

/// Counts for a token stream already split into sentences.
pub fn profile_tokens(tokens: &[Token<'_>], sentences: usize) -> TextProfile {
    let mut p = TextProfile {
        sentences,
        ..TextProfile::default()
    };
    for tok in tokens {
        match tok.kind {
            TokenKind::Word => {
                let s = count_syllables(tok.surface);
                p.words += 1;
                p.syllables += s;
                if s >= 3 {
                    p.complex_words += 1;
                }
            }
            TokenKind::Number => {
                p.words += 1;
                p.syllables += 1;
            }
            TokenKind::Punctuation => {}
        }
    }
    p
}

pub fn text_profile(doc: &Document) -> Result<TextProfile> {
    let tokens = tokenize(&doc.text);
    let sentences = sentences_from_tokens(&tokens);
    let p = profile_tokens(&tokens, sentences.len());
    if p.words == 0 {
        return Err(Error::EmptyDocument);
    }
    Ok(p)
}

pub fn word_count(text: &str) -> usize {
    tokenize(text).iter().filter(|t| t.is_wordlike()).count()
}
