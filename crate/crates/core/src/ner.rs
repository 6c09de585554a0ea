//! Gazetteer and rule based named entity recognition.
//!
//! Recognition runs in three passes over the token stream:
//!
//! 1. longest-match gazetteer lookup (case-normalized, leftmost first);
//! 2. person names found in the gazetteer absorb a following capitalized
//!    surname (`Donald Trump`);
//! 3. remaining runs of capitalized words become candidates, tagged by cue
//!    words: a preceding title gives PER, an organization keyword gives ORG,
//!    a location keyword or a preposition plus a known place word gives LOC,
//!    anything else is MISC.
//!
//! A sentence-initial word only joins a span with gazetteer or cue support.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::annotation::Span;
use crate::error::{Error, Result};
use crate::text::{Sentence, Token, TokenKind};

pub const MAX_ENTRY_TOKENS: usize = 8;

static STARTER_GAZETTEER: &str = include_str!("../data/gazetteer.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EntityTag {
    #[serde(rename = "PER")]
    Per,
    #[serde(rename = "LOC")]
    Loc,
    #[serde(rename = "ORG")]
    Org,
    #[serde(rename = "MISC")]
    Misc,
}

impl EntityTag {
    pub const ALL: [EntityTag; 4] = [EntityTag::Per, EntityTag::Loc, EntityTag::Org, EntityTag::Misc];

    pub fn as_str(self) -> &'static str {
        match self {
            EntityTag::Per => "PER",
            EntityTag::Loc => "LOC",
            EntityTag::Org => "ORG",
            EntityTag::Misc => "MISC",
        }
    }
}

impl fmt::Display for EntityTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EntityTag {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "PER" => Ok(EntityTag::Per),
            "LOC" => Ok(EntityTag::Loc),
            "ORG" => Ok(EntityTag::Org),
            "MISC" => Ok(EntityTag::Misc),
            other => Err(format!("unknown entity tag {other:?}")),
        }
    }
}

pub type EntitySpan = Span<EntityTag>;

#[derive(Debug, Clone, Default)]
pub struct Gazetteer {
    entries: HashMap<Vec<String>, EntityTag>,
    location_words: HashSet<String>,
    max_len: usize,
    pub source: String,
}

fn normalize(surface: &str) -> Vec<String> {
    crate::text::tokenize(surface)
        .iter()
        .map(|t| t.surface.to_lowercase())
        .collect()
}

impl Gazetteer {
    pub fn empty() -> Self {
        Gazetteer::default()
    }

    /// The gazetteer shipped with the crate: countries, cities, US states,
    /// common given names, well-known organizations.
    pub fn starter() -> Self {
        Gazetteer::parse(STARTER_GAZETTEER, "<starter>").expect("starter gazetteer is well formed")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Gazetteer::parse(&text, &path.display().to_string())
    }

    /// Parses `surface<TAB>TAG` lines; `#` starts a comment line. Later
    /// duplicates replace earlier ones.
    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut gaz = Gazetteer {
            source: source.to_string(),
            ..Gazetteer::default()
        };
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim_end_matches('\r');
            if trimmed.trim().is_empty() || trimmed.trim_start().starts_with('#') {
                continue;
            }
            let fail = |message: String| Error::Format {
                path: source.to_string(),
                line,
                message,
            };
            let fields: Vec<&str> = trimmed.split('\t').collect();
            if fields.len() != 2 {
                return Err(fail(format!("expected surface<TAB>tag, got {trimmed:?}")));
            }
            let tag: EntityTag = fields[1].trim().parse().map_err(fail)?;
            gaz.insert(fields[0], tag)
                .map_err(|m| fail(m.to_string()))?;
        }
        Ok(gaz)
    }

    pub fn insert(&mut self, surface: &str, tag: EntityTag) -> std::result::Result<(), &'static str> {
        let key = normalize(surface);
        if key.is_empty() {
            return Err("empty surface");
        }
        if key.len() > MAX_ENTRY_TOKENS {
            return Err("entry longer than 8 tokens");
        }
        self.max_len = self.max_len.max(key.len());
        if tag == EntityTag::Loc {
            for k in &key {
                if k.chars().any(char::is_alphabetic) {
                    self.location_words.insert(k.clone());
                }
            }
        }
        self.entries.insert(key, tag);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn max_entry_len(&self) -> usize {
        self.max_len
    }

    pub fn lookup(&self, surface: &str) -> Option<EntityTag> {
        self.entries.get(&normalize(surface)).copied()
    }

    fn is_location_word(&self, lowered: &str) -> bool {
        self.location_words.contains(lowered)
    }
}

const TITLES: &[&str] = &[
    "mr", "mrs", "ms", "dr", "miss", "sir", "lady", "lord", "king", "queen", "prince", "princess",
    "president", "senator", "governor", "officer", "detective", "professor", "prof", "uncle",
    "aunt", "captain", "capt", "sergeant", "sgt", "general", "gen", "judge", "mayor", "rev",
    "father", "sister", "brother",
];

const ORG_WORDS: &[&str] = &[
    "inc", "corp", "corporation", "ltd", "llc", "co", "company", "university", "college",
    "institute", "association", "society", "bank", "hospital", "agency", "department",
    "foundation", "church", "school", "club", "council", "ministry", "party", "airlines",
    "group", "committee", "commission", "bureau", "laboratories", "labs",
];

const LOC_WORDS: &[&str] = &[
    "city", "county", "street", "avenue", "ave", "road", "boulevard", "river", "lake",
    "mountain", "mountains", "mount", "mt", "island", "islands", "beach", "valley", "bay",
    "province", "village", "airport", "bridge", "square", "forest", "desert", "canyon",
    "harbor", "highway", "coast",
];

const LOC_PREPOSITIONS: &[&str] = &["in", "at", "near"];

/// Capitalized words that never start a heuristic entity: the pronoun I and
/// calendar names, which belong to the temporal layer.
const NON_ENTITY: &[&str] = &[
    "i", "i'm", "i've", "i'll", "i'd", "o", "january", "february", "march", "april", "may",
    "june", "july", "august", "september", "october", "november", "december", "monday",
    "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday",
];

fn bare(surface: &str) -> String {
    surface.trim_end_matches('.').to_lowercase()
}

fn is_title(tok: &Token<'_>) -> bool {
    tok.kind == TokenKind::Word && TITLES.contains(&bare(tok.surface).as_str())
}

fn is_candidate(tok: &Token<'_>) -> bool {
    tok.is_capitalized() && !is_title(tok) && !NON_ENTITY.contains(&bare(tok.surface).as_str())
}

fn gazetteer_can_start(tok: &Token<'_>) -> bool {
    match tok.kind {
        TokenKind::Word => tok.surface.chars().next().is_some_and(|c| !c.is_lowercase()),
        TokenKind::Number => true,
        TokenKind::Punctuation => false,
    }
}

fn sentence_initial_flags(tokens: &[Token<'_>], sentences: &[Sentence]) -> Vec<bool> {
    let mut flags = vec![false; tokens.len()];
    for s in sentences {
        if let Some(i) = (s.token_start..s.token_end).find(|&i| tokens[i].kind != TokenKind::Punctuation) {
            flags[i] = true;
        }
    }
    flags
}

fn cue_tag(tokens: &[Token<'_>], start: usize, end: usize, gaz: &Gazetteer) -> Option<EntityTag> {
    let prev = start.checked_sub(1).map(|p| &tokens[p]);
    if prev.is_some_and(is_title) {
        return Some(EntityTag::Per);
    }
    let words: Vec<String> = tokens[start..end].iter().map(|t| bare(t.surface)).collect();
    if words.iter().any(|w| ORG_WORDS.contains(&w.as_str())) {
        return Some(EntityTag::Org);
    }
    if words.iter().any(|w| LOC_WORDS.contains(&w.as_str())) {
        return Some(EntityTag::Loc);
    }
    let after_prep = prev.is_some_and(|p| LOC_PREPOSITIONS.contains(&p.surface.to_lowercase().as_str()));
    if after_prep && words.iter().any(|w| gaz.is_location_word(w)) {
        return Some(EntityTag::Loc);
    }
    None
}

/// Finds entity spans; spans are sorted by position and never overlap.
pub fn recognize_entities(tokens: &[Token<'_>], sentences: &[Sentence], gaz: &Gazetteer) -> Vec<EntitySpan> {
    let n = tokens.len();
    let initial = sentence_initial_flags(tokens, sentences);
    let mut covered = vec![false; n];
    let mut spans = Vec::new();

    let lowered: Vec<String> = tokens.iter().map(|t| t.surface.to_lowercase()).collect();
    let mut i = 0;
    while i < n {
        let mut matched = None;
        if gazetteer_can_start(&tokens[i]) {
            for len in (1..=gaz.max_len.min(n - i)).rev() {
                if let Some(&tag) = gaz.entries.get(&lowered[i..i + len]) {
                    matched = Some((tag, len));
                    break;
                }
            }
        }
        match matched {
            Some((tag, len)) => {
                spans.push(Span::new(tag, i, i + len));
                covered[i..i + len].iter_mut().for_each(|c| *c = true);
                i += len;
            }
            None => i += 1,
        }
    }

    for span in spans.iter_mut().filter(|s| s.tag == EntityTag::Per) {
        while span.token_end < n
            && !covered[span.token_end]
            && !initial[span.token_end]
            && is_candidate(&tokens[span.token_end])
        {
            covered[span.token_end] = true;
            span.token_end += 1;
        }
    }

    let mut i = 0;
    while i < n {
        if covered[i] || !is_candidate(&tokens[i]) {
            i += 1;
            continue;
        }
        let mut end = i + 1;
        while end < n && !covered[end] && !initial[end] && is_candidate(&tokens[end]) {
            end += 1;
        }
        let mut start = i;
        let mut tag = cue_tag(tokens, start, end, gaz);
        if tag.is_none() && initial[start] {
            start += 1;
            if start < end {
                tag = cue_tag(tokens, start, end, gaz);
            }
        }
        if start < end {
            spans.push(Span::new(tag.unwrap_or(EntityTag::Misc), start, end));
        }
        i = end;
    }

    spans.sort_by_key(|s| s.token_start);
    spans
}

/// Renders `token<TAB>tag` lines, with a blank line after each sentence.
pub fn to_iob2(tokens: &[Token<'_>], sentences: &[Sentence], spans: &[EntitySpan]) -> String {
    let mut tags = vec![String::from("O"); tokens.len()];
    for s in spans {
        tags[s.token_start] = format!("B-{}", s.tag);
        for t in &mut tags[s.token_start + 1..s.token_end] {
            *t = format!("I-{}", s.tag);
        }
    }
    let mut out = String::new();
    for s in sentences {
        for i in s.token_start..s.token_end {
            out.push_str(tokens[i].surface);
            out.push('\t');
            out.push_str(&tags[i]);
            out.push('\n');
        }
        out.push('\n');
    }
    out
}
