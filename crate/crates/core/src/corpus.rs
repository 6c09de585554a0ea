//! Corpus ingestion, the minimum-length filter and long-document splitting.
//!
//! Corpora are UTF-8 JSON Lines files, one `{"id", "text", "label",
//! "source"?}` object per line.

use std::collections::HashSet;
use std::io::{BufRead, Write};
use std::path::Path;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::{sentences_from_tokens, tokenize, word_count, Document};

/// Documents with fewer word tokens than this are dropped.
pub const MIN_TOKENS: usize = 30;
pub const DEFAULT_MAX_WORDS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub id: String,
    pub text: String,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

impl CorpusRecord {
    pub fn new(id: impl Into<String>, text: impl Into<String>, label: impl Into<String>) -> Self {
        CorpusRecord {
            id: id.into(),
            text: text.into(),
            label: label.into(),
            source: None,
        }
    }

    pub fn to_document(&self) -> Document {
        Document::new(&self.id, &self.text, &self.label)
    }
}

#[derive(Deserialize)]
struct RawRecord {
    id: String,
    text: String,
    label: Option<String>,
    source: Option<String>,
}

/// Reads JSONL records. Records without a label get `default_label`, or
/// fail when none is given. Blank lines are skipped.
pub fn read_corpus<R: BufRead>(r: R, default_label: Option<&str>) -> Result<Vec<CorpusRecord>> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in r.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let fail = |message: String| Error::Parse { line: line_no, message };
        let raw: RawRecord = serde_json::from_str(&line).map_err(|e| fail(e.to_string()))?;
        if raw.text.trim().is_empty() {
            return Err(fail(format!("record {:?} has empty text", raw.id)));
        }
        let label = match raw.label.or_else(|| default_label.map(str::to_string)) {
            Some(l) if !l.trim().is_empty() => l,
            _ => return Err(fail(format!("record {:?} has no label", raw.id))),
        };
        if !seen.insert(raw.id.clone()) {
            return Err(Error::DuplicateId(raw.id));
        }
        out.push(CorpusRecord {
            id: raw.id,
            text: raw.text,
            label,
            source: raw.source,
        });
    }
    Ok(out)
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<CorpusRecord>> {
    load_corpus_with_label(path, None)
}

pub fn load_corpus_with_label(path: impl AsRef<Path>, default_label: Option<&str>) -> Result<Vec<CorpusRecord>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_corpus(std::io::BufReader::new(file), default_label)
}

pub fn write_corpus<W: Write>(mut w: W, records: &[CorpusRecord]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n").map_err(|e| Error::io("<corpus>", e))?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DroppedRecord {
    pub id: String,
    pub word_count: usize,
}

/// Keeps records with at least `min` word tokens.
pub fn filter_min_tokens(records: Vec<CorpusRecord>, min: usize) -> (Vec<CorpusRecord>, Vec<DroppedRecord>) {
    let mut kept = Vec::with_capacity(records.len());
    let mut dropped = Vec::new();
    for r in records {
        let n = word_count(&r.text);
        if n >= min {
            kept.push(r);
        } else {
            dropped.push(DroppedRecord { id: r.id, word_count: n });
        }
    }
    (kept, dropped)
}

/// A place the text may be cut: the whitespace `gap` is consumed and
/// `words` word tokens lie before it.
#[derive(Debug, Clone, Copy)]
struct Cut {
    gap: (usize, usize),
    words: usize,
}

fn paragraph_cuts(text: &str, word_ends: &[usize]) -> Vec<Cut> {
    let re = Regex::new(r"[ \t\r]*\n[ \t\r]*\n\s*").expect("static regex");
    re.find_iter(text)
        .map(|m| Cut {
            gap: (m.start(), m.end()),
            words: word_ends.partition_point(|&e| e <= m.start()),
        })
        .collect()
}

fn sentence_cuts(text: &str, word_ends: &[usize]) -> Vec<Cut> {
    let tokens = tokenize(text);
    let sentences = sentences_from_tokens(&tokens);
    sentences
        .windows(2)
        .map(|w| Cut {
            gap: (w[0].end, w[1].start),
            words: word_ends.partition_point(|&e| e <= w[0].end),
        })
        .collect()
}

/// Cut candidate whose word offset is nearest `target`, restricted to
/// `(lo, hi)` word offsets. Earlier candidates win ties.
fn nearest(cuts: &[Cut], target: usize, lo: usize, hi: usize) -> Option<Cut> {
    cuts.iter()
        .filter(|c| c.words > lo && c.words < hi)
        .min_by_key(|c| c.words.abs_diff(target))
        .copied()
}

/// Splits documents longer than `max_words` into parts of roughly
/// `max_words` words. Each cut goes to the paragraph break nearest the
/// target, else the nearest sentence break, else the word boundary itself.
/// A final part shorter than `min_words` is merged into the one before it.
/// Split parts get ids `id#1`, `id#2`, ...
pub fn split_long_documents(records: Vec<CorpusRecord>, max_words: usize, min_words: usize) -> Result<Vec<CorpusRecord>> {
    if max_words < 2 * min_words || max_words == 0 {
        return Err(Error::InvalidThreshold(format!(
            "max_words {max_words} must be at least twice the minimum length {min_words}"
        )));
    }
    let mut out = Vec::with_capacity(records.len());
    for r in records {
        let parts = split_text(&r.text, max_words, min_words);
        if parts.len() <= 1 {
            out.push(r);
            continue;
        }
        for (i, (a, b)) in parts.into_iter().enumerate() {
            out.push(CorpusRecord {
                id: format!("{}#{}", r.id, i + 1),
                text: r.text[a..b].to_string(),
                label: r.label.clone(),
                source: r.source.clone(),
            });
        }
    }
    Ok(out)
}

/// Byte ranges of the parts of `text`.
fn split_text(text: &str, max_words: usize, min_words: usize) -> Vec<(usize, usize)> {
    let tokens = tokenize(text);
    let words: Vec<(usize, usize)> = tokens.iter().filter(|t| t.is_wordlike()).map(|t| (t.start, t.end)).collect();
    let total = words.len();
    if total <= max_words {
        return vec![(0, text.len())];
    }
    let word_ends: Vec<usize> = words.iter().map(|w| w.1).collect();
    let paragraphs = paragraph_cuts(text, &word_ends);
    let sentences = sentence_cuts(text, &word_ends);

    let mut cuts: Vec<Cut> = Vec::new();
    let mut prev = 0;
    while total - prev > max_words {
        let target = prev + max_words;
        let lo = prev + max_words / 2;
        let hi = (target + max_words / 2).min(total);
        let cut = nearest(&paragraphs, target, lo, hi)
            .or_else(|| nearest(&sentences, target, lo, hi))
            .unwrap_or_else(|| {
                let prev_end = words[target - 1].1;
                let next_start = words[target].0;
                Cut {
                    gap: (prev_end, next_start),
                    words: target,
                }
            });
        cuts.push(cut);
        prev = cut.words;
    }
    if total - prev < min_words {
        cuts.pop();
    }

    let mut parts = Vec::with_capacity(cuts.len() + 1);
    let mut start = 0;
    for c in cuts {
        parts.push((start, c.gap.0));
        start = c.gap.1;
    }
    parts.push((start, text.len()));
    parts
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(n: usize, from: usize) -> String {
        (from..from + n).map(|i| format!("w{i}")).collect::<Vec<_>>().join(" ")
    }

    #[test]
    fn loads_and_reports_positions() {
        let good = "{\"id\":\"a\",\"text\":\"x y\",\"label\":\"UL\"}\n{\"id\":\"b\",\"text\":\"z\",\"label\":\"GN\",\"source\":\"web\"}\n\n{\"id\":\"c\",\"text\":\"q\",\"label\":\"FT\"}\n";
        let recs = read_corpus(good.as_bytes(), None).unwrap();
        assert_eq!(recs.len(), 3);
        assert_eq!(recs[1].source.as_deref(), Some("web"));

        let bad = "{\"id\":\"a\",\"text\":\"x\",\"label\":\"UL\"}\n{\"id\":\"b\",\"text\":\n";
        assert!(matches!(read_corpus(bad.as_bytes(), None), Err(Error::Parse { line: 2, .. })));

        let dup = "{\"id\":\"a\",\"text\":\"x\",\"label\":\"UL\"}\n{\"id\":\"a\",\"text\":\"y\",\"label\":\"UL\"}\n";
        assert!(matches!(read_corpus(dup.as_bytes(), None), Err(Error::DuplicateId(id)) if id == "a"));

        let unlabeled = "{\"id\":\"a\",\"text\":\"x\"}\n";
        assert!(read_corpus(unlabeled.as_bytes(), None).is_err());
        assert_eq!(read_corpus(unlabeled.as_bytes(), Some("nyt")).unwrap()[0].label, "nyt");
    }

    #[test]
    fn write_then_read() {
        let recs = vec![CorpusRecord::new("a", "one\n\ntwo", "UL")];
        let mut buf = Vec::new();
        write_corpus(&mut buf, &recs).unwrap();
        assert_eq!(read_corpus(&buf[..], None).unwrap(), recs);
    }

    #[test]
    fn min_token_boundary() {
        let recs = vec![
            CorpusRecord::new("short", words(29, 0), "UL"),
            CorpusRecord::new("ok", words(30, 0), "UL"),
        ];
        let (kept, dropped) = filter_min_tokens(recs, MIN_TOKENS);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].id, "ok");
        assert_eq!(
            dropped,
            vec![DroppedRecord {
                id: "short".into(),
                word_count: 29
            }]
        );
        assert_eq!(filter_min_tokens(Vec::new(), MIN_TOKENS), (Vec::new(), Vec::new()));
    }

    #[test]
    fn splits_long_text_at_paragraphs() {
        let paras: Vec<String> = (0..150).map(|p| words(100, p * 100)).collect();
        let text = paras.join("\n\n");
        let out = split_long_documents(vec![CorpusRecord::new("t", text, "FT")], 1000, MIN_TOKENS).unwrap();
        assert_eq!(out.len(), 15);
        assert_eq!(out[0].id, "t#1");
        assert_eq!(out[14].id, "t#15");
        assert!(out.iter().all(|r| word_count(&r.text) == 1000));
    }

    #[test]
    fn short_text_unchanged() {
        let r = CorpusRecord::new("t", words(400, 0), "FT");
        assert_eq!(split_long_documents(vec![r.clone()], 1000, MIN_TOKENS).unwrap(), vec![r]);
    }

    #[test]
    fn short_tail_merges_back() {
        let text = format!("{}\n\n{}", words(990, 0), words(11, 990));
        let out = split_long_documents(vec![CorpusRecord::new("t", text.clone(), "FT")], 1000, MIN_TOKENS).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].text, text);

        let text = format!("{}\n\n{}", words(990, 0), words(40, 990));
        let out = split_long_documents(vec![CorpusRecord::new("t", text, "FT")], 1000, MIN_TOKENS).unwrap();
        assert_eq!(out.iter().map(|r| word_count(&r.text)).collect::<Vec<_>>(), vec![990, 40]);
    }

    #[test]
    fn falls_back_to_sentences_then_words() {
        let sentences: Vec<String> = (0..30).map(|s| format!("Start {}.", words(49, s * 50))).collect();
        let text = sentences.join(" ");
        let out = split_long_documents(vec![CorpusRecord::new("t", text, "FT")], 1000, MIN_TOKENS).unwrap();
        assert!(out.iter().all(|r| r.text.ends_with('.')));
        assert_eq!(out.len(), 2);

        let out = split_long_documents(vec![CorpusRecord::new("t", words(2500, 0), "FT")], 1000, MIN_TOKENS).unwrap();
        assert_eq!(out.iter().map(|r| word_count(&r.text)).collect::<Vec<_>>(), vec![1000, 1000, 500]);
    }

    #[test]
    fn threshold_must_leave_room() {
        assert!(matches!(
            split_long_documents(Vec::new(), 50, MIN_TOKENS),
            Err(Error::InvalidThreshold(_))
        ));
    }
}
