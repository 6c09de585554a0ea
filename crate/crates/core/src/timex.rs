//! Temporal expression recognition with a token-level pattern grammar.
//!
//! The grammar is a plain-text rule file (see `data/timex.rules` for the
//! syntax). Each rule compiles to a sequence of token matchers; the scanner
//! collects every rule match, then keeps the longest spans first, breaking
//! ties by tag precedence (DURATION, then DATE, then TIME) and position.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::annotation::Span;
use crate::error::{Error, Result};
use crate::text::Token;

pub static DEFAULT_RULES: &str = include_str!("../data/timex.rules");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum TimexTag {
    Date,
    Duration,
    Time,
}

impl TimexTag {
    pub const ALL: [TimexTag; 3] = [TimexTag::Date, TimexTag::Duration, TimexTag::Time];

    pub fn as_str(self) -> &'static str {
        match self {
            TimexTag::Date => "DATE",
            TimexTag::Duration => "DURATION",
            TimexTag::Time => "TIME",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            TimexTag::Duration => 0,
            TimexTag::Date => 1,
            TimexTag::Time => 2,
        }
    }
}

impl fmt::Display for TimexTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TimexTag {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "DATE" => Ok(TimexTag::Date),
            "DURATION" => Ok(TimexTag::Duration),
            "TIME" => Ok(TimexTag::Time),
            other => Err(format!("unknown timex tag {other:?}")),
        }
    }
}

pub type TimexSpan = Span<TimexTag>;

#[derive(Debug, Clone, Default)]
struct Element {
    literals: HashSet<String>,
    patterns: Vec<Regex>,
    optional: bool,
}

impl Element {
    fn matches(&self, lowered: &str) -> bool {
        self.literals.contains(lowered) || self.patterns.iter().any(|re| re.is_match(lowered))
    }
}

#[derive(Debug, Clone)]
pub struct Rule {
    pub tag: TimexTag,
    /// 1-based line in the rule file.
    pub line: usize,
    pub source: String,
    elements: Vec<Element>,
}

impl Rule {
    /// End positions (exclusive) of every match starting at `start`.
    fn match_ends(&self, lowered: &[String], start: usize) -> BTreeSet<usize> {
        let mut positions = BTreeSet::from([start]);
        for el in &self.elements {
            let mut next = BTreeSet::new();
            for &p in &positions {
                if el.optional {
                    next.insert(p);
                }
                if p < lowered.len() && el.matches(&lowered[p]) {
                    next.insert(p + 1);
                }
            }
            if next.is_empty() {
                return next;
            }
            positions = next;
        }
        positions.retain(|&p| p > start);
        positions
    }
}

/// A compiled rule set. Immutable once built.
#[derive(Debug, Clone)]
pub struct TimexGrammar {
    rules: Vec<Rule>,
}

/// Splits `a|/x|y/|@c` on `|` outside of `/.../`.
fn split_alternatives(spec: &str) -> std::result::Result<Vec<String>, String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut in_regex = false;
    let mut escaped = false;
    for c in spec.chars() {
        if in_regex {
            cur.push(c);
            if escaped {
                escaped = false;
            } else if c == '\\' {
                escaped = true;
            } else if c == '/' {
                in_regex = false;
            }
            continue;
        }
        match c {
            '|' => out.push(std::mem::take(&mut cur)),
            '/' if cur.is_empty() => {
                in_regex = true;
                cur.push(c);
            }
            _ => cur.push(c),
        }
    }
    if in_regex {
        return Err(format!("unterminated regex in {spec:?}"));
    }
    out.push(cur);
    if out.iter().any(String::is_empty) {
        return Err(format!("empty alternative in {spec:?}"));
    }
    Ok(out)
}

fn compile_alternatives(
    spec: &str,
    classes: &HashMap<String, Element>,
    into: &mut Element,
) -> std::result::Result<(), String> {
    for alt in split_alternatives(spec)? {
        if let Some(name) = alt.strip_prefix('@') {
            let class = classes
                .get(name)
                .ok_or_else(|| format!("undefined class @{name}"))?;
            into.literals.extend(class.literals.iter().cloned());
            into.patterns.extend(class.patterns.iter().cloned());
        } else if alt.len() >= 2 && alt.starts_with('/') && alt.ends_with('/') {
            let body = &alt[1..alt.len() - 1];
            let re = Regex::new(&format!("^(?:{body})$")).map_err(|e| e.to_string())?;
            into.patterns.push(re);
        } else {
            into.literals.insert(alt.to_lowercase());
        }
    }
    Ok(())
}

fn split_elements(body: &str) -> Vec<&str> {
    body.split_whitespace().collect()
}

impl TimexGrammar {
    pub fn default_rules() -> Self {
        TimexGrammar::parse(DEFAULT_RULES, "<default>").expect("shipped timex grammar compiles")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        TimexGrammar::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, source: &str) -> Result<Self> {
        let mut classes: HashMap<String, Element> = HashMap::new();
        let mut rules = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fail = |message: String| Error::Format {
                path: source.to_string(),
                line,
                message,
            };
            if let Some(def) = trimmed.strip_prefix('@') {
                let (name, body) = def
                    .split_once('=')
                    .ok_or_else(|| fail("class definition needs `=`".into()))?;
                let mut el = Element::default();
                compile_alternatives(body.trim(), &classes, &mut el).map_err(fail)?;
                classes.insert(name.trim().to_string(), el);
                continue;
            }
            let (tag, body) = trimmed
                .split_once(':')
                .ok_or_else(|| fail("rule needs `TAG:`".into()))?;
            let tag: TimexTag = tag.trim().parse().map_err(fail)?;
            let mut elements = Vec::new();
            for raw_el in split_elements(body) {
                let (spec, optional) = match raw_el.strip_suffix('?') {
                    Some(s) if !s.is_empty() => (s, true),
                    _ => (raw_el, false),
                };
                let mut el = Element {
                    optional,
                    ..Element::default()
                };
                compile_alternatives(spec, &classes, &mut el).map_err(fail)?;
                elements.push(el);
            }
            if elements.iter().all(|e| e.optional) {
                return Err(fail("rule has no required element".into()));
            }
            rules.push(Rule {
                tag,
                line,
                source: trimmed.to_string(),
                elements,
            });
        }
        Ok(TimexGrammar { rules })
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    /// A grammar holding only the rule at `index`.
    pub fn single(&self, index: usize) -> TimexGrammar {
        TimexGrammar {
            rules: vec![self.rules[index].clone()],
        }
    }

    pub fn recognize(&self, tokens: &[Token<'_>]) -> Vec<TimexSpan> {
        let lowered: Vec<String> = tokens.iter().map(|t| t.surface.to_lowercase()).collect();
        // (start, end, tag, rule index)
        let mut candidates = Vec::new();
        for start in 0..lowered.len() {
            for (ri, rule) in self.rules.iter().enumerate() {
                if let Some(&end) = rule.match_ends(&lowered, start).last() {
                    candidates.push((start, end, rule.tag, ri));
                }
            }
        }
        candidates.sort_by_key(|&(s, e, tag, ri)| (std::cmp::Reverse(e - s), tag.precedence(), s, ri));

        let mut taken = vec![false; lowered.len()];
        let mut spans = Vec::new();
        for (s, e, tag, _) in candidates {
            if taken[s..e].iter().any(|&t| t) {
                continue;
            }
            taken[s..e].iter_mut().for_each(|t| *t = true);
            spans.push(Span::new(tag, s, e));
        }
        spans.sort_by_key(|s| s.token_start);
        spans
    }
}

pub fn recognize_timex(tokens: &[Token<'_>], grammar: &TimexGrammar) -> Vec<TimexSpan> {
    grammar.recognize(tokens)
}
