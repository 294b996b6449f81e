//! Caption and phrase normalization.
//!
//! Text is lowercased, split on every run of characters that are neither
//! letters nor digits, and each token is reduced to a noun lemma. Lemmas come
//! from an explicit [`LemmaTable`] of irregular forms first; tokens absent from
//! the table fall through to a small set of plural suffix rules.

use std::collections::{HashMap, HashSet};
use std::io::BufRead;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LemmaError {
    #[error("lemma table line {line}: expected `surface<TAB>lemma`")]
    Malformed { line: usize },
    #[error("lemma table has a cycle through `{0}`")]
    Cycle(String),
    #[error("lemma table: {0}")]
    Io(#[from] std::io::Error),
}

/// Surface form to noun lemma mapping.
///
/// Chains (`a -> b`, `b -> c`) are resolved when the table is built so that a
/// lemma is never itself a key with a different value. Lemma values are fixed
/// points of normalization: a token equal to some lemma is never rewritten by
/// the suffix rules.
#[derive(Debug, Clone, Default)]
pub struct LemmaTable {
    map: HashMap<String, String>,
    lemmas: HashSet<String>,
}

impl LemmaTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a table from `(surface, lemma)` pairs. Both sides are lowercased.
    /// Later pairs override earlier ones for the same surface form.
    pub fn from_pairs<I, S, T>(pairs: I) -> Result<Self, LemmaError>
    where
        I: IntoIterator<Item = (S, T)>,
        S: AsRef<str>,
        T: AsRef<str>,
    {
        let mut raw: HashMap<String, String> = HashMap::new();
        for (surface, lemma) in pairs {
            raw.insert(surface.as_ref().to_lowercase(), lemma.as_ref().to_lowercase());
        }

        let mut map = HashMap::with_capacity(raw.len());
        for key in raw.keys() {
            let mut current = &raw[key];
            let mut steps = 0;
            while let Some(next) = raw.get(current) {
                if next == current {
                    break;
                }
                current = next;
                steps += 1;
                if steps > raw.len() {
                    return Err(LemmaError::Cycle(key.clone()));
                }
            }
            map.insert(key.clone(), current.clone());
        }
        let lemmas = map.values().cloned().collect();
        Ok(Self { map, lemmas })
    }

    /// Parses the tab-separated file format: one `surface<TAB>lemma` per line.
    /// Blank lines and lines starting with `#` are ignored.
    pub fn read<R: BufRead>(reader: R) -> Result<Self, LemmaError> {
        let mut pairs = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim_end_matches(['\r', '\n']);
            if trimmed.trim().is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let (surface, lemma) = trimmed.split_once('\t').ok_or(LemmaError::Malformed { line: idx + 1 })?;
            let (surface, lemma) = (surface.trim(), lemma.trim());
            if surface.is_empty() || lemma.is_empty() {
                return Err(LemmaError::Malformed { line: idx + 1 });
            }
            pairs.push((surface.to_string(), lemma.to_string()));
        }
        Self::from_pairs(pairs)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn get(&self, surface: &str) -> Option<&str> {
        self.map.get(surface).map(String::as_str)
    }

    fn is_lemma(&self, word: &str) -> bool {
        self.lemmas.contains(word)
    }
}

/// One step of the plural suffix rules, or `None` if no rule applies.
/// A rule never fires when it would leave an empty stem.
fn suffix_step(word: &str) -> Option<String> {
    if word.len() > 3 && word.ends_with("ies") {
        return Some(format!("{}y", &word[..word.len() - 3]));
    }
    for suffix in ["ses", "xes", "zes", "ches", "shes"] {
        if word.len() > suffix.len() && word.ends_with(suffix) {
            return Some(word[..word.len() - 2].to_string());
        }
    }
    if word.len() > 1 && word.ends_with('s') && !word.ends_with("ss") {
        return Some(word[..word.len() - 1].to_string());
    }
    None
}

/// Reduces a single lowercase alphanumeric word to its lemma.
///
/// Suffix rules are applied until the word stops changing, so the result is a
/// fixed point: lemmatizing it again returns it unchanged.
pub fn lemmatize(word: &str, table: &LemmaTable) -> String {
    let mut current = word.to_string();
    loop {
        if let Some(lemma) = table.get(&current) {
            return lemma.to_string();
        }
        if table.is_lemma(&current) {
            return current;
        }
        match suffix_step(&current) {
            Some(next) => current = next,
            None => return current,
        }
    }
}

/// Lowercases `raw`, splits it on non-alphanumeric runs and lemmatizes every token.
pub fn normalize_text(raw: &str, table: &LemmaTable) -> Vec<String> {
    let lowered = raw.to_lowercase();
    lowered
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(|t| lemmatize(t, table))
        .collect()
}
