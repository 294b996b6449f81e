use std::collections::{BTreeSet, HashMap};
use std::io::Read;

use serde::Deserialize;

use super::normalize::{normalize_text, LemmaTable};
use super::MatchError;

/// One class of the concept vocabulary as written in the vocabulary file.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct ConceptEntry {
    pub class_id: u32,
    /// Synonym phrases. The first one is the canonical name.
    pub names: Vec<String>,
    /// Single words that veto the class when present in a caption.
    #[serde(default)]
    pub negatives: Vec<String>,
}

impl ConceptEntry {
    pub fn new<S: Into<String>>(class_id: u32, names: impl IntoIterator<Item = S>) -> Self {
        Self { class_id, names: names.into_iter().map(Into::into).collect(), negatives: Vec::new() }
    }

    pub fn with_negatives<S: Into<String>>(mut self, negatives: impl IntoIterator<Item = S>) -> Self {
        self.negatives = negatives.into_iter().map(Into::into).collect();
        self
    }

    pub fn canonical_name(&self) -> &str {
        self.names.first().map(String::as_str).unwrap_or("")
    }
}

/// Reads the JSON vocabulary document: an array of `{class_id, names, negatives?}`.
pub fn read_concepts<R: Read>(reader: R) -> Result<Vec<ConceptEntry>, MatchError> {
    let entries: Vec<ConceptEntry> = serde_json::from_reader(reader)?;
    for entry in &entries {
        if entry.names.is_empty() {
            return Err(MatchError::NoSynonyms(entry.class_id));
        }
    }
    Ok(entries)
}

/// A reference to one synonym phrase: owning class and position within its
/// entry's `names`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PhraseRef {
    pub class_id: u32,
    pub phrase_id: u32,
}

type TokenId = u32;

#[derive(Debug, Clone)]
struct Phrase {
    class_slot: usize,
    tokens: Vec<TokenId>,
}

/// Immutable token-indexed matcher built from a list of [`ConceptEntry`].
///
/// Tokens are interned; each phrase keeps its sorted, deduplicated token set and
/// every token maps to the phrases that contain it. Negative words are indexed
/// the same way. The structure is read-only after construction and can be
/// shared across scanning threads.
#[derive(Debug, Clone)]
pub struct CompiledVocabulary {
    entries: Vec<ConceptEntry>,
    token_ids: HashMap<String, TokenId>,
    token_names: Vec<String>,
    phrases: Vec<Phrase>,
    phrase_refs: Vec<PhraseRef>,
    /// token -> indices into `phrases`
    postings: Vec<Vec<u32>>,
    /// token -> negative-word sets (class slot, tokens) containing it
    negative_postings: Vec<Vec<u32>>,
    negatives: Vec<Phrase>,
    dropped_phrases: usize,
}

impl CompiledVocabulary {
    pub fn compile(entries: Vec<ConceptEntry>, lemmas: &LemmaTable) -> Result<Self, MatchError> {
        let mut seen = BTreeSet::new();
        for entry in &entries {
            if !seen.insert(entry.class_id) {
                return Err(MatchError::DuplicateClass(entry.class_id));
            }
        }

        let mut vocab = Self {
            entries: Vec::new(),
            token_ids: HashMap::new(),
            token_names: Vec::new(),
            phrases: Vec::new(),
            phrase_refs: Vec::new(),
            postings: Vec::new(),
            negative_postings: Vec::new(),
            negatives: Vec::new(),
            dropped_phrases: 0,
        };

        for (slot, entry) in entries.iter().enumerate() {
            for (phrase_id, name) in entry.names.iter().enumerate() {
                let tokens = vocab.intern_all(normalize_text(name, lemmas));
                if tokens.is_empty() {
                    log::warn!("class {}: synonym {:?} normalizes to nothing, dropped", entry.class_id, name);
                    vocab.dropped_phrases += 1;
                    continue;
                }
                let idx = vocab.phrases.len() as u32;
                for &t in &tokens {
                    vocab.postings[t as usize].push(idx);
                }
                vocab.phrases.push(Phrase { class_slot: slot, tokens });
                vocab.phrase_refs.push(PhraseRef { class_id: entry.class_id, phrase_id: phrase_id as u32 });
            }
            for word in &entry.negatives {
                let tokens = vocab.intern_all(normalize_text(word, lemmas));
                if tokens.is_empty() {
                    continue;
                }
                let idx = vocab.negatives.len() as u32;
                for &t in &tokens {
                    vocab.negative_postings[t as usize].push(idx);
                }
                vocab.negatives.push(Phrase { class_slot: slot, tokens });
            }
        }
        vocab.entries = entries;
        Ok(vocab)
    }

    fn intern_all(&mut self, tokens: Vec<String>) -> Vec<TokenId> {
        let mut ids: Vec<TokenId> = tokens.into_iter().map(|t| self.intern(t)).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    fn intern(&mut self, token: String) -> TokenId {
        if let Some(&id) = self.token_ids.get(&token) {
            return id;
        }
        let id = self.token_names.len() as TokenId;
        self.token_ids.insert(token.clone(), id);
        self.token_names.push(token);
        self.postings.push(Vec::new());
        self.negative_postings.push(Vec::new());
        id
    }

    pub fn entries(&self) -> &[ConceptEntry] {
        &self.entries
    }

    pub fn class_ids(&self) -> impl Iterator<Item = u32> + '_ {
        self.entries.iter().map(|e| e.class_id)
    }

    /// Number of synonyms dropped because they normalized to no tokens.
    pub fn dropped_phrases(&self) -> usize {
        self.dropped_phrases
    }

    pub fn phrase_count(&self) -> usize {
        self.phrases.len()
    }

    /// Phrases containing `token`, as (class, phrase) pairs.
    pub fn phrases_with_token(&self, token: &str) -> Vec<PhraseRef> {
        let Some(&id) = self.token_ids.get(token) else {
            return Vec::new();
        };
        let mut out: Vec<PhraseRef> =
            self.postings[id as usize].iter().map(|&p| self.phrase_refs[p as usize]).collect();
        out.sort_unstable();
        out
    }

    /// Normalized token set of a phrase, in interned order.
    pub fn phrase_tokens(&self, phrase: PhraseRef) -> Option<Vec<&str>> {
        let idx = self.phrase_refs.iter().position(|&p| p == phrase)?;
        Some(self.phrases[idx].tokens.iter().map(|&t| self.token_names[t as usize].as_str()).collect())
    }

    /// Classes matched by an already-normalized caption, ascending by class id.
    ///
    /// A class matches when some synonym's token set is contained in the caption's
    /// token set and none of its negative words occurs in the caption. Word order
    /// and repeated tokens are irrelevant.
    pub fn match_tokens<S: AsRef<str>>(&self, tokens: &[S]) -> Vec<u32> {
        let mut scratch = MatchScratch::default();
        self.match_into(tokens, &mut scratch);
        scratch.matched
    }

    /// Allocation-reusing variant of [`match_tokens`](Self::match_tokens); the
    /// result is left in `scratch.matched`.
    pub fn match_into<S: AsRef<str>>(&self, tokens: &[S], scratch: &mut MatchScratch) {
        scratch.matched.clear();
        scratch.slots.clear();
        scratch.ids.clear();
        scratch.ids.extend(tokens.iter().filter_map(|t| self.token_ids.get(t.as_ref()).copied()));
        if scratch.ids.is_empty() {
            return;
        }
        scratch.ids.sort_unstable();
        scratch.ids.dedup();

        scratch.hits.clear();
        scratch.hit_classes.clear();
        for &t in &scratch.ids {
            for &p in &self.postings[t as usize] {
                let hits = scratch.hits.entry(p).or_insert(0);
                *hits += 1;
                let phrase = &self.phrases[p as usize];
                if *hits as usize == phrase.tokens.len() {
                    scratch.hit_classes.push(phrase.class_slot);
                }
            }
        }
        if scratch.hit_classes.is_empty() {
            return;
        }
        scratch.hit_classes.sort_unstable();
        scratch.hit_classes.dedup();

        scratch.vetoed.clear();
        scratch.neg_hits.clear();
        for &t in &scratch.ids {
            for &n in &self.negative_postings[t as usize] {
                let hits = scratch.neg_hits.entry(n).or_insert(0);
                *hits += 1;
                let neg = &self.negatives[n as usize];
                if *hits as usize == neg.tokens.len() {
                    scratch.vetoed.push(neg.class_slot);
                }
            }
        }

        for &slot in &scratch.hit_classes {
            if !scratch.vetoed.contains(&slot) {
                scratch.slots.push(slot);
                scratch.matched.push(self.entries[slot].class_id);
            }
        }
        scratch.matched.sort_unstable();
    }
}

/// Reusable buffers for [`CompiledVocabulary::match_into`].
#[derive(Debug, Default)]
pub struct MatchScratch {
    ids: Vec<TokenId>,
    hits: HashMap<u32, u32>,
    neg_hits: HashMap<u32, u32>,
    hit_classes: Vec<usize>,
    vetoed: Vec<usize>,
    /// Entry positions of the matched classes.
    pub(crate) slots: Vec<usize>,
    pub matched: Vec<u32>,
}

/// Classes matched by `tokens`. Thin wrapper over [`CompiledVocabulary::match_tokens`].
pub fn match_caption<S: AsRef<str>>(vocab: &CompiledVocabulary, tokens: &[S]) -> BTreeSet<u32> {
    vocab.match_tokens(tokens).into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn compile(entries: Vec<ConceptEntry>) -> CompiledVocabulary {
        CompiledVocabulary::compile(entries, &LemmaTable::new()).unwrap()
    }

    fn matches(vocab: &CompiledVocabulary, caption: &str) -> Vec<u32> {
        vocab.match_tokens(&normalize_text(caption, &LemmaTable::new()))
    }

    #[test]
    fn index_single_phrase() {
        let v = compile(vec![ConceptEntry::new(0, ["golden retriever"])]);
        let r = PhraseRef { class_id: 0, phrase_id: 0 };
        assert_eq!(v.phrases_with_token("golden"), [r]);
        assert_eq!(v.phrases_with_token("retriever"), [r]);
        assert!(v.phrases_with_token("dog").is_empty());
    }

    #[test]
    fn empty_phrase_dropped_with_warning() {
        let v = compile(vec![ConceptEntry::new(3, ["!!!", "tench"])]);
        assert_eq!(v.dropped_phrases(), 1);
        assert_eq!(v.phrase_count(), 1);
        assert_eq!(v.phrases_with_token("tench"), [PhraseRef { class_id: 3, phrase_id: 1 }]);
    }

    #[test]
    fn shared_token_indexes_both() {
        let v = compile(vec![ConceptEntry::new(0, ["crane"]), ConceptEntry::new(1, ["construction crane"])]);
        assert_eq!(
            v.phrases_with_token("crane"),
            [PhraseRef { class_id: 0, phrase_id: 0 }, PhraseRef { class_id: 1, phrase_id: 0 }]
        );
    }

    #[test]
    fn duplicate_class_rejected() {
        let err = CompiledVocabulary::compile(
            vec![ConceptEntry::new(4, ["a"]), ConceptEntry::new(4, ["b"])],
            &LemmaTable::new(),
        )
        .unwrap_err();
        assert!(matches!(err, MatchError::DuplicateClass(4)));
    }

    #[test]
    fn negative_word_vetoes_class() {
        let v = compile(vec![ConceptEntry::new(7, ["ram"]).with_negatives(["vehicle", "truck"])]);
        assert!(matches(&v, "dodge ram truck 1500").is_empty());
        assert_eq!(matches(&v, "a ram grazing"), [7]);
        assert!(matches(&v, "Dodge RAM trucks").is_empty());
    }

    #[test]
    fn order_is_ignored() {
        let v = compile(vec![ConceptEntry::new(1, ["golden retriever"])]);
        assert_eq!(matches(&v, "retriever so golden and cute"), [1]);
        assert!(matches(&v, "a golden sunset").is_empty());
    }

    #[test]
    fn multi_class_caption() {
        let v = compile(vec![
            ConceptEntry::new(0, ["crane"]).with_negatives(["bird", "wing"]),
            ConceptEntry::new(1, ["bird"]),
        ]);
        assert_eq!(matches(&v, "a crane lifting steel"), [0]);
        assert_eq!(matches(&v, "crane bird on the lake"), [1]);
        assert_eq!(matches(&v, "birds and crane wings"), [1]);
    }

    #[test]
    fn reads_vocabulary_json() {
        let doc = r#"[{"class_id": 0, "names": ["tench", "Tinca tinca"]},
                      {"class_id": 5, "names": ["ram"], "negatives": ["truck"]}]"#;
        let entries = read_concepts(doc.as_bytes()).unwrap();
        assert_eq!(entries[1].negatives, ["truck"]);
        assert!(entries[0].negatives.is_empty());
        assert!(matches!(
            read_concepts(r#"[{"class_id": 0, "names": []}]"#.as_bytes()),
            Err(MatchError::NoSynonyms(0))
        ));
    }

    fn word() -> impl Strategy<Value = String> {
        prop::sample::select(vec![
            "red",
            "fox",
            "golden",
            "retriever",
            "ram",
            "truck",
            "crane",
            "bird",
            "a",
            "the",
        ])
        .prop_map(str::to_string)
    }

    proptest! {
        #[test]
        fn empty_vocabulary_matches_nothing(caption in prop::collection::vec(word(), 0..12)) {
            let v = compile(Vec::new());
            prop_assert!(v.match_tokens(&caption).is_empty());
        }

        #[test]
        fn duplicates_do_not_matter(caption in prop::collection::vec(word(), 0..12)) {
            let v = compile(vec![
                ConceptEntry::new(0, ["golden retriever"]),
                ConceptEntry::new(1, ["ram"]).with_negatives(["truck"]),
                ConceptEntry::new(2, ["red fox", "fox"]),
            ]);
            let mut doubled = caption.clone();
            doubled.extend(caption.iter().cloned());
            prop_assert_eq!(v.match_tokens(&caption), v.match_tokens(&doubled));
        }

        #[test]
        fn adding_tokens_keeps_positive_matches(
            caption in prop::collection::vec(word(), 0..8),
            extra in prop::collection::vec(word(), 0..8),
        ) {
            // No negatives: matches can only grow.
            let v = compile(vec![
                ConceptEntry::new(0, ["golden retriever"]),
                ConceptEntry::new(1, ["ram"]),
                ConceptEntry::new(2, ["red fox", "fox"]),
            ]);
            let before = v.match_tokens(&caption);
            let mut longer = caption.clone();
            longer.extend(extra);
            let after = v.match_tokens(&longer);
            prop_assert!(before.iter().all(|c| after.contains(c)));
        }

        #[test]
        fn adding_a_negative_can_only_remove(caption in prop::collection::vec(word(), 0..8)) {
            let v = compile(vec![ConceptEntry::new(1, ["ram"]).with_negatives(["truck"])]);
            let mut longer = caption.clone();
            longer.push("truck".to_string());
            prop_assert!(v.match_tokens(&longer).is_empty());
        }
    }
}
