//! Concept frequency estimation over caption corpora.
//!
//! Captions and class synonyms go through the same [`normalize_text`] pipeline.
//! A class matches a caption when all tokens of one of its synonyms occur in the
//! caption, in any order, and none of its negative words does.

mod normalize;
mod scan;
mod vocabulary;

use thiserror::Error;

pub use normalize::{lemmatize, normalize_text, LemmaError, LemmaTable};
pub use scan::{scan_corpus, CaptionRecord, CorpusScanner, ScanSummary};
pub use vocabulary::{
    match_caption, read_concepts, CompiledVocabulary, ConceptEntry, MatchScratch, PhraseRef,
};

#[derive(Debug, Error)]
pub enum MatchError {
    #[error("duplicate class_id {0} in concept vocabulary")]
    DuplicateClass(u32),
    #[error("class {0} has no synonym names")]
    NoSynonyms(u32),
    #[error("concept vocabulary: {0}")]
    Json(#[from] serde_json::Error),
    #[error("shard_count must be at least 1")]
    ZeroShards,
    #[error("thread pool: {0}")]
    Pool(String),
    #[error("reading captions: {0}")]
    Io(#[from] std::io::Error),
}
