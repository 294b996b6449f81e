use std::io::BufRead;

use rayon::prelude::*;
use serde::Deserialize;

use super::normalize::{normalize_text, LemmaTable};
use super::vocabulary::{CompiledVocabulary, MatchScratch};
use super::MatchError;
use crate::frequency::FrequencyTable;

/// Lines handed to the worker pool per round.
const BATCH_LINES: usize = 1 << 15;

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct CaptionRecord {
    pub id: String,
    pub text: String,
}

/// Result of a corpus scan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanSummary {
    pub table: FrequencyTable,
    /// Lines that were not a JSON object with non-empty string `id` and string `text`.
    pub malformed: u64,
    /// Records that matched at least one class.
    pub matched: u64,
}

#[derive(Debug, Clone)]
struct Tally {
    counts: Vec<u64>,
    records: u64,
    malformed: u64,
    matched: u64,
}

impl Tally {
    fn new(classes: usize) -> Self {
        Self { counts: vec![0; classes], records: 0, malformed: 0, matched: 0 }
    }

    fn merge(mut self, other: Tally) -> Tally {
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            *a += b;
        }
        self.records += other.records;
        self.malformed += other.malformed;
        self.matched += other.matched;
        self
    }
}

/// Scans newline-delimited caption records and counts, per class, the records
/// whose caption matches it.
///
/// Lines are read in batches; each batch is split into `shard_count` contiguous
/// shards counted on a pool of `shard_count` threads and folded in shard order.
/// Counts are integers, so the table does not depend on the shard plan.
pub struct CorpusScanner<'a> {
    vocab: &'a CompiledVocabulary,
    lemmas: &'a LemmaTable,
    shard_count: usize,
}

impl<'a> CorpusScanner<'a> {
    pub fn new(
        vocab: &'a CompiledVocabulary,
        lemmas: &'a LemmaTable,
        shard_count: usize,
    ) -> Result<Self, MatchError> {
        if shard_count == 0 {
            return Err(MatchError::ZeroShards);
        }
        Ok(Self { vocab, lemmas, shard_count })
    }

    pub fn scan<R: BufRead>(&self, mut reader: R) -> Result<ScanSummary, MatchError> {
        let pool = if self.shard_count > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(self.shard_count)
                    .build()
                    .map_err(|e| MatchError::Pool(e.to_string()))?,
            )
        } else {
            None
        };

        let classes = self.vocab.entries().len();
        let mut total = Tally::new(classes);
        let mut batch: Vec<Vec<u8>> = Vec::with_capacity(BATCH_LINES);
        let mut spare: Vec<Vec<u8>> = Vec::new();
        loop {
            batch.clear();
            let mut eof = false;
            while batch.len() < BATCH_LINES {
                let mut line = spare.pop().unwrap_or_default();
                line.clear();
                if reader.read_until(b'\n', &mut line)? == 0 {
                    eof = true;
                    break;
                }
                batch.push(line);
            }
            if !batch.is_empty() {
                let tally = match &pool {
                    Some(pool) => {
                        let chunk = batch.len().div_ceil(self.shard_count);
                        pool.install(|| {
                            batch.par_chunks(chunk).map(|shard| self.count_lines(shard)).collect::<Vec<_>>()
                        })
                        .into_iter()
                        .fold(Tally::new(classes), Tally::merge)
                    }
                    None => self.count_lines(&batch),
                };
                total = total.merge(tally);
            }
            if eof {
                break;
            }
            spare.append(&mut batch);
        }
        Ok(self.finish(total))
    }

    /// Scans already-decoded records.
    pub fn scan_records<'r, I>(&self, records: I) -> ScanSummary
    where
        I: IntoIterator<Item = &'r CaptionRecord>,
    {
        let records: Vec<&CaptionRecord> = records.into_iter().collect();
        let classes = self.vocab.entries().len();
        let count = |shard: &[&CaptionRecord]| {
            let mut tally = Tally::new(classes);
            let mut scratch = MatchScratch::default();
            for rec in shard {
                if rec.id.is_empty() {
                    tally.malformed += 1;
                } else {
                    self.count_record(&rec.text, &mut scratch, &mut tally);
                }
            }
            tally
        };
        let chunk = records.len().div_ceil(self.shard_count).max(1);
        let tally = records.chunks(chunk).map(count).fold(Tally::new(classes), Tally::merge);
        self.finish(tally)
    }

    fn count_lines(&self, lines: &[Vec<u8>]) -> Tally {
        let mut tally = Tally::new(self.vocab.entries().len());
        let mut scratch = MatchScratch::default();
        for line in lines {
            let mut bytes = line.as_slice();
            if let Some(rest) = bytes.strip_suffix(b"\n") {
                bytes = rest;
            }
            if let Some(rest) = bytes.strip_suffix(b"\r") {
                bytes = rest;
            }
            match serde_json::from_slice::<CaptionRecord>(bytes) {
                Ok(rec) if !rec.id.is_empty() => self.count_record(&rec.text, &mut scratch, &mut tally),
                _ => tally.malformed += 1,
            }
        }
        tally
    }

    fn count_record(&self, text: &str, scratch: &mut MatchScratch, tally: &mut Tally) {
        let tokens = normalize_text(text, self.lemmas);
        self.vocab.match_into(&tokens, scratch);
        tally.records += 1;
        if !scratch.slots.is_empty() {
            tally.matched += 1;
        }
        for &slot in &scratch.slots {
            tally.counts[slot] += 1;
        }
    }

    fn finish(&self, tally: Tally) -> ScanSummary {
        let mut table = FrequencyTable::zeroed(self.vocab.class_ids());
        for (entry, n) in self.vocab.entries().iter().zip(&tally.counts) {
            table.counts.insert(entry.class_id, *n);
        }
        table.total_records = tally.records;
        ScanSummary { table, malformed: tally.malformed, matched: tally.matched }
    }
}

/// Scans a newline-delimited JSON caption stream with `shard_count` workers.
pub fn scan_corpus<R: BufRead>(
    vocab: &CompiledVocabulary,
    lemmas: &LemmaTable,
    reader: R,
    shard_count: usize,
) -> Result<ScanSummary, MatchError> {
    CorpusScanner::new(vocab, lemmas, shard_count)?.scan(reader)
}
