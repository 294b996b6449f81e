//! Counts concept mentions in a small caption stream.
//!
//! ```text
//! cargo run --example scan_captions
//! ```

use imbalance::matcher::{normalize_text, scan_corpus, CompiledVocabulary, ConceptEntry, LemmaTable};

const CAPTIONS: &str = r#"{"id":"1","text":"A golden retriever puppy on the beach"}
{"id":"2","text":"retriever so golden and cute"}
{"id":"3","text":"Dodge RAM truck 1500 for sale"}
{"id":"4","text":"a ram grazing on the hill"}
{"id":"5","text":"Whooping cranes over the marsh"}
{"id":"6","text":"construction crane at dusk"}
{"id":"7","text":"Geese and mice, a strange pair"}
not even json
{"id":"8","text":"crane bird standing in water"}
"#;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let lemmas = LemmaTable::from_pairs([("geese", "goose"), ("mice", "mouse")])?;
    let vocab = CompiledVocabulary::compile(
        vec![
            ConceptEntry::new(0, ["golden retriever"]),
            ConceptEntry::new(1, ["puppy", "dog"]),
            ConceptEntry::new(2, ["ram"]).with_negatives(["truck", "vehicle"]),
            ConceptEntry::new(3, ["crane"]).with_negatives(["bird"]),
            ConceptEntry::new(4, ["whooping crane", "crane bird"]),
            ConceptEntry::new(5, ["goose"]),
            ConceptEntry::new(6, ["mouse"]).with_negatives(["computer"]),
        ],
        &lemmas,
    )?;

    println!("{:?}", normalize_text("Whooping cranes over the marsh", &lemmas));

    let one = scan_corpus(&vocab, &lemmas, CAPTIONS.as_bytes(), 1)?;
    let four = scan_corpus(&vocab, &lemmas, CAPTIONS.as_bytes(), 4)?;
    assert_eq!(one, four);

    println!("records={} malformed={} matched={}", one.table.total_records, one.malformed, one.matched);
    for entry in vocab.entries() {
        println!("{:>2} {:<18} {}", entry.class_id, entry.canonical_name(), one.table.get(entry.class_id));
    }

    let mut csv = Vec::new();
    one.table.write_csv(&mut csv, |c| {
        vocab.entries().iter().find(|e| e.class_id == c).map(|e| e.canonical_name().to_string())
    })?;
    print!("{}", String::from_utf8(csv)?);
    Ok(())
}
