//! Single-file persisted corpus.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{Corpus, CorpusError, DesignMetadata, DesignRecord};
use crate::grammar::{compute_metrics, parse_spec_value, ParseMode, SpecMetrics};
use crate::model::DesignSpec;
use crate::vocab::Vocabulary;

pub const INDEX_FILE_NAME: &str = "vakb-index.json";
pub const INDEX_FORMAT: &str = "vakb-index";
pub const INDEX_FORMAT_VERSION: u64 = 1;

#[derive(Serialize)]
struct IndexOut<'a> {
    format: &'static str,
    format_version: u64,
    mode: ParseMode,
    vocabulary: &'a Vocabulary,
    records: Vec<RecordOut<'a>>,
}

#[derive(Serialize)]
struct RecordOut<'a> {
    id: &'a str,
    meta: &'a DesignMetadata,
    metrics: &'a SpecMetrics,
    spec: &'a DesignSpec,
}

#[derive(Deserialize)]
struct IndexIn {
    mode: ParseMode,
    vocabulary: Vocabulary,
    records: Vec<RecordIn>,
}

#[derive(Deserialize)]
struct RecordIn {
    id: String,
    meta: DesignMetadata,
    metrics: SpecMetrics,
    spec: Value,
}

/// Renders the index document.
pub fn write_index(corpus: &Corpus) -> String {
    let doc = IndexOut {
        format: INDEX_FORMAT,
        format_version: INDEX_FORMAT_VERSION,
        mode: corpus.mode(),
        vocabulary: corpus.vocab(),
        records: corpus
            .records()
            .iter()
            .map(|r| RecordOut {
                id: &r.id,
                meta: &r.meta,
                metrics: &r.metrics,
                spec: &r.spec,
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("index serialization cannot fail");
    text.push('\n');
    text
}

pub fn save_index(corpus: &Corpus, path: &Path) -> Result<(), CorpusError> {
    fs::write(path, write_index(corpus)).map_err(|e| CorpusError::io(path, e))
}

pub fn load_index(path: &Path) -> Result<Corpus, CorpusError> {
    let text = fs::read_to_string(path).map_err(|e| CorpusError::io(path, e))?;
    let mut corpus = read_index(&text)?;
    if let Some(parent) = path.parent() {
        corpus = corpus.with_root(parent);
    }
    Ok(corpus)
}

pub(crate) fn read_index(text: &str) -> Result<Corpus, CorpusError> {
    let value: Value = serde_json::from_str(text).map_err(|e| CorpusError::CorruptIndex(e.to_string()))?;
    if value.get("format").and_then(Value::as_str) != Some(INDEX_FORMAT) {
        return Err(CorpusError::CorruptIndex("not a vakb index document".into()));
    }
    let version = value
        .get("format_version")
        .and_then(Value::as_u64)
        .ok_or_else(|| CorpusError::CorruptIndex("missing format_version".into()))?;
    if version != INDEX_FORMAT_VERSION {
        return Err(CorpusError::VersionMismatch {
            found: version,
            expected: INDEX_FORMAT_VERSION,
        });
    }
    let doc: IndexIn = serde_json::from_value(value).map_err(|e| CorpusError::CorruptIndex(e.to_string()))?;
    doc.vocabulary
        .validate()
        .map_err(|e| CorpusError::CorruptIndex(e.to_string()))?;
    let mut records = Vec::with_capacity(doc.records.len());
    for r in doc.records {
        let parsed = parse_spec_value(&r.spec, &doc.vocabulary, doc.mode).map_err(|errors| {
            CorpusError::CorruptIndex(format!(
                "record '{}': {}",
                r.id,
                errors.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
            ))
        })?;
        let metrics = compute_metrics(&parsed.spec, &doc.vocabulary);
        if metrics != r.metrics {
            return Err(CorpusError::CorruptIndex(format!(
                "record '{}': stored metrics disagree with its spec",
                r.id
            )));
        }
        r.meta
            .validate()
            .map_err(|msg| CorpusError::CorruptIndex(format!("record '{}': {msg}", r.id)))?;
        records.push(DesignRecord {
            id: r.id,
            spec: parsed.spec,
            metrics,
            meta: r.meta,
        });
    }
    Corpus::new(doc.vocabulary, doc.mode, records).map_err(|e| CorpusError::CorruptIndex(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tests::meta;
    use crate::model::{TaskAnnotation, ViewNode};
    use crate::vocab::default_vocabulary;

    fn corpus() -> Corpus {
        let vocab = default_vocabulary();
        let a = DesignSpec::new(
            ViewNode::nested(ViewNode::mark("graph"), vec![ViewNode::mark("arc")], "node"),
            vec![TaskAnnotation::new("explore", "graph")],
        );
        let b = DesignSpec::new(ViewNode::mark("bar"), vec![TaskAnnotation::new("present", "value")]);
        let records = vec![
            DesignRecord::new("a", a, meta(), &vocab),
            DesignRecord::new("b", b, meta(), &vocab),
        ];
        Corpus::new(vocab, ParseMode::Strict, records).unwrap()
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let text = write_index(&corpus());
        let loaded = read_index(&text).unwrap();
        assert_eq!(write_index(&loaded), text);
        assert_eq!(loaded.records(), corpus().records());
    }

    #[test]
    fn bumped_version_is_rejected() {
        let text = write_index(&corpus()).replace("\"format_version\": 1", "\"format_version\": 2");
        assert!(matches!(
            read_index(&text),
            Err(CorpusError::VersionMismatch { found: 2, expected: 1 })
        ));
    }

    #[test]
    fn tampered_metrics_are_corrupt() {
        let text = write_index(&corpus()).replacen("\"composition_count\": 1", "\"composition_count\": 7", 1);
        assert!(matches!(read_index(&text), Err(CorpusError::CorruptIndex(_))));
        assert!(matches!(read_index("{"), Err(CorpusError::CorruptIndex(_))));
        assert!(matches!(read_index("{\"format\": \"other\"}"), Err(CorpusError::CorruptIndex(_))));
    }
}
