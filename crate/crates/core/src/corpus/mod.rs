//! Validated, indexed collections of design records.

mod import;
mod index;
mod ingest;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::grammar::{compute_metrics, spec_to_value, ParseError, ParseMode, SpecMetrics};
use crate::model::{composition_types, field_entries, DesignSpec, Ident};
use crate::vocab::{Vocabulary, VocabularyError};

pub use import::{import_kb4va, ImportReport};
pub use index::{load_index, save_index, write_index, INDEX_FILE_NAME, INDEX_FORMAT_VERSION};
pub use ingest::{ingest, IngestReport, ManifestEntry, Rejection, RejectionReason};

pub const MIN_YEAR: i32 = 1990;
pub const MAX_YEAR: i32 = 2100;

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("no manifest.json found in {0}")]
    MissingManifest(PathBuf),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid manifest: {0}")]
    Manifest(String),
    #[error("duplicate design id '{0}'")]
    DuplicateId(String),
    #[error("design '{0}' not found")]
    NotFound(String),
    #[error("index format version {found} is not supported (expected {expected})")]
    VersionMismatch { found: u64, expected: u64 },
    #[error("corrupt index: {0}")]
    CorruptIndex(String),
    #[error(transparent)]
    Vocabulary(#[from] VocabularyError),
    #[error("invalid record '{id}': {message}")]
    InvalidRecord { id: String, message: String },
    #[error("{path}: {}", errors.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Spec { path: PathBuf, errors: Vec<ParseError> },
}

impl CorpusError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        CorpusError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Publication context of a design.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesignMetadata {
    pub paper_title: String,
    pub venue: String,
    pub year: i32,
    pub figure_caption: String,
    pub view_name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_path: Option<String>,
    #[serde(default)]
    pub keywords: Vec<String>,
}

impl DesignMetadata {
    pub fn validate(&self) -> Result<(), String> {
        if !(MIN_YEAR..=MAX_YEAR).contains(&self.year) {
            return Err(format!("year {} outside [{MIN_YEAR}, {MAX_YEAR}]", self.year));
        }
        if let Some(image) = &self.image_path {
            if !is_contained_relative_path(image) {
                return Err(format!("image_path '{image}' escapes the corpus root"));
            }
        }
        Ok(())
    }
}

/// True for a non-empty relative path with no `..`, root or prefix component.
pub fn is_contained_relative_path(path: &str) -> bool {
    use std::path::Component;
    !path.is_empty()
        && !path.starts_with('/')
        && !path.contains('\\')
        && Path::new(path)
            .components()
            .all(|c| matches!(c, Component::Normal(_) | Component::CurDir))
}

/// Returns true when `id` matches `[a-z0-9][a-z0-9_-]*`.
pub fn is_valid_id(id: &str) -> bool {
    let mut chars = id.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() || c.is_ascii_digit() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' || c == '-')
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DesignRecord {
    pub id: String,
    pub spec: DesignSpec,
    pub metrics: SpecMetrics,
    pub meta: DesignMetadata,
}

impl DesignRecord {
    /// Builds a record, deriving its metrics from the spec.
    pub fn new(id: impl Into<String>, spec: DesignSpec, meta: DesignMetadata, vocab: &Vocabulary) -> Self {
        let metrics = compute_metrics(&spec, vocab);
        DesignRecord {
            id: id.into(),
            spec,
            metrics,
            meta,
        }
    }
}

/// Per-record lookup structures built once when the corpus is assembled.
#[derive(Debug, Clone)]
pub(crate) struct RecordIndex {
    pub document: Value,
    pub keys: HashSet<String>,
    pub marks: BTreeSet<Ident>,
    pub channels: BTreeSet<Ident>,
    pub data_types: BTreeSet<Ident>,
    pub aggregates: BTreeSet<Ident>,
    pub compositions: BTreeSet<Ident>,
    pub actions: BTreeSet<Ident>,
    pub targets: BTreeSet<Ident>,
    pub field_names: Vec<String>,
}

fn collect_keys(value: &Value, keys: &mut HashSet<String>) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                if !keys.contains(k) {
                    keys.insert(k.clone());
                }
                collect_keys(v, keys);
            }
        }
        Value::Array(items) => items.iter().for_each(|v| collect_keys(v, keys)),
        _ => {}
    }
}

impl RecordIndex {
    fn build(record: &DesignRecord) -> Self {
        let spec = &record.spec;
        let document = spec_to_value(spec);
        let mut keys = HashSet::new();
        collect_keys(&document, &mut keys);
        let entries = field_entries(spec);
        RecordIndex {
            keys,
            marks: record.metrics.mark_counts.keys().cloned().collect(),
            channels: entries.iter().map(|e| Ident::from(e.channel)).collect(),
            data_types: entries.iter().map(|e| e.def.data_type.clone()).collect(),
            aggregates: entries.iter().filter_map(|e| e.def.aggregate.clone()).collect(),
            compositions: composition_types(spec).into_iter().map(|k| Ident::from(k.as_str())).collect(),
            actions: spec.tasks.iter().map(|t| t.action.clone()).collect(),
            targets: spec.tasks.iter().map(|t| t.target.clone()).collect(),
            field_names: entries.iter().map(|e| e.def.field.to_lowercase()).collect(),
            document,
        }
    }
}

/// An immutable set of design records ordered by ascending id.
#[derive(Debug, Clone)]
pub struct Corpus {
    vocab: Vocabulary,
    mode: ParseMode,
    records: Vec<DesignRecord>,
    indexes: Vec<RecordIndex>,
    by_id: HashMap<String, usize>,
    root: Option<PathBuf>,
}

impl Corpus {
    pub fn new(vocab: Vocabulary, mode: ParseMode, mut records: Vec<DesignRecord>) -> Result<Self, CorpusError> {
        records.sort_by(|a, b| a.id.cmp(&b.id));
        let mut by_id = HashMap::with_capacity(records.len());
        for (i, record) in records.iter().enumerate() {
            if !is_valid_id(&record.id) {
                return Err(CorpusError::InvalidRecord {
                    id: record.id.clone(),
                    message: "id must match [a-z0-9][a-z0-9_-]*".into(),
                });
            }
            if by_id.insert(record.id.clone(), i).is_some() {
                return Err(CorpusError::DuplicateId(record.id.clone()));
            }
        }
        let indexes = records.iter().map(RecordIndex::build).collect();
        Ok(Corpus {
            vocab,
            mode,
            records,
            indexes,
            by_id,
            root: None,
        })
    }

    /// Attaches the directory that relative image paths resolve against.
    pub fn with_root(mut self, root: impl Into<PathBuf>) -> Self {
        self.root = Some(root.into());
        self
    }

    pub fn root(&self) -> Option<&Path> {
        self.root.as_deref()
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn mode(&self) -> ParseMode {
        self.mode
    }

    pub fn records(&self) -> &[DesignRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.records.iter().map(|r| r.id.as_str())
    }

    pub fn get(&self, id: &str) -> Result<&DesignRecord, CorpusError> {
        self.by_id
            .get(id)
            .map(|&i| &self.records[i])
            .ok_or_else(|| CorpusError::NotFound(id.to_string()))
    }

    /// Canonical JSON document of the record at `position`.
    pub fn document(&self, position: usize) -> &Value {
        &self.indexes[position].document
    }

    pub(crate) fn indexed(&self) -> impl Iterator<Item = (&DesignRecord, &RecordIndex)> {
        self.records.iter().zip(&self.indexes)
    }

    /// Loads a corpus directory (via ingest) or a saved index file.
    pub fn open(path: &Path, mode: ParseMode) -> Result<(Corpus, Option<IngestReport>), CorpusError> {
        if path.is_dir() {
            let (corpus, report) = ingest(path, mode)?;
            Ok((corpus, Some(report)))
        } else {
            Ok((load_index(path)?, None))
        }
    }
}
