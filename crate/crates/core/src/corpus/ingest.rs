use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{is_contained_relative_path, is_valid_id, Corpus, CorpusError, DesignMetadata, DesignRecord};
use crate::grammar::{parse_spec, ParseError, ParseMode};
use crate::vocab::Vocabulary;

pub const MANIFEST_FILE_NAME: &str = "manifest.json";
pub const VOCABULARY_FILE_NAME: &str = "vocabulary.json";

/// One manifest entry. `id` defaults to the spec file stem.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub spec_file: String,
    pub paper_title: String,
    pub venue: String,
    pub year: i32,
    pub figure_caption: String,
    pub view_name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_path: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub keywords: Vec<String>,
}

impl ManifestEntry {
    pub fn resolved_id(&self) -> String {
        self.id.clone().unwrap_or_else(|| {
            Path::new(&self.spec_file)
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_default()
        })
    }

    pub fn metadata(&self) -> DesignMetadata {
        DesignMetadata {
            paper_title: self.paper_title.clone(),
            venue: self.venue.clone(),
            year: self.year,
            figure_caption: self.figure_caption.clone(),
            view_name: self.view_name.clone(),
            image_path: self.image_path.clone(),
            keywords: self.keywords.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "detail", rename_all = "snake_case")]
pub enum RejectionReason {
    Spec(Vec<ParseError>),
    Io(String),
    Metadata(String),
    DuplicateId(String),
}

impl fmt::Display for RejectionReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RejectionReason::Spec(errors) => {
                let parts: Vec<String> = errors.iter().map(ToString::to_string).collect();
                write!(f, "{}", parts.join("; "))
            }
            RejectionReason::Io(msg) => write!(f, "io error: {msg}"),
            RejectionReason::Metadata(msg) => write!(f, "invalid metadata: {msg}"),
            RejectionReason::DuplicateId(id) => write!(f, "duplicate id '{id}'"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Rejection {
    pub file: String,
    pub reason: RejectionReason,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct IngestReport {
    pub accepted: usize,
    pub rejected: Vec<Rejection>,
    pub warnings: Vec<String>,
}

impl IngestReport {
    pub fn examined(&self) -> usize {
        self.accepted + self.rejected.len()
    }
}

fn read_vocabulary(root: &Path) -> Result<Vocabulary, CorpusError> {
    let path = root.join(VOCABULARY_FILE_NAME);
    if path.is_file() {
        Ok(Vocabulary::load(&path)?)
    } else {
        Ok(Vocabulary::default())
    }
}

/// Ingests `root_dir/manifest.json` and the spec files it references.
///
/// Every manifest entry is either accepted or listed in the report's
/// rejections; only a missing or unreadable manifest fails the whole ingest.
pub fn ingest(root_dir: &Path, mode: ParseMode) -> Result<(Corpus, IngestReport), CorpusError> {
    let manifest_path = root_dir.join(MANIFEST_FILE_NAME);
    if !manifest_path.is_file() {
        return Err(CorpusError::MissingManifest(root_dir.to_path_buf()));
    }
    let text = fs::read_to_string(&manifest_path).map_err(|e| CorpusError::io(&manifest_path, e))?;
    let manifest: Value =
        serde_json::from_str(&text).map_err(|e| CorpusError::Manifest(format!("{}: {e}", manifest_path.display())))?;
    let Value::Array(entries) = manifest else {
        return Err(CorpusError::Manifest("manifest must be a JSON array".into()));
    };
    let vocab = read_vocabulary(root_dir)?;

    let mut report = IngestReport::default();
    let mut records = Vec::new();
    let mut seen = HashSet::new();
    for (i, raw_entry) in entries.into_iter().enumerate() {
        let label = raw_entry
            .get("spec_file")
            .and_then(Value::as_str)
            .map(str::to_string)
            .unwrap_or_else(|| format!("manifest[{i}]"));
        let mut reject = |reason| {
            report.rejected.push(Rejection {
                file: label.clone(),
                reason,
            })
        };
        let entry: ManifestEntry = match serde_json::from_value(raw_entry) {
            Ok(entry) => entry,
            Err(e) => {
                reject(RejectionReason::Metadata(e.to_string()));
                continue;
            }
        };
        let id = entry.resolved_id();
        if !is_valid_id(&id) {
            reject(RejectionReason::Metadata(format!("id '{id}' must match [a-z0-9][a-z0-9_-]*")));
            continue;
        }
        if !is_contained_relative_path(&entry.spec_file) {
            reject(RejectionReason::Metadata(format!(
                "spec_file '{}' escapes the corpus root",
                entry.spec_file
            )));
            continue;
        }
        let meta = entry.metadata();
        if let Err(msg) = meta.validate() {
            reject(RejectionReason::Metadata(msg));
            continue;
        }
        if seen.contains(&id) {
            reject(RejectionReason::DuplicateId(id));
            continue;
        }
        let spec_text = match fs::read_to_string(root_dir.join(&entry.spec_file)) {
            Ok(text) => text,
            Err(e) => {
                reject(RejectionReason::Io(e.to_string()));
                continue;
            }
        };
        match parse_spec(&spec_text, &vocab, mode) {
            Ok(parsed) => {
                report
                    .warnings
                    .extend(parsed.warnings.iter().map(|w| format!("{}: {w}", entry.spec_file)));
                seen.insert(id.clone());
                records.push(DesignRecord::new(id, parsed.spec, meta, &vocab));
                report.accepted += 1;
            }
            Err(errors) => reject(RejectionReason::Spec(errors)),
        }
    }
    let corpus = Corpus::new(vocab, mode, records)?.with_root(root_dir);
    Ok((corpus, report))
}
