//! Controlled vocabularies for marks, channels, data types, aggregates and tasks.
//!
//! Every identifier used in a design specification is checked against a
//! [`Vocabulary`]. Each grammar category is split into the *original*
//! declarative-grammar members and the *extended* members added for
//! visual-analytics designs; the split drives the expressibility check.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::model::Ident;

/// Channels allowed underneath a `node` or `link` encoding entry.
pub const SUB_CHANNELS: [&str; 7] = ["x", "y", "size", "width", "color", "shape", "opacity"];

/// Channels that accept sub-channel entries.
pub const GRAPH_CHANNELS: [&str; 2] = ["node", "link"];

pub const COMPOSITION_TYPES: [&str; 4] = ["layer", "concat", "facet", "nested"];

/// Version tag accepted in spec, vocabulary and index documents.
pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    pub actions: BTreeSet<Ident>,
    pub targets_tabular: BTreeSet<Ident>,
    pub targets_graph: BTreeSet<Ident>,
    pub marks_original: BTreeSet<Ident>,
    pub marks_extended: BTreeSet<Ident>,
    pub channels_original: BTreeSet<Ident>,
    pub channels_extended: BTreeSet<Ident>,
    pub data_types_original: BTreeSet<Ident>,
    pub data_types_extended: BTreeSet<Ident>,
    pub aggregates: BTreeSet<Ident>,
    pub composition_types: BTreeSet<Ident>,
}

#[derive(Debug, thiserror::Error)]
pub enum VocabularyError {
    #[error("failed to read vocabulary file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("vocabulary document is not valid JSON: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("invalid vocabulary: {0}")]
    Invalid(String),
}

fn set(items: &[&str]) -> BTreeSet<Ident> {
    items.iter().map(|s| Ident::from(*s)).collect()
}

/// Field names of the vocabulary document, in declaration order.
const FIELDS: [&str; 11] = [
    "actions",
    "targets_tabular",
    "targets_graph",
    "marks_original",
    "marks_extended",
    "channels_original",
    "channels_extended",
    "data_types_original",
    "data_types_extended",
    "aggregates",
    "composition_types",
];

impl Default for Vocabulary {
    fn default() -> Self {
        default_vocabulary()
    }
}

/// The built-in vocabulary used when a corpus ships no `vocabulary.json`.
pub fn default_vocabulary() -> Vocabulary {
    Vocabulary {
        actions: set(&[
            "present", "discover", "enjoy", "annotate", "record", "derive", "lookup", "locate",
            "browse", "explore", "identify", "compare", "summarize",
        ]),
        targets_tabular: set(&[
            "value",
            "derived_value",
            "extremum",
            "range",
            "distribution",
            "anomalies",
            "cluster",
            "correlation",
            "order",
            "groups",
        ]),
        targets_graph: set(&["node", "link", "path", "graph", "connectivity", "group"]),
        marks_original: set(&[
            "arc", "area", "bar", "boxplot", "circle", "errorband", "errorbar", "geoshape",
            "image", "line", "point", "rect", "rule", "square", "text", "tick", "trail",
        ]),
        marks_extended: set(&[
            "graph", "tree", "sankey", "radar", "unit", "chord", "parallel", "others",
        ]),
        channels_original: set(&[
            "x", "y", "x2", "y2", "color", "opacity", "size", "shape", "angle", "theta", "radius",
            "text", "detail", "row", "column", "width",
        ]),
        channels_extended: set(&["node", "link"]),
        data_types_original: set(&["quantitative", "nominal", "ordinal", "temporal", "geojson"]),
        data_types_extended: set(&["node", "relational"]),
        aggregates: set(&[
            "count", "bin", "sum", "mean", "median", "min", "max", "variance", "stdev", "distinct",
        ]),
        composition_types: set(&COMPOSITION_TYPES),
    }
}

/// Returns true when `s` matches `[a-z][a-z0-9_]*`.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

impl Vocabulary {
    pub fn is_mark(&self, s: &str) -> bool {
        self.marks_original.contains(s) || self.marks_extended.contains(s)
    }

    pub fn is_channel(&self, s: &str) -> bool {
        self.channels_original.contains(s) || self.channels_extended.contains(s)
    }

    pub fn is_data_type(&self, s: &str) -> bool {
        self.data_types_original.contains(s) || self.data_types_extended.contains(s)
    }

    pub fn is_aggregate(&self, s: &str) -> bool {
        self.aggregates.contains(s)
    }

    pub fn is_action(&self, s: &str) -> bool {
        self.actions.contains(s)
    }

    pub fn is_target(&self, s: &str) -> bool {
        self.targets_tabular.contains(s) || self.targets_graph.contains(s)
    }

    pub fn is_composition(&self, s: &str) -> bool {
        self.composition_types.contains(s)
    }

    pub fn marks(&self) -> impl Iterator<Item = &Ident> {
        self.marks_original.iter().chain(&self.marks_extended)
    }

    pub fn channels(&self) -> impl Iterator<Item = &Ident> {
        self.channels_original.iter().chain(&self.channels_extended)
    }

    pub fn data_types(&self) -> impl Iterator<Item = &Ident> {
        self.data_types_original.iter().chain(&self.data_types_extended)
    }

    pub fn targets(&self) -> impl Iterator<Item = &Ident> {
        self.targets_tabular.iter().chain(&self.targets_graph)
    }

    /// Checks identifier syntax, original/extended disjointness and the fixed
    /// composition set.
    pub fn validate(&self) -> Result<(), VocabularyError> {
        for (name, members) in self.categories() {
            if let Some(bad) = members.iter().find(|id| !is_identifier(id)) {
                return Err(VocabularyError::Invalid(format!(
                    "{name}: '{bad}' is not a valid identifier"
                )));
            }
        }
        let pairs = [
            ("marks", &self.marks_original, &self.marks_extended),
            ("channels", &self.channels_original, &self.channels_extended),
            ("data_types", &self.data_types_original, &self.data_types_extended),
        ];
        for (name, original, extended) in pairs {
            if let Some(shared) = original.intersection(extended).next() {
                return Err(VocabularyError::Invalid(format!(
                    "{name}: '{shared}' is both original and extended"
                )));
            }
        }
        if self.composition_types != set(&COMPOSITION_TYPES) {
            return Err(VocabularyError::Invalid(
                "composition_types must be exactly {layer, concat, facet, nested}".into(),
            ));
        }
        Ok(())
    }

    fn categories(&self) -> [(&'static str, &BTreeSet<Ident>); 11] {
        [
            (FIELDS[0], &self.actions),
            (FIELDS[1], &self.targets_tabular),
            (FIELDS[2], &self.targets_graph),
            (FIELDS[3], &self.marks_original),
            (FIELDS[4], &self.marks_extended),
            (FIELDS[5], &self.channels_original),
            (FIELDS[6], &self.channels_extended),
            (FIELDS[7], &self.data_types_original),
            (FIELDS[8], &self.data_types_extended),
            (FIELDS[9], &self.aggregates),
            (FIELDS[10], &self.composition_types),
        ]
    }

    fn category_mut(&mut self, name: &str) -> Option<&mut BTreeSet<Ident>> {
        Some(match name {
            "actions" => &mut self.actions,
            "targets_tabular" => &mut self.targets_tabular,
            "targets_graph" => &mut self.targets_graph,
            "marks_original" => &mut self.marks_original,
            "marks_extended" => &mut self.marks_extended,
            "channels_original" => &mut self.channels_original,
            "channels_extended" => &mut self.channels_extended,
            "data_types_original" => &mut self.data_types_original,
            "data_types_extended" => &mut self.data_types_extended,
            "aggregates" => &mut self.aggregates,
            "composition_types" => &mut self.composition_types,
            _ => return None,
        })
    }

    /// Parses a vocabulary document. Categories absent from the document keep
    /// their default contents.
    pub fn from_json_str(text: &str) -> Result<Self, VocabularyError> {
        let doc: Value = serde_json::from_str(text)?;
        let Value::Object(map) = doc else {
            return Err(VocabularyError::Invalid("document must be a JSON object".into()));
        };
        let mut vocab = default_vocabulary();
        for (key, value) in map {
            if key == "$schema_version" {
                if value.as_u64() != Some(SCHEMA_VERSION) {
                    return Err(VocabularyError::Invalid(format!(
                        "unsupported $schema_version {value}"
                    )));
                }
                continue;
            }
            let Some(slot) = vocab.category_mut(&key) else {
                return Err(VocabularyError::Invalid(format!("unknown category '{key}'")));
            };
            let Value::Array(items) = value else {
                return Err(VocabularyError::Invalid(format!("'{key}' must be an array")));
            };
            let mut members = BTreeSet::new();
            for item in items {
                match item {
                    Value::String(s) => {
                        members.insert(Ident::from(s));
                    }
                    other => {
                        return Err(VocabularyError::Invalid(format!(
                            "'{key}' contains non-string member {other}"
                        )))
                    }
                }
            }
            *slot = members;
        }
        vocab.validate()?;
        Ok(vocab)
    }

    pub fn load(path: &Path) -> Result<Self, VocabularyError> {
        let text = fs::read_to_string(path).map_err(|source| VocabularyError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    /// JSON object with one sorted array per category.
    pub fn to_json(&self) -> Value {
        let mut map = Map::new();
        for (name, members) in self.categories() {
            map.insert(
                name.to_string(),
                Value::Array(members.iter().map(|m| Value::String(m.to_string())).collect()),
            );
        }
        Value::Object(map)
    }
}

impl fmt::Display for Vocabulary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, members) in self.categories() {
            let list: Vec<&str> = members.iter().map(|m| m.as_str()).collect();
            writeln!(f, "{name}: {}", list.join(", "))?;
        }
        Ok(())
    }
}
