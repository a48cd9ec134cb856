//! Attribute (filter-panel) and structural (JSON-pattern) queries.
//!
//! A structural pattern is a JSON value in which the string `"*"` matches any
//! node. Pattern objects match objects containing every pattern key (values
//! matched recursively); pattern arrays match arrays in which every pattern
//! element matches some element. A design is returned when any node of its
//! canonical document, at any depth, matches the pattern.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::Serialize;
use serde_json::Value;

use crate::corpus::{Corpus, RecordIndex, MAX_YEAR, MIN_YEAR};
use crate::grammar::ParseMode;
use crate::model::Ident;
use crate::vocab::Vocabulary;

pub const WILDCARD: &str = "*";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QueryError {
    #[error("pattern syntax: {0}")]
    PatternSyntax(String),
    #[error("unknown {key} '{value}'")]
    UnknownIdentifier { key: String, value: String },
    #[error("invalid value for '{key}': {message}")]
    InvalidParameter { key: String, message: String },
    #[error("unknown filter parameter '{0}'")]
    UnknownParameter(String),
}

impl QueryError {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            QueryError::PatternSyntax(_) => "pattern_syntax",
            QueryError::UnknownIdentifier { .. } => "unknown_identifier",
            QueryError::InvalidParameter { .. } => "invalid_parameter",
            QueryError::UnknownParameter(_) => "unknown_parameter",
        }
    }
}

/// A validated structural pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryPattern {
    root: Value,
    required_keys: BTreeSet<String>,
}

fn check_pattern(value: &Value, path: &str, keys: &mut BTreeSet<String>) -> Result<(), QueryError> {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                if k == WILDCARD {
                    return Err(QueryError::PatternSyntax(format!(
                        "wildcard '*' is only allowed as a value, found as a key at {}",
                        if path.is_empty() { "/" } else { path }
                    )));
                }
                keys.insert(k.clone());
                check_pattern(v, &format!("{path}/{k}"), keys)?;
            }
            Ok(())
        }
        Value::Array(items) => items
            .iter()
            .enumerate()
            .try_for_each(|(i, v)| check_pattern(v, &format!("{path}/{i}"), keys)),
        _ => Ok(()),
    }
}

impl QueryPattern {
    pub fn parse(text: &str) -> Result<Self, QueryError> {
        let value: Value = serde_json::from_str(text).map_err(|e| QueryError::PatternSyntax(e.to_string()))?;
        Self::from_value(value)
    }

    pub fn from_value(root: Value) -> Result<Self, QueryError> {
        let mut required_keys = BTreeSet::new();
        check_pattern(&root, "", &mut required_keys)?;
        Ok(QueryPattern { root, required_keys })
    }

    pub fn root(&self) -> &Value {
        &self.root
    }
}

/// Does `pattern` match `node` at this position?
pub fn matches_at(pattern: &Value, node: &Value) -> bool {
    match pattern {
        Value::String(s) if s == WILDCARD => true,
        Value::Object(pmap) => match node {
            Value::Object(nmap) => pmap
                .iter()
                .all(|(k, pv)| nmap.get(k).is_some_and(|nv| matches_at(pv, nv))),
            _ => false,
        },
        Value::Array(pitems) => match node {
            Value::Array(nitems) => pitems
                .iter()
                .all(|pe| nitems.iter().any(|ne| matches_at(pe, ne))),
            _ => false,
        },
        scalar => scalar == node,
    }
}

/// Matches at `node` or any node beneath it, stopping at the first hit.
fn matches_anywhere(pattern: &Value, node: &Value) -> bool {
    let shape_ok = match pattern {
        Value::Object(_) => node.is_object(),
        Value::Array(_) => node.is_array(),
        _ => true,
    };
    if shape_ok && matches_at(pattern, node) {
        return true;
    }
    match node {
        Value::Object(map) => map.values().any(|v| matches_anywhere(pattern, v)),
        Value::Array(items) => items.iter().any(|v| matches_anywhere(pattern, v)),
        _ => false,
    }
}

fn keys_present(required: &BTreeSet<String>, keys: &HashSet<String>) -> bool {
    required.iter().all(|k| keys.contains(k))
}

/// Ids (ascending) of designs whose canonical document contains a node
/// matching the pattern.
pub fn structural_query(corpus: &Corpus, pattern: &QueryPattern) -> Vec<String> {
    corpus
        .indexed()
        .filter(|(_, index)| keys_present(&pattern.required_keys, &index.keys))
        .filter(|(_, index)| matches_anywhere(&pattern.root, &index.document))
        .map(|(record, _)| record.id.clone())
        .collect()
}

/// Definitional transcription of [`structural_query`]: enumerate every node
/// of every document and test the pattern at each one, with no pruning.
pub fn oracle_structural_query(corpus: &Corpus, pattern: &QueryPattern) -> Vec<String> {
    fn all_nodes<'v>(node: &'v Value, out: &mut Vec<&'v Value>) {
        out.push(node);
        match node {
            Value::Object(map) => {
                for v in map.values() {
                    all_nodes(v, out);
                }
            }
            Value::Array(items) => {
                for v in items {
                    all_nodes(v, out);
                }
            }
            _ => {}
        }
    }

    fn naive_match(pattern: &Value, node: &Value) -> bool {
        if pattern.as_str() == Some(WILDCARD) {
            return true;
        }
        if let Some(pmap) = pattern.as_object() {
            let Some(nmap) = node.as_object() else { return false };
            for (key, pv) in pmap {
                match nmap.get(key) {
                    Some(nv) if naive_match(pv, nv) => {}
                    _ => return false,
                }
            }
            return true;
        }
        if let Some(pitems) = pattern.as_array() {
            let Some(nitems) = node.as_array() else { return false };
            for pe in pitems {
                let mut found = false;
                for ne in nitems {
                    if naive_match(pe, ne) {
                        found = true;
                    }
                }
                if !found {
                    return false;
                }
            }
            return true;
        }
        pattern == node
    }

    let mut ids = Vec::new();
    for (position, record) in corpus.records().iter().enumerate() {
        let mut nodes = Vec::new();
        all_nodes(corpus.document(position), &mut nodes);
        let mut hit = false;
        for node in nodes {
            if naive_match(pattern.root(), node) {
                hit = true;
            }
        }
        if hit {
            ids.push(record.id.clone());
        }
    }
    ids.sort();
    ids
}

/// Attribute filter: conjunction across fields, disjunction within a set.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct FilterQuery {
    pub marks: BTreeSet<String>,
    pub channels: BTreeSet<String>,
    pub data_types: BTreeSet<String>,
    pub aggregates: BTreeSet<String>,
    pub compositions: BTreeSet<String>,
    pub actions: BTreeSet<String>,
    pub targets: BTreeSet<String>,
    pub field_name_contains: Option<String>,
    pub composite: Option<bool>,
    pub expressible: Option<bool>,
    pub year_range: Option<(i32, i32)>,
    pub venue: Option<String>,
}

/// Wire names of the set-valued filter parameters.
pub const SET_PARAMETERS: [&str; 7] = [
    "mark",
    "channel",
    "data_type",
    "aggregate",
    "composition",
    "action",
    "target",
];

fn parse_bool(key: &str, value: &str) -> Result<bool, QueryError> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(QueryError::InvalidParameter {
            key: key.into(),
            message: format!("expected true or false, found '{value}'"),
        }),
    }
}

fn parse_year(key: &str, value: &str) -> Result<i32, QueryError> {
    value.parse().map_err(|_| QueryError::InvalidParameter {
        key: key.into(),
        message: format!("expected a year, found '{value}'"),
    })
}

impl FilterQuery {
    /// Builds a query from its wire form: repeated keys for set members plus
    /// `field`, `composite`, `expressible`, `year_min`, `year_max`, `venue`.
    pub fn from_pairs<K, V, I>(pairs: I) -> Result<Self, QueryError>
    where
        K: AsRef<str>,
        V: AsRef<str>,
        I: IntoIterator<Item = (K, V)>,
    {
        let mut q = FilterQuery::default();
        let mut year_min = None;
        let mut year_max = None;
        for (key, value) in pairs {
            let (key, value) = (key.as_ref(), value.as_ref());
            match key {
                "field" => q.field_name_contains = Some(value.to_string()),
                "composite" => q.composite = Some(parse_bool(key, value)?),
                "expressible" => q.expressible = Some(parse_bool(key, value)?),
                "year_min" => year_min = Some(parse_year(key, value)?),
                "year_max" => year_max = Some(parse_year(key, value)?),
                "venue" => q.venue = Some(value.to_string()),
                _ => match q.set_mut(key) {
                    Some(set) => {
                        set.insert(value.to_string());
                    }
                    None => return Err(QueryError::UnknownParameter(key.to_string())),
                },
            }
        }
        if year_min.is_some() || year_max.is_some() {
            let range = (year_min.unwrap_or(MIN_YEAR), year_max.unwrap_or(MAX_YEAR));
            if range.0 > range.1 {
                return Err(QueryError::InvalidParameter {
                    key: "year_min".into(),
                    message: format!("year_min {} is greater than year_max {}", range.0, range.1),
                });
            }
            q.year_range = Some(range);
        }
        Ok(q)
    }

    /// The wire form, in a stable order.
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let mut pairs = Vec::new();
        for key in SET_PARAMETERS {
            for v in self.set(key).expect("known set parameter") {
                pairs.push((key.to_string(), v.clone()));
            }
        }
        if let Some(f) = &self.field_name_contains {
            pairs.push(("field".into(), f.clone()));
        }
        if let Some(b) = self.composite {
            pairs.push(("composite".into(), b.to_string()));
        }
        if let Some(b) = self.expressible {
            pairs.push(("expressible".into(), b.to_string()));
        }
        if let Some((lo, hi)) = self.year_range {
            pairs.push(("year_min".into(), lo.to_string()));
            pairs.push(("year_max".into(), hi.to_string()));
        }
        if let Some(v) = &self.venue {
            pairs.push(("venue".into(), v.clone()));
        }
        pairs
    }

    fn set(&self, key: &str) -> Option<&BTreeSet<String>> {
        Some(match key {
            "mark" => &self.marks,
            "channel" => &self.channels,
            "data_type" => &self.data_types,
            "aggregate" => &self.aggregates,
            "composition" => &self.compositions,
            "action" => &self.actions,
            "target" => &self.targets,
            _ => return None,
        })
    }

    fn set_mut(&mut self, key: &str) -> Option<&mut BTreeSet<String>> {
        Some(match key {
            "mark" => &mut self.marks,
            "channel" => &mut self.channels,
            "data_type" => &mut self.data_types,
            "aggregate" => &mut self.aggregates,
            "composition" => &mut self.compositions,
            "action" => &mut self.actions,
            "target" => &mut self.targets,
            _ => return None,
        })
    }

    /// Checks every set member against the vocabulary.
    #[allow(clippy::type_complexity)]
    pub fn validate(&self, vocab: &Vocabulary) -> Result<(), QueryError> {
        let checks: [(&str, fn(&Vocabulary, &str) -> bool); 7] = [
            ("mark", Vocabulary::is_mark),
            ("channel", Vocabulary::is_channel),
            ("data_type", Vocabulary::is_data_type),
            ("aggregate", Vocabulary::is_aggregate),
            ("composition", Vocabulary::is_composition),
            ("action", Vocabulary::is_action),
            ("target", Vocabulary::is_target),
        ];
        for (key, known) in checks {
            if let Some(bad) = self.set(key).into_iter().flatten().find(|v| !known(vocab, v)) {
                return Err(QueryError::UnknownIdentifier {
                    key: key.into(),
                    value: bad.clone(),
                });
            }
        }
        Ok(())
    }

    fn accepts(&self, record: &crate::corpus::DesignRecord, index: &RecordIndex) -> bool {
        fn clause(wanted: &BTreeSet<String>, present: &BTreeSet<Ident>) -> bool {
            wanted.is_empty() || wanted.iter().any(|w| present.contains(w.as_str()))
        }
        clause(&self.marks, &index.marks)
            && clause(&self.channels, &index.channels)
            && clause(&self.data_types, &index.data_types)
            && clause(&self.aggregates, &index.aggregates)
            && clause(&self.compositions, &index.compositions)
            && clause(&self.actions, &index.actions)
            && clause(&self.targets, &index.targets)
            && self.field_name_contains.as_ref().is_none_or(|needle| {
                let needle = needle.to_lowercase();
                index.field_names.iter().any(|f| f.contains(&needle))
            })
            && self.composite.is_none_or(|c| record.metrics.is_composite == c)
            && self.expressible.is_none_or(|e| record.metrics.vegalite_expressible == e)
            && self
                .year_range
                .is_none_or(|(lo, hi)| (lo..=hi).contains(&record.meta.year))
            && self
                .venue
                .as_ref()
                .is_none_or(|v| record.meta.venue.eq_ignore_ascii_case(v))
    }
}

impl fmt::Display for FilterQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.to_pairs().into_iter().map(|(k, v)| format!("{k}={v}")).collect();
        f.write_str(&parts.join("&"))
    }
}

/// Ids (ascending) of designs satisfying the filter. In strict corpora,
/// identifiers outside the vocabulary are rejected.
pub fn filter_query(corpus: &Corpus, q: &FilterQuery) -> Result<Vec<String>, QueryError> {
    if corpus.mode() == ParseMode::Strict {
        q.validate(corpus.vocab())?;
    }
    Ok(corpus
        .indexed()
        .filter(|(record, index)| q.accepts(record, index))
        .map(|(record, _)| record.id.clone())
        .collect())
}
