//! Compatibility importer for flat JSON exports of annotated designs.
//!
//! An export is a single JSON array with one object per design. Metadata is
//! looked up under a small table of aliases; the view tree is normalized
//! (mark objects, type abbreviations, `bin: true`, bare `parent`/`children`
//! nesting) and parsed leniently. Anything that cannot be mapped is kept in
//! the spec's `$raw` object, keyed by the original top-level key or by the
//! JSON pointer of the stripped view key.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

use super::ingest::{ManifestEntry, MANIFEST_FILE_NAME};
use super::{is_contained_relative_path, is_valid_id, CorpusError, MAX_YEAR, MIN_YEAR};
use crate::grammar::{parse_spec_value, serialize_spec, ParseMode};
use crate::vocab::{Vocabulary, GRAPH_CHANNELS, SUB_CHANNELS};

const ID_KEYS: &[&str] = &["id", "design_id", "_id", "uid"];
const TITLE_KEYS: &[&str] = &["paper_title", "title", "paper", "paperTitle"];
const VENUE_KEYS: &[&str] = &["venue", "conference", "journal", "publication"];
const YEAR_KEYS: &[&str] = &["year", "publication_year"];
const CAPTION_KEYS: &[&str] = &["figure_caption", "caption", "figureCaption"];
const VIEW_NAME_KEYS: &[&str] = &["view_name", "view", "viewName", "name"];
const IMAGE_KEYS: &[&str] = &["image_path", "image", "img", "imagePath", "figure"];
const KEYWORD_KEYS: &[&str] = &["keywords", "keyword", "tags"];
const SPEC_KEYS: &[&str] = &["spec", "specification", "vis", "visualization", "vega_lite", "vegalite"];
const TASK_KEYS: &[&str] = &["tasks", "task"];
const VIEW_KEYS: &[&str] = &["mark", "encoding", "layer", "concat", "hconcat", "vconcat", "direction", "facet", "spec", "nested", "parent", "children", "canvas"];

#[derive(Debug, Clone, Default, Serialize)]
pub struct ImportReport {
    pub imported: usize,
    /// (position in the export, reason)
    pub skipped: Vec<(usize, String)>,
    pub warnings: Vec<String>,
}

fn take_alias(obj: &mut Map<String, Value>, aliases: &[&str]) -> Option<Value> {
    aliases.iter().find_map(|k| obj.remove(*k))
}

fn as_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn sanitize_id(raw: &str) -> String {
    let mut id: String = raw
        .trim()
        .to_lowercase()
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' || c == '-' { c } else { '-' })
        .collect();
    while id.starts_with(['-', '_']) {
        id.remove(0);
    }
    id
}

fn data_type_alias(t: &str) -> String {
    match t {
        "Q" | "q" => "quantitative".into(),
        "T" | "t" => "temporal".into(),
        "O" | "o" => "ordinal".into(),
        "N" | "n" => "nominal".into(),
        other => other.to_lowercase(),
    }
}

struct Normalizer<'a> {
    raw: &'a mut Map<String, Value>,
}

impl Normalizer<'_> {
    fn stash(&mut self, path: String, value: Value) {
        self.raw.insert(path, value);
    }

    fn view(&mut self, value: Value, path: &str) -> Value {
        let Value::Object(mut obj) = value else { return value };
        // bare nesting: {"parent": ..., "children": [...], "canvas": ...}
        if !obj.contains_key("nested") && obj.contains_key("parent") && obj.contains_key("children") {
            let mut nested = Map::new();
            for key in ["parent", "children", "canvas"] {
                if let Some(v) = obj.remove(key) {
                    nested.insert(key.to_string(), v);
                }
            }
            obj.insert("nested".into(), Value::Object(nested));
        }
        let mut out = Map::new();
        for (key, v) in obj {
            let child = format!("{path}/{key}");
            let normalized = match key.as_str() {
                "mark" => match v {
                    Value::Object(mut m) => match m.remove("type") {
                        Some(Value::String(s)) => Value::String(s.to_lowercase()),
                        _ => Value::Object(m),
                    },
                    Value::String(s) => Value::String(s.to_lowercase()),
                    other => other,
                },
                "encoding" => self.encoding(v, &child),
                "layer" | "concat" | "hconcat" | "vconcat" => match v {
                    Value::Array(items) => Value::Array(
                        items
                            .into_iter()
                            .enumerate()
                            .map(|(i, item)| self.view(item, &format!("{child}/{i}")))
                            .collect(),
                    ),
                    other => other,
                },
                "spec" => self.view(v, &child),
                "facet" => self.facet(v, &child),
                "nested" => self.nested(v, &child),
                "direction" => v,
                _ => {
                    self.stash(child, v);
                    continue;
                }
            };
            out.insert(key, normalized);
        }
        Value::Object(out)
    }

    fn encoding(&mut self, value: Value, path: &str) -> Value {
        let Value::Object(channels) = value else { return value };
        let mut out = Map::new();
        for (channel, def) in channels {
            let channel = channel.to_lowercase();
            let allow_sub = GRAPH_CHANNELS.contains(&channel.as_str());
            let child = format!("{path}/{channel}");
            out.insert(channel, self.field_def(def, &child, allow_sub));
        }
        Value::Object(out)
    }

    fn field_def(&mut self, value: Value, path: &str, allow_sub: bool) -> Value {
        let Value::Object(obj) = value else { return value };
        let mut out = Map::new();
        let mut bin = false;
        for (key, v) in obj {
            match key.as_str() {
                "field" => {
                    out.insert(key, Value::String(as_text(&v)));
                }
                "type" => {
                    let t = v.as_str().map(data_type_alias).map(Value::String).unwrap_or(v);
                    out.insert(key, t);
                }
                "aggregate" => {
                    let a = v.as_str().map(|s| Value::String(s.to_lowercase())).unwrap_or(v);
                    out.insert(key, a);
                }
                "bin" if v == Value::Bool(true) => bin = true,
                sub if allow_sub && SUB_CHANNELS.contains(&sub) => {
                    let child = format!("{path}/{key}");
                    let def = self.field_def(v, &child, false);
                    out.insert(key, def);
                }
                _ => self.stash(format!("{path}/{key}"), v),
            }
        }
        if bin && !out.contains_key("aggregate") {
            out.insert("aggregate".into(), Value::String("bin".into()));
        }
        Value::Object(out)
    }

    fn facet(&mut self, value: Value, path: &str) -> Value {
        let Value::Object(mut obj) = value else { return value };
        let mut out = Map::new();
        if let Some(inner) = obj.remove("spec") {
            out.insert("spec".into(), self.view(inner, &format!("{path}/spec")));
        }
        if obj.contains_key("field") {
            // single facet field without row/column: treat as row
            let def = self.field_def(Value::Object(obj), &format!("{path}/row"), false);
            out.insert("row".into(), def);
            return Value::Object(out);
        }
        for (key, v) in obj {
            let child = format!("{path}/{key}");
            if key == "row" || key == "column" {
                let def = self.field_def(v, &child, false);
                out.insert(key, def);
            } else {
                self.stash(child, v);
            }
        }
        Value::Object(out)
    }

    fn nested(&mut self, value: Value, path: &str) -> Value {
        let Value::Object(obj) = value else { return value };
        let mut out = Map::new();
        for (key, v) in obj {
            let child = format!("{path}/{key}");
            let normalized = match key.as_str() {
                "parent" => self.view(v, &child),
                "children" => match v {
                    Value::Array(items) => Value::Array(
                        items
                            .into_iter()
                            .enumerate()
                            .map(|(i, item)| self.view(item, &format!("{child}/{i}")))
                            .collect(),
                    ),
                    other => self.view(other, &format!("{child}/0")),
                },
                "canvas" => Value::String(as_text(&v)),
                _ => {
                    self.stash(child, v);
                    continue;
                }
            };
            out.insert(key, normalized);
        }
        if let Some(single @ Value::Object(_)) = out.get("children").cloned() {
            out.insert("children".into(), Value::Array(vec![single]));
        }
        Value::Object(out)
    }
}

fn normalize_task(task: Value) -> Value {
    let pair = |a: &str, t: &str| {
        let mut m = Map::new();
        m.insert("action".into(), Value::String(a.trim().to_lowercase()));
        m.insert("target".into(), Value::String(t.trim().to_lowercase().replace(' ', "_")));
        Value::Object(m)
    };
    match task {
        Value::Array(items) if items.len() == 2 => pair(&as_text(&items[0]), &as_text(&items[1])),
        Value::String(s) => match s.split_once([':', ' ']) {
            Some((a, t)) => pair(a, t),
            None => Value::String(s),
        },
        Value::Object(m) => {
            let a = m.get("action").map(as_text);
            let t = m.get("target").map(as_text);
            match (a, t) {
                (Some(a), Some(t)) => pair(&a, &t),
                _ => Value::Object(m),
            }
        }
        other => other,
    }
}

fn year_of(v: &Value) -> Option<i32> {
    match v {
        Value::Number(n) => n.as_i64().and_then(|y| i32::try_from(y).ok()),
        Value::String(s) => s.trim().parse().ok(),
        _ => None,
    }
}

/// Converts a flat export into a corpus directory (`manifest.json` plus
/// `specs/<id>.json`) under `out_dir`.
pub fn import_kb4va(export: &Path, out_dir: &Path, vocab: &Vocabulary) -> Result<ImportReport, CorpusError> {
    let text = fs::read_to_string(export).map_err(|e| CorpusError::io(export, e))?;
    let doc: Value = serde_json::from_str(&text).map_err(|e| CorpusError::Manifest(format!("export: {e}")))?;
    let Value::Array(items) = doc else {
        return Err(CorpusError::Manifest("export must be a JSON array".into()));
    };
    let specs_dir = out_dir.join("specs");
    fs::create_dir_all(&specs_dir).map_err(|e| CorpusError::io(&specs_dir, e))?;

    let mut report = ImportReport::default();
    let mut manifest = Vec::new();
    let mut used_ids = HashSet::new();
    for (position, item) in items.into_iter().enumerate() {
        let Value::Object(mut obj) = item else {
            report.skipped.push((position, "entry is not an object".into()));
            continue;
        };
        let mut id = take_alias(&mut obj, ID_KEYS)
            .map(|v| sanitize_id(&as_text(&v)))
            .filter(|id| is_valid_id(id))
            .unwrap_or_else(|| format!("design-{position:04}"));
        if used_ids.contains(&id) {
            let mut n = 2;
            while used_ids.contains(&format!("{id}-{n}")) {
                n += 1;
            }
            report.warnings.push(format!("entry {position}: id '{id}' already used, renamed to '{id}-{n}'"));
            id = format!("{id}-{n}");
        }
        let paper_title = take_alias(&mut obj, TITLE_KEYS).map(|v| as_text(&v)).unwrap_or_default();
        let venue = take_alias(&mut obj, VENUE_KEYS).map(|v| as_text(&v)).unwrap_or_default();
        let year = take_alias(&mut obj, YEAR_KEYS).as_ref().and_then(year_of);
        let Some(year) = year.filter(|y| (MIN_YEAR..=MAX_YEAR).contains(y)) else {
            report.skipped.push((position, "missing or out-of-range year".into()));
            continue;
        };
        let figure_caption = take_alias(&mut obj, CAPTION_KEYS).map(|v| as_text(&v)).unwrap_or_default();
        let view_name = take_alias(&mut obj, VIEW_NAME_KEYS).map(|v| as_text(&v)).unwrap_or_default();
        let image_path = take_alias(&mut obj, IMAGE_KEYS).map(|v| as_text(&v)).filter(|p| {
            let ok = is_contained_relative_path(p);
            if !ok {
                report.warnings.push(format!("entry {position}: dropped image path '{p}'"));
            }
            ok
        });
        let keywords = match take_alias(&mut obj, KEYWORD_KEYS) {
            Some(Value::Array(items)) => items.iter().map(as_text).collect(),
            Some(Value::String(s)) => s.split(',').map(|k| k.trim().to_string()).filter(|k| !k.is_empty()).collect(),
            _ => Vec::new(),
        };

        // a flat facet entry owns its "spec" key
        let embedded = if obj.contains_key("facet") { None } else { take_alias(&mut obj, SPEC_KEYS) };
        let spec_source = match embedded {
            Some(Value::String(s)) => serde_json::from_str(&s).unwrap_or(Value::String(s)),
            Some(v) => v,
            None => {
                let mut view = Map::new();
                for key in VIEW_KEYS {
                    if let Some(v) = obj.remove(*key) {
                        view.insert(key.to_string(), v);
                    }
                }
                Value::Object(view)
            }
        };
        let Value::Object(mut spec_obj) = spec_source else {
            report.skipped.push((position, "spec is not an object".into()));
            continue;
        };
        let tasks = spec_obj
            .remove("tasks")
            .or_else(|| take_alias(&mut obj, TASK_KEYS))
            .map(|t| match t {
                Value::Array(items) => Value::Array(items.into_iter().map(normalize_task).collect()),
                single => Value::Array(vec![normalize_task(single)]),
            });

        let mut raw = match spec_obj.remove("$raw") {
            Some(Value::Object(m)) => m,
            _ => Map::new(),
        };
        raw.extend(obj);
        let mut normalizer = Normalizer { raw: &mut raw };
        let Value::Object(mut normalized) = normalizer.view(Value::Object(spec_obj), "") else {
            unreachable!("view of an object is an object")
        };
        if let Some(tasks) = tasks {
            normalized.insert("tasks".into(), tasks);
        }
        if !raw.is_empty() {
            normalized.insert("$raw".into(), Value::Object(raw));
        }

        let parsed = match parse_spec_value(&Value::Object(normalized), vocab, ParseMode::Lenient) {
            Ok(p) => p,
            Err(errors) => {
                let msg: Vec<String> = errors.iter().map(ToString::to_string).collect();
                report.skipped.push((position, msg.join("; ")));
                continue;
            }
        };
        report
            .warnings
            .extend(parsed.warnings.iter().map(|w| format!("{id}: {w}")));
        let spec_file = format!("specs/{id}.json");
        let spec_path = out_dir.join(&spec_file);
        fs::write(&spec_path, serialize_spec(&parsed.spec)).map_err(|e| CorpusError::io(&spec_path, e))?;
        used_ids.insert(id.clone());
        manifest.push(ManifestEntry {
            id: Some(id),
            spec_file,
            paper_title,
            venue,
            year,
            figure_caption,
            view_name,
            image_path,
            keywords,
        });
        report.imported += 1;
    }
    let manifest_path = out_dir.join(MANIFEST_FILE_NAME);
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serialization cannot fail");
    text.push('\n');
    fs::write(&manifest_path, text).map_err(|e| CorpusError::io(&manifest_path, e))?;
    Ok(report)
}
