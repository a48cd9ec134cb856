use std::collections::{BTreeMap, BTreeSet};

use serde_json::{Map, Value};

use super::{display_path, lint, ParseError, ParseErrorKind, ParseMode, Warning};
use crate::model::{
    ConcatDirection, ConcatView, DesignSpec, FacetView, FieldDef, Ident, LayerView, MarkView,
    NestedView, TaskAnnotation, ViewNode,
};
use crate::vocab::{Vocabulary, GRAPH_CHANNELS, SCHEMA_VERSION, SUB_CHANNELS};

/// A successfully parsed spec plus any non-blocking findings.
#[derive(Debug, Clone)]
pub struct Parsed {
    pub spec: DesignSpec,
    pub warnings: Vec<Warning>,
}

/// Parses a spec document. On failure every error found in a single pass is
/// returned.
pub fn parse_spec(text: &str, vocab: &Vocabulary, mode: ParseMode) -> Result<Parsed, Vec<ParseError>> {
    let value: Value = serde_json::from_str(text).map_err(|e| {
        vec![ParseError {
            path: String::new(),
            kind: ParseErrorKind::Syntax,
            message: e.to_string(),
        }]
    })?;
    parse_spec_value(&value, vocab, mode)
}

pub fn parse_spec_value(value: &Value, vocab: &Vocabulary, mode: ParseMode) -> Result<Parsed, Vec<ParseError>> {
    let mut parser = Parser {
        vocab,
        mode,
        errors: Vec::new(),
        warnings: Vec::new(),
    };
    let spec = parser.document(value);
    match spec {
        Some(spec) if parser.errors.is_empty() => {
            let mut warnings = parser.warnings;
            warnings.extend(lint::lint(&spec));
            Ok(Parsed { spec, warnings })
        }
        _ => Err(parser.errors),
    }
}

const VIEW_KEYS: [&str; 7] = ["nested", "facet", "layer", "concat", "hconcat", "vconcat", "mark"];
const ROOT_KEYS: [&str; 3] = ["tasks", "$schema_version", "$raw"];

/// Appends an escaped JSON-pointer segment.
fn child(path: &str, key: &str) -> String {
    format!("{path}/{}", key.replace('~', "~0").replace('/', "~1"))
}

fn type_name(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "boolean",
        Value::Number(_) => "number",
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}

#[derive(Clone, Copy)]
enum IdentClass {
    Mark,
    Channel,
    DataType,
    Aggregate,
    Action,
    Target,
}

impl IdentClass {
    fn name(self) -> &'static str {
        match self {
            IdentClass::Mark => "mark",
            IdentClass::Channel => "channel",
            IdentClass::DataType => "data type",
            IdentClass::Aggregate => "aggregate",
            IdentClass::Action => "action",
            IdentClass::Target => "target",
        }
    }
}

struct Parser<'a> {
    vocab: &'a Vocabulary,
    mode: ParseMode,
    errors: Vec<ParseError>,
    warnings: Vec<Warning>,
}

impl Parser<'_> {
    fn error(&mut self, path: &str, kind: ParseErrorKind, message: impl Into<String>) {
        self.errors.push(ParseError {
            path: display_path(path),
            kind,
            message: message.into(),
        });
    }

    fn warn(&mut self, path: &str, message: impl Into<String>) {
        self.warnings.push(Warning {
            path: display_path(path),
            message: message.into(),
        });
    }

    fn object<'v>(&mut self, value: &'v Value, path: &str, what: &str) -> Option<&'v Map<String, Value>> {
        match value {
            Value::Object(map) => Some(map),
            other => {
                self.error(
                    path,
                    ParseErrorKind::TypeMismatch,
                    format!("{what} must be an object, found {}", type_name(other)),
                );
                None
            }
        }
    }

    fn string<'v>(&mut self, value: &'v Value, path: &str, what: &str) -> Option<&'v str> {
        match value {
            Value::String(s) => Some(s),
            other => {
                self.error(
                    path,
                    ParseErrorKind::TypeMismatch,
                    format!("{what} must be a string, found {}", type_name(other)),
                );
                None
            }
        }
    }

    fn array<'v>(&mut self, value: &'v Value, path: &str, what: &str) -> Option<&'v Vec<Value>> {
        match value {
            Value::Array(items) => Some(items),
            other => {
                self.error(
                    path,
                    ParseErrorKind::TypeMismatch,
                    format!("{what} must be an array, found {}", type_name(other)),
                );
                None
            }
        }
    }

    fn required<'v>(&mut self, map: &'v Map<String, Value>, path: &str, key: &str) -> Option<&'v Value> {
        let value = map.get(key);
        if value.is_none() {
            self.error(&child(path, key), ParseErrorKind::MissingField, format!("missing required key '{key}'"));
        }
        value
    }

    fn reject_unknown_keys(&mut self, map: &Map<String, Value>, path: &str, allowed: &[&str]) {
        for key in map.keys() {
            if !allowed.contains(&key.as_str()) {
                self.error(&child(path, key), ParseErrorKind::UnknownKey, format!("key '{key}' is not allowed here"));
            }
        }
    }

    fn ident(&mut self, value: &Value, path: &str, class: IdentClass) -> Option<Ident> {
        let s = self.string(value, path, class.name())?;
        let known = match class {
            IdentClass::Mark => self.vocab.is_mark(s),
            IdentClass::Channel => self.vocab.is_channel(s),
            IdentClass::DataType => self.vocab.is_data_type(s),
            IdentClass::Aggregate => self.vocab.is_aggregate(s),
            IdentClass::Action => self.vocab.is_action(s),
            IdentClass::Target => self.vocab.is_target(s),
        };
        if known {
            return Some(Ident::from(s));
        }
        match self.mode {
            ParseMode::Strict => {
                self.error(
                    path,
                    ParseErrorKind::UnknownIdentifier,
                    format!("unknown {} '{s}'", class.name()),
                );
                None
            }
            ParseMode::Lenient => match class {
                IdentClass::Mark => {
                    self.warn(path, format!("unknown mark '{s}' admitted as 'others'"));
                    Some(Ident::from("others"))
                }
                _ => {
                    self.warn(path, format!("unknown {} '{s}' kept verbatim", class.name()));
                    Some(Ident::from(s))
                }
            },
        }
    }

    fn document(&mut self, value: &Value) -> Option<DesignSpec> {
        let map = self.object(value, "", "spec document")?;
        if let Some(version) = map.get("$schema_version") {
            if version.as_u64() != Some(SCHEMA_VERSION) {
                self.error(
                    "/$schema_version",
                    ParseErrorKind::TypeMismatch,
                    format!("unsupported schema version {version} (expected {SCHEMA_VERSION})"),
                );
            }
        }
        let raw = match map.get("$raw") {
            Some(v) => self.object(v, "/$raw", "$raw").cloned(),
            None => None,
        };
        let root = self.view(map, "", true);
        let tasks = self.required(map, "", "tasks").and_then(|v| self.tasks(v));
        Some(DesignSpec {
            root: root?,
            tasks: tasks?,
            raw,
        })
    }

    fn tasks(&mut self, value: &Value) -> Option<Vec<TaskAnnotation>> {
        let items = self.array(value, "/tasks", "tasks")?;
        if items.is_empty() {
            self.error("/tasks", ParseErrorKind::Arity, "a design needs at least one task");
            return None;
        }
        let mut tasks = Vec::with_capacity(items.len());
        let mut seen = BTreeSet::new();
        let mut ok = true;
        for (i, item) in items.iter().enumerate() {
            let path = child("/tasks", &i.to_string());
            let Some(task) = self.task(item, &path) else {
                ok = false;
                continue;
            };
            if seen.insert(task.clone()) {
                tasks.push(task);
            } else {
                self.warn(
                    &path,
                    format!("duplicate task ({}, {}) collapsed", task.action, task.target),
                );
            }
        }
        ok.then_some(tasks)
    }

    fn task(&mut self, value: &Value, path: &str) -> Option<TaskAnnotation> {
        let map = self.object(value, path, "task")?;
        self.reject_unknown_keys(map, path, &["action", "target"]);
        let action = self
            .required(map, path, "action")
            .and_then(|v| self.ident(v, &child(path, "action"), IdentClass::Action));
        let target = self
            .required(map, path, "target")
            .and_then(|v| self.ident(v, &child(path, "target"), IdentClass::Target));
        Some(TaskAnnotation {
            action: action?,
            target: target?,
        })
    }

    fn view_value(&mut self, value: &Value, path: &str) -> Option<ViewNode> {
        let map = self.object(value, path, "view")?;
        self.view(map, path, false)
    }

    fn view(&mut self, map: &Map<String, Value>, path: &str, is_root: bool) -> Option<ViewNode> {
        let Some(kind) = VIEW_KEYS.iter().copied().find(|k| map.contains_key(*k)) else {
            self.error(
                &child(path, "mark"),
                ParseErrorKind::MissingField,
                "view has no 'mark' and no composition key",
            );
            if !is_root {
                self.reject_unknown_keys(map, path, &[]);
            }
            return None;
        };
        let mut allowed: Vec<&str> = match kind {
            "mark" => vec!["mark", "encoding"],
            "layer" => vec!["layer"],
            "concat" => vec!["concat", "direction"],
            "hconcat" | "vconcat" => vec![kind],
            "facet" => vec!["facet", "spec"],
            "nested" => vec!["nested"],
            _ => unreachable!(),
        };
        if is_root {
            allowed.extend(ROOT_KEYS);
        }
        self.reject_unknown_keys(map, path, &allowed);
        match kind {
            "mark" => self.mark_view(map, path),
            "layer" => {
                let children = self.view_list(&map["layer"], &child(path, "layer"), 2, "layer")?;
                Some(ViewNode::Layer(LayerView { children }))
            }
            "concat" | "hconcat" | "vconcat" => self.concat_view(map, path, kind),
            "facet" => self.facet_view(map, path),
            "nested" => self.nested_view(&map["nested"], &child(path, "nested")),
            _ => unreachable!(),
        }
    }

    fn view_list(&mut self, value: &Value, path: &str, min: usize, what: &str) -> Option<Vec<ViewNode>> {
        let items = self.array(value, path, what)?;
        let mut ok = true;
        if items.len() < min {
            self.error(
                path,
                ParseErrorKind::Arity,
                format!("{what} needs at least {min} views, found {}", items.len()),
            );
            ok = false;
        }
        let mut views = Vec::with_capacity(items.len());
        for (i, item) in items.iter().enumerate() {
            match self.view_value(item, &child(path, &i.to_string())) {
                Some(v) => views.push(v),
                None => ok = false,
            }
        }
        ok.then_some(views)
    }

    fn mark_view(&mut self, map: &Map<String, Value>, path: &str) -> Option<ViewNode> {
        let mark = self.ident(&map["mark"], &child(path, "mark"), IdentClass::Mark);
        let mut encoding = BTreeMap::new();
        let mut ok = true;
        if let Some(enc) = map.get("encoding") {
            let enc_path = child(path, "encoding");
            match self.object(enc, &enc_path, "encoding") {
                Some(entries) => {
                    for (channel, def) in entries {
                        let entry_path = child(&enc_path, channel);
                        let name = self.ident(&Value::String(channel.clone()), &entry_path, IdentClass::Channel);
                        let allow_sub = GRAPH_CHANNELS.contains(&channel.as_str());
                        let def = self.field_def(def, &entry_path, allow_sub);
                        match (name, def) {
                            (Some(name), Some(def)) => {
                                encoding.insert(name, def);
                            }
                            _ => ok = false,
                        }
                    }
                }
                None => ok = false,
            }
        }
        let mark = mark?;
        ok.then_some(ViewNode::Mark(MarkView { mark, encoding }))
    }

    fn field_def(&mut self, value: &Value, path: &str, allow_sub: bool) -> Option<FieldDef> {
        let map = self.object(value, path, "field definition")?;
        let mut ok = true;
        let mut sub_channels = BTreeMap::new();
        for (key, v) in map {
            match key.as_str() {
                "field" | "type" | "aggregate" => {}
                sub if allow_sub && SUB_CHANNELS.contains(&sub) => {
                    match self.field_def(v, &child(path, sub), false) {
                        Some(def) => {
                            sub_channels.insert(Ident::from(sub), def);
                        }
                        None => ok = false,
                    }
                }
                _ => {
                    let message = if SUB_CHANNELS.contains(&key.as_str()) {
                        format!("sub-channel '{key}' is only allowed under node or link")
                    } else {
                        format!("key '{key}' is not allowed here")
                    };
                    self.error(&child(path, key), ParseErrorKind::UnknownKey, message);
                    ok = false;
                }
            }
        }
        let field = self
            .required(map, path, "field")
            .and_then(|v| self.string(v, &child(path, "field"), "field"))
            .map(str::to_string);
        let data_type = self
            .required(map, path, "type")
            .and_then(|v| self.ident(v, &child(path, "type"), IdentClass::DataType));
        let aggregate = match map.get("aggregate") {
            Some(v) => match self.ident(v, &child(path, "aggregate"), IdentClass::Aggregate) {
                Some(a) => Some(a),
                None => {
                    ok = false;
                    None
                }
            },
            None => None,
        };
        let def = FieldDef {
            field: field?,
            data_type: data_type?,
            aggregate,
            sub_channels,
        };
        ok.then_some(def)
    }

    fn concat_view(&mut self, map: &Map<String, Value>, path: &str, key: &str) -> Option<ViewNode> {
        let children = self.view_list(&map[key], &child(path, key), 2, key);
        let direction = match key {
            "hconcat" => Some(ConcatDirection::Horizontal),
            "vconcat" => Some(ConcatDirection::Vertical),
            _ => match map.get("direction") {
                None => None,
                Some(v) => {
                    let dir_path = child(path, "direction");
                    let s = self.string(v, &dir_path, "direction")?;
                    match ConcatDirection::parse(s) {
                        Some(d) => Some(d),
                        None => {
                            self.error(
                                &dir_path,
                                ParseErrorKind::UnknownIdentifier,
                                format!("unknown direction '{s}' (expected horizontal, vertical or wrap)"),
                            );
                            return None;
                        }
                    }
                }
            },
        };
        Some(ViewNode::Concat(ConcatView {
            children: children?,
            direction,
        }))
    }

    /// Accepts the canonical `{"facet": {row?, column?, spec}}` and the
    /// sibling form `{"facet": {row?, column?}, "spec": ...}`.
    fn facet_view(&mut self, map: &Map<String, Value>, path: &str) -> Option<ViewNode> {
        let facet_path = child(path, "facet");
        let fields = self.object(&map["facet"], &facet_path, "facet");
        let mut row = None;
        let mut column = None;
        let mut ok = fields.is_some();
        let mut inner_value = None;
        if let Some(fields) = fields {
            self.reject_unknown_keys(fields, &facet_path, &["row", "column", "spec"]);
            if !fields.contains_key("row") && !fields.contains_key("column") {
                self.error(&facet_path, ParseErrorKind::Arity, "facet needs a row or a column field");
                ok = false;
            }
            for (key, slot) in [("row", &mut row), ("column", &mut column)] {
                if let Some(v) = fields.get(key) {
                    *slot = self.field_def(v, &child(&facet_path, key), false);
                    ok &= slot.is_some();
                }
            }
            if let Some(v) = fields.get("spec") {
                inner_value = Some((v, child(&facet_path, "spec")));
            }
        }
        match (inner_value.is_some(), map.get("spec")) {
            (true, Some(_)) => {
                self.error(
                    &child(path, "spec"),
                    ParseErrorKind::UnknownKey,
                    "facet spec given both inside and beside the facet object",
                );
                ok = false;
            }
            (false, Some(v)) => inner_value = Some((v, child(path, "spec"))),
            (false, None) => {
                if fields.is_some() {
                    self.error(&child(&facet_path, "spec"), ParseErrorKind::MissingField, "facet has no inner 'spec'");
                }
                return None;
            }
            (true, None) => {}
        }
        let (value, inner_path) = inner_value?;
        let inner = self.view_value(value, &inner_path)?;
        ok.then(|| {
            ViewNode::Facet(FacetView {
                row,
                column,
                inner: Box::new(inner),
            })
        })
    }

    fn nested_view(&mut self, value: &Value, path: &str) -> Option<ViewNode> {
        let map = self.object(value, path, "nested")?;
        self.reject_unknown_keys(map, path, &["parent", "children", "canvas"]);
        let parent = self
            .required(map, path, "parent")
            .and_then(|v| self.view_value(v, &child(path, "parent")));
        let children = self
            .required(map, path, "children")
            .and_then(|v| self.view_list(v, &child(path, "children"), 1, "nested children"));
        let canvas = self
            .required(map, path, "canvas")
            .and_then(|v| self.string(v, &child(path, "canvas"), "canvas"))
            .map(str::to_string);
        if let Some(c) = &canvas {
            if c.is_empty() {
                self.error(&child(path, "canvas"), ParseErrorKind::MissingField, "canvas must not be empty");
                return None;
            }
        }
        Some(ViewNode::Nested(NestedView {
            parent: Box::new(parent?),
            children: children?,
            canvas: canvas?,
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vocab::default_vocabulary;

    const MINIMAL: &str = r#"{"mark":"bar","encoding":{"x":{"field":"cat","type":"nominal"}},"tasks":[{"action":"present","target":"value"}]}"#;

    fn strict(text: &str) -> Result<Parsed, Vec<ParseError>> {
        parse_spec(text, &default_vocabulary(), ParseMode::Strict)
    }

    fn lenient(text: &str) -> Result<Parsed, Vec<ParseError>> {
        parse_spec(text, &default_vocabulary(), ParseMode::Lenient)
    }

    fn kinds(errors: &[ParseError]) -> Vec<(String, ParseErrorKind)> {
        errors.iter().map(|e| (e.path.clone(), e.kind)).collect()
    }

    #[test]
    fn minimal_spec_parses() {
        let parsed = strict(MINIMAL).unwrap();
        assert!(matches!(parsed.spec.root, ViewNode::Mark(_)));
        assert_eq!(parsed.spec.tasks, vec![TaskAnnotation::new("present", "value")]);
        assert!(parsed.warnings.is_empty());
    }

    #[test]
    fn misspelled_mark_is_unknown_identifier() {
        let errors = strict(&MINIMAL.replace("\"bar\"", "\"barr\"")).unwrap_err();
        assert_eq!(kinds(&errors), vec![("/mark".into(), ParseErrorKind::UnknownIdentifier)]);
    }

    #[test]
    fn syntax_error() {
        let errors = strict("{\"mark\": ").unwrap_err();
        assert_eq!(errors.len(), 1);
        assert_eq!(errors[0].kind, ParseErrorKind::Syntax);
    }

    #[test]
    fn paper_nested_example_parses() {
        let text = r#"{
          "layer": [
            {"mark": "area", "encoding": {
               "x": {"field": "row", "type": "quantitative"},
               "y": {"field": "column", "type": "quantitative"},
               "color": {"field": "density", "type": "quantitative"}}},
            {"nested": {
               "parent": {"mark": "graph", "encoding": {
                  "node": {"field": "cell", "type": "node",
                           "x": {"field": "row", "type": "quantitative"},
                           "y": {"field": "column", "type": "quantitative"}},
                  "link": {"field": "transition", "type": "relational",
                           "width": {"field": "count", "type": "quantitative"}}}},
               "children": [{"mark": "arc", "encoding": {
                  "theta": {"field": "share", "type": "quantitative"},
                  "color": {"field": "category", "type": "nominal"}}}],
               "canvas": "node"}}
          ],
          "tasks": [{"action": "present", "target": "distribution"}]
        }"#;
        let parsed = strict(text).unwrap();
        let ViewNode::Layer(layer) = &parsed.spec.root else { panic!() };
        assert!(matches!(layer.children[1], ViewNode::Nested(_)));
    }

    #[test]
    fn arity_errors() {
        let one_layer = r#"{"layer":[{"mark":"bar"}],"tasks":[{"action":"present","target":"value"}]}"#;
        assert_eq!(kinds(&strict(one_layer).unwrap_err()), vec![("/layer".into(), ParseErrorKind::Arity)]);

        let no_children = r#"{"nested":{"parent":{"mark":"graph"},"children":[],"canvas":"node"},"tasks":[{"action":"present","target":"value"}]}"#;
        assert_eq!(
            kinds(&strict(no_children).unwrap_err()),
            vec![("/nested/children".into(), ParseErrorKind::Arity)]
        );

        let bare_facet = r#"{"facet":{},"spec":{"mark":"bar"},"tasks":[{"action":"present","target":"value"}]}"#;
        assert_eq!(kinds(&strict(bare_facet).unwrap_err()), vec![("/facet".into(), ParseErrorKind::Arity)]);

        let no_tasks = r#"{"mark":"bar","tasks":[]}"#;
        assert_eq!(kinds(&strict(no_tasks).unwrap_err()), vec![("/tasks".into(), ParseErrorKind::Arity)]);
    }

    #[test]
    fn facet_forms() {
        let tasks = r#""tasks":[{"action":"present","target":"value"}]"#;
        let row = r#""row":{"field":"g","type":"nominal"}"#;
        let canonical = strict(&format!(r#"{{"facet":{{{row},"spec":{{"mark":"bar"}}}},{tasks}}}"#)).unwrap();
        let sibling = strict(&format!(r#"{{"facet":{{{row}}},"spec":{{"mark":"bar"}},{tasks}}}"#)).unwrap();
        assert_eq!(canonical.spec, sibling.spec);

        let both = format!(r#"{{"facet":{{{row},"spec":{{"mark":"bar"}}}},"spec":{{"mark":"bar"}},{tasks}}}"#);
        assert_eq!(kinds(&strict(&both).unwrap_err()), vec![("/spec".into(), ParseErrorKind::UnknownKey)]);
        let neither = format!(r#"{{"facet":{{{row}}},{tasks}}}"#);
        assert_eq!(
            kinds(&strict(&neither).unwrap_err()),
            vec![("/facet/spec".into(), ParseErrorKind::MissingField)]
        );
    }

    #[test]
    fn missing_fields() {
        let errors = strict(r#"{"encoding":{},"tasks":[{"action":"present"}]}"#).unwrap_err();
        let k = kinds(&errors);
        assert!(k.contains(&("/mark".into(), ParseErrorKind::MissingField)));
        assert!(k.contains(&("/tasks/0/target".into(), ParseErrorKind::MissingField)));

        let errors = strict(r#"{"nested":{"children":[{"mark":"arc"}]},"tasks":[{"action":"present","target":"value"}]}"#)
            .unwrap_err();
        let k = kinds(&errors);
        assert!(k.contains(&("/nested/parent".into(), ParseErrorKind::MissingField)));
        assert!(k.contains(&("/nested/canvas".into(), ParseErrorKind::MissingField)));
    }

    #[test]
    fn unknown_keys_and_type_mismatch() {
        let errors = strict(
            r#"{"mark":"bar","width":300,"encoding":{"x":{"field":"a","type":"nominal","size":{"field":"b","type":"nominal"}}},"tasks":"none"}"#,
        )
        .unwrap_err();
        let k = kinds(&errors);
        assert!(k.contains(&("/width".into(), ParseErrorKind::UnknownKey)));
        assert!(k.contains(&("/encoding/x/size".into(), ParseErrorKind::UnknownKey)));
        assert!(k.contains(&("/tasks".into(), ParseErrorKind::TypeMismatch)));
    }

    #[test]
    fn nested_task_is_unknown_key() {
        let errors = strict(
            r#"{"layer":[{"mark":"bar","tasks":[]},{"mark":"line"}],"tasks":[{"action":"present","target":"value"}]}"#,
        )
        .unwrap_err();
        assert_eq!(kinds(&errors), vec![("/layer/0/tasks".into(), ParseErrorKind::UnknownKey)]);
    }

    #[test]
    fn reports_every_independent_defect() {
        let text = r#"{"layer":[{"mark":"barr"},{"mark":"line","encoding":{"colour":{"field":"a","type":"nominal"}}},
            {"mark":"point","encoding":{"x":{"field":"a","type":"quant"}}}],
            "tasks":[{"action":"present","target":"valu"}]}"#;
        let errors = strict(text).unwrap_err();
        assert_eq!(errors.len(), 4, "{errors:?}");
        let k = kinds(&errors);
        assert!(k.contains(&("/layer/0/mark".into(), ParseErrorKind::UnknownIdentifier)));
        assert!(k.contains(&("/layer/1/encoding/colour".into(), ParseErrorKind::UnknownIdentifier)));
        assert!(k.contains(&("/layer/2/encoding/x/type".into(), ParseErrorKind::UnknownIdentifier)));
        assert!(k.contains(&("/tasks/0/target".into(), ParseErrorKind::UnknownIdentifier)));
    }

    #[test]
    fn lenient_admits_unknown_identifiers() {
        let text = r#"{"mark":"glyph","encoding":{"colour":{"field":"a","type":"nominal"}},"tasks":[{"action":"present","target":"value"}]}"#;
        let parsed = lenient(text).unwrap();
        let ViewNode::Mark(m) = &parsed.spec.root else { panic!() };
        assert_eq!(m.mark.as_str(), "others");
        assert!(m.encoding.contains_key("colour"));
        assert_eq!(parsed.warnings.len(), 2);
        // structural defects still fail in lenient mode
        assert!(lenient(r#"{"layer":[{"mark":"bar"}],"tasks":[{"action":"present","target":"value"}]}"#).is_err());
    }

    #[test]
    fn duplicate_tasks_collapse_with_warning() {
        let text = r#"{"mark":"bar","tasks":[{"action":"present","target":"value"},{"target":"value","action":"present"}]}"#;
        let parsed = strict(text).unwrap();
        assert_eq!(parsed.spec.tasks.len(), 1);
        assert_eq!(parsed.warnings.len(), 1);
        assert!(parsed.warnings[0].message.contains("duplicate task"));
    }

    #[test]
    fn concat_spellings_normalize() {
        let h = strict(r#"{"hconcat":[{"mark":"bar"},{"mark":"line"}],"tasks":[{"action":"present","target":"value"}]}"#)
            .unwrap();
        let c = strict(
            r#"{"concat":[{"mark":"bar"},{"mark":"line"}],"direction":"horizontal","tasks":[{"action":"present","target":"value"}]}"#,
        )
        .unwrap();
        assert_eq!(h.spec, c.spec);
        assert!(strict(
            r#"{"concat":[{"mark":"bar"},{"mark":"line"}],"direction":"diagonal","tasks":[{"action":"present","target":"value"}]}"#
        )
        .is_err());
    }

    #[test]
    fn schema_version_checked() {
        let ok = MINIMAL.replacen('{', r#"{"$schema_version":1,"#, 1);
        assert!(strict(&ok).is_ok());
        let bad = MINIMAL.replacen('{', r#"{"$schema_version":2,"#, 1);
        assert_eq!(strict(&bad).unwrap_err()[0].path, "/$schema_version");
    }

    #[test]
    fn non_syntax_paths_are_never_empty() {
        let errors = strict("[1,2]").unwrap_err();
        assert_eq!(errors[0].path, "/");
        assert_eq!(errors[0].kind, ParseErrorKind::TypeMismatch);
    }
}
