//! Non-blocking annotation lints.

use serde_json::Value;

use super::{display_path, Warning, DEPTH_LINT_THRESHOLD};
use crate::model::{DesignSpec, ViewNode};

pub(super) fn lint(spec: &DesignSpec) -> Vec<Warning> {
    let mut warnings = Vec::new();
    let depth = max_depth(&spec.root);
    if depth > DEPTH_LINT_THRESHOLD {
        warnings.push(Warning {
            path: "/".into(),
            message: format!(
                "composition depth {depth} exceeds the usual maximum of {DEPTH_LINT_THRESHOLD}"
            ),
        });
    }
    concat_hints(&spec.root, "", &mut warnings);
    warnings
}

fn max_depth(view: &ViewNode) -> usize {
    match view {
        ViewNode::Mark(_) => 0,
        other => 1 + other.children().into_iter().map(max_depth).max().unwrap_or(0),
    }
}

/// Canonical JSON of a view with every field name blanked out.
fn shape(view: &ViewNode) -> Value {
    fn blank(value: &mut Value) {
        match value {
            Value::Object(map) => {
                for (key, v) in map.iter_mut() {
                    if key == "field" && v.is_string() {
                        *v = Value::String(String::new());
                    } else {
                        blank(v);
                    }
                }
            }
            Value::Array(items) => items.iter_mut().for_each(blank),
            _ => {}
        }
    }
    let mut value = serde_json::to_value(view).expect("view serialization cannot fail");
    blank(&mut value);
    value
}

fn concat_hints(view: &ViewNode, path: &str, out: &mut Vec<Warning>) {
    if let ViewNode::Concat(c) = view {
        let first = shape(&c.children[0]);
        if c.children[1..].iter().all(|child| shape(child) == first) {
            out.push(Warning {
                path: display_path(&format!("{path}/concat")),
                message: "concat children differ only in field names; a facet would avoid the duplication".into(),
            });
        }
    }
    for (segment, child) in view.children_with_segments() {
        concat_hints(child, &format!("{path}{segment}"), out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FieldDef, TaskAnnotation};

    fn bar(field: &str) -> ViewNode {
        ViewNode::mark_with("bar", [("x", FieldDef::new(field, "nominal"))])
    }

    #[test]
    fn duplicated_concat_gets_facet_hint() {
        let spec = DesignSpec::new(
            ViewNode::layer(vec![ViewNode::mark("rule"), ViewNode::concat(vec![bar("a"), bar("b"), bar("c")])]),
            vec![TaskAnnotation::new("compare", "value")],
        );
        let w = lint(&spec);
        assert_eq!(w.len(), 1);
        assert_eq!(w[0].path, "/layer/1/concat");
    }

    #[test]
    fn heterogeneous_concat_is_quiet() {
        let spec = DesignSpec::new(
            ViewNode::concat(vec![bar("a"), ViewNode::mark("line")]),
            vec![TaskAnnotation::new("compare", "value")],
        );
        assert!(lint(&spec).is_empty());
    }

    #[test]
    fn deep_spec_warns() {
        let mut view = ViewNode::mark("bar");
        for _ in 0..5 {
            view = ViewNode::facet_row(FieldDef::new("g", "nominal"), view);
        }
        let w = lint(&DesignSpec::new(view, vec![TaskAnnotation::new("present", "value")]));
        assert_eq!(w.len(), 1);
        assert!(w[0].message.contains("depth 5"));
    }
}
