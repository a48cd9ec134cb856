use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::model::{mark_inventory, CompositionKind, DesignSpec, FieldDef, Ident, ViewNode};
use crate::vocab::Vocabulary;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecMetrics {
    /// Number of composition-operator nodes.
    pub composition_count: usize,
    /// Operators on the longest root-to-leaf path; 0 for a single mark.
    pub composition_depth: usize,
    pub composition_types_used: BTreeSet<CompositionKind>,
    pub is_composite: bool,
    pub vegalite_expressible: bool,
    pub expressibility_violations: Vec<String>,
    pub task_count: usize,
    pub mark_counts: BTreeMap<Ident, usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expressibility {
    pub expressible: bool,
    pub violations: Vec<String>,
}

fn depth(view: &ViewNode) -> usize {
    match view {
        ViewNode::Mark(_) => 0,
        other => 1 + other.children().into_iter().map(depth).max().unwrap_or(0),
    }
}

pub fn compute_metrics(spec: &DesignSpec, vocab: &Vocabulary) -> SpecMetrics {
    let mut composition_count = 0;
    let mut composition_types_used = BTreeSet::new();
    for kind in spec.root.iter().filter_map(ViewNode::composition_kind) {
        composition_count += 1;
        composition_types_used.insert(kind);
    }
    let Expressibility {
        expressible,
        violations,
    } = check_expressible(spec, vocab);
    SpecMetrics {
        composition_count,
        composition_depth: depth(&spec.root),
        composition_types_used,
        is_composite: composition_count > 0,
        vegalite_expressible: expressible,
        expressibility_violations: violations,
        task_count: spec.tasks.len(),
        mark_counts: mark_inventory(spec),
    }
}

/// A spec is expressible in the original grammar when it uses only original
/// marks, channels and data types and contains no nested composition.
pub fn check_expressible(spec: &DesignSpec, vocab: &Vocabulary) -> Expressibility {
    let mut violations = Vec::new();
    expressible_view(&spec.root, "", vocab, &mut violations);
    Expressibility {
        expressible: violations.is_empty(),
        violations,
    }
}

fn qualifier(extended: bool) -> &'static str {
    if extended {
        "extended"
    } else {
        "unknown"
    }
}

fn expressible_view(view: &ViewNode, path: &str, vocab: &Vocabulary, out: &mut Vec<String>) {
    match view {
        ViewNode::Mark(m) => {
            if !vocab.marks_original.contains(m.mark.as_str()) {
                out.push(format!(
                    "{path}/mark: {} mark '{}'",
                    qualifier(vocab.marks_extended.contains(m.mark.as_str())),
                    m.mark
                ));
            }
            for (channel, def) in &m.encoding {
                let entry = format!("{path}/encoding/{channel}");
                if !vocab.channels_original.contains(channel.as_str()) {
                    out.push(format!(
                        "{entry}: {} channel '{channel}'",
                        qualifier(vocab.channels_extended.contains(channel.as_str()))
                    ));
                }
                expressible_field(def, &entry, vocab, out);
            }
        }
        ViewNode::Facet(f) => {
            for (key, def) in [("row", &f.row), ("column", &f.column)] {
                if let Some(def) = def {
                    expressible_field(def, &format!("{path}/facet/{key}"), vocab, out);
                }
            }
        }
        ViewNode::Nested(_) => out.push(format!("{path}/nested: nested composition")),
        _ => {}
    }
    for (segment, child) in view.children_with_segments() {
        expressible_view(child, &format!("{path}{segment}"), vocab, out);
    }
}

fn expressible_field(def: &FieldDef, path: &str, vocab: &Vocabulary, out: &mut Vec<String>) {
    if !vocab.data_types_original.contains(def.data_type.as_str()) {
        out.push(format!(
            "{path}/type: {} data type '{}'",
            qualifier(vocab.data_types_extended.contains(def.data_type.as_str())),
            def.data_type
        ));
    }
    for (sub, sub_def) in &def.sub_channels {
        expressible_field(sub_def, &format!("{path}/{sub}"), vocab, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FieldDef, TaskAnnotation};
    use crate::vocab::default_vocabulary;

    fn spec(root: ViewNode) -> DesignSpec {
        DesignSpec::new(root, vec![TaskAnnotation::new("present", "value")])
    }

    fn bar() -> ViewNode {
        ViewNode::mark_with("bar", [("x", FieldDef::new("cat", "nominal"))])
    }

    #[test]
    fn leaf_metrics() {
        let m = compute_metrics(&spec(bar()), &default_vocabulary());
        assert_eq!(m.composition_count, 0);
        assert_eq!(m.composition_depth, 0);
        assert!(!m.is_composite);
        assert!(m.vegalite_expressible);
        assert_eq!(m.task_count, 1);
    }

    #[test]
    fn facet_metrics() {
        let s = spec(ViewNode::facet_row(FieldDef::new("g", "nominal"), bar()));
        let m = compute_metrics(&s, &default_vocabulary());
        assert_eq!((m.composition_count, m.composition_depth), (1, 1));
        assert_eq!(m.composition_types_used, BTreeSet::from([CompositionKind::Facet]));
        assert!(m.vegalite_expressible);
    }

    #[test]
    fn five_node_tree_metrics() {
        let s = spec(ViewNode::layer(vec![
            ViewNode::mark("rect"),
            ViewNode::nested(ViewNode::mark("graph"), vec![ViewNode::mark("arc")], "node"),
        ]));
        let m = compute_metrics(&s, &default_vocabulary());
        assert_eq!((m.composition_count, m.composition_depth), (2, 2));
        assert_eq!(
            m.composition_types_used,
            BTreeSet::from([CompositionKind::Layer, CompositionKind::Nested])
        );
        assert!(!m.vegalite_expressible);
        assert_eq!(
            m.expressibility_violations,
            vec![
                "/layer/1/nested: nested composition".to_string(),
                "/layer/1/nested/parent/mark: extended mark 'graph'".to_string(),
            ]
        );
    }

    #[test]
    fn graph_mark_is_not_expressible() {
        let s = spec(ViewNode::mark_with(
            "graph",
            [("node", FieldDef::new("author", "node").with_sub_channel("size", FieldDef::new("n", "quantitative")))],
        ));
        let e = check_expressible(&s, &default_vocabulary());
        assert!(!e.expressible);
        assert_eq!(
            e.violations,
            vec![
                "/mark: extended mark 'graph'",
                "/encoding/node: extended channel 'node'",
                "/encoding/node/type: extended data type 'node'",
            ]
        );
    }

    #[test]
    fn sibling_operators_count_but_do_not_deepen() {
        let s = spec(ViewNode::concat(vec![
            ViewNode::facet_row(FieldDef::new("g", "nominal"), bar()),
            ViewNode::layer(vec![bar(), ViewNode::mark("line")]),
        ]));
        let m = compute_metrics(&s, &default_vocabulary());
        assert_eq!((m.composition_count, m.composition_depth), (3, 2));
    }
}
