//! In-memory data model for design specifications.

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

/// A vocabulary identifier (mark, channel, data type, aggregate, action or target).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Ident(String);

impl Ident {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl Deref for Ident {
    type Target = str;
    fn deref(&self) -> &str {
        &self.0
    }
}

impl Borrow<str> for Ident {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Ident {
    fn from(s: &str) -> Self {
        Ident(s.to_string())
    }
}

impl From<String> for Ident {
    fn from(s: String) -> Self {
        Ident(s)
    }
}

impl fmt::Display for Ident {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// One visual-encoding entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldDef {
    pub field: String,
    pub data_type: Ident,
    pub aggregate: Option<Ident>,
    /// Only populated for the value of a `node` or `link` channel.
    pub sub_channels: BTreeMap<Ident, FieldDef>,
}

impl FieldDef {
    pub fn new(field: impl Into<String>, data_type: &str) -> Self {
        FieldDef {
            field: field.into(),
            data_type: data_type.into(),
            aggregate: None,
            sub_channels: BTreeMap::new(),
        }
    }

    pub fn with_aggregate(mut self, aggregate: &str) -> Self {
        self.aggregate = Some(aggregate.into());
        self
    }

    pub fn with_sub_channel(mut self, channel: &str, def: FieldDef) -> Self {
        self.sub_channels.insert(channel.into(), def);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConcatDirection {
    Horizontal,
    Vertical,
    Wrap,
}

impl ConcatDirection {
    pub fn as_str(self) -> &'static str {
        match self {
            ConcatDirection::Horizontal => "horizontal",
            ConcatDirection::Vertical => "vertical",
            ConcatDirection::Wrap => "wrap",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "horizontal" => Some(ConcatDirection::Horizontal),
            "vertical" => Some(ConcatDirection::Vertical),
            "wrap" => Some(ConcatDirection::Wrap),
            _ => None,
        }
    }
}

/// The four composition operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CompositionKind {
    Layer,
    Concat,
    Facet,
    Nested,
}

impl CompositionKind {
    pub const ALL: [CompositionKind; 4] = [
        CompositionKind::Layer,
        CompositionKind::Concat,
        CompositionKind::Facet,
        CompositionKind::Nested,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CompositionKind::Layer => "layer",
            CompositionKind::Concat => "concat",
            CompositionKind::Facet => "facet",
            CompositionKind::Nested => "nested",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

impl fmt::Display for CompositionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MarkView {
    pub mark: Ident,
    pub encoding: BTreeMap<Ident, FieldDef>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerView {
    pub children: Vec<ViewNode>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcatView {
    pub children: Vec<ViewNode>,
    pub direction: Option<ConcatDirection>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FacetView {
    pub row: Option<FieldDef>,
    pub column: Option<FieldDef>,
    pub inner: Box<ViewNode>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NestedView {
    pub parent: Box<ViewNode>,
    pub children: Vec<ViewNode>,
    /// Element class of the parent that hosts the children, e.g. `node`.
    pub canvas: String,
}

/// A node of the composition tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViewNode {
    Mark(MarkView),
    Layer(LayerView),
    Concat(ConcatView),
    Facet(FacetView),
    Nested(NestedView),
}

impl ViewNode {
    pub fn mark(mark: &str) -> Self {
        ViewNode::Mark(MarkView {
            mark: mark.into(),
            encoding: BTreeMap::new(),
        })
    }

    pub fn mark_with(mark: &str, encoding: impl IntoIterator<Item = (&'static str, FieldDef)>) -> Self {
        ViewNode::Mark(MarkView {
            mark: mark.into(),
            encoding: encoding.into_iter().map(|(c, d)| (Ident::from(c), d)).collect(),
        })
    }

    pub fn layer(children: Vec<ViewNode>) -> Self {
        ViewNode::Layer(LayerView { children })
    }

    pub fn concat(children: Vec<ViewNode>) -> Self {
        ViewNode::Concat(ConcatView {
            children,
            direction: None,
        })
    }

    pub fn facet_row(row: FieldDef, inner: ViewNode) -> Self {
        ViewNode::Facet(FacetView {
            row: Some(row),
            column: None,
            inner: Box::new(inner),
        })
    }

    pub fn nested(parent: ViewNode, children: Vec<ViewNode>, canvas: &str) -> Self {
        ViewNode::Nested(NestedView {
            parent: Box::new(parent),
            children,
            canvas: canvas.to_string(),
        })
    }

    pub fn composition_kind(&self) -> Option<CompositionKind> {
        match self {
            ViewNode::Mark(_) => None,
            ViewNode::Layer(_) => Some(CompositionKind::Layer),
            ViewNode::Concat(_) => Some(CompositionKind::Concat),
            ViewNode::Facet(_) => Some(CompositionKind::Facet),
            ViewNode::Nested(_) => Some(CompositionKind::Nested),
        }
    }

    pub fn as_mark(&self) -> Option<&MarkView> {
        match self {
            ViewNode::Mark(m) => Some(m),
            _ => None,
        }
    }

    /// Direct child views in traversal order (nested: parent first).
    pub fn children(&self) -> Vec<&ViewNode> {
        match self {
            ViewNode::Mark(_) => Vec::new(),
            ViewNode::Layer(l) => l.children.iter().collect(),
            ViewNode::Concat(c) => c.children.iter().collect(),
            ViewNode::Facet(f) => vec![f.inner.as_ref()],
            ViewNode::Nested(n) => std::iter::once(n.parent.as_ref())
                .chain(n.children.iter())
                .collect(),
        }
    }

    /// Direct children paired with their path segment relative to this view.
    pub fn children_with_segments(&self) -> Vec<(String, &ViewNode)> {
        match self {
            ViewNode::Mark(_) => Vec::new(),
            ViewNode::Layer(l) => l
                .children
                .iter()
                .enumerate()
                .map(|(i, c)| (format!("/layer/{i}"), c))
                .collect(),
            ViewNode::Concat(c) => c
                .children
                .iter()
                .enumerate()
                .map(|(i, c)| (format!("/concat/{i}"), c))
                .collect(),
            ViewNode::Facet(f) => vec![("/facet/spec".to_string(), f.inner.as_ref())],
            ViewNode::Nested(n) => std::iter::once(("/nested/parent".to_string(), n.parent.as_ref()))
                .chain(
                    n.children
                        .iter()
                        .enumerate()
                        .map(|(i, c)| (format!("/nested/children/{i}"), c)),
                )
                .collect(),
        }
    }

    pub fn iter(&self) -> Views<'_> {
        Views { stack: vec![self] }
    }
}

/// Pre-order iterator over a view tree.
pub struct Views<'a> {
    stack: Vec<&'a ViewNode>,
}

impl<'a> Iterator for Views<'a> {
    type Item = &'a ViewNode;

    fn next(&mut self) -> Option<Self::Item> {
        let node = self.stack.pop()?;
        self.stack.extend(node.children().into_iter().rev());
        Some(node)
    }
}

/// An analytical task as an action-target pair.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TaskAnnotation {
    pub action: Ident,
    pub target: Ident,
}

impl TaskAnnotation {
    pub fn new(action: &str, target: &str) -> Self {
        TaskAnnotation {
            action: action.into(),
            target: target.into(),
        }
    }

    /// `action:target`, the key used for task rows in co-occurrence output.
    pub fn pair_key(&self) -> String {
        format!("{}:{}", self.action, self.target)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DesignSpec {
    pub root: ViewNode,
    pub tasks: Vec<TaskAnnotation>,
    /// Unmapped content carried over by the compatibility importer.
    pub raw: Option<Map<String, Value>>,
}

impl DesignSpec {
    pub fn new(root: ViewNode, tasks: Vec<TaskAnnotation>) -> Self {
        DesignSpec {
            root,
            tasks,
            raw: None,
        }
    }
}

/// A field binding encountered while walking a spec.
#[derive(Debug, Clone, Copy)]
pub struct FieldEntry<'a> {
    /// Channel name; facet fields report `row` or `column`.
    pub channel: &'a str,
    pub def: &'a FieldDef,
    /// True for sub-channel entries under `node`/`link`.
    pub is_sub_channel: bool,
}

/// Pre-order traversal of every view in the spec.
pub fn iter_views(spec: &DesignSpec) -> Views<'_> {
    spec.root.iter()
}

/// Multiset of marks, one entry per mark view.
pub fn mark_inventory(spec: &DesignSpec) -> BTreeMap<Ident, usize> {
    let mut counts = BTreeMap::new();
    for view in iter_views(spec) {
        if let ViewNode::Mark(m) = view {
            *counts.entry(m.mark.clone()).or_insert(0) += 1;
        }
    }
    counts
}

/// Every channel binding in the spec: encoding entries, their node/link
/// sub-channels, and facet `row`/`column` fields.
pub fn field_entries(spec: &DesignSpec) -> Vec<FieldEntry<'_>> {
    let mut out = Vec::new();
    for view in iter_views(spec) {
        match view {
            ViewNode::Mark(m) => {
                for (channel, def) in &m.encoding {
                    out.push(FieldEntry {
                        channel,
                        def,
                        is_sub_channel: false,
                    });
                    for (sub, sub_def) in &def.sub_channels {
                        out.push(FieldEntry {
                            channel: sub,
                            def: sub_def,
                            is_sub_channel: true,
                        });
                    }
                }
            }
            ViewNode::Facet(f) => {
                for (channel, def) in [("row", &f.row), ("column", &f.column)] {
                    if let Some(def) = def {
                        out.push(FieldEntry {
                            channel,
                            def,
                            is_sub_channel: false,
                        });
                    }
                }
            }
            _ => {}
        }
    }
    out
}

pub fn composition_types(spec: &DesignSpec) -> BTreeSet<CompositionKind> {
    iter_views(spec).filter_map(ViewNode::composition_kind).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count_nodes(v: &ViewNode) -> usize {
        1 + v.children().into_iter().map(count_nodes).sum::<usize>()
    }

    fn five_node_tree() -> DesignSpec {
        DesignSpec::new(
            ViewNode::layer(vec![
                ViewNode::mark("rect"),
                ViewNode::nested(ViewNode::mark("graph"), vec![ViewNode::mark("arc")], "node"),
            ]),
            vec![TaskAnnotation::new("present", "value")],
        )
    }

    fn label(v: &ViewNode) -> String {
        match v {
            ViewNode::Mark(m) => m.mark.to_string(),
            other => other.composition_kind().unwrap().to_string(),
        }
    }

    #[test]
    fn single_leaf_traversal() {
        let spec = DesignSpec::new(ViewNode::mark("bar"), vec![TaskAnnotation::new("present", "value")]);
        assert_eq!(iter_views(&spec).count(), 1);
    }

    #[test]
    fn facet_traversal() {
        let spec = DesignSpec::new(
            ViewNode::facet_row(FieldDef::new("cat", "nominal"), ViewNode::mark("bar")),
            vec![TaskAnnotation::new("present", "value")],
        );
        let labels: Vec<String> = iter_views(&spec).map(label).collect();
        assert_eq!(labels, ["facet", "bar"]);
    }

    #[test]
    fn five_node_pre_order() {
        let spec = five_node_tree();
        let labels: Vec<String> = iter_views(&spec).map(label).collect();
        assert_eq!(labels, ["layer", "rect", "nested", "graph", "arc"]);
        assert_eq!(count_nodes(&spec.root), 5);
    }

    #[test]
    fn inventories() {
        let concat = DesignSpec::new(
            ViewNode::concat(vec![ViewNode::mark("bar"), ViewNode::mark("bar"), ViewNode::mark("line")]),
            vec![TaskAnnotation::new("compare", "value")],
        );
        let inv = mark_inventory(&concat);
        assert_eq!(inv.get("bar"), Some(&2));
        assert_eq!(inv.get("line"), Some(&1));

        let inv = mark_inventory(&five_node_tree());
        assert_eq!(inv.len(), 3);
        assert!(inv.values().all(|&c| c == 1));
        assert_eq!(inv.keys().map(|k| k.as_str()).collect::<Vec<_>>(), ["arc", "graph", "rect"]);
    }

    #[test]
    fn field_entries_cover_sub_channels_and_facets() {
        let node = FieldDef::new("author", "node")
            .with_sub_channel("size", FieldDef::new("citations", "quantitative"));
        let spec = DesignSpec::new(
            ViewNode::facet_row(
                FieldDef::new("venue", "nominal"),
                ViewNode::mark_with("graph", [("node", node), ("link", FieldDef::new("coauthor", "relational"))]),
            ),
            vec![TaskAnnotation::new("explore", "graph")],
        );
        let channels: Vec<&str> = field_entries(&spec).iter().map(|e| e.channel).collect();
        assert_eq!(channels, ["row", "link", "node", "size"]);
    }
}
