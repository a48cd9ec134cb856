//! Canonical serialization.
//!
//! Keys are written in fixed grammar order: mark, encoding, layer, concat,
//! direction, facet, spec, nested (parent, children, canvas), tasks, `$raw`.
//! Encoding channels are sorted; output is two-space indented and ends with a
//! newline.

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;
use serde_json::Value;

use crate::model::{DesignSpec, FacetView, FieldDef, NestedView, ViewNode};

pub fn serialize_spec(spec: &DesignSpec) -> String {
    let mut text = serde_json::to_string_pretty(spec).expect("spec serialization cannot fail");
    text.push('\n');
    text
}

/// The canonical document as a JSON value (what structural queries see).
pub fn spec_to_value(spec: &DesignSpec) -> Value {
    serde_json::to_value(spec).expect("spec serialization cannot fail")
}

fn view_entries<M: SerializeMap>(view: &ViewNode, map: &mut M) -> Result<(), M::Error> {
    match view {
        ViewNode::Mark(m) => {
            map.serialize_entry("mark", &m.mark)?;
            map.serialize_entry("encoding", &m.encoding)?;
        }
        ViewNode::Layer(l) => map.serialize_entry("layer", &l.children)?,
        ViewNode::Concat(c) => {
            map.serialize_entry("concat", &c.children)?;
            if let Some(direction) = c.direction {
                map.serialize_entry("direction", direction.as_str())?;
            }
        }
        ViewNode::Facet(f) => map.serialize_entry("facet", &FacetBody(f))?,
        ViewNode::Nested(n) => map.serialize_entry("nested", &NestedBody(n))?,
    }
    Ok(())
}

impl Serialize for ViewNode {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(None)?;
        view_entries(self, &mut map)?;
        map.end()
    }
}

impl Serialize for DesignSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(None)?;
        view_entries(&self.root, &mut map)?;
        map.serialize_entry("tasks", &self.tasks)?;
        if let Some(raw) = &self.raw {
            map.serialize_entry("$raw", raw)?;
        }
        map.end()
    }
}

impl Serialize for FieldDef {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(None)?;
        map.serialize_entry("field", &self.field)?;
        map.serialize_entry("type", &self.data_type)?;
        if let Some(aggregate) = &self.aggregate {
            map.serialize_entry("aggregate", aggregate)?;
        }
        for (channel, def) in &self.sub_channels {
            map.serialize_entry(channel, def)?;
        }
        map.end()
    }
}

struct FacetBody<'a>(&'a FacetView);

impl Serialize for FacetBody<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(None)?;
        if let Some(row) = &self.0.row {
            map.serialize_entry("row", row)?;
        }
        if let Some(column) = &self.0.column {
            map.serialize_entry("column", column)?;
        }
        map.serialize_entry("spec", self.0.inner.as_ref())?;
        map.end()
    }
}

struct NestedBody<'a>(&'a NestedView);

impl Serialize for NestedBody<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(None)?;
        map.serialize_entry("parent", self.0.parent.as_ref())?;
        map.serialize_entry("children", &self.0.children)?;
        map.serialize_entry("canvas", &self.0.canvas)?;
        map.end()
    }
}
