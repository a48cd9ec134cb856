//! Knowledge-base engine for visual-analytics design specifications.
//!
//! Designs are written in an extended declarative visualization grammar
//! (graph marks, `node`/`link` channels, `nested` composition) and annotated
//! with action-target tasks. This crate parses and validates those specs,
//! answers attribute and structural queries over a corpus, and computes the
//! corpus statistics (frequencies, co-occurrences, composition overview).

pub mod analytics;
pub mod corpus;
pub mod grammar;
pub mod model;
pub mod output;
pub mod query;
pub mod testkit;
pub mod vocab;

pub use corpus::{Corpus, DesignMetadata, DesignRecord};
pub use grammar::{
    check_expressible, compute_metrics, parse_spec, serialize_spec, ParseError, ParseErrorKind,
    ParseMode, SpecMetrics,
};
pub use model::{iter_views, mark_inventory, DesignSpec, FieldDef, Ident, TaskAnnotation, ViewNode};
pub use vocab::{default_vocabulary, Vocabulary};
