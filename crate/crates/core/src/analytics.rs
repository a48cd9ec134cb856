//! Corpus statistics: overview, property histograms, field-name words and
//! co-occurrence matrices. All counts are raw; nothing is normalized.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use serde::Serialize;

use crate::corpus::Corpus;
use crate::model::{field_entries, iter_views, ViewNode};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnalyticsError {
    #[error("unknown property '{0}'")]
    UnknownProperty(String),
    #[error("unsupported co-occurrence pair ({row}, {col}); supported: {}", supported_pairs_text())]
    UnsupportedPair { row: String, col: String },
    #[error("the corpus is empty")]
    EmptyCorpus,
}

impl AnalyticsError {
    pub fn code(&self) -> &'static str {
        match self {
            AnalyticsError::UnknownProperty(_) => "unknown_property",
            AnalyticsError::UnsupportedPair { .. } => "unsupported_pair",
            AnalyticsError::EmptyCorpus => "empty_corpus",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    Mark,
    Channel,
    DataType,
    Aggregate,
    Composition,
    Action,
    Target,
    FieldWord,
}

impl Property {
    /// Properties accepted by [`frequency`] (field words have their own op).
    pub const COUNTED: [Property; 7] = [
        Property::Mark,
        Property::Channel,
        Property::DataType,
        Property::Aggregate,
        Property::Composition,
        Property::Action,
        Property::Target,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Property::Mark => "mark",
            Property::Channel => "channel",
            Property::DataType => "data_type",
            Property::Aggregate => "aggregate",
            Property::Composition => "composition",
            Property::Action => "action",
            Property::Target => "target",
            Property::FieldWord => "field_word",
        }
    }
}

impl FromStr for Property {
    type Err = AnalyticsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Property::COUNTED
            .into_iter()
            .chain([Property::FieldWord])
            .find(|p| p.as_str() == s)
            .ok_or_else(|| AnalyticsError::UnknownProperty(s.to_string()))
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Histogram {
    pub property: Property,
    pub counts: BTreeMap<String, u64>,
    pub total: u64,
}

impl Histogram {
    fn from_keys<I: IntoIterator<Item = String>>(property: Property, keys: I) -> Self {
        let mut counts = BTreeMap::new();
        let mut total = 0;
        for key in keys {
            *counts.entry(key).or_insert(0) += 1;
            total += 1;
        }
        Histogram { property, counts, total }
    }

    /// Entries by descending count, ties broken by key.
    pub fn ranked(&self) -> Vec<(&str, u64)> {
        let mut entries: Vec<(&str, u64)> = self.counts.iter().map(|(k, &v)| (k.as_str(), v)).collect();
        entries.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        entries
    }
}

/// Supported (row, col) property pairs.
pub const COOCCURRENCE_PAIRS: [(&str, &str); 4] = [
    ("action", "target"),
    ("action_target", "mark"),
    ("composition", "mark"),
    ("data_type", "channel"),
];

fn supported_pairs_text() -> String {
    COOCCURRENCE_PAIRS
        .iter()
        .map(|(r, c)| format!("{r}/{c}"))
        .collect::<Vec<_>>()
        .join(", ")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CooccurrenceMatrix {
    pub row_property: String,
    pub col_property: String,
    pub rows: Vec<String>,
    pub cols: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl CooccurrenceMatrix {
    fn from_cells(row_property: &str, col_property: &str, cells: BTreeMap<(String, String), u64>) -> Self {
        let rows: Vec<String> = cells.keys().map(|(r, _)| r.clone()).collect::<BTreeSet<_>>().into_iter().collect();
        let cols: Vec<String> = cells.keys().map(|(_, c)| c.clone()).collect::<BTreeSet<_>>().into_iter().collect();
        let counts = rows
            .iter()
            .map(|r| {
                cols.iter()
                    .map(|c| cells.get(&(r.clone(), c.clone())).copied().unwrap_or(0))
                    .collect()
            })
            .collect();
        CooccurrenceMatrix {
            row_property: row_property.into(),
            col_property: col_property.into(),
            rows,
            cols,
            counts,
        }
    }

    pub fn get(&self, row: &str, col: &str) -> u64 {
        let r = self.rows.iter().position(|x| x == row);
        let c = self.cols.iter().position(|x| x == col);
        match (r, c) {
            (Some(r), Some(c)) => self.counts[r][c],
            _ => 0,
        }
    }

    pub fn row_sums(&self) -> BTreeMap<String, u64> {
        self.rows
            .iter()
            .zip(&self.counts)
            .map(|(r, cells)| (r.clone(), cells.iter().sum()))
            .collect()
    }

    pub fn col_sums(&self) -> BTreeMap<String, u64> {
        self.cols
            .iter()
            .enumerate()
            .map(|(j, c)| (c.clone(), self.counts.iter().map(|row| row[j]).sum()))
            .collect()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }
}

fn tally(cells: &mut BTreeMap<(String, String), u64>, row: &str, col: &str) {
    *cells.entry((row.to_string(), col.to_string())).or_insert(0) += 1;
}

/// Occurrence-level histogram of one property.
pub fn frequency(corpus: &Corpus, property: Property) -> Result<Histogram, AnalyticsError> {
    if property == Property::FieldWord {
        return Err(AnalyticsError::UnknownProperty(property.as_str().into()));
    }
    let mut keys = Vec::new();
    for record in corpus.records() {
        let spec = &record.spec;
        match property {
            Property::Mark => keys.extend(iter_views(spec).filter_map(ViewNode::as_mark).map(|m| m.mark.to_string())),
            Property::Channel => keys.extend(field_entries(spec).iter().map(|e| e.channel.to_string())),
            Property::DataType => keys.extend(field_entries(spec).iter().map(|e| e.def.data_type.to_string())),
            Property::Aggregate => keys.extend(
                field_entries(spec)
                    .iter()
                    .filter_map(|e| e.def.aggregate.as_ref().map(ToString::to_string)),
            ),
            Property::Composition => keys.extend(
                iter_views(spec)
                    .filter_map(ViewNode::composition_kind)
                    .map(|k| k.as_str().to_string()),
            ),
            Property::Action => keys.extend(spec.tasks.iter().map(|t| t.action.to_string())),
            Property::Target => keys.extend(spec.tasks.iter().map(|t| t.target.to_string())),
            Property::FieldWord => unreachable!(),
        }
    }
    Ok(Histogram::from_keys(property, keys))
}

/// Lowercased alphanumeric runs of length two or more.
pub fn field_words(field: &str) -> impl Iterator<Item = String> + '_ {
    field
        .split(|c: char| !c.is_ascii_alphanumeric())
        .filter(|t| t.len() >= 2)
        .map(str::to_ascii_lowercase)
}

pub fn field_word_frequency(corpus: &Corpus) -> Histogram {
    let mut words = Vec::new();
    for record in corpus.records() {
        for entry in field_entries(&record.spec) {
            words.extend(field_words(&entry.def.field));
        }
    }
    Histogram::from_keys(Property::FieldWord, words)
}

pub fn cooccur_action_target(corpus: &Corpus) -> CooccurrenceMatrix {
    let mut cells = BTreeMap::new();
    for task in corpus.records().iter().flat_map(|r| &r.spec.tasks) {
        tally(&mut cells, &task.action, &task.target);
    }
    CooccurrenceMatrix::from_cells("action", "target", cells)
}

/// Rows are `action:target` pairs; each design counts each distinct mark once
/// per task.
pub fn cooccur_task_mark(corpus: &Corpus) -> CooccurrenceMatrix {
    let mut cells = BTreeMap::new();
    for record in corpus.records() {
        for task in &record.spec.tasks {
            for mark in record.metrics.mark_counts.keys() {
                tally(&mut cells, &task.pair_key(), mark);
            }
        }
    }
    CooccurrenceMatrix::from_cells("action_target", "mark", cells)
}

/// Each operator pairs with the marks of its direct children that are marks.
pub fn cooccur_composition_mark(corpus: &Corpus) -> CooccurrenceMatrix {
    let mut cells = BTreeMap::new();
    for record in corpus.records() {
        for view in iter_views(&record.spec) {
            let Some(kind) = view.composition_kind() else { continue };
            for child in view.children().into_iter().filter_map(ViewNode::as_mark) {
                tally(&mut cells, kind.as_str(), &child.mark);
            }
        }
    }
    CooccurrenceMatrix::from_cells("composition", "mark", cells)
}

pub fn cooccur_datatype_channel(corpus: &Corpus) -> CooccurrenceMatrix {
    let mut cells = BTreeMap::new();
    for record in corpus.records() {
        for entry in field_entries(&record.spec) {
            tally(&mut cells, &entry.def.data_type, entry.channel);
        }
    }
    CooccurrenceMatrix::from_cells("data_type", "channel", cells)
}

/// Dispatches on a (row, col) property pair.
pub fn cooccurrence(corpus: &Corpus, row: &str, col: &str) -> Result<CooccurrenceMatrix, AnalyticsError> {
    match (row, col) {
        ("action", "target") => Ok(cooccur_action_target(corpus)),
        ("action_target", "mark") => Ok(cooccur_task_mark(corpus)),
        ("composition", "mark") => Ok(cooccur_composition_mark(corpus)),
        ("data_type", "channel") => Ok(cooccur_datatype_channel(corpus)),
        _ => Err(AnalyticsError::UnsupportedPair {
            row: row.into(),
            col: col.into(),
        }),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OverviewStats {
    pub n_designs: u64,
    pub composite_count: u64,
    pub composite_share: Ratio<u64>,
    pub composition_count_hist: BTreeMap<u64, u64>,
    pub composition_type_count_hist: BTreeMap<u64, u64>,
    pub depth_hist_composite: BTreeMap<u64, u64>,
    pub expressible_count: u64,
    pub expressible_share: Ratio<u64>,
    pub avg_tasks_composite: Option<Ratio<u64>>,
    pub avg_tasks_noncomposite: Option<Ratio<u64>>,
    pub avg_tasks_by_composition_count: BTreeMap<u64, Ratio<u64>>,
}

#[derive(Default)]
struct Mean {
    sum: u64,
    n: u64,
}

impl Mean {
    fn add(&mut self, x: u64) {
        self.sum += x;
        self.n += 1;
    }

    fn value(&self) -> Option<Ratio<u64>> {
        (self.n > 0).then(|| Ratio::new(self.sum, self.n))
    }
}

pub fn overview(corpus: &Corpus) -> Result<OverviewStats, AnalyticsError> {
    if corpus.is_empty() {
        return Err(AnalyticsError::EmptyCorpus);
    }
    let n = corpus.len() as u64;
    let mut composition_count_hist = BTreeMap::new();
    let mut composition_type_count_hist = BTreeMap::new();
    let mut depth_hist_composite = BTreeMap::new();
    let mut expressible_count = 0;
    let mut composite = Mean::default();
    let mut noncomposite = Mean::default();
    let mut by_count: BTreeMap<u64, Mean> = BTreeMap::new();
    for record in corpus.records() {
        let m = &record.metrics;
        let tasks = m.task_count as u64;
        let count = m.composition_count as u64;
        *composition_count_hist.entry(count).or_insert(0) += 1;
        *composition_type_count_hist
            .entry(m.composition_types_used.len() as u64)
            .or_insert(0) += 1;
        if m.is_composite {
            *depth_hist_composite.entry(m.composition_depth as u64).or_insert(0) += 1;
            composite.add(tasks);
        } else {
            noncomposite.add(tasks);
        }
        if m.vegalite_expressible {
            expressible_count += 1;
        }
        by_count.entry(count).or_default().add(tasks);
    }
    Ok(OverviewStats {
        n_designs: n,
        composite_count: composite.n,
        composite_share: Ratio::new(composite.n, n),
        composition_count_hist,
        composition_type_count_hist,
        depth_hist_composite,
        expressible_count,
        expressible_share: Ratio::new(expressible_count, n),
        avg_tasks_composite: composite.value(),
        avg_tasks_noncomposite: noncomposite.value(),
        avg_tasks_by_composition_count: by_count
            .into_iter()
            .map(|(k, mean)| (k, mean.value().expect("bucket is nonempty")))
            .collect(),
    })
}

/// Rounds half-up to three decimals.
pub fn round3(r: Ratio<u64>) -> f64 {
    let (num, den) = (*r.numer() as u128, *r.denom() as u128);
    let k = (2 * num * 1000 + den) / (2 * den);
    k as f64 / 1000.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{DesignMetadata, DesignRecord};
    use crate::grammar::ParseMode;
    use crate::model::{DesignSpec, FieldDef, TaskAnnotation};
    use crate::vocab::default_vocabulary;

    fn corpus(specs: Vec<DesignSpec>) -> Corpus {
        let vocab = default_vocabulary();
        let records = specs
            .into_iter()
            .enumerate()
            .map(|(i, spec)| {
                let meta = DesignMetadata {
                    paper_title: "t".into(),
                    venue: "VIS".into(),
                    year: 2021,
                    figure_caption: String::new(),
                    view_name: "v".into(),
                    image_path: None,
                    keywords: vec![],
                };
                DesignRecord::new(format!("d{i}"), spec, meta, &vocab)
            })
            .collect();
        Corpus::new(vocab, ParseMode::Strict, records).unwrap()
    }

    fn task(a: &str, t: &str) -> TaskAnnotation {
        TaskAnnotation::new(a, t)
    }

    fn counts(h: &Histogram) -> Vec<(&str, u64)> {
        h.counts.iter().map(|(k, &v)| (k.as_str(), v)).collect()
    }

    #[test]
    fn mark_and_action_histograms() {
        let c = corpus(vec![DesignSpec::new(
            ViewNode::concat(vec![ViewNode::mark("bar"), ViewNode::mark("bar"), ViewNode::mark("line")]),
            vec![task("present", "distribution"), task("compare", "value")],
        )]);
        let marks = frequency(&c, Property::Mark).unwrap();
        assert_eq!(counts(&marks), [("bar", 2), ("line", 1)]);
        assert_eq!(marks.total, 3);
        let actions = frequency(&c, Property::Action).unwrap();
        assert_eq!(counts(&actions), [("compare", 1), ("present", 1)]);
        assert!(frequency(&c, Property::FieldWord).is_err());
        assert_eq!("nosuch".parse::<Property>().unwrap_err().code(), "unknown_property");
    }

    #[test]
    fn field_word_tokenizer() {
        let spec = DesignSpec::new(
            ViewNode::mark_with(
                "point",
                [
                    ("x", FieldDef::new("time", "temporal")),
                    ("y", FieldDef::new("Time_stamp", "temporal")),
                    ("color", FieldDef::new("a-b", "nominal")),
                ],
            ),
            vec![task("present", "value")],
        );
        let h = field_word_frequency(&corpus(vec![spec]));
        assert_eq!(counts(&h), [("stamp", 1), ("time", 2)]);
        let empty = field_word_frequency(&corpus(vec![]));
        assert_eq!(empty.total, 0);
        assert!(empty.counts.is_empty());
    }

    #[test]
    fn action_target_cells() {
        let spec = || DesignSpec::new(ViewNode::mark("bar"), vec![task("present", "distribution")]);
        let one = cooccur_action_target(&corpus(vec![spec()]));
        assert_eq!(one.counts, vec![vec![1]]);
        let two = cooccur_action_target(&corpus(vec![spec(), spec()]));
        assert_eq!(two.get("present", "distribution"), 2);
    }

    #[test]
    fn task_mark_counts_distinct_marks() {
        let c = corpus(vec![
            DesignSpec::new(
                ViewNode::concat(vec![ViewNode::mark("bar"), ViewNode::mark("bar")]),
                vec![task("compare", "value")],
            ),
            DesignSpec::new(
                ViewNode::layer(vec![ViewNode::mark("bar"), ViewNode::mark("line")]),
                vec![task("present", "distribution")],
            ),
        ]);
        let m = cooccur_task_mark(&c);
        assert_eq!(m.get("compare:value", "bar"), 1);
        assert_eq!(m.get("present:distribution", "bar"), 1);
        assert_eq!(m.get("present:distribution", "line"), 1);
        assert_eq!(m.total(), 3);
    }

    #[test]
    fn composition_mark_direct_children_only() {
        let c = corpus(vec![
            DesignSpec::new(
                ViewNode::facet_row(FieldDef::new("r", "nominal"), ViewNode::mark("bar")),
                vec![task("compare", "value")],
            ),
            DesignSpec::new(
                ViewNode::nested(ViewNode::mark("graph"), vec![ViewNode::mark("arc")], "node"),
                vec![task("explore", "graph")],
            ),
            DesignSpec::new(
                ViewNode::layer(vec![
                    ViewNode::mark("point"),
                    ViewNode::facet_row(FieldDef::new("r", "nominal"), ViewNode::mark("bar")),
                ]),
                vec![task("compare", "value")],
            ),
        ]);
        let m = cooccur_composition_mark(&c);
        assert_eq!(m.get("facet", "bar"), 2);
        assert_eq!(m.get("nested", "graph"), 1);
        assert_eq!(m.get("nested", "arc"), 1);
        assert_eq!(m.get("layer", "point"), 1);
        assert_eq!(m.get("layer", "bar"), 0);
    }

    #[test]
    fn datatype_channel_pairs() {
        let spec = DesignSpec::new(
            ViewNode::mark_with(
                "graph",
                [
                    ("node", FieldDef::new("id", "node")),
                    ("link", FieldDef::new("edge", "relational")),
                ],
            ),
            vec![task("explore", "graph")],
        );
        let c = corpus(vec![spec]);
        let m = cooccur_datatype_channel(&c);
        assert_eq!(m.get("node", "node"), 1);
        assert_eq!(m.get("relational", "link"), 1);
        assert_eq!(m.total(), frequency(&c, Property::Channel).unwrap().total);
        assert!(cooccurrence(&c, "action", "mark").is_err());
    }

    #[test]
    fn overview_small_corpora() {
        let leaf = || DesignSpec::new(ViewNode::mark("bar"), vec![task("present", "value")]);
        let o = overview(&corpus(vec![leaf()])).unwrap();
        assert_eq!(o.composite_share, Ratio::new(0, 1));
        assert_eq!(o.avg_tasks_noncomposite, Some(Ratio::from_integer(1)));
        assert_eq!(o.avg_tasks_composite, None);

        let facet = DesignSpec::new(
            ViewNode::facet_row(FieldDef::new("r", "nominal"), ViewNode::mark("bar")),
            vec![task("compare", "value"), task("present", "value")],
        );
        let o = overview(&corpus(vec![leaf(), facet])).unwrap();
        assert_eq!(o.composition_count_hist, BTreeMap::from([(0, 1), (1, 1)]));
        assert_eq!(o.depth_hist_composite, BTreeMap::from([(1, 1)]));
        assert_eq!(o.avg_tasks_by_composition_count[&1], Ratio::from_integer(2));
        assert_eq!(overview(&corpus(vec![])).unwrap_err(), AnalyticsError::EmptyCorpus);
    }

    #[test]
    fn rounding_is_half_up() {
        assert_eq!(round3(Ratio::new(282, 442)), 0.638);
        assert_eq!(round3(Ratio::new(169, 442)), 0.382);
        assert_eq!(round3(Ratio::new(1, 8)), 0.125);
        assert_eq!(round3(Ratio::new(1, 2000)), 0.001);
        assert_eq!(round3(Ratio::new(2, 3)), 0.667);
    }
}
