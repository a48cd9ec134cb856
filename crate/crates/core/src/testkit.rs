//! Seeded generators for specs, corpora, patterns and filters, shared by the
//! property suites and the acceptance harness.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{Map, Value};

use crate::corpus::{Corpus, DesignMetadata, DesignRecord};
use crate::grammar::ParseMode;
use crate::model::{ConcatDirection, DesignSpec, FacetView, FieldDef, Ident, TaskAnnotation, ViewNode};
use crate::query::{FilterQuery, QueryPattern, WILDCARD};
use crate::vocab::{Vocabulary, GRAPH_CHANNELS, SUB_CHANNELS};

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

const FIELD_WORDS: [&str; 12] = [
    "time", "Time_Stamp", "feature", "metric", "count", "node_id", "edge weight", "x", "price",
    "region", "topic-score", "layer2",
];
const VENUES: [&str; 3] = ["VIS", "EuroVis", "PacificVis"];

fn pick<'a, R: Rng, T>(rng: &mut R, items: &'a [T]) -> &'a T {
    items.choose(rng).expect("non-empty choice")
}

fn pick_ident<R: Rng>(rng: &mut R, set: impl Iterator<Item = Ident>) -> Ident {
    let items: Vec<Ident> = set.collect();
    pick(rng, &items).clone()
}

fn field_def<R: Rng>(rng: &mut R, vocab: &Vocabulary, data_type: Option<Ident>) -> FieldDef {
    let data_type = data_type.unwrap_or_else(|| pick_ident(rng, vocab.data_types_original.iter().cloned()));
    let mut def = FieldDef::new(*pick(rng, &FIELD_WORDS), &data_type);
    if rng.random_bool(0.25) {
        def.aggregate = Some(pick_ident(rng, vocab.aggregates.iter().cloned()));
    }
    def
}

fn mark_view<R: Rng>(rng: &mut R, vocab: &Vocabulary) -> ViewNode {
    let mark = pick_ident(rng, vocab.marks().cloned());
    let mut view = ViewNode::mark(&mark);
    let ViewNode::Mark(m) = &mut view else { unreachable!() };
    let plain: Vec<Ident> = vocab
        .channels_original
        .iter()
        .filter(|c| !matches!(c.as_str(), "row" | "column"))
        .cloned()
        .collect();
    for _ in 0..rng.random_range(0..=3) {
        let channel = pick(rng, &plain).clone();
        let def = field_def(rng, vocab, None);
        m.encoding.insert(channel, def);
    }
    if rng.random_bool(0.2) {
        for graph_channel in GRAPH_CHANNELS {
            if rng.random_bool(0.6) {
                let data_type = if graph_channel == "node" { "node" } else { "relational" };
                let mut def = field_def(rng, vocab, Some(Ident::from(data_type)));
                if rng.random_bool(0.5) {
                    let sub = *pick(rng, &SUB_CHANNELS);
                    def.sub_channels.insert(Ident::from(sub), field_def(rng, vocab, None));
                }
                m.encoding.insert(Ident::from(graph_channel), def);
            }
        }
    }
    view
}

/// A random view tree with at most `depth` nested operators.
pub fn random_view<R: Rng>(rng: &mut R, vocab: &Vocabulary, depth: usize) -> ViewNode {
    if depth == 0 || rng.random_bool(0.4) {
        return mark_view(rng, vocab);
    }
    let child = |rng: &mut R| random_view(rng, vocab, depth - 1);
    match rng.random_range(0..4) {
        0 => {
            let n = rng.random_range(2..=3);
            ViewNode::layer((0..n).map(|_| child(rng)).collect())
        }
        1 => {
            let n = rng.random_range(2..=3);
            let mut view = ViewNode::concat((0..n).map(|_| child(rng)).collect());
            if let ViewNode::Concat(c) = &mut view {
                c.direction = *pick(
                    rng,
                    &[
                        None,
                        Some(ConcatDirection::Horizontal),
                        Some(ConcatDirection::Vertical),
                        Some(ConcatDirection::Wrap),
                    ],
                );
            }
            view
        }
        2 => {
            let (row, column) = match rng.random_range(0..3) {
                0 => (Some(field_def(rng, vocab, None)), None),
                1 => (None, Some(field_def(rng, vocab, None))),
                _ => (Some(field_def(rng, vocab, None)), Some(field_def(rng, vocab, None))),
            };
            ViewNode::Facet(FacetView {
                row,
                column,
                inner: Box::new(child(rng)),
            })
        }
        _ => {
            let parent = child(rng);
            let n = rng.random_range(1..=2);
            let canvas = *pick(rng, &["node", "link"]);
            ViewNode::nested(parent, (0..n).map(|_| child(rng)).collect(), canvas)
        }
    }
}

pub fn random_tasks<R: Rng>(rng: &mut R, vocab: &Vocabulary) -> Vec<TaskAnnotation> {
    let n = rng.random_range(1..=3);
    let mut tasks: Vec<TaskAnnotation> = Vec::new();
    for _ in 0..n {
        let task = TaskAnnotation {
            action: pick_ident(rng, vocab.actions.iter().cloned()),
            target: pick_ident(rng, vocab.targets().cloned()),
        };
        if !tasks.contains(&task) {
            tasks.push(task);
        }
    }
    tasks
}

pub fn random_spec<R: Rng>(rng: &mut R, vocab: &Vocabulary, depth: usize) -> DesignSpec {
    DesignSpec::new(random_view(rng, vocab, depth), random_tasks(rng, vocab))
}

pub fn random_metadata<R: Rng>(rng: &mut R) -> DesignMetadata {
    DesignMetadata {
        paper_title: format!("Paper {}", rng.random_range(0..1000)),
        venue: pick(rng, &VENUES).to_string(),
        year: rng.random_range(2005..=2022),
        figure_caption: String::new(),
        view_name: "main".into(),
        image_path: None,
        keywords: Vec::new(),
    }
}

/// A strict-mode corpus of `n` random designs with ids `g000`, `g001`, ...
pub fn random_corpus<R: Rng>(rng: &mut R, vocab: &Vocabulary, n: usize, depth: usize) -> Corpus {
    let records = (0..n)
        .map(|i| {
            let spec = random_spec(rng, vocab, depth);
            let meta = random_metadata(rng);
            DesignRecord::new(format!("g{i:03}"), spec, meta, vocab)
        })
        .collect();
    Corpus::new(vocab.clone(), ParseMode::Strict, records).expect("generated ids are unique")
}

fn descendants(value: &Value) -> Vec<&Value> {
    let mut out = vec![value];
    let mut i = 0;
    while i < out.len() {
        match out[i] {
            Value::Object(map) => out.extend(map.values()),
            Value::Array(items) => out.extend(items.iter()),
            _ => {}
        }
        i += 1;
    }
    out
}

/// Generalizes `node`: drops object keys and array elements, reorders and
/// repeats array elements, and swaps subtrees for the wildcard.
fn generalize<R: Rng>(rng: &mut R, node: &Value, depth: usize) -> Value {
    if depth > 0 && rng.random_bool(0.15) {
        return Value::String(WILDCARD.into());
    }
    match node {
        Value::Object(map) => {
            let mut out = Map::new();
            for (k, v) in map {
                if rng.random_bool(0.6) {
                    out.insert(k.clone(), generalize(rng, v, depth + 1));
                }
            }
            Value::Object(out)
        }
        Value::Array(items) if !items.is_empty() => {
            let n = rng.random_range(0..=items.len().min(3));
            Value::Array(
                (0..n)
                    .map(|_| {
                        let item = &items[rng.random_range(0..items.len())];
                        generalize(rng, item, depth + 1)
                    })
                    .collect(),
            )
        }
        other => other.clone(),
    }
}

fn perturb<R: Rng>(rng: &mut R, pattern: &mut Value) {
    match pattern {
        Value::Object(map) => {
            if rng.random_bool(0.5) || map.is_empty() {
                map.insert("encoding".into(), Value::String("zzz".into()));
            } else {
                let key = map.keys().nth(rng.random_range(0..map.len())).cloned().unwrap();
                perturb(rng, map.get_mut(&key).unwrap());
            }
        }
        Value::Array(items) => items.push(Value::String("absent".into())),
        other => *other = Value::String("nope".into()),
    }
}

/// A pattern drawn from a random subtree of a random design, usually
/// generalized and sometimes perturbed so it may match nothing.
pub fn random_pattern<R: Rng>(rng: &mut R, corpus: &Corpus) -> QueryPattern {
    if corpus.is_empty() || rng.random_bool(0.05) {
        return QueryPattern::from_value(Value::Object(Map::new())).unwrap();
    }
    let doc = corpus.document(rng.random_range(0..corpus.len()));
    let nodes = descendants(doc);
    let node = *pick(rng, &nodes);
    let mut pattern = generalize(rng, node, 0);
    if rng.random_bool(0.2) {
        perturb(rng, &mut pattern);
    }
    QueryPattern::from_value(pattern).expect("generated patterns use wildcards only as values")
}

/// A filter with a few random clauses drawn from the vocabulary.
pub fn random_filter<R: Rng>(rng: &mut R, vocab: &Vocabulary) -> FilterQuery {
    let mut q = FilterQuery::default();
    let add = |rng: &mut R, set: &mut std::collections::BTreeSet<String>, pool: Vec<Ident>| {
        if rng.random_bool(0.3) {
            for _ in 0..rng.random_range(1..=2) {
                set.insert(pick(rng, &pool).to_string());
            }
        }
    };
    add(rng, &mut q.marks, vocab.marks().cloned().collect());
    add(rng, &mut q.channels, vocab.channels().cloned().collect());
    add(rng, &mut q.data_types, vocab.data_types().cloned().collect());
    add(rng, &mut q.aggregates, vocab.aggregates.iter().cloned().collect());
    add(rng, &mut q.compositions, vocab.composition_types.iter().cloned().collect());
    add(rng, &mut q.actions, vocab.actions.iter().cloned().collect());
    add(rng, &mut q.targets, vocab.targets().cloned().collect());
    if rng.random_bool(0.15) {
        q.field_name_contains = Some(pick(rng, &["time", "ID", "e w", "score"]).to_string());
    }
    if rng.random_bool(0.15) {
        q.composite = Some(rng.random_bool(0.5));
    }
    if rng.random_bool(0.15) {
        q.expressible = Some(rng.random_bool(0.5));
    }
    if rng.random_bool(0.15) {
        let lo = rng.random_range(2005..=2022);
        q.year_range = Some((lo, rng.random_range(lo..=2022)));
    }
    if rng.random_bool(0.1) {
        q.venue = Some(pick(rng, &["vis", "EuroVis", "CHI"]).to_string());
    }
    q
}
