//! Canonical JSON, CSV and plain-text table renderings of query results and
//! statistics. JSON objects are emitted with sorted keys and two-space
//! indentation, followed by a newline.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::analytics::{round3, CooccurrenceMatrix, Histogram, OverviewStats};
use crate::corpus::{Corpus, DesignRecord};

/// Pretty JSON with sorted object keys and a trailing newline.
pub fn canonical_json<T: Serialize + ?Sized>(value: &T) -> String {
    // Value's map is ordered, so a round trip through it sorts every object.
    let value = serde_json::to_value(value).expect("value is serializable");
    let mut text = serde_json::to_string_pretty(&value).expect("value is serializable");
    text.push('\n');
    text
}

fn int_keyed<V: Into<Value> + Copy>(map: &std::collections::BTreeMap<u64, V>) -> Value {
    Value::Object(map.iter().map(|(k, &v)| (k.to_string(), v.into())).collect())
}

pub fn overview_value(o: &OverviewStats) -> Value {
    let avg = |r: Option<num_rational::Ratio<u64>>| r.map_or(Value::Null, |r| json!(round3(r)));
    json!({
        "n_designs": o.n_designs,
        "composite_count": o.composite_count,
        "composite_share": round3(o.composite_share),
        "composition_count_hist": int_keyed(&o.composition_count_hist),
        "composition_type_count_hist": int_keyed(&o.composition_type_count_hist),
        "depth_hist_composite": int_keyed(&o.depth_hist_composite),
        "expressible_count": o.expressible_count,
        "expressible_share": round3(o.expressible_share),
        "avg_tasks_composite": avg(o.avg_tasks_composite),
        "avg_tasks_noncomposite": avg(o.avg_tasks_noncomposite),
        "avg_tasks_by_composition_count": Value::Object(
            o.avg_tasks_by_composition_count
                .iter()
                .map(|(k, &r)| (k.to_string(), json!(round3(r))))
                .collect::<Map<_, _>>()
        ),
    })
}

pub fn overview_json(o: &OverviewStats) -> String {
    canonical_json(&overview_value(o))
}

pub fn histogram_json(h: &Histogram) -> String {
    canonical_json(h)
}

pub fn matrix_json(m: &CooccurrenceMatrix) -> String {
    canonical_json(m)
}

fn csv_text(rows: Vec<Vec<String>>) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("csv output is utf-8")
}

/// `key,count` header followed by one row per key, in key order.
pub fn histogram_csv(h: &Histogram) -> String {
    let mut rows = vec![vec!["key".to_string(), "count".to_string()]];
    rows.extend(h.counts.iter().map(|(k, v)| vec![k.clone(), v.to_string()]));
    csv_text(rows)
}

/// Header of column keys (first cell names the row property), then one row
/// per row key.
pub fn matrix_csv(m: &CooccurrenceMatrix) -> String {
    let mut header = vec![m.row_property.clone()];
    header.extend(m.cols.iter().cloned());
    let mut rows = vec![header];
    for (key, cells) in m.rows.iter().zip(&m.counts) {
        let mut row = vec![key.clone()];
        row.extend(cells.iter().map(u64::to_string));
        rows.push(row);
    }
    csv_text(rows)
}

/// `metric,value` rows; map-valued metrics are flattened as `name.key`.
pub fn overview_csv(o: &OverviewStats) -> String {
    let mut rows = vec![vec!["metric".to_string(), "value".to_string()]];
    if let Value::Object(map) = overview_value(o) {
        for (name, value) in map {
            match value {
                Value::Object(inner) => {
                    rows.extend(inner.into_iter().map(|(k, v)| vec![format!("{name}.{k}"), v.to_string()]))
                }
                other => rows.push(vec![name, other.to_string()]),
            }
        }
    }
    csv_text(rows)
}

fn pad_table(rows: &[Vec<String>]) -> String {
    let width = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..width)
        .map(|j| rows.iter().filter_map(|r| r.get(j)).map(|c| c.chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in rows {
        let cells: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(j, c)| format!("{c:<w$}", w = widths[j]))
            .collect();
        let _ = writeln!(out, "{}", cells.join("  ").trim_end());
    }
    out
}

/// Ranked by count, for reading.
pub fn histogram_table(h: &Histogram) -> String {
    let mut rows = vec![vec![h.property.to_string(), "count".into()]];
    rows.extend(h.ranked().into_iter().map(|(k, v)| vec![k.to_string(), v.to_string()]));
    rows.push(vec!["total".into(), h.total.to_string()]);
    pad_table(&rows)
}

pub fn matrix_table(m: &CooccurrenceMatrix) -> String {
    let mut header = vec![format!("{} \\ {}", m.row_property, m.col_property)];
    header.extend(m.cols.iter().cloned());
    let mut rows = vec![header];
    for (key, cells) in m.rows.iter().zip(&m.counts) {
        let mut row = vec![key.clone()];
        row.extend(cells.iter().map(|&c| if c == 0 { ".".into() } else { c.to_string() }));
        rows.push(row);
    }
    pad_table(&rows)
}

pub fn overview_table(o: &OverviewStats) -> String {
    let pct = |r: num_rational::Ratio<u64>| format!("{:.1}%", round3(r) * 100.0);
    let mut rows = vec![
        vec!["designs".into(), o.n_designs.to_string()],
        vec![
            "composite".into(),
            format!("{} ({})", o.composite_count, pct(o.composite_share)),
        ],
        vec![
            "expressible".into(),
            format!("{} ({})", o.expressible_count, pct(o.expressible_share)),
        ],
    ];
    let avg = |r: Option<num_rational::Ratio<u64>>| r.map_or("-".to_string(), |r| format!("{:.3}", round3(r)));
    rows.push(vec!["avg tasks, composite".into(), avg(o.avg_tasks_composite)]);
    rows.push(vec!["avg tasks, single view".into(), avg(o.avg_tasks_noncomposite)]);
    for (depth, n) in &o.depth_hist_composite {
        rows.push(vec![format!("depth {depth}"), n.to_string()]);
    }
    for (count, n) in &o.composition_count_hist {
        let a = o.avg_tasks_by_composition_count[count];
        rows.push(vec![
            format!("{count} compositions"),
            format!("{n} designs, {:.3} tasks avg", round3(a)),
        ]);
    }
    for (types, n) in &o.composition_type_count_hist {
        rows.push(vec![format!("{types} composition types"), n.to_string()]);
    }
    pad_table(&rows)
}

/// Gallery-card summary of a record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CardSummary {
    pub id: String,
    pub mark_summary: std::collections::BTreeMap<String, usize>,
    pub composition_types: Vec<String>,
    pub task_pairs: Vec<String>,
    pub paper_title: String,
    pub year: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thumbnail_url: Option<String>,
}

impl CardSummary {
    pub fn of(record: &DesignRecord) -> Self {
        CardSummary {
            id: record.id.clone(),
            mark_summary: record
                .metrics
                .mark_counts
                .iter()
                .map(|(k, &v)| (k.to_string(), v))
                .collect(),
            composition_types: record
                .metrics
                .composition_types_used
                .iter()
                .map(|k| k.as_str().to_string())
                .collect(),
            task_pairs: record.spec.tasks.iter().map(|t| t.pair_key()).collect(),
            paper_title: record.meta.paper_title.clone(),
            year: record.meta.year,
            thumbnail_url: record.meta.image_path.as_ref().map(|p| format!("/assets/{p}")),
        }
    }
}

pub fn cards(corpus: &Corpus, ids: &[String]) -> Vec<CardSummary> {
    ids.iter()
        .filter_map(|id| corpus.get(id).ok())
        .map(CardSummary::of)
        .collect()
}

pub fn cards_table(cards: &[CardSummary]) -> String {
    let mut rows = vec![vec![
        "id".to_string(),
        "marks".into(),
        "compositions".into(),
        "tasks".into(),
        "year".into(),
        "paper".into(),
    ]];
    for c in cards {
        let marks: Vec<String> = c.mark_summary.iter().map(|(m, n)| format!("{m}x{n}")).collect();
        rows.push(vec![
            c.id.clone(),
            marks.join(","),
            c.composition_types.join(","),
            c.task_pairs.join(","),
            c.year.to_string(),
            c.paper_title.clone(),
        ]);
    }
    pad_table(&rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::Property;
    use std::collections::BTreeMap;

    fn hist() -> Histogram {
        Histogram {
            property: Property::Mark,
            counts: BTreeMap::from([("bar".to_string(), 2), ("line".to_string(), 1)]),
            total: 3,
        }
    }

    #[test]
    fn histogram_renderings() {
        assert_eq!(
            histogram_json(&hist()),
            "{\n  \"counts\": {\n    \"bar\": 2,\n    \"line\": 1\n  },\n  \"property\": \"mark\",\n  \"total\": 3\n}\n"
        );
        assert_eq!(histogram_csv(&hist()), "key,count\nbar,2\nline,1\n");
        assert!(histogram_table(&hist()).starts_with("mark   count\nbar    2\n"));
    }

    #[test]
    fn matrix_csv_layout() {
        let m = CooccurrenceMatrix {
            row_property: "action".into(),
            col_property: "target".into(),
            rows: vec!["compare".into(), "present".into()],
            cols: vec!["distribution".into(), "value".into()],
            counts: vec![vec![0, 2], vec![1, 0]],
        };
        assert_eq!(matrix_csv(&m), "action,distribution,value\ncompare,0,2\npresent,1,0\n");
        assert!(matrix_json(&m).contains("\"col_property\": \"target\""));
    }
}
