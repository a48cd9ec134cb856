use std::collections::BTreeSet;

use proptest::prelude::*;
use serde_json::Value;
use vakb_core::grammar::{check_expressible, compute_metrics, parse_spec, serialize_spec, spec_to_value, ParseMode};
use vakb_core::model::{DesignSpec, FieldDef, Ident, ViewNode};
use vakb_core::testkit::{random_spec, rng};
use vakb_core::vocab::default_vocabulary;

/// Operator keys of a serialized view, read straight from the JSON.
fn operator(view: &Value) -> Option<&'static str> {
    ["layer", "concat", "facet", "nested"]
        .into_iter()
        .find(|k| view.get(*k).is_some())
}

fn json_children(view: &Value) -> Vec<&Value> {
    match operator(view) {
        Some("layer") => view["layer"].as_array().unwrap().iter().collect(),
        Some("concat") => view["concat"].as_array().unwrap().iter().collect(),
        Some("facet") => vec![&view["facet"]["spec"]],
        Some("nested") => {
            let mut out = vec![&view["nested"]["parent"]];
            out.extend(view["nested"]["children"].as_array().unwrap());
            out
        }
        _ => vec![],
    }
}

/// (count, depth, types) computed recursively over the canonical JSON.
fn oracle_metrics(view: &Value) -> (usize, usize, BTreeSet<String>) {
    let Some(op) = operator(view) else {
        return (0, 0, BTreeSet::new());
    };
    let mut count = 1;
    let mut deepest = 0;
    let mut types = BTreeSet::from([op.to_string()]);
    for child in json_children(view) {
        let (c, d, t) = oracle_metrics(child);
        count += c;
        deepest = deepest.max(d);
        types.extend(t);
    }
    (count, 1 + deepest, types)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn parse_serialize_round_trip(seed in any::<u64>()) {
        let vocab = default_vocabulary();
        let spec = random_spec(&mut rng(seed), &vocab, 4);
        let text = serialize_spec(&spec);
        let parsed = parse_spec(&text, &vocab, ParseMode::Strict).expect("canonical text parses");
        prop_assert_eq!(&parsed.spec, &spec);
        prop_assert_eq!(serialize_spec(&parsed.spec), text);
    }

    #[test]
    fn metrics_match_recursive_oracle(seed in any::<u64>()) {
        let vocab = default_vocabulary();
        let spec = random_spec(&mut rng(seed), &vocab, 4);
        let m = compute_metrics(&spec, &vocab);
        let (count, depth, types) = oracle_metrics(&spec_to_value(&spec));
        prop_assert_eq!(m.composition_count, count);
        prop_assert_eq!(m.composition_depth, depth);
        let used: BTreeSet<String> = m.composition_types_used.iter().map(|k| k.as_str().to_string()).collect();
        prop_assert_eq!(used, types);
        prop_assert_eq!(m.is_composite, count > 0);
        prop_assert_eq!(m.task_count, spec.tasks.len());
    }

    #[test]
    fn injection_flips_expressibility(seed in any::<u64>(), how in 0usize..3) {
        let vocab = default_vocabulary();
        let mut r = rng(seed);
        let spec = random_spec(&mut r, &vocab, 3);
        prop_assume!(check_expressible(&spec, &vocab).expressible);
        let injected = match how {
            0 => DesignSpec::new(
                ViewNode::nested(spec.root.clone(), vec![ViewNode::mark("bar")], "node"),
                spec.tasks.clone(),
            ),
            1 => DesignSpec::new(ViewNode::layer(vec![spec.root.clone(), ViewNode::mark("sankey")]), spec.tasks.clone()),
            _ => {
                let graph = ViewNode::mark_with("point", [("node", FieldDef::new("id", "node"))]);
                DesignSpec::new(ViewNode::concat(vec![spec.root.clone(), graph]), spec.tasks.clone())
            }
        };
        prop_assert!(!check_expressible(&injected, &vocab).expressible);
    }
}

#[test]
fn key_order_and_whitespace_do_not_matter() {
    let vocab = default_vocabulary();
    let a = r#"{"tasks":[{"target":"graph","action":"explore"}],"nested":{"canvas":"node","children":[{"encoding":{"theta":{"type":"quantitative","field":"n"}},"mark":"arc"}],"parent":{"mark":"graph"}}}"#;
    let b = "{\n \"nested\": {\"parent\": {\"mark\": \"graph\"},\n\"children\": [{\"mark\": \"arc\", \"encoding\": {\"theta\": {\"field\": \"n\", \"type\": \"quantitative\"}}}], \"canvas\": \"node\"},\n \"tasks\": [{\"action\": \"explore\", \"target\": \"graph\"}]}";
    let sa = parse_spec(a, &vocab, ParseMode::Strict).unwrap().spec;
    let sb = parse_spec(b, &vocab, ParseMode::Strict).unwrap().spec;
    assert_eq!(sa, sb);
    assert_eq!(serialize_spec(&sa), serialize_spec(&sb));
}

#[test]
fn lenient_identifiers_survive_round_trip() {
    let vocab = default_vocabulary();
    let text = r#"{"mark":"hexbin","encoding":{"glow":{"field":"a","type":"fuzzy"}},"tasks":[{"action":"ponder","target":"value"}]}"#;
    let parsed = parse_spec(text, &vocab, ParseMode::Lenient).unwrap();
    assert!(!parsed.warnings.is_empty());
    let ViewNode::Mark(m) = &parsed.spec.root else { panic!("expected a mark view") };
    assert_eq!(m.mark, Ident::from("others"));
    let again = parse_spec(&serialize_spec(&parsed.spec), &vocab, ParseMode::Lenient).unwrap();
    assert_eq!(again.spec, parsed.spec);
    assert!(parse_spec(text, &vocab, ParseMode::Strict).is_err());
}
