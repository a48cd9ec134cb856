#!/usr/bin/env python3
"""Regenerates the golden statistics for a corpus directory.

Works directly on the raw spec files listed in manifest.json, enumerating
every JSON object flatly instead of building a view tree. Output files use
sorted keys, two-space indentation and a trailing newline.

usage: golden_oracle.py <corpus_dir> <out_dir>
"""

import json
import os
import re
import sys
from fractions import Fraction

EXTENDED_MARKS = {"graph", "tree", "sankey", "radar", "unit", "chord", "parallel", "others"}
EXTENDED_CHANNELS = {"node", "link"}
EXTENDED_TYPES = {"node", "relational"}
SUB_CHANNELS = {"x", "y", "size", "width", "color", "shape", "opacity"}
OPERATORS = {"layer": "layer", "concat": "concat", "hconcat": "concat", "vconcat": "concat", "facet": "facet", "nested": "nested"}
VIEW_KEYS = set(OPERATORS) | {"mark"}


def objects(value):
    """Every object in the document outside `tasks` and `$raw`."""
    if isinstance(value, dict):
        yield value
        for key, child in value.items():
            if key not in ("tasks", "$raw"):
                yield from objects(child)
    elif isinstance(value, list):
        for child in value:
            yield from objects(child)


def is_view(obj):
    return "field" not in obj and any(k in obj for k in VIEW_KEYS)


def operator(view):
    for key, kind in OPERATORS.items():
        if key in view:
            return kind
    return None


def children(view):
    for key in ("layer", "concat", "hconcat", "vconcat"):
        if key in view:
            return list(view[key])
    if "facet" in view:
        return [view["facet"]["spec"] if "spec" in view["facet"] else view["spec"]]
    if "nested" in view:
        return [view["nested"]["parent"]] + list(view["nested"]["children"])
    return []


def depth(view):
    if operator(view) is None:
        return 0
    return 1 + max((depth(c) for c in children(view)), default=0)


def entries(views):
    """(channel, field, type, aggregate) for encodings, sub-channels and facet fields."""
    out = []
    for view in views:
        for channel, fd in view.get("encoding", {}).items():
            out.append((channel, fd["field"], fd["type"], fd.get("aggregate")))
            if channel in ("node", "link"):
                for sub, sub_fd in fd.items():
                    if sub in SUB_CHANNELS and isinstance(sub_fd, dict):
                        out.append((sub, sub_fd["field"], sub_fd["type"], sub_fd.get("aggregate")))
        if "facet" in view:
            for channel in ("row", "column"):
                if channel in view["facet"]:
                    fd = view["facet"][channel]
                    out.append((channel, fd["field"], fd["type"], fd.get("aggregate")))
    return out


def words(field):
    return [t for t in re.split(r"[^a-z0-9]+", field.lower()) if len(t) >= 2]


def tally(counter, key, n=1):
    counter[key] = counter.get(key, 0) + n


def histogram(prop, counter):
    return {"property": prop, "counts": counter, "total": sum(counter.values())}


def matrix(row_prop, col_prop, cells):
    rows = sorted({r for r, _ in cells})
    cols = sorted({c for _, c in cells})
    return {
        "row_property": row_prop,
        "col_property": col_prop,
        "rows": rows,
        "cols": cols,
        "counts": [[cells.get((r, c), 0) for c in cols] for r in rows],
    }


def round3(fr):
    return ((2 * fr.numerator * 1000 + fr.denominator) // (2 * fr.denominator)) / 1000


def load(corpus_dir):
    with open(os.path.join(corpus_dir, "manifest.json"), encoding="utf-8") as f:
        manifest = json.load(f)
    designs = []
    for entry in manifest:
        with open(os.path.join(corpus_dir, entry["spec_file"]), encoding="utf-8") as f:
            doc = json.load(f)
        design_id = entry.get("id") or os.path.splitext(os.path.basename(entry["spec_file"]))[0]
        designs.append((design_id, doc))
    designs.sort(key=lambda d: d[0])
    return designs


def compute(designs):
    freq = {p: {} for p in ("mark", "channel", "data_type", "aggregate", "composition", "action", "target")}
    word_counts = {}
    at, tm, cm, dc = {}, {}, {}, {}
    n = len(designs)
    count_hist, type_hist, depth_hist, by_count = {}, {}, {}, {}
    composite, expressible = 0, 0
    tasks_composite, tasks_single = [], []

    for _, doc in designs:
        views = [o for o in objects(doc) if is_view(o)]
        ops = [operator(v) for v in views if operator(v)]
        marks = [v["mark"] for v in views if "mark" in v]
        ents = entries(views)
        tasks = [(t["action"], t["target"]) for t in doc["tasks"]]
        assert len(set(tasks)) == len(tasks), "duplicate tasks are not expected in golden corpora"

        for m in marks:
            tally(freq["mark"], m)
        for op in ops:
            tally(freq["composition"], op)
        for channel, field, dtype, agg in ents:
            tally(freq["channel"], channel)
            tally(freq["data_type"], dtype)
            if agg is not None:
                tally(freq["aggregate"], agg)
            tally(dc, (dtype, channel))
            for w in words(field):
                tally(word_counts, w)
        for a, t in tasks:
            tally(freq["action"], a)
            tally(freq["target"], t)
            tally(at, (a, t))
            for m in sorted(set(marks)):
                tally(tm, (f"{a}:{t}", m))
        for v in views:
            op = operator(v)
            if op:
                for c in children(v):
                    if "mark" in c:
                        tally(cm, (op, c["mark"]))

        count = len(ops)
        tally(count_hist, str(count))
        tally(type_hist, str(len(set(ops))))
        by_count.setdefault(count, []).append(len(tasks))
        if count > 0:
            composite += 1
            tally(depth_hist, str(depth(doc)))
            tasks_composite.append(len(tasks))
        else:
            tasks_single.append(len(tasks))
        ok = (
            "nested" not in ops
            and not any(m in EXTENDED_MARKS for m in marks)
            and not any(c in EXTENDED_CHANNELS for c, _, _, _ in ents)
            and not any(t in EXTENDED_TYPES for _, _, t, _ in ents)
        )
        expressible += ok

    def avg(xs):
        return round3(Fraction(sum(xs), len(xs))) if xs else None

    out = {
        "overview": {
            "n_designs": n,
            "composite_count": composite,
            "composite_share": round3(Fraction(composite, n)),
            "composition_count_hist": count_hist,
            "composition_type_count_hist": type_hist,
            "depth_hist_composite": depth_hist,
            "expressible_count": expressible,
            "expressible_share": round3(Fraction(expressible, n)),
            "avg_tasks_composite": avg(tasks_composite),
            "avg_tasks_noncomposite": avg(tasks_single),
            "avg_tasks_by_composition_count": {str(k): avg(v) for k, v in by_count.items()},
        },
        "words": histogram("field_word", word_counts),
        "cooccur_action_target": matrix("action", "target", at),
        "cooccur_action_target_mark": matrix("action_target", "mark", tm),
        "cooccur_composition_mark": matrix("composition", "mark", cm),
        "cooccur_data_type_channel": matrix("data_type", "channel", dc),
    }
    for prop, counter in freq.items():
        out[f"frequency_{prop}"] = histogram(prop, counter)
    return out


def main(argv):
    if len(argv) != 3:
        print(__doc__.strip().splitlines()[-1], file=sys.stderr)
        return 2
    corpus_dir, out_dir = argv[1], argv[2]
    os.makedirs(out_dir, exist_ok=True)
    for name, value in sorted(compute(load(corpus_dir)).items()):
        with open(os.path.join(out_dir, name + ".json"), "w", encoding="utf-8") as f:
            f.write(json.dumps(value, sort_keys=True, indent=2, ensure_ascii=False) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
