"""Results document (JSON) and a plain-text table of mean +- SE per (s, labels, scheme)."""
from __future__ import annotations

import json

SCHEMA_VERSION = 1


def build_document(config=None, results=None, tests=None, metadata=None) -> dict:
    """Machine-readable results; ``results`` as returned by ``run_trials``."""
    rows = []
    for (s, per, sc), cell in sorted((results or {}).items()):
        st = cell["stats"]
        rows.append({"s": s, "labels": per, "scheme": sc, "times": list(cell["times"]), **st.to_dict()})
    return {
        "schema_version": SCHEMA_VERSION,
        "config": config.to_dict() if hasattr(config, "to_dict") else (config or {}),
        "metadata": metadata or {},
        "results": rows,
        "tests": tests or [],
    }


def dumps(doc: dict) -> str:
    # repr-based float formatting in json round-trips every double exactly
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def loads(text: str) -> dict:
    doc = json.loads(text)
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ValueError(f"unsupported results schema version {doc.get('schema_version')!r}")
    return doc


def write(doc: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(doc))


def read(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def text_table(doc: dict) -> str:
    """One line per (s, labels) with a ``mean +- SE`` column per scheme."""
    rows = doc.get("results", [])
    if not rows:
        return "(no results)\n"
    schemes = sorted({r["scheme"] for r in rows})
    cells = {(r["s"], r["labels"], r["scheme"]): r for r in rows}
    keys = sorted({(r["s"], r["labels"]) for r in rows})
    head = f"{'s':>5} {'labels':>6} " + " ".join(f"{'scheme ' + str(sc):>15}" for sc in schemes)
    lines = [head, "-" * len(head)]
    for s, per in keys:
        parts = []
        for sc in schemes:
            r = cells.get((s, per, sc))
            parts.append(f"{r['mean']:.3f} +- {r['se']:.3f}".rjust(15) if r else " " * 15)
        lines.append(f"{s:>5g} {per:>6d} " + " ".join(parts))
    tests = doc.get("tests", [])
    if tests:
        lines.append("")
        for t in tests:
            a = t["anova"]
            lines.append(f"s={t['s']:g} labels={t['labels']}: ANOVA F={a['F']:.3f} p={a['p']:.3g}")
    return "\n".join(lines) + "\n"
