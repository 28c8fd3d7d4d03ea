"""Align runtime trace logs into color-coded comparison tables.

One table per call-stack frame, innermost (the patched method) first. Rows are
keyed by (line, name, occurrence); names that differ across versions at the
same line collapse into a wildcard name. For a name logged repeatedly, the row
shows the first occurrence where any version diverges from the buggy value, or
the final occurrence when there is no divergence.

Colors: the buggy cell turns red when any present patch value differs from it;
patch cells equal to the buggy value stay neutral; each other distinct patch
value gets the next of four green shades (cycling past four). Adjacent equal
cells merge into spans. Rendered-string equality defines cell equality.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

from .minilang.lexer import join_tokens
from .patchmodel import tokenize
from .tracing import InstrumentationPlan, TraceLog

RED = "red"
NEUTRAL = "neutral"
GREEN_SHADES = 4
ABSENT = None  # cell value for versions that never hit the probe


class AlignmentError(Exception):
    """Two versions disagree about a probe's kind at the same (line, name)."""


@dataclass
class Row:
    line: int
    occurrence: int
    occurrence_count: int  # max occurrences of this name in any version
    display_name: str
    kind: str
    values: list[str | None]  # one cell per version, buggy first
    merge_spans: list[tuple[int, int]] = field(default_factory=list)  # inclusive col ranges
    colors: list[str] = field(default_factory=list)
    nav_target: tuple[str, int] = ("", 0)


@dataclass
class ComparisonTable:
    frame: str  # function name
    frame_index: int  # 0 = innermost
    columns: list[str]  # version ids, buggy first
    rows: list[Row] = field(default_factory=list)


# ---------------------------------------------------------------------------
# Wildcard name synthesis
# ---------------------------------------------------------------------------


def synthesize_name(variants: set[str]) -> str:
    """Collapse name variants into one display name.

    Keeps the token-level common subsequence and replaces each maximal run of
    differing tokens with a single "*". A single variant is returned verbatim.
    """
    if not variants:
        raise ValueError("no variants to synthesize")
    ordered = sorted(variants)
    if len(ordered) == 1:
        return ordered[0]
    token_seqs = [list(tokenize(v).tokens) for v in ordered]
    common = token_seqs[0]
    for seq in token_seqs[1:]:
        common = _lcs(common, seq)

    merged: list[str] = []
    positions = [0] * len(token_seqs)  # cursor per variant
    for tok in common:
        gap = False
        for i, seq in enumerate(token_seqs):
            while positions[i] < len(seq) and seq[positions[i]] != tok:
                positions[i] += 1
                gap = True
        if gap and (not merged or merged[-1] != "*"):
            merged.append("*")
        merged.append(tok)
        for i in range(len(positions)):
            positions[i] += 1
    if any(positions[i] < len(token_seqs[i]) for i in range(len(token_seqs))):
        if not merged or merged[-1] != "*":
            merged.append("*")
    if not common:
        return "*"
    return join_tokens(merged)


def _lcs(a: list[str], b: list[str]) -> list[str]:
    la, lb = len(a), len(b)
    table = [[0] * (lb + 1) for _ in range(la + 1)]
    for i in range(la - 1, -1, -1):
        for j in range(lb - 1, -1, -1):
            if a[i] == b[j]:
                table[i][j] = table[i + 1][j + 1] + 1
            else:
                table[i][j] = max(table[i + 1][j], table[i][j + 1])
    out = []
    i = j = 0
    while i < la and j < lb:
        if a[i] == b[j]:
            out.append(a[i])
            i += 1
            j += 1
        elif table[i + 1][j] >= table[i][j + 1]:
            i += 1
        else:
            j += 1
    return out


# ---------------------------------------------------------------------------
# Alignment
# ---------------------------------------------------------------------------


def _index_log(log: TraceLog):
    """(function, line, kind) -> name -> {occurrence: value}, plus name order."""
    series: dict[tuple[str, int, str], dict[str, dict[int, str]]] = {}
    order: dict[tuple[str, int, str], list[str]] = {}
    for r in log.records:
        key = (r.function, r.line, r.kind)
        bucket = series.setdefault(key, {})
        if r.name not in bucket:
            bucket[r.name] = {}
            order.setdefault(key, []).append(r.name)
        bucket[r.name][r.occurrence] = r.value
    return series, order


def _check_kinds(logs: list[TraceLog]):
    # a variable may legitimately be both used and defined at one line, but a
    # given expression name must not be a subexpression in one version and a
    # call in another
    seen: dict[tuple[str, int, str], str] = {}
    for log in logs:
        for r in log.records:
            if r.kind not in ("subexpr", "call"):
                continue
            key = (r.function, r.line, r.name)
            if key in seen and seen[key] != r.kind:
                raise AlignmentError(
                    f"probe kind conflict at {r.function}:{r.line} {r.name!r}: "
                    f"{seen[key]} vs {r.kind}"
                )
            seen.setdefault(key, r.kind)


def align(
    buggy_log: TraceLog,
    patch_logs: list[TraceLog],
    plans: dict[str, InstrumentationPlan] | None = None,
    frames: list[str] | None = None,
    source_file: str = "program.mini",
) -> list[ComparisonTable]:
    """Merge per-version trace logs into one comparison table per frame.

    frames gives the frame order (innermost first); when omitted, functions
    appear in first-record order of the buggy log. plans are consulted only to
    cross-check probe kinds.
    """
    logs = [buggy_log] + list(patch_logs)
    _check_kinds(logs)
    versions = [log.version for log in logs]
    indexed = [_index_log(log) for log in logs]

    if frames is None:
        frames = []
        for log in logs:
            for r in log.records:
                if r.function not in frames:
                    frames.append(r.function)

    all_keys: list[tuple[str, int, str]] = []
    for series, _ in indexed:
        for key in series:
            if key not in all_keys:
                all_keys.append(key)

    tables = {
        fn: ComparisonTable(fn, i, list(versions)) for i, fn in enumerate(frames)
    }

    for key in sorted(all_keys, key=lambda k: (k[0], k[1], k[2])):
        fn, line, kind = key
        if fn not in tables:  # records from helper functions outside the stack
            continue
        per_version = [series.get(key, {}) for series, _ in indexed]
        name_order = [order.get(key, []) for _, order in indexed]
        present = [names for names in name_order if names]
        shared: list[str] = []
        for name in name_order[0] if name_order[0] else (present[0] if present else []):
            if all(name in names for names in present):
                shared.append(name)
        rows: list[tuple[str, list[dict[int, str] | None]]] = []
        for name in shared:
            rows.append((name, [pv.get(name) for pv in per_version]))
        # leftover names vary across versions: pair them by structural role
        # (larger expressions first) and synthesize a wildcard name per slot
        leftovers = [
            sorted(
                (n for n in names if n not in shared),
                key=lambda n: (-len(tokenize(n).tokens), n),
            )
            for names in name_order
        ]
        max_slots = max((len(ns) for ns in leftovers), default=0)
        for slot in range(max_slots):
            variant_names = {ns[slot] for ns in leftovers if len(ns) > slot}
            display = synthesize_name(variant_names)
            cells = [
                pv.get(ns[slot]) if len(ns) > slot else None
                for pv, ns in zip(per_version, leftovers)
            ]
            rows.append((display, cells))

        for display, occurrence_maps in rows:
            row = _pick_occurrence(line, kind, display, occurrence_maps, source_file)
            if row is not None:
                tables[fn].rows.append(row)

    out = []
    for fn in frames:
        table = tables[fn]
        table.rows.sort(key=lambda r: (r.line, r.occurrence, r.kind, r.display_name))
        for i, row in enumerate(table.rows):
            table.rows[i] = merge_adjacent(assign_colors(row))
        out.append(table)
    return out


def _pick_occurrence(
    line: int,
    kind: str,
    display: str,
    occurrence_maps: list[dict[int, str] | None],
    source_file: str,
) -> Row | None:
    maps = [m if m else {} for m in occurrence_maps]
    all_occ = sorted({k for m in maps for k in m})
    if not all_occ:
        return None
    chosen = all_occ[-1]  # final occurrence when no divergence exists
    for occ in all_occ:
        cells = [m.get(occ) for m in maps]
        first = cells[0]
        if any(c != first for c in cells[1:]) or first is None:
            chosen = occ
            break
    values = [m.get(chosen) for m in maps]
    return Row(
        line=line,
        occurrence=chosen,
        occurrence_count=max(all_occ),
        display_name=display,
        kind=kind,
        values=values,
        nav_target=(source_file, line),
    )


def assign_colors(row: Row) -> Row:
    """Color the row: red buggy cell on divergence, green shades per distinct
    patch-only value, neutral elsewhere."""
    values = row.values
    if not values:
        raise ValueError("row has no value columns")
    buggy = values[0]
    patches = values[1:]
    present_patches = [v for v in patches if v is not None]
    diverged = any(v != buggy for v in present_patches) or (
        buggy is None and present_patches
    )
    colors = [NEUTRAL] * len(values)
    if diverged:
        colors[0] = RED
        shade_of: dict[str, int] = {}
        for i, v in enumerate(patches, start=1):
            if v is None or v == buggy:
                continue
            if v not in shade_of:
                shade_of[v] = len(shade_of)
            colors[i] = f"green_{shade_of[v] % GREEN_SHADES + 1}"
    return replace(row, colors=colors)


def merge_adjacent(row: Row) -> Row:
    """Merge maximal runs of adjacent equal rendered values into spans."""
    values = row.values
    spans: list[tuple[int, int]] = []
    start = 0
    for i in range(1, len(values) + 1):
        if i == len(values) or values[i] != values[start]:
            spans.append((start, i - 1))
            start = i
    return replace(row, merge_spans=spans)


# ---------------------------------------------------------------------------
# JSON serialization (consumed by the CLI emitter, the service, and the web UI)
# ---------------------------------------------------------------------------


def table_to_dict(table: ComparisonTable) -> dict:
    return {
        "frame": table.frame,
        "frame_index": table.frame_index,
        "columns": table.columns,
        "rows": [
            {
                "line": r.line,
                "occurrence": r.occurrence,
                "occurrence_count": r.occurrence_count,
                "display_name": r.display_name,
                "kind": r.kind,
                "values": r.values,
                "merge_spans": [list(s) for s in r.merge_spans],
                "colors": r.colors,
                "nav_target": {"file": r.nav_target[0], "line": r.nav_target[1]},
            }
            for r in table.rows
        ],
    }


def tables_to_json(tables: list[ComparisonTable]) -> str:
    return json.dumps([table_to_dict(t) for t in tables], indent=2) + "\n"


def table_from_dict(data: dict) -> ComparisonTable:
    table = ComparisonTable(data["frame"], data["frame_index"], list(data["columns"]))
    for r in data["rows"]:
        table.rows.append(Row(
            line=r["line"],
            occurrence=r["occurrence"],
            occurrence_count=r["occurrence_count"],
            display_name=r["display_name"],
            kind=r["kind"],
            values=list(r["values"]),
            merge_spans=[tuple(s) for s in r["merge_spans"]],
            colors=list(r["colors"]),
            nav_target=(r["nav_target"]["file"], r["nav_target"]["line"]),
        ))
    return table
