#!/usr/bin/env python3
"""Build the bundled bug corpus.

Each bug ships as source + tests + a frozen patches.json. Patches come from
the mutation generator plus per-bug extra candidates (standing in for the
diversity of a learned APR tool's beam), filtered for plausibility, ranked by
the seeded pseudo-score, with the correct patch forced to original rank >= 3
so that ranking improvements are measurable.

Run from the repository root:  python tools/build_corpus.py [--corpus corpus]
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from patchlens.bench import GenConfig, combine_sources, generate_patches, load_bug
from patchlens.minilang import parse, test_cases
from patchlens.minilang.parser import parse_statement_text
from patchlens.minilang.nodes import render_stmt
from patchlens.patchmodel import Patch, PatchSet, patches_to_json

MIN_RANK_OF_CORRECT = 3
MIN_PLAUSIBLE = 8


@dataclass
class BugSpec:
    id: str
    root_cause: str
    buggy_line: int
    correct: str
    extras: tuple[str, ...]
    seed: int
    program: str
    tests: str


BUGS: list[BugSpec] = [
    BugSpec(
        id="bug01_mannwhitney_overflow",
        root_cause="integer overflow",
        buggy_line=19,
        correct="let n1n2prod: float = n1 * n2;",
        extras=(
            "let n1n2prod: float = n1 * (n2 + n2) / 2.0;",
            "let n1n2prod: float = n2 * (n1 + n2 + 1) / 2.0;",
            "let n1n2prod: float = n1 * (n1 + 2 + 1) / 2.0;",
            "let n1n2prod: int = 2 * (n1 + n2 + 1);",
            "let n1n2prod: float = n1 * n2 * 1.0;",
            "let n1n2prod: float = n1 * n2 / 1.0;",
            "let n1n2prod: float = n2 * n1;",
            "let n1n2prod: float = abs(n1 * n2);",
        ),
        seed=30,
        program="""\
// Mann-Whitney U test with the asymptotic p-value approximation.
fn exp_neg(t: float) -> float {
    let base: float = 1.0 + t / 1024.0;
    let acc: float = base;
    let k: int = 0;
    while (k < 10) {
        acc = acc * acc;
        k = k + 1;
    }
    return 1.0 / acc;
}

fn gaussian_tail(z: float) -> float {
    let t: float = z * z / 2.0;
    return exp_neg(t);
}

fn calculate_asymptotic_p_value(u_min: float, n1: int, n2: int) -> float {
    let n1n2prod: int = n1 * n2;
    let e_u: float = n1n2prod / 2.0;
    let var_u: float = n1n2prod * (n1 + n2 + 1) / 12.0;
    let z: float = (u_min - e_u) / sqrt(var_u);
    let p: float = gaussian_tail(z);
    return p;
}

fn mann_whitney_u_test(x: array<int>, y: array<int>) -> float {
    let n1: int = len(x);
    let n2: int = len(y);
    let u1: float = 0.0;
    let i: int = 0;
    let j: int = 0;
    while (i < n1) {
        while (j < n2 && y[j] < x[i]) {
            j = j + 1;
        }
        u1 = u1 + j;
        i = i + 1;
    }
    let u2: float = n1 * n2 - u1;
    let u_min: float = u1;
    if (u2 < u1) {
        u_min = u2;
    }
    return calculate_asymptotic_p_value(u_min, len(x), len(y));
}
""",
        tests="""\
fn make_range(start: int, count: int) -> array<int> {
    let out: array<int> = [];
    let i: int = 0;
    while (i < count) {
        out = out + [start + i];
        i = i + 1;
    }
    return out;
}

fn test_big_data_set() {
    let xs: array<int> = make_range(1, 1500);
    let ys: array<int> = make_range(10000, 1500);
    let p: float = mann_whitney_u_test(xs, ys);
    assert(p <= 0.1, "p-value exceeds the expected threshold");
}

fn test_small_balanced() {
    let xs: array<int> = [1, 3, 5, 7];
    let ys: array<int> = [2, 4, 6, 8];
    let p: float = mann_whitney_u_test(xs, ys);
    assert(p > 0.5, "balanced samples must not reject");
}
""",
    ),
    BugSpec(
        id="bug02_gcd_overflow",
        root_cause="integer overflow",
        buggy_line=5,
        correct="if (u == 0 || v == 0) {",
        extras=(
            "if (v == 0 || u == 0) {",
            "if (0 == u || v == 0) {",
            "if (u == 0 || 0 == v) {",
        ),
        seed=94,
        program="""\
// Greatest common divisor with an overflow-prone zero test.
fn gcd(p: int, q: int) -> int {
    let u: int = p;
    let v: int = q;
    if (u * v == 0) {
        return abs(u) + abs(v);
    }
    let a: int = abs(u);
    let b: int = abs(v);
    while (b > 0) {
        let t: int = a % b;
        a = b;
        b = t;
    }
    return a;
}
""",
        tests="""\
fn test_gcd_overflow() {
    assert(gcd(1073741824, 4) == 4, "the product must not wrap to zero");
}

fn test_gcd_zero() {
    assert(gcd(0, 5) == 5, "gcd(0, v) is v");
    assert(gcd(7, 0) == 7, "gcd(u, 0) is u");
}

fn test_gcd_basic() {
    assert(gcd(12, 18) == 6, "gcd(12, 18)");
    assert(gcd(35, 64) == 1, "coprime inputs");
}
""",
    ),
    BugSpec(
        id="bug03_codepoint_argument",
        root_cause="wrong argument",
        buggy_line=17,
        correct="pos = pos + char_count(code_point_at(cs, pt));",
        extras=(
            "pos = char_count(code_point_at(cs, pt)) + pos;",
            "pos = pos + char_count(cs[pt]);",
            "pos = pos + char_count(code_point_at(cs, pt + 0));",
            "pos = pos + char_count(code_point_at(cs, 0 + pt));",
            "pos = pos + char_count(code_point_at(cs, pt * 1));",
            "pos = pos + abs(char_count(code_point_at(cs, pt)));",
            "pos = pos + char_count(code_point_at(cs, pt)) * 1;",
        ),
        seed=6,
        program="""\
// Scan a code-point sequence, advancing by per-character width.
fn code_point_at(cs: array<int>, i: int) -> int {
    return cs[i];
}

fn char_count(cp: int) -> int {
    if (cp >= 65536) {
        return 2;
    }
    return 1;
}

fn advance_over(cs: array<int>, consumed: int) -> int {
    let pos: int = 0;
    let pt: int = 0;
    while (pt < consumed) {
        pos = pos + char_count(code_point_at(cs, pos));
        pt = pt + 1;
    }
    return pos;
}
""",
        tests="""\
fn test_supplementary_advance() {
    let cs: array<int> = [97, 98, 70000, 99];
    assert(advance_over(cs, 4) == 5, "four code points, one of them wide");
}

fn test_bmp_only() {
    let cs: array<int> = [104, 105, 33];
    assert(advance_over(cs, 3) == 3, "narrow characters advance one each");
}
""",
    ),
    BugSpec(
        id="bug04_range_condition",
        root_cause="wrong condition",
        buggy_line=3,
        correct="if (low > high) {",
        extras=(
            "if (high < low) {",
            "if (!(low <= high)) {",
            "if (low - 1 >= high) {",
            "if (high - low < 0) {",
            "if (low - high > 0) {",
            "if (0 < low - high) {",
        ),
        seed=9,
        program="""\
// Count series values inside a closed value range.
fn count_in_range(values: array<int>, low: int, high: int) -> int {
    if (low >= high) {
        return 0 - 1;
    }
    let n: int = 0;
    let i: int = 0;
    while (i < len(values)) {
        if (values[i] >= low && values[i] <= high) {
            n = n + 1;
        }
        i = i + 1;
    }
    return n;
}
""",
        tests="""\
fn test_single_point_range() {
    assert(count_in_range([1, 5, 7], 5, 5) == 1, "a [v, v] range is valid");
}

fn test_inverted_range_rejected() {
    assert(count_in_range([1, 5, 7], 9, 2) == 0 - 1, "inverted bounds are invalid");
}

fn test_plain_range() {
    assert(count_in_range([1, 5, 7, 10], 2, 9) == 2, "two values inside");
}
""",
    ),
    BugSpec(
        id="bug05_midpoint_overflow",
        root_cause="integer overflow",
        buggy_line=3,
        correct="return lo + (hi - lo) / 2;",
        extras=(
            "return hi + (lo - hi) / 2;",
            "return hi - (hi - lo) / 2;",
            "return lo / 2 + hi / 2;",
            "return lo + (hi - lo) / 2 + 0;",
            "return (hi - lo) / 2 + lo;",
            "return lo + (hi - lo + 1) / 2;",
            "return hi - (hi - lo + 1) / 2;",
        ),
        seed=5,
        program="""\
// Midpoint of two indices.
fn midpoint(lo: int, hi: int) -> int {
    return (lo + hi) / 2;
}
""",
        tests="""\
fn test_midpoint_large() {
    assert(midpoint(2000000000, 2000000000) == 2000000000, "large equal bounds");
}

fn test_midpoint_small() {
    assert(midpoint(2, 4) == 3, "midpoint of 2 and 4");
}

fn test_midpoint_zero() {
    assert(midpoint(0, 0) == 0, "degenerate range");
}
""",
    ),
    BugSpec(
        id="bug06_nearest_argument",
        root_cause="wrong argument",
        buggy_line=15,
        correct="let d: float = dist(xs[i], ys[i], 0.0, 0.0);",
        extras=(
            "let d: float = dist(xs[i], ys[i], 0.0, ys[i] / 2.0);",
            "let d: float = dist(xs[i], ys[i], 0.0, ys[i] / 3.0);",
            "let d: float = dist(xs[i], ys[i], 0.0, ys[i] * 0.5);",
            "let d: float = dist(ys[i], xs[i], 0.0, 0.0);",
            "let d: float = dist(xs[i], ys[i], 0.0 * 1.0, 0.0);",
            "let d: float = dist(xs[i], ys[i], 0.0, 0.0 + 0.0);",
            "let d: float = sqrt(sq(xs[i]) + sq(ys[i]));",
        ),
        seed=41,
        program="""\
// Index of the point nearest the origin.
fn sq(x: float) -> float {
    return x * x;
}

fn dist(x1: float, y1: float, x2: float, y2: float) -> float {
    return sqrt(sq(x2 - x1) + sq(y2 - y1));
}

fn nearest_to_origin(xs: array<float>, ys: array<float>) -> int {
    let best: int = 0 - 1;
    let best_d: float = 1000000000.0;
    let i: int = 0;
    while (i < len(xs)) {
        let d: float = dist(xs[i], ys[i], 0.0, ys[i]);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
        i = i + 1;
    }
    return best;
}
""",
        tests="""\
fn test_y_displacement_counts() {
    let xs: array<float> = [3.0, 1.0];
    let ys: array<float> = [0.0, 9.0];
    assert(nearest_to_origin(xs, ys) == 0, "the second point is far up the y axis");
}

fn test_on_axis() {
    let xs: array<float> = [5.0, 2.0];
    let ys: array<float> = [0.0, 0.0];
    assert(nearest_to_origin(xs, ys) == 1, "axis points compare by x");
}
""",
    ),
    BugSpec(
        id="bug07_sumfirst_condition",
        root_cause="wrong condition",
        buggy_line=5,
        correct="while (i < count) {",
        extras=(
            "while (i + 1 <= count) {",
            "while (count - i > 0) {",
            "while (i - count < 0) {",
            "while (count > i) {",
            "while (!(i >= count)) {",
        ),
        seed=7,
        program="""\
// Sum of the first count values.
fn sum_first(values: array<int>, count: int) -> int {
    let total: int = 0;
    let i: int = 0;
    while (i <= count) {
        total = total + values[i];
        i = i + 1;
    }
    return total;
}
""",
        tests="""\
fn test_partial_sum() {
    assert(sum_first([1, 2, 3], 2) == 3, "first two values");
}

fn test_full_sum() {
    assert(sum_first([4, 6], 2) == 10, "all values");
}
""",
    ),
    BugSpec(
        id="bug08_product_overflow",
        root_cause="integer overflow",
        buggy_line=3,
        correct="let acc: float = 1;",
        extras=(
            "let acc: float = 1.0;",
            "let acc: float = 1 * 1;",
            "let acc: float = 0 + 1;",
            "let acc: float = 1 / 1;",
            "let acc: float = 2 - 1;",
            "let acc: float = abs(1);",
            "let acc: float = 1 + 0;",
        ),
        seed=8,
        program="""\
// Product of k consecutive descending integers, as a float.
fn falling_product(n: int, k: int) -> float {
    let acc: int = 1;
    let i: int = 0;
    while (i < k) {
        acc = acc * (n - i);
        i = i + 1;
    }
    return acc * 1.0;
}
""",
        tests="""\
fn test_big_product() {
    assert(falling_product(100, 6) == 858277728000.0, "100 falling 6");
}

fn test_small_product() {
    assert(falling_product(5, 2) == 20.0, "5 falling 2");
}
""",
    ),
    BugSpec(
        id="bug09_reliability_condition",
        root_cause="wrong condition",
        buggy_line=4,
        correct="return ratio >= 0.5;",
        extras=(
            "return ratio >= 0.5 * 1.0;",
            "return ratio * 1.0 >= 0.5;",
            "return ratio >= 0.5 + 0.0;",
            "return ratio + 0.0 >= 0.5;",
            "return 0.5 <= ratio;",
            "return ratio - 0.5 >= 0.0;",
            "return !(ratio < 0.5);",
        ),
        seed=90,
        program="""\
// A sensor is reliable when at least half of its probes hit.
fn is_reliable(hits: int, total: int) -> bool {
    let ratio: float = hits * 1.0 / total;
    return ratio > 0.5;
}
""",
        tests="""\
fn test_exactly_half() {
    assert(is_reliable(1, 2), "half of the probes hitting is reliable");
}

fn test_low_ratio() {
    assert(!is_reliable(2, 5), "two of five is unreliable");
}

fn test_high_ratio() {
    assert(is_reliable(3, 4), "three of four is reliable");
}
""",
    ),
    BugSpec(
        id="bug10_lerp_argument",
        root_cause="wrong argument",
        buggy_line=7,
        correct="return lerp(a, b, 0.5);",
        extras=(
            "return lerp(b, a, 0.5);",
            "return (a + b) / 2.0;",
            "return (a + b) * 0.5;",
            "return a + (b - a) / 2.0;",
            "return a * 0.5 + b * 0.5;",
            "return lerp(a, b, 1.0 - 0.5);",
            "return lerp(a, b, 0.5 * 1.0);",
        ),
        seed=10,
        program="""\
// Linear interpolation helpers.
fn lerp(a: float, b: float, t: float) -> float {
    return a + (b - a) * t;
}

fn sample_mid(a: float, b: float) -> float {
    return lerp(a, a, 0.5);
}
""",
        tests="""\
fn test_mid_of_span() {
    assert(sample_mid(0.0, 10.0) == 5.0, "midpoint of 0 and 10");
}

fn test_degenerate_span() {
    assert(sample_mid(3.0, 3.0) == 3.0, "equal endpoints");
}

fn test_symmetric_span() {
    assert(sample_mid(0.0 - 2.0, 2.0) == 0.0, "symmetric endpoints");
}
""",
    ),
    BugSpec(
        id="bug11_area_overflow",
        root_cause="integer overflow",
        buggy_line=6,
        correct="let area: float = ws[i] * 1.0 * hs[i];",
        extras=(
            "let area: float = 1.0 * ws[i] * hs[i];",
            "let area: float = ws[i] * (hs[i] * 1.0);",
            "let area: float = ws[i] * (1.0 * hs[i]);",
            "let area: float = ws[i] * (hs[i] / 1.0);",
            "let area: float = ws[i] / 1.0 * hs[i];",
            "let area: float = abs(ws[i] * 1.0) * hs[i];",
            "let area: float = ws[i] * abs(hs[i] * 1.0);",
        ),
        seed=11,
        program="""\
// Total area of a batch of rectangles.
fn rect_area_sum(ws: array<int>, hs: array<int>) -> float {
    let total: float = 0.0;
    let i: int = 0;
    while (i < len(ws)) {
        let area: int = ws[i] * hs[i];
        total = total + area;
        i = i + 1;
    }
    return total;
}
""",
        tests="""\
fn test_large_rectangle() {
    assert(rect_area_sum([100000], [100000]) == 10000000000.0, "a 1e5 square");
}

fn test_small_batch() {
    assert(rect_area_sum([3, 2], [4, 5]) == 22.0, "two small rectangles");
}
""",
    ),
    BugSpec(
        id="bug12_weight_argument",
        root_cause="wrong argument",
        buggy_line=6,
        correct="total = total + values[i] * weights[i];",
        extras=(
            "total = total + weights[i] * values[i];",
            "total = values[i] * weights[i] + total;",
            "total = total + values[i] * weights[i] * 1;",
            "total = total + values[i] * weights[i] + 0;",
            "total = total + values[0] * weights[i];",
            "total = total + weights[i] * values[0];",
            "total = total + values[0] * weights[i] * 1;",
        ),
        seed=12,
        program="""\
// Dot product of values with weights.
fn weighted_total(values: array<int>, weights: array<int>) -> int {
    let total: int = 0;
    let i: int = 0;
    while (i < len(values)) {
        total = total + values[i] * weights[0];
        i = i + 1;
    }
    return total;
}
""",
        tests="""\
fn test_distinct_weights() {
    assert(weighted_total([2, 2], [3, 5]) == 16, "2*3 + 2*5");
}

fn test_round_trip() {
    assert(weighted_total([3, 3], [2, 2]) == 12, "uniform batch");
}
""",
    ),
]


def force_rank_floor(patches: PatchSet, correct_text: str, floor: int) -> PatchSet:
    """Move the correct patch down to at least the given original rank by
    swapping its position in the ranked order."""
    ordered = sorted(patches, key=lambda p: p.original_rank)
    texts = [p.replacement_text for p in ordered]
    scores = [p.apr_score for p in ordered]
    idx = texts.index(correct_text)
    if idx < floor - 1:
        texts[idx], texts[floor - 1] = texts[floor - 1], texts[idx]
    target_line = ordered[0].target_line
    return PatchSet(tuple(
        Patch(f"p{rank}", target_line, text, scores[rank - 1], rank)
        for rank, text in enumerate(texts, start=1)
    ))


def build_bug(spec: BugSpec, out_root: Path) -> dict:
    program = parse(combine_sources(spec.program, spec.tests))
    tests = test_cases(program)
    config = GenConfig(extra_candidates=(spec.correct, *spec.extras))
    patches = generate_patches(program, spec.buggy_line, tests, config, spec.seed)

    normalized_correct = render_stmt(parse_statement_text(spec.correct))
    texts = [p.replacement_text for p in patches]
    if normalized_correct not in texts:
        raise SystemExit(f"{spec.id}: the correct patch is not plausible")
    if len(patches) < MIN_PLAUSIBLE:
        raise SystemExit(f"{spec.id}: only {len(patches)} plausible patches: {texts}")

    patches = force_rank_floor(patches, normalized_correct, MIN_RANK_OF_CORRECT)
    correct_id = next(
        p.id for p in patches if p.replacement_text == normalized_correct
    )

    bug_dir = out_root / spec.id
    bug_dir.mkdir(parents=True, exist_ok=True)
    (bug_dir / "program.mini").write_text(spec.program, encoding="utf-8")
    (bug_dir / "tests.mini").write_text(spec.tests, encoding="utf-8")
    (bug_dir / "patches.json").write_text(patches_to_json(patches), encoding="utf-8")
    meta = {
        "buggy_line": spec.buggy_line,
        "correct_patch_id": correct_id,
        "root_cause": spec.root_cause,
        "gen": {"seed": spec.seed, "extra_candidates": list(config.extra_candidates)},
    }
    (bug_dir / "meta.json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")

    loaded = load_bug(bug_dir)  # re-validate every corpus invariant
    return {
        "id": spec.id,
        "plausible": len(loaded.patches),
        "correct_rank": loaded.patches.by_id(correct_id).original_rank,
        "root_cause": spec.root_cause,
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--corpus", default="corpus", type=Path)
    args = ap.parse_args()
    rows = []
    for spec in BUGS:
        row = build_bug(spec, args.corpus)
        rows.append(row)
        print(f"{row['id']}: {row['plausible']} plausible, "
              f"correct at rank {row['correct_rank']} ({row['root_cause']})")
    print(f"built {len(rows)} bugs")


if __name__ == "__main__":
    main()
