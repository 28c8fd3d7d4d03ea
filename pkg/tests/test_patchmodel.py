import random

import pytest

from patchlens.minilang import parse
from patchlens.minilang import test_cases as cases_of
from patchlens.patchmodel import (
    BuggyContext, Patch, PatchParseError, PatchSet, RejectionReport,
    apply_patch, filter_plausible, levenshtein, patches_from_json,
    patches_to_json, tokenize,
)

from helpers import reference_levenshtein

BUGGY_SRC = (
    "fn double_it(n: int) -> int {\n"
    "    let r: int = n + n + 1;\n"
    "    return r;\n"
    "}\n"
    "fn test_doubling() {\n"
    "    assert(double_it(4) == 8, \"doubling\");\n"
    "}\n"
)


def test_tokenize_examples():
    assert tokenize("a = b * c ;").tokens == ("a", "=", "b", "*", "c", ";")
    assert tokenize("let x: float = n1*n2;").tokens == (
        "let", "x", ":", "float", "=", "n1", "*", "n2", ";"
    )
    assert tokenize("").tokens == ()


def test_tokenize_total_on_unknown_chars():
    assert tokenize("a @ b").tokens == ("a", "@", "b")


def test_tokenize_relex_stability():
    rng = random.Random(11)
    pool = ["a", "bb", "+", "*", "(", ")", "12", "3.5", ";", "let", "==", "@"]
    for _ in range(200):
        tokens = tuple(rng.choice(pool) for _ in range(rng.randint(0, 10)))
        joined = " ".join(tokens)
        assert tokenize(joined).tokens == tokens


def test_levenshtein_examples():
    a = tokenize("a = b * c ;")
    b = tokenize("a = b + c ;")
    assert levenshtein(a, b) == 1
    assert levenshtein(a, a) == 0
    x = tokenize("double n1n2prod = n1*n2;")
    y = tokenize("double n1n2prod = n1*( n2+ n2) /2.0;")
    assert levenshtein(x, y) == 6


def _random_seq(rng, max_len=8):
    pool = ["a", "b", "+", "*", "0", "1", "(", ")"]
    return tokenize(" ".join(rng.choice(pool) for _ in range(rng.randint(0, max_len))))


def test_levenshtein_matches_reference_dp():
    rng = random.Random(99)
    for _ in range(1000):
        a, b = _random_seq(rng), _random_seq(rng)
        assert levenshtein(a, b) == reference_levenshtein(a.tokens, b.tokens)


def test_levenshtein_metric_axioms():
    rng = random.Random(123)
    for _ in range(10_000):
        a, b, c = _random_seq(rng, 6), _random_seq(rng, 6), _random_seq(rng, 6)
        dab, dbc, dac = levenshtein(a, b), levenshtein(b, c), levenshtein(a, c)
        assert dab >= 0
        assert (dab == 0) == (a.tokens == b.tokens)
        assert dab == levenshtein(b, a)
        assert dac <= dab + dbc


def test_apply_patch_replaces_only_target_line():
    program = parse(BUGGY_SRC)
    patch = Patch("p1", 2, "    let r: int = n + n;", None, 1)
    patched = apply_patch(program, patch)
    old_lines = program.source_text.split("\n")
    new_lines = patched.source_text.split("\n")
    # reading the target line back gives the replacement verbatim
    assert new_lines[1] == patch.replacement_text
    assert new_lines[:1] == old_lines[:1] and new_lines[2:] == old_lines[2:]


def test_identity_patch_is_equivalent():
    program = parse(BUGGY_SRC)
    patch = Patch("p1", 2, "    let r: int = n + n + 1;", None, 1)
    patched = apply_patch(program, patch)
    assert patched.source_text == program.source_text


def test_patch_with_undefined_name_rejected():
    program = parse(BUGGY_SRC)
    with pytest.raises(PatchParseError):
        apply_patch(program, Patch("p1", 2, "let r: int = undefined_var;", None, 1))


def test_multiline_replacement_rejected():
    program = parse(BUGGY_SRC)
    with pytest.raises(PatchParseError):
        apply_patch(program, Patch("p1", 2, "let r: int = 1;\nlet q: int = 2;", None, 1))


def test_filter_plausible():
    program = parse(BUGGY_SRC)
    tests = cases_of(program)
    candidates = PatchSet(tuple([
        Patch("keep", 2, "let r: int = n + n;", None, 1),       # correct
        Patch("same", 2, "let r: int = n + n + 1;", None, 2),   # still buggy
        Patch("boom", 2, "let r: int = n / 0;", None, 3),       # traps
        Patch("bad", 2, "let r: int = ghost;", None, 4),        # does not resolve
        Patch("alt", 2, "let r: int = n * 2;", None, 5),        # coincidental
    ]))
    report = RejectionReport()
    kept = filter_plausible(program, candidates, tests, report)
    assert [p.id for p in kept] == ["keep", "alt"]
    assert dict(report.rejected).keys() == {"same", "boom", "bad"}


def test_filter_output_is_subsequence():
    program = parse(BUGGY_SRC)
    tests = cases_of(program)
    candidates = PatchSet(tuple(
        Patch(f"c{i}", 2, text, None, i + 1)
        for i, text in enumerate([
            "let r: int = n + n;",
            "let r: int = n * 2;",
            "let r: int = 2 * n;",
            "let r: int = n + n + 0;",
        ])
    ))
    kept = filter_plausible(program, candidates, tests)
    ids = [p.id for p in candidates]
    kept_ids = [p.id for p in kept]
    positions = [ids.index(k) for k in kept_ids]
    assert positions == sorted(positions)


def test_buggy_context_matches_source_line():
    program = parse(BUGGY_SRC)
    ctx = BuggyContext.of(program, 2)
    assert ctx.buggy_statement_text == "    let r: int = n + n + 1;"


def test_patchset_invariants():
    with pytest.raises(ValueError):
        PatchSet((Patch("a", 1, "x = 1;", None, 1), Patch("a", 1, "x = 2;", None, 2)))
    with pytest.raises(ValueError):
        PatchSet((Patch("a", 1, "x = 1;", None, 1), Patch("b", 1, "x = 2;", None, 3)))


def test_patches_json_roundtrip():
    patches = PatchSet(tuple(
        Patch(f"p{i}", 7, f"let x: int = {i};", 0.5 - i * 0.1, i)
        for i in range(1, 4)
    ))
    again = patches_from_json(patches_to_json(patches))
    assert again == patches
