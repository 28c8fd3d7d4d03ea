import json
import shutil

import pytest

from patchlens.bench import (
    BugCase, CorpusError, GenConfig, NoPlausiblePatch, evaluate_ranking,
    generate_patches, load_bug, load_corpus, mutate_statement,
)
from patchlens.minilang import parse
from patchlens.minilang import test_cases as cases_of
from patchlens.minilang.parser import parse_statement_text
from patchlens.patchmodel import Patch, PatchSet, filter_plausible

from helpers import CORPUS


def test_bundled_corpus_loads():
    corpus = load_corpus(CORPUS)
    assert len(corpus) >= 10
    causes = {bug.root_cause for bug in corpus}
    assert {"integer overflow", "wrong argument", "wrong condition"} <= causes
    for bug in corpus:
        assert len(bug.patches) >= 8
        assert bug.patches.by_id(bug.correct_patch_id).original_rank >= 3


def test_empty_corpus_directory(tmp_path):
    assert load_corpus(tmp_path) == []


def test_corpus_error_on_implausible_correct_patch(tmp_path):
    src = CORPUS / "bug05_midpoint_overflow"
    dst = tmp_path / "broken_bug"
    shutil.copytree(src, dst)
    patches = json.loads((dst / "patches.json").read_text())
    meta = json.loads((dst / "meta.json").read_text())
    for p in patches:
        if p["id"] == meta["correct_patch_id"]:
            p["replacement"] = "return (lo + hi) / 2;"  # reintroduce the bug
    (dst / "patches.json").write_text(json.dumps(patches))
    with pytest.raises(CorpusError, match="plausible"):
        load_bug(dst)


def test_corpus_error_on_green_buggy_program(tmp_path):
    src = CORPUS / "bug05_midpoint_overflow"
    dst = tmp_path / "green_bug"
    shutil.copytree(src, dst)
    (dst / "tests.mini").write_text(
        "fn test_midpoint_small() {\n    assert(midpoint(2, 4) == 3, \"m\");\n}\n"
    )
    with pytest.raises(CorpusError, match="passes every test"):
        load_bug(dst)


SIMPLE = (
    "fn f(n1: int, n2: int) -> float {\n"
    "    let p: int = n1 * n2;\n"
    "    return p;\n"
    "}\n"
    "fn test_f() {\n"
    "    assert(f(3, 4) == 12, \"twelve\");\n"
    "}\n"
)


def test_mutation_operators_cover_spec_examples():
    stmt = parse_statement_text("let p: int = n1 * n2;")
    variants = mutate_statement(stmt, GenConfig())
    assert "let p: float = n1 * n2;" in variants  # declared-type change
    assert "let p: int = n1 + n2;" in variants  # operator replacement
    assert "let p: int = n2 * n1;" in variants  # operand swap


def test_mutation_condition_negation_and_off_by_one():
    stmt = parse_statement_text("while (i < n) {")
    variants = mutate_statement(stmt, GenConfig())
    assert "while (!(i < n)) {" in variants
    assert "while (i < n + 1) {" in variants
    assert "while (i < n - 1) {" in variants


def test_mutation_literal_perturbation():
    stmt = parse_statement_text("let x: int = 8;")
    variants = mutate_statement(stmt, GenConfig())
    for text in ("let x: int = 9;", "let x: int = 7;", "let x: int = 16;", "let x: int = 4;"):
        assert text in variants


def test_generate_patches_deterministic():
    program = parse(SIMPLE)
    tests = cases_of(program)
    config = GenConfig(extra_candidates=("let p: int = 12;",))
    first = generate_patches(program, 2, tests, config, seed=42)
    second = generate_patches(program, 2, tests, config, seed=42)
    assert first == second
    other_seed = generate_patches(program, 2, tests, config, seed=43)
    assert {p.replacement_text for p in other_seed} == {p.replacement_text for p in first}


def test_generate_patches_filters_implausible():
    program = parse(SIMPLE)
    patches = generate_patches(program, 2, cases_of(program), GenConfig(), seed=1)
    texts = {p.replacement_text for p in patches}
    assert "let p: float = n1 * n2;" in texts  # 12.0 == 12 under float compare
    assert "let p: int = n1 + n2;" not in texts  # 7 != 12
    combined_src = program
    for p in patches:
        from patchlens.patchmodel import apply_patch, RejectionReport

        patched = apply_patch(combined_src, p)
        rebound = [
            type(t)(t.name, patched.functions_by_name[t.name]) for t in cases_of(patched)
        ]
        assert all(_passes(patched, t) for t in rebound)


def _passes(program, test):
    from patchlens.minilang import run_test

    return run_test(program, test).passed


def test_generate_patches_no_plausible(tmp_path):
    src = (
        "fn f(a: int) -> int {\n"
        "    let x: int = a;\n"
        "    return x;\n"
        "}\n"
        "fn test_f() {\n"
        "    assert(f(5) == 5, \"identity\");\n"
        "    assert(f(7) == 7, \"identity again\");\n"
        "}\n"
    )
    program = parse(src)
    with pytest.raises(NoPlausiblePatch):
        generate_patches(program, 2, cases_of(program), GenConfig(), seed=0)


def test_motivating_generation_contains_fix_and_variants():
    bug_dir = CORPUS / "bug01_mannwhitney_overflow"
    meta = json.loads((bug_dir / "meta.json").read_text())
    from patchlens.bench import combine_sources

    program = parse(combine_sources(
        (bug_dir / "program.mini").read_text(),
        (bug_dir / "tests.mini").read_text(),
    ))
    config = GenConfig(extra_candidates=tuple(meta["gen"]["extra_candidates"]))
    patches = generate_patches(
        program, meta["buggy_line"], cases_of(program), config, meta["gen"]["seed"]
    )
    texts = {p.replacement_text for p in patches}
    assert "let n1n2prod: float = n1 * n2;" in texts  # the type-change fix
    assert len(texts) - 1 >= 5  # at least five coincidental variants


def test_evaluate_ranking_single_bug_original_mean():
    bug = load_bug(CORPUS / "bug05_midpoint_overflow")
    report = evaluate_ranking([bug])
    assert report.means["original"] == float(
        bug.patches.by_id(bug.correct_patch_id).original_rank
    )


def test_evaluate_ranking_rep_rank_bounded_by_cluster_count():
    from patchlens.cluster import sample

    for bug in load_corpus(CORPUS):
        ranked, clusters = sample(bug.patches, bug.buggy_context())
        assert len(clusters) <= 5
        report = evaluate_ranking([bug])
        row = report.per_bug[0]
        if bug.correct_patch_id in ranked.ids():
            assert row["ifix"] <= len(clusters)


def test_evaluate_ranking_independent_of_corpus_order():
    corpus = load_corpus(CORPUS)
    a = evaluate_ranking(corpus)
    b = evaluate_ranking(list(reversed(corpus)))
    assert a.per_bug == b.per_bug
    assert a.means == b.means


def test_report_formats():
    corpus = load_corpus(CORPUS)[:3]
    report = evaluate_ranking(corpus)
    data = json.loads(report.to_json())
    assert set(data["means"]) == {"original", "similarity_only", "ifix"}
    text = report.to_text()
    assert "MEAN" in text
    assert text.count("\n") == len(corpus) + 2


def test_constructed_corpus_gives_ifix_mean_one():
    """When every correct patch is its cluster's representative and the
    closest to the buggy statement, the clustering strategy ranks it first."""
    program = parse(
        "fn f(a: int, b: int) -> int {\n"
        "    let x: int = a - b;\n"
        "    return x;\n"
        "}\n"
        "fn test_f() {\n"
        "    assert(f(5, 2) == 7, \"sum\");\n"
        "}\n"
    )
    texts = [
        "let x: int = a + b;",        # correct: distance 1, center of its family
        "let x: int = a + b + 0;",
        "let x: int = a + b * 1;",
        "let x: int = b + a;",
        "let x: int = 0 + a + b;",
        "let x: int = 7;",            # far-away family
        "let x: int = 7 * 1;",
        "let x: int = 7 + 0;",
    ]
    patches = PatchSet(tuple(
        Patch(f"p{i+1}", 2, t, None, [3, 1, 2, 4, 5, 6, 7, 8][i])
        for i, t in enumerate(texts)
    ))
    plausible = filter_plausible(program, patches, cases_of(program))
    assert len(plausible) == len(patches)
    bug = BugCase("constructed", program, cases_of(program), 2, patches, "p1")
    report = evaluate_ranking([bug])
    assert report.per_bug[0]["ifix"] == 1
    assert report.means["ifix"] == 1.0
    assert report.per_bug[0]["original"] == 3


def test_ifix_rank_flat_enumeration_oracle():
    """A patch's rank equals its position in the flat listing: level-one
    representatives first, then the explored cluster's members in order."""
    from patchlens.bench import ifix_rank
    from patchlens.cluster import sample, within_cluster_order

    for bug in load_corpus(CORPUS):
        ranked, clusters = sample(bug.patches, bug.buggy_context())
        reps = ranked.ids()
        for patch in bug.patches:
            rank = ifix_rank(bug, patch.id)
            if patch.id in reps:
                assert rank == reps.index(patch.id) + 1
            else:
                home = next(c for c in clusters if patch.id in c.members)
                flat = reps + within_cluster_order(home, bug.buggy_context(), bug.patches)
                assert rank == len(reps) + flat[len(reps):].index(patch.id) + 1
