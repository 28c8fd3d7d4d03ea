"""Bug corpus loading, mutation-based patch generation, and the ranking
evaluation harness.

Corpus layout, one directory per bug:
    <bug-id>/program.mini   buggy program
    <bug-id>/tests.mini     test functions (test_*) and their helpers
    <bug-id>/patches.json   plausible patches: id, target_line, replacement,
                            apr_score, original_rank
    <bug-id>/meta.json      buggy_line, correct_patch_id, root_cause

The generator stands in for an APR tool: it mutates the buggy statement,
keeps the candidates that pass every test, and ranks them by a seeded
pseudo-score. Identical seeds give identical patch sets.
"""

from __future__ import annotations

import copy
import json
import random
from dataclasses import dataclass, field, replace as dc_replace
from pathlib import Path

from .cluster import ClusterPath, hierarchical_rank, sample, within_cluster_order
from .minilang import ParseError, SourceProgram, TestCase, parse, run_test, test_cases
from .minilang.nodes import (
    Binary, Expr, For, If, IntLit, Let, Stmt, TypeAnn, Unary, While, render_stmt,
)
from .minilang.parser import parse_statement_text
from .patchmodel import (
    BuggyContext, Patch, PatchSet, RejectionReport, filter_plausible,
    load_patches, token_distance,
)


class CorpusError(Exception):
    def __init__(self, bug_id: str, message: str):
        super().__init__(f"{bug_id}: {message}")
        self.bug_id = bug_id


class NoPlausiblePatch(Exception):
    """Every candidate was rejected by the plausibility filter."""


@dataclass
class BugCase:
    id: str
    program: SourceProgram  # program.mini and tests.mini parsed together
    tests: list[TestCase]
    buggy_line: int
    patches: PatchSet
    correct_patch_id: str
    root_cause: str = ""
    program_lines: int = 0  # lines belonging to program.mini

    def buggy_context(self) -> BuggyContext:
        return BuggyContext.of(self.program, self.buggy_line)


# ---------------------------------------------------------------------------
# Corpus loading
# ---------------------------------------------------------------------------


def combine_sources(program_text: str, tests_text: str) -> str:
    """Concatenate tests after the program so program line numbers hold."""
    if not program_text.endswith("\n"):
        program_text += "\n"
    return program_text + tests_text


def load_bug(bug_dir: Path, patches_path: Path | None = None) -> BugCase:
    """Load one bug directory; patches_path overrides its patches.json."""
    bug_dir = Path(bug_dir)
    bug_id = bug_dir.name
    try:
        program_text = (bug_dir / "program.mini").read_text(encoding="utf-8")
        tests_text = (bug_dir / "tests.mini").read_text(encoding="utf-8")
        meta = json.loads((bug_dir / "meta.json").read_text(encoding="utf-8"))
        patches = load_patches(patches_path or bug_dir / "patches.json")
    except FileNotFoundError as e:
        raise CorpusError(bug_id, f"missing corpus file: {e.filename}") from e
    except (ValueError, KeyError) as e:
        raise CorpusError(bug_id, f"malformed corpus file: {e}") from e

    try:
        program = parse(combine_sources(program_text, tests_text))
    except ParseError as e:
        raise CorpusError(bug_id, f"program does not parse: {e}") from e

    tests = test_cases(program)
    if not tests:
        raise CorpusError(bug_id, "no test_* functions found")
    buggy_line = int(meta["buggy_line"])
    if buggy_line not in program.line_index:
        raise CorpusError(bug_id, f"buggy_line {buggy_line} is not a statement")
    correct_id = str(meta["correct_patch_id"])
    if patches_path is None:
        try:
            patches.by_id(correct_id)
        except KeyError:
            raise CorpusError(bug_id, f"correct patch {correct_id!r} not in patches.json")
    else:
        # with an override patch set, ids may differ: match the bundled
        # correct patch by replacement text
        bundled = load_patches(bug_dir / "patches.json")
        correct_text = bundled.by_id(correct_id).replacement_text
        match = [p.id for p in patches if p.replacement_text == correct_text]
        if not match:
            raise CorpusError(bug_id, "the override patch set lacks the correct patch")
        correct_id = match[0]

    if not any(not run_test(program, t).passed for t in tests):
        raise CorpusError(bug_id, "the buggy program passes every test")

    report = RejectionReport()
    plausible = filter_plausible(program, patches, tests, report)
    if len(plausible) != len(patches):
        detail = "; ".join(f"{pid}: {why}" for pid, why in report.rejected)
        raise CorpusError(bug_id, f"patches are not all plausible: {detail}")

    return BugCase(
        bug_id, program, tests, buggy_line, patches, correct_id,
        str(meta.get("root_cause", "")), program_text.count("\n"),
    )


def load_corpus(path: Path) -> list[BugCase]:
    """Load every bug directory under path, in name order."""
    root = Path(path)
    if not root.is_dir():
        raise CorpusError(str(path), "corpus directory does not exist")
    bugs = []
    for entry in sorted(root.iterdir()):
        if entry.is_dir() and (entry / "meta.json").exists():
            bugs.append(load_bug(entry))
    return bugs


# ---------------------------------------------------------------------------
# Mutation-based patch generation
# ---------------------------------------------------------------------------

_OP_FAMILIES = {
    "+": ["-", "*", "/", "%"],
    "-": ["+", "*", "/", "%"],
    "*": ["+", "-", "/", "%"],
    "/": ["+", "-", "*", "%"],
    "%": ["+", "-", "*", "/"],
    "<": ["<=", ">", ">=", "==", "!="],
    "<=": ["<", ">", ">=", "==", "!="],
    ">": ["<", "<=", ">=", "==", "!="],
    ">=": ["<", "<=", ">", "==", "!="],
    "==": ["!=", "<", "<=", ">", ">="],
    "!=": ["==", "<", "<=", ">", ">="],
    "&&": ["||"],
    "||": ["&&"],
}

_COMPARISONS = ("<", "<=", ">", ">=")


@dataclass(frozen=True)
class GenConfig:
    operator_replacement: bool = True
    literal_perturbation: bool = True
    type_change: bool = True
    operand_swap: bool = True
    condition_negation: bool = True
    off_by_one: bool = True
    max_candidates: int = 200
    extra_candidates: tuple[str, ...] = ()


def _expr_mutants(e: Expr, config: GenConfig) -> list[Expr]:
    """All single-mutation variants of an expression subtree."""
    out: list[Expr] = []
    if isinstance(e, IntLit) and config.literal_perturbation:
        for value in (e.value + 1, e.value - 1, e.value * 2, e.value // 2):
            if value != e.value and -(2**31) <= value <= 2**31 - 1:
                out.append(IntLit(e.line, e.col, value))
    if isinstance(e, Binary):
        if config.operator_replacement:
            for op in _OP_FAMILIES.get(e.op, ()):
                out.append(dc_replace(e, op=op))
        if config.operand_swap:
            out.append(dc_replace(e, lhs=e.rhs, rhs=e.lhs))
        if config.off_by_one and e.op in _COMPARISONS:
            one = IntLit(e.line, e.col, 1)
            out.append(dc_replace(e, rhs=Binary(e.line, e.col, "+", e.rhs, one)))
            out.append(dc_replace(e, rhs=Binary(e.line, e.col, "-", e.rhs, one)))
        for lhs in _expr_mutants(e.lhs, config):
            out.append(dc_replace(e, lhs=lhs))
        for rhs in _expr_mutants(e.rhs, config):
            out.append(dc_replace(e, rhs=rhs))
    elif isinstance(e, Unary):
        for inner in _expr_mutants(e.operand, config):
            out.append(dc_replace(e, operand=inner))
    else:
        for name in ("items", "args"):
            seq = getattr(e, name, None)
            if seq is not None:
                for i, child in enumerate(seq):
                    for mutant in _expr_mutants(child, config):
                        clone = copy.copy(e)
                        setattr(clone, name, list(seq))
                        getattr(clone, name)[i] = mutant
                        out.append(clone)
        for name in ("base", "index"):
            child = getattr(e, name, None)
            if child is not None:
                for mutant in _expr_mutants(child, config):
                    out.append(dc_replace(e, **{name: mutant}))
    return out


def mutate_statement(stmt: Stmt, config: GenConfig) -> list[str]:
    """Candidate replacement texts from single mutations of one statement."""
    variants: list[Stmt] = []

    def with_expr(attr: str, parent: Stmt):
        for mutant in _expr_mutants(getattr(parent, attr), config):
            variants.append(dc_replace(parent, **{attr: mutant}))

    if isinstance(stmt, Let):
        with_expr("value", stmt)
        if config.type_change and stmt.type_ann is not None:
            flipped = {"int": "float", "float": "int"}.get(stmt.type_ann.name)
            if flipped:
                variants.append(dc_replace(stmt, type_ann=TypeAnn(flipped)))
    elif isinstance(stmt, (If, While)):
        with_expr("cond", stmt)
        if config.condition_negation:
            negated = Unary(stmt.cond.line, stmt.cond.col, "!", stmt.cond)
            variants.append(dc_replace(stmt, cond=negated))
    elif isinstance(stmt, For):
        with_expr("cond", stmt)
        if config.condition_negation:
            negated = Unary(stmt.cond.line, stmt.cond.col, "!", stmt.cond)
            variants.append(dc_replace(stmt, cond=negated))
    elif hasattr(stmt, "value") and getattr(stmt, "value", None) is not None:
        with_expr("value", stmt)
        if hasattr(stmt, "index"):
            with_expr("index", stmt)
    elif hasattr(stmt, "expr"):
        with_expr("expr", stmt)

    rendered = []
    for v in variants:
        text = render_stmt(v)
        if text not in rendered:
            rendered.append(text)
    return rendered


def _pseudo_score(seed: int, text: str) -> float:
    """Deterministic stand-in for an APR tool's probability score."""
    return random.Random(f"{seed}:{text}").random()


def generate_patches(
    program: SourceProgram,
    buggy_line: int,
    tests: list[TestCase],
    config: GenConfig = GenConfig(),
    seed: int = 0,
) -> PatchSet:
    """Mutate the buggy statement and keep the plausible candidates.

    Ranks come from a seeded pseudo-score, so the same seed always yields the
    same PatchSet. Raises NoPlausiblePatch when nothing survives the filter.
    """
    if buggy_line not in program.line_index:
        raise ValueError(f"line {buggy_line} is not a statement")
    original_text = program.source_line(buggy_line).strip()
    stmt = parse_statement_text(original_text)

    candidates = mutate_statement(stmt, config)
    for extra in config.extra_candidates:
        text = render_stmt(parse_statement_text(extra))
        if text not in candidates:
            candidates.append(text)
    normalized_original = render_stmt(stmt)
    candidates = [c for c in candidates if c != normalized_original]
    candidates = candidates[: config.max_candidates]
    if not candidates:
        raise NoPlausiblePatch("mutation produced no candidates")

    provisional = PatchSet(tuple(
        Patch(f"c{i+1}", buggy_line, text, None, i + 1)
        for i, text in enumerate(candidates)
    ))
    plausible = filter_plausible(program, provisional, tests)
    if not len(plausible):
        raise NoPlausiblePatch("no candidate passes every test")

    scored = sorted(
        ((_pseudo_score(seed, p.replacement_text), p.replacement_text) for p in plausible),
        key=lambda t: (-t[0], t[1]),
    )
    return PatchSet(tuple(
        Patch(f"p{rank}", buggy_line, text, round(score, 6), rank)
        for rank, (score, text) in enumerate(scored, start=1)
    ))


# ---------------------------------------------------------------------------
# Ranking evaluation (original vs similarity-only vs clustering+similarity)
# ---------------------------------------------------------------------------

STRATEGIES = ("original", "similarity_only", "ifix")


@dataclass
class RankingReport:
    per_bug: list[dict] = field(default_factory=list)
    means: dict[str, float] = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps({"per_bug": self.per_bug, "means": self.means}, indent=2) + "\n"

    def to_text(self) -> str:
        headers = ["bug", *STRATEGIES]
        rows = [
            [b["bug"], *(str(b[s]) for s in STRATEGIES)] for b in self.per_bug
        ]
        rows.append(["MEAN", *(f"{self.means[s]:.2f}" for s in STRATEGIES)])
        widths = [max(len(r[i]) for r in [headers, *rows]) for i in range(len(headers))]
        lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths))]
        for r in rows:
            lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)))
        return "\n".join(lines) + "\n"


def similarity_rank(bug: BugCase, patch_id: str) -> int:
    """Position of the patch when all patches sort by distance to the buggy
    statement (ties by original rank)."""
    buggy = bug.buggy_context()
    rank_of = {p.id: p.original_rank for p in bug.patches}
    ordered = sorted(
        bug.patches,
        key=lambda p: (
            token_distance(p.replacement_text, buggy.buggy_statement_text),
            rank_of[p.id],
        ),
    )
    return [p.id for p in ordered].index(patch_id) + 1


def ifix_rank(bug: BugCase, patch_id: str) -> int:
    """Hierarchical rank: representatives first, then the patch's position
    inside its cluster relative to the cluster count shown at level one."""
    buggy = bug.buggy_context()
    ranked, clusters = sample(bug.patches, buggy)
    rep_ids = ranked.ids()
    if patch_id in rep_ids:
        return rep_ids.index(patch_id) + 1
    home = next(c for c in clusters if patch_id in c.members)
    order = within_cluster_order(home, buggy, bug.patches)
    position = order.index(patch_id) + 1
    return hierarchical_rank(ClusterPath((len(clusters),), position))


def evaluate_ranking(corpus: list[BugCase]) -> RankingReport:
    """Rank of each bug's correct patch under the three strategies."""
    report = RankingReport()
    for bug in sorted(corpus, key=lambda b: b.id):
        if len(bug.patches) < 2:
            raise CorpusError(bug.id, "ranking evaluation needs >= 2 plausible patches")
        correct = bug.correct_patch_id
        report.per_bug.append({
            "bug": bug.id,
            "original": bug.patches.by_id(correct).original_rank,
            "similarity_only": similarity_rank(bug, correct),
            "ifix": ifix_rank(bug, correct),
        })
    for s in STRATEGIES:
        values = [b[s] for b in report.per_bug]
        report.means[s] = sum(values) / len(values) if values else 0.0
    return report
