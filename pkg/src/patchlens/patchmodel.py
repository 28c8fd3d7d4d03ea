"""Patch representation, application, tokenization, and plausibility filtering.

Patches are single-hunk, single-line textual replacements. Distances between
patches (and between a patch and the buggy statement) are token-level
Levenshtein distances with unit edit costs; tokenization uses the MiniLang
lexer in total mode, so any text tokenizes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .minilang import ParseError, SourceProgram, TestCase, parse, run_test
from .minilang.lexer import lex


class PatchParseError(Exception):
    """The replacement does not parse in context (bad syntax, unknown names)."""


@dataclass(frozen=True)
class Patch:
    id: str
    target_line: int
    replacement_text: str
    apr_score: float | None
    original_rank: int


@dataclass(frozen=True)
class PatchSet:
    patches: tuple[Patch, ...]

    def __post_init__(self):
        ids = [p.id for p in self.patches]
        if len(set(ids)) != len(ids):
            raise ValueError("patch ids must be unique")
        ranks = sorted(p.original_rank for p in self.patches)
        if ranks != list(range(1, len(ranks) + 1)):
            raise ValueError("original_rank values must be 1..n without gaps")

    def __len__(self) -> int:
        return len(self.patches)

    def __iter__(self):
        return iter(self.patches)

    def by_id(self, patch_id: str) -> Patch:
        for p in self.patches:
            if p.id == patch_id:
                return p
        raise KeyError(patch_id)

    def subset(self, ids) -> "PatchSet":
        """Patches with the given ids, original order kept, ranks renumbered 1..k."""
        wanted = set(ids)
        kept = [p for p in self.patches if p.id in wanted]
        kept.sort(key=lambda p: p.original_rank)
        return PatchSet(tuple(
            Patch(p.id, p.target_line, p.replacement_text, p.apr_score, i + 1)
            for i, p in enumerate(kept)
        ))


@dataclass(frozen=True)
class BuggyContext:
    program: SourceProgram
    buggy_line: int
    buggy_statement_text: str

    @staticmethod
    def of(program: SourceProgram, buggy_line: int) -> "BuggyContext":
        return BuggyContext(program, buggy_line, program.source_line(buggy_line))


@dataclass(frozen=True)
class TokenSeq:
    tokens: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass
class RejectionReport:
    """Candidates dropped by filter_plausible, with the reason per candidate."""

    rejected: list[tuple[str, str]] = field(default_factory=list)  # (patch id, reason)

    def add(self, patch_id: str, reason: str):
        self.rejected.append((patch_id, reason))


def tokenize(text: str) -> TokenSeq:
    """Lex text into lexemes; whitespace and comments dropped; total over any input."""
    return TokenSeq(tuple(t.lexeme for t in lex(text, total=True) if t.kind != "eof"))


def levenshtein(a: TokenSeq, b: TokenSeq) -> int:
    """Minimal number of token insertions, deletions, and substitutions."""
    xs, ys = a.tokens, b.tokens
    if len(xs) < len(ys):
        xs, ys = ys, xs
    prev = list(range(len(ys) + 1))
    for i, x in enumerate(xs, start=1):
        cur = [i]
        for j, y in enumerate(ys, start=1):
            cur.append(min(
                prev[j] + 1,  # delete
                cur[j - 1] + 1,  # insert
                prev[j - 1] + (x != y),  # substitute
            ))
        prev = cur
    return prev[-1]


def token_distance(a: str, b: str) -> int:
    return levenshtein(tokenize(a), tokenize(b))


def apply_patch(program: SourceProgram, patch: Patch) -> SourceProgram:
    """Replace the target line's statement and re-parse.

    All other lines keep their content and line numbers. Raises PatchParseError
    when the replacement is not a single line, breaks the syntax, or references
    undefined names.
    """
    if "\n" in patch.replacement_text:
        raise PatchParseError(f"patch {patch.id}: replacement must be a single line")
    lines = program.source_text.split("\n")
    if not (1 <= patch.target_line <= len(lines)):
        raise PatchParseError(f"patch {patch.id}: line {patch.target_line} does not exist")
    lines[patch.target_line - 1] = patch.replacement_text
    try:
        return parse("\n".join(lines))
    except ParseError as e:
        raise PatchParseError(f"patch {patch.id}: {e}") from e


def filter_plausible(
    program: SourceProgram,
    candidates: PatchSet,
    tests: list[TestCase],
    report: RejectionReport | None = None,
) -> PatchSet:
    """Keep exactly the candidates for which every test passes when applied.

    Candidates that fail to apply are dropped and noted in the report instead
    of aborting the run. Output order follows the input order.
    """
    if not tests:
        raise ValueError("filter_plausible needs at least one test")
    kept: list[Patch] = []
    for patch in candidates:
        try:
            patched = apply_patch(program, patch)
        except PatchParseError as e:
            if report is not None:
                report.add(patch.id, str(e))
            continue
        outcomes = (run_test(patched, _rebind(t, patched)) for t in tests)
        failure = next((o for o in outcomes if not o.passed), None)
        if failure is None:
            kept.append(patch)
        elif report is not None:
            report.add(patch.id, f"test failed at line {failure.failing_line}: {failure.message}")
    renumbered = [
        Patch(p.id, p.target_line, p.replacement_text, p.apr_score, i + 1)
        for i, p in enumerate(sorted(kept, key=lambda p: p.original_rank))
    ]
    return PatchSet(tuple(renumbered))


def _rebind(test: TestCase, program: SourceProgram) -> TestCase:
    return TestCase(test.name, program.functions_by_name[test.name])


# ---------------------------------------------------------------------------
# patches.json (corpus interchange format)
# ---------------------------------------------------------------------------


def patches_to_json(patches: PatchSet) -> str:
    return json.dumps(
        [
            {
                "id": p.id,
                "target_line": p.target_line,
                "replacement": p.replacement_text,
                "apr_score": p.apr_score,
                "original_rank": p.original_rank,
            }
            for p in patches
        ],
        indent=2,
    ) + "\n"


def patches_from_json(text: str) -> PatchSet:
    raw = json.loads(text)
    patches = [
        Patch(
            str(r["id"]),
            int(r["target_line"]),
            str(r["replacement"]),
            None if r.get("apr_score") is None else float(r["apr_score"]),
            int(r["original_rank"]),
        )
        for r in raw
    ]
    patches.sort(key=lambda p: p.original_rank)
    return PatchSet(tuple(patches))


def load_patches(path: Path) -> PatchSet:
    return patches_from_json(Path(path).read_text(encoding="utf-8"))
