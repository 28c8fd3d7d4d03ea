"""Shared test helpers: random program generation and independent oracles."""

from __future__ import annotations

import random
from pathlib import Path

CORPUS = Path(__file__).resolve().parent.parent / "corpus"

_OPS = ("+", "-", "*")


class ProgramGen:
    """Random MiniLang programs for property tests.

    Programs are deterministic int computations: straight-line arithmetic,
    one-level if/else, bounded while loops, and a test function that calls
    the generated function and asserts on the result.
    """

    def __init__(self, rng: random.Random):
        self.rng = rng

    def expr(self, vars_: list[str]) -> str:
        r = self.rng
        def atom():
            if vars_ and r.random() < 0.7:
                return r.choice(vars_)
            return str(r.randint(-50, 50))
        terms = [atom() for _ in range(r.randint(1, 3))]
        out = terms[0]
        for t in terms[1:]:
            out = f"{out} {r.choice(_OPS)} {t}"
        return out

    def program(self, n_stmts: int = 10) -> str:
        r = self.rng
        lines = ["fn work(a: int, b: int) -> int {"]
        vars_ = ["a", "b"]
        fresh = 0
        budget = n_stmts
        while budget > 0:
            kind = r.random()
            if kind < 0.55 or len(vars_) < 3:
                name = f"x{fresh}"
                fresh += 1
                lines.append(f"    let {name}: int = {self.expr(vars_)};")
                vars_.append(name)
                budget -= 1
            elif kind < 0.75:
                target = r.choice(vars_[2:]) if len(vars_) > 2 else vars_[0]
                lines.append(f"    {target} = {self.expr(vars_)};")
                budget -= 1
            elif kind < 0.9:
                cond = f"{r.choice(vars_)} {r.choice(('<', '<=', '>', '>=', '==', '!='))} {self.expr(vars_)}"
                lines.append(f"    if ({cond}) {{")
                target = r.choice(vars_[2:]) if len(vars_) > 2 else "a"
                if target in ("a", "b"):
                    name = f"x{fresh}"
                    fresh += 1
                    lines.append(f"        let {name}: int = {self.expr(vars_)};")
                    lines.append("    }")
                    vars_.append(name)
                else:
                    lines.append(f"        {target} = {self.expr(vars_)};")
                    lines.append("    }")
                budget -= 2
            else:
                counter = f"x{fresh}"
                fresh += 1
                acc = r.choice(vars_[2:]) if len(vars_) > 2 else None
                lines.append(f"    let {counter}: int = 0;")
                lines.append(f"    while ({counter} < {r.randint(0, 4)}) {{")
                if acc:
                    lines.append(f"        {acc} = {acc} + {counter};")
                lines.append(f"        {counter} = {counter} + 1;")
                lines.append("    }")
                vars_.append(counter)
                budget -= 3
        lines.append(f"    return {r.choice(vars_)};")
        lines.append("}")
        lines.append("")
        lines.append("fn test_work() {")
        lines.append(
            f"    let r: int = work({r.randint(-1000, 1000)}, {r.randint(-1000, 1000)});"
        )
        lines.append(f"    assert(r {r.choice(('==', '!=', '<', '>'))} {r.randint(-500, 500)}, \"probe\");")
        lines.append("}")
        return "\n".join(lines) + "\n"


def random_plan(rng: random.Random, program):
    """A random valid instrumentation plan over an already-parsed program."""
    from patchlens.minilang import defined_var, render_expr, stmt_exprs, used_vars, walk_exprs
    from patchlens.minilang.nodes import Call, Name, IntLit, FloatLit, BoolLit, StrLit
    from patchlens.tracing import CALL, SUBEXPR, VAR_DEF, VAR_USE, InstrumentationPlan, Probe

    points = []
    for fn in program.functions:
        from patchlens.minilang import walk_stmts

        for stmt in walk_stmts(fn.body):
            var = defined_var(stmt)
            if var:
                points.append(Probe(fn.name, stmt.line, VAR_DEF, var))
            for v in sorted(used_vars(stmt)):
                points.append(Probe(fn.name, stmt.line, VAR_USE, v))
            for top in stmt_exprs(stmt):
                for node in walk_exprs(top):
                    if isinstance(node, Call) and node.func not in ("assert", "print"):
                        points.append(Probe(fn.name, stmt.line, CALL, render_expr(node)))
                    elif not isinstance(node, (Name, IntLit, FloatLit, BoolLit, StrLit)):
                        points.append(Probe(fn.name, stmt.line, SUBEXPR, render_expr(node)))
    if not points:
        return InstrumentationPlan.of([])
    k = rng.randint(0, min(6, len(points)))
    return InstrumentationPlan.of(rng.sample(points, k))


def reference_levenshtein(a: tuple[str, ...], b: tuple[str, ...]) -> int:
    """Full-matrix DP, the oracle the fast implementation is checked against."""
    n, m = len(a), len(b)
    dp = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        dp[i][0] = i
    for j in range(m + 1):
        dp[0][j] = j
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            dp[i][j] = min(
                dp[i - 1][j] + 1,
                dp[i][j - 1] + 1,
                dp[i - 1][j - 1] + (0 if a[i - 1] == b[j - 1] else 1),
            )
    return dp[n][m]


def wrap32_oracle(value: int) -> int:
    """Two's-complement 32-bit wrap via numpy's truncating cast."""
    import numpy as np

    return int(np.array(value, dtype=np.int64).astype(np.int32))
