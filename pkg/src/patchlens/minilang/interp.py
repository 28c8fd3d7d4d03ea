"""Tree-walking interpreter with line-precise probe hooks.

Probes attach to AST nodes before a run starts, so recording a value never
re-evaluates anything: tracing cannot change program semantics. Each run owns
its mutable state; a parsed SourceProgram is shared freely across runs.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass

from ..tracing import CALL, SUBEXPR, VAR_DEF, VAR_USE, InstrumentationPlan, ProbeRecord, TraceLog
from . import values as vals
from .nodes import (
    ArrayLit, Assign, Binary, BoolLit, Call, Expr, ExprStmt, FloatLit, For,
    FunctionDef, If, Index, IndexAssign, IntLit, Let, Name, Return,
    SourceProgram, Stmt, StrLit, TypeAnn, Unary, While, render_expr,
    stmt_exprs, walk_exprs, defined_var, used_vars,
)
from .parser import BUILTINS

MAX_CALL_DEPTH = 512

# Candidate patches can make loops run forever; a fixed statement budget turns
# a runaway execution into a deterministic trap (and a failed test) instead of
# a hang. The heaviest bundled test executes ~30k statements.
MAX_STEPS = 5_000_000

# each MiniLang frame costs a dozen Python frames; keep headroom for the
# 512-frame language limit
sys.setrecursionlimit(max(sys.getrecursionlimit(), 30000))


class RuntimeTrap(Exception):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.message = message
        self.line = line


class TargetNotExecuted(Exception):
    """The test finished without ever reaching the target line."""


class ProbeResolutionError(Exception):
    """A probe references a name that cannot be evaluated at its site."""


class _AssertionFailure(Exception):
    def __init__(self, message: str, line: int):
        super().__init__(message)
        self.message = message
        self.line = line


class _ReturnSignal(Exception):
    def __init__(self, value):
        self.value = value


class _StackCaptured(Exception):
    pass


@dataclass(frozen=True)
class CallStack:
    """Frames innermost-first; each frame is (function name, line), where the
    innermost line is the executing statement and outer lines are call sites."""

    frames: tuple[tuple[str, int], ...]

    def functions(self) -> list[str]:
        return [f for f, _ in self.frames]


@dataclass(frozen=True)
class TestOutcome:
    status: str  # "pass" | "fail"
    failing_line: int | None = None
    message: str = ""
    call_stack: CallStack | None = None

    @property
    def passed(self) -> bool:
        return self.status == "pass"


@dataclass(frozen=True)
class TestCase:
    name: str
    body: FunctionDef


def test_cases(program: SourceProgram) -> list[TestCase]:
    """Zero-parameter functions named test_* are the program's test cases."""
    return [
        TestCase(f.name, f)
        for f in program.functions
        if f.name.startswith("test_") and not f.params
    ]


@dataclass
class _Frame:
    fn: str
    call_site: int  # line in the caller that invoked this frame
    line: int  # line currently executing in this frame
    env: dict
    anns: dict  # declared types, for assignment coercion


class Interpreter:
    def __init__(
        self,
        program: SourceProgram,
        plan: InstrumentationPlan | None = None,
        max_steps: int = MAX_STEPS,
    ):
        self.program = program
        self.stdout: list[str] = []
        self.records: list[ProbeRecord] = []
        self._occ: dict[tuple[str, int, str], int] = {}
        self._frames: list[_Frame] = []
        self._target_line: int | None = None
        self._steps_left = max_steps
        self.captured: CallStack | None = None
        # probe attachment tables
        self._expr_hooks: dict[int, list] = {}  # id(node) -> [(kind, name)]
        self._def_hooks: dict[tuple[str, int], list[str]] = {}  # (fn, line) -> var names
        self._use_hooks: dict[tuple[str, int], list[str]] = {}  # uses with no Name node
        if plan is not None and plan.probes:
            self._attach(plan)

    # -- probe resolution ----------------------------------------------------

    def _attach(self, plan: InstrumentationPlan):
        for probe in plan.sorted_probes():
            fn = self.program.functions_by_name.get(probe.function)
            if fn is None:
                raise ProbeResolutionError(f"unknown function {probe.function!r}")
            if probe.kind == VAR_DEF:
                self._attach_def(fn, probe)
            elif probe.kind == VAR_USE:
                self._attach_use(fn, probe)
            elif probe.kind in (SUBEXPR, CALL):
                self._attach_expr(fn, probe)
            else:
                raise ProbeResolutionError(f"unknown probe kind {probe.kind!r}")

    def _stmt_at(self, fn: FunctionDef, line: int) -> Stmt | None:
        if self.program.func_of_line.get(line) != fn.name:
            return None
        return self.program.line_index.get(line)

    def _attach_def(self, fn: FunctionDef, probe):
        if probe.line == fn.line and any(p.name == probe.name for p in fn.params):
            self._def_hooks.setdefault((fn.name, fn.line), []).append(probe.name)
            return
        stmt = self._stmt_at(fn, probe.line)
        if stmt is None or defined_var(stmt) != probe.name:
            raise ProbeResolutionError(
                f"{probe.function}:{probe.line} does not define {probe.name!r}"
            )
        self._def_hooks.setdefault((fn.name, probe.line), []).append(probe.name)

    def _attach_use(self, fn: FunctionDef, probe):
        stmt = self._stmt_at(fn, probe.line)
        if stmt is None or probe.name not in used_vars(stmt):
            raise ProbeResolutionError(
                f"{probe.function}:{probe.line} does not use {probe.name!r}"
            )
        # one record per statement execution: hook the first occurrence only
        attached = False
        for top in stmt_exprs(stmt):
            for node in walk_exprs(top):
                if isinstance(node, Name) and node.ident == probe.name:
                    self._expr_hooks.setdefault(id(node), []).append((VAR_USE, probe.name))
                    attached = True
                    break
            if attached:
                break
        if not attached:  # the array read implied by a[i] = v has no Name node
            self._use_hooks.setdefault((fn.name, probe.line), []).append(probe.name)

    def _attach_expr(self, fn: FunctionDef, probe):
        stmt = self._stmt_at(fn, probe.line)
        if stmt is None:
            raise ProbeResolutionError(f"no statement at {probe.function}:{probe.line}")
        attached = False
        for top in stmt_exprs(stmt):
            for node in walk_exprs(top):
                if probe.kind == CALL and not isinstance(node, Call):
                    continue
                if render_expr(node) == probe.name:
                    self._expr_hooks.setdefault(id(node), []).append((probe.kind, probe.name))
                    attached = True
        if not attached:
            raise ProbeResolutionError(
                f"{probe.name!r} does not occur at {probe.function}:{probe.line}"
            )

    # -- recording -----------------------------------------------------------

    def _record(self, fn: str, line: int, kind: str, name: str, value):
        key = (fn, line, kind, name)  # occurrences count per probe point
        occ = self._occ.get(key, 0) + 1
        self._occ[key] = occ
        self.records.append(ProbeRecord(fn, line, occ, name, kind, vals.render_value(value)))

    def _fire_def_hooks(self, line: int, names_values: list[tuple[str, object]]):
        fn = self._frames[-1].fn
        hooked = self._def_hooks.get((fn, line))
        if not hooked:
            return
        for name, value in names_values:
            if name in hooked:
                self._record(fn, line, VAR_DEF, name, value)

    def _fire_use_hooks(self, frame: "_Frame", line: int):
        hooked = self._use_hooks.get((frame.fn, line))
        if not hooked:
            return
        for name in hooked:
            if name in frame.env:
                self._record(frame.fn, line, VAR_USE, name, frame.env[name])

    # -- execution -----------------------------------------------------------

    def run_test(self, test: TestCase, target_line: int | None = None) -> TestOutcome:
        self._target_line = target_line
        self.captured = None
        try:
            self._call(test.name, [], call_site=test.body.line)
        except _AssertionFailure as e:
            return TestOutcome("fail", e.line, e.message, getattr(e, "stack", None))
        except RuntimeTrap as e:
            return TestOutcome(
                "fail", e.line, f"runtime trap: {e.message}", getattr(e, "stack", None)
            )
        except _StackCaptured:
            return TestOutcome("pass", None, "stopped at capture target", None)
        return TestOutcome("pass")

    def _capture_stack(self) -> CallStack:
        return CallStack(tuple((fr.fn, fr.line) for fr in reversed(self._frames)))

    def _call(self, fn_name: str, args: list, call_site: int):
        fn = self.program.functions_by_name[fn_name]
        if len(self._frames) >= MAX_CALL_DEPTH:
            raise RuntimeTrap("call depth limit exceeded", call_site)
        env = {}
        anns = {}
        frame = _Frame(fn_name, call_site, fn.line, env, anns)
        self._frames.append(frame)
        try:
            named = []
            for p, a in zip(fn.params, args):
                env[p.name] = self._coerce(a, p.type_ann, fn.line)
                anns[p.name] = p.type_ann
                named.append((p.name, env[p.name]))
            self._fire_def_hooks(fn.line, named)
            try:
                self._exec_body(fn.body, frame)
            except _ReturnSignal as r:
                value = r.value
                if fn.return_type is not None and value is None:
                    raise RuntimeTrap(f"function {fn_name!r} returned no value", frame.line)
                if fn.return_type is not None:
                    value = self._coerce(value, fn.return_type, frame.line)
                return value
            if fn.return_type is not None:
                raise RuntimeTrap(f"function {fn_name!r} ended without returning a value", frame.line)
            return None
        except (_AssertionFailure, RuntimeTrap) as ex:
            # snapshot the stack before unwinding pops the frames
            if not hasattr(ex, "stack"):
                ex.stack = self._capture_stack()
            raise
        finally:
            self._frames.pop()

    def _coerce(self, value, ann: TypeAnn | None, line: int):
        if ann is None:
            return value
        t = vals.type_name(value)
        if ann.name == t:
            return value
        if ann.name == "float" and t == "int":
            return float(value)
        raise RuntimeTrap(f"cannot use a {t} value where {ann.render()} is expected", line)

    def _exec_body(self, body: list[Stmt], frame: _Frame):
        for s in body:
            self._exec_stmt(s, frame)

    def _exec_stmt(self, s: Stmt, frame: _Frame):
        frame.line = s.line
        self._steps_left -= 1
        if self._steps_left < 0:
            raise RuntimeTrap("statement budget exceeded (runaway loop?)", s.line)
        if self._target_line == s.line and self.captured is None:
            self.captured = self._capture_stack()
            raise _StackCaptured()
        self._fire_use_hooks(frame, s.line)
        env = frame.env
        if isinstance(s, Let):
            value = self._coerce(self._eval(s.value, frame), s.type_ann, s.line)
            env[s.name] = value
            if s.type_ann is not None:
                frame.anns[s.name] = s.type_ann
            self._fire_def_hooks(s.line, [(s.name, value)])
        elif isinstance(s, Assign):
            value = self._eval(s.value, frame)
            if s.name not in env:
                raise RuntimeTrap(f"variable {s.name!r} is not defined", s.line)
            value = self._coerce(value, frame.anns.get(s.name), s.line)
            env[s.name] = value
            self._fire_def_hooks(s.line, [(s.name, value)])
        elif isinstance(s, IndexAssign):
            arr = env.get(s.name)
            if not isinstance(arr, list):
                raise RuntimeTrap(f"{s.name!r} is not an array", s.line)
            idx = self._eval(s.index, frame)
            if isinstance(idx, bool) or not isinstance(idx, int):
                raise RuntimeTrap("array index must be an int", s.line)
            if idx < 0 or idx >= len(arr):
                raise RuntimeTrap(f"array index {idx} out of bounds for length {len(arr)}", s.line)
            arr[idx] = self._eval(s.value, frame)
            self._fire_def_hooks(s.line, [(s.name, arr)])
        elif isinstance(s, If):
            if self._truth(self._eval(s.cond, frame), s.line):
                self._exec_body(s.then_body, frame)
            else:
                self._exec_body(s.else_body, frame)
        elif isinstance(s, While):
            while True:
                frame.line = s.line
                self._steps_left -= 1
                if self._steps_left < 0:
                    raise RuntimeTrap("statement budget exceeded (runaway loop?)", s.line)
                if not self._truth(self._eval(s.cond, frame), s.line):
                    break
                self._exec_body(s.body, frame)
        elif isinstance(s, For):
            self._exec_stmt(s.init, frame)
            while True:
                frame.line = s.line
                self._steps_left -= 1
                if self._steps_left < 0:
                    raise RuntimeTrap("statement budget exceeded (runaway loop?)", s.line)
                if not self._truth(self._eval(s.cond, frame), s.line):
                    break
                self._exec_body(s.body, frame)
                frame.line = s.line
                self._exec_stmt(s.step, frame)
        elif isinstance(s, Return):
            raise _ReturnSignal(self._eval(s.value, frame) if s.value is not None else None)
        elif isinstance(s, ExprStmt):
            self._eval(s.expr, frame)
        else:
            raise TypeError(f"unknown statement {type(s).__name__}")

    def _truth(self, v, line: int) -> bool:
        if isinstance(v, bool):
            return v
        raise RuntimeTrap("condition must be a bool", line)

    # -- expressions ----------------------------------------------------------

    def _eval(self, e: Expr, frame: _Frame):
        value = self._eval_inner(e, frame)
        hooks = self._expr_hooks.get(id(e))
        if hooks:
            for kind, name in hooks:
                self._record(frame.fn, frame.line, kind, name, value)
        return value

    def _eval_inner(self, e: Expr, frame: _Frame):
        if isinstance(e, IntLit):
            return vals.wrap32(e.value)
        if isinstance(e, FloatLit):
            return e.value
        if isinstance(e, BoolLit):
            return e.value
        if isinstance(e, StrLit):
            return e.value
        if isinstance(e, Name):
            env = frame.env
            if e.ident not in env:
                raise RuntimeTrap(f"variable {e.ident!r} is not defined", frame.line)
            return env[e.ident]
        if isinstance(e, ArrayLit):
            return [self._eval(x, frame) for x in e.items]
        if isinstance(e, Unary):
            v = self._eval(e.operand, frame)
            if e.op == "-":
                if isinstance(v, bool):
                    raise RuntimeTrap("cannot negate a bool", frame.line)
                if isinstance(v, int):
                    return vals.neg32(v)
                if isinstance(v, float):
                    return -v
                raise RuntimeTrap(f"cannot negate a {vals.type_name(v)}", frame.line)
            if e.op == "!":
                if isinstance(v, bool):
                    return not v
                raise RuntimeTrap("'!' needs a bool", frame.line)
        if isinstance(e, Binary):
            return self._binary(e, frame)
        if isinstance(e, Index):
            base = self._eval(e.base, frame)
            idx = self._eval(e.index, frame)
            if isinstance(idx, bool) or not isinstance(idx, int):
                raise RuntimeTrap("index must be an int", frame.line)
            if isinstance(base, list) or isinstance(base, str):
                if idx < 0 or idx >= len(base):
                    raise RuntimeTrap(
                        f"index {idx} out of bounds for length {len(base)}", frame.line
                    )
                return base[idx]
            raise RuntimeTrap(f"cannot index a {vals.type_name(base)}", frame.line)
        if isinstance(e, Call):
            return self._call_expr(e, frame)
        raise TypeError(f"unknown expression {type(e).__name__}")

    def _binary(self, e: Binary, frame: _Frame):
        op = e.op
        if op == "&&":
            return self._truth(self._eval(e.lhs, frame), frame.line) and self._truth(
                self._eval(e.rhs, frame), frame.line
            )
        if op == "||":
            return self._truth(self._eval(e.lhs, frame), frame.line) or self._truth(
                self._eval(e.rhs, frame), frame.line
            )
        a = self._eval(e.lhs, frame)
        b = self._eval(e.rhs, frame)
        ta, tb = vals.type_name(a), vals.type_name(b)
        line = frame.line

        if op in ("==", "!="):
            eq = self._equal(a, b, line)
            return eq if op == "==" else not eq

        if op in ("<", "<=", ">", ">="):
            if ta in ("int", "float") and tb in ("int", "float"):
                pass
            elif ta == "str" and tb == "str":
                pass
            else:
                raise RuntimeTrap(f"cannot order {ta} and {tb}", line)
            if op == "<":
                return a < b
            if op == "<=":
                return a <= b
            if op == ">":
                return a > b
            return a >= b

        if op == "+" and ta == "str" and tb == "str":
            return a + b
        if op == "+" and ta == "array" and tb == "array":
            return a + b

        if ta not in ("int", "float") or tb not in ("int", "float"):
            raise RuntimeTrap(f"cannot apply {op!r} to {ta} and {tb}", line)

        if ta == "int" and tb == "int":
            if op == "+":
                return vals.add32(a, b)
            if op == "-":
                return vals.sub32(a, b)
            if op == "*":
                return vals.mul32(a, b)
            if op == "/":
                if b == 0:
                    raise RuntimeTrap("division by zero", line)
                return vals.div32(a, b)
            if op == "%":
                if b == 0:
                    raise RuntimeTrap("division by zero", line)
                return vals.rem32(a, b)
        fa, fb = float(a), float(b)
        if op == "+":
            return fa + fb
        if op == "-":
            return fa - fb
        if op == "*":
            return fa * fb
        if op == "/":
            return vals.fdiv(fa, fb)
        if op == "%":
            return vals.frem(fa, fb)
        raise TypeError(f"unknown operator {op!r}")

    def _equal(self, a, b, line: int) -> bool:
        ta, tb = vals.type_name(a), vals.type_name(b)
        if ta in ("int", "float") and tb in ("int", "float"):
            if ta == "float" or tb == "float":
                return float(a) == float(b)  # false for NaN operands, per IEEE
            return a == b
        if ta != tb:
            raise RuntimeTrap(f"cannot compare {ta} with {tb}", line)
        if ta == "array":
            return len(a) == len(b) and all(
                self._equal(x, y, line) for x, y in zip(a, b)
            )
        return a == b

    def _call_expr(self, e: Call, frame: _Frame):
        if e.func in BUILTINS:
            args = [self._eval(a, frame) for a in e.args]
            value = self._builtin(e.func, args, frame.line)
        else:
            args = [self._eval(a, frame) for a in e.args]
            call_line = frame.line
            value = self._call(e.func, args, call_site=call_line)
            frame.line = call_line  # restore after nested execution
        return value

    def _builtin(self, name: str, args: list, line: int):
        if name == "sqrt":
            (x,) = args
            if isinstance(x, bool) or not isinstance(x, (int, float)):
                raise RuntimeTrap("sqrt needs a number", line)
            x = float(x)
            if x != x or x < 0.0:
                return math.nan
            return math.sqrt(x)
        if name == "abs":
            (x,) = args
            if isinstance(x, bool):
                raise RuntimeTrap("abs needs a number", line)
            if isinstance(x, int):
                return vals.abs32(x)
            if isinstance(x, float):
                return abs(x)
            raise RuntimeTrap("abs needs a number", line)
        if name == "len":
            (x,) = args
            if isinstance(x, (list, str)):
                return len(x)
            raise RuntimeTrap("len needs an array or str", line)
        if name == "assert":
            cond, message = args
            if not isinstance(cond, bool):
                raise RuntimeTrap("assert condition must be a bool", line)
            if not isinstance(message, str):
                raise RuntimeTrap("assert message must be a str", line)
            if not cond:
                raise _AssertionFailure(message, line)
            return None
        if name == "print":
            self.stdout.append(" ".join(
                a if isinstance(a, str) else vals.render_value(a) for a in args
            ))
            return None
        raise TypeError(f"unknown builtin {name!r}")


# ---------------------------------------------------------------------------
# Public operations
# ---------------------------------------------------------------------------


def run_test(program: SourceProgram, test: TestCase) -> TestOutcome:
    """Run one test to completion; deterministic for identical inputs."""
    return Interpreter(program).run_test(test)


def capture_call_stack(program: SourceProgram, test: TestCase, target_line: int) -> CallStack:
    """Stack at the first dynamic execution of target_line, innermost-first.

    Raises TargetNotExecuted if the test finishes without reaching the line.
    """
    if target_line not in program.line_index:
        raise TargetNotExecuted(f"line {target_line} is not an executable statement")
    interp = Interpreter(program)
    interp.run_test(test, target_line=target_line)
    if interp.captured is None:
        raise TargetNotExecuted(f"line {target_line} was never executed")
    return interp.captured


def execute_traced(
    program: SourceProgram,
    test: TestCase,
    plan: InstrumentationPlan,
    version: str = "run",
) -> TraceLog:
    """Run one test with the plan's probes active and collect the trace log.

    The embedded outcome always equals what run_test would report for the same
    (program, test): probes observe evaluation, they never re-evaluate.
    """
    interp = Interpreter(program, plan)
    outcome = interp.run_test(test)
    return TraceLog(version, interp.records, outcome)
