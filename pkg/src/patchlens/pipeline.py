"""End-to-end analysis pipeline: from a bug and a patch subset to tables.

All stages are deterministic pure functions of their inputs, so traced runs
are memoized process-wide; cached and freshly computed results are identical
by construction. The failing test of the buggy program drives all traced runs.
"""

from __future__ import annotations

from dataclasses import dataclass

from .minilang import (
    CallStack, SourceProgram, TestCase, capture_call_stack, execute_traced,
    run_test,
)
from .dataflow import plan_instrumentation, trace_across_frames
from .patchmodel import Patch, apply_patch
from .tracealign import ComparisonTable, align
from .tracing import InstrumentationPlan, TraceLog

BUGGY = "buggy"


class PipelineError(Exception):
    def __init__(self, stage: str, message: str):
        super().__init__(f"{stage}: {message}")
        self.stage = stage
        self.message = message


@dataclass(frozen=True)
class VersionTrace:
    version: str
    plan: InstrumentationPlan
    log: TraceLog


_trace_cache: dict[tuple, VersionTrace] = {}


def clear_cache():
    _trace_cache.clear()


def failing_test(program: SourceProgram, tests: list[TestCase]) -> TestCase:
    """The first test the buggy program fails; it drives the traced runs."""
    for t in tests:
        if not run_test(program, t).passed:
            return t
    raise PipelineError("failing-test", "no test fails on the buggy program")


def trace_version(
    program: SourceProgram,
    test_name: str,
    buggy_line: int,
    stack: CallStack,
    version: str,
) -> VersionTrace:
    """Plan instrumentation for one program version and execute the trace."""
    key = (program.source_text, test_name, buggy_line, stack.frames, version)
    cached = _trace_cache.get(key)
    if cached is not None:
        return cached

    test = TestCase(test_name, program.functions_by_name[test_name])
    seed = program.line_index.get(buggy_line)
    if seed is None:
        raise PipelineError("dataflow", f"no statement at line {buggy_line}")
    try:
        traces = trace_across_frames(stack, program, seed)
        plan = plan_instrumentation(traces, program)
    except Exception as e:  # noqa: BLE001 - surface the failing stage
        raise PipelineError("dataflow", str(e)) from e
    try:
        log = execute_traced(program, test, plan, version=version)
    except Exception as e:  # noqa: BLE001
        raise PipelineError("tracing", str(e)) from e
    result = VersionTrace(version, plan, log)
    _trace_cache[key] = result
    return result


def compare_versions(
    program: SourceProgram,
    tests: list[TestCase],
    buggy_line: int,
    patches: list[Patch],
    source_file: str = "program.mini",
) -> list[ComparisonTable]:
    """The full runtime comparison: buggy column plus one column per patch.

    The call stack is captured once on the buggy program and reused for every
    version, so tables line up with the frames the user saw fail.
    """
    test = failing_test(program, tests)
    try:
        stack = capture_call_stack(program, test, buggy_line)
    except Exception as e:  # noqa: BLE001
        raise PipelineError("call-stack", str(e)) from e

    buggy_trace = trace_version(program, test.name, buggy_line, stack, BUGGY)
    patch_traces = []
    plans = {BUGGY: buggy_trace.plan}
    for patch in patches:
        try:
            patched = apply_patch(program, patch)
        except Exception as e:  # noqa: BLE001
            raise PipelineError("apply-patch", str(e)) from e
        vt = trace_version(patched, test.name, buggy_line, stack, patch.id)
        patch_traces.append(vt)
        plans[patch.id] = vt.plan

    frames = [fn for fn, _ in stack.frames]
    try:
        return align(
            buggy_trace.log,
            [vt.log for vt in patch_traces],
            plans,
            frames=frames,
            source_file=source_file,
        )
    except Exception as e:  # noqa: BLE001
        raise PipelineError("alignment", str(e)) from e
