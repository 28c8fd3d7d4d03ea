"""Probe plans, runtime trace records, and the trace-log file format.

A probe names one observation point: a variable definition or use, a
subexpression, or a call, at a specific (function, line). Executing an
instrumented run yields one ProbeRecord per dynamic hit of each probe point,
with occurrence indices counted per probe point (function, line, kind, name)
in execution order.

Log file format: one record per line, tab-separated UTF-8 fields
``version \\t function \\t line \\t occurrence \\t kind \\t name \\t value``.
Rendered values escape tabs and newlines, so the format is unambiguous.
"""

from __future__ import annotations

from dataclasses import dataclass, field

VAR_DEF = "var-def"
VAR_USE = "var-use"
SUBEXPR = "subexpr"
CALL = "call"

KINDS = (VAR_DEF, VAR_USE, SUBEXPR, CALL)


@dataclass(frozen=True, order=True)
class Probe:
    function: str
    line: int
    kind: str
    name: str


@dataclass(frozen=True)
class InstrumentationPlan:
    probes: frozenset[Probe] = frozenset()

    @staticmethod
    def of(probes) -> "InstrumentationPlan":
        return InstrumentationPlan(frozenset(probes))

    def sorted_probes(self) -> list[Probe]:
        return sorted(self.probes)

    def __len__(self) -> int:
        return len(self.probes)


@dataclass(frozen=True)
class ProbeRecord:
    function: str
    line: int
    occurrence: int  # the "#k" suffix, 1-based per (function, line, name)
    name: str
    kind: str
    value: str  # rendered value


@dataclass
class TraceLog:
    version: str  # "buggy" or a patch id
    records: list[ProbeRecord] = field(default_factory=list)
    outcome: "object | None" = None  # TestOutcome of the traced run

    def to_text(self) -> str:
        lines = []
        for r in self.records:
            lines.append(
                f"{self.version}\t{r.function}\t{r.line}\t{r.occurrence}\t{r.kind}\t{r.name}\t{r.value}"
            )
        return "\n".join(lines) + ("\n" if lines else "")

    @staticmethod
    def from_text(text: str) -> "TraceLog":
        version = ""
        records = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            if not raw:
                continue
            parts = raw.split("\t")
            if len(parts) != 7:
                raise ValueError(f"malformed trace record on line {lineno}")
            v, function, line, occurrence, kind, name, value = parts
            if version and v != version:
                raise ValueError(f"mixed versions in one trace log (line {lineno})")
            version = v
            records.append(ProbeRecord(function, int(line), int(occurrence), name, kind, value))
        return TraceLog(version, records)
