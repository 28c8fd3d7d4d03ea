"""Def-use chains, affected-variable closure, cross-frame tracing, and
instrumentation planning.

Chains are computed per function over a statement-level control-flow graph
with may-reach semantics: a definition reaches every use attainable along
some path (branches and loop back-edges included) without an intervening
redefinition. Parameters count as definitions at the function header line;
an element write a[i] = v redefines the whole array.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .minilang import (
    Call, CallStack, FunctionDef, Name, SourceProgram, Stmt,
    defined_var, render_expr, stmt_exprs, used_vars, walk_exprs, walk_stmts,
)
from .minilang.nodes import (
    Binary, BoolLit, Expr, FloatLit, For, If, IntLit, Return, StrLit, While,
)
from .tracing import CALL, SUBEXPR, VAR_DEF, VAR_USE, InstrumentationPlan, Probe


class NoDefinition(Exception):
    """The seed statement defines no variable; only use probes make sense."""


@dataclass(frozen=True, order=True)
class Definition:
    var: str
    line: int  # the function header line for parameters


@dataclass
class DefUseChains:
    function: str
    du: dict[Definition, frozenset[int]]  # definition -> reachable use lines
    ud: dict[tuple[int, str], frozenset[str]]  # (use line, used var) -> vars defined from it there
    def_lines: dict[str, tuple[int, ...]]  # var -> lines defining it
    use_lines: dict[str, tuple[int, ...]]  # var -> lines using it


@dataclass
class AffectedSet:
    variables: set[str]
    use_lines: set[int]
    origin: dict[str, str]  # variable -> chain step that added it


@dataclass
class FrameTrace:
    function: str
    call_site: int
    affected: AffectedSet
    traced_arguments: list[str]
    use_only: bool = False
    traced_argument_vars: dict[str, set[str]] = field(default_factory=dict)

    def all_variables(self) -> set[str]:
        names = set(self.affected.variables)
        for arg_vars in self.traced_argument_vars.values():
            names |= arg_vars
        return names


# ---------------------------------------------------------------------------
# Control-flow graph and reaching definitions
# ---------------------------------------------------------------------------


@dataclass(eq=False)
class _Node:
    stmt: Stmt | None  # None for the entry node
    line: int
    defs: frozenset[Definition]
    kills_var: str | None
    uses: frozenset[str]
    succs: list["_Node"] = field(default_factory=list)


def _build_cfg(fn: FunctionDef) -> list[_Node]:
    entry = _Node(
        None,
        fn.line,
        frozenset(Definition(p.name, fn.line) for p in fn.params),
        None,
        frozenset(),
    )
    nodes = [entry]

    def node_for(s: Stmt) -> _Node:
        var = defined_var(s)
        defs = frozenset([Definition(var, s.line)]) if var else frozenset()
        n = _Node(s, s.line, defs, var, frozenset(used_vars(s)))
        nodes.append(n)
        return n

    def wire(body: list[Stmt], preds: list[_Node]) -> list[_Node]:
        """Connect a statement list after preds; returns the dangling exits."""
        current = preds
        for s in body:
            n = node_for(s)
            for p in current:
                p.succs.append(n)
            if isinstance(s, If):
                then_exits = wire(s.then_body, [n])
                else_exits = wire(s.else_body, [n]) if s.else_body else [n]
                current = then_exits + else_exits
            elif isinstance(s, While):
                body_exits = wire(s.body, [n])
                for e in body_exits:
                    e.succs.append(n)  # back edge
                current = [n]
            elif isinstance(s, For):
                body_exits = wire(s.body, [n])
                for e in body_exits:
                    e.succs.append(n)  # back edge runs the step, then the test
                current = [n]
            elif isinstance(s, Return):
                current = []
            else:
                current = [n]
        return current

    wire(fn.body, [entry])
    return nodes


def def_use_analysis(f: FunctionDef) -> DefUseChains:
    """Def-use and use-def chains for every variable in the function."""
    nodes = _build_cfg(f)
    all_defs: set[Definition] = set()
    for n in nodes:
        all_defs |= n.defs
    defs_of_var: dict[str, set[Definition]] = {}
    for d in all_defs:
        defs_of_var.setdefault(d.var, set()).add(d)

    # forward may-reach fixpoint
    in_sets: dict[int, set[Definition]] = {id(n): set() for n in nodes}
    out_sets: dict[int, set[Definition]] = {id(n): set() for n in nodes}
    changed = True
    while changed:
        changed = False
        for n in nodes:
            gen = n.defs
            killed = defs_of_var.get(n.kills_var, set()) if n.kills_var else set()
            out = set(gen) | (in_sets[id(n)] - killed)
            if out != out_sets[id(n)]:
                out_sets[id(n)] = out
                changed = True
            for s in n.succs:
                before = in_sets[id(s)]
                merged = before | out
                if merged != before:
                    in_sets[id(s)] = merged
                    changed = True

    du: dict[Definition, set[int]] = {d: set() for d in all_defs}
    ud: dict[tuple[int, str], set[str]] = {}
    use_lines: dict[str, set[int]] = {}
    for n in nodes:
        if n.stmt is None:
            continue
        reaching = in_sets[id(n)]
        for var in n.uses:
            use_lines.setdefault(var, set()).add(n.line)
            for d in reaching:
                if d.var == var:
                    du[d].add(n.line)
            if n.kills_var:
                ud.setdefault((n.line, var), set()).add(n.kills_var)

    def_lines: dict[str, set[int]] = {}
    for d in all_defs:
        def_lines.setdefault(d.var, set()).add(d.line)

    return DefUseChains(
        f.name,
        {d: frozenset(v) for d, v in du.items()},
        {k: frozenset(v) for k, v in ud.items()},
        {v: tuple(sorted(ls)) for v, ls in def_lines.items()},
        {v: tuple(sorted(ls)) for v, ls in use_lines.items()},
    )


# ---------------------------------------------------------------------------
# Affected-variable closure (worklist over DU/UD chains)
# ---------------------------------------------------------------------------


def affected_by_statement(s: Stmt, f: FunctionDef) -> AffectedSet:
    """Variables whose values descend from the statement's definition.

    Seeds at the variable the statement defines, then follows def-use chains
    to each use line and adds the variable defined there, to a fixed point.
    """
    d = defined_var(s)
    if d is None:
        raise NoDefinition(f"statement at line {s.line} defines no variable")
    chains = def_use_analysis(f)
    seed = Definition(d, s.line)
    affected = AffectedSet({d}, set(), {d: "seed"})
    seen = {seed}
    work = [seed]
    while work:
        current = work.pop()
        for use_line in sorted(chains.du.get(current, ())):
            affected.use_lines.add(use_line)
            for w in sorted(chains.ud.get((use_line, current.var), ())):
                nd = Definition(w, use_line)
                if nd not in seen:
                    seen.add(nd)
                    work.append(nd)
                    affected.variables.add(w)
                    affected.origin.setdefault(w, f"{current.var}@{use_line}")
    return affected


def _use_only_set(s: Stmt, variables: set[str]) -> AffectedSet:
    return AffectedSet(set(variables), {s.line}, {v: "use-only" for v in sorted(variables)})


def _expr_vars(e: Expr) -> set[str]:
    return {n.ident for n in walk_exprs(e) if isinstance(n, Name)}


def _call_sites(stmt: Stmt, callee: str) -> list[Call]:
    sites = []
    for top in stmt_exprs(stmt):
        for node in walk_exprs(top):
            if isinstance(node, Call) and node.func == callee:
                sites.append(node)
    return sites


def _relevant_lines(trace: FrameTrace, fn: FunctionDef, chains: DefUseChains) -> set[int]:
    lines = set(trace.affected.use_lines)
    for v in trace.all_variables():
        lines.update(chains.def_lines.get(v, ()))
        lines.update(chains.use_lines.get(v, ()))
    return lines


def _returns_participate(callee: FunctionDef, trace: FrameTrace) -> bool:
    names = trace.all_variables()
    for s in walk_stmts(callee.body):
        if isinstance(s, Return) and s.value is not None:
            if _expr_vars(s.value) & names:
                return True
    return False


def trace_across_frames(
    stack: CallStack, program: SourceProgram, seed: Stmt
) -> list[FrameTrace]:
    """Run the affected-variable analysis in every frame of the call stack.

    The innermost frame seeds at the given statement. Each caller frame
    re-seeds at its call-site statement; argument expressions feeding traced
    callee parameters are traced too, as is a variable receiving the call's
    return value when that value lies on the propagation path.
    """
    frames = stack.frames
    traces: list[FrameTrace] = []

    inner_fn_name, inner_line = frames[0]
    inner_fn = program.functions_by_name[inner_fn_name]
    try:
        affected = affected_by_statement(seed, inner_fn)
        inner = FrameTrace(inner_fn_name, inner_line, affected, [])
    except NoDefinition:
        inner = FrameTrace(
            inner_fn_name, inner_line, _use_only_set(seed, used_vars(seed)), [], use_only=True
        )
    traces.append(inner)

    for fn_name, call_line in frames[1:]:
        caller = program.functions_by_name[fn_name]
        callee_trace = traces[-1]
        callee = program.functions_by_name[callee_trace.function]
        callee_chains = def_use_analysis(callee)
        relevant = _relevant_lines(callee_trace, callee, callee_chains)
        traced_params = set()
        for p in callee.params:
            if set(callee_chains.use_lines.get(p.name, ())) & relevant:
                traced_params.add(p.name)
        call_stmt = program.line_index.get(call_line)
        traced_args: list[str] = []
        arg_var_map: dict[str, set[str]] = {}
        if call_stmt is not None:
            for site in _call_sites(call_stmt, callee.name):
                for p, arg in zip(callee.params, site.args):
                    if p.name in traced_params:
                        text = render_expr(arg)
                        if text not in arg_var_map:
                            traced_args.append(text)
                            arg_var_map[text] = set()
                        if isinstance(arg, Name):
                            # a bare variable argument is traced as a variable;
                            # composite arguments are logged as expressions only
                            arg_var_map[text].add(arg.ident)

        frame_trace = None
        if call_stmt is not None and defined_var(call_stmt) and _returns_participate(
            callee, callee_trace
        ):
            try:
                frame_trace = FrameTrace(
                    fn_name, call_line,
                    affected_by_statement(call_stmt, caller), traced_args,
                    traced_argument_vars=arg_var_map,
                )
            except NoDefinition:
                frame_trace = None
        if frame_trace is None:
            seed_stmt = call_stmt if call_stmt is not None else seed
            frame_trace = FrameTrace(
                fn_name, call_line, _use_only_set(seed_stmt, set()), traced_args,
                use_only=True, traced_argument_vars=arg_var_map,
            )
        traces.append(frame_trace)

    return traces


# ---------------------------------------------------------------------------
# Instrumentation planning
# ---------------------------------------------------------------------------


VOID_BUILTINS = {"assert", "print"}


def _is_atomic(e: Expr) -> bool:
    return isinstance(e, (Name, IntLit, FloatLit, BoolLit, StrLit))


def _mentions(e: Expr, names: set[str]) -> bool:
    return bool(_expr_vars(e) & names)


def _line_probes(fn_name: str, stmt: Stmt, names: set[str]) -> set[Probe]:
    """Subexpression and call probes for one instrumented line.

    Emits the maximal proper subexpression mentioning a traced variable, the
    non-atomic operands a traced variable is directly combined with, and every
    value-returning call at the line. Probing all calls keeps rows alignable
    when patches rewrite a call's arguments.
    """
    probes: set[Probe] = set()
    line = stmt.line
    tops: list[Expr] = []
    for top in stmt_exprs(stmt):
        if isinstance(top, Call) and top.func in VOID_BUILTINS:
            tops.extend(top.args)  # probe assert/print arguments, not the call
        else:
            tops.append(top)
    for top in tops:
        if _mentions(top, names) and not _is_atomic(top):
            kind = CALL if isinstance(top, Call) else SUBEXPR
            probes.add(Probe(fn_name, line, kind, render_expr(top)))
        for node in walk_exprs(top):
            if isinstance(node, Call) and node.func not in VOID_BUILTINS:
                probes.add(Probe(fn_name, line, CALL, render_expr(node)))
            if isinstance(node, Binary):
                for mine, sibling in ((node.lhs, node.rhs), (node.rhs, node.lhs)):
                    if isinstance(mine, Name) and mine.ident in names:
                        if not _is_atomic(sibling) and not isinstance(sibling, Call):
                            probes.add(Probe(fn_name, line, SUBEXPR, render_expr(sibling)))
    return probes


def plan_instrumentation(
    traces: list[FrameTrace], program: SourceProgram
) -> InstrumentationPlan:
    """Probes for every def and use of each traced variable, plus the
    subexpressions and calls involving them at those lines."""
    probes: set[Probe] = set()
    for trace in traces:
        fn = program.functions_by_name[trace.function]
        chains = def_use_analysis(fn)
        names = trace.all_variables()
        lines: set[int] = {
            ln for ln in trace.affected.use_lines
            if program.func_of_line.get(ln) == fn.name
        }
        for v in sorted(names):
            for dl in chains.def_lines.get(v, ()):
                probes.add(Probe(fn.name, dl, VAR_DEF, v))
                lines.add(dl)
            for ul in chains.use_lines.get(v, ()):
                probes.add(Probe(fn.name, ul, VAR_USE, v))
                lines.add(ul)
        for line in lines:
            stmt = program.line_index.get(line)
            if stmt is not None and program.func_of_line.get(line) == fn.name:
                probes.update(_line_probes(fn.name, stmt, names))
        # traced argument expressions at the call site
        call_stmt = program.line_index.get(trace.call_site)
        if call_stmt is not None and program.func_of_line.get(trace.call_site) == fn.name:
            for top in stmt_exprs(call_stmt):
                for node in walk_exprs(top):
                    text = render_expr(node)
                    if text in trace.traced_arguments and not _is_atomic(node):
                        kind = CALL if isinstance(node, Call) else SUBEXPR
                        probes.add(Probe(fn.name, trace.call_site, kind, text))
    return InstrumentationPlan.of(probes)
