"""AST node definitions for MiniLang plus source rendering of expressions."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class TypeAnn:
    """A type annotation: int, float, bool, str, or array<T>."""

    name: str
    elem: TypeAnn | None = None

    def render(self) -> str:
        if self.name == "array":
            return f"array<{self.elem.render()}>"
        return self.name


# ---------------------------------------------------------------------------
# Expressions
# ---------------------------------------------------------------------------


@dataclass
class Expr:
    line: int
    col: int


@dataclass
class IntLit(Expr):
    value: int


@dataclass
class FloatLit(Expr):
    value: float


@dataclass
class StrLit(Expr):
    value: str


@dataclass
class BoolLit(Expr):
    value: bool


@dataclass
class ArrayLit(Expr):
    items: list[Expr]


@dataclass
class Name(Expr):
    ident: str


@dataclass
class Unary(Expr):
    op: str
    operand: Expr


@dataclass
class Binary(Expr):
    op: str
    lhs: Expr
    rhs: Expr


@dataclass
class Call(Expr):
    func: str
    args: list[Expr]


@dataclass
class Index(Expr):
    base: Expr
    index: Expr


# ---------------------------------------------------------------------------
# Statements
# ---------------------------------------------------------------------------


@dataclass
class Stmt:
    line: int


@dataclass
class Let(Stmt):
    name: str
    type_ann: TypeAnn | None
    value: Expr


@dataclass
class Assign(Stmt):
    name: str
    value: Expr


@dataclass
class IndexAssign(Stmt):
    name: str
    index: Expr
    value: Expr


@dataclass
class If(Stmt):
    cond: Expr
    then_body: list[Stmt]
    else_body: list[Stmt]


@dataclass
class While(Stmt):
    cond: Expr
    body: list[Stmt]


@dataclass
class For(Stmt):
    init: Stmt  # Let or Assign
    cond: Expr
    step: Stmt  # Assign
    body: list[Stmt]


@dataclass
class Return(Stmt):
    value: Expr | None


@dataclass
class ExprStmt(Stmt):
    expr: Expr


@dataclass
class Param:
    name: str
    type_ann: TypeAnn


@dataclass
class FunctionDef:
    name: str
    params: list[Param]
    return_type: TypeAnn | None
    body: list[Stmt]
    line: int


@dataclass
class SourceProgram:
    """A parsed MiniLang program.

    Immutable after parsing; line_index maps every statement's 1-based source
    line to the statement node, and func_of_line maps it to the enclosing
    function name.
    """

    functions: list[FunctionDef]
    source_text: str
    line_index: dict[int, Stmt] = field(default_factory=dict)
    func_of_line: dict[int, str] = field(default_factory=dict)
    functions_by_name: dict[str, FunctionDef] = field(default_factory=dict)

    def source_line(self, line: int) -> str:
        return self.source_text.split("\n")[line - 1]


# ---------------------------------------------------------------------------
# Expression rendering (used for probe names and diagnostics)
# ---------------------------------------------------------------------------

_PREC = {
    "||": 1,
    "&&": 2,
    "==": 3, "!=": 3, "<": 3, "<=": 3, ">": 3, ">=": 3,
    "+": 4, "-": 4,
    "*": 5, "/": 5, "%": 5,
}
_UNARY_PREC = 6


def render_expr(e: Expr) -> str:
    """Render an expression to canonical source text with minimal parentheses."""
    return _render(e, 0)


def _render(e: Expr, parent_prec: int) -> str:
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, FloatLit):
        return repr(e.value)
    if isinstance(e, BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, StrLit):
        out = e.value.replace("\\", "\\\\").replace('"', '\\"')
        out = out.replace("\n", "\\n").replace("\t", "\\t")
        return f'"{out}"'
    if isinstance(e, Name):
        return e.ident
    if isinstance(e, ArrayLit):
        return "[" + ", ".join(_render(x, 0) for x in e.items) + "]"
    if isinstance(e, Call):
        return e.func + "(" + ", ".join(_render(a, 0) for a in e.args) + ")"
    if isinstance(e, Index):
        return _render(e.base, _UNARY_PREC) + "[" + _render(e.index, 0) + "]"
    if isinstance(e, Unary):
        inner = _render(e.operand, _UNARY_PREC)
        text = e.op + inner
        return f"({text})" if parent_prec > _UNARY_PREC else text
    if isinstance(e, Binary):
        prec = _PREC[e.op]
        # left-associative: right child needs strictly higher precedence
        text = f"{_render(e.lhs, prec)} {e.op} {_render(e.rhs, prec + 1)}"
        return f"({text})" if prec < parent_prec else text
    raise TypeError(f"unknown expression node {type(e).__name__}")


def render_stmt(s: Stmt) -> str:
    """Render a statement to one line of source; block statements render
    their header with the opening brace."""
    if isinstance(s, Let):
        ann = f": {s.type_ann.render()}" if s.type_ann is not None else ""
        return f"let {s.name}{ann} = {render_expr(s.value)};"
    if isinstance(s, Assign):
        return f"{s.name} = {render_expr(s.value)};"
    if isinstance(s, IndexAssign):
        return f"{s.name}[{render_expr(s.index)}] = {render_expr(s.value)};"
    if isinstance(s, If):
        return f"if ({render_expr(s.cond)}) {{"
    if isinstance(s, While):
        return f"while ({render_expr(s.cond)}) {{"
    if isinstance(s, For):
        init = render_stmt(s.init)[:-1]  # strip the trailing semicolon
        step = render_stmt(s.step)[:-1]
        return f"for ({init}; {render_expr(s.cond)}; {step}) {{"
    if isinstance(s, Return):
        return f"return {render_expr(s.value)};" if s.value is not None else "return;"
    if isinstance(s, ExprStmt):
        return f"{render_expr(s.expr)};"
    raise TypeError(f"unknown statement node {type(s).__name__}")


def walk_exprs(e: Expr):
    """Yield e and every subexpression, pre-order."""
    yield e
    if isinstance(e, ArrayLit):
        for x in e.items:
            yield from walk_exprs(x)
    elif isinstance(e, Unary):
        yield from walk_exprs(e.operand)
    elif isinstance(e, Binary):
        yield from walk_exprs(e.lhs)
        yield from walk_exprs(e.rhs)
    elif isinstance(e, Call):
        for a in e.args:
            yield from walk_exprs(a)
    elif isinstance(e, Index):
        yield from walk_exprs(e.base)
        yield from walk_exprs(e.index)


def stmt_exprs(s: Stmt) -> list[Expr]:
    """Top-level expressions evaluated by a statement (per dynamic execution)."""
    if isinstance(s, Let):
        return [s.value]
    if isinstance(s, Assign):
        return [s.value]
    if isinstance(s, IndexAssign):
        return [s.index, s.value]
    if isinstance(s, If):
        return [s.cond]
    if isinstance(s, While):
        return [s.cond]
    if isinstance(s, For):
        return stmt_exprs(s.init) + [s.cond] + stmt_exprs(s.step)
    if isinstance(s, Return):
        return [s.value] if s.value is not None else []
    if isinstance(s, ExprStmt):
        return [s.expr]
    raise TypeError(f"unknown statement node {type(s).__name__}")


def defined_var(s: Stmt) -> str | None:
    """The variable a statement defines, if any (MiniLang defines at most one)."""
    if isinstance(s, Let):
        return s.name
    if isinstance(s, Assign):
        return s.name
    if isinstance(s, IndexAssign):
        return s.name
    if isinstance(s, For):
        return defined_var(s.init)
    return None


def used_vars(s: Stmt) -> set[str]:
    """Variables read by a statement (excluding nested block bodies)."""
    names: set[str] = set()
    for e in stmt_exprs(s):
        for sub in walk_exprs(e):
            if isinstance(sub, Name):
                names.add(sub.ident)
    if isinstance(s, IndexAssign):
        names.add(s.name)  # element write reads the array it updates
    return names


def walk_stmts(body: list[Stmt]):
    """Yield every statement in a body, pre-order, including nested blocks."""
    for s in body:
        yield s
        if isinstance(s, If):
            yield from walk_stmts(s.then_body)
            yield from walk_stmts(s.else_body)
        elif isinstance(s, While):
            yield from walk_stmts(s.body)
        elif isinstance(s, For):
            yield from walk_stmts(s.body)
