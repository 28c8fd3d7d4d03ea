"""MiniLang: parser, evaluator, and instrumentation-capable interpreter."""

from .lexer import ParseError, Token, join_tokens, lex
from .nodes import (
    ArrayLit, Assign, Binary, BoolLit, Call, Expr, ExprStmt, FloatLit, For,
    FunctionDef, If, Index, IndexAssign, IntLit, Let, Name, Param, Return,
    SourceProgram, Stmt, StrLit, TypeAnn, Unary, defined_var, render_expr,
    stmt_exprs, used_vars, walk_exprs, walk_stmts,
)
from .parser import BUILTINS, parse
from .interp import (
    CallStack, Interpreter, MAX_CALL_DEPTH, ProbeResolutionError, RuntimeTrap,
    TargetNotExecuted, TestCase, TestOutcome, capture_call_stack,
    execute_traced, run_test, test_cases,
)
from . import values

__all__ = [
    "ArrayLit", "Assign", "BUILTINS", "Binary", "BoolLit", "Call", "CallStack",
    "Expr", "ExprStmt", "FloatLit", "For", "FunctionDef", "If", "Index",
    "IndexAssign", "IntLit", "Interpreter", "Let", "MAX_CALL_DEPTH", "Name",
    "Param", "ParseError", "ProbeResolutionError", "Return", "RuntimeTrap",
    "SourceProgram", "Stmt", "StrLit", "TargetNotExecuted", "TestCase",
    "TestOutcome", "Token", "TypeAnn", "Unary", "capture_call_stack",
    "defined_var", "execute_traced", "join_tokens", "lex", "parse",
    "render_expr", "run_test", "stmt_exprs", "test_cases", "used_vars",
    "values", "walk_exprs", "walk_stmts",
]
