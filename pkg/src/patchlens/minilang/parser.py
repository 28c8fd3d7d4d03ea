"""Recursive-descent parser for MiniLang.

The parser enforces the one-statement-per-line rule: no two statements may
start on the same source line, so a line number addresses at most one
statement. Function headers and closing braces do not count as statements.
"""

from __future__ import annotations

from .lexer import ParseError, Token, lex, string_value
from .nodes import (
    ArrayLit, Assign, Binary, BoolLit, Call, Expr, ExprStmt, FloatLit, For,
    FunctionDef, If, Index, IndexAssign, IntLit, Let, Name, Param, Return,
    SourceProgram, Stmt, StrLit, TypeAnn, Unary, While, walk_stmts,
)

INT_MIN = -(2**31)
INT_MAX = 2**31 - 1

BUILTINS = {"sqrt": 1, "abs": 1, "len": 1, "assert": 2, "print": None}

_TYPE_NAMES = {"int", "float", "bool", "str", "array"}


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0
        self.last_stmt_line = 0

    # -- token helpers ------------------------------------------------------

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def expect(self, lexeme: str) -> Token:
        t = self.peek()
        if t.lexeme != lexeme or t.kind == "eof":
            raise ParseError(f"expected {lexeme!r}, found {t.lexeme or 'end of input'!r}", t.line, t.col)
        return self.next()

    def expect_ident(self, what: str) -> Token:
        t = self.peek()
        if t.kind != "ident":
            raise ParseError(f"expected {what}, found {t.lexeme or 'end of input'!r}", t.line, t.col)
        return self.next()

    def at(self, lexeme: str) -> bool:
        return self.peek().lexeme == lexeme and self.peek().kind != "eof"

    # -- grammar ------------------------------------------------------------

    def parse_program(self) -> list[FunctionDef]:
        functions = []
        while self.peek().kind != "eof":
            if not self.at("fn"):
                t = self.peek()
                raise ParseError(f"expected 'fn', found {t.lexeme!r}", t.line, t.col)
            functions.append(self.parse_function())
        return functions

    def parse_function(self) -> FunctionDef:
        header = self.expect("fn")
        name = self.expect_ident("function name").lexeme
        self.expect("(")
        params: list[Param] = []
        if not self.at(")"):
            while True:
                pname = self.expect_ident("parameter name").lexeme
                self.expect(":")
                params.append(Param(pname, self.parse_type()))
                if self.at(","):
                    self.next()
                    continue
                break
        self.expect(")")
        ret_type = None
        if self.at("->"):
            self.next()
            ret_type = self.parse_type()
        body = self.parse_block()
        seen = set()
        for p in params:
            if p.name in seen:
                raise ParseError(f"duplicate parameter {p.name!r}", header.line, header.col)
            seen.add(p.name)
        return FunctionDef(name, params, ret_type, body, header.line)

    def parse_type(self) -> TypeAnn:
        t = self.peek()
        if t.kind != "ident" or t.lexeme not in _TYPE_NAMES:
            raise ParseError(f"expected a type, found {t.lexeme!r}", t.line, t.col)
        self.next()
        if t.lexeme == "array":
            self.expect("<")
            elem = self.parse_type()
            self.expect(">")
            return TypeAnn("array", elem)
        return TypeAnn(t.lexeme)

    def parse_block(self) -> list[Stmt]:
        self.expect("{")
        body: list[Stmt] = []
        while not self.at("}"):
            if self.peek().kind == "eof":
                t = self.peek()
                raise ParseError("expected '}' before end of input", t.line, t.col)
            body.append(self.parse_statement())
        self.expect("}")
        return body

    def _mark_statement(self, tok: Token):
        if tok.line <= self.last_stmt_line:
            raise ParseError("only one statement per line", tok.line, tok.col)
        self.last_stmt_line = tok.line

    def parse_statement(self) -> Stmt:
        t = self.peek()
        self._mark_statement(t)
        if t.lexeme == "let":
            stmt = self.parse_let()
            self.expect(";")
            return stmt
        if t.lexeme == "if":
            return self.parse_if()
        if t.lexeme == "while":
            self.next()
            self.expect("(")
            cond = self.parse_expr()
            self.expect(")")
            body = self.parse_block()
            return While(t.line, cond, body)
        if t.lexeme == "for":
            return self.parse_for()
        if t.lexeme == "return":
            self.next()
            value = None if self.at(";") else self.parse_expr()
            self.expect(";")
            return Return(t.line, value)
        # assignment or expression statement
        stmt = self.parse_simple()
        self.expect(";")
        return stmt

    def parse_let(self) -> Let:
        t = self.expect("let")
        name = self.expect_ident("variable name").lexeme
        ann = None
        if self.at(":"):
            self.next()
            ann = self.parse_type()
        self.expect("=")
        return Let(t.line, name, ann, self.parse_expr())

    def parse_if(self) -> If:
        t = self.expect("if")
        self.expect("(")
        cond = self.parse_expr()
        self.expect(")")
        then_body = self.parse_block()
        else_body: list[Stmt] = []
        if self.at("else"):
            self.next()
            if self.at("if"):
                else_body = [self.parse_statement()]
            else:
                else_body = self.parse_block()
        return If(t.line, cond, then_body, else_body)

    def parse_for(self) -> For:
        t = self.expect("for")
        self.expect("(")
        if self.at("let"):
            init: Stmt = self.parse_let()
        else:
            init = self.parse_simple()
            if not isinstance(init, Assign):
                raise ParseError("for initializer must be a let or an assignment", t.line, t.col)
        self.expect(";")
        cond = self.parse_expr()
        self.expect(";")
        step = self.parse_simple()
        if not isinstance(step, Assign):
            raise ParseError("for step must be an assignment", t.line, t.col)
        self.expect(")")
        body = self.parse_block()
        return For(t.line, init, cond, step, body)

    def parse_simple(self) -> Stmt:
        t = self.peek()
        if t.kind == "ident":
            nxt = self.tokens[self.pos + 1]
            if nxt.lexeme == "=":
                self.next()
                self.next()
                return Assign(t.line, t.lexeme, self.parse_expr())
            if nxt.lexeme == "[":
                # lookahead: name [ expr ] = expr  is an element assignment
                save = self.pos
                self.next()
                self.next()
                index = self.parse_expr()
                if self.at("]") and self.tokens[self.pos + 1].lexeme == "=":
                    self.next()
                    self.next()
                    return IndexAssign(t.line, t.lexeme, index, self.parse_expr())
                self.pos = save
        expr = self.parse_expr()
        return ExprStmt(t.line, expr)

    # -- expressions, precedence climbing ------------------------------------

    def parse_expr(self) -> Expr:
        return self.parse_or()

    def parse_or(self) -> Expr:
        e = self.parse_and()
        while self.at("||"):
            op = self.next()
            e = Binary(op.line, op.col, "||", e, self.parse_and())
        return e

    def parse_and(self) -> Expr:
        e = self.parse_cmp()
        while self.at("&&"):
            op = self.next()
            e = Binary(op.line, op.col, "&&", e, self.parse_cmp())
        return e

    def parse_cmp(self) -> Expr:
        e = self.parse_add()
        while self.peek().lexeme in ("==", "!=", "<", "<=", ">", ">=") and self.peek().kind == "op":
            op = self.next()
            e = Binary(op.line, op.col, op.lexeme, e, self.parse_add())
        return e

    def parse_add(self) -> Expr:
        e = self.parse_mul()
        while self.peek().lexeme in ("+", "-") and self.peek().kind == "op":
            op = self.next()
            e = Binary(op.line, op.col, op.lexeme, e, self.parse_mul())
        return e

    def parse_mul(self) -> Expr:
        e = self.parse_unary()
        while self.peek().lexeme in ("*", "/", "%") and self.peek().kind == "op":
            op = self.next()
            e = Binary(op.line, op.col, op.lexeme, e, self.parse_unary())
        return e

    def parse_unary(self) -> Expr:
        t = self.peek()
        if t.lexeme in ("-", "!") and t.kind == "op":
            self.next()
            return Unary(t.line, t.col, t.lexeme, self.parse_unary())
        return self.parse_postfix()

    def parse_postfix(self) -> Expr:
        e = self.parse_primary()
        while self.at("["):
            br = self.next()
            index = self.parse_expr()
            self.expect("]")
            e = Index(br.line, br.col, e, index)
        return e

    def parse_primary(self) -> Expr:
        t = self.peek()
        if t.kind == "int":
            self.next()
            value = int(t.lexeme)
            if value > INT_MAX + 1:  # +1: the literal may sit under unary minus
                raise ParseError(f"integer literal {t.lexeme} out of 32-bit range", t.line, t.col)
            return IntLit(t.line, t.col, value)
        if t.kind == "float":
            self.next()
            return FloatLit(t.line, t.col, float(t.lexeme))
        if t.kind == "str":
            self.next()
            return StrLit(t.line, t.col, string_value(t.lexeme))
        if t.lexeme in ("true", "false"):
            self.next()
            return BoolLit(t.line, t.col, t.lexeme == "true")
        if t.lexeme == "(":
            self.next()
            e = self.parse_expr()
            self.expect(")")
            return e
        if t.lexeme == "[":
            self.next()
            items = []
            if not self.at("]"):
                while True:
                    items.append(self.parse_expr())
                    if self.at(","):
                        self.next()
                        continue
                    break
            self.expect("]")
            return ArrayLit(t.line, t.col, items)
        if t.kind == "ident":
            self.next()
            if self.at("("):
                self.next()
                args = []
                if not self.at(")"):
                    while True:
                        args.append(self.parse_expr())
                        if self.at(","):
                            self.next()
                            continue
                        break
                self.expect(")")
                return Call(t.line, t.col, t.lexeme, args)
            return Name(t.line, t.col, t.lexeme)
        raise ParseError(f"expected an expression, found {t.lexeme or 'end of input'!r}", t.line, t.col)


def _check_int_literals(program: list[FunctionDef]):
    from .nodes import stmt_exprs, walk_exprs

    for fn in program:
        for s in walk_stmts(fn.body):
            for top in stmt_exprs(s):
                negated = {
                    id(e.operand)
                    for e in walk_exprs(top)
                    if isinstance(e, Unary) and e.op == "-" and isinstance(e.operand, IntLit)
                }
                for e in walk_exprs(top):
                    if isinstance(e, IntLit):
                        limit = INT_MAX + 1 if id(e) in negated else INT_MAX
                        if e.value > limit:
                            raise ParseError(
                                f"integer literal {e.value} out of 32-bit range", e.line, e.col
                            )


def _resolve_names(functions: list[FunctionDef]):
    """Static name resolution: variables defined before use, calls resolve."""
    fn_names = {f.name for f in functions}

    for fn in functions:
        scope = {p.name for p in fn.params}

        def check_expr(e: Expr):
            from .nodes import walk_exprs

            for sub in walk_exprs(e):
                if isinstance(sub, Name) and sub.ident not in scope:
                    raise ParseError(f"undefined variable {sub.ident!r}", sub.line, sub.col)
                if isinstance(sub, Call):
                    if sub.func in BUILTINS:
                        arity = BUILTINS[sub.func]
                        if arity is not None and len(sub.args) != arity:
                            raise ParseError(
                                f"builtin {sub.func!r} takes {arity} argument(s)",
                                sub.line, sub.col,
                            )
                    elif sub.func in fn_names:
                        target = next(f for f in functions if f.name == sub.func)
                        if len(sub.args) != len(target.params):
                            raise ParseError(
                                f"function {sub.func!r} takes {len(target.params)} argument(s)",
                                sub.line, sub.col,
                            )
                    else:
                        raise ParseError(f"undefined function {sub.func!r}", sub.line, sub.col)

        def check_body(body: list[Stmt]):
            for s in body:
                if isinstance(s, Let):
                    check_expr(s.value)
                    if s.name in scope:
                        raise ParseError(f"variable {s.name!r} already defined", s.line, 1)
                    scope.add(s.name)
                elif isinstance(s, Assign):
                    check_expr(s.value)
                    if s.name not in scope:
                        raise ParseError(f"undefined variable {s.name!r}", s.line, 1)
                elif isinstance(s, IndexAssign):
                    if s.name not in scope:
                        raise ParseError(f"undefined variable {s.name!r}", s.line, 1)
                    check_expr(s.index)
                    check_expr(s.value)
                elif isinstance(s, If):
                    check_expr(s.cond)
                    check_body(s.then_body)
                    check_body(s.else_body)
                elif isinstance(s, While):
                    check_expr(s.cond)
                    check_body(s.body)
                elif isinstance(s, For):
                    check_body([s.init])
                    check_expr(s.cond)
                    check_body([s.step])
                    check_body(s.body)
                elif isinstance(s, Return):
                    if s.value is not None:
                        check_expr(s.value)
                elif isinstance(s, ExprStmt):
                    check_expr(s.expr)

        check_body(fn.body)


def parse_statement_text(text: str) -> Stmt:
    """Parse a single statement (or block header) in isolation.

    No name resolution: this is the syntactic check used when mutating or
    validating patch replacement text before splicing it into a program.
    """
    stripped = text.strip()
    source = stripped + "\n}" if stripped.endswith("{") else stripped
    parser = _Parser(lex(source))
    stmt = parser.parse_statement()
    trailing = parser.peek()
    if trailing.kind != "eof":
        raise ParseError(f"unexpected {trailing.lexeme!r} after the statement",
                         trailing.line, trailing.col)
    return stmt


def parse(source_text: str) -> SourceProgram:
    """Parse MiniLang source into a SourceProgram.

    Raises ParseError with line/column on malformed input, duplicate function
    names, undefined names, or violations of the one-statement-per-line rule.
    """
    tokens = lex(source_text)
    functions = _Parser(tokens).parse_program()

    by_name: dict[str, FunctionDef] = {}
    for fn in functions:
        if fn.name in by_name:
            raise ParseError(f"duplicate function {fn.name!r}", fn.line, 1)
        by_name[fn.name] = fn

    _check_int_literals(functions)
    _resolve_names(functions)

    line_index: dict[int, Stmt] = {}
    func_of_line: dict[int, str] = {}
    for fn in functions:
        prev = 0
        for s in walk_stmts(fn.body):
            line_index[s.line] = s
            func_of_line[s.line] = fn.name
        for s in fn.body:
            if s.line <= prev:
                raise ParseError("statement lines must increase", s.line, 1)
            prev = s.line

    return SourceProgram(functions, source_text, line_index, func_of_line, by_name)
