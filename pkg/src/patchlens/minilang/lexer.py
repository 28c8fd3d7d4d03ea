"""Lexer for MiniLang source text.

Two modes: strict lexing for the parser (unknown characters are errors) and
total lexing for patch tokenization (unknown characters become single-character
tokens; never raises).
"""

from __future__ import annotations

from dataclasses import dataclass


class ParseError(Exception):
    """Syntax error with position and an expected-token style message."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"line {line}, col {col}: {message}")
        self.message = message
        self.line = line
        self.col = col


KEYWORDS = {"fn", "let", "if", "else", "while", "for", "return", "true", "false"}

# longest first so that >= lexes before >
_OPERATORS = [
    "->", "==", "!=", "<=", ">=", "&&", "||",
    "+", "-", "*", "/", "%", "<", ">", "=", "!",
    "(", ")", "{", "}", "[", "]", ",", ";", ":",
]


@dataclass(frozen=True)
class Token:
    kind: str  # ident | keyword | int | float | str | op | other | eof
    lexeme: str
    line: int
    col: int


def lex(source: str, total: bool = False) -> list[Token]:
    tokens: list[Token] = []
    i = 0
    line = 1
    col = 1
    n = len(source)

    def advance(k: int):
        nonlocal i, line, col
        for _ in range(k):
            if source[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < n:
        c = source[i]
        if c in " \t\r\n":
            advance(1)
            continue
        if c == "/" and source.startswith("//", i):
            while i < n and source[i] != "\n":
                advance(1)
            continue
        start_line, start_col = line, col
        if c.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            if j < n and source[j] == "." and j + 1 < n and source[j + 1].isdigit():
                j += 1
                while j < n and source[j].isdigit():
                    j += 1
                text = source[i:j]
                tokens.append(Token("float", text, start_line, start_col))
            else:
                text = source[i:j]
                tokens.append(Token("int", text, start_line, start_col))
            advance(j - i)
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            text = source[i:j]
            kind = "keyword" if text in KEYWORDS else "ident"
            tokens.append(Token(kind, text, start_line, start_col))
            advance(j - i)
            continue
        if c == '"':
            j = i + 1
            value = []
            closed = False
            while j < n:
                ch = source[j]
                if ch == "\\" and j + 1 < n:
                    esc = source[j + 1]
                    value.append({"n": "\n", "t": "\t", '"': '"', "\\": "\\"}.get(esc, esc))
                    j += 2
                    continue
                if ch == '"':
                    closed = True
                    j += 1
                    break
                if ch == "\n":
                    break
                value.append(ch)
                j += 1
            if not closed and not total:
                raise ParseError("unterminated string literal", start_line, start_col)
            tokens.append(Token("str", source[i:j], start_line, start_col))
            advance(j - i)
            continue
        for op in _OPERATORS:
            if source.startswith(op, i):
                tokens.append(Token("op", op, start_line, start_col))
                advance(len(op))
                break
        else:
            if total:
                tokens.append(Token("other", c, start_line, start_col))
                advance(1)
            else:
                raise ParseError(f"unexpected character {c!r}", start_line, start_col)
    tokens.append(Token("eof", "", line, col))
    return tokens


def string_value(lexeme: str) -> str:
    """Decode a string token's lexeme to its value."""
    body = lexeme[1:-1] if lexeme.endswith('"') and len(lexeme) >= 2 else lexeme[1:]
    out = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\" and i + 1 < len(body):
            out.append({"n": "\n", "t": "\t", '"': '"', "\\": "\\"}.get(body[i + 1], body[i + 1]))
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


_NO_SPACE_BEFORE = {")", "]", ",", ";", ":", "."}
_NO_SPACE_AFTER = {"(", "[", ".", "!"}


def join_tokens(lexemes: list[str]) -> str:
    """Join token lexemes back into readable source text.

    Spacing heuristic: no space around '.', after '(' / '[' / '!', or before
    ')' / ']' / ',' / ';' / ':'; no space between a name and its call/index
    bracket; a single space elsewhere.
    """
    out: list[str] = []
    prev = ""
    for t in lexemes:
        if not out:
            out.append(t)
            prev = t
            continue
        sep = " "
        if t in _NO_SPACE_BEFORE or prev in _NO_SPACE_AFTER:
            sep = ""
        elif t in ("(", "[") and (prev[-1:].isalnum() or prev[-1:] in ("_", ")", "]")):
            sep = ""
        out.append(sep + t)
        prev = t
    return "".join(out)
