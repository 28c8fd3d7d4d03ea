"""Runtime value helpers: 32-bit wrapping integer arithmetic and rendering.

MiniLang ints follow Java int semantics: two's-complement, silent wrap-around
on overflow, truncating division, remainder with the dividend's sign. Floats
are IEEE-754 doubles; division by zero yields infinities or NaN, never a trap.
"""

from __future__ import annotations

import math

INT_MIN = -(2**31)
INT_MAX = 2**31 - 1
_MASK = 2**32


def wrap32(x: int) -> int:
    x &= _MASK - 1
    return x - _MASK if x >= 2**31 else x


def add32(a: int, b: int) -> int:
    return wrap32(a + b)


def sub32(a: int, b: int) -> int:
    return wrap32(a - b)


def mul32(a: int, b: int) -> int:
    return wrap32(a * b)


def neg32(a: int) -> int:
    return wrap32(-a)


def abs32(a: int) -> int:
    return wrap32(abs(a))  # abs(INT_MIN) wraps back to INT_MIN, as in Java


def div32(a: int, b: int) -> int:
    # truncation toward zero; INT_MIN / -1 wraps
    q = abs(a) // abs(b)
    if (a < 0) != (b < 0):
        q = -q
    return wrap32(q)


def rem32(a: int, b: int) -> int:
    return wrap32(a - div32(a, b) * b)


def fdiv(a: float, b: float) -> float:
    if b == 0.0:
        if a != a or a == 0.0:
            return math.nan
        sign = math.copysign(1.0, a) * math.copysign(1.0, b)
        return math.inf if sign > 0 else -math.inf
    return a / b


def frem(a: float, b: float) -> float:
    if b == 0.0 or a != a or b != b or math.isinf(a):
        return math.nan
    if math.isinf(b):
        return a
    return math.fmod(a, b)


def render_float(f: float) -> str:
    if f != f:
        return "NaN"
    if f == math.inf:
        return "Infinity"
    if f == -math.inf:
        return "-Infinity"
    return repr(f)


def render_value(v) -> str:
    """Render a runtime value to its canonical display string.

    Floats use the shortest round-trip decimal form; strings are quoted with
    escapes so rendered values never contain raw tabs or newlines.
    """
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return render_float(v)
    if isinstance(v, str):
        out = v.replace("\\", "\\\\").replace('"', '\\"')
        out = out.replace("\n", "\\n").replace("\t", "\\t")
        return f'"{out}"'
    if isinstance(v, list):
        return "[" + ", ".join(render_value(x) for x in v) + "]"
    if v is None:
        return "void"
    raise TypeError(f"unrenderable value {v!r}")


def type_name(v) -> str:
    if isinstance(v, bool):
        return "bool"
    if isinstance(v, int):
        return "int"
    if isinstance(v, float):
        return "float"
    if isinstance(v, str):
        return "str"
    if isinstance(v, list):
        return "array"
    return "void"
