"""Runtime value semantics shared by the interpreter and generated code.

Integers behave as wrapping two's-complement 64-bit values, division and
modulo truncate toward zero (the remainder takes the dividend's sign), and
floats follow IEEE 754 double rules. Strings are capped at STRING_CAP code
points; concatenation silently truncates the excess.
"""

from __future__ import annotations

import math

from .errors import EvalFault

I64_MIN = -(1 << 63)
I64_MAX = (1 << 63) - 1
_MASK = (1 << 64) - 1

STRING_CAP = 4096


def wrap64(x: int) -> int:
    return ((x + (1 << 63)) & _MASK) - (1 << 63)


def iadd(a: int, b: int) -> int:
    return wrap64(a + b)


def isub(a: int, b: int) -> int:
    return wrap64(a - b)


def imul(a: int, b: int) -> int:
    return wrap64(a * b)


def ineg(a: int) -> int:
    return wrap64(-a)


def idiv(a: int, b: int) -> int:
    if b == 0:
        raise EvalFault("integer division by zero")
    q = abs(a) // abs(b)
    if (a < 0) != (b < 0):
        q = -q
    return wrap64(q)


def imod(a: int, b: int) -> int:
    if b == 0:
        raise EvalFault("integer modulo by zero")
    q = abs(a) // abs(b)
    if (a < 0) != (b < 0):
        q = -q
    return a - q * b


def fdiv(a: float, b: float) -> float:
    if b == 0.0:
        if a == 0.0 or math.isnan(a):
            return math.nan
        return math.copysign(math.inf, a) * math.copysign(1.0, b)
    return a / b


def clamp_str(s: str) -> str:
    if len(s) > STRING_CAP:
        return s[:STRING_CAP]
    return s


def concat(a: str, b: str) -> str:
    return clamp_str(a + b)


def to_string(v) -> str:
    if v is True:
        return "true"
    if v is False:
        return "false"
    if isinstance(v, float):
        return clamp_str(repr(v))
    if isinstance(v, str):
        return clamp_str(v)
    return str(v)


def apply_binary(op: str, a, b, value_type):
    """Evaluate a non-short-circuit binary operator.

    ``value_type`` is the statically determined operand/result ValueType;
    only its name is inspected so the checker and the engine can share this.
    """
    name = value_type.value if value_type is not None else None
    if op == "+":
        if name == "string":
            return concat(a, b)
        if name == "int":
            return iadd(a, b)
        return a + b
    if op == "-":
        return isub(a, b) if name == "int" else a - b
    if op == "*":
        return imul(a, b) if name == "int" else a * b
    if op == "/":
        return idiv(a, b) if name == "int" else fdiv(a, b)
    if op == "%":
        return imod(a, b)
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    if op == ">=":
        return a >= b
    if op == "==":
        return a == b
    if op == "!=":
        return a != b
    if op == "&":
        return a & b
    if op == "^":
        return a ^ b
    if op == "|":
        return a | b
    raise AssertionError(f"unknown operator {op!r}")
