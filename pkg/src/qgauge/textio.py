"""Canonical text form of scalars, superfunctions and derivations.

Expressions use the grammar ``3/2*x1^2*x2 + (1 + x1)*th1*th2``: rational
numbers, identifiers, ``+ - * /`` and ``^`` with integer exponents.  Parsing
goes through Python's own expression parser and a whitelist evaluator, so
nothing is ever executed.
"""

from __future__ import annotations

import ast
import re

from gmpy2 import mpq

from .graded import Chart, Derivation, Superfunction
from .scalar import Scalar, natural_key

__all__ = [
    "ParseError",
    "parse_scalar",
    "parse_superfunction",
    "parse_derivation",
    "format_scalar",
    "format_superfunction",
    "format_derivation",
]


class ParseError(ValueError):
    def __init__(self, msg: str, text: str = "", column: int | None = None):
        self.text = text
        self.column = column
        where = f" at column {column + 1}" if column is not None else ""
        super().__init__(f"{msg}{where}: {text!r}" if text else msg)


_ALLOWED = re.compile(r"^[A-Za-z0-9_+\-*/^().\s]*$")


def _evaluate(text: str, resolve, lift):
    if not isinstance(text, str):
        text = str(text)
    if not _ALLOWED.match(text):
        bad = next(i for i, ch in enumerate(text) if not _ALLOWED.match(ch))
        raise ParseError("unexpected character", text, bad)
    src = text.replace("^", "**")
    try:
        tree = ast.parse(src.strip() or "0", mode="eval")
    except SyntaxError as exc:
        col = (exc.offset or 0) - 1
        if not 0 <= col < len(text.rstrip()):
            col = len(text.rstrip())
        raise ParseError("syntax error", text, col) from None

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant):
            if isinstance(node.value, bool) or not isinstance(node.value, int):
                raise ParseError("only integer literals are allowed", text, node.col_offset)
            return lift(Scalar(node.value))
        if isinstance(node, ast.Name):
            try:
                return resolve(node.id)
            except KeyError as exc:
                raise ParseError(str(exc), text, node.col_offset) from None
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp):
            if isinstance(node.op, ast.Pow):
                exp = _int_exponent(node.right, text)
                base = ev(node.left)
                try:
                    return base**exp
                except (ValueError, ZeroDivisionError) as exc:
                    raise ParseError(str(exc), text, node.col_offset) from None
            a, b = ev(node.left), ev(node.right)
            if isinstance(node.op, ast.Add):
                return a + b
            if isinstance(node.op, ast.Sub):
                return a - b
            if isinstance(node.op, ast.Mult):
                return a * b
            if isinstance(node.op, ast.Div):
                if isinstance(b, Superfunction):
                    if any(m != b.chart._unit for m in b.terms):
                        raise ParseError("division by a non-scalar", text, node.col_offset)
                    b = b.scalar_part()
                try:
                    return a / b
                except ZeroDivisionError:
                    raise ParseError("zero divisor", text, node.col_offset) from None
        raise ParseError(f"unsupported syntax {type(node).__name__}", text,
                         getattr(node, "col_offset", None))

    return ev(tree)


def _int_exponent(node, text):
    sign = 1
    while isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        if isinstance(node.op, ast.USub):
            sign = -sign
        node = node.operand
    if isinstance(node, ast.Constant) and isinstance(node.value, int) and not isinstance(
            node.value, bool):
        return sign * node.value
    raise ParseError("exponent must be an integer literal", text,
                     getattr(node, "col_offset", None))


def parse_scalar(text) -> Scalar:
    if isinstance(text, Scalar):
        return text
    if isinstance(text, int):
        return Scalar(text)
    return _evaluate(text, Scalar.var, lambda s: s)


def parse_superfunction(text, chart: Chart) -> Superfunction:
    if isinstance(text, Superfunction):
        return text

    def resolve(name):
        if name in chart.by_name:
            return chart.coord(name)
        return chart.scalar(Scalar.var(name))

    value = _evaluate(text, resolve, chart.scalar)
    if isinstance(value, Scalar):
        value = chart.scalar(value)
    return value


def format_scalar(s: Scalar) -> str:
    return str(s)


def _mono_str(chart: Chart, mono: tuple) -> str:
    parts = []
    for c, e in zip(chart.graded, mono):
        if e:
            parts.append(c.name if e == 1 else f"{c.name}^{e}")
    return "*".join(parts)


def _coef_str(s: Scalar) -> str:
    text = str(s)
    if s.den or len(s.num.terms) > 1:
        return f"({text})"
    return text


def format_superfunction(f: Superfunction) -> str:
    if not f.terms:
        return "0"
    chart = f.chart
    items = sorted(f.terms.items(), key=lambda kv: (chart.mono_degree(kv[0]), kv[0]),
                   reverse=True)
    out = []
    for mono, c in items:
        m = _mono_str(chart, mono)
        out.append(f"{_coef_str(c)}*{m}" if m else _coef_str(c))
    return " + ".join(out)


def _component_order(D: Derivation):
    order = {c.name: i for i, c in enumerate(D.chart.coordinates)}
    return sorted(D.components, key=lambda n: (order.get(n, len(order)), natural_key(n)))


def format_derivation(D: Derivation) -> str:
    head = f"deg={D.degree}" if D.degree is not None else f"parity={D.parity}"
    body = "; ".join(f"{n}: {format_superfunction(D.components[n])}"
                     for n in _component_order(D))
    return f"{head} {{{body}}}"


_DER = re.compile(r"^\s*(deg|parity)=(-?\d+)\s*\{(.*)\}\s*$", re.S)


def parse_derivation(text: str, chart: Chart) -> Derivation:
    m = _DER.match(text)
    if not m:
        raise ParseError("expected 'deg=<k> {name: expr; ...}'", text, 0)
    kind, value, body = m.group(1), int(m.group(2)), m.group(3)
    comps = {}
    if body.strip():
        for item in body.split(";"):
            if ":" not in item:
                raise ParseError("component without ':'", text, text.find(item))
            name, expr = item.split(":", 1)
            name = name.strip()
            if not re.match(r"^[A-Za-z_]\w*$", name):
                raise ParseError("bad component name", text, text.find(item))
            comps[name] = parse_superfunction(expr, chart)
    if kind == "deg":
        return Derivation(chart, comps, value)
    return Derivation(chart, comps, None, parity=value, check=False)


def rational_str(q: mpq) -> str:
    return str(mpq(q))
