"""Exact coefficient ring: rational functions of the degree-0 coordinates.

A :class:`Scalar` is a polynomial numerator over a *factored* denominator.
Denominator factors are kept as they were encountered (normalized to a
leading coefficient of one); the only simplification performed is exact
cancellation of a factor that divides the numerator.  Zero testing never
depends on that simplification: a scalar is zero iff its numerator is the
zero polynomial.

Variables are identified by name.  Internally every name is interned into a
process-wide registry and monomials are exponent tuples indexed by that
registry, so printing never relies on registration order.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Mapping

from gmpy2 import mpq

__all__ = [
    "Poly",
    "Scalar",
    "ZeroDivisorError",
    "EvaluationPole",
    "as_scalar",
    "to_mpq",
    "natural_key",
]


class ZeroDivisorError(ZeroDivisionError):
    def __init__(self, msg: str = "zero divisor"):
        super().__init__(msg)


class EvaluationPole(ArithmeticError):
    def __init__(self, msg: str = "evaluation pole"):
        super().__init__(msg)


_NAMES: list[str] = []
_INDEX: dict[str, int] = {}


def _var_index(name: str) -> int:
    idx = _INDEX.get(name)
    if idx is None:
        idx = len(_NAMES)
        _NAMES.append(name)
        _INDEX[name] = idx
    return idx


def natural_key(name: str):
    """Sort key that orders ``x2`` before ``x10``."""
    return tuple(int(t) if t.isdigit() else t for t in re.split(r"(\d+)", name))


def to_mpq(value) -> mpq:
    if isinstance(value, mpq):
        return value
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    if isinstance(value, str):
        return mpq(value)
    if isinstance(value, float):
        raise TypeError("floating point values are not accepted in the exact kernel")
    return mpq(value)


_ZERO = mpq(0)
_ONE = mpq(1)


def _strip(mono: tuple) -> tuple:
    n = len(mono)
    while n and mono[n - 1] == 0:
        n -= 1
    return mono if n == len(mono) else mono[:n]


def _mono_mul(a: tuple, b: tuple) -> tuple:
    if len(a) < len(b):
        a, b = b, a
    lb = len(b)
    return tuple([a[i] + b[i] for i in range(lb)]) + a[lb:]


def _mono_divides(b: tuple, a: tuple) -> bool:
    if len(b) > len(a):
        return False
    for i in range(len(b)):
        if b[i] > a[i]:
            return False
    return True


def _mono_div(a: tuple, b: tuple) -> tuple:
    out = list(a)
    for i in range(len(b)):
        out[i] -= b[i]
    return _strip(tuple(out))


class Poly:
    """Sparse multivariate polynomial with exact rational coefficients."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: dict | None = None):
        self.terms: dict[tuple, mpq] = terms if terms is not None else {}
        self._hash = None

    @classmethod
    def const(cls, c) -> "Poly":
        c = to_mpq(c)
        return cls({(): c} if c else {})

    @classmethod
    def var(cls, name: str) -> "Poly":
        idx = _var_index(name)
        return cls({(0,) * idx + (1,): _ONE})

    # -- predicates -------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and () in self.terms)

    def constant_value(self) -> mpq:
        return self.terms.get((), _ZERO)

    def __eq__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    # -- arithmetic -------------------------------------------------------
    def __add__(self, other: "Poly") -> "Poly":
        if not self.terms:
            return other
        if not other.terms:
            return self
        out = dict(self.terms)
        for m, c in other.terms.items():
            v = out.get(m)
            if v is None:
                out[m] = c
            else:
                v = v + c
                if v:
                    out[m] = v
                else:
                    del out[m]
        return Poly(out)

    def __neg__(self) -> "Poly":
        return Poly({m: -c for m, c in self.terms.items()})

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def scale(self, c) -> "Poly":
        c = to_mpq(c)
        if not c:
            return Poly()
        if c == 1:
            return self
        return Poly({m: v * c for m, v in self.terms.items()})

    def __mul__(self, other: "Poly") -> "Poly":
        if not self.terms or not other.terms:
            return Poly()
        if len(other.terms) == 1 and () in other.terms:
            return self.scale(other.terms[()])
        if len(self.terms) == 1 and () in self.terms:
            return other.scale(self.terms[()])
        out: dict[tuple, mpq] = {}
        for ma, ca in self.terms.items():
            for mb, cb in other.terms.items():
                m = _mono_mul(ma, mb)
                v = out.get(m)
                out[m] = ca * cb if v is None else v + ca * cb
        return Poly({m: c for m, c in out.items() if c})

    def __pow__(self, e: int) -> "Poly":
        if e < 0:
            raise ValueError("negative power of a polynomial")
        result = Poly.const(1)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def leading(self) -> tuple[tuple, mpq]:
        m = max(self.terms)
        return m, self.terms[m]

    def divexact(self, d: "Poly") -> "Poly | None":
        """Quotient ``self / d`` if ``d`` divides ``self`` exactly, else None."""
        if d.is_zero():
            raise ZeroDivisorError()
        if not self.terms:
            return Poly()
        if d.is_constant():
            return self.scale(1 / d.constant_value())
        lm_d, lc_d = d.leading()
        rem = dict(self.terms)
        quot: dict[tuple, mpq] = {}
        while rem:
            m = max(rem)
            if not _mono_divides(lm_d, m):
                return None
            qm = _mono_div(m, lm_d)
            qc = rem[m] / lc_d
            quot[qm] = qc
            for md, cd in d.terms.items():
                mm = _mono_mul(qm, md)
                v = rem.get(mm, _ZERO) - qc * cd
                if v:
                    rem[mm] = v
                else:
                    rem.pop(mm, None)
        return Poly(quot)

    def diff(self, name: str) -> "Poly":
        idx = _INDEX.get(name)
        if idx is None:
            return Poly()
        out = {}
        for m, c in self.terms.items():
            if len(m) > idx and m[idx]:
                e = m[idx]
                nm = list(m)
                nm[idx] = e - 1
                out[_strip(tuple(nm))] = c * e
        return Poly(out)

    def variables(self) -> set[str]:
        seen: set[int] = set()
        for m in self.terms:
            for i, e in enumerate(m):
                if e:
                    seen.add(i)
        return {_NAMES[i] for i in seen}

    def evaluate(self, point: Mapping[str, mpq]) -> mpq:
        total = _ZERO
        for m, c in self.terms.items():
            v = c
            for i, e in enumerate(m):
                if e:
                    v = v * point[_NAMES[i]] ** e
            total += v
        return total

    def monic(self) -> tuple["Poly", mpq]:
        """Split into (monic polynomial, leading coefficient)."""
        _, lc = self.leading()
        if lc == 1:
            return self, _ONE
        return self.scale(1 / lc), lc

    def sort_key(self):
        return tuple(sorted(self.terms.items()))

    # -- printing ---------------------------------------------------------
    def _ordered_terms(self):
        def key(item):
            m, _ = item
            named = sorted(((_NAMES[i], e) for i, e in enumerate(m) if e),
                           key=lambda t: natural_key(t[0]))
            return (sum(m), tuple((natural_key(n), e) for n, e in named))

        # graded order, highest total degree first; ties broken on names
        items = list(self.terms.items())
        items.sort(key=lambda it: key(it)[1])
        items.sort(key=lambda it: key(it)[0], reverse=True)
        return items

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m, c in self._ordered_terms():
            factors = sorted(((_NAMES[i], e) for i, e in enumerate(m) if e),
                             key=lambda t: natural_key(t[0]))
            mono = "*".join(n if e == 1 else f"{n}^{e}" for n, e in factors)
            mag = abs(c)
            if not mono:
                body = str(mag)
            elif mag == 1:
                body = mono
            else:
                body = f"{mag}*{mono}"
            sign = "-" if c < 0 else "+"
            parts.append((sign, body))
        first_sign, first_body = parts[0]
        out = ("-" if first_sign == "-" else "") + first_body
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    def __repr__(self):
        return f"Poly({self})"


def _udense(f: Poly, idx: int) -> list:
    out = [mpq(0)] * (max(m[idx] if idx < len(m) else 0 for m in f.terms) + 1)
    for m, c in f.terms.items():
        out[m[idx] if idx < len(m) else 0] = c
    return out


def _utrim(a: list) -> list:
    while a and not a[-1]:
        a = a[:-1]
    return a


def _umonic(a: list) -> list:
    a = _utrim(a)
    lc = a[-1]
    return [c / lc for c in a]


def _udivmod(a: list, b: list):
    a = list(a)
    q = [mpq(0)] * max(len(a) - len(b) + 1, 1)
    while len(_utrim(a)) >= len(b):
        a = _utrim(a)
        k = len(a) - len(b)
        f = a[-1] / b[-1]
        q[k] = f
        for i, c in enumerate(b):
            a[i + k] -= f * c
    return q, _utrim(a)


def _ugcd(a: list, b: list) -> list:
    a, b = _utrim(a), _utrim(b)
    while b:
        _, r = _udivmod(a, b)
        a, b = b, r
    return _umonic(a)


def _uderiv(a: list) -> list:
    return [c * i for i, c in enumerate(a)][1:]


def _squarefree(f: Poly) -> list[tuple[Poly, int]]:
    """Yun's square-free decomposition for univariate monic ``f``; else ``[(f, 1)]``."""
    vs = f.variables()
    if len(vs) != 1:
        return [(f, 1)]
    name = next(iter(vs))
    idx = _var_index(name)
    a = _udense(f, idx)
    if len(a) <= 2:
        return [(f, 1)]
    g = _ugcd(a, _uderiv(a))
    if len(g) == 1:
        return [(f, 1)]
    out = []
    b, _ = _udivmod(a, g)
    c, _ = _udivmod(_uderiv(a), g)
    d = [x - y for x, y in zip(c + [mpq(0)] * len(b), _uderiv(b) + [mpq(0)] * len(c))]
    i = 1
    while len(_utrim(b)) > 1:
        h = _ugcd(b, _utrim(d) or [mpq(0)]) if _utrim(d) else _umonic(b)
        if len(h) > 1:
            out.append((h, i))
        b, _ = _udivmod(b, h)
        c, _ = _udivmod(_utrim(d) or [mpq(0)], h) if _utrim(d) else ([mpq(0)], [])
        db = _uderiv(b)
        n = max(len(c), len(db))
        d = [(c[k] if k < len(c) else 0) - (db[k] if k < len(db) else 0) for k in range(n)]
        i += 1
    x = Poly.var(name)
    res = []
    for h, k in out:
        poly = Poly()
        for e, cf in enumerate(h):
            if cf:
                poly = poly + x**e * Poly.const(cf)
        res.append((poly.monic()[0], k))
    return res or [(f, 1)]


def _cancel(num: Poly, factors: dict[Poly, int]) -> "Scalar":
    if num.is_zero():
        return Scalar._raw(Poly(), ())
    for f in list(factors):
        e = factors[f]
        while e:
            q = num.divexact(f)
            if q is None:
                break
            num = q
            e -= 1
        if e:
            factors[f] = e
        else:
            del factors[f]
    den = tuple(sorted(factors.items(), key=lambda fe: fe[0].sort_key()))
    return Scalar._raw(num, den)


class Scalar:
    """Exact rational function ``numerator / prod(factor**mult)``.

    Scalars are immutable.  Equality is decided by cross-multiplication, so
    two different factorizations of the same function compare equal.
    """

    __slots__ = ("num", "den")

    def __init__(self, value=0):
        if isinstance(value, Scalar):
            self.num, self.den = value.num, value.den
        elif isinstance(value, Poly):
            self.num, self.den = value, ()
        else:
            self.num, self.den = Poly.const(value), ()

    @classmethod
    def _raw(cls, num: Poly, den: tuple) -> "Scalar":
        s = object.__new__(cls)
        s.num = num
        s.den = den
        return s

    @classmethod
    def var(cls, name: str) -> "Scalar":
        return cls._raw(Poly.var(name), ())

    # -- predicates -------------------------------------------------------
    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_constant(self) -> bool:
        return not self.den and self.num.is_constant()

    def constant_value(self) -> mpq:
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return self.num.constant_value()

    def is_polynomial(self) -> bool:
        return not self.den

    def __bool__(self):
        return not self.num.is_zero()

    def __eq__(self, other):
        try:
            other = as_scalar(other)
        except TypeError:
            return NotImplemented
        if self.den == other.den:
            return self.num == other.num
        return (self - other).is_zero()

    __hash__ = None  # equality is semantic, not structural

    # -- arithmetic -------------------------------------------------------
    def _den_poly(self, exclude: dict | None = None) -> Poly:
        out = Poly.const(1)
        for f, e in self.den:
            k = e - (exclude.get(f, 0) if exclude else 0)
            if k:
                out = out * f**k
        return out

    def __add__(self, other) -> "Scalar":
        other = as_scalar(other)
        if other.num.is_zero():
            return self
        if self.num.is_zero():
            return other
        if self.den == other.den:
            return _cancel(self.num + other.num, dict(self.den))
        lcm = dict(self.den)
        for f, e in other.den:
            if lcm.get(f, 0) < e:
                lcm[f] = e
        num = Poly()
        for s in (self, other):
            mult = Poly.const(1)
            own = dict(s.den)
            for f, e in lcm.items():
                k = e - own.get(f, 0)
                if k:
                    mult = mult * f**k
            num = num + s.num * mult
        return _cancel(num, lcm)

    __radd__ = __add__

    def __neg__(self) -> "Scalar":
        return Scalar._raw(-self.num, self.den)

    def __sub__(self, other) -> "Scalar":
        return self + (-as_scalar(other))

    def __rsub__(self, other) -> "Scalar":
        return as_scalar(other) - self

    def __mul__(self, other) -> "Scalar":
        if not isinstance(other, Scalar):
            if isinstance(other, (int, mpq, Fraction)):
                if not self.den:
                    return Scalar._raw(self.num.scale(other), ())
                if not other:
                    return Scalar()
                return Scalar._raw(self.num.scale(other), self.den)
            other = as_scalar(other)
        if self.num.is_zero() or other.num.is_zero():
            return Scalar()
        if not self.den and not other.den:
            return Scalar._raw(self.num * other.num, ())
        factors = dict(self.den)
        for f, e in other.den:
            factors[f] = factors.get(f, 0) + e
        return _cancel(self.num * other.num, factors)

    __rmul__ = __mul__

    def inverse(self) -> "Scalar":
        if self.num.is_zero():
            raise ZeroDivisorError()
        if self.num.is_constant():
            return _cancel(self._den_poly().scale(1 / self.num.constant_value()), {})
        f, lc = self.num.monic()
        factors: dict = {}
        for g, k in _squarefree(f):
            factors[g] = factors.get(g, 0) + k
        return _cancel(self._den_poly().scale(1 / lc), factors)

    def __truediv__(self, other) -> "Scalar":
        other = as_scalar(other)
        if other.num.is_zero():
            raise ZeroDivisorError()
        return self * other.inverse()

    def __rtruediv__(self, other) -> "Scalar":
        return as_scalar(other) / self

    def __pow__(self, e: int) -> "Scalar":
        if e < 0:
            return self.inverse() ** (-e)
        if not self.den:
            return Scalar._raw(self.num**e, ())
        if e == 0:
            return Scalar(1)
        return _cancel(self.num**e, {f: m * e for f, m in self.den})

    # -- calculus ---------------------------------------------------------
    def diff(self, name: str) -> "Scalar":
        """Partial derivative with respect to the variable ``name``."""
        dnum = self.num.diff(name)
        if not self.den:
            return Scalar._raw(dnum, ())
        result = _cancel(dnum, dict(self.den))
        for f, e in self.den:
            df = f.diff(name)
            if df.is_zero():
                continue
            factors = dict(self.den)
            factors[f] = e + 1
            result = result + _cancel((self.num * df).scale(-e), factors)
        return result

    def variables(self) -> set[str]:
        out = self.num.variables()
        for f, _ in self.den:
            out |= f.variables()
        return out

    def evaluate(self, point) -> mpq:
        """Exact value at ``point`` (a mapping name -> rational)."""
        pt = {k: to_mpq(v) for k, v in point.items()}
        value = self.num.evaluate(pt)
        for f, e in self.den:
            fv = f.evaluate(pt)
            if not fv:
                raise EvaluationPole()
            value = value / fv**e
        return value

    def subs(self, mapping: Mapping[str, "Scalar"]) -> "Scalar":
        """Substitute scalars for variables (composition of functions)."""
        if not mapping or not (self.variables() & mapping.keys()):
            return self

        def sub_poly(p: Poly) -> Scalar:
            total = Scalar()
            for m, c in p.terms.items():
                term = Scalar(c)
                for i, e in enumerate(m):
                    if e:
                        name = _NAMES[i]
                        val = mapping.get(name)
                        term = term * ((Scalar.var(name) if val is None else val) ** e)
                total = total + term
            return total

        result = sub_poly(self.num)
        for f, e in self.den:
            result = result / sub_poly(f) ** e
        return result

    # -- printing ---------------------------------------------------------
    def needs_parens(self) -> bool:
        return bool(self.den) or len(self.num.terms) > 1 or (
            len(self.num.terms) == 1 and next(iter(self.num.terms.values())) < 0
        )

    def __str__(self) -> str:
        if not self.den:
            return str(self.num)
        num = str(self.num)
        if len(self.num.terms) > 1:
            num = f"({num})"
        parts = []
        for f, e in sorted(self.den, key=lambda fe: str(fe[0])):
            fs = str(f)
            if len(f.terms) > 1:
                fs = f"({fs})"
            parts.append(fs if e == 1 else f"{fs}^{e}")
        den = "*".join(parts)
        if len(parts) > 1:
            den = f"({den})"
        return f"{num}/{den}"

    def __repr__(self):
        return f"Scalar({self})"


def as_scalar(value) -> Scalar:
    if isinstance(value, Scalar):
        return value
    if isinstance(value, Poly):
        return Scalar(value)
    if isinstance(value, (int, mpq, Fraction)):
        return Scalar(value)
    if isinstance(value, str):
        from .textio import parse_scalar

        return parse_scalar(value)
    raise TypeError(f"cannot interpret {value!r} as a Scalar")


def scalar_sum(items: Iterable[Scalar]) -> Scalar:
    total = Scalar()
    for s in items:
        total = total + s
    return total
