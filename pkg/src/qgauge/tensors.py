"""Classical tensor calculus on coordinate patches of R^n.

Everything here works on plain nested lists of :class:`Scalar` components
and never touches the graded engine, so it can serve as the independent
side of every dual-path check.  Index conventions:

* vector field ``v[i]`` is ``v^i d/dx^i``;
* covariant tensors carry all lower indices, forms are stored as full
  antisymmetric arrays;
* ``(d eta)_{ij} = d_i eta_j - d_j eta_i`` and ``(i_v w)_{j..} = v^i w_{ij..}``.
"""

from __future__ import annotations

from itertools import permutations

from .scalar import Scalar, as_scalar

__all__ = [
    "coords",
    "levi_civita",
    "zeros",
    "invert",
    "lie_bracket",
    "d_function",
    "d_one_form",
    "d_two_form",
    "d_three_form",
    "contract",
    "lie_one_form",
    "lie_two_tensor",
    "lie_three_tensor",
    "is_zero_tensor",
    "nonzero_entries",
]


def coords(n: int) -> list[str]:
    return [f"x{i + 1}" for i in range(n)]


def levi_civita(*idx: int) -> int:
    if len(set(idx)) != len(idx):
        return 0
    sign = 1
    idx = list(idx)
    for i in range(len(idx)):
        for j in range(i + 1, len(idx)):
            if idx[i] > idx[j]:
                sign = -sign
    return sign


def zeros(*shape):
    if len(shape) == 1:
        return [Scalar() for _ in range(shape[0])]
    return [zeros(*shape[1:]) for _ in range(shape[0])]


def scalarize(t):
    if isinstance(t, (list, tuple)):
        return [scalarize(x) for x in t]
    return as_scalar(t)


def invert(m: list[list[Scalar]]) -> list[list[Scalar]]:
    """Gauss-Jordan inverse of a square matrix of scalars."""
    n = len(m)
    a = [list(row) + [Scalar(1) if i == j else Scalar() for j in range(n)]
         for i, row in enumerate(m)]
    for col in range(n):
        piv = next((r for r in range(col, n) if not a[r][col].is_zero()), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        a[col], a[piv] = a[piv], a[col]
        inv = 1 / a[col][col]
        a[col] = [x * inv for x in a[col]]
        for r in range(n):
            if r != col and not a[r][col].is_zero():
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return [row[n:] for row in a]


def lie_bracket(v, w, names):
    n = len(names)
    return [sum((v[j] * w[i].diff(names[j]) - w[j] * v[i].diff(names[j]) for j in range(n)),
                Scalar()) for i in range(n)]


def apply_vf(v, f: Scalar, names) -> Scalar:
    return sum((v[i] * f.diff(names[i]) for i in range(len(names))), Scalar())


def d_function(f: Scalar, names):
    return [f.diff(x) for x in names]


def d_one_form(e, names):
    n = len(names)
    return [[e[j].diff(names[i]) - e[i].diff(names[j]) for j in range(n)] for i in range(n)]


def d_two_form(b, names):
    n = len(names)
    out = zeros(n, n, n)
    for i in range(n):
        for j in range(n):
            for k in range(n):
                out[i][j][k] = (b[j][k].diff(names[i]) + b[k][i].diff(names[j])
                                + b[i][j].diff(names[k]))
    return out


def d_three_form(h, names):
    n = len(names)
    out = zeros(n, n, n, n)
    for i in range(n):
        for j in range(n):
            for k in range(n):
                for l in range(n):
                    out[i][j][k][l] = (h[j][k][l].diff(names[i]) - h[i][k][l].diff(names[j])
                                       + h[i][j][l].diff(names[k]) - h[i][j][k].diff(names[l]))
    return out


def contract(v, t):
    """Insert the vector ``v`` into the first slot of the covariant tensor ``t``."""
    n = len(v)
    if not isinstance(t[0], list):
        return sum((v[i] * t[i] for i in range(n)), Scalar())
    if not isinstance(t[0][0], list):
        return [sum((v[i] * t[i][j] for i in range(n)), Scalar()) for j in range(n)]
    return [[sum((v[i] * t[i][j][k] for i in range(n)), Scalar()) for k in range(n)]
            for j in range(n)]


def lie_one_form(v, e, names):
    n = len(names)
    return [sum((v[k] * e[j].diff(names[k]) + e[k] * v[k].diff(names[j]) for k in range(n)),
                Scalar()) for j in range(n)]


def lie_two_tensor(v, t, names):
    n = len(names)
    out = zeros(n, n)
    for i in range(n):
        for j in range(n):
            acc = Scalar()
            for k in range(n):
                acc = acc + v[k] * t[i][j].diff(names[k]) + t[k][j] * v[k].diff(names[i]) \
                    + t[i][k] * v[k].diff(names[j])
            out[i][j] = acc
    return out


def lie_three_tensor(v, t, names):
    n = len(names)
    out = zeros(n, n, n)
    for i in range(n):
        for j in range(n):
            for k in range(n):
                acc = Scalar()
                for l in range(n):
                    acc = acc + v[l] * t[i][j][k].diff(names[l]) + t[l][j][k] * v[l].diff(names[i]) \
                        + t[i][l][k] * v[l].diff(names[j]) + t[i][j][l] * v[l].diff(names[k])
                out[i][j][k] = acc
    return out


def antisymmetrize3(comps: dict, n: int):
    """Full antisymmetric array from independent components ``{(i,j,k): s}``."""
    out = zeros(n, n, n)
    for (i, j, k), s in comps.items():
        s = as_scalar(s)
        for perm in permutations((0, 1, 2)):
            idx = [(i, j, k)[p] for p in perm]
            sign = levi_civita(*perm)
            out[idx[0]][idx[1]][idx[2]] = out[idx[0]][idx[1]][idx[2]] + s * sign
    return out


def flatten(t):
    if isinstance(t, list):
        for x in t:
            yield from flatten(x)
    else:
        yield t


def nonzero_entries(t, prefix=()):
    if isinstance(t, list):
        out = []
        for i, x in enumerate(t):
            out.extend(nonzero_entries(x, prefix + (i,)))
        return out
    return [] if t.is_zero() else [(prefix, t)]


def is_zero_tensor(t) -> bool:
    return all(x.is_zero() for x in flatten(t))


def add(a, b):
    if isinstance(a, list):
        return [add(x, y) for x, y in zip(a, b)]
    return a + b


def sub(a, b):
    if isinstance(a, list):
        return [sub(x, y) for x, y in zip(a, b)]
    return a - b


def scale(a, s):
    if isinstance(a, list):
        return [scale(x, s) for x in a]
    return a * s
