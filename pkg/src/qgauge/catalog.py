"""Constructors for the Q-manifolds used throughout the package.

Each builder returns a :class:`QManifold` holding the chart, the
homological vector field and the verdict of :func:`is_q_structure`.  A
failed verdict is reported, never raised, so mutated instances can be
inspected.  Independent classical side conditions (Jacobi, twisted Jacobi,
action property, closedness of ``H``) are provided next to each builder.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import tensors as T
from .graded import Chart, Derivation, GradedCoordinate, QCheck, is_q_structure
from .scalar import Scalar, as_scalar

__all__ = [
    "PoissonData",
    "LieData",
    "QManifold",
    "build_T1M",
    "build_g1",
    "build_twisted_cotangent",
    "build_action_algebroid",
    "build_courant_phase",
    "jacobi_violations",
    "twisted_jacobi_violations",
    "action_violations",
    "dH_violations",
    "so3_constants",
    "so3_lie_poisson",
    "constant_symplectic",
    "wz4_instance",
    "TWISTED_JACOBI_SIGN",
]


@dataclass
class PoissonData:
    """Bivector ``pi[i][j]`` and 3-form ``H[i][j][k]`` on a patch of R^n."""

    n: int
    pi: list
    H: list
    names: list = field(default_factory=list)

    def __post_init__(self):
        self.pi = T.scalarize(self.pi)
        self.H = T.scalarize(self.H)
        if not self.names:
            self.names = T.coords(self.n)
        n = self.n
        for i in range(n):
            for j in range(n):
                if not (self.pi[i][j] + self.pi[j][i]).is_zero():
                    raise ValueError(f"pi is not antisymmetric at ({i + 1},{j + 1})")
                for k in range(n):
                    h = self.H[i][j][k]
                    if not ((h + self.H[j][i][k]).is_zero() and (h + self.H[i][k][j]).is_zero()):
                        raise ValueError(
                            f"H is not totally antisymmetric at ({i + 1},{j + 1},{k + 1})")

    @classmethod
    def from_components(cls, n, pi_upper=None, H_upper=None):
        """Build from independent components ``{(i, j): s}`` / ``{(i, j, k): s}`` (1-based)."""
        pi = T.zeros(n, n)
        for (i, j), s in (pi_upper or {}).items():
            s = as_scalar(s)
            pi[i - 1][j - 1] = pi[i - 1][j - 1] + s
            pi[j - 1][i - 1] = pi[j - 1][i - 1] - s
        H = T.antisymmetrize3({(i - 1, j - 1, k - 1): s for (i, j, k), s in (H_upper or {}).items()}, n)
        return cls(n, pi, H)

    def with_H(self, H) -> "PoissonData":
        return PoissonData(self.n, self.pi, H, list(self.names))

    def sharp(self, e):
        """``(pi# e)^i = pi^{ji} e_j``."""
        n = self.n
        return [sum((self.pi[j][i] * e[j] for j in range(n)), Scalar()) for i in range(n)]

    def pair(self, e1, e2) -> Scalar:
        """``pi(e1, e2) = pi^{ij} e1_i e2_j``."""
        n = self.n
        return sum((self.pi[i][j] * e1[i] * e2[j] for i in range(n) for j in range(n)), Scalar())

    def C(self):
        """``C_i^{jk} = d_i pi^{jk} + H_{ij'k'} pi^{jj'} pi^{kk'}`` as ``C[i][j][k]``."""
        n, pi, H, x = self.n, self.pi, self.H, self.names
        out = T.zeros(n, n, n)
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    acc = pi[j][k].diff(x[i])
                    for a in range(n):
                        if pi[j][a].is_zero():
                            continue
                        for b in range(n):
                            if not pi[k][b].is_zero() and not H[i][a][b].is_zero():
                                acc = acc + H[i][a][b] * pi[j][a] * pi[k][b]
                    out[i][j][k] = acc
        return out


@dataclass
class LieData:
    """Structure constants ``C[a][b][c] = C^a_{bc}`` and an optional action.

    ``rho[a]`` is the vector field of the ``a``-th generator on R^n, given
    as a list of n scalar components.
    """

    dim: int
    C: list
    rho: list | None = None
    n: int = 0

    def __post_init__(self):
        self.C = T.scalarize(self.C)
        d = self.dim
        for a in range(d):
            for b in range(d):
                for c in range(d):
                    if not (self.C[a][b][c] + self.C[a][c][b]).is_zero():
                        raise ValueError(f"C^{a + 1}_bc is not antisymmetric in bc")
        if self.rho is not None:
            self.rho = T.scalarize(self.rho)
            if not self.n:
                self.n = len(self.rho[0]) if self.rho else 0

    @classmethod
    def from_brackets(cls, dim, upper, rho=None, n=0):
        """Constants from ``{(a, b, c): s}`` meaning ``C^a_{bc} = s = -C^a_{cb}`` (1-based)."""
        C = T.zeros(dim, dim, dim)
        for (a, b, c), s in upper.items():
            s = as_scalar(s)
            C[a - 1][b - 1][c - 1] = C[a - 1][b - 1][c - 1] + s
            C[a - 1][c - 1][b - 1] = C[a - 1][c - 1][b - 1] - s
        return cls(dim, C, rho, n)


@dataclass
class QManifold:
    chart: Chart
    Q: Derivation
    check: QCheck
    kind: str = ""
    data: object = None

    @property
    def valid(self) -> bool:
        return self.check.ok


def _finish(chart, Q, kind, data) -> QManifold:
    return QManifold(chart, Q, is_q_structure(Q), kind, data)


def t1m_chart(n: int) -> Chart:
    return Chart([GradedCoordinate(f"x{i}", 0) for i in range(1, n + 1)]
                 + [GradedCoordinate(f"th{i}", 1) for i in range(1, n + 1)], label=f"T[1]R^{n}")


def build_T1M(n: int) -> QManifold:
    """``T[1]R^n`` with the de Rham differential ``th^i d/dx^i``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    chart = t1m_chart(n)
    Q = Derivation(chart, {f"x{i}": chart[f"th{i}"] for i in range(1, n + 1)}, 1)
    return _finish(chart, Q, "T1M", n)


def g1_chart(dim: int) -> Chart:
    return Chart([GradedCoordinate(f"xi{a}", 1) for a in range(1, dim + 1)], label="g[1]")


def _ce_components(chart: Chart, L: LieData, sign: int) -> dict:
    comps = {}
    d = L.dim
    for a in range(d):
        f = chart.zero()
        for b in range(d):
            for c in range(d):
                s = L.C[a][b][c]
                if not s.is_zero():
                    f = f + (chart[f"xi{b + 1}"] * chart[f"xi{c + 1}"]).scale(s * sign)
        comps[f"xi{a + 1}"] = f
    return comps


def build_g1(L: LieData) -> QManifold:
    """``g[1]`` with ``Q_CE = C^a_{bc} xi^b xi^c d/dxi^a`` (no factor 1/2)."""
    chart = g1_chart(L.dim)
    Q = Derivation(chart, _ce_components(chart, L, 1), 1)
    return _finish(chart, Q, "g1", L)


def cotangent_chart(n: int) -> Chart:
    return Chart([GradedCoordinate(f"x{i}", 0) for i in range(1, n + 1)]
                 + [GradedCoordinate(f"p{i}", 1) for i in range(1, n + 1)], label=f"T*[1]R^{n}")


def twisted_cotangent_field(chart: Chart, P: PoissonData) -> Derivation:
    n = P.n
    C = P.C()
    comps = {}
    for i in range(n):
        f = chart.zero()
        for j in range(n):
            if not P.pi[j][i].is_zero():
                f = f + chart[f"p{j + 1}"].scale(P.pi[j][i])
        comps[f"x{i + 1}"] = f
    for i in range(n):
        f = chart.zero()
        for j in range(n):
            for k in range(n):
                if not C[i][j][k].is_zero():
                    f = f + (chart[f"p{j + 1}"] * chart[f"p{k + 1}"]).scale(C[i][j][k] * Scalar(-1) / 2)
        comps[f"p{i + 1}"] = f
    return Derivation(chart, comps, 1)


def build_twisted_cotangent(P: PoissonData) -> QManifold:
    """``T*[1]M`` with ``Q = pi^{ji} p_j d/dx^i - 1/2 C_i^{jk} p_j p_k d/dp_i``."""
    chart = cotangent_chart(P.n)
    return _finish(chart, twisted_cotangent_field(chart, P), "twisted_cotangent", P)


def action_chart(n: int, dim: int) -> Chart:
    return Chart([GradedCoordinate(f"x{i}", 0) for i in range(1, n + 1)]
                 + [GradedCoordinate(f"xi{a}", 1) for a in range(1, dim + 1)],
                 label=f"(R^{n} x g)[1]")


def build_action_algebroid(L: LieData) -> QManifold:
    """``E[1]`` for ``E = M x g`` with ``Q = xi^a rho_a^i d/dx^i - C^a_{bc} xi^b xi^c d/dxi^a``."""
    rho = L.rho or []
    n = L.n
    chart = action_chart(n, L.dim)
    comps = {}
    for i in range(n):
        f = chart.zero()
        for a in range(L.dim):
            if rho and not rho[a][i].is_zero():
                f = f + chart[f"xi{a + 1}"].scale(rho[a][i])
        comps[f"x{i + 1}"] = f
    comps.update(_ce_components(chart, L, -1))
    return _finish(chart, Derivation(chart, comps, 1), "action_algebroid", L)


def build_courant_phase(n: int, H) -> QManifold:
    """``T*[2]T[1]R^n`` with ``Q_CA = {psi_i th^i + 1/6 H_ijk th^i th^j th^k, .}``."""
    from .courant import CourantPhase

    phase = CourantPhase(n, H)
    return QManifold(phase.chart, phase.Q, is_q_structure(phase.Q), "courant", phase)


# -- classical side conditions --------------------------------------------

def jacobi_violations(L: LieData):
    """Entries of ``C^a_{be} C^e_{cd}`` summed cyclically over (b, c, d)."""
    d = L.dim
    out = []
    for a in range(d):
        for b in range(d):
            for c in range(d):
                for e in range(d):
                    acc = Scalar()
                    for (x, y, z) in ((b, c, e), (c, e, b), (e, b, c)):
                        for m in range(d):
                            acc = acc + L.C[a][x][m] * L.C[m][y][z]
                    if not acc.is_zero():
                        out.append(((a, b, c, e), acc))
    return out


# pi^{il} d_l pi^{jk} + cyclic = SIGN * pi^{ii'} pi^{jj'} pi^{kk'} H_{i'j'k'} is the
# classical form of Q^2 = 0 for the field built by twisted_cotangent_field.
TWISTED_JACOBI_SIGN = -1


def twisted_jacobi_violations(P: PoissonData):
    n, pi, H, x = P.n, P.pi, P.H, P.names
    out = []
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                lhs = Scalar()
                for (a, b, c) in ((i, j, k), (j, k, i), (k, i, j)):
                    for l in range(n):
                        if not pi[a][l].is_zero():
                            lhs = lhs + pi[a][l] * pi[b][c].diff(x[l])
                rhs = Scalar()
                for a in range(n):
                    for b in range(n):
                        for c in range(n):
                            h = H[a][b][c]
                            if not h.is_zero():
                                rhs = rhs + pi[i][a] * pi[j][b] * pi[k][c] * h
                r = lhs - rhs * TWISTED_JACOBI_SIGN
                if not r.is_zero():
                    out.append(((i, j, k), r))
    return out


# [rho_a, rho_b] = ACTION_FACTOR * C^c_{ab} rho_c is the classical form of Q^2 = 0 on the
# x-components of the action algebroid field (the display carries no factor 1/2).
ACTION_FACTOR = 2


def action_violations(L: LieData):
    out = list(jacobi_violations(L))
    rho, n = L.rho or [], L.n
    names = T.coords(n)
    for a in range(L.dim):
        for b in range(a + 1, L.dim):
            br = T.lie_bracket(rho[a], rho[b], names) if rho else T.zeros(n)
            for i in range(n):
                rhs = sum((L.C[c][a][b] * rho[c][i] for c in range(L.dim)), Scalar()) if rho else Scalar()
                r = br[i] - rhs * ACTION_FACTOR
                if not r.is_zero():
                    out.append((("rho", a, b, i), r))
    return out


def dH_violations(H, n: int):
    dH = T.d_three_form(T.scalarize(H), T.coords(n))
    return T.nonzero_entries(dH)


# -- standard instances ---------------------------------------------------

def so3_constants(scale=1) -> LieData:
    """``C^a_{bc} = scale * eps_{abc}``."""
    s = as_scalar(scale)
    C = [[[s * T.levi_civita(a, b, c) for c in range(3)] for b in range(3)] for a in range(3)]
    return LieData(3, C)


def so3_lie_poisson() -> PoissonData:
    """``pi^{ij} = eps_{ijk} x^k`` on R^3, ``H = 0``."""
    n = 3
    x = [Scalar.var(f"x{i}") for i in range(1, 4)]
    pi = [[sum((x[k] * T.levi_civita(i, j, k) for k in range(3)), Scalar()) for j in range(3)]
          for i in range(3)]
    return PoissonData(n, pi, T.zeros(n, n, n))


def constant_symplectic(n: int = 2) -> PoissonData:
    """Standard constant symplectic bivector ``pi^{2k-1,2k} = 1`` on R^n (n even)."""
    pi = T.zeros(n, n)
    for k in range(0, n, 2):
        pi[k][k + 1] = Scalar(1)
        pi[k + 1][k] = Scalar(-1)
    return PoissonData(n, pi, T.zeros(n, n, n))


def wz4_instance(sign: int = 1) -> PoissonData:
    """``pi = omega^{-1}`` for ``omega = dx1^dx2 + (1+x1) dx3^dx4``, ``H = sign * d omega``.

    Valid on ``x1 > -1``.  Exactly one sign gives a Q-structure.
    """
    n = 4
    x1 = Scalar.var("x1")
    omega = T.zeros(n, n)
    omega[0][1], omega[1][0] = Scalar(1), Scalar(-1)
    omega[2][3], omega[3][2] = 1 + x1, -(1 + x1)
    pi = T.invert(omega)
    names = T.coords(n)
    domega = T.d_two_form(omega, names)
    H = T.scale(domega, sign)
    return PoissonData(n, pi, H)


def wz4_omega():
    x1 = Scalar.var("x1")
    omega = T.zeros(4, 4)
    omega[0][1], omega[1][0] = Scalar(1), Scalar(-1)
    omega[2][3], omega[3][2] = 1 + x1, -(1 + x1)
    return omega
