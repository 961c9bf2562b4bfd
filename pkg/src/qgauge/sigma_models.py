"""Gauging workflows for sigma models: minimal coupling, Wess-Zumino gauging
on an action Lie algebroid, and the twisted Poisson sigma model.

Worldsheet fields are modelled formally.  :class:`Worldsheet` is the chart
``T[1]R^d`` with coordinates ``s``, ``ds`` together with jet symbols for the
fields: ``X1`` and its derivatives ``X1_2``, ``X1_23``; the components
``A1s2`` of a 1-form field ``A1 = A1s1 ds1 + ...`` and their derivatives
``A1s2_3``.  The worldsheet differential acts on jet symbols through the
chain rule, so pullbacks of target superfunctions become exact
superfunctions on the worldsheet chart.

Uniqueness statements made by the solvers here are relative to the
coefficient basis, i.e. within the configured degree bound.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

from . import tensors as T
from .catalog import LieData, PoissonData, build_action_algebroid, build_twisted_cotangent
from .equivariance import (GTElement, OneForm, TwoTensor, Verdict, dh_operator, eps_lift,
                           gt_lift, is_basic, twisted_prolongation)
from .graded import Chart, Derivation, GradedCoordinate, Superfunction, apply
from .prolongation import (ProlongedChart, dname, gauge_variation, lie_lift, lift_pullback,
                           prolong, qname)
from .sampling import monomials_upto
from .scalar import Scalar, as_scalar
from .solver import AnsatzProblem, ScalarSystem, SolutionSpace, solve

__all__ = [
    "InvalidInstance",
    "InvariantBreach",
    "WZData",
    "IntegrandReport",
    "Worldsheet",
    "minimal_coupling",
    "zero_gauge_fields",
    "stanciu_problem",
    "stanciu_family",
    "stanciu_conditions",
    "stanciu_display",
    "stanciu_gauging",
    "u1_rotation_instance",
    "common_denominator",
    "coefficient_basis",
    "extension_display",
    "extension_q_display",
    "nondegenerate",
    "dh_solutions",
    "gt_generators",
    "tpsm_problem",
    "tpsm_extension",
    "tpsm_symmetry_check",
    "tpsm_gauge_variation",
    "psm_pullback",
    "worldsheet_pullback_identity",
]

log = logging.getLogger(__name__)


class InvalidInstance(ValueError):
    pass


class InvariantBreach(AssertionError):
    """An internal cross-check failed; never expected on valid input."""


# -- data ---------------------------------------------------------------------

@dataclass
class WZData:
    """A closed form on R^n with a Lie algebra action.

    ``form`` is a full antisymmetric array of rank 2 (``B``) or 3 (``H``),
    ``rho[a]`` the vector field of the ``a``-th generator and ``C[a][b][c]``
    the structure constants ``C^a_bc`` (zero if omitted).
    """

    n: int
    form: list
    rho: list
    C: list | None = None
    names: list = field(default_factory=list)

    def __post_init__(self):
        self.form = T.scalarize(self.form)
        self.rho = T.scalarize(self.rho)
        if not self.names:
            self.names = T.coords(self.n)
        if self.C is None:
            self.C = T.zeros(self.dim, self.dim, self.dim)
        self.C = T.scalarize(self.C)
        for a, v in enumerate(self.rho):
            if len(v) != self.n:
                raise InvalidInstance(f"rho[{a}] has {len(v)} components, expected {self.n}")

    @property
    def dim(self) -> int:
        return len(self.rho)

    @property
    def rank(self) -> int:
        r, t = 0, self.form
        while isinstance(t, list):
            r, t = r + 1, t[0]
        return r

    def violations(self) -> dict:
        out = {}
        if self.rank == 3:
            dh = T.nonzero_entries(T.d_three_form(self.form, self.names))
            if dh:
                out["closed"] = dh
            lie = T.lie_three_tensor
        else:
            lie = T.lie_two_tensor
        for a, v in enumerate(self.rho):
            bad = T.nonzero_entries(lie(v, self.form, self.names))
            if bad:
                out[f"invariant[{a}]"] = bad
        return out

    def validate(self):
        bad = self.violations()
        if bad:
            key = sorted(bad)[0]
            idx, val = bad[key][0]
            raise InvalidInstance(f"{key} fails at {tuple(i + 1 for i in idx)}: {val}")
        return self

    def lie_data(self) -> LieData:
        return LieData(self.dim, self.C, self.rho, self.n)


def u1_rotation_instance(H=None) -> WZData:
    """``u(1)`` rotating ``(x1, x2)`` in R^3; ``H = dx1 dx2 dx3`` by default."""
    x1, x2 = Scalar.var("x1"), Scalar.var("x2")
    if H is None:
        H = T.antisymmetrize3({(0, 1, 2): 1}, 3)
    return WZData(3, H, [[-x2, x1, Scalar(0)]])


@dataclass
class IntegrandReport:
    extension: Superfunction | None = None
    pullback: Superfunction | None = None
    residual: Superfunction | None = None
    obstructions: list = field(default_factory=list)
    space: SolutionSpace | None = None
    notes: list = field(default_factory=list)
    data: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        clean = self.residual is None or not self.residual.terms
        return clean and not self.obstructions


# -- worldsheet ----------------------------------------------------------------

class Worldsheet:
    """Formal ``T[1]R^dim`` with jet symbols; ``d`` is defined on jets of order < ``order``."""

    def __init__(self, dim: int = 3, order: int = 2):
        self.dim = dim
        self.order = order
        coords = [GradedCoordinate(f"s{m}", 0) for m in range(1, dim + 1)]
        coords += [GradedCoordinate(f"ds{m}", 1) for m in range(1, dim + 1)]
        self.chart = Chart(coords, label=f"T[1]R^{dim}")
        self.fields: list[str] = []
        self._d = None

    def ds(self, mu: int) -> Superfunction:
        return self.chart[f"ds{mu}"]

    @staticmethod
    def jet(sym: str, index=()) -> str:
        return sym + ("_" + "".join(str(m) for m in sorted(index)) if index else "")

    def _register(self, sym: str):
        if sym not in self.fields:
            self.fields.append(sym)
            self._d = None

    def scalar_field(self, sym: str) -> Superfunction:
        self._register(sym)
        return self.chart.scalar(Scalar.var(sym))

    def one_form_field(self, sym: str) -> Superfunction:
        out = self.chart.zero()
        for mu in range(1, self.dim + 1):
            comp = f"{sym}s{mu}"
            self._register(comp)
            out = out + self.ds(mu).scale(Scalar.var(comp))
        return out

    @property
    def d(self) -> Derivation:
        if self._d is None:
            ch = self.chart
            comps = {f"s{m}": self.ds(m) for m in range(1, self.dim + 1)}
            for sym in self.fields:
                for k in range(self.order):
                    for idx in itertools.combinations_with_replacement(range(1, self.dim + 1), k):
                        f = ch.zero()
                        for mu in range(1, self.dim + 1):
                            f = f + self.ds(mu).scale(Scalar.var(self.jet(sym, idx + (mu,))))
                        comps[self.jet(sym, idx)] = f
            self._d = Derivation(ch, comps, 1)
        return self._d


def _pull_form(ws: Worldsheet, t, dX, sub) -> Superfunction:
    """``X*`` of a full antisymmetric array of rank 0..3."""
    out = ws.chart.zero()
    if not isinstance(t, list):
        return ws.chart.scalar(as_scalar(t).subs(sub))
    rank, probe = 0, t
    while isinstance(probe, list):
        rank, probe = rank + 1, probe[0]
    n = len(t)
    fact = {1: 1, 2: 2, 3: 6}[rank]
    for idx in itertools.product(range(n), repeat=rank):
        c = t
        for i in idx:
            c = c[i]
        if c.is_zero():
            continue
        term = ws.chart.one()
        for i in idx:
            term = term * dX[i]
        out = out + term.scale(c.subs(sub) / fact)
    return out


def _target_fields(ws: Worldsheet, names):
    sub = {x: Scalar.var(f"X{i + 1}") for i, x in enumerate(names)}
    X = [ws.scalar_field(f"X{i + 1}") for i in range(len(names))]
    return sub, X


# -- minimal coupling ------------------------------------------------------------

def minimal_coupling(W: WZData, ws: Worldsheet | None = None) -> Superfunction:
    """``X*B - A^a X*(i_{v_a} B) + 1/2 A^a A^b X*(i_{v_a} i_{v_b} B)`` on a 2d worldsheet.

    Gauge fields are the 1-form fields ``A1, A2, ...`` indexed by the Lie algebra.
    """
    if W.rank != 2:
        raise InvalidInstance("minimal coupling needs a 2-form")
    ws = ws or Worldsheet(2)
    if ws.dim != 2:
        raise InvalidInstance("minimal coupling is implemented for 2d worldsheets")
    sub, X = _target_fields(ws, W.names)
    dX = [ws.d(x) for x in X]
    A = [ws.one_form_field(f"A{a + 1}") for a in range(W.dim)]
    B = W.form
    out = _pull_form(ws, B, dX, sub)
    iB = [T.contract(v, B) for v in W.rho]
    for a in range(W.dim):
        out = out - A[a] * _pull_form(ws, iB[a], dX, sub)
    for a in range(W.dim):
        for b in range(W.dim):
            c = T.contract(W.rho[a], iB[b])
            if not c.is_zero():
                out = out + (A[a] * A[b]).scale(c.subs(sub) / 2)
    return out


def zero_gauge_fields(f: Superfunction, prefix: str = "A") -> Superfunction:
    """Set every jet symbol of the gauge fields to zero."""

    def kill(s: Scalar) -> Scalar:
        hits = {v: Scalar(0) for v in s.variables() if v.startswith(prefix)}
        return s.subs(hits) if hits else s

    return f.map_coefficients(kill)


# -- Wess-Zumino gauging on T[1]E[1] ------------------------------------------------

@dataclass
class StanciuSetup:
    W: WZData
    prolonged: ProlongedChart
    problem: AnsatzProblem
    gens: list
    basis: list


def _stanciu_slots(qb: Chart, n: int, dim: int, with_A: bool):
    Qx = [qb[qname(f"x{i}")] for i in range(1, n + 1)]
    Qxi = [qb[qname(f"xi{a}")] for a in range(1, dim + 1)]
    xi = [qb[f"xi{a}"] for a in range(1, dim + 1)]
    slots = []
    if with_A:
        for i, j, k in itertools.combinations(range(n), 3):
            slots.append((f"A_{i + 1}{j + 1}{k + 1}", Qx[i] * Qx[j] * Qx[k]))
    for i, j in itertools.combinations(range(n), 2):
        for a in range(dim):
            slots.append((f"B_{i + 1}{j + 1}^{a + 1}", Qx[i] * Qx[j] * xi[a]))
    for i in range(n):
        for a, b in itertools.combinations(range(dim), 2):
            slots.append((f"K_{i + 1}^{a + 1}{b + 1}", Qx[i] * xi[a] * xi[b]))
    for a, b, c in itertools.combinations(range(dim), 3):
        slots.append((f"D^{a + 1}{b + 1}{c + 1}", xi[a] * xi[b] * xi[c]))
    for i in range(n):
        for a in range(dim):
            slots.append((f"E_{i + 1}{a + 1}", Qx[i] * Qxi[a]))
    for a in range(dim):
        for b in range(dim):
            slots.append((f"F_{a + 1}{b + 1}", xi[a] * Qxi[b]))
    return slots


def _h_anchor(qb: Chart, H, n: int, prefix: str = "x") -> Superfunction:
    """``1/6 H_ijk Q~x^i Q~x^j Q~x^k``."""
    out = qb.zero()
    for i, j, k in itertools.combinations(range(n), 3):
        h = H[i][j][k]
        if not h.is_zero():
            out = out + (qb[qname(f"{prefix}{i + 1}")] * qb[qname(f"{prefix}{j + 1}")]
                         * qb[qname(f"{prefix}{k + 1}")]).scale(h)
    return out


def stanciu_problem(W: WZData, degree_bound: int = 2, eps_degree: int = 0, anchored: bool = True,
                    closed: bool = True, horizontal: bool = True) -> StanciuSetup:
    """The degree 3 ansatz on ``T[1]E[1]`` in the ``Q~``-basis.

    Generators are Lie lifts of ``eps(x) d/dxi^a`` for monomials ``eps`` of
    degree at most ``eps_degree``; degree 1 already generates the module.
    """
    L = W.lie_data()
    qm = build_action_algebroid(L)
    if not qm.valid:
        raise InvalidInstance("the action algebroid field is not a Q-structure")
    Pc = prolong(qm.chart, qm.Q, check=False)
    qb = Pc.qbasis_chart
    slots = _stanciu_slots(qb, W.n, W.dim, not anchored)
    anchor = _h_anchor(qb, W.form, W.n) if anchored else None
    basis = monomials_upto(W.names, degree_bound)
    prob = AnsatzProblem(qb, slots, basis, anchor)
    if closed:
        prob.impose_closed(Pc.in_q_basis(Pc.Qt))
    gens = []
    for a in range(W.dim):
        for m in monomials_upto(W.names, eps_degree):
            eps = Derivation(qm.chart, {f"xi{a + 1}": m}, -1)
            gens.append((f"eps[{m}]_{a + 1}", lie_lift(Pc, eps)))
    if horizontal:
        prob.impose_horizontal([Pc.in_q_basis(g) for _, g in gens], [lab for lab, _ in gens])
    return StanciuSetup(W, Pc, prob, [g for _, g in gens], basis)


def _slot_tensor(prob: AnsatzProblem, vec: dict, letter: str, shape):
    funcs = dict(zip((lab for lab, _ in prob.slots), prob.slot_functions(vec)))
    out = T.zeros(*shape)
    for idx in itertools.product(*(range(k) for k in shape)):
        lab = f"{letter}_" + "".join(str(i + 1) for i in idx)
        s = funcs.get(lab)
        if s is not None:
            ref = out
            for i in idx[:-1]:
                ref = ref[i]
            ref[idx[-1]] = s
    return out


def stanciu_family(setup: StanciuSetup, A, E, F) -> Superfunction:
    """``A_ijk Q~x^i Q~x^j Q~x^k + E_{ia,j} Q~x^i Q~x^j xi^a - 1/2 F_{ab,i} Q~x^i xi^a xi^b
    + E_ia Q~x^i Q~xi^a + F_ab xi^a Q~xi^b`` summed over all indices.

    For antisymmetric ``F`` and closed ``A`` this is ``A + Q~(-E_ia Q~x^i xi^a - 1/2 F_ab xi^a xi^b)``.
    """
    qb = setup.prolonged.qbasis_chart
    W = setup.W
    n, dim, x = W.n, W.dim, W.names
    Qx = [qb[qname(f"x{i}")] for i in range(1, n + 1)]
    Qxi = [qb[qname(f"xi{a}")] for a in range(1, dim + 1)]
    xi = [qb[f"xi{a}"] for a in range(1, dim + 1)]
    A, E, F = T.scalarize(A), T.scalarize(E), T.scalarize(F)
    out = qb.zero()
    for i, j, k in itertools.product(range(n), repeat=3):
        if not A[i][j][k].is_zero():
            out = out + (Qx[i] * Qx[j] * Qx[k]).scale(A[i][j][k])
    for i in range(n):
        for a in range(dim):
            for j in range(n):
                c = E[i][a].diff(x[j])
                if not c.is_zero():
                    out = out + (Qx[i] * Qx[j] * xi[a]).scale(c)
            if not E[i][a].is_zero():
                out = out + (Qx[i] * Qxi[a]).scale(E[i][a])
    for a in range(dim):
        for b in range(dim):
            for i in range(n):
                c = F[a][b].diff(x[i])
                if not c.is_zero():
                    out = out - (Qx[i] * xi[a] * xi[b]).scale(c / 2)
            if not F[a][b].is_zero():
                out = out + (xi[a] * Qxi[b]).scale(F[a][b])
    return out


def stanciu_display(setup: StanciuSetup, E) -> Superfunction:
    """``1/6 H Q~x Q~x Q~x + Q~(-1/2 E_ja rho^j_b xi^a xi^b - E_ia Q~x^i xi^a)``."""
    Pc, W = setup.prolonged, setup.W
    qb = Pc.qbasis_chart
    E = T.scalarize(E)
    xi = [qb[f"xi{a}"] for a in range(1, W.dim + 1)]
    pot = qb.zero()
    for a in range(W.dim):
        for i in range(W.n):
            if not E[i][a].is_zero():
                pot = pot - (qb[qname(f"x{i + 1}")] * xi[a]).scale(E[i][a])
        for b in range(W.dim):
            f = sum((E[j][a] * W.rho[b][j] for j in range(W.n)), Scalar())
            if not f.is_zero():
                pot = pot - (xi[a] * xi[b]).scale(f / 2)
    return _h_anchor(qb, W.form, W.n) + apply(Pc.in_q_basis(Pc.Qt), pot)


def stanciu_conditions(W: WZData, E, F, eps):
    """``1/2 H_ijk eps^a rho_a^i + (E_{[j|a} eps^a)_{,k]}`` and ``(E_ia rho^i_b + F_ba) eps^b``.

    Antisymmetrization carries weight 1/2.  Returns ``(c1[j][k], c2[a])``.
    """
    n, dim, x = W.n, W.dim, W.names
    E, F = T.scalarize(E), T.scalarize(F)
    eps = [as_scalar(e) for e in eps]
    v = [sum((eps[a] * W.rho[a][i] for a in range(dim)), Scalar()) for i in range(n)]
    Ee = [sum((E[j][a] * eps[a] for a in range(dim)), Scalar()) for j in range(n)]
    c1 = T.zeros(n, n)
    for j in range(n):
        for k in range(n):
            h = sum((W.form[i][j][k] * v[i] for i in range(n)), Scalar())
            c1[j][k] = h / 2 + (Ee[j].diff(x[k]) - Ee[k].diff(x[j])) / 2
    c2 = [sum(((sum((E[i][a] * W.rho[b][i] for i in range(n)), Scalar()) + F[b][a]) * eps[b]
               for b in range(dim)), Scalar()) for a in range(dim)]
    return c1, c2


def stanciu_gauging(W: WZData, degree_bound: int = 2, eps_degree: int = 0,
                    seed: int = 0) -> IntegrandReport:
    """Basic, ``Q~``-closed extensions of ``H`` on ``T[1]E[1]`` within the bound."""
    W.validate()
    if W.rank != 3:
        raise InvalidInstance("Wess-Zumino gauging needs a 3-form")
    setup = stanciu_problem(W, degree_bound, eps_degree)
    sol = solve(setup.problem, seed=seed)
    rep = IntegrandReport(space=sol)
    rep.notes.append(f"solutions are polynomial of degree <= {degree_bound}")
    if not sol.consistent:
        rep.obstructions.append(f"no basic extension within bound {degree_bound}: "
                                f"{sol.witness['constraint']} at {sol.witness.get('monomial')}")
        return rep
    prob, n, dim = setup.problem, W.n, W.dim
    E = _slot_tensor(prob, sol.particular, "E", (n, dim))
    F = _slot_tensor(prob, sol.particular, "F", (dim, dim))
    rep.extension = sol.solution()
    rep.data["matches_display"] = rep.extension == stanciu_display(setup, E)
    rep.data["E"] = E
    rep.data["F"] = F
    rep.data["dimension"] = sol.dimension
    sym = [[F[a][b] + F[b][a] for b in range(dim)] for a in range(dim)]
    if not T.is_zero_tensor(sym):
        rep.obstructions.append("F_(ab) != 0")
    # classical side: dE_a = i_{v_a} H and F_ab = E_ia rho^i_b
    for a in range(dim):
        Ea = [E[i][a] for i in range(n)]
        dE = T.d_one_form(Ea, W.names)
        iH = T.contract(W.rho[a], W.form)
        if not T.is_zero_tensor(T.sub(dE, iH)):
            rep.obstructions.append(f"dE_{a + 1} != i_(v_{a + 1}) H")
        for b in range(dim):
            Fab = sum((E[i][a] * W.rho[b][i] for i in range(n)), Scalar())
            if not (Fab - F[a][b]).is_zero():
                rep.obstructions.append(f"F_{a + 1}{b + 1} != E_i{a + 1} rho^i_{b + 1}")
    if not sol.verified:
        rep.notes.append("sampling did not stabilize")
    return rep


# -- twisted Poisson sigma model -----------------------------------------------------

def common_denominator(scalars) -> Scalar:
    """Least common multiple of the factored denominators."""
    mult: dict = {}
    for s in scalars:
        for f, e in as_scalar(s).den:
            if e > mult.get(f, 0):
                mult[f] = e
    out = Scalar(1)
    for f, e in mult.items():
        out = out * Scalar(f) ** e
    return out


def _instance_scalars(P: PoissonData):
    yield from T.flatten(P.pi)
    yield from T.flatten(P.H)
    for row in P.pi:
        for s in row:
            for x in P.names:
                yield s.diff(x)


def coefficient_basis(P: PoissonData, degree_bound: int = 2) -> list[Scalar]:
    """Monomials of degree <= bound over the common denominator of ``pi``, ``d pi``, ``H``."""
    den = common_denominator(_instance_scalars(P))
    return [m / den for m in monomials_upto(P.names, degree_bound)]


def extension_display(P: PoissonData, Pc: ProlongedChart | None = None) -> Superfunction:
    """``1/6 H_ijk dx^i dx^j dx^k + 1/2 H_ijk pi^{k'k} dx^i dx^j p_k' + dp_i dx^i``."""
    Pc = Pc or twisted_prolongation(P)
    ch, n = Pc.chart, P.n
    dx = [ch[dname(f"x{i}")] for i in range(1, n + 1)]
    p = [ch[f"p{i}"] for i in range(1, n + 1)]
    out = ch.zero()
    for i, j, k in itertools.product(range(n), repeat=3):
        h = P.H[i][j][k]
        if h.is_zero():
            continue
        out = out + (dx[i] * dx[j] * dx[k]).scale(h / 6)
        for kp in range(n):
            c = h * P.pi[kp][k]
            if not c.is_zero():
                out = out + (dx[i] * dx[j] * p[kp]).scale(c / 2)
    for i in range(n):
        out = out + ch[dname(f"p{i + 1}")] * dx[i]
    return out


def extension_q_display(P: PoissonData, a=1, Pc: ProlongedChart | None = None) -> Superfunction:
    """``1/6 H Q~x Q~x Q~x + a (1/2 pi^{jk}_{,i} Q~x^i p_j p_k + Q~x^i Q~p_i + pi^{ij} Q~p_i p_j)``."""
    Pc = Pc or twisted_prolongation(P)
    qb, n, x = Pc.qbasis_chart, P.n, P.names
    a = as_scalar(a)
    Qx = [qb[qname(f"x{i}")] for i in range(1, n + 1)]
    Qp = [qb[qname(f"p{i}")] for i in range(1, n + 1)]
    p = [qb[f"p{i}"] for i in range(1, n + 1)]
    out = _h_anchor(qb, P.H, n)
    rest = qb.zero()
    for i in range(n):
        rest = rest + Qx[i] * Qp[i]
        for j in range(n):
            if not P.pi[i][j].is_zero():
                rest = rest + (Qp[i] * p[j]).scale(P.pi[i][j])
            for k in range(n):
                c = P.pi[j][k].diff(x[i])
                if not c.is_zero():
                    rest = rest + (Qx[i] * p[j] * p[k]).scale(c / 2)
    return out + rest.scale(a)


def nondegenerate(P: PoissonData) -> bool:
    """``(pi#)^3 H`` not identically zero: the pullback of ``H`` to the leaves is nonzero."""
    n = P.n
    vs = [P.sharp([Scalar(1) if j == i else Scalar(0) for j in range(n)]) for i in range(n)]
    for a, b, c in itertools.combinations(range(n), 3):
        val = T.contract(vs[c], T.contract(vs[b], T.contract(vs[a], P.H)))
        if not val.is_zero():
            return True
    return False


def dh_solutions(P: PoissonData, degree_bound: int = 2, seed: int = 0, basis=None) -> list[OneForm]:
    """A basis of the 1-forms ``e`` with ``D_H e = 0`` and components in the coefficient basis."""
    n = P.n
    basis = basis if basis is not None else coefficient_basis(P, degree_bound)
    cols, labels = [], []
    for i in range(n):
        for b in basis:
            e = [Scalar(0)] * n
            e[i] = b
            cols.append(list(T.flatten(dh_operator(P, OneForm(e)).comps)))
            labels.append(f"e{i + 1}[{b}]")
    sol = solve(ScalarSystem(cols, labels=labels), seed=seed)
    out = []
    for vec in sol.basis:
        e = [Scalar(0)] * n
        for k, c in vec.items():
            i, m = divmod(k, len(basis))
            e[i] = e[i] + basis[m] * Scalar(c)
        out.append(OneForm(e))
    return out


def gt_generators(P: PoissonData, eps=None, Pc: ProlongedChart | None = None):
    """Constant symmetric ``alpha_bar`` lifts and Lie lifts of the given ``D_H`` solutions.

    Returns ``(labels, derivations)`` on the prolonged chart.
    """
    Pc = Pc or twisted_prolongation(P)
    n = P.n
    labels, gens = [], []
    zero = OneForm([0] * n)
    for i in range(n):
        for j in range(i, n):
            a = T.zeros(n, n)
            a[i][j] = a[j][i] = Scalar(1)
            labels.append(f"alpha_({i + 1}{j + 1})")
            gens.append(gt_lift(GTElement.from_bar(zero, TwoTensor(a), P.names), P, Pc))
    for k, e in enumerate(eps or []):
        if not dh_operator(P, e).is_zero():
            raise InvalidInstance(f"generator eps[{k}] is not a D_H solution")
        labels.append(f"eps[{k}]")
        gens.append(eps_lift(e, P, Pc))
    return labels, gens


@dataclass
class TPSMSetup:
    P: PoissonData
    prolonged: ProlongedChart
    problem: AnsatzProblem
    gens: list
    labels: list
    basis: list
    degree_bound: int


def _tpsm_slots(qb: Chart, n: int, with_A: bool):
    Qx = [qb[qname(f"x{i}")] for i in range(1, n + 1)]
    Qp = [qb[qname(f"p{i}")] for i in range(1, n + 1)]
    p = [qb[f"p{i}"] for i in range(1, n + 1)]
    R = range(n)
    slots = []
    if with_A:
        for i, j, k in itertools.combinations(R, 3):
            slots.append((f"A_{i + 1}{j + 1}{k + 1}", Qx[i] * Qx[j] * Qx[k]))
    for i, j in itertools.combinations(R, 2):
        for k in R:
            slots.append((f"B_{i + 1}{j + 1}^{k + 1}", Qx[i] * Qx[j] * p[k]))
    for i in R:
        for j, k in itertools.combinations(R, 2):
            slots.append((f"K_{i + 1}^{j + 1}{k + 1}", Qx[i] * p[j] * p[k]))
    for i, j, k in itertools.combinations(R, 3):
        slots.append((f"D^{i + 1}{j + 1}{k + 1}", p[i] * p[j] * p[k]))
    for i in R:
        for j in R:
            slots.append((f"E_{i + 1}{j + 1}", Qx[i] * Qp[j]))
    for i in R:
        for j in R:
            slots.append((f"F_{i + 1}{j + 1}", Qp[i] * p[j]))
    return slots


def tpsm_problem(P: PoissonData, degree_bound: int = 2, anchored: bool = True, eps=None,
                 eps_bound: int = 2, seed: int = 0, horizontal: bool = True) -> TPSMSetup:
    """The degree 3 ansatz on ``T[1]T*[1]M`` with closedness and GT-horizontality imposed.

    ``eps`` defaults to the ``D_H`` solutions with polynomial coefficients of
    degree <= ``eps_bound``.
    """
    if not build_twisted_cotangent(P).valid:
        raise InvalidInstance("(pi, H) is not twisted Poisson")
    Pc = twisted_prolongation(P)
    qb = Pc.qbasis_chart
    basis = coefficient_basis(P, degree_bound)
    anchor = _h_anchor(qb, P.H, P.n) if anchored else None
    prob = AnsatzProblem(qb, _tpsm_slots(qb, P.n, not anchored), basis, anchor)
    prob.impose_closed(Pc.in_q_basis(Pc.Qt))
    if eps is None:
        eps = dh_solutions(P, eps_bound, seed=seed, basis=monomials_upto(P.names, eps_bound))
    labels, gens = gt_generators(P, eps, Pc)
    if horizontal:
        prob.impose_horizontal([Pc.in_q_basis(g) for g in gens], labels)
    return TPSMSetup(P, Pc, prob, gens, labels, basis, degree_bound)


def read_coefficients(setup: TPSMSetup, vec: dict) -> dict:
    """``E^j_i`` and ``F^{ij}`` tensors of an ansatz vector (slot ``E_ij`` is ``Q~x^i Q~p_j``)."""
    n = setup.P.n
    return {"E": _slot_tensor(setup.problem, vec, "E", (n, n)),
            "F": _slot_tensor(setup.problem, vec, "F", (n, n))}


def _proportional_constant(E, F, P: PoissonData):
    """``a`` with ``E = a delta`` and ``F = a pi``, or None."""
    n = P.n
    a = E[0][0]
    if not a.is_constant():
        return None
    for i in range(n):
        for j in range(n):
            want = a if i == j else Scalar(0)
            if not (E[i][j] - want).is_zero() or not (F[i][j] - a * P.pi[i][j]).is_zero():
                return None
    return a


def tpsm_extension(P: PoissonData, degree_bound: int = 2, anchored: bool = True, eps_bound: int = 2,
                   seed: int = 0, pullback: bool = True) -> IntegrandReport:
    """Solve for the GT-basic extension of ``H`` and compare with the closed form."""
    setup = tpsm_problem(P, degree_bound, anchored, eps_bound=eps_bound, seed=seed)
    Pc = setup.prolonged
    sol = solve(setup.problem, seed=seed)
    rep = IntegrandReport(space=sol)
    rep.notes.append(f"uniqueness is relative to coefficients of degree <= {degree_bound} "
                     f"over the instance denominator")
    if not nondegenerate(P):
        rep.notes.append("hypothesis unverified: (pi#)^3 H vanishes identically")
    rep.data["generators"] = list(setup.labels)
    rep.data["dimension"] = sol.dimension
    rep.data["verified"] = sol.verified
    if not sol.consistent:
        rep.obstructions.append(f"no extension: {sol.witness}")
        return rep
    homogeneous = not setup.problem.anchor.terms
    if sol.unique and not homogeneous:
        vec = sol.particular
    elif homogeneous and sol.dimension == 1:
        # a one-parameter family; normalized below to a = 1
        vec = sol.basis[0]
        rep.notes.append("extension determined up to a constant prefactor")
    else:
        rep.obstructions.append(f"extension not unique: dimension {sol.dimension}")
        return rep
    coeffs = read_coefficients(setup, vec)
    a = _proportional_constant(coeffs["E"], coeffs["F"], P)
    rep.data["a"] = a
    if a is None or a.is_zero():
        rep.obstructions.append("E, F are not of the form (a delta, a pi) with a != 0")
        return rep
    wq = setup.problem.superfunction(vec, with_anchor=not homogeneous)
    if homogeneous:
        wq = wq.scale(1 / a)
        rep.data["basis_scale"] = a
        rep.data["a"] = Scalar(1)
    rep.data["q_basis"] = wq
    rep.data["matches_q_display"] = wq == extension_q_display(P, 1, Pc)
    w = Pc.from_q(wq)
    rep.extension = w
    rep.data["matches_display"] = w == extension_display(P, Pc)
    verdict = is_basic(w, Pc.Qt, setup.gens)
    rep.data["basic"] = verdict.ok
    if not verdict:
        rep.obstructions.append(f"not basic: {verdict.reason}")
    if pullback:
        ws = Worldsheet(3)
        f = psm_pullback(P, ws, Pc)
        rep.pullback = f(w)
        rep.residual = worldsheet_pullback_identity(P, w, ws=ws, f=f)
    return rep


def psm_pullback(P: PoissonData, ws: Worldsheet, Pc: ProlongedChart | None = None):
    """``f*`` for ``x^i -> X^i``, ``p_i -> A_i`` lifted to the prolonged target."""
    Pc = Pc or twisted_prolongation(P)
    n = P.n
    phi = {f"x{i + 1}": ws.scalar_field(f"X{i + 1}") for i in range(n)}
    phi.update({f"p{i + 1}": ws.one_form_field(f"A{i + 1}") for i in range(n)})
    return lift_pullback(phi, ws.chart, ws.d, Pc)


def worldsheet_pullback_identity(P: PoissonData, extension: Superfunction | None = None,
                                 pi_sign: int = 1, ws: Worldsheet | None = None,
                                 f=None) -> Superfunction:
    """``f*(H~) - d(A_i dX^i + 1/2 pi^{ij} A_i A_j) - 1/6 H_ijk dX^i dX^j dX^k``.

    ``pi_sign`` flips the ``pi A A`` term for mutation tests.
    """
    Pc = twisted_prolongation(P)
    ws = ws or Worldsheet(3)
    if ws.dim < 3:
        raise InvalidInstance("the identity needs a 3d worldsheet")
    f = f or psm_pullback(P, ws, Pc)
    w = extension if extension is not None else extension_display(P, Pc)
    n = P.n
    sub, X = _target_fields(ws, P.names)
    A = [ws.one_form_field(f"A{i + 1}") for i in range(n)]
    d = ws.d
    dX = [d(x) for x in X]
    lag = ws.chart.zero()
    for i in range(n):
        lag = lag + A[i] * dX[i]
        for j in range(n):
            if not P.pi[i][j].is_zero():
                lag = lag + (A[i] * A[j]).scale(P.pi[i][j].subs(sub) * pi_sign / 2)
    return f(w) - d(lag) - _pull_form(ws, P.H, dX, sub)


def tpsm_gauge_variation(P: PoissonData, g: GTElement, extension: Superfunction | None = None,
                         ws: Worldsheet | None = None) -> Superfunction:
    """``f*([Q^, e^] H~)`` for the lift of ``g`` on a formal 3d worldsheet."""
    Pc = twisted_prolongation(P)
    ws = ws or Worldsheet(3)
    f = psm_pullback(P, ws, Pc)
    w = extension if extension is not None else extension_display(P, Pc)
    return gauge_variation(f, gt_lift(g, P, Pc), w)


def tpsm_symmetry_check(P: PoissonData, e: OneForm, cross_check: bool = False,
                        alpha_bar: TwoTensor | None = None) -> Verdict:
    """True iff ``D_H e = 0``; optionally confirms that the gauge variation vanishes."""
    dh = dh_operator(P, e)
    if not dh.is_zero():
        return Verdict(False, ("D_H e", dh), "D_H e != 0")
    if cross_check:
        n = P.n
        ab = alpha_bar if alpha_bar is not None else TwoTensor(T.zeros(n, n))
        if not ab.antisymmetric_part().is_zero():
            raise InvalidInstance("alpha_bar must be symmetric")
        var = tpsm_gauge_variation(P, GTElement.from_bar(e, ab, P.names))
        if var.terms:
            raise InvariantBreach(f"gauge variation of a D_H solution is {var}")
    return Verdict(True)
