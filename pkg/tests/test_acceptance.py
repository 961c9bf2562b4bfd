"""Acceptance criteria 1-8, each at its exact tolerance and runtime budget.

Every criterion prints one PASS/FAIL line; the lines are repeated in the
pytest terminal summary.
"""

import random
import time
from contextlib import contextmanager


from qgauge import tensors as T
from qgauge.catalog import (LieData, build_T1M, build_courant_phase, build_g1,
                            build_twisted_cotangent, constant_symplectic, so3_constants,
                            so3_lie_poisson, wz4_instance)
from qgauge.courant import (CourantPhase, dorfman_classical, dorfman_via_derived, pairing,
                            pairing_via_bracket, random_section, untwisted_dorfman, axioms_check)
from qgauge.equivariance import GTElement, TwoTensor, dh_operator
from qgauge.graded import apply
from qgauge.prolongation import qname
from qgauge.scalar import Scalar
from qgauge.sigma_models import (dh_solutions, extension_display, extension_q_display,
                                 stanciu_conditions, stanciu_family, stanciu_gauging,
                                 stanciu_problem, tpsm_extension, tpsm_gauge_variation,
                                 tpsm_symmetry_check, u1_rotation_instance, WZData,
                                 worldsheet_pullback_identity)
from qgauge.solver import solve

import laws
import props
from helpers import ACCEPTANCE


@contextmanager
def criterion(num, title, limit):
    t0 = time.perf_counter()
    ok = False
    try:
        yield
        ok = True
    finally:
        dt = time.perf_counter() - t0
        good = ok and dt < limit
        line = f"criterion {num}: {'PASS' if good else 'FAIL'}  {title}  ({dt:.1f}s, budget {limit}s)"
        ACCEPTANCE.append(line)
        print(line)
    assert dt < limit, f"criterion {num} took {dt:.1f}s, budget {limit}s"


def _certified(qm):
    return not qm.valid and qm.check.certificate is not None and qm.check.certificate[1].terms


# -- 1 ---------------------------------------------------------------------------------

def test_criterion_1_q_structures():
    with criterion(1, "Q^2 equivalences", 10):
        for n in range(1, 6):
            assert build_T1M(n).valid
        assert build_g1(so3_constants()).valid
        assert build_twisted_cotangent(so3_lie_poisson()).valid
        assert build_twisted_cotangent(wz4_instance(-1)).valid
        vol = T.antisymmetrize3({(0, 1, 2): 1}, 3)
        assert build_courant_phase(3, vol).valid
        x1 = Scalar.var("x1")
        assert build_courant_phase(4, T.scale(T.antisymmetrize3({(0, 1, 2): 1}, 4), x1)).valid
        # mutated counterparts
        assert _certified(build_g1(LieData.from_brackets(3, {(1, 1, 2): 1, (2, 1, 3): 1})))
        assert _certified(build_twisted_cotangent(wz4_instance(1)))
        x4 = Scalar.var("x4")
        assert _certified(build_courant_phase(4, T.scale(T.antisymmetrize3({(0, 1, 2): 1}, 4), x4)))


# -- 2 ---------------------------------------------------------------------------------

def test_criterion_2_unique_extension():
    with criterion(2, "unique basic extension on WZ4", 120):
        P = wz4_instance(-1)
        rep = tpsm_extension(P, pullback=False)
        sol = rep.space
        assert sol.consistent and sol.unique and sol.verified
        assert rep.data["a"] == 1
        assert rep.data["q_basis"] == extension_q_display(P, 1)
        assert rep.extension == extension_display(P)
        assert rep.data["basic"]
        assert not rep.obstructions


# -- 3 ---------------------------------------------------------------------------------

def test_criterion_3_pullback_identity():
    with criterion(3, "worldsheet pullback identity", 30):
        for P in (wz4_instance(-1), constant_symplectic(2)):
            assert worldsheet_pullback_identity(P).is_zero()
            assert not worldsheet_pullback_identity(P, pi_sign=-1).is_zero()


# -- 4 ---------------------------------------------------------------------------------

def _full_A(prob, vec, n):
    funcs = dict(zip((lab for lab, _ in prob.slots), prob.slot_functions(vec)))
    comps = {}
    for lab, s in funcs.items():
        if lab.startswith("A_"):
            i, j, k = (int(c) - 1 for c in lab[2:])
            comps[(i, j, k)] = s / 6
    return T.antisymmetrize3(comps, n)


def _tensor(prob, vec, letter, shape):
    funcs = dict(zip((lab for lab, _ in prob.slots), prob.slot_functions(vec)))
    out = T.zeros(*shape)
    for a in range(shape[0]):
        for b in range(shape[1]):
            out[a][b] = funcs.get(f"{letter}_{a + 1}{b + 1}", Scalar())
    return out


def _closed_family(W):
    setup = stanciu_problem(W, anchored=False, horizontal=False)
    sol = solve(setup.problem)
    assert sol.consistent and sol.verified
    prob, n, dim = setup.problem, W.n, W.dim
    for vec in sol.basis:
        A = _full_A(prob, vec, n)
        E = _tensor(prob, vec, "E", (n, dim))
        F = _tensor(prob, vec, "F", (dim, dim))
        assert all((F[a][b] + F[b][a]).is_zero() for a in range(dim) for b in range(dim))
        assert T.is_zero_tensor(T.d_three_form(A, W.names))
        assert prob.superfunction(vec, with_anchor=False) == stanciu_family(setup, A, E, F)
    return sol


def _conditions(W, E, F):
    setup = stanciu_problem(W)
    Pc = setup.prolonged
    qb = Pc.qbasis_chart
    w = stanciu_family(setup, T.scale(W.form, Scalar(1) / 6), E, F)
    assert not apply(Pc.in_q_basis(Pc.Qt), w).terms
    Qx = [qb[qname(f"x{i}")] for i in range(1, W.n + 1)]
    Qxi = [qb[qname(f"xi{a}")] for a in range(1, W.dim + 1)]
    for a, g in enumerate(setup.gens):
        r = apply(Pc.in_q_basis(g), w)
        eps = [1 if b == a else 0 for b in range(W.dim)]
        c1, c2 = stanciu_conditions(W, E, F, eps)
        for j in range(W.n):
            for k in range(j + 1, W.n):
                (m, c), = (Qx[j] * Qx[k]).terms.items()
                assert r.coefficient(m) / c == 2 * c1[j][k]
        for b in range(W.dim):
            (m, c), = Qxi[b].terms.items()
            assert r.coefficient(m) / c == c2[b]


def test_criterion_4_stanciu():
    with criterion(4, "gauging on T[1]E[1]", 60):
        x1, x2, x3 = (Scalar.var(f"x{i}") for i in range(1, 4))
        W = u1_rotation_instance()
        assert _closed_family(W).dimension == 40
        vol = T.antisymmetrize3({(0, 1, 2): 1}, 3)
        W2 = WZData(3, vol, [[1, 0, 0], [0, 1, 0]])
        _closed_family(W2)
        _conditions(W, [[x1 * x2], [x3 * x3], [x1 + x2 * x3]], [[0]])
        _conditions(W2, [[x2, x3], [x1 * x3, 1], [x1 * x1, x2]], [[0, x1 + x3], [-x1 - x3, 0]])
        rep = stanciu_gauging(W)
        assert rep.space.consistent and rep.ok
        F = rep.data["F"]
        assert all((F[a][b] + F[b][a]).is_zero() for a in range(W.dim) for b in range(W.dim))
        assert rep.data["matches_display"]


# -- 5 ---------------------------------------------------------------------------------

def test_criterion_5_symmetry_condition():
    with criterion(5, "symmetry condition vs gauge variation", 60):
        P = wz4_instance(-1)
        zero = TwoTensor(T.zeros(4, 4))
        sols = dh_solutions(P, 2)
        assert len(sols) >= 3
        for e in sols[:4]:
            assert tpsm_symmetry_check(P, e)
            assert not tpsm_gauge_variation(P, GTElement.from_bar(e, zero, P.names)).terms
        r = random.Random(2024)
        tried = 0
        while tried < 10:
            e = props.random_form(r, P)
            if dh_operator(P, e).is_zero():
                continue
            tried += 1
            assert not tpsm_symmetry_check(P, e)
            assert tpsm_gauge_variation(P, GTElement.from_bar(e, zero, P.names)).terms


# -- 6 ---------------------------------------------------------------------------------

PROPS = [props.prop_dual_path, props.prop_dh_compatibility, props.prop_alpha_bracket,
         props.prop_action_axiom, props.prop_action_is_derivation, props.prop_gt_closure]


def test_criterion_6_symmetry_algebra():
    with criterion(6, "symmetry algebra identities (50 seeds x 2 instances)", 120):
        for key in ("so3", "wz4"):
            for prop in PROPS:
                for seed in range(50):
                    prop(key, seed)


# -- 7 ---------------------------------------------------------------------------------

def test_criterion_7_courant():
    with criterion(7, "Courant suite", 120):
        vol = T.antisymmetrize3({(0, 1, 2): 1}, 3)
        x4 = Scalar.var("x4")
        assert CourantPhase(3, vol).is_q()
        bad = T.scale(T.antisymmetrize3({(0, 1, 2): 1}, 4), x4)
        assert not T.is_zero_tensor(T.d_three_form(bad, T.coords(4)))
        assert not CourantPhase(4, bad).is_q()
        phase = CourantPhase(3, vol)
        r = random.Random(7)
        for _ in range(50):
            a, b = random_section(r, 3), random_section(r, 3)
            assert dorfman_via_derived(phase, a, b) == dorfman_classical(a, b, vol)
            assert pairing_via_bracket(phase.chart, a, b) == pairing(a, b)
        for H in (T.zeros(3, 3, 3), vol):
            assert axioms_check(H, samples=10, seed=1).ok
        a, b = random_section(r, 3), random_section(r, 3)
        assert untwisted_dorfman(a, b) != dorfman_via_derived(phase, a, b)
        assert not axioms_check(bad, n=4, samples=3).results["leibniz"]


# -- 8 ---------------------------------------------------------------------------------

LAWS = [laws.law_koszul, laws.law_associativity, laws.law_leibniz, laws.law_antisymmetry,
        laws.law_jacobi, laws.law_loday]


def test_criterion_8_kernel_laws():
    with criterion(8, "kernel algebra laws (200 cases each)", 60):
        for law in LAWS:
            for seed in range(200):
                law(seed)
