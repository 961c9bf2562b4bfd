import random

import pytest

from qgauge import tensors as T
from qgauge.catalog import (PoissonData, build_twisted_cotangent, constant_symplectic,
                            so3_lie_poisson, wz4_instance)
from qgauge.equivariance import (GTElement, OneForm, TwoTensor, dh_operator, is_basic,
                                 is_horizontal, twisted_prolongation)
from qgauge.graded import Derivation, apply
from qgauge.prolongation import qname
from qgauge.scalar import Scalar
from qgauge.sigma_models import (InvalidInstance, WZData, Worldsheet, dh_solutions,
                                 extension_display, gt_generators, minimal_coupling, nondegenerate,
                                 stanciu_conditions, stanciu_family,
                                 stanciu_gauging, stanciu_problem, tpsm_extension,
                                 tpsm_gauge_variation, tpsm_symmetry_check, u1_rotation_instance,
                                 worldsheet_pullback_identity, zero_gauge_fields)
from qgauge.solver import solve

import props

x1, x2, x3 = (Scalar.var(f"x{i}") for i in range(1, 4))
S = Scalar.var


def _area(n=2):
    B = T.zeros(n, n)
    B[0][1], B[1][0] = Scalar(1), Scalar(-1)
    return B


def _rel(f, g):
    """Coefficient of ``f`` along the single monomial of ``g``."""
    (m, c), = g.terms.items()
    return f.coefficient(m) / c


@pytest.fixture(scope="module")
def wz4_report():
    return tpsm_extension(wz4_instance(-1))


# -- minimal coupling -------------------------------------------------------------

def test_minimal_coupling_rotation_by_hand():
    W = WZData(2, _area(), [[-x2, x1]])
    ws = Worldsheet(2)
    f = minimal_coupling(W, ws)
    # X*B = dX1 dX2; i_v B = -x1 dx1 - x2 dx2; i_v i_v B = 0
    pulled = S("X1_1") * S("X2_2") - S("X1_2") * S("X2_1")
    coupled = (S("A1s1") * (S("X1") * S("X1_2") + S("X2") * S("X2_2"))
               - S("A1s2") * (S("X1") * S("X1_1") + S("X2") * S("X2_1")))
    want = (ws.ds(1) * ws.ds(2)).scale(pulled + coupled)
    assert f == want


def test_minimal_coupling_reduces_without_gauge_fields():
    W = WZData(2, _area(), [[-x2, x1], [Scalar(1), Scalar(0)]])
    f = minimal_coupling(W)
    bare = minimal_coupling(WZData(2, _area(), []))
    assert zero_gauge_fields(f) == bare
    assert zero_gauge_fields(f) != f


def test_minimal_coupling_zero_form():
    assert minimal_coupling(WZData(2, T.zeros(2, 2), [[-x2, x1]])).is_zero()


def test_minimal_coupling_quadratic_term():
    # translations: i_v i_w B = B(w, v) is a nonzero constant
    W = WZData(2, _area(), [[1, 0], [0, 1]])
    f = minimal_coupling(W)
    quad = f.map_coefficients(lambda s: s.subs({v: Scalar(0) for v in s.variables()
                                                if v.startswith("X")}))
    assert quad.terms
    assert all("A" in str(s) for s in quad.terms.values())


def test_minimal_coupling_rejects_three_forms():
    with pytest.raises(InvalidInstance):
        minimal_coupling(u1_rotation_instance())
    with pytest.raises(InvalidInstance):
        minimal_coupling(WZData(2, _area(), []), Worldsheet(3))


# -- Wess-Zumino gauging on T[1]E[1] -------------------------------------------------

def test_invalid_wz_data():
    with pytest.raises(InvalidInstance):
        WZData(3, T.zeros(3, 3, 3), [[1, 0]])
    # x1 dx1 dx2 dx3 is closed on R^3 but not invariant under d/dx1
    H = T.scale(T.antisymmetrize3({(0, 1, 2): 1}, 3), x1)
    with pytest.raises(InvalidInstance):
        WZData(3, H, [[1, 0, 0]]).validate()
    assert "closed" not in WZData(3, H, [[1, 0, 0]]).violations()


def test_stanciu_u1_rotation():
    W = u1_rotation_instance()
    rep = stanciu_gauging(W)
    assert rep.ok
    assert rep.data["E"] == [[x1 * x3], [x2 * x3], [Scalar(0)]]
    assert rep.data["F"] == [[Scalar(0)]]
    assert rep.data["dimension"] == 5
    assert rep.data["matches_display"]
    # differs from the representative -1/2 (x1^2 + x2^2) dx3 by a closed form
    E = [row[0] for row in rep.data["E"]]
    rep_E = [Scalar(0), Scalar(0), -(x1 * x1 + x2 * x2) / 2]
    assert T.d_one_form(E, W.names) == T.d_one_form(rep_E, W.names)
    assert T.d_one_form(E, W.names) == T.contract(W.rho[0], W.form)


def test_stanciu_closed_family():
    W = u1_rotation_instance()
    setup = stanciu_problem(W, anchored=False, horizontal=False)
    sol = solve(setup.problem)
    assert sol.dimension == 40
    Qt = setup.prolonged.in_q_basis(setup.prolonged.Qt)
    for k in range(0, 40, 7):
        assert not apply(Qt, sol.homogeneous(k)).terms


def test_stanciu_family_is_closed_and_exact():
    W = u1_rotation_instance()
    setup = stanciu_problem(W)
    Pc = setup.prolonged
    Qt = Pc.in_q_basis(Pc.Qt)
    E = [[x1 * x2], [x3 * x3], [x1 + x2 * x3]]
    w = stanciu_family(setup, T.scale(W.form, Scalar(1) / 6), E, [[0]])
    assert not apply(Qt, w).terms
    xi1 = Pc.qbasis_chart["xi1"]
    pot = sum(((Pc.qbasis_chart[qname(f"x{i + 1}")] * xi1).scale(-E[i][0]) for i in range(3)),
              Pc.qbasis_chart.zero())
    A = T.scale(W.form, Scalar(1) / 6)
    assert w == stanciu_family(setup, A, T.zeros(3, 1), [[0]]) + apply(Qt, pot)


def test_stanciu_conditions_match_horizontality():
    W = u1_rotation_instance()
    setup = stanciu_problem(W)
    Pc = setup.prolonged
    qb = Pc.qbasis_chart
    E = [[x1 * x2], [x3 * x3], [x1 + x2 * x3]]
    w = stanciu_family(setup, T.scale(W.form, Scalar(1) / 6), E, [[0]])
    r = apply(Pc.in_q_basis(setup.gens[0]), w)
    c1, c2 = stanciu_conditions(W, E, [[0]], [1])
    Qx = [qb[qname(f"x{i}")] for i in range(1, 4)]
    for j in range(3):
        for k in range(j + 1, 3):
            assert _rel(r, Qx[j] * Qx[k]) == 2 * c1[j][k]
    assert _rel(r, qb[qname("xi1")]) == c2[0]


def test_stanciu_conditions_vanish_on_solution():
    W = u1_rotation_instance()
    rep = stanciu_gauging(W)
    c1, c2 = stanciu_conditions(W, rep.data["E"], rep.data["F"], [1])
    assert T.is_zero_tensor(c1) and T.is_zero_tensor(c2)


def test_stanciu_trivial_action():
    W = WZData(3, T.antisymmetrize3({(0, 1, 2): 1}, 3), [[0, 0, 0]])
    rep = stanciu_gauging(W)
    assert rep.ok
    assert rep.data["F"] == [[Scalar(0)]]
    # E only has to be closed
    E = [row[0] for row in rep.data["E"]]
    assert T.is_zero_tensor(T.d_one_form(E, W.names))


def test_stanciu_zero_form():
    rep = stanciu_gauging(u1_rotation_instance(T.zeros(3, 3, 3)))
    assert rep.ok
    assert rep.extension.is_zero()


def test_stanciu_translations_obstructed():
    H = T.antisymmetrize3({(0, 1, 2): 1}, 3)
    W = WZData(3, H, [[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    rep = stanciu_gauging(W)
    assert not rep.ok
    assert not rep.space.consistent
    assert rep.space.witness["constraint"] == "eps[1]_3"
    assert rep.space.witness["monomial"] == "Qx1*Qx2"


def test_stanciu_two_translations():
    H = T.antisymmetrize3({(0, 1, 2): 1}, 3)
    rep = stanciu_gauging(WZData(3, H, [[1, 0, 0], [0, 1, 0]]))
    assert rep.ok
    F = rep.data["F"]
    assert (F[0][1] + F[1][0]).is_zero()


def test_stanciu_x_dependent_generators_inconsistent():
    setup = stanciu_problem(u1_rotation_instance(), eps_degree=1)
    assert not solve(setup.problem).consistent


def test_stanciu_needs_three_form():
    with pytest.raises(InvalidInstance):
        stanciu_gauging(WZData(2, _area(), [[-x2, x1]]))


# -- twisted Poisson sigma model -----------------------------------------------------

def test_tpsm_wz4_unique(wz4_report):
    rep = wz4_report
    assert rep.ok
    assert rep.space.unique
    assert rep.data["a"] == 1
    assert rep.data["matches_q_display"]
    assert rep.data["matches_display"]
    assert rep.data["basic"]
    assert rep.residual.is_zero()
    assert not any("hypothesis" in n for n in rep.notes)


def test_tpsm_wz4_generators(wz4_report):
    gens = wz4_report.data["generators"]
    assert sum(g.startswith("alpha") for g in gens) == 10
    assert sum(g.startswith("eps") for g in gens) == 11


def test_tpsm_wz4_unanchored():
    rep = tpsm_extension(wz4_instance(-1), anchored=False, pullback=False)
    assert rep.data["dimension"] == 1
    assert rep.data["a"] == 1
    assert rep.data["matches_display"]


def test_tpsm_symplectic_untwisted():
    P = constant_symplectic(2)
    rep = tpsm_extension(P)
    assert rep.ok
    assert rep.data["dimension"] == 1
    assert rep.data["a"] == 1
    assert "extension determined up to a constant prefactor" in rep.notes
    assert any("hypothesis unverified" in n for n in rep.notes)
    Pc = twisted_prolongation(P)
    ch = Pc.chart
    want = ch["dp1"] * ch["dx1"] + ch["dp2"] * ch["dx2"]
    assert rep.extension == want
    assert rep.residual.is_zero()


def test_tpsm_rejects_invalid():
    with pytest.raises(InvalidInstance):
        tpsm_extension(wz4_instance(1))


def test_nondegeneracy():
    assert nondegenerate(wz4_instance(-1))
    assert not nondegenerate(constant_symplectic(4))
    assert not nondegenerate(so3_lie_poisson())


def test_closed_h_orthogonal_to_anchor():
    # pi = d1 ^ d2 on R^5 and H' = dx3 dx4 dx5 never meets the image of pi#
    pi = _area(5)
    P = PoissonData(5, pi, T.antisymmetrize3({(2, 3, 4): 1}, 5))
    assert build_twisted_cotangent(P).valid
    assert not nondegenerate(P)
    Pc = twisted_prolongation(P)
    _, gens = gt_generators(P, dh_solutions(P, 1), Pc)
    assert is_basic(extension_display(P, Pc), Pc.Qt, gens)
    rep = tpsm_extension(P, degree_bound=0, eps_bound=1, pullback=False)
    assert any("hypothesis unverified" in n for n in rep.notes)
    assert rep.space.consistent


def test_pullback_identity_residuals():
    assert worldsheet_pullback_identity(wz4_instance(-1)).is_zero()
    assert worldsheet_pullback_identity(constant_symplectic(2)).is_zero()
    assert worldsheet_pullback_identity(so3_lie_poisson()).is_zero()


def test_pullback_identity_sign_mutation():
    assert not worldsheet_pullback_identity(wz4_instance(-1), pi_sign=-1).is_zero()
    assert not worldsheet_pullback_identity(constant_symplectic(2), pi_sign=-1).is_zero()


def test_pullback_identity_needs_bulk():
    with pytest.raises(InvalidInstance):
        worldsheet_pullback_identity(constant_symplectic(2), ws=Worldsheet(2))


# -- symmetry condition --------------------------------------------------------------

def test_symmetry_untwisted_closed_forms():
    P = so3_lie_poisson()
    f = x1 * x2 + x3 * x3 * x1
    e = OneForm(T.d_function(f, P.names))
    assert tpsm_symmetry_check(P, e, cross_check=True)
    assert not tpsm_symmetry_check(P, OneForm([x2, 0, 0]))


def test_symmetry_dh_solutions_cross_check():
    P = wz4_instance(-1)
    sols = dh_solutions(P, 2)
    assert len(sols) == 10
    ab = TwoTensor([[Scalar(1) if {i, j} == {0, 2} else Scalar(0) for j in range(4)]
                    for i in range(4)])
    for k in (0, 3, 7):
        assert tpsm_symmetry_check(P, sols[k], cross_check=True, alpha_bar=ab)


def test_symmetry_random_forms_fail():
    P = wz4_instance(-1)
    r = random.Random(11)
    for _ in range(3):
        e = props.random_form(r, P)
        v = tpsm_symmetry_check(P, e)
        assert not v
        assert v.certificate[1] == dh_operator(P, e)
        zero = TwoTensor(T.zeros(4, 4))
        assert tpsm_gauge_variation(P, GTElement.from_bar(e, zero, P.names)).terms


def test_symmetry_rejects_antisymmetric_alpha():
    P = so3_lie_poisson()
    with pytest.raises(InvalidInstance):
        tpsm_symmetry_check(P, OneForm([0, 0, 0]), cross_check=True,
                            alpha_bar=TwoTensor(_area(3)))


def test_extension_horizontal_under_gt_lifts():
    P = wz4_instance(-1)
    Pc = twisted_prolongation(P)
    labels, gens = gt_generators(P, dh_solutions(P, 1), Pc)
    w = extension_display(P, Pc)
    assert is_horizontal(w, gens)
    # a contraction outside the GT family sees H~
    bad = gt_generators(P, [], Pc)[1] + [Derivation(Pc.chart, {"p3": x2}, -1)]
    assert not is_horizontal(w, bad)
