import itertools
import random

from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from qgauge import tensors as T
from qgauge.catalog import build_T1M, build_twisted_cotangent, so3_lie_poisson
from qgauge.graded import Derivation, apply
from qgauge.linalg import RowReducer
from qgauge.prolongation import prolong
from qgauge.sampling import monomials_upto
from qgauge.scalar import Scalar
from qgauge.solver import AnsatzProblem, ScalarSystem, solve

seeds = st.integers(0, 2**32 - 1)


def _two_form_problem():
    qm = build_T1M(3)
    ch = qm.chart
    slots = [(f"B{i}{j}", ch[f"th{i}"] * ch[f"th{j}"]) for i, j in itertools.combinations((1, 2, 3), 2)]
    prob = AnsatzProblem(ch, slots, monomials_upto(["x1", "x2", "x3"], 1))
    prob.impose_closed(qm.Q)
    return prob


def _comps(prob, vec):
    B = T.zeros(3, 3)
    for (lab, _), s in zip(prob.slots, prob.slot_functions(vec)):
        i, j = int(lab[1]) - 1, int(lab[2]) - 1
        B[i][j], B[j][i] = s, -s
    return B


def test_closed_linear_two_forms():
    # constants (3) plus d of homogeneous quadratic 1-forms (18 - 10)
    prob = _two_form_problem()
    sol = solve(prob)
    assert sol.consistent and sol.verified
    assert sol.dimension == 11
    for vec in sol.basis:
        assert T.is_zero_tensor(T.d_two_form(_comps(prob, vec), T.coords(3)))


def test_exact_slot_has_no_constraints():
    qm = build_twisted_cotangent(so3_lie_poisson())
    P = prolong(qm.chart, qm.Q)
    g = apply(P.Qt, P.chart["p1"] * P.chart["x2"])
    prob = AnsatzProblem(P.chart, [("g", g)], [Scalar(1)])
    prob.impose_closed(P.Qt)
    sol = solve(prob)
    assert sol.dimension == 1 and sol.rank == 0


def test_empty_generators_add_nothing():
    qm = build_T1M(2)
    prob = AnsatzProblem(qm.chart, [("a", qm.chart["th1"])], [Scalar(1), Scalar.var("x1")])
    prob.impose_horizontal([])
    assert solve(prob).dimension == 2


def test_inconsistent_toy_reports_witness():
    qm = build_twisted_cotangent(so3_lie_poisson())
    ch = qm.chart
    prob = AnsatzProblem(ch, [], [Scalar(1)], anchor=ch["p1"])
    prob.impose_horizontal([Derivation.partial(ch, "p1")], labels=["d/dp1"])
    sol = solve(prob)
    assert not sol.consistent and sol.dimension is None
    assert sol.witness["constraint"] == "d/dp1"
    assert sol.witness["value"] == "1"


def test_anchor_particular_solution():
    qm = build_T1M(3)
    ch = qm.chart
    anchor = ch["th1"] * ch["th2"].scale(Scalar.var("x3"))
    prob = AnsatzProblem(ch, [("c", ch["th1"] * ch["th3"])], [Scalar.var("x2")], anchor=anchor)
    prob.impose_closed(qm.Q)
    sol = solve(prob)
    # d(x3 th1 th2 + c x2 th1 th3) = (1 - c) th1 th2 th3
    assert sol.unique and sol.particular == {0: 1}
    assert apply(qm.Q, sol.solution()).is_zero()


def test_seed_independence():
    prob = _two_form_problem()
    spaces = [solve(prob, seed=s, stable=k) for s, k in ((0, 2), (7, 3), (123, 5))]
    ref = spaces[0]
    for sol in spaces[1:]:
        assert sol.dimension == ref.dimension
        assert sol.particular == ref.particular
        assert sol.basis == ref.basis


def test_scalar_system():
    x = Scalar.var("x1")
    # c0 * x + c1 * x^2 + (x + x^2) = 0 componentwise, second row: c0 - c1 = 0
    cols = [[x, Scalar(1)], [x * x, Scalar(-1)]]
    sol = solve(ScalarSystem(cols, anchor=[x + x * x, Scalar(0)], labels=["c0", "c1"]))
    assert sol.unique
    assert sol.particular == {0: mpq(-1), 1: mpq(-1)}
    bad = solve(ScalarSystem([[Scalar(0)]], anchor=[x], entry_labels=["row"]))
    assert not bad.consistent and bad.witness["constraint"] == "row"


def test_row_reducer():
    red = RowReducer(3)
    assert red.add({0: 1, 1: 2, 3: -3})
    assert red.add({1: 1, 2: 1})
    assert not red.add({0: 1, 1: 3, 2: 1, 3: -3})
    assert red.rank == 2 and red.consistent
    (vec,) = red.nullspace()
    assert vec == {2: 1, 0: 2, 1: -1}
    red.add({0: 0, 3: 1})
    assert not red.consistent


@settings(max_examples=50)
@given(seeds)
def test_row_reducer_soundness(seed):
    r = random.Random(seed)
    ncols = r.randint(1, 6)
    rows = [{k: r.randint(-3, 3) for k in range(ncols + 1)} for _ in range(r.randint(1, 6))]
    red = RowReducer(ncols)
    for row in rows:
        red.add(row)
    if not red.consistent:
        return

    def residual(vec, const):
        return [sum(row.get(k, 0) * vec.get(k, 0) for k in range(ncols)) + const * row.get(ncols, 0)
                for row in rows]

    assert all(v == 0 for v in residual(red.particular(), 1))
    for vec in red.nullspace():
        assert all(v == 0 for v in residual(vec, 0))
    assert red.rank + len(red.nullspace()) == ncols
