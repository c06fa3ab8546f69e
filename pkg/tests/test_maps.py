import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from varlab.maps import (
    Charted,
    GraphPoint,
    PLSingle,
    PolyUnion,
    Smooth,
    SmoothUnion,
    SumGE,
    chart_is_valid,
    contains,
    graphical_lipschitz_chart,
    pl_cell_jacobians,
    sample_graph_near,
)
from varlab.polyhedral import ConvexPolyhedron
from varlab.subspace import SplitDims

D11 = SplitDims(1, 1)


def abs_pl():
    return PLSingle(D11, [(ConvexPolyhedron(1, [[-1]], [0]), [[1]], [0]),
                          (ConvexPolyhedron(1, [[1]], [0]), [[-1]], [0])])


def abs_subgrad():
    return PolyUnion(D11, [
        ConvexPolyhedron(2, [[1, 0]], [0], [[0, 1]], [-1]),
        ConvexPolyhedron(2, [[0, 1], [0, -1]], [1, 1], [[1, 0]], [0]),
        ConvexPolyhedron(2, [[-1, 0]], [0], [[0, 1]], [1]),
    ])


P = GraphPoint


def test_contains_examples():
    assert contains(abs_pl(), P([1], [1]))
    assert contains(abs_subgrad(), P([0], [0.5]))
    assert not contains(abs_subgrad(), P([0.5], [0.5]))


def test_smooth_sampling_lies_on_parabola():
    F = Smooth.from_expressions("x**2", 1)
    pts = sample_graph_near(F, P([0], [0]), 0.1, 50, seed=3)
    assert len(pts) == 50
    for q in pts:
        assert abs(q.x[0]) <= 0.1 and q.y[0] == pytest.approx(q.x[0] ** 2, abs=1e-15)


def test_subgrad_sampling_at_corner_uses_both_faces():
    pts = sample_graph_near(abs_subgrad(), P([0], [1]), 0.2, 60, seed=1)
    on_segment = [q for q in pts if abs(q.x[0]) <= 1e-12 and q.y[0] < 1 - 1e-12]
    on_ray = [q for q in pts if q.x[0] > 1e-12 and abs(q.y[0] - 1) <= 1e-12]
    assert on_segment and on_ray
    assert len(on_segment) + len(on_ray) + sum(np.allclose(q.z, [0, 1]) for q in pts) == len(pts)
    for q in pts:
        assert np.linalg.norm(q.z - np.array([0, 1])) <= 0.2 + 1e-12


def test_sampling_is_deterministic():
    F = abs_subgrad()
    a = sample_graph_near(F, P([0], [0]), 0.3, 20, seed=7)
    b = sample_graph_near(F, P([0], [0]), 0.3, 20, seed=7)
    assert all(np.array_equal(p.z, q.z) for p, q in zip(a, b))


def test_pl_cell_jacobians_examples():
    J = pl_cell_jacobians(abs_pl(), [0])
    assert sorted(float(A[0, 0]) for A in J) == [-1.0, 1.0]
    assert [float(A[0, 0]) for A in pl_cell_jacobians(abs_pl(), [1])] == [1.0]
    two = PLSingle(D11, [(ConvexPolyhedron.whole(1), [[2]], [0])])
    assert [float(A[0, 0]) for A in pl_cell_jacobians(two, [5])] == [2.0]


def test_continuity_check_names_the_cells():
    bad = PLSingle(D11, [(ConvexPolyhedron(1, [[-1]], [0]), [[1]], [1]),
                         (ConvexPolyhedron(1, [[1]], [0]), [[-1]], [0])])
    with pytest.raises(ValueError, match="cells 0 and 1"):
        bad.check_continuity()
    abs_pl().check_continuity()


def test_charts():
    c = graphical_lipschitz_chart(abs_subgrad(), P([0], [0]))
    assert c is not None and c.d == 1
    corner = graphical_lipschitz_chart(abs_subgrad(), P([0], [1]))
    assert corner is not None and corner.source == "resolvent"
    assert graphical_lipschitz_chart(abs_pl(), P([0], [0])).d == 1


def test_chart_rejects_crossing_lines():
    F = PolyUnion(D11, [ConvexPolyhedron(2, eq=[[1, -1]], eq_rhs=[0]),
                        ConvexPolyhedron(2, eq=[[1, 1]], eq_rhs=[0])])
    assert graphical_lipschitz_chart(F, P([0], [0])) is None
    assert not chart_is_valid(F.local_cones(np.zeros(2)), np.eye(2), 1)


def test_sum_and_charted_membership():
    G = abs_subgrad()
    F = SumGE(Smooth.from_expressions("x", 1), G)
    assert F.contains(P([1], [2])) and not F.contains(P([1], [1]))
    M = np.array([[1.0, 1.0], [1.0, 0.0]])
    soft = PLSingle(D11, [(ConvexPolyhedron(1, [[-1]], [-1]), [[1]], [-1]),
                          (ConvexPolyhedron(1, [[1], [-1]], [1, 1]), [[0]], [0]),
                          (ConvexPolyhedron(1, [[1]], [-1]), [[1]], [1])])
    C = Charted(D11, M, soft)
    for z in ([0, 0.3], [0.5, 1], [-2, -1]):
        assert C.contains(P([z[0]], [z[1]])) == G.contains(P([z[0]], [z[1]]))
    assert not C.contains(P([0.5], [0.2]))


def test_smooth_union_active_branch():
    F = SmoothUnion(D11, [Smooth.from_expressions("x**2", 1), Smooth.from_expressions("-x**2", 1)])
    assert F.active_branches(P([1e-4], [1e-8])) == [0]
    assert F.active_branches(P([0], [0])) == [0, 1]
    assert graphical_lipschitz_chart(F, P([1], [1])).d == 1


@given(st.floats(-2, 2), st.floats(-2, 2))
def test_smooth_linear_graph(x, c):
    F = Smooth.linear([[c]], [1.0])
    assert F.contains(P([x], [c * x + 1]))
    np.testing.assert_array_equal(F.jacobian([x]), [[c]])
