import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from varlab.polyhedral import (
    ConeUnion,
    ConvexCone,
    ConvexPolyhedron,
    closest_point,
    cone_faces,
    covers,
    is_subspace,
    member,
    piece_faces_through,
    polar,
    tangent_cone_convex,
)
from varlab.subspace import Subspace, is_equal

cone = ConvexCone.from_generators
ABS_T = ConeUnion([cone([[1, 1]]), cone([[-1, 1]])])


def in_2d_cone(g1, g2, v) -> bool:
    """Membership in cone{g1, g2} by Cramer's rule on the conic coefficients."""
    det = g1[0] * g2[1] - g1[1] * g2[0]
    a = (v[0] * g2[1] - v[1] * g2[0]) / det
    b = (g1[0] * v[1] - g1[1] * v[0]) / det
    return a >= -1e-12 and b >= -1e-12


# ------------------------------------------------------------- examples


def test_member_examples():
    assert member(cone([[1, 1]]), [2, 2])
    assert not member(ABS_T, [0, -1])
    assert member(ABS_T, [0, 0])
    assert member(ConeUnion([cone([[3, -1]])]), [0, 0])


def test_polar_of_abs_tangent_cone():
    P = polar(ABS_T)
    assert P.equals(cone([[1, -1], [-1, -1]]))
    for v in ([0, -1], [0.5, -1], [-1, -1]):
        assert P.contains(v)
    assert not P.contains([1, -0.5])


def test_polar_extremes():
    assert polar(ConvexCone.whole(3)).is_zero
    assert polar(ConvexCone.zero(3)).equals(ConvexCone.whole(3))


def test_is_subspace_examples():
    L = is_subspace(cone([[1, 2], [-1, -2]]))
    assert L is not None and is_equal(L, Subspace.from_vectors([1.0, 2.0]))
    assert is_subspace(ABS_T) is None
    two_lines = ConeUnion([cone([[1, 1], [-1, -1]]), cone([[1, -1], [-1, 1]])])
    assert is_subspace(two_lines) is None
    assert two_lines.span().dim == 2


def test_tangent_cone_convex_examples():
    assert tangent_cone_convex(ConvexPolyhedron(1, [[1]], [0]), [0]).equals(cone([[-1]]))
    P = ConvexPolyhedron(2, [[-1, 0]], [0], [[1, -1]], [0])
    assert tangent_cone_convex(P, [0, 0]).equals(cone([[1, 1]]))
    assert tangent_cone_convex(ConvexPolyhedron.whole(2), [3, -1]).equals(ConvexCone.whole(2))


def test_piece_faces_through_examples():
    half = ConvexPolyhedron(1, [[-1]], [0])
    faces = piece_faces_through(half, [0], 1.0)
    assert len(faces) == 2
    cones_ = sorted((T.dim for _, T in faces))
    assert cones_ == [1, 1]
    assert any(T.equals(cone([[1]])) for _, T in faces)
    assert any(T.equals(ConvexCone.whole(1)) for _, T in faces)
    assert len(piece_faces_through(ConvexPolyhedron.whole(2), [0, 0], 1.0)) == 1
    quad = ConvexPolyhedron(2, [[-1, 0], [0, -1]], [0, 0])
    faces = piece_faces_through(quad, [0, 0], 1.0)
    assert len(faces) == 4
    for pt, _ in faces:
        assert quad.contains(pt)


def test_cone_faces_of_orthant():
    assert len(cone_faces(cone(np.eye(3)))) == 8


def test_covers_union_of_halfplanes():
    upper, lower = ConvexCone.from_constraints([[0, -1]]), ConvexCone.from_constraints([[0, 1]])
    assert covers(ConvexCone.whole(2), [upper, lower])
    assert not covers(ConvexCone.whole(2), [upper, cone([[1, -1], [-1, -1]])])


def test_from_constraints_and_generators_agree():
    K = ConvexCone.from_constraints([[-1, 0], [0, -1]])
    assert K.equals(cone([[1, 0], [0, 1]]))
    assert K.polar().equals(cone([[-1, 0], [0, -1]]))


def test_closest_point_on_segment():
    P = ConvexPolyhedron(2, [[0, 1], [0, -1]], [1, 1], [[1, 0]], [0])
    z = closest_point(P, np.array([0.3, 0.4]))
    np.testing.assert_allclose(z, [0.0, 0.4], atol=1e-9)
    assert closest_point(P, np.array([0.0, 0.0]), np.array([[0.0, 1.0]]), np.array([5.0])) is None


# ------------------------------------------------------------- properties


angles = st.floats(0.05, 3.0)


@given(st.floats(-np.pi, np.pi), angles, st.floats(-np.pi, np.pi), st.floats(0.1, 3.0))
def test_membership_matches_cramer_oracle(base, width, phi, r):
    g1 = np.array([np.cos(base), np.sin(base)])
    g2 = np.array([np.cos(base + width), np.sin(base + width)])
    v = r * np.array([np.cos(phi), np.sin(phi)])
    K = cone([g1, g2])
    expected = in_2d_cone(g1, g2, v)
    # skip boundary-adjacent cases where round-off decides
    if abs(np.sin(phi - base)) < 1e-6 or abs(np.sin(phi - base - width)) < 1e-6:
        return
    assert K.contains(v) == expected


@given(st.integers(2, 4), st.integers(0, 2**31 - 1))
def test_bipolar_and_polar_pairing(k, seed):
    rng = np.random.default_rng(seed)
    G = rng.integers(-2, 3, size=(rng.integers(1, 4), k))
    K = cone(G, ambient_dim=k)
    P = K.polar()
    assert P.polar().equals(K)
    for g in K.spanning_vectors():
        for h in P.spanning_vectors():
            assert g @ h <= 1e-9


@given(st.integers(2, 4), st.integers(0, 2**31 - 1))
def test_distance_zero_iff_member(k, seed):
    rng = np.random.default_rng(seed)
    K = cone(rng.integers(-2, 3, size=(2, k)), ambient_dim=k)
    v = rng.standard_normal(k)
    assert (K.distance_to(v) <= 1e-9) == K.contains(v)
    assert K.distance_to(v) <= np.linalg.norm(v) + 1e-12


@given(st.integers(2, 3), st.integers(0, 2**31 - 1))
def test_intersection_and_sum_inclusions(k, seed):
    rng = np.random.default_rng(seed)
    A = cone(rng.integers(-2, 3, size=(2, k)), ambient_dim=k)
    B = cone(rng.integers(-2, 3, size=(2, k)), ambient_dim=k)
    I, S = A.intersect(B), A.add(B)
    assert I.issubset(A) and I.issubset(B)
    assert A.issubset(S) and B.issubset(S)
    # polar of a sum is the intersection of polars
    assert S.polar().equals(A.polar().intersect(B.polar()))
