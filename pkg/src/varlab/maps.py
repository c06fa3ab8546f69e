"""Set-valued maps R^n ⇉ R^m given through structured descriptions of their graphs.

Every variant answers the same questions: is a pair on the graph, give me
graph points near a reference pair, and (when available) an exact polyhedral
description of the graph.  Graph vectors are always ordered (x, y).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from itertools import combinations

import numpy as np

from .polyhedral import (
    ConvexCone,
    ConvexPolyhedron,
    closest_point,
    cone_faces,
    covers,
    distance_inf,
    tangent_cone_convex,
)
from .subspace import SplitDims

TAU_GRAPH_EXACT = 1e-9
TAU_GRAPH_SMOOTH = 1e-7

__all__ = [
    "TAU_GRAPH_EXACT",
    "TAU_GRAPH_SMOOTH",
    "GraphPoint",
    "GLChart",
    "SetValuedMap",
    "PolyUnion",
    "PLSingle",
    "Smooth",
    "SmoothUnion",
    "Charted",
    "SumGE",
    "ProxSubgrad",
    "contains",
    "sample_graph_near",
    "pl_cell_jacobians",
    "graphical_lipschitz_chart",
    "as_rng",
]


def as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass(frozen=True, eq=False)
class GraphPoint:
    """A pair (x, y) in R^n x R^m."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", np.atleast_1d(np.asarray(self.x, dtype=float)).ravel())
        object.__setattr__(self, "y", np.atleast_1d(np.asarray(self.y, dtype=float)).ravel())

    @property
    def z(self) -> np.ndarray:
        return np.concatenate([self.x, self.y])

    @classmethod
    def from_vector(cls, z, dims: SplitDims) -> "GraphPoint":
        z = np.asarray(z, dtype=float).ravel()
        return cls(z[: dims.n], z[dims.n:])

    def __repr__(self):
        return f"GraphPoint(x={self.x.tolist()}, y={self.y.tolist()})"


@dataclass(frozen=True, eq=False)
class GLChart:
    """Linear chart certifying that a graph is locally a Lipschitz graph.

    ``matrix`` maps graph vectors to chart coordinates; the first ``d``
    chart coordinates are the free variables of the single-valued map f.
    """

    matrix: np.ndarray
    d: int
    source: str = "declared"

    def split(self, V: np.ndarray):
        W = self.matrix @ V
        return W[: self.d], W[self.d:]


class SetValuedMap:
    """Common interface of all graph representations."""

    dims: SplitDims
    single_valued = False
    tau_graph = TAU_GRAPH_EXACT

    @property
    def ambient_dim(self) -> int:
        return self.dims.total

    def contains(self, p: GraphPoint, tol: float | None = None) -> bool:
        raise NotImplementedError

    def sample_near(self, p: GraphPoint, radius: float, count: int, rng) -> list[GraphPoint]:
        raise NotImplementedError

    def polyhedral(self) -> "PolyUnion | None":
        """Exact polyhedral description of the graph, if the variant has one."""
        return None

    def _check_point(self, p: GraphPoint):
        if p.x.size != self.dims.n or p.y.size != self.dims.m:
            raise ValueError("graph point has the wrong dimensions")


# ---------------------------------------------------------------- polyhedral


def _random_points_in(P: ConvexPolyhedron, center, radius, count, rng, tries: int = 4):
    """Generic points of P inside the max-norm box around center."""
    from scipy.optimize import linprog

    k = P.ambient_dim
    bounds = [(c - radius, c + radius) for c in center]
    ext = []
    for _ in range(2 * k + 4):
        cvec = rng.standard_normal(k)
        res = linprog(cvec, A_ub=P.ineq if P.ineq.shape[0] else None,
                      b_ub=P.ineq_rhs if P.ineq.shape[0] else None,
                      A_eq=P.eq if P.eq.shape[0] else None,
                      b_eq=P.eq_rhs if P.eq.shape[0] else None,
                      bounds=bounds, method="highs")
        if res.status == 0:
            ext.append(res.x)
    if not ext:
        return []
    E = np.array(ext)
    out = []
    for _ in range(tries * count):
        w = rng.dirichlet(np.ones(E.shape[0]))
        z = w @ E
        if np.linalg.norm(z - center) <= radius:
            out.append(z)
            if len(out) >= count:
                break
    return out


class PolyUnion(SetValuedMap):
    """Graph given as a finite union of convex polyhedra in R^{n+m}.

    Parameters
    ----------
    dims : SplitDims
    pieces : list of ConvexPolyhedron
    chart : optional (matrix, d) declaring a linear Lipschitz chart
    """

    def __init__(self, dims: SplitDims, pieces, chart=None):
        self.dims = dims
        self.pieces = list(pieces)
        if not self.pieces:
            raise ValueError("a polyhedral union needs at least one piece")
        for P in self.pieces:
            if P.ambient_dim != dims.total:
                raise ValueError("piece dimension does not match n + m")
        self.declared_chart = None
        if chart is not None:
            M, d = chart
            self.declared_chart = GLChart(np.asarray(M, dtype=float), int(d), "declared")

    def polyhedral(self):
        return self

    def contains(self, p, tol=None):
        tol = self.tau_graph if tol is None else tol
        z = p.z if isinstance(p, GraphPoint) else np.asarray(p, float)
        return any(P.contains(z, tol) for P in self.pieces)

    def adjacent(self, z, tol: float = TAU_GRAPH_EXACT) -> list[int]:
        return [i for i, P in enumerate(self.pieces) if P.contains(z, tol)]

    def local_cones(self, z, tol: float = TAU_GRAPH_EXACT) -> list[ConvexCone]:
        idx = self.adjacent(z, tol)
        if not idx:
            raise ValueError("point is not on the graph")
        return [tangent_cone_convex(self.pieces[i], z, tol) for i in idx]

    def signature(self, z, tol: float = TAU_GRAPH_EXACT):
        """Hashable key determining the local structure of the union at z."""
        return tuple((i, tuple(self.pieces[i].active(z, tol).tolist())) for i in self.adjacent(z, tol))

    def local_radius(self, z) -> float:
        """Radius on which the union coincides with z + (union of local cones)."""
        idx = set(self.adjacent(z))
        r = np.inf
        for i, P in enumerate(self.pieces):
            if i in idx:
                r = min(r, P.inactive_margin(z))
            else:
                r = min(r, distance_inf(P, z))
        return float(r)

    def sample_near(self, p, radius, count, rng):
        rng = as_rng(rng)
        z0 = p.z
        idx = self.adjacent(z0)
        reach = min(radius, 0.999 * self.local_radius(z0))
        out = []
        per = int(np.ceil(count / max(len(idx), 1)))
        for i in idx:
            K = tangent_cone_convex(self.pieces[i], z0)
            faces = cone_faces(K)
            for s in range(per):
                F = faces[s % len(faces)]
                w = np.zeros(self.ambient_dim)
                if F.generators.shape[0]:
                    w += rng.uniform(0.05, 1.0, F.generators.shape[0]) @ F.generators
                if F.lineality.shape[0]:
                    w += rng.standard_normal(F.lineality.shape[0]) @ F.lineality
                nw = np.linalg.norm(w)
                if nw == 0 or not np.isfinite(reach):
                    out.append(z0.copy())
                    continue
                out.append(z0 + reach * rng.uniform(0.0, 1.0) * w / nw)
        if radius > reach:
            # far pieces only matter for windows larger than the local radius
            for i, P in enumerate(self.pieces):
                if i in idx or distance_inf(P, z0) > radius:
                    continue
                out.extend(_random_points_in(P, z0, radius, per, rng))
        return [GraphPoint.from_vector(z, self.dims) for z in out[: max(count, len(out))]]

    def sample_window(self, center, radius, count, rng):
        """Generic points of the graph in the max-norm box of the given radius."""
        rng = as_rng(rng)
        z0 = center.z
        per = int(np.ceil(count / len(self.pieces)))
        out = []
        for P in self.pieces:
            if distance_inf(P, z0) < radius:
                out.extend(_random_points_in(P, z0, radius, per, rng))
        return [GraphPoint.from_vector(z, self.dims) for z in out]


# ------------------------------------------------------------- single-valued


class PLSingle(SetValuedMap):
    """Continuous piecewise-linear single-valued map.

    Parameters
    ----------
    dims : SplitDims
    cells : list of (ConvexPolyhedron in R^n, A (m x n), b (m,))
    """

    single_valued = True

    def __init__(self, dims: SplitDims, cells):
        self.dims = dims
        self.cells = []
        for P, A, b in cells:
            A = np.asarray(A, dtype=float).reshape(dims.m, dims.n)
            b = np.asarray(b, dtype=float).reshape(dims.m)
            if P.ambient_dim != dims.n:
                raise ValueError("cell dimension does not match n")
            self.cells.append((P, A, b))

    def value(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        for P, A, b in self.cells:
            if P.contains(x, TAU_GRAPH_EXACT):
                return A @ x + b
        raise ValueError("x lies outside every cell")

    def cell_jacobians(self, x, tol: float = TAU_GRAPH_EXACT) -> list[np.ndarray]:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        mats = []
        for P, A, _ in self.cells:
            if P.contains(x, tol) and not any(np.allclose(A, B, atol=1e-12) for B in mats):
                mats.append(A)
        if not mats:
            raise ValueError("x lies outside every cell")
        return mats

    @cached_property
    def _poly(self) -> PolyUnion:
        n, m = self.dims.n, self.dims.m
        pieces = []
        for P, A, b in self.cells:
            ineq = np.hstack([P.ineq, np.zeros((P.ineq.shape[0], m))])
            eq = np.vstack([np.hstack([P.eq, np.zeros((P.eq.shape[0], m))]), np.hstack([-A, np.eye(m)])])
            pieces.append(ConvexPolyhedron(n + m, ineq, P.ineq_rhs, eq, np.concatenate([P.eq_rhs, b])))
        return PolyUnion(self.dims, pieces, chart=(np.eye(n + m), n))

    def polyhedral(self):
        return self._poly

    def contains(self, p, tol=None):
        tol = self.tau_graph if tol is None else tol
        try:
            v = self.value(p.x)
        except ValueError:
            return False
        return bool(np.linalg.norm(v - p.y) <= tol * (1 + np.linalg.norm(p.y)))

    def sample_near(self, p, radius, count, rng):
        return _sample_single(self, p, radius, count, rng)

    def check_continuity(self, samples: int = 16, tol: float = 1e-9, seed: int = 0):
        """Compare adjacent cells on shared faces; raise ValueError naming the face."""
        rng = as_rng(seed)
        for (i, (P, A, b)), (j, (Q, C, c)) in combinations(enumerate(self.cells), 2):
            shared = ConvexPolyhedron(self.dims.n, np.vstack([P.ineq, Q.ineq]),
                                      np.concatenate([P.ineq_rhs, Q.ineq_rhs]),
                                      np.vstack([P.eq, Q.eq]), np.concatenate([P.eq_rhs, Q.eq_rhs]))
            z0 = closest_point(shared, np.zeros(self.dims.n))
            if z0 is None:
                continue
            pts = [z0] + _random_points_in(shared, z0, 1.0 + np.abs(z0).max(), samples - 1, rng)
            for x in pts:
                gap = np.linalg.norm((A @ x + b) - (C @ x + c))
                if gap > tol * (1 + np.linalg.norm(x)):
                    raise ValueError(
                        f"cells {i} and {j} disagree on their shared face near x={np.round(x, 6).tolist()} "
                        f"(gap {gap:.3g})")


def _sample_single(F, p, radius, count, rng):
    rng = as_rng(rng)
    out = []
    for _ in range(50 * count):
        x = p.x + radius * rng.uniform(-1.0, 1.0, F.dims.n)
        try:
            y = F.value(x)
        except ValueError:
            continue
        q = GraphPoint(x, y)
        if np.linalg.norm(q.z - p.z) <= radius:
            out.append(q)
            if len(out) >= count:
                break
    return out


def _lambdify(exprs, n):
    import sympy as sp

    syms = sp.symbols(f"x1:{n + 1}", real=True)
    local = {f"x{i + 1}": s for i, s in enumerate(syms)}
    if n == 1:
        local["x"] = syms[0]
    parsed = [sp.sympify(e, locals=local) for e in exprs]
    jac = [[sp.diff(e, s) for s in syms] for e in parsed]
    f = sp.lambdify([syms], parsed, "numpy")
    J = sp.lambdify([syms], jac, "numpy")
    affine = all(sp.diff(entry, s) == 0 for row in jac for entry in row for s in syms)
    return f, J, affine


class Smooth(SetValuedMap):
    """Continuously differentiable single-valued map with a Jacobian oracle."""

    single_valued = True
    tau_graph = TAU_GRAPH_SMOOTH

    def __init__(self, dims: SplitDims, value, jacobian, affine: bool = False, exprs=None):
        self.dims = dims
        self._value = value
        self._jacobian = jacobian
        self.affine = affine
        self.exprs = exprs

    @classmethod
    def from_expressions(cls, exprs, n: int) -> "Smooth":
        """Build from strings in the variables x1..xn (or x when n = 1)."""
        exprs = [exprs] if isinstance(exprs, str) else list(exprs)
        f, J, affine = _lambdify(exprs, n)
        dims = SplitDims(n, len(exprs))

        def value(x):
            return np.array(f(np.atleast_1d(np.asarray(x, dtype=float))), dtype=float).reshape(dims.m)

        def jacobian(x):
            return np.array(J(np.atleast_1d(np.asarray(x, dtype=float))), dtype=float).reshape(dims.m, dims.n)

        return cls(dims, value, jacobian, affine, exprs)

    @classmethod
    def linear(cls, A, b=None) -> "Smooth":
        A = np.atleast_2d(np.asarray(A, dtype=float))
        b = np.zeros(A.shape[0]) if b is None else np.asarray(b, dtype=float)
        return cls(SplitDims(A.shape[1], A.shape[0]), lambda x: A @ np.atleast_1d(x) + b, lambda x: A.copy(), True)

    def value(self, x):
        return self._value(x)

    def jacobian(self, x):
        return self._jacobian(x)

    def contains(self, p, tol=None):
        tol = self.tau_graph if tol is None else tol
        return bool(np.linalg.norm(self.value(p.x) - p.y) <= tol * (1 + np.linalg.norm(p.y)))

    def sample_near(self, p, radius, count, rng):
        return _sample_single(self, p, radius, count, rng)

    def polyhedral(self):
        if not self.affine:
            return None
        n, m = self.dims.n, self.dims.m
        A = self.jacobian(np.zeros(n))
        b = self.value(np.zeros(n))
        P = ConvexPolyhedron(n + m, eq=np.hstack([-A, np.eye(m)]), eq_rhs=b)
        return PolyUnion(self.dims, [P], chart=(np.eye(n + m), n))


class SmoothUnion(SetValuedMap):
    """Union of graphs of smooth branches, e.g. x ↦ {x², -x²}.

    Where several branches meet tangentially the cones are not computed;
    a fixture may supply them through ``point_bundles`` (a list of
    (z, ConeBundle) pairs).
    """

    tau_graph = TAU_GRAPH_SMOOTH

    def __init__(self, dims: SplitDims, branches, point_bundles=()):
        self.dims = dims
        self.branches = list(branches)
        self.point_bundles = list(point_bundles)

    def branches_at(self, p, tol=None) -> list[int]:
        return [i for i, B in enumerate(self.branches) if B.contains(p, tol)]

    def active_branches(self, p, tol=None) -> list[int]:
        """Branches through p with the smallest residual.

        Away from an intersection the branch that produced p has a strictly
        smaller residual than any other, even when both pass the graph
        tolerance.
        """
        idx = self.branches_at(p, tol)
        if len(idx) <= 1:
            return idx
        res = {i: float(np.linalg.norm(self.branches[i].value(p.x) - p.y)) for i in idx}
        best = min(res.values())
        return [i for i in idx if res[i] == best]

    def contains(self, p, tol=None):
        return bool(self.branches_at(p, tol))

    def sample_near(self, p, radius, count, rng):
        rng = as_rng(rng)
        out = []
        for _ in range(50 * count):
            B = self.branches[rng.integers(len(self.branches))]
            x = p.x + radius * rng.uniform(-1.0, 1.0, self.dims.n)
            q = GraphPoint(x, B.value(x))
            if np.linalg.norm(q.z - p.z) <= radius:
                out.append(q)
                if len(out) >= count:
                    break
        return out


# ------------------------------------------------------------------ charts


class Charted(SetValuedMap):
    """Graph mapped onto the graph of a single-valued map by an affine chart.

    gph F = {z : matrix z + offset ∈ gph inner}, where ``inner`` is a
    single-valued map R^d → R^{n+m-d}.
    """

    def __init__(self, dims: SplitDims, matrix, inner: SetValuedMap, offset=None, window: float = np.inf):
        self.dims = dims
        self.matrix = np.asarray(matrix, dtype=float)
        self.offset = np.zeros(dims.total) if offset is None else np.asarray(offset, dtype=float)
        self.inverse = np.linalg.inv(self.matrix)
        self.inner = inner
        self.window = window
        if inner.dims.total != dims.total:
            raise ValueError("inner graph dimension does not match n + m")
        self.tau_graph = inner.tau_graph

    def phi(self, z):
        return self.matrix @ np.asarray(z, dtype=float) + self.offset

    def phi_inv(self, w):
        return self.inverse @ (np.asarray(w, dtype=float) - self.offset)

    def contains(self, p, tol=None):
        return self.inner.contains(GraphPoint.from_vector(self.phi(p.z), self.inner.dims), tol)

    def sample_near(self, p, radius, count, rng):
        w0 = GraphPoint.from_vector(self.phi(p.z), self.inner.dims)
        pts = self.inner.sample_near(w0, radius / np.linalg.norm(self.inverse, 2), count, rng)
        out = [GraphPoint.from_vector(self.phi_inv(q.z), self.dims) for q in pts]
        return [q for q in out if np.linalg.norm(q.z - p.z) <= radius * (1 + 1e-12)]

    def polyhedral(self):
        inner = self.inner.polyhedral()
        if inner is None:
            return None
        pieces = [P.image(self.inverse, -self.inverse @ self.offset) for P in inner.pieces]
        return PolyUnion(self.dims, pieces)


class SumGE(SetValuedMap):
    """F(x) = g(x) + G(x) with g smooth and single-valued."""

    def __init__(self, g: Smooth, G: SetValuedMap):
        if g.dims != G.dims:
            raise ValueError("g and G have different dimensions")
        self.dims = G.dims
        self.g = g
        self.G = G
        self.tau_graph = max(g.tau_graph, G.tau_graph)
        self.single_valued = G.single_valued

    def to_inner(self, p: GraphPoint) -> GraphPoint:
        return GraphPoint(p.x, p.y - self.g.value(p.x))

    def from_inner(self, q: GraphPoint) -> GraphPoint:
        return GraphPoint(q.x, q.y + self.g.value(q.x))

    def value(self, x):
        return self.g.value(x) + self.G.value(x)

    def contains(self, p, tol=None):
        return self.G.contains(self.to_inner(p), tol)

    def sample_near(self, p, radius, count, rng):
        pts = self.G.sample_near(self.to_inner(p), radius / 2, count, rng)
        return [self.from_inner(q) for q in pts]

    def polyhedral(self):
        inner = self.G.polyhedral()
        if inner is None or not self.g.affine:
            return None
        n, m = self.dims.n, self.dims.m
        J = self.g.jacobian(np.zeros(n))
        T = np.block([[np.eye(n), np.zeros((n, m))], [J, np.eye(m)]])
        c = np.concatenate([np.zeros(n), self.g.value(np.zeros(n))])
        return PolyUnion(self.dims, [P.image(T, c) for P in inner.pieces])


class ProxSubgrad(SetValuedMap):
    """Localization of a subgradient map, read through the proximal mapping.

    A pair (x, x*) belongs to the graph when u = x + lam x* lies in the prox
    window and P_lam(u) = x.
    """

    tau_graph = TAU_GRAPH_SMOOTH

    def __init__(self, phi, lam: float):
        self.phi = phi
        self.lam = float(lam)
        self.dims = SplitDims(phi.n, phi.n)

    @property
    def chart_matrix(self) -> np.ndarray:
        n = self.phi.n
        return np.block([[np.eye(n), self.lam * np.eye(n)], [np.eye(n), np.zeros((n, n))]])

    @property
    def u_bar(self) -> np.ndarray:
        return self.phi.ref.x + self.lam * self.phi.ref.y

    def prox(self, u):
        from .prox import prox_map

        return prox_map(self.phi, self.lam, u)

    def contains(self, p, tol=None):
        tol = self.tau_graph if tol is None else tol
        u = p.x + self.lam * p.y
        try:
            x = self.prox(u)
        except ValueError:
            return False
        return bool(np.linalg.norm(x - p.x) <= tol * (1 + np.linalg.norm(p.x)))

    def sample_near(self, p, radius, count, rng):
        rng = as_rng(rng)
        u0 = p.x + self.lam * p.y
        out = []
        for _ in range(20 * count):
            u = u0 + radius * rng.uniform(-1.0, 1.0, self.phi.n)
            try:
                x = self.prox(u)
            except ValueError:
                continue
            q = GraphPoint(x, (u - x) / self.lam)
            if np.linalg.norm(q.z - p.z) <= radius:
                out.append(q)
                if len(out) >= count:
                    break
        return out

    @cached_property
    def inner(self) -> PolyUnion | None:
        """Graph of P_lam in (u, x) coordinates, when the subgradient graph is polyhedral."""
        G = self.phi.subgrad_graph
        if G is None:
            return None
        M = self.chart_matrix
        return PolyUnion(self.dims, [P.image(M) for P in G.pieces], chart=(np.eye(self.dims.total), self.dims.n))

    def polyhedral(self):
        G = self.phi.subgrad_graph
        if G is None:
            return None
        return PolyUnion(self.dims, G.pieces, chart=(self.chart_matrix, self.dims.n))


# ------------------------------------------------------------ free functions


def contains(F: SetValuedMap, p: GraphPoint, tol: float | None = None) -> bool:
    F._check_point(p)
    return F.contains(p, tol)


def sample_graph_near(F: SetValuedMap, p: GraphPoint, radius: float, count: int, seed=0) -> list[GraphPoint]:
    if not F.contains(p):
        raise ValueError("reference pair is not on the graph")
    return F.sample_near(p, radius, count, as_rng(seed))


def pl_cell_jacobians(F: PLSingle, x) -> list[np.ndarray]:
    if not isinstance(F, PLSingle):
        raise TypeError("cell Jacobians are defined for piecewise-linear maps only")
    return F.cell_jacobians(x)


# --------------------------------------------------------- Lipschitz charts


def chart_is_valid(cones: list[ConvexCone], M: np.ndarray, d: int) -> bool:
    """True if the union of the cones is, after M, a Lipschitz graph over R^d."""
    k = M.shape[0]
    moved = [K.image(M) for K in cones]
    proj = np.eye(k)[:d]
    if d > 0:
        shadows = [K.image(proj) for K in moved]
        if not covers(ConvexCone.whole(d), shadows):
            return False
    for i in range(len(moved)):
        for j in range(i, len(moved)):
            D = moved[i].add(-moved[j])
            if d > 0:
                D = D.with_equalities(proj)
            if not D.is_zero:
                return False
    return True


def _candidate_charts(dims: SplitDims, lams=(0.5, -0.5, 1.0, -1.0)):
    n, m, k = dims.n, dims.m, dims.total
    order = [n] + [d for d in range(k + 1) if d != n]
    for d in order:
        for S in combinations(range(k), d):
            rest = [i for i in range(k) if i not in S]
            yield np.eye(k)[list(S) + rest], d, "coordinates"
        if d == n and n == m:
            I, Z = np.eye(n), np.zeros((n, n))
            for lam in lams:
                yield np.block([[I, lam * I], [I, Z]]), n, "resolvent"
                yield np.block([[I, lam * I], [Z, I]]), n, "resolvent"


def _poly_chart(F: PolyUnion, z) -> GLChart | None:
    cones = F.local_cones(z)
    if F.declared_chart is not None:
        c = F.declared_chart
        return c if chart_is_valid(cones, c.matrix, c.d) else None
    for M, d, src in _candidate_charts(F.dims):
        if chart_is_valid(cones, M, d):
            return GLChart(M, d, src)
    return None


def graphical_lipschitz_chart(F: SetValuedMap, p: GraphPoint) -> GLChart | None:
    """A linearized chart (Jacobian of the coordinate change at p) or None."""
    k = F.dims.total
    if isinstance(F, PolyUnion):
        return _poly_chart(F, p.z)
    if isinstance(F, (PLSingle, Smooth)):
        return GLChart(np.eye(k), F.dims.n, "single-valued")
    if isinstance(F, Charted):
        w = GraphPoint.from_vector(F.phi(p.z), F.inner.dims)
        c = graphical_lipschitz_chart(F.inner, w)
        return None if c is None else GLChart(c.matrix @ F.matrix, c.d, "composed")
    if isinstance(F, SumGE):
        c = graphical_lipschitz_chart(F.G, F.to_inner(p))
        if c is None:
            return None
        n, m = F.dims.n, F.dims.m
        Tinv = np.block([[np.eye(n), np.zeros((n, m))], [-F.g.jacobian(p.x), np.eye(m)]])
        return GLChart(c.matrix @ Tinv, c.d, "composed")
    if isinstance(F, ProxSubgrad):
        return GLChart(F.chart_matrix, F.dims.n, "resolvent")
    if isinstance(F, SmoothUnion) and len(F.active_branches(p)) == 1:
        return GLChart(np.eye(k), F.dims.n, "single branch")
    return None
