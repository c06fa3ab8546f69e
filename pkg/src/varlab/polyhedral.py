"""Convex polyhedra, convex polyhedral cones and finite unions of cones.

Cones are kept in both forms at once: generators plus a lineality basis, and
the inequality/equality rows describing the same set.  The conversion between
the two enumerates extreme rays of the pointed part by brute force over row
subsets, which is exact enough for the small integer data this package works
with (ambient dimension at most 6 or so).
"""
from __future__ import annotations

from functools import cached_property
from itertools import combinations

import numpy as np

from .subspace import Subspace

TAU_CONE = 1e-9

__all__ = [
    "TAU_CONE",
    "ConvexCone",
    "ConeUnion",
    "ConvexPolyhedron",
    "covers",
    "member",
    "polar",
    "is_subspace",
    "tangent_cone_convex",
    "piece_faces_through",
    "cone_faces",
]


def _as_rows(M, k: int) -> np.ndarray:
    if M is None:
        return np.zeros((0, k))
    A = np.asarray(M, dtype=float)
    if A.size == 0:
        return np.zeros((0, k))
    return A.reshape(-1, k)


def _null(M: np.ndarray, k: int, tol: float = 1e-10) -> np.ndarray:
    """Orthonormal basis (k x r) of the null space of the p x k matrix M."""
    if M.shape[0] == 0:
        return np.eye(k)
    _, s, Vt = np.linalg.svd(M, full_matrices=True)
    scale = max(1.0, s[0]) if s.size else 1.0
    r = int(np.sum(s > tol * scale))
    return Vt[r:].T.copy()


def _unit_rows(M: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    if M.shape[0] == 0:
        return M
    norms = np.linalg.norm(M, axis=1)
    keep = norms > tol
    return M[keep] / norms[keep, None]


def _dedupe_directions(M: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    out = []
    for row in M:
        if not any(np.linalg.norm(row - o) <= tol for o in out):
            out.append(row)
    if not out:
        return np.zeros((0, M.shape[1]))
    return np.array(out)


def _hull_from_constraints(ineq: np.ndarray, eq: np.ndarray, k: int, tol: float = TAU_CONE):
    """Generators and lineality basis of {w : ineq w <= 0, eq w = 0}.

    Returns (generators g x k with unit rows, lineality l x k orthonormal rows).
    """
    ineq = _unit_rows(ineq)
    eq = _unit_rows(eq)
    W = _null(eq, k)
    r = W.shape[1]
    if r == 0:
        return np.zeros((0, k)), np.zeros((0, k))
    Aw = ineq @ W
    Aw = Aw[np.linalg.norm(Aw, axis=1) > tol] if Aw.shape[0] else Aw
    Lw = _null(Aw, r)
    lineality = (W @ Lw).T
    if Lw.shape[1]:
        U = _null(Lw.T, r)
    else:
        U = np.eye(r)
    s = U.shape[1]
    rays = []
    if s > 0:
        Au = _dedupe_directions(_unit_rows(Aw @ U)) if Aw.shape[0] else np.zeros((0, s))
        if s == 1:
            for sign in (1.0, -1.0):
                if Au.shape[0] == 0 or np.all(Au[:, 0] * sign <= tol):
                    rays.append(np.array([sign]))
        else:
            for combo in combinations(range(Au.shape[0]), s - 1):
                sub = Au[list(combo)]
                ns = _null(sub, s)
                if ns.shape[1] != 1:
                    continue
                y = ns[:, 0]
                for cand in (y, -y):
                    if np.all(Au @ cand <= tol):
                        rays.append(cand)
                        break
    if rays:
        gens = _dedupe_directions(_unit_rows(np.array([W @ U @ y for y in rays])))
    else:
        gens = np.zeros((0, k))
    return gens, lineality


class ConvexCone:
    """Closed convex polyhedral cone {sum l_i g_i + sum m_j v_j : l >= 0}.

    Construct with :meth:`from_generators` or :meth:`from_constraints`; both
    canonicalize so that ``generators`` are the extreme rays of the pointed
    part and ``lineality`` is an orthonormal basis of the lineality space.
    """

    def __init__(self, generators, lineality, ambient_dim: int, constraints=None):
        self.ambient_dim = int(ambient_dim)
        self.generators = _as_rows(generators, self.ambient_dim)
        self.lineality = _as_rows(lineality, self.ambient_dim)
        self.generators.setflags(write=False)
        self.lineality.setflags(write=False)
        if constraints is not None:
            ineq, eq = constraints
            self.__dict__["constraints"] = (_as_rows(ineq, self.ambient_dim),
                                            _as_rows(eq, self.ambient_dim))

    @classmethod
    def from_generators(cls, generators, lineality=None, ambient_dim: int | None = None):
        if ambient_dim is None:
            for M in (generators, lineality):
                if M is not None and np.size(M):
                    ambient_dim = np.shape(np.atleast_2d(M))[1]
                    break
            else:
                raise ValueError("ambient_dim required for an empty generator set")
        k = ambient_dim
        G = _as_rows(generators, k)
        L = _as_rows(lineality, k)
        # polar in constraint form has rows G (<= 0) and L (= 0)
        pg, pl = _hull_from_constraints(G, L, k)
        gens, lin = _hull_from_constraints(pg, pl, k)
        return cls(gens, lin, k, constraints=(pg, pl))

    @classmethod
    def from_constraints(cls, ineq, eq=None, ambient_dim: int | None = None):
        if ambient_dim is None:
            for M in (ineq, eq):
                if M is not None and np.size(M):
                    ambient_dim = np.shape(np.atleast_2d(M))[1]
                    break
            else:
                raise ValueError("ambient_dim required for an empty constraint set")
        A = _unit_rows(_as_rows(ineq, ambient_dim))
        E = _unit_rows(_as_rows(eq, ambient_dim))
        gens, lin = _hull_from_constraints(A, E, ambient_dim)
        return cls(gens, lin, ambient_dim, constraints=(A, E))

    @classmethod
    def zero(cls, k: int):
        return cls(None, None, k, constraints=(np.zeros((0, k)), np.eye(k)))

    @classmethod
    def whole(cls, k: int):
        return cls(None, np.eye(k), k, constraints=(np.zeros((0, k)), np.zeros((0, k))))

    @classmethod
    def from_subspace(cls, L: Subspace):
        comp = _null(L.basis.T, L.ambient_dim) if L.dim else np.eye(L.ambient_dim)
        return cls(None, L.basis.T, L.ambient_dim, constraints=(np.zeros((0, L.ambient_dim)), comp.T))

    @cached_property
    def constraints(self):
        """(ineq, eq) rows with cone = {w : ineq w <= 0, eq w = 0}."""
        return _hull_from_constraints(self.generators, self.lineality, self.ambient_dim)

    @cached_property
    def dim(self) -> int:
        M = np.vstack([self.generators, self.lineality])
        if M.shape[0] == 0:
            return 0
        return int(np.linalg.matrix_rank(M, tol=1e-9))

    def span(self) -> Subspace:
        M = np.vstack([self.generators, self.lineality])
        return Subspace.from_vectors(M.T, self.ambient_dim)

    @property
    def is_zero(self) -> bool:
        return self.generators.shape[0] == 0 and self.lineality.shape[0] == 0

    def is_subspace(self) -> bool:
        return self.generators.shape[0] == 0

    def contains(self, v, tol: float = TAU_CONE) -> bool:
        v = np.asarray(v, dtype=float).ravel()
        return self.distance_to(v) <= tol * (1 + np.linalg.norm(v))

    def distance_to(self, v) -> float:
        """Euclidean distance from v to the cone (nonnegative least squares)."""
        from scipy.optimize import nnls

        v = np.asarray(v, dtype=float).ravel()
        L = self.lineality
        v_perp = v - L.T @ (L @ v) if L.shape[0] else v
        G = self.generators
        if G.shape[0] == 0:
            return float(np.linalg.norm(v_perp))
        Gp = G - (G @ L.T) @ L if L.shape[0] else G
        _, res = nnls(Gp.T, v_perp)
        return float(res)

    def satisfied_by(self, v, tol: float = TAU_CONE) -> bool:
        ineq, eq = self.constraints
        v = np.asarray(v, dtype=float)
        scale = tol * (1 + np.linalg.norm(v))
        return bool(np.all(ineq @ v <= scale) and np.all(np.abs(eq @ v) <= scale))

    def issubset(self, other: "ConvexCone", tol: float = TAU_CONE) -> bool:
        if other.ambient_dim != self.ambient_dim:
            raise ValueError("ambient dimensions differ")
        ineq, eq = other.constraints
        G, L = self.generators, self.lineality
        if G.shape[0]:
            if ineq.shape[0] and np.any(G @ ineq.T > tol):
                return False
            if eq.shape[0] and np.any(np.abs(G @ eq.T) > tol):
                return False
        if L.shape[0]:
            if ineq.shape[0] and np.any(np.abs(L @ ineq.T) > tol):
                return False
            if eq.shape[0] and np.any(np.abs(L @ eq.T) > tol):
                return False
        return True

    def equals(self, other: "ConvexCone", tol: float = TAU_CONE) -> bool:
        return self.issubset(other, tol) and other.issubset(self, tol)

    def polar(self) -> "ConvexCone":
        return ConvexCone.from_constraints(self.generators, self.lineality, self.ambient_dim)

    def intersect(self, other: "ConvexCone") -> "ConvexCone":
        a1, e1 = self.constraints
        a2, e2 = other.constraints
        return ConvexCone.from_constraints(np.vstack([a1, a2]), np.vstack([e1, e2]), self.ambient_dim)

    def add(self, other: "ConvexCone") -> "ConvexCone":
        """Minkowski sum."""
        return ConvexCone.from_generators(
            np.vstack([self.generators, other.generators]),
            np.vstack([self.lineality, other.lineality]),
            self.ambient_dim,
        )

    def __neg__(self) -> "ConvexCone":
        ineq, eq = self.constraints
        return ConvexCone(-self.generators, self.lineality, self.ambient_dim, constraints=(-ineq, eq))

    def image(self, M) -> "ConvexCone":
        M = np.asarray(M, dtype=float)
        return ConvexCone.from_generators(self.generators @ M.T, self.lineality @ M.T, M.shape[0])

    def with_equalities(self, rows) -> "ConvexCone":
        ineq, eq = self.constraints
        rows = _as_rows(rows, self.ambient_dim)
        return ConvexCone.from_constraints(ineq, np.vstack([eq, rows]), self.ambient_dim)

    def with_inequalities(self, rows) -> "ConvexCone":
        ineq, eq = self.constraints
        rows = _as_rows(rows, self.ambient_dim)
        return ConvexCone.from_constraints(np.vstack([ineq, rows]), eq, self.ambient_dim)

    def interior_direction(self) -> np.ndarray:
        """A point of the relative interior (sum of the extreme rays)."""
        if self.generators.shape[0] == 0:
            return np.zeros(self.ambient_dim)
        return self.generators.sum(axis=0)

    def spanning_vectors(self) -> np.ndarray:
        """Rows whose conic combinations give the cone (lineality listed with both signs)."""
        return np.vstack([self.generators, self.lineality, -self.lineality])

    def to_json(self) -> dict:
        return {"gens": np.round(self.generators, 12).tolist(),
                "lin": np.round(self.lineality, 12).tolist()}

    def __repr__(self):
        return (f"ConvexCone(dim={self.dim}, gens={self.generators.shape[0]}, "
                f"lineality={self.lineality.shape[0]}, ambient_dim={self.ambient_dim})")


def covers(K: ConvexCone, pieces, tol: float = TAU_CONE) -> bool:
    """Decide K ⊆ union(pieces) exactly.

    If K is not inside the first piece P, every point of K outside P lies in
    one of the closed regions K ∩ {a w >= 0} for a constraint row a of P.
    Each such region that meets the open side must be covered by the
    remaining pieces.
    """
    if K.is_zero:
        return True
    pieces = [P for P in pieces if P.ambient_dim == K.ambient_dim]
    if any(K.issubset(P, tol) for P in pieces):
        return True
    dK = K.dim
    useful = []
    for P in pieces:
        if K.intersect(P).dim == dK:
            useful.append(P)
    if not useful:
        return False
    P, rest = useful[0], useful[1:]
    ineq, eq = P.constraints
    halfspaces = [a for a in ineq] + [e for e in eq] + [-e for e in eq]
    spanning = K.spanning_vectors()
    for a in halfspaces:
        if not np.any(spanning @ a > tol):
            continue
        region = K.with_inequalities(-a)
        if not covers(region, rest, tol):
            return False
    return True


class ConeUnion:
    """Finite union of closed convex cones sharing an ambient dimension."""

    def __init__(self, pieces, ambient_dim: int | None = None):
        pieces = list(pieces)
        if ambient_dim is None:
            if not pieces:
                raise ValueError("ambient_dim required for an empty union")
            ambient_dim = pieces[0].ambient_dim
        if any(P.ambient_dim != ambient_dim for P in pieces):
            raise ValueError("pieces have different ambient dimensions")
        if not pieces:
            pieces = [ConvexCone.zero(ambient_dim)]
        self.pieces = pieces
        self.ambient_dim = ambient_dim

    @classmethod
    def single(cls, cone: ConvexCone) -> "ConeUnion":
        return cls([cone])

    @classmethod
    def from_subspace(cls, L: Subspace) -> "ConeUnion":
        return cls([ConvexCone.from_subspace(L)])

    def pruned(self, tol: float = TAU_CONE) -> "ConeUnion":
        """Drop pieces contained in another piece (keeps the first of equal pieces)."""
        keep: list[ConvexCone] = []
        for P in self.pieces:
            if any(P.issubset(Q, tol) for Q in keep):
                continue
            keep = [Q for Q in keep if not Q.issubset(P, tol)]
            keep.append(P)
        return ConeUnion(keep, self.ambient_dim)

    def contains(self, v, tol: float = TAU_CONE) -> bool:
        return any(P.contains(v, tol) for P in self.pieces)

    def distance_to(self, v) -> float:
        return min(P.distance_to(v) for P in self.pieces)

    def span(self) -> Subspace:
        rows = [np.vstack([P.generators, P.lineality]) for P in self.pieces]
        M = np.vstack(rows) if rows else np.zeros((0, self.ambient_dim))
        return Subspace.from_vectors(M.T, self.ambient_dim)

    @property
    def dim(self) -> int:
        return max(P.dim for P in self.pieces)

    def polar(self) -> ConvexCone:
        G = np.vstack([P.generators for P in self.pieces])
        L = np.vstack([P.lineality for P in self.pieces])
        return ConvexCone.from_constraints(G, L, self.ambient_dim)

    def is_subspace(self, tol: float = TAU_CONE) -> Subspace | None:
        V = self.span()
        if covers(ConvexCone.from_subspace(V), self.pieces, tol):
            return V
        return None

    def covers(self, K: ConvexCone, tol: float = TAU_CONE) -> bool:
        return covers(K, self.pieces, tol)

    def issubset(self, other: "ConeUnion", tol: float = TAU_CONE) -> bool:
        return all(covers(P, other.pieces, tol) for P in self.pieces)

    def equals(self, other: "ConeUnion", tol: float = TAU_CONE) -> bool:
        return self.issubset(other, tol) and other.issubset(self, tol)

    def image(self, M) -> "ConeUnion":
        M = np.asarray(M, dtype=float)
        return ConeUnion([P.image(M) for P in self.pieces], M.shape[0])

    def __neg__(self) -> "ConeUnion":
        return ConeUnion([-P for P in self.pieces], self.ambient_dim)

    def union(self, other: "ConeUnion") -> "ConeUnion":
        return ConeUnion(self.pieces + other.pieces, self.ambient_dim)

    def hull(self) -> ConvexCone:
        return ConvexCone.from_generators(
            np.vstack([P.generators for P in self.pieces]),
            np.vstack([P.lineality for P in self.pieces]),
            self.ambient_dim,
        )

    def as_convex(self, tol: float = TAU_CONE) -> ConvexCone | None:
        """The union as a single convex cone, if it is convex."""
        H = self.hull()
        return H if covers(H, self.pieces, tol) else None

    def slice_zero(self, coords) -> list[ConvexCone]:
        """Pieces intersected with {w_i = 0 : i in coords}."""
        rows = np.eye(self.ambient_dim)[list(coords)]
        return [P.with_equalities(rows) for P in self.pieces]

    def to_json(self) -> list:
        return [P.to_json() for P in self.pieces]

    def __repr__(self):
        return f"ConeUnion(pieces={len(self.pieces)}, ambient_dim={self.ambient_dim})"


def intersect_unions(unions, tol: float = TAU_CONE) -> ConeUnion:
    """Intersection of finitely many cone unions, as a pruned union."""
    unions = list(unions)
    current = unions[0].pruned(tol)
    for U in unions[1:]:
        pieces = []
        for P in current.pieces:
            for Q in U.pieces:
                pieces.append(P.intersect(Q))
        current = ConeUnion(pieces, current.ambient_dim).pruned(tol)
    return current


def member(C, v, tol: float = TAU_CONE) -> bool:
    return C.contains(v, tol)


def polar(C) -> ConvexCone:
    return C.polar()


def is_subspace(C, tol: float = TAU_CONE) -> Subspace | None:
    if isinstance(C, ConvexCone):
        C = ConeUnion.single(C)
    return C.is_subspace(tol)


def cone_faces(K: ConvexCone, limit: int = 4096) -> list[ConvexCone]:
    """All nonempty faces of K, from K itself down to its lineality space."""
    ineq, eq = K.constraints
    ineq = _dedupe_directions(_unit_rows(ineq))

    def tight(F):
        S = F.spanning_vectors()
        if S.shape[0] == 0:
            return frozenset(range(ineq.shape[0]))
        return frozenset(i for i in range(ineq.shape[0]) if np.all(np.abs(S @ ineq[i]) <= TAU_CONE))

    faces = {tight(K): K}
    frontier = [K]
    while frontier:
        F = frontier.pop()
        t = tight(F)
        for i in range(ineq.shape[0]):
            if i in t:
                continue
            G = F.with_equalities(ineq[i])
            key = tight(G)
            if key not in faces:
                faces[key] = G
                frontier.append(G)
                if len(faces) > limit:
                    raise RuntimeError("face enumeration limit exceeded")
    return sorted(faces.values(), key=lambda F: (-F.dim, F.generators.shape[0]))


class ConvexPolyhedron:
    """{z : ineq z <= ineq_rhs, eq z = eq_rhs} in R^k."""

    def __init__(self, ambient_dim: int, ineq=None, ineq_rhs=None, eq=None, eq_rhs=None):
        k = self.ambient_dim = int(ambient_dim)
        self.ineq = _as_rows(ineq, k)
        self.eq = _as_rows(eq, k)
        self.ineq_rhs = np.zeros(self.ineq.shape[0]) if ineq_rhs is None else np.asarray(ineq_rhs, float).ravel()
        self.eq_rhs = np.zeros(self.eq.shape[0]) if eq_rhs is None else np.asarray(eq_rhs, float).ravel()
        if self.ineq_rhs.shape[0] != self.ineq.shape[0] or self.eq_rhs.shape[0] != self.eq.shape[0]:
            raise ValueError("right-hand sides do not match the constraint rows")

    @classmethod
    def whole(cls, k: int):
        return cls(k)

    def violation(self, z) -> float:
        z = np.asarray(z, dtype=float)
        v = 0.0
        if self.ineq.shape[0]:
            v = max(v, float(np.max(self.ineq @ z - self.ineq_rhs)))
        if self.eq.shape[0]:
            v = max(v, float(np.max(np.abs(self.eq @ z - self.eq_rhs))))
        return v

    def contains(self, z, tol: float = TAU_CONE) -> bool:
        return self.violation(z) <= tol * (1 + np.linalg.norm(z))

    def active(self, z, tol: float = TAU_CONE) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        if not self.ineq.shape[0]:
            return np.zeros(0, dtype=int)
        slack = self.ineq_rhs - self.ineq @ z
        return np.flatnonzero(np.abs(slack) <= tol * (1 + np.linalg.norm(z)))

    def inactive_margin(self, z) -> float:
        """Distance from z to the nearest inactive inequality hyperplane."""
        z = np.asarray(z, dtype=float)
        act = set(self.active(z).tolist())
        margin = np.inf
        for i in range(self.ineq.shape[0]):
            if i in act:
                continue
            nrm = np.linalg.norm(self.ineq[i])
            if nrm > 0:
                margin = min(margin, (self.ineq_rhs[i] - self.ineq[i] @ z) / nrm)
        return float(margin)

    def image(self, M, offset=None) -> "ConvexPolyhedron":
        """{M z + offset : z in P} for invertible M."""
        M = np.asarray(M, dtype=float)
        c = np.zeros(M.shape[0]) if offset is None else np.asarray(offset, float)
        Minv = np.linalg.inv(M)
        A = self.ineq @ Minv
        E = self.eq @ Minv
        return ConvexPolyhedron(M.shape[0], A, self.ineq_rhs + A @ c, E, self.eq_rhs + E @ c)

    def __repr__(self):
        return f"ConvexPolyhedron(ambient_dim={self.ambient_dim}, ineq={self.ineq.shape[0]}, eq={self.eq.shape[0]})"


def tangent_cone_convex(P: ConvexPolyhedron, z, tol: float = TAU_CONE) -> ConvexCone:
    """Cone of feasible directions of P at z (active rows only)."""
    if not P.contains(z, tol):
        raise ValueError("point does not belong to the polyhedron")
    act = P.active(z, tol)
    return ConvexCone.from_constraints(P.ineq[act], P.eq, P.ambient_dim)


def piece_faces_through(P: ConvexPolyhedron, z, radius: float, tol: float = TAU_CONE):
    """Faces of P containing z, each as (relative-interior point, tangent cone there)."""
    z = np.asarray(z, dtype=float)
    K = tangent_cone_convex(P, z, tol)
    reach = min(radius, 0.5 * P.inactive_margin(z))
    out = []
    for F in cone_faces(K):
        d = F.interior_direction()
        nd = np.linalg.norm(d)
        point = z + (0.5 * reach / nd) * d if nd > 0 else z.copy()
        T = ConvexCone.from_generators(K.generators, np.vstack([K.lineality, F.generators]), P.ambient_dim)
        out.append((point, T))
    return out


def closest_point(P: ConvexPolyhedron, target, extra_eq=None, extra_rhs=None, tol: float = 1e-7):
    """Point of P ∩ {extra_eq z = extra_rhs} closest to target in the l1 sense.

    Solved as a linear program, then polished by projecting onto the active
    constraint set so the result satisfies the active rows to round-off.
    Returns None when the set is empty.
    """
    from scipy.optimize import linprog

    k = P.ambient_dim
    t = np.asarray(target, dtype=float)
    E = np.vstack([P.eq, _as_rows(extra_eq, k)])
    f = np.concatenate([P.eq_rhs, np.zeros(0) if extra_rhs is None else np.asarray(extra_rhs, float).ravel()])
    # variables (z, s) with |z - t| <= s
    c = np.concatenate([np.zeros(k), np.ones(k)])
    I = np.eye(k)
    A_ub = [np.hstack([P.ineq, np.zeros((P.ineq.shape[0], k))]),
            np.hstack([I, -I]), np.hstack([-I, -I])]
    b_ub = [P.ineq_rhs, t, -t]
    res = linprog(c, A_ub=np.vstack(A_ub), b_ub=np.concatenate(b_ub),
                  A_eq=np.hstack([E, np.zeros((E.shape[0], k))]) if E.shape[0] else None,
                  b_eq=f if E.shape[0] else None,
                  bounds=[(None, None)] * (2 * k), method="highs")
    if res.status != 0:
        return None
    z = res.x[:k]
    act = np.flatnonzero(np.abs(P.ineq @ z - P.ineq_rhs) <= tol * (1 + np.abs(P.ineq_rhs))) if P.ineq.shape[0] else []
    R = np.vstack([E, P.ineq[act]]) if len(act) else E
    r = np.concatenate([f, P.ineq_rhs[act]]) if len(act) else f
    if R.shape[0]:
        dz, *_ = np.linalg.lstsq(R, r - R @ z, rcond=None)
        z = z + dz
    return z


def distance_inf(P: ConvexPolyhedron, target) -> float:
    """Max-norm distance from target to P (inf if P is empty)."""
    from scipy.optimize import linprog

    k = P.ambient_dim
    t = np.asarray(target, dtype=float)
    c = np.zeros(k + 1)
    c[-1] = 1.0
    one = np.ones((k, 1))
    A_ub = np.vstack([np.hstack([P.ineq, np.zeros((P.ineq.shape[0], 1))]),
                      np.hstack([np.eye(k), -one]), np.hstack([-np.eye(k), -one])])
    b_ub = np.concatenate([P.ineq_rhs, t, -t])
    A_eq = np.hstack([P.eq, np.zeros((P.eq.shape[0], 1))]) if P.eq.shape[0] else None
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=P.eq_rhs if P.eq.shape[0] else None,
                  bounds=[(None, None)] * (k + 1), method="highs")
    if res.status != 0:
        return float("inf")
    return float(res.x[-1])
