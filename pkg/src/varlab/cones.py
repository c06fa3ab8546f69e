"""Tangent and normal cones of graphs at a reference pair.

For polyhedral graphs everything is read off the local cones K_i (tangent
cones of the pieces through the point): near the point the graph coincides
with the point plus their union.  Nearby points are grouped into strata by
the hyperplane arrangement of all constraint rows of the K_i; the tangent
cone is constant on each stratum, which turns every limit construction into
a finite union or intersection.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .maps import (
    Charted,
    GraphPoint,
    PLSingle,
    PolyUnion,
    ProxSubgrad,
    SetValuedMap,
    Smooth,
    SmoothUnion,
    SumGE,
    as_rng,
)
from .polyhedral import TAU_CONE, ConeUnion, ConvexCone, cone_faces, intersect_unions
from .subspace import Subspace, dedupe_subspaces, from_range, orthogonal_complement

__all__ = [
    "ConeBundle",
    "cones_at",
    "polyhedral_bundle",
    "smooth_bundle",
    "estimate_paratingent",
    "estimate_clarke_tangent",
    "angular_gap",
    "cluster_directions",
]


@dataclass(frozen=True, eq=False)
class ConeBundle:
    """The five cones at a point, plus the tangent spaces of nearby smooth strata.

    ``tangent_subspaces`` lists (without repetition) every subspace that is the
    tangent cone at graph points arbitrarily close to the reference point,
    including the point itself when its tangent cone is a subspace.
    """

    tangent: ConeUnion
    clarke_tangent: ConvexCone
    paratingent: ConeUnion
    regular_normal: ConvexCone
    limiting_normal: ConeUnion
    tangent_subspaces: list = field(default_factory=list)
    exact: bool = True

    @property
    def ambient_dim(self) -> int:
        return self.tangent.ambient_dim

    def transformed(self, M) -> "ConeBundle":
        """Bundle of M·Ω: tangent-type cones by M, normal-type by M^{-T}."""
        M = np.asarray(M, dtype=float)
        Mt = np.linalg.inv(M).T
        return ConeBundle(
            self.tangent.image(M),
            self.clarke_tangent.image(M),
            self.paratingent.image(M),
            self.regular_normal.image(Mt),
            self.limiting_normal.image(Mt),
            [L.image(M) for L in self.tangent_subspaces],
            self.exact,
        )

    def to_json(self) -> dict:
        return {
            "tangent": self.tangent.to_json(),
            "clarke_tangent": self.clarke_tangent.to_json(),
            "paratingent": self.paratingent.to_json(),
            "regular_normal": self.regular_normal.to_json(),
            "limiting_normal": self.limiting_normal.to_json(),
            "tangent_subspace_dims": [L.dim for L in self.tangent_subspaces],
        }


# ------------------------------------------------------------------ strata


def _hyperplanes(cones):
    """Unit normals of all constraint rows, deduplicated up to sign.

    Returns the list of normals and, per cone, a list of (hyperplane index,
    sign, is_equality) for its rows.
    """
    H: list[np.ndarray] = []
    rowmaps = []
    for K in cones:
        ineq, eq = K.constraints
        rm = []
        for rows, is_eq in ((ineq, False), (eq, True)):
            for r in rows:
                nr = np.linalg.norm(r)
                if nr < 1e-12:
                    continue
                u = r / nr
                for j, h in enumerate(H):
                    if np.linalg.norm(u - h) <= 1e-9:
                        rm.append((j, 1.0, is_eq))
                        break
                    if np.linalg.norm(u + h) <= 1e-9:
                        rm.append((j, -1.0, is_eq))
                        break
                else:
                    H.append(u)
                    rm.append((len(H) - 1, 1.0, is_eq))
        rowmaps.append(rm)
    return H, rowmaps


def _sign_on(C: ConvexCone, h: np.ndarray, tol: float = TAU_CONE):
    S = C.spanning_vectors()
    if S.shape[0] == 0:
        return 0
    v = S @ h
    if np.all(np.abs(v) <= tol):
        return 0
    if np.all(v <= tol):
        return -1
    if np.all(v >= -tol):
        return 1
    return None


def strata(cones: list[ConvexCone]):
    """Relatively open cells of the arrangement restricted to the union.

    Returns a list of (sign vector, closed cell cone, tangent cone of the union
    on the cell as a ConeUnion).
    """
    k = cones[0].ambient_dim
    H, rowmaps = _hyperplanes(cones)
    cells: dict[tuple, ConvexCone] = {}
    for K in cones:
        pending = [(F, ()) for F in cone_faces(K)]
        for j, h in enumerate(H):
            nxt = []
            for C, sig in pending:
                s = _sign_on(C, h)
                if s is not None:
                    nxt.append((C, sig + (s,)))
                else:
                    nxt.append((C.with_inequalities(h), sig + (-1,)))
                    nxt.append((C.with_equalities(h), sig + (0,)))
                    nxt.append((C.with_inequalities(-h), sig + (1,)))
            pending = nxt
        # only full sign vectors identify a cell; recompute them on the final pieces
        for C, _ in pending:
            sig = tuple(_sign_on(C, h) for h in H)
            if None not in sig:
                cells.setdefault(sig, C)
    out = []
    for sig, C in sorted(cells.items()):
        pieces = []
        for K, rm in zip(cones, rowmaps):
            ineq, eq = K.constraints
            inside = True
            active = []
            ri = 0
            for (j, sgn, is_eq) in rm:
                s = sgn * sig[j]
                if is_eq:
                    if s != 0:
                        inside = False
                else:
                    if s > 0:
                        inside = False
                    elif s == 0:
                        active.append(ri)
                    ri += 1
            if inside:
                pieces.append(ConvexCone.from_constraints(_nonzero(ineq)[active], eq, k))
        out.append((sig, C, ConeUnion(pieces, k)))
    return out


def _nonzero(rows):
    return rows[np.linalg.norm(rows, axis=1) >= 1e-12] if rows.shape[0] else rows


def polyhedral_bundle(cones: list[ConvexCone]) -> ConeBundle:
    """Exact bundle at the apex of the union of the given convex cones."""
    k = cones[0].ambient_dim
    T = ConeUnion(cones, k).pruned()
    P = ConeUnion([Ki.add(-Kj) for Ki in cones for Kj in cones], k).pruned()
    cells = strata(cones)
    tangents = [Tc for _, _, Tc in cells]
    clarke = intersect_unions(tangents).hull()
    Nhat = T.polar()
    N = ConeUnion([Tc.polar() for Tc in tangents], k).pruned()
    subs = []
    for Tc in tangents:
        V = Tc.is_subspace()
        if V is not None:
            subs.append(V)
    return ConeBundle(T, clarke, P, Nhat, N, dedupe_subspaces(subs))


def smooth_bundle(J: np.ndarray) -> ConeBundle:
    """Bundle of the graph of a map with Jacobian J (m x n) at a point."""
    m, n = J.shape
    L = from_range(np.eye(n), J)
    C = ConvexCone.from_subspace(L)
    Ncone = ConvexCone.from_subspace(orthogonal_complement(L))
    return ConeBundle(ConeUnion.single(C), C, ConeUnion.single(C), Ncone, ConeUnion.single(Ncone), [L])


def bundle_from_subspaces(T: Subspace, clarke: Subspace, para: Subspace, normal: Subspace) -> ConeBundle:
    """Bundle assembled from subspaces (used by fixtures that supply cones analytically)."""
    c = ConvexCone.from_subspace
    return ConeBundle(ConeUnion.single(c(T)), c(clarke), ConeUnion.single(c(para)), c(normal),
                      ConeUnion.single(c(normal)), [T], exact=False)


_CACHE: dict = {}


def cones_at(F: SetValuedMap, p: GraphPoint) -> ConeBundle:
    """Exact cone bundle of gph F at p."""
    if not F.contains(p):
        raise ValueError("reference pair is not on the graph")
    if isinstance(F, PolyUnion):
        key = (id(F), F.signature(p.z))
        if key not in _CACHE:
            _CACHE[key] = (F, polyhedral_bundle(F.local_cones(p.z)))
        return _CACHE[key][1]
    if isinstance(F, PLSingle):
        return cones_at(F.polyhedral(), p)
    if isinstance(F, Smooth):
        return smooth_bundle(F.jacobian(p.x))
    if isinstance(F, SmoothUnion):
        for z, B in F.point_bundles:
            if np.linalg.norm(np.asarray(z, float) - p.z) <= 1e-12:
                return B
        branches = F.active_branches(p)
        if len(branches) == 1:
            return smooth_bundle(F.branches[branches[0]].jacobian(p.x))
        raise ValueError("tangential branch intersection: cones must be supplied by the fixture")
    if isinstance(F, Charted):
        w = GraphPoint.from_vector(F.phi(p.z), F.inner.dims)
        return cones_at(F.inner, w).transformed(F.inverse)
    if isinstance(F, SumGE):
        n, m = F.dims.n, F.dims.m
        T = np.block([[np.eye(n), np.zeros((n, m))], [F.g.jacobian(p.x), np.eye(m)]])
        return cones_at(F.G, F.to_inner(p)).transformed(T)
    if isinstance(F, ProxSubgrad):
        inner = F.inner
        if inner is None:
            raise ValueError("exact cones need a polyhedral subgradient graph")
        M = F.chart_matrix
        w = GraphPoint.from_vector(M @ p.z, inner.dims)
        return cones_at(inner, w).transformed(np.linalg.inv(M))
    raise TypeError(f"unsupported map variant {type(F).__name__}")


# -------------------------------------------------------------- estimators


def _unit(V: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(V, axis=1)
    keep = n > 0
    return V[keep] / n[keep, None]


def estimate_paratingent(F: SetValuedMap, p: GraphPoint, r0: float = 1e-2, shells: int = 8,
                         per_shell: int = 64, seed=0, anchors: int = 8, local_levels: int = 10,
                         per_local: int = 6) -> np.ndarray:
    """Unit secant directions between sampled graph points at radii r0 2^-k.

    Each shell pairs all of its samples.  In addition, the first ``anchors``
    samples of a shell are paired with graph points drawn around them at
    radii r 4^-j, j = 1..local_levels; these short secants between nearby
    base points are what reach directions where sheets of the graph touch.
    Each secant is reported with both signs.  Rows are ordered by shell and
    then by sample, so the output is reproducible for a fixed seed.
    """
    rng = as_rng(seed)
    out = []
    for k in range(shells + 1):
        r = r0 * 2.0 ** (-k)
        sample = F.sample_near(p, r, per_shell, rng)
        pts = np.array([q.z for q in sample] + [p.z])
        i, j = np.triu_indices(len(pts), 1)
        D = [pts[j] - pts[i]]
        for q in sample[:anchors]:
            for lvl in range(1, local_levels + 1):
                near = F.sample_near(q, r * 4.0 ** (-lvl), per_local, rng)
                if near:
                    D.append(np.array([w.z for w in near]) - q.z)
        D = _unit(np.vstack(D))
        out.append(D)
        out.append(-D)
    return np.vstack(out) if out else np.zeros((0, F.dims.total))


def cluster_directions(D: np.ndarray, merge_deg: float = 1.0) -> np.ndarray:
    """Greedy angular clustering; returns one unit representative per cluster."""
    c = np.cos(np.deg2rad(merge_deg))
    reps: list[np.ndarray] = []
    for d in D:
        if not any(float(d @ r) >= c for r in reps):
            reps.append(d)
    return np.array(reps) if reps else np.zeros((0, D.shape[1] if D.ndim == 2 else 0))


def angular_gap(D: np.ndarray) -> float:
    """Largest gap (degrees) between consecutive planar directions on the circle."""
    if D.shape[0] == 0:
        return 360.0
    a = np.sort(np.mod(np.degrees(np.arctan2(D[:, 1], D[:, 0])), 360.0))
    gaps = np.diff(np.concatenate([a, [a[0] + 360.0]]))
    return float(gaps.max())


def estimate_clarke_tangent(F: SetValuedMap, p: GraphPoint, r0: float = 1e-2, bases: int = 24,
                            local: int = 96, angle_deg: float = 5.0, seed=0) -> ConvexCone:
    """Directions seen from every sampled base point near p, as a convex cone.

    Candidate directions are the paratingent estimates.  A candidate survives
    if every base point (sampled at distance <= r0) has a graph point within a
    much smaller ball whose secant direction is within ``angle_deg``.  Nearly
    antipodal surviving pairs are merged into lineality directions.
    """
    rng = as_rng(seed)
    cand = cluster_directions(estimate_paratingent(F, p, r0, 4, 32, rng), 1.0)
    base_pts = [p] + F.sample_near(p, r0, bases, rng)
    cos_tol = np.cos(np.deg2rad(angle_deg))
    alive = np.ones(cand.shape[0], dtype=bool)
    for b in base_pts:
        rho = 0.05 * r0
        pts = np.array([q.z for q in F.sample_near(b, rho, local, rng)])
        if pts.size == 0:
            continue
        D = _unit(pts - b.z)
        if D.shape[0] == 0:
            alive[:] = False
            break
        alive &= (cand @ D.T).max(axis=1) >= cos_tol
    surv = cand[alive]
    k = F.dims.total
    gens, lins = [], []
    used = np.zeros(surv.shape[0], dtype=bool)
    for i, d in enumerate(surv):
        if used[i]:
            continue
        opp = np.flatnonzero((surv @ d <= -np.cos(np.deg2rad(2 * angle_deg))) & ~used)
        if opp.size:
            used[opp] = True
            lins.append(d - surv[opp[0]])
        else:
            gens.append(d)
        used[i] = True
    if not gens and not lins:
        return ConvexCone.zero(k)
    L = Subspace.from_vectors(np.array(lins).T, k) if lins else Subspace.zero(k)
    Lb = L.basis.T
    G = np.array(gens) if gens else np.zeros((0, k))
    if G.shape[0] and Lb.shape[0]:
        G = G - (G @ Lb.T) @ Lb
    keep = [g for g in G if np.linalg.norm(g) > 0.05]
    return ConvexCone.from_generators(np.array(keep) if keep else None, Lb if Lb.shape[0] else None, k)
