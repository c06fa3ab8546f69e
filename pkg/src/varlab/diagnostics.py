"""Batteries of independently computed criteria for smoothness-type properties.

Each battery evaluates several characterizations that are known to be
equivalent (under a Lipschitz-chart hypothesis where noted) and reports
whether they agree.  Criteria that cannot be evaluated for a given map are
marked not applicable and left out of the consensus.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cones import cones_at
from .derivatives import b_jacobian_sampled, bundle_to_derivatives
from .maps import (
    GLChart,
    GraphPoint,
    PLSingle,
    PolyUnion,
    SetValuedMap,
    Smooth,
    SmoothUnion,
    as_rng,
    graphical_lipschitz_chart,
)
from .polyhedral import ConeUnion, ConvexCone, closest_point
from .subspace import Subspace, adjoint, is_equal, orthogonal_complement

__all__ = [
    "Criterion",
    "DiagnosticVerdict",
    "check_strictly_smooth",
    "check_strict_proto",
    "check_strict_diff_single",
    "check_frechet",
    "check_semismooth_star",
    "extract_chart",
    "ChartExtraction",
    "ae_strict_proto_survey",
    "chart_jacobians",
    "graph_residual",
    "SEMISMOOTH_THRESHOLD",
]

SEMISMOOTH_THRESHOLD = 0.05


@dataclass(frozen=True)
class Criterion:
    label: str
    applicable: bool
    value: bool | None
    evidence: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"label": self.label, "applicable": self.applicable, "value": self.value,
                "evidence": self.evidence}


@dataclass
class DiagnosticVerdict:
    """Criteria of one battery, their consensus and computed dimensions.

    ``consensus`` is True or False when all applicable criteria agree, the
    string "inconsistent" when two of them disagree and None when none
    applies.  ``identities`` records the dimension and family identities that
    must hold whenever the consensus is True.
    """

    battery: str
    criteria: list
    consensus: object
    dims: dict = field(default_factory=dict)
    identities: dict = field(default_factory=dict)
    info: list = field(default_factory=list)

    def criterion(self, label: str) -> Criterion:
        for c in self.criteria + self.info:
            if c.label == label:
                return c
        raise KeyError(label)

    @property
    def identities_hold(self) -> bool:
        return all(self.identities.values())

    def to_json(self) -> dict:
        return {
            "battery": self.battery,
            "consensus": self.consensus,
            "criteria": [c.to_json() for c in sorted(self.criteria, key=lambda c: c.label)],
            "info": [c.to_json() for c in sorted(self.info, key=lambda c: c.label)],
            "dims": self.dims,
            "identities": self.identities,
        }


def consensus_of(criteria) -> object:
    vals = {c.value for c in criteria if c.applicable}
    if not vals:
        return None
    if len(vals) > 1:
        return "inconsistent"
    return vals.pop()


def _safe_chart(F, p) -> GLChart | None:
    try:
        return graphical_lipschitz_chart(F, p)
    except (ValueError, TypeError):
        return None


def _union_dim(U: ConeUnion) -> int:
    return max(P.dim for P in U.pieces)


def _clarke_equals(C: ConvexCone, V: Subspace | None) -> bool:
    return V is not None and C.equals(ConvexCone.from_subspace(V))


def chart_jacobians(T: ConeUnion, chart: GLChart, tol: float = 1e-9) -> list[np.ndarray]:
    """Jacobians of the chart map f on the pieces of the tangent cone.

    A piece whose chart shadow is d-dimensional is (part of) the graph of a
    linear map W_rest W_first^{-1}; these matrices form the B-Jacobian of f.
    """
    d = chart.d
    mats: list[np.ndarray] = []
    for P in T.pieces:
        W = P.span().basis
        first, rest = chart.split(W)
        if W.shape[1] != d or d == 0:
            if d == 0 and not mats:
                mats.append(np.zeros((T.ambient_dim, 0)))
            continue
        s = np.linalg.svd(first, compute_uv=False)
        if s.min() <= 1e-8 * max(1.0, s.max()):
            continue
        A = rest @ np.linalg.inv(first)
        if not any(np.abs(A - B).max() <= tol * (1 + np.abs(B).max()) for B in mats):
            mats.append(A)
    return mats


# --------------------------------------------------------- strict smoothness


def _smoothness_criteria(B, chart):
    k = B.ambient_dim
    Vp = B.paratingent.is_subspace()
    Vn = B.limiting_normal.is_subspace()
    has_chart = chart is not None
    d = chart.d if has_chart else None
    crit = [
        Criterion("clarke_equals_paratingent", True, _clarke_equals(B.clarke_tangent, Vp),
                  {"paratingent_subspace_dim": None if Vp is None else Vp.dim,
                   "clarke_dim": B.clarke_tangent.dim}),
        Criterion("polarity_of_subspaces", True,
                  bool(Vp is not None and Vn is not None and is_equal(orthogonal_complement(Vp), Vn)),
                  {"paratingent_dim": None if Vp is None else Vp.dim,
                   "normal_dim": None if Vn is None else Vn.dim}),
        Criterion("clarke_subspace_of_chart_dim", has_chart,
                  bool(has_chart and B.clarke_tangent.is_subspace() and B.clarke_tangent.dim == d) if has_chart else None,
                  {"clarke_dim": B.clarke_tangent.dim, "chart_dim": d}),
        Criterion("paratingent_subspace", has_chart, (Vp is not None) if has_chart else None,
                  {"dim": None if Vp is None else Vp.dim}),
        Criterion("normal_subspace", has_chart, (Vn is not None) if has_chart else None,
                  {"dim": None if Vn is None else Vn.dim}),
        Criterion("normally_regular", has_chart,
                  ConeUnion.single(B.regular_normal).equals(B.limiting_normal) if has_chart else None,
                  {"regular_normal_dim": B.regular_normal.dim}),
    ]
    dims = {"chart_dim": d, "ambient": k, "clarke": B.clarke_tangent.dim,
            "paratingent": _union_dim(B.paratingent), "normal": _union_dim(B.limiting_normal)}
    return crit, dims, Vp, Vn


def check_strictly_smooth(F: SetValuedMap, p: GraphPoint, chart: GLChart | None = None) -> DiagnosticVerdict:
    """Strict smoothness of the graph of F at p."""
    B = cones_at(F, p)
    chart = _safe_chart(F, p) if chart is None else chart
    crit, dims, Vp, Vn = _smoothness_criteria(B, chart)
    v = DiagnosticVerdict("strictly_smooth", crit, consensus_of(crit), dims)
    if v.consensus is True and chart is not None:
        k = B.ambient_dim
        v.identities = {"dim_paratingent_eq_d": Vp.dim == chart.d,
                        "dim_normal_eq_k_minus_d": Vn.dim == k - chart.d}
    return v


def check_strict_proto(F: SetValuedMap, p: GraphPoint, chart: GLChart | None = None) -> DiagnosticVerdict:
    """Strict proto-differentiability of F at p, cross-checked eight ways."""
    B = cones_at(F, p)
    D = bundle_to_derivatives(F.dims, B)
    dims = F.dims
    chart = _safe_chart(F, p) if chart is None else chart
    gl = chart is not None
    d = chart.d if gl else None
    Vp = B.paratingent.is_subspace()
    Vs = D.strict.is_subspace()
    Vc = D.coderivative.is_subspace()
    jac = chart_jacobians(B.tangent, chart) if gl else []
    crit = [
        Criterion("i_strictly_smooth", True, _clarke_equals(B.clarke_tangent, Vp),
                  {"clarke_dim": B.clarke_tangent.dim}),
        Criterion("adjoint_relation", True,
                  bool(Vs is not None and Vc is not None and is_equal(adjoint(dims, Vs), Vc)),
                  {"strict_dim": None if Vs is None else Vs.dim, "coderivative_dim": None if Vc is None else Vc.dim}),
        Criterion("ii_graphically_strictly_differentiable", gl, (len(jac) == 1) if gl else None,
                  {"b_jacobian_size": len(jac)}),
        Criterion("iii_clarke_subspace_dim_d", gl,
                  bool(B.clarke_tangent.is_subspace() and B.clarke_tangent.dim == d) if gl else None,
                  {"clarke_dim": B.clarke_tangent.dim, "chart_dim": d}),
        Criterion("iv_strict_derivative_subspace", gl, (Vs is not None) if gl else None,
                  {"dim": None if Vs is None else Vs.dim}),
        Criterion("v_coderivative_subspace", gl, (Vc is not None) if gl else None,
                  {"dim": None if Vc is None else Vc.dim}),
        Criterion("vi_graphically_regular", gl,
                  ConeUnion.single(B.regular_normal).equals(B.limiting_normal) if gl else None, {}),
        Criterion("vii_generalized_sc_singleton", gl, (len(D.generalized_sc) == 1) if gl else None,
                  {"size": len(D.generalized_sc)}),
        Criterion("viii_generalized_sc_adjoint_singleton", gl,
                  (len(D.generalized_sc_adjoint) == 1) if gl else None,
                  {"size": len(D.generalized_sc_adjoint)}),
    ]
    info = [Criterion("tangent_equals_clarke", True,
                      ConeUnion.single(B.clarke_tangent).equals(B.tangent), {})]
    v = DiagnosticVerdict("strict_proto", crit, consensus_of(crit),
                          {"chart_dim": d, "n": dims.n, "m": dims.m,
                           "strict": _union_dim(D.strict), "coderivative": _union_dim(D.coderivative),
                           "clarke": B.clarke_tangent.dim, "graphical": _union_dim(D.graphical)},
                          info=info)
    if v.consensus is True and gl:
        Vg = D.graphical.is_subspace()
        v.identities = {
            "dim_strict_eq_d": Vs.dim == d,
            "dim_coderivative_eq_n_plus_m_minus_d": Vc.dim == dims.total - d,
            "generalized_sc_is_graphical": bool(Vg is not None and len(D.generalized_sc) == 1
                                                and is_equal(D.generalized_sc[0], Vg)),
        }
    return v


def check_strict_diff_single(F: SetValuedMap, x) -> DiagnosticVerdict:
    """Strict differentiability of a single-valued Lipschitz map at x."""
    if not isinstance(F, (PLSingle, Smooth)):
        raise TypeError("strict differentiability battery needs a single-valued variant")
    x = np.atleast_1d(np.asarray(x, float))
    p = GraphPoint(x, F.value(x))
    D = bundle_to_derivatives(F.dims, cones_at(F, p))
    BJ = b_jacobian_sampled(F, x)
    Vs = D.strict.is_subspace()
    Vc = D.coderivative.is_subspace()
    crit = [
        Criterion("iv_b_jacobian_singleton", True, len(BJ) == 1,
                  {"b_jacobian": [np.round(A, 12).tolist() for A in BJ]}),
        Criterion("v_generalized_sc_singleton", True, len(D.generalized_sc) == 1, {"size": len(D.generalized_sc)}),
        Criterion("vi_generalized_sc_adjoint_singleton", True, len(D.generalized_sc_adjoint) == 1,
                  {"size": len(D.generalized_sc_adjoint)}),
        Criterion("vii_strict_derivative_subspace", True, Vs is not None, {}),
        Criterion("viii_coderivative_subspace", True, Vc is not None, {}),
    ]
    v = DiagnosticVerdict("strict_diff_single", crit, consensus_of(crit),
                          {"n": F.dims.n, "m": F.dims.m})
    if v.consensus is True:
        v.identities = {"dim_strict_eq_n": Vs.dim == F.dims.n, "dim_coderivative_eq_m": Vc.dim == F.dims.m}
        v.dims["gradient"] = np.round(BJ[0], 12).tolist()
    return v


def check_frechet(F: SetValuedMap, x, r0: float = 1e-1, shells: int = 12, per_shell: int = 16,
                  seed=0) -> DiagnosticVerdict:
    """Fréchet differentiability of a single-valued map: calm and DF linear."""
    x = np.atleast_1d(np.asarray(x, float))
    rng = as_rng(seed)
    fx = F.value(x)
    maxima = []
    for k in range(shells + 1):
        r = r0 * 2.0 ** (-k)
        best = 0.0
        for _ in range(per_shell):
            dx = rng.standard_normal(x.size)
            dx *= r * rng.uniform(0.5, 1.0) / np.linalg.norm(dx)
            best = max(best, np.linalg.norm(F.value(x + dx) - fx) / np.linalg.norm(dx))
        maxima.append(best)
    head, tail = max(maxima[:4]), max(maxima[-4:])
    calm = bool(tail <= 2.0 * head + 1e-12)
    T = cones_at(F, GraphPoint(x, fx)).tangent
    V = T.is_subspace()
    crit = [Criterion("calm", True, calm, {"shell_maxima": [float(np.round(m, 12)) for m in maxima]}),
            Criterion("graphical_derivative_subspace", True, V is not None,
                      {"dim": None if V is None else V.dim})]
    value = calm and V is not None
    return DiagnosticVerdict("frechet", crit, value, {"dim": V.dim if V is not None else None})


# ---------------------------------------------------------------- semismooth*


def _normal_residual(F, z0, q):
    w = q.z - z0
    nw = np.linalg.norm(w)
    if nw == 0:
        return 0.0
    worst = 0.0
    for C in cones_at(F, q).limiting_normal.pieces:
        Cp = C.polar()
        worst = max(worst, Cp.distance_to(w), Cp.distance_to(-w))
    return worst / nw


def _jacobian_residual(F, x0, f0, x):
    dx = x - x0
    nx = np.linalg.norm(dx)
    if nx == 0:
        return 0.0
    mats = F.cell_jacobians(x) if isinstance(F, PLSingle) else [F.jacobian(x)]
    r = F.value(x) - f0
    return max(np.linalg.norm(r - C @ dx) for C in mats) / nx


def check_semismooth_star(F: SetValuedMap, p: GraphPoint, delta0: float = 0.1, shells: int = 8,
                          per_shell: int = 32, seed=0, threshold: float = SEMISMOOTH_THRESHOLD) -> DiagnosticVerdict:
    """Sampled semismooth* test on dyadic shells around p.

    Single-valued maps use the Jacobian residual over the B-Jacobian at the
    sample point; other maps use |<z*, z - p>| / (|z - p||z*|) over limiting
    normals z* at sampled graph points z.
    """
    rng = as_rng(seed)
    single = isinstance(F, (PLSingle, Smooth))
    f0 = F.value(p.x) if single else None
    per = []
    counts = []
    for k in range(shells + 1):
        r = delta0 * 2.0 ** (-k)
        pts = F.sample_near(p, r, per_shell, rng)
        counts.append(len(pts))
        if single:
            vals = [_jacobian_residual(F, p.x, f0, q.x) for q in pts]
        else:
            vals = [_normal_residual(F, p.z, q) for q in pts]
        per.append(max(vals) if vals else 0.0)
    # the estimate on B_delta uses every sample of the smaller shells too
    eps = [max(per[k:]) for k in range(len(per))]
    ok = bool(eps[-1] < threshold and eps[-1] <= eps[0] + 1e-15)
    crit = [Criterion("shell_decay", True, ok,
                      {"eps_hat": [float(np.round(e, 12)) for e in eps], "threshold": threshold,
                       "mode": "jacobian_residual" if single else "normal_pairing"})]
    v = DiagnosticVerdict("semismooth_star", crit, ok, {"shells": shells + 1})
    if min(counts) < 32:
        v.dims["low_confidence"] = True
    return v


# ------------------------------------------------------------ chart extraction


def graph_residual(F: SetValuedMap, z) -> float:
    """Distance-like violation of graph membership for z."""
    z = np.asarray(z, float)
    poly = F.polyhedral()
    if poly is not None:
        return min(P.violation(z) for P in poly.pieces)
    n = F.dims.n
    if isinstance(F, SmoothUnion):
        return min(float(np.linalg.norm(B.value(z[:n]) - z[n:])) for B in F.branches)
    if hasattr(F, "value"):
        return float(np.linalg.norm(F.value(z[:n]) - z[n:]))
    raise TypeError("no residual available for this variant")


@dataclass
class ChartExtraction:
    """Coordinate selection and local single-valued map of a smooth graph.

    ``chart_perm`` maps z to (z[selected], z[rest]); ``f`` sends the selected
    coordinates v to the rest, and ``gradient`` is its Jacobian at v_bar.
    """

    selected: np.ndarray
    rest: np.ndarray
    chart_perm: np.ndarray
    gradient: np.ndarray
    v_bar: np.ndarray
    f: object
    d: int

    def assemble(self, v) -> np.ndarray:
        z = np.empty(self.selected.size + self.rest.size)
        z[self.selected] = v
        z[self.rest] = self.f(v)
        return z

    def fd_gradient(self, h: float = 1e-6) -> np.ndarray:
        G = np.zeros((self.rest.size, self.d))
        for j in range(self.d):
            e = np.zeros(self.d)
            e[j] = h
            G[:, j] = (self.f(self.v_bar + e) - self.f(self.v_bar - e)) / (2 * h)
        return G


def _slice_poly(poly: PolyUnion, z0, sel, v):
    k = z0.size
    E = np.eye(k)[sel]
    target = z0.copy()
    target[sel] = v
    best = None
    for P in poly.pieces:
        z = closest_point(P, target, E, v)
        if z is None:
            continue
        if best is None or np.linalg.norm(z - z0) < np.linalg.norm(best - z0) - 1e-12:
            best = z
    if best is None:
        raise ValueError("no graph point with the requested chart coordinates")
    return best


def _slice_smooth(F: Smooth, z0, sel, v, tol=1e-10, maxiter=100):
    n, m = F.dims.n, F.dims.m
    k = n + m
    E = np.eye(k)[sel]
    z = z0.copy()
    for _ in range(maxiter):
        x, y = z[:n], z[n:]
        r = np.concatenate([y - F.value(x), E @ z - v])
        if np.linalg.norm(r) <= tol:
            return z
        J = np.vstack([np.hstack([-F.jacobian(x), np.eye(m)]), E])
        dz, *_ = np.linalg.lstsq(J, -r, rcond=None)
        t = 1.0
        base = np.linalg.norm(r)
        while t > 1e-4:
            zt = z + t * dz
            rt = np.concatenate([zt[n:] - F.value(zt[:n]), E @ zt - v])
            if np.linalg.norm(rt) < base:
                break
            t *= 0.5
        z = z + t * dz
    raise ValueError("graph slicing did not converge")


def extract_chart(F: SetValuedMap, p: GraphPoint, Z=None, check: bool = True) -> ChartExtraction:
    """Coordinate chart of a strictly smooth graph from a tangent basis Z (k x d)."""
    from scipy.linalg import qr

    if check and check_strictly_smooth(F, p).consensus is not True:
        raise ValueError("graph is not strictly smooth at the point")
    z0 = p.z
    k = z0.size
    if Z is None:
        V = cones_at(F, p).paratingent.is_subspace()
        Z = V.basis
    Z = np.asarray(Z, dtype=float).reshape(k, -1)
    d = Z.shape[1]
    if d and np.linalg.matrix_rank(Z) < d:
        raise ValueError("tangent basis is rank deficient")
    if d:
        _, _, piv = qr(Z.T, pivoting=True)
        sel = np.sort(piv[:d])
    else:
        sel = np.zeros(0, dtype=int)
    rest = np.array([i for i in range(k) if i not in set(sel.tolist())], dtype=int)
    Q = np.eye(k)[np.concatenate([rest, sel])]
    QZ = Q @ Z
    A, Bm = QZ[: k - d], QZ[k - d:]
    grad = A @ np.linalg.inv(Bm) if d else np.zeros((k, 0))
    swap = np.block([[np.zeros((d, k - d)), np.eye(d)], [np.eye(k - d), np.zeros((k - d, d))]])
    poly = F.polyhedral()

    if poly is not None:
        def f(v):
            return _slice_poly(poly, z0, sel, np.atleast_1d(v))[rest]
    elif isinstance(F, (Smooth, SmoothUnion)):
        G = F
        if isinstance(F, SmoothUnion):
            active = F.active_branches(p)
            if len(active) != 1:
                raise ValueError("several branches meet at the point")
            G = F.branches[active[0]]

        def f(v):
            return _slice_smooth(G, z0, sel, np.atleast_1d(v))[rest]
    else:
        raise TypeError("no graph slicer for this variant")
    return ChartExtraction(sel, rest, swap @ Q, grad, z0[sel], f, d)


# ------------------------------------------------------------------- survey


def ae_strict_proto_survey(F: SetValuedMap, center: GraphPoint, radius: float, count: int, seed=0) -> dict:
    """Fraction of sampled graph points near center where strict proto holds."""
    rng = as_rng(seed)
    poly = F.polyhedral()
    if isinstance(F, (PolyUnion, PLSingle)) and poly is not None:
        pts = poly.sample_window(center, radius, count, rng)
        target = poly
    else:
        pts = F.sample_near(center, radius, count, rng)
        target = F
    verdicts = [check_strict_proto(target, q).consensus for q in pts]
    good = sum(v is True for v in verdicts)
    return {
        "count": len(pts),
        "fraction": good / len(pts) if pts else float("nan"),
        "inconsistent": sum(v == "inconsistent" for v in verdicts),
        "failures": [np.round(q.z, 9).tolist() for q, v in zip(pts, verdicts) if v is not True],
    }
