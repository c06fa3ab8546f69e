"""Prox-regular functions: proximal mapping, Moreau envelope and trapezoid checks.

Subgradient pairs are always produced through the resolvent parametrization
u ↦ (P(u), (u - P(u)) / lam), which keeps samples inside the localization
window and makes function-value attentiveness automatic.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from .cones import ConeBundle, cones_at
from .derivatives import DerivativeBundle, bundle_to_derivatives
from .diagnostics import (
    Criterion,
    DiagnosticVerdict,
    check_semismooth_star,
    check_strict_proto,
    consensus_of,
)
from .maps import GraphPoint, PolyUnion, ProxSubgrad, as_rng
from .polyhedral import closest_point
from .subspace import is_equal

__all__ = [
    "ProxRegularFunction",
    "AttentiveLocalization",
    "CLOSED_FORMS",
    "default_lambda",
    "prox_map",
    "moreau_envelope",
    "envelope_gradient",
    "attentive_localization",
    "attentive_derivatives",
    "check_strict_proto_subgrad",
    "check_prox_regular",
    "trapezoid_one_point",
    "trapezoid_two_point",
    "decay_verdict",
]


def _soft(lam, u, p):
    t = lam * p.get("weight", 1.0)
    return np.sign(u) * np.maximum(np.abs(u) - t, 0.0)


def _quadratic(lam, u, p):
    return u / (1.0 + lam * p["a"])


CLOSED_FORMS = {
    "soft_threshold": _soft,
    "quadratic": _quadratic,
    "zero": lambda lam, u, p: u.copy(),
    "projection_halfline": lambda lam, u, p: np.maximum(u, 0.0),
}


@dataclass(frozen=True, eq=False)
class ProxRegularFunction:
    """A prox-regular function with a structured subgradient graph.

    Parameters
    ----------
    n : dimension
    evaluate : callable x -> float (may return inf)
    subgrad_graph : PolyUnion of pairs (x, x*), or None
    prox_r, prox_eps : prox-regularity constants
    ref : reference pair (x_bar, x_bar*)
    closed_form : key of CLOSED_FORMS or None
    params : parameters for the closed form
    window : admissible distance |u - u_bar| for prox evaluations
    name : label used in reports
    exact_evaluate : optional callable x -> Fraction (or None) evaluating phi
        exactly at the binary value of x
    """

    n: int
    evaluate: object
    subgrad_graph: PolyUnion | None
    prox_r: float
    prox_eps: float
    ref: GraphPoint
    closed_form: str | None = None
    params: dict = field(default_factory=dict)
    window: float = 0.25
    name: str = ""
    exact_evaluate: object = None

    def __call__(self, x) -> float:
        return float(self.evaluate(np.atleast_1d(np.asarray(x, float))))

    def with_ref(self, ref: GraphPoint) -> "ProxRegularFunction":
        return replace(self, ref=ref)


def default_lambda(r: float) -> float:
    return min(0.5, 0.9 / max(r, 1.0))


def _check_lambda(phi, lam):
    if not lam > 0 or (phi.prox_r > 0 and lam >= 1.0 / phi.prox_r):
        raise ValueError("lam must lie in (0, 1/r)")


def _u_bar(phi, lam):
    return phi.ref.x + lam * phi.ref.y


def prox_map(phi: ProxRegularFunction, lam: float, u) -> np.ndarray:
    """Proximal point of u inside the certified window around u_bar."""
    _check_lambda(phi, lam)
    u = np.atleast_1d(np.asarray(u, dtype=float))
    if np.linalg.norm(u - _u_bar(phi, lam)) > phi.window:
        raise ValueError("u lies outside the prox window")
    if phi.closed_form is not None:
        return CLOSED_FORMS[phi.closed_form](lam, u, phi.params)
    if phi.subgrad_graph is not None:
        return _prox_polyhedral(phi, lam, u)
    return _prox_generic(phi, lam, u)


def _prox_polyhedral(phi, lam, u):
    n = phi.n
    E = np.hstack([np.eye(n), lam * np.eye(n)])
    best, best_val = None, np.inf
    for P in phi.subgrad_graph.pieces:
        z = closest_point(P, phi.ref.z, E, u)
        if z is None or np.linalg.norm(z - phi.ref.z) > phi.prox_eps + 1e-12:
            continue
        x = z[:n]
        val = phi(x) + np.dot(x - u, x - u) / (2 * lam)
        if val < best_val - 1e-14:
            best, best_val = x, val
    if best is None:
        raise ValueError("no subgradient pair with x + lam x* = u in the window")
    return best


def _prox_generic(phi, lam, u):
    from scipy.optimize import minimize

    obj = lambda x: phi(x) + np.dot(x - u, x - u) / (2 * lam)
    res = minimize(obj, phi.ref.x.copy(), method="Nelder-Mead",
                   options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 20000})
    if not res.success:
        raise ValueError("prox minimization did not converge")
    return res.x


def moreau_envelope(phi: ProxRegularFunction, lam: float, u) -> float:
    u = np.atleast_1d(np.asarray(u, dtype=float))
    x = prox_map(phi, lam, u)
    return phi(x) + float(np.dot(x - u, x - u)) / (2 * lam)


def envelope_gradient(phi: ProxRegularFunction, lam: float, u) -> np.ndarray:
    u = np.atleast_1d(np.asarray(u, dtype=float))
    return (u - prox_map(phi, lam, u)) / lam


# ------------------------------------------------------------- localization


@dataclass(frozen=True, eq=False)
class AttentiveLocalization:
    base: ProxRegularFunction
    lam: float
    as_map: ProxSubgrad
    window: float

    def point(self, u) -> GraphPoint:
        u = np.atleast_1d(np.asarray(u, float))
        x = prox_map(self.base, self.lam, u)
        return GraphPoint(x, (u - x) / self.lam)

    def f(self, u) -> np.ndarray:
        return prox_map(self.base, self.lam, u)


def attentive_localization(phi: ProxRegularFunction, lam: float | None = None) -> AttentiveLocalization:
    lam = default_lambda(phi.prox_r) if lam is None else float(lam)
    _check_lambda(phi, lam)
    if phi.prox_r > 0 and lam > 0.9 / phi.prox_r:
        raise ValueError("lam too close to 1/r")
    return AttentiveLocalization(phi, lam, ProxSubgrad(phi, lam), phi.window)


def attentive_derivatives(loc: AttentiveLocalization, p: GraphPoint) -> tuple[ConeBundle, DerivativeBundle]:
    if not loc.as_map.contains(p):
        raise ValueError("pair is not on the localization graph")
    B = cones_at(loc.as_map, p)
    return B, bundle_to_derivatives(loc.as_map.dims, B)


def _prox_jacobians(phi, lam, r: float = 1e-3, count: int = 24, h: float = 1e-7, seed=0):
    """Finite-difference Jacobians of P_lam at random points near u_bar, clustered."""
    rng = as_rng(seed)
    ub = _u_bar(phi, lam)
    n = phi.n
    mats: list[np.ndarray] = []
    for _ in range(count):
        u = ub + r * rng.uniform(-1, 1, n)
        J = np.zeros((n, n))
        for j in range(n):
            e = np.zeros(n)
            e[j] = h
            J[:, j] = (prox_map(phi, lam, u + e) - prox_map(phi, lam, u - e)) / (2 * h)
        if not any(np.abs(J - B).max() <= 1e-5 for B in mats):
            mats.append(J)
    return mats


def check_strict_proto_subgrad(phi: ProxRegularFunction, lam: float | None = None) -> DiagnosticVerdict:
    """Strict proto-differentiability of the subgradient localization at the reference pair."""
    loc = attentive_localization(phi, lam)
    F, p = loc.as_map, phi.ref
    B, D = attentive_derivatives(loc, p)
    inner = check_strict_proto(F, p)
    jac = _prox_jacobians(phi, loc.lam)
    Vc = D.coderivative.is_subspace()
    crit = [
        Criterion("i_strict_proto", True, inner.consensus is True, {"battery": inner.consensus}),
        Criterion("ii_prox_strictly_differentiable", True, len(jac) == 1,
                  {"jacobians": [np.round(J, 6).tolist() for J in jac]}),
        Criterion("iii_coderivative_subspace", True, Vc is not None, {}),
        Criterion("iv_normally_regular", True,
                  type(B.limiting_normal)([B.regular_normal]).equals(B.limiting_normal), {}),
        Criterion("v_sc_singleton", True, len(D.sc) == 1, {"size": len(D.sc)}),
    ]
    v = DiagnosticVerdict("strict_proto_subgrad", crit, consensus_of(crit), {"lam": loc.lam, "n": phi.n})
    if v.consensus is True:
        Vg = D.graphical.is_subspace()
        v.identities = {"sc_is_graphical": bool(Vg is not None and is_equal(D.sc[0], Vg)),
                        "sc_is_coderivative": bool(Vc is not None and is_equal(D.sc[0], Vc))}
    return v


def check_prox_regular(phi: ProxRegularFunction, samples: int = 200, seed=0, slack: float = 1e-9):
    """Sampled prox-regularity inequality; returns (ok, worst violation).

    Subgradient pairs come from the structured graph when there is one, so
    that stationary but non-proximal pairs are tested too; otherwise they
    are read through the proximal mapping.  No usable pair counts as failure.
    """
    rng = as_rng(seed)
    if phi.subgrad_graph is not None:
        F = phi.subgrad_graph
    else:
        F = ProxSubgrad(phi, default_lambda(phi.prox_r))
    fbar = phi(phi.ref.x)
    pairs = F.sample_near(phi.ref, phi.prox_eps, samples, rng)
    if not pairs:
        return False, float("inf")
    worst = 0.0
    for q in pairs:
        fx = phi(q.x)
        if not fx < fbar + phi.prox_eps:
            continue
        d = rng.standard_normal(phi.n)
        xp = phi.ref.x + phi.prox_eps * rng.uniform(0, 1) * d / np.linalg.norm(d)
        fxp = phi(xp)
        if not np.isfinite(fxp):
            continue
        lower = fx + q.y @ (xp - q.x) - 0.5 * phi.prox_r * np.dot(xp - q.x, xp - q.x)
        worst = max(worst, lower - fxp)
    return worst <= slack, worst


# ---------------------------------------------------------------- trapezoid

EXACT_ZERO = 1e-13


def decay_verdict(radii, maxima, floor: float = EXACT_ZERO) -> dict:
    """Fitted log-log slope of shell maxima and the decay verdict.

    Shells whose maximum is below ``floor`` count as exact zeros; if all are,
    the slope is reported as infinite.
    """
    radii = np.asarray(radii, float)
    maxima = np.asarray(maxima, float)
    if np.all(maxima <= floor):
        return {"slope": float("inf"), "exact_zero": True, "decays": True}
    keep = maxima > floor
    if keep.sum() >= 2:
        slope = float(np.polyfit(np.log(radii[keep]), np.log(maxima[keep]), 1)[0])
    else:
        slope = float("inf")
    if not keep[-1]:
        final_small = True
    else:
        final_small = bool(maxima[-1] < 0.02 * maxima[0])
    return {"slope": slope, "exact_zero": False, "decays": bool(slope > 0.5 and final_small)}


def _exact_quotient(phi, a, b):
    fa, fb = phi.exact_evaluate(a.x), phi.exact_evaluate(b.x)
    if fa is None or fb is None:
        return None
    F = lambda v: [Fraction(float(t)) for t in v]
    xa, ya, xb, yb = F(a.x), F(a.y), F(b.x), F(b.y)
    dz = [s - t for s, t in zip(xb + yb, xa + ya)]
    nz2 = sum(t * t for t in dz)
    if nz2 == 0:
        return None
    inner = sum((p + q) * (s - t) for p, q, s, t in zip(yb, ya, xb, xa))
    return float((fb - fa - inner / 2) / nz2)


def _quotient(phi, a, b):
    """[phi(b) - phi(a) - <b* + a*, b - a>/2] / |(b, b*) - (a, a*)|^2.

    With an exact oracle the quotient is evaluated in rational arithmetic on
    the floating-point inputs, so it carries no cancellation error.
    """
    if phi.exact_evaluate is not None:
        v = _exact_quotient(phi, a, b)
        if v is not None:
            return v
    dz = b.z - a.z
    nz2 = float(dz @ dz)
    if nz2 == 0:
        return None
    return (phi(b.x) - phi(a.x) - 0.5 * float((b.y + a.y) @ (b.x - a.x))) / nz2


def _shell_points(loc, r, count, rng):
    ub = _u_bar(loc.base, loc.lam)
    out = []
    for _ in range(count):
        d = rng.standard_normal(loc.base.n)
        u = ub + r * rng.uniform(0.5, 1.0) * d / np.linalg.norm(d)
        try:
            out.append(loc.point(u))
        except ValueError:
            continue
    return out


def _round_list(v):
    return [None if x is None else float(np.round(x, 15)) for x in v]


def trapezoid_one_point(phi: ProxRegularFunction, lam: float | None = None, r0: float = 0.1,
                        shells: int = 8, per_shell: int = 64, seed=0) -> dict:
    """Shell maxima of the one-point trapezoid quotient around the reference pair."""
    rng = as_rng(seed)
    loc = attentive_localization(phi, lam)
    radii, maxima = [], []
    for k in range(shells + 1):
        r = min(r0, phi.window) * 2.0 ** (-k)
        vals = [_quotient(phi, phi.ref, q) for q in _shell_points(loc, r, per_shell, rng)]
        vals = [abs(v) for v in vals if v is not None]
        radii.append(r)
        maxima.append(max(vals) if vals else 0.0)
    hyp = check_semismooth_star(loc.as_map, phi.ref, delta0=min(r0, phi.window), seed=rng).consensus is True
    out = {"radii": _round_list(radii), "shell_max": _round_list(maxima), "hypothesis_verified": hyp}
    out.update(decay_verdict(radii, maxima))
    return out


def trapezoid_two_point(phi: ProxRegularFunction, lam: float | None = None, r0: float = 0.1,
                        shells: int = 8, per_shell: int = 32, seed=0, witness=None) -> dict:
    """Shell maxima of the two-point trapezoid quotient.

    ``witness`` optionally gives a pair family as two affine maps
    t ↦ a0 + t a1 and t ↦ b0 + t b1 in graph coordinates; its quotient is
    reported at t equal to each shell radius.
    """
    rng = as_rng(seed)
    loc = attentive_localization(phi, lam)
    radii, maxima, wvals = [], [], []
    for k in range(shells + 1):
        r = min(r0, phi.window) * 2.0 ** (-k)
        pts = _shell_points(loc, r, per_shell, rng)
        vals = []
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                # nearly coincident pairs only measure round-off
                if np.linalg.norm(pts[i].z - pts[j].z) < 0.25 * r:
                    continue
                v = _quotient(phi, pts[i], pts[j])
                if v is not None:
                    vals.append(abs(v))
        radii.append(r)
        maxima.append(max(vals) if vals else 0.0)
        if witness is not None:
            (a0, a1), (b0, b1) = witness
            a = GraphPoint.from_vector(np.asarray(a0, float) + r * np.asarray(a1, float), loc.as_map.dims)
            b = GraphPoint.from_vector(np.asarray(b0, float) + r * np.asarray(b1, float), loc.as_map.dims)
            # route through the resolvent so both points are graph points
            a = loc.point(a.x + loc.lam * a.y)
            b = loc.point(b.x + loc.lam * b.y)
            wvals.append(_quotient(phi, a, b))
    hyp = check_strict_proto_subgrad(phi, loc.lam).consensus is True
    out = {"radii": _round_list(radii), "shell_max": _round_list(maxima), "hypothesis_verified": hyp}
    out.update(decay_verdict(radii, maxima))
    if witness is not None:
        out["witness_values"] = _round_list(wvals)
    return out
