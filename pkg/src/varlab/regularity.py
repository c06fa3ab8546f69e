"""Point-based regularity criteria and their collapse under strict proto-differentiability.

All kernel conditions are decided by intersecting each cone piece with a
coordinate slice, never by sampling.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .derivatives import DerivativeBundle, derivative_bundle
from .diagnostics import check_strict_proto
from .maps import GraphPoint, SetValuedMap, Smooth, SumGE
from .polyhedral import ConeUnion
from .subspace import from_range, is_equal

__all__ = [
    "RegularityVerdict",
    "levy_rockafellar",
    "mordukhovich",
    "strong_metric_regular",
    "classify_under_strict_proto",
    "classify_sum",
    "NONSINGULAR_RTOL",
]

NONSINGULAR_RTOL = 1e-8


@dataclass
class RegularityVerdict:
    smsr: bool
    mr: bool
    smr: bool
    equivalence_applicable: bool
    smsr_witness: list | None = None
    mr_witness: list | None = None
    representation: np.ndarray | None = None
    evidence: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "smsr": self.smsr,
            "mr": self.mr,
            "smr": self.smr,
            "equivalence_applicable": self.equivalence_applicable,
            "smsr_witness": self.smsr_witness,
            "mr_witness": self.mr_witness,
            "representation": None if self.representation is None else np.round(self.representation, 12).tolist(),
            "evidence": self.evidence,
        }


def _slice_witness(U: ConeUnion, zero_coords, keep_coords):
    """A unit vector (restricted to keep_coords) of U ∩ {zero_coords = 0}, or None."""
    for C in U.slice_zero(zero_coords):
        S = C.spanning_vectors()
        for s in S:
            w = s[keep_coords]
            nw = np.linalg.norm(w)
            if nw > 1e-9:
                return (w / nw).tolist()
    return None


def _dims(F):
    n, m = F.dims.n, F.dims.m
    return n, m, list(range(n)), list(range(n, n + m))


def levy_rockafellar(F: SetValuedMap, p: GraphPoint, D: DerivativeBundle | None = None):
    """Strong metric subregularity: (u, 0) ∈ gph DF forces u = 0."""
    D = derivative_bundle(F, p) if D is None else D
    n, m, xs, ys = _dims(F)
    w = _slice_witness(D.graphical, ys, xs)
    return w is None, w


def mordukhovich(F: SetValuedMap, p: GraphPoint, D: DerivativeBundle | None = None):
    """Metric regularity: (y*, 0) ∈ gph D*F forces y* = 0."""
    D = derivative_bundle(F, p) if D is None else D
    n, m = F.dims.n, F.dims.m
    w = _slice_witness(D.coderivative, list(range(m, m + n)), list(range(m)))
    return w is None, w


def strong_metric_regular(F: SetValuedMap, p: GraphPoint, D: DerivativeBundle | None = None):
    """Mordukhovich criterion plus a trivial kernel of the strict derivative."""
    D = derivative_bundle(F, p) if D is None else D
    mr, mw = mordukhovich(F, p, D)
    n, m, xs, ys = _dims(F)
    w = _slice_witness(D.strict, ys, xs)
    return bool(mr and w is None), {"mr_witness": mw, "strict_kernel_witness": w}


def _nonsingular(M: np.ndarray, scale: float = 1.0) -> tuple[bool, float]:
    """Smallest singular value above NONSINGULAR_RTOL times max(largest, scale)."""
    if M.size == 0:
        return True, 0.0
    s = np.linalg.svd(M, compute_uv=False)
    return bool(s.min() > NONSINGULAR_RTOL * max(s.max(), scale)), float(s.min())


def _independent(F, p, D, applicable=False, evidence=None):
    smsr, sw = levy_rockafellar(F, p, D)
    mr, mw = mordukhovich(F, p, D)
    smr, _ = strong_metric_regular(F, p, D)
    return RegularityVerdict(smsr, mr, smr, applicable, sw, mw, None, evidence or {})


def classify_under_strict_proto(F: SetValuedMap, p: GraphPoint) -> RegularityVerdict:
    """All three regularity notions, which coincide under strict proto-differentiability.

    When the strict-proto battery holds with chart dimension m, the
    coderivative graph is written as rge(A, B); nonsingular B gives
    C = (A B^{-1})^T and all three properties, singular B none of them.
    Otherwise the three criteria are evaluated independently.
    """
    D = derivative_bundle(F, p)
    verdict = check_strict_proto(F, p)
    d = verdict.dims.get("chart_dim")
    n, m = F.dims.n, F.dims.m
    if verdict.consensus is not True or d != m:
        reason = "strict proto fails" if verdict.consensus is not True else "chart dimension differs from m"
        return _independent(F, p, D, False, {"reason": reason, "strict_proto": verdict.consensus})
    Vc = D.coderivative.is_subspace()
    W = Vc.basis
    A, B = W[:m], W[m:]
    ok, smin = _nonsingular(B)
    ev = {"sigma_min_B": round(smin, 12)}
    if not ok:
        v = RegularityVerdict(False, False, False, True, None, None, None, ev)
        null = np.linalg.svd(B)[2][-1]
        y = A @ null
        v.mr_witness = (y / np.linalg.norm(y)).tolist() if np.linalg.norm(y) > 0 else None
        return v
    C = (A @ np.linalg.inv(B)).T
    Vg = D.graphical.is_subspace()
    rep_ok = bool(Vg is not None and is_equal(from_range(C, np.eye(m)), Vg)
                  and is_equal(from_range(C.T, np.eye(n)), Vc))
    ev["representation_verified"] = rep_ok
    return RegularityVerdict(rep_ok, rep_ok, rep_ok, True, None, None, C, ev)


def classify_sum(g: Smooth, G: SetValuedMap, p: GraphPoint) -> RegularityVerdict:
    """Regularity of F = g + G at p = (x, y) from derivatives of G at (x, y - g(x))."""
    q = GraphPoint(p.x, p.y - g.value(p.x))
    vG = check_strict_proto(G, q)
    if vG.consensus is not True:
        raise ValueError("G is not strictly proto-differentiable at the shifted point")
    DG = derivative_bundle(G, q)
    n, m = G.dims.n, G.dims.m
    Jg = g.jacobian(p.x)
    Vs = DG.strict.is_subspace()
    Vc = DG.coderivative.is_subspace()
    if Vs.dim != m or Vc.dim != n:
        raise ValueError("strict derivative of G does not have dimension m")
    A, B = Vs.basis[:n], Vs.basis[n:]
    At, Bt = Vc.basis[:m], Vc.basis[m:]
    scale = 1.0 + np.linalg.norm(Jg, 2)
    ok4, s4 = _nonsingular(Jg @ A + B, scale)
    ok5, s5 = _nonsingular(Jg.T @ At + Bt, scale)
    ev = {"sigma_min_primal": round(s4, 12), "sigma_min_dual": round(s5, 12), "criteria_agree": ok4 == ok5}
    C = None
    if ok4:
        C = A @ np.linalg.inv(Jg @ A + B)
    direct = classify_under_strict_proto(SumGE(g, G), p)
    ev["direct"] = [direct.smsr, direct.mr, direct.smr]
    ev["agrees_with_direct"] = bool(direct.equivalence_applicable and direct.smsr == direct.mr == direct.smr == ok4)
    return RegularityVerdict(ok4, ok4, ok4, True, None, None, C, ev)
