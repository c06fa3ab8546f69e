"""Generalized derivatives read off a cone bundle.

Graph vectors of the derivative maps are ordered (u, v) in R^n x R^m; the
coderivative graph is ordered (y*, x*) in R^m x R^n.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cones import ConeBundle, cones_at
from .maps import GraphPoint, PLSingle, SetValuedMap, Smooth, as_rng
from .polyhedral import ConeUnion
from .subspace import SplitDims, Subspace, adjoint, dedupe_subspaces

__all__ = [
    "DerivativeBundle",
    "derivative_bundle",
    "bundle_to_derivatives",
    "b_jacobian_sampled",
    "sum_transform",
    "sum_blocks",
]


@dataclass(frozen=True, eq=False)
class DerivativeBundle:
    """Graphs of DF, D_*F and D*F together with the SC families."""

    dims: SplitDims
    graphical: ConeUnion
    strict: ConeUnion
    coderivative: ConeUnion
    sc: list
    sc_adjoint: list
    generalized_sc: list
    generalized_sc_adjoint: list

    def to_json(self) -> dict:
        return {
            "graphical": self.graphical.to_json(),
            "strict": self.strict.to_json(),
            "coderivative": self.coderivative.to_json(),
            "sc_dims": [L.dim for L in self.sc],
            "generalized_sc_dims": [L.dim for L in self.generalized_sc],
        }


def bundle_to_derivatives(dims: SplitDims, B: ConeBundle) -> DerivativeBundle:
    S = dims.swap_matrix()
    gen = dedupe_subspaces(B.tangent_subspaces)
    sc = [L for L in gen if L.dim == dims.n]
    return DerivativeBundle(
        dims,
        B.tangent,
        B.paratingent,
        B.limiting_normal.image(S),
        sc,
        [adjoint(dims, L) for L in sc],
        gen,
        [adjoint(dims, L) for L in gen],
    )


def derivative_bundle(F: SetValuedMap, p: GraphPoint) -> DerivativeBundle:
    return bundle_to_derivatives(F.dims, cones_at(F, p))


def b_jacobian_sampled(F, x, r0: float = 1e-2, shells: int = 8, per_shell: int = 16, seed=0,
                       merge_tol: float = 1e-6) -> list[np.ndarray]:
    """Limits of Jacobians at nearby differentiability points.

    Piecewise-linear maps are exact (adjacent cell matrices).  For smooth maps
    the Jacobians sampled in the last shell are clustered; their spread is
    O(r) so they collapse to one matrix.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if isinstance(F, PLSingle):
        return F.cell_jacobians(x)
    if isinstance(F, Smooth):
        rng = as_rng(seed)
        r = r0 * 2.0 ** (-shells)
        mats = [F.jacobian(x + r * rng.uniform(-1, 1, x.size)) for _ in range(per_shell)]
        J0 = F.jacobian(x)
        spread = max(np.abs(M - J0).max() for M in mats)
        reps: list[np.ndarray] = []
        for M in mats:
            if not any(np.abs(M - R).max() <= max(merge_tol, 10 * spread) for R in reps):
                reps.append(M)
        return reps
    raise TypeError("B-Jacobians are defined for single-valued variants only")


def sum_blocks(Jg: np.ndarray):
    """Block maps carrying D_*G to D_*F and D*G to D*F for F = g + G."""
    m, n = Jg.shape
    T = np.block([[np.eye(n), np.zeros((n, m))], [Jg, np.eye(m)]])
    C = np.block([[np.eye(m), np.zeros((m, n))], [Jg.T, np.eye(n)]])
    return T, C


def sum_transform(g: Smooth, bundleG: DerivativeBundle, x) -> DerivativeBundle:
    """Derivatives of g + G from those of G at (x, y - g(x))."""
    if g.dims != bundleG.dims:
        raise ValueError("dimension mismatch between g and G")
    T, C = sum_blocks(g.jacobian(np.atleast_1d(np.asarray(x, float))))
    dims = bundleG.dims
    gen = [L.image(T) for L in bundleG.generalized_sc]
    sc = [L.image(T) for L in bundleG.sc]
    return DerivativeBundle(
        dims,
        bundleG.graphical.image(T),
        bundleG.strict.image(T),
        bundleG.coderivative.image(C),
        sc,
        [L.image(C) for L in bundleG.sc_adjoint],
        gen,
        [L.image(C) for L in bundleG.generalized_sc_adjoint],
    )


def subspace_of(U: ConeUnion) -> Subspace | None:
    return U.is_subspace()
