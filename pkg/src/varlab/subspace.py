"""Linear subspaces of R^k with an orthonormal basis.

Subspaces are the building block for everything else in the package: tangent
spaces, SC derivatives and their adjoints all live here.  The metric between
two subspaces is the spectral norm of the difference of their orthogonal
projections.
"""
from __future__ import annotations

from contextlib import contextmanager
from contextvars import ContextVar
from dataclasses import dataclass, field

import numpy as np

TAU_EQ = 1e-8
TAU_ORTH = 1e-12

_tau_eq = ContextVar("tau_eq", default=TAU_EQ)


def eq_tolerance() -> float:
    """Subspace equality tolerance in effect for the current context."""
    return _tau_eq.get()


@contextmanager
def using_eq_tolerance(tol: float):
    """Temporarily replace the default subspace equality tolerance."""
    if not tol > 0:
        raise ValueError("tolerance must be positive")
    token = _tau_eq.set(float(tol))
    try:
        yield
    finally:
        _tau_eq.reset(token)

__all__ = [
    "TAU_EQ",
    "TAU_ORTH",
    "eq_tolerance",
    "using_eq_tolerance",
    "dedupe_subspaces",
    "SplitDims",
    "Subspace",
    "numerical_rank",
    "from_range",
    "projection",
    "distance",
    "orthogonal_complement",
    "swap_apply",
    "adjoint",
    "is_equal",
    "same_subspace_sets",
]


def _rank_cutoff(s: np.ndarray, shape) -> float:
    if s.size == 0:
        return 0.0
    return 64 * np.finfo(float).eps * s.max() * max(shape)


def numerical_rank(M) -> int:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(s > _rank_cutoff(s, M.shape)))


def _orthonormal_range(M: np.ndarray) -> np.ndarray:
    k = M.shape[0]
    if M.size == 0:
        return np.zeros((k, 0))
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    r = int(np.sum(s > _rank_cutoff(s, M.shape)))
    Q = U[:, :r]
    if r:
        # second pass keeps basis^T basis = I to ~1e-15
        Q, _ = np.linalg.qr(Q)
    return Q


@dataclass(frozen=True)
class SplitDims:
    """Block sizes (n, m) of a product space R^n x R^m."""

    n: int
    m: int

    def __post_init__(self):
        if self.n < 0 or self.m < 0:
            raise ValueError("block sizes must be nonnegative")

    @property
    def total(self) -> int:
        return self.n + self.m

    def transposed(self) -> "SplitDims":
        return SplitDims(self.m, self.n)

    def swap_matrix(self) -> np.ndarray:
        """The orthogonal matrix mapping (a, b) in R^n x R^m to (-b, a)."""
        n, m = self.n, self.m
        S = np.zeros((n + m, n + m))
        S[:m, n:] = -np.eye(m)
        S[m:, :n] = np.eye(n)
        return S


@dataclass(frozen=True, eq=False)
class Subspace:
    """A linear subspace stored through an orthonormal basis (k x d)."""

    basis: np.ndarray
    ambient_dim: int = field(default=-1)

    def __post_init__(self):
        B = np.asarray(self.basis, dtype=float)
        if B.ndim != 2:
            raise ValueError("basis must be a 2-d array")
        object.__setattr__(self, "basis", B)
        if self.ambient_dim < 0:
            object.__setattr__(self, "ambient_dim", B.shape[0])
        elif B.shape[0] != self.ambient_dim:
            raise ValueError("basis rows do not match ambient dimension")
        B.setflags(write=False)

    @classmethod
    def from_vectors(cls, vectors, ambient_dim: int | None = None) -> "Subspace":
        """Span of the given column vectors (k x p array or list of k-vectors)."""
        V = np.asarray(vectors, dtype=float)
        if V.ndim == 1:
            V = V.reshape(-1, 1)
        if V.size == 0:
            if ambient_dim is None:
                raise ValueError("ambient_dim required for an empty spanning set")
            return cls.zero(ambient_dim)
        return cls(_orthonormal_range(V))

    @classmethod
    def from_rows(cls, rows, ambient_dim: int) -> "Subspace":
        R = np.asarray(rows, dtype=float).reshape(-1, ambient_dim)
        return cls.from_vectors(R.T, ambient_dim)

    @classmethod
    def zero(cls, k: int) -> "Subspace":
        return cls(np.zeros((k, 0)), k)

    @classmethod
    def whole(cls, k: int) -> "Subspace":
        return cls(np.eye(k), k)

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def contains(self, v, tol: float | None = None) -> bool:
        tol = eq_tolerance() if tol is None else tol
        v = np.asarray(v, dtype=float)
        r = v - self.basis @ (self.basis.T @ v)
        return bool(np.linalg.norm(r) <= tol * (1 + np.linalg.norm(v)))

    def image(self, M) -> "Subspace":
        return Subspace.from_vectors(np.asarray(M, dtype=float) @ self.basis, np.shape(M)[0])

    def __repr__(self):
        return f"Subspace(dim={self.dim}, ambient_dim={self.ambient_dim})"


def from_range(A, B) -> Subspace:
    """rge(A, B) = {(Ap, Bp) : p in R^d}."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.shape[1] != B.shape[1]:
        raise ValueError(f"column counts differ: {A.shape[1]} vs {B.shape[1]}")
    return Subspace.from_vectors(np.vstack([A, B]), A.shape[0] + B.shape[0])


def projection(L: Subspace) -> np.ndarray:
    return L.basis @ L.basis.T


def distance(L1: Subspace, L2: Subspace) -> float:
    if L1.ambient_dim != L2.ambient_dim:
        raise ValueError("ambient dimensions differ")
    if L1.ambient_dim == 0:
        return 0.0
    return float(np.linalg.norm(projection(L1) - projection(L2), 2))


def orthogonal_complement(L: Subspace) -> Subspace:
    k = L.ambient_dim
    if L.dim == 0:
        return Subspace.whole(k)
    if L.dim == k:
        return Subspace.zero(k)
    U, _, _ = np.linalg.svd(L.basis, full_matrices=True)
    return Subspace(_orthonormal_range(U[:, L.dim:]), k)


def _check_dims(dims: SplitDims, L: Subspace):
    if L.ambient_dim != dims.total:
        raise ValueError(f"subspace lives in R^{L.ambient_dim}, expected R^{dims.total}")


def swap_apply(dims: SplitDims, L: Subspace) -> Subspace:
    _check_dims(dims, L)
    return Subspace(dims.swap_matrix() @ L.basis, dims.total)


def adjoint(dims: SplitDims, L: Subspace) -> Subspace:
    """L* = S_nm L^perp, a subspace of R^m x R^n."""
    _check_dims(dims, L)
    return swap_apply(dims, orthogonal_complement(L))


def is_equal(L1: Subspace, L2: Subspace, tol: float | None = None) -> bool:
    tol = eq_tolerance() if tol is None else tol
    if L1.ambient_dim != L2.ambient_dim:
        return False
    return distance(L1, L2) <= tol


def dedupe_subspaces(subspaces, tol: float | None = None) -> list[Subspace]:
    out: list[Subspace] = []
    for L in subspaces:
        if not any(is_equal(L, K, tol) for K in out):
            out.append(L)
    return out


def same_subspace_sets(first, second, tol: float | None = None) -> bool:
    """Order-free equality of two finite families of subspaces.

    Both families are deduplicated first; families of different size are
    unequal, otherwise members are matched greedily under the subspace metric.
    """
    a = dedupe_subspaces(first, tol)
    b = dedupe_subspaces(second, tol)
    if len(a) != len(b):
        return False
    unused = list(b)
    for L in a:
        for i, K in enumerate(unused):
            if is_equal(L, K, tol):
                del unused[i]
                break
        else:
            return False
    return True
