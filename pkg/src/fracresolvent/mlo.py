"""Multivalued linear operators on C^n stored as graph subspaces of C^n x C^n.

Subspaces are kept as orthonormal column bases; equality and inclusion are
decided by singular-value thresholding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DimensionError, DomainError, NotInResolventSet

__all__ = [
    "MloGraph",
    "Regularizer",
    "Parts",
    "from_matrix",
    "from_pencil",
    "inverse",
    "parts",
    "compose",
    "graph_distance",
    "includes",
    "same_subspace",
    "resolvent_c",
    "resolvent_batch",
    "resolvent_chain_check",
    "prop_lav_check",
    "closure_identity_check",
    "sector_bound_check",
]

DEFAULT_RANK_TOL = 1e-10


def _orth(m: np.ndarray, tol: float) -> np.ndarray:
    if m.size == 0 or m.shape[1] == 0:
        return np.zeros((m.shape[0], 0), dtype=complex)
    u, s, _ = np.linalg.svd(m, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return np.zeros((m.shape[0], 0), dtype=complex)
    return u[:, s > tol * s[0]].astype(complex)


def _null(m: np.ndarray, tol: float) -> np.ndarray:
    """Orthonormal basis of the null space of ``m``."""
    cols = m.shape[1]
    if m.shape[0] == 0:
        return np.eye(cols, dtype=complex)
    _, s, vh = np.linalg.svd(m)
    scale = s[0] if s.size and s[0] > 0 else 1.0
    rank = int(np.sum(s > tol * scale))
    return vh[rank:].conj().T


@dataclass(frozen=True, eq=False)
class MloGraph:
    """Graph ``{(x, y) : y in A x}`` with an orthonormal basis stacked as
    ``[x-block; y-block]`` (shape ``2n x d``)."""

    n: int
    basis: np.ndarray
    rank_tol: float = DEFAULT_RANK_TOL

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=complex)
        if b.ndim != 2 or b.shape[0] != 2 * self.n:
            raise DimensionError(f"graph basis must have {2 * self.n} rows")
        object.__setattr__(self, "basis", _orth(b, self.rank_tol))

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def x_block(self) -> np.ndarray:
        return self.basis[: self.n]

    @property
    def y_block(self) -> np.ndarray:
        return self.basis[self.n:]

    def __eq__(self, other):
        return isinstance(other, MloGraph) and same_subspace(self, other)

    __hash__ = None


class Regularizer:
    """A bounded operator ``C``; with ``commutes_with`` the inclusion
    ``C A subset A C`` is verified on construction."""

    def __init__(self, C, commutes_with: MloGraph | None = None):
        C = np.atleast_2d(np.asarray(C, dtype=complex))
        if C.shape[0] != C.shape[1]:
            raise DimensionError("regularizer must be square")
        self.C = C
        self.commutes_with = commutes_with
        if commutes_with is not None and not self.commutes(commutes_with):
            raise DomainError("C A is not contained in A C")

    @classmethod
    def identity(cls, n: int) -> "Regularizer":
        return cls(np.eye(n))

    @property
    def n(self) -> int:
        return self.C.shape[0]

    def commutes(self, G: MloGraph) -> bool:
        # C A subset A C  <=>  (Cx, Cy) in A whenever (x, y) in A
        moved = np.vstack([self.C @ G.x_block, self.C @ G.y_block])
        return _contains_columns(G, moved)


def _as_regularizer(C, n: int) -> Regularizer:
    reg = C if isinstance(C, Regularizer) else Regularizer(np.eye(n) if C is None else C)
    if reg.n != n:
        raise DimensionError("regularizer and operator dimensions differ")
    return reg


class Parts(NamedTuple):
    domain: np.ndarray
    range: np.ndarray
    kernel: np.ndarray
    mv_part: np.ndarray


# construction and algebra {{{

def from_matrix(A) -> MloGraph:
    """Graph ``{(x, A x)}`` of a single-valued operator."""
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    if A.shape[0] != A.shape[1]:
        raise DimensionError("matrix must be square")
    n = A.shape[0]
    return MloGraph(n, np.vstack([np.eye(n), A]))


def from_pencil(B, L) -> MloGraph:
    """Graph of ``L B^(-1)``, spanned by the columns of ``[B; L]``; ``B`` may
    be singular."""
    B = np.atleast_2d(np.asarray(B, dtype=complex))
    L = np.atleast_2d(np.asarray(L, dtype=complex))
    if B.shape != L.shape or B.shape[0] != B.shape[1]:
        raise DimensionError("pencil matrices must be square and of equal size")
    return MloGraph(B.shape[0], np.vstack([B, L]))


def inverse(G: MloGraph) -> MloGraph:
    return MloGraph(G.n, np.vstack([G.y_block, G.x_block]), G.rank_tol)


def parts(G: MloGraph) -> Parts:
    """Domain, range, kernel ``A^(-1) 0`` and multivalued part ``A 0``."""
    tol = G.rank_tol
    X, Y = G.x_block, G.y_block
    kernel = _orth(X @ _null(Y, tol), tol)
    mv = _orth(Y @ _null(X, tol), tol)
    return Parts(_orth(X, tol), _orth(Y, tol), kernel, mv)


def compose(G1: MloGraph, G2: MloGraph) -> MloGraph:
    """Product ``G1 G2 = {(x, z) : (x, y) in G2, (y, z) in G1 for some y}``."""
    if G1.n != G2.n:
        raise DimensionError("operators act on spaces of different dimension")
    tol = min(G1.rank_tol, G2.rank_tol)
    coupling = np.hstack([G2.y_block, -G1.x_block])
    null = _null(coupling, tol)
    c2, c1 = null[: G2.dim], null[G2.dim:]
    return MloGraph(G1.n, np.vstack([G2.x_block @ c2, G1.y_block @ c1]), tol)


def graph_distance(G: MloGraph, x, y) -> float:
    """Orthogonal distance from ``(x, y)`` to the graph, relative to its norm."""
    v = np.concatenate([np.asarray(x, dtype=complex).ravel(), np.asarray(y, dtype=complex).ravel()])
    norm = np.linalg.norm(v)
    if norm == 0:
        return 0.0
    resid = v - G.basis @ (G.basis.conj().T @ v)
    return float(np.linalg.norm(resid) / norm)


def _contains_columns(G: MloGraph, cols: np.ndarray, tol: float | None = None) -> bool:
    tol = G.rank_tol * 1e2 if tol is None else tol
    if cols.size == 0:
        return True
    scale = max(1.0, float(np.linalg.norm(cols, 2)))
    resid = cols - G.basis @ (G.basis.conj().T @ cols)
    return float(np.linalg.norm(resid, 2)) <= tol * scale


def includes(big: MloGraph, small: MloGraph) -> bool:
    """Whether the graph ``small`` is a subspace of ``big``."""
    return _contains_columns(big, small.basis)


def same_subspace(G: MloGraph, H: MloGraph) -> bool:
    return G.n == H.n and G.dim == H.dim and includes(G, H) and includes(H, G)

# }}}

# C-resolvents {{{

def _resolvent_single(G: MloGraph, C: np.ndarray, lam: complex) -> np.ndarray:
    tol = G.rank_tol
    X, Y = G.x_block, G.y_block
    system = lam * X - Y
    # the graph basis is orthonormal, so singular values are compared on an absolute
    # scale; a relative cutoff would accept lam in the spectrum up to rounding
    u, s, vh = np.linalg.svd(system, full_matrices=True)
    cutoff = 1e3 * tol * max(1.0, abs(lam))
    rank = int(np.sum(s > cutoff))
    coef = vh[:rank].conj().T @ ((u[:, :rank].conj().T @ C) / s[:rank, None])
    resid = np.linalg.norm(system @ coef - C, 2)
    if resid > 1e3 * tol * max(np.linalg.norm(C, 2), 1.0):
        raise NotInResolventSet("range", lam, f"residual {resid:.2e}")
    # (lam - A)^(-1) 0 = X null(lam X - Y) must be trivial
    null = vh[rank:].conj().T
    if null.shape[1] and np.linalg.norm(X @ null, 2) > 1e3 * tol:
        raise NotInResolventSet("multivalued", lam)
    return X @ coef


def resolvent_c(G: MloGraph, C, lam) -> np.ndarray:
    """Matrix of ``(lam - A)^(-1) C``.

    Solves ``(lam X - Y) c = C y`` over the graph basis ``[X; Y]`` by least
    squares, then certifies the residual (``R(C)`` inside ``R(lam - A)``) and
    single-valuedness separately.

    Raises
    ------
    NotInResolventSet
        With ``reason`` ``"range"`` or ``"multivalued"``.
    """
    reg = _as_regularizer(C, G.n)
    return _resolvent_single(G, reg.C, complex(lam))


def resolvent_batch(G: MloGraph, C, lams) -> np.ndarray:
    """``(lam - A)^(-1) C`` for an array of ``lam``; shape ``(m, n, n)``.

    Square graph bases use one batched solve with a conditioning check;
    ill-conditioned points and non-square bases go through
    :func:`resolvent_c`.
    """
    reg = _as_regularizer(C, G.n)
    lams = np.asarray(lams, dtype=complex).ravel()
    X, Y = G.x_block, G.y_block
    if G.dim != G.n:
        return np.array([_resolvent_single(G, reg.C, z) for z in lams])
    systems = lams[:, None, None] * X[None] - Y[None]
    out = np.empty((lams.size, G.n, G.n), dtype=complex)
    sv = np.linalg.svd(systems, compute_uv=False)
    with np.errstate(all="ignore"):
        cond = sv[:, 0] / sv[:, -1]
    good = (sv[:, -1] > 1e3 * G.rank_tol * np.maximum(1.0, np.abs(lams))) & (cond < 1e10)
    if np.any(good):
        out[good] = X[None] @ np.linalg.solve(systems[good], np.broadcast_to(reg.C, (int(good.sum()), G.n, G.n)))
    for i in np.flatnonzero(~good):
        out[i] = _resolvent_single(G, reg.C, lams[i])
    return out


def resolvent_chain_check(G: MloGraph, C, lam) -> bool:
    """Both inclusions
    ``(lam-A)^(-1) C A  subset  lam (lam-A)^(-1) C - C  subset  A (lam-A)^(-1) C``."""
    reg = _as_regularizer(C, G.n)
    R = resolvent_c(G, reg, lam)
    first = MloGraph(G.n, np.vstack([G.x_block, R @ G.y_block]))
    middle = from_matrix(lam * R - reg.C)
    last = compose(G, from_matrix(R))
    return includes(middle, first) and includes(last, middle)


def prop_lav_check(G: MloGraph, C, lam, relative: bool = False) -> float:
    """Gap between ``(lam - A^(-1))^(-1) C`` and
    ``lam^(-1) [C - lam^(-1) (lam^(-1) - A)^(-1) C]`` in operator norm.

    With ``relative`` the gap is divided by ``1 + ||lhs|| + ||rhs||``.
    """
    lam = complex(lam)
    if lam == 0:
        raise DomainError("lambda must be nonzero")
    reg = _as_regularizer(C, G.n)
    inner = resolvent_c(G, reg, 1 / lam)
    lhs = resolvent_c(inverse(G), reg, lam)
    rhs = (reg.C - inner / lam) / lam
    gap = float(np.linalg.norm(lhs - rhs, 2))
    if relative:
        gap /= 1.0 + np.linalg.norm(lhs, 2) + np.linalg.norm(rhs, 2)
    return gap


def closure_identity_check(A, B) -> bool:
    """Whether the inverse of the graph of ``A B^(-1)`` equals the graph of
    ``B A^(-1)`` (closures are trivial in finite dimension)."""
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    B = np.atleast_2d(np.asarray(B, dtype=complex))
    lhs = inverse(from_pencil(B, A))
    rhs = from_pencil(A, B)
    return same_subspace(lhs, rhs)


def sector_bound_check(G: MloGraph, C, alpha: float, beta: float, gamma_prime: float, samples: int = 64) -> float:
    """Maximum of ``||lam^(alpha+beta) (lam^alpha - A)^(-1) C||`` over
    ``|arg lam| <= pi/2 + gamma_prime``, ``0 < |lam| <= 1``.

    The grid is ``samples`` log-spaced radii in [1e-4, 1] times ``samples``
    angles including both edges of the sector.
    """
    if not 0 < alpha < 2:
        raise DomainError("alpha must lie in (0, 2)")
    if beta < 0:
        raise DomainError("beta must be nonnegative")
    half = math.pi / 2 + gamma_prime
    if not 0 < half < math.pi:
        raise DomainError("gamma_prime must lie in (-pi/2, pi/2)")
    reg = _as_regularizer(C, G.n)
    radii = np.geomspace(1e-4, 1.0, samples)
    angles = np.linspace(-half, half, samples)
    lam = (radii[:, None] * np.exp(1j * angles[None, :])).ravel()
    mu = lam**alpha
    best = 0.0
    for chunk in np.array_split(np.arange(lam.size), max(1, lam.size // 2048)):
        try:
            res = resolvent_batch(G, reg, mu[chunk])
        except NotInResolventSet as exc:
            idx = chunk[np.argmin(np.abs(mu[chunk] - exc.lam))] if exc.lam is not None else chunk[0]
            raise NotInResolventSet(exc.reason, complex(lam[idx]), "sampled point of the sector") from exc
        norms = np.linalg.norm(res, ord=2, axis=(1, 2)) * np.abs(lam[chunk]) ** (alpha + beta)
        best = max(best, float(norms.max()))
    return best

# }}}
