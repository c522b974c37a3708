"""(a,k)-regularized C-resolvent families: construction, verification and
subordination to families generated by the inverse operator.

Families are stored sampled on a time grid together with an evaluator that
recomputes them at arbitrary times, and (when available) their Laplace
transform as an analytic function.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy import linalg

from .errors import ContourError, DomainError, GridError, TailError, VerificationError, WeightError
from .kernels import Kernel, SubordinationSpec, convolve, make_power, transform_pair
from .laplace import ContourSpec, _gl_panels, _sector_nodes, forward_transform, invert
from .mlo import MloGraph, Regularizer, _as_regularizer, inverse, resolvent_batch
from .specfun import SampledFunction, bessel_j, wright_phi_negative

__all__ = [
    "DEFAULT_GRID",
    "WeightSpec",
    "Growth",
    "OperatorFamily",
    "construct_family",
    "verify_uniqueness_eq",
    "verify_existence_eq",
    "verify_inverse_laplace_conditions",
    "bessel_subordinate",
    "wright_subordinate",
    "subordinate_general",
    "contour_family",
    "growth_estimate",
    "laplace_gap",
    "commutation_residual",
    "subgenerator_inclusion_residual",
    "compare_integration_orders",
    "family_to_csv",
]

DEFAULT_GRID = np.geomspace(1e-3, 20.0, 60)


@dataclass(frozen=True)
class WeightSpec:
    """Weight ``w(t)`` used to normalize a family when bounding its growth.

    Kinds: ``power`` (``t^gamma``), ``mixed``
    (``t^gamma (1 + t^(beta-delta) + t^beta)``), ``wright_F`` and ``exp``
    (``e^(omega t)``).
    """

    kind: str
    gamma: float = 0.0
    beta: float = 0.0
    delta: float = 0.0
    sigma: float = 0.0
    eta: float = 0.0
    a: float = 0.0
    b: float = 0.0
    omega: float = 0.0

    @classmethod
    def power(cls, gamma):
        return cls("power", gamma=gamma)

    @classmethod
    def mixed(cls, gamma, beta, delta):
        return cls("mixed", gamma=gamma, beta=beta, delta=delta)

    @classmethod
    def wright_F(cls, sigma, eta, beta, a, b):
        return cls("wright_F", sigma=sigma, eta=eta, beta=beta, a=a, b=b)

    @classmethod
    def exp(cls, omega):
        return cls("exp", omega=omega)

    @property
    def integration_order(self) -> float:
        if self.kind in ("power", "mixed"):
            return self.gamma
        if self.kind == "wright_F":
            return abs(self.sigma) * (self.eta - self.beta - 1)
        return 0.0

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "power":
            return t**self.gamma
        if self.kind == "mixed":
            return t**self.gamma * (1 + t ** (self.beta - self.delta) + t**self.beta)
        if self.kind == "exp":
            return np.exp(self.omega * t)
        s = abs(self.sigma)
        small = t ** (s * (self.eta - self.b - 1))
        large = t ** (s * (self.eta - self.a - 1))
        return t ** self.integration_order + np.where(t <= 1, small, large)


@dataclass(frozen=True)
class Growth:
    omega: float = 0.0
    weight: WeightSpec | None = None


@dataclass(frozen=True, eq=False)
class OperatorFamily:
    """Operator family ``R(t)`` sampled on ``grid`` (``mats[i] = R(grid[i])``).

    ``evaluator`` maps a 1-D time array to matrices; ``symbol`` maps a 1-D
    array of ``lam`` to the Laplace transform. ``poles`` lists known
    isolated singularities of the symbol.
    """

    grid: np.ndarray
    mats: np.ndarray
    kernel_a: Kernel
    kernel_k: Kernel
    regularizer: Regularizer
    subgen: MloGraph
    growth: Growth = field(default_factory=Growth)
    evaluator: Callable | None = None
    symbol: Callable | None = None
    poles: tuple = ()

    @property
    def n(self) -> int:
        return self.mats.shape[1]

    def at(self, t) -> np.ndarray:
        """Family values at times ``t`` (shape ``t.shape + (n, n)``)."""
        t_arr = np.asarray(t, dtype=float)
        flat = np.atleast_1d(t_arr).ravel()
        if np.any(flat < 0):
            raise DomainError("families live on t >= 0")
        out = np.empty((flat.size, self.n, self.n), dtype=complex)
        pos = flat > 0
        if np.any(~pos):
            k0 = complex(self.kernel_k(0.0))
            if not np.isfinite(k0):
                raise DomainError("the family is singular at t = 0")
            out[~pos] = k0 * self.regularizer.C
        if np.any(pos):
            if self.evaluator is not None:
                out[pos] = self.evaluator(flat[pos])
            else:
                rows = self.mats.reshape(self.grid.size, -1)
                out[pos] = np.stack(
                    [np.interp(flat[pos], self.grid, c.real) + 1j * np.interp(flat[pos], self.grid, c.imag) for c in rows.T],
                    axis=-1,
                ).reshape(-1, self.n, self.n)
        return out.reshape(t_arr.shape + (self.n, self.n))

    def laplace(self, lam) -> np.ndarray:
        """Laplace transform at ``lam``; analytic if a symbol is attached,
        otherwise by quadrature of the evaluator."""
        lam = np.atleast_1d(np.asarray(lam, dtype=complex))
        if self.symbol is not None:
            return self.symbol(lam)
        return forward_transform(self.at, lam, growth=self.growth.omega)

    def scalar(self) -> np.ndarray:
        """Sampled values of a 1x1 family."""
        return self.mats[:, 0, 0]


def family_to_csv(fam: OperatorFamily, path, times=None) -> None:
    """Write ``t`` then row-major entries as interleaved real/imaginary
    columns."""
    t = fam.grid if times is None else np.asarray(times, dtype=float)
    mats = fam.mats if times is None else fam.at(t)
    n = fam.n
    header = ["t"]
    for i in range(n):
        for j in range(n):
            header += [f"re_{i}_{j}", f"im_{i}_{j}"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for ti, m in zip(t, mats):
            row = [repr(float(ti))]
            for v in m.ravel():
                row += [repr(float(v.real)), repr(float(v.imag))]
            writer.writerow(row)


# construction {{{

def _pencil_eigenvalues(G: MloGraph) -> np.ndarray:
    if G.dim != G.n:
        return np.empty(0, dtype=complex)
    vals = linalg.eigvals(G.y_block, G.x_block)
    return vals[np.isfinite(vals)]


def _power_poles(G: MloGraph, a: Kernel) -> np.ndarray:
    """Singularities of ``(1/a~(lam) - A)^(-1)`` for power kernels."""
    if a.kind != "power":
        return np.empty(0, dtype=complex)
    mu = _pencil_eigenvalues(G)
    mu = mu[(np.abs(mu) > 1e-14) & (np.abs(np.angle(mu)) < a.alpha * math.pi)]
    return np.abs(mu) ** (1 / a.alpha) * np.exp(1j * np.angle(mu) / a.alpha)


def construct_family(G: MloGraph, C, a: Kernel, k: Kernel, grid=None, contour: ContourSpec | None = None) -> OperatorFamily:
    """Family with Laplace transform ``k~(lam) (I - a~(lam) A)^(-1) C``.

    The symbol is evaluated through C-resolvents of ``A`` at
    ``1/a~(lam)`` and inverted on a Talbot contour shifted past any
    growing mode.
    """
    reg = _as_regularizer(C, G.n)
    grid = DEFAULT_GRID if grid is None else np.asarray(grid, dtype=float)
    poles = _power_poles(G, a)
    omega = max(0.0, float(np.max(poles.real))) if poles.size else 0.0
    spec = contour if contour is not None else ContourSpec(shift=omega)

    def symbol(lam):
        lam = np.atleast_1d(np.asarray(lam, dtype=complex))
        av = np.atleast_1d(a.laplace(lam))
        kv = np.atleast_1d(k.laplace(lam))
        if np.any(av == 0):
            raise ContourError("a~(lambda) vanishes on the contour")
        return (kv / av)[:, None, None] * resolvent_batch(G, reg, 1.0 / av)

    def evaluator(t):
        return invert(symbol, np.asarray(t, dtype=float), spec, poles=poles)

    mats = evaluator(grid)
    return OperatorFamily(grid, mats, a, k, reg, G, Growth(omega), evaluator, symbol, tuple(poles))

# }}}

# verification {{{

def _verification_grid(fam: OperatorFamily) -> np.ndarray:
    if fam.evaluator is None:
        if fam.grid.size < 3:
            raise GridError("need at least three samples to verify a family")
        return fam.grid
    t0, t1 = fam.grid[0], fam.grid[-1]
    head = np.geomspace(t0, min(1.0, t1), 200)
    tail = np.arange(1.0, t1, 0.01) if t1 > 1 else np.empty(0)
    return np.unique(np.concatenate([head, tail, [t1]]))


def verify_uniqueness_eq(fam: OperatorFamily, G: MloGraph, C2=None) -> float:
    """Largest ``|R(t)x - k(t) C2 x - (a * R(.) y)(t)|`` over graph basis
    pairs ``(x, y)`` and a dense time grid."""
    reg = _as_regularizer(fam.regularizer if C2 is None else C2, G.n)
    t = _verification_grid(fam)
    R = fam.at(t)
    X, Y = G.x_block, G.y_block
    conv = convolve(fam.kernel_a, SampledFunction(t, R @ Y)).values
    kt = np.asarray(fam.kernel_k(t))
    resid = R @ X - kt[:, None, None] * (reg.C @ X)[None] - conv
    return float(np.max(np.linalg.norm(resid, axis=1)))


def verify_existence_eq(fam: OperatorFamily, G: MloGraph, C1=None) -> float:
    """Largest distance of ``((a * R(.) y)(t), R(t) y - k(t) C1 y)`` from
    the graph of ``G`` over unit vectors ``y`` and a dense time grid."""
    reg = _as_regularizer(fam.regularizer if C1 is None else C1, G.n)
    t = _verification_grid(fam)
    R = fam.at(t)
    conv = convolve(fam.kernel_a, SampledFunction(t, R)).values
    kt = np.asarray(fam.kernel_k(t))
    second = R - kt[:, None, None] * reg.C[None]
    pairs = np.concatenate([conv, second], axis=1)
    Q = G.basis
    resid = pairs - Q @ (Q.conj().T @ pairs)
    return float(np.max(np.linalg.norm(resid, axis=1)))


def verify_inverse_laplace_conditions(fam: OperatorFamily, G: MloGraph, C=None, lam_samples=(1.0, 2.0)) -> dict:
    """Laplace-domain conditions certifying that ``fam`` is subgenerated by
    the inverse of ``G``.

    ``"arenq"``: distance of ``(u, a~ u - a~ k~ C y)`` from the graph of
    ``G`` with ``u`` the transform of ``k C y - R y``. ``"aren"``: gap in
    ``k~ C x = R~ x - a~ R~ y`` over graph pairs ``(y, x)``. The family's
    transform is computed by quadrature of its time values.
    """
    reg = _as_regularizer(fam.regularizer if C is None else C, G.n)
    lams = np.atleast_1d(np.asarray(lam_samples, dtype=complex))
    if np.any(lams.real <= fam.growth.omega):
        raise TailError("sample points must lie right of the growth bound")
    Rt = forward_transform(fam.at, lams, growth=fam.growth.omega)
    Rt = Rt.reshape(lams.size, fam.n, fam.n)
    at = np.atleast_1d(fam.kernel_a.laplace(lams))
    kt = np.atleast_1d(fam.kernel_k.laplace(lams))
    Q = G.basis
    worst_q, worst_n = 0.0, 0.0
    for i in range(lams.size):
        u = kt[i] * reg.C - Rt[i]
        pair = np.vstack([u, at[i] * u - at[i] * kt[i] * reg.C])
        resid = pair - Q @ (Q.conj().T @ pair)
        worst_q = max(worst_q, float(np.max(np.linalg.norm(resid, axis=0))))
        y, x = G.x_block, G.y_block
        gap = kt[i] * reg.C @ x - (Rt[i] @ x - at[i] * Rt[i] @ y)
        worst_n = max(worst_n, float(np.max(np.linalg.norm(gap, axis=0))))
    return {"arenq": worst_q, "aren": worst_n}


def laplace_gap(fam: OperatorFamily, lams, reference: Callable) -> float:
    """Largest relative gap between the quadrature transform of ``fam`` and
    ``reference(lams)``."""
    lams = np.atleast_1d(np.asarray(lams, dtype=complex))
    num = forward_transform(fam.at, lams, growth=fam.growth.omega).reshape(lams.size, fam.n, fam.n)
    ref = np.asarray(reference(lams)).reshape(num.shape)
    return float(np.max(np.abs(num - ref)) / max(1.0, float(np.max(np.abs(ref)))))


def growth_estimate(fam: OperatorFamily, w: WeightSpec) -> float:
    """``max ||R(t)|| / w(t)`` over the sample grid."""
    norms = np.linalg.norm(fam.mats, ord=2, axis=(1, 2))
    return float(np.max(norms / w(fam.grid)))


def commutation_residual(fam: OperatorFamily) -> float:
    C = fam.regularizer.C
    return float(np.max(np.abs(fam.mats @ C - C @ fam.mats)))


def subgenerator_inclusion_residual(fam: OperatorFamily, G: MloGraph | None = None) -> float:
    """Largest distance of ``(R(t) x, R(t) y)`` from the graph for graph
    pairs ``(x, y)``, i.e. the defect in ``R(t) A subset A R(t)``."""
    G = fam.subgen if G is None else G
    X, Y = G.x_block, G.y_block
    moved = np.concatenate([fam.mats @ X, fam.mats @ Y], axis=1)
    Q = G.basis
    resid = moved - Q @ (Q.conj().T @ moved)
    scale = max(1.0, float(np.max(np.abs(fam.mats))))
    return float(np.max(np.linalg.norm(resid, axis=1)) / scale)

# }}}

# subordination {{{

def _norms(mats: np.ndarray) -> np.ndarray:
    return np.linalg.norm(mats, ord=2, axis=(-2, -1))


def _bounded_after(ratio: np.ndarray, t: np.ndarray) -> bool:
    """Heuristic boundedness of a sampled ratio: neither a power-law blow-up
    at the small-time end nor exponential growth at the large-time end."""
    ratio = np.maximum(ratio, 1e-300)
    third = max(3, t.size // 3)
    lt, lr = np.log(t[:third]), np.log(ratio[:third])
    head = np.polyfit(lt, lr, 1)[0]
    if head <= -0.05:
        # a power blow-up keeps its slope down to t = 0, a bounded ratio flattens out
        half = third // 2
        inner = np.polyfit(lt[:half], lr[:half], 1)[0]
        outer = np.polyfit(lt[half:], lr[half:], 1)[0]
        if inner > 0.75 * outer:
            head = 0.0
    tail = np.polyfit(t[-third:], np.log(ratio[-third:]), 1)[0]
    return head > -0.05 and tail < 0.05 and float(np.max(ratio)) < 1e6 * max(float(np.median(ratio)), 1e-300)


def _decay_cutoff(values_at: Callable, start: float = 1e-2, stop: float = 1e4, rel: float = 1e-15):
    """Point beyond which sampled operator norms stay below ``rel`` times
    their peak, or ``None`` if no such point is seen before ``stop``."""
    probe = np.geomspace(start, stop, 90)
    norms = _norms(values_at(probe))
    big = np.flatnonzero(norms > rel * norms.max())
    last = int(big[-1])
    if last >= probe.size - 1:
        return None
    return float(probe[last + 1])


def _wynn(seq: np.ndarray) -> np.ndarray:
    """Wynn epsilon extrapolation of partial sums along axis 0."""
    prev = np.zeros_like(seq)
    cur = seq.copy()
    best = seq[-1]
    for k in range(1, seq.shape[0]):
        diff = cur[1:] - cur[:-1]
        with np.errstate(divide="ignore", invalid="ignore"):
            nxt = prev[1: cur.shape[0]] + 1.0 / diff
        prev, cur = cur, nxt
        # even columns approximate the limit
        if k % 2 == 0 and np.all(np.isfinite(cur[-1])):
            best = cur[-1]
    return best


def _bessel_tail_integral(S_at, nu: float, t: float, n: int) -> np.ndarray:
    # panels of one half-period of J(2 u sqrt(t)); partial sums extrapolated
    h = math.pi / (2 * math.sqrt(t))
    edges = np.arange(0, 161) * h
    u, w = _gl_panels(edges)
    vals = S_at(u * u)
    weights = w * bessel_j(nu, 2 * u * math.sqrt(t)) * 2 * u ** (1 - nu)
    per_panel = (weights[:, None, None] * vals).reshape(160, 20, n, n).sum(axis=1)
    partial = np.cumsum(per_panel, axis=0)
    with np.errstate(invalid="ignore"):
        early = _wynn(partial[-61:-21])
        late = _wynn(partial[-40:])
    scale = max(1.0, float(np.max(np.abs(late))))
    if not np.all(np.isfinite(late)) or np.max(np.abs(late - early)) > 1e-8 * scale:
        raise TailError("oscillatory Bessel tail could not be certified")
    return late


def bessel_subordinate(S: OperatorFamily, beta: float, gamma: float, delta: float | None = None, grid=None) -> OperatorFamily:
    """Family for the inverse subgenerator via the Bessel kernel.

    ``R(t) = g_(gamma+1)(t) C - t^(nu/2) int_0^inf J_nu(2 sqrt(s t))
    s^(-nu/2) S(s) ds`` with ``nu = 1 + beta + gamma``. ``S`` must be a
    ``(g_alpha, g_(beta+1))`` family with ``t^(-beta) S(t)`` bounded, or
    with ``delta`` given, ``(1 + t^delta)^(-1) S(t)`` bounded.

    Raises
    ------
    WeightError
        When the order condition on ``gamma`` or the boundedness of the
        weighted input fails.
    """
    if beta < 0:
        raise DomainError("beta must be nonnegative")
    if S.kernel_k.kind == "power" and abs(S.kernel_k.alpha - (beta + 1)) > 1e-12:
        raise DomainError("input family must be (g_alpha, g_(beta+1))-regularized")
    t_in = S.grid
    norms = _norms(S.mats)
    if delta is None:
        if not gamma > beta + 0.5:
            raise WeightError(f"need gamma > beta + 1/2, got gamma={gamma}, beta={beta}")
        ok = _bounded_after(norms / t_in**beta, t_in)
        weight = WeightSpec.power(gamma)
    else:
        if not (gamma >= 0 and gamma > 2 * delta + 0.5 - beta):
            raise WeightError("need gamma >= 0 and gamma > 2 delta + 1/2 - beta")
        ok = _bounded_after(norms / (1 + t_in**delta), t_in)
        weight = WeightSpec.mixed(gamma, beta, delta)
    if not ok:
        raise WeightError("the weighted input family does not look bounded")
    nu = 1.0 + beta + gamma
    C = S.regularizer.C
    n = S.n
    cutoff = _decay_cutoff(S.at)
    k_out = make_power(gamma + 1)

    def evaluator(t):
        t = np.asarray(t, dtype=float)
        if cutoff is not None:
            t_max = float(t.max())
            u_max = math.sqrt(cutoff)
            width = min(0.25, math.pi / (4 * math.sqrt(t_max)))
            u, w = _gl_panels(_graded_start(np.linspace(0, u_max, max(2, math.ceil(u_max / width)) + 1)))
            vals = S.at(u * u).reshape(u.size, -1)
            out = np.empty((t.size, n * n), dtype=complex)
            base = w * 2 * u ** (1 - nu)
            for chunk in np.array_split(np.arange(t.size), max(1, t.size * u.size // 2_000_000)):
                J = bessel_j(nu, 2 * np.sqrt(t[chunk])[:, None] * u[None, :])
                out[chunk] = (J * base) @ vals
            S0 = out.reshape(t.size, n, n)
        else:
            S0 = np.array([_bessel_tail_integral(S.at, nu, float(tt), n) for tt in t])
        S0 = S0 * (t ** (nu / 2))[:, None, None]
        return np.asarray(k_out(t))[:, None, None] * C[None] - S0

    def symbol(lam):
        lam = np.atleast_1d(np.asarray(lam, dtype=complex))
        inner = S.laplace(1.0 / lam)
        return (lam ** (-(1 + gamma)))[:, None, None] * C[None] - (lam ** (-(2 + beta + gamma)))[:, None, None] * inner

    grid = S.grid if grid is None else np.asarray(grid, dtype=float)
    poles = tuple(1.0 / p for p in S.poles if abs(p) > 1e-14)
    return OperatorFamily(grid, evaluator(grid), S.kernel_a, k_out, S.regularizer, inverse(S.subgen),
                          Growth(0.0, weight), evaluator, symbol if S.symbol is not None else None, poles)


def _wright_cutoff(rho: float, nu: float) -> float:
    x = np.geomspace(0.5, 5e3, 400)
    vals = np.abs(wright_phi_negative(rho, nu, x))
    big = np.flatnonzero(vals > 1e-16)
    return float(x[min(int(big[-1]) + 1, x.size - 1)]) if big.size else 0.5


def _smooth_after(fam: OperatorFamily):
    """Time after which every hinted pole term of ``fam`` has decayed below
    1e-16, leaving only the slowly varying branch-point part; ``None`` if
    unknown or never."""
    if fam.symbol is None or not fam.poles:
        return None
    re = np.array([complex(p).real for p in fam.poles])
    if np.any(re >= 0):
        return None
    return float(37.0 / np.min(-re))


def _wright_panels(rho: float, x_phi: float, t_max: float, s_max: float, smooth_after) -> np.ndarray:
    """Panel edges on ``[0, s_max]`` resolving ``phi(rho, nu; -s t^rho)``
    for every ``t <= t_max`` with ``s t^rho <= x_phi`` and the input family
    (unit scale until ``smooth_after``)."""
    # phase rate of phi(-x) in x is about c x^(-rho/(1+rho)) for large x
    c = rho ** (rho / (1 + rho)) * math.sin(math.pi / (1 + rho))
    w_min = min(1.0, t_max ** (-rho))
    edges = [0.0]
    while edges[-1] < s_max:
        s = edges[-1]
        t_eff = t_max if s == 0 else min(t_max, (x_phi / s) ** (1 / rho))
        x = max(1.0, s * t_eff**rho)
        w_phi = 3.0 * x ** (rho / (1 + rho)) / (c * t_eff**rho)
        cap = 1.0 if smooth_after is None or s < smooth_after else math.inf
        edges.append(s + max(w_min, min(0.25 * s, cap, w_phi)) if s > 0 else w_min)
    edges[-1] = s_max
    return _graded_start(np.asarray(edges))


def _graded_start(edges: np.ndarray, levels: int = 40) -> np.ndarray:
    # geometric refinement of the first panel for algebraic behaviour at 0
    first = edges[1]
    return np.concatenate([[0.0], first * 0.5 ** np.arange(levels, 0, -1), edges[1:]])


def wright_subordinate(R: OperatorFamily, sigma: float, eta: float, beta: float, a_exp: float, b_exp: float,
                       grid=None) -> OperatorFamily:
    """Family for the inverse subgenerator via the Wright kernel.

    ``S(t) = g_(1+|sigma|(eta-beta-1))(t) C - S0(t)`` with
    ``S0(t) = t^(rho eta) int_0^inf phi(rho, 1 + rho eta; -s t^rho) R(s) ds``
    and ``rho = -sigma``. ``R`` is a ``(g_alpha, g_(beta+1))`` family with
    ``(t^a + t^b)^(-1) R(t)`` bounded.
    """
    if not -1 < sigma < 0:
        raise DomainError("sigma must lie in (-1, 0)")
    if not -1 < a_exp <= b_exp:
        raise WeightError("need -1 < a <= b")
    if not (eta > 1 + b_exp and eta >= 1 + beta):
        raise WeightError(f"need eta > 1 + b and eta >= 1 + beta (eta={eta}, b={b_exp}, beta={beta})")
    if R.kernel_k.kind == "power" and abs(R.kernel_k.alpha - (beta + 1)) > 1e-12:
        raise DomainError("input family must be (g_alpha, g_(beta+1))-regularized")
    if not _bounded_after(_norms(R.mats) / (R.grid**a_exp + R.grid**b_exp), R.grid):
        raise WeightError("the weighted input family does not look bounded")
    rho = -sigma
    nu = 1.0 + rho * eta
    order = rho * (eta - beta - 1)
    k_out = make_power(1.0 + order)
    x_phi = _wright_cutoff(rho, nu)
    s_decay = _decay_cutoff(R.at)
    smooth_after = _smooth_after(R)
    C = R.regularizer.C
    n = R.n

    def evaluator(t):
        t = np.asarray(t, dtype=float)
        t_max, t_min = float(t.max()), float(t.min())
        s_max = x_phi * t_min ** (-rho)
        if s_decay is not None:
            s_max = min(s_max, s_decay)
        if s_max > 1e5:
            raise TailError("Wright subordination integral needs too long a range at small t")
        edges = _wright_panels(rho, x_phi, t_max, s_max, smooth_after)
        s, w = _gl_panels(np.asarray(edges))
        vals = R.at(s).reshape(s.size, -1)
        out = np.zeros((t.size, n * n), dtype=complex)
        for chunk in np.array_split(np.arange(t.size), max(1, t.size * s.size // 1_000_000)):
            x = (t[chunk] ** rho)[:, None] * s[None, :]
            phi = np.zeros_like(x)
            live = x <= x_phi
            phi[live] = wright_phi_negative(rho, nu, x[live])
            out[chunk] = (phi * w) @ vals
        S0 = out.reshape(t.size, n, n) * (t ** (rho * eta))[:, None, None]
        return np.asarray(k_out(t))[:, None, None] * C[None] - S0

    def symbol(lam):
        lam = np.atleast_1d(np.asarray(lam, dtype=complex))
        inner = R.laplace(lam**sigma)
        return (lam ** (-(1 + order)))[:, None, None] * C[None] - (lam ** (-1 + sigma * eta))[:, None, None] * inner

    if R.kernel_a.kind == "power":
        a_out = make_power(R.kernel_a.alpha * rho)
    else:
        a_out = transform_pair(R.kernel_a, R.kernel_k, SubordinationSpec("power", -1 + sigma * eta, sigma=sigma))[0]
    grid = R.grid if grid is None else np.asarray(grid, dtype=float)
    poles = tuple(p ** (1 / sigma) for p in R.poles if abs(np.angle(p)) < rho * math.pi and abs(p) > 1e-14)
    return OperatorFamily(grid, evaluator(grid), a_out, k_out, R.regularizer, inverse(R.subgen),
                          Growth(0.0, WeightSpec.wright_F(sigma, eta, beta, a_exp, b_exp)), evaluator,
                          symbol if R.symbol is not None else None, poles)


def subordinate_general(R: OperatorFamily, spec: SubordinationSpec, grid=None, check: bool = True) -> OperatorFamily:
    """Family ``S = k1 C - S0`` for the inverse subgenerator, where
    ``S0`` has Laplace transform ``G(lam) R~(f(lam))``.

    ``S0`` is obtained by numerical inversion. With ``check`` the sampled
    ``S0`` is transformed back and compared against the symbol.

    Raises
    ------
    VerificationError
        If the round trip misses by more than 1e-6 (relative).
    """
    b, k1 = transform_pair(R.kernel_a, R.kernel_k, spec)
    C = R.regularizer.C
    n = R.n

    def s0_symbol(lam):
        lam = np.atleast_1d(np.asarray(lam, dtype=complex))
        return spec.multiplier(lam)[:, None, None] * R.laplace(spec.f(lam))

    if R.symbol is not None:
        fe = spec.f_exponent
        poles = []
        for p in R.poles:
            if abs(p) < 1e-14:
                continue
            if fe == -1.0:
                poles.append(1.0 / p)
            elif abs(np.angle(p)) < abs(fe) * math.pi:
                poles.append(p ** (1 / fe))
        poles = np.asarray(poles, dtype=complex)
        shift = max(spec.omega0, float(np.max(poles.real)) if poles.size else 0.0)
        contour = ContourSpec(shift=shift)
    else:
        poles = np.empty(0, dtype=complex)
        contour = ContourSpec("bromwich", shift=spec.omega0 + max(R.growth.omega, 0.0) + 0.5)

    def evaluator(t):
        t = np.asarray(t, dtype=float)
        S0 = invert(s0_symbol, t, contour, poles=poles).reshape(t.size, n, n)
        return np.asarray(k1(t))[:, None, None] * C[None] - S0

    grid = R.grid if grid is None else np.asarray(grid, dtype=float)
    mats = evaluator(grid)
    if check:
        lams = np.array([2.0, 3.0, 2.5 + 1.0j]) + spec.omega0

        def s0_at(t):
            # below 1e-10 the contribution to the transform is negligible
            t = np.maximum(np.asarray(t, dtype=float), 1e-10)
            return invert(s0_symbol, t, contour, poles=poles).reshape(t.size, n, n)

        num = forward_transform(s0_at, lams, truncation=20.0, growth=spec.omega0)
        ref = s0_symbol(lams)
        gap = float(np.max(np.abs(num - ref)) / max(1.0, float(np.max(np.abs(ref)))))
        if gap > 1e-6:
            raise VerificationError(f"subordinated family fails the Laplace round trip (gap {gap:.2e})")

    def symbol(lam):
        lam = np.atleast_1d(np.asarray(lam, dtype=complex))
        return np.asarray(k1.laplace(lam))[:, None, None] * C[None] - s0_symbol(lam)

    return OperatorFamily(grid, mats, b, k1, R.regularizer, inverse(R.subgen), Growth(spec.omega0, WeightSpec.exp(spec.omega0)),
                          evaluator, symbol if R.symbol is not None else None, tuple(poles))

# }}}


def contour_family(G: MloGraph, C, alpha: float, gamma_prime: float, omega: float, z) -> np.ndarray:
    """``R(z) = C - (1/(2 pi i)) int e^(lam z) (lam^(-alpha) - A)^(-1) C
    lam^(-alpha-1) dlam`` over two rays at angles
    ``+-(pi/2 + gamma_prime)`` from ``omega`` joined by an arc.

    Raises
    ------
    ContourError
        If a singularity of the integrand lies on the wrong side of the
        contour, or the integrand is not finite on it.
    """
    if not 1 <= alpha < 2:
        raise DomainError("alpha must lie in [1, 2)")
    if not 0 < gamma_prime < math.pi / 2:
        raise DomainError("gamma_prime must lie in (0, pi/2)")
    if omega < 0:
        raise DomainError("omega must be nonnegative")
    z = complex(z)
    if z == 0:
        return _as_regularizer(C, G.n).C.copy()
    if abs(np.angle(z)) >= gamma_prime:
        raise DomainError("z must lie in the sector of half-angle gamma_prime")
    reg = _as_regularizer(C, G.n)
    theta = math.pi / 2 + gamma_prime
    spec = ContourSpec("shifted_sector", shift=omega, sector_angle=theta, order=alpha)
    r0 = 1.0 / abs(z)
    for mu in _pencil_eigenvalues(G):
        if abs(mu) < 1e-14:
            continue
        p = np.abs(mu) ** (-1 / alpha) * np.exp(-1j * np.angle(mu) / alpha)
        gap = p - omega
        enclosed = abs(gap) < r0 or abs(np.angle(gap)) > theta
        near = abs(abs(gap) - r0) < 1e-3 * r0 or abs(abs(np.angle(gap)) - theta) < 1e-3
        if not enclosed or near:
            raise ContourError(f"singularity at {p:.4g} is not safely enclosed by the contour")
    lam, w = _sector_nodes(z, spec)
    vals = resolvent_batch(G, reg, lam ** (-alpha)) * (lam ** (-alpha - 1))[:, None, None]
    if not np.all(np.isfinite(vals)):
        raise ContourError("integrand is not finite on the contour")
    return reg.C - np.tensordot(w * np.exp(lam * z), vals, axes=(0, 0))


class SubaComparison(NamedTuple):
    wright_order: float
    bessel_bound: float
    wright_better: bool
    predicted: bool


def compare_integration_orders(weight: WeightSpec) -> SubaComparison:
    """Compare the integration order of a Wright-subordinated family with
    the order the Bessel route needs for the same data (input weight
    exponent ``b``, ``a = 0``): the Wright order is smaller exactly when
    ``|sigma| (eta - 2b - 1) < 1/2``."""
    if weight.kind != "wright_F":
        raise DomainError("expected a wright_F weight")
    s = abs(weight.sigma)
    wright = weight.integration_order
    bessel = 2 * weight.b * s + 0.5 - weight.beta * s
    return SubaComparison(wright, bessel, wright < bessel, s * (weight.eta - 2 * weight.b - 1) < 0.5)
