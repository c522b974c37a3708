"""Scalar kernels with paired time-domain and Laplace-domain access.

A :class:`Kernel` is one of

* ``power``: ``g_alpha(t) = t^(alpha-1)/Gamma(alpha)``, symbol ``lam^(-alpha)``;
* ``rational``: symbol ``num(mu)/den(mu)`` in ``mu = lam^(1/q)`` (descending
  coefficients), time values from partial fractions;
* ``sampled``: values on a grid, symbol by quadrature (cached);
* ``composite``: an arbitrary analytic symbol, time values by inversion.

:func:`transform_pair` builds the pair ``(b, k1)`` with
``b~(lam) = 1/a~(f(lam))`` and ``k1~(lam) = G(lam) k~(f(lam))``.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import signal, special
from scipy.integrate import cumulative_trapezoid

from .errors import DegreeError, DomainError, GridError, SymbolZeroError
from .laplace import forward_transform, invert
from .specfun import SampledFunction, mittag_leffler

__all__ = [
    "Kernel",
    "SubordinationSpec",
    "make_power",
    "make_rational",
    "make_sampled",
    "make_composite",
    "symbol",
    "transform_pair",
    "convolve",
    "estimate_abscissa",
    "bessel_spec",
    "wright_spec",
]

_ROOT_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Kernel:
    kind: str
    growth_abscissa: float = 0.0
    alpha: float | None = None
    num: tuple = ()
    den: tuple = ()
    q: int = 1
    samples: SampledFunction | None = None
    symbol_fn: Callable | None = None
    evaluator: Callable | None = None
    _cache: dict = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    # Laplace side

    def laplace(self, lam):
        """Symbol continued analytically (principal branch) to wherever the
        closed form makes sense; used on inversion contours."""
        lam = np.asarray(lam, dtype=complex)
        if self.kind == "power":
            return lam ** (-self.alpha)
        if self.kind == "rational":
            mu = lam ** (1.0 / self.q) if self.q != 1 else lam
            return np.polyval(self.num, mu) / np.polyval(self.den, mu)
        if self.kind == "composite":
            return np.asarray(self.symbol_fn(lam), dtype=complex)
        return self._sampled_symbol(lam)

    def _sampled_symbol(self, lam):
        flat = lam.ravel()
        out = np.empty(flat.shape, dtype=complex)
        missing = []
        for i, z in enumerate(flat):
            key = complex(z)
            if key in self._cache:
                out[i] = self._cache[key]
            else:
                missing.append(i)
        if missing:
            vals = forward_transform(self.samples, flat[missing], growth=self.growth_abscissa)
            with self._lock:
                for i, v in zip(missing, np.atleast_1d(vals)):
                    self._cache.setdefault(complex(flat[i]), complex(v))
                    out[i] = v
        return out.reshape(lam.shape)

    # time side

    def __call__(self, t):
        tt = np.asarray(t, dtype=float)
        if np.any(tt < 0):
            raise DomainError("kernels live on t >= 0")
        out = self._values(np.atleast_1d(tt).ravel())
        out = out.reshape(tt.shape)
        return out[()] if out.ndim == 0 else out

    def _values(self, t: np.ndarray) -> np.ndarray:
        if self.kind == "power":
            return _power_values(self.alpha, t)
        if self.kind == "sampled":
            grid, vals = self.samples.grid, self.samples.values
            return np.interp(t, grid, vals.real) + (1j * np.interp(t, grid, vals.imag) if np.iscomplexobj(vals) else 0)
        if self.kind == "rational":
            return _rational_values(self.num, self.den, self.q, t)
        if self.evaluator is not None:
            return np.asarray(self.evaluator(t))
        return _inverted_values(self.laplace, t, self.growth_abscissa)

    def integrated(self, t, order: int = 1) -> np.ndarray:
        """Values of ``g_order * kernel`` (the ``order``-fold antiderivative)."""
        t = np.atleast_1d(np.asarray(t, dtype=float))
        if order == 0:
            return self._values(t)
        if self.kind == "power":
            return _power_values(self.alpha + order, t)
        if self.kind == "rational":
            den = tuple(self.den) + (0.0,) * (self.q * order)
            return _rational_values(self.num, den, self.q, t)
        if self.kind == "sampled":
            grid = np.concatenate([[0.0], self.samples.grid]) if self.samples.grid[0] > 0 else self.samples.grid
            vals = self._values(grid)
            for _ in range(order):
                vals = cumulative_trapezoid(vals, grid, initial=0.0)
            return np.interp(t, grid, vals.real) + (1j * np.interp(t, grid, vals.imag) if np.iscomplexobj(vals) else 0)
        return _inverted_values(lambda lam: self.laplace(lam) * lam ** (-order), t, self.growth_abscissa)


def _power_values(alpha: float, t: np.ndarray) -> np.ndarray:
    out = np.empty_like(t)
    pos = t > 0
    out[pos] = t[pos] ** (alpha - 1) * special.rgamma(alpha)
    out[~pos] = 1.0 if alpha == 1 else (0.0 if alpha > 1 else np.inf)
    return out


def _inverted_values(sym, t, growth):
    out = np.zeros(t.shape, dtype=complex)
    pos = t > 0
    if np.any(pos):
        from .laplace import ContourSpec

        out[pos] = invert(lambda lam: sym(lam), t[pos], ContourSpec(shift=max(growth, 0.0)))
    return out.real if np.max(np.abs(out.imag), initial=0) < 1e-9 * max(1.0, np.max(np.abs(out), initial=0)) else out


def _group_poles(poles: np.ndarray):
    """Multiplicity of each pole in the consecutive runs that
    ``scipy.signal.residue`` produces for repeated roots."""
    powers = []
    for i, p in enumerate(poles):
        if i > 0 and abs(p - poles[i - 1]) <= 1e-3 * max(1.0, abs(p)):
            powers.append(powers[-1] + 1)
        else:
            powers.append(1)
    return powers


def _rational_values(num, den, q, t: np.ndarray) -> np.ndarray:
    num = np.trim_zeros(np.asarray(num), "f")
    den = np.trim_zeros(np.asarray(den), "f")
    if np.iscomplexobj(num) or np.iscomplexobj(den):
        num, den = num.astype(complex), den.astype(complex)
    if num.size >= den.size:
        raise DegreeError("a rational kernel needs a strictly proper symbol")
    r, p, _ = signal.residue(num, den)
    powers = _group_poles(p)
    if q == 1:
        out = np.zeros(t.shape, dtype=complex)
        for ri, pi, m in zip(r, p, powers):
            out += ri * t ** (m - 1) / math.factorial(m - 1) * np.exp(pi * t)
    elif max(powers) == 1:
        # 1/(lam^(1/q) - p) is the transform of t^(1/q-1) E_{1/q,1/q}(p t^(1/q))
        order = 1.0 / q
        out = np.zeros(t.shape, dtype=complex)
        pos = t > 0
        for ri, pi in zip(r, p):
            out[pos] += ri * t[pos] ** (order - 1) * mittag_leffler(order, order, pi * t[pos] ** order + 0j)
        out[~pos] = np.inf if (num.size == den.size - 1) else 0.0
    else:
        def sym(lam):
            mu = lam ** (1.0 / q)
            return np.polyval(num, mu) / np.polyval(den, mu)

        return _inverted_values(sym, t, 0.0)
    if np.all(np.abs(out.imag) <= 1e-12 * np.maximum(1.0, np.abs(out.real))):
        return out.real
    return out


def _rational_abscissa(den, q) -> float:
    den = np.trim_zeros(np.asarray(den, dtype=complex), "f")
    roots = np.roots(den) if den.size > 1 else np.empty(0)
    best = 0.0 if q > 1 else -np.inf
    for mu in roots:
        if abs(mu) < _ROOT_TOL:
            best = max(best, 0.0)
            continue
        if abs(np.angle(mu)) < math.pi / q:
            best = max(best, float((mu**q).real))
    return best if np.isfinite(best) else 0.0


# constructors {{{

def make_power(alpha: float) -> Kernel:
    """The kernel ``g_alpha`` with symbol ``lam^(-alpha)``."""
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    return Kernel("power", 0.0, alpha=float(alpha))


def make_rational(num, den, q: int = 1) -> Kernel:
    """Kernel with symbol ``num(mu)/den(mu)``, ``mu = lam^(1/q)``."""
    num = tuple(complex(c) if isinstance(c, complex) else float(c) for c in num)
    den = tuple(complex(c) if isinstance(c, complex) else float(c) for c in den)
    if not any(num):
        raise DomainError("a kernel must be nonzero")
    if not any(den):
        raise DomainError("denominator vanishes identically")
    if int(q) != q or q < 1:
        raise DomainError("q must be a positive integer")
    return Kernel("rational", _rational_abscissa(den, int(q)), num=num, den=den, q=int(q))


def make_sampled(samples: SampledFunction, growth: float = 0.0) -> Kernel:
    if not np.any(samples.values):
        raise DomainError("a kernel must be nonzero")
    return Kernel("sampled", float(growth), samples=samples)


def make_composite(symbol_fn: Callable, evaluator: Callable | None = None, growth: float = 0.0) -> Kernel:
    return Kernel("composite", float(growth), symbol_fn=symbol_fn, evaluator=evaluator)

# }}}


def symbol(kern: Kernel, lam):
    """Laplace symbol of ``kern`` at ``lam`` (scalar or array) with
    ``Re lam`` beyond the growth abscissa."""
    lam_arr = np.asarray(lam, dtype=complex)
    if np.any(lam_arr.real <= kern.growth_abscissa):
        raise DomainError(f"Re(lambda) must exceed the abscissa {kern.growth_abscissa}")
    out = kern.laplace(lam_arr)
    return out[()] if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class SubordinationSpec:
    """Substitution ``lam -> f(lam)`` with multiplier ``G``.

    ``f_kind`` is ``"reciprocal"`` (``f = 1/lam``) or ``"power"``
    (``f = lam^sigma``, ``sigma`` in (-1, 0)). ``G`` is either a callable or a
    float ``g`` standing for ``lam^g``; the float form enables closed forms.
    """

    f_kind: str
    G: Callable | float
    sigma: float = -1.0
    eta: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0
    omega0: float = 0.0
    omega0p: float = 0.0

    def __post_init__(self):
        if self.f_kind not in ("reciprocal", "power"):
            raise DomainError(f"unknown substitution {self.f_kind!r}")
        if self.f_kind == "power" and not -1 < self.sigma < 0:
            raise DomainError("power substitution needs sigma in (-1, 0)")

    def f(self, lam):
        lam = np.asarray(lam, dtype=complex)
        return 1.0 / lam if self.f_kind == "reciprocal" else lam**self.sigma

    def multiplier(self, lam):
        lam = np.asarray(lam, dtype=complex)
        if callable(self.G):
            return np.asarray(self.G(lam), dtype=complex)
        return lam ** float(self.G)

    @property
    def f_exponent(self) -> float:
        return -1.0 if self.f_kind == "reciprocal" else self.sigma


def bessel_spec(beta: float, gamma: float) -> SubordinationSpec:
    """Reciprocal substitution taking a ``(g_alpha, g_{beta+1})`` pair to
    ``(g_alpha, g_{gamma+1})``."""
    return SubordinationSpec("reciprocal", -(2.0 + beta + gamma), beta=beta, gamma=gamma)


def wright_spec(sigma: float, eta: float, beta: float = 0.0) -> SubordinationSpec:
    """Power substitution ``lam^sigma`` with multiplier ``lam^(-1 + sigma eta)``."""
    return SubordinationSpec("power", -1.0 + sigma * eta, sigma=sigma, eta=eta, beta=beta)


def _check_rational_reciprocal(a: Kernel):
    num = np.trim_zeros(np.asarray(a.num, dtype=complex), "f")
    den = np.trim_zeros(np.asarray(a.den, dtype=complex), "f")
    # ascending coefficients: P(lam) = sum a_j lam^(j/q), Q likewise
    if den[-1] != 0:
        raise DegreeError("the denominator needs a vanishing constant term")
    if num[-1] == 0 or num[0] == 0 or den[0] == 0:
        raise DegreeError("need nonzero constant and leading numerator terms and a nonzero leading denominator term")
    if den.size <= num.size:
        raise DegreeError("the denominator degree must exceed the numerator degree")
    for poly, what in ((num, "numerator"), (den, "denominator")):
        if poly.size < 2:
            continue
        for mu in np.roots(poly):
            if abs(mu) > _ROOT_TOL and abs(np.angle(mu)) < math.pi / (2 * a.q) - 1e-12:
                raise SymbolZeroError(f"{what} vanishes at lambda={mu ** a.q} in the right half-plane")


def transform_pair(a: Kernel, k: Kernel, spec: SubordinationSpec) -> tuple[Kernel, Kernel]:
    """Kernels ``b`` and ``k1`` with ``b~ = 1/a~(f)`` and ``k1~ = G k~(f)``.

    Closed forms are returned for power kernels under either substitution
    with a power multiplier, and for rational ``a`` under the reciprocal
    substitution. Otherwise the kernels are composite and their time values
    come from numerical inversion.

    Raises
    ------
    DegreeError
        When a rational ``a`` violates the degree and constant-term
        conditions, or a power ``k1`` would not be locally integrable.
    SymbolZeroError
        When ``a~(f(lam))`` vanishes in the right half-plane.
    """
    fe = spec.f_exponent
    # b
    if a.kind == "power":
        b = make_power(-fe * a.alpha)
    elif a.kind == "rational" and spec.f_kind == "reciprocal":
        _check_rational_reciprocal(a)
        num = np.trim_zeros(np.asarray(a.num, dtype=complex), "f")
        den = np.trim_zeros(np.asarray(a.den, dtype=complex), "f")
        n, m = num.size - 1, den.size - 1
        # b~ = rev(Q)(mu) / (mu^(m-n) rev(P)(mu))
        b_num = np.trim_zeros(den[::-1], "f")
        b_den = np.concatenate([num[::-1], np.zeros(m - n)])
        b = make_rational(_realify(b_num), _realify(b_den), a.q)
    else:
        probe = spec.f(np.array([1.0 + spec.omega0, 2.0 + spec.omega0, 1.0 + 1j + spec.omega0]))
        if np.any(np.abs(a.laplace(probe)) < 1e-300):
            raise SymbolZeroError("a~(f(lambda)) vanishes")
        b = make_composite(lambda lam: 1.0 / a.laplace(spec.f(lam)), growth=spec.omega0)
    # k1
    if k.kind == "power" and not callable(spec.G):
        order = -(float(spec.G) - fe * k.alpha)
        if not order > 0:
            raise DegreeError(f"k1 would have symbol lam^{-order:g}, which is not a kernel")
        k1 = make_power(order)
    else:
        k1 = make_composite(lambda lam: spec.multiplier(lam) * k.laplace(spec.f(lam)), growth=spec.omega0)
    return b, k1


def _realify(c: np.ndarray):
    return tuple(c.real) if np.all(c.imag == 0) else tuple(c)


def estimate_abscissa(kern: Kernel, t_max: float = 200.0) -> float:
    """Exponential growth rate of ``|kern(t)|`` fitted on ``[t_max/2, t_max]``."""
    t = np.array([t_max / 2, t_max])
    vals = np.abs(kern(t))
    if np.any(vals == 0):
        return 0.0
    return max(0.0, float(np.log(vals[1] / vals[0]) / (t_max / 2)))


def convolve(a: Kernel, f: SampledFunction) -> SampledFunction:
    """``(a * f)(t)`` on the grid of ``f``.

    ``f`` is taken piecewise linear (linearly extrapolated down to t = 0)
    and integrated exactly against the kernel through its first and second
    antiderivatives, which keeps weakly singular kernels accurate.
    """
    grid = f.grid
    if grid.size < 2:
        raise GridError("convolution needs at least two grid points")
    if a.kind == "sampled" and a.samples.grid[-1] < grid[-1] - grid[0] - 1e-12:
        raise GridError("the sampled kernel does not cover the convolution range")
    vals = f.values.reshape(grid.size, -1)
    if grid[0] > 0:
        slope = (vals[1] - vals[0]) / (grid[1] - grid[0])
        t = np.concatenate([[0.0], grid])
        vals = np.vstack([vals[0] - slope * grid[0], vals])
    else:
        t = grid
    n = t.size
    diffs = t[:, None] - t[None, :]
    h_all = np.diff(t)
    # panels far from the lag origin (h < u/4) use Gauss-Legendre on the kernel itself;
    # the antiderivative differences below lose ~eps (u/h)^2 there
    far = np.zeros((n, n - 1), dtype=bool)
    far[:, :] = h_all[None, :] < 0.25 * diffs[:, 1:]
    near = (diffs[:, 1:] >= 0) & ~far
    lags = np.unique(np.clip(diffs[:, 1:][near], 0, None).tolist() + np.clip(diffs[:, :-1][near], 0, None).tolist())
    a1_tab = a.integrated(lags, 1) if lags.size else np.empty(0)
    a2_tab = a.integrated(lags, 2) if lags.size else np.empty(0)
    weights = np.zeros((n, n), dtype=np.result_type(a1_tab, float))
    nodes, gw = np.polynomial.legendre.leggauss(4)
    frac = (1 + nodes) / 2
    for j in range(n - 1):
        h = h_all[j]
        u0 = diffs[:, j]
        u1 = diffs[:, j + 1]
        rows = np.flatnonzero(far[:, j])
        if rows.size:
            v = u0[rows, None] - h * frac[None, :]
            av = np.asarray(a._values(v.ravel())).reshape(v.shape) * (h * gw / 2)
            if np.iscomplexobj(av) and not np.iscomplexobj(weights):
                weights = weights.astype(complex)
            weights[rows, j + 1] += av @ frac
            weights[rows, j] += av @ (1 - frac)
        rows = np.flatnonzero(near[:, j])
        if rows.size:
            i0 = np.searchsorted(lags, np.clip(u0[rows], 0, None))
            i1 = np.searchsorted(lags, np.clip(u1[rows], 0, None))
            a1_0, a1_1 = a1_tab[i0], a1_tab[i1]
            A1d = a1_0 - a1_1
            moment = u0[rows] * A1d - (u0[rows] * a1_0 - u1[rows] * a1_1 - (a2_tab[i0] - a2_tab[i1]))
            weights[rows, j + 1] += moment / h
            weights[rows, j] += A1d - moment / h
    out = weights @ vals
    if grid[0] > 0:
        out = out[1:]
    return SampledFunction(grid, out.reshape(f.values.shape))
