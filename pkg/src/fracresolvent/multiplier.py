"""Fourier-multiplier calculus on a periodic grid and the degenerate
fractional problems built on it.

Operators ``u(A)`` with ``A = -i d/dx`` are realized on a discrete torus by
pointwise multiplication in frequency space, so every symbol computation is
exact up to the FFT. Frequencies are ``2 pi k / L`` with integer ``k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy.special import roots_jacobi

from .errors import (
    BranchError,
    CompatibilityError,
    DivisionError,
    DomainError,
    ShapeError,
    TruncationError,
    VerificationError,
)
from .kernels import make_power
from .mlo import MloGraph, _null, resolvent_c
from .resolvent import DEFAULT_GRID, OperatorFamily, construct_family, wright_subordinate
from .specfun import SampledFunction, caputo_derivative, g_kernel, mittag_leffler

__all__ = [
    "PolySymbol",
    "TorusGrid",
    "MultiplierSymbol",
    "DfpProblem",
    "SpectralCheck",
    "spectral_condition",
    "default_gamma",
    "regularizer_symbol",
    "s_alpha_symbol",
    "apply_multiplier",
    "multiplier_norm",
    "fit_growth_exponent",
    "symbol_zeros",
    "solve_dfp",
    "dfp_residual",
    "poisson_wave_operator",
    "poisson_wave_demo",
]


@dataclass(frozen=True)
class PolySymbol:
    """Polynomial ``sum a_eta xi^eta`` in ``n_vars`` real variables.

    ``terms`` maps exponent tuples to coefficients; zero coefficients are
    dropped.
    """

    n_vars: int
    terms: dict

    def __post_init__(self):
        if self.n_vars < 1:
            raise DomainError("a symbol needs at least one variable")
        clean = {}
        for eta, c in self.terms.items():
            eta = (eta,) if isinstance(eta, int) else tuple(int(e) for e in eta)
            if len(eta) != self.n_vars or min(eta) < 0:
                raise DomainError(f"bad multi-index {eta} for {self.n_vars} variables")
            if c != 0:
                clean[eta] = clean.get(eta, 0) + complex(c)
        object.__setattr__(self, "terms", clean)

    @classmethod
    def univariate(cls, coeffs) -> "PolySymbol":
        """From ascending coefficients ``[c0, c1, ...]`` of ``sum c_j xi^j``."""
        return cls(1, {(j,): c for j, c in enumerate(coeffs)})

    @classmethod
    def minus_abs_squared(cls, n_vars: int) -> "PolySymbol":
        """``-|xi|^2``, the symbol of the Laplacian."""
        return cls(n_vars, {tuple(2 if i == j else 0 for i in range(n_vars)): -1 for j in range(n_vars)})

    @property
    def degree(self) -> int:
        return max((sum(eta) for eta in self.terms), default=0)

    def __call__(self, xi) -> np.ndarray:
        """Evaluate at frequencies ``xi``: a sequence of ``n_vars`` arrays
        (e.g. ``TorusGrid.xi``) or, for one variable, a single array."""
        if isinstance(xi, TorusGrid):
            xi = xi.xi
        if self.n_vars == 1 and not isinstance(xi, (list, tuple)):
            xi = [np.asarray(xi)]
        if len(xi) != self.n_vars:
            raise ShapeError(f"expected {self.n_vars} frequency arrays")
        xi = [np.asarray(v, dtype=float) for v in xi]
        out = np.zeros(np.broadcast_shapes(*(v.shape for v in xi)), dtype=complex)
        for eta, c in self.terms.items():
            mono = np.ones_like(out)
            for v, e in zip(xi, eta):
                if e:
                    mono = mono * v**e
            out = out + c * mono
        return out


@dataclass(frozen=True)
class TorusGrid:
    """Tensor grid on the torus ``prod [0, L_j)`` with power-of-two sizes."""

    sizes: tuple
    lengths: tuple

    def __post_init__(self):
        sizes = tuple(int(s) for s in np.atleast_1d(self.sizes))
        lengths = tuple(float(v) for v in np.atleast_1d(self.lengths))
        if len(lengths) == 1 and len(sizes) > 1:
            lengths = lengths * len(sizes)
        if len(sizes) != len(lengths):
            raise ShapeError("one length per axis is required")
        if any(s < 2 or s & (s - 1) for s in sizes):
            raise ShapeError(f"grid sizes must be powers of two, got {sizes}")
        if any(v <= 0 for v in lengths):
            raise DomainError("torus lengths must be positive")
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "lengths", lengths)

    @property
    def n(self) -> int:
        return len(self.sizes)

    @property
    def shape(self) -> tuple:
        return self.sizes

    @property
    def xi(self) -> list:
        axes = [2 * np.pi * np.fft.fftfreq(s, d=L / s) for s, L in zip(self.sizes, self.lengths)]
        return np.meshgrid(*axes, indexing="ij")

    @property
    def x(self) -> list:
        axes = [np.arange(s) * (L / s) for s, L in zip(self.sizes, self.lengths)]
        return np.meshgrid(*axes, indexing="ij")


@dataclass(frozen=True, eq=False)
class MultiplierSymbol:
    grid: TorusGrid
    values: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != self.grid.shape:
            raise ShapeError(f"symbol shape {vals.shape} does not match grid {self.grid.shape}")
        if not np.all(np.isfinite(vals)):
            raise DomainError("symbol values must be finite")
        object.__setattr__(self, "values", vals)

    def __mul__(self, other: "MultiplierSymbol") -> "MultiplierSymbol":
        if other.grid != self.grid:
            raise ShapeError("symbols live on different grids")
        return MultiplierSymbol(self.grid, self.values * other.values, {"product": (self.provenance, other.provenance)})


def apply_multiplier(sym: MultiplierSymbol, data) -> np.ndarray:
    """``ifft(sym * fft(data))`` over the trailing grid axes."""
    data = np.asarray(data)
    n = sym.grid.n
    if data.shape[data.ndim - n:] != sym.grid.shape:
        raise ShapeError(f"data shape {data.shape} does not end with grid shape {sym.grid.shape}")
    axes = tuple(range(data.ndim - n, data.ndim))
    return np.fft.ifftn(sym.values * np.fft.fftn(data, axes=axes), axes=axes)


def multiplier_norm(sym: MultiplierSymbol, kind: str = "sup-kernel") -> float:
    """Operator norm of ``u(A)`` on the grid.

    ``"sup-kernel"`` is the norm on bounded grid functions (max norm),
    i.e. the l1 norm of the convolution kernel; ``"l2"`` is the largest
    symbol modulus.
    """
    if kind == "l2":
        return float(np.max(np.abs(sym.values)))
    if kind == "sup-kernel":
        return float(np.sum(np.abs(np.fft.ifftn(sym.values))))
    raise DomainError(f"unknown norm {kind!r}")


class SpectralCheck(NamedTuple):
    omega_est: float
    ok: bool


def _principal_root(z: np.ndarray, alpha: float) -> np.ndarray:
    out = np.zeros_like(z, dtype=complex)
    nz = z != 0
    out[nz] = np.exp(np.log(z[nz]) / alpha)
    return out


def _pole_root(z: np.ndarray, alpha: float) -> np.ndarray:
    # roots of lam^alpha = z with |arg lam| < pi; -inf where none exists
    out = np.full(z.shape, -np.inf, dtype=complex)
    arg = np.angle(z)
    live = (np.abs(arg) < alpha * math.pi) & (z != 0)
    out[live] = np.abs(z[live]) ** (1 / alpha) * np.exp(1j * arg[live] / alpha)
    out[z == 0] = 0
    return out


def _ratio(num: np.ndarray, den: np.ndarray, what: str) -> np.ndarray:
    scale = max(1.0, float(np.max(np.abs(den))))
    if np.any(np.abs(den) <= 1e-14 * scale):
        raise DivisionError(f"{what} vanishes on the grid")
    return num / den


def spectral_condition(P1: PolySymbol, P2: PolySymbol, alpha: float, grid: TorusGrid, tol: float = 1e-10,
                       branch: str = "principal") -> SpectralCheck:
    """``sup Re((P1/P2)^(1/alpha))`` over the grid and whether it is
    ``<= tol``.

    ``branch="principal"`` takes the principal power with ``0^(1/alpha) = 0``.
    ``branch="poles"`` only counts genuine roots of ``lam^alpha = P1/P2``
    with ``|arg lam| < pi``; the two differ for ``alpha < 1`` when
    ``|arg(P1/P2)| > alpha pi``, where the principal power leaves the
    sheet of ``lam^alpha`` (e.g. a negative ratio with ``alpha = 1/2``).
    """
    if not 0 < alpha < 2:
        raise DomainError("alpha must lie in (0, 2)")
    ratio = _ratio(P1(grid.xi), P2(grid.xi), "P2")
    if branch == "principal":
        roots = _principal_root(ratio, alpha)
    elif branch == "poles":
        roots = _pole_root(ratio, alpha)
    else:
        raise DomainError(f"unknown branch rule {branch!r}")
    omega = float(np.max(roots.real))
    return SpectralCheck(omega, omega <= tol)


def default_gamma(n: int, alpha: float) -> float:
    """Smallest float above ``2 delta + 1/2`` with ``delta = max(1, alpha) n / 2``."""
    delta = max(1.0, alpha) * n / 2
    return math.nextafter(2 * delta + 0.5, math.inf)


def regularizer_symbol(Q: PolySymbol, a: complex, gamma: float, grid: TorusGrid, coercivity: float | None = None) -> MultiplierSymbol:
    """Symbol of ``C = (a - Q)^(-gamma)`` on the principal branch.

    When ``coercivity`` (an exponent ``r``) is given, ``|Q(xi)| >= M |xi|^r``
    is spot-checked on the outer half of the frequency grid: ``Q`` must not
    vanish there and ``log |Q|`` must grow at least like ``(r - 1/4) log |xi|``.

    Raises
    ------
    BranchError
        If ``a - Q`` crosses the negative real axis for non-integer ``gamma``.
    """
    if gamma < 0:
        raise DomainError("gamma must be nonnegative")
    base = complex(a) - Q(grid.xi)
    scale = max(1.0, abs(complex(a)))
    if np.min(np.abs(base)) <= 1e-14 * scale:
        raise DomainError("a lies in the range of Q on the grid")
    if coercivity is not None:
        radius = np.sqrt(sum(v * v for v in grid.xi))
        outer = radius >= 0.5 * radius.max()
        q = np.abs(Q(grid.xi)[outer])
        slope = np.polyfit(np.log(radius[outer]), np.log(np.maximum(q, 1e-300)), 1)[0]
        if q.min() == 0 or slope < coercivity - 0.25:
            raise DomainError(f"Q does not look {coercivity}-coercive on the grid")
    if gamma != int(gamma):
        left = base[base.real < 0]
        cut = 1e-12 * np.abs(left)
        if np.any(left.imag > cut) and np.any(left.imag < -cut):
            raise BranchError("a - Q(xi) crosses the branch cut of the fractional power")
    vals = np.ones_like(base) if gamma == 0 else np.exp(-gamma * np.log(base))
    return MultiplierSymbol(grid, vals, {"kind": "regularizer", "a": complex(a), "gamma": gamma})


def symbol_zeros(P: PolySymbol, grid: TorusGrid, tol: float = 1e-12) -> np.ndarray:
    """Frequencies (rows of an ``(m, n)`` array) where ``|P|`` vanishes up
    to ``tol`` times its largest grid value; nonempty means ``P(D)`` is not
    injective on the grid."""
    vals = np.abs(P(grid.xi))
    hit = vals <= tol * max(1.0, float(vals.max()))
    return np.stack([v[hit] for v in grid.xi], axis=-1)


@dataclass(frozen=True, eq=False)
class DfpProblem:
    """Degenerate fractional problem on the torus.

    ``forward``: ``D^alpha P2 u = P1 u + C f``; ``reversed``:
    ``D^alpha P1 u = P2 u + C f``. Both have ``u(0) = C phi`` and, for
    ``alpha > 1``, ``u'(0) = C psi``, with ``C = (a - Q)^(-gamma)``.
    ``forcing`` maps a time to a grid function.
    """

    P1: PolySymbol
    P2: PolySymbol
    Q: PolySymbol
    a: complex
    gamma: float
    alpha: float
    grid: TorusGrid
    orientation: str = "forward"
    phi: np.ndarray | None = None
    psi: np.ndarray | None = None
    forcing: Callable | None = None

    def __post_init__(self):
        if not 0 < self.alpha < 2:
            raise DomainError("alpha must lie in (0, 2)")
        if self.orientation not in ("forward", "reversed"):
            raise DomainError(f"unknown orientation {self.orientation!r}")
        for name in ("phi", "psi"):
            v = getattr(self, name)
            if v is not None and np.shape(v) != self.grid.shape:
                raise ShapeError(f"{name} must have the grid shape {self.grid.shape}")
        num, den = self.num_den()
        if self.orientation == "forward":
            _ratio(num, den, "P2")
        check = self.ratio_root_max()
        if check > 1e-10:
            raise DomainError(f"spectral condition fails (sup Re = {check:.3g} > 0)")

    def num_den(self):
        p1, p2 = self.P1(self.grid.xi), self.P2(self.grid.xi)
        return (p1, p2) if self.orientation == "forward" else (p2, p1)

    def admissible(self) -> np.ndarray:
        """Grid points where the coefficient of ``D^alpha`` is nonzero."""
        _, den = self.num_den()
        return np.abs(den) > 1e-14 * max(1.0, float(np.max(np.abs(den))))

    def ratio(self) -> np.ndarray:
        """``num/den`` on admissible points, NaN elsewhere."""
        num, den = self.num_den()
        live = self.admissible()
        out = np.full(num.shape, np.nan, dtype=complex)
        out[live] = num[live] / den[live]
        return out

    def ratio_root_max(self) -> float:
        r = self.ratio()
        live = np.isfinite(r)
        return float(np.max(_pole_root(r[live], self.alpha).real)) if np.any(live) else 0.0

    def regularizer(self) -> MultiplierSymbol:
        return regularizer_symbol(self.Q, self.a, self.gamma, self.grid)


def _ml_grid(alpha: float, beta: float, z: np.ndarray) -> np.ndarray:
    # E_{alpha,beta} on a grid; NaN marks modes outside the problem, set to 0
    out = np.zeros(z.shape, dtype=complex)
    live = np.isfinite(z)
    if np.any(live):
        out[live] = mittag_leffler(alpha, beta, z[live])
    return out


def s_alpha_symbol(prob: DfpProblem, t: float) -> MultiplierSymbol:
    """Symbol ``E_alpha(t^alpha num/den) (a - Q)^(-gamma)`` of the family
    for the orientation in force; points where ``den`` vanishes carry 0."""
    if t < 0:
        raise DomainError("t must be nonnegative")
    reg = prob.regularizer()
    ratio = prob.ratio()
    if t == 0:
        ml = np.where(np.isfinite(ratio), 1.0 + 0j, 0.0)
    else:
        ml = _ml_grid(prob.alpha, 1.0, t**prob.alpha * ratio)
    return MultiplierSymbol(prob.grid, ml * reg.values, {"kind": "s_alpha", "t": t, "alpha": prob.alpha, "gamma": prob.gamma,
                                                         "a": complex(prob.a), "orientation": prob.orientation})


class GrowthFit(NamedTuple):
    exponent: float
    constant: float


def fit_growth_exponent(prob: DfpProblem, times=None, kind: str = "sup-kernel") -> GrowthFit:
    """Least-squares slope of ``log ||S(t)||`` against ``log t`` and the
    smallest ``M`` with ``||S(t)|| <= M (1 + t^slope)`` on the samples."""
    times = np.geomspace(1.0, 100.0, 12) if times is None else np.asarray(times, dtype=float)
    norms = np.array([multiplier_norm(s_alpha_symbol(prob, float(t)), kind) for t in times])
    slope = float(np.polyfit(np.log(times), np.log(norms), 1)[0])
    return GrowthFit(slope, float(np.max(norms / (1 + times**slope))))


# solutions {{{

def _mode_coeffs(prob: DfpProblem, data) -> np.ndarray:
    if data is None:
        return np.zeros(prob.grid.shape, dtype=complex)
    return np.fft.fftn(np.asarray(data, dtype=complex))


def _forced_term(prob: DfpProblem, ratio, den, times, c, panels_per_unit: int = 2, nodes: int = 24,
                 levels: int = 30) -> np.ndarray:
    """``C int_0^t (t-s)^(alpha-1) E_{alpha,alpha}(r (t-s)^alpha) f^(s)/den ds``
    per mode, by Gauss-Jacobi on the panel next to ``s = t`` and
    Gauss-Legendre on geometrically graded panels elsewhere."""
    alpha = prob.alpha
    out = np.zeros((len(times),) + prob.grid.shape, dtype=complex)
    live = np.isfinite(ratio)
    xj, wj = roots_jacobi(nodes, 0.0, alpha - 1.0)
    xg, wg = np.polynomial.legendre.leggauss(nodes)
    for i, t in enumerate(times):
        if t == 0:
            continue
        edges = np.linspace(0.0, t, max(2, math.ceil(t * panels_per_unit)) + 1)
        # E_{alpha,alpha}(r tau^alpha) has powers tau^(k alpha) at 0: grade geometrically there;
        # forcing such as g_beta(s) is algebraic at s = 0, i.e. at tau = t
        fine = 0.5 ** np.arange(levels, 0, -1)
        edges = np.concatenate([[0.0], edges[1] * fine, edges[1:-1], t - (t - edges[-2]) * fine[::-1], [t]])
        taus, weights = [], []
        h0 = edges[1]
        taus.append(h0 * (xj + 1) / 2)
        weights.append(wj * (h0 / 2) ** alpha)
        for lo, hi in zip(edges[1:-1], edges[2:]):
            tau = lo + (hi - lo) * (xg + 1) / 2
            taus.append(tau)
            weights.append(wg * (hi - lo) / 2 * tau ** (alpha - 1))
        tau = np.concatenate(taus)
        w = np.concatenate(weights)
        f_hat = np.stack([np.fft.fftn(np.asarray(prob.forcing(t - s), dtype=complex)) for s in tau])
        kern = np.zeros_like(f_hat)
        kern[:, live] = _ml_grid(alpha, alpha, tau[:, None] ** alpha * ratio[live][None, :])
        acc = np.tensordot(w, kern * f_hat, axes=(0, 0))
        out[i][live] = acc[live] / den[live]
    return out * c


def solve_dfp(prob: DfpProblem, times) -> np.ndarray:
    """Solution ``u(t)`` on the grid at each of ``times``.

    Per mode with ratio ``r = num/den``:
    ``C [E_alpha(r t^alpha) phi + t E_{alpha,2}(r t^alpha) psi +
    int (t-s)^(alpha-1) E_{alpha,alpha}(r (t-s)^alpha) f(s)/den ds]``;
    the ``psi`` term is used only for ``alpha > 1``.

    Raises
    ------
    CompatibilityError
        If data or forcing is nonzero on a mode where ``den`` vanishes.
    """
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(times < 0):
        raise DomainError("times must be nonnegative")
    c = prob.regularizer().values
    ratio = prob.ratio()
    _, den = prob.num_den()
    live = np.isfinite(ratio)
    phi = _mode_coeffs(prob, prob.phi)
    psi = _mode_coeffs(prob, prob.psi) if prob.alpha > 1 else np.zeros_like(phi)
    scale = max(1.0, float(np.max(np.abs(phi))), float(np.max(np.abs(psi))))
    if np.any(np.abs(phi[~live]) > 1e-10 * scale) or np.any(np.abs(psi[~live]) > 1e-10 * scale):
        raise CompatibilityError("initial data excite a mode where the time-derivative coefficient vanishes")
    if prob.forcing is not None and np.any(~live):
        probe = np.fft.fftn(np.asarray(prob.forcing(float(times.max())), dtype=complex))
        if np.any(np.abs(probe[~live]) > 1e-10 * max(1.0, float(np.max(np.abs(probe))))):
            raise CompatibilityError("forcing excites a mode where the time-derivative coefficient vanishes")
    out = np.zeros((times.size,) + prob.grid.shape, dtype=complex)
    for i, t in enumerate(times):
        z = t**prob.alpha * ratio
        if t == 0:
            out[i][live] = phi[live]
            continue
        out[i] = _ml_grid(prob.alpha, 1.0, z) * phi
        if prob.alpha > 1:
            out[i] += t * _ml_grid(prob.alpha, 2.0, z) * psi
    out *= c
    if prob.forcing is not None:
        out += _forced_term(prob, ratio, den, times, c)
    axes = tuple(range(1, out.ndim))
    return np.fft.ifftn(out, axes=axes)


def dfp_residual(prob: DfpProblem, t_end: float = 1.0, steps: int = 4000) -> float:
    """Relative residual of the equation for :func:`solve_dfp` output.

    The solution is sampled on a uniform grid, differentiated with
    :func:`caputo_derivative` and the symbols are applied mode by mode.
    The first tenth of the interval (where the discrete derivative is
    least accurate) is excluded.
    """
    t = np.linspace(t_end / steps, t_end, steps)
    u = solve_dfp(prob, t)
    axes = tuple(range(1, u.ndim))
    u_hat = np.fft.fftn(u, axes=axes)
    c = prob.regularizer().values
    init = [c * _mode_coeffs(prob, prob.phi)]
    if prob.alpha > 1:
        init.append(c * _mode_coeffs(prob, prob.psi))
    d = caputo_derivative(SampledFunction(t, u_hat), prob.alpha, init).values
    num, den = prob.num_den()
    resid = den * d - num * u_hat
    if prob.forcing is not None:
        resid -= c * np.stack([np.fft.fftn(np.asarray(prob.forcing(s), dtype=complex)) for s in t])
    keep = t >= 0.1 * t_end
    scale = max(float(np.max(np.abs(num * u_hat[keep]))), 1e-300)
    return float(np.max(np.abs(resid[keep])) / scale)

# }}}


# Poisson-wave block system {{{

class PoissonWaveSystem(NamedTuple):
    graph: MloGraph         # A = M^(-1) L M^(-1) - I
    shifted: MloGraph       # A - I
    mass: np.ndarray
    stiffness: np.ndarray
    modes: int


def poisson_wave_operator(m, modes: int) -> PoissonWaveSystem:
    """``M^(-1) L M^(-1) - I`` on the span of ``sin(j x)``, ``j <= modes``,
    in ``H_0^1(0, pi) x L^2(0, pi)``.

    ``m`` holds samples of the (nonnegative) density on the midpoint grid
    ``(i + 1/2) pi / len(m)``. Coordinates are scaled so that both blocks
    are orthonormal: ``(j u_j, v_j)``.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 1 or np.any(m < 0):
        raise DomainError("m must be a nonnegative 1-D sample array")
    if modes < 1 or 2 * modes > m.size:
        raise TruncationError(f"{modes} modes need at least {2 * modes} samples of m")
    K = m.size
    x = (np.arange(K) + 0.5) * math.pi / K
    j = np.arange(1, modes + 1)
    sines = np.sin(np.outer(j, x))
    mass_v = (2.0 / K) * (sines * m) @ sines.T
    N = modes
    M = np.block([[np.eye(N), np.zeros((N, N))], [np.zeros((N, N)), mass_v]])
    D = np.diag(j.astype(float))
    L = np.block([[np.zeros((N, N)), D], [-D, np.zeros((N, N))]])
    # pairs (M w, y) with M y = L w
    Z = _null(np.hstack([-L, M]).astype(complex), 1e-12)
    w, y = Z[: 2 * N], Z[2 * N:]
    xs = M @ w
    graph = MloGraph(2 * N, np.vstack([xs, y - xs]))
    shifted = MloGraph(2 * N, np.vstack([xs, y - 2 * xs]))
    return PoissonWaveSystem(graph, shifted, M, L, N)


class PoissonWaveResult(NamedTuple):
    times: np.ndarray
    u: np.ndarray          # sine coefficients, shape (len(times), modes)
    v: np.ndarray
    family: OperatorFamily
    resolvent_norms: dict
    residual: float


def poisson_wave_demo(m, sigma: float, r: float, eta: float, u1, v1, times=None, check_times=None) -> PoissonWaveResult:
    """Trajectory ``(u, v)(t) = R(t)(u1, v1)`` of the fractional
    Poisson-wave system with the inverse of ``A - I`` as generator.

    ``A - I`` generates a ``(g_1, g_(1+r))`` family, which the Wright
    route turns into a ``(g_|sigma|, g_(1+|sigma|(eta-r-1)))`` family for
    ``(A - I)^(-1)``. Initial values vanish and the forcing is
    ``f = g_(1+|sigma|(eta-r-1)-|sigma|)(t) (u1, v1)``, which meets the
    compatibility condition. ``residual`` is the relative distance of
    ``(D^|sigma| U - f, U)`` from the graph of ``A - I`` on ``check_times``.
    """
    u1 = np.asarray(u1, dtype=float)
    v1 = np.asarray(v1, dtype=float)
    if u1.shape != v1.shape or u1.ndim != 1:
        raise TruncationError("u1 and v1 must be coefficient vectors of equal length")
    if not -1 < sigma < 0:
        raise DomainError("sigma must lie in (-1, 0)")
    if r <= 0 or eta <= 1 + r:
        raise DomainError("need r > 0 and eta > 1 + r")
    system = poisson_wave_operator(m, u1.size)
    n = 2 * system.modes
    norms = {}
    for lam in (0.5, 1.0, 2.0):
        norms[lam] = float(np.linalg.norm(resolvent_c(system.graph, None, lam), 2))
        if norms[lam] > 1 / lam + 1e-8:
            raise VerificationError(f"resolvent bound fails at lambda={lam}: {norms[lam]:.6g}")
    jj = np.arange(1, system.modes + 1)
    data = np.concatenate([jj * u1, v1]).astype(complex)
    Y = system.shifted.y_block
    coef = np.linalg.lstsq(Y, data, rcond=None)[0]
    if np.linalg.norm(Y @ coef - data) > 1e-10 * max(1.0, float(np.linalg.norm(data))):
        raise CompatibilityError("(u1, v1) is not in the range of A - I")
    times = DEFAULT_GRID if times is None else np.asarray(times, dtype=float)
    S = construct_family(system.shifted, None, make_power(1.0), make_power(1.0 + r), grid=times)
    R = wright_subordinate(S, sigma, eta, r, r, r, grid=times)
    traj = R.mats @ data
    rho = -sigma
    order = rho * (eta - r - 1)
    check_times = np.geomspace(0.05, float(times[-1]), 400) if check_times is None else np.asarray(check_times, dtype=float)
    U = R.at(check_times) @ data
    d = caputo_derivative(SampledFunction(check_times, U), rho, [np.zeros(n)]).values
    f = np.asarray(g_kernel(1 + order - rho, check_times))[:, None] * data[None, :]
    pairs = np.concatenate([d - f, U], axis=1).T
    Q = system.shifted.basis
    resid = pairs - Q @ (Q.conj().T @ pairs)
    keep = check_times >= 0.2 * check_times[-1]
    num = np.linalg.norm(resid[:, keep], axis=0)
    den = np.linalg.norm(pairs[:, keep], axis=0)
    residual = float(np.max(np.divide(num, den, out=np.zeros_like(num), where=den > 0)))
    return PoissonWaveResult(times, traj[:, : system.modes] / jj, traj[:, system.modes:], R, norms, residual)


# }}}
