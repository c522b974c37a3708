"""Forward and inverse Laplace transforms, transform-identity checks and the
exponential region geometry."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import ContourError, DomainError, TailError
from .specfun import SampledFunction, bessel_j, wright_phi_negative

__all__ = [
    "ContourSpec",
    "ExpRegion",
    "RegionCheck",
    "forward_transform",
    "invert",
    "contour_nodes",
    "verify_bessel_identity",
    "verify_wright_identity",
    "exp_region_check",
]

_GL_X, _GL_W = np.polynomial.legendre.leggauss(20)
_TALBOT = (0.5017, 0.6407, 0.6122, 0.2645)


@dataclass(frozen=True)
class ContourSpec:
    kind: str = "talbot"
    shift: float = 0.0
    nodes: int = 48
    sector_angle: float = 0.75 * math.pi
    order: float = 1.0

    def __post_init__(self):
        if self.kind not in ("bromwich", "talbot", "shifted_sector"):
            raise DomainError(f"unknown contour kind {self.kind!r}")
        if self.nodes < 8:
            raise DomainError("a contour needs at least 8 nodes")
        if self.kind == "shifted_sector" and not math.pi / 2 < self.sector_angle < math.pi:
            raise DomainError("sector_angle must lie in (pi/2, pi)")


@dataclass(frozen=True)
class ExpRegion:
    a: float
    b: float

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise DomainError("exponential region needs a > 0 and b > 0")


class RegionCheck(NamedTuple):
    member: bool
    inverse_in_strip: bool


# quadrature building blocks {{{

def _gl_panels(edges: np.ndarray):
    """Nodes and weights of composite 20-point Gauss-Legendre on ``edges``."""
    left, right = edges[:-1, None], edges[1:, None]
    half = (right - left) / 2
    nodes = (left + right) / 2 + half * _GL_X
    weights = half * _GL_W
    return nodes.ravel(), weights.ravel()


def _tanh_sinh(length: float, level: float = 1 / 32):
    """Tanh-sinh rule on [0, length], robust to endpoint singularities."""
    k = np.arange(-200, 201) * level
    u = 0.5 * math.pi * np.sinh(k)
    e = np.exp(-2 * np.abs(u))
    sech2 = 4 * e / (1 + e) ** 2
    # (1 + tanh u) / 2 written to keep precision next to t = 0
    frac = np.where(u < 0, e / (1 + e), 1 / (1 + e))
    t = length * frac
    w = length / 2 * sech2 * 0.5 * math.pi * np.cosh(k) * level
    keep = (t > 0) & (t < length) & (w > 1e-300)
    return t[keep], w[keep]


def _eval_vec(f, t: np.ndarray) -> np.ndarray:
    vals = np.asarray(f(t))
    if vals.ndim == 0 or vals.shape[0] != t.size:
        vals = np.array([np.asarray(f(tt)) for tt in t])
    return vals

# }}}


def forward_transform(f, lam, truncation: float | None = None, growth: float = 0.0):
    """Laplace transform ``int_0^inf e^(-lam t) f(t) dt`` by quadrature.

    ``f`` is a :class:`SampledFunction` or a callable taking a 1-D array of
    times and returning values with leading dimension equal to its length;
    matrix-valued functions are allowed. ``lam`` may be an array, in which
    case the result has ``lam``'s shape followed by the value shape.

    The integral runs up to ``truncation`` (chosen from ``growth`` when not
    given). A tail probe at the cut-off raises :class:`TailError` when the
    neglected part cannot be bounded by 1e-9.
    """
    lam_arr = np.asarray(lam, dtype=complex)
    lams = lam_arr.ravel()
    decay = float(np.min(lams.real)) - growth
    if decay <= 0:
        raise TailError(f"Re(lambda) must exceed the growth rate {growth}")
    if isinstance(f, SampledFunction):
        out = _transform_sampled(f, lams, decay)
    else:
        T = truncation if truncation is not None else min(40.0 / decay, 4000.0)
        scale = float(np.max(np.abs(lams)))
        head = min(1.0, 2.0 / scale, T)
        t0, w0 = _tanh_sinh(head)
        width = min(1.0, 2.0 / scale)
        n_panels = max(1, math.ceil((T - head) / width))
        t1, w1 = _gl_panels(np.linspace(head, T, n_panels + 1)) if T > head else (np.empty(0), np.empty(0))
        t = np.concatenate([t0, t1])
        w = np.concatenate([w0, w1])
        vals = _eval_vec(f, t)
        kern = np.exp(-np.outer(lams, t)) * w
        out = np.tensordot(kern, vals, axes=(1, 0))
        probe = np.atleast_1d(_eval_vec(f, np.array([T, 1.25 * T])))
        tail = float(np.max(np.abs(probe.reshape(2, -1)), axis=1).max()) * math.exp(-decay * T) / decay
        if not np.isfinite(tail) or tail > 1e-9 * max(1.0, float(np.max(np.abs(out)))):
            raise TailError(f"tail beyond t={T:g} is not negligible (estimate {tail:.2e})")
    return out.reshape(lam_arr.shape + out.shape[1:])[()]


def _transform_sampled(f: SampledFunction, lams: np.ndarray, decay: float):
    grid, vals = f.grid, f.values
    flat = vals.reshape(grid.size, -1)
    spline = CubicSpline(grid, flat, axis=0, extrapolate=True)
    edges = np.concatenate([[0.0], grid]) if grid[0] > 0 else grid
    t, w = _gl_panels(edges)
    kern = np.exp(-np.outer(lams, t)) * w
    out = kern @ spline(t)
    tail = float(np.max(np.abs(flat[-1]))) * math.exp(-decay * grid[-1]) / decay
    if tail > 1e-8 * max(1.0, float(np.max(np.abs(out)))):
        raise TailError(f"sampled function is not negligible past t={grid[-1]:g}")
    return out.reshape((lams.size,) + vals.shape[1:])


# inversion {{{

def _talbot_nodes(t: float, nodes: int, shift: float, scale: float = 1.0):
    a, b, c, d = _TALBOT
    mu = scale * nodes / t
    theta = -math.pi + (np.arange(nodes) + 0.5) * 2 * math.pi / nodes
    lam = shift + mu * (a * theta / np.tan(b * theta) - c + 1j * d * theta)
    dlam = mu * (a / np.tan(b * theta) - a * b * theta / np.sin(b * theta) ** 2 + 1j * d)
    weights = dlam / (1j * nodes)
    return lam, weights, mu


def _talbot_encloses(p: complex, mu: float, shift: float) -> tuple[bool, float]:
    """Whether the Talbot contour encloses ``p`` and how far it is (in
    contour-parameter units) from the curve."""
    a, b, c, d = _TALBOT
    theta = (p.imag) / (mu * d)
    if abs(theta) >= math.pi:
        return False, math.inf
    re_curve = shift + mu * ((a * theta / math.tan(b * theta) if theta != 0 else a / b) - c)
    return p.real < re_curve, abs(p.real - re_curve) / mu


def _sector_nodes(z: complex, spec: ContourSpec, panels: int = 60):
    """Two rays from ``shift`` at angles +-sector_angle joined by a circular
    arc of radius 1/|z| around the shift point on its right side.

    ``z`` may be complex; the rays must make ``e^(lam z)`` decay.
    """
    theta = spec.sector_angle
    z = complex(z)
    r0 = 1.0 / abs(z)
    phase = np.angle(z)
    rate = abs(z) * min(-math.cos(theta + phase), -math.cos(-theta + phase))
    if rate <= 0:
        raise ContourError("e^(lambda z) does not decay along the sector rays")
    u_edges = np.concatenate([np.linspace(0, 4, 17), np.linspace(4, 48, panels)[1:]])
    u, wu = _gl_panels(u_edges)
    rho = r0 + u / rate
    wrho = wu / rate
    phi_edges = np.linspace(-theta, theta, 13)
    phi, wphi = _gl_panels(phi_edges)
    up = spec.shift + rho * np.exp(1j * theta)
    down = spec.shift + rho * np.exp(-1j * theta)
    arc = spec.shift + r0 * np.exp(1j * phi)
    lam = np.concatenate([down, arc, up])
    w = np.concatenate([
        -wrho * np.exp(-1j * theta),  # incoming ray, traversed toward the shift point
        wphi * 1j * r0 * np.exp(1j * phi),
        wrho * np.exp(1j * theta),
    ]) / (2j * math.pi)
    return lam, w


def contour_nodes(spec: ContourSpec, t):
    """Nodes ``lam_k`` and weights ``w_k`` with
    ``(1/(2 pi i)) int e^(lam t) F(lam) dlam ~ sum w_k e^(lam_k t) F(lam_k)``."""
    if spec.kind == "talbot":
        lam, w, _ = _talbot_nodes(t, spec.nodes, spec.shift)
        return lam, w
    if spec.kind == "shifted_sector":
        return _sector_nodes(t, spec)
    raise DomainError("the Bromwich rule has no fixed node set; use invert")


def _eval_symbol(F, lam: np.ndarray) -> np.ndarray:
    vals = np.asarray(F(lam), dtype=complex)
    if vals.ndim == 0 or vals.shape[0] != lam.size:
        vals = np.array([np.asarray(F(z), dtype=complex) for z in lam])
    if not np.all(np.isfinite(vals)):
        raise ContourError("symbol is not finite on the inversion contour")
    return vals


def _circle_nodes(p: complex, radius: float, nodes: int = 48):
    phi = 2 * math.pi * np.arange(nodes) / nodes
    lam = p + radius * np.exp(1j * phi)
    return lam, (lam - p) / nodes


def _talbot_plan(t: float, spec: ContourSpec, poles: np.ndarray):
    """Nodes and weights (times ``e^(lam t)`` already folded in) of the
    Talbot rule at ``t`` plus small circles around hinted poles that the
    curve leaves outside."""
    chosen = None
    for scale in (1.0, 0.8, 1.25, 0.65, 1.5):
        mu = scale * spec.nodes / t
        spacing = 2 * math.pi * _TALBOT[3] / spec.nodes
        status = [_talbot_encloses(p, mu, spec.shift) for p in poles]
        if all(gap > spacing for _, gap in status):
            chosen = scale, status
            break
    if chosen is None:
        chosen = 1.0, [_talbot_encloses(p, spec.nodes / t, spec.shift) for p in poles]
    scale, status = chosen
    lam, w, _ = _talbot_nodes(t, spec.nodes, spec.shift, scale)
    lams, weights = [lam], [w * np.exp(lam * t)]
    for p, (inside, _) in zip(poles, status):
        if inside:
            continue
        if abs(p.imag) < 1e-12 and p.real <= 0:
            raise ContourError("a hinted pole sits on the branch cut")
        others = [abs(p - q) for q in poles if q != p]
        radius = min([2.0 / t, 0.5 * np.min(np.abs(lam - p)), 0.5 * abs(p)] + [0.5 * d for d in others])
        cl, cw = _circle_nodes(p, radius)
        lams.append(cl)
        weights.append(cw * np.exp(cl * t))
    return np.concatenate(lams), np.concatenate(weights)


def _invert_talbot_many(F, times: np.ndarray, spec: ContourSpec, poles: np.ndarray, chunk: int = 20000):
    plans = [_talbot_plan(float(t), spec, poles) for t in times]
    sizes = [lam.size for lam, _ in plans]
    lam_all = np.concatenate([lam for lam, _ in plans])
    w_all = np.concatenate([w for _, w in plans])
    vals = np.concatenate([_eval_symbol(F, lam_all[k:k + chunk]) for k in range(0, lam_all.size, chunk)])
    weighted = w_all.reshape((-1,) + (1,) * (vals.ndim - 1)) * vals
    starts = np.concatenate([[0], np.cumsum(sizes)[:-1]])
    return np.add.reduceat(weighted, starts, axis=0)


def _invert_bromwich(F, t: float, spec: ContourSpec, terms: int = 600, euler: int = 30):
    # Fourier-series rule on Re(lam) = shift + A/(2t) with Euler summation
    A = 18.4
    base = spec.shift + A / (2 * t)
    k = np.arange(1, terms + euler + 1)
    lam = np.concatenate([[base], base + 1j * k * math.pi / t, base - 1j * k * math.pi / t])
    vals = _eval_symbol(F, lam)
    m = terms + euler
    first = vals[0] / 2
    pairs = 0.5 * (vals[1:m + 1] + vals[m + 1:]) * ((-1.0) ** k).reshape((-1,) + (1,) * (vals.ndim - 1))
    partial = first + np.cumsum(pairs, axis=0)
    binom = np.array([math.comb(euler, j) for j in range(euler + 1)]) / 2.0**euler
    tail = partial[terms - 1: terms + euler]
    acc = np.tensordot(binom, tail, axes=(0, 0))
    return math.exp(base * t) / t * acc


def invert(F: Callable, t, contour: ContourSpec | None = None, *, poles=None):
    """Inverse Laplace transform of the symbol ``F`` at time(s) ``t``.

    ``F`` takes a 1-D complex array and returns values with leading
    dimension equal to its length (scalar or matrix valued). The default
    contour is a 48-node Talbot curve; ``poles`` lists isolated
    singularities that may fall outside it at large ``t``; their residues are
    added from small circles. The result is complex.

    Raises
    ------
    ContourError
        If ``F`` is not finite on the contour.
    """
    spec = contour if contour is not None else ContourSpec()
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr <= 0):
        raise DomainError("t must be positive")
    pole_arr = np.asarray([] if poles is None else poles, dtype=complex).ravel()
    if spec.kind == "talbot":
        res = _invert_talbot_many(F, t_arr.ravel(), spec, pole_arr)
        return res.reshape(t_arr.shape + res.shape[1:])[()]
    out = []
    for tt in t_arr.ravel():
        if spec.kind == "bromwich":
            out.append(_invert_bromwich(F, float(tt), spec))
        else:
            lam, w = _sector_nodes(float(tt), spec)
            vals = _eval_symbol(F, lam)
            out.append(np.tensordot(w * np.exp(lam * tt), vals, axes=(0, 0)))
    res = np.array(out)
    return res.reshape(t_arr.shape + res.shape[1:])[()]

# }}}

# transform identities {{{

def verify_bessel_identity(beta: float, lam: complex, t: float) -> float:
    """Absolute gap between a quadrature of
    ``int_0^inf e^(-lam s) J_(1+beta)(2 sqrt(s t)) s^((1+beta)/2) ds`` and
    ``t^((1+beta)/2) lam^(-2-beta) e^(-t/lam)``."""
    if beta < 0:
        raise DomainError("beta must be nonnegative")
    lam = complex(lam)
    if lam.real <= 0:
        raise TailError("the Bessel integral needs Re(lambda) > 0")
    if t <= 0:
        raise DomainError("t must be positive")
    nu = 1.0 + beta
    closed = t ** (nu / 2) * lam ** (-1 - nu) * np.exp(-t / lam)
    # s = u^2; envelope exp(-Re(lam) u^2) u^(2 nu + 1) min(1, (2u sqrt t)^(-1/2))
    u_peak = math.sqrt((nu + 0.5) / (2 * lam.real))
    u_max = u_peak + math.sqrt((nu + 0.5) * max(1.0, math.log(max(u_peak, 1.0) + 1.0)) / lam.real + 32.0 / lam.real)
    for _ in range(40):
        env = math.exp(-lam.real * u_max**2) * u_max ** (2 * nu + 1)
        if env < 1e-16:
            break
        u_max *= 1.2
    else:
        raise TailError("Bessel integrand envelope does not decay")
    # panels no wider than a quarter oscillation of J(2 u sqrt t) or of e^(-i Im(lam) u^2)
    width = min(0.25, math.pi / (4 * math.sqrt(t)), math.pi / (4 * max(1e-12, abs(lam.imag) * u_max)))
    u, w = _gl_panels(np.linspace(0, u_max, max(2, math.ceil(u_max / width)) + 1))
    s = u * u
    vals = np.exp(-lam * s) * bessel_j(nu, 2 * u * math.sqrt(t)) * s ** (nu / 2) * 2 * u
    quad = np.sum(w * vals)
    return float(abs(quad - closed))


def verify_wright_identity(rho: float, v: float, s: float, lam: complex) -> float:
    """Absolute gap between the Laplace transform of
    ``t^(v rho) phi(rho, 1 + rho v; -s t^rho)`` and
    ``lam^(-1-rho v) e^(-s lam^(-rho))``."""
    if not 0 < rho < 1:
        raise DomainError("rho must lie in (0, 1)")
    if 1 + rho * v < 0:
        raise DomainError("need 1 + rho v >= 0")
    if s <= 0:
        raise DomainError("s must be positive")
    lam = complex(lam)
    if lam.real <= 0:
        raise TailError("the Wright integral needs Re(lambda) > 0")
    nu = 1.0 + rho * v

    def integrand(t):
        return t ** (v * rho) * wright_phi_negative(rho, nu, s * t**rho)

    quad = forward_transform(integrand, lam)
    closed = lam ** (-nu) * np.exp(-s * lam ** (-rho))
    return float(abs(quad - closed))

# }}}


def exp_region_check(region: ExpRegion, lam: complex) -> RegionCheck:
    """Membership in ``{Re lam >= b, |Im lam| <= e^(a Re lam)}`` and whether
    ``Re(1/lam)`` lies in ``(0, 1/b]``."""
    lam = complex(lam)
    member = lam.real >= region.b and abs(lam.imag) <= math.exp(region.a * lam.real)
    if lam == 0:
        raise DomainError("1/lambda is undefined at 0")
    inv = (1 / lam).real
    return RegionCheck(bool(member), bool(0 < inv <= 1 / region.b * (1 + 1e-14)))
