"""Special functions: Gamma, power kernels, Mittag-Leffler, Wright, Bessel.

Also hosts :class:`SampledFunction` and a discrete Caputo derivative used to
check solutions of fractional equations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import mpmath
import numpy as np
from scipy import special

from .errors import ConvergenceError, DomainError, PoleError

__all__ = [
    "SampledFunction",
    "gamma_fn",
    "g_kernel",
    "mittag_leffler",
    "wright_phi",
    "bessel_j",
    "caputo_derivative",
]

_EPS = np.finfo(float).eps
_LOG_MAX = math.log(np.finfo(float).max)


@dataclass(frozen=True)
class SampledFunction:
    """Values of a function on a strictly increasing positive time grid."""

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values)
        if grid.ndim != 1 or grid.size == 0:
            raise DomainError("grid must be a nonempty 1-D array")
        if np.any(np.diff(grid) <= 0):
            raise DomainError("grid must be strictly increasing")
        if grid[0] < 0:
            raise DomainError("grid must be nonnegative")
        if values.shape[0] != grid.size:
            raise DomainError("values length must equal grid length")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return self.grid.size


def _is_pole(z: complex) -> bool:
    return z.imag == 0 and z.real <= 0 and z.real == math.floor(z.real)


def gamma_fn(z):
    """Euler Gamma function for real or complex ``z``.

    Raises
    ------
    PoleError
        If ``z`` is a nonpositive integer.
    """
    zc = complex(z)
    if _is_pole(zc):
        raise PoleError(f"Gamma has a pole at {z}")
    if isinstance(z, (complex, np.complexfloating)) and zc.imag != 0:
        return complex(special.gamma(zc))
    if isinstance(z, (complex, np.complexfloating)):
        return complex(special.gamma(zc.real))
    return float(special.gamma(zc.real))


def g_kernel(alpha: float, t):
    """Power kernel ``t**(alpha - 1) / Gamma(alpha)``.

    ``t`` may be a scalar or an array of positive times.
    """
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    tt = np.asarray(t, dtype=float)
    if np.any(tt <= 0):
        raise DomainError("t must be positive")
    out = tt ** (alpha - 1.0) * special.rgamma(alpha)
    return float(out) if out.ndim == 0 else out


# Mittag-Leffler {{{

def _neumaier(terms) -> complex:
    """Compensated sum of complex terms."""
    re = math.fsum(t.real for t in terms)
    im = math.fsum(t.imag for t in terms)
    return complex(re, im)


def _ml_series(alpha: float, beta: float, z: complex) -> complex:
    terms = []
    zn = 1.0 + 0.0j
    quiet = 0
    for n in range(20000):
        term = zn * special.rgamma(alpha * n + beta)
        terms.append(term)
        # stop once the Gamma factor is increasing and terms are negligible
        if alpha * n + beta > 2 and abs(term) < 1e-17 * max(abs(sum(terms[-50:])), 1e-300):
            quiet += 1
            if quiet >= 3:
                return _neumaier(terms)
        else:
            quiet = 0
        zn *= z
    raise ConvergenceError("Mittag-Leffler series did not converge")


def _ml_closed_alpha1(beta: float, z: complex) -> complex | None:
    if beta == 1.0:
        return np.exp(z)
    if beta == 0.0:
        return z * np.exp(z)
    if beta == 2.0:
        return (np.exp(z) - 1.0) / z
    if beta == 3.0:
        return (np.exp(z) - 1.0 - z) / z**2
    return None


def _optimal_param_rb(t, phi_j, phi_j1, pj, qj, log_eps_target):
    # bounded region between two consecutive singularities (parabolic contour)
    log_eps = math.log(_EPS)
    fac = 1.01
    f_max = math.exp(log_eps_target - log_eps)
    sq_j = math.sqrt(phi_j)
    threshold = 2 * math.sqrt((log_eps_target - log_eps) / t)
    sq_j1 = min(math.sqrt(phi_j1), threshold - sq_j)
    adm = False
    f_bar = 1.0
    if pj < 1e-14 and qj < 1e-14:
        sqb_j, sqb_j1 = sq_j, sq_j1
        adm = True
    elif pj < 1e-14:
        sqb_j = sq_j
        f_min = fac * (sq_j / (sq_j1 - sq_j)) ** qj if sq_j > 0 else fac
        if f_min < f_max:
            f_bar = f_min + f_min / f_max * (f_max - f_min)
            fq = f_bar ** (-1 / qj)
            sqb_j1 = (2 * sq_j1 - fq * sq_j) / (2 + fq)
            adm = True
    elif qj < 1e-14:
        sqb_j1 = sq_j1
        f_min = fac * (sq_j1 / (sq_j1 - sq_j)) ** pj
        if f_min < f_max:
            f_bar = f_min + f_min / f_max * (f_max - f_min)
            fp = f_bar ** (-1 / pj)
            sqb_j = (2 * sq_j + fp * sq_j1) / (2 - fp)
            adm = True
    else:
        f_min = fac * (sq_j + sq_j1) / (sq_j1 - sq_j) ** max(pj, qj)
        if f_min < f_max:
            f_min = max(f_min, 1.5)
            f_bar = f_min + f_min / f_max * (f_max - f_min)
            fp = f_bar ** (-1 / pj)
            fq = f_bar ** (-1 / qj)
            w = -phi_j1 * t / log_eps_target
            den = 2 + w - (1 + w) * fp + fq
            sqb_j = ((2 + w + fq) * sq_j + fp * sq_j1) / den
            sqb_j1 = (-(1 + w) * fq * sq_j + (2 + w - (1 + w) * fp) * sq_j1) / den
            adm = True
    if not adm:
        return 0.0, 0.0, math.inf
    log_eps_target = log_eps_target - math.log(f_bar)
    w = -sqb_j1**2 * t / log_eps_target
    mu = (((1 + w) * sqb_j + sqb_j1) / (2 + w)) ** 2
    h = -2 * math.pi / log_eps_target * (sqb_j1 - sqb_j) / ((1 + w) * sqb_j + sqb_j1)
    if not (mu > 0 and h > 0):
        return 0.0, 0.0, math.inf
    n = math.ceil(math.sqrt(1 - log_eps_target / t / mu) / h)
    return mu, h, n


def _optimal_param_ru(t, phi_j, pj, log_eps_target):
    # unbounded region to the right of the last singularity
    sq_phi = math.sqrt(phi_j)
    phib = phi_j * 1.01 if phi_j > 0 else 0.01
    sqb = math.sqrt(phib)
    f_min, f_max, f_tar = 1.0, 10.0, 5.0
    for _ in range(200):
        phi_t = phib * t
        log_eps_phi_t = log_eps_target / phi_t
        n = math.ceil(phi_t / math.pi * (1 - 3 * log_eps_phi_t / 2 + math.sqrt(1 - 2 * log_eps_phi_t)))
        a = math.pi * n / phi_t
        sq_mu = sqb * abs(4 - a) / abs(7 - math.sqrt(1 + 12 * a))
        fbar = ((sqb - sq_phi) / sq_mu) ** (-pj)
        if pj < 1e-14 or f_min < fbar < f_max:
            break
        sqb = f_tar ** (-1 / pj) * sq_mu + sq_phi
        phib = sqb**2
    mu = sq_mu**2
    h = (-3 * a - 2 + 2 * math.sqrt(1 + 12 * a)) / (4 - a) / n
    log_eps = math.log(_EPS)
    threshold = (log_eps_target - log_eps) / t
    if mu > threshold:
        q = 0.0 if abs(pj) < 1e-14 else f_tar ** (-1 / pj) * math.sqrt(mu)
        phib = (q + math.sqrt(phi_j)) ** 2
        if phib < threshold:
            w = math.sqrt(log_eps / (log_eps - log_eps_target))
            u = math.sqrt(-phib * t / log_eps)
            mu = threshold
            n = math.ceil(w * log_eps_target / 2 / math.pi / (u * w - 1))
            h = math.sqrt(log_eps / (log_eps - log_eps_target)) / n
        else:
            n, h = math.inf, 0.0
    return mu, h, n


def _ml_contour(alpha: float, beta: float, z: complex) -> complex:
    """Inverse Laplace transform of s^(alpha-beta)/(s^alpha - z) at t = 1.

    Optimal parabolic contours between the singularities, with residues of
    the poles lying to the right of the chosen contour added explicitly.
    """
    t = 1.0
    log_eps_target = math.log(1e-15)
    theta = np.angle(z)
    kmin = math.ceil(-alpha / 2 - theta / 2 / math.pi)
    kmax = math.floor(alpha / 2 - theta / 2 / math.pi)
    ks = np.arange(kmin, kmax + 1)
    s_star = abs(z) ** (1 / alpha) * np.exp(1j * (theta + 2 * ks * math.pi) / alpha)
    phi_star = (s_star.real + np.abs(s_star)) / 2
    order = np.argsort(phi_star, kind="stable")
    s_star, phi_star = s_star[order], phi_star[order]
    if s_star.size and s_star[-1].real * t > _LOG_MAX:
        # the dominant residue alone overflows; report it the way exp does
        top = s_star[-1]
        with np.errstate(over="ignore"):
            mag = math.inf * abs(top ** (1 - beta)) / alpha
        phase = np.angle(top ** (1 - beta)) + t * top.imag
        return complex(mag * math.cos(phase) if math.cos(phase) else 0.0,
                       mag * math.sin(phase) if math.sin(phase) else 0.0)
    keep = phi_star > 1e-15
    s_star = np.concatenate([[0.0], s_star[keep]])
    phi_star = np.concatenate([[0.0], phi_star[keep]])
    j1 = s_star.size
    p = np.concatenate([[max(0.0, -2 * (alpha - beta + 1))], np.ones(j1 - 1)])
    q = np.concatenate([np.ones(j1 - 1), [np.inf]])
    phi_ext = np.concatenate([phi_star, [np.inf]])

    admissible = [
        j for j in range(j1)
        if phi_ext[j] < (log_eps_target - math.log(_EPS)) / t and phi_ext[j] < phi_ext[j + 1]
    ]
    for _ in range(20):
        params = {}
        for j in admissible:
            if j < j1 - 1:
                params[j] = _optimal_param_rb(t, phi_ext[j], phi_ext[j + 1], p[j], q[j], log_eps_target)
            else:
                params[j] = _optimal_param_ru(t, phi_ext[j], p[j], log_eps_target)
        best = min(params, key=lambda j: params[j][2])
        if params[best][2] <= 200:
            break
        log_eps_target += math.log(10)
    else:
        raise ConvergenceError("no admissible contour for Mittag-Leffler inversion")
    mu, h, n = params[best]
    k = np.arange(-n, n + 1)
    u = h * k
    s = mu * (1j * u + 1) ** 2
    ds = -2 * mu * u + 2j * mu
    with np.errstate(over="ignore", invalid="ignore"):
        integrand = np.exp(s * t) * s ** (alpha - beta) / (s**alpha - z) * ds
    integral = h * np.sum(integrand) / (2j * math.pi)
    poles = s_star[best + 1:]
    residues = np.sum(poles ** (1 - beta) * np.exp(t * poles)) / alpha
    return complex(integral + residues)


def _ml_scalar(alpha: float, beta: float, z: complex) -> complex:
    if abs(z) < 1e-15:
        return complex(special.rgamma(beta))
    if alpha == 1.0:
        closed = _ml_closed_alpha1(beta, z)
        if closed is not None and abs(z) > 1:
            return complex(closed)
    if abs(z) <= 1.0:
        return _ml_series(alpha, beta, z)
    val = _ml_contour(alpha, beta, z)
    if np.isnan(val):
        raise ConvergenceError(f"Mittag-Leffler evaluation failed at z={z}")
    return val


def mittag_leffler(alpha: float, beta: float, z):
    """Two-parameter Mittag-Leffler function ``E_{alpha,beta}(z)``.

    Uses the power series for ``|z| <= 1`` and numerical inversion of the
    Laplace transform ``s^(alpha-beta) / (s^alpha - z)`` on optimal
    parabolic contours otherwise. ``z`` may be an array; real input with a
    real result is returned as real.
    """
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    alpha = float(alpha)
    beta = float(beta)
    zarr = np.asarray(z)
    flat = zarr.ravel().astype(complex)
    if alpha == 1.0 and beta == 1.0:
        out = np.exp(flat)
    else:
        out = np.array([_ml_scalar(alpha, beta, complex(v)) for v in flat], dtype=complex)
    if not np.iscomplexobj(zarr):
        out = out.real
    out = out.reshape(zarr.shape)
    return out[()] if out.ndim == 0 else out

# }}}

# Wright function {{{

def _wright_series_double(rho: float, nu: complex, z: complex):
    terms = []
    zn = 1.0 + 0.0j
    fact = 1.0
    partial = 0.0
    quiet = 0
    biggest = 0.0
    for n in range(5000):
        term = zn / fact * special.rgamma(rho * n + nu)
        terms.append(term)
        partial += term
        biggest = max(biggest, abs(term))
        if abs(term) < 1e-16 * abs(partial) or (term == 0 and n > 10 and abs(partial) > 0):
            quiet += 1
            if quiet >= 10:
                return _neumaier(terms), biggest
        else:
            quiet = 0
        zn *= z
        fact *= n + 1
        if not np.isfinite(fact):
            # switch to log form once n! overflows
            break
    raise ConvergenceError("Wright series did not converge in double precision")


def _wright_series_mp(rho: float, nu: complex, z: complex, digits: int) -> complex:
    with mpmath.workdps(digits):
        zz = mpmath.mpc(z)
        rho_m = mpmath.mpf(rho)
        nu_m = mpmath.mpc(nu)
        partial = mpmath.mpc(0)
        quiet = 0
        term_z = mpmath.mpc(1)
        fact = mpmath.mpf(1)
        for n in range(100000):
            term = term_z / fact * mpmath.rgamma(rho_m * n + nu_m)
            partial += term
            if abs(term) < mpmath.mpf(10) ** (-digits) * abs(partial):
                quiet += 1
                if quiet >= 10:
                    return complex(partial)
            else:
                quiet = 0
            term_z *= zz
            fact *= n + 1
    raise ConvergenceError("Wright series did not converge")


_TALBOT = (0.5017, 0.6407, 0.6122, 0.2645)


def _wright_talbot(rho: float, nu: float, x: np.ndarray, nodes: int = 48) -> np.ndarray:
    """phi(rho, nu; -x) for rho in (0, 1), x >= 0, as an inverse Laplace
    transform of mu^(-nu) exp(-x mu^(-rho)) evaluated at time 1."""
    a, b, c, d = _TALBOT
    theta = -math.pi + (np.arange(nodes) + 0.5) * 2 * math.pi / nodes
    lam = nodes * (a * theta / np.tan(b * theta) - c + 1j * d * theta)
    dlam = nodes * (a / np.tan(b * theta) - a * b * theta / np.sin(b * theta) ** 2 + 1j * d)
    weights = np.exp(lam) * lam ** (-nu) * dlam / (1j * nodes)
    expo = -np.outer(x, lam ** (-rho))
    return (np.exp(expo) @ weights).real


def _wright_series_vec(rho: float, nu: float, x: np.ndarray) -> np.ndarray:
    total = np.zeros_like(x)
    power = np.ones_like(x)
    inv_fact = 1.0
    for n in range(400):
        term = power * inv_fact * special.rgamma(rho * n + nu)
        total += term
        if n > 5 and np.all(np.abs(term) <= 1e-17 * np.maximum(np.abs(total), 1e-300)):
            break
        power = power * -x
        inv_fact /= n + 1
    return total


def wright_phi_negative(rho: float, nu: float, x, chunk: int = 200_000) -> np.ndarray:
    """Vectorized ``phi(rho, nu; -x)`` for ``rho`` in (0, 1), real ``nu`` and
    ``x >= 0``; absolute accuracy around 1e-13."""
    x = np.asarray(x, dtype=float)
    flat = x.ravel()
    out = np.empty_like(flat)
    small = flat <= 4.0
    if np.any(small):
        out[small] = _wright_series_vec(rho, nu, flat[small])
    big = np.flatnonzero(~small)
    for start in range(0, big.size, chunk):
        idx = big[start:start + chunk]
        out[idx] = _wright_talbot(rho, nu, flat[idx])
    return out.reshape(x.shape)


def wright_phi(rho: float, nu, z):
    """Wright function ``sum z^n / (n! Gamma(rho n + nu))``.

    The series is summed in double precision and repeated in extended
    precision when the largest term dwarfs the result. For ``rho`` in (0, 1)
    and real ``z < -50`` the value comes from a Talbot contour inversion
    instead, which is accurate in the absolute sense only.
    """
    if not rho > -1:
        raise DomainError(f"rho must exceed -1, got {rho}")
    zc = complex(z)
    nuc = complex(nu)
    real_out = not isinstance(z, complex) and not isinstance(nu, complex) and zc.imag == 0
    if 0 < rho < 1 and zc.imag == 0 and zc.real < -50.0 and nuc.imag == 0:
        val = complex(_wright_talbot(rho, nuc.real, np.array([-zc.real]))[0])
    else:
        val, biggest = _wright_series_double(rho, nuc, zc)
        digits = 16
        while biggest > 1e4 * abs(val) * 10.0 ** (digits - 16):
            # the double-precision value may itself be noise, so repeat
            # until the working precision covers the observed cancellation
            lost = math.log10(biggest / max(abs(val), 1e-300))
            if lost + 25 <= digits:
                break
            digits = int(lost + 25)
            val = _wright_series_mp(rho, nuc, zc, digits)
    if not np.isfinite(val):
        raise ConvergenceError("Wright function evaluation overflowed")
    return val.real if real_out else val

# }}}

# Bessel function {{{

def _bessel_series(nu: float, x: np.ndarray) -> np.ndarray:
    q = -(x * x) / 4.0
    term = np.ones_like(x)
    total = np.ones_like(x)
    for k in range(1, 200):
        term = term * q / (k * (nu + k))
        total = total + term
        if np.all(np.abs(term) <= 1e-17 * np.abs(total)):
            break
    return (x / 2.0) ** nu * special.rgamma(nu + 1.0) * total


def _bessel_miller(nu: float, x: np.ndarray) -> np.ndarray:
    # backward recurrence normalized by (x/2)^nu = sum (nu+2k) Gamma(nu+k)/k! J_{nu+2k}
    xmax = float(np.max(x))
    top = 2 * int((xmax + 15 * xmax ** (1 / 3) + 40) // 2)
    f_next = np.zeros_like(x)
    f_cur = np.full_like(x, 1e-30)
    coeff = np.empty(top // 2 + 1)
    coeff[0] = special.gamma(nu) if nu > 0 else 1.0
    for k in range(1, coeff.size):
        coeff[k] = coeff[k - 1] * (nu + k - 1) / k
    norm = np.zeros_like(x)
    for j in range(top, 0, -1):
        if j % 2 == 0:
            norm += (nu + j) * coeff[j // 2] * f_cur
        f_prev = 2.0 * (nu + j) / x * f_cur - f_next
        f_next, f_cur = f_cur, f_prev
        big = np.abs(f_cur) > 1e250
        if np.any(big):
            scale = np.where(big, 1e-250, 1.0)
            f_cur, f_next, norm = f_cur * scale, f_next * scale, norm * scale
    norm += nu * coeff[0] * f_cur
    return f_cur * (x / 2.0) ** nu / norm


def _bessel_asymptotic(nu: float, x: np.ndarray) -> np.ndarray:
    mu = 4.0 * nu * nu
    p = np.ones_like(x)
    q = np.zeros_like(x)
    term = np.ones_like(x)
    prev = np.full_like(x, np.inf)
    active = np.ones(x.shape, dtype=bool)
    for k in range(1, 80):
        term = term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        mag = np.abs(term)
        active &= mag < prev
        contrib = np.where(active, term, 0.0)
        if k % 2 == 1:
            q += contrib * (-1) ** ((k - 1) // 2)
        else:
            p += contrib * (-1) ** (k // 2)
        prev = mag
        active &= mag > 1e-17
        if not np.any(active):
            break
    chi = x - (nu / 2.0 + 0.25) * math.pi
    return np.sqrt(2.0 / (math.pi * x)) * (p * np.cos(chi) - q * np.sin(chi))


def bessel_j(nu: float, x):
    """Bessel function of the first kind ``J_nu(x)`` for ``nu > 0``, ``x >= 0``.

    Power series up to x = 10, Miller backward recurrence on (10, 30) and the
    Hankel asymptotic expansion from x = 30 on.
    """
    if not nu > 0:
        raise DomainError(f"nu must be positive, got {nu}")
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0):
        raise DomainError("x must be nonnegative")
    flat = xa.ravel()
    out = np.zeros_like(flat)
    lo = flat <= 10.0
    mid = (flat > 10.0) & (flat < 30.0)
    hi = flat >= 30.0
    if np.any(lo):
        out[lo] = _bessel_series(nu, flat[lo])
    if np.any(mid):
        out[mid] = _bessel_miller(nu, flat[mid])
    if np.any(hi):
        out[hi] = _bessel_asymptotic(nu, flat[hi])
    out = out.reshape(xa.shape)
    return float(out) if out.ndim == 0 else out

# }}}

# Caputo derivative {{{

def caputo_derivative(u: SampledFunction, alpha: float, initial_terms: Sequence[float]) -> SampledFunction:
    """Discrete Caputo derivative of order ``alpha`` in (0, 2).

    ``initial_terms`` holds ``u(0)`` and, for ``alpha > 1``, ``u'(0)``; the
    point t = 0 is prepended to the grid. For ``alpha < 1`` this is the L1
    scheme; for ``alpha > 1`` it is the L1 scheme of order ``alpha - 1``
    applied to a second-order finite-difference derivative.
    """
    if not 0 < alpha < 2:
        raise DomainError(f"alpha must lie in (0, 2), got {alpha}")
    m = math.ceil(alpha)
    if len(initial_terms) != m:
        raise DomainError(f"expected {m} initial terms, got {len(initial_terms)}")
    t = np.concatenate([[0.0], u.grid])
    if u.grid[0] == 0:
        raise DomainError("grid must start after t = 0; the initial value is supplied separately")
    vals = np.concatenate([np.asarray(initial_terms[:1], dtype=u.values.dtype if np.iscomplexobj(u.values) else float).reshape((1,) + u.values.shape[1:]) * np.ones((1,) + u.values.shape[1:]), u.values])
    h = np.diff(t)
    slopes = np.diff(vals, axis=0) / h.reshape((-1,) + (1,) * (vals.ndim - 1))
    n_pts = u.grid.size
    out = np.empty_like(u.values, dtype=np.result_type(u.values, float))
    if alpha == 1.0:
        out[:] = slopes
        return SampledFunction(u.grid, out)
    if alpha < 1:
        dens = slopes
        order = 1.0 - alpha
        norm = special.rgamma(2.0 - alpha)
    else:
        # L1 scheme of order alpha - 1 applied to a second-order derivative estimate
        deriv = np.gradient(vals, t, axis=0, edge_order=2)
        deriv[0] = np.asarray(initial_terms[1])
        dens = np.diff(deriv, axis=0) / h.reshape((-1,) + (1,) * (vals.ndim - 1))
        order = 2.0 - alpha
        norm = special.rgamma(3.0 - alpha)
    for i in range(n_pts):
        tn = t[i + 1]
        w = (tn - t[: i + 1]) ** order - (tn - t[1: i + 2]) ** order
        out[i] = norm * np.tensordot(w, dens[: i + 1], axes=(0, 0))
    return SampledFunction(u.grid, out)

# }}}
