"""Numerical building blocks: Bessel family, scalar 0F1, Gaussian CDF,
adaptive Gauss-Kronrod quadrature, bisection and seeded random streams.

Functions that take ``x`` accept scalars or numpy arrays and broadcast.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import special

__all__ = [
    "DomainError",
    "NumericalError",
    "QuadratureResult",
    "RngStream",
    "log_bessel_i",
    "bessel_quotient",
    "scalar_0f1",
    "std_normal_cdf",
    "std_normal_quantile",
    "adaptive_quadrature",
    "bisect",
]


class DomainError(ValueError):
    """Input outside the mathematical domain of an operation."""


class NumericalError(RuntimeError):
    """A numerical routine failed to reach its tolerance.

    ``partial`` carries the best estimate available at the point of failure.
    """

    def __init__(self, message: str, partial: object = None):
        super().__init__(message)
        self.partial = partial


# ---------------------------------------------------------------------------
# Modified Bessel functions of the first kind
# ---------------------------------------------------------------------------

_SERIES_TERMS = 80
# below this argument the backward continued fraction is used for quotients
_CF_SWITCH = 50.0


def _log_bessel_series(nu: np.ndarray, x: np.ndarray) -> np.ndarray:
    # log I_nu(x) = nu log(x/2) - lgamma(nu+1) + log sum_k (x^2/4)^k / (k! (nu+1)_k)
    q = 0.25 * x * x
    term = np.ones_like(x)
    total = np.ones_like(x)
    for k in range(1, _SERIES_TERMS):
        term = term * q / (k * (nu + k))
        total = total + term
    with np.errstate(divide="ignore"):
        return nu * np.log(0.5 * x) - special.gammaln(nu + 1.0) + np.log(total)


def _hankel_sum(nu: np.ndarray, x: np.ndarray) -> np.ndarray:
    # large-argument expansion: I_nu(x) ~ e^x / sqrt(2 pi x) * sum_k (-1)^k a_k(nu) / x^k
    mu = 4.0 * nu * nu
    term = np.ones_like(x)
    total = np.ones_like(x)
    for k in range(1, 8):
        term = -term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        total = total + term
    return total


def _huge(nu: np.ndarray, x: np.ndarray) -> np.ndarray:
    # region where the Hankel expansion is exact to double precision
    return x > 1e8 + 1e4 * nu * nu


def _log_bessel_hankel(nu: np.ndarray, x: np.ndarray) -> np.ndarray:
    return x - 0.5 * np.log(2.0 * np.pi * x) + np.log(_hankel_sum(nu, x))


def log_bessel_i(nu, x):
    """Logarithm of the modified Bessel function ``I_nu(x)``.

    Evaluated through the exponentially scaled ``ive`` so that arguments up to
    1e6 and beyond neither overflow nor lose relative accuracy. Where the
    scaled value underflows (small ``x`` and large order) a power series is
    used instead.

    Args:
        nu: order, ``nu >= 0``.
        x: argument, ``x >= 0``.

    Returns:
        ``log I_nu(x)``; ``-inf`` at ``x == 0`` for ``nu > 0``.
    """
    nu_a, x_a = np.broadcast_arrays(np.asarray(nu, dtype=float), np.asarray(x, dtype=float))
    if np.any(~np.isfinite(nu_a)) or np.any(~np.isfinite(x_a)):
        raise DomainError("log_bessel_i requires finite inputs")
    if np.any(nu_a < 0) or np.any(x_a < 0):
        raise DomainError("log_bessel_i requires nu >= 0 and x >= 0")
    huge = _huge(nu_a, x_a)
    scaled = special.ive(nu_a, np.where(huge, 1.0, x_a))
    with np.errstate(divide="ignore"):
        out = np.log(scaled) + x_a
    if np.any(huge):
        with np.errstate(divide="ignore", invalid="ignore"):
            asym = _log_bessel_hankel(nu_a, np.where(huge, x_a, 1e9))
        out = np.where(huge, asym, out)
        scaled = np.where(huge, 1.0, scaled)
    # ive underflows (or loses relative accuracy) long before the series does
    weak = scaled < 1e-280
    if np.any(weak):
        out = np.where(weak, _log_bessel_series(nu_a, x_a), out)
    zero = x_a == 0
    if np.any(zero):
        out = np.where(zero, np.where(nu_a == 0, 0.0, -np.inf), out)
    return out[()] if out.ndim == 0 else out


def _quotient_cf(nu: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Backward evaluation of the Gauss continued fraction for I_{nu+1}/I_nu.

    R_nu = x / (2(nu+1) + x R_{nu+1}); started from R = 0 deep enough that the
    truncation error is below double precision for x <= _CF_SWITCH.
    """
    depth = int(np.max(x, initial=0.0) * 1.5) + 40
    r = np.zeros_like(x)
    for j in range(depth, -1, -1):
        r = x / (2.0 * (nu + j + 1.0) + x * r)
    return r


def bessel_quotient(nu, x):
    """Bessel quotient ``R_nu(x) = I_{nu+1}(x) / I_nu(x)``.

    Small and moderate arguments use a backward continued fraction; for
    ``x > 50`` the ratio of exponentially scaled values is taken, both of
    which are O(x^-1/2) there so no overflow or cancellation occurs; for
    ``x > 1e8`` the ratio of the large-argument expansions is used.

    Returns values in ``[0, 1)``.
    """
    nu_a, x_a = np.broadcast_arrays(np.asarray(nu, dtype=float), np.asarray(x, dtype=float))
    if np.any(nu_a < 0) or np.any(x_a < 0):
        raise DomainError("bessel_quotient requires nu >= 0 and x >= 0")
    if np.any(~np.isfinite(x_a)) or np.any(~np.isfinite(nu_a)):
        raise DomainError("bessel_quotient requires finite inputs")
    out = np.empty(x_a.shape, dtype=float)
    small = x_a <= _CF_SWITCH
    if np.any(small):
        out[small] = _quotient_cf(nu_a[small], x_a[small])
    huge = _huge(nu_a, x_a)
    big = ~small & ~huge
    if np.any(big):
        out[big] = special.ive(nu_a[big] + 1.0, x_a[big]) / special.ive(nu_a[big], x_a[big])
    if np.any(huge):
        out[huge] = _hankel_sum(nu_a[huge] + 1.0, x_a[huge]) / _hankel_sum(nu_a[huge], x_a[huge])
    return out[()] if out.ndim == 0 else out


def scalar_0f1(b, x):
    """``log 0F1(b; x)`` for real ``b > 0`` and ``x >= 0``.

    Uses 0F1(b; x) = Gamma(b) x^((1-b)/2) I_{b-1}(2 sqrt(x)).
    """
    b_a, x_a = np.broadcast_arrays(np.asarray(b, dtype=float), np.asarray(x, dtype=float))
    if np.any(b_a <= 0):
        raise DomainError("scalar_0f1 requires b > 0")
    if np.any(x_a < 0):
        raise DomainError("scalar_0f1 requires x >= 0")
    z = 2.0 * np.sqrt(x_a)
    order = b_a - 1.0
    out = np.zeros(x_a.shape, dtype=float)
    pos = x_a > 0
    if np.any(pos):
        o, zz, xx, bb = order[pos], z[pos], x_a[pos], b_a[pos]
        with np.errstate(divide="ignore"):
            # ive accepts orders in (-1, 0); log_bessel_i is reserved for nu >= 0
            log_i = np.where(o >= 0, log_bessel_i(np.maximum(o, 0.0), zz), np.log(special.ive(o, zz)) + zz)
        out[pos] = special.gammaln(bb) + 0.5 * (1.0 - bb) * np.log(xx) + log_i
        # series is more accurate than the Bessel route for tiny arguments
        tiny = xx < 1e-3
        if np.any(tiny):
            q = xx[tiny]
            bt = bb[tiny]
            s = 1.0 + q / bt * (1.0 + q / (2.0 * (bt + 1.0)) * (1.0 + q / (3.0 * (bt + 2.0))))
            sub = out[pos]
            sub[tiny] = np.log(s)
            out[pos] = sub
    return out[()] if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Gaussian CDF
# ---------------------------------------------------------------------------


def std_normal_cdf(z):
    """Standard normal CDF, accurate in both tails."""
    return special.ndtr(z)


def std_normal_quantile(p):
    """Inverse of :func:`std_normal_cdf` on the open interval (0, 1)."""
    p_a = np.asarray(p, dtype=float)
    if np.any(p_a <= 0) or np.any(p_a >= 1) or np.any(np.isnan(p_a)):
        raise DomainError("quantile requires p strictly inside (0, 1)")
    return special.ndtri(p_a)


# ---------------------------------------------------------------------------
# Adaptive Gauss-Kronrod quadrature
# ---------------------------------------------------------------------------

# 15-point Kronrod nodes/weights on [-1, 1] with embedded 7-point Gauss rule
_XK = np.array([
    -0.991455371120812639206854697526329, -0.949107912342758524526189684047851,
    -0.864864423359769072789712788640926, -0.741531185599394439863864773280788,
    -0.586087235467691130294144845693013, -0.405845151377397166906606412076961,
    -0.207784955007898467600689403773245, 0.0,
    0.207784955007898467600689403773245, 0.405845151377397166906606412076961,
    0.586087235467691130294144845693013, 0.741531185599394439863864773280788,
    0.864864423359769072789712788640926, 0.949107912342758524526189684047851,
    0.991455371120812639206854697526329,
])
_WK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
    0.204432940075298892414161999234649, 0.190350578064785409913256402421014,
    0.169004726639267902826583426598550, 0.140653259715525918745189590510238,
    0.104790010322250183839876322541518, 0.063092092629978553290700663189204,
    0.022935322010529224963732008058970,
])
_WG = np.zeros(15)
_WG[1::2] = [
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
    0.381830050505118944950369775488975, 0.279705391489276667901467771423780,
    0.129484966168869693270611432679082,
]


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    abs_error_estimate: float
    evaluations: int


def _gk15(f, a: float, b: float):
    c, h = 0.5 * (a + b), 0.5 * (b - a)
    y = np.asarray(f(c + h * _XK), dtype=float)
    if y.shape != _XK.shape:
        y = np.broadcast_to(y, _XK.shape)
    if not np.all(np.isfinite(y)):
        raise NumericalError(f"integrand is not finite on [{a}, {b}]")
    k = h * float(_WK @ y)
    g = h * float(_WG @ y)
    return k, abs(k - g)


def _mapped(f: Callable, a: float):
    # x = a + t/(1-t) maps [0, 1) onto [a, inf)
    def g(t):
        t = np.asarray(t, dtype=float)
        one_m = 1.0 - t
        x = a + t / one_m
        return np.asarray(f(x), dtype=float) / (one_m * one_m)

    return g


def adaptive_quadrature(
    f: Callable,
    a: float,
    b: float,
    tol: float,
    *,
    rel_tol: float = 0.0,
    mode: Optional[float] = None,
    max_intervals: int = 4000,
) -> QuadratureResult:
    """Globally adaptive 15-point Gauss-Kronrod quadrature of ``f`` over [a, b].

    ``f`` must accept a numpy array of abscissae and return an array of the
    same shape. ``b = inf`` is handled by the substitution
    ``x = a + t / (1 - t)``. When ``mode`` is given and lies inside the range
    the interval is split there first, which keeps a sharp peak from being
    skipped by the initial Kronrod sample.

    Converges when the summed error estimate is at most
    ``max(tol, rel_tol * |value|)``.

    Raises:
        DomainError: if ``a >= b`` or ``tol <= 0``.
        NumericalError: if the subdivision budget is exhausted; the partial
            :class:`QuadratureResult` is attached as ``.partial``.
    """
    if not tol > 0:
        raise DomainError("tol must be positive")
    if not a < b:
        raise DomainError("adaptive_quadrature requires a < b")
    if math.isinf(a):
        raise DomainError("lower limit must be finite")

    pieces = []
    if mode is not None and a < mode < b:
        pieces.append((f, a, float(mode)))
        a = float(mode)
    if math.isinf(b):
        pieces.append((_mapped(f, a), 0.0, 1.0))
    else:
        pieces.append((f, a, b))

    heap = []
    total = 0.0
    err = 0.0
    evals = 0
    for g, lo, hi in pieces:
        k, e = _gk15(g, lo, hi)
        evals += 15
        total += k
        err += e
        # index disambiguates equal errors so the heap never compares functions
        heapq.heappush(heap, (-e, len(heap) + evals, lo, hi, k, g))

    counter = evals
    while err > max(tol, rel_tol * abs(total)):
        if len(heap) >= max_intervals:
            raise NumericalError(
                f"quadrature did not converge (error {err:.3e} > tol {tol:.3e})",
                partial=QuadratureResult(total, err, evals),
            )
        neg_e, _, lo, hi, k, g = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            raise NumericalError("interval underflow in quadrature", partial=QuadratureResult(total, err, evals))
        k1, e1 = _gk15(g, lo, mid)
        k2, e2 = _gk15(g, mid, hi)
        evals += 30
        total += k1 + k2 - k
        err += e1 + e2 + neg_e
        counter += 2
        heapq.heappush(heap, (-e1, counter, lo, mid, k1, g))
        heapq.heappush(heap, (-e2, counter + 1, mid, hi, k2, g))

    # re-sum from the leaves to shed accumulated rounding in the running total
    total = math.fsum(item[4] for item in heap)
    err = math.fsum(-item[0] for item in heap)
    return QuadratureResult(total, err, evals)


def bisect(f: Callable[[float], float], lo: float, hi: float, tol: float, max_iter: int = 200) -> float:
    """Root of ``f`` on ``[lo, hi]`` by bisection; bracket width ends <= tol."""
    if not tol > 0:
        raise DomainError("tol must be positive")
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if flo * fhi > 0:
        raise DomainError(f"no sign change on [{lo}, {hi}]")
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0:
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------------------
# Random streams
# ---------------------------------------------------------------------------

_MASK64 = (1 << 64) - 1


def _splitmix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


@dataclass
class RngStream:
    """Seeded, splittable random stream backed by the Philox counter generator.

    Identical ``(seed, stream_id)`` pairs replay identical draws. ``split``
    derives statistically independent child streams.
    """

    seed: int
    stream_id: int = 0
    _gen: Optional[np.random.Generator] = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (0 <= self.seed <= _MASK64 and 0 <= self.stream_id <= _MASK64):
            raise DomainError("seed and stream_id must be unsigned 64-bit integers")

    @property
    def gen(self) -> np.random.Generator:
        if self._gen is None:
            ss = np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream_id,))
            self._gen = np.random.Generator(np.random.Philox(ss))
        return self._gen

    def split(self, index: int) -> "RngStream":
        return RngStream(self.seed, _splitmix64((self.stream_id * 0x100000001B3 + index + 1) & _MASK64))

    def fresh(self) -> "RngStream":
        """A copy positioned at the start of the same stream."""
        return RngStream(self.seed, self.stream_id)

    def normal(self, size=None) -> np.ndarray:
        return self.gen.standard_normal(size)
