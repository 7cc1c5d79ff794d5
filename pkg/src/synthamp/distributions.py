"""Distributions of the linear synthetic-data mechanism.

The mechanism draws parameter noise ``N`` (d x k, standard normal), forms
``V = v + N`` and releases ``Z V`` for a latent matrix ``Z`` (n_syn x d,
standard normal). For ``k = 1`` the Gram statistic ``V^T V`` is non-central
chi-squared with ``d`` degrees of freedom and non-centrality ``||v||^2``; we
parametrize it by the amplitude ``theta = ||v||``.

Noise scales are fixed to one throughout; callers working with other scales
divide sensitivities and norms by the noise level first.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Literal, Optional, Union

import numpy as np
from scipy import special

from .mathkit import (
    DomainError,
    RngStream,
    adaptive_quadrature,
    bessel_quotient,
    log_bessel_i,
)

__all__ = [
    "NoncentralChiSq",
    "GeneratorPair",
    "PrivacyParams",
    "ScoreBoundaryWarning",
    "ncx2_log_pdf",
    "ncx2_score",
    "sample_ncx2",
    "sample_release",
    "sample_gram",
    "sample_release_stat_k1",
    "finite_n_pdf_k1",
    "log_chi2_log_pdf",
]

Which = Literal["v", "w"]


class ScoreBoundaryWarning(UserWarning):
    """The score was requested at theta = 0, where it is set to its limit 0."""


@dataclass(frozen=True)
class NoncentralChiSq:
    """Non-central chi-squared law of ``||g + theta e_1||^2``, g ~ N(0, I_d)."""

    d: int
    theta: float

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise DomainError(f"degrees of freedom must be a positive integer, got {self.d}")
        if not (self.theta >= 0 and math.isfinite(self.theta)):
            raise DomainError(f"theta must be finite and >= 0, got {self.theta}")
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "theta", float(self.theta))

    @property
    def mean(self) -> float:
        return self.d + self.theta**2

    @property
    def mode_hint(self) -> float:
        return max(self.d - 2.0 + self.theta**2, 1e-3)


@dataclass(frozen=True)
class PrivacyParams:
    """The tuple indexing every bound.

    Attributes:
        alpha: Rényi order, > 1.
        delta_sens: sensitivity ``||v - w||_F``.
        C: cap on ``||v||_F`` and ``||w||_F``.
        d: model width.
        k: record dimension.
        n_syn: number of released records; ``None`` (or ``"infinite"``) for
            the unlimited-release limit.
    """

    alpha: float
    delta_sens: float
    C: float
    d: int
    k: int = 1
    n_syn: Optional[Union[int, str]] = None

    def __post_init__(self):
        if not self.alpha > 1 or not math.isfinite(self.alpha):
            raise DomainError(f"alpha must be > 1, got {self.alpha}")
        if not self.C > 0:
            raise DomainError(f"C must be > 0, got {self.C}")
        if not self.delta_sens >= 0:
            raise DomainError(f"delta must be >= 0, got {self.delta_sens}")
        if self.delta_sens > 2 * self.C:
            raise DomainError("delta cannot exceed 2C when both parameters have norm <= C")
        for name in ("d", "k"):
            val = getattr(self, name)
            if int(val) != val or val < 1:
                raise DomainError(f"{name} must be a positive integer, got {val}")
            object.__setattr__(self, name, int(val))
        if self.k > self.d:
            raise DomainError("need d >= k for the release to admit a density")
        n = self.n_syn
        if isinstance(n, str):
            if n not in ("infinite", "inf"):
                raise DomainError(f"n_syn must be a positive integer or 'infinite', got {n!r}")
            n = None
        elif n is not None:
            if isinstance(n, float) and math.isinf(n):
                n = None
            elif int(n) != n or n < 1:
                raise DomainError(f"n_syn must be >= 1, got {n}")
            else:
                n = int(n)
        object.__setattr__(self, "n_syn", n)


@dataclass(frozen=True)
class GeneratorPair:
    """Adjacent generator parameters ``v`` and ``w`` (both d x k)."""

    v: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.v, dtype=float))
        w = np.atleast_2d(np.asarray(self.w, dtype=float))
        if v.shape != w.shape:
            raise DomainError(f"v and w shapes differ: {v.shape} vs {w.shape}")
        d, k = v.shape
        if not d >= k >= 1:
            raise DomainError(f"need d >= k >= 1, got d={d}, k={k}")
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "w", w)

    @property
    def d(self) -> int:
        return self.v.shape[0]

    @property
    def k(self) -> int:
        return self.v.shape[1]

    @property
    def delta(self) -> float:
        return float(np.linalg.norm(self.v - self.w))

    def param(self, which: Which) -> np.ndarray:
        if which == "v":
            return self.v
        if which == "w":
            return self.w
        raise DomainError(f"which must be 'v' or 'w', got {which!r}")

    @classmethod
    def collinear(cls, d: int, norm_v: float, norm_w: float, k: int = 1) -> "GeneratorPair":
        """Pair along the first basis direction: ``v = norm_v e_1``, ``w = norm_w e_1``."""
        v = np.zeros((d, k))
        w = np.zeros((d, k))
        v[0, 0] = norm_v
        w[0, 0] = norm_w
        return cls(v, w)

    @classmethod
    def from_params(cls, params: PrivacyParams) -> "GeneratorPair":
        """Collinear pair with ``||v|| = C`` and ``w = (C - Delta) e_1``.

        The separation is exactly Delta and both norms stay within C.
        """
        return cls.collinear(params.d, params.C, params.C - params.delta_sens, params.k)


# ---------------------------------------------------------------------------
# Non-central chi-squared density and score
# ---------------------------------------------------------------------------


def _log_bessel_any(nu: float, z):
    # d = 1 gives order -1/2, outside log_bessel_i's domain: I_{-1/2}(z) = sqrt(2/(pi z)) cosh z
    if nu >= 0:
        return log_bessel_i(nu, z)
    z = np.asarray(z, dtype=float)
    return 0.5 * np.log(2.0 / (np.pi * z)) + z + np.log1p(np.exp(-2.0 * z)) - math.log(2.0)


def _central_log_pdf(d: int, x):
    h = 0.5 * d
    return (h - 1.0) * np.log(x) - 0.5 * x - h * math.log(2.0) - special.gammaln(h)


def ncx2_log_pdf(dist: NoncentralChiSq, x):
    """Log-density of ``dist`` at ``x > 0`` (broadcasts over arrays).

    Bessel form: ``p(x) = 1/2 exp(-(x + theta^2)/2) (x/theta^2)^(d/4 - 1/2)
    I_{d/2-1}(theta sqrt(x))``; the central density when ``theta = 0``.
    """
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise DomainError("ncx2_log_pdf requires x > 0")
    d, th = dist.d, dist.theta
    if th == 0.0:
        out = _central_log_pdf(d, x)
    else:
        nu = 0.5 * d - 1.0
        out = (
            -math.log(2.0)
            - 0.5 * (x + th * th)
            + (0.25 * d - 0.5) * (np.log(x) - 2.0 * math.log(th))
            + _log_bessel_any(nu, th * np.sqrt(x))
        )
    return out[()] if out.ndim == 0 else out


def ncx2_score(dist: NoncentralChiSq, x):
    """Score ``d/dtheta log p(x) = -theta + sqrt(x) R_{d/2-1}(theta sqrt(x))``.

    At ``theta = 0`` the score is identically zero by symmetry; zeros are
    returned and a :class:`ScoreBoundaryWarning` is emitted.
    """
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise DomainError("ncx2_score requires x > 0")
    th = dist.theta
    if th == 0.0:
        warnings.warn("score at theta = 0 taken as its limit 0", ScoreBoundaryWarning, stacklevel=2)
        out = np.zeros_like(x)
        return out[()] if out.ndim == 0 else out
    rx = np.sqrt(x)
    nu = 0.5 * dist.d - 1.0
    ratio = np.tanh(th * rx) if nu < 0 else bessel_quotient(nu, th * rx)
    out = -th + rx * ratio
    return out[()] if np.ndim(out) == 0 else out


def log_chi2_log_pdf(dist: NoncentralChiSq, u):
    """Log-density of ``log X`` for ``X ~ dist`` at ``u`` (any real)."""
    u = np.asarray(u, dtype=float)
    return ncx2_log_pdf(dist, np.exp(u)) + u


# ---------------------------------------------------------------------------
# Samplers
# ---------------------------------------------------------------------------

_CHUNK = 1 << 20


def sample_ncx2(dist: NoncentralChiSq, rng: RngStream, size: Optional[int] = None):
    """Draw ``||g + theta e_1||^2`` with ``g ~ N(0, I_d)``.

    Returns a float when ``size`` is None, else an array of ``size`` draws.
    """
    n = 1 if size is None else int(size)
    d = dist.d
    out = np.empty(n)
    step = max(1, _CHUNK // d)
    for lo in range(0, n, step):
        m = min(step, n - lo)
        g = rng.normal((m, d))
        g[:, 0] += dist.theta
        out[lo:lo + m] = np.einsum("ij,ij->i", g, g)
    return float(out[0]) if size is None else out


def sample_gram(pair: GeneratorPair, rng: RngStream, which: Which, size: Optional[int] = None):
    """Draw ``(param + N)^T (param + N)`` with ``N`` a d x k standard normal matrix.

    For ``k = 1`` and ``param = theta e_1`` this consumes the random stream
    exactly like :func:`sample_ncx2` and returns the same numbers.
    """
    p = pair.param(which)
    d, k = p.shape
    n = 1 if size is None else int(size)
    out = np.empty((n, k, k))
    step = max(1, _CHUNK // (d * k))
    for lo in range(0, n, step):
        m = min(step, n - lo)
        g = rng.normal((m, d, k)) + p
        if k == 1:
            out[lo:lo + m, 0, 0] = np.einsum("ij,ij->i", g[:, :, 0], g[:, :, 0])
        else:
            out[lo:lo + m] = np.einsum("nij,nil->njl", g, g)
    return out[0] if size is None else out


def sample_release(pair: GeneratorPair, n_syn: int, rng: RngStream, which: Which, size: Optional[int] = None):
    """Draw the released dataset ``Z (param + N)`` of shape ``n_syn x k``.

    ``N`` is drawn once per release, then ``Z``. With ``size`` given, returns
    ``size`` independent releases stacked along a leading axis.
    """
    if int(n_syn) != n_syn or n_syn < 1:
        raise DomainError("n_syn must be a positive integer")
    p = pair.param(which)
    d, k = p.shape
    n = 1 if size is None else int(size)
    out = np.empty((n, n_syn, k))
    step = max(1, _CHUNK // (d * (k + n_syn)))
    for lo in range(0, n, step):
        m = min(step, n - lo)
        vm = rng.normal((m, d, k)) + p
        z = rng.normal((m, n_syn, d))
        out[lo:lo + m] = np.matmul(z, vm)
    return out[0] if size is None else out


def sample_release_stat_k1(dist: NoncentralChiSq, n_syn: int, rng: RngStream, size: int) -> np.ndarray:
    """Draw ``log(||Z V||^2 / n_syn)`` for ``k = 1`` releases.

    Given ``V``, the release ``Z V`` is N(0, ||V||^2 I_n), so its squared norm
    ``||V||^2 chi2_n`` is sufficient and the direction is uniform regardless of
    ``V``. This holds for every ``n_syn >= 1``, not only ``n_syn >= d``.
    Divergences between releases therefore equal divergences between these
    scalars, which are far cheaper to sample than the full ``n_syn``-row data.
    """
    y = sample_ncx2(dist, rng, size)
    x = rng.gen.chisquare(n_syn, size)
    return np.log(y) + np.log(x / n_syn)


# ---------------------------------------------------------------------------
# Finite-n density (k = 1)
# ---------------------------------------------------------------------------


def _log_mixture_integrand(d: int, n_syn: int, theta: float, s: float, u):
    # integrand of p_S(s) = int p_Y(y) f_n(s/y) / y dy after y = e^u, in log space
    y = np.exp(u)
    return ncx2_log_pdf(NoncentralChiSq(d, theta), y) + _central_log_pdf(n_syn, s / y)


def finite_n_pdf_k1(d: int, n_syn: int, theta: float, s: float, tol: float = 1e-8) -> float:
    """Density of ``S = ||Z V||^2`` for ``k = 1`` at ``s > 0``.

    Conditionally on ``Y = ||V||^2`` we have ``S = Y X_n`` with ``X_n`` central
    chi-squared on ``n_syn`` degrees of freedom, so
    ``p_S(s) = int p_Y(y) f_n(s / y) / y dy``. The integral is taken in
    ``u = log y`` with the integrand rescaled by its peak, so values spanning
    hundreds of orders of magnitude stay representable.
    """
    if not s > 0:
        raise DomainError("finite_n_pdf_k1 requires s > 0")
    NoncentralChiSq(d, theta)
    if int(n_syn) != n_syn or n_syn < 1:
        raise DomainError("n_syn must be a positive integer")
    # locate the bulk of the integrand on a coarse grid in log y
    grid = np.concatenate([np.linspace(-60.0, 12.0, 1441), math.log(s) + np.linspace(-60.0, 60.0, 481)])
    grid = np.unique(grid[(grid > -200) & (grid < 200)])
    vals = _log_mixture_integrand(d, n_syn, theta, s, grid)
    peak_i = int(np.argmax(vals))
    peak = float(vals[peak_i])
    if not math.isfinite(peak):
        return 0.0
    keep = grid[vals > peak - 80.0]
    lo, hi = float(keep.min()) - 0.5, float(keep.max()) + 0.5

    def f(u):
        return np.exp(_log_mixture_integrand(d, n_syn, theta, s, u) - peak)

    res = adaptive_quadrature(f, lo, hi, tol, rel_tol=tol, mode=float(grid[peak_i]))
    return float(res.value * math.exp(peak))
