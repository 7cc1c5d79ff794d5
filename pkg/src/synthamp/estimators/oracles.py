"""Exact quadrature oracles and Monte-Carlo Fisher estimators for ``k = 1``."""

from __future__ import annotations

import math
from typing import Optional

import numpy as np
from scipy import special

from ..distributions import NoncentralChiSq, log_chi2_log_pdf, ncx2_log_pdf, ncx2_score, sample_ncx2
from ..mathkit import (
    DomainError,
    NumericalError,
    RngStream,
    adaptive_quadrature,
    bessel_quotient,
)

__all__ = [
    "fisher_quadrature_ncx2",
    "fisher_mc_ncx2",
    "renyi_ncx2_quadrature",
    "renyi_finite_n_k1",
    "renyi_finite_n_k1_pointwise",
    "renyi_gaussian_pair",
]


def _integrate_pieces(f, breaks, tol: float, rel_tol: float = 1e-10) -> float:
    # rel_tol absorbs the rounding floor of log-density differences at large x
    total = 0.0
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        if hi > lo:
            total += adaptive_quadrature(f, lo, hi, tol, rel_tol=rel_tol, max_intervals=20000).value
    return total


def _radial_breaks(centres, d: int, upper_pad: float = 40.0) -> list[float]:
    # integration in r = sqrt(x): mass sits within a few units of the amplitude
    spread = math.sqrt(d) + 12.0
    top = max(centres) + spread + upper_pad
    pts = {0.0, top}
    for c in centres:
        for off in (-spread, -6.0, 0.0, 6.0, spread):
            r = c + off
            if 0.0 < r < top:
                pts.add(r)
    return sorted(pts)


def fisher_quadrature_ncx2(d: int, theta: float, tol: float = 1e-12) -> float:
    """Fisher information ``E[score^2]`` of ``chi2_d(theta^2)`` in ``theta`` by quadrature."""
    dist = NoncentralChiSq(d, theta)
    if theta == 0:
        return 0.0
    mode_r = math.sqrt(max(d - 2.0, 0.0) + theta * theta)

    def f(r):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        pos = r > 0
        x = r[pos] ** 2
        # density of r = sqrt(x) is 2 r p(r^2)
        out[pos] = ncx2_score(dist, x) ** 2 * np.exp(ncx2_log_pdf(dist, x)) * 2.0 * r[pos]
        return out

    return _integrate_pieces(f, _radial_breaks([mode_r, theta], d), tol)


def fisher_mc_ncx2(
    d: int,
    theta: float,
    n_samples: int,
    rng: RngStream,
    representation: str = "score",
) -> tuple[float, float]:
    """Monte-Carlo Fisher information with its standard error.

    ``representation="score"`` averages the squared score over draws of
    ``chi2_d(theta^2)``. ``"rician"`` averages ``Y (R_{d/2-1}(Y) - R_{d/2}(Y))``
    over ``Y = theta sqrt(X)`` with ``X ~ chi2_{d+2}(theta^2)``.
    """
    if n_samples < 2:
        raise DomainError("need at least two samples")
    if theta == 0:
        return 0.0, 0.0
    if representation == "score":
        dist = NoncentralChiSq(d, theta)
        vals = ncx2_score(dist, sample_ncx2(dist, rng, n_samples)) ** 2
    elif representation == "rician":
        y = theta * np.sqrt(sample_ncx2(NoncentralChiSq(d + 2, theta), rng, n_samples))
        nu = 0.5 * d - 1.0
        lo = np.tanh(y) if nu < 0 else bessel_quotient(nu, y)
        vals = y * (lo - bessel_quotient(nu + 1.0, y))
    else:
        raise DomainError(f"unknown representation {representation!r}")
    return float(np.mean(vals)), float(np.std(vals, ddof=1) / math.sqrt(n_samples))


def renyi_gaussian_pair(alpha: float, delta: float) -> float:
    """``D_alpha(N(delta, 1) || N(0, 1)) = alpha delta^2 / 2``."""
    return 0.5 * alpha * delta * delta


def renyi_ncx2_quadrature(alpha: float, d: int, theta_v: float, theta_w: float, tol: float = 1e-13) -> float:
    """``D_alpha(chi2_d(theta_v^2) || chi2_d(theta_w^2))`` by quadrature.

    The integral ``int p_v^alpha p_w^(1-alpha)`` is written as ``1 + J`` with
    ``J = int p_w expm1(alpha log(p_v/p_w))`` so that divergences far below
    one are not lost to cancellation, and taken in ``r = sqrt(x)``.
    """
    if not alpha > 1:
        raise DomainError("alpha must be > 1")
    pv, pw = NoncentralChiSq(d, theta_v), NoncentralChiSq(d, theta_w)
    if theta_v == theta_w:
        return 0.0
    tilt = abs(alpha * theta_v - (alpha - 1) * theta_w)
    centres = [theta_v, theta_w, tilt, math.sqrt(max(d - 2.0, 0.0) + theta_w**2)]

    def f(r):
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        pos = r > 0
        x = r[pos] ** 2
        lw = ncx2_log_pdf(pw, x) + np.log(2.0 * r[pos])
        a = alpha * (ncx2_log_pdf(pv, x) - ncx2_log_pdf(pw, x))
        with np.errstate(over="ignore"):
            small = np.exp(lw) * np.expm1(np.minimum(a, 30.0))
            large = np.exp(lw + a) - np.exp(lw)
        out[pos] = np.where(a < 30.0, small, large)
        return out

    j = _integrate_pieces(f, _radial_breaks(centres, d), tol)
    if not math.isfinite(j) or j <= -1:
        raise NumericalError(f"Rényi integral is not finite (J = {j})")
    return max(math.log1p(j), 0.0) / (alpha - 1)


# ---------------------------------------------------------------------------
# Finite-n release (k = 1)
# ---------------------------------------------------------------------------


def _log_scaled_chi2_log_pdf(n: int, l):
    # density of L = log(X / n) with X ~ chi2_n
    h = 0.5 * n
    x = n * np.exp(l)
    return (h - 1.0) * np.log(x) - 0.5 * x - h * math.log(2.0) - special.gammaln(h) + np.log(x)


def _support(logpdf, lo: float, hi: float, drop: float) -> tuple[float, float]:
    grid = np.linspace(lo, hi, 4001)
    vals = logpdf(grid)
    keep = grid[vals > np.max(vals) - drop]
    step = grid[1] - grid[0]
    return float(keep.min() - step), float(keep.max() + step)


def renyi_finite_n_k1(
    alpha: float,
    d: int,
    n_syn: Optional[int],
    theta_v: float,
    theta_w: float,
    tol: float = 1e-10,
    drop: float = 70.0,
) -> float:
    """Exact ``D_alpha(ZV || ZW)`` for ``k = 1`` and ``n_syn`` released records.

    The released norm satisfies ``log(|ZV|^2 / n) = log Y + log(X_n / n)``
    with ``Y ~ chi2_d(theta^2)`` and ``X_n ~ chi2_n`` independent, and this
    statistic is sufficient. Its density is the convolution of the two
    log-densities, evaluated on a uniform grid fine enough to resolve the
    narrower factor; the trapezoid rule on smooth, rapidly decaying
    integrands is spectrally accurate, so the grid error sits far below
    ``tol``. ``n_syn=None`` returns the unlimited-release limit.
    """
    if not alpha > 1:
        raise DomainError("alpha must be > 1")
    pv, pw = NoncentralChiSq(d, theta_v), NoncentralChiSq(d, theta_w)
    if n_syn is None:
        return renyi_ncx2_quadrature(alpha, d, theta_v, theta_w, min(tol, 1e-13))
    if int(n_syn) != n_syn or n_syn < 1:
        raise DomainError("n_syn must be a positive integer")
    if theta_v == theta_w:
        return 0.0
    n = int(n_syn)
    sd_l = math.sqrt(float(special.polygamma(1, 0.5 * n)))
    h = min(0.01, sd_l / 40.0)

    top = math.log(d + max(theta_v, theta_w) ** 2 + 50.0) + 3.0
    u_lo_v, u_hi_v = _support(lambda u: log_chi2_log_pdf(pv, u), -120.0, top, drop)
    u_lo_w, u_hi_w = _support(lambda u: log_chi2_log_pdf(pw, u), -120.0, top, drop)
    u_lo, u_hi = min(u_lo_v, u_lo_w), max(u_hi_v, u_hi_w)
    l_lo, l_hi = _support(lambda l: _log_scaled_chi2_log_pdf(n, l), -120.0, 6.0, drop)

    u = u_lo + h * np.arange(int(math.ceil((u_hi - u_lo) / h)) + 1)
    l = l_lo + h * np.arange(int(math.ceil((l_hi - l_lo) / h)) + 1)
    lk = _log_scaled_chi2_log_pdf(n, l)
    kernel = np.exp(lk - lk.max())
    lqv = log_chi2_log_pdf(pv, u)
    lqw = log_chi2_log_pdf(pw, u)
    # one common scale keeps the likelihood ratio exact
    scale = max(lqv.max(), lqw.max())
    cv = np.convolve(np.exp(lqv - scale), kernel)
    cw = np.convolve(np.exp(lqw - scale), kernel)
    ok = (cv > 0) & (cw > 0)
    if np.any((cv > 0) & ~(cw > 0)):
        raise NumericalError("density of the second release underflows where the first is positive")
    log_norm = math.log(h) + lk.max() + scale + math.log(h)  # both convolution and outer sum carry h
    lpv = np.log(cv[ok]) + log_norm
    lpw = np.log(cw[ok]) + log_norm
    log_terms = alpha * lpv + (1 - alpha) * lpw
    # same cancellation-free form as the plateau oracle: sum p_w expm1(alpha log ratio)
    a = alpha * (lpv - lpw)
    pwv = np.exp(lpw)
    with np.errstate(over="ignore"):
        terms = np.where(a < 30.0, pwv * np.expm1(np.minimum(a, 30.0)), np.exp(log_terms) - pwv)
    mass_w = float(np.sum(pwv))
    j = float(np.sum(terms)) + (mass_w - 1.0)
    if not math.isfinite(j) or j <= -1:
        raise NumericalError(f"finite-n Rényi sum is not finite (J = {j})")
    return max(math.log1p(j), 0.0) / (alpha - 1)


def renyi_finite_n_k1_pointwise(
    alpha: float, d: int, n_syn: int, theta_v: float, theta_w: float, tol: float = 1e-9
) -> float:
    """Slow cross-check of :func:`renyi_finite_n_k1` built on pointwise densities.

    Each density value is an adaptive integral (see
    :func:`synthamp.distributions.finite_n_pdf_k1`), and the outer Rényi
    integral is adaptive in ``log s``.
    """
    from ..distributions import finite_n_pdf_k1

    if theta_v == theta_w:
        return 0.0

    def integrand(t):
        t = np.asarray(t, dtype=float)
        out = np.empty_like(t)
        for i, ti in enumerate(t.ravel()):
            s = math.exp(ti)
            a = finite_n_pdf_k1(d, n_syn, theta_v, s, tol)
            b = finite_n_pdf_k1(d, n_syn, theta_w, s, tol)
            if a > 0 and b > 0:
                out.flat[i] = math.exp(ti + alpha * math.log(a) + (1 - alpha) * math.log(b))
            else:
                out.flat[i] = 0.0
        return out

    centre = math.log(n_syn * (d + max(theta_v, theta_w) ** 2))
    val = 0.0
    for lo, hi in ((centre - 40.0, centre - 8.0), (centre - 8.0, centre), (centre, centre + 4.0), (centre + 4.0, centre + 10.0)):
        val += adaptive_quadrature(integrand, lo, hi, tol * 10).value
    return math.log(val) / (alpha - 1)
