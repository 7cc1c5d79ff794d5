"""Closed-form Rényi-DP bounds for synthetic data from linear generators.

All quantities are in nats at Rényi order ``alpha`` with unit noise scales.
The post-processing baseline ``alpha * Delta^2 / 2`` (releasing the model
parameters themselves) is the reference every amplification claim is
measured against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np

from .distributions import PrivacyParams
from .mathkit import (
    DomainError,
    adaptive_quadrature,
    bisect,
    std_normal_cdf,
)

__all__ = [
    "BoundReport",
    "FisherBounds",
    "PriorWorkParams",
    "rdp_gaussian",
    "fisher_bounds_ncx2",
    "local_band_k1",
    "global_bound_k1",
    "global_bound_multik",
    "account",
    "bound_report",
    "criterion_bound",
    "gaussian_envelope",
    "gaussian_criterion_closed_form",
    "procrustes_min_distance",
    "procrustes_alignment",
    "wishart_path_fisher_bound",
    "prior_no_amplification_threshold",
    "prior_rdp_conversion",
    "prior_rdp_direct_integral",
    "counterexample_demo",
    "METHODS",
]

METHODS = ("post_processing", "local_band", "global_k1", "global_multik", "criterion", "prior_work", "minimum")


@dataclass(frozen=True)
class BoundReport:
    """A bound on ``D_alpha(ZV, ZW)`` together with how it was obtained.

    Attributes:
        value: bound in nats.
        method: one of :data:`METHODS`.
        regime: ``"amplified"`` when strictly below post-processing,
            ``"boundary"`` when Delta = 0, else ``"not_amplified"``.
        inputs: the parameters the bound was computed for.
        notes: free-text provenance.
    """

    value: float
    method: str
    regime: str
    inputs: PrivacyParams
    notes: str = ""

    @property
    def amplification_factor(self) -> float:
        """Ratio to the post-processing baseline (nan when the baseline is 0)."""
        base = rdp_gaussian(self.inputs.alpha, self.inputs.delta_sens)
        return self.value / base if base > 0 else float("nan")

    def as_dict(self) -> dict:
        p = self.inputs
        return {
            "value": self.value,
            "method": self.method,
            "regime": self.regime,
            "amplification_factor": self.amplification_factor,
            "alpha": p.alpha,
            "delta": p.delta_sens,
            "C": p.C,
            "d": p.d,
            "k": p.k,
            "n_syn": "infinite" if p.n_syn is None else p.n_syn,
            "notes": self.notes,
        }


class FisherBounds(NamedTuple):
    lower: float
    upper: float
    upper_sharp: float
    upper_alt: float


def _check_alpha(alpha: float) -> None:
    if not (alpha > 1 and math.isfinite(alpha)):
        raise DomainError(f"alpha must be a finite number > 1, got {alpha}")


def _check_width(d, what: str = "d") -> int:
    if int(d) != d:
        raise DomainError(f"{what} must be an integer, got {d}")
    if d < 3:
        raise DomainError(f"{what} must be >= 3 for the Fisher upper bounds, got {d}")
    return int(d)


def rdp_gaussian(alpha: float, delta_sens: float) -> float:
    """Rényi divergence between N(0, I) and N(Delta, I): ``alpha Delta^2 / 2``."""
    _check_alpha(alpha)
    if not delta_sens >= 0:
        raise DomainError("delta must be >= 0")
    return 0.5 * alpha * delta_sens * delta_sens


# ---------------------------------------------------------------------------
# Fisher information of the non-central chi-squared amplitude family
# ---------------------------------------------------------------------------


def fisher_bounds_ncx2(d: int, theta: float) -> FisherBounds:
    """Bounds on the Fisher information of ``chi2_d(theta^2)`` in ``theta``.

    Returns ``lower = 2t/(2t + d)`` and ``upper = min(1, 2t/(2t + d - 3))``
    with ``t = theta^2``, the sharper quadratic-root bound
    ``2t/(t + (d-3)/2 + sqrt((t + (d-3)/2)^2 + 4t))``, and an
    alternative bound from the Poisson-mixture representation. The cap at 1
    comes from post-processing the Gaussian location family.
    """
    d = _check_width(d)
    if not theta >= 0:
        raise DomainError("theta must be >= 0")
    t = float(theta) ** 2
    if t == 0.0:
        return FisherBounds(0.0, 0.0, 0.0, 0.0)
    lower = 2 * t / (2 * t + d)
    upper = min(1.0, 2 * t / (2 * t + d - 3))
    # positive root of I^2 + (t + (d-3)/2) I - t <= 0, in rationalized form
    half = t + 0.5 * (d - 3)
    sharp = 2 * t / (half + math.sqrt(half * half + 4 * t))
    alt = 2 * t * (t + 2 * d) / (2 * d * d + t * (t + 2 * d))
    return FisherBounds(lower, upper, sharp, alt)


def local_band_k1(alpha: float, d: int, norm_w: float, C: float) -> tuple[float, float]:
    """Amplification band for small Delta (``k = 1``).

    To first order in Delta, the plateau divided by ``alpha Delta^2 / 2`` lies
    in ``[eta_lo, eta_hi]`` with ``eta_lo = 2|w|^2/(2|w|^2 + d)`` and
    ``eta_hi = 2C^2/(2C^2 + d - 3)``.
    """
    _check_alpha(alpha)
    d = _check_width(d)
    if not 0 <= norm_w <= C:
        raise DomainError("need 0 <= norm_w <= C")
    nw2 = norm_w * norm_w
    eta_lo = 2 * nw2 / (2 * nw2 + d) if nw2 > 0 else 0.0
    eta_hi = 2 * C * C / (2 * C * C + d - 3)
    return eta_lo, eta_hi


def _log_f(alpha: float, eta: float, delta: float) -> float:
    # log(1 + alpha sqrt(eta) (e^{c Delta^2} - 1) / ((alpha-1)(2alpha-1) Delta)),
    # c = (alpha-1)(2alpha-1)/2, evaluated without overflow for large exponents
    kappa = (alpha - 1) * (2 * alpha - 1)
    c = 0.5 * kappa * delta * delta
    log_em1 = math.log(math.expm1(c)) if c < 30 else c + math.log1p(-math.exp(-c))
    log_term = math.log(alpha) + 0.5 * math.log(eta) + log_em1 - math.log(kappa * delta)
    return float(np.logaddexp(0.0, log_term))


def global_bound_k1(alpha: float, C: float, d: int, delta_sens: float) -> float:
    """Bound on the unlimited-release loss for ``k = 1``.

    ``(1/(alpha-1)) log f`` with ``f = 1 + alpha sqrt(2C^2/(2C^2 + d - 3))
    (e^{(alpha-1)(2alpha-1)Delta^2/2} - 1) / ((alpha-1)(2alpha-1)Delta)``.
    The removable singularity at Delta = 0 is returned as its limit 0.
    """
    _check_alpha(alpha)
    d = _check_width(d)
    if not C > 0:
        raise DomainError("C must be > 0")
    if not delta_sens >= 0:
        raise DomainError("delta must be >= 0")
    if delta_sens == 0:
        return 0.0
    eta = 2 * C * C / (2 * C * C + d - 3)
    return _log_f(alpha, eta, delta_sens) / (alpha - 1)


def global_bound_multik(alpha: float, C: float, d: int, k: int, delta_sens: float) -> float:
    """Unlimited-release bound for ``k >= 1``: the ``k = 1`` bound at width ``floor(d/k)``."""
    if int(k) != k or k < 1:
        raise DomainError("k must be a positive integer")
    if int(d) != d:
        raise DomainError("d must be an integer")
    return global_bound_k1(alpha, C, _check_width(int(d) // int(k), "floor(d/k)"), delta_sens)


def account(params: PrivacyParams) -> BoundReport:
    """Tightest available valid bound: the minimum of post-processing and global.

    Both constituents bound the release loss for every ``n_syn``, since the
    finite release is a post-processing of the Gram matrix, so their minimum
    is a valid bound as well.
    """
    post = rdp_gaussian(params.alpha, params.delta_sens)
    glob = global_bound_multik(params.alpha, params.C, params.d, params.k, params.delta_sens)
    value = min(post, glob)
    if params.delta_sens == 0:
        regime = "boundary"
    elif glob < post:
        regime = "amplified"
    else:
        regime = "not_amplified"
    notes = f"min(post_processing={post:.6g}, global={glob:.6g}); valid for every n_syn"
    return BoundReport(value, "minimum", regime, params, notes)


def bound_report(params: PrivacyParams, method: str = "minimum", c_prime: float = 1.0) -> BoundReport:
    """A single named bound for ``params``.

    ``method`` is one of ``post_processing``, ``local_band``, ``global_k1``,
    ``global_multik``, ``prior_work`` or ``minimum``. The local band uses its
    upper end ``eta_hi`` and is a first-order statement in Delta, not a
    certified bound. ``prior_work`` needs a finite ``n_syn`` (default 1).
    """
    a, delta = params.alpha, params.delta_sens
    post = rdp_gaussian(a, delta)
    if method == "minimum":
        return account(params)
    notes = ""
    if method == "post_processing":
        value = post
    elif method == "local_band":
        value = local_band_k1(a, params.d // params.k, params.C, params.C)[1] * post
        notes = "eta_hi * alpha Delta^2 / 2; first-order in Delta"
    elif method == "global_k1":
        if params.k != 1:
            raise DomainError("global_k1 requires k = 1")
        value = global_bound_k1(a, params.C, params.d, delta)
    elif method == "global_multik":
        value = global_bound_multik(a, params.C, params.d, params.k, delta)
    elif method == "prior_work":
        n = 1 if params.n_syn is None else params.n_syn
        pw = PriorWorkParams(c_prime=c_prime, n_syn=n, d=params.d, k=params.k, delta_sens=delta, alpha=a)
        value = prior_rdp_conversion(pw)[0]
        notes = f"C'={c_prime}, n_syn={n}"
    else:
        raise DomainError(f"unknown method {method!r}")
    if delta == 0:
        regime = "boundary"
    elif value < post:
        regime = "amplified"
    else:
        regime = "not_amplified"
    return BoundReport(float(value), method, regime, params, notes)


# ---------------------------------------------------------------------------
# Fisher information to Rényi divergence
# ---------------------------------------------------------------------------


def gaussian_envelope(alpha: float) -> Callable:
    """Envelope ``U(z, theta) = (2alpha - 1)(z - theta)^2 / 2`` of the unit-variance Gaussian family."""
    return lambda z, theta: 0.5 * (2 * alpha - 1) * (np.asarray(z) - theta) ** 2


def criterion_bound(
    alpha: float,
    fisher_sup: float,
    envelope: Callable,
    theta: float,
    theta_prime: float,
    tol: float = 1e-10,
) -> float:
    """Rényi bound from a Fisher-information ceiling along a 1-D path.

    Returns ``(1/(alpha-1)) log(1 + alpha sqrt(I) int_theta^theta' exp((alpha-1) U(z, theta)) dz)``
    with ``I = fisher_sup`` and the integral by adaptive quadrature. The
    envelope ``U`` must dominate ``D_{2alpha-1}(P_z, P_theta)`` along the path.
    """
    _check_alpha(alpha)
    if not fisher_sup >= 0:
        raise DomainError("fisher_sup must be >= 0")
    if not theta < theta_prime:
        raise DomainError("need theta < theta_prime")
    if fisher_sup == 0:
        return 0.0

    def integrand(z):
        u = np.asarray(envelope(z, theta), dtype=float)
        if u.shape != np.shape(z):
            u = np.array([float(envelope(zi, theta)) for zi in np.ravel(z)]).reshape(np.shape(z))
        return np.exp((alpha - 1) * u)

    integral = adaptive_quadrature(integrand, theta, theta_prime, tol, rel_tol=tol).value
    return math.log1p(alpha * math.sqrt(fisher_sup) * integral) / (alpha - 1)


def gaussian_criterion_closed_form(alpha: float, delta_sens: float) -> float:
    """Closed-form relaxation of the Gaussian criterion bound.

    Uses ``int_0^Delta e^{c z^2} dz <= (e^{c Delta^2} - 1)/(c Delta)`` with
    ``c = (alpha-1)(2alpha-1)/2``; always at least the quadrature value.
    """
    _check_alpha(alpha)
    if delta_sens == 0:
        return 0.0
    # same expression as the global bound's f with sqrt(eta) replaced by 2
    return _log_f(alpha, 4.0, delta_sens) / (alpha - 1)


# ---------------------------------------------------------------------------
# Multi-dimensional records: orthogonal alignment
# ---------------------------------------------------------------------------


def _as_pair(v, w) -> tuple[np.ndarray, np.ndarray]:
    v = np.atleast_2d(np.asarray(v, dtype=float))
    w = np.atleast_2d(np.asarray(w, dtype=float))
    if v.shape != w.shape:
        raise DomainError(f"shape mismatch {v.shape} vs {w.shape}")
    return v, w


def _psd_sqrt(a: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(a)
    return (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.T


def procrustes_min_distance(v, w) -> float:
    """``min_{U in O(d)} ||v - U w||_F``.

    Equals ``sqrt(|v|^2 + |w|^2 - 2 sum_i sigma_i)`` where ``sigma_i^2`` are
    the eigenvalues of ``(w^T w)(v^T v)``, obtained from the symmetric
    similar matrix ``(v^T v)^{1/2} (w^T w) (v^T v)^{1/2}``.
    """
    v, w = _as_pair(v, w)
    root = _psd_sqrt(v.T @ v)
    eig = np.linalg.eigvalsh(root @ (w.T @ w) @ root)
    nuclear = float(np.sum(np.sqrt(np.clip(eig, 0.0, None))))
    sq = float(np.sum(v * v) + np.sum(w * w)) - 2.0 * nuclear
    return math.sqrt(max(sq, 0.0))


def procrustes_alignment(v, w) -> np.ndarray:
    """Orthogonal ``U`` attaining :func:`procrustes_min_distance`.

    With ``v w^T = A S B^T`` (SVD), ``U = A B^T`` maximizes ``tr(v^T U w)``.
    """
    v, w = _as_pair(v, w)
    a, _, bt = np.linalg.svd(v @ w.T)
    return a @ bt


def wishart_path_fisher_bound(v, w, theta: float) -> float:
    """Fisher-information bound at ``theta`` along the aligned path from v to Uw.

    ``D_min^2 * 2|v_theta|^2 / (2|v_theta|^2 + floor(d/k) - 3)`` with
    ``v_theta = (1 - theta) v + theta U w`` and ``U`` the optimal alignment.
    """
    v, w = _as_pair(v, w)
    d, k = v.shape
    dk = _check_width(d // k, "floor(d/k)")
    if not 0 <= theta <= 1:
        raise DomainError("theta must lie in [0, 1]")
    u = procrustes_alignment(v, w)
    vt = (1 - theta) * v + theta * (u @ w)
    n2 = float(np.sum(vt * vt))
    if n2 == 0.0:
        return 0.0
    dmin = procrustes_min_distance(v, w)
    return dmin * dmin * 2 * n2 / (2 * n2 + dk - 3)


# ---------------------------------------------------------------------------
# Conversion of an earlier f-DP guarantee to RDP
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PriorWorkParams:
    """Inputs of the earlier f-DP guarantee for the same mechanism.

    The guarantee is the trade-off ``max(G_Delta(t), 1 - 2 C_nkd - t)`` with
    ``C_nkd = c_prime k sqrt(n_syn / (d - k))`` and ``G_Delta`` the Gaussian
    trade-off function. ``c_prime`` is an unspecified absolute constant,
    taken as 1 by default.
    """

    n_syn: int
    d: int
    k: int = 1
    delta_sens: float = 1.0
    alpha: float = 2.0
    c_prime: float = 1.0

    def __post_init__(self):
        _check_alpha(self.alpha)
        if not self.c_prime > 0:
            raise DomainError("c_prime must be > 0")
        for name in ("n_syn", "d", "k"):
            val = getattr(self, name)
            if int(val) != val or val < 1:
                raise DomainError(f"{name} must be a positive integer")
        if not self.d > self.k:
            raise DomainError("need d > k")
        if not self.delta_sens >= 0:
            raise DomainError("delta must be >= 0")

    @property
    def c_nkd(self) -> float:
        return self.c_prime * self.k * math.sqrt(self.n_syn / (self.d - self.k))


def prior_no_amplification_threshold(p: PriorWorkParams) -> tuple[float, bool]:
    """Sensitivity below which the earlier guarantee gives nothing beyond Gaussian.

    The threshold is ``2 C' k sqrt(2 pi n_syn / (d - k))``; ``amplified`` is
    ``Delta >= threshold``.
    """
    threshold = 2.0 * p.c_nkd * math.sqrt(2.0 * math.pi)
    return threshold, bool(p.delta_sens >= threshold)


def _curves_cross(p: PriorWorkParams) -> bool:
    # Phi(z) - Phi(z - Delta) peaks at z = Delta/2; a crossing with 2C exists iff the peak exceeds it
    return 2.0 * float(std_normal_cdf(0.5 * p.delta_sens)) - 1.0 > 2.0 * p.c_nkd


def prior_rdp_conversion(p: PriorWorkParams, tol: float = 1e-13) -> tuple[float, Optional[float], Optional[float]]:
    """RDP of order alpha implied by the earlier f-DP guarantee.

    In the amplified regime ``z_+`` solves ``Phi(z) - Phi(z - Delta) = 2C_nkd``
    on ``[Delta/2, Delta/2 + 10]``, ``z_- = Delta - z_+``, and
    ``l_alpha = log(e^{alpha(alpha-1)Delta^2/2} A + L)/(alpha - 1)`` with
    ``A = Phi(z_- + (alpha-1)Delta) + Phi(-(z_+ + (alpha-1)Delta))`` and
    ``L = Phi(z_+) - Phi(z_-)``.

    Outside it (including the gap where Delta clears the threshold but the
    curves still do not cross) the Gaussian value is returned with
    ``z_- = z_+ = None``.
    """
    alpha, delta = p.alpha, p.delta_sens
    _, amplified = prior_no_amplification_threshold(p)
    if not amplified or not _curves_cross(p):
        return rdp_gaussian(alpha, delta), None, None
    two_c = 2.0 * p.c_nkd

    def gap(z: float) -> float:
        return float(std_normal_cdf(z) - std_normal_cdf(z - delta)) - two_c

    z_plus = bisect(gap, 0.5 * delta, 0.5 * delta + 10.0, tol)
    z_minus = delta - z_plus
    shift = (alpha - 1) * delta
    a_mass = float(std_normal_cdf(z_minus + shift) + std_normal_cdf(-(z_plus + shift)))
    l_mass = float(std_normal_cdf(z_plus) - std_normal_cdf(z_minus))
    log_e = float(np.logaddexp(0.5 * alpha * (alpha - 1) * delta * delta + math.log(a_mass), math.log(l_mass)))
    return log_e / (alpha - 1), z_minus, z_plus


def prior_rdp_direct_integral(p: PriorWorkParams, tol: float = 1e-13) -> float:
    """``(1/(alpha-1)) log int_0^1 |f'(t)|^{1-alpha} dt`` by quadrature.

    With ``t = 1 - Phi(z)`` the trade-off reads ``f = max(Phi(z - Delta),
    Phi(z) - 2C)``. The slope magnitude is ``phi(z - Delta)/phi(z)`` where the
    Gaussian branch is active and 1 on the linear branch. The active branch
    is decided pointwise; its switch points are found by a sign scan of the
    branch test and used only as panel boundaries, never in the masses.
    """
    alpha, delta = p.alpha, p.delta_sens
    two_c = 2.0 * p.c_nkd
    log_g = 0.5 * alpha * (alpha - 1) * delta * delta

    def integrand(z):
        z = np.asarray(z, dtype=float)
        gauss = std_normal_cdf(z - delta)
        lin = std_normal_cdf(z) - two_c
        logphi = -0.5 * z * z - 0.5 * math.log(2 * math.pi)
        # Gaussian slope^{1-alpha} * phi(z), scaled by e^{-log_g} to stay O(1)
        g_branch = np.exp((1 - alpha) * (z * delta - 0.5 * delta * delta) + logphi - log_g)
        l_branch = np.exp(logphi - log_g)
        return np.where(gauss >= lin, g_branch, l_branch)

    centre = -(alpha - 1) * delta
    lo, hi = min(centre, 0.0) - 40.0, max(centre, delta) + 40.0
    # the integrand jumps where the active branch changes; locate those points
    # from the pointwise branch test (sign scan + bisection) and integrate
    # piecewise so that no panel straddles a jump
    def branch(z):
        return float(std_normal_cdf(z - delta)) - (float(std_normal_cdf(z)) - two_c)

    grid = np.linspace(lo, hi, 4001)
    signs = np.sign([branch(z) for z in grid])
    breaks = [lo]
    for i in np.nonzero(signs[:-1] * signs[1:] < 0)[0]:
        breaks.append(bisect(branch, float(grid[i]), float(grid[i + 1]), 1e-15))
    breaks.append(hi)
    val = math.fsum(
        adaptive_quadrature(integrand, a, b, tol, rel_tol=tol, max_intervals=20000).value
        for a, b in zip(breaks[:-1], breaks[1:])
    )
    return (math.log(val) + log_g) / (alpha - 1)


# ---------------------------------------------------------------------------
# Fisher information does not order Rényi divergences globally
# ---------------------------------------------------------------------------


def counterexample_demo(a: float, sigma: float, delta: float) -> tuple[float, float, float, float]:
    """Cauchy(scale a) vs Gaussian(scale sigma) location families at order 2.

    Returns ``(I_cauchy, I_gauss, D2_cauchy, D2_gauss)`` with Fisher
    informations ``1/(2a^2)`` and ``1/sigma^2`` and order-2 divergences
    ``log(1 + Delta^2/(2a^2))`` and ``Delta^2/sigma^2`` at shift Delta.
    """
    if not (a > 0 and sigma > 0 and delta > 0):
        raise DomainError("a, sigma and delta must be > 0")
    i_c = 1.0 / (2 * a * a)
    i_g = 1.0 / (sigma * sigma)
    d2_c = math.log1p(delta * delta / (2 * a * a))
    d2_g = delta * delta / (sigma * sigma)
    return i_c, i_g, d2_c, d2_g
