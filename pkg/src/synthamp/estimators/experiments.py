"""Experiment drivers producing :class:`~synthamp.results.SweepResult` tables.

Each driver splits its work into cells, gives cell ``i`` the child stream
``rng.split(i)``, and merges results by cell index, so output does not depend
on the worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional, Sequence

import numpy as np

from ..accountant import (
    PriorWorkParams,
    criterion_bound,
    fisher_bounds_ncx2,
    gaussian_criterion_closed_form,
    gaussian_envelope,
    local_band_k1,
    prior_no_amplification_threshold,
    prior_rdp_conversion,
    rdp_gaussian,
)
from ..distributions import NoncentralChiSq, sample_ncx2, sample_release_stat_k1
from ..mathkit import DomainError, RngStream, std_normal_cdf, std_normal_quantile
from ..results import SweepResult
from .oracles import fisher_mc_ncx2, fisher_quadrature_ncx2, renyi_finite_n_k1, renyi_ncx2_quadrature
from .variational import TrainConfig, variational_renyi

__all__ = [
    "FIG2_D_LIST",
    "FIG2_N_GRID",
    "FIG3_D_LIST",
    "FIG3_DELTA_GRID",
    "plateau_experiment",
    "delta_sweep_experiment",
    "finite_n_experiment",
    "fisher_table",
    "gauss_criterion_table",
    "prior_tradeoff_table",
    "run_cells",
]

FIG2_D_LIST = (2, 5, 10)
FIG2_N_GRID = tuple(2**i for i in range(10))  # 1, 2, 4, ..., 512
FIG3_D_LIST = (5, 10, 50)
FIG3_DELTA_GRID = tuple(round(0.05 * i, 2) for i in range(21))  # 0, 0.05, ..., 1


def run_cells(fn: Callable, cells: Sequence, threads: int = 1) -> list:
    """Apply ``fn`` to each cell, optionally on a thread pool; results in cell order."""
    if threads is None or threads <= 1:
        return [fn(c) for c in cells]
    with ThreadPoolExecutor(max_workers=int(threads)) as pool:
        return list(pool.map(fn, cells))


def _stat_sampler(d: int, theta: float, n_syn: int):
    dist = NoncentralChiSq(d, theta)

    def draw(stream: RngStream, n: int) -> np.ndarray:
        return sample_release_stat_k1(dist, n_syn, stream, n)[:, None]

    return draw


def _gram_sampler(d: int, theta: float):
    dist = NoncentralChiSq(d, theta)

    def draw(stream: RngStream, n: int) -> np.ndarray:
        return np.log(sample_ncx2(dist, stream, n))[:, None]

    return draw


def plateau_experiment(
    alpha: float,
    C: float,
    delta_sens: float,
    d_list: Sequence[int],
    n_grid: Sequence[int],
    cfg: TrainConfig,
    rng: RngStream,
    threads: int = 1,
    include_exact: bool = False,
) -> SweepResult:
    """Variational estimates of ``D_alpha(ZV || ZW)`` against ``n_syn`` (k = 1).

    The pair is collinear with ``|v| = C`` and ``|w| = C - Delta``. Each
    ``(d, n_syn)`` cell trains on the sufficient statistic
    ``log(|ZV|^2 / n_syn)``. One quadrature plateau row per ``d`` is added;
    with ``include_exact`` the exact finite-n values are added as well.
    """
    if not 0 < delta_sens <= C:
        raise DomainError("need 0 < delta <= C for the collinear pair")
    tv, tw = float(C), float(C - delta_sens)
    cells = [(d, n) for d in d_list for n in n_grid]
    cfg = cfg.with_(alpha=alpha)
    post = rdp_gaussian(alpha, delta_sens)

    def work(i_cell):
        i, (d, n) = i_cell
        est = variational_renyi(_stat_sampler(d, tv, n), _stat_sampler(d, tw, n), 1, cfg, rng.split(i))
        return est

    ests = run_cells(work, list(enumerate(cells)), threads)
    out = SweepResult()
    common = dict(alpha=alpha, C=C, k=1, delta=delta_sens, theta_v=tv, theta_w=tw, seed=rng.seed)
    for i, ((d, n), est) in enumerate(zip(cells, ests)):
        out.add("fig2", "variational", est.mean, d=d, n_syn=n, stderr=est.std / math.sqrt(est.runs),
                notes=f"cell={i};std={est.std!r};runs={est.runs};failed={est.failed};stat=log_norm_sq", **common)
    for d in d_list:
        plateau = renyi_ncx2_quadrature(alpha, d, tv, tw)
        out.add("fig2", "quadrature", plateau, d=d, n_syn=None, notes=f"plateau;post_processing={post!r}", **common)
        if include_exact:
            for n in n_grid:
                out.add("fig2", "finite_n_quadrature", renyi_finite_n_k1(alpha, d, n, tv, tw), d=d, n_syn=n, **common)
    return out


def delta_sweep_experiment(
    alpha: float,
    C: float,
    d_list: Sequence[int],
    delta_grid: Sequence[float],
    cfg: Optional[TrainConfig] = None,
    rng: Optional[RngStream] = None,
    threads: int = 1,
    variational: bool = False,
) -> SweepResult:
    """Unlimited-release divergence against Delta with the local-band envelope (k = 1).

    ``|w| = max(1, C - Delta)`` and ``|v| = |w| + Delta``, which must stay
    within C. Rows per ``(d, Delta)``: the quadrature plateau and
    ``eta_lo * alpha Delta^2/2``, ``eta_hi * alpha Delta^2/2``; with
    ``variational=True`` also a variational estimate on Gram samples.
    """
    rng = rng if rng is not None else RngStream(0)
    out = SweepResult()
    cells = []
    for d in d_list:
        for delta in delta_grid:
            nw = max(1.0, C - delta)
            nv = nw + delta
            if nv > C + 1e-12:
                raise DomainError(f"|v| = {nv} exceeds C = {C} at Delta = {delta}")
            cells.append((d, float(delta), nv, nw))
    ests = [None] * len(cells)
    if variational:
        if cfg is None:
            raise DomainError("variational rows need a TrainConfig")
        vcfg = cfg.with_(alpha=alpha)

        def work(i_cell):
            i, (d, delta, nv, nw) = i_cell
            if delta == 0:
                return None
            return variational_renyi(_gram_sampler(d, nv), _gram_sampler(d, nw), 1, vcfg, rng.split(i))

        ests = run_cells(work, list(enumerate(cells)), threads)
    for i, (d, delta, nv, nw) in enumerate(cells):
        common = dict(alpha=alpha, C=C, d=d, k=1, delta=delta, n_syn=None, theta_v=nv, theta_w=nw)
        post = rdp_gaussian(alpha, delta)
        out.add("fig3", "quadrature", renyi_ncx2_quadrature(alpha, d, nv, nw), **common)
        if d >= 3:
            lo, hi = local_band_k1(alpha, d, nw, C)
            out.add("fig3", "local_band_lo", lo * post, notes=f"eta_lo={lo!r}", **common)
            out.add("fig3", "local_band_hi", hi * post, notes=f"eta_hi={hi!r}", **common)
        out.add("fig3", "post_processing", post, **common)
        est = ests[i]
        if est is not None:
            out.add("fig3", "variational", est.mean, stderr=est.std / math.sqrt(est.runs), seed=rng.seed,
                    notes=f"cell={i};std={est.std!r};runs={est.runs}", **common)
    return out


def finite_n_experiment(alpha: float, d: int, theta_v: float, theta_w: float, n_grid: Sequence[int]) -> SweepResult:
    """Exact finite-n divergence and its gap to the unlimited-release plateau (k = 1)."""
    out = SweepResult()
    common = dict(alpha=alpha, d=d, k=1, delta=abs(theta_v - theta_w), theta_v=theta_v, theta_w=theta_w)
    plateau = renyi_ncx2_quadrature(alpha, d, theta_v, theta_w)
    out.add("finite_n", "quadrature", plateau, n_syn=None, notes="plateau", **common)
    for n in n_grid:
        out.add("finite_n", "finite_n_quadrature", renyi_finite_n_k1(alpha, d, n, theta_v, theta_w), n_syn=n, **common)
    return out


def fisher_table(d_list: Sequence[int], theta_list: Sequence[float], n_samples: int, rng: RngStream) -> SweepResult:
    """Quadrature and Monte-Carlo Fisher information with the closed-form bounds."""
    out = SweepResult()
    i = 0
    for d in d_list:
        for th in theta_list:
            common = dict(d=d, k=1, theta_v=th)
            b = fisher_bounds_ncx2(d, th)
            q = fisher_quadrature_ncx2(d, th)
            ok = b.lower - 1e-6 <= q <= min(b.upper, b.upper_sharp, b.upper_alt) + 1e-6
            out.add("fisher", "lower", b.lower, **common)
            out.add("fisher", "quadrature", q, notes="sandwich=ok" if ok else "sandwich=VIOLATED", **common)
            for rep in ("score", "rician"):
                est, se = fisher_mc_ncx2(d, th, n_samples, rng.split(i), rep)
                out.add("fisher", f"mc_{rep}", est, stderr=se, seed=rng.seed, notes=f"stream={i};n={n_samples}", **common)
                i += 1
            out.add("fisher", "upper", b.upper, **common)
            out.add("fisher", "upper_sharp", b.upper_sharp, **common)
            out.add("fisher", "upper_alt", b.upper_alt, **common)
    return out


def gauss_criterion_table(alpha: float, delta_grid: Sequence[float]) -> SweepResult:
    """Exact Gaussian divergence vs the Fisher-criterion bound (unit-variance family)."""
    out = SweepResult()
    env = gaussian_envelope(alpha)
    for delta in delta_grid:
        common = dict(alpha=alpha, k=1, delta=delta, theta_v=delta, theta_w=0.0)
        out.add("gauss_criterion", "exact", rdp_gaussian(alpha, delta), **common)
        crit = criterion_bound(alpha, 1.0, env, 0.0, delta) if delta > 0 else 0.0
        out.add("gauss_criterion", "criterion", crit, notes="quadrature", **common)
        out.add("gauss_criterion", "criterion_closed_form", gaussian_criterion_closed_form(alpha, delta), **common)
    return out


def prior_tradeoff_table(p: PriorWorkParams, n_points: int = 201) -> SweepResult:
    """Trade-off curves of the Gaussian test and of the earlier guarantee.

    Rows give ``G_Delta(t)`` and ``max(G_Delta(t), 1 - 2C - t)`` on a grid of
    type-I errors ``t``, followed by the threshold, crossing points and the
    converted RDP value.
    """
    out = SweepResult()
    two_c = 2.0 * p.c_nkd
    common = dict(alpha=p.alpha, C=p.c_prime, d=p.d, k=p.k, delta=p.delta_sens, n_syn=p.n_syn)

    ts = np.linspace(0.0, 1.0, n_points)
    for t in ts:
        if t <= 0.0:
            g = 1.0
        elif t >= 1.0:
            g = 0.0
        else:
            g = float(std_normal_cdf(float(std_normal_quantile(1.0 - t)) - p.delta_sens))
        prior = max(g, 1.0 - two_c - t)
        out.add("prior_tradeoff", "gaussian", g, notes=f"t={float(t)!r}", **common)
        out.add("prior_tradeoff", "prior_work", prior, notes=f"t={float(t)!r}", **common)
    threshold, amplified = prior_no_amplification_threshold(p)
    l_alpha, z_minus, z_plus = prior_rdp_conversion(p)
    out.add("prior_tradeoff", "threshold", threshold, notes=f"amplified={str(amplified).lower()}", **common)
    out.add("prior_tradeoff", "l_alpha", l_alpha, notes=f"z_minus={z_minus!r};z_plus={z_plus!r}", **common)
    out.add("prior_tradeoff", "post_processing", rdp_gaussian(p.alpha, p.delta_sens), **common)
    return out
