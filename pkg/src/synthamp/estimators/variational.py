"""Neural variational estimator of Rényi divergences.

For any strictly negative test function ``g`` and ``beta = (alpha-1)/alpha``,

    F(g) = E_Q[g] + 1/(alpha-1) log E_P[|g|^beta]

satisfies ``D_alpha(P || Q) = alpha sup_g F(g) + log(alpha) + 1``, the
supremum being attained at ``g ∝ -(p/q)^alpha``. We parametrize ``g`` with a
two-layer network whose output map is strictly negative, maximize ``F`` by
minibatch Adam on freshly drawn samples, select parameters by a held-out
validation score, and report the plug-in estimate on a final fresh sample.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from ..mathkit import DomainError, NumericalError, RngStream

__all__ = [
    "TrainConfig",
    "Mlp",
    "Adam",
    "DivergenceEstimate",
    "variational_objective",
    "variational_renyi",
    "Sampler",
]

# sampler-handle: (stream, n) -> array of shape (n, input_dim)
Sampler = Callable[[RngStream, int], np.ndarray]

_EPS = 1e-6


@dataclass(frozen=True)
class TrainConfig:
    """Hyperparameters of the variational estimator.

    The defaults are the full reproduction profile; :meth:`ci` gives the
    reduced profile used in automated checks.

    Attributes:
        steps: maximum number of optimizer steps per run.
        batch: samples drawn from each of P and Q per step.
        lr: Adam learning rate.
        hidden: width of the hidden layer.
        eval_every: steps between validation checks.
        patience: non-improving validation checks before stopping early.
        n_eval: samples per distribution for each validation check.
        n_final: samples per distribution for the final estimate.
        n_runs: independent repetitions (fresh initialization and data).
        alpha: Rényi order.
        seed: root seed; run ``i`` uses an independent child stream.
        activation: hidden nonlinearity, ``"tanh"`` or ``"softplus"``.
        output: negative output map, ``"exp"`` (``-exp(z)``) or
            ``"softplus"`` (``-softplus(z) - 1e-6``).
        standardize: rescale inputs by pooled pilot-sample moments.
    """

    steps: int = 20000
    batch: int = 512
    lr: float = 1e-3
    hidden: int = 64
    eval_every: int = 100
    patience: int = 10
    n_eval: int = 50000
    n_final: int = 50000
    n_runs: int = 10
    alpha: float = 2.0
    seed: int = 0
    activation: str = "tanh"
    output: str = "exp"
    standardize: bool = True

    def __post_init__(self):
        for name in ("steps", "batch", "hidden", "eval_every", "patience", "n_eval", "n_final", "n_runs"):
            val = getattr(self, name)
            if int(val) != val or val < 1:
                raise DomainError(f"{name} must be a positive integer, got {val}")
        if not self.lr > 0:
            raise DomainError("lr must be > 0")
        if not self.alpha > 1:
            raise DomainError("alpha must be > 1")
        if self.activation not in ("tanh", "softplus"):
            raise DomainError(f"unknown activation {self.activation!r}")
        if self.output not in ("exp", "softplus"):
            raise DomainError(f"unknown output map {self.output!r}")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be an unsigned 64-bit integer")

    @classmethod
    def ci(cls, **overrides) -> "TrainConfig":
        """Reduced profile: 5000 steps, 3 runs, 10^4 validation/final samples."""
        base = dict(steps=5000, n_runs=3, n_eval=10000, n_final=10000)
        base.update(overrides)
        return cls(**base)

    @classmethod
    def profile(cls, name: str, **overrides) -> "TrainConfig":
        if name == "ci":
            return cls.ci(**overrides)
        if name == "full":
            return cls(**overrides)
        raise DomainError(f"unknown profile {name!r}")

    def with_(self, **kw) -> "TrainConfig":
        return replace(self, **kw)

    def as_dict(self) -> dict:
        return asdict(self)


def _softplus(z):
    return np.logaddexp(0.0, z)


def _sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


@dataclass
class Mlp:
    """Two-layer perceptron ``x -> out(W2^T act(W1^T x + b1) + b2)`` with negative output."""

    w1: np.ndarray
    b1: np.ndarray
    w2: np.ndarray
    b2: np.ndarray
    activation: str = "tanh"
    output: str = "exp"

    @classmethod
    def init(cls, input_dim: int, hidden: int, rng: RngStream, activation: str = "tanh", output: str = "exp") -> "Mlp":
        # Glorot-uniform weights, zero biases
        lim1 = math.sqrt(6.0 / (input_dim + hidden))
        lim2 = math.sqrt(6.0 / (hidden + 1))
        w1 = rng.gen.uniform(-lim1, lim1, size=(input_dim, hidden))
        w2 = rng.gen.uniform(-lim2, lim2, size=(hidden, 1))
        return cls(w1, np.zeros(hidden), w2, np.zeros(1), activation, output)

    @property
    def params(self) -> list[np.ndarray]:
        return [self.w1, self.b1, self.w2, self.b2]

    def copy(self) -> "Mlp":
        return Mlp(*(p.copy() for p in self.params), activation=self.activation, output=self.output)

    def _act(self, a):
        if self.activation == "tanh":
            h = np.tanh(a)
            return h, 1.0 - h * h
        return _softplus(a), _sigmoid(a)

    def logit(self, x: np.ndarray) -> np.ndarray:
        h, _ = self._act(x @ self.w1 + self.b1)
        return (h @ self.w2)[:, 0] + self.b2[0]

    def log_neg(self, z: np.ndarray) -> np.ndarray:
        """``log(-g)`` as a function of the pre-output ``z``."""
        if self.output == "exp":
            return z
        return np.log(_softplus(z) + _EPS)

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Test function values ``g(x) < 0`` for a batch ``x`` of shape (n, input_dim)."""
        return -np.exp(self.log_neg(self.logit(x)))

    def _backward(self, x: np.ndarray, coef: np.ndarray) -> list[np.ndarray]:
        # gradient of sum_i coef_i * log(-g(x_i)) w.r.t. the parameters
        a = x @ self.w1 + self.b1
        h, dh = self._act(a)
        z = (h @ self.w2)[:, 0] + self.b2[0]
        if self.output == "exp":
            dz = coef
        else:
            dz = coef * _sigmoid(z) / (_softplus(z) + _EPS)
        gw2 = h.T @ dz[:, None]
        gb2 = np.array([dz.sum()])
        da = (dz[:, None] * self.w2[:, 0]) * dh
        gw1 = x.T @ da
        gb1 = da.sum(axis=0)
        return [gw1, gb1, gw2, gb2]


def variational_objective(net: Mlp, xp: np.ndarray, xq: np.ndarray, alpha: float, grad: bool = False):
    """``F = mean g(Y) + 1/(alpha-1) log mean |g(X)|^beta`` with X ~ P, Y ~ Q.

    Computed through ``log|g|`` so that large test-function magnitudes do not
    overflow. With ``grad=True`` also returns the gradient of F.
    """
    beta = (alpha - 1.0) / alpha
    lp = net.log_neg(net.logit(xp))
    lq = net.log_neg(net.logit(xq))
    gq = np.exp(lq)
    m = np.max(beta * lp)
    wts = np.exp(beta * lp - m)
    log_mean_p = m + math.log(float(np.mean(wts)))
    val = -float(np.mean(gq)) + log_mean_p / (alpha - 1.0)
    if not grad:
        return val
    # dF = -mean(gq * dlq) + (beta/(alpha-1)) * sum(softmax(beta lp) * dlp)
    gp = net._backward(xp, (beta / (alpha - 1.0)) * wts / wts.sum())
    gqr = net._backward(xq, -gq / len(xq))
    return val, [a + b for a, b in zip(gp, gqr)]


class Adam:
    """Adam optimizer (first/second moment decay 0.9/0.999, epsilon 1e-8) for ascent."""

    def __init__(self, params: list[np.ndarray], lr: float, b1: float = 0.9, b2: float = 0.999, eps: float = 1e-8):
        self.lr, self.b1, self.b2, self.eps = lr, b1, b2, eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def ascend(self, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
        self.t += 1
        c1 = 1.0 - self.b1**self.t
        c2 = 1.0 - self.b2**self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= self.b1
            m += (1.0 - self.b1) * g
            v *= self.b2
            v += (1.0 - self.b2) * g * g
            p += self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


@dataclass(frozen=True)
class DivergenceEstimate:
    """Summary of repeated estimates.

    ``std`` is the standard deviation across successful runs (0 for exact
    methods).
    """

    mean: float
    std: float
    runs: int
    method: str
    inputs: dict = field(default_factory=dict)
    values: tuple = ()
    failed: int = 0

    def __post_init__(self):
        if self.std < 0 or self.runs < 1:
            raise DomainError("std must be >= 0 and runs >= 1")


def _estimate(net: Mlp, xp: np.ndarray, xq: np.ndarray, alpha: float) -> float:
    return alpha * variational_objective(net, xp, xq, alpha) + math.log(alpha) + 1.0


def _single_run(sample_p: Sampler, sample_q: Sampler, input_dim: int, cfg: TrainConfig, rng: RngStream) -> float:
    s_init, s_p, s_q, s_val, s_fin, s_pilot = (rng.split(i) for i in range(6))
    if cfg.standardize:
        pilot = np.concatenate([sample_p(s_pilot, cfg.batch * 8), sample_q(s_pilot, cfg.batch * 8)])
        mu = pilot.mean(axis=0)
        sd = pilot.std(axis=0)
        sd = np.where(sd > 0, sd, 1.0)
    else:
        mu, sd = np.zeros(input_dim), np.ones(input_dim)

    def prep(x):
        x = np.asarray(x, dtype=float).reshape(len(x), input_dim)
        return (x - mu) / sd

    net = Mlp.init(input_dim, cfg.hidden, s_init, cfg.activation, cfg.output)
    opt = Adam(net.params, cfg.lr)
    best, best_net, stale = -math.inf, net.copy(), 0
    for step in range(1, cfg.steps + 1):
        # fresh data every step
        xp, xq = prep(sample_p(s_p, cfg.batch)), prep(sample_q(s_q, cfg.batch))
        val, grads = variational_objective(net, xp, xq, cfg.alpha, grad=True)
        if not (math.isfinite(val) and all(np.all(np.isfinite(g)) for g in grads)):
            raise NumericalError(f"non-finite objective at step {step}")
        opt.ascend(net.params, grads)
        if step % cfg.eval_every == 0:
            score = variational_objective(net, prep(sample_p(s_val, cfg.n_eval)), prep(sample_q(s_val, cfg.n_eval)), cfg.alpha)
            if not math.isfinite(score):
                raise NumericalError(f"non-finite validation score at step {step}")
            if score > best:
                best, best_net, stale = score, net.copy(), 0
            else:
                stale += 1
                if stale >= cfg.patience:
                    break
    if best == -math.inf:
        best_net = net
    est = _estimate(best_net, prep(sample_p(s_fin, cfg.n_final)), prep(sample_q(s_fin, cfg.n_final)), cfg.alpha)
    if not math.isfinite(est):
        raise NumericalError("non-finite final estimate")
    return est


def variational_renyi(
    sample_p: Sampler,
    sample_q: Sampler,
    input_dim: int,
    cfg: TrainConfig,
    rng: Optional[RngStream] = None,
    inputs: Optional[dict] = None,
) -> DivergenceEstimate:
    """Estimate ``D_alpha(P || Q)`` from samplers by the variational formula.

    Each of ``cfg.n_runs`` runs trains a fresh network on its own random
    stream. Runs whose objective turns non-finite are discarded; fewer than
    half succeeding raises :class:`NumericalError`.
    """
    root = rng if rng is not None else RngStream(cfg.seed)
    values, failed = [], 0
    for i in range(cfg.n_runs):
        try:
            values.append(_single_run(sample_p, sample_q, input_dim, cfg, root.split(i)))
        except (NumericalError, FloatingPointError, OverflowError):
            failed += 1
    if len(values) < cfg.n_runs / 2 or not values:
        raise NumericalError(f"variational estimator failed in {failed} of {cfg.n_runs} runs")
    values = [float(v) for v in values]
    arr = np.array(values)
    std = float(arr.std(ddof=1)) if len(arr) > 1 else 0.0
    return DivergenceEstimate(float(arr.mean()), std, len(arr), "variational", dict(inputs or {}), tuple(values), failed)
