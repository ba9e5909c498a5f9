"""ARROWS: online averaging with a wavelet-shrinkage restart rule."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numba
import numpy as np

from .haar import _COUNT, _MEAN, _NNZ, _PIVOT, HaarState, ThresholdConfig, _append

__all__ = [
    "DEFAULT_DELTA",
    "ArrowsConfig",
    "ArrowsForecaster",
    "StepOutcome",
    "ProtocolError",
    "HorizonExceededError",
    "default_beta",
    "run_horizon",
    "run_arrows",
]

DEFAULT_DELTA = 0.1


class ProtocolError(RuntimeError):
    """predict/observe called out of order."""


class HorizonExceededError(RuntimeError):
    pass


def default_beta(n: int, delta: float = DEFAULT_DELTA) -> float:
    """``24 + 8 log(8/delta) / log(n)``; for ``n == 1`` the log ratio is taken as 0."""
    if n <= 1:
        return 24.0
    return 24.0 + 8.0 * math.log(8.0 / delta) / math.log(n)


@dataclass(frozen=True)
class ArrowsConfig:
    n: int
    sigma: float
    delta: float = DEFAULT_DELTA
    beta_override: float | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"horizon n must be >= 1, got {self.n}")
        if not (self.sigma >= 0 and math.isfinite(self.sigma)):
            raise ValueError(f"sigma must be finite and >= 0, got {self.sigma}")
        if not 0 < self.delta <= 1:
            raise ValueError(f"delta must lie in (0, 1], got {self.delta}")
        if self.beta_override is not None and not self.beta_override > 0:
            raise ValueError(f"beta_override must be > 0, got {self.beta_override}")

    @property
    def beta(self) -> float:
        if self.beta_override is not None:
            return float(self.beta_override)
        return default_beta(self.n, self.delta)

    @property
    def threshold(self) -> float:
        return ThresholdConfig(self.sigma, self.beta, self.n).threshold


@dataclass(frozen=True)
class StepOutcome:
    restarted: bool
    statistic: float


class ArrowsForecaster:
    """Stateful ARROWS forecaster driven by strict ``predict``/``observe`` alternation.

    >>> f = ArrowsForecaster(ArrowsConfig(n=3, sigma=1.0))
    >>> f.predict()
    0.0
    >>> f.observe(2.0).restarted
    False
    >>> f.predict()
    2.0
    """

    def __init__(self, config: ArrowsConfig):
        if config.sigma == 0:
            warnings.warn("sigma = 0: every nonzero recentred coefficient triggers a restart", stacklevel=2)
        self.config = config
        self.threshold = config.threshold
        self.t = 1
        self.t_h = 1
        self.new_bin = True
        self.last_y = 0.0
        self.haar = HaarState(self.threshold)
        self.closed_bins: list[tuple[int, int]] = []
        self._pending: float | None = None

    @property
    def bins(self) -> list[tuple[int, int]]:
        """Closed bins followed by the open one, covering ``[1, t - 1]``."""
        out = list(self.closed_bins)
        if self.t_h <= self.t - 1:
            out.append((self.t_h, self.t - 1))
        return out

    @property
    def num_bins(self) -> int:
        return len(self.bins)

    def _forecast(self) -> float:
        if self.new_bin:
            return self.last_y
        return self.haar.mean

    def predict(self) -> float:
        if self._pending is not None:
            raise ProtocolError(f"predict already called for t={self.t}")
        if self.t > self.config.n:
            raise HorizonExceededError(f"horizon n={self.config.n} exhausted")
        self._pending = self._forecast()
        return self._pending

    def observe(self, y: float) -> StepOutcome:
        if self.t > self.config.n:
            raise HorizonExceededError(f"horizon n={self.config.n} exhausted")
        if self._pending is None:
            raise ProtocolError(f"observe at t={self.t} without a prediction")
        y = float(y)
        if not math.isfinite(y):
            raise ValueError(f"observation must be finite, got {y}")
        self._pending = None
        self.new_bin = False
        stat = self.haar.append(y)
        restarted = stat > self.config.sigma
        if restarted:
            self.closed_bins.append((self.t_h, self.t))
            self.t_h = self.t + 1
            self.new_bin = True
            self.haar = HaarState(self.threshold)
        self.last_y = y
        self.t += 1
        return StepOutcome(restarted, stat)


@numba.njit(cache=True)
def _run_kernel(ys, lam, sigma, preds, restarts, stats):
    n = ys.size
    cap = 2
    while cap < 2 * n:
        cap *= 2
    raw = np.zeros(cap)
    a = np.zeros(cap)
    alpha = np.zeros(cap)
    fs = np.zeros(2)
    ints = np.zeros(4, dtype=np.int64)
    ints[_PIVOT] = 1
    new_bin = True
    last_y = 0.0
    for t in range(n):
        if new_bin:
            preds[t] = last_y
        else:
            preds[t] = fs[_MEAN]
        new_bin = False
        y = ys[t]
        s = _append(raw, a, alpha, fs, ints, y, lam)
        stats[t] = s
        if s > sigma:
            restarts[t] = True
            new_bin = True
            fs[:] = 0.0
            ints[_COUNT] = 0
            ints[_PIVOT] = 1
            ints[_NNZ] = 0
            a[0] = 0.0
            alpha[0] = 0.0
        last_y = y


def run_arrows(config: ArrowsConfig, ys) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Whole-horizon ARROWS in compiled code: ``(predictions, restart_flags, statistics)``.

    Produces exactly what stepping an :class:`ArrowsForecaster` would.
    """
    ys = np.ascontiguousarray(ys, dtype=np.float64)
    if ys.ndim != 1 or ys.size != config.n:
        raise ValueError(f"expected {config.n} observations, got shape {ys.shape}")
    if not np.all(np.isfinite(ys)):
        raise ValueError("observations must be finite")
    if config.sigma == 0:
        warnings.warn("sigma = 0: every nonzero recentred coefficient triggers a restart", stacklevel=2)
    preds = np.empty(config.n)
    restarts = np.zeros(config.n, dtype=np.bool_)
    stats = np.empty(config.n)
    _run_kernel(ys, config.threshold, float(config.sigma), preds, restarts, stats)
    return preds, restarts, stats


def bins_from_restarts(restarts) -> list[tuple[int, int]]:
    """1-based bin intervals implied by a restart-flag vector."""
    r = np.asarray(restarts, dtype=bool)
    out, start = [], 1
    for t in np.flatnonzero(r) + 1:
        out.append((start, int(t)))
        start = int(t) + 1
    if start <= r.size:
        out.append((start, r.size))
    return out


def run_horizon(forecaster: ArrowsForecaster, ys, theta=None, seed: int | None = None):
    """Drive a fresh forecaster over ``ys`` and return a :class:`~arrows.evaluation.TrialTrace`."""
    from .evaluation import TrialTrace

    cfg = forecaster.config
    ys = np.asarray(ys, dtype=np.float64)
    if ys.ndim != 1 or ys.size != cfg.n:
        raise ValueError(f"expected {cfg.n} observations, got shape {ys.shape}")
    if forecaster.t != 1:
        raise ProtocolError("run_horizon needs a fresh forecaster")
    preds = np.empty(cfg.n)
    restarts = np.zeros(cfg.n, dtype=bool)
    for i, y in enumerate(ys):
        preds[i] = forecaster.predict()
        restarts[i] = forecaster.observe(y).restarted
    return TrialTrace(
        y=ys,
        x=preds,
        restart=restarts,
        theta=None if theta is None else np.asarray(theta, dtype=np.float64),
        algo="arrows",
        config={"n": cfg.n, "sigma": cfg.sigma, "delta": cfg.delta, "beta": cfg.beta,
                "threshold": forecaster.threshold},
        seed=seed,
    )
