"""Linear forecasters: restarting OGD (batched online averages) and moving averages.

Under squared loss, restarting OGD reduces to online averaging inside fixed-length
batches. Both forecasters start a fresh average from the previous observation
(``y_0 = 0``). Tuning helpers round to the nearest integer and clamp to ``[1, n]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

__all__ = [
    "OgdConfig",
    "MaConfig",
    "ogd_batch_size_tv",
    "ogd_batch_size_sobolev",
    "ma_window_tv",
    "ogd_predictions",
    "ma_predictions",
    "run_ogd",
    "run_ma",
]


@dataclass(frozen=True)
class OgdConfig:
    batch_size: int
    n: int

    def __post_init__(self):
        if not 1 <= self.batch_size <= self.n:
            raise ValueError(f"batch size must lie in [1, n={self.n}], got {self.batch_size}")


@dataclass(frozen=True)
class MaConfig:
    window: int
    n: int

    def __post_init__(self):
        if not 1 <= self.window <= self.n:
            raise ValueError(f"window must lie in [1, n={self.n}], got {self.window}")


def _check(n, sigma, radius):
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not sigma >= 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    if not radius > 0:
        raise ValueError(f"variation radius must be > 0, got {radius}")


def _clamp(v: float, n: int) -> int:
    if not math.isfinite(v):
        return n if v > 0 else 1
    return int(min(max(round(v), 1), n))


def ogd_batch_size_tv(n: int, sigma: float, c_n: float) -> int:
    """``sqrt(n log n) * sigma / C_n``."""
    _check(n, sigma, c_n)
    return _clamp(math.sqrt(n * math.log(n)) * sigma / c_n, n)


def ogd_batch_size_sobolev(n: int, sigma: float, c_n_prime: float) -> int:
    """``sigma^(2/3) (n log n)^(1/3) / C_n'^(2/3)``."""
    _check(n, sigma, c_n_prime)
    return _clamp(sigma ** (2 / 3) * (n * math.log(n)) ** (1 / 3) / c_n_prime ** (2 / 3), n)


def ma_window_tv(n: int, sigma: float, c_n: float) -> int:
    """``sigma sqrt(n) / C_n``."""
    _check(n, sigma, c_n)
    return _clamp(sigma * math.sqrt(n) / c_n, n)


def ogd_predictions(ys, batch_size: int) -> tuple[np.ndarray, np.ndarray]:
    """Predictions and batch-end flags for batches of fixed length ``batch_size``."""
    y = np.asarray(ys, dtype=np.float64)
    n = y.size
    L = int(batch_size)
    if L < 1:
        raise ValueError("batch size must be >= 1")
    nb = -(-n // L)
    padded = np.zeros(nb * L)
    padded[:n] = y
    blocks = padded.reshape(nb, L)
    counts = np.arange(1, L + 1)
    means = np.cumsum(blocks, axis=1) / counts
    x = np.empty((nb, L))
    x[:, 1:] = means[:, :-1]
    prev = np.concatenate(([0.0], padded[L - 1 :: L][:-1]))
    x[:, 0] = prev
    ends = np.zeros(n, dtype=bool)
    ends[L - 1 :: L] = True
    return x.ravel()[:n], ends


@numba.njit(cache=True)
def _ma_kernel(y, m, out):
    # window sum is re-accumulated from scratch every m steps to bound drift
    n = y.size
    out[0] = 0.0
    s = 0.0
    for t in range(1, n):
        # window covers y[lo:t]
        lo = t - m if t > m else 0
        if (t - 1) % m == 0 and t > 1:
            s = 0.0
            for i in range(lo, t):
                s += y[i]
        else:
            s += y[t - 1]
            if t > m:
                s -= y[t - m - 1]
        out[t] = s / (t - lo)


def ma_predictions(ys, window: int) -> np.ndarray:
    y = np.ascontiguousarray(ys, dtype=np.float64)
    if window < 1:
        raise ValueError("window must be >= 1")
    out = np.empty(y.size)
    if y.size:
        _ma_kernel(y, int(window), out)
    return out


def run_ogd(config: OgdConfig, ys):
    from .evaluation import TrialTrace

    y = np.asarray(ys, dtype=np.float64)
    if y.size != config.n:
        raise ValueError(f"expected {config.n} observations, got {y.size}")
    x, ends = ogd_predictions(y, config.batch_size)
    return TrialTrace(y=y, x=x, restart=ends, algo="ogd", config={"batch_size": config.batch_size})


def run_ma(config: MaConfig, ys):
    from .evaluation import TrialTrace

    y = np.asarray(ys, dtype=np.float64)
    if y.size != config.n:
        raise ValueError(f"expected {config.n} observations, got {y.size}")
    x = ma_predictions(y, config.window)
    return TrialTrace(y=y, x=x, restart=np.zeros(y.size, dtype=bool), algo="ma",
                      config={"window": config.window})
