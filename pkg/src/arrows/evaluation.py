"""Dynamic regret, per-trial traces, seed aggregation and log-log slope fits."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from . import baselines
from .policy import ArrowsConfig, bins_from_restarts, run_arrows
from .sequences import GroundTruth, NoiseSpec, add_noise

__all__ = [
    "ALGORITHMS",
    "TrialTrace",
    "RegretReport",
    "dynamic_regret",
    "scaling_slope",
    "aggregate_seeds",
    "run_algorithm",
    "sweep",
    "per_n_rows",
]

ALGORITHMS = ("arrows", "ogd-tv", "ogd-sobolev", "ma-tv")


@dataclass
class TrialTrace:
    """Per-step record of one forecasting run (row ``t`` is time ``t + 1``)."""

    y: np.ndarray
    x: np.ndarray
    restart: np.ndarray
    theta: np.ndarray | None = None
    algo: str = ""
    config: dict[str, Any] = field(default_factory=dict)
    seed: int | None = None
    wallclock: float = 0.0

    def __post_init__(self):
        n = len(self.y)
        if len(self.x) != n or len(self.restart) != n:
            raise ValueError("trace columns must share one length")
        if self.theta is not None and len(self.theta) != n:
            raise ValueError("theta length differs from the trace length")

    @property
    def n(self) -> int:
        return len(self.y)

    @property
    def t(self) -> np.ndarray:
        return np.arange(1, self.n + 1)

    @property
    def loss(self) -> np.ndarray:
        if self.theta is None:
            raise ValueError("trace has no ground truth attached")
        return (self.x - self.theta) ** 2

    @property
    def num_bins(self) -> int:
        return len(bins_from_restarts(self.restart))

    @property
    def bins(self) -> list[tuple[int, int]]:
        return bins_from_restarts(self.restart)


@dataclass
class RegretReport:
    algo: str
    n: int
    regrets: tuple[float, ...]
    bins: tuple[int, ...]
    wallclock: float

    @property
    def total_regret(self) -> float:
        """Mean over seeds."""
        return float(np.mean(self.regrets))

    @property
    def std(self) -> float:
        if len(self.regrets) < 2:
            return 0.0
        return float(np.std(self.regrets, ddof=1))

    @property
    def num_bins(self) -> float:
        return float(np.mean(self.bins))


def dynamic_regret(trace: TrialTrace) -> float:
    """Cumulative squared error; the per-step comparator loss is zero under squared loss."""
    return math.fsum(trace.loss)


def scaling_slope(per_n: Sequence[tuple[float, float]]) -> float:
    """OLS slope of ``log(regret)`` on ``log(n)``."""
    rows = np.asarray(per_n, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[0] < 3 or rows.shape[1] < 2:
        raise ValueError("need at least 3 (n, regret) rows")
    ns, rs = rows[:, 0], rows[:, 1]
    if np.any(np.diff(ns) <= 0):
        raise ValueError("n must be strictly increasing")
    if np.any(rs <= 0) or np.any(ns <= 0):
        raise ValueError("regret and n must be positive for a log-log fit")
    lx, ly = np.log(ns), np.log(rs)
    lx = lx - lx.mean()
    return float(np.dot(lx, ly - ly.mean()) / np.dot(lx, lx))


def aggregate_seeds(traces: Sequence[TrialTrace]) -> RegretReport:
    if not traces:
        raise ValueError("no traces to aggregate")
    first = traces[0]
    for tr in traces[1:]:
        if tr.algo != first.algo or tr.n != first.n or tr.config != first.config:
            raise ValueError("traces differ in algorithm, horizon or configuration")
    return RegretReport(
        algo=first.algo,
        n=first.n,
        regrets=tuple(dynamic_regret(tr) for tr in traces),
        bins=tuple(tr.num_bins for tr in traces),
        wallclock=sum(tr.wallclock for tr in traces),
    )


def run_algorithm(
    algo: str,
    truth: GroundTruth,
    y: np.ndarray,
    sigma: float,
    delta: float = 0.1,
    beta: float | None = None,
    seed: int | None = None,
) -> TrialTrace:
    """Run one named forecaster over ``y``; baselines get oracle-tuned sizes from ``truth``."""
    n = len(y)
    start = time.perf_counter()
    if algo == "arrows":
        cfg = ArrowsConfig(n=n, sigma=sigma, delta=delta, beta_override=beta)
        x, restart, _ = run_arrows(cfg, y)
        config = {"sigma": sigma, "delta": delta, "beta": cfg.beta, "threshold": cfg.threshold}
    elif algo in ("ogd-tv", "ogd-sobolev"):
        if algo == "ogd-tv":
            L = baselines.ogd_batch_size_tv(n, sigma, _positive(truth.tv))
        else:
            L = baselines.ogd_batch_size_sobolev(n, sigma, _positive(truth.sobolev))
        x, restart = baselines.ogd_predictions(y, L)
        config = {"sigma": sigma, "batch_size": L}
    elif algo == "ma-tv":
        m = baselines.ma_window_tv(n, sigma, _positive(truth.tv))
        x, restart = baselines.ma_predictions(y, m), np.zeros(n, dtype=bool)
        config = {"sigma": sigma, "window": m}
    else:
        raise ValueError(f"unknown algorithm {algo!r}; choose from {ALGORITHMS}")
    elapsed = time.perf_counter() - start
    return TrialTrace(y=y, x=x, restart=restart, theta=truth.theta, algo=algo,
                      config=config, seed=seed, wallclock=elapsed)


def _positive(c: float) -> float:
    # zero-variation truth: fall back to the smallest positive radius so the tuners clamp to n
    return c if c > 0 else np.finfo(float).tiny


def sweep(
    algos: Sequence[str],
    make_truth,
    n_grid: Sequence[int],
    seeds: Sequence[int],
    sigma: float = 1.0,
    delta: float = 0.1,
    beta: float | None = None,
    workers: int = 1,
) -> list[TrialTrace]:
    """All ``(n, seed, algo)`` trials, returned in deterministic ``(n, seed, algo)`` order.

    ``make_truth(n)`` builds the ground truth for horizon ``n``.
    """
    jobs = [(n, s) for n in n_grid for s in seeds]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as ex:
            futs = [ex.submit(_trial_group, tuple(algos), make_truth, n, s, sigma, delta, beta)
                    for n, s in jobs]
            groups = [f.result() for f in futs]
    else:
        groups = [_trial_group(tuple(algos), make_truth, n, s, sigma, delta, beta) for n, s in jobs]
    return [tr for g in groups for tr in g]


def _trial_group(algos, make_truth, n, seed, sigma, delta, beta):
    truth = make_truth(n)
    y = add_noise(truth, NoiseSpec(sigma=sigma, seed=seed))
    return [run_algorithm(a, truth, y, sigma, delta, beta, seed) for a in algos]


def per_n_rows(traces: Sequence[TrialTrace]) -> dict[str, list[tuple[int, float, float]]]:
    """``algo -> [(n, mean regret, sample std), ...]`` sorted by ``n``."""
    groups: dict[tuple[str, int], list[TrialTrace]] = {}
    for tr in traces:
        groups.setdefault((tr.algo, tr.n), []).append(tr)
    out: dict[str, list[tuple[int, float, float]]] = {}
    for (algo, n), trs in sorted(groups.items(), key=lambda kv: (kv[0][0], kv[0][1])):
        regrets = [dynamic_regret(t) for t in trs]
        std = float(np.std(regrets, ddof=1)) if len(regrets) > 1 else 0.0
        out.setdefault(algo, []).append((n, float(np.mean(regrets)), std))
    return out
