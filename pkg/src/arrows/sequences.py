"""Ground-truth trends with exact variation norms, and a seeded Gaussian noise channel."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.interpolate import CubicSpline

__all__ = [
    "GroundTruth",
    "NoiseSpec",
    "gen_doppler",
    "gen_step",
    "gen_linear",
    "gen_hybrid",
    "gen_constant",
    "add_noise",
    "GENERATORS",
    "make_generator",
]

DEFAULT_EPSILON = 0.05


@dataclass(frozen=True)
class GroundTruth:
    theta: np.ndarray
    tv: float
    sobolev: float
    sup: float
    label: dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_theta(cls, theta, **label) -> "GroundTruth":
        theta = np.asarray(theta, dtype=np.float64)
        theta.setflags(write=False)
        d = np.diff(theta)
        return cls(
            theta=theta,
            tv=math.fsum(np.abs(d)),
            sobolev=math.sqrt(math.fsum(d * d)),
            sup=float(np.max(np.abs(theta))) if theta.size else 0.0,
            label=label,
        )

    @property
    def n(self) -> int:
        return self.theta.size


@dataclass(frozen=True)
class NoiseSpec:
    sigma: float
    seed: int
    kind: str = "gaussian"

    def __post_init__(self):
        if not (self.sigma >= 0 and math.isfinite(self.sigma)):
            raise ValueError(f"sigma must be finite and >= 0, got {self.sigma}")
        if self.kind != "gaussian":
            raise ValueError(f"unsupported noise kind {self.kind!r}")


def _doppler(u, epsilon, offset):
    return np.sin(2 * np.pi * (1 + epsilon) / (u + offset))


def gen_doppler(n: int, epsilon: float = DEFAULT_EPSILON, offset: float = 0.38) -> GroundTruth:
    """``theta_i = sin(2 pi (1 + eps) / (i/n + offset))`` for ``i = 1..n``."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not offset > 0:
        raise ValueError(f"offset must be > 0 (the trend has a pole at -offset), got {offset}")
    u = np.arange(1, n + 1) / n
    return GroundTruth.from_theta(_doppler(u, epsilon, offset), name="doppler", n=n,
                                  epsilon=epsilon, offset=offset)


def gen_step(n: int, levels=(0.0, 5.0), breakpoints=None) -> GroundTruth:
    """Piecewise-constant trend; ``levels[k]`` starts at 1-based index ``breakpoints[k-1]``.

    With ``breakpoints=None`` the jumps are spread evenly over ``[1, n]``.
    """
    levels = [float(v) for v in levels]
    if not levels:
        raise ValueError("need at least one level")
    if breakpoints is None:
        breakpoints = [k * n // len(levels) + 1 for k in range(1, len(levels))]
    bps = [int(b) for b in breakpoints]
    if len(bps) != len(levels) - 1:
        raise ValueError("need exactly len(levels) - 1 breakpoints")
    if any(b < 1 or b > n for b in bps) or any(b2 <= b1 for b1, b2 in zip(bps, bps[1:])):
        raise ValueError(f"breakpoints must be strictly increasing within [1, {n}], got {bps}")
    theta = np.full(n, levels[0])
    for b, v in zip(bps, levels[1:]):
        theta[b - 1 :] = v
    return GroundTruth.from_theta(theta, name="step", n=n, levels=levels, breakpoints=bps)


def gen_linear(n: int, slope_total: float = 1.0) -> GroundTruth:
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    theta = slope_total * np.arange(n) / (n - 1)
    return GroundTruth.from_theta(theta, name="linear", n=n, slope_total=slope_total)


def gen_constant(n: int, value: float = 0.0) -> GroundTruth:
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return GroundTruth.from_theta(np.full(n, float(value)), name="constant", n=n, value=value)


def spline_knots(num_knots: int = 8, ratio: float = 0.7, amplitude: float = 1.0):
    """Knot positions on ``[0, 1]`` whose gaps shrink geometrically, with alternating values."""
    if num_knots < 2 or not 0 < ratio or amplitude < 0:
        raise ValueError("need >= 2 knots, ratio > 0 and amplitude >= 0")
    gaps = ratio ** np.arange(num_knots - 1)
    x = np.concatenate(([0.0], np.cumsum(gaps) / gaps.sum()))
    x[-1] = 1.0
    values = amplitude * (-1.0) ** np.arange(num_knots)
    return x, values


def gen_hybrid(
    n: int,
    num_knots: int = 8,
    knot_ratio: float = 0.7,
    amplitude: float = 1.0,
    doppler_epsilon: float = DEFAULT_EPSILON,
) -> GroundTruth:
    """Natural cubic spline on the first half, Doppler (offset 0.38) on the second.

    Spline knots crowd geometrically toward the midpoint and alternate between
    ``+amplitude`` and ``-amplitude``; the Doppler half is evaluated on its own
    rescaled clock ``u = 1/m .. 1``.
    """
    if n < 4:
        raise ValueError(f"n must be >= 4, got {n}")
    h = n // 2
    kx, kv = spline_knots(num_knots, knot_ratio, amplitude)
    spline = CubicSpline(kx, kv, bc_type="natural")
    first = spline(np.arange(h) / (h - 1))
    m = n - h
    second = _doppler(np.arange(1, m + 1) / m, doppler_epsilon, 0.38)
    return GroundTruth.from_theta(
        np.concatenate((first, second)), name="hybrid", n=n, num_knots=num_knots,
        knot_ratio=knot_ratio, amplitude=amplitude, doppler_epsilon=doppler_epsilon,
    )


def add_noise(truth: GroundTruth, spec: NoiseSpec) -> np.ndarray:
    """``y = theta + sigma * g`` with ``g`` drawn from ``numpy.random.default_rng(seed)``."""
    if spec.sigma == 0:
        return truth.theta.copy()
    g = np.random.default_rng(spec.seed).standard_normal(truth.n)
    return truth.theta + spec.sigma * g


GENERATORS = {
    "hybrid": gen_hybrid,
    "doppler": gen_doppler,
    "step": gen_step,
    "linear": gen_linear,
    "constant": gen_constant,
}


def make_generator(name: str, **params):
    """``n -> GroundTruth`` closure; picklable so sweeps can run in worker processes."""
    if name not in GENERATORS:
        raise ValueError(f"unknown generator {name!r}; choose from {sorted(GENERATORS)}")
    return _Generator(name, params)


@dataclass(frozen=True)
class _Generator:
    name: str
    params: dict

    def __call__(self, n: int) -> GroundTruth:
        return GENERATORS[self.name](n, **self.params)
