"""Orthonormal Haar transform, soft-thresholding and the streaming coefficient tree.

Coefficient layout for a length-``k`` vector (``k`` a power of two), 0-based:

* index ``0`` holds the scaling coefficient ``sum(x) / sqrt(k)``;
* level ``l`` (``l = 0 .. log2(k) - 1``) occupies indices ``[2**l, 2**(l+1))``.
  Wavelet ``j`` of level ``l`` spans ``w = k >> l`` samples starting at ``j * w``
  and equals ``(sum(left half) - sum(right half)) / sqrt(w)``.

The left-minus-right sign is fixed; only magnitudes enter the restart statistic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

__all__ = [
    "MAD_CONSTANT",
    "PaddedVector",
    "ThresholdConfig",
    "HaarState",
    "next_pow2",
    "pad_and_recenter",
    "haar_matrix",
    "haar_forward",
    "haar_inverse",
    "level_slices",
    "soft_threshold",
    "restart_statistic",
    "incremental_append",
    "estimate_sigma_mad",
]

MAD_CONSTANT = 0.6745


def next_pow2(m: int) -> int:
    """Smallest power of two ``>= m`` (``m >= 1``)."""
    if m < 1:
        raise ValueError(f"length must be >= 1, got {m}")
    return 1 << (m - 1).bit_length()


@dataclass(frozen=True)
class PaddedVector:
    values: np.ndarray
    original_len: int
    mean: float

    @property
    def k(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class ThresholdConfig:
    """Universal-style threshold ``sigma * sqrt(beta * log(n))``.

    ``log`` is natural by default; pass ``log_base=2`` to switch conventions.
    """

    sigma: float
    beta: float
    n: int
    log_base: float = math.e

    def __post_init__(self):
        if not (self.sigma >= 0 and math.isfinite(self.sigma)):
            raise ValueError(f"sigma must be finite and >= 0, got {self.sigma}")
        if not self.beta > 0:
            raise ValueError(f"beta must be > 0, got {self.beta}")
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")

    @property
    def threshold(self) -> float:
        return self.sigma * math.sqrt(self.beta * math.log(self.n, self.log_base))


def pad_and_recenter(raw) -> PaddedVector:
    """Subtract the sample mean and zero-pad up to the next power of two."""
    x = np.asarray(raw, dtype=np.float64).ravel()
    if x.size == 0:
        raise ValueError("pad_and_recenter needs at least one observation")
    if not np.all(np.isfinite(x)):
        raise ValueError("observations must be finite")
    mean = math.fsum(x) / x.size
    values = np.zeros(next_pow2(x.size))
    values[: x.size] = x - mean
    return PaddedVector(values=values, original_len=int(x.size), mean=mean)


def haar_matrix(k: int) -> np.ndarray:
    """Dense orthonormal Haar matrix ``H`` (rows are basis vectors)."""
    if k < 1 or k & (k - 1):
        raise ValueError(f"k must be a power of 2, got {k}")
    H = np.zeros((k, k))
    H[0, :] = 1.0 / math.sqrt(k)
    levels = k.bit_length() - 1
    for l in range(levels):
        w = k >> l
        for j in range(1 << l):
            row = (1 << l) + j
            s = j * w
            H[row, s : s + w // 2] = 1.0 / math.sqrt(w)
            H[row, s + w // 2 : s + w] = -1.0 / math.sqrt(w)
    return H


def haar_forward(x) -> np.ndarray:
    """Haar coefficients of a power-of-two length vector (or a ``PaddedVector``)."""
    if isinstance(x, PaddedVector):
        x = x.values
    v = np.asarray(x, dtype=np.float64).ravel()
    k = v.size
    if k < 1 or k & (k - 1):
        raise ValueError(f"length must be a power of 2, got {k}")
    out = np.empty(k)
    approx = v.copy()
    while approx.size > 1:
        half = approx.size // 2
        even, odd = approx[0::2], approx[1::2]
        out[half : 2 * half] = (even - odd) / math.sqrt(2.0)
        approx = (even + odd) / math.sqrt(2.0)
    out[0] = approx[0]
    return out


def haar_inverse(alpha) -> np.ndarray:
    a = np.asarray(alpha, dtype=np.float64).ravel()
    k = a.size
    if k < 1 or k & (k - 1):
        raise ValueError(f"length must be a power of 2, got {k}")
    approx = a[:1].copy()
    size = 1
    while size < k:
        detail = a[size : 2 * size]
        nxt = np.empty(2 * size)
        nxt[0::2] = (approx + detail) / math.sqrt(2.0)
        nxt[1::2] = (approx - detail) / math.sqrt(2.0)
        approx = nxt
        size *= 2
    return approx


def level_slices(k: int) -> list[slice]:
    """Index slices of the detail blocks, coarsest first."""
    return [slice(1 << l, 1 << (l + 1)) for l in range(k.bit_length() - 1)]


def soft_threshold(alpha, lam: float):
    if lam < 0:
        raise ValueError(f"threshold must be >= 0, got {lam}")
    a = np.asarray(alpha, dtype=np.float64)
    return np.sign(a) * np.maximum(np.abs(a) - lam, 0.0)


def restart_statistic(shrunk) -> float:
    """``sum_l 2**(l/2) * ||shrunk[l]||_1`` over the detail blocks.

    The ``1/sqrt(k)`` factor of the restart rule appears on both sides and is
    dropped, so a restart fires when this exceeds ``sigma``.
    """
    a = np.asarray(shrunk, dtype=np.float64).ravel()
    return float(
        sum(2.0 ** (l / 2) * np.abs(a[s]).sum() for l, s in enumerate(level_slices(a.size)))
    )


def estimate_sigma_mad(observations) -> float:
    """Noise scale from the median absolute finest-scale Haar detail.

    Pairs ``(y[2i], y[2i+1])`` give details ``(y[2i] - y[2i+1]) / sqrt(2)``; an odd
    trailing sample is dropped.
    """
    y = np.asarray(observations, dtype=np.float64).ravel()
    if y.size < 2:
        raise ValueError("need at least 2 observations to estimate sigma")
    m = y.size // 2 * 2
    d = (y[0:m:2] - y[1:m:2]) / math.sqrt(2.0)
    return float(np.median(np.abs(d)) / MAD_CONSTANT)


# ---------------------------------------------------------------------------
# streaming engine
# ---------------------------------------------------------------------------

# float slots
_MEAN, _STAT = 0, 1
# int slots
_COUNT, _PIVOT, _NNZ, _WRITES = 0, 1, 2, 3

# 2**(k/2) and 2**(-k/2); wavelet widths and level weights are powers of two
_SQRT2_POW = 2.0 ** (np.arange(128) / 2.0)
_INV_SQRT2_POW = 1.0 / _SQRT2_POW


@numba.njit(cache=True)
def _log2(p):
    L = 0
    while (1 << L) < p:
        L += 1
    return L


@numba.njit(cache=True)
def _shrunk_abs(v, lam):
    r = abs(v) - lam
    return r if r > 0.0 else 0.0


@numba.njit(cache=True)
def _step_coeff(t, p, L, l):
    """(index, value) of the level-``l`` coefficient of the indicator of ``[0, t)``."""
    w = p >> l
    j = t // w
    if j >= (1 << l):
        return (2 << l), 0.0
    c = t - j * w
    half = w // 2
    left = c if c < half else half
    right = c - half if c > half else 0
    return (1 << l) + j, (left - right) * _INV_SQRT2_POW[L - l]


@numba.njit(cache=True)
def _rebuild(raw, a, alpha, fs, ints, lam):
    """Recompute every coefficient of the current bin from the raw buffer."""
    t = ints[_COUNT]
    p = ints[_PIVOT]
    L = _log2(p)
    for i in range(p):
        a[i] = raw[i] if i < t else 0.0
    # in-place pyramid, output layout written into alpha as scratch
    size = p
    while size > 1:
        half = size // 2
        for i in range(half):
            e = a[2 * i]
            o = a[2 * i + 1]
            alpha[half + i] = (e - o) / math.sqrt(2.0)
            a[i] = (e + o) / math.sqrt(2.0)
        size = half
    alpha[0] = a[0]
    for i in range(p):
        a[i] = alpha[i]
    mean = fs[_MEAN]
    alpha[0] = a[0] - mean * t / math.sqrt(p)
    for l in range(L):
        idx, h = _step_coeff(t, p, L, l)
        if idx < (2 << l):  # t == p has no boundary wavelet
            alpha[idx] = a[idx] - mean * h
    stat = 0.0
    nnz = 0
    for l in range(L):
        wgt = _SQRT2_POW[l]
        for i in range(1 << l, 2 << l):
            s = _shrunk_abs(alpha[i], lam)
            if s > 0.0:
                nnz += 1
                stat += wgt * s
    fs[_STAT] = stat
    ints[_NNZ] = nnz
    ints[_WRITES] += p


@numba.njit(cache=True)
def _append(raw, a, alpha, fs, ints, y, lam):
    """Push ``y`` into the bin; keeps ``alpha = H pad0(raw)`` and the shrunk statistic.

    Returns the restart statistic after the update.  Arrays must hold at least
    ``2 * pivot`` entries whenever ``count == pivot``.
    """
    t = ints[_COUNT]
    p = ints[_PIVOT]
    raw[t] = y
    # incremental mean stays bit-exact on constant input
    fs[_MEAN] += (y - fs[_MEAN]) / (t + 1)
    if t == p:
        ints[_PIVOT] = 2 * p
        ints[_COUNT] = t + 1
        _rebuild(raw, a, alpha, fs, ints, lam)
        return fs[_STAT] if ints[_NNZ] > 0 else 0.0

    L = _log2(p)
    t1 = t + 1
    mean = fs[_MEAN]
    stat = fs[_STAT]
    nnz = ints[_NNZ]
    writes = 0
    isp = _INV_SQRT2_POW[L]
    a[0] += y * isp
    alpha[0] = a[0] - mean * t1 * isp
    for l in range(L):
        wgt = _SQRT2_POW[l]
        w = p >> l
        base = 1 << l
        # wavelet carrying the new sample
        jp = base + t // w
        i_old, _ = _step_coeff(t, p, L, l)
        i_new, h_new = _step_coeff(t1, p, L, l)
        # distinct touched indices at this level (at most three)
        for slot in range(3):
            if slot == 0:
                i = jp
            elif slot == 1:
                i = i_old
                if i == jp or i >= 2 * base:
                    continue
            else:
                i = i_new
                if i == jp or i == i_old or i >= 2 * base:
                    continue
            before = _shrunk_abs(alpha[i], lam)
            if i == jp:
                r = t - (t // w) * w
                if r < w // 2:
                    a[i] += y * _INV_SQRT2_POW[L - l]
                else:
                    a[i] -= y * _INV_SQRT2_POW[L - l]
            if i == i_new:
                alpha[i] = a[i] - mean * h_new
            else:
                alpha[i] = a[i]
            after = _shrunk_abs(alpha[i], lam)
            writes += 1
            if before > 0.0:
                nnz -= 1
                stat -= wgt * before
            if after > 0.0:
                nnz += 1
                stat += wgt * after
    ints[_COUNT] = t1
    ints[_NNZ] = nnz
    ints[_WRITES] += writes + 1
    if nnz == 0:
        stat = 0.0
    fs[_STAT] = stat
    return stat


class HaarState:
    """Haar coefficients of the recentred, zero-padded observations of one bin.

    Each :meth:`append` touches ``O(log pivot)`` coefficients; a pivot doubling
    rebuilds the tree from the raw buffer, which also resets accumulated
    rounding error.
    """

    def __init__(self, threshold: float = 0.0, capacity: int = 16):
        if threshold < 0:
            raise ValueError("threshold must be >= 0")
        self.threshold = float(threshold)
        cap = max(2, next_pow2(capacity))
        self._raw = np.zeros(cap)
        self._a = np.zeros(cap)
        self._alpha = np.zeros(cap)
        self._fs = np.zeros(2)
        self._ints = np.array([0, 1, 0, 0], dtype=np.int64)

    @property
    def count(self) -> int:
        return int(self._ints[_COUNT])

    @property
    def pivot(self) -> int:
        return int(self._ints[_PIVOT])

    @property
    def coefficient_writes(self) -> int:
        return int(self._ints[_WRITES])

    @property
    def raw(self) -> np.ndarray:
        return self._raw[: self.count].copy()

    @property
    def coeffs(self) -> np.ndarray:
        if self.count == 0:
            return np.zeros(1)
        return self._alpha[: self.pivot].copy()

    @property
    def mean(self) -> float:
        if self.count == 0:
            raise ValueError("empty bin has no mean")
        return float(self._fs[_MEAN])

    @property
    def running_sum(self) -> float:
        return self.mean * self.count

    @property
    def statistic(self) -> float:
        """Restart statistic of the thresholded coefficients."""
        return float(self._fs[_STAT]) if self._ints[_NNZ] > 0 else 0.0

    def set_threshold(self, threshold: float):
        if threshold < 0:
            raise ValueError("threshold must be >= 0")
        self.threshold = float(threshold)
        if self.count:
            _rebuild(self._raw, self._a, self._alpha, self._fs, self._ints, self.threshold)

    def _grow(self):
        cap = 2 * self._raw.size
        for name in ("_raw", "_a", "_alpha"):
            buf = np.zeros(cap)
            old = getattr(self, name)
            buf[: old.size] = old
            setattr(self, name, buf)

    def append(self, y: float) -> float:
        y = float(y)
        if not math.isfinite(y):
            raise ValueError(f"observation must be finite, got {y}")
        if self.count == self.pivot and self._raw.size < 2 * self.pivot:
            self._grow()
        return float(_append(self._raw, self._a, self._alpha, self._fs, self._ints, y, self.threshold))

    def shrunk(self) -> np.ndarray:
        return soft_threshold(self.coeffs, self.threshold)


def incremental_append(state: HaarState, y: float, config: ThresholdConfig | None = None) -> HaarState:
    """Append ``y`` to ``state`` in place and return it."""
    if config is not None and config.threshold != state.threshold:
        state.set_threshold(config.threshold)
    state.append(y)
    return state
