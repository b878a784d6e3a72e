"""Log-domain summation of ``sum_n n^(k/2) exp(-ell(n))``.

The log-weight ``ell`` is given by a finite table followed by an optional
power tail ``a * n**alpha + shift``.  Terms of the tail are unimodal in ``n``,
so the sum is confined to a window around the peak; the window is cut where
the terms fall below ``exp(-WINDOW_DROP)`` of the peak value.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DivergenceError

WINDOW_DROP = 45.0
WINDOW_PAD = 64
DIRECT_LIMIT = 10**7
STRIDE_RTOL = 1e-9
STRIDE_NODES = 2**18
CHUNK = 2**20
# beyond this, integer indices are no longer exact in double precision
INDEX_LIMIT = 2**52


class LogSeries:
    """Evaluator ``n -> ell(n)`` for a table prefix plus a power tail.

    ``prefix[n]`` is used for ``n < len(prefix)``; entries may be ``+inf``.
    For larger ``n`` the value is ``tail_a * n**tail_alpha + tail_shift`` when a
    tail is present and ``+inf`` otherwise.
    """

    __slots__ = ("prefix", "tail_alpha", "tail_a", "tail_shift")

    def __init__(self, prefix, tail_alpha=None, tail_a=None, tail_shift=0.0):
        arr = np.array(prefix, dtype=float).reshape(-1)
        arr.setflags(write=False)
        self.prefix = arr
        if (tail_alpha is None) != (tail_a is None):
            raise ValueError("tail_alpha and tail_a must be given together")
        self.tail_alpha = None if tail_alpha is None else float(tail_alpha)
        self.tail_a = None if tail_a is None else float(tail_a)
        self.tail_shift = float(tail_shift)

    @property
    def has_tail(self) -> bool:
        return self.tail_alpha is not None

    @property
    def support_max(self):
        """Largest index with a finite value, or ``None`` for infinite support."""
        if self.has_tail:
            return None
        finite = np.flatnonzero(np.isfinite(self.prefix))
        return int(finite[-1]) if finite.size else None

    def shifted(self, delta: float) -> "LogSeries":
        return LogSeries(
            self.prefix + delta,
            self.tail_alpha,
            self.tail_a,
            self.tail_shift + delta if self.has_tail else 0.0,
        )

    def _tail(self, n):
        return self.tail_a * np.power(n, self.tail_alpha) + self.tail_shift

    def __call__(self, n):
        if np.isscalar(n):
            n = int(n)
            if n < 0:
                raise ValueError("index must be nonnegative")
            if n < self.prefix.size:
                return float(self.prefix[n])
            if not self.has_tail:
                return math.inf
            return self.tail_a * float(n) ** self.tail_alpha + self.tail_shift
        n = np.asarray(n)
        out = np.full(n.shape, np.inf)
        inside = n < self.prefix.size
        out[inside] = self.prefix[n[inside]]
        if self.has_tail:
            out[~inside] = self._tail(n[~inside].astype(float))
        return out

    def tail_rel(self, n, n0):
        """``ell(n) - ell(n0)`` for tail indices, without cancellation."""
        n = np.asarray(n, dtype=float)
        x = np.log1p((n - n0) / n0)
        return self.tail_a * float(n0) ** self.tail_alpha * np.expm1(self.tail_alpha * x)

    def descriptor(self) -> dict:
        tail = None
        if self.has_tail:
            tail = {"alpha": self.tail_alpha, "a": self.tail_a, "shift": self.tail_shift}
        return {"prefix": [float(v) for v in self.prefix], "tail": tail}


@dataclass(frozen=True)
class WindowInfo:
    """Where the tail sum for one ``k`` was taken."""

    k: int
    peak: int | None
    lo: int | None
    hi: int | None
    stride: int
    rel_error: float


@dataclass(frozen=True)
class MomentPair:
    """``ln M_k = ref + log_k`` and ``ln M_{k-1} = ref + log_km1``.

    Both logs share the reference ``ref`` so that their difference is free of
    the rounding error carried by ``ref`` itself.
    """

    ref: float
    log_k: float
    log_km1: float
    info: WindowInfo


def _tail_peak(series: LogSeries, k: int, n0: int) -> int:
    if k == 0:
        return n0
    alpha, a = series.tail_alpha, series.tail_a
    nstar = (k / (2.0 * a * alpha)) ** (1.0 / alpha)
    if not math.isfinite(nstar) or nstar > INDEX_LIMIT:
        raise DivergenceError(
            f"moment k={k}: peak index {nstar:.3g} exceeds the exact index range"
        )
    lo = max(n0, int(math.floor(nstar)))
    hi = max(n0, int(math.ceil(nstar)))
    if lo == hi:
        return lo
    # pick the larger of the two integer neighbours
    d = _rel1(series, k, hi, lo)
    return hi if d > 0 else lo


def _rel(series: LogSeries, k: int, n, peak: int):
    """Log of term ``n`` relative to the term at ``peak``."""
    n = np.asarray(n, dtype=float)
    return 0.5 * k * np.log1p((n - peak) / peak) - series.tail_rel(n, peak)


def _rel1(series: LogSeries, k: int, n: int, peak: int) -> float:
    x = math.log1p((n - peak) / peak)
    return 0.5 * k * x - series.tail_a * float(peak) ** series.tail_alpha * math.expm1(
        series.tail_alpha * x
    )


def _edge(series, k, peak, n0, direction):
    """Outermost index past which terms stay below ``exp(-WINDOW_DROP)``."""
    _rel = _rel1
    if direction > 0:
        step = 1
        while _rel(series, k, peak + step, peak) >= -WINDOW_DROP:
            step *= 2
            if peak + step > INDEX_LIMIT:
                raise DivergenceError(f"moment k={k}: summation window does not close")
        lo_off, hi_off = step // 2, step
        while hi_off - lo_off > 1:
            mid = (lo_off + hi_off) // 2
            if _rel(series, k, peak + mid, peak) >= -WINDOW_DROP:
                lo_off = mid
            else:
                hi_off = mid
        return peak + hi_off
    if peak == n0 or _rel(series, k, n0, peak) >= -WINDOW_DROP:
        return n0
    lo_off, hi_off = 0, peak - n0
    while hi_off - lo_off > 1:
        mid = (lo_off + hi_off) // 2
        if _rel(series, k, peak - mid, peak) >= -WINDOW_DROP:
            lo_off = mid
        else:
            hi_off = mid
    return peak - hi_off


def _sum_nodes(series, k, peak, nodes):
    r = _rel(series, k, nodes, peak)
    e = np.exp(r)
    return float(e.sum()), float((e / np.sqrt(nodes)).sum())


def _direct(series, k, peak, lo, hi):
    s = s_half = 0.0
    for start in range(lo, hi + 1, CHUNK):
        nodes = np.arange(start, min(hi, start + CHUNK - 1) + 1, dtype=float)
        a, b = _sum_nodes(series, k, peak, nodes)
        s += a
        s_half += b
    return s, s_half


def _strided(series, k, peak, lo, hi, stride):
    left = (peak - lo) // stride
    right = (hi - peak) // stride
    s = s_half = 0.0
    for start in range(-left, right + 1, CHUNK):
        idx = np.arange(start, min(right, start + CHUNK - 1) + 1, dtype=float)
        a, b = _sum_nodes(series, k, peak, peak + stride * idx)
        s += a
        s_half += b
    return stride * s, stride * s_half


def _log_derivs(series, k, x):
    """First and third derivatives of ``exp(g)`` over ``exp(g)`` at ``x``, ``g = (k/2) ln x - ell(x)``."""
    a, al = series.tail_a, series.tail_alpha
    g1 = 0.5 * k / x - a * al * x ** (al - 1.0)
    g2 = -0.5 * k / x**2 - a * al * (al - 1.0) * x ** (al - 2.0)
    g3 = k / x**3 - a * al * (al - 1.0) * (al - 2.0) * x ** (al - 3.0)
    return g1, g3 + 3.0 * g1 * g2 + g1**3


def _em_strided(series, k, peak, L, hi, stride):
    """``sum_{n=L}^{hi}`` by a stride-``s`` trapezoid plus Euler-Maclaurin end terms at ``L``.

    Used when the terms are still large at the left end of a smooth stretch.
    Returns the sums for powers ``k`` and ``k - 1`` (relative to the peak term).
    """
    J = -(-(hi - L) // stride)
    out = []
    for kk, shift in ((k, 0.0), (k - 1, 0.5)):
        total = 0.0
        for start in range(0, J + 1, CHUNK):
            idx = np.arange(start, min(J, start + CHUNK - 1) + 1, dtype=float)
            nodes = L + stride * idx
            vals = np.exp(_rel(series, k, nodes, peak) - shift * np.log(nodes))
            if start == 0:
                vals[0] *= 0.5
            total += float(vals.sum())
        fL = math.exp(_rel1(series, k, L, peak) - shift * math.log(L))
        d1, d3 = _log_derivs(series, kk, float(L))
        s2 = float(stride) ** 2
        # trapezoid -> unit-step sum; the far end is below exp(-WINDOW_DROP) and dropped
        corr = fL * (0.5 - (1.0 - s2) / 12.0 * d1 + (1.0 - s2 * s2) / 720.0 * d3)
        out.append(stride * total + corr)
    return out[0], out[1]


def _tail_sums(series: LogSeries, k: int, n0: int):
    """Sums of ``exp(rel)`` and ``exp(rel) / sqrt(n)`` over the tail window."""
    peak = _tail_peak(series, k, n0)
    peak_val = 0.5 * k * math.log(peak) - series(peak)
    right = _edge(series, k, peak, n0, +1)
    left = _edge(series, k, peak, n0, -1)
    lo = max(n0, left - WINDOW_PAD)
    hi = right + WINDOW_PAD
    if hi > INDEX_LIMIT:
        raise DivergenceError(f"moment k={k}: summation window exceeds the exact index range")
    width = hi - lo + 1
    stride = 1
    if width <= DIRECT_LIMIT:
        s, s_half = _direct(series, k, peak, lo, hi)
        stride_err = 0.0
    elif lo == n0 and _rel1(series, k, n0, peak) > -WINDOW_DROP:
        # terms are not negligible at the left end: sum a head directly, then
        # the smooth remainder with end corrections
        split = lo + CHUNK
        s, s_half = _direct(series, k, peak, lo, split - 1)
        stride = 1 << max(1, ((hi - split) // STRIDE_NODES).bit_length())
        coarse = _em_strided(series, k, peak, split, hi, stride)
        while True:
            stride //= 2
            fine = _em_strided(series, k, peak, split, hi, stride)
            stride_err = abs(coarse[0] - fine[0]) / (s + fine[0])
            if stride_err <= STRIDE_RTOL or stride == 1:
                break
            coarse = fine
        s += fine[0]
        s_half += fine[1]
    else:
        stride = 1 << max(1, (width // STRIDE_NODES).bit_length())
        coarse = _strided(series, k, peak, lo, hi, stride)
        while True:
            stride //= 2
            fine = _strided(series, k, peak, lo, hi, stride)
            stride_err = abs(coarse[0] - fine[0]) / fine[0]
            if stride_err <= STRIDE_RTOL or stride == 1:
                break
            coarse = fine
        s, s_half = fine
    # geometric bound on what lies outside [lo, hi]
    r_hi = _rel1(series, k, hi, peak)
    ratio = math.exp(_rel1(series, k, hi + 1, peak) - r_hi)
    tail_out = math.exp(r_hi) / max(1.0 - ratio, 1e-300)
    if lo > n0:
        tail_out += (lo - n0) * math.exp(_rel1(series, k, lo, peak))
    info = WindowInfo(k, peak, lo, hi, stride, tail_out / s + stride_err)
    return peak_val, s, s_half, info


def moment_pair(series: LogSeries, k: int) -> MomentPair:
    """Logs of ``sum_n n^(k/2) e^{-ell(n)}`` and of the same sum at ``k - 1``.

    The ``n = 0`` term contributes only at power zero (``0^0 = 1``).  For
    ``k = 0`` the second component is ``nan``.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    prefix = series.prefix
    L = prefix.size
    ell0 = series(0)
    parts_k = []
    parts_km1 = []
    if k == 0:
        parts_k.append(-ell0)
    elif k == 1:
        parts_km1.append(-ell0)

    pidx = np.arange(1, L)
    pvals = prefix[1:]
    keep = np.isfinite(pvals)
    pidx, pvals = pidx[keep], pvals[keep]
    logn = np.log(pidx.astype(float))
    tk = 0.5 * k * logn - pvals

    info = WindowInfo(k, None, None, None, 1, 0.0)
    tail = None
    if series.has_tail:
        tail = _tail_sums(series, k, max(L, 1))

    candidates = list(parts_k) + ([float(tk.max())] if tk.size else [])
    if tail is not None:
        candidates.append(tail[0])
    if not candidates:
        return MomentPair(0.0, -math.inf, -math.inf if k > 0 else math.nan, info)
    ref = max(candidates)

    def _log(parts, pref, tail_sum):
        total = math.fsum(math.exp(v - ref) for v in parts)
        if pref.size:
            total += float(np.exp(pref - ref).sum())
        if tail_sum is not None:
            total += math.exp(tail[0] - ref) * tail_sum
        return math.log(total) if total > 0 else -math.inf

    log_k = _log(parts_k, tk, tail[1] if tail is not None else None)
    if k == 0:
        log_km1 = math.nan
    else:
        log_km1 = _log(parts_km1, tk - 0.5 * logn, tail[2] if tail is not None else None)
    if tail is not None:
        info = tail[3]
    return MomentPair(ref, log_k, log_km1, info)


def log_moment(series: LogSeries, k: int) -> float:
    pair = moment_pair(series, k)
    return pair.ref + pair.log_k
