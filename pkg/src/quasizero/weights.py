"""Admissible weight sequences ``W = (w_n)``.

A weight satisfies ``w_n >= 1``, ``sum 1/w_n = 1`` and decays faster than any
power.  Everything is stored as ``ln w_n``; ``+inf`` marks an index outside the
support.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._logsum import LogSeries, log_moment
from .errors import NormalizationError, ParameterError



def _log_power_tail(alpha: float, a: float, start: int) -> float:
    """``ln sum_{n >= start} exp(-a n^alpha)`` via the windowed moment summation."""
    prefix = np.full(int(start), np.inf)
    return log_moment(LogSeries(prefix, tail_alpha=alpha, tail_a=a), 0)


@dataclass(frozen=True)
class WeightSequence:
    """Normalized log-weights ``n -> ln w_n``.

    ``family`` is one of ``"gevrey"``, ``"table"`` or ``"derived-from-M"``;
    ``params`` is the JSON descriptor that rebuilds the weight.
    """

    family: str
    series: LogSeries = field(repr=False)
    normalization_residual: float
    params: dict = field(default_factory=dict, compare=False)

    def log_w(self, n):
        return self.series(n)

    def __call__(self, n):
        return self.series(n)

    @property
    def support_max(self):
        return self.series.support_max

    @property
    def is_finite_support(self) -> bool:
        return not self.series.has_tail

    def descriptor(self) -> dict:
        return dict(self.params)


def _residual(series: LogSeries) -> float:
    finite = series.prefix[np.isfinite(series.prefix)]
    total = math.fsum(np.exp(-finite))
    if series.has_tail:
        start = series.prefix.size
        total += math.exp(
            _log_power_tail(series.tail_alpha, series.tail_a, start) - series.tail_shift
        )
    return abs(total - 1.0)


def gevrey_weight(alpha: float, a: float) -> WeightSequence:
    """``ln w_n = a n^alpha + c(alpha, a)`` with ``c = ln sum_n exp(-a n^alpha)``."""
    if not (0.0 < alpha <= 1.0) or math.isnan(alpha):
        raise ParameterError(f"alpha must lie in (0, 1], got {alpha!r}")
    if not a > 0.0 or not math.isfinite(a):
        raise ParameterError(f"a must be positive, got {a!r}")
    c = _log_power_tail(alpha, a, 0)
    series = LogSeries([], tail_alpha=alpha, tail_a=a, tail_shift=c)
    return WeightSequence(
        "gevrey", series, _residual(series), {"family": "gevrey", "alpha": alpha, "a": a}
    )


def gevrey_constant(alpha: float, a: float) -> float:
    """The normalizing constant ``c(alpha, a)``."""
    return gevrey_weight(alpha, a).series.tail_shift


def _normalize(prefix, tail_alpha=None, tail_a=None) -> LogSeries:
    prefix = np.asarray(prefix, dtype=float)
    finite = prefix[np.isfinite(prefix)]
    mass = [math.fsum(np.exp(-finite))]
    if tail_alpha is not None:
        mass.append(math.exp(_log_power_tail(tail_alpha, tail_a, prefix.size)))
    total = math.fsum(mass)
    if not total > 0.0:
        raise NormalizationError("weight has empty support")
    log_s = math.log(total)
    shifted = prefix + log_s
    lowest = shifted[np.isfinite(shifted)]
    if tail_alpha is not None:
        lowest = np.append(lowest, tail_a * float(prefix.size) ** tail_alpha + log_s)
    if lowest.size and lowest.min() < 0.0:
        if lowest.min() < -1e-12:
            raise NormalizationError(
                f"rescaling by s = {total!r} gives w_n = {math.exp(lowest.min())!r} < 1"
            )
        shifted = np.where(np.isfinite(shifted), np.maximum(shifted, 0.0), shifted)
    return LogSeries(
        shifted,
        tail_alpha,
        tail_a,
        log_s if tail_alpha is not None else 0.0,
    )


def table_weight(log_w_table, tail="infinite-weight") -> WeightSequence:
    """Weight from a table of ``ln w_n``, rescaled so that ``sum 1/w_n = 1``.

    ``tail`` is ``"infinite-weight"`` (support ends with the table) or a
    mapping ``{"gevrey": {"alpha": .., "a": ..}}`` / tuple ``("gevrey", alpha, a)``
    continuing with ``ln w_n = a n^alpha`` before rescaling.
    """
    table = np.asarray(log_w_table, dtype=float).reshape(-1)
    if table.size == 0:
        raise ParameterError("empty weight table")
    if np.isnan(table).any() or (table < 0).any():
        raise ParameterError("log-weights must be nonnegative numbers")
    alpha = a = None
    tail_desc = "infinite-weight"
    if tail not in (None, "infinite-weight"):
        if isinstance(tail, dict):
            tail_params = tail.get("gevrey", tail)
            alpha, a = float(tail_params["alpha"]), float(tail_params["a"])
        else:
            _, alpha, a = tail
            alpha, a = float(alpha), float(a)
        if not (0.0 < alpha <= 1.0) or not a > 0.0:
            raise ParameterError("tail needs alpha in (0, 1] and a > 0")
        tail_desc = {"gevrey": {"alpha": alpha, "a": a}}
    series = _normalize(table, alpha, a)
    params = {"family": "table", "log_w": [float(v) for v in table], "tail": tail_desc}
    return WeightSequence("table", series, _residual(series), params)


@dataclass(frozen=True)
class MSequence:
    """Derivative-bound sequence ``M_0, M_1, ...`` (natural logs)."""

    log_M: tuple

    def __post_init__(self):
        vals = tuple(float(v) for v in self.log_M)
        if len(vals) < 2:
            raise ParameterError("an M sequence needs at least two terms")
        if not all(math.isfinite(v) for v in vals):
            raise ParameterError("log M entries must be finite")
        object.__setattr__(self, "log_M", vals)

    def __len__(self):
        return len(self.log_M)

    def log_convex_minorant(self) -> "MSequence":
        """Greatest log-convex minorant via the lower hull of ``(k, ln M_k)``."""
        hull: list[int] = []
        y = self.log_M
        for k in range(len(y)):
            while len(hull) >= 2:
                i, j = hull[-2], hull[-1]
                # drop j when it lies on or above the chord i -> k
                if (y[j] - y[i]) * (k - i) >= (y[k] - y[i]) * (j - i):
                    hull.pop()
                else:
                    break
            hull.append(k)
        out = np.interp(np.arange(len(y)), hull, [y[i] for i in hull])
        for i in hull:
            out[i] = y[i]
        return MSequence(tuple(out))

    def is_log_convex(self, tol: float = 0.0) -> bool:
        y = self.log_M
        return all(2 * y[k] <= y[k - 1] + y[k + 1] + tol for k in range(1, len(y) - 1))


def _log_tilde_w(log_M, horizon: int) -> np.ndarray:
    """``ln max_{0<=k<=m} m(m-1)...(m-k+1) / M_{2k}`` for ``m <= horizon``."""
    K = (len(log_M) - 1) // 2
    even = np.asarray(log_M[0 : 2 * K + 1 : 2])
    out = np.empty(horizon + 1)
    for m in range(horizon + 1):
        kmax = min(m, K)
        falling = np.concatenate(([0.0], np.cumsum(np.log(m - np.arange(kmax, dtype=float)))))
        vals = falling - even[: kmax + 1]
        best = int(np.argmax(vals))
        if kmax < m and best == kmax and kmax > 0 and vals[kmax] > vals[kmax - 1]:
            raise ParameterError(
                f"M has {len(log_M)} terms; m={m} needs M_{{2k}} beyond k={K} to locate the maximum"
            )
        out[m] = vals[best]
    return out


def tilde_log_weights(M: MSequence, horizon: int) -> np.ndarray:
    """Unnormalized ``ln max_k m!/(m-k)!/M_{2k}``, ``m = 0..horizon``, after log-convexification."""
    if not isinstance(M, MSequence):
        M = MSequence(tuple(M))
    return _log_tilde_w(M.log_convex_minorant().log_M, int(horizon))


def weight_from_M(M: MSequence, horizon: int) -> WeightSequence:
    """The weight ``W(M)`` attached to the class defined by derivative bounds ``M``.

    ``M`` is first replaced by its greatest log-convex minorant.  The raw
    weights ``max_k m!/(m-k)!/M_{2k}`` are computed for ``m <= horizon`` and the
    support is cut there; the result is rescaled to ``sum 1/w_n = 1``.
    """
    if not isinstance(M, MSequence):
        M = MSequence(tuple(M))
    if horizon < 0:
        raise ParameterError("horizon must be nonnegative")
    raw = tilde_log_weights(M, horizon)
    # max_k(...) >= 1/M_0; make the table nonnegative before rescaling
    floor = min(0.0, float(raw.min()))
    series = _normalize(raw - floor)
    params = {"family": "from_M", "log_M": list(M.log_M), "horizon": int(horizon)}
    return WeightSequence("derived-from-M", series, _residual(series), params)


@dataclass
class RegularityReport:
    monotone: bool
    root_condition: bool
    first_violations: dict


def check_regularity(W: WeightSequence, horizon: int) -> RegularityReport:
    """Scan ``w_{n-1} <= w_n`` and ``w_{2n}^2 <= w_n w_{4n}`` up to ``horizon``."""
    if horizon < 4:
        raise ParameterError("horizon must be at least 4")
    lw = W.log_w(np.arange(horizon + 1))
    first = {}

    def _le(x, y):
        with np.errstate(invalid="ignore"):
            tol = 1e-12 * np.maximum(1.0, np.abs(np.where(np.isfinite(y), y, 0.0)))
            return np.where(np.isinf(y) & (y > 0), True, x <= y + tol)

    mono = _le(lw[: horizon], lw[1 : horizon + 1])
    bad = np.flatnonzero(~mono)
    if bad.size:
        first["monotone"] = int(bad[0] + 1)
    q = np.arange(1, horizon // 4 + 1)
    root = _le(2 * lw[2 * q], lw[q] + lw[4 * q]) if q.size else np.array([], dtype=bool)
    bad = np.flatnonzero(~root)
    if bad.size:
        first["root_condition"] = int(q[bad[0]])
    return RegularityReport(not mono.size or bool(mono.all()), bool(np.all(root)), first)


def from_descriptor(desc: dict) -> WeightSequence:
    """Build a weight from its JSON descriptor."""
    if not isinstance(desc, dict) or "family" not in desc:
        raise ParameterError("weight descriptor needs a 'family' key")
    fam = desc["family"]
    try:
        if fam == "gevrey":
            return gevrey_weight(float(desc["alpha"]), float(desc["a"]))
        if fam == "table":
            return table_weight(desc["log_w"], desc.get("tail", "infinite-weight"))
        if fam in ("from_M", "from-m", "derived-from-M"):
            return weight_from_M(MSequence(tuple(desc["log_M"])), int(desc["horizon"]))
    except KeyError as exc:
        raise ParameterError(f"weight descriptor for {fam!r} is missing {exc}") from None
    raise ParameterError(f"unknown weight family {fam!r}")
