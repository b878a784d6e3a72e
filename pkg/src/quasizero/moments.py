"""Moments ``M_k = sum_n n^(k/2) / w_n`` and the quantities derived from them.

``h(p) = M_{p-1} / M_p`` is nonincreasing because ``M`` is log-convex, and
``H(p) = h(1) + ... + h(p)``.  Divergence of ``H`` is the quasianalyticity
condition; ``h^{-1}`` and ``H^{-1}`` are the generalized inverses used by the
zero-count bound.
"""
from __future__ import annotations

import math
import os
import threading
from array import array
from bisect import bisect_left
from dataclasses import dataclass, field

import numpy as np

from ._logsum import LogSeries, WindowInfo, moment_pair
from .errors import BudgetExceeded, ParameterError, UnreachableThreshold
from .weights import WeightSequence

DEFAULT_BUDGET = 10**8
DENSE_LIMIT = 2**22
CHECKPOINT_EVERY = 2**16
# bracketing for h^{-1} stops here; beyond it the threshold is treated as unreachable
H_INV_CAP = 2**60


def default_budget() -> int:
    env = os.environ.get("QUASIZERO_BUDGET")
    if env:
        try:
            value = int(float(env))
        except ValueError:
            raise ParameterError(f"QUASIZERO_BUDGET={env!r} is not an integer") from None
        if value < 1:
            raise ParameterError("QUASIZERO_BUDGET must be positive")
        return value
    return DEFAULT_BUDGET


class MomentTable:
    """Memoized moments of a weight.

    Writes to the caches happen under a lock; reads of already-computed
    entries are lock-free.  ``budget`` caps how far ``H`` is scanned.
    """

    def __init__(self, weight: WeightSequence | LogSeries, budget: int | None = None):
        if isinstance(weight, WeightSequence):
            self.weight = weight
            self.series = weight.series
        else:
            self.weight = None
            self.series = weight
        self.budget = default_budget() if budget is None else int(budget)
        self._log_M: dict[int, float] = {}
        self._h: dict[int, float] = {}
        self.window_info: dict[int, WindowInfo] = {}
        self._prefix = array("d", [0.0])  # H(0), H(1), ...
        self._checkpoints: dict[int, float] = {}
        self._frontier = (0, 0.0)
        self._lock = threading.RLock()

    # -- moments -------------------------------------------------------------

    def log_moment(self, k: int) -> float:
        """``ln M_k``."""
        k = int(k)
        if k < 0:
            raise ParameterError("k must be nonnegative")
        try:
            return self._log_M[k]
        except KeyError:
            pass
        pair = moment_pair(self.series, k)
        with self._lock:
            self._log_M[k] = pair.ref + pair.log_k
            self.window_info[k] = pair.info
            if k >= 1 and (k - 1) not in self._log_M and not math.isnan(pair.log_km1):
                self._log_M[k - 1] = pair.ref + pair.log_km1
        return self._log_M[k]

    def log_moments(self, k_max: int) -> np.ndarray:
        return np.array([self.log_moment(k) for k in range(k_max + 1)])

    # -- h and H -------------------------------------------------------------

    def h(self, p: int) -> float:
        """``h(p) = M_{p-1} / M_p`` for ``p >= 1``."""
        p = int(p)
        if p < 1:
            raise ParameterError("h(p) needs p >= 1")
        try:
            return self._h[p]
        except KeyError:
            pass
        pair = moment_pair(self.series, p)
        value = math.exp(pair.log_km1 - pair.log_k)
        with self._lock:
            self._h[p] = value
            self._log_M.setdefault(p, pair.ref + pair.log_k)
            self._log_M.setdefault(p - 1, pair.ref + pair.log_km1)
            self.window_info.setdefault(p, pair.info)
        return value

    def log_h(self, p: int) -> float:
        p = int(p)
        if p < 1:
            raise ParameterError("h(p) needs p >= 1")
        pair = moment_pair(self.series, p)
        return pair.log_km1 - pair.log_k

    def _extend(self, p_stop: int, target: float = math.inf) -> None:
        """Advance the prefix sums until ``p_stop`` or until ``H >= target``."""
        with self._lock:
            p, H = self._frontier
            while p < p_stop and H < target:
                p += 1
                H += self.h(p)
                if p <= DENSE_LIMIT:
                    self._prefix.append(H)
                elif p % CHECKPOINT_EVERY == 0:
                    self._checkpoints[p] = H
                if p > DENSE_LIMIT:
                    # dense h values beyond the limit are not retained
                    self._h.pop(p - 1, None)
            self._frontier = (p, H)

    def H(self, p: int) -> float:
        """``H(p) = sum_{k=1}^p h(k)``; ``H(0) = 0``."""
        p = int(p)
        if p < 0:
            raise ParameterError("H(p) needs p >= 0")
        if p >= len(self._prefix) and p > self._frontier[0]:
            self._extend(p)
        if p < len(self._prefix):
            return self._prefix[p]
        if p == self._frontier[0]:
            return self._frontier[1]
        start = max((q for q in self._checkpoints if q <= p), default=DENSE_LIMIT)
        H = self._checkpoints.get(start, self._prefix[-1])
        return math.fsum([H] + [self.h(k) for k in range(start + 1, p + 1)])

    def H_inverse(self, R: float) -> int:
        """Least ``p >= 0`` with ``H(p) >= R``.

        Raises ``BudgetExceeded`` when ``H(budget) < R``.
        """
        if not R >= 0 or math.isnan(R):
            raise ParameterError("H_inverse needs R >= 0")
        if R == 0:
            return 0
        if self._frontier[1] < R:
            self._extend(self.budget, R)
        p_front, H_front = self._frontier
        if H_front < R:
            raise BudgetExceeded(R, self.budget, H_front)
        if p_front < len(self._prefix):
            return bisect_left(self._prefix, R)
        if self._prefix[-1] >= R:
            return bisect_left(self._prefix, R)
        # sparse region: restart the scan from the last checkpoint below R
        start = max((q for q, v in self._checkpoints.items() if v < R), default=len(self._prefix) - 1)
        H = self._checkpoints.get(start, self._prefix[-1])
        p = start
        while H < R:
            p += 1
            H += self.h(p)
        return p

    def h_limit(self) -> float:
        """``inf_p h(p)``: ``n_max^{-1/2}`` for finite support, else ``0``."""
        nmax = self.series.support_max
        if self.series.has_tail or nmax is None:
            return 0.0
        if nmax == 0:
            return math.inf
        return nmax**-0.5

    def _single_positive_point(self) -> bool:
        pre = self.series.prefix
        return int(np.isfinite(pre[1:]).sum()) == 1

    def h_inverse(self, eps: float) -> int:
        """Least ``p >= 1`` with ``h(p) <= eps``.

        Raises ``UnreachableThreshold`` when ``eps`` is below the infimum of ``h``.
        """
        if not eps > 0:
            raise ParameterError("h_inverse needs eps > 0")
        limit = self.h_limit()
        if eps < limit or (eps == limit and not self._single_positive_point()):
            raise UnreachableThreshold(eps, limit)
        if self.h(1) <= eps:
            return 1
        lo, hi = 1, 2
        while self.h(hi) > eps:
            lo, hi = hi, 2 * hi
            if hi > H_INV_CAP:
                raise UnreachableThreshold(eps, self.h(lo))
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self.h(mid) <= eps:
                hi = mid
            else:
                lo = mid
        return hi

    # -- diagnostics ---------------------------------------------------------

    def is_log_convex(self, k_max: int, slack: float = 1e-9) -> bool:
        lm = self.log_moments(k_max)
        return bool(np.all(lm[:-2] + lm[2:] >= 2 * lm[1:-1] - slack))


def log_moment(T: MomentTable, k: int) -> float:
    return T.log_moment(k)


def h_ratio(T: MomentTable, p: int) -> float:
    return T.h(p)


def H_cumulative(T: MomentTable, p: int) -> float:
    return T.H(p)


def h_inverse(T: MomentTable, eps: float) -> int:
    return T.h_inverse(eps)


def H_inverse(T: MomentTable, R: float) -> int:
    return T.H_inverse(R)


@dataclass
class QuasiReport:
    horizon: int
    H_partial: float
    log_weight_partial: float
    classification: str
    family: str = ""

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def quasi_diagnostic(T: MomentTable, horizon: int) -> QuasiReport:
    """Partial sums of ``h`` and of ``ln w_n / (1 + n^{3/2})`` up to ``horizon``.

    Classification is a known fact only for the Gevrey family (quasianalytic
    iff ``alpha >= 1/2``); otherwise both partial sums are reported as is.
    """
    if horizon < 10:
        raise ParameterError("horizon must be at least 10")
    W = T.weight
    H_partial = T.H(horizon)
    n = np.arange(horizon + 1, dtype=float)
    lw = T.series(np.arange(horizon + 1))
    with np.errstate(invalid="ignore"):
        terms = lw / (1.0 + n**1.5)
    log_partial = math.inf if np.isinf(terms).any() else math.fsum(terms)
    family = W.family if W is not None else "series"
    if W is not None and W.family == "gevrey":
        alpha = W.params["alpha"]
        cls = "quasianalytic (family fact)" if alpha >= 0.5 else "non-quasianalytic (family fact)"
    else:
        cls = "inconclusive-numerical"
    return QuasiReport(horizon, H_partial, log_partial, cls, family)


@dataclass
class JacobiReport:
    k_max: int
    log_m: list = field(default_factory=list)
    partial_sum: float = 0.0
    classification: str = ""

    @property
    def m(self) -> list:
        return [math.exp(v) for v in self.log_m]

    def to_dict(self) -> dict:
        return {
            "k_max": self.k_max,
            "log_m": self.log_m,
            "partial_sum": self.partial_sum,
            "classification": self.classification,
        }


def jacobi_moment_diagnostic(a, b, c, k_max: int, tail=None) -> JacobiReport:
    """Moments ``m_k = sum_n (|b_n| + |a_n c_n - 1|) n^{k/2}`` of a Jacobi perturbation.

    ``a``, ``b``, ``c`` are equal-length prefixes (complex allowed).  ``tail``
    is ``None`` (perturbation vanishes beyond the prefix) or ``(alpha, rate)``
    meaning ``|b_n| + |a_n c_n - 1| = exp(-rate * n^alpha)`` beyond it.
    """
    a, b, c = (np.asarray(v, dtype=complex).reshape(-1) for v in (a, b, c))
    if not (a.size == b.size == c.size):
        raise ParameterError("a, b, c must have the same length")
    if k_max < 1:
        raise ParameterError("k_max must be at least 1")
    d = np.abs(b) + np.abs(a * c - 1.0)
    with np.errstate(divide="ignore"):
        ell = -np.log(d)
    if tail is not None:
        alpha, rate = float(tail[0]), float(tail[1])
        if not (0.0 < alpha <= 1.0) or not rate > 0.0:
            raise ParameterError("tail needs alpha in (0, 1] and rate > 0")
        series = LogSeries(ell, tail_alpha=alpha, tail_a=rate)
    else:
        series = LogSeries(ell)
    report = JacobiReport(k_max)
    T = MomentTable(series)
    report.log_m = [T.log_moment(k) for k in range(1, k_max + 1)]
    if all(v == -math.inf for v in report.log_m):
        report.partial_sum = math.inf
        report.classification = "finitely many eigenvalues trivially"
        return report
    report.partial_sum = math.fsum(math.exp(-lm / k) for k, lm in enumerate(report.log_m, 1))
    if tail is not None:
        if tail[0] >= 0.5:
            report.classification = "finite eigenvalue count (family fact)"
        else:
            report.classification = "infinite eigenvalue count possible (family fact)"
    else:
        report.classification = "inconclusive-numerical"
    return report
