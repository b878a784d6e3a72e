"""Explicit upper bound on the number of zeros in the closed unit disc.

For ``f`` in the weighted class with ``|f(0)| >= exp(-A) ||f||_W``::

    p(A) = H^{-1}(H(ceil(A + 3)) + 25 sqrt(A))
    m    = max(p(A), h^{-1}(1 / p(A)))
    n_f <= 300 h(2m)^{-2}

The pipeline is evaluated in log arithmetic and every intermediate value is
kept so a result can be re-verified independently.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import (
    BudgetExceeded,
    DivergenceError,
    ParameterError,
    UnreachableThreshold,
)
from .moments import MomentTable
from .weights import MSequence, weight_from_M

SQRT_A_FACTOR = 25.0
BOUND_FACTOR = 300.0
DM_CAVEAT = "bound is for the W(M) norm at the given A; the D_M-to-W(M) norm constant is not applied"


@dataclass
class BoundResult:
    A: float
    ceilA3: int | None = None
    H_at_ceil: float | None = None
    target_R: float | None = None
    pA: int | None = None
    h_inv_term: int | None = None
    h_inv_unreachable: bool = False
    m: int | None = None
    log_h_2m: float | None = None
    N_bound: float = math.inf
    finite: bool = False
    trivial_cap: int | None = None
    failed_stage: str | None = None
    detail: str | None = None
    caveat: str | None = None

    @property
    def effective_bound(self) -> float:
        """``min(N_bound, trivial_cap)``."""
        cap = math.inf if self.trivial_cap is None else float(self.trivial_cap)
        return min(self.N_bound, cap)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["effective_bound"] = self.effective_bound
        return d


def zero_count_bound(T: MomentTable, A: float) -> BoundResult:
    """Evaluate the bound and its full trace at norm deficiency ``A``."""
    A = float(A)
    if not A >= 0.0:
        raise ParameterError(f"A must be nonnegative, got {A!r}")
    res = BoundResult(A=A)
    if T.series.support_max is not None and not T.series.has_tail:
        res.trivial_cap = T.series.support_max
    stage = "H"
    try:
        res.ceilA3 = math.ceil(A + 3.0)
        res.H_at_ceil = T.H(res.ceilA3)
        res.target_R = res.H_at_ceil + SQRT_A_FACTOR * math.sqrt(A)
        stage = "H_inverse"
        res.pA = T.H_inverse(res.target_R)
        stage = "h_inverse"
        res.h_inv_term = T.h_inverse(1.0 / res.pA)
        stage = "h(2m)"
        res.m = max(res.pA, res.h_inv_term)
        res.log_h_2m = T.log_h(2 * res.m)
        res.N_bound = BOUND_FACTOR * math.exp(-2.0 * res.log_h_2m)
        res.finite = math.isfinite(res.N_bound)
    except (BudgetExceeded, UnreachableThreshold, DivergenceError, OverflowError) as exc:
        res.failed_stage = stage
        res.detail = str(exc)
        res.h_inv_unreachable = isinstance(exc, UnreachableThreshold)
        res.N_bound = math.inf
        res.finite = res.trivial_cap is not None
    return res


def verify_certificate(res: BoundResult, T: MomentTable, rtol: float = 1e-12) -> list[str]:
    """Re-check the trace of ``res`` against ``T``; returns the violated conditions."""
    bad = []
    if res.ceilA3 is not None and res.ceilA3 != math.ceil(res.A + 3.0):
        bad.append("ceilA3")
    if res.pA is not None:
        if not T.H(res.pA) >= res.target_R:
            bad.append("H(pA) >= target")
        if res.pA > 0 and not T.H(res.pA - 1) < res.target_R:
            bad.append("H(pA-1) < target")
        if res.pA < res.ceilA3:
            bad.append("pA >= ceilA3")
    if res.h_inv_term is not None:
        eps = 1.0 / res.pA
        if not T.h(res.h_inv_term) <= eps:
            bad.append("h(h_inv) <= 1/pA")
        if res.h_inv_term > 1 and not T.h(res.h_inv_term - 1) > eps:
            bad.append("h(h_inv-1) > 1/pA")
    if res.m is not None:
        if res.m != max(res.pA, res.h_inv_term):
            bad.append("m = max")
        expected = BOUND_FACTOR * T.h(2 * res.m) ** -2
        if not math.isclose(res.N_bound, expected, rel_tol=rtol):
            bad.append("N_bound = 300 h(2m)^-2")
    return bad


@dataclass
class BoundCurve:
    rows: list
    theory_exponent: float | None = None
    theory_form: str | None = None
    weight: dict = field(default_factory=dict)

    def loglog_slope(self) -> float | None:
        """Least-squares slope of ``ln N_bound`` against ``ln A`` over finite rows with ``A > 0``."""
        pts = [(r.A, r.N_bound) for r in self.rows if r.failed_stage is None and r.A > 0]
        if len(pts) < 2:
            return None
        x, y = np.log(np.array(pts)).T
        return float(np.polyfit(x, y, 1)[0])

    def csv_rows(self):
        for r in self.rows:
            yield [r.A, r.ceilA3, r.pA, r.m, r.N_bound, r.finite]


CSV_HEADER = ["A", "ceilA3", "pA", "m", "N_bound", "finite"]


def bound_curve(T: MomentTable, A_values) -> BoundCurve:
    """``zero_count_bound`` over several ``A``; failures stay in their row."""
    A_values = [float(a) for a in A_values]
    if not A_values:
        raise ParameterError("A_values must be nonempty")
    rows = []
    for A in A_values:
        if not A >= 0:
            rows.append(BoundResult(A=A, failed_stage="parameter", detail="A must be nonnegative"))
            continue
        rows.append(zero_count_bound(T, A))
    curve = BoundCurve(rows)
    W = T.weight
    if W is not None:
        curve.weight = W.descriptor()
        if W.family == "gevrey":
            alpha = W.params["alpha"]
            if alpha > 0.5:
                curve.theory_exponent = 2 * alpha / (2 * alpha - 1)
                curve.theory_form = "C A^(2 alpha / (2 alpha - 1))"
            elif alpha == 0.5:
                curve.theory_form = "C1 exp(C2 sqrt(A))"
    return curve


def log_spaced(A_min: float, A_max: float, steps: int) -> list[float]:
    if steps < 1 or not 0 < A_min <= A_max:
        raise ParameterError("need 0 < A_min <= A_max and steps >= 1")
    if steps == 1:
        return [float(A_min)]
    return [float(v) for v in np.geomspace(A_min, A_max, steps)]


def dm_bound(M, A: float, horizon: int, budget: int | None = None) -> BoundResult:
    """Bound for the derivative-bound class via the weight ``W(M)``."""
    if not isinstance(M, MSequence):
        M = MSequence(tuple(M))
    W = weight_from_M(M, horizon)
    res = zero_count_bound(MomentTable(W, budget=budget), A)
    res.caveat = DM_CAVEAT
    return res
