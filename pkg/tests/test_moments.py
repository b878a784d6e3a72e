from __future__ import annotations

import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quasizero.errors import BudgetExceeded, ParameterError, UnreachableThreshold
from quasizero.moments import MomentTable, jacobi_moment_diagnostic, quasi_diagnostic
from quasizero.weights import gevrey_weight, table_weight

# ln M_k from 40-digit direct summation, Gevrey(alpha=1, a=1)
LOG_M_G11 = {
    1: -0.8050593376574599044,
    2: -0.54132485461291810898,
    5: 0.74321816978913102497,
    10: 4.3287984869611047253,
    50: 57.544930077593438048,
    200: 363.28070041017640825,
}
H_RATIO_G11 = {1: 2.2368292230884103, 2: 0.76817747672600504, 3: 0.70933170990281005,
               10: 0.43620013658559256, 100: 0.14106825029753827}
H_CUM_G11 = {3: 3.7143384097172254, 4: 4.3658208555299571, 10: 7.4142935075358959,
             100: 26.456466354841868}
# Gevrey(alpha=1/2, a=1)
LOG_M_G05 = {1: 0.36921223060739608602, 4: 4.498386972472629893,
             10: 17.213224199328571799, 20: 45.091055251951729806}


@pytest.fixture(scope="module")
def g11():
    return MomentTable(gevrey_weight(1.0, 1.0))


def test_log_moments_gevrey_one(g11):
    assert g11.log_moment(0) == pytest.approx(0.0, abs=1e-15)
    for k, v in LOG_M_G11.items():
        assert g11.log_moment(k) == pytest.approx(v, rel=1e-14, abs=1e-14)


def test_second_moment_closed_form(g11):
    # M_2 = sum n e^{-n} (1 - e^{-1}) = e^{-1} / (1 - e^{-1})
    assert math.exp(g11.log_moment(2)) == pytest.approx(math.exp(-1) / (1 - math.exp(-1)), rel=1e-14)


def test_h_and_H_gevrey_one(g11):
    for p, v in H_RATIO_G11.items():
        assert g11.h(p) == pytest.approx(v, rel=1e-13)
    for p, v in H_CUM_G11.items():
        assert g11.H(p) == pytest.approx(v, rel=1e-13)
    assert g11.H(0) == 0.0


def test_log_moments_gevrey_half():
    T = MomentTable(gevrey_weight(0.5, 1.0))
    for k, v in LOG_M_G05.items():
        assert T.log_moment(k) == pytest.approx(v, rel=1e-13)


def test_h_asymptotics_gevrey_half():
    # h(p) behaves like 1/p when alpha = 1/2 and a = 1
    T = MomentTable(gevrey_weight(0.5, 1.0))
    assert T.h(1000) * 1000 == pytest.approx(1.0, abs=0.01)


def test_huge_k_windowed():
    # peak near n = k/2; h(k) ~ (k/2)^{-1/2}
    T = MomentTable(gevrey_weight(1.0, 1.0))
    assert T.h(10**10) == pytest.approx((5e9) ** -0.5, rel=1e-6)
    assert T.window_info[10**10].stride >= 1


def test_table_two_point_weight():
    # w = (2, 2, inf): M_0 = 1, M_k = 1/2 for k >= 1
    T = MomentTable(table_weight([math.log(2), math.log(2)]))
    assert T.log_moment(0) == pytest.approx(0.0, abs=1e-15)
    for k in range(1, 6):
        assert T.log_moment(k) == pytest.approx(-math.log(2), rel=1e-15)
    assert T.h(1) == pytest.approx(2.0)
    assert T.h(2) == pytest.approx(1.0)
    assert T.H(3) == pytest.approx(4.0)
    assert T.H_inverse(7.3) == 7
    assert T.h_limit() == 1.0
    assert T.h_inverse(1.0) == 2


def test_h_inverse_gevrey_roundtrip(g11):
    eps = g11.h(100)
    p = g11.h_inverse(eps)
    assert g11.h(p) <= eps
    assert p == 1 or g11.h(p - 1) > eps


def test_h_inverse_unreachable_finite_support():
    T = MomentTable(table_weight([0.0, 1.0, 2.0, 3.0, 4.0]))
    with pytest.raises(UnreachableThreshold):
        T.h_inverse(0.1)


def test_H_inverse_budget():
    T = MomentTable(gevrey_weight(0.3, 1.0), budget=50)
    with pytest.raises(BudgetExceeded):
        T.H_inverse(100.0)


def test_budget_env(monkeypatch):
    monkeypatch.setenv("QUASIZERO_BUDGET", "1234")
    assert MomentTable(gevrey_weight(1.0, 1.0)).budget == 1234
    monkeypatch.setenv("QUASIZERO_BUDGET", "lots")
    with pytest.raises(ParameterError):
        MomentTable(gevrey_weight(1.0, 1.0))


def test_argument_errors(g11):
    with pytest.raises(ParameterError):
        g11.h(0)
    with pytest.raises(ParameterError):
        g11.H(-1)
    with pytest.raises(ParameterError):
        g11.h_inverse(0.0)


def test_quasi_diagnostic_labels():
    rep = quasi_diagnostic(MomentTable(gevrey_weight(1.0, 1.0)), 100)
    assert rep.classification.startswith("quasianalytic")
    rep = quasi_diagnostic(MomentTable(gevrey_weight(0.3, 1.0)), 100)
    assert rep.classification.startswith("non-quasianalytic")
    T = MomentTable(table_weight([math.log(2), math.log(2), math.inf]))
    rep = quasi_diagnostic(T, 10)
    assert rep.classification == "inconclusive-numerical"
    assert rep.H_partial == pytest.approx(11.0)
    assert rep.log_weight_partial == math.inf
    with pytest.raises(ParameterError):
        quasi_diagnostic(T, 5)


def test_jacobi_diagnostic():
    # prefix indexed from n = 0; b_n = e^{-n}, a_n c_n = 1
    d = np.exp(-np.arange(40.0))
    rep = jacobi_moment_diagnostic(np.ones(40), d, np.ones(40), 4, tail=(1.0, 1.0))
    assert rep.classification == "finite eigenvalue count (family fact)"
    # m_2 over the prefix plus the tail: sum_{n >= 1} n e^{-n}
    assert rep.m[1] == pytest.approx(math.exp(-1) / (1 - math.exp(-1)) ** 2, rel=1e-12)
    trivial = jacobi_moment_diagnostic([1, 1], [0, 0], [1, 1], 3)
    assert trivial.classification == "finitely many eigenvalues trivially"
    rep = jacobi_moment_diagnostic([1, 1], [0.1, 0.2], [1, 1], 3)
    assert rep.classification == "inconclusive-numerical"


def _mp_log_moments(log_w, k_max):
    mp.mp.dps = 50
    w = [mp.e ** mp.mpf(v) for v in log_w]
    s = mp.fsum(1 / x for x in w)
    out = []
    for k in range(k_max + 1):
        tot = mp.fsum((mp.mpf(n) ** (mp.mpf(k) / 2) if n else (1 if k == 0 else 0)) / (w[n] * s)
                      for n in range(len(w)))
        out.append(float(mp.log(tot)))
    return out


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(min_value=0.0, max_value=12.0), min_size=2, max_size=11))
def test_finite_support_matches_exact_sum(log_w):
    T = MomentTable(table_weight(log_w))
    ref = _mp_log_moments(log_w, 40)
    for k, v in enumerate(ref):
        assert T.log_moment(k) == pytest.approx(v, rel=1e-12, abs=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.floats(min_value=0.2, max_value=1.0), st.floats(min_value=0.3, max_value=3.0))
def test_log_convexity_and_monotone_h(alpha, a):
    T = MomentTable(gevrey_weight(alpha, a))
    assert T.is_log_convex(60)
    hs = [T.h(p) for p in range(2, 60)]
    assert all(x >= y * (1 - 1e-12) for x, y in zip(hs, hs[1:]))
