from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from quasizero.analytic import CoefFn, from_zeros
from quasizero.errors import ParameterError
from quasizero.moments import MomentTable
from quasizero.oracles import (
    LemmaReport,
    bang_distance_check,
    bang_fixtures,
    bang_sets,
    gN_bound_check,
    lavie_check,
    lemma1_check,
    lemma1_fixtures,
    nazarov_check,
    nazarov_fixtures,
    nazarov_gN,
    nazarov_log_gN,
    stirling_check,
)
from quasizero.weights import gevrey_weight

G11 = gevrey_weight(1.0, 1.0)


@pytest.fixture(scope="module")
def T():
    return MomentTable(G11)


def test_report_pass_iff_no_failures():
    rep = LemmaReport("x")
    assert rep.passed and rep.cases_run == 0
    rep.add(1.0, True, {})
    rep.add(-2.0, False, {"k": 1})
    assert not rep.passed and rep.worst_margin == -2.0
    d = rep.to_dict()
    assert d["pass"] is False and d["cases_run"] == 2


def test_cluster_estimate_vacuous(T):
    f, _ = from_zeros([-0.5, 0.3j, -0.3j], G11)
    rep = lemma1_check(f, 0.1, T)
    assert rep.details["vacuous"] and rep.passed and rep.cases_run == 0


def test_cluster_estimate_k0_is_coefficient_sum(T):
    f, _ = from_zeros([0.975] * 4, G11)
    rep = lemma1_check(f, 0.05, T)
    row = rep.details["rows"][0]
    assert row["k"] == 0
    assert math.exp(row["log_lhs"]) == pytest.approx(abs(f.coef.sum().real), rel=1e-6)
    # exact value: c (1 - 0.975)^4 with c the leading coefficient
    assert math.exp(row["log_lhs"]) == pytest.approx(f.coef[4].real * 0.025**4, rel=1e-14)


def test_cluster_estimate_fixtures_pass(T):
    fx = lemma1_fixtures(G11)
    assert len(fx) == 14
    for f, eps in fx:
        rep = lemma1_check(f, eps, T)
        assert rep.passed, rep.failures
        assert rep.worst_margin > 0


def test_cluster_estimate_bad_eps(T):
    with pytest.raises(ParameterError):
        lemma1_check(CoefFn([1.0], G11), 1.5, T)


def test_lavie_examples():
    rep = lavie_check([0, 0, 1], ("disc", 0.0, 1.0))
    assert rep.details["m"] == 2
    rows = {c["k"]: c for c in rep.failures}
    assert not rows and rep.passed
    # k = 0: 1 <= (2^2 / 2!) * 2 = 4; k = 1: 2 <= 2 * 2 = 4
    assert rep.cases_run == 3


def test_lavie_interval():
    coef = np.polynomial.polynomial.polyfromroots([0.1, 0.4, 0.9])
    rep = lavie_check(coef, ("interval", 0.0, 1.0))
    assert rep.details["m"] == 3 and rep.passed


def test_nazarov_gN_examples():
    assert nazarov_gN(1, 1.0) == 0.0
    for N in (1, 5, 40):
        assert nazarov_gN(N, 0.0) == 1.0
    xs = np.linspace(math.sqrt(5), 10 * math.sqrt(5), 300)
    assert all(abs(nazarov_gN(5, x)) <= math.pi**-5 for x in xs)


def test_nazarov_log_underflow_safe():
    la, s = nazarov_log_gN(200, 999.3)
    assert math.isfinite(la) and la < -745 and s in (-1, 1)
    assert nazarov_gN(200, 999.3) == 0.0
    with pytest.raises(ParameterError):
        nazarov_log_gN(0, 1.0)


@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=1, max_value=25), st.floats(min_value=0.0, max_value=1.0))
def test_gN_bound_property(N, t):
    xi = math.sqrt(N) * (1 + 9 * t)
    la, _ = nazarov_log_gN(N, xi)
    assert la <= -N * math.log(math.pi) + 1e-12


def test_gN_bound_small_range():
    assert gN_bound_check(N_max=4).passed


def test_nazarov_constant():
    rep = nazarov_check([1.0], monte_carlo_trials=1000)
    assert rep.passed and rep.details["A"] == 0.0


def test_nazarov_mechanism_half_half():
    rep = nazarov_check([0.5, 0.5], monte_carlo_trials=10**5, seed=1)
    assert rep.details["N"] == 1
    assert rep.details["mc_expected"] == pytest.approx(0.5, abs=1e-15)
    assert rep.passed


def test_nazarov_errors():
    with pytest.raises(ParameterError):
        nazarov_check([0.0, 1.0])
    with pytest.raises(ParameterError):
        nazarov_check([0.7, 0.7])


def test_nazarov_fixtures_shape():
    fx = nazarov_fixtures(3, count=10)
    for a in fx:
        assert math.fsum(np.abs(a)) <= 1.0
        assert -math.log(abs(a[0])) <= 10.0


def test_bang_sets_nested_and_trivial(T):
    f, _ = from_zeros([0.9], G11)
    rep = bang_sets(f, T, 8, grid=(-5.0, 5.0, 2001))
    assert rep.membership[0].all()
    assert rep.nested()
    # phi(0) = f(1) is small, so the origin stays in the first sets
    mid = 1000
    assert rep.membership[1][mid]
    with pytest.raises(ParameterError):
        bang_sets(f, T, 3, grid=np.array([]))


def test_bang_trivial_pairs(T):
    f, _ = from_zeros([0.9], G11)
    rep = bang_sets(f, T, 6, grid=(-5.0, 5.0, 2001))
    chk = bang_distance_check(rep, T, [(3, 3), (4, 0)])
    assert chk.passed
    assert rep.vacuous[(4, 0)]
    with pytest.raises(ParameterError):
        bang_distance_check(rep, T, [(2, 4)])


def test_bang_fixtures_small_run(T):
    for f in bang_fixtures(G11, 0, count=3):
        rep = bang_sets(f, T, 8)
        assert rep.nested()
        assert bang_distance_check(rep, T, [(4, 2), (6, 3), (8, 4)]).passed


def test_stirling_check():
    rep = stirling_check()
    assert rep.passed
    assert rep.cases_run == 16 * 13 + sum(k - 1 for k in range(2, 21))
