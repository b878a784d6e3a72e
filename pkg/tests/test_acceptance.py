"""Acceptance criteria, one test per criterion.

Run alone with ``pytest tests/test_acceptance.py``; the terminal summary
prints one PASS/FAIL line per criterion.
"""
from __future__ import annotations

import io
import math
import os
import subprocess
import sys
import time

import mpmath as mp
import numpy as np
import pytest
from mp_oracle import ExactMoments

from quasizero.analytic import stirling2
from quasizero.bound import bound_curve, log_spaced, zero_count_bound
from quasizero.cli import run
from quasizero.moments import MomentTable
from quasizero.oracles import (
    bang_distance_check,
    bang_fixtures,
    bang_sets,
    gN_bound_check,
    jensen_check,
    argument_principle_check,
    lavie_check,
    lavie_fixtures,
    lemma1_check,
    lemma1_fixtures,
    nazarov_check,
    nazarov_fixtures,
    stirling_check,
)
from quasizero.weights import MSequence, gevrey_weight, table_weight, weight_from_M
from quasizero.zeros import TrialConfig, run_soundness

SEED = 20240611
LN2 = math.log(2.0)


@pytest.fixture(scope="module")
def soundness_runs():
    G = gevrey_weight(1.0, 1.0)
    Tab = table_weight([2.0 * n for n in range(11)])
    t0 = time.perf_counter()
    runs = {
        "gevrey(1,1)": run_soundness(G, MomentTable(G), TrialConfig(), SEED, 200),
        "table ln w = 2n, n <= 10": run_soundness(Tab, MomentTable(Tab), TrialConfig(), SEED, 200),
    }
    return runs, time.perf_counter() - t0


@pytest.mark.acceptance("AC01 soundness: n_f <= min(N_bound, trivial_cap), 2 x 200 trials, <= 5 min")
def test_ac01_soundness(soundness_runs):
    runs, elapsed = soundness_runs
    for name, reps in runs.items():
        assert len(reps) == 200
        failed = [r.trial for r in reps if not r.passed]
        assert not failed, f"{name}: failing trials {failed}"
        for r in reps:
            cap = math.inf if r.trivial_cap is None else r.trivial_cap
            assert max(r.n_f, r.sampled_in_disc) <= min(r.N_bound, cap)
    # the finite table exercises the degree cap
    assert all(r.trivial_cap == 10 for r in runs["table ln w = 2n, n <= 10"])
    assert elapsed <= 300.0


@pytest.mark.acceptance("AC02 no zeros when A < ln 2")
def test_ac02_small_A(soundness_runs):
    runs, _ = soundness_runs
    small = [r for reps in runs.values() for r in reps if r.A < LN2]
    assert small, "no trial reached A < ln 2"
    for r in small:
        assert r.n_f == 0 and r.sampled_in_disc == 0, (r.trial, r.A)


@pytest.mark.acceptance("AC03 Gevrey(1,1) log-log slope of N_bound over A in [20, 500] within [1.8, 2.6]")
def test_ac03_gevrey_slope():
    t0 = time.perf_counter()
    curve = bound_curve(MomentTable(gevrey_weight(1.0, 1.0)), log_spaced(20.0, 500.0, 12))
    elapsed = time.perf_counter() - t0
    assert all(r.failed_stage is None and r.finite for r in curve.rows)
    slope = curve.loglog_slope()
    assert 1.8 <= slope <= 2.6, slope
    assert elapsed <= 600.0


FINITE_TABLES = [
    [0.0, 0.3, 1.2, 0.7, 2.0, 1.1, 0.4, 3.0, 2.2, 1.5, 0.9],
    [math.log(2), math.log(2)],
    [0.0, 5.0, 0.1, math.inf, 7.5, 0.0],
    [2.0 * n for n in range(11)],
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
]


def _between(a, b):
    return float((a + b) / 2)


@pytest.mark.acceptance("AC04 finite support: log_moment, h, H, inverses, pipeline vs exact sums at 1e-12")
@pytest.mark.parametrize("log_w", FINITE_TABLES, ids=[f"table{i}" for i in range(len(FINITE_TABLES))])
def test_ac04_exact_oracle(log_w):
    T = MomentTable(table_weight(log_w))
    ex = ExactMoments(log_w)
    for k in range(201):
        # absolute 1e-12 in ln M_k is relative 1e-12 in M_k
        assert abs(T.log_moment(k) - ex.log_M(k)) <= 1e-12, k
    H_ref = [ex.H(p) for p in range(201)]
    for p in range(1, 201):
        assert T.h(p) == pytest.approx(float(ex.h(p)), rel=1e-12)
        assert T.H(p) == pytest.approx(float(H_ref[p]), rel=1e-12)
    # inverses at thresholds strictly between consecutive exact values
    for p in range(1, 200):
        R = _between(H_ref[p], H_ref[p + 1])
        if H_ref[p] < R < H_ref[p + 1]:
            assert T.H_inverse(R) == ex.H_inverse(R) == p + 1
    mp.mp.dps = 40
    for p in range(2, 200):
        hp, hq = ex.h(p - 1), ex.h(p)
        if hp > hq * (1 + mp.mpf(10) ** -9):
            eps = _between(hp, hq)
            assert T.h_inverse(eps) == ex.h_inverse(mp.mpf(eps))
    for A in (0.0, 0.5, 3.0):
        res = zero_count_bound(T, A)
        ref = ex.pipeline(A)
        assert res.ceilA3 == ref["ceilA3"] and res.pA == ref["pA"]
        if ref["h_inv_term"] is None:
            assert res.h_inv_unreachable and res.trivial_cap == ex.n_max
        else:
            assert res.h_inv_term == ref["h_inv_term"] and res.m == ref["m"]
            assert res.N_bound == pytest.approx(ref["N_bound"], rel=1e-12)


FAMILIES = {
    "gevrey(1,1)": lambda: gevrey_weight(1.0, 1.0),
    "gevrey(0.5,1)": lambda: gevrey_weight(0.5, 1.0),
    "gevrey(0.3,1)": lambda: gevrey_weight(0.3, 1.0),
    "gevrey(0.75,2.5)": lambda: gevrey_weight(0.75, 2.5),
    "table finite": lambda: table_weight([0.0, 0.3, 1.2, 0.7, 2.0, 1.1, 0.4, 3.0, 2.2, 1.5, 0.9]),
    "table + gevrey tail": lambda: table_weight([0.0, 1.0, 0.5], {"gevrey": {"alpha": 0.6, "a": 1.0}}),
    "derived from M = (2k)!": lambda: weight_from_M(
        MSequence(tuple(math.lgamma(2 * k + 1) for k in range(60))), 25
    ),
}


@pytest.mark.acceptance("AC05 M_0 = 1 and log-convexity for k <= 500 on all weight families")
@pytest.mark.parametrize("family", list(FAMILIES))
def test_ac05_moment_structure(family):
    T = MomentTable(FAMILIES[family]())
    lm = T.log_moments(500)
    assert abs(math.expm1(lm[0])) <= 1e-12
    assert np.all(lm[:-2] + lm[2:] >= 2 * lm[1:-1] - 1e-9)


@pytest.mark.acceptance("AC06 cluster estimate: m in 4..10, eps in {0.05, 0.1}, positive log-margins, <= 1 min")
def test_ac06_cluster_estimate():
    t0 = time.perf_counter()
    W = gevrey_weight(1.0, 1.0)
    T = MomentTable(W)
    cases = 0
    for f, eps in lemma1_fixtures(W):
        rep = lemma1_check(f, eps, T)
        assert rep.details["m"] == f.degree
        assert rep.passed, rep.failures
        assert rep.worst_margin > 0
        cases += rep.cases_run
    assert cases > 0
    assert time.perf_counter() - t0 <= 60.0


@pytest.mark.acceptance("AC07 derivative comparison on discs: 100 random polynomials, slack 1e-8")
def test_ac07_lavie():
    fixtures = lavie_fixtures(SEED, 100)
    assert len(fixtures) == 100
    bad = []
    for i, (coef, region) in enumerate(fixtures):
        assert len(coef) - 1 <= 12
        rep = lavie_check(coef, region)
        if not rep.passed:
            bad.append((i, rep.failures))
    assert not bad


@pytest.mark.acceptance("AC08 flatness scan (50 cases), |g_N| <= pi^-N for N <= 25, Monte Carlo within 3 SE")
def test_ac08_nazarov():
    assert gN_bound_check(N_max=25, step=0.01).passed
    for i, coef in enumerate(nazarov_fixtures(SEED, 50)):
        assert -math.log(abs(coef[0])) <= 10.0
        rep = nazarov_check(coef, seed=SEED + i)
        assert rep.passed, rep.failures
    rep = nazarov_check([0.5, 0.5], monte_carlo_trials=10**5, seed=SEED)
    assert rep.details["N"] == 1 and rep.details["mc_expected"] == 0.5
    assert rep.passed


@pytest.mark.acceptance("AC09 flatness-set distance: 20 fixtures, pairs (4,2), (6,3), (8,4)")
def test_ac09_bang():
    W = gevrey_weight(1.0, 1.0)
    T = MomentTable(W)
    nonvacuous = 0
    for f in bang_fixtures(W, SEED, 20):
        rep = bang_sets(f, T, 8)
        assert rep.nested()
        chk = bang_distance_check(rep, T, [(4, 2), (6, 3), (8, 4)])
        assert chk.passed, chk.failures
        nonvacuous += sum(not v for v in rep.vacuous.values())
    assert nonvacuous > 0


@pytest.mark.acceptance("AC10 Stirling identity (n <= 12, k <= 15) and bound (1 <= l < k <= 20), exact")
def test_ac10_stirling():
    assert stirling_check(12, 15, 20).passed
    for k in range(16):
        for n in range(13):
            assert n**k == sum(stirling2(k, l) * math.perm(n, l) for l in range(k + 1))


@pytest.mark.acceptance("AC11 argument principle vs roots at r = 0.95, Jensen residual <= 1e-8, 50 each")
def test_ac11_zero_counting():
    arg = argument_principle_check(SEED, 50, 0.95)
    jen = jensen_check(SEED, 50, 1e-8)
    assert arg.cases_run == 50 and arg.passed, arg.failures
    assert jen.cases_run == 50 and jen.passed, jen.failures


SEEDED_COMMANDS = [
    ["verify-soundness", "--weight", "gevrey", "--alpha", "1", "--a", "1", "--trials", "30", "--seed", "42"],
    ["verify-soundness", "--weight", "gevrey", "--alpha", "1", "--a", "1", "--trials", "10",
     "--seed", "7", "--format", "json"],
    ["lemma-check", "--which", "lavie", "--trials", "20", "--seed", "3"],
    ["lemma-check", "--which", "nazarov", "--N", "5", "--trials", "5", "--seed", "3"],
    ["lemma-check", "--which", "bang", "--trials", "5", "--seed", "3"],
    ["lemma-check", "--which", "jensen", "--trials", "10", "--seed", "3"],
    ["curve", "--weight", "gevrey", "--alpha", "1", "--a", "1", "--A-min", "1", "--A-max", "50"],
]


def _in_process(argv):
    out = io.StringIO()
    code = run(argv, stdout=out, stderr=io.StringIO())
    return code, out.getvalue().encode()


@pytest.mark.acceptance("AC12 determinism: seeded commands give byte-identical payloads")
def test_ac12_determinism():
    for argv in SEEDED_COMMANDS:
        first = _in_process(argv)
        assert first[0] == 0, argv
        assert _in_process(argv) == first, argv
    argv = SEEDED_COMMANDS[0]
    outs = []
    for hashseed in ("1", "2"):
        env = dict(os.environ, PYTHONHASHSEED=hashseed)
        r = subprocess.run([sys.executable, "-m", "quasizero", *argv], capture_output=True, env=env, check=False)
        assert r.returncode == 0
        outs.append(r.stdout)
    assert outs[0] == outs[1] == _in_process(argv)[1]
