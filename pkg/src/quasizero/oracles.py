"""Numerical checks of the four ingredients behind the zero-count bound.

* cluster estimate: ``m`` zeros near ``z = 1`` force ``|phi_f^{(2k)}(0)|`` to be small;
* derivative comparison on a convex region holding ``m`` zeros;
* a point of ``[0, 9 sqrt(A)]`` where ``|phi|`` is not too small;
* separation of the sets ``B_p`` of points where ``phi`` is flat to order ``p``.

Every derivative of ``phi_f`` is an exact finite sum; nothing is differenced.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from numpy.polynomial import polynomial as P

from .analytic import CoefFn, falling_factorial, from_zeros, stirling2
from .errors import ParameterError
from .moments import MomentTable
from .weights import WeightSequence
from .zeros import argument_count, count_in_region, jensen_residual, roots

LAVIE_RTOL = 1e-8
LAVIE_REFINE = 64
NAZAROV_SCAN_STEP = 0.01
NAZAROV_MC_TRIALS = 10**5
NAZAROV_SE_GATE = 3.0
GN_BOUND_TOL = 1e-12
BANG_GRID = (-20.0, 20.0, 16001)


@dataclass
class LemmaReport:
    lemma: str
    cases_run: int = 0
    worst_margin: float = math.inf
    failures: list = field(default_factory=list)
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.failures

    def add(self, margin: float, ok: bool, case: dict) -> None:
        self.cases_run += 1
        self.worst_margin = min(self.worst_margin, margin)
        if not ok:
            self.failures.append(case)

    def merge(self, other: "LemmaReport") -> "LemmaReport":
        self.cases_run += other.cases_run
        self.worst_margin = min(self.worst_margin, other.worst_margin)
        self.failures.extend(other.failures)
        return self

    def to_dict(self) -> dict:
        return {
            "lemma": self.lemma,
            "cases_run": self.cases_run,
            "worst_margin": self.worst_margin,
            "failures": self.failures,
            "details": self.details,
            "pass": self.passed,
        }


def _coef(f) -> np.ndarray:
    return np.asarray(f.coef if isinstance(f, CoefFn) else f, dtype=complex)


# -- cluster estimate ----------------------------------------------------------


def _exact_power_sum(f: CoefFn, k: int) -> float:
    """``sum a_n n^k``, exact for the product ``c * prod (z - z_j)`` when all zeros are real."""
    zeros = f.zeros
    if zeros is not None and all(z.imag == 0 for z in zeros) and f.is_real:
        e = [Fraction(1)]
        for z in zeros:
            r = Fraction(z.real)
            e = [Fraction(0)] + e
            for i in range(len(e) - 1):
                e[i] -= r * e[i + 1]
        scale = Fraction(float(f.coef.real[len(zeros)]))
        return float(scale * sum(c * n**k for n, c in enumerate(e)))
    total = Fraction(0)
    for n, a in enumerate(f.coef.real):
        if a:
            total += Fraction(float(a)) * n**k
    return float(total)


def lemma1_check(f: CoefFn, eps: float, T: MomentTable, m: int | None = None) -> LemmaReport:
    """``|phi_f^{(2k)}(0)| <= ||f|| (4 e eps / m)^{m-k} M_{2m}`` for ``0 <= k <= min(m/2, sqrt(m/(8 eps)))``.

    ``m`` is the number of zeros in ``{|z| <= 1, |z - 1| < eps}``; it is taken
    from the construction zeros when available, else from the root finder.
    """
    if not 0.0 < eps < 1.0:
        raise ParameterError("eps must lie in (0, 1)")
    rep = LemmaReport("lemma1")
    if m is None:
        if f.zeros is not None:
            m = count_in_region(f.zeros, 1.0, eps)
            rep.details["m_source"] = "construction"
        else:
            m = count_in_region(roots(f).roots, 1.0, eps)
            rep.details["m_source"] = "roots"
    rep.details.update({"m": m, "eps": eps})
    if m == 0:
        rep.details["vacuous"] = True
        return rep
    kmax = math.floor(min(m / 2.0, math.sqrt(m / (8.0 * eps))))
    log_ratio = math.log(4.0 * math.e * eps / m)
    log_M2m = T.log_moment(2 * m)
    rows = []
    for k in range(kmax + 1):
        s = _exact_power_sum(f, k)
        lhs = math.log(abs(s)) if s else -math.inf
        rhs = f.log_class_norm + (m - k) * log_ratio + log_M2m
        margin = rhs - lhs
        rows.append({"k": k, "log_lhs": lhs, "log_rhs": rhs})
        rep.add(margin, margin > 0, {"k": k, "m": m, "eps": eps, "log_lhs": lhs, "log_rhs": rhs})
    rep.details["rows"] = rows
    return rep


def lemma1_fixtures(W: WeightSequence, ms=range(4, 11), eps_values=(0.05, 0.1)):
    """``(f, eps)`` with ``m`` zeros placed at ``1 - eps/2``."""
    out = []
    for eps in eps_values:
        for m in ms:
            f, _ = from_zeros([1.0 - eps / 2.0] * m, W)
            out.append((f, eps))
    return out


# -- derivative comparison on a convex region ----------------------------------


def _region_points(region, n: int):
    kind = region[0]
    if kind == "disc":
        _, c, r = region
        t = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
        return lambda s: complex(c) + r * np.exp(1j * s), t, 2 * np.pi / n, 2.0 * r
    if kind == "interval":
        _, lo, hi = region
        if not hi > lo:
            raise ParameterError("interval needs lo < hi")
        t = np.linspace(0.0, 1.0, n)
        return lambda s: lo + (hi - lo) * s, t, 1.0 / (n - 1), float(hi - lo)
    raise ParameterError(f"unknown region {kind!r}")


def _grid_max(coef, param, t, step, periodic) -> float:
    """Max of ``|p|`` on the parametrized contour, refined twice around the best node."""
    vals = np.abs(P.polyval(param(t), coef))
    best = float(vals.max())
    center = float(t[int(vals.argmax())])
    for _ in range(2):
        s = np.linspace(center - step, center + step, LAVIE_REFINE + 1)
        if not periodic:
            s = np.clip(s, 0.0, 1.0)
        v = np.abs(P.polyval(param(s), coef))
        if v.max() > best:
            best = float(v.max())
            center = float(s[int(v.argmax())])
        step /= LAVIE_REFINE / 2
    return best


def _zeros_in_region(rts, region) -> int:
    # counted conservatively: a root on the edge is left out, which only weakens the claim
    if region[0] == "disc":
        _, c, r = region
        return int(np.count_nonzero(np.abs(rts - complex(c)) <= r * (1 - 1e-9)))
    _, lo, hi = region
    return int(np.count_nonzero((np.abs(rts.imag) <= 1e-12) & (rts.real > lo) & (rts.real < hi)))


def lavie_check(f, region, grid_size: int = 2048) -> LemmaReport:
    """``max_R |f^{(k)}| <= delta^{m-k} / (m-k)! max_R |f^{(m)}|`` for ``0 <= k <= m``.

    ``region`` is ``("disc", center, radius)`` or ``("interval", lo, hi)``; for
    a disc the maxima sit on the boundary circle.
    """
    c = _coef(f)
    nz = np.flatnonzero(c)
    if nz.size == 0:
        raise ParameterError("f must be nonzero")
    c = c[: nz[-1] + 1]
    rep = LemmaReport("lavie")
    param, t, step, delta = _region_points(region, grid_size)
    periodic = region[0] == "disc"
    m = _zeros_in_region(roots(c).roots, region) if c.size > 1 else 0
    rep.details.update({"m": m, "delta": delta, "region": list(map(str, region))})
    derivs = [c]
    for _ in range(m):
        derivs.append(P.polyder(derivs[-1]))
    top = _grid_max(derivs[m], param, t, step, periodic)
    for k in range(m + 1):
        lhs = _grid_max(derivs[k], param, t, step, periodic)
        rhs = delta ** (m - k) / math.factorial(m - k) * top
        ok = lhs <= rhs * (1.0 + LAVIE_RTOL)
        margin = (rhs - lhs) / rhs if rhs > 0 else (0.0 if lhs == 0 else -math.inf)
        rep.add(margin, ok, {"k": k, "m": m, "lhs": lhs, "rhs": rhs})
    return rep


def lavie_fixtures(seed: int, count: int = 100, max_degree: int = 12):
    """Random ``(coef, region)`` pairs with zeros spread around the region."""
    rng = np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(1,)))
    out = []
    for _ in range(count):
        d = int(rng.integers(1, max_degree + 1))
        center = complex(rng.normal(), rng.normal())
        radius = float(rng.uniform(0.2, 2.0))
        zs = center + 1.5 * radius * np.sqrt(rng.random(d)) * np.exp(2j * np.pi * rng.random(d))
        lead = complex(rng.normal(), rng.normal())
        coef = lead * P.polyfromroots(zs)
        out.append((coef, ("disc", center, radius)))
    return out


# -- sinc product and the flatness scan ----------------------------------------


def nazarov_log_gN(N: int, xi: float) -> tuple[float, int]:
    """``(ln |g_N(xi)|, sign)``; exact sinc zeros give ``(-inf, 0)``."""
    if N < 1:
        raise ParameterError("N must be at least 1")
    xi = float(xi)
    if xi == 0.0:
        return 0.0, 1
    q = xi / np.sqrt(np.arange(1, N + 1, dtype=float))
    k = np.round(q)
    if np.any((q == k) & (k != 0)):
        return -math.inf, 0
    r = q - k
    s = np.sin(np.pi * r)
    # sin(pi q) = (-1)^k sin(pi r)
    sign = int(np.prod(np.sign(s) * np.where(k % 2 == 0, 1.0, -1.0) * np.sign(q)))
    log_abs = float(np.sum(np.log(np.abs(s))) - np.sum(np.log(np.pi * np.abs(q))))
    return log_abs, sign


def nazarov_gN(N: int, xi: float) -> float:
    """``prod_{j<=N} sin(pi xi / sqrt j) / (pi xi / sqrt j)``."""
    la, s = nazarov_log_gN(N, xi)
    if s == 0:
        return 0.0
    return s * math.exp(la) if la > -745.0 else 0.0


def gN_bound_check(N_max: int = 25, step: float = 0.01, N_min: int = 1) -> LemmaReport:
    """``|g_N(xi)| <= pi^{-N}`` on the grid ``xi in [sqrt N, 10 sqrt N]``."""
    rep = LemmaReport("nazarov-gN")
    for N in range(N_min, N_max + 1):
        xs = np.arange(math.sqrt(N), 10 * math.sqrt(N) + step / 2, step)
        worst = math.inf
        for x in xs:
            la, _ = nazarov_log_gN(N, x)
            worst = min(worst, -N * math.log(math.pi) - la)
        rep.add(worst, worst >= -GN_BOUND_TOL, {"N": N, "log_gap": worst})
    return rep


def _phi_values(a: np.ndarray, x: np.ndarray) -> np.ndarray:
    n = np.flatnonzero(a)
    om = np.sqrt(n.astype(float))
    out = np.zeros(x.shape)
    for lo in range(0, x.size, 4096):
        xs = x[lo : lo + 4096]
        out[lo : lo + 4096] = np.cos(np.multiply.outer(xs, om)) @ a[n]
    return out


def nazarov_check(coef, monte_carlo_trials: int = NAZAROV_MC_TRIALS, seed: int = 0) -> LemmaReport:
    """Flatness scan, expectation mechanism and support of the random walk.

    ``coef`` is real with ``a_0 != 0`` and ``sum |a_n| <= 1``; ``A = -ln |a_0|``.
    """
    a = np.asarray(coef, dtype=float).reshape(-1)
    if a.size == 0 or a[0] == 0:
        raise ParameterError("a_0 must be nonzero")
    if math.fsum(np.abs(a)) > 1.0 + 1e-12:
        raise ParameterError("coefficients must satisfy sum |a_n| <= 1")
    A = -math.log(abs(a[0]))
    nmax = int(np.flatnonzero(a)[-1])
    rep = LemmaReport("nazarov")
    rep.details["A"] = A

    # conclusion: some x in [0, 9 sqrt A] with |phi(x)| >= exp(-A - 3)
    step = NAZAROV_SCAN_STEP / max(1.0, math.sqrt(nmax))
    L = 9.0 * math.sqrt(A)
    x = np.linspace(0.0, L, max(2, math.ceil(L / step) + 1)) if L > 0 else np.zeros(1)
    peak = float(np.max(np.abs(_phi_values(a, x))))
    margin = math.log(peak) + A + 3.0
    rep.add(margin, margin >= 0, {"check": "conclusion", "max_abs_phi": peak, "A": A})
    rep.details["scan_max"] = peak

    # mechanism: E phi(S_N) = a_0 + sum_{n > N} a_n g_N(sqrt n)
    N = max(1, math.ceil(A))
    rng = np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(2,)))
    b = np.pi / np.sqrt(np.arange(1, N + 1, dtype=float))
    S = np.zeros(monte_carlo_trials)
    for j in range(N):
        S += rng.uniform(-b[j], b[j], size=monte_carlo_trials)
    vals = _phi_values(a, S)
    mean = float(vals.mean())
    se = float(vals.std(ddof=1) / math.sqrt(monte_carlo_trials)) if monte_carlo_trials > 1 else math.inf
    expected = float(a[0]) + math.fsum(
        a[n] * nazarov_gN(N, math.sqrt(n)) for n in range(N + 1, a.size) if a[n]
    )
    gap = abs(mean - expected)
    ok = gap <= NAZAROV_SE_GATE * se if se > 0 else gap <= 1e-12
    rep.add(
        (NAZAROV_SE_GATE * se - gap) if se > 0 else -gap,
        ok,
        {"check": "mechanism", "N": N, "mean": mean, "expected": expected, "se": se},
    )
    rep.details.update({"N": N, "mc_mean": mean, "mc_expected": expected, "mc_se": se})

    # support: |S_N| <= 2 pi sqrt N
    smax = float(np.max(np.abs(S)))
    bound = 2 * math.pi * math.sqrt(N)
    rep.add(bound - smax, smax <= bound, {"check": "support", "max_abs_S": smax, "bound": bound})
    return rep


def nazarov_fixtures(seed: int, count: int = 50, A_max: float = 10.0, n_max: int = 40):
    """Real coefficient lists with ``sum |a_n| = 1`` and ``A = -ln|a_0| <= A_max``."""
    rng = np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(3,)))
    out = []
    for _ in range(count):
        A = float(rng.uniform(0.0, A_max))
        n = int(rng.integers(1, n_max + 1))
        a0 = math.exp(-A) * (1 if rng.random() < 0.5 else -1)
        rest = rng.normal(size=n)
        rest *= (1.0 - abs(a0)) * (1 - 1e-15) / np.abs(rest).sum()
        out.append(np.concatenate(([a0], rest)))
    return out


# -- flatness sets ---------------------------------------------------------------


@dataclass
class BangReport:
    grid: np.ndarray
    spacing: float
    membership: dict
    log_norm: float
    distances: dict = field(default_factory=dict)
    rhs: dict = field(default_factory=dict)
    vacuous: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def nested(self) -> bool:
        ps = sorted(self.membership)
        return all(
            not np.any(self.membership[q] & ~self.membership[p]) for p, q in zip(ps, ps[1:])
        )

    def to_dict(self) -> dict:
        def key(pq):
            return f"{pq[0]},{pq[1]}"

        return {
            "grid": {"lo": float(self.grid[0]), "hi": float(self.grid[-1]), "points": int(self.grid.size)},
            "spacing": self.spacing,
            "membership_counts": {str(p): int(m.sum()) for p, m in sorted(self.membership.items())},
            "distances": {key(k): v for k, v in self.distances.items()},
            "rhs": {key(k): v for k, v in self.rhs.items()},
            "vacuous": {key(k): v for k, v in self.vacuous.items()},
            "failures": self.failures,
            "pass": self.passed,
        }


def bang_sets(f: CoefFn, T: MomentTable, p_max: int, grid=None) -> BangReport:
    """Masks of ``B_p = {x : |phi^{(k)}(x)| <= e^{k-p} M_k ||f||, 0 <= k < p}`` for ``p <= p_max``.

    ``grid`` is ``(lo, hi, points)`` or an increasing array of sample points.
    """
    if grid is None:
        grid = BANG_GRID
    if isinstance(grid, tuple):
        lo, hi, n = grid
        x = np.linspace(float(lo), float(hi), int(n))
    else:
        x = np.asarray(grid, dtype=float).reshape(-1)
    if x.size == 0:
        raise ParameterError("grid must be nonempty")
    spacing = float(np.max(np.diff(x))) if x.size > 1 else 0.0
    log_norm = f.log_class_norm
    with np.errstate(divide="ignore"):
        logs = [np.log(np.abs(f.phi_eval(x, k))) - T.log_moment(k) - log_norm for k in range(p_max)]
    membership = {0: np.ones(x.size, dtype=bool)}
    for p in range(1, p_max + 1):
        ok = np.ones(x.size, dtype=bool)
        for k in range(p):
            ok &= logs[k] <= k - p
        membership[p] = ok
    return BangReport(x, spacing, membership, log_norm)


def _set_distance(x, inner, outer) -> float:
    xi = x[inner]
    xo = x[outer]
    if xi.size == 0 or xo.size == 0:
        return math.inf
    pos = np.searchsorted(xo, xi)
    left = np.abs(xi - xo[np.clip(pos - 1, 0, xo.size - 1)])
    right = np.abs(xo[np.clip(pos, 0, xo.size - 1)] - xi)
    return float(np.minimum(left, right).min())


def bang_distance_check(report: BangReport, T: MomentTable, pairs) -> LemmaReport:
    """``dist(B_p, R \\ B_q) >= (H(p) - H(q)) / e - 2 spacing`` for each ``(p, q)``."""
    rep = LemmaReport("bang")
    rep.details["spacing"] = report.spacing
    for p, q in pairs:
        if q > p:
            raise ParameterError("pairs must satisfy q <= p")
        rhs = (T.H(p) - T.H(q)) / math.e
        bp = report.membership[p]
        out_q = ~report.membership[q]
        d = _set_distance(report.grid, bp, out_q)
        report.distances[(p, q)] = d
        report.rhs[(p, q)] = rhs
        report.vacuous[(p, q)] = not (bp.any() and out_q.any())
        margin = d - (rhs - 2 * report.spacing)
        ok = margin >= 0
        case = {"p": p, "q": q, "distance": d, "rhs": rhs}
        rep.add(margin, ok, case)
        if not ok:
            report.failures.append(case)
    return rep


def bang_fixtures(W: WeightSequence, seed: int, count: int = 20):
    """Normalized low-degree polynomials with one to three zeros just inside ``z = 1``.

    Low degree keeps the coefficients comparable to ``1 / w_n``, so ``phi``
    is large somewhere while staying flat near the origin.  Half of the
    fixtures also get a conjugate pair of zeros outside the disc.
    """
    rng = np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(4,)))
    out = []
    for _ in range(count):
        m = int(rng.integers(1, 4))
        eps = float(rng.uniform(0.05, 0.5))
        zs = [complex(1 - eps * rng.random(), 0.0) for _ in range(m)]
        if rng.random() < 0.5:
            z = complex(rng.uniform(1.1, 3.0) * np.exp(1j * np.pi * rng.random()))
            zs += [z, z.conjugate()]
        smax = W.support_max
        if smax is not None:
            zs = zs[:smax]
        out.append(from_zeros(zs, W)[0])
    return out


# -- Stirling numbers, zero-count cross checks -----------------------------------


def stirling_check(n_max: int = 12, k_identity: int = 15, k_bound: int = 20) -> LemmaReport:
    """``n^k = sum_l S(k,l) n(n-1)...(n-l+1)`` and ``S(k,l) <= C(k,l) l^{k-l} / 2`` for ``l < k``."""
    rep = LemmaReport("stirling")
    for k in range(k_identity + 1):
        for n in range(n_max + 1):
            rhs = sum(stirling2(k, l) * falling_factorial(n, l) for l in range(k + 1))
            lhs = n**k
            rep.add(0.0 if lhs == rhs else -1.0, lhs == rhs, {"identity": True, "n": n, "k": k})
    for k in range(2, k_bound + 1):
        for l in range(1, k):
            s = stirling2(k, l)
            twice_bound = math.comb(k, l) * l ** (k - l)
            ok = 2 * s <= twice_bound
            rep.add(math.log(twice_bound / (2 * s)), ok, {"bound": True, "k": k, "l": l})
    return rep


def random_polynomials(seed: int, count: int = 50, max_degree: int = 20, stream: int = 5):
    """Complex Gaussian coefficient lists with ``a_0 != 0``."""
    rng = np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(stream,)))
    out = []
    for _ in range(count):
        d = int(rng.integers(1, max_degree + 1))
        c = rng.normal(size=d + 1) + 1j * rng.normal(size=d + 1)
        out.append(c)
    return out


def argument_principle_check(seed: int, count: int = 50, r: float = 0.95) -> LemmaReport:
    rep = LemmaReport("argument")
    for i, c in enumerate(random_polynomials(seed, count, stream=6)):
        inside = int(np.count_nonzero(np.abs(roots(c).roots) < r))
        wind = argument_count(c, r)
        rep.add(0.0 if wind == inside else -1.0, wind == inside, {"case": i, "winding": wind, "roots": inside})
    return rep


def jensen_check(seed: int, count: int = 50, tol: float = 1e-8) -> LemmaReport:
    rep = LemmaReport("jensen")
    for i, c in enumerate(random_polynomials(seed, count, stream=7)):
        res = jensen_residual(c)
        rep.add(tol - res, res <= tol, {"case": i, "residual": res})
    return rep
