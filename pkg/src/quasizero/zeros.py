"""Zero counting in the closed unit disc.

Roots come from simultaneous (Aberth-Ehrlich) iteration; the argument
principle and Jensen's formula give two independent cross-checks.  The
soundness experiment samples zero sets, builds the normalized polynomial and
compares its zero count with the bound.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .analytic import CoefFn, from_zeros
from .bound import zero_count_bound
from .errors import ContourError, ParameterError
from .moments import MomentTable
from .weights import WeightSequence

DELTA_ROOT = 1e-9
BOUNDARY_BAND = 1e-6
MAX_ITER = 500
_EPS = np.finfo(float).eps

ARG_MIN_NODES = 64
ARG_MAX_NODES = 2**20
ARG_TOL = 1e-3
ARG_RETRIES = 16
JENSEN_MAX_NODES = 2**22
JENSEN_TOL = 1e-13
NEAR_CIRCLE = 1e-8


@dataclass
class RootsResult:
    roots: np.ndarray
    backward_error: np.ndarray
    reliable: bool
    iterations: int


def _trim(coef) -> np.ndarray:
    c = np.asarray(coef, dtype=complex).reshape(-1)
    nz = np.flatnonzero(c)
    if nz.size == 0:
        raise ParameterError("the zero polynomial has no well-defined zero set")
    return c[: nz[-1] + 1]


def _eval_correction(c: np.ndarray, z: np.ndarray):
    """``p'/p`` and the relative backward error ``|p| / sum |c_n| |z|^n`` at each ``z``.

    Points outside the unit circle are evaluated through the reversed polynomial.
    """
    n = c.size - 1
    inv = np.empty(z.size, dtype=complex)
    be = np.empty(z.size)
    inside = np.abs(z) <= 1.0
    ac = np.abs(c)
    if inside.any():
        x = z[inside]
        ax = np.abs(x)
        p = np.zeros(x.size, dtype=complex)
        dp = np.zeros(x.size, dtype=complex)
        s = np.zeros(x.size)
        for k in range(n, -1, -1):
            dp = dp * x + p
            p = p * x + c[k]
            s = s * ax + ac[k]
        with np.errstate(divide="ignore", invalid="ignore"):
            inv[inside] = dp / p
        be[inside] = np.abs(p) / s
    out = ~inside
    if out.any():
        y = 1.0 / z[out]
        ay = np.abs(y)
        q = np.zeros(y.size, dtype=complex)
        dq = np.zeros(y.size, dtype=complex)
        s = np.zeros(y.size)
        for k in range(n + 1):
            dq = dq * y + q
            q = q * y + c[k]
            s = s * ay + ac[k]
        # p(z) = z^n q(1/z), so p'/p = y (n - y q'/q)
        with np.errstate(divide="ignore", invalid="ignore"):
            inv[out] = y * (n - y * dq / q)
        be[out] = np.abs(q) / s
    return inv, be


def _initial_points(c: np.ndarray) -> np.ndarray:
    """Points on circles whose radii come from the Newton polygon of ``ln |c_n|``."""
    n = c.size - 1
    idx = np.flatnonzero(c)
    logc = np.log(np.abs(c[idx]))
    hull: list[int] = []
    for t in range(idx.size):
        while len(hull) >= 2:
            i, j = hull[-2], hull[-1]
            # upper hull: drop j when it is on or below the chord i -> t
            if (logc[j] - logc[i]) * (idx[t] - idx[i]) <= (logc[t] - logc[i]) * (idx[j] - idx[i]):
                hull.pop()
            else:
                break
        hull.append(t)
    pts = []
    for i, j in zip(hull[:-1], hull[1:]):
        k = idx[j] - idx[i]
        u = math.exp((logc[i] - logc[j]) / k)
        ang = 2 * np.pi * np.arange(k) / k + 2 * np.pi * idx[i] / n + 0.7
        pts.append(u * np.exp(1j * ang))
    return np.concatenate(pts)


def _aberth(c: np.ndarray):
    n = c.size - 1
    z = _initial_points(c)
    stop = 2.0 * n * _EPS
    active = np.ones(n, dtype=bool)
    it = 0
    for it in range(1, MAX_ITER + 1):
        ia = np.flatnonzero(active)
        inv, _ = _eval_correction(c, z[ia])
        diff = z[ia, None] - z[None, :]
        diff[np.arange(ia.size), ia] = 1.0
        S = (1.0 / diff).sum(axis=1) - 1.0
        denom = inv - S
        with np.errstate(divide="ignore", invalid="ignore"):
            w = np.where(np.isfinite(inv) & (denom != 0), 1.0 / denom, 0.0)
        z[ia] = z[ia] - w
        # a point is settled once its correction is at rounding level; points
        # with small backward error keep moving so that clusters separate
        active[ia[np.abs(w) <= 4.0 * _EPS * np.abs(z[ia])]] = False
        if not active.any():
            break
    _, be = _eval_correction(c, z)
    stalled = active & (be > stop)
    reliable = not stalled.any()
    # Newton polish, kept only where it lowers the backward error
    inv, be = _eval_correction(c, z)
    with np.errstate(divide="ignore", invalid="ignore"):
        cand = np.where(np.isfinite(inv) & (inv != 0), z - 1.0 / inv, z)
    _, be2 = _eval_correction(c, cand)
    better = be2 < be
    z = np.where(better, cand, z)
    be = np.where(better, be2, be)
    return z, be, reliable, it


def roots(f) -> RootsResult:
    """All roots of ``f`` (a ``CoefFn`` or ascending coefficients) with backward errors.

    The backward error is ``|f(z)| / sum |a_n| |z|^n`` at the computed root.
    """
    c = _trim(f.coef if isinstance(f, CoefFn) else f)
    lead = int(np.flatnonzero(c)[0])
    zero_roots = np.zeros(lead, dtype=complex)
    c = c[lead:]
    n = c.size - 1
    if n == 0:
        rest, be, ok, it = np.zeros(0, dtype=complex), np.zeros(0), True, 0
    elif n == 1:
        rest = np.array([-c[0] / c[1]])
        be, ok, it = np.zeros(1), True, 0
    else:
        rest, be, ok, it = _aberth(c)
    allr = np.concatenate((zero_roots, rest))
    allbe = np.concatenate((np.zeros(lead), be))
    order = np.lexsort((allr.imag, allr.real, np.abs(allr)))
    return RootsResult(allr[order], allbe[order], ok, it)


@dataclass
class ZeroCountReport:
    roots: list
    backward_error: list
    n_f: int
    boundary_warnings: list
    reliable: bool = True
    A: float | None = None
    N_bound: float | None = None
    trivial_cap: int | None = None
    margin: float | None = None
    passed: bool | None = None
    trial: int | None = None
    seed: int | None = None
    m_sampled: int | None = None
    sampled_in_disc: int | None = None
    counts_agree: bool | None = None
    resamples: int = 0
    mode: str | None = None
    bound_stage_failed: str | None = None
    jensen_checks: list = field(default_factory=list)
    jensen_ok: bool | None = None
    argument_count: int | None = None
    argument_radius: float | None = None
    roots_inside_radius: int | None = None
    cross_check_ok: bool | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["roots"] = [[z.real, z.imag] for z in self.roots]
        d["boundary_warnings"] = [[z.real, z.imag] for z in self.boundary_warnings]
        d["pass"] = d.pop("passed")
        return d


def count_in_disc(f) -> ZeroCountReport:
    r = roots(f)
    mod = np.abs(r.roots)
    n_f = int(np.count_nonzero(mod <= 1.0 + DELTA_ROOT))
    warn = r.roots[np.abs(mod - 1.0) <= BOUNDARY_BAND]
    return ZeroCountReport(
        roots=[complex(z) for z in r.roots],
        backward_error=[float(b) for b in r.backward_error],
        n_f=n_f,
        boundary_warnings=[complex(z) for z in warn],
        reliable=r.reliable,
    )


def count_in_region(root_list, center: complex, radius: float, closed_disc: bool = True) -> int:
    """Roots in ``{|z - center| < radius}``, intersected with the closed unit disc if asked."""
    z = np.asarray(root_list, dtype=complex)
    sel = np.abs(z - center) < radius
    if closed_disc:
        sel &= np.abs(z) <= 1.0 + DELTA_ROOT
    return int(np.count_nonzero(sel))


# -- argument principle ------------------------------------------------------


@dataclass
class ArgumentDetail:
    count: int
    radius: float
    nodes: int
    value: complex
    retries: int


def _circle_values(c: np.ndarray, r: float, N: int):
    n = np.arange(c.size)
    with np.errstate(under="ignore"):
        b = c * np.power(r, n)
    return np.fft.fft(b, N), np.fft.fft(n * b, N), float(np.abs(b).sum())


def _winding(c: np.ndarray, r: float):
    N = ARG_MIN_NODES
    while N < 2 * c.size:
        N *= 2
    prev = None
    while N <= ARG_MAX_NODES:
        fv, zdf, scale = _circle_values(c, r, N)
        if np.min(np.abs(fv)) <= 1e-14 * scale:
            return None
        v = complex(np.mean(zdf / fv))
        k = round(v.real)
        ok = abs(v.real - k) <= ARG_TOL and abs(v.imag) <= ARG_TOL
        if ok and prev is not None and prev[0] == k:
            return k, N, v
        prev = (k, v) if ok else None
        N *= 2
    return None


def argument_count_detail(f, r: float) -> ArgumentDetail:
    """Winding number of ``f`` on ``|z| = r`` by trapezoid quadrature of ``z f'/f``."""
    if not 0.0 < r < 1.0:
        raise ParameterError("radius must lie in (0, 1)")
    c = _trim(f.coef if isinstance(f, CoefFn) else f)
    for attempt in range(ARG_RETRIES + 1):
        step = (attempt + 1) // 2
        rr = r * (1.0 + (-1) ** attempt * 1e-4 * step) if attempt else r
        res = _winding(c, rr)
        if res is not None:
            return ArgumentDetail(res[0], rr, res[1], res[2], attempt)
    raise ContourError(f"no stable winding number near r={r} after {ARG_RETRIES} retries")


def argument_count(f, r: float) -> int:
    return argument_count_detail(f, r).count


# -- Jensen's formula ----------------------------------------------------------


@dataclass
class JensenDetail:
    residual: float
    radius: float
    nodes: int
    log_f0: float
    root_sum: float
    boundary_mean: float


def _mean_log_modulus(c: np.ndarray, r: float):
    N = ARG_MIN_NODES
    while N < 2 * c.size:
        N *= 2
    prev = None
    while True:
        fv, _, _ = _circle_values(c, r, N)
        with np.errstate(divide="ignore"):
            val = float(np.mean(np.log(np.abs(fv))))
        if prev is not None and abs(val - prev) <= JENSEN_TOL * max(1.0, abs(val)):
            return val, N
        if N >= JENSEN_MAX_NODES:
            return val, N
        prev = val
        N *= 2


def jensen_detail(f) -> JensenDetail:
    c = _trim(f.coef if isinstance(f, CoefFn) else f)
    if c[0] == 0:
        raise ParameterError("Jensen's formula needs f(0) != 0")
    rts = roots(c).roots
    mod = np.abs(rts)
    r = 1.0
    if mod.size and np.min(np.abs(mod - 1.0)) < NEAR_CIRCLE:
        cands = [1 - 1e-6, 1 + 1e-6, 1 - 1e-5, 1 + 1e-5, 1 - 1e-4, 1 + 1e-4]
        r = max(cands, key=lambda s: float(np.min(np.abs(mod - s))))
    inside = mod[mod < r]
    root_sum = math.fsum(np.log(inside / r))
    mean, N = _mean_log_modulus(c, r)
    log_f0 = math.log(abs(c[0]))
    return JensenDetail(abs(log_f0 - root_sum - mean), r, N, log_f0, root_sum, mean)


def jensen_residual(f) -> float:
    """``|ln|f(0)| - sum_{|z_j|<1} ln|z_j| - mean ln|f(e^{it})||``."""
    return jensen_detail(f).residual


# -- boundary clusters ---------------------------------------------------------


def boundary_cluster_count(root_list, eps: float) -> int:
    """``max_theta #{z : |z| <= 1, |z - e^{i theta}| < eps}`` computed exactly over arcs."""
    full = 0
    centers = []
    halves = []
    for z in root_list:
        rho = abs(z)
        if rho > 1.0 + DELTA_ROOT:
            continue
        if rho == 0.0:
            full += 1 if eps > 1.0 else 0
            continue
        cth = (rho * rho + 1.0 - eps * eps) / (2.0 * rho)
        if cth < -1.0:
            full += 1
        elif cth < 1.0:
            centers.append(math.atan2(z.imag, z.real))
            halves.append(math.acos(cth))
    best = 0
    two_pi = 2.0 * math.pi
    for i in range(len(centers)):
        start_i = centers[i] - halves[i]
        cnt = 0
        for j in range(len(centers)):
            d = (start_i - (centers[j] - halves[j])) % two_pi
            if d < 2.0 * halves[j]:
                cnt += 1
        best = max(best, cnt)
    return full + best


def jensen_step_holds(n_f: int, A: float, root_list, eps: float) -> tuple[bool, int]:
    """``n_f <= (2A + 8 m_eps) / eps``; returns the verdict and ``m_eps``."""
    m_eps = boundary_cluster_count(root_list, eps)
    return n_f <= (2.0 * A + 8.0 * m_eps) / eps, m_eps


# -- soundness experiment ------------------------------------------------------


@dataclass(frozen=True)
class TrialConfig:
    """Zero-sampling mixture for one soundness trial.

    Each zero is interior (uniform in ``|z| <= interior_radius``), clustered
    near a boundary point ``e^{i theta}`` at a scale drawn from
    ``cluster_eps``, or exterior with modulus in ``exterior_radius``.  With
    probability ``p_far`` a trial instead puts every zero far outside the
    disc (modulus at least ``far_factor * m``), which yields small ``A``.
    """

    m_max: int = 24
    degree_cap: int = 24
    interior_radius: float = 0.95
    cluster_eps: tuple = (0.02, 0.2)
    max_clusters: int = 3
    p_interior: float = 0.4
    p_cluster: float = 0.4
    p_exterior: float = 0.2
    exterior_radius: tuple = (1.05, 8.0)
    p_far: float = 0.15
    far_factor: float = 8.0
    jensen_eps: tuple = (0.05, 0.1, 0.2, 0.5)
    cross_check_radius: float = 0.95

    def __post_init__(self):
        if self.m_max < 0 or self.degree_cap < 0:
            raise ParameterError("m_max and degree_cap must be nonnegative")
        probs = (self.p_interior, self.p_cluster, self.p_exterior)
        if min(probs) < 0 or sum(probs) <= 0 or not 0 <= self.p_far <= 1:
            raise ParameterError("mixture probabilities must be nonnegative")
        lo, hi = self.cluster_eps
        if not 0 < lo <= hi < 1:
            raise ParameterError("cluster_eps must lie in (0, 1)")

    def to_dict(self) -> dict:
        return asdict(self)


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent stream for ``(seed, trial)``, unaffected by the order trials run in."""
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(trial),)))


def sample_zeros(rng: np.random.Generator, config: TrialConfig, m_cap: int):
    """Returns ``(zeros, mode, cluster_eps_list, resamples)``."""
    m = int(rng.integers(0, min(config.m_max, m_cap) + 1))
    resamples = 0
    if rng.random() < config.p_far:
        mod = rng.uniform(config.far_factor, 4 * config.far_factor, size=m) * max(m, 1)
        ang = rng.uniform(0, 2 * np.pi, size=m)
        return list(mod * np.exp(1j * ang)), "far", [], 0
    n_clusters = int(rng.integers(1, config.max_clusters + 1))
    theta = rng.uniform(0, 2 * np.pi, size=n_clusters)
    eps = rng.uniform(*config.cluster_eps, size=n_clusters)
    probs = np.array([config.p_interior, config.p_cluster, config.p_exterior], dtype=float)
    probs /= probs.sum()
    zeros = []
    used = set()
    while len(zeros) < m:
        kind = rng.choice(3, p=probs)
        if kind == 0:
            z = config.interior_radius * math.sqrt(rng.random()) * np.exp(2j * np.pi * rng.random())
        elif kind == 1:
            c = int(rng.integers(0, n_clusters))
            used.add(c)
            z = np.exp(1j * theta[c]) + eps[c] * math.sqrt(rng.random()) * np.exp(
                2j * np.pi * rng.random()
            )
        else:
            z = rng.uniform(*config.exterior_radius) * np.exp(2j * np.pi * rng.random())
        if z == 0:
            resamples += 1
            continue
        zeros.append(complex(z))
    return zeros, "mixed", [float(eps[c]) for c in sorted(used)], resamples


def soundness_trial(
    W: WeightSequence, T: MomentTable, config: TrialConfig, seed: int, trial: int = 0
) -> ZeroCountReport:
    """One seeded trial: sample zeros, normalize, count, and compare with the bound."""
    rng = trial_rng(seed, trial)
    cap = config.degree_cap
    if W.support_max is not None:
        cap = min(cap, W.support_max)
    zeros, mode, eps_used, resamples = sample_zeros(rng, config, cap)
    f, A = from_zeros(zeros, W)
    if f.degree >= 1:
        rep = count_in_disc(f)
    else:
        rep = ZeroCountReport([], [], 0, [])
    rep.trial, rep.seed, rep.m_sampled, rep.mode = int(trial), int(seed), len(zeros), mode
    rep.resamples = resamples
    # clustered zeros near the circle are ill-conditioned in the coefficients,
    # so the construction count is kept next to the root-finder count
    rep.sampled_in_disc = sum(1 for z in zeros if abs(z) <= 1.0)
    rep.counts_agree = rep.sampled_in_disc == rep.n_f
    n_worst = max(rep.n_f, rep.sampled_in_disc)
    rep.A = A
    b = zero_count_bound(T, A)
    rep.N_bound = b.N_bound
    rep.trivial_cap = b.trivial_cap
    rep.bound_stage_failed = b.failed_stage
    rep.margin = b.effective_bound - n_worst
    rep.passed = n_worst <= b.effective_bound
    checks = []
    for e in sorted(set(config.jensen_eps) | set(eps_used)):
        ok, m_eps = jensen_step_holds(rep.sampled_in_disc, A, zeros, e)
        checks.append({"eps": e, "m_eps": m_eps, "ok": ok})
    rep.jensen_checks = checks
    rep.jensen_ok = all(c["ok"] for c in checks)
    if f.degree >= 1 and config.cross_check_radius:
        try:
            d = argument_count_detail(f, config.cross_check_radius)
        except ContourError:
            pass
        else:
            rep.argument_count = d.count
            rep.argument_radius = d.radius
            rep.roots_inside_radius = int(np.count_nonzero(np.abs(rep.roots) < d.radius))
            rep.cross_check_ok = d.count == rep.roots_inside_radius
    return rep


def run_soundness(
    W: WeightSequence, T: MomentTable, config: TrialConfig, seed: int, trials: int
) -> list[ZeroCountReport]:
    if trials < 0:
        raise ParameterError("trials must be nonnegative")
    return [soundness_trial(W, T, config, seed, t) for t in range(trials)]


SOUNDNESS_CSV_HEADER = ["trial", "seed", "m_sampled", "A", "n_f", "N_bound", "margin", "pass"]


def soundness_csv_row(rep: ZeroCountReport) -> list:
    return [rep.trial, rep.seed, rep.m_sampled, rep.A, rep.n_f, rep.N_bound, rep.margin, rep.passed]
