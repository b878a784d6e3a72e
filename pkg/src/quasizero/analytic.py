"""Truncated power series in the weighted class and their cosine transform.

A member ``f(z) = sum a_n z^n`` carries the norm ``||f||_W = max |a_n| w_n``.
Its transform ``phi_f(x) = sum a_n cos(sqrt(n) x)`` has derivatives bounded by
``||f||_W M_k``; at ``x = 0`` the even derivatives are ``(-1)^k sum a_n n^k``.
"""
from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import MembershipError, ParameterError
from .weights import WeightSequence

MAX_DEGREE = 512
STIRLING_MAX = 64


def falling_factorial(n: int, l: int) -> int:
    """``n (n-1) ... (n-l+1)``; equals 1 for ``l = 0``."""
    out = 1
    for j in range(l):
        out *= n - j
    return out


@lru_cache(maxsize=None)
def _stirling_row(k: int) -> tuple:
    if k == 0:
        return (1,)
    prev = _stirling_row(k - 1)
    row = [0] * (k + 1)
    for l in range(1, k + 1):
        row[l] = (l * prev[l] if l < k else 0) + prev[l - 1]
    return tuple(row)


def stirling2(k: int, l: int) -> int:
    """Stirling number of the second kind ``S(k, l)`` (exact integer)."""
    if not (0 <= l <= k):
        if l > k >= 0:
            return 0
        raise ParameterError("stirling2 needs 0 <= l and 0 <= k")
    if k > STIRLING_MAX:
        raise ParameterError(f"stirling2 is guarded at k <= {STIRLING_MAX}")
    return _stirling_row(k)[l]


def _exact_sum(values, multipliers) -> float:
    """``sum values[i] * multipliers[i]`` with float inputs and integer multipliers, exactly."""
    total = Fraction(0)
    for v, m in zip(values, multipliers):
        if v and m:
            total += Fraction(float(v)) * m
    return float(total)


class CoefFn:
    """Polynomial ``a_0 + a_1 z + ... + a_N z^N`` viewed as a member of the class.

    ``zeros`` keeps the zeros the polynomial was built from, when known.
    """

    __slots__ = ("coef", "weight", "log_class_norm", "zeros")

    def __init__(self, coef, weight: WeightSequence, zeros=None):
        c = np.array(coef, dtype=complex).reshape(-1)
        if c.size == 0:
            c = np.zeros(1, dtype=complex)
        if c.size - 1 > MAX_DEGREE:
            raise ParameterError(f"degree {c.size - 1} exceeds the cap {MAX_DEGREE}")
        lw = weight.log_w(np.arange(c.size))
        nz = c != 0
        if np.any(nz & np.isinf(lw)):
            bad = int(np.flatnonzero(nz & np.isinf(lw))[0])
            raise MembershipError(f"a_{bad} != 0 but w_{bad} = +inf")
        c.setflags(write=False)
        self.coef = c
        self.weight = weight
        if nz.any():
            self.log_class_norm = float(np.max(np.log(np.abs(c[nz])) + lw[nz]))
        else:
            self.log_class_norm = -math.inf
        self.zeros = None if zeros is None else tuple(complex(z) for z in zeros)

    def __repr__(self):
        return f"CoefFn(degree={self.degree}, norm={self.class_norm:.6g})"

    @property
    def degree(self) -> int:
        nz = np.flatnonzero(self.coef)
        return int(nz[-1]) if nz.size else -1

    @property
    def class_norm(self) -> float:
        return math.exp(self.log_class_norm)

    @property
    def is_real(self) -> bool:
        return not np.any(self.coef.imag)

    def scaled(self, c: complex) -> "CoefFn":
        g = CoefFn(self.coef * c, self.weight, self.zeros)
        if c != 0 and math.isfinite(self.log_class_norm):
            # carried in log form so that tiny coefficients do not lose the scale
            g.log_class_norm = self.log_class_norm + math.log(abs(c))
        return g

    def eval(self, z, l: int = 0):
        """``f^{(l)}(z)``; zero when ``l`` exceeds the degree."""
        if l < 0:
            raise ParameterError("derivative order must be nonnegative")
        z = np.asarray(z, dtype=complex)
        if np.any(np.abs(z) > 1 + 1e-6):
            raise ParameterError("evaluation is restricted to |z| <= 1")
        N = self.coef.size - 1
        if l > N:
            return np.zeros_like(z) if z.ndim else 0j
        n = np.arange(l, N + 1)
        fall = np.ones(n.size)
        for j in range(l):
            fall *= n - j
        d = self.coef[l:] * fall
        out = np.polyval(d[::-1], z)
        return out if z.ndim else complex(out)

    def deriv_at_one(self, l: int) -> complex:
        """``f^{(l)}(1) = sum_n a_n n (n-1) ... (n-l+1)``, summed exactly."""
        mult = [falling_factorial(n, l) for n in range(self.coef.size)]
        re = _exact_sum(self.coef.real, mult)
        im = _exact_sum(self.coef.imag, mult)
        return complex(re, im)

    def _require_real(self):
        if not self.is_real:
            raise ParameterError("the cosine transform needs real coefficients")

    def phi_deriv_zero(self, j: int) -> float:
        """``phi_f^{(j)}(0)``: zero for odd ``j``, ``(-1)^k sum a_n n^k`` for ``j = 2k``."""
        self._require_real()
        if j % 2:
            return 0.0
        k = j // 2
        s = _exact_sum(self.coef.real, [n**k for n in range(self.coef.size)])
        return -s if k % 2 else s

    def phi_eval(self, x, j: int = 0):
        """``phi_f^{(j)}(x) = sum a_n sqrt(n)^j cos(sqrt(n) x + j pi/2)``."""
        self._require_real()
        x = np.asarray(x, dtype=float)
        a = self.coef.real
        n = np.flatnonzero(a)
        if n.size == 0:
            return np.zeros_like(x) if x.ndim else 0.0
        omega = np.sqrt(n.astype(float))
        scale = a[n] * omega**j if j else a[n].copy()
        if j and n[0] == 0:
            scale[0] = 0.0
        arg = np.multiply.outer(x, omega)
        r = j % 4
        if r == 0:
            trig = np.cos(arg)
        elif r == 1:
            trig = -np.sin(arg)
        elif r == 2:
            trig = -np.cos(arg)
        else:
            trig = np.sin(arg)
        out = trig @ scale
        return out if x.ndim else float(out)


def class_norm(f: CoefFn) -> float:
    return f.class_norm


def evaluate(f: CoefFn, z, l: int = 0):
    return f.eval(z, l)


def deriv_at_one(f: CoefFn, l: int) -> complex:
    return f.deriv_at_one(l)


def phi_deriv_zero(f: CoefFn, j: int) -> float:
    return f.phi_deriv_zero(j)


def phi_eval(f: CoefFn, x, j: int = 0):
    return f.phi_eval(x, j)


def expand_zeros(zeros) -> np.ndarray:
    """Ascending coefficients of ``prod_j (z - z_j)`` by sequential convolution."""
    c = np.ones(1, dtype=complex)
    for z in zeros:
        c = np.concatenate(([0j], c)) - z * np.concatenate((c, [0j]))
    return c


def _conjugate_closed(zeros) -> bool:
    rest = list(zeros)
    while rest:
        z = rest.pop()
        if z.imag == 0:
            continue
        for i, w in enumerate(rest):
            if w == z.conjugate():
                del rest[i]
                break
        else:
            return False
    return True


def from_zeros(zeros, weight: WeightSequence):
    """Normalized ``f = c prod (z - z_j)`` with ``||f||_W = 1``, and ``A = -ln|f(0)|``.

    Returns ``(f, A)``.
    """
    zeros = [complex(z) for z in zeros]
    if any(z == 0 for z in zeros):
        raise ParameterError("a zero at the origin makes A undefined")
    if any(not (math.isfinite(z.real) and math.isfinite(z.imag)) for z in zeros):
        raise ParameterError("zeros must be finite")
    if len(zeros) > MAX_DEGREE:
        raise ParameterError(f"degree {len(zeros)} exceeds the cap {MAX_DEGREE}")
    smax = weight.support_max
    if smax is not None and len(zeros) > smax:
        raise MembershipError(f"degree {len(zeros)} exceeds the weight support {smax}")
    c = expand_zeros(zeros)
    if _conjugate_closed(zeros):
        c = c.real.astype(complex)
    f0 = CoefFn(c, weight, zeros)
    f = CoefFn(c * math.exp(-f0.log_class_norm), weight, zeros)
    A = f.log_class_norm - math.log(abs(f.coef[0]))
    return f, A


def from_coefficients(coef, weight: WeightSequence, normalize: bool = False) -> CoefFn:
    f = CoefFn(coef, weight)
    if normalize and math.isfinite(f.log_class_norm):
        f = f.scaled(math.exp(-f.log_class_norm))
    return f


def norm_deficiency(f: CoefFn) -> float:
    """``A = ln ||f||_W - ln |f(0)|``."""
    a0 = abs(f.coef[0])
    if a0 == 0:
        raise ParameterError("f(0) = 0")
    return f.log_class_norm - math.log(a0)
