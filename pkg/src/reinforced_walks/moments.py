"""Exact finite-n moments, normalizers, rates and model constants.

Everything here is deterministic.  Branch points of the piecewise formulas
(p = 1/2, 2/3, 1/3 and l(1-p) = 1) are decided on the exact rational value
of ``p``: floats are read through their shortest repr, so ``0.5`` and
``"0.5"`` both hit the p = 1/2 branch, while ``Fraction(2, 3)`` is needed to
reach p = 2/3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numba import njit

from .distributions import StepDistribution

EULER_GAMMA = 0.57721566490153286060651209008240243


def exact(p) -> Fraction:
    """Exact rational reading of a probability given as float, str or Fraction."""
    if isinstance(p, Fraction):
        return p
    if isinstance(p, str):
        return Fraction(p)
    if isinstance(p, (int, np.integer)):
        return Fraction(int(p))
    return Fraction(repr(float(p)))


def _check_open_unit(p, name="p"):
    if not 0.0 < float(p) < 1.0:
        raise ValueError(f"{name} must lie in (0, 1), got {p}")


# ----------------------------------------------------------------------------
# special functions
# ----------------------------------------------------------------------------


def harmonic(n: int) -> float:
    """H_n = sum_{k<=n} 1/k."""
    if n < 0:
        raise ValueError("harmonic number needs n >= 0")
    if n <= 1_000_000:
        return math.fsum(1.0 / k for k in range(1, n + 1))
    x = float(n)
    return math.log(x) + EULER_GAMMA + 1 / (2 * x) - 1 / (12 * x * x) + 1 / (120 * x**4)


def euler_gamma_estimate(n: int = 10_000) -> float:
    """Euler's constant from a partial harmonic sum with Euler-Maclaurin tail."""
    x = float(n)
    h = math.fsum(1.0 / k for k in range(1, n + 1))
    return h - math.log(x) - 1 / (2 * x) + 1 / (12 * x * x) - 1 / (120 * x**4)


def verify_euler_gamma(tol: float = 1e-10) -> float:
    err = abs(euler_gamma_estimate() - EULER_GAMMA)
    if err > tol:
        raise ArithmeticError(f"stored Euler constant disagrees with partial sums by {err:g}")
    return err


# Bernoulli numbers B_2 .. B_16 for the Stirling tail
_BERNOULLI = (
    Fraction(1, 6),
    Fraction(-1, 30),
    Fraction(1, 42),
    Fraction(-1, 30),
    Fraction(5, 66),
    Fraction(-691, 2730),
    Fraction(7, 6),
    Fraction(-3617, 510),
)
_STIRLING = tuple(float(b / (2 * k * (2 * k - 1))) for k, b in enumerate(_BERNOULLI, start=1))
_STIRLING_MIN = 16


def log_gamma_ratio(n: float, x: float) -> float:
    """log(Gamma(n + x) / Gamma(n)) for n >= 1, x >= 0 without cancellation.

    Small n multiplies out the rising factorial against lgamma; large n uses
    the difference of two Stirling series so the big ``n log n`` parts
    cancel analytically.
    """
    if n < 1 or x < 0:
        raise ValueError("log_gamma_ratio needs n >= 1 and x >= 0")
    if x == 0:
        return 0.0
    if n < _STIRLING_MIN:
        # shift n up by integer steps: Gamma(z+1) = z Gamma(z)
        m = _STIRLING_MIN - math.floor(n)
        num = math.fsum(math.log(n + x + k) for k in range(m))
        den = math.fsum(math.log(n + k) for k in range(m))
        return log_gamma_ratio(n + m, x) - num + den
    z = n + x
    main = (n - 0.5) * math.log1p(x / n) + x * math.log(z) - x
    tail = 0.0
    for k, c in enumerate(_STIRLING, start=1):
        e = 2 * k - 1
        tail += c * (z**-e - n**-e)
    return main + tail


# ----------------------------------------------------------------------------
# products a_{i,j}(x) and a_n(l)
# ----------------------------------------------------------------------------


def a_product(i: int, j: int, x: float) -> float:
    """prod_{k=i}^{j-1} (1 - x/k); equals 1 when i == j."""
    if not 1 <= i <= j:
        raise ValueError(f"need 1 <= i <= j, got i={i}, j={j}")
    if not 0 <= x < i:
        raise ValueError(f"need 0 <= x < i for positive factors, got x={x}, i={i}")
    out = 1.0
    for k in range(i, j):
        out *= 1.0 - x / k
    return out


def a_n_l_product(n: int, l: float, p: float) -> float:
    """a_n(l) as the plain product prod_{k=1}^{n-1} (k + l(1-p))/k."""
    x = l * (1.0 - p)
    out = 1.0
    for k in range(1, n):
        out *= (k + x) / k
    return out


def a_n_l(n: int, l: float, p: float) -> float:
    """Gamma(n + l(1-p)) / (Gamma(n) Gamma(l(1-p) + 1)) via log-gamma differences."""
    if n < 1:
        raise ValueError("a_n(l) needs n >= 1")
    x = l * (1.0 - p)
    if x < 0:
        raise ValueError("a_n(l) needs l(1-p) >= 0")
    if n == 1:
        return 1.0
    return math.exp(log_gamma_ratio(n, x) - math.lgamma(x + 1.0))


# ----------------------------------------------------------------------------
# power sums Z_l(n) of the cluster census
# ----------------------------------------------------------------------------


def _binomial_rows(lmax: int) -> np.ndarray:
    c = np.zeros((lmax + 1, lmax + 1))
    for m in range(lmax + 1):
        for j in range(m + 1):
            c[m, j] = math.comb(m, j)
    return c


@njit(cache=True)
def _ez_recursion(lmax, n, p, binom, table):
    """Forward recursion for E Z_m(k), m = 1..lmax, k = 1..n.

    ``table`` is either (lmax, n) to keep every k or (lmax, 1) for the final
    values only.  Updates are Kahan-compensated.
    """
    cur = np.ones(lmax + 1)
    comp = np.zeros(lmax + 1)
    inc = np.zeros(lmax + 1)
    keep = table.shape[1] == n
    if keep:
        for m in range(1, lmax + 1):
            table[m - 1, 0] = 1.0
    q = 1.0 - p
    for k in range(1, n):
        for m in range(1, lmax + 1):
            s = 0.0
            for j in range(m):
                s += binom[m, j] * cur[j + 1]
            inc[m] = p + q * s / k
        for m in range(1, lmax + 1):
            y = inc[m] - comp[m]
            t = cur[m] + y
            comp[m] = (t - cur[m]) - y
            cur[m] = t
        if keep:
            for m in range(1, lmax + 1):
                table[m - 1, k] = cur[m]
    if not keep:
        for m in range(1, lmax + 1):
            table[m - 1, 0] = cur[m]


def _check_ez_args(l, n, p):
    if int(l) != l or l < 1:
        raise ValueError(f"ez needs an integer l >= 1, got {l}")
    if int(n) != n or n < 1:
        raise ValueError(f"ez needs an integer n >= 1, got {n}")
    _check_open_unit(p)


def ez(l: int, n: int, p: float) -> float:
    """E Z_l(n), exact recursion evaluated in double precision."""
    _check_ez_args(l, n, p)
    l, n = int(l), int(n)
    if l == 1:
        return float(n)
    table = np.empty((l, 1))
    _ez_recursion(l, n, float(p), _binomial_rows(l), table)
    value = float(table[l - 1, 0])
    if not math.isfinite(value):
        raise OverflowError(f"E Z_{l}({n}) exceeds double range at p={p}")
    return value


def ez_series(l: int, n: int, p: float) -> np.ndarray:
    """E Z_m(k) for m = 1..l and k = 1..n as an (l, n) array."""
    _check_ez_args(l, n, p)
    table = np.empty((int(l), int(n)))
    _ez_recursion(int(l), int(n), float(p), _binomial_rows(int(l)), table)
    if not np.all(np.isfinite(table)):
        raise OverflowError(f"E Z_l(k) exceeds double range at p={p}")
    return table


def ez2_closed(n: int, p: float) -> float:
    """Closed form of E Z_2(n): n H_n at p = 1/2, else (2(1-p) a_n(2) - n)/(1-2p)."""
    if n < 1:
        raise ValueError("ez2_closed needs n >= 1")
    _check_open_unit(p)
    if abs(p - 0.5) < 1e-12:
        return n * harmonic(n)
    return (2.0 * (1.0 - p) * a_n_l(n, 2, p) - n) / (1.0 - 2.0 * p)


@njit(cache=True)
def _varz2_recursion(n, p, ez2, ez3, out):
    q = 1.0 - p
    v = 0.0
    out[0] = 0.0
    for k in range(1, n):
        alpha = 4.0 * q / k * ez3[k - 1] - 4.0 * q * q / (k * k) * ez2[k - 1] ** 2
        v = (k + 4.0 * q) / k * v + alpha
        out[k] = v


def varz2_series(n: int, p: float) -> np.ndarray:
    """Var Z_2(k) for k = 1..n."""
    table = ez_series(3, n, p)
    out = np.empty(int(n))
    _varz2_recursion(int(n), float(p), table[1], table[2], out)
    return out


def varz2(n: int, p: float) -> float:
    """Var Z_2(n) by the forward variance recursion (Var Z_2(1) = 0)."""
    return float(varz2_series(n, p)[-1])


@dataclass(frozen=True)
class MomentTable:
    p: float
    lmax: int
    n: int
    ez: np.ndarray  # ez[l-1, k-1] = E Z_l(k)
    varz2: np.ndarray  # varz2[k-1] = Var Z_2(k)

    @property
    def gamma(self) -> np.ndarray:
        k = np.arange(1, self.n + 1, dtype=float)
        return (k + 2 * (1 - self.p)) / k

    @property
    def gamma_prime(self) -> np.ndarray:
        k = np.arange(1, self.n + 1, dtype=float)
        return (k + 4 * (1 - self.p)) / k


def moment_table(lmax: int, n: int, p: float) -> MomentTable:
    table = ez_series(max(lmax, 3), n, p)
    var = np.empty(int(n))
    _varz2_recursion(int(n), float(p), table[1], table[2], var)
    return MomentTable(float(p), int(lmax), int(n), table[:lmax].copy(), var)


# ----------------------------------------------------------------------------
# normalizers and rates
# ----------------------------------------------------------------------------

_HALF = Fraction(1, 2)
_THIRD = Fraction(1, 3)
_TWO_THIRDS = Fraction(2, 3)


def bn(n: float, p) -> float:
    """Variance normalizer of the positive walk, defined for p in [1/2, 1)."""
    q = exact(p)
    if not _HALF <= q < 1:
        raise ValueError(f"b_n is only used for p in [1/2, 1), got p={p}")
    if n < 1:
        raise ValueError("b_n needs n >= 1")
    if q == _HALF:
        return n * math.log(n) + EULER_GAMMA * n
    pf = float(q)
    c = 2 * pf - 1
    return n / c - n ** (2 - 2 * pf) / (c * math.gamma(2 - 2 * pf))


def b_l(l: float, n: float, p) -> float:
    """Growth order of E Z_l(n): n**(l(1-p)), n log n or n."""
    if n < 1:
        raise ValueError("b_l needs n >= 1")
    q = exact(p)
    if not 0 < q < 1:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    x = exact(l) * (1 - q)
    if x > 1:
        return float(n) ** float(x)
    if x == 1:
        return n * math.log(n)
    return float(n)


def rate_delta1(n: float, p) -> float:
    """Berry-Esseen rate of the positive walk, p in [1/2, 1)."""
    q = exact(p)
    if not _HALF <= q < 1:
        raise ValueError(f"the positive-walk rate is defined for p in [1/2, 1), got p={p}")
    if n < 2:
        raise ValueError("rates need n >= 2")
    if q > _TWO_THIRDS:
        return n**-0.5
    if q == _TWO_THIRDS:
        return n**-0.5 * math.log(n)
    if q > _HALF:
        return n ** (1.5 - 3 * float(q))
    return math.log(n) ** -1.5


def rate_delta2(n: float, p) -> float:
    """Berry-Esseen rate of the negative walk, p in (0, 1)."""
    q = exact(p)
    if not 0 < q < 1:
        raise ValueError(f"the negative-walk rate is defined for p in (0, 1), got p={p}")
    if n < 2:
        raise ValueError("rates need n >= 2")
    if q > _THIRD:
        return n**-0.5
    if q == _THIRD:
        return n**-0.5 * math.log(n)
    return n ** (-1.5 * float(q))


# ----------------------------------------------------------------------------
# model constants
# ----------------------------------------------------------------------------

_IDENTITY_TOL = 1e-12


@dataclass(frozen=True)
class TheoryConstants:
    p: float
    m1: float
    m2: float
    sigma0sq: float
    checkb: float
    checksigmasq: float
    sigma1sq: float
    sigma2sq: float
    sigma3sq: float
    sigma4sq: float

    @property
    def negative_identity_residual(self) -> float:
        return self.sigma2sq + self.m1**2 * self.sigma1sq - self.checksigmasq

    @property
    def tree_identity_residual(self) -> float:
        return self.sigma3sq + self.sigma4sq - self.sigma1sq


def nu1_mean_rate(p: float) -> float:
    return p / (2 - p)


def nu2_mean_rate(p: float) -> float:
    return p * (1 - p) / ((2 - p) * (3 - 2 * p))


def sigma1sq(p: float) -> float:
    return 2 * p * (1 - p) * (3 - p) / ((3 - 2 * p) * (2 - p) ** 2)


def sigma3sq(p: float) -> float:
    return 2 * p**2 * (1 - p) ** 4 / ((2 - p * p) * (2 - p) ** 2 * (3 - 2 * p))


def sigma4sq(p: float) -> float:
    return 2 * p * (1 - p) * (3 - p**3) / ((2 - p) * (2 - p * p) * (3 - 2 * p))


def theory_constants(p: float, dist: StepDistribution) -> TheoryConstants:
    """All limiting constants for step law ``dist``; both identities are enforced."""
    _check_open_unit(p)
    p = float(p)
    m1, m2 = dist.m1, dist.m2
    checkb = p * m1 / (2 - p)
    tc = TheoryConstants(
        p=p,
        m1=m1,
        m2=m2,
        sigma0sq=dist.sigma0sq,
        checkb=checkb,
        checksigmasq=(m2 - checkb**2) / (3 - 2 * p),
        sigma1sq=sigma1sq(p),
        sigma2sq=m2 / (3 - 2 * p) - p * m1**2 / (2 - p),
        sigma3sq=sigma3sq(p),
        sigma4sq=sigma4sq(p),
    )
    scale = max(1.0, abs(tc.checksigmasq))
    if abs(tc.negative_identity_residual) > _IDENTITY_TOL * scale:
        raise ArithmeticError(f"variance identity failed: residual {tc.negative_identity_residual:g}")
    if abs(tc.tree_identity_residual) > _IDENTITY_TOL:
        raise ArithmeticError(f"tree variance identity failed: residual {tc.tree_identity_residual:g}")
    return tc


# ----------------------------------------------------------------------------
# random recursive tree functionals
# ----------------------------------------------------------------------------


def star_power_mean(i: int, n: int, l: int, p: float) -> float:
    """E p**(l D*_{n,i}) where D*_{n,i} counts the children of vertex i."""
    return a_product(i, n, 1.0 - p**l)


def exact_mean_mu(n: int, p: float) -> float:
    """E mu(T_n) = E sum_i p**D_{n,i} over a random recursive tree of size n."""
    if n < 1:
        raise ValueError("exact_mean_mu needs n >= 1")
    _check_open_unit(p)
    if n == 1:
        return 1.0
    x = 1.0 - p
    terms = []
    acc = 1.0
    for i in range(n - 1, 0, -1):
        acc *= 1.0 - x / i
        terms.append(acc)  # a_{i,n}(1-p)
    a1n = acc
    return p * math.fsum(terms) + (1.0 - p) * a1n + p

verify_euler_gamma()
