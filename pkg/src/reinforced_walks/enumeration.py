"""Exhaustive enumeration over every (U, eps) configuration at small n.

Each choice vector (U_2..U_n) has weight 1/(n-1)! and an eps pattern with
i innovations has weight p**(i-1) (1-p)**(n-i).  Because that weight depends
only on the number of clusters, configurations are first counted per
summary (an integer census), and probabilities are attached afterwards in
exact rational arithmetic.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numba import njit

from .distributions import StepDistribution, integer_support
from .gof import normal_cdf
from .moments import exact
from .walks import MODES, POSITIVE, normalization

MAX_PERCOLATION_N = 10
MAX_TREE_N = 10
MAX_WALK_N = 8
STATE_CAP = 10**8

SUMMARY_SIZES = 0
SUMMARY_DELTAS = 1


# ----------------------------------------------------------------------------
# kernels
# ----------------------------------------------------------------------------


@njit(cache=True)
def _leaf_code(n, kind, digits, cid, parity, sizes, delta, hist):
    """Census of one configuration; digit d of vertex j encodes U = d >> 1, eps = d & 1."""
    k = 1
    cid[0] = 0
    parity[0] = 0
    sizes[0] = 1
    delta[0] = 1
    for j in range(1, n):
        d = digits[j]
        u = d >> 1
        if d & 1:
            cid[j] = k
            parity[j] = 0
            sizes[k] = 1
            delta[k] = 1
            k += 1
        else:
            c = cid[u]
            cid[j] = c
            parity[j] = 1 - parity[u]
            sizes[c] += 1
            delta[c] += 1 if parity[j] == 0 else -1
    code = 0
    if kind == SUMMARY_SIZES:
        for s in range(n + 1):
            hist[s] = 0
        for c in range(k):
            hist[sizes[c]] += 1
        for s in range(n, 0, -1):
            code = code * (n + 1) + hist[s]
    else:
        for s in range(2 * n + 1):
            hist[s] = 0
        for c in range(k):
            hist[delta[c] + n] += 1
        for s in range(2 * n, -1, -1):
            code = code * (n + 1) + hist[s]
    return code


@njit(cache=True)
def _enumerate_configs(n, kind, keys, counts, codes_out):
    """Odometer over all configurations.

    When ``keys`` is nonempty each leaf code is binned into ``counts`` by
    binary search (returns -1 on an unknown code); otherwise codes are written
    to ``codes_out`` in odometer order.  Returns the number of leaves.
    """
    digits = np.zeros(n, dtype=np.int64)
    cid = np.empty(n, dtype=np.int64)
    parity = np.empty(n, dtype=np.int64)
    sizes = np.empty(n, dtype=np.int64)
    delta = np.empty(n, dtype=np.int64)
    hist = np.empty(2 * n + 1, dtype=np.int64)
    nkeys = keys.shape[0]
    leaves = 0
    while True:
        code = _leaf_code(n, kind, digits, cid, parity, sizes, delta, hist)
        if nkeys > 0:
            idx = np.searchsorted(keys, code)
            if idx >= nkeys or keys[idx] != code:
                return -1
            counts[idx] += 1
        else:
            codes_out[leaves] = code
        leaves += 1
        j = n - 1
        while j >= 1:
            digits[j] += 1
            if digits[j] < 2 * j:
                break
            digits[j] = 0
            j -= 1
        if j < 1:
            return leaves


@njit(cache=True)
def _enumerate_trees(n, p, mu, s2, delta, degpow, lmax):
    """Odometer over all recursive trees; per-tree mu, sigma^2, Delta and sum_i D_i^l."""
    parent = np.zeros(n, dtype=np.int64)
    deg = np.empty(n, dtype=np.int64)
    depth = np.empty(n, dtype=np.int64)
    t = 0
    while True:
        for i in range(n):
            deg[i] = 0
        depth[0] = 0
        dl = 1
        for j in range(1, n):
            deg[j] += 1
            deg[parent[j]] += 1
            depth[j] = depth[parent[j]] + 1
            dl += 1 if depth[j] % 2 == 0 else -1
        m = 0.0
        v = 0.0
        for i in range(n):
            a = p ** deg[i]
            m += a
            v += a - a * a
        e = 0.0
        for j in range(1, n):
            e += p ** (deg[parent[j]] + deg[j] - 1)
        mu[t] = m
        s2[t] = v + 2.0 * (1.0 - p) * e
        delta[t] = dl
        for l in range(1, lmax + 1):
            acc = 0
            for i in range(n):
                acc += deg[i] ** l
            degpow[t, l - 1] = acc
        t += 1
        j = n - 1
        while j >= 1:
            parent[j] += 1
            if parent[j] < j:
                break
            parent[j] = 0
            j -= 1
        if j < 1:
            return t


# ----------------------------------------------------------------------------
# helpers
# ----------------------------------------------------------------------------


def _partitions(n, largest=None):
    largest = n if largest is None else largest
    if n == 0:
        yield ()
        return
    for first in range(min(n, largest), 0, -1):
        for rest in _partitions(n - first, first):
            yield (first,) + rest


def _size_code(n, parts):
    hist = [0] * (n + 1)
    for s in parts:
        hist[s] += 1
    code = 0
    for s in range(n, 0, -1):
        code = code * (n + 1) + hist[s]
    return code


def _decode(code, n, digits):
    out = []
    for _ in range(digits):
        code, r = divmod(code, n + 1)
        out.append(r)
    return out


def _eps_weight(p: Fraction, n: int, k: int) -> Fraction:
    return p ** (k - 1) * (1 - p) ** (n - k)


def _moments(pmf: dict) -> tuple[float, float]:
    mean = sum(x * q for x, q in pmf.items())
    var = sum((x - mean) ** 2 * q for x, q in pmf.items())
    return float(mean), float(var)


def _as_float_pmf(pmf: dict) -> dict:
    return {k: float(v) for k, v in sorted(pmf.items())}


# ----------------------------------------------------------------------------
# percolation census
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class PercolationEnumeration:
    """Exact law of the cluster census at size n.

    ``partition_pmf`` maps a sorted tuple of cluster sizes to its exact
    probability; ``configurations`` is the number of (U, eps) leaves visited.
    """

    n: int
    p: float
    partition_pmf: dict
    configurations: int

    @property
    def total(self) -> Fraction:
        return sum(self.partition_pmf.values(), Fraction(0))

    def pmf_of(self, fn) -> dict:
        out = defaultdict(Fraction)
        for parts, q in self.partition_pmf.items():
            out[fn(parts)] += q
        return dict(out)

    def nu_pmf(self, k: int) -> dict:
        return _as_float_pmf(self.pmf_of(lambda parts: sum(1 for s in parts if s == k)))

    def z_pmf(self, l: int) -> dict:
        return _as_float_pmf(self.pmf_of(lambda parts: sum(s**l for s in parts)))

    def nu_moments(self, k: int) -> tuple[float, float]:
        return _moments(self.pmf_of(lambda parts: sum(1 for s in parts if s == k)))

    def z_moments(self, l: int) -> tuple[float, float]:
        """Exact (E Z_l, Var Z_l) for integer l >= 0."""
        if l < 0 or l != int(l):
            raise ValueError("enumerated Z_l moments need a nonnegative integer l")
        return _moments(self.pmf_of(lambda parts: sum(s**l for s in parts)))

    def ez(self, l: int) -> float:
        return self.z_moments(l)[0]

    def var_z(self, l: int) -> float:
        return self.z_moments(l)[1]


def _size_counts(n: int):
    parts = list(_partitions(n))
    codes = np.array([_size_code(n, pt) for pt in parts], dtype=np.int64)
    order = np.argsort(codes)
    keys = codes[order]
    counts = np.zeros(keys.shape[0], dtype=np.int64)
    leaves = _enumerate_configs(n, SUMMARY_SIZES, keys, counts, np.zeros(0, dtype=np.int64))
    if leaves < 0:
        raise RuntimeError("enumeration produced a census outside the partition table")
    return [parts[i] for i in order], counts, leaves


def enum_percolation(n: int, p) -> PercolationEnumeration:
    """Exact cluster-census law by visiting all (n-1)! 2^(n-1) configurations."""
    if not 1 <= n <= MAX_PERCOLATION_N:
        raise ValueError(f"enumeration supports 1 <= n <= {MAX_PERCOLATION_N}, got {n}")
    q = exact(p)
    if not 0 < q < 1:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    parts, counts, leaves = _size_counts(n)
    trees = math.factorial(n - 1)
    pmf = {}
    for pt, c in zip(parts, counts.tolist()):
        if c:
            pmf[pt] = Fraction(c, trees) * _eps_weight(q, n, len(pt))
    return PercolationEnumeration(n, float(p), pmf, leaves)


# ----------------------------------------------------------------------------
# tree functionals
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class TreeEnumeration:
    n: int
    p: float
    trees: int
    mean_mu: float
    var_mu: float
    mean_sigma2: float
    degree_power_sums: dict  # l -> exact sum_i E D_{n,i}^l as a Fraction


def enum_tree_functionals(n: int, p: float, lmax: int = 4) -> TreeEnumeration:
    """Exact averages over all (n-1)! recursive trees of size n."""
    if not 1 <= n <= MAX_TREE_N:
        raise ValueError(f"enumeration supports 1 <= n <= {MAX_TREE_N}, got {n}")
    if not 0 < p < 1:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    t = math.factorial(n - 1)
    mu = np.empty(t)
    s2 = np.empty(t)
    delta = np.empty(t, dtype=np.int64)
    degpow = np.empty((t, lmax), dtype=np.int64)
    _enumerate_trees(n, float(p), mu, s2, delta, degpow, lmax)
    mean = math.fsum(mu.tolist()) / t
    var = math.fsum(((mu - mean) ** 2).tolist()) / t
    sums = {l: Fraction(int(degpow[:, l - 1].sum()), t) for l in range(1, lmax + 1)}
    return TreeEnumeration(n, float(p), t, mean, var, math.fsum(s2.tolist()) / t, sums)


def enum_conditional_nu1(parents, p) -> tuple[float, float]:
    """Exact (E, Var) of nu_1 given a fixed tree, averaging over all eps patterns."""
    parent = [0] + [int(u) for u in parents]
    n = len(parent)
    q = exact(p)
    pmf = defaultdict(Fraction)
    for mask in range(2 ** (n - 1)):
        eps = [1] + [(mask >> (j - 1)) & 1 for j in range(1, n)]
        deg = [0] * n
        for j in range(1, n):
            if not eps[j]:
                deg[j] += 1
                deg[parent[j] - 1] += 1
        k = sum(eps)
        pmf[sum(1 for d in deg if d == 0)] += _eps_weight(q, n, k)
    return _moments(pmf)


def enum_delta_pmf(k: int) -> dict:
    """Exact law of Delta(T_k) as {value: Fraction}."""
    if not 1 <= k <= MAX_TREE_N:
        raise ValueError(f"enumeration supports 1 <= k <= {MAX_TREE_N}, got {k}")
    t = math.factorial(k - 1)
    delta = np.empty(t, dtype=np.int64)
    _enumerate_trees(k, 0.5, np.empty(t), np.empty(t), delta, np.empty((t, 1), dtype=np.int64), 1)
    values, counts = np.unique(delta, return_counts=True)
    return {int(v): Fraction(int(c), t) for v, c in zip(values, counts)}


# ----------------------------------------------------------------------------
# walk laws
# ----------------------------------------------------------------------------


@dataclass(frozen=True)
class WalkEnumeration:
    """Exact law of S_n; atoms are stored as exact rationals."""

    n: int
    p: float
    mode: str
    pmf: dict  # Fraction atom -> Fraction probability
    dk: float | None  # exact Kolmogorov distance to the normal approximation, if defined

    @property
    def total(self) -> Fraction:
        return sum(self.pmf.values(), Fraction(0))

    @property
    def mean(self) -> Fraction:
        return sum((x * q for x, q in self.pmf.items()), Fraction(0))

    @property
    def variance(self) -> Fraction:
        m = self.mean
        return sum(((x - m) ** 2 * q for x, q in self.pmf.items()), Fraction(0))

    def float_pmf(self) -> dict:
        return {float(x): float(q) for x, q in sorted(self.pmf.items())}


def nominal_states(n: int, support_size: int) -> int:
    """(n-1)! * sum over eps patterns of s**i(n) = (n-1)! s (1+s)**(n-1)."""
    return math.factorial(n - 1) * support_size * (1 + support_size) ** (n - 1)


def _weight_groups(n: int, mode: str):
    """{sorted tuple of innovation weights: configuration count}."""
    if mode == POSITIVE:
        parts, counts, _ = _size_counts(n)
        return {pt: int(c) for pt, c in zip(parts, counts.tolist()) if c}
    leaves = math.factorial(n - 1) * 2 ** (n - 1)
    codes = np.empty(leaves, dtype=np.int64)
    _enumerate_configs(n, SUMMARY_DELTAS, np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64), codes)
    uniq, counts = np.unique(codes, return_counts=True)
    groups = {}
    for code, c in zip(uniq.tolist(), counts.tolist()):
        hist = _decode(code, n, 2 * n + 1)
        weights = tuple(w - n for w, h in enumerate(hist) for _ in range(h))
        groups[weights] = int(c)
    return groups


def _weighted_sum_pmf(weights, step_pmf: dict) -> dict:
    out = {0: Fraction(1)}
    for w in weights:
        if w == 0:
            continue
        nxt = defaultdict(Fraction)
        for s, q in out.items():
            for x, qx in step_pmf.items():
                nxt[s + w * x] += q * qx
        out = nxt
    return out


def exact_dk(pmf: dict, centre: float, scale: float) -> float:
    """sup_x |F(x) - Phi((x - centre)/scale)| for a finite atomic law, checked on both sides of every atom."""
    best = 0.0
    below = Fraction(0)
    for x in sorted(pmf):
        phi = normal_cdf((float(x) - centre) / scale)
        above = below + pmf[x]
        best = max(best, abs(float(below) - phi), abs(float(above) - phi))
        below = above
    return best


def enum_walk_pmf(n: int, p, dist: StepDistribution, mode: str = POSITIVE) -> WalkEnumeration:
    """Exact law of S_n for a finite-support step law, plus its exact d_K.

    d_K is reported against the normalized statistic's normal limit when that
    normalization is defined for (mode, p) and None otherwise.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if not 1 <= n <= MAX_WALK_N:
        raise ValueError(f"walk enumeration supports 1 <= n <= {MAX_WALK_N}, got {n}")
    q = exact(p)
    if not 0 < q < 1:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    scale, ints = integer_support(dist)
    states = nominal_states(n, len(ints))
    if states > STATE_CAP:
        raise ValueError(f"enumeration would visit {states} states, above the cap of {STATE_CAP}")
    step_pmf = defaultdict(Fraction)
    for v, pr in zip(ints, dist.probs):
        step_pmf[v] += Fraction(repr(pr))
    trees = math.factorial(n - 1)
    law = defaultdict(Fraction)
    for weights, count in _weight_groups(n, mode).items():
        w = Fraction(count, trees) * _eps_weight(q, n, len(weights))
        for s, qs in _weighted_sum_pmf(weights, step_pmf).items():
            law[Fraction(s, scale)] += w * qs
    pmf = dict(sorted(law.items()))
    try:
        centre, sd = normalization(mode, dist, float(p), n)
    except ValueError:
        dk = None
    else:
        dk = exact_dk(pmf, centre, sd)
    return WalkEnumeration(n, float(p), mode, pmf, dk)
