"""Kolmogorov distances to the normal law, DKW widths and rate experiments."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from .distributions import StepDistribution

TARGETS = ("positive-walk", "negative-walk", "nu1", "mu-tree")
MIN_REPLICATES = 1000


def normal_cdf(x):
    """Standard normal cdf via the complementary error function."""
    out = special.ndtr(x)
    return float(out) if np.ndim(out) == 0 else out


def dk_sample(sample, mean: float = 0.0, sd: float = 1.0) -> float:
    """Kolmogorov distance between the empirical law of ``(sample - mean)/sd`` and N(0,1)."""
    x = np.asarray(sample, dtype=np.float64).ravel()
    if x.size == 0:
        raise ValueError("empty sample")
    if not sd > 0:
        raise ValueError("sd must be positive")
    z = np.sort((x - mean) / sd)
    phi = special.ndtr(z)
    N = z.size
    i = np.arange(1, N + 1)
    return float(max(np.max(i / N - phi), np.max(phi - (i - 1) / N)))


def dkw_halfwidth(N: int, alpha: float = 0.05) -> float:
    if N < 1:
        raise ValueError("N must be positive")
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    return math.sqrt(math.log(2 / alpha) / (2 * N))


@dataclass(frozen=True)
class RateRow:
    n: int
    N: int
    dk: float
    dkw: float
    delta: float

    @property
    def ratio(self) -> float:
        return self.dk / self.delta


@dataclass(frozen=True)
class RateTable:
    target: str
    p: float
    alpha: float
    rows: tuple
    slope: float | None
    stderr: float | None
    inconclusive: bool = False
    warnings: tuple = field(default=())

    @property
    def ns(self):
        return [r.n for r in self.rows]

    @property
    def dks(self):
        return [r.dk for r in self.rows]

    def row(self, n: int) -> RateRow:
        for r in self.rows:
            if r.n == n:
                return r
        raise KeyError(n)

    def decreasing_beyond_noise(self) -> bool:
        """Each consecutive drop in d_K exceeds the sum of the two DKW widths."""
        return all(a.dk - b.dk > a.dkw + b.dkw for a, b in zip(self.rows, self.rows[1:]))

    def ratio_growth(self) -> float:
        """Last-row ratio d_K/delta divided by the first-row ratio."""
        return self.rows[-1].ratio / self.rows[0].ratio


def fit_slope(table) -> tuple[float, float]:
    """OLS slope of ln d_K on ln n, with its standard error.

    Accepts a RateTable or a sequence of (n, d_K) pairs; rows with d_K = 0
    are skipped.
    """
    pairs = [(r.n, r.dk) for r in table.rows] if isinstance(table, RateTable) else list(table)
    pts = [(math.log(n), math.log(d)) for n, d in pairs if d > 0]
    if len(pts) < 3:
        raise ValueError("slope fitting needs at least 3 grid points with positive d_K")
    x, y = np.array(pts).T
    xc = x - x.mean()
    sxx = float(xc @ xc)
    slope = float(xc @ (y - y.mean())) / sxx
    resid = y - y.mean() - slope * xc
    return slope, math.sqrt(float(resid @ resid) / (len(pts) - 2) / sxx)


# ----------------------------------------------------------------------------
# rate experiments
# ----------------------------------------------------------------------------


def _statistic_sampler(target, dist, p):
    """(sampler(n, N, seed, threads) -> normalized sample, rate(n))."""
    from . import moments, percolation, walks

    pf = float(p)  # p itself may be exact; branch points of the rates read it exactly
    if target == "positive-walk":
        if dist is None:
            raise ValueError("positive-walk needs a step distribution")
        if not 0.5 <= p < 1:
            raise ValueError("positive-walk rates are defined for p in [1/2, 1)")
        return (
            lambda n, N, seed, threads: walks.sample_normalized(walks.POSITIVE, dist, pf, n, N, seed, threads),
            lambda n: moments.rate_delta1(n, p),
        )
    if target == "negative-walk":
        if dist is None:
            raise ValueError("negative-walk needs a step distribution")
        return (
            lambda n, N, seed, threads: walks.sample_normalized(walks.NEGATIVE, dist, pf, n, N, seed, threads),
            lambda n: moments.rate_delta2(n, p),
        )
    if target == "nu1":
        rate, sd = moments.nu1_mean_rate(pf), math.sqrt(moments.sigma1sq(pf))

        def sample_nu1(n, N, seed, threads):
            nu1, _ = percolation.sample_cluster_counts(n, pf, N, seed, threads)
            return (nu1 - n * rate) / (sd * math.sqrt(n))

        return sample_nu1, lambda n: n**-0.5
    if target == "mu-tree":
        rate, sd = moments.nu1_mean_rate(pf), math.sqrt(moments.sigma3sq(pf))

        def sample_mu(n, N, seed, threads):
            mu, _ = percolation.sample_tree_functionals(n, pf, N, seed, threads)
            return (mu - n * rate) / (sd * math.sqrt(n))

        return sample_mu, lambda n: n**-0.5
    raise ValueError(f"unknown target {target!r}; expected one of {TARGETS}")


def rate_experiment(
    target: str,
    dist: StepDistribution | None,
    p: float,
    n_grid,
    N: int,
    seed: int,
    alpha: float = 0.05,
    threads=None,
) -> RateTable:
    """Estimate d_K of the normalized statistic over a grid of n.

    Grid point k uses seed ``seed + k``.  The table is flagged inconclusive
    when the DKW width is not below a third of the rate at the largest n.
    """
    if not 0 < p < 1:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    if N < MIN_REPLICATES:
        raise ValueError(f"rate experiments need N >= {MIN_REPLICATES}")
    grid = sorted(int(n) for n in n_grid)
    if len(grid) < 2 or grid[0] < 2:
        raise ValueError("n_grid needs at least two sizes, all >= 2")
    sampler, rate = _statistic_sampler(target, dist, p)
    width = dkw_halfwidth(N, alpha)
    rows = []
    notes = []
    for k, n in enumerate(grid):
        dk = dk_sample(sampler(n, N, seed + k, threads))
        rows.append(RateRow(n, N, dk, width, rate(n)))
        if width > dk:
            notes.append(f"n={n}: DKW width {width:.3g} exceeds the estimated d_K {dk:.3g}")
    inconclusive = width >= rate(grid[-1]) / 3
    if inconclusive:
        notes.append(f"DKW width {width:.3g} is not below delta(n_max)/3 = {rate(grid[-1]) / 3:.3g}")
    for msg in notes:
        warnings.warn(msg, stacklevel=2)
    try:
        slope, err = fit_slope([(r.n, r.dk) for r in rows])
    except ValueError:
        slope = err = None
    return RateTable(target, float(p), alpha, tuple(rows), slope, err, inconclusive, tuple(notes))
