"""Positively and negatively step-reinforced random walks.

At time j >= 2 the walk either draws a fresh innovation (eps_j = 1, with
probability p) or repeats the step of a uniformly chosen earlier time U_j,
unchanged in the positive walk and sign-flipped in the negative walk.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .distributions import StepDistribution
from .moments import bn, theory_constants
from .percolation import RecursiveTree, cluster_delta_values, delta_tree, grow_tree, percolate
from .percolation import STREAM_DELTA
from .replicates import run_replicates
from .rng import RandomStream, new_state

POSITIVE = "positive"
NEGATIVE = "negative"
MODES = (POSITIVE, NEGATIVE)

HORIZON_CAP = 10**8
STREAM_WALK = 1

_SIGN = {POSITIVE: 1.0, NEGATIVE: -1.0}


@dataclass(frozen=True)
class WalkParams:
    p: float
    mode: str
    n: int
    seed: int = 0

    def __post_init__(self):
        _check_p(self.p)
        _check_mode(self.mode)
        _check_horizon(self.n)
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True, eq=False)
class WalkTrace:
    """One realised path.

    All sequences are 0-based arrays: ``eps[j-1]`` is eps_j and
    ``choices[j-1]`` is U_j (``choices[0] == 0``).  ``partial`` has n + 1
    entries starting at S_0 = 0.
    """

    mode: str
    eps: np.ndarray
    choices: np.ndarray
    innovations: np.ndarray
    steps: np.ndarray
    partial: np.ndarray

    @property
    def n(self) -> int:
        return int(self.steps.shape[0])

    @property
    def innovation_count(self) -> int:
        return int(self.innovations.shape[0])

    @property
    def terminal(self) -> float:
        return float(self.partial[-1])

    def tree(self) -> RecursiveTree:
        return RecursiveTree(self.choices)


def _check_p(p):
    if not 0.0 < float(p) < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")


def _check_mode(mode):
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")


def _check_horizon(n):
    if not 1 <= n <= HORIZON_CAP:
        raise ValueError(f"horizon must lie in 1..{HORIZON_CAP}, got {n}")


def _injected(n, randomness):
    eps, choices, innov = randomness
    eps = np.asarray(eps, dtype=np.int8)
    if eps.shape != (n,):
        raise ValueError(f"injected eps must have length {n}")
    if eps[0] != 1:
        raise ValueError("eps_1 must be 1")
    if not np.isin(eps, (0, 1)).all():
        raise ValueError("eps entries must be 0 or 1")
    if choices is None:
        if not eps.all():
            raise ValueError("choices are required wherever eps_j = 0")
        ch = np.concatenate([[0], np.ones(n - 1, dtype=np.int64)])
    else:
        raw = list(choices)
        if len(raw) == n - 1:
            raw = [0] + raw
        elif len(raw) != n:
            raise ValueError(f"injected choices must cover times 2..{n}")
        ch = np.array([0] + [int(c) for c in raw[1:]], dtype=np.int64)
        for j in range(2, n + 1):
            if not 1 <= ch[j - 1] <= j - 1:
                raise ValueError(f"choice U_{j} = {ch[j - 1]} is outside 1..{j - 1}")
    innov = np.asarray(innov, dtype=np.float64).ravel()
    needed = int(eps.sum())
    if innov.shape[0] < needed:
        raise ValueError(f"need {needed} innovations, got {innov.shape[0]}")
    return eps, ch, innov[:needed].copy()


def _simulate(mode, dist, p, n, randomness):
    _check_horizon(n)
    if isinstance(randomness, (tuple, list)):
        eps, choices, innov = _injected(n, randomness)
    else:
        _check_p(p)
        if isinstance(randomness, RandomStream):
            stream = randomness
        elif isinstance(randomness, (int, np.integer)) and not isinstance(randomness, bool):
            stream = RandomStream(int(randomness), 0, STREAM_WALK)
        else:
            raise TypeError("randomness must be a seed, a RandomStream or (eps, choices, innovations)")
        kind, values, cdf, sd = dist.kernel_args()
        eps = np.empty(n, dtype=np.int8)
        choices = np.empty(n, dtype=np.int64)
        innov = np.empty(n, dtype=np.float64)
        count = K.draw_walk_randomness(stream.state, float(p), n, kind, values, cdf, sd, eps, choices, innov)
        innov = innov[:count].copy()
    steps = np.empty(n, dtype=np.float64)
    status = K.walk_steps(eps, choices, innov, _SIGN[mode], steps)
    if status == -2:
        raise ValueError("innovations ran out before time n")
    if status >= 0:
        raise ValueError(f"invalid choice at time {status + 1}")
    partial = np.concatenate([[0.0], np.cumsum(steps)])
    return WalkTrace(mode, eps, choices, innov, steps, partial)


def simulate_positive(dist: StepDistribution, p, n: int, randomness=0) -> WalkTrace:
    """Positive walk: repeated steps are copied.

    ``randomness`` is a seed, a :class:`RandomStream`, or an injected tuple
    ``(eps, choices, innovations)`` where ``choices`` may omit the unused
    first entry and may be ``None`` when every eps is 1.
    """
    return _simulate(POSITIVE, dist, p, n, randomness)


def simulate_negative(dist: StepDistribution, p, n: int, randomness=0) -> WalkTrace:
    """Negative walk: repeated steps are copied with their sign flipped."""
    return _simulate(NEGATIVE, dist, p, n, randomness)


def simulate(mode: str, dist: StepDistribution, p, n: int, randomness=0) -> WalkTrace:
    _check_mode(mode)
    return _simulate(mode, dist, p, n, randomness)


def normalization(mode: str, dist: StepDistribution, p, n: int) -> tuple[float, float]:
    """(centre, scale) such that (S_n - centre) / scale is the normalized statistic."""
    _check_mode(mode)
    if mode == POSITIVE:
        if dist.sigma0sq <= 0:
            raise ValueError("normalization needs a step law with positive variance")
        return dist.m1 * n, dist.sigma0 * math.sqrt(bn(n, p))
    tc = theory_constants(p, dist)
    if tc.checksigmasq <= 0:
        raise ValueError("the negative-walk limit variance vanishes for this law")
    return tc.checkb * n, math.sqrt(tc.checksigmasq * n)


def normalized_statistic(trace: WalkTrace, dist: StepDistribution, p) -> float:
    centre, scale = normalization(trace.mode, dist, p, trace.n)
    return (trace.terminal - centre) / scale


def representation_weights(trace: WalkTrace) -> np.ndarray:
    """Integer weight of each innovation in S_n: cluster size or cluster Delta."""
    tree = trace.tree()
    if trace.mode == POSITIVE:
        return percolate(tree, trace.eps).occupancy
    return cluster_delta_values(tree, trace.eps)


def representation_check(trace: WalkTrace, rel: float = 1e-9) -> bool:
    """Recompute S_n as sum_j w_j X_j through the cluster census and compare."""
    w = representation_weights(trace)
    if w.shape[0] != trace.innovation_count:
        return False
    terms = w * trace.innovations
    total = math.fsum(terms.tolist())
    scale = math.fsum(np.abs(terms).tolist())
    return abs(total - trace.terminal) <= rel * max(scale, 1.0)


def sample_delta(k: int, randomness=0) -> int:
    """Delta of a fresh uniform recursive tree of size k."""
    if k < 1:
        raise ValueError(f"tree size must be positive, got {k}")
    if not isinstance(randomness, RandomStream):
        randomness = RandomStream(int(randomness), 0, STREAM_DELTA)
    return delta_tree(grow_tree(k, randomness))


def sample_terminal(mode: str, dist: StepDistribution, p, n: int, replicates: int, seed: int, threads=None):
    """S_n of ``replicates`` independent walks.

    Replicate r uses the same draws as ``simulate(mode, dist, p, n,
    RandomStream(seed, r, STREAM_WALK))``, so the two modes are coupled.
    """
    _check_mode(mode)
    _check_p(p)
    _check_horizon(n)
    kind, values, cdf, sd = dist.kernel_args()
    sign = _SIGN[mode]

    def chunk(first, count):
        out = np.empty(count)
        K.terminal_sums(new_state(seed, 0, STREAM_WALK), float(p), n, sign, kind, values, cdf, sd, first, count, out)
        return out

    return run_replicates(chunk, replicates, threads)


def sample_normalized(mode: str, dist: StepDistribution, p, n: int, replicates: int, seed: int, threads=None):
    centre, scale = normalization(mode, dist, p, n)
    return (sample_terminal(mode, dist, p, n, replicates, seed, threads) - centre) / scale
