"""Bernoulli bond percolation on finite graphs and the degree-count normal bound.

Vertices are labelled 1..n in the public API and stored 0-based.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import _kernels as K
from .replicates import run_replicates
from .rng import RandomStream, new_state

STREAM_GRAPH = 21


@dataclass(frozen=True, eq=False)
class Graph:
    n: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("a graph needs at least one vertex")
        clean = []
        for u, v in self.edges:
            u, v = int(u), int(v)
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (1 <= u <= self.n and 1 <= v <= self.n):
                raise ValueError(f"edge ({u}, {v}) has an endpoint outside 1..{self.n}")
            clean.append((u, v))
        object.__setattr__(self, "edges", tuple(clean))

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def degree(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        for u, v in self.edges:
            deg[u - 1] += 1
            deg[v - 1] += 1
        return deg

    def endpoint_arrays(self):
        if not self.edges:
            return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
        e = np.asarray(self.edges, dtype=np.int64) - 1
        return np.ascontiguousarray(e[:, 0]), np.ascontiguousarray(e[:, 1])

    def relabel(self, perm) -> "Graph":
        """Apply the vertex map i -> perm[i-1]."""
        perm = list(perm)
        return Graph(self.n, tuple((perm[u - 1], perm[v - 1]) for u, v in self.edges))

    @classmethod
    def complete(cls, n: int) -> "Graph":
        return cls(n, tuple((i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1)))

    @classmethod
    def path(cls, n: int) -> "Graph":
        return cls(n, tuple((i, i + 1) for i in range(1, n)))

    @classmethod
    def from_tree(cls, tree) -> "Graph":
        return cls(tree.n, tuple(tree.edges()))


def parse_edge_list(text: str) -> Graph:
    """Parse ``n m`` followed by m lines ``u v`` (1-based)."""
    lines = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines or len(lines[0]) != 2:
        raise ValueError("edge list must start with a line 'n m'")
    try:
        n, m = int(lines[0][0]), int(lines[0][1])
        edges = [(int(a), int(b)) for a, b in lines[1:]]
    except ValueError as exc:
        raise ValueError(f"malformed edge list: {exc}") from None
    if len(edges) != m:
        raise ValueError(f"header announces {m} edges, found {len(edges)}")
    return Graph(n, tuple(edges))


def read_edge_list(path) -> Graph:
    return parse_edge_list(Path(path).read_text())


def _check_ptilde(ptilde):
    if not 0.0 < ptilde < 1.0:
        raise ValueError(f"ptilde must lie in (0, 1), got {ptilde}")


def percolate_graph(graph: Graph, ptilde: float, randomness=0) -> np.ndarray:
    """Retained degree of every vertex after keeping each edge with probability ptilde."""
    _check_ptilde(ptilde)
    if not isinstance(randomness, RandomStream):
        randomness = RandomStream(int(randomness), 0, STREAM_GRAPH)
    eu, ev = graph.endpoint_arrays()
    deg = np.empty(graph.n, dtype=np.int64)
    K.percolate_edges(randomness.state, float(ptilde), eu, ev, deg)
    return deg


def degree_count(retained: np.ndarray, d: int) -> int:
    """N_{n,d}: number of vertices whose retained degree is d."""
    return int(np.count_nonzero(np.asarray(retained) == d))


def exact_mean_count(graph: Graph, ptilde: float, d: int) -> float:
    """E N_{n,d}; each retained degree is Binomial(d_i, ptilde)."""
    if d < 0:
        raise ValueError("d must be nonnegative")
    terms = [math.comb(int(di), d) * ptilde**d * (1 - ptilde) ** (int(di) - d) for di in graph.degree if di >= d]
    return math.fsum(terms)


def be_bound(graph: Graph, ptilde: float, sigma2: float) -> float:
    """Normal-approximation bound for N_{n,d} with the absolute constant taken as 1.

    (1/sigma2) * sqrt(m q(1-q) + q^3 (1-q)^3 sum_i d_i^3), q = ptilde.  Only
    ratios of this quantity are meaningful.
    """
    if not sigma2 > 0:
        raise ValueError("sigma2 must be positive")
    q = ptilde
    cubes = float(np.sum(graph.degree.astype(np.float64) ** 3))
    return math.sqrt(graph.m * q * (1 - q) + q**3 * (1 - q) ** 3 * cubes) / sigma2


@dataclass(frozen=True)
class DegreeCountResult:
    d: int
    mean: float
    variance: float
    replicates: int
    count: int | None = None

    @property
    def stderr(self) -> float:
        return math.sqrt(self.variance / self.replicates)


def sample_degree_histograms(graph: Graph, ptilde: float, max_degree: int, replicates: int, seed: int, threads=None):
    """(replicates, max_degree + 1) array of N_{n,d} counts."""
    _check_ptilde(ptilde)
    eu, ev = graph.endpoint_arrays()

    def chunk(first, count):
        out = np.empty((count, max_degree + 1), dtype=np.int64)
        K.degree_histograms(new_state(seed, 0, STREAM_GRAPH), float(ptilde), graph.n, eu, ev, first, count, out)
        return out

    return run_replicates(chunk, replicates, threads)


def mc_degree_counts(graph: Graph, ptilde: float, ds, replicates: int, seed: int, threads=None):
    """Monte Carlo mean and variance of N_{n,d} for each d in ``ds``."""
    ds = [int(d) for d in ds]
    hist = sample_degree_histograms(graph, ptilde, max(ds), replicates, seed, threads)
    out = []
    for d in ds:
        col = hist[:, d].astype(np.float64)
        out.append(DegreeCountResult(d, float(col.mean()), float(col.var(ddof=1)), replicates))
    return out
