"""Random recursive trees and the Bernoulli bond percolation driven by eps.

Edge ``(parent[j], j)`` is open when ``eps[j] == 0``; the open clusters are
exactly the groups of steps sharing one innovation, so the cluster census
here is the same object the walks are built from.

Vertices are labelled 1..n.  Arrays are stored 0-based, so vertex ``v`` sits
at index ``v - 1``; ``parent`` holds 1-based labels with ``parent[0] == 0``.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _kernels as K
from .replicates import run_replicates
from .rng import as_stream, new_state

# stream tags for the batch samplers
STREAM_CLUSTERS = 11
STREAM_TREES = 12
STREAM_DELTA = 13
STREAM_DEGREES = 14
STREAM_STAR = 15


@dataclass(frozen=True, eq=False)
class RecursiveTree:
    parent: np.ndarray

    def __post_init__(self):
        par = np.ascontiguousarray(self.parent, dtype=np.int64)
        n = par.shape[0]
        if n < 1:
            raise ValueError("a recursive tree needs at least one vertex")
        if par[0] != 0:
            raise ValueError("vertex 1 is the root; parent[0] must be 0")
        idx = np.arange(2, n + 1)
        bad = (par[1:] < 1) | (par[1:] >= idx)
        if bad.any():
            j = int(idx[bad][0])
            raise ValueError(f"parent of vertex {j} must lie in 1..{j - 1}, got {par[j - 1]}")
        object.__setattr__(self, "parent", par)

    @classmethod
    def from_parents(cls, parents) -> "RecursiveTree":
        """Build from the parents of vertices 2..n (empty for the single root)."""
        return cls(np.concatenate([[0], np.asarray(parents, dtype=np.int64)]))

    @property
    def n(self) -> int:
        return int(self.parent.shape[0])

    def parent_of(self, j: int) -> int:
        if not 2 <= j <= self.n:
            raise IndexError(f"vertex {j} has no parent in a tree of size {self.n}")
        return int(self.parent[j - 1])

    def edges(self) -> list[tuple[int, int]]:
        return [(int(self.parent[j - 1]), j) for j in range(2, self.n + 1)]

    def is_edge(self, i: int, j: int) -> bool:
        """Edge indicator I(U_j = i) for i < j."""
        return 1 <= i < j <= self.n and self.parent[j - 1] == i

    def __eq__(self, other):
        return isinstance(other, RecursiveTree) and np.array_equal(self.parent, other.parent)

    def __hash__(self):
        return hash(self.parent.tobytes())

    def __repr__(self):
        return f"RecursiveTree(parents={self.parent[1:].tolist()})"


@dataclass(frozen=True, eq=False)
class ClusterStats:
    """Cluster census of one percolation configuration.

    ``cluster_id[v-1]`` is the 0-based index of vertex v's cluster, clusters
    being numbered by the innovation that opened them; ``cluster_sizes`` is
    therefore also the occupancy sequence N_j(n).
    """

    n: int
    cluster_id: np.ndarray
    cluster_sizes: np.ndarray

    @property
    def occupancy(self) -> np.ndarray:
        return self.cluster_sizes

    @property
    def clusters(self) -> int:
        return int(self.cluster_sizes.shape[0])

    @cached_property
    def nu(self) -> dict[int, int]:
        """Sparse map size k -> number of clusters of size k."""
        return dict(sorted(Counter(self.cluster_sizes.tolist()).items()))

    def nu_k(self, k: int) -> int:
        return self.nu.get(k, 0)


@dataclass(frozen=True)
class TreeFunctionals:
    mu: float
    sigma2: float
    degrees: np.ndarray


def grow_tree(n: int, randomness=0) -> RecursiveTree:
    """Uniform random recursive tree of size n (vertex j picks a parent in 1..j-1)."""
    if n < 1:
        raise ValueError(f"tree size must be positive, got {n}")
    stream = as_stream(randomness)
    parent = np.empty(n, dtype=np.int64)
    K.draw_tree(stream.state, n, parent)
    return RecursiveTree(parent)


def _eps_array(eps, n: int) -> np.ndarray:
    e = np.asarray(eps, dtype=np.int8)
    if e.shape != (n,):
        raise ValueError(f"eps must have length {n}, got shape {e.shape}")
    if e[0] != 1:
        raise ValueError("eps[1] must be 1")
    if not np.isin(e, (0, 1)).all():
        raise ValueError("eps entries must be 0 or 1")
    return e


def percolate(tree: RecursiveTree, eps) -> ClusterStats:
    """Clusters of the open edges: vertex j joins its parent's cluster when eps_j = 0."""
    n = tree.n
    e = _eps_array(eps, n)
    cid = np.empty(n, dtype=np.int64)
    sizes = np.empty(n, dtype=np.int64)
    k = K.census(e, tree.parent, cid, sizes)
    return ClusterStats(n, cid, sizes[:k].copy())


def z_stat(stats: ClusterStats, l: float) -> float:
    """Z_l = sum_k k**l nu_k; l = 0 gives the cluster count and l = 1 gives n."""
    if l == 0:
        return float(stats.clusters)
    if l == 1:
        return float(stats.n)
    return float(np.sum(stats.cluster_sizes.astype(np.float64) ** l))


def conditional_variance(stats: ClusterStats, sigma0sq: float) -> float:
    """Variance of the positive walk given the reinforcement structure: sigma0^2 Z_2."""
    if sigma0sq < 0:
        raise ValueError("sigma0sq must be nonnegative")
    return sigma0sq * z_stat(stats, 2)


def delta_tree(tree: RecursiveTree) -> int:
    """Vertices at even depth minus vertices at odd depth."""
    return int(K.depth_parity_delta(tree.parent))


def cluster_subtrees(tree: RecursiveTree, eps) -> list[RecursiveTree]:
    """One rooted tree per cluster, vertices relabelled 1..k by order of appearance.

    Clusters come in innovation order.  Empty clusters are not represented.
    """
    stats = percolate(tree, eps)
    local = np.empty(tree.n, dtype=np.int64)  # 1-based label inside the cluster
    members: list[list[int]] = [[] for _ in range(stats.clusters)]
    for v in range(1, tree.n + 1):
        c = int(stats.cluster_id[v - 1])
        m = members[c]
        if not m:
            m.append(0)
        else:
            m.append(int(local[tree.parent[v - 1] - 1]))
        local[v - 1] = len(m)
    return [RecursiveTree(np.asarray(m, dtype=np.int64)) for m in members]


def cluster_delta_values(tree: RecursiveTree, eps) -> np.ndarray:
    """Delta of each cluster subtree, in innovation order."""
    stats = percolate(tree, eps)
    out = np.empty(stats.clusters, dtype=np.int64)
    K.cluster_deltas(_eps_array(eps, tree.n), tree.parent, stats.cluster_id, stats.clusters, out)
    return out


def degrees(tree: RecursiveTree) -> np.ndarray:
    deg = np.empty(tree.n, dtype=np.int64)
    K.tree_degrees(tree.parent, deg)
    return deg


def _check_p(p):
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")


def tree_functionals(tree: RecursiveTree, p: float) -> TreeFunctionals:
    """Conditional mean and variance of the isolated-vertex count given the tree."""
    _check_p(p)
    deg = np.empty(tree.n, dtype=np.int64)
    mu, s2 = K.mu_sigma2(tree.parent, float(p), deg, K.power_table(float(p), tree.n))
    return TreeFunctionals(float(mu), max(float(s2), 0.0), deg)


def mu_of_tree(tree: RecursiveTree, p: float) -> float:
    return tree_functionals(tree, p).mu


def sigma2_of_tree(tree: RecursiveTree, p: float) -> float:
    return tree_functionals(tree, p).sigma2


# ----------------------------------------------------------------------------
# batch samplers; replicate r depends only on (seed, stream tag, r)
# ----------------------------------------------------------------------------


def sample_cluster_counts(n: int, p: float, replicates: int, seed: int, threads=None):
    """Independent draws of (nu_1(n), nu_2(n))."""
    _check_p(p)

    def chunk(first, count):
        a = np.empty(count, dtype=np.int64)
        b = np.empty(count, dtype=np.int64)
        K.cluster_counts(new_state(seed, 0, STREAM_CLUSTERS), float(p), n, first, count, a, b)
        return a, b

    return run_replicates(chunk, replicates, threads)


def sample_tree_functionals(n: int, p: float, replicates: int, seed: int, threads=None):
    """Independent draws of (mu(T_n), sigma^2(T_n))."""
    _check_p(p)

    def chunk(first, count):
        mu = np.empty(count)
        s2 = np.empty(count)
        K.tree_mu_values(new_state(seed, 0, STREAM_TREES), float(p), n, first, count, mu, s2)
        return mu, s2

    return run_replicates(chunk, replicates, threads)


def sample_deltas(k: int, replicates: int, seed: int, threads=None) -> np.ndarray:
    """Independent draws of Delta(T_k)."""
    if k < 1:
        raise ValueError("tree size must be positive")

    def chunk(first, count):
        out = np.empty(count, dtype=np.int64)
        K.delta_samples(new_state(seed, 0, STREAM_DELTA), k, first, count, out)
        return out

    return run_replicates(chunk, replicates, threads)


def sample_degree_cube_means(n: int, replicates: int, seed: int, threads=None) -> np.ndarray:
    """Independent draws of (1/n) sum_i D_{n,i}^3."""

    def chunk(first, count):
        out = np.empty(count)
        K.degree_cube_means(new_state(seed, 0, STREAM_DEGREES), n, first, count, out)
        return out

    return run_replicates(chunk, replicates, threads)


def sample_star_powers(i: int, n: int, l: int, p: float, replicates: int, seed: int, threads=None):
    """Independent draws of p**(l D*_{n,i}), D*_{n,i} the child count of vertex i."""
    if not 1 <= i < n:
        raise ValueError("need 1 <= i < n")

    def chunk(first, count):
        out = np.empty(count)
        K.star_power_samples(new_state(seed, 0, STREAM_STAR), n, i, l, float(p), first, count, out)
        return out

    return run_replicates(chunk, replicates, threads)
