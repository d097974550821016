"""numba kernels shared by the simulation modules.

Vertex ``v`` (1-based, as in the model) lives at array index ``v - 1``.
Parent/choice arrays hold 1-based labels with a 0 sentinel at index 0.
"""

import numpy as np
from numba import njit

from .rng import next_below, next_normal, next_sign, next_uniform, reset_state

KIND_RADEMACHER = 0
KIND_DISCRETE = 1
KIND_GAUSSIAN = 2


@njit(cache=True)
def draw_innovation(st, kind, values, cdf, sd):
    if kind == KIND_RADEMACHER:
        return next_sign(st)
    if kind == KIND_DISCRETE:
        u = next_uniform(st)
        i = 0
        last = cdf.shape[0] - 1
        while i < last and u >= cdf[i]:
            i += 1
        return values[i]
    return sd * next_normal(st)


@njit(cache=True)
def draw_walk_randomness(st, p, n, kind, values, cdf, sd, eps, choices, innov):
    """Fill eps/choices/innovations for vertices 1..n; returns i(n).

    Per vertex j >= 2 the stream is consumed as: eps_j, then U_j, then the
    innovation when eps_j = 1.
    """
    eps[0] = 1
    choices[0] = 0
    innov[0] = draw_innovation(st, kind, values, cdf, sd)
    count = 1
    for j in range(1, n):
        e = next_uniform(st) < p
        eps[j] = 1 if e else 0
        choices[j] = 1 + next_below(st, j)
        if e:
            innov[count] = draw_innovation(st, kind, values, cdf, sd)
            count += 1
    return count


@njit(cache=True)
def draw_percolation_randomness(st, p, n, eps, choices):
    eps[0] = 1
    choices[0] = 0
    for j in range(1, n):
        eps[j] = 1 if next_uniform(st) < p else 0
        choices[j] = 1 + next_below(st, j)


@njit(cache=True)
def draw_tree(st, n, parent):
    parent[0] = 0
    for j in range(1, n):
        parent[j] = 1 + next_below(st, j)


@njit(cache=True)
def walk_steps(eps, choices, innov, sign, steps):
    """Run the reinforcement recursion; sign=+1 positive, -1 negative.

    Returns -1 on success, else the first offending 0-based index (bad
    choice) or -2 when innovations run out.
    """
    n = eps.shape[0]
    if innov.shape[0] < 1:
        return -2
    steps[0] = innov[0]
    c = 1
    for j in range(1, n):
        if eps[j] == 1:
            if c >= innov.shape[0]:
                return -2
            steps[j] = innov[c]
            c += 1
        else:
            u = choices[j]
            if u < 1 or u > j:
                return j
            steps[j] = sign * steps[u - 1]
    return -1


@njit(cache=True)
def census(eps, parent, cluster_id, sizes):
    """Percolation clusters by id propagation; returns the number of clusters.

    ``sizes[c]`` is the size of the cluster opened by the (c+1)-th innovation.
    """
    n = eps.shape[0]
    k = 0
    for j in range(n):
        if j == 0 or eps[j] == 1:
            cluster_id[j] = k
            sizes[k] = 1
            k += 1
        else:
            c = cluster_id[parent[j] - 1]
            cluster_id[j] = c
            sizes[c] += 1
    return k


@njit(cache=True)
def depth_parity_delta(parent):
    """Even-depth count minus odd-depth count of a recursive tree."""
    n = parent.shape[0]
    if n == 0:
        return 0
    depth = np.empty(n, dtype=np.int64)
    depth[0] = 0
    delta = 1
    for j in range(1, n):
        d = depth[parent[j] - 1] + 1
        depth[j] = d
        delta += 1 if d % 2 == 0 else -1
    return delta


@njit(cache=True)
def cluster_deltas(eps, parent, cluster_id, nclusters, out):
    """Delta of every cluster subtree, using depth parity within the cluster."""
    n = eps.shape[0]
    parity = np.empty(n, dtype=np.int64)
    for c in range(nclusters):
        out[c] = 0
    for j in range(n):
        if j == 0 or eps[j] == 1:
            parity[j] = 0
        else:
            parity[j] = 1 - parity[parent[j] - 1]
        out[cluster_id[j]] += 1 if parity[j] == 0 else -1


@njit(cache=True)
def tree_degrees(parent, deg):
    n = parent.shape[0]
    for i in range(n):
        deg[i] = 0
    for j in range(1, n):
        deg[j] += 1
        deg[parent[j] - 1] += 1


@njit(cache=True)
def power_table(p, n):
    pw = np.empty(n + 1, dtype=np.float64)
    pw[0] = 1.0
    for d in range(1, n + 1):
        pw[d] = pw[d - 1] * p
    return pw


@njit(cache=True)
def mu_sigma2(parent, p, deg, pw):
    """Conditional mean and variance of the isolated-vertex count given the tree.

    ``pw[d]`` must hold ``p**d`` for 0 <= d <= n.
    """
    n = parent.shape[0]
    tree_degrees(parent, deg)
    mu = 0.0
    s = 0.0
    for i in range(n):
        a = pw[deg[i]]
        mu += a
        s += a - a * a
    e = 0.0
    for j in range(1, n):
        e += pw[deg[parent[j] - 1] + deg[j] - 1]
    return mu, s + 2.0 * (1.0 - p) * e


# ----------------------------------------------------------------------------
# replicate loops: one stream per replicate, rewound via reset_state
# ----------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def terminal_sums(st, p, n, sign, kind, values, cdf, sd, first, count, out):
    eps = np.empty(n, dtype=np.int8)
    choices = np.empty(n, dtype=np.int64)
    innov = np.empty(n, dtype=np.float64)
    steps = np.empty(n, dtype=np.float64)
    for r in range(count):
        reset_state(st, first + r)
        draw_walk_randomness(st, p, n, kind, values, cdf, sd, eps, choices, innov)
        walk_steps(eps, choices, innov, sign, steps)
        s = 0.0
        for j in range(n):
            s += steps[j]
        out[r] = s


@njit(cache=True, nogil=True)
def cluster_counts(st, p, n, first, count, nu1, nu2):
    eps = np.empty(n, dtype=np.int8)
    parent = np.empty(n, dtype=np.int64)
    cid = np.empty(n, dtype=np.int64)
    sizes = np.empty(n, dtype=np.int64)
    for r in range(count):
        reset_state(st, first + r)
        draw_percolation_randomness(st, p, n, eps, parent)
        k = census(eps, parent, cid, sizes)
        a = 0
        b = 0
        for c in range(k):
            if sizes[c] == 1:
                a += 1
            elif sizes[c] == 2:
                b += 1
        nu1[r] = a
        nu2[r] = b


@njit(cache=True, nogil=True)
def tree_mu_values(st, p, n, first, count, out_mu, out_s2):
    parent = np.empty(n, dtype=np.int64)
    deg = np.empty(n, dtype=np.int64)
    pw = power_table(p, n)
    for r in range(count):
        reset_state(st, first + r)
        draw_tree(st, n, parent)
        mu, s2 = mu_sigma2(parent, p, deg, pw)
        out_mu[r] = mu
        out_s2[r] = s2


@njit(cache=True, nogil=True)
def delta_samples(st, k, first, count, out):
    parent = np.empty(k, dtype=np.int64)
    for r in range(count):
        reset_state(st, first + r)
        draw_tree(st, k, parent)
        out[r] = depth_parity_delta(parent)


@njit(cache=True, nogil=True)
def degree_cube_means(st, n, first, count, out):
    parent = np.empty(n, dtype=np.int64)
    deg = np.empty(n, dtype=np.int64)
    for r in range(count):
        reset_state(st, first + r)
        draw_tree(st, n, parent)
        tree_degrees(parent, deg)
        s = 0.0
        for i in range(n):
            s += float(deg[i]) ** 3
        out[r] = s / n


@njit(cache=True, nogil=True)
def star_power_samples(st, n, i, l, p, first, count, out):
    """Samples of p**(l * D*_{n,i}), D*_{n,i} = number of children of vertex i."""
    pl = p**l
    for r in range(count):
        reset_state(st, first + r)
        d = 0
        for j in range(1, n):
            u = 1 + next_below(st, j)
            if u == i:
                d += 1
        out[r] = pl**d


@njit(cache=True)
def percolate_edges(st, pt, eu, ev, deg):
    """Keep each edge with probability pt; retained degrees into ``deg`` (0-based vertices)."""
    for i in range(deg.shape[0]):
        deg[i] = 0
    for e in range(eu.shape[0]):
        if next_uniform(st) < pt:
            deg[eu[e]] += 1
            deg[ev[e]] += 1


@njit(cache=True, nogil=True)
def degree_histograms(st, pt, n, eu, ev, first, count, out):
    """out[r, d] = number of vertices with retained degree d in replicate r."""
    deg = np.empty(n, dtype=np.int64)
    width = out.shape[1]
    for r in range(count):
        reset_state(st, first + r)
        percolate_edges(st, pt, eu, ev, deg)
        for d in range(width):
            out[r, d] = 0
        for i in range(n):
            if deg[i] < width:
                out[r, deg[i]] += 1
