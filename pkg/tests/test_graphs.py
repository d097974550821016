import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from reinforced_walks import graphs as G
from reinforced_walks.percolation import grow_tree, mu_of_tree, percolate
from reinforced_walks.rng import RandomStream

K3 = G.Graph.complete(3)
P3 = G.Graph.path(3)


def binomial_mean_count(graph, q, d):
    return sum(stats.binom.pmf(d, int(di), q) for di in graph.degree)


def test_edge_list_roundtrip(tmp_path):
    f = tmp_path / "g.txt"
    f.write_text("4 3\n1 2\n2 3\n2 4\n")
    g = G.read_edge_list(f)
    assert g.n == 4 and g.m == 3 and g.degree.tolist() == [1, 3, 1, 1]


@pytest.mark.parametrize("text", ["", "3\n1 2\n", "3 2\n1 2\n", "3 1\n1 1\n", "3 1\n1 4\n", "3 1\na b\n"])
def test_bad_edge_lists(text):
    with pytest.raises(ValueError):
        G.parse_edge_list(text)


def test_degree_sum():
    g = G.Graph.complete(7)
    assert g.degree.sum() == 2 * g.m


def test_single_edge_retention_frequency():
    g = G.Graph(2, ((1, 2),))
    q, N = 0.3, 100_000
    kept = G.sample_degree_histograms(g, q, 1, N, seed=4)[:, 1].sum() / 2
    assert abs(kept / N - q) <= 4 * math.sqrt(q * (1 - q) / N)


def test_triangle_retained_degree_is_binomial():
    hist = G.sample_degree_histograms(K3, 0.5, 2, 20_000, seed=5).sum(axis=0)
    assert stats.chisquare(hist, hist.sum() * np.array([0.25, 0.5, 0.25])).pvalue > 1e-4


@given(st.integers(0, 10**6), st.floats(0.05, 0.95))
def test_counts_partition_vertices(seed, q):
    g = G.Graph.complete(6)
    deg = G.percolate_graph(g, q, seed)
    assert sum(G.degree_count(deg, d) for d in range(6)) == 6
    assert np.all(deg <= g.degree)


def test_invalid_ptilde():
    with pytest.raises(ValueError):
        G.percolate_graph(K3, 1.0)


def test_exact_mean_count_examples():
    assert G.exact_mean_count(K3, 0.5, 1) == pytest.approx(1.5)
    assert G.exact_mean_count(P3, 0.5, 0) == pytest.approx(1.25)
    assert G.exact_mean_count(K3, 0.3, 3) == 0


@given(st.integers(2, 9), st.floats(0.01, 0.99), st.integers(0, 9))
def test_exact_mean_count_matches_binomial(n, q, d):
    g = G.Graph.complete(n)
    assert G.exact_mean_count(g, q, d) == pytest.approx(binomial_mean_count(g, q, d), rel=1e-12, abs=1e-300)


def test_be_bound_examples():
    assert G.be_bound(P3, 0.5, 1.0) == pytest.approx(math.sqrt(0.65625))
    assert G.be_bound(P3, 0.5, 1.0) == pytest.approx(0.8101, abs=1e-4)
    assert G.be_bound(K3, 0.5, 1.0) == pytest.approx(math.sqrt(1.125))
    assert G.be_bound(K3, 0.5, 4.0) == G.be_bound(K3, 0.5, 1.0) / 4
    with pytest.raises(ValueError):
        G.be_bound(K3, 0.5, 0.0)


@given(st.permutations(list(range(1, 7))), st.floats(0.1, 10), st.floats(0.1, 10))
def test_be_bound_monotone_and_relabel_invariant(perm, s1, s2):
    g = G.Graph(6, ((1, 2), (2, 3), (2, 4), (4, 5), (5, 6), (1, 6), (3, 5)))
    assert G.be_bound(g.relabel(perm), 0.3, s1) == pytest.approx(G.be_bound(g, 0.3, s1))
    if s1 < s2:
        assert G.be_bound(g, 0.3, s1) > G.be_bound(g, 0.3, s2)


def test_complete_graph_counts_match_exact_means():
    g = G.Graph.complete(50)
    for r in G.mc_degree_counts(g, 0.1, range(9), 100_000, seed=6):
        assert abs(r.mean - G.exact_mean_count(g, 0.1, r.d)) <= 4 * r.stderr


def test_isolated_vertices_of_tree_match_singleton_clusters():
    n, p, N = 100, 0.4, 5000
    tree = grow_tree(n, RandomStream(1))
    iso = G.mc_degree_counts(G.Graph.from_tree(tree), 1 - p, [0], N, seed=2)[0]
    rng = RandomStream(3)
    nu1 = np.empty(N)
    for r in range(N):
        eps = [1] + [int(rng.bernoulli(p)) for _ in range(n - 1)]
        nu1[r] = percolate(tree, eps).nu_k(1)
    se = math.sqrt(iso.variance / N + nu1.var(ddof=1) / N)
    assert abs(iso.mean - nu1.mean()) <= 4 * se
    assert abs(nu1.mean() - mu_of_tree(tree, p)) <= 4 * nu1.std(ddof=1) / math.sqrt(N)
