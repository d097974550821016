import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from reinforced_walks import percolation as P
from reinforced_walks.enumeration import enum_conditional_nu1
from reinforced_walks.moments import star_power_mean
from reinforced_walks.rng import RandomStream

T = P.RecursiveTree.from_parents


@st.composite
def trees_with_eps(draw, max_n=40):
    n = draw(st.integers(1, max_n))
    parents = [draw(st.integers(1, j - 1)) for j in range(2, n + 1)]
    eps = [1] + [draw(st.integers(0, 1)) for _ in range(n - 1)]
    return parents, eps


# -- trees --------------------------------------------------------------------


def test_grow_tree_small_sizes():
    assert P.grow_tree(1).parent.tolist() == [0]
    assert all(P.grow_tree(2, s).parent_of(2) == 1 for s in range(20))
    with pytest.raises(ValueError):
        P.grow_tree(0)


def test_grow_tree_three_is_fair():
    N = 100_000
    ones = sum(P.grow_tree(3, RandomStream(8, r)).parent_of(3) == 1 for r in range(N))
    assert abs(ones / N - 0.5) <= 4 * math.sqrt(0.25 / N)


@given(st.integers(1, 300), st.integers(0, 2**40))
def test_grown_trees_are_recursive(n, seed):
    t = P.grow_tree(n, seed)
    assert len(t.edges()) == n - 1
    assert all(u < v for u, v in t.edges())
    assert P.degrees(t).sum() == 2 * (n - 1)


def test_invalid_parent_rejected():
    with pytest.raises(ValueError):
        T([1, 3])
    with pytest.raises(ValueError):
        P.RecursiveTree(np.array([1, 1]))


def test_edge_queries():
    t = T([1, 2, 1])
    assert t.is_edge(2, 3) and not t.is_edge(1, 3) and t.is_edge(1, 4)


# -- percolation census -------------------------------------------------------


def test_two_vertex_cases():
    assert P.percolate(T([1]), [1, 1]).nu == {1: 2}
    assert P.percolate(T([1]), [1, 0]).nu == {2: 1}


@pytest.mark.parametrize("parents", [[1, 1], [1, 2]])
def test_three_vertex_cases(parents):
    s = P.percolate(T(parents), [1, 0, 0])
    assert s.nu == {3: 1} and P.z_stat(s, 2) == 9
    s = P.percolate(T(parents), [1, 1, 0])
    assert s.nu == {1: 1, 2: 1} and P.z_stat(s, 2) == 5 and P.z_stat(s, 3) == 9
    assert P.conditional_variance(s, 2.0) == 10


def test_eps_validation():
    with pytest.raises(ValueError):
        P.percolate(T([1, 1]), [1, 0])
    with pytest.raises(ValueError):
        P.percolate(T([1, 1]), [0, 0, 1])


@given(trees_with_eps())
def test_census_invariants(case):
    parents, eps = case
    s = P.percolate(T(parents), eps)
    n = len(eps)
    assert sum(k * c for k, c in s.nu.items()) == n
    assert sum(s.nu.values()) == s.clusters == sum(eps)
    assert s.occupancy.sum() == n
    assert P.z_stat(s, 1) == n and P.z_stat(s, 0) == sum(eps)
    assert s.occupancy.tolist() == [len(c) for c in oracles.clusters(parents, eps)]
    assert P.conditional_variance(s, 1.0) == sum(x * x for x in s.occupancy)
    assert P.z_stat(s, 1.5) == pytest.approx(sum(x**1.5 for x in s.occupancy))


def test_all_open_gives_singletons():
    s = P.percolate(T([1, 2, 2, 3]), [1] * 5)
    assert P.conditional_variance(s, 1.0) == 5


# -- cluster trees and Delta --------------------------------------------------


def test_delta_examples():
    assert P.delta_tree(T([])) == 1
    assert P.delta_tree(T([1, 1, 2])) == 0


def test_delta_over_all_size_four_trees():
    vals = sorted(P.delta_tree(T(list(par))) for par in oracles.all_parent_vectors(4))
    assert vals == [-2, 0, 0, 0, 0, 2]
    assert Fraction(sum(v * v for v in vals), 6) == Fraction(4, 3)


def test_cluster_subtree_examples():
    assert P.cluster_subtrees(T([1, 2, 3]), [1, 1, 1, 1]) == [T([])] * 4
    (path,) = P.cluster_subtrees(T([1, 2]), [1, 0, 0])
    assert path == T([1, 2]) and P.delta_tree(path) == 1
    (star,) = P.cluster_subtrees(T([1, 1]), [1, 0, 0])
    assert star == T([1, 1]) and P.delta_tree(star) == -1


@given(trees_with_eps())
def test_cluster_subtrees_consistent(case):
    parents, eps = case
    tree = T(parents)
    subs = P.cluster_subtrees(tree, eps)
    assert sum(s.n for s in subs) == len(eps)
    oracle = [oracles.depth_delta(parents, c) for c in oracles.clusters(parents, eps)]
    assert [P.delta_tree(s) for s in subs] == oracle
    assert P.cluster_delta_values(tree, eps).tolist() == oracle


@given(trees_with_eps())
def test_delta_parity(case):
    parents, _ = case
    d = P.delta_tree(T(parents))
    n = len(parents) + 1
    assert (d - n) % 2 == 0 and abs(d) <= n


# -- degrees and tree functionals ---------------------------------------------


def test_degree_examples():
    assert P.degrees(T([1])).tolist() == [1, 1]
    assert P.degrees(T([1, 1])).tolist() == [2, 1, 1]
    assert P.degrees(T([1, 2])).tolist() == [1, 2, 1]


def test_mu_sigma2_examples():
    assert P.mu_of_tree(T([1]), 0.5) == pytest.approx(1.0)
    assert P.sigma2_of_tree(T([1]), 0.5) == pytest.approx(1.0)
    for p in (0.2, 0.7):
        for parents in ([1, 1], [1, 2]):
            assert P.mu_of_tree(T(parents), p) == pytest.approx(p * p + 2 * p)


def sigma2_direct(parents, p):
    deg = oracles.degrees(parents)
    s = sum(p**d - p ** (2 * d) for d in deg)
    s += 2 * (1 - p) * sum(p ** (deg[j - 1] + deg[u - 1] - 1) for j, u in enumerate(parents, start=2))
    return s


@given(trees_with_eps(max_n=60), st.floats(0.01, 0.99))
def test_tree_functional_invariants(case, p):
    parents, _ = case
    tf = P.tree_functionals(T(parents), p)
    n = len(parents) + 1
    assert 0 < tf.mu <= n and tf.sigma2 >= 0
    assert tf.degrees.sum() == 2 * (n - 1)
    assert tf.sigma2 == pytest.approx(sigma2_direct(parents, p), rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("p", [0.3, 0.5, 0.85])
def test_mu_and_sigma2_are_conditional_moments(p):
    for n in range(1, 7):
        for par in oracles.all_parent_vectors(n):
            mean, var = enum_conditional_nu1(par, p)
            assert P.mu_of_tree(T(list(par)), p) == pytest.approx(mean, abs=1e-12)
            assert P.sigma2_of_tree(T(list(par)), p) == pytest.approx(var, abs=1e-12)


def test_walk_and_tree_census_agree():
    from reinforced_walks.distributions import rademacher
    from reinforced_walks.walks import simulate_positive

    t = simulate_positive(rademacher(), 0.4, 500, 6)
    a = P.percolate(t.tree(), t.eps).nu
    b = P.percolate(T(t.choices[1:].tolist()), t.eps.tolist()).nu
    assert a == b


# -- Monte Carlo properties ---------------------------------------------------


def test_degree_cube_mean_not_exploding():
    means = [P.sample_degree_cube_means(n, reps, seed=1).mean() for n, reps in ((1000, 400), (10_000, 100), (100_000, 20))]
    for a, b in zip(means, means[1:]):
        assert 0.5 <= b / a <= 2.0


@pytest.mark.parametrize("i,n,l,p", [(1, 50, 1, 0.5), (10, 100, 2, 0.3)])
def test_star_power_identity(i, n, l, p):
    N = 100_000
    x = P.sample_star_powers(i, n, l, p, N, seed=3)
    exact = star_power_mean(i, n, l, p)
    assert abs(x.mean() - exact) <= 4 * x.std(ddof=1) / math.sqrt(N)


def test_cluster_count_sampler_matches_direct_census():
    nu1, nu2 = P.sample_cluster_counts(300, 0.4, 3, seed=12)
    from reinforced_walks import _kernels as K

    for r in range(3):
        st_ = RandomStream(12, r, P.STREAM_CLUSTERS)
        eps = np.empty(300, np.int8)
        par = np.empty(300, np.int64)
        K.draw_percolation_randomness(st_.state, 0.4, 300, eps, par)
        s = P.percolate(P.RecursiveTree(par), eps)
        assert (s.nu_k(1), s.nu_k(2)) == (nu1[r], nu2[r])
