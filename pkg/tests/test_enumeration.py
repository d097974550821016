import math
from fractions import Fraction

import numpy as np
import pytest
from scipy.special import ndtr

import oracles
from reinforced_walks import enumeration as E
from reinforced_walks.distributions import discrete, gaussian, rademacher
from reinforced_walks.moments import ez, theory_constants
from reinforced_walks.walks import normalization, sample_terminal

R = rademacher()
D02 = discrete({0: 0.5, 2: 0.5})


@pytest.mark.parametrize("p", ["1/4", "1/2", "2/3"])
def test_census_law_matches_bruteforce(p):
    for n in range(1, 7):
        e = E.enum_percolation(n, Fraction(p))
        assert e.partition_pmf == oracles.census_law(n, Fraction(p))
        assert e.total == 1
        assert e.configurations == math.factorial(n - 1) * 2 ** (n - 1)


def test_percolation_hand_values():
    for p in (0.2, 0.5, 0.9):
        e = E.enum_percolation(2, p)
        assert e.nu_moments(1)[0] == pytest.approx(2 * p)
        assert e.nu_pmf(2) == pytest.approx({0: p, 1: 1 - p})
    e = E.enum_percolation(3, 0.5)
    assert e.z_moments(2) == (5.5, 4.75)


def test_percolation_size_limit():
    with pytest.raises(ValueError):
        E.enum_percolation(11, 0.5)


def test_tree_functionals_hand_values():
    for p in (0.25, 0.6):
        t = E.enum_tree_functionals(3, p)
        assert t.mean_mu == pytest.approx(p * p + 2 * p) and t.var_mu == pytest.approx(0, abs=1e-15)
        assert E.enum_tree_functionals(2, p).mean_mu == pytest.approx(2 * p)
    assert E.enum_tree_functionals(2, 0.5).mean_sigma2 == pytest.approx(1.0)


def test_tree_degree_sums_match_bruteforce():
    for n in range(2, 7):
        trees = [oracles.degrees(par) for par in oracles.all_parent_vectors(n)]
        t = E.enum_tree_functionals(n, 0.5)
        for l in range(1, 5):
            assert t.degree_power_sums[l] == Fraction(sum(sum(d**l for d in deg) for deg in trees), len(trees))


def test_delta_pmf_values():
    assert E.enum_delta_pmf(1) == {1: 1}
    assert E.enum_delta_pmf(2) == {0: 1}
    assert E.enum_delta_pmf(3) == {-1: Fraction(1, 2), 1: Fraction(1, 2)}
    assert E.enum_delta_pmf(4) == {-2: Fraction(1, 6), 0: Fraction(4, 6), 2: Fraction(1, 6)}


def test_delta_pmf_support_and_moments():
    for k in range(1, 11):
        pmf = E.enum_delta_pmf(k)
        assert sum(pmf.values()) == 1
        assert all(abs(v) <= k and (v - k) % 2 == 0 for v in pmf)
        if k >= 2:
            assert sum(v * q for v, q in pmf.items()) == 0
        if k >= 3:
            assert sum(v * v * q for v, q in pmf.items()) == Fraction(k, 3)
            assert sum(v**4 * q for v, q in pmf.items()) <= 6 * k * k


# -- walk laws ----------------------------------------------------------------


def test_walk_n1():
    w = E.enum_walk_pmf(1, 0.5, R)
    assert w.pmf == {-1: Fraction(1, 2), 1: Fraction(1, 2)}


@pytest.mark.parametrize("mode,sign", [("positive", 1), ("negative", -1)])
@pytest.mark.parametrize("dist", [R, D02, discrete({-1: 0.2, 0.5: 0.3, 3: 0.5})], ids=["rad", "zero-two", "three-point"])
def test_walk_law_matches_bruteforce(mode, sign, dist):
    step = {Fraction(repr(v)): Fraction(repr(q)) for v, q in zip(dist.values, dist.probs)}
    for n in range(1, 5):
        w = E.enum_walk_pmf(n, Fraction(3, 5), dist, mode)
        ref = {x: q for x, q in oracles.walk_law(n, Fraction(3, 5), step, sign).items() if q}
        assert w.pmf == ref


def test_positive_three_steps_all_up():
    w = E.enum_walk_pmf(3, 0.5, R)
    # eps_2, eps_3 patterns: (0,0) 1/2, (0,1) or (1,0) 1/4 each, (1,1) 1/8
    assert w.pmf[Fraction(3)] == Fraction(1, 4) * (Fraction(1, 2) + Fraction(1, 4) + Fraction(1, 4) + Fraction(1, 8))


def test_negative_two_steps_against_monte_carlo():
    w = E.enum_walk_pmf(2, 0.5, R, "negative")
    assert w.pmf == {-2: Fraction(1, 8), 0: Fraction(3, 4), 2: Fraction(1, 8)}
    N = 1_000_000
    s = sample_terminal("negative", R, 0.5, 2, N, seed=21)
    for x, q in w.pmf.items():
        freq = np.mean(s == float(x))
        assert abs(freq - float(q)) <= 4 * math.sqrt(float(q) * (1 - float(q)) / N)


@pytest.mark.parametrize("p", [0.25, 0.5, 0.75])
@pytest.mark.parametrize("dist", [R, D02], ids=["rad", "zero-two"])
def test_walk_moment_identities(p, dist):
    for n in range(1, 9):
        pos = E.enum_walk_pmf(n, p, dist, "positive")
        neg = E.enum_walk_pmf(n, p, dist, "negative")
        assert pos.total == 1 and neg.total == 1
        assert float(pos.mean) == pytest.approx(dist.m1 * n, abs=1e-12)
        assert float(pos.variance) == pytest.approx(dist.sigma0sq * ez(2, n, p), rel=1e-12)
        assert abs(float(neg.mean) - theory_constants(p, dist).checkb * n) <= 2


def test_state_cap():
    assert E.nominal_states(8, 2) == 5040 * 2 * 3**7
    with pytest.raises(ValueError):
        E.enum_walk_pmf(8, 0.5, discrete({-1: 0.25, 0: 0.5, 1: 0.25}))
    with pytest.raises(ValueError):
        E.enum_walk_pmf(9, 0.5, R)
    with pytest.raises(ValueError):
        E.enum_walk_pmf(3, 0.5, gaussian(1.0))


def test_exact_dk_is_a_true_supremum():
    w = E.enum_walk_pmf(6, 0.75, R)
    centre, scale = normalization("positive", R, 0.75, 6)
    atoms = sorted(w.pmf)
    xs = np.linspace(float(atoms[0]) - 3, float(atoms[-1]) + 3, 200_001)
    cdf = np.zeros_like(xs)
    for a in atoms:
        cdf += float(w.pmf[a]) * (xs >= float(a))
    grid_sup = np.max(np.abs(cdf - ndtr((xs - centre) / scale)))
    assert w.dk >= grid_sup - 1e-12
    assert w.dk == pytest.approx(grid_sup, abs=1e-4)


def test_dk_undefined_for_small_p_positive():
    assert E.enum_walk_pmf(4, 0.3, R).dk is None
    assert E.enum_walk_pmf(4, 0.3, R, "negative").dk is not None
