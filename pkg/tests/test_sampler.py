import itertools
from fractions import Fraction

import numpy as np
import pytest
from scipy.stats import chi2

from leechannel.counting import build_partition_distribution, count_sphere
from leechannel.errors import DomainError, InvariantError
from leechannel.lee_core import Modulus, RingVector, lee_weight_vector
from leechannel.sampler import (
    BudgetExceeded,
    SamplerState,
    SplitTree,
    chi_square_uniformity,
    enumerate_sphere,
    exact_output_law,
    make_sampler,
    random_below,
    sample,
    sample_many,
    sphere_array,
    sphere_size_row,
    spawn_rngs,
)
from oracles import brute_sphere


def _mult(lam, r):
    mult = [0] * r
    for p in lam.parts:
        mult[p - 1] += 1
    return tuple(mult)


def test_two_element_sphere_law():
    law = exact_output_law(build_partition_distribution(1, 7, 3))
    assert law == {(3,): Fraction(1, 2), (4,): Fraction(1, 2)}
    state = make_sampler(1, 7, 3, seed=4)
    draws = [sample(state).as_tuple() for _ in range(2000)]
    assert set(draws) == {(3,), (4,)}
    assert 850 < draws.count((3,)) < 1150


@pytest.mark.parametrize("method", ["table", "tree"])
def test_singleton_sphere(method):
    state = make_sampler(2, 8, 8, seed=9, method=method)
    assert all(sample(state) == RingVector((4, 4), 8) for _ in range(50))


def test_small_sphere_chi_square():
    sphere = brute_sphere(2, 5, 2)
    assert len(sphere) == 8
    state = make_sampler(2, 5, 2, seed=2024)
    draws = [state.sample_entries() for _ in range(100_000)]
    res = chi_square_uniformity(draws, sphere)
    assert res.dof == 7
    assert res.p_value > 1e-3


@pytest.mark.parametrize("method", ["table", "tree"])
@pytest.mark.parametrize("n,m,t", [(5, 7, 4), (3, 8, 6), (30, 9, 40), (17, 4, 20), (64, 6, 1)])
def test_every_draw_has_weight_t(method, n, m, t):
    state = make_sampler(n, m, t, seed=1, method=method)
    for _ in range(200):
        x = sample(state)
        assert len(x) == n and lee_weight_vector(x) == t


@pytest.mark.parametrize("method", ["table", "tree"])
def test_reproducible(method):
    a = make_sampler(12, 9, 20, seed=77, method=method)
    b = make_sampler(12, 9, 20, seed=77, method=method)
    assert sample_many(a, 30) == sample_many(b, 30)
    c = make_sampler(12, 9, 20, seed=78, method=method)
    assert sample_many(c, 30) != sample_many(make_sampler(12, 9, 20, seed=77, method=method), 30)


def test_spawned_streams_are_deterministic_and_distinct():
    x = [g.integers(1 << 60) for g in spawn_rngs(5, 4)]
    y = [g.integers(1 << 60) for g in spawn_rngs(5, 4)]
    assert x == y and len(set(x)) == 4


def test_sampler_domain():
    with pytest.raises(DomainError):
        make_sampler(2, 5, 5)
    with pytest.raises(DomainError):
        make_sampler(2, 5, 0)
    with pytest.raises(DomainError):
        make_sampler(2, 5, 2, method="nope")


def test_enumerate_sphere_examples():
    assert len(list(enumerate_sphere(2, 5, 2))) == 8
    assert list(enumerate_sphere(1, 8, 4)) == [RingVector((4,), 8)]
    assert list(enumerate_sphere(3, 4, 0)) == [RingVector((0, 0, 0), 4)]


@pytest.mark.parametrize("n,m,t", [(3, 7, 4), (4, 6, 5), (2, 9, 8), (5, 4, 3)])
def test_enumerate_sphere_matches_itertools(n, m, t):
    got = [v.as_tuple() for v in enumerate_sphere(n, m, t)]
    assert got == brute_sphere(n, m, t)
    assert sphere_array(n, m, t).shape == (len(got), n)


def test_enumeration_budget():
    with pytest.raises(BudgetExceeded, match="budget"):
        list(enumerate_sphere(8, 9, 3, budget=1000))


def test_chi_square_examples():
    sphere = brute_sphere(2, 5, 2)
    res = chi_square_uniformity([v for v in sphere for _ in range(5)], sphere)
    assert res.statistic == 0 and res.p_value == 1
    N, K = 40, len(sphere)
    res = chi_square_uniformity([sphere[0]] * N, sphere)
    assert res.statistic == pytest.approx(N * (K - 1))
    with pytest.raises(InvariantError):
        chi_square_uniformity([(1, 1, 1)], sphere)


def test_chi_square_p_value_matches_scipy():
    sphere = brute_sphere(2, 7, 3)
    rng = np.random.default_rng(0)
    draws = [sphere[i] for i in rng.integers(0, len(sphere), 500)]
    res = chi_square_uniformity(draws, sphere)
    assert res.p_value == pytest.approx(chi2.sf(res.statistic, len(sphere) - 1), rel=1e-10)


@pytest.mark.parametrize("n,m,t", [(1, 7, 3), (2, 5, 2), (3, 8, 6), (4, 4, 3), (3, 9, 5), (4, 2, 2), (2, 3, 2)])
def test_exact_output_law_is_uniform(n, m, t):
    law = exact_output_law(build_partition_distribution(n, m, t))
    sphere = brute_sphere(n, m, t)
    assert set(law) == set(sphere)
    assert set(law.values()) == {Fraction(1, len(sphere))}


@pytest.mark.parametrize("leaf", [1, 2, 3])
@pytest.mark.parametrize("n,m,t", [(5, 7, 6), (6, 8, 9), (7, 5, 5), (4, 6, 12)])
def test_split_tree_law_equals_partition_law(leaf, n, m, t):
    tree = SplitTree(n, m, t, leaf_size=leaf)
    dist = build_partition_distribution(n, m, t)
    law = tree.partition_law()
    expected = {_mult(lam, Modulus(m).r): p for lam, p in dist.entries}
    assert law == expected
    assert tree.total_count == dist.total_count


@pytest.mark.parametrize("m", [4, 5, 7, 8, 11])
@pytest.mark.parametrize("n", [1, 3, 8, 25])
def test_sphere_size_row_matches_partition_sum(m, n):
    mod = Modulus(m)
    assert sphere_size_row(n, mod, n * mod.r) == [count_sphere(n, mod, t) for t in range(n * mod.r + 1)]


def test_tree_chi_square_small_case():
    sphere = brute_sphere(4, 7, 5)
    tree = SplitTree(4, 7, 5, leaf_size=1)
    state = SamplerState(tree, 31)
    draws = [state.sample_entries() for _ in range(30_000)]
    assert chi_square_uniformity(draws, sphere).p_value > 1e-3


def test_tree_partition_frequencies_large_n():
    # at n = 60 the tree must still reproduce the class probabilities
    n, m, t = 60, 5, 50
    dist = build_partition_distribution(n, m, t)
    tree = SplitTree(n, m, t)
    rng = np.random.default_rng(3)
    draws = 20_000
    counts = {}
    for _ in range(draws):
        key = tree.draw_multiplicities(rng)
        counts[key] = counts.get(key, 0) + 1
    probs = {_mult(lam, 2): float(p) for lam, p in dist.entries}
    keys = [k for k, p in probs.items() if p * draws >= 5]
    obs = np.array([counts.get(k, 0) for k in keys], dtype=float)
    exp = np.array([probs[k] * draws for k in keys])
    stat = ((obs - exp) ** 2 / exp).sum()
    assert chi2.sf(stat, len(keys)) > 1e-3  # tail classes omitted; df kept conservative


def test_random_below_large_bound():
    rng = np.random.default_rng(1)
    bound = 3 * 2**100 + 7
    vals = [random_below(rng, bound) for _ in range(3000)]
    assert all(0 <= v < bound for v in vals)
    thirds = np.bincount([v * 3 // bound for v in vals], minlength=3)
    assert chi2.sf(((thirds - 1000) ** 2 / 1000).sum(), 2) > 1e-3
    small = np.bincount([random_below(rng, 5) for _ in range(5000)], minlength=5)
    assert chi2.sf(((small - 1000) ** 2 / 1000).sum(), 4) > 1e-3


SUITE = [(7, 4, 5), (8, 3, 6), (5, 5, 4)]


@pytest.mark.parametrize("m,n,t", SUITE)
def test_chi_square_across_seeds(m, n, t):
    sphere = sphere_array(n, m, t)
    dist = build_partition_distribution(n, m, t)
    passes = 0
    for seed in range(10):
        state = SamplerState(dist, seed)
        draws = [state.sample_entries() for _ in range(8000)]
        passes += chi_square_uniformity(draws, sphere).p_value > 1e-3
    assert passes >= 9
