import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from leechannel.errors import DomainError
from leechannel.lee_core import (
    Modulus,
    RingVector,
    lee_distance,
    lee_weight_scalar,
    lee_weight_vector,
    scalar_vector_product,
)


def test_modulus_fields():
    assert (Modulus(7).r, Modulus(7).is_even) == (3, False)
    assert (Modulus(8).r, Modulus(8).is_even) == (4, True)
    with pytest.raises(DomainError):
        Modulus(1)


@pytest.mark.parametrize("a,m,expected", [(5, 7, 2), (0, 9, 0), (4, 8, 4)])
def test_scalar_weight_examples(a, m, expected):
    assert lee_weight_scalar(a, m) == expected


@pytest.mark.parametrize("a", [-1, 7, 100])
def test_scalar_weight_out_of_range(a):
    with pytest.raises(DomainError):
        lee_weight_scalar(a, 7)


def test_vector_weight_examples():
    assert lee_weight_vector(RingVector.zeros(6, 11)) == 0
    assert lee_weight_vector(RingVector((1, 5, 3), 7)) == 6
    assert lee_weight_vector(RingVector((4, 4), 8)) == 8


def test_distance_examples():
    x = RingVector((1, 0), 7)
    assert lee_distance(x, x) == 0
    assert lee_distance(x, RingVector((0, 6), 7)) == 2
    assert lee_distance(RingVector((0,), 8), RingVector((4,), 8)) == 4


def test_distance_mismatch():
    with pytest.raises(DomainError):
        lee_distance(RingVector((1, 2), 7), RingVector((1,), 7))
    with pytest.raises(DomainError):
        lee_distance(RingVector((1,), 7), RingVector((1,), 8))


def test_scalar_product_examples():
    x = RingVector((3, 4), 7)
    assert scalar_vector_product(1, x) == x
    assert scalar_vector_product(0, x) == RingVector.zeros(2, 7)
    assert scalar_vector_product(2, x) == RingVector((6, 1), 7)


def test_entries_are_canonical():
    with pytest.raises(DomainError):
        RingVector((7,), 7)
    assert RingVector.reduce((-1, 15), 7) == RingVector((6, 1), 7)
    assert hash(RingVector((1, 2), 5)) == hash(RingVector.reduce((6, 7), 5))


@pytest.mark.parametrize("m", range(2, 40))
def test_weight_symmetry(m):
    r = m // 2
    for a in range(1, r + 1):
        assert lee_weight_scalar(a, m) == lee_weight_scalar(m - a, m)
    assert max(lee_weight_scalar(a, m) for a in range(m)) == r


@pytest.mark.parametrize("m", [2, 3])
def test_small_rings_match_hamming(m):
    for a in range(m):
        assert lee_weight_scalar(a, m) == (a != 0)


@given(st.integers(2, 30).flatmap(lambda m: st.tuples(st.just(m), st.lists(st.integers(0, m - 1), max_size=20))))
def test_negation_preserves_weight(case):
    m, entries = case
    x = RingVector(entries, m)
    assert lee_weight_vector(scalar_vector_product(m - 1, x)) == lee_weight_vector(x)
    assert 0 <= lee_weight_vector(x) <= len(x) * (m // 2)


@pytest.mark.parametrize("m,n", [(m, n) for m in range(2, 10) for n in (1, 2, 3)])
def test_triangle_inequality_exhaustive(m, n):
    vecs = np.array(list(itertools.product(range(m), repeat=n)))
    diff = (vecs[:, None, :] - vecs[None, :, :]) % m
    d = np.minimum(diff, m - diff).sum(axis=2)
    rng = np.random.default_rng(m * 10 + n)
    for i, j in rng.integers(0, len(vecs), size=(50, 2)):
        assert lee_distance(RingVector(vecs[i], m), RingVector(vecs[j], m)) == d[i, j]
    assert (d == d.T).all()
    for y in range(len(vecs)):
        assert (d <= d[:, y][:, None] + d[y, :][None, :]).all()
