from fractions import Fraction

import pytest

from leechannel.counting import (
    PartitionDistribution,
    build_partition_distribution,
    count_decomposition,
    count_sphere,
    decomposition_info,
)
from leechannel.errors import DomainError
from leechannel.lee_core import Modulus
from leechannel.partitions import Partition, enumerate_partitions
from oracles import brute_decomposition_count, brute_sphere


def test_decomposition_examples():
    assert brute_decomposition_count(5, 7, (2, 1, 1)) == 240
    assert count_decomposition(5, 7, Partition((2, 1, 1))) == 240
    assert brute_decomposition_count(3, 8, (4, 4)) == 3
    assert count_decomposition(3, 8, Partition((4, 4))) == 3
    for m in (4, 5, 9):
        assert count_decomposition(4, m, Partition(())) == 1


def test_decomposition_errors_and_zero():
    with pytest.raises(DomainError):
        count_decomposition(3, 7, Partition((4,)))
    assert count_decomposition(2, 7, Partition((1, 1, 1))) == 0


def test_decomposition_info_c_r():
    info = decomposition_info(5, 8, Partition((4, 4, 1)))
    assert info.c_r == 2 and info.count == count_decomposition(5, 8, Partition((4, 4, 1)))


@pytest.mark.parametrize("m,n", [(m, n) for m in range(4, 10) for n in range(1, 5) if m**n <= 10**4])
def test_decomposition_matches_brute_force(m, n):
    r = m // 2
    for t in range(0, n * r + 1):
        for lam in enumerate_partitions(t, r):
            if lam.length <= n:
                assert count_decomposition(n, m, lam) == brute_decomposition_count(n, m, lam.parts)


def test_sphere_examples():
    assert len(brute_sphere(2, 5, 2)) == 8 == count_sphere(2, 5, 2)
    assert count_sphere(3, 7, 0) == 1
    assert count_sphere(2, 5, 5) == 0


@pytest.mark.parametrize("m", range(4, 10))
@pytest.mark.parametrize("n", range(1, 5))
def test_classes_partition_the_space(m, n):
    mod = Modulus(m)
    total = 0
    for t in range(0, n * mod.r + 1):
        classes = [count_decomposition(n, mod, lam) for lam in enumerate_partitions(t, mod.r) if lam.length <= n]
        assert sum(classes) == count_sphere(n, mod, t)
        total += count_sphere(n, mod, t)
    assert total == m**n


@pytest.mark.parametrize("m", range(4, 12))
def test_sign_factor_divides(m):
    mod = Modulus(m)
    for t in range(1, 13):
        for lam in enumerate_partitions(t, mod.r):
            c = count_decomposition(8, mod, lam)
            sign_exp = lam.length - (lam.count_equal(mod.r) if mod.is_even else 0)
            assert c % 2**sign_exp == 0
            if lam.length <= 8:
                assert c > 0


def test_distribution_examples():
    d = build_partition_distribution(2, 5, 2)
    assert dict(d.entries) == {Partition((2,)): Fraction(4, 8), Partition((1, 1)): Fraction(4, 8)}
    assert d.total_count == 8
    d = build_partition_distribution(1, 7, 3)
    assert d.entries == ((Partition((3,)), Fraction(1)),)
    d = build_partition_distribution(2, 8, 8)
    assert d.entries == ((Partition((4, 4)), Fraction(1)),)


@pytest.mark.parametrize("n,m,t", [(2, 5, 0), (2, 5, 5), (3, 8, 13)])
def test_distribution_domain(n, m, t):
    with pytest.raises(DomainError):
        build_partition_distribution(n, m, t)


@pytest.mark.parametrize("n,m,t", [(5, 7, 4), (3, 8, 6), (6, 9, 11), (40, 6, 50)])
def test_distribution_is_exact(n, m, t):
    d = build_partition_distribution(n, m, t)
    assert sum(p for _, p in d.entries) == 1
    assert d.total_count == count_sphere(n, m, t)
    for lam, p in d.entries:
        assert p == Fraction(count_decomposition(n, m, lam), d.total_count) > 0
        assert lam.length <= n


def test_partition_at_covers_counts_exactly():
    d = build_partition_distribution(3, 7, 4)
    hits = {}
    for u in range(d.total_count):
        lam = d.partition_at(u)
        hits[lam] = hits.get(lam, 0) + 1
    assert hits == {lam: count_decomposition(3, 7, lam) for lam, _ in d.entries}
    with pytest.raises(DomainError):
        d.partition_at(d.total_count)


def test_record_round_trip():
    d = build_partition_distribution(6, 9, 11)
    back = PartitionDistribution.loads(d.dumps())
    assert back == d
    rec = d.to_record()
    assert rec["version"] == 1 and (rec["n"], rec["m"], rec["t"]) == (6, 9, 11)
    assert all(isinstance(e["numerator"], str) and isinstance(e["denominator"], str) for e in rec["entries"])
    rec["entries"][0]["numerator"] = str(int(rec["entries"][0]["numerator"]) + 1)
    with pytest.raises(DomainError):
        PartitionDistribution.from_record(rec)
