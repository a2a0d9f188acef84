"""Exact sizes of weight-decomposition classes and of the Lee sphere.

A vector of length ``n`` over Z_m has weight decomposition ``lam`` when the
Lee weights of its nonzero entries, as a multiset, are the parts of ``lam``.
The sphere of Lee weight ``t`` is the disjoint union of these classes over
all partitions of ``t`` with parts at most ``r``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb, factorial
from typing import Iterator

from .errors import DomainError
from .lee_core import Modulus, as_modulus
from .partitions import Partition, enumerate_multiplicities, permutation_count

RECORD_FORMAT = "leechannel.partition-distribution"
RECORD_VERSION = 1


@dataclass(frozen=True)
class DecompositionCount:
    partition: Partition
    count: int
    c_r: int


def count_decomposition(n: int, mod: Modulus | int, lam: Partition) -> int:
    """Number of length-``n`` vectors over Z_m with weight decomposition ``lam``.

    ``2**len * |Pi| * C(n, len)`` for odd m. For even m the parts equal to
    ``r`` have only one ring element (m/2), so the sign factor drops to
    ``2**(len - c_r)``. Returns 0 when ``lam`` has more parts than ``n``.
    """
    mod = as_modulus(mod)
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    if lam.parts and lam.parts[0] > mod.r:
        raise DomainError(f"part {lam.parts[0]} exceeds the maximum Lee weight r={mod.r}")
    ell = lam.length
    if ell > n:
        return 0
    signs = ell - lam.count_equal(mod.r) if mod.is_even else ell
    return (permutation_count(lam) * comb(n, ell)) << signs


def decomposition_info(n: int, mod: Modulus | int, lam: Partition) -> DecompositionCount:
    mod = as_modulus(mod)
    return DecompositionCount(lam, count_decomposition(n, mod, lam), lam.count_equal(mod.r))


class _MultinomialCounter:
    """Class sizes from multiplicity vectors, with a shared factorial table.

    With ``n_0 = n - len`` zeros the class size is the multinomial
    ``n! / (n_0! n_1! ... n_r!)`` times the sign factor, which equals the
    ``|Pi| * C(n, len)`` form.
    """

    def __init__(self, n: int, mod: Modulus):
        self.n = n
        self.mod = mod
        self._fact = [1] * (n + 1)
        for i in range(1, n + 1):
            self._fact[i] = self._fact[i - 1] * i

    def __call__(self, mult: tuple[int, ...]) -> int:
        ell = sum(mult)
        if ell > self.n:
            return 0
        fact = self._fact
        den = fact[self.n - ell]
        for c in mult:
            if c > 1:
                den *= fact[c]
        signs = ell - mult[self.mod.r - 1] if self.mod.is_even else ell
        return (fact[self.n] // den) << signs


def _class_multiplicities(n: int, mod: Modulus, t: int) -> Iterator[tuple[int, ...]]:
    if mod.r == 0:
        return
    for mult in enumerate_multiplicities(t, mod.r):
        if sum(mult) <= n:
            yield mult


def count_sphere(n: int, mod: Modulus | int, t: int) -> int:
    """Size of the Lee sphere: vectors of length ``n`` with Lee weight ``t``."""
    mod = as_modulus(mod)
    if n < 0 or t < 0:
        raise DomainError("n and t must be >= 0")
    if t == 0:
        return 1
    if t > n * mod.r:
        return 0
    counter = _MultinomialCounter(n, mod)
    return sum(counter(mult) for mult in _class_multiplicities(n, mod, t))


@dataclass(frozen=True)
class PartitionDistribution:
    """Exact law of the weight decomposition of a uniform sphere element.

    ``entries`` pairs each admissible partition with its probability
    ``count / total_count`` as a :class:`~fractions.Fraction`. ``counts``
    keeps the integer class sizes so draws can be made with exact integer
    arithmetic.
    """

    n: int
    m: int
    t: int
    entries: tuple[tuple[Partition, Fraction], ...]
    total_count: int
    counts: tuple[int, ...] = field(repr=False)
    _cumulative: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        acc, cum = 0, []
        for c in self.counts:
            acc += c
            cum.append(acc)
        object.__setattr__(self, "_cumulative", tuple(cum))

    @property
    def modulus(self) -> Modulus:
        return Modulus(self.m)

    def __len__(self) -> int:
        return len(self.entries)

    def probability(self, lam: Partition) -> Fraction:
        for p, prob in self.entries:
            if p == lam:
                return prob
        return Fraction(0)

    def partition_at(self, u: int) -> Partition:
        """Partition whose cumulative count interval contains ``u``.

        ``u`` ranges over ``[0, total_count)``; exactly ``count(lam)`` values
        of ``u`` map to each ``lam``.
        """
        if not 0 <= u < self.total_count:
            raise DomainError(f"u={u} outside [0, {self.total_count})")
        from bisect import bisect_right

        return self.entries[bisect_right(self._cumulative, u)][0]

    def draw(self, rng) -> Partition:
        from .sampler import random_below

        return self.partition_at(random_below(rng, self.total_count))

    def to_record(self, tool_version: str | None = None) -> dict:
        from . import __version__

        return {
            "format": RECORD_FORMAT,
            "version": RECORD_VERSION,
            "tool_version": tool_version or __version__,
            "n": self.n,
            "m": self.m,
            "t": self.t,
            "total_count": str(self.total_count),
            "entries": [
                {
                    "parts": list(lam.parts),
                    "numerator": str(prob.numerator),
                    "denominator": str(prob.denominator),
                }
                for lam, prob in self.entries
            ],
        }

    @classmethod
    def from_record(cls, record: dict) -> PartitionDistribution:
        if record.get("format") != RECORD_FORMAT or record.get("version") != RECORD_VERSION:
            raise DomainError("not a partition-distribution record of a supported version")
        total = int(record["total_count"])
        entries, counts = [], []
        for item in record["entries"]:
            prob = Fraction(int(item["numerator"]), int(item["denominator"]))
            entries.append((Partition(tuple(item["parts"])), prob))
            count = prob * total
            if count.denominator != 1:
                raise DomainError("probability inconsistent with total_count")
            counts.append(int(count))
        if sum(counts) != total:
            raise DomainError("probabilities do not sum to one")
        return cls(int(record["n"]), int(record["m"]), int(record["t"]), tuple(entries), total, tuple(counts))

    def dumps(self) -> str:
        return json.dumps(self.to_record(), indent=1)

    @classmethod
    def loads(cls, text: str) -> PartitionDistribution:
        return cls.from_record(json.loads(text))


def build_partition_distribution(n: int, mod: Modulus | int, t: int) -> PartitionDistribution:
    """Exact partition law for the sphere of weight ``t`` (``0 < t <= n*r``)."""
    mod = as_modulus(mod)
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    if t <= 0 or t > n * mod.r:
        raise DomainError(f"need 0 < t <= n*r = {n * mod.r}, got t={t}")
    counter = _MultinomialCounter(n, mod)
    parts, counts = [], []
    for mult in _class_multiplicities(n, mod, t):
        parts.append(Partition.from_multiplicities({i + 1: c for i, c in enumerate(mult) if c}))
        counts.append(counter(mult))
    total = sum(counts)
    entries = tuple((lam, Fraction(c, total)) for lam, c in zip(parts, counts))
    return PartitionDistribution(n, mod.m, t, entries, total, tuple(counts))
