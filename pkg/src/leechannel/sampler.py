"""Exactly uniform sampling from the Lee sphere, plus the enumeration oracle.

A draw follows four steps:

1. draw a partition ``lam`` of ``t`` with probability proportional to the
   size of its weight-decomposition class;
2. draw a uniformly random support of ``len(lam)`` positions;
3. assign the parts to the support through a uniformly random bijection;
4. give every part an independent uniform sign and reduce mod m.

Step 1 is done with exact integer arithmetic, either from a materialised
:class:`~leechannel.counting.PartitionDistribution` (inverse CDF over the
integer class sizes) or, when the number of partitions is too large to
tabulate, from a :class:`SplitTree`. Both give exactly the same law.

Random streams are numpy ``Generator(PCG64(seed))``. Independent streams for
parallel work are derived with ``SeedSequence(root_seed).spawn(k)``; stream
``i`` is ``spawn(k)[i]``.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial
from typing import Iterable, Iterator, Sequence

import numpy as np
from scipy.special import gammaincc

from .counting import (
    PartitionDistribution,
    _class_multiplicities,
    _MultinomialCounter,
    build_partition_distribution,
)
from .errors import DomainError, InvariantError
from .lee_core import Modulus, RingVector, as_modulus, lee_weights
from .partitions import Partition, count_partitions

GENERATOR_NAME = "numpy.PCG64"
DEFAULT_ENUMERATION_BUDGET = 10**6
# Above this many partitions the split tree replaces the explicit table.
TABLE_LIMIT = 20_000
LEAF_SIZE = 16


class BudgetExceeded(DomainError):
    pass


def make_rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def spawn_rngs(root_seed: int, k: int) -> list[np.random.Generator]:
    """``k`` independent generators split from ``root_seed``."""
    return [np.random.Generator(np.random.PCG64(s)) for s in np.random.SeedSequence(root_seed).spawn(k)]


def random_below(rng: np.random.Generator, bound: int) -> int:
    """Exactly uniform integer in ``[0, bound)`` for arbitrarily large ``bound``."""
    if bound <= 0:
        raise DomainError("bound must be positive")
    if bound < 2**62:
        return int(rng.integers(bound))
    bits = (bound - 1).bit_length()
    nbytes = (bits + 7) // 8
    excess = nbytes * 8 - bits
    while True:
        u = int.from_bytes(rng.bytes(nbytes), "little") >> excess
        if u < bound:
            return u


def weight_multiplicities(mod: Modulus) -> list[int]:
    """Number of ring elements of each Lee weight ``0..r``."""
    mult = [1] + [2] * mod.r
    if mod.is_even and mod.r:
        mult[mod.r] = 1
    return mult


def sphere_size_row(n: int, mod: Modulus, t_max: int) -> list[int]:
    """Sphere sizes for length ``n`` and every weight ``0..t_max``.

    Coefficients of ``P(z)**n`` with ``P(z) = sum_w N_w z**w``, where ``N_w``
    counts ring elements of weight ``w``. Uses the power recurrence
    ``T f_T = sum_w ((n+1) w - T) N_w f_{T-w}``, exact in integers.
    """
    mult = weight_multiplicities(mod)
    r = mod.r
    top = min(t_max, n * r)
    row = [1] + [0] * top
    for T in range(1, top + 1):
        acc = 0
        for w in range(1, min(r, T) + 1):
            acc += ((n + 1) * w - T) * mult[w] * row[T - w]
        q, rem = divmod(acc, T)
        if rem:
            raise InvariantError("non-integral sphere coefficient")
        row[T] = q
    return row + [0] * (t_max - top)


class SplitTree:
    """Exact sampler for the partition law that never lists all partitions.

    The ``n`` positions are split recursively in halves. At a node of size
    ``N`` carrying weight ``T`` the left half receives weight ``T1`` with
    probability ``S(N1, T1) S(N2, T - T1) / S(N, T)``, where ``S`` are sphere
    sizes; leaves of at most ``leaf_size`` positions draw their own
    weight decomposition from a small exact table. Summing the leaf
    multiplicities gives the weight decomposition of a uniform sphere
    element, i.e. exactly the partition law.
    """

    def __init__(self, n: int, mod: Modulus | int, t: int, leaf_size: int = LEAF_SIZE):
        mod = as_modulus(mod)
        if n < 1 or t <= 0 or t > n * mod.r:
            raise DomainError(f"need n >= 1 and 0 < t <= n*r = {n * mod.r}")
        self.n, self.modulus, self.t = n, mod, t
        self.m = mod.m
        self.leaf_size = max(1, leaf_size)
        sizes: set[int] = set()
        stack = [n]
        while stack:
            size = stack.pop()
            if size in sizes:
                continue
            sizes.add(size)
            if size > self.leaf_size:
                stack.extend(self.split(size))
        self.rows = {size: sphere_size_row(size, mod, min(t, size * mod.r)) for size in sizes}
        self.total_count = self.rows[n][t]
        self._leaf_tables: dict[tuple[int, int], tuple[list, list]] = {}

    @staticmethod
    def split(size: int) -> tuple[int, int]:
        return size // 2, size - size // 2

    def size(self, size: int, weight: int) -> int:
        row = self.rows[size]
        return row[weight] if 0 <= weight < len(row) else 0

    def split_range(self, size: int, weight: int) -> tuple[int, int, int]:
        n1, n2 = self.split(size)
        r = self.modulus.r
        lo, hi = max(0, weight - n2 * r), min(weight, n1 * r)
        return n1, lo, hi

    def split_order(self, size: int, weight: int) -> Iterator[int]:
        """Left-half weights in scan order: from the centre outwards."""
        n1, lo, hi = self.split_range(size, weight)
        centre = min(max((weight * n1 + size // 2) // size, lo), hi)
        yield centre
        for step in itertools.count(1):
            up, down = centre + step, centre - step
            if up > hi and down < lo:
                return
            if up <= hi:
                yield up
            if down >= lo:
                yield down

    def split_weight(self, size: int, weight: int, u: int) -> int:
        """Left-half weight selected by ``u`` in ``[0, S(size, weight))``."""
        n1, n2 = self.split(size)
        left, right = self.rows[n1], self.rows[n2]
        acc = 0
        for w1 in self.split_order(size, weight):
            acc += left[w1] * right[weight - w1]
            if u < acc:
                return w1
        raise InvariantError("split weights do not sum to the node size")

    def leaf_table(self, size: int, weight: int):
        key = (size, weight)
        table = self._leaf_tables.get(key)
        if table is None:
            counter = _MultinomialCounter(size, self.modulus)
            mults, cum, acc = [], [], 0
            if weight == 0:
                mults, cum, acc = [(0,) * self.modulus.r], [1], 1
            else:
                for mult in _class_multiplicities(size, self.modulus, weight):
                    acc += counter(mult)
                    mults.append(mult)
                    cum.append(acc)
            if acc != self.size(size, weight):
                raise InvariantError("leaf table disagrees with sphere size")
            table = self._leaf_tables[key] = (mults, cum)
        return table

    def draw_multiplicities(self, rng: np.random.Generator) -> tuple[int, ...]:
        from bisect import bisect_right

        total = [0] * self.modulus.r
        stack = [(self.n, self.t)]
        while stack:
            size, weight = stack.pop()
            if size <= self.leaf_size:
                mults, cum = self.leaf_table(size, weight)
                mult = mults[bisect_right(cum, random_below(rng, cum[-1]))]
                for i, c in enumerate(mult):
                    total[i] += c
                continue
            w1 = self.split_weight(size, weight, random_below(rng, self.size(size, weight)))
            n1, n2 = self.split(size)
            stack.append((n2, weight - w1))
            stack.append((n1, w1))
        return tuple(total)

    def draw(self, rng: np.random.Generator) -> Partition:
        mult = self.draw_multiplicities(rng)
        return Partition.from_multiplicities({i + 1: c for i, c in enumerate(mult) if c})

    def partition_law(self) -> dict[tuple[int, ...], Fraction]:
        """Exact law of :meth:`draw_multiplicities`, folded over every choice.

        Exponential in the tree size; meant for checking small cases.
        """
        memo: dict[tuple[int, int], dict] = {}

        def law(size, weight):
            key = (size, weight)
            if key in memo:
                return memo[key]
            out: dict[tuple[int, ...], Fraction] = {}
            if size <= self.leaf_size:
                mults, cum = self.leaf_table(size, weight)
                prev = 0
                for mult, c in zip(mults, cum):
                    out[mult] = out.get(mult, 0) + Fraction(c - prev, cum[-1])
                    prev = c
            else:
                n1, n2 = self.split(size)
                z = self.size(size, weight)
                for w1 in self.split_order(size, weight):
                    p = Fraction(self.size(n1, w1) * self.size(n2, weight - w1), z)
                    if not p:
                        continue
                    for a, pa in law(n1, w1).items():
                        for b, pb in law(n2, weight - w1).items():
                            key2 = tuple(x + y for x, y in zip(a, b))
                            out[key2] = out.get(key2, 0) + p * pa * pb
            memo[key] = out
            return out

        return law(self.n, self.t)


def _table_multiplicities(dist: PartitionDistribution, r: int):
    cache = {}
    for lam, _ in dist.entries:
        mult = [0] * r
        for p in lam.parts:
            mult[p - 1] += 1
        cache[lam] = tuple(mult)
    return cache


class SamplerState:
    """A partition law plus a seeded random stream; owned by one consumer."""

    def __init__(self, distribution, seed: int | np.random.SeedSequence | None = 0):
        self.distribution = distribution
        self.seed = seed
        self.generator = GENERATOR_NAME
        self.rng = make_rng(seed)
        self.modulus = Modulus(distribution.m)
        self.n, self.t = distribution.n, distribution.t
        self._mult_of = None
        if isinstance(distribution, PartitionDistribution):
            self._mult_of = _table_multiplicities(distribution, self.modulus.r)

    def draw_multiplicities(self) -> tuple[int, ...]:
        if self._mult_of is not None:
            return self._mult_of[self.distribution.draw(self.rng)]
        return self.distribution.draw_multiplicities(self.rng)

    def sample_entries(self) -> np.ndarray:
        mult = self.draw_multiplicities()
        parts = np.repeat(np.arange(len(mult), 0, -1), mult[::-1])
        return place_parts(self.n, self.modulus.m, parts, self.rng)


def place_parts(n: int, m: int, parts: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Steps 2-4: random support, random bijection, random signs."""
    ell = len(parts)
    support = np.sort(rng.choice(n, size=ell, replace=False)) if ell else np.empty(0, np.int64)
    bijection = rng.permutation(ell)
    negate = rng.integers(0, 2, size=ell).astype(bool)
    return assign(n, m, parts, support, bijection, negate)


def assign(n, m, parts, support, bijection, negate) -> np.ndarray:
    """Put part ``j`` with sign ``negate[j]`` at position ``support[bijection[j]]``.

    ``negate`` may carry leading batch axes; the result then has them too.
    """
    negate = np.asarray(negate, dtype=bool)
    values = np.where(negate, m - np.asarray(parts, dtype=np.int64), parts) % m
    e = np.zeros(negate.shape[:-1] + (n,), dtype=np.int64)
    e[..., np.asarray(support, dtype=np.int64)[np.asarray(bijection, dtype=np.int64)]] = values
    return e


def choose_method(n: int, mod: Modulus, t: int) -> str:
    return "table" if count_partitions(t, mod.r) <= TABLE_LIMIT else "tree"


def make_sampler(n: int, mod: Modulus | int, t: int, seed=0, method: str = "auto", distribution=None) -> SamplerState:
    """Build a :class:`SamplerState` for the sphere ``(n, m, t)``.

    ``method`` is ``"table"``, ``"tree"`` or ``"auto"`` (table when the
    partition count is small). A prebuilt ``distribution`` takes precedence.
    """
    mod = as_modulus(mod)
    if distribution is None:
        if n < 1 or t <= 0 or t > n * mod.r:
            raise DomainError(f"need n >= 1 and 0 < t <= n*r = {n * mod.r}, got n={n}, t={t}")
        if method == "auto":
            method = choose_method(n, mod, t)
        if method == "table":
            distribution = build_partition_distribution(n, mod, t)
        elif method == "tree":
            distribution = SplitTree(n, mod, t)
        else:
            raise DomainError(f"unknown sampling method {method!r}")
    return SamplerState(distribution, seed)


def sample(state: SamplerState) -> RingVector:
    """One vector drawn uniformly from the sphere of ``state``."""
    return RingVector(state.sample_entries(), state.modulus)


def sample_many(state: SamplerState, count: int) -> list[RingVector]:
    return [sample(state) for _ in range(count)]


def _check_budget(n: int, mod: Modulus, budget: int) -> None:
    if mod.m**n > budget:
        raise BudgetExceeded(f"enumerating Z_{mod.m}^{n} needs {mod.m}**{n} = {mod.m**n} vectors, budget is {budget}")


def sphere_array(n: int, mod: Modulus | int, t: int, budget: int = DEFAULT_ENUMERATION_BUDGET) -> np.ndarray:
    """All vectors of the sphere as rows of an array, in lexicographic order."""
    mod = as_modulus(mod)
    return np.concatenate(list(_sphere_chunks(n, mod, t, budget)) or [np.empty((0, n), np.int64)])


def _sphere_chunks(n, mod, t, budget, chunk=1 << 16):
    _check_budget(n, mod, budget)
    m = mod.m
    powers = m ** np.arange(n - 1, -1, -1, dtype=np.int64)
    total = m**n
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        vecs = (idx[:, None] // powers) % m
        keep = lee_weights(vecs, m).sum(axis=1) == t
        if keep.any():
            yield vecs[keep]


def enumerate_sphere(n: int, mod: Modulus | int, t: int, budget: int = DEFAULT_ENUMERATION_BUDGET) -> Iterator[RingVector]:
    """Every vector of Z_m^n with Lee weight exactly ``t``, each once.

    Brute force over all ``m**n`` vectors; refuses when that exceeds ``budget``.
    """
    mod = as_modulus(mod)
    for block in _sphere_chunks(n, mod, t, budget):
        for row in block:
            yield RingVector(row, mod)


def weight_histogram(n: int, mod: Modulus | int, budget: int = DEFAULT_ENUMERATION_BUDGET) -> np.ndarray:
    """Brute-force count of vectors of every Lee weight ``0..n*r``."""
    mod = as_modulus(mod)
    _check_budget(n, mod, budget)
    m = mod.m
    powers = m ** np.arange(n - 1, -1, -1, dtype=np.int64)
    hist = np.zeros(n * mod.r + 1, dtype=np.int64)
    for start in range(0, m**n, 1 << 16):
        idx = np.arange(start, min(start + (1 << 16), m**n), dtype=np.int64)
        weights = lee_weights((idx[:, None] // powers) % m, m).sum(axis=1)
        hist += np.bincount(weights, minlength=hist.size)
    return hist


@dataclass(frozen=True)
class ChiSquareResult:
    statistic: float
    p_value: float
    dof: int
    observed: tuple[int, ...]


def chi_square_uniformity(samples: Iterable[RingVector | Sequence[int]], sphere: Sequence[RingVector | Sequence[int]]) -> ChiSquareResult:
    """Pearson goodness-of-fit of ``samples`` against the uniform law on ``sphere``.

    Raises :class:`InvariantError` if a sample is not in the sphere.
    """
    index = {_key(v): i for i, v in enumerate(sphere)}
    k = len(index)
    if k == 0:
        raise DomainError("empty sphere")
    observed = np.zeros(k, dtype=np.int64)
    for s in samples:
        i = index.get(_key(s))
        if i is None:
            raise InvariantError(f"sample {tuple(_key(s))} is not in the sphere")
        observed[i] += 1
    total = int(observed.sum())
    if total == 0:
        raise DomainError("no samples")
    expected = total / k
    stat = float(((observed - expected) ** 2).sum() / expected)
    dof = k - 1
    p = 1.0 if dof == 0 else float(gammaincc(dof / 2.0, stat / 2.0))
    return ChiSquareResult(stat, p, dof, tuple(int(c) for c in observed))


def _key(v) -> tuple[int, ...]:
    if isinstance(v, RingVector):
        return v.as_tuple()
    return tuple(int(x) for x in v)


def exact_output_law(distribution: PartitionDistribution) -> dict[tuple[int, ...], Fraction]:
    """Exact law of the vector produced by the four sampling steps.

    Folds over every partition, support, bijection and sign pattern, each
    weighted by its probability, and builds the vectors with :func:`assign`,
    the same placement routine the sampler uses.
    """
    n, m = distribution.n, distribution.m
    law: dict[tuple[int, ...], Fraction] = {}
    for lam, p_lam in distribution.entries:
        parts = np.array(lam.parts, dtype=np.int64)
        ell = len(parts)
        # every branch under one partition is equally likely
        weight = p_lam / (comb(n, ell) * factorial(ell) * 2**ell)
        signs = np.array(list(itertools.product((False, True), repeat=ell)), dtype=bool)
        hits: Counter[tuple[int, ...]] = Counter()
        for support in itertools.combinations(range(n), ell):
            for bijection in itertools.permutations(range(ell)):
                hits.update(map(tuple, assign(n, m, parts, support, bijection, signs).tolist()))
        for vec, k in hits.items():
            law[vec] = law.get(vec, 0) + k * weight
    return law
