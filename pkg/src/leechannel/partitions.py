"""Integer partitions with bounded part size.

Partitions are yielded in decreasing lexicographic order, e.g. for ``t = 4``
and ``max_part = 3``::

    (3, 1), (2, 2), (2, 1, 1), (1, 1, 1, 1)
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from math import factorial, prod
from typing import Iterator

from .errors import DomainError


@dataclass(frozen=True, order=False)
class Partition:
    """A non-increasing tuple of positive parts."""

    parts: tuple[int, ...]

    def __post_init__(self):
        parts = tuple(int(p) for p in self.parts)
        if any(p <= 0 for p in parts):
            raise DomainError(f"parts must be positive: {parts}")
        if any(a < b for a, b in zip(parts, parts[1:])):
            raise DomainError(f"parts must be non-increasing: {parts}")
        object.__setattr__(self, "parts", parts)

    @classmethod
    def from_parts(cls, parts) -> Partition:
        """Build from parts in any order."""
        return cls(tuple(sorted(parts, reverse=True)))

    @classmethod
    def from_multiplicities(cls, mult: dict[int, int]) -> Partition:
        parts: list[int] = []
        for value in sorted(mult, reverse=True):
            parts.extend([value] * mult[value])
        return cls(tuple(parts))

    @property
    def total(self) -> int:
        return sum(self.parts)

    @property
    def length(self) -> int:
        return len(self.parts)

    @property
    def multiplicities(self) -> dict[int, int]:
        """Map part value -> number of occurrences."""
        return dict(Counter(self.parts))

    def count_equal(self, value: int) -> int:
        return self.parts.count(value)

    def __iter__(self):
        return iter(self.parts)

    def __len__(self) -> int:
        return len(self.parts)

    def __repr__(self) -> str:
        return f"Partition{self.parts}"


def enumerate_partitions(t: int, max_part: int, length_filter: int | None = None) -> Iterator[Partition]:
    """Yield every partition of ``t`` with parts ``<= max_part``, exactly once.

    Order is decreasing lexicographic. With ``length_filter`` set only
    partitions with that many parts are produced. Memory use is O(t) per
    stream regardless of how many partitions exist.
    """
    if t < 0:
        raise DomainError(f"t must be >= 0, got {t}")
    if max_part < 1:
        raise DomainError(f"max_part must be >= 1, got {max_part}")
    for parts in _partitions(t, max_part, length_filter):
        yield Partition(parts)


def _partitions(t, max_part, length_filter):
    if length_filter is not None and not (0 <= length_filter <= t):
        return
    for parts in _descending(t, max_part):
        if length_filter is None or len(parts) == length_filter:
            yield parts


def _descending(t, cap):
    # Successor rule: lower the last part > 1 by one, then refill the freed
    # weight greedily with copies of the lowered value.
    if t == 0:
        yield ()
        return
    cap = min(cap, t)
    a = [cap] * (t // cap)
    if t % cap:
        a.append(t % cap)
    while True:
        yield tuple(a)
        ones = 0
        while a and a[-1] == 1:
            a.pop()
            ones += 1
        if not a:
            return
        v = a.pop() - 1
        free = ones + v + 1
        q, rem = divmod(free, v)
        a.extend([v] * q)
        if rem:
            a.append(rem)


def permutation_count(lam: Partition) -> int:
    """Number of distinct orderings of the parts: ``len! / prod(n_i!)``."""
    return factorial(lam.length) // prod(factorial(c) for c in lam.multiplicities.values())


def count_partitions(t: int, max_part: int) -> int:
    """Number of partitions of ``t`` with parts ``<= max_part`` (no enumeration)."""
    if t < 0:
        return 0
    ways = [1] + [0] * t
    for part in range(1, min(max_part, t) + 1):
        for s in range(part, t + 1):
            ways[s] += ways[s - part]
    return ways[t]


def enumerate_multiplicities(t: int, max_part: int) -> Iterator[tuple[int, ...]]:
    """Yield partitions of ``t`` as multiplicity vectors ``(n_1, ..., n_k)``.

    ``k = max_part`` and ``n_i`` counts the parts equal to ``i``. The order
    matches :func:`enumerate_partitions`. This is the compact form used for
    counting when partitions have thousands of parts.
    """
    if t < 0:
        raise DomainError(f"t must be >= 0, got {t}")
    if max_part < 1:
        raise DomainError(f"max_part must be >= 1, got {max_part}")
    k = max_part
    mult = [0] * k

    def rec(value, remaining):
        if value == 1:
            mult[0] = remaining
            yield tuple(mult)
            return
        for c in range(remaining // value, -1, -1):
            mult[value - 1] = c
            yield from rec(value - 1, remaining - c * value)
        mult[value - 1] = 0

    yield from rec(k, t)
