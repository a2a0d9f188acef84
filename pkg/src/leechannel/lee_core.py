"""Lee-metric arithmetic over the ring Z_m."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class Modulus:
    """The ring Z_m together with its Lee radius ``r = floor(m/2)``."""

    m: int
    r: int = field(init=False)
    is_even: bool = field(init=False)

    def __post_init__(self):
        if isinstance(self.m, bool) or int(self.m) != self.m or self.m < 2:
            raise DomainError(f"modulus must be an integer >= 2, got {self.m!r}")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "r", self.m // 2)
        object.__setattr__(self, "is_even", self.m % 2 == 0)

    @property
    def max_weight(self) -> int:
        return self.r

    def weight_table(self) -> np.ndarray:
        """Lee weight of every ring element, indexed by element."""
        a = np.arange(self.m, dtype=np.int64)
        return np.minimum(a, self.m - a)


def as_modulus(mod: Modulus | int) -> Modulus:
    return mod if isinstance(mod, Modulus) else Modulus(mod)


class RingVector:
    """An immutable vector over Z_m with entries stored canonically in [0, m-1].

    Entries are held in a read-only int64 array so that large vectors can be
    handled with numpy; equality and hashing go through the canonical bytes.
    """

    __slots__ = ("modulus", "entries")

    def __init__(self, entries: Iterable[int] | np.ndarray, modulus: Modulus | int):
        mod = as_modulus(modulus)
        arr = np.array(entries, dtype=np.int64).reshape(-1)
        if arr.size and (arr.min() < 0 or arr.max() >= mod.m):
            raise DomainError(f"entries must lie in [0, {mod.m - 1}]")
        arr.setflags(write=False)
        object.__setattr__(self, "modulus", mod)
        object.__setattr__(self, "entries", arr)

    @classmethod
    def reduce(cls, entries: Iterable[int] | np.ndarray, modulus: Modulus | int) -> RingVector:
        """Build a vector from arbitrary integers, reducing them mod m."""
        mod = as_modulus(modulus)
        return cls(np.mod(np.asarray(entries, dtype=np.int64), mod.m), mod)

    @classmethod
    def zeros(cls, n: int, modulus: Modulus | int) -> RingVector:
        return cls(np.zeros(n, dtype=np.int64), modulus)

    def __setattr__(self, name, value):
        raise AttributeError("RingVector is immutable")

    def __len__(self) -> int:
        return int(self.entries.size)

    def __iter__(self):
        return (int(v) for v in self.entries)

    def __getitem__(self, i):
        return int(self.entries[i])

    def __eq__(self, other) -> bool:
        if not isinstance(other, RingVector):
            return NotImplemented
        return self.modulus == other.modulus and np.array_equal(self.entries, other.entries)

    def __hash__(self) -> int:
        return hash((self.modulus.m, self.entries.tobytes()))

    def __repr__(self) -> str:
        return f"RingVector({self.as_tuple()}, m={self.modulus.m})"

    def as_tuple(self) -> tuple[int, ...]:
        return tuple(int(v) for v in self.entries)


def lee_weight_scalar(a: int, mod: Modulus | int) -> int:
    """Lee weight ``min(a, m - a)`` of a ring element ``a`` in [0, m-1]."""
    mod = as_modulus(mod)
    if not 0 <= a < mod.m:
        raise DomainError(f"element {a} is not in [0, {mod.m - 1}]")
    return min(a, mod.m - a)


def lee_weights(entries: np.ndarray, m: int) -> np.ndarray:
    """Elementwise Lee weights of canonical entries (no range checks)."""
    return np.minimum(entries, m - entries)


def lee_weight_vector(x: RingVector) -> int:
    return int(lee_weights(x.entries, x.modulus.m).sum())


def _check_compatible(x: RingVector, y: RingVector) -> None:
    if x.modulus != y.modulus:
        raise DomainError(f"moduli differ: {x.modulus.m} vs {y.modulus.m}")
    if len(x) != len(y):
        raise DomainError(f"lengths differ: {len(x)} vs {len(y)}")


def lee_distance(x: RingVector, y: RingVector) -> int:
    """Lee weight of ``x - y``."""
    _check_compatible(x, y)
    m = x.modulus.m
    return int(lee_weights(np.mod(x.entries - y.entries, m), m).sum())


def scalar_vector_product(a: int, x: RingVector) -> RingVector:
    """Entrywise ``a * x_i mod m``."""
    m = x.modulus.m
    if not 0 <= a < m:
        raise DomainError(f"scalar {a} is not in [0, {m - 1}]")
    return RingVector(np.mod(a * x.entries, m), x.modulus)


def vector_add(x: RingVector, y: RingVector) -> RingVector:
    _check_compatible(x, y)
    return RingVector(np.mod(x.entries + y.entries, x.modulus.m), x.modulus)
