"""The constant Lee weight channel and its maximum-entropy marginal.

Two conventions tie the Lagrange multiplier ``beta`` to the normalised Lee
weight ``delta``:

``elementwise``
    The mean Lee weight of the Boltzmann law ``P(e) ~ exp(-beta w_L(e))``
    over all m ring elements. Each nonzero weight below ``r`` is carried by
    two elements (and ``r`` by one when m is even).

``closed-form``
    The mean of ``i`` under ``exp(-beta i)`` for ``i = 0..r``, one entry per
    weight value. Its closed form with ``k = r + 1`` is

        ((k-1) x^(k+1) - k x^k + x) / ((x^k - 1)(x - 1)),   x = exp(-beta).

    This is the convention behind the standard δ* table (δ*(8) = 1.534).

The two agree only at ``beta -> ±inf``; for odd m their ``beta = 0`` means
are ``r(r+1)/m`` and ``r/2`` respectively.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError
from .lee_core import Modulus, RingVector, as_modulus, vector_add

ELEMENTWISE = "elementwise"
CLOSED_FORM = "closed-form"
CONVENTIONS = (ELEMENTWISE, CLOSED_FORM)

BETA_BRACKET = 50.0


@dataclass(frozen=True)
class MarginalDistribution:
    modulus: Modulus
    beta: float
    probabilities: tuple[float, ...]
    delta: float

    def as_array(self) -> np.ndarray:
        return np.array(self.probabilities)


@dataclass(frozen=True)
class EmpiricalDistribution:
    modulus: Modulus
    frequencies: tuple[Fraction, ...]
    n: int

    def as_array(self) -> np.ndarray:
        return np.array([float(f) for f in self.frequencies])


def apply_channel(x: RingVector, e: RingVector) -> RingVector:
    """Channel output ``y = x + e`` over Z_m."""
    return vector_add(x, e)


def _boltzmann_weights(values: np.ndarray, beta: float) -> np.ndarray:
    # Shift the exponent so the largest weight is exp(0); avoids overflow.
    expo = -beta * values.astype(float)
    return np.exp(expo - expo.max())


def boltzmann_marginal(mod: Modulus | int, beta: float) -> MarginalDistribution:
    """``P*(e) = kappa exp(-beta w_L(e))`` over Z_m, with its mean Lee weight."""
    mod = as_modulus(mod)
    if not math.isfinite(beta):
        raise DomainError("beta must be finite")
    w = mod.weight_table()
    p = _boltzmann_weights(w, beta)
    p /= p.sum()
    return MarginalDistribution(mod, float(beta), tuple(float(v) for v in p), float(w @ p))


def elementwise_mean(mod: Modulus | int, beta: float) -> float:
    mod = as_modulus(mod)
    w = mod.weight_table()
    p = _boltzmann_weights(w, beta)
    return float(w @ p / p.sum())


def elementwise_uniform_mean(mod: Modulus | int) -> float:
    """Mean Lee weight of the uniform law on Z_m (``beta = 0``)."""
    mod = as_modulus(mod)
    return float(Fraction(int(mod.weight_table().sum()), mod.m))


def closed_form_delta(k: int, beta: float) -> float:
    """Mean of ``i`` under weights ``exp(-beta i)``, ``i = 0..k-1``, in closed form.

    Uses the rational expression in ``x = exp(-beta)`` written with expm1 so
    it stays accurate for moderate ``|beta|``, the cumulant series around the
    removable singularity at 0 (whose limit is ``(k-1)/2``), and a rescaled
    form for large ``|beta|``.
    """
    if k < 1:
        raise DomainError("k must be >= 1")
    if k == 1:
        return 0.0
    if beta == 0.0:
        return (k - 1) / 2
    if abs(beta) * k < 1.0:
        return _closed_form_series(k, beta)
    s = -beta  # the expression is naturally written in x = exp(s)
    if k * s > 30:
        # divide numerator and denominator by exp((k+1)s)
        num = (k - 1) - k * math.exp(-s) + math.exp(-k * s)
        den = math.expm1(-k * s) * math.expm1(-s)
        return num / den
    num = math.exp(s) * ((k - 1) * math.expm1(k * s) - k * math.expm1((k - 1) * s))
    den = math.expm1(k * s) * math.expm1(s)
    return num / den


def _closed_form_series(k: int, beta: float) -> float:
    # delta(beta) = sum_n kappa_n (-beta)^(n-1) / (n-1)!, with the cumulants of
    # the uniform law on {0..k-1}: kappa_1 = (k-1)/2, kappa_2j = B_2j (k^2j - 1) / 2j,
    # odd ones zero. Converges for |beta| < 2 pi / k.
    total = (k - 1) / 2
    for j, b2j in enumerate(_BERNOULLI_EVEN, start=1):
        n = 2 * j
        kappa = b2j * (k**n - 1) / n
        total -= kappa * beta ** (n - 1) / math.factorial(n - 1)
    return total


_BERNOULLI_EVEN = tuple(
    float(Fraction(a, b))
    for a, b in [(1, 6), (-1, 30), (1, 42), (-1, 30), (5, 66), (-691, 2730), (7, 6),
                 (-3617, 510), (43867, 798), (-174611, 330), (854513, 138), (-236364091, 2730)]
)


def closed_form_mean(mod: Modulus | int, beta: float) -> float:
    mod = as_modulus(mod)
    return closed_form_delta(mod.r + 1, beta)


def _bisect_decreasing(f: Callable[[float], float], target: float) -> float:
    """Root of ``f(beta) = target`` for ``f`` strictly decreasing, to machine precision."""
    lo, hi = -BETA_BRACKET, BETA_BRACKET
    while f(lo) < target:
        lo *= 2
        if lo < -1e6:
            raise DomainError("delta too close to the upper limit to bracket")
    while f(hi) > target:
        hi *= 2
        if hi > 1e6:
            raise DomainError("delta too close to zero to bracket")
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if f(mid) > target:
            lo = mid
        else:
            hi = mid
    return lo if abs(f(lo) - target) <= abs(f(hi) - target) else hi


def _check_delta(mod: Modulus, delta: float) -> None:
    if not (0.0 < delta < mod.r):
        raise DomainError(f"delta out of range: need 0 < delta < r = {mod.r}, got {delta}")


def solve_beta_elementwise(mod: Modulus | int, delta: float) -> float:
    """``beta`` whose Boltzmann marginal over Z_m has mean Lee weight ``delta``."""
    mod = as_modulus(mod)
    _check_delta(mod, delta)
    if delta == elementwise_uniform_mean(mod):
        return 0.0
    return _bisect_decreasing(lambda b: elementwise_mean(mod, b), delta)


def solve_beta_closed_form(mod: Modulus | int, delta: float) -> float:
    """Root ``beta`` of the closed-form mean equation with ``k = r + 1``."""
    mod = as_modulus(mod)
    _check_delta(mod, delta)
    k = mod.r + 1
    if delta == (k - 1) / 2:
        return 0.0
    return _bisect_decreasing(lambda b: closed_form_delta(k, b), delta)


def solve_beta(mod: Modulus | int, delta: float, convention: str = ELEMENTWISE) -> float:
    if convention == ELEMENTWISE:
        return solve_beta_elementwise(mod, delta)
    if convention == CLOSED_FORM:
        return solve_beta_closed_form(mod, delta)
    raise DomainError(f"unknown convention {convention!r}; expected one of {CONVENTIONS}")


def marginal_for_delta(mod: Modulus | int, delta: float, convention: str = ELEMENTWISE) -> MarginalDistribution:
    return boltzmann_marginal(mod, solve_beta(mod, delta, convention))


def _as_probabilities(p) -> np.ndarray:
    if isinstance(p, (MarginalDistribution, EmpiricalDistribution)):
        p = p.as_array()
    arr = np.asarray([float(v) for v in p], dtype=float)
    if (arr < 0).any():
        raise DomainError("probabilities must be nonnegative")
    if abs(arr.sum() - 1.0) > 1e-9:
        raise DomainError(f"probabilities sum to {arr.sum()}, not 1")
    return arr


def entropy(p: Sequence[float]) -> float:
    """Shannon entropy in nats; zero entries contribute nothing."""
    arr = _as_probabilities(p)
    nz = arr[arr > 0]
    return float(-(nz * np.log(nz)).sum()) + 0.0


def kl_divergence(q: Sequence[float], p: Sequence[float]) -> float:
    """``D(Q || P)`` in nats. Requires ``P > 0`` wherever ``Q > 0``."""
    qa, pa = _as_probabilities(q), _as_probabilities(p)
    if qa.shape != pa.shape:
        raise DomainError("distributions have different supports")
    mask = qa > 0
    if (pa[mask] == 0).any():
        raise DomainError("Q is not absolutely continuous with respect to P")
    return max(0.0, float((qa[mask] * np.log(qa[mask] / pa[mask])).sum()))


def empirical_distribution(x: RingVector) -> EmpiricalDistribution:
    """Relative frequency of each ring element among the entries of ``x``."""
    n = len(x)
    if n < 1:
        raise DomainError("empty vector")
    counts = np.bincount(x.entries, minlength=x.modulus.m)
    return EmpiricalDistribution(x.modulus, tuple(Fraction(int(c), n) for c in counts), n)


def empirical_kl(entries: np.ndarray, p_star: np.ndarray) -> float:
    """``D(Q_x || P*)`` straight from an entry array (no Fractions)."""
    q = np.bincount(entries, minlength=p_star.size) / entries.size
    mask = q > 0
    return max(0.0, float((q[mask] * np.log(q[mask] / p_star[mask])).sum()))
