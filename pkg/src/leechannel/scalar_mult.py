"""Does multiplying a fixed-weight vector by a random nonzero scalar lower its Lee weight?

For large ``n`` the entries of a uniform sphere element behave like draws
from the Boltzmann marginal, and whether scalar ``a`` lowers the weight is
decided by the sign of the score

    sum_{i=1}^{r} exp(-beta i) (i - w_L([a i]_m))              (odd m)
    sum_{i=1}^{r-1} 2 exp(-beta i) (i - w_L([a i]_m))
        + exp(-beta r) (r - w_L([a r]_m))                      (even m)

Under the ``closed-form`` convention every weight value carries
multiplicity one, so the first sum is used for every m; it is the convention
that gives the standard threshold values (δ*(8) = 1.534). The
``elementwise`` convention uses the two sums above with the elementwise
``beta``.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.stats import norm

from .channel import (
    CLOSED_FORM,
    ELEMENTWISE,
    boltzmann_marginal,
    closed_form_mean,
    elementwise_mean,
    empirical_kl,
    solve_beta,
    solve_beta_elementwise,
)
from .errors import DomainError, InvariantError
from .lee_core import Modulus, as_modulus
from .sampler import SamplerState, make_sampler

SCORE_RTOL = 1e-12
CHUNK_TRIALS = 1000
BETA_GRID = np.linspace(-50.0, 50.0, 2001)


@dataclass(frozen=True)
class ScalarScore:
    a: int
    score: float
    reduces: bool


@dataclass(frozen=True)
class ThresholdResult:
    modulus: Modulus
    delta_star: float
    critical_a: int | None
    beta_at_threshold: float
    convention: str = CLOSED_FORM


@dataclass(frozen=True)
class MonteCarloEstimate:
    trials: int
    successes: int
    estimate: float
    confidence_interval: tuple[float, float]
    n: int
    m: int
    t: int
    seed: int
    per_scalar: dict[int, tuple[int, int]] = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class BoundDecomposition:
    """Empirical terms of ``P(F) <= P(F | D < eps) + P(D >= eps)``.

    ``term1`` is ``None`` when no trial had divergence below ``eps``.
    """

    term1: float | None
    term2: float
    unconditional: MonteCarloEstimate
    epsilon: float
    close_trials: int


def _check_modulus(mod: Modulus) -> None:
    if mod.m <= 3:
        raise DomainError(f"scalar-multiplication analysis needs m > 3 (Lee and Hamming weights coincide for m <= 3), got m={mod.m}")


def score_coefficients(mod: Modulus | int, convention: str = CLOSED_FORM) -> np.ndarray:
    """Matrix ``C`` with ``score(a, beta) = sum_i C[a, i-1] exp(-beta i)``.

    Row ``a`` for ``a = 0..m-1`` (row 0 is unused and zero).
    """
    mod = as_modulus(mod)
    _check_modulus(mod)
    m, r = mod.m, mod.r
    wt = mod.weight_table()
    i = np.arange(1, r + 1)
    a = np.arange(m)[:, None]
    coef = (i - wt[(a * i) % m]).astype(float)
    coef[0] = 0.0
    if convention == ELEMENTWISE and mod.is_even:
        coef[:, : r - 1] *= 2
    elif convention not in (ELEMENTWISE, CLOSED_FORM):
        raise DomainError(f"unknown convention {convention!r}")
    return coef


def asymptotic_score(mod: Modulus | int, a: int, beta: float, convention: str = CLOSED_FORM) -> float:
    mod = as_modulus(mod)
    _check_modulus(mod)
    if not 1 <= a <= mod.m - 1:
        raise DomainError(f"scalar must be in [1, {mod.m - 1}], got {a}")
    coef = score_coefficients(mod, convention)[a]
    total = 0.0
    for i, c in enumerate(coef, start=1):
        if c:
            total += c * math.exp(-beta * i)
    return total


def _normalised_scores(coef: np.ndarray, betas: np.ndarray) -> np.ndarray:
    """Scores scaled by a positive factor per beta: same signs, no overflow.

    Returns ``(scores, scale)`` arrays of shape (len(betas), m) where
    ``scale`` is the matching sum of absolute terms.
    """
    r = coef.shape[1]
    i = np.arange(1, r + 1)
    betas = np.atleast_1d(np.asarray(betas, dtype=float))
    ref = np.where(betas < 0, r, 1)
    expo = np.exp(-betas[:, None] * (i[None, :] - ref[:, None]))
    return expo @ coef.T, expo @ np.abs(coef).T


def _positive(scores, scale) -> np.ndarray:
    return scores > SCORE_RTOL * np.maximum(scale, 1.0)


def scalar_scores(mod: Modulus | int, beta: float, convention: str = CLOSED_FORM) -> list[ScalarScore]:
    mod = as_modulus(mod)
    coef = score_coefficients(mod, convention)
    positive = _positive(*_normalised_scores(coef, np.array([beta])))[0]
    return [
        ScalarScore(a, asymptotic_score(mod, a, beta, convention), bool(positive[a]))
        for a in range(1, mod.m)
    ]


def _delta_of_beta(mod: Modulus, convention: str):
    if convention == CLOSED_FORM:
        return lambda b: closed_form_mean(mod, b)
    return lambda b: elementwise_mean(mod, b)


def asymptotic_reduction_probability(mod: Modulus | int, delta: float, convention: str = CLOSED_FORM) -> float:
    """Limit of ``P(w_L(a x) < t)`` for uniform nonzero ``a``: share of reducing scalars."""
    mod = as_modulus(mod)
    _check_modulus(mod)
    beta = solve_beta(mod, delta, convention)
    coef = score_coefficients(mod, convention)
    positive = _positive(*_normalised_scores(coef, np.array([beta])))[0]
    return float(Fraction(int(positive[1:].sum()), mod.m - 1))


def delta_star(mod: Modulus | int, tol: float = 1e-4, convention: str = CLOSED_FORM) -> ThresholdResult:
    """Largest ``delta`` at which no nonzero scalar has a positive score.

    Scores depend on ``delta`` only through ``beta``, and ``delta`` falls as
    ``beta`` grows, so the search runs on a ``beta`` grid: the last grid
    point with a positive maximal score brackets the threshold together
    with its right neighbour, and bisection narrows the bracket until the
    corresponding ``delta`` interval is shorter than ``tol``.
    """
    mod = as_modulus(mod)
    _check_modulus(mod)
    if tol <= 0:
        raise DomainError("tol must be positive")
    coef = score_coefficients(mod, convention)
    to_delta = _delta_of_beta(mod, convention)

    def any_positive(beta):
        return bool(_positive(*_normalised_scores(coef, np.array([beta])))[0].any())

    grid_pos = _positive(*_normalised_scores(coef, BETA_GRID)).any(axis=1)
    if not grid_pos.any():
        return ThresholdResult(mod, float(mod.r), None, -math.inf, convention)
    last = int(np.flatnonzero(grid_pos)[-1])
    if last == len(BETA_GRID) - 1:
        b = float(BETA_GRID[-1])
        return ThresholdResult(mod, to_delta(b), _critical(coef, b), b, convention)
    lo, hi = float(BETA_GRID[last]), float(BETA_GRID[last + 1])
    while to_delta(lo) - to_delta(hi) > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if any_positive(mid):
            lo = mid
        else:
            hi = mid
    return ThresholdResult(mod, to_delta(hi), _critical(coef, lo), hi, convention)


def _critical(coef: np.ndarray, beta: float) -> int:
    scores, _ = _normalised_scores(coef, np.array([beta]))
    row = scores[0].copy()
    row[0] = -np.inf
    return int(np.argmax(row))


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise DomainError("trials must be positive")
    z = float(norm.ppf(0.5 + confidence / 2))
    p = successes / trials
    z2n = z * z / trials
    centre = (p + z2n / 2) / (1 + z2n)
    half = z * math.sqrt(p * (1 - p) / trials + z2n / (4 * trials)) / (1 + z2n)
    # rounding can push an endpoint past p when p is 0 or 1
    return min(p, max(0.0, centre - half)), max(p, min(1.0, centre + half))


def _run_chunk(distribution, seed_seq, trials: int, p_star):
    state = SamplerState(distribution, seed_seq)
    m, t = state.modulus.m, state.t
    wt = state.modulus.weight_table()
    scalars = np.empty(trials, dtype=np.int64)
    reduced = np.empty(trials, dtype=bool)
    kl = np.full(trials, np.nan)
    for k in range(trials):
        x = state.sample_entries()
        if int(wt[x].sum()) != t:
            raise InvariantError("sampled vector has the wrong Lee weight")
        a = int(state.rng.integers(1, m))
        red = int(wt[(a * x) % m].sum()) < t
        if red and a in (1, m - 1):
            raise InvariantError(f"scalar {a} cannot change the Lee weight")
        scalars[k], reduced[k] = a, red
        if p_star is not None:
            kl[k] = empirical_kl(x, p_star)
    return scalars, reduced, kl


def _simulate(n, mod, t, trials, seed, jobs, p_star, method):
    mod = as_modulus(mod)
    _check_modulus(mod)
    if trials < 1:
        raise DomainError("trials must be >= 1")
    state = make_sampler(n, mod, t, seed, method=method)
    sizes = [CHUNK_TRIALS] * (trials // CHUNK_TRIALS)
    if trials % CHUNK_TRIALS:
        sizes.append(trials % CHUNK_TRIALS)
    seeds = np.random.SeedSequence(seed).spawn(len(sizes))
    args = [(state.distribution, s, k, p_star) for s, k in zip(seeds, sizes)]
    if jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_chunk_star, args))
    else:
        results = [_run_chunk(*a) for a in args]
    scalars = np.concatenate([r[0] for r in results])
    reduced = np.concatenate([r[1] for r in results])
    kl = np.concatenate([r[2] for r in results])
    return mod, scalars, reduced, kl


def _run_chunk_star(args):
    return _run_chunk(*args)


def _estimate(n, mod, t, seed, scalars, reduced) -> MonteCarloEstimate:
    trials, successes = int(reduced.size), int(reduced.sum())
    per = {}
    for a in range(1, mod.m):
        mask = scalars == a
        per[a] = (int(mask.sum()), int(reduced[mask].sum()))
    return MonteCarloEstimate(
        trials, successes, successes / trials, wilson_interval(successes, trials), n, mod.m, t, seed, per
    )


def monte_carlo_reduction_probability(
    n: int, mod: Modulus | int, t: int, trials: int, seed: int = 0, jobs: int = 1, method: str = "auto"
) -> MonteCarloEstimate:
    """Estimate ``P(w_L(a x) < t)`` with fresh ``x`` and ``a`` in every trial.

    Trials run in chunks of ``CHUNK_TRIALS`` with seeds spawned from
    ``seed``, so the result does not depend on ``jobs``.
    """
    mod, scalars, reduced, _ = _simulate(n, mod, t, trials, seed, jobs, None, method)
    return _estimate(n, mod, t, seed, scalars, reduced)


def reduction_bound_decomposition(
    n: int, mod: Modulus | int, t: int, epsilon: float, trials: int, seed: int = 0, jobs: int = 1, method: str = "auto"
) -> BoundDecomposition:
    """Both right-hand terms of the divergence split of ``P(F)``, from one stream.

    ``P*`` is the elementwise Boltzmann marginal for ``delta = t / n``.
    """
    if not epsilon > 0:
        raise DomainError("epsilon must be positive")
    mod = as_modulus(mod)
    _check_modulus(mod)
    if n < 1 or t <= 0 or t > n * mod.r:
        raise DomainError(f"need n >= 1 and 0 < t <= n*r = {n * mod.r}")
    delta = t / n
    if delta >= mod.r:
        # every entry sits at weight r; the marginal is the point law there
        p_star = np.zeros(mod.m)
        p_star[mod.weight_table() == mod.r] = 1.0
        p_star /= p_star.sum()
    else:
        p_star = boltzmann_marginal(mod, solve_beta_elementwise(mod, delta)).as_array()
    mod, scalars, reduced, kl = _simulate(n, mod, t, trials, seed, jobs, p_star, method)
    close = kl < epsilon
    n_close = int(close.sum())
    term1 = float(reduced[close].sum()) / n_close if n_close else None
    term2 = 1.0 - n_close / trials
    return BoundDecomposition(term1, term2, _estimate(n, mod, t, seed, scalars, reduced), float(epsilon), n_close)
