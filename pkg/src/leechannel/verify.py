"""Desk-scale verification suites run by ``leechannel verify``.

Each suite compares a fast path with an independent oracle: partition-sum
counts against brute-force enumeration, the sampler's exact output law
against ``1/|S|``, empirical uniformity by chi-square, and the symmetry of
the scalar scores.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import counting, sampler, scalar_mult
from .channel import CLOSED_FORM, ELEMENTWISE
from .lee_core import Modulus

COUNTING_CASES = [(m, n) for m in range(4, 10) for n in range(1, 11) if m**n <= 10**6]
UNIFORMITY_MAX_SPHERE = 200
UNIFORMITY_CASES = [(m, n) for m in range(2, 10) for n in range(1, 5)]
CHI_SQUARE_CASES = [(7, 4, 5), (8, 3, 6), (5, 5, 4)]
CHI_SQUARE_DRAWS = 8000
CHI_SQUARE_SEEDS = 10
CHI_SQUARE_ALPHA = 1e-3


@dataclass
class SuiteResult:
    name: str
    status: str = "PASS"
    cases: int = 0
    skipped: int = 0
    failures: list[str] = field(default_factory=list)

    def fail(self, msg: str) -> None:
        self.status = "FAIL"
        self.failures.append(msg)

    def line(self) -> str:
        status = "SKIP" if self.status == "PASS" and self.cases == 0 else self.status
        text = f"{status} {self.name}: {self.cases} cases checked, {self.skipped} skipped"
        if self.failures:
            text += "; " + "; ".join(self.failures[:3])
        return text


def counting_suite(budget: int) -> SuiteResult:
    res = SuiteResult("counting-vs-enumeration")
    for m, n in COUNTING_CASES:
        if m**n > budget:
            res.skipped += 1
            continue
        mod = Modulus(m)
        hist = sampler.weight_histogram(n, mod, budget)
        counts = [counting.count_sphere(n, mod, t) for t in range(n * mod.r + 1)]
        if counts != [int(h) for h in hist]:
            res.fail(f"m={m} n={n}: counts differ from enumeration")
        if sum(counts) != m**n:
            res.fail(f"m={m} n={n}: sphere sizes do not sum to m**n")
        res.cases += 1
    return res


def uniformity_suite(budget: int) -> SuiteResult:
    res = SuiteResult("exact-uniformity")
    for m, n in UNIFORMITY_CASES:
        mod = Modulus(m)
        for t in range(1, n * mod.r + 1):
            if m**n > budget:
                res.skipped += 1
                continue
            sphere = {v.as_tuple() for v in sampler.enumerate_sphere(n, mod, t, budget)}
            if len(sphere) > UNIFORMITY_MAX_SPHERE:
                continue
            dist = counting.build_partition_distribution(n, mod, t)
            law = sampler.exact_output_law(dist)
            target = Fraction(1, len(sphere))
            if set(law) != sphere or any(p != target for p in law.values()):
                res.fail(f"m={m} n={n} t={t}: output law is not uniform")
            tree = sampler.SplitTree(n, mod, t, leaf_size=1)
            tree_law = tree.partition_law()
            for lam, p in dist.entries:
                mult = [0] * mod.r
                for part in lam.parts:
                    mult[part - 1] += 1
                if tree_law.get(tuple(mult), 0) != p:
                    res.fail(f"m={m} n={n} t={t}: split-tree law differs at {lam}")
                    break
            res.cases += 1
    return res


def chi_square_suite(budget: int, seed: int) -> SuiteResult:
    res = SuiteResult("chi-square-uniformity")
    for m, n, t in CHI_SQUARE_CASES:
        if m**n > budget:
            res.skipped += 1
            continue
        sphere = sampler.sphere_array(n, m, t, budget)
        dist = counting.build_partition_distribution(n, m, t)
        passes = 0
        for rng in np.random.SeedSequence(seed).spawn(CHI_SQUARE_SEEDS):
            state = sampler.SamplerState(dist, rng)
            draws = [state.sample_entries() for _ in range(CHI_SQUARE_DRAWS)]
            passes += sampler.chi_square_uniformity(draws, sphere).p_value > CHI_SQUARE_ALPHA
        if passes < CHI_SQUARE_SEEDS - 1:
            res.fail(f"m={m} n={n} t={t}: only {passes}/{CHI_SQUARE_SEEDS} seeds passed")
        res.cases += 1
    return res


def score_symmetry_suite() -> SuiteResult:
    res = SuiteResult("score-symmetry")
    betas = np.linspace(-3, 3, 13)
    for m in range(4, 65):
        for convention in (CLOSED_FORM, ELEMENTWISE):
            for beta in betas:
                scores = [scalar_mult.asymptotic_score(m, a, beta, convention) for a in range(1, m)]
                if scores[0] != 0 or scores[-1] != 0:
                    res.fail(f"m={m}: unit scalars have nonzero score")
                for a in range(1, m):
                    if scores[a - 1] != scores[m - a - 1]:
                        res.fail(f"m={m} a={a}: score(a) != score(m-a)")
        res.cases += 1
    return res


def run_all(budget: int = 10**6, seed: int = 0) -> list[SuiteResult]:
    return [counting_suite(budget), uniformity_suite(budget), chi_square_suite(budget, seed), score_symmetry_suite()]
