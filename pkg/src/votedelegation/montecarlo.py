"""Seeded Monte-Carlo estimators.

Replicates are grouped into fixed blocks of ``BLOCK_SIZE``.  Block ``b``
draws from a Philox generator whose key comes from the seed and whose
counter starts at ``b`` in its third word, so every block owns a disjoint
counter range.  The block layout does not depend on the thread count and
the reduction is an integer tally of wins, ties and losses, which makes
results bit-identical for any ``threads`` value.

Poisson and binomial draws use numpy's ``Generator`` samplers: inversion
for small means and transformed rejection (PTRS / BTPE) for large ones.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .delegation import DelegationScenario
from .errors import ValidationError
from .model import _INT64_SAFE_TOTAL, _as_int, check_probability

BLOCK_SIZE = 4096
MIN_REPLICATES = 100
Z_95 = 1.959963984540054


@dataclass(frozen=True)
class Estimate:
    point: float
    ci_low: float
    ci_high: float
    replicates: int
    seed: int
    wins: int = 0
    ties: int = 0

    @property
    def half_width(self) -> float:
        return (self.ci_high - self.ci_low) / 2

    @property
    def width(self) -> float:
        return self.ci_high - self.ci_low

    def contains(self, value: float) -> bool:
        return self.ci_low <= value <= self.ci_high

    def to_dict(self) -> dict:
        return {
            "point": self.point,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "replicates": self.replicates,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class LargeElectionParams:
    """Poisson population scale ``n``, support probability ``p``, unit delegators ``m``."""

    n: float
    p: float
    m: int = 0

    def __post_init__(self):
        n = float(self.n)
        if not n > 0 or math.isinf(n):
            raise ValidationError(f"population scale n must be a positive real, got {self.n}")
        m = _as_int(self.m, "delegator count")
        if m < 0:
            raise ValidationError("delegator count must be >= 0")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "p", check_probability(self.p))


def block_generator(seed: int, block: int) -> np.random.Generator:
    key = np.random.SeedSequence(seed).generate_state(2, dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=[0, 0, block, 0]))


def _check_run(replicates, seed) -> tuple[int, int]:
    replicates = _as_int(replicates, "replicates")
    if replicates < MIN_REPLICATES:
        raise ValidationError(f"replicates too small: {replicates} < {MIN_REPLICATES}")
    seed = _as_int(seed, "seed")
    if seed < 0:
        raise ValidationError("seed must be non-negative")
    return replicates, seed


def _interval(wins: int, ties: int, replicates: int, method: str) -> tuple[float, float, float]:
    r = replicates
    point = (wins + 0.5 * ties) / r
    if method == "wilson":
        z2 = Z_95 * Z_95
        centre = (point + z2 / (2 * r)) / (1 + z2 / r)
        half = Z_95 / (1 + z2 / r) * math.sqrt(max(point * (1 - point), 0.0) / r + z2 / (4 * r * r))
        low, high = centre - half, centre + half
    elif method == "normal":
        # Scores are 1, 1/2, 0; sample variance of the score, continuity corrected.
        second = (wins + 0.25 * ties) / r
        var = max(second - point * point, 0.0) * r / (r - 1)
        half = Z_95 * math.sqrt(var / r) + 0.5 / r
        low, high = point - half, point + half
    else:
        raise ValidationError(f"unknown interval method {method!r}")
    return point, max(0.0, min(low, point)), min(1.0, max(high, point))


def _run_blocks(block_fn, replicates: int, threads: int) -> tuple[int, int]:
    sizes = [min(BLOCK_SIZE, replicates - start) for start in range(0, replicates, BLOCK_SIZE)]
    jobs = list(enumerate(sizes))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda job: block_fn(*job), jobs))
    else:
        parts = [block_fn(b, size) for b, size in jobs]
    return sum(w for w, _ in parts), sum(t for _, t in parts)


def mc_win_probability(
    scenario: DelegationScenario,
    replicates: int,
    seed: int,
    threads: int = 1,
    interval: str = "normal",
) -> Estimate:
    """Sampling estimate of the post-delegation win probability.

    Each replicate draws a uniform target voter for every delegator and an
    independent Bernoulli(p) preference for every voter, then scores the
    outcome 1, 1/2 or 0 with exact integer weight comparison.
    """
    replicates, seed = _check_run(replicates, seed)
    if scenario.total > _INT64_SAFE_TOTAL:
        raise ValidationError("Monte Carlo needs combined weight below 2**62")
    n, m, p = scenario.n, scenario.m, scenario.p
    base = np.array(scenario.voters.weights, dtype=np.int64)
    delegators = np.array(scenario.delegators, dtype=np.int64)
    total = scenario.total

    def block(b: int, size: int) -> tuple[int, int]:
        rng = block_generator(seed, b)
        targets = rng.integers(0, n, size=(size, m))
        support = rng.random((size, n)) < p
        weights = np.tile(base, (size, 1))
        rows = np.arange(size)
        for j in range(m):
            weights[rows, targets[:, j]] += delegators[j]
        doubled = 2 * np.where(support, weights, 0).sum(axis=1)
        return int(np.count_nonzero(doubled > total)), int(np.count_nonzero(doubled == total))

    wins, ties = _run_blocks(block, replicates, threads)
    point, low, high = _interval(wins, ties, replicates, interval)
    return Estimate(point, low, high, replicates, seed, wins, ties)


def mc_large_election(
    params: LargeElectionParams,
    replicates: int,
    seed: int,
    threads: int = 1,
    interval: str = "normal",
) -> Estimate:
    """Win frequency of A in a Poisson-sized equal-weight electorate.

    Per replicate: K ~ Poisson(n p) A-voters and L ~ Poisson(n (1-p))
    B-voters, then ``m`` unit delegations spread uniformly over the K + L
    voters.  A ties score 1/2, including the empty electorate.
    """
    replicates, seed = _check_run(replicates, seed)
    lam_a = params.n * params.p
    lam_b = params.n * (1.0 - params.p)
    m = params.m

    def block(b: int, size: int) -> tuple[int, int]:
        rng = block_generator(seed, b)
        k = rng.poisson(lam_a, size)
        l = rng.poisson(lam_b, size)
        voters = k + l
        share_a = np.divide(k, voters, out=np.zeros(size), where=voters > 0)
        e_k = rng.binomial(m, share_a)
        e_l = np.where(voters > 0, m - e_k, 0)
        surplus = (k + e_k) - (l + e_l)
        return int(np.count_nonzero(surplus > 0)), int(np.count_nonzero(surplus == 0))

    wins, ties = _run_blocks(block, replicates, threads)
    point, low, high = _interval(wins, ties, replicates, interval)
    return Estimate(point, low, high, replicates, seed, wins, ties)
