"""Post-delegation analysis.

Each delegator hands their whole weight to one voter chosen uniformly at
random, independently of everyone else.  The resulting weight vector is
random; the win probability after delegation averages the conventional
win probability over that distribution.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.special import gammaln, xlog1py, xlogy

from .errors import CapacityError, ValidationError
from .model import (
    ENUM_CAP,
    MAX_TOTAL_WEIGHT,
    DistributionKind,
    WeightVector,
    _as_int,
    _BLOCK_BITS,
    _INT64_SAFE_TOTAL,
    as_weight_vector,
    check_probability,
    check_weights,
    classify,
    doubled_tallies_batch,
    dw_win_probability,
    iter_subset_sums,
    probability_from_tallies,
    size_coefficients,
    win_probability,
)

ASSIGNMENT_CAP = 10**7
FAST_PATH_M_CAP = 10**5


@dataclass(frozen=True)
class DelegationScenario:
    """Voters' weights, delegators' weights and the support probability ``p``."""

    voters: WeightVector
    delegators: tuple[int, ...]
    p: float

    def __post_init__(self):
        voters = as_weight_vector(self.voters)
        if voters.n < 2:
            raise ValidationError("a delegation scenario needs at least 2 voters")
        delegators = check_weights(self.delegators, what="delegator weight", allow_empty=True)
        if voters.total + sum(delegators) > MAX_TOTAL_WEIGHT:
            raise ValidationError("combined voter and delegator weight does not fit in 64 bits")
        object.__setattr__(self, "voters", voters)
        object.__setattr__(self, "delegators", delegators)
        object.__setattr__(self, "p", check_probability(self.p))

    @property
    def n(self) -> int:
        return self.voters.n

    @property
    def m(self) -> int:
        return len(self.delegators)

    @property
    def total(self) -> int:
        return self.voters.total + sum(self.delegators)

    def to_dict(self) -> dict:
        return {"voters": list(self.voters), "delegators": list(self.delegators), "p": self.p}


@dataclass(frozen=True)
class OutcomeDistribution:
    """Post-delegation weight vectors with their probabilities.

    ``counts[v]`` is the number of the ``denominator`` equally likely
    delegation assignments that produce vector ``v``; vectors keep voter
    order.  Treat ``counts`` as read-only.
    """

    counts: dict[tuple[int, ...], int]
    denominator: int

    def __len__(self):
        return len(self.counts)

    def __iter__(self):
        return iter(self.counts)

    def probability(self, vector) -> Fraction:
        return Fraction(self.counts.get(tuple(vector), 0), self.denominator)

    @property
    def probabilities(self) -> dict[tuple[int, ...], float]:
        return {v: c / self.denominator for v, c in self.counts.items()}


def enumerate_post_delegation(scenario: DelegationScenario, cap: int = ASSIGNMENT_CAP) -> OutcomeDistribution:
    """Group all ``n**m`` delegation assignments by the weight vector they produce.

    Delegators are folded in one at a time and identical vectors are merged
    immediately, so memory tracks the number of distinct vectors.
    """
    n, m = scenario.n, scenario.m
    if n**m > cap:
        raise CapacityError(
            f"{n}**{m} delegation assignments exceed cap {cap}; "
            "use the equal-weight fast path or Monte Carlo"
        )
    counts: dict[tuple[int, ...], int] = {scenario.voters.weights: 1}
    for d in scenario.delegators:
        nxt: dict[tuple[int, ...], int] = defaultdict(int)
        for vec, c in counts.items():
            for i in range(n):
                grown = list(vec)
                grown[i] += d
                nxt[tuple(grown)] += c
        counts = dict(nxt)
    return OutcomeDistribution(counts, n**m)


def _vector_probabilities(vectors: list[tuple[int, ...]], p: float, method: str) -> list[float]:
    out: list[float | None] = [None] * len(vectors)
    pending = []
    for i, vec in enumerate(vectors):
        if method == "auto" and classify(vec).kind is DistributionKind.DOMINANT_WEIGHT:
            out[i] = dw_win_probability(p)
        elif method in ("auto", "enum") and len(vec) <= _BLOCK_BITS:
            pending.append(i)
        else:
            out[i] = win_probability(vec, p, method=method)
    if pending:
        tallies = doubled_tallies_batch([vectors[i] for i in pending])
        for i, tally in zip(pending, tallies):
            out[i] = probability_from_tallies(tally, p)
    return out


def post_delegation_win_probability(
    scenario: DelegationScenario, method: str = "auto", cap: int = ASSIGNMENT_CAP
) -> float:
    """P(A wins) after delegation, averaged over all delegation assignments.

    ``method`` selects how each post-delegation vector is evaluated
    (``auto``, ``enum`` or ``dp``; see :func:`model.win_probability`).
    """
    dist = enumerate_post_delegation(scenario, cap=cap)
    vectors = list(dist.counts)
    probs = _vector_probabilities(vectors, scenario.p, method)
    by_value: dict[float, int] = defaultdict(int)
    for vec, prob in zip(vectors, probs):
        by_value[prob] += dist.counts[vec]
    if len(by_value) == 1:
        # Every assignment gives the same value; keep it bit-exact.
        return next(iter(by_value))
    return math.fsum(prob * c for prob, c in by_value.items()) / dist.denominator


def _binomial_tables(n: int, m: int) -> tuple[np.ndarray, np.ndarray]:
    """pmf and upper tails of Binomial(m, k/n) for k = 0..n, computed in log space.

    ``tail[k, j]`` is P(X >= j); column ``m + 1`` is zero.
    """
    h = np.arange(m + 1, dtype=float)
    q = np.arange(n + 1, dtype=float)[:, None] / n
    log_comb = gammaln(m + 1.0) - gammaln(h + 1.0) - gammaln(m - h + 1.0)
    with np.errstate(divide="ignore"):
        pmf = np.exp(log_comb[None, :] + xlogy(h[None, :], q) + xlog1py(m - h[None, :], -q))
    tail = np.zeros((n + 1, m + 2))
    tail[:, : m + 1] = np.cumsum(pmf[:, ::-1], axis=1)[:, ::-1]
    return pmf, tail


def equalweight_delegation_probability(
    voters, m: int, p, cap: int = ENUM_CAP, m_cap: int = FAST_PATH_M_CAP
) -> float:
    """P(A wins) after ``m`` unit-weight delegators have delegated.

    Conditioned on the A-supporters being ``S``, the number of delegations
    landing in ``S`` is Binomial(m, |S|/n), so only a binomial tail is needed
    per subset rather than all ``n**m`` assignments.
    """
    w = as_weight_vector(voters)
    m = _as_int(m, "delegator count")
    p = check_probability(p)
    if m < 0:
        raise ValidationError("delegator count must be >= 0")
    if w.n > cap:
        raise CapacityError(f"{w.n} voters exceed enumeration cap {cap}; use Monte Carlo")
    if m > m_cap:
        raise CapacityError(f"{m} delegators exceed fast-path cap {m_cap}; use Monte Carlo")
    n, total = w.n, w.total
    if total + m > _INT64_SAFE_TOTAL:
        raise CapacityError("fast path needs total weight below 2**62; use Monte Carlo")
    pmf, tail = _binomial_tables(n, m)
    per_size = np.zeros(n + 1)
    for sums, sizes in iter_subset_sums(w):
        # A wins iff 2*(A-side + h) > total + m, i.e. h > (total + m - 2*A-side) / 2.
        thr2 = (total + m) - 2 * sums.astype(np.int64)
        first_win = np.clip(thr2 // 2 + 1, 0, m + 1)
        share = tail[sizes, first_win]
        tie_h = thr2 // 2
        tie = (thr2 % 2 == 0) & (tie_h >= 0) & (tie_h <= m)
        share = share + 0.5 * np.where(tie, pmf[sizes, np.clip(tie_h, 0, m)], 0.0)
        per_size += np.bincount(sizes, weights=share, minlength=n + 1)
    coefs = size_coefficients(n, p)
    return math.fsum(c * s for c, s in zip(coefs, per_size))


def adversarial_delegator_weights(voters, m: int) -> tuple[int, ...]:
    """Delegator weights that always create a dominant voter after delegation.

    ``m - 1`` delegators carry weight 1 and the last carries one more than
    everyone else combined, so whoever receives it holds a strict majority.
    """
    w = as_weight_vector(voters)
    m = _as_int(m, "delegator count")
    if m < 1:
        raise ValidationError("adversarial construction needs m >= 1")
    big = (m - 1) + w.total + 1
    if w.total + (m - 1) + big > MAX_TOTAL_WEIGHT:
        raise ValidationError("adversarial delegator weight overflows 64 bits")
    return (1,) * (m - 1) + (big,)
