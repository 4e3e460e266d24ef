import numpy as np
import pytest

from votedelegation.delegation import DelegationScenario, post_delegation_win_probability
from votedelegation.errors import ValidationError
from votedelegation.montecarlo import (
    BLOCK_SIZE,
    Estimate,
    LargeElectionParams,
    block_generator,
    mc_large_election,
    mc_win_probability,
)

TWO_DELEGATORS = DelegationScenario((1, 2, 4), (1, 1), 0.7)


def test_two_delegators_million_replicates():
    est = mc_win_probability(TWO_DELEGATORS, 10**6, seed=2024)
    assert abs(est.point - 553 / 750) < 0.003
    assert est.ci_low <= est.point <= est.ci_high
    assert est.replicates == 10**6 and est.seed == 2024


def test_symmetric_half():
    est = mc_win_probability(DelegationScenario((1, 1, 1), (), 0.5), 20_000, seed=3)
    assert est.contains(0.5)


def test_dominant_no_delegation_within_ci():
    est = mc_win_probability(DelegationScenario((1, 2, 4), (), 0.7), 20_000, seed=4)
    assert est.contains(0.7)


def test_ties_are_scored_half():
    # Two equal voters with opposite votes tie; P(A) = p^2 + p(1-p).
    est = mc_win_probability(DelegationScenario((1, 1), (), 0.6), 50_000, seed=9)
    assert est.ties > 0
    assert est.contains(0.6)


@pytest.mark.parametrize("reps", [0, 99, -5])
def test_replicates_too_small(reps):
    with pytest.raises(ValidationError, match="replicates too small"):
        mc_win_probability(TWO_DELEGATORS, reps, seed=0)
    with pytest.raises(ValidationError, match="replicates too small"):
        mc_large_election(LargeElectionParams(100, 0.6, 0), reps, seed=0)


def test_seed_determinism_and_thread_invariance():
    a = mc_win_probability(TWO_DELEGATORS, 3 * BLOCK_SIZE + 17, seed=77)
    b = mc_win_probability(TWO_DELEGATORS, 3 * BLOCK_SIZE + 17, seed=77)
    c = mc_win_probability(TWO_DELEGATORS, 3 * BLOCK_SIZE + 17, seed=77, threads=4)
    assert a == b == c
    assert mc_win_probability(TWO_DELEGATORS, 3 * BLOCK_SIZE + 17, seed=78) != a
    params = LargeElectionParams(300, 0.55, 300)
    assert mc_large_election(params, 9000, seed=1) == mc_large_election(params, 9000, seed=1, threads=3)


def test_block_streams_are_distinct():
    x = block_generator(5, 0).random(8)
    y = block_generator(5, 1).random(8)
    z = block_generator(6, 0).random(8)
    assert not np.array_equal(x, y) and not np.array_equal(x, z)
    assert np.array_equal(x, block_generator(5, 0).random(8))


def test_oracle_agreement_across_seeds():
    s = DelegationScenario((2, 1, 3, 1), (1, 2), 0.65)
    exact = post_delegation_win_probability(s)
    hits = 0
    for seed in range(100):
        est = mc_win_probability(s, 2000, seed=seed)
        hits += abs(est.point - exact) <= 4 * est.half_width
    assert hits >= 99


def test_wilson_interval():
    est = mc_win_probability(TWO_DELEGATORS, 5000, seed=1, interval="wilson")
    assert est.ci_low <= est.point <= est.ci_high
    assert est.contains(553 / 750)
    with pytest.raises(ValidationError):
        mc_win_probability(TWO_DELEGATORS, 5000, seed=1, interval="bogus")


def test_estimate_serialisation():
    est = Estimate(0.5, 0.4, 0.6, 100, 1)
    assert est.to_dict() == {"point": 0.5, "ci_low": 0.4, "ci_high": 0.6, "replicates": 100, "seed": 1}
    assert est.width == pytest.approx(0.2)


# --- Poisson large election ---------------------------------------------------


def test_large_election_params_validation():
    for bad in [dict(n=0, p=0.6), dict(n=-3, p=0.6), dict(n=10, p=1.2), dict(n=10, p=0.6, m=-1)]:
        with pytest.raises(ValidationError):
            LargeElectionParams(**bad)


def test_large_election_no_delegators():
    # K - L has mean 400 and sd ~44.7, so A loses with negligible probability.
    est = mc_large_election(LargeElectionParams(2000, 0.6, 0), 10_000, seed=1)
    assert est.point >= 0.99


def test_large_election_with_delegators():
    est = mc_large_election(LargeElectionParams(2000, 0.6, 2000), 10_000, seed=1)
    assert est.point >= 0.99


def test_large_election_unanimous_support():
    est = mc_large_election(LargeElectionParams(50, 1.0, 37), 1000, seed=8)
    assert est.point == 1.0


def test_large_election_empty_electorate_is_tie():
    # Mean 1e-9: essentially every replicate has no voters at all.
    est = mc_large_election(LargeElectionParams(1e-9, 0.6, 5), 1000, seed=0)
    assert est.ties == 1000 and est.point == 0.5


def test_large_election_monotone_concentration():
    for seed in range(10):
        small = mc_large_election(LargeElectionParams(250, 0.6, 250), 10_000, seed=seed)
        large = mc_large_election(LargeElectionParams(4000, 0.6, 4000), 10_000, seed=seed)
        assert large.point >= small.point - small.width
