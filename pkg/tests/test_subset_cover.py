import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from coverlab.bounds import VIOLATED, coupon_mean
from coverlab.spaces import FiniteMetric, SeedDistribution
from coverlab.subset_cover import (
    MonotoneChain,
    NotMonotoneError,
    SubsetSampler,
    coupon_chain,
    estimate_c_of_B,
    kappa_ratio,
    monotone_chain_check,
    simulate_cover,
    two_rate_coupon,
)


def _line_metric(m):
    x = np.arange(m, dtype=float)
    return FiniteMetric(np.abs(x[:, None] - x[None, :]))


SAMPLERS = [
    SubsetSampler.uniform_singleton(7),
    SubsetSampler.random_k_subset(9, 3),
    SubsetSampler.cyclic_arc(8, 3),
    SubsetSampler.metric_ball(_line_metric(6), 1.0),
    SubsetSampler.metric_ball(_line_metric(6), 1.0, SeedDistribution.atoms([1, 4], [0.3, 0.7])),
]


# ---------------------------------------------------------------------------
# samplers


@pytest.mark.parametrize("sampler", SAMPLERS, ids=lambda s: s.kind)
def test_inclusion_probabilities_match_frequencies(sampler):
    member = sampler.draw(np.random.default_rng(0), (40_000,))
    freq = member.mean(axis=0)
    p = sampler.inclusion_probabilities()
    se = np.sqrt(p * (1 - p) / member.shape[0])
    assert np.all(np.abs(freq - p) <= 4 * se + 1e-12)


@pytest.mark.parametrize("sampler", SAMPLERS, ids=lambda s: s.kind)
def test_draw_columns_are_consistent(sampler):
    cols = np.array([0, 2, 3])
    full = sampler.draw(np.random.default_rng(1), (5, 11))
    part = sampler.draw(np.random.default_rng(1), (5, 11), cols)
    np.testing.assert_array_equal(full[..., cols], part)


def test_subset_sizes():
    assert np.all(SubsetSampler.random_k_subset(9, 3).draw(np.random.default_rng(2), 100)
                  .sum(axis=-1) == 3)
    assert np.all(SubsetSampler.cyclic_arc(8, 3).draw(np.random.default_rng(2), 100)
                  .sum(axis=-1) == 3)


def test_sampler_validation():
    with pytest.raises(ValueError, match="unknown"):
        SubsetSampler("bogus", 3)
    with pytest.raises(ValueError):
        SubsetSampler.random_k_subset(3, 4)
    with pytest.raises(ValueError, match="positive inclusion"):
        SubsetSampler.metric_ball(_line_metric(5), 0.5, SeedDistribution.atoms([0, 1]))
    with pytest.raises(ValueError):
        SubsetSampler("metric-ball", 4, space=_line_metric(5), r0=1.0)


# ---------------------------------------------------------------------------
# cover counts and terminal sets


def test_single_point_ground():
    rec = simulate_cover(SubsetSampler.uniform_singleton(1), np.random.default_rng(0))
    assert rec.cover_count == 1
    np.testing.assert_array_equal(rec.terminal, [0])


def test_full_arc_covers_at_once():
    sampler = SubsetSampler.cyclic_arc(12, 12)
    for i in range(20):
        assert simulate_cover(sampler, np.random.default_rng(i)).cover_count == 1


def test_uniform_singleton_coupon_mean():
    sampler = SubsetSampler.uniform_singleton(100)
    c = np.array([simulate_cover(sampler, np.random.default_rng(i)).cover_count
                  for i in range(10_000)])
    assert c.mean() == pytest.approx(coupon_mean(100), rel=0.02)
    assert coupon_mean(100) == pytest.approx(518.738, abs=1e-3)


@settings(max_examples=25)
@given(seed=st.integers(0, 2**32 - 1), which=st.integers(0, len(SAMPLERS) - 1))
def test_terminal_set_structure(seed, which):
    sampler = SAMPLERS[which]
    rec = simulate_cover(sampler, np.random.default_rng(seed), chunk=4096)
    assert rec.terminal.size >= 1
    np.testing.assert_array_equal(rec.terminal, np.flatnonzero(rec.first_cover == rec.cover_count))
    # replay the same stream: T is inside the last subset and uncovered before it
    member = sampler.draw(np.random.default_rng(seed), (4096,))
    c = rec.cover_count
    assert member[c - 1, rec.terminal].all()
    covered_before = member[:c - 1].any(axis=0)
    np.testing.assert_array_equal(np.flatnonzero(~covered_before), rec.terminal)
    # the union grows until it is everything exactly at step c
    union = np.logical_or.accumulate(member[:c], axis=0).sum(axis=1)
    assert np.all(np.diff(union) >= 0) and union[-1] == sampler.m


def test_c_of_B_examples():
    sampler = SubsetSampler.uniform_singleton(10)
    mean, se = estimate_c_of_B(sampler, [3], 20_000, seed=0)
    assert abs(mean - 10.0) <= 3 * se
    mean, se = estimate_c_of_B(sampler, [1, 6], 20_000, seed=1)
    assert abs(mean - 15.0) <= 3 * se
    mean, se = estimate_c_of_B(sampler, np.arange(10), 20_000, seed=2)
    assert abs(mean - coupon_mean(10)) <= 3 * se
    with pytest.raises(ValueError):
        estimate_c_of_B(sampler, [], 10, seed=0)


@pytest.mark.parametrize("sampler", SAMPLERS, ids=lambda s: s.kind)
def test_c_of_B_monotone_under_inclusion(sampler):
    # one stream for every B, so the counts are ordered pathwise
    nested = [[0], [0, 2], [0, 2, 3], list(range(sampler.m))]
    means = [estimate_c_of_B(sampler, B, 2000, seed=4)[0] for B in nested]
    assert all(a <= b for a, b in zip(means, means[1:]))


# ---------------------------------------------------------------------------
# kappa ratio


def test_kappa_uniform_singleton():
    res = kappa_ratio(SubsetSampler.uniform_singleton(100), 400, 50, seed=3)
    assert 0 < res.ratio < 10
    assert res.ci[0] <= res.ratio <= res.ci[1]
    assert np.all(res.terminal_sizes == 1)
    # c(T) of a single point is geometric with mean m
    assert res.mean_c_terminal == pytest.approx(100, rel=0.05)


def test_kappa_cyclic_arcs_bounded():
    ratios = [kappa_ratio(SubsetSampler.cyclic_arc(60, k), 200, 30, seed=k).ratio
              for k in (1, 2, 5, 10)]
    assert all(0 < r < 10 for r in ratios)


def test_kappa_deterministic_cover_is_zero():
    res = kappa_ratio(SubsetSampler.cyclic_arc(20, 20), 50, 5, seed=0)
    assert res.ratio == 0.0 and res.var_ratio == 0.0


def test_kappa_job_independent():
    s = SubsetSampler.random_k_subset(30, 4)
    a = kappa_ratio(s, 300, 10, seed=5, n_jobs=1)
    b = kappa_ratio(s, 300, 10, seed=5, n_jobs=3)
    np.testing.assert_array_equal(a.cover_counts, b.cover_counts)
    assert a.ratio == b.ratio and a.ci == b.ci


# ---------------------------------------------------------------------------
# monotone chains


def test_coupon_chain_exact_tables():
    n = 50
    chain = coupon_chain(n)
    h_expected = [sum(n / k for k in range(1, j + 1)) for j in range(n + 1)]
    np.testing.assert_allclose(chain.h, h_expected, rtol=1e-12)
    assert chain.max_drop == pytest.approx(n)
    assert chain.mean == pytest.approx(coupon_mean(n))
    var = n**2 * sum(1 / k**2 for k in range(1, n + 1))
    assert chain.var == pytest.approx(var, rel=1e-10)
    assert chain.var / chain.mean == pytest.approx(18.06, abs=0.01)


def test_coupon_chain_of_one_is_exponential():
    chain = coupon_chain(1)
    assert chain.mean == pytest.approx(1.0)
    assert chain.var == pytest.approx(1.0)
    assert chain.max_drop == pytest.approx(1.0)


def test_coupon_chain_simulation():
    chain = coupon_chain(50)
    rep, stats = monotone_chain_check(chain, 100_000, seed=6)
    assert stats.var == pytest.approx(chain.var, rel=0.10)
    assert stats.mean == pytest.approx(chain.mean, rel=0.01)
    assert rep.verdict != VIOLATED and rep.rhs_formula == pytest.approx(50.0)


def test_two_rate_coupon():
    chain = two_rate_coupon(3, 4, 0.3)
    # h on the boundary (a, 0) is the one-class coupon time with rate p
    assert chain.h[chain.index[(3, 0)]] == pytest.approx(3 / 0.3 * (1 + 1 / 2 + 1 / 3))
    assert chain.var / chain.mean <= chain.max_drop
    rep, stats = monotone_chain_check(chain, 20_000, seed=7)
    assert rep.verdict != VIOLATED
    assert abs(stats.mean - chain.mean) <= 4 * stats.se_mean
    with pytest.raises(ValueError):
        two_rate_coupon(2, 2, 1.0)


def test_non_monotone_chain_rejected():
    # from "a" one can jump to the slow state "c", raising the expected time to go
    transitions = {"a": [("t", 1.0), ("c", 1.0)], "c": [("t", 0.01)]}
    with pytest.raises(NotMonotoneError):
        MonotoneChain(["a", "c", "t"], transitions, {"t"}, "a")


def test_chain_without_exit_rejected():
    with pytest.raises(ValueError, match="no outgoing"):
        MonotoneChain(["a", "b", "t"], {"a": [("t", 1.0)], "b": []}, {"t"}, "a")


def test_chain_simulation_job_free_and_deterministic():
    chain = coupon_chain(5)
    a = chain.simulate(5000, seed=1)
    b = chain.simulate(5000, seed=1)
    np.testing.assert_array_equal(a, b)
    assert math.isclose(a.mean(), chain.mean, rel_tol=0.05)
