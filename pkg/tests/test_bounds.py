import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from coverlab._stats import summarize
from coverlab.bounds import (
    HOLDS,
    HOLDS_WITH_SLACK,
    VIOLATED,
    coupon_mean,
    ec_diameter_check,
    ec_over_cstar_upper,
    fixed_shape_ratio,
    growth_var_check,
    min_mu_construction,
    min_mu_lower,
    min_mu_upper,
    min_mu_upper_check,
    prop_fixed_rhs,
    report,
    tail_check,
    tail_envelope,
    verdict,
)
from coverlab.growth import GrowthParams, estimate_cover_stats
from coverlab.spaces import Circle, FiniteMetric, FlatTorus, SeedDistribution, Segment


def _stats(x, seed=0):
    return summarize(np.asarray(x, dtype=float), np.random.default_rng(seed))


# ---------------------------------------------------------------------------
# verdict protocol


def test_verdict_protocol():
    assert verdict(1.0, 0.1, 1.0) == HOLDS
    assert verdict(1.2, 0.1, 1.0) == HOLDS_WITH_SLACK
    assert verdict(1.3, 0.1, 1.0) == HOLDS_WITH_SLACK  # exactly three SE over
    assert verdict(1.31, 0.1, 1.0) == VIOLATED
    assert verdict(5.0, 0.0, 4.999) == VIOLATED


def test_report_serializes():
    rep = report("x", np.float64(2.0), 0.5, 1.0, grid=np.arange(3), n=np.int64(4))
    d = json.loads(json.dumps(rep.to_dict()))
    assert d["verdict"] == HOLDS_WITH_SLACK
    assert d["parameters"] == {"grid": [0, 1, 2], "n": 4}
    assert d["slack"] == -1.0


# ---------------------------------------------------------------------------
# formulas


def test_prop_fixed_rhs():
    assert prop_fixed_rhs(2, 0.2, 10.0) == pytest.approx(1.0)
    with pytest.raises(ValueError, match="full support"):
        prop_fixed_rhs(2, 0.0, 10.0)


def test_fixed_shape_ratio():
    stats = _stats([8, 10, 12, 10])
    rhs = prop_fixed_rhs(2, 0.1, stats.mean)
    assert fixed_shape_ratio(stats, 2, 0.1) == pytest.approx(stats.var_ratio / rhs)


def test_tail_envelope_values():
    assert tail_envelope(3.0, 0.0) == 1.0
    assert tail_envelope(3.0, math.e * 3.0) == pytest.approx(1.0)
    assert tail_envelope(3.0, 2 * math.e * 3.0) == pytest.approx(math.exp(-1.0))
    with pytest.raises(ValueError):
        tail_envelope(0.0, 1.0)


@given(ec=st.floats(0.01, 1e4), ts=st.lists(st.floats(0, 1e5), min_size=2, max_size=20))
def test_tail_envelope_nonincreasing(ec, ts):
    ts = np.sort(ts)
    vals = tail_envelope(ec, ts)
    assert np.all(vals <= 1.0) and np.all(vals >= 0.0)
    assert np.all(np.diff(vals) <= 0)


def test_ec_over_cstar_upper():
    grid = np.geomspace(1e-3, 10, 50)
    val, a = ec_over_cstar_upper(5.0, lambda r: 1, grid)
    assert a == grid[0] and val == pytest.approx(grid[0] + math.e**2)
    val, a = ec_over_cstar_upper(5.0, lambda r: 7, [1.0])
    assert (val, a) == (pytest.approx(1.0 + math.e * (math.e + math.log(7))), 1.0)
    with pytest.raises(ValueError):
        ec_over_cstar_upper(5.0, lambda r: 1, [])
    with pytest.raises(ValueError):
        ec_over_cstar_upper(5.0, lambda r: 1, [0.0, 1.0])


def test_min_mu_upper_by_direct_evaluation():
    space = Circle(100.0)
    grid = np.array([0.5, 1.0, 2.0, 5.0, 10.0, 60.0])
    r, val = min_mu_upper(space, grid)

    def term(r):
        k = math.ceil(100.0 / (2 * r)) if 2 * r < 100.0 else 1
        return r + k * (1 + math.log(k))

    vals = [term(x) for x in grid]
    assert val == pytest.approx(min(vals))
    assert r == grid[int(np.argmin(vals))]
    # a radius beyond the diameter contributes r + 1
    r, val = min_mu_upper(Circle(1.0), [0.6])
    assert val == pytest.approx(1.6)


def _scan_lower(cov, r_max, step):
    r = step
    while r <= r_max:
        if cov(3 * r) <= 9 * r:
            return r
        r += step
    return None


def test_min_mu_lower_circle_against_scan():
    L = 100.0

    def cov(r):
        return math.ceil(L / (2 * r)) if 2 * r < L else 1

    scanned = _scan_lower(cov, 50.0, 1e-5)
    got = min_mu_lower(Circle(L))
    assert got == pytest.approx(L / 72, abs=1e-4)
    assert got == pytest.approx(scanned, abs=2e-5)
    assert abs(got - math.sqrt(L / 54)) < 0.05


def test_min_mu_lower_equilateral_and_tiny():
    assert min_mu_lower(FiniteMetric.equilateral(4)) == pytest.approx(1 / 3, abs=1e-5)
    # a space of diameter far below 1/9: cov = 1 from the start, so r* = 1/9
    assert min_mu_lower(Segment(1e-3)) == pytest.approx(1 / 9, abs=1e-6)


def test_coupon_mean():
    assert coupon_mean(1) == 1.0
    assert coupon_mean(2) == 3.0
    h = 0.0
    for k in range(1, 101):
        h += 1.0 / k
    assert coupon_mean(100) == pytest.approx(100 * h, rel=1e-14)
    assert coupon_mean(100) == pytest.approx(518.7377517639621)
    with pytest.raises((TypeError, ValueError)):
        coupon_mean(0)


# ---------------------------------------------------------------------------
# empirical checks


def test_growth_var_check_cases():
    const = _stats(np.full(50, 4.0))
    rep = growth_var_check(const, 1.0)
    assert rep.lhs_empirical == 0.0 and rep.verdict == HOLDS
    fake = _stats([1.0, 100.0] * 100)
    rep = growth_var_check(fake, 0.1 * fake.var_ratio * fake.mean / 10)
    assert rep.lhs_empirical >= 10 * rep.rhs_formula
    assert rep.verdict == VIOLATED


def test_growth_var_check_on_circle():
    params = GrowthParams(Circle(100.0), SeedDistribution.uniform())
    stats = estimate_cover_stats(params, 1000, seed=3)
    rep = growth_var_check(stats, 0.5 * math.sqrt(math.pi * 100))
    assert rep.verdict != VIOLATED


def test_ec_diameter_check():
    params = GrowthParams(FiniteMetric([[0.0]]), SeedDistribution.uniform(), lam=2.0)
    stats = estimate_cover_stats(params, 2000, seed=4)
    rep = ec_diameter_check(stats, 0.0, 2.0, 1.0)
    assert rep.verdict != VIOLATED
    assert rep.rhs_formula == 0.5
    circle = estimate_cover_stats(GrowthParams(Circle(100.0), SeedDistribution.uniform()), 500, 5)
    rep = ec_diameter_check(circle, 50.0, 1.0, 1.0)
    assert rep.verdict == HOLDS and rep.rhs_formula == 51.0
    assert rep.parameters["diameter_ratio"] == pytest.approx(50.0 / circle.mean**2)
    low = ec_diameter_check(_stats([0.1, 0.11, 0.09, 0.1]), 1.0, 1.0, 1.0)
    assert low.verdict == VIOLATED


def test_tail_check():
    rng = np.random.default_rng(0)
    rep = tail_check(rng.exponential(2.0, 5000))
    assert rep.verdict == HOLDS
    # a heavy tail breaks the exponential envelope
    heavy = np.concatenate([np.full(950, 1.0), np.full(50, 10_000.0)])
    assert tail_check(heavy).verdict == VIOLATED
    # a small excess within three standard errors is reported as slack
    mild = np.concatenate([np.full(900, 1.0), np.full(100, 200.0)])
    rep = tail_check(mild)
    assert rep.verdict == HOLDS_WITH_SLACK and rep.lhs_empirical > 0


def test_min_mu_construction_pathwise_and_coupon():
    space = Circle(40.0)
    r = 4.0
    stats, coupon, violations = min_mu_construction(space, r, 400, seed=6)
    assert violations == 0
    k = 5
    assert stats.mean <= r + coupon_mean(k) + 3 * stats.se_mean
    assert np.all(np.isfinite(coupon) | (coupon == np.inf))


def test_min_mu_construction_on_torus_uses_net():
    stats, _, violations = min_mu_construction(FlatTorus(6.0, 6.0), 2.0, 30, seed=7)
    assert violations == 0 and stats.mean > 0


def test_min_mu_upper_check_holds():
    rep, stats = min_mu_upper_check(Circle(100.0), [2.0, 5.0, 10.0, 25.0], 400, seed=8)
    assert rep.verdict == HOLDS
    assert rep.parameters["pathwise_violations"] == 0
    assert stats.mean <= rep.parameters["coupon_mean_bound"] + 3 * stats.se_mean
