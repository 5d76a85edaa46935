import csv
import math

import numpy as np
import pytest
from scipy.optimize import brentq

from coverlab import _rng
from coverlab.circle_pch import (
    BAND,
    PchPrediction,
    Y_MAX,
    _arrivals,
    c_star_circle,
    circle_params,
    empirical_vs_pch,
    g_inverse,
    gumbel_cdf,
    gumbel_sup_distance,
    pch_cdf,
    pch_cdf_monotone,
    sigma_of_L,
    t0_of_L,
    uncovered_gap_stats,
    uncovered_point_prob,
    variance_orders,
    write_gap_csv,
    write_plot_csv,
)
from coverlab.growth import c_star
from coverlab.spaces import epsilon_net

L_GRID = (1e2, 1e4, 1e6)


# ---------------------------------------------------------------------------
# G, t0 and sigma


def test_g_inverse_exact_point():
    assert g_inverse(2 * math.exp(-4)) == pytest.approx(2.0, abs=1e-12)


@pytest.mark.parametrize("y", [0.1, 1e-3, 1e-6, 1e-30, Y_MAX])
def test_g_inverse_round_trip(y):
    x = g_inverse(y)
    assert abs(x * math.exp(-x * x) - y) <= 1e-12
    assert x >= 1 / math.sqrt(2)


@pytest.mark.parametrize("y", [0.3, 1e-2, 1e-4])
def test_g_inverse_against_brentq(y):
    root = brentq(lambda x: x * math.exp(-x * x) - y, 1 / math.sqrt(2), 50.0, xtol=1e-15)
    assert g_inverse(y) == pytest.approx(root, abs=1e-10)


@pytest.mark.parametrize("y", [0.0, -1.0, 0.5, Y_MAX * 1.0001])
def test_g_inverse_domain(y):
    with pytest.raises(ValueError):
        g_inverse(y)


@pytest.mark.parametrize("L", L_GRID)
def test_t0_identities(L):
    t0, sigma = t0_of_L(L), sigma_of_L(L)
    assert t0 * math.exp(-t0 * t0 / L) == pytest.approx(1.0, abs=1e-9)
    assert pch_cdf(L, t0) == pytest.approx(math.exp(-1), abs=1e-9)
    assert 2 * t0 * sigma == pytest.approx(L, rel=1e-12)


def test_t0_growth_and_sigma_trend():
    ratios = [t0_of_L(L) / math.sqrt(L * math.log(math.sqrt(L))) for L in L_GRID]
    assert all(1.0 <= r <= 1.2 for r in ratios)
    G = [g_inverse(L ** -0.5) for L in L_GRID]
    assert G[0] < G[1] < G[2]
    rel = [sigma_of_L(L) / t0_of_L(L) for L in L_GRID]
    assert rel[0] > rel[1] > rel[2]
    for L, g, r in zip(L_GRID, G, rel):
        assert r == pytest.approx(1 / (2 * g * g))


def test_t0_domain():
    with pytest.raises(ValueError):
        t0_of_L(5.0)
    with pytest.raises(ValueError):
        sigma_of_L(-1.0)


# ---------------------------------------------------------------------------
# predicted laws


def test_pch_cdf_shape():
    L = 1e4
    assert pch_cdf(L, 0.0) == 1.0
    t = np.linspace(math.sqrt(L / 2), 10 * math.sqrt(L), 5000)
    assert np.all(np.diff(pch_cdf(L, t)) >= 0)
    assert pch_cdf(L, 1e6) == pytest.approx(1.0)
    assert pch_cdf_monotone(L, 10.0) == 0.0
    assert pch_cdf_monotone(L, 200.0) == pch_cdf(L, 200.0)


def test_gumbel_convergence_is_monotone():
    sups = [gumbel_sup_distance(L) for L in L_GRID]
    assert sups[0] > sups[1] > sups[2]
    assert gumbel_cdf(0.0) == pytest.approx(math.exp(-1))


def test_prediction_object():
    pred = PchPrediction.of(1e4)
    assert pred.cdf(pred.t0) == pytest.approx(math.exp(-1))
    np.testing.assert_allclose(pred.standardize([pred.t0, pred.t0 + pred.sigma]), [0.0, 1.0])


def test_c_star_closed_form():
    assert c_star_circle(100.0) == pytest.approx(8.8622693, abs=1e-7)
    assert c_star_circle(math.pi) == pytest.approx(math.pi / 2)
    params = circle_params(1e3)
    quad = c_star(params, epsilon_net(params.space, 1.0)).value
    assert quad == pytest.approx(c_star_circle(1e3), rel=1e-6)


def test_c_star_small_circle_includes_saturation():
    # once the ball is the whole circle (t > L/2) the tail decays at rate 1,
    # which the closed form ignores; the gap is negligible except for small L
    L = 10.0
    params = circle_params(L)
    quad = c_star(params, epsilon_net(params.space, 1.0)).value
    exact = c_star_circle(L) * math.erf(math.sqrt(L) / 2) + math.exp(-L / 4)
    assert quad == pytest.approx(exact, rel=1e-9)
    assert quad - c_star_circle(L) == pytest.approx(0.011, abs=1e-3)


# ---------------------------------------------------------------------------
# simulation against the prediction


@pytest.fixture(scope="module")
def cmp_1e4():
    return empirical_vs_pch(1e4, 1000, seed=11)


def test_empirical_vs_pch(cmp_1e4):
    assert cmp_1e4.ks_pch <= 0.1
    assert cmp_1e4.t0 - cmp_1e4.sigma <= cmp_1e4.median <= cmp_1e4.t0 + 2 * cmp_1e4.sigma
    assert 0 <= cmp_1e4.ks_gumbel <= 1
    with pytest.raises(ValueError):
        empirical_vs_pch(1e4, 50, seed=0)


def test_uncovered_point_probability():
    L = 1e4
    est = uncovered_point_prob(L, math.sqrt(L * math.log(2)), 10_000, seed=12)
    assert est.predicted == pytest.approx(0.5)
    assert abs(est.probability - 0.5) <= 3 * est.se
    assert uncovered_point_prob(L, 0.0, 100, seed=0).probability == 1.0


def test_uncovered_arc_probability():
    L, t, a = 1e3, 20.0, 10.0
    est = uncovered_point_prob(L, t, 10_000, seed=13, a=a)
    assert est.predicted == pytest.approx(math.exp(-(a * t + t * t) / L))
    assert abs(est.probability - est.predicted) <= 3 * est.se
    with pytest.raises(ValueError):
        uncovered_point_prob(100.0, 60.0, 10, seed=0)


def test_gap_statistics():
    L = 1e4
    t = math.sqrt(L * math.log(2))
    gaps = uncovered_gap_stats(L, t, 10_000, seed=14)
    assert gaps.enough and gaps.n >= 1000
    assert gaps.mean_A1 == pytest.approx(L / t, rel=0.05)
    assert abs(gaps.corr) <= 0.05
    assert gaps.ks_A1 <= 0.05
    assert np.all(gaps.A1 > 0) and np.all(gaps.A2 > 0)


def test_gap_extents_against_dense_grid():
    L, t = 200.0, 10.0
    grid = np.linspace(0.0, L, 200_001)[:-1]
    step = grid[1]
    checked = 0
    for i in range(200):
        taus, pos = _arrivals(L, t, _rng.replicate_stream(3, i))
        d = np.abs(grid[:, None] - pos[None, :])
        d = np.minimum(d, L - d)
        covered = (taus[None, :] + d <= t).any(axis=1) if len(taus) else np.zeros(len(grid), bool)
        if covered[0]:
            continue
        checked += 1
        a1 = grid[np.argmax(covered)] if covered.any() else L
        a2 = L - grid[len(grid) - 1 - np.argmax(covered[::-1])] if covered.any() else L
        gaps = uncovered_gap_stats(L, t, i + 1, seed=3)
        assert gaps.A1[-1] == pytest.approx(a1, abs=step)
        assert gaps.A2[-1] == pytest.approx(a2, abs=step)
        if checked >= 8:
            break
    assert checked >= 4


def test_gap_statistics_flags_small_samples():
    gaps = uncovered_gap_stats(1e4, 250.0, 50, seed=0)
    assert not gaps.enough


def test_variance_orders_and_csvs(tmp_path, cmp_1e4):
    rows = variance_orders([cmp_1e4])
    G = g_inverse(1e-2)
    assert rows[0]["var_ratio_G4"] == pytest.approx(rows[0]["var_ratio"] * G**4)
    assert rows[0]["cstar_over_EC"] == pytest.approx(c_star_circle(1e4) / cmp_1e4.mean)

    path = tmp_path / "plot.csv"
    write_plot_csv(path, [cmp_1e4], n_grid=50)
    with open(path) as fh:
        table = list(csv.reader(fh))
    assert table[0] == ["L", "t", "empirical_cdf", "pch_cdf", "gumbel_cdf"]
    assert len(table) == 51
    vals = np.array(table[1:], dtype=float)
    assert np.all(np.diff(vals[:, 2]) >= 0) and vals[-1, 2] == 1.0

    gaps = uncovered_gap_stats(1e3, 20.0, 300, seed=1)
    path = tmp_path / "gaps.csv"
    write_gap_csv(path, gaps)
    with open(path) as fh:
        table = list(csv.reader(fh))
    assert table[0] == ["A1", "A2"] and len(table) == gaps.n + 1
    np.testing.assert_array_equal(np.array(table[1:], dtype=float)[:, 0], gaps.A1)


def test_band_constant():
    assert BAND == (0.01, 0.99)
