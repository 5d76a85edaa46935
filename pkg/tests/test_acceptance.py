"""Acceptance suite: one test per criterion, at the stated tolerances.

Each test is self-contained and uses its own fixed seed. Run with
``pytest -v tests/test_acceptance.py``; the criterion number leads each
test name.
"""

import math
import pathlib

import numpy as np
import pytest

from coverlab.bounds import (
    VIOLATED,
    coupon_mean,
    growth_var_check,
    min_mu_construction,
    min_mu_lower,
    min_mu_upper,
)
from coverlab.circle_pch import (
    c_star_circle,
    circle_params,
    empirical_vs_pch,
    uncovered_gap_stats,
    uncovered_point_prob,
)
from coverlab.experiments import evenly_spaced_vs_uniform, min_mu_search, run, segment_example
from coverlab.experiments.runners import default_r_grid
from coverlab.fixed_radius import FixedRadiusConfig, sample_cover_counts
from coverlab.growth import (
    c_star,
    cover_time_exact,
    cover_time_net,
    estimate_cover_stats,
    sample_cover_times,
    sample_point_cover_times,
    simulate_realization,
)
from coverlab import _rng
from coverlab.spaces import Circle, FiniteMetric, SeedDistribution, epsilon_net
from coverlab.subset_cover import (
    SubsetSampler,
    coupon_chain,
    kappa_ratio,
    monotone_chain_check,
    simulate_cover,
)

COUPON_100 = 518.738


def _line(criterion, ok, detail):
    print(f"\ncriterion {criterion:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


# ---------------------------------------------------------------------------


def test_01_pathwise_diameter_bound():
    params = circle_params(100.0)
    c, tau1 = sample_cover_times(params, 10_000, seed=101)
    over = int(np.sum(c > tau1 + params.space.diameter))
    under = int(np.sum(c < tau1))
    _line(1, over == under == 0, f"C > tau1 + diam: {over}, C < tau1: {under}")
    assert over == 0 and under == 0


def test_02_lipschitz_sandwich():
    eps = 0.01
    params = circle_params(100.0)
    net = epsilon_net(params.space, eps)
    assert net.mesh <= eps
    bad = 0
    for i in range(1000):
        real = simulate_realization(params, _rng.replicate_stream(102, i))
        exact = cover_time_exact(real, 1.0)
        c_net = cover_time_net(real, net, 1.0)
        bad += not (c_net <= exact <= c_net + eps)
    _line(2, bad == 0, f"sandwich violations over 1000 paths: {bad}")
    assert bad == 0


def test_03_circle_c_star():
    params = circle_params(100.0)
    net = epsilon_net(params.space, 1.0)
    point_times = sample_point_cover_times(params, net.points, 10_000, seed=103)
    empirical = float(point_times.mean(axis=0).max())
    quad = c_star(params, net).value
    closed = c_star_circle(100.0)
    rel_emp = abs(empirical / 8.8623 - 1)
    rel_quad = abs(quad / closed - 1)
    ok = rel_emp <= 0.02 and rel_quad <= 1e-6
    _line(3, ok, f"max-over-net mean {empirical:.4f} (rel {rel_emp:.2e}), "
                 f"quadrature {quad:.9f} vs {closed:.9f} (rel {rel_quad:.1e})")
    assert closed == pytest.approx(8.8623, abs=1e-4)
    assert rel_emp <= 0.02
    assert rel_quad <= 1e-6


@pytest.mark.parametrize("L", [100.0, 1000.0])
def test_04_growth_variance_bound(L):
    params = circle_params(L)
    stats = estimate_cover_stats(params, 10_000, seed=104)
    cs = c_star(params, epsilon_net(params.space, 1.0)).value
    rep = growth_var_check(stats, cs)
    _line(4, rep.verdict != VIOLATED,
          f"L={L:g}: var(C/EC)={rep.lhs_empirical:.5f} +- {rep.lhs_se:.5f}, "
          f"c*/EC={rep.rhs_formula:.5f} ({rep.verdict})")
    assert rep.verdict != VIOLATED


def test_05_coupon_oracle():
    assert coupon_mean(100) == pytest.approx(COUPON_100, abs=1e-3)
    sampler = SubsetSampler.uniform_singleton(100)
    subset = np.array([simulate_cover(sampler, _rng.replicate_stream(105, i)).cover_count
                       for i in range(10_000)], dtype=float)
    cfg = FixedRadiusConfig(FiniteMetric.equilateral(100), SeedDistribution.uniform(), 0.5)
    fixed = sample_cover_counts(cfg, 10_000, seed=205).astype(float)
    rel_s = abs(subset.mean() / COUPON_100 - 1)
    rel_f = abs(fixed.mean() / COUPON_100 - 1)
    _line(5, rel_s <= 0.01 and rel_f <= 0.01,
          f"subset mean {subset.mean():.2f} (rel {rel_s:.4f}), "
          f"fixed-radius mean {fixed.mean():.2f} (rel {rel_f:.4f})")
    assert rel_s <= 0.01
    assert rel_f <= 0.01


def test_06_monotone_chain_bound():
    n = 50
    chain = coupon_chain(n)
    exact_var = n**2 * sum(1 / k**2 for k in range(1, n + 1))
    assert chain.var == pytest.approx(exact_var, rel=1e-12)
    rep, stats = monotone_chain_check(chain, 100_000, seed=106)
    rel = abs(stats.var / exact_var - 1)
    ratio = chain.var / chain.mean
    ok = rel <= 0.10 and ratio <= 50 and rep.verdict != VIOLATED
    _line(6, ok, f"sim var {stats.var:.1f} vs exact {exact_var:.1f} (rel {rel:.4f}); "
                 f"var/E = {ratio:.3f} <= max drop {chain.max_drop:g}")
    assert rel <= 0.10
    assert ratio <= 50 and chain.max_drop == pytest.approx(50)
    assert rep.verdict != VIOLATED


def test_07_pch_distribution():
    big = empirical_vs_pch(1e4, 1000, seed=107)
    small = empirical_vs_pch(1e2, 1000, seed=107)
    ok = big.ks_pch <= 0.1 and big.ks_pch <= small.ks_pch + 0.02
    _line(7, ok, f"KS(L=1e4) = {big.ks_pch:.4f}, KS(L=1e2) = {small.ks_pch:.4f}")
    assert big.ks_pch <= 0.1
    assert big.ks_pch <= small.ks_pch + 0.02


def test_08_uncovered_point_law():
    L = 1e4
    t = math.sqrt(L * math.log(2))
    point = uncovered_point_prob(L, t, 10_000, seed=108)
    arc = uncovered_point_prob(L, t, 10_000, seed=208, a=50.0)
    z_p = abs(point.probability - 0.5) / point.se
    z_a = abs(arc.probability - arc.predicted) / arc.se
    _line(8, z_p <= 3 and z_a <= 3,
          f"point {point.probability:.4f} vs 0.5 ({z_p:.2f} SE); "
          f"arc {arc.probability:.4f} vs {arc.predicted:.4f} ({z_a:.2f} SE)")
    assert point.predicted == pytest.approx(0.5)
    assert z_p <= 3
    assert z_a <= 3


def test_09_gap_law():
    L = 1e4
    t = math.sqrt(L * math.log(2))
    gaps = uncovered_gap_stats(L, t, 10_000, seed=109)
    rel = abs(gaps.mean_A1 / (L / t) - 1)
    ok = gaps.n >= 1000 and rel <= 0.05 and gaps.ks_A1 <= 0.05
    _line(9, ok, f"n = {gaps.n}, mean {gaps.mean_A1:.2f} vs {L / t:.2f} (rel {rel:.4f}), "
                 f"KS {gaps.ks_A1:.4f}")
    assert gaps.n >= 1000
    assert rel <= 0.05
    assert gaps.ks_A1 <= 0.05


def test_10_segment_example():
    res = segment_example(1000.0, 10_000, seed=110)
    dev = abs(res.atom_mass - math.exp(-1))
    _line(10, res.sup_distance <= 0.05 and dev <= 0.03,
          f"sup distance {res.sup_distance:.4f}, atom mass {res.atom_mass:.4f}")
    assert res.sup_distance <= 0.05
    assert dev <= 0.03


def test_11_min_mu_brackets():
    space = Circle(100.0)
    support = np.arange(20) * 100.0 / 20
    found = min_mu_search(space, support, 2000, iters=5, seed=111)
    lower = min_mu_lower(space)
    r_star, _ = min_mu_upper(space, default_r_grid(space))
    cons, _, violations = min_mu_construction(space, r_star, 2000, seed=211)
    ok = lower <= found.mean <= cons.mean + 3 * cons.se_mean and violations == 0
    _line(11, ok, f"lower {lower:.4f} <= search {found.mean:.3f} <= construction "
                  f"{cons.mean:.3f} + 3*{cons.se_mean:.3f}; pathwise violations {violations}")
    assert lower <= found.mean
    assert found.mean <= cons.mean + 3 * cons.se_mean
    assert violations == 0


def test_12_even_vs_uniform():
    fixed = evenly_spaced_vs_uniform(20, "fixed", 100_000, seed=112)
    growth = evenly_spaced_vs_uniform(20, "growth", 100_000, seed=112)
    ok = fixed.mean_even <= fixed.mean_unif + 3 * fixed.se_diff
    _line(12, ok, f"fixed: even {fixed.mean_even:.3f} vs uniform {fixed.mean_unif:.3f} "
                  f"(diff SE {fixed.se_diff:.3f}); growth recorded: even "
                  f"{growth.mean_even:.3f} vs uniform {growth.mean_unif:.3f}")
    assert ok
    assert math.isfinite(growth.mean_even) and math.isfinite(growth.mean_unif)


def test_13_kappa_ratio_guard():
    samplers = {
        "uniform-singleton:20": SubsetSampler.uniform_singleton(20),
        "uniform-singleton:100": SubsetSampler.uniform_singleton(100),
        "cyclic-arc:60:1": SubsetSampler.cyclic_arc(60, 1),
        "cyclic-arc:60:2": SubsetSampler.cyclic_arc(60, 2),
        "cyclic-arc:60:5": SubsetSampler.cyclic_arc(60, 5),
    }
    parts, ok = [], True
    for j, (name, sampler) in enumerate(samplers.items()):
        res = kappa_ratio(sampler, 1000, 100, seed=113 + j)
        good = (math.isfinite(res.ratio) and all(map(math.isfinite, res.ci))
                and res.ci[0] <= res.ratio <= res.ci[1] and res.ratio < 10)
        ok &= good
        parts.append(f"{name} {res.ratio:.3f} [{res.ci[0]:.3f}, {res.ci[1]:.3f}]")
    _line(13, ok, "; ".join(parts))
    assert ok


def test_14_determinism_across_thread_counts(tmp_path, monkeypatch):
    configs = {
        "even.ini": "[experiment]\nkind = even-vs-uniform\nseed = 114\nreps = 3000\n"
                    "[space]\nkind = circle\nL = 12\n[model]\nr0 = 0.5\n",
        "growth.ini": "[experiment]\nkind = growth-concentration\nseed = 214\nreps = 1500\n"
                      "[space]\nkind = torus\nL1 = 4\nL2 = 3\n[params]\nnet_eps = 0.2\n",
        "kappa.ini": "[experiment]\nkind = subset-kappa\nseed = 314\n[params]\n"
                     "samplers = uniform-singleton:20, cyclic-arc:30:2\nouter_reps = 600\n"
                     "inner_reps = 20\nchains = coupon:10\nchain_reps = 10000\n",
    }
    outputs = {}
    for jobs in (1, 8):
        monkeypatch.setenv("COVERLAB_OUTPUT_DIR", str(tmp_path / f"jobs{jobs}"))
        for name, text in configs.items():
            path = tmp_path / name
            path.write_text(text)
            res = run(path, n_jobs=jobs)
            for csv_name in res.summary["outputs"]:
                p = pathlib.Path(res.out_dir) / csv_name
                outputs.setdefault((name, csv_name), []).append(p.read_bytes())
    differing = [k for k, v in outputs.items() if v[0] != v[1]]
    _line(14, not differing, f"{len(outputs)} CSV files compared, differing: {differing}")
    assert len(outputs) >= 3
    assert not differing
