"""One runner per experiment kind.

A runner receives the validated config and a :class:`Context`; it records
estimates and :class:`~coverlab.bounds.BoundReport` objects on the context
and writes its CSV tables through it.
"""

import csv
import math
import os

import numpy as np

from .. import _rng
from .._stats import summarize
from ..bounds import (
    coupon_mean,
    ec_diameter_check,
    ec_over_cstar_upper,
    growth_var_check,
    min_mu_construction,
    min_mu_lower,
    min_mu_upper,
    prop_fixed_rhs,
    report,
    tail_check,
)
from ..circle_pch import (
    c_star_circle,
    circle_params,
    empirical_vs_pch,
    gumbel_sup_distance,
    uncovered_gap_stats,
    uncovered_point_prob,
    variance_orders,
    write_gap_csv,
    write_plot_csv,
)
from ..fixed_radius import EXACT_KINDS as FIXED_EXACT
from ..fixed_radius import FixedRadiusConfig, cover_count_bracket, sample_cover_counts
from ..growth import EXACT_KINDS as GROWTH_EXACT
from ..growth import GrowthParams, c_star, estimate_cover_stats
from ..spaces import (
    Circle,
    FiniteMetric,
    Segment,
    SeedDistribution,
    covering_number,
    dimension_d,
    epsilon_net,
    eta,
    evenly_spaced_atoms,
    space_from_dict,
)
from ..subset_cover import SubsetSampler, coupon_chain, kappa_ratio, monotone_chain_check, two_rate_coupon
from .studies import evenly_spaced_vs_uniform, min_mu_search, segment_example


def fmt(x):
    """CSV cell: integers verbatim, floats with 17 significant digits."""
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


class Context:
    def __init__(self, cfg, out_dir, n_jobs):
        self.cfg = cfg
        self.out_dir = out_dir
        self.n_jobs = n_jobs
        self.reports = []
        self.estimates = {}
        self.outputs = []

    def add(self, rep):
        self.reports.append(rep)
        return rep

    def csv(self, name, header, rows):
        path = os.path.join(self.out_dir, name)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for row in rows:
                w.writerow([fmt(x) for x in row])
        self.outputs.append(name)
        return path

    def path(self, name):
        self.outputs.append(name)
        return os.path.join(self.out_dir, name)


# ---------------------------------------------------------------------------
# config -> model objects


def build_space(cfg):
    spec = dict(cfg.section("space"))
    if "file" in spec and cfg.source and not os.path.isabs(spec["file"]):
        spec["file"] = os.path.join(os.path.dirname(cfg.source), spec["file"])
    return space_from_dict(spec)


def build_mu(cfg, space):
    mu = cfg.section("mu")
    kind = mu.get("kind", "uniform")
    if kind == "uniform":
        return SeedDistribution.uniform()
    if kind == "evenly-spaced":
        return evenly_spaced_atoms(space, mu["n_atoms"], mu.get("offset", 0.0))
    pts = mu["points"]
    if isinstance(space, FiniteMetric):
        pts = [int(p) for p in pts]
    if kind == "atoms":
        return SeedDistribution.atoms(pts, mu.get("weights"))
    return SeedDistribution.mixture(pts, mu.get("weights"), mu.get("atom_weight", 0.5))


def _with_L(space, L):
    return type(space)(float(L))


def default_r_grid(space):
    """Geometric grid over ``(0, diameter]``, plus the jump points ``L / 2k`` of
    ``cov`` on a circle or segment."""
    diam = space.diameter
    grid = list(np.geomspace(diam / 200.0, diam, 120))
    if isinstance(space, (Circle, Segment)):
        grid += [space.L / (2.0 * k) for k in range(1, 201)]
    return np.unique(np.asarray(grid))


DEFAULT_A_GRID = tuple(np.geomspace(0.05, 20.0, 60))


# ---------------------------------------------------------------------------
# fixed radius


def run_fixed_concentration(cfg, ctx):
    space = build_space(cfg)
    mu = build_mu(cfg, space)
    r0_values = cfg.param("r0_values", [cfg.section("model")["r0"]])
    reps, seed = cfg.reps, cfg.seed
    exact = isinstance(space, FIXED_EXACT)
    rows, family = [], []
    for k, r0 in enumerate(r0_values):
        fcfg = FixedRadiusConfig(space, mu, r0)
        sub = _rng.subseed(seed, _rng.REPLICATE, k)
        if exact:
            counts = sample_cover_counts(fcfg, reps, sub, ctx.n_jobs)
            lower = counts
        else:
            eps = cfg.param("eps", r0 / 20.0)
            pairs = _rng.replicate_map(
                lambda i, g: cover_count_bracket(fcfg, eps, g), sub, reps, ctx.n_jobs)
            lower = np.array([p.lower for p in pairs])
            counts = np.array([p.upper for p in pairs])
        stats = summarize(counts, _rng.auxiliary_stream(sub, _rng.BOOTSTRAP_TAG))
        d = dimension_d(space, r0)
        e = eta(space, mu, r0 / 2.0)
        est = {"r0": r0, "exact_counts": exact, **stats.to_dict(),
               "d": d.value, "d_exact": d.exact, "eta_half": e.value, "eta_exact": e.exact}
        if e.value > 0:
            rhs = prop_fixed_rhs(d.value, e.value, stats.mean)
            est.update(rhs_without_constant=rhs, shape_ratio=stats.var_ratio / rhs)
            family.append(stats.var_ratio / rhs)
        ctx.add(tail_check(counts, stats.mean)).parameters["r0"] = r0
        ctx.estimates.setdefault("by_r0", []).append(est)
        rows += [(r0, i, int(lower[i]), int(counts[i])) for i in range(reps)]
    if family:
        ctx.estimates["shape_ratio_range"] = [min(family), max(family)]
    ctx.csv("cover_counts.csv", ["r0", "replicate", "C_lower", "C"], rows)


# ---------------------------------------------------------------------------
# growth


def _growth_one(cfg, ctx, space, mu, key, rows, label):
    model = cfg.section("model")
    lam, v = model["lam"], model["v"]
    params = GrowthParams(space, mu, lam, v)
    exact = isinstance(space, GROWTH_EXACT)
    net_eps = cfg.param("net_eps", space.diameter / 100.0)
    sub = _rng.subseed(cfg.seed, _rng.REPLICATE, key)
    stats = estimate_cover_stats(params, cfg.reps, sub, ctx.n_jobs, None if exact else net_eps)
    c = stats.samples
    tau1, ceiling = stats.extras["tau1"], stats.extras["ceiling"]
    slack = stats.extras.get("net_slack", 0.0)
    over = int(np.sum(c > ceiling + 1e-9))
    under = int(np.sum(c < tau1 - 1e-9 - slack))
    ctx.add(report("pathwise_diameter", over + under, 0.0, 0.0, label=label,
                   above_ceiling=over, below_first_arrival=under, reps=cfg.reps))
    cs = c_star(params, epsilon_net(space, space.diameter / 50.0))
    ctx.add(growth_var_check(stats, cs.value)).parameters["label"] = label
    ctx.add(ec_diameter_check(stats, space.diameter, lam, v)).parameters["label"] = label
    ctx.add(tail_check(c, stats.mean)).parameters["label"] = label
    # E C / c* is unit-free; its upper bound is stated in standardized units
    std_space = space.scaled(lam / v)
    bound, a = ec_over_cstar_upper(lam * cs.value, lambda r: covering_number(std_space, r).value,
                                   cfg.param("a_grid", DEFAULT_A_GRID))
    ctx.add(report("ec_over_cstar", stats.mean / cs.value, stats.se_mean / cs.value, bound,
                   label=label, a=a, c_star=cs.value))
    ctx.estimates.setdefault("runs", []).append({
        "label": label, "diameter": space.diameter, **stats.to_dict(), "c_star": cs.value,
        "c_star_lipschitz_slack": cs.lipschitz_slack, "c_star_quad_error": cs.quad_error,
        "exact_cover_times": exact, "diameter_ratio": space.diameter / stats.mean**2})
    rows += [(label, i, c[i], tau1[i]) for i in range(len(c))]


def run_growth_concentration(cfg, ctx):
    space = build_space(cfg)
    mu = build_mu(cfg, space)
    rows = []
    L_values = cfg.param("L_values")
    if L_values:
        if not isinstance(space, (Circle, Segment)):
            raise ValueError("params.L_values needs a circle or segment space")
        if mu.kind != "uniform":
            raise ValueError("params.L_values needs the uniform seed law")
        for k, L in enumerate(L_values):
            _growth_one(cfg, ctx, _with_L(space, L), mu, k, rows, f"L={L:g}")
    else:
        _growth_one(cfg, ctx, space, mu, 0, rows, space.kind)
    ctx.csv("cover_times.csv", ["label", "replicate", "C", "tau1"], rows)


# ---------------------------------------------------------------------------
# circle heuristic


def run_pch(cfg, ctx):
    L_values = cfg.param("L_values", [100.0, 10000.0])
    comps = []
    rows = []
    for k, L in enumerate(L_values):
        cmp = empirical_vs_pch(L, cfg.reps, _rng.subseed(cfg.seed, _rng.REPLICATE, k), ctx.n_jobs)
        comps.append(cmp)
        ctx.add(report("ks_pch", cmp.ks_pch, 0.0, cfg.tol("ks_pch"), L=L))
        rows += [(L, i, c) for i, c in enumerate(cmp.samples)]
        ctx.estimates.setdefault("by_L", []).append(
            {**cmp.to_dict(), "gumbel_sup_distance": gumbel_sup_distance(L),
             "c_star_closed_form": c_star_circle(L)})
    if len(comps) > 1:
        first, last = comps[0], comps[-1]
        ctx.add(report("ks_pch_trend", last.ks_pch, 0.0,
                       first.ks_pch + cfg.tol("ks_trend_slack"), L_small=first.L, L_large=last.L))
    ctx.estimates["variance_orders"] = variance_orders(comps)

    gap_L = cfg.param("gap_L", max(L_values))
    t = math.sqrt(gap_L * math.log(2.0))
    n_unc = cfg.param("uncovered_reps", 10000)
    aux = _rng.subseed(cfg.seed, _rng.AUXILIARY, 2)
    for j, a in enumerate((0.0, cfg.param("arc_length", 50.0))):
        u = uncovered_point_prob(gap_L, t, n_unc, _rng.subseed(aux, j), a=a, n_jobs=ctx.n_jobs)
        ctx.add(report("uncovered_arc" if a else "uncovered_point",
                       abs(u.probability - u.predicted), u.se, 0.0, probability=u.probability,
                       predicted=u.predicted, t=t, a=a, L=gap_L, reps=n_unc))
    gaps = uncovered_gap_stats(gap_L, t, cfg.param("gap_reps", 10000), _rng.subseed(aux, 2),
                               ctx.n_jobs)
    ctx.estimates["gaps"] = gaps.to_dict()
    ctx.add(report("gap_count", cfg.tol("min_conditioned"), 0.0, gaps.n, L=gap_L, t=t))
    if gaps.n >= 2:
        rel = abs(gaps.mean_A1 / gaps.expected_mean - 1.0)
        ctx.add(report("gap_mean", rel, 0.0, cfg.tol("gap_mean_rel"),
                       mean=gaps.mean_A1, expected=gaps.expected_mean))
        ctx.add(report("gap_ks", gaps.ks_A1, 0.0, cfg.tol("ks_gap"), ks_A2=gaps.ks_A2))
        ctx.add(report("gap_correlation", abs(gaps.corr), 0.0, 0.05, corr=gaps.corr))
    write_plot_csv(ctx.path("pch_plot.csv"), comps)
    write_gap_csv(ctx.path("gaps.csv"), gaps)
    ctx.csv("cover_times.csv", ["L", "replicate", "C"], rows)


# ---------------------------------------------------------------------------
# seed-law search


def _support(space, k):
    if isinstance(space, Circle):
        return np.arange(k) * space.L / k
    if isinstance(space, Segment):
        return (np.arange(k) + 0.5) * space.L / k
    if isinstance(space, FiniteMetric):
        return np.arange(min(k, space.m))
    raise ValueError("min-mu-search supports circle, segment and finite spaces")


def run_min_mu_search(cfg, ctx):
    space = build_space(cfg)
    support = _support(space, cfg.param("support_size", 20))
    res = min_mu_search(space, support, cfg.reps, cfg.param("iters", 5), cfg.seed, ctx.n_jobs,
                        step=cfg.param("step", 0.5))
    lower = min_mu_lower(space)
    r_grid = cfg.param("r_grid", default_r_grid(space))
    r_star, upper = min_mu_upper(space, r_grid)
    n_cons = cfg.param("construction_reps", cfg.reps)
    cons, coupon, viol = min_mu_construction(space, r_star, n_cons,
                                             _rng.subseed(cfg.seed, _rng.AUXILIARY, 3), ctx.n_jobs)
    k = covering_number(space, r_star).value
    ctx.add(report("min_mu_lower_bracket", lower, res.se, res.mean, search_mean=res.mean))
    ctx.add(report("min_mu_construction_bracket", res.mean, math.hypot(res.se, cons.se_mean),
                   cons.mean, construction_mean=cons.mean))
    ctx.add(report("search_vs_baseline", res.mean - res.baseline_mean, res.diff_se, 0.0,
                   baseline_mean=res.baseline_mean))
    ctx.add(report("min_mu_upper", cons.mean, cons.se_mean, upper, r=r_star, cov=k))
    ctx.add(report("min_mu_coupon", cons.mean, cons.se_mean, r_star + coupon_mean(k),
                   r=r_star, cov=k))
    ctx.add(report("min_mu_pathwise", viol, 0.0, 0.0, reps=n_cons))
    ctx.estimates.update(search=res.to_dict(), min_mu_lower=lower, min_mu_upper=upper,
                         r_star=r_star, cov_r_star=k, construction=cons.to_dict())
    hist = []
    for h in res.history:
        for j, p in enumerate(support):
            hist.append((h["iter"], j, p, h["weights"][j], h["mean"]))
    ctx.csv("search_history.csv", ["iter", "atom", "point", "weight", "search_mean"], hist)
    ctx.csv("construction.csv", ["replicate", "C", "coupon_time"],
            [(i, cons.samples[i], coupon[i]) for i in range(n_cons)])


# ---------------------------------------------------------------------------
# segment example


def run_segment_example(cfg, ctx):
    n = cfg.param("n", 1000.0)
    res = segment_example(n, cfg.reps, cfg.seed, ctx.n_jobs)
    ctx.estimates["segment"] = res.to_dict()
    ctx.add(report("segment_sup_distance", res.sup_distance, 0.0, cfg.tol("segment_sup"), n=n))
    ctx.add(report("segment_atom", abs(res.atom_mass - res.atom_expected), 0.0,
                   cfg.tol("segment_atom"), atom_mass=res.atom_mass))
    ctx.csv("samples.csv", ["replicate", "C_over_n"], enumerate(res.samples))


# ---------------------------------------------------------------------------
# subset covers and monotone chains


DEFAULT_SAMPLERS = ("uniform-singleton:20", "uniform-singleton:100",
                    "cyclic-arc:60:1", "cyclic-arc:60:2", "cyclic-arc:60:5")


def parse_sampler(text, cfg=None):
    kind, *args = text.split(":")
    if kind == "uniform-singleton":
        return SubsetSampler.uniform_singleton(int(args[0]))
    if kind == "random-k-subset":
        return SubsetSampler.random_k_subset(int(args[0]), int(args[1]))
    if kind == "cyclic-arc":
        return SubsetSampler.cyclic_arc(int(args[0]), int(args[1]))
    if kind == "metric-ball":
        if cfg is None or cfg.section("space").get("kind") != "finite":
            raise ValueError("metric-ball samplers need a finite [space]")
        space = build_space(cfg)
        return SubsetSampler.metric_ball(space, float(args[0]), build_mu(cfg, space))
    raise ValueError(f"unknown sampler {text!r}")


def parse_chain(text):
    kind, *args = text.split(":")
    if kind == "coupon":
        return coupon_chain(int(args[0]))
    return two_rate_coupon(int(args[0]), int(args[1]), float(args[2]))


def run_subset_kappa(cfg, ctx):
    outer = cfg.param("outer_reps", cfg.reps)
    inner = cfg.param("inner_reps", 100)
    rows = []
    for k, text in enumerate(cfg.param("samplers", list(DEFAULT_SAMPLERS))):
        sampler = parse_sampler(text, cfg)
        res = kappa_ratio(sampler, outer, inner, _rng.subseed(cfg.seed, _rng.REPLICATE, k),
                          ctx.n_jobs)
        se = (res.ci[1] - res.ci[0]) / 3.92
        ctx.add(report("kappa_guard", res.ratio, se, cfg.tol("kappa_guard"), sampler=text))
        est = {"sampler": text, "ratio": res.ratio, "ci": list(res.ci), "var_ratio": res.var_ratio,
               "mean_cover": res.mean_cover, "mean_c_terminal": res.mean_c_terminal,
               "mean_terminal_size": float(res.terminal_sizes.mean())}
        if sampler.kind == "uniform-singleton":
            oracle = coupon_mean(sampler.m)
            se_c = res.cover_counts.std(ddof=1) / math.sqrt(outer)
            est["coupon_oracle"] = oracle
            ctx.add(report("coupon_oracle", abs(res.mean_cover - oracle), se_c, 0.0,
                           sampler=text, oracle=oracle, mean=res.mean_cover))
        ctx.estimates.setdefault("kappa", []).append(est)
        rows += [(text, i, res.cover_counts[i], res.terminal_sizes[i], res.c_terminal[i])
                 for i in range(outer)]
    chain_reps = cfg.param("chain_reps", 100000)
    for k, text in enumerate(cfg.param("chains", ["coupon:50"])):
        chain = parse_chain(text)
        rep, stats = monotone_chain_check(chain, chain_reps,
                                          _rng.subseed(cfg.seed, _rng.AUXILIARY, 4, k))
        ctx.add(rep)
        ctx.add(report("chain_variance", abs(stats.var / chain.var - 1.0), stats.se_var / chain.var,
                       0.1, chain=text))
        ctx.estimates.setdefault("chains", []).append(rep.parameters | {"max_drop": chain.max_drop})
    ctx.csv("kappa_replicates.csv", ["sampler", "replicate", "C_set", "terminal_size", "c_terminal"],
            rows)


# ---------------------------------------------------------------------------
# formula report


def run_bounds_report(cfg, ctx):
    space = build_space(cfg)
    mu = build_mu(cfg, space)
    model = cfg.section("model")
    lam, v = model["lam"], model["v"]
    params = GrowthParams(space, mu, lam, v)
    r_grid = cfg.param("r_grid", default_r_grid(space))
    covs = [covering_number(space, r) for r in r_grid]
    ctx.csv("cov_table.csv", ["r", "cov", "exact"], [(r, c.value, c.exact) for r, c in zip(r_grid, covs)])
    lower = min_mu_lower(space)
    r_star, upper = min_mu_upper(space, r_grid)
    cs = c_star(params, epsilon_net(space, space.diameter / 50.0))
    std_space = space.scaled(lam / v)
    bound, a = ec_over_cstar_upper(lam * cs.value, lambda r: covering_number(std_space, r).value,
                                   cfg.param("a_grid", DEFAULT_A_GRID))
    ctx.estimates.update(diameter=space.diameter, min_mu_lower=lower, min_mu_upper=upper,
                         r_star=r_star, c_star=cs.value, ec_over_cstar_upper=bound, a_star=a)
    exact = isinstance(space, GROWTH_EXACT)
    stats = estimate_cover_stats(params, cfg.reps, cfg.seed, ctx.n_jobs,
                                 None if exact else cfg.param("net_eps", space.diameter / 100.0))
    ctx.estimates["growth"] = stats.to_dict()
    ctx.add(report("ec_over_cstar", stats.mean / cs.value, stats.se_mean / cs.value, bound, a=a))
    ctx.add(growth_var_check(stats, cs.value))
    ctx.add(ec_diameter_check(stats, space.diameter, lam, v))
    if lam == 1.0 and v == 1.0:
        ctx.add(report("min_mu_lower_vs_mu", lower, stats.se_mean, stats.mean, mu=mu.kind))
    if "r0" in model:
        r0 = model["r0"]
        d = dimension_d(space, r0)
        e = eta(space, mu, r0 / 2.0)
        ctx.estimates["fixed_radius"] = {"r0": r0, "d": d.value, "eta_half": e.value}
        if e.value > 0 and isinstance(space, FIXED_EXACT):
            counts = sample_cover_counts(FixedRadiusConfig(space, mu, r0), cfg.reps,
                                         _rng.subseed(cfg.seed, _rng.AUXILIARY, 5), ctx.n_jobs)
            ec = float(np.mean(counts))
            ctx.estimates["fixed_radius"].update(
                mean=ec, rhs_without_constant=prop_fixed_rhs(d.value, e.value, ec),
                var_ratio=float(np.var(counts, ddof=1) / ec**2))


# ---------------------------------------------------------------------------
# evenly spaced vs uniform


def run_even_vs_uniform(cfg, ctx):
    space = build_space(cfg)
    r0 = cfg.section("model").get("r0", 0.5)
    rows = []
    for k, model in enumerate(cfg.param("models", ["fixed", "growth"])):
        res = evenly_spaced_vs_uniform(space.L, model, cfg.reps,
                                       _rng.subseed(cfg.seed, _rng.REPLICATE, k), r0, ctx.n_jobs)
        if res.report is not None:
            ctx.add(res.report)
        ctx.estimates[model] = res.to_dict()
        rows += [(model, i, res.samples_even[i], res.samples_unif[i]) for i in range(res.reps)]
    ctx.csv("paired.csv", ["model", "replicate", "C_even", "C_uniform"], rows)


RUNNERS = {
    "fixed-concentration": (run_fixed_concentration,
                            "fixed-radius cover counts against the d(r0)/(eta E C) scale"),
    "growth-concentration": (run_growth_concentration,
                             "growth cover times: variance, diameter, tail and c* bounds"),
    "pch": (run_pch, "circle cover-time law, uncovered points and gap lengths vs the heuristic"),
    "min-mu-search": (run_min_mu_search,
                      "search over seed-law weights, bracketed by the min-over-mu bounds"),
    "segment-example": (run_segment_example, "segment with a rare far atom: limit law of C/n"),
    "subset-kappa": (run_subset_kappa,
                     "random-subset covers (terminal-set ratio) and monotone chain bounds"),
    "bounds-report": (run_bounds_report, "closed-form bound values for one space and seed law"),
    "even-vs-uniform": (run_even_vs_uniform,
                        "evenly spaced atoms vs uniform seeds on an integer circle"),
}
