"""Clumping-heuristic prediction for the standardized growth cover time on a circle.

On a circle of length ``L`` (unit arrival rate and growth speed) the
heuristic predicts ``Pr(C <= t) ~ exp(-t exp(-t^2 / L))``. Centering at
``t0(L)`` and scaling by ``sigma(L)`` turns this into the Gumbel law.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from . import _rng
from ._stats import empirical_cdf, ks_distance
from ._validation import check_count, check_positive
from .growth import GrowthParams, sample_cover_times
from .numerics import newton_bisect
from .spaces import Circle, SeedDistribution

X_BRANCH = 1.0 / math.sqrt(2.0)
Y_MAX = X_BRANCH * math.exp(-0.5)
BAND = (0.01, 0.99)
MIN_CONDITIONED = 100


def _forward(x):
    return x * math.exp(-x * x)


def g_inverse(y):
    """Large root ``x >= 1/sqrt(2)`` of ``x exp(-x^2) = y`` for ``0 < y <= Y_MAX``."""
    y = float(y)
    if not 0.0 < y <= Y_MAX:
        raise ValueError(f"y must lie in (0, {Y_MAX:.6f}] (decreasing branch), got {y}")
    if y == Y_MAX:
        return X_BRANCH
    log_y = math.log(y)
    x0 = math.sqrt(-log_y)
    hi = x0 + 1.0
    while math.log(hi) - hi * hi - log_y > 0:
        hi *= 2.0
    # Newton in log form: log x - x^2 = log y has the same root and is well scaled
    x = newton_bisect(lambda x: math.log(x) - x * x - log_y,
                      lambda x: 1.0 / x - 2.0 * x,
                      X_BRANCH, hi, x0=x0, xtol=1e-16)
    if abs(_forward(x) - y) > 1e-12:
        raise ArithmeticError(f"g_inverse residual too large at y={y}")
    return x


def _check_L(L):
    L = check_positive(L, "L")
    if L ** -0.5 > Y_MAX:
        raise ValueError(f"L must exceed {Y_MAX ** -2:.4f} so that L^(-1/2) is in the domain")
    return L


def t0_of_L(L):
    """``sqrt(L) G(L^(-1/2))``, where the predicted CDF equals ``1/e``."""
    L = _check_L(L)
    return math.sqrt(L) * g_inverse(L ** -0.5)


def sigma_of_L(L):
    """``sqrt(L) / (2 G(L^(-1/2)))``, the Gumbel scale."""
    L = _check_L(L)
    return math.sqrt(L) / (2.0 * g_inverse(L ** -0.5))


def pch_cdf(L, t):
    """``exp(-t exp(-t^2 / L))``.

    This is the raw formula: it equals 1 at ``t = 0`` and is only monotone
    for ``t >= sqrt(L/2)``; comparisons use its central band.
    """
    t = np.asarray(t, dtype=float)
    out = np.exp(-t * np.exp(-t * t / L))
    return float(out) if out.ndim == 0 else out


def pch_cdf_monotone(L, t):
    """:func:`pch_cdf` with the lower non-monotone branch replaced by 0."""
    t = np.asarray(t, dtype=float)
    out = np.where(t >= math.sqrt(L / 2.0), pch_cdf(L, t), 0.0)
    return float(out) if out.ndim == 0 else out


def gumbel_cdf(x):
    x = np.asarray(x, dtype=float)
    out = np.exp(-np.exp(-x))
    return float(out) if out.ndim == 0 else out


def c_star_circle(L):
    """``sqrt(pi L) / 2``: expected single-point cover time with uniform seeds."""
    return 0.5 * math.sqrt(math.pi * check_positive(L, "L"))


@dataclass(frozen=True)
class PchPrediction:
    L: float
    t0: float
    sigma: float

    @classmethod
    def of(cls, L):
        return cls(float(L), t0_of_L(L), sigma_of_L(L))

    def cdf(self, t):
        return pch_cdf(self.L, t)

    def standardize(self, c):
        return (np.asarray(c, dtype=float) - self.t0) / self.sigma


def gumbel_sup_distance(L, x_grid=None):
    """``sup_x |pch_cdf(L, t0 + x sigma) - exp(-e^{-x})|`` over a grid."""
    pred = PchPrediction.of(L)
    x = np.linspace(-2.0, 6.0, 801) if x_grid is None else np.asarray(x_grid, dtype=float)
    return float(np.max(np.abs(pred.cdf(pred.t0 + x * pred.sigma) - gumbel_cdf(x))))


# ---------------------------------------------------------------------------
# empirical comparisons


def circle_params(L):
    return GrowthParams(Circle(float(L)), SeedDistribution.uniform(), 1.0, 1.0)


@dataclass(eq=False)
class PchComparison:
    L: float
    reps: int
    ks_pch: float
    ks_gumbel: float
    t0: float
    sigma: float
    median: float
    mean: float
    samples: np.ndarray = field(repr=False)

    def to_dict(self):
        return {k: getattr(self, k) for k in
                ("L", "reps", "ks_pch", "ks_gumbel", "t0", "sigma", "median", "mean")}


def empirical_vs_pch(L, reps, seed, n_jobs=1):
    """KS distances of simulated cover times from the prediction and its Gumbel limit.

    ``ks_pch`` is taken over sample points where the prediction lies in
    ``[0.01, 0.99]``; ``ks_gumbel`` compares ``(C - t0) / sigma`` with the
    Gumbel CDF over the whole sample.
    """
    reps = check_count(reps, "reps", minimum=100)
    pred = PchPrediction.of(L)
    c, _ = sample_cover_times(circle_params(L), reps, seed, n_jobs)
    ks_p = ks_distance(c, lambda t: pch_cdf_monotone(L, t), band=BAND)
    ks_g = ks_distance(pred.standardize(c), gumbel_cdf)
    return PchComparison(float(L), reps, ks_p, ks_g, pred.t0, pred.sigma,
                         float(np.median(c)), float(c.mean()), c)


def _arrivals(L, t, rng):
    """Seeds of the standardized process arriving in ``[0, t]``: times and positions."""
    n = rng.poisson(t)
    taus = np.sort(rng.uniform(0.0, t, n))
    return taus, rng.uniform(0.0, L, n)


def _arc_distance(L, pos, a):
    """Distance on the circle from ``pos`` to the arc ``[0, a]``."""
    pos = np.mod(pos, L)
    return np.where(pos <= a, 0.0, np.minimum(pos - a, L - pos))


@dataclass(frozen=True)
class UncoveredEstimate:
    probability: float
    se: float
    predicted: float
    t: float
    a: float
    reps: int

    def to_dict(self):
        return dict(self.__dict__)


def uncovered_point_prob(L, t, reps, seed, a=0.0, n_jobs=1):
    """Frequency with which the arc ``[0, a]`` (a point when ``a = 0``) is
    entirely uncovered at time ``t``, against ``exp(-(a t + t^2) / L)``."""
    L = check_positive(L, "L")
    t = check_positive(t, "t", strict=False)
    a = check_positive(a, "a", strict=False)
    reps = check_count(reps, "reps", minimum=2)
    if a + 2.0 * t > L:
        raise ValueError("the prediction needs a + 2t <= L")

    def run(i, rng):
        taus, pos = _arrivals(L, t, rng)
        return not np.any(taus + _arc_distance(L, pos, a) <= t)

    hits = np.asarray(_rng.replicate_map(run, seed, reps, n_jobs), dtype=float)
    p = float(hits.mean())
    se = math.sqrt(max(p * (1 - p), 1.0 / reps) / reps)
    return UncoveredEstimate(p, se, math.exp(-(a * t + t * t) / L), t, a, reps)


@dataclass(eq=False)
class GapSummary:
    L: float
    t: float
    reps: int
    n: int
    expected_mean: float
    mean_A1: float
    mean_A2: float
    sd_ratio_A1: float
    corr: float
    ks_A1: float
    ks_A2: float
    enough: bool
    A1: np.ndarray = field(repr=False)
    A2: np.ndarray = field(repr=False)

    def to_dict(self):
        return {k: getattr(self, k) for k in
                ("L", "t", "reps", "n", "expected_mean", "mean_A1", "mean_A2",
                 "sd_ratio_A1", "corr", "ks_A1", "ks_A2", "enough")}


def uncovered_gap_stats(L, t, reps, seed, n_jobs=1):
    """Extents of the uncovered interval around the point 0, given it is uncovered.

    ``A1`` is the distance from 0 to the covered set in the positive
    direction and ``A2`` in the negative direction; both are exact from the
    seed arcs ``[sigma_i - (t - tau_i), sigma_i + (t - tau_i)]``. With fewer
    than 100 conditioned paths the summary has ``enough = False``.
    """
    L = check_positive(L, "L")
    t = check_positive(t, "t")
    reps = check_count(reps, "reps", minimum=2)

    def run(i, rng):
        taus, pos = _arrivals(L, t, rng)
        radius = t - taus
        ahead = np.mod(pos, L)
        a1 = ahead - radius
        a2 = (L - ahead) - radius
        if np.any(np.minimum(a1, a2) <= 0):
            return np.nan, np.nan
        if a1.size == 0:
            return L, L
        return a1.min(), a2.min()

    out = np.asarray(_rng.replicate_map(run, seed, reps, n_jobs), dtype=float)
    out = out[~np.isnan(out[:, 0])]
    A1, A2 = out[:, 0], out[:, 1]
    mean = L / t
    n = len(A1)
    enough = n >= MIN_CONDITIONED
    if n < 2:
        nan = float("nan")
        return GapSummary(L, t, reps, n, mean, nan, nan, nan, nan, nan, nan, False, A1, A2)

    def exp_cdf(x):
        return 1.0 - np.exp(-x / mean)

    return GapSummary(L, t, reps, n, mean, float(A1.mean()), float(A2.mean()),
                      float(A1.mean() / A1.std(ddof=1)), float(np.corrcoef(A1, A2)[0, 1]),
                      ks_distance(A1, exp_cdf), ks_distance(A2, exp_cdf), enough, A1, A2)


def variance_orders(comparisons, c_stars=None):
    """``var(C / EC) G^4`` and ``(c* / EC) G`` per ``L``; ``G = G(L^(-1/2))``.

    Both are expected to stay within a fixed factor as ``L`` varies.
    """
    rows = []
    for cmp in comparisons:
        G = g_inverse(cmp.L ** -0.5)
        c = cmp.samples
        ratio = c.var(ddof=1) / c.mean() ** 2
        cs = c_star_circle(cmp.L) if c_stars is None else c_stars[cmp.L]
        rows.append({"L": cmp.L, "G": G, "var_ratio": ratio, "var_ratio_G4": ratio * G**4,
                     "cstar_over_EC": cs / c.mean(), "cstar_over_EC_G": cs / c.mean() * G})
    return rows


# ---------------------------------------------------------------------------
# outputs


def _g(x):
    return format(float(x), ".17g")


def write_plot_csv(path, comparisons, n_grid=200):
    """Columns ``L, t, empirical_cdf, pch_cdf, gumbel_cdf`` for each comparison."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["L", "t", "empirical_cdf", "pch_cdf", "gumbel_cdf"])
        for cmp in comparisons:
            grid = np.linspace(cmp.samples.min(), cmp.samples.max(), n_grid)
            emp = empirical_cdf(cmp.samples, grid)
            pch = pch_cdf(cmp.L, grid)
            gum = gumbel_cdf((grid - cmp.t0) / cmp.sigma)
            for row in zip(grid, emp, pch, gum):
                w.writerow([_g(cmp.L)] + [_g(v) for v in row])


def write_gap_csv(path, gaps):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["A1", "A2"])
        for a1, a2 in zip(gaps.A1, gaps.A2):
            w.writerow([_g(a1), _g(a2)])
