"""Replicate summaries, bootstrap intervals and Kolmogorov-Smirnov distances."""

from dataclasses import dataclass, field

import numpy as np

N_BOOTSTRAP = 1000


@dataclass(eq=False)
class CoverStats:
    """Summary of a replicated cover-time sample.

    ``var_ratio`` is the sample variance of ``C / mean(C)``. Intervals are
    95% percentile bootstrap intervals; ``*_se`` for the derived quantities
    are bootstrap standard deviations.
    """

    samples: np.ndarray
    mean: float
    var: float
    se_mean: float
    se_var: float
    var_ratio: float
    se_var_ratio: float
    ci_mean: tuple
    ci_var: tuple
    ci_var_ratio: tuple
    extras: dict = field(default_factory=dict)

    @property
    def n(self):
        return len(self.samples)

    def to_dict(self):
        return {
            "n": self.n,
            "mean": self.mean,
            "var": self.var,
            "se_mean": self.se_mean,
            "se_var": self.se_var,
            "var_ratio": self.var_ratio,
            "se_var_ratio": self.se_var_ratio,
            "ci_mean": list(self.ci_mean),
            "ci_var": list(self.ci_var),
            "ci_var_ratio": list(self.ci_var_ratio),
        }


def summarize(samples, rng, n_boot=N_BOOTSTRAP, extras=None):
    x = np.asarray(samples, dtype=float)
    if x.size < 2:
        raise ValueError("at least two replicates are needed")
    n = x.size
    mean = float(x.mean())
    var = float(x.var(ddof=1))
    ratio = var / mean**2 if mean != 0 else np.nan

    b_mean = np.empty(n_boot)
    b_var = np.empty(n_boot)
    batch = max(1, 4_000_000 // n)
    for lo in range(0, n_boot, batch):
        hi = min(lo + batch, n_boot)
        boot = x[rng.integers(0, n, size=(hi - lo, n))]
        b_mean[lo:hi] = boot.mean(axis=1)
        b_var[lo:hi] = boot.var(axis=1, ddof=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        b_ratio = b_var / b_mean**2

    def ci(b):
        lo, hi = np.percentile(b, [2.5, 97.5])
        return float(lo), float(hi)

    return CoverStats(
        samples=x,
        mean=mean,
        var=var,
        se_mean=float(np.sqrt(var / n)),
        se_var=float(b_var.std(ddof=1)),
        var_ratio=float(ratio),
        se_var_ratio=float(np.std(b_ratio, ddof=1)),
        ci_mean=ci(b_mean),
        ci_var=ci(b_var),
        ci_var_ratio=ci(b_ratio),
        extras=dict(extras or {}),
    )


def ks_distance(sample, cdf, band=None):
    """Sup over sample points of ``|F_emp - cdf|`` (both one-sided jumps).

    With ``band=(lo, hi)`` only sample points where ``lo <= cdf(x) <= hi``
    enter the supremum.
    """
    x = np.sort(np.asarray(sample, dtype=float))
    n = x.size
    if n == 0:
        raise ValueError("empty sample")
    f = np.asarray(cdf(x), dtype=float)
    upper = np.arange(1, n + 1) / n - f
    lower = f - np.arange(0, n) / n
    d = np.maximum(upper, lower)
    if band is not None:
        keep = (f >= band[0]) & (f <= band[1])
        if not keep.any():
            raise ValueError("no sample point inside the validation band")
        d = d[keep]
    return float(d.max())


def empirical_cdf(sample, grid):
    x = np.sort(np.asarray(sample, dtype=float))
    return np.searchsorted(x, np.asarray(grid, dtype=float), side="right") / x.size


def survival(sample, grid):
    """Empirical ``Pr(X >= t)`` on ``grid`` with binomial standard errors."""
    x = np.sort(np.asarray(sample, dtype=float))
    p = 1.0 - np.searchsorted(x, np.asarray(grid, dtype=float), side="left") / x.size
    return p, np.sqrt(p * (1 - p) / x.size)
