"""Estimator-style wrappers around the simulation routines.

Parameters are set in ``__init__`` and fitted quantities carry a trailing
underscore, so the objects work with ``get_params``/``set_params`` and
``clone``. "Fitting" a cover-time estimator means running its simulation.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from . import circle_pch, fixed_radius, growth
from ._stats import ks_distance
from .experiments.studies import min_mu_search
from .spaces import SeedDistribution


def _mu(mu):
    return SeedDistribution.uniform() if mu is None else mu


class FixedRadiusCoverEstimator(BaseEstimator):
    """Monte Carlo summary of the fixed-radius cover count.

    Parameters
    ----------
    space : Space
        A :class:`~coverlab.spaces.Circle`, :class:`~coverlab.spaces.Segment`
        or :class:`~coverlab.spaces.FiniteMetric`.
    mu : SeedDistribution, optional
        Center law; uniform when omitted.
    r0 : float
        Ball radius.
    reps, seed, n_jobs
        Replicate count, master seed and worker threads.
    """

    def __init__(self, space=None, mu=None, r0=1.0, reps=1000, seed=0, n_jobs=1):
        self.space = space
        self.mu = mu
        self.r0 = r0
        self.reps = reps
        self.seed = seed
        self.n_jobs = n_jobs

    def fit(self, X=None, y=None):
        if self.space is None:
            raise ValueError("space must be set before fitting")
        cfg = fixed_radius.FixedRadiusConfig(self.space, _mu(self.mu), self.r0)
        self.stats_ = fixed_radius.estimate_cover_stats(cfg, self.reps, self.seed, self.n_jobs)
        self.mean_ = self.stats_.mean
        self.var_ratio_ = self.stats_.var_ratio
        return self

    def predict(self, X=None):
        """The estimated mean cover count (one value per row of ``X`` if given)."""
        check_is_fitted(self, "stats_")
        n = 1 if X is None else len(X)
        return np.full(n, self.mean_)


class GrowthCoverEstimator(BaseEstimator):
    """Monte Carlo summary of the growth-model cover time.

    ``fit`` also computes ``c_star_`` over an ``eps``-net when ``cstar_eps``
    is given, and the variance check against it in ``report_``.
    """

    def __init__(self, space=None, mu=None, lam=1.0, v=1.0, reps=1000, seed=0, n_jobs=1,
                 net_eps=None, cstar_eps=None):
        self.space = space
        self.mu = mu
        self.lam = lam
        self.v = v
        self.reps = reps
        self.seed = seed
        self.n_jobs = n_jobs
        self.net_eps = net_eps
        self.cstar_eps = cstar_eps

    def fit(self, X=None, y=None):
        if self.space is None:
            raise ValueError("space must be set before fitting")
        from .bounds import growth_var_check
        from .spaces import epsilon_net

        params = growth.GrowthParams(self.space, _mu(self.mu), self.lam, self.v)
        self.stats_ = growth.estimate_cover_stats(params, self.reps, self.seed, self.n_jobs,
                                                  self.net_eps)
        self.mean_ = self.stats_.mean
        self.var_ratio_ = self.stats_.var_ratio
        if self.cstar_eps is not None:
            self.c_star_ = growth.c_star(params, epsilon_net(self.space, self.cstar_eps))
            self.report_ = growth_var_check(self.stats_, self.c_star_.value)
        return self

    def predict(self, X=None):
        check_is_fitted(self, "stats_")
        n = 1 if X is None else len(X)
        return np.full(n, self.mean_)


class MinMuSearch(BaseEstimator):
    """Search over atom weights on ``support`` for a small mean growth cover time."""

    def __init__(self, space=None, support=None, reps=1000, iters=5, seed=0, n_jobs=1, step=0.5):
        self.space = space
        self.support = support
        self.reps = reps
        self.iters = iters
        self.seed = seed
        self.n_jobs = n_jobs
        self.step = step

    def fit(self, X=None, y=None):
        if self.space is None or self.support is None:
            raise ValueError("space and support must be set before fitting")
        self.result_ = min_mu_search(self.space, self.support, self.reps, self.iters, self.seed,
                                     self.n_jobs, self.step)
        self.mu_ = self.result_.mu
        self.mean_ = self.result_.mean
        return self


class PchCircle(TransformerMixin, BaseEstimator):
    """Clumping-heuristic prediction on ``Circle(L)``.

    ``fit`` takes a sample of cover times and records its KS distances from
    the prediction (central band) and, after standardization, from the
    Gumbel law; ``transform`` standardizes cover times as ``(C - t0) / sigma``.
    """

    def __init__(self, L=100.0):
        self.L = L

    def fit(self, X, y=None):
        c = check_array(X, ensure_2d=False, dtype=float).ravel()
        pred = circle_pch.PchPrediction.of(self.L)
        self.t0_ = pred.t0
        self.sigma_ = pred.sigma
        self.ks_pch_ = ks_distance(c, lambda t: circle_pch.pch_cdf_monotone(self.L, t),
                                   band=circle_pch.BAND)
        self.ks_gumbel_ = ks_distance(pred.standardize(c), circle_pch.gumbel_cdf)
        return self

    def transform(self, X):
        check_is_fitted(self, "t0_")
        x = check_array(X, ensure_2d=False, dtype=float)
        return (x - self.t0_) / self.sigma_

    def predict_cdf(self, t):
        return circle_pch.pch_cdf(self.L, t)
