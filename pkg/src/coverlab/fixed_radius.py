"""Fixed-radius coverage: i.i.d. closed balls of radius ``r0`` until the space is covered."""

from dataclasses import dataclass

import numpy as np

from . import _rng
from ._kernels import fixed_1d_cover_index, fixed_finite_cover_index
from ._stats import summarize
from ._validation import check_count, check_positive
from .spaces import Circle, FiniteMetric, Segment, SeedDistribution, epsilon_net, sample

EXACT_KINDS = (Circle, Segment, FiniteMetric)
MAX_DRAWS = 1 << 26


@dataclass(frozen=True, eq=False)
class FixedRadiusConfig:
    space: object
    mu: SeedDistribution
    r0: float

    def __post_init__(self):
        check_positive(self.r0, "r0")
        self.mu.check(self.space)

    def to_dict(self):
        return {"space": self.space.to_dict(), "mu": self.mu.to_dict(), "r0": self.r0}


@dataclass(frozen=True)
class CoverCountBracket:
    lower: int
    upper: int
    eps: float


class CenterStream:
    """I.i.d. centers drawn lazily from one generator in doubling chunks.

    Two consumers given equal seeds see the same sequence however far each
    reads, which is what pathwise comparisons rely on.
    """

    def __init__(self, space, mu, rng, first_chunk=256):
        self.space = space
        self.mu = mu
        self.rng = rng
        self._chunks = [sample(space, mu, rng, first_chunk)]
        self._size = first_chunk

    def get(self, n):
        while self._size < n:
            chunk = sample(self.space, self.mu, self.rng, self._size)
            self._chunks.append(chunk)
            self._size += len(chunk)
        if len(self._chunks) > 1:
            self._chunks = [np.concatenate(self._chunks)]
        return self._chunks[0][:n]

    @property
    def size(self):
        return self._size


def _check_coverable(cfg):
    """Reject atomic seed laws whose balls cannot cover the space."""
    mu, space = cfg.mu, cfg.space
    if mu.kind != "atoms":
        return
    pts = space.as_points(mu.points)
    if isinstance(space, FiniteMetric):
        ball = space.matrix <= cfg.r0
        ok = ball[pts].any(axis=0).all()
    else:
        ok = fixed_1d_cover_index(np.sort(pts).astype(float), float(space.L),
                                  2.0 * cfg.r0, isinstance(space, Circle)) > 0
    if not ok:
        raise ValueError("the seed atoms' balls cannot cover the space")


def _first_cover(stream, index_of):
    n = stream.size
    while True:
        idx = index_of(stream.get(n))
        if idx > 0:
            return int(idx)
        if n >= MAX_DRAWS:
            raise RuntimeError(f"space not covered after {n} balls")
        n *= 2


def simulate_cover_count(cfg, rng, first_chunk=256):
    """Exact number of balls drawn until the space is covered.

    Supported on :class:`Circle`, :class:`Segment` and :class:`FiniteMetric`.
    """
    space = cfg.space
    if not isinstance(space, EXACT_KINDS):
        raise TypeError(f"exact cover counts need a circle, segment or finite metric, "
                        f"got {space.kind}; use cover_count_bracket")
    _check_coverable(cfg)
    stream = CenterStream(space, cfg.mu, _rng.as_generator(rng), first_chunk)
    if isinstance(space, FiniteMetric):
        ball = space.matrix <= cfg.r0
        return _first_cover(stream, lambda c: fixed_finite_cover_index(c, ball))
    L, two_r, periodic = float(space.L), 2.0 * cfg.r0, isinstance(space, Circle)
    return _first_cover(stream, lambda c: fixed_1d_cover_index(c, L, two_r, periodic))


def _net_cover_counts(space, net_points, stream, radii):
    """Balls needed until every net point is within each radius of a center."""
    n = stream.size
    while True:
        centers = stream.get(n)
        if space.point_ndim == 0:
            d = space.distance(centers[:, None], net_points[None, :])
        else:
            d = space.distance(centers[:, None, :], net_points[None, :, :])
        out = []
        for r in radii:
            hit = d <= r
            if not hit.any(axis=0).all():
                break
            out.append(int(hit.argmax(axis=0).max()) + 1)
        else:
            return out
        if n >= MAX_DRAWS:
            raise RuntimeError(f"net not covered after {n} balls")
        n *= 2


def cover_count_bracket(cfg, eps, rng, first_chunk=256):
    """Pathwise bracket ``lower <= C <= upper`` for any space.

    Both ends read one center stream: ``lower`` covers an ``eps``-net at
    radius ``r0`` (necessary), ``upper`` covers it at ``r0 - mesh``
    (sufficient, since every point is within ``mesh <= eps`` of the net).
    """
    eps = check_positive(eps, "eps")
    if eps >= cfg.r0:
        raise ValueError("eps must be smaller than r0")
    net = epsilon_net(cfg.space, eps)
    stream = CenterStream(cfg.space, cfg.mu, _rng.as_generator(rng), first_chunk)
    lower, upper = _net_cover_counts(cfg.space, np.asarray(net.points), stream,
                                     (cfg.r0, cfg.r0 - net.mesh))
    return CoverCountBracket(lower, upper, float(net.mesh))


def sample_cover_counts(cfg, reps, seed, n_jobs=1, first_chunk=256):
    """Cover counts for replicates ``0..reps-1`` under master ``seed``."""
    reps = check_count(reps, "reps")
    out = _rng.replicate_map(
        lambda i, g: simulate_cover_count(cfg, g, first_chunk), seed, reps, n_jobs)
    return np.asarray(out, dtype=np.int64)


def estimate_cover_stats(cfg, reps, seed, n_jobs=1, first_chunk=256):
    """Replicated cover counts summarized as :class:`~coverlab._stats.CoverStats`."""
    reps = check_count(reps, "reps", minimum=2)
    counts = sample_cover_counts(cfg, reps, seed, n_jobs, first_chunk)
    return summarize(counts, _rng.auxiliary_stream(seed, _rng.BOOTSTRAP_TAG))
