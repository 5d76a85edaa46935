"""Growth model: seeds arrive as a Poisson process and grow balls at constant speed.

A point ``s`` is covered at time ``t`` iff some seed has ``tau_i <= t`` and
``v (t - tau_i) >= distance(s, sigma_i)``, so its cover time is
``min_i tau_i + distance(s, sigma_i) / v`` and the space is covered at the
maximum of that function over ``s``.
"""

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import _rng
from ._kernels import growth_1d_cover_time
from ._stats import summarize
from ._validation import check_count, check_positive
from .numerics import adaptive_simpson
from .spaces import Circle, FiniteMetric, Segment, SeedDistribution, ball_measure, epsilon_net, sample

EXACT_KINDS = (Circle, Segment, FiniteMetric)
QUAD_RTOL = 1e-9
TAIL_CUTOFF = 1e-12


@dataclass(frozen=True, eq=False)
class GrowthParams:
    space: object
    mu: SeedDistribution
    lam: float = 1.0
    v: float = 1.0

    def __post_init__(self):
        check_positive(self.lam, "lam")
        check_positive(self.v, "v")
        self.mu.check(self.space)

    def to_dict(self):
        return {"space": self.space.to_dict(), "mu": self.mu.to_dict(),
                "lam": self.lam, "v": self.v}


@dataclass(frozen=True, eq=False)
class GrowthRealization:
    """Arrival times (increasing) and seed points up to ``horizon``.

    ``horizon = tau_1 + diameter / v``, which bounds the cover time on every
    path, so the arrivals listed determine every cover time.
    """

    taus: np.ndarray
    points: np.ndarray
    horizon: float
    space: object

    def __len__(self):
        return len(self.taus)

    def count(self, t):
        """Number of arrivals ``N(t)`` up to time ``t``."""
        return int(np.searchsorted(self.taus, t, side="right"))


@dataclass(frozen=True)
class StandardizedUnits:
    time_scale: float
    length_scale: float


@dataclass(frozen=True)
class CStar:
    """Maximum expected single-point cover time over a net.

    ``value`` is a lower bound of the supremum over the whole space; the
    supremum exceeds it by at most ``lipschitz_slack`` (``mesh / v``).
    """

    value: float
    argmax: object
    quad_error: float
    truncation_time: float
    truncation_error: float
    lipschitz_slack: float


def simulate_realization(params, rng):
    rng = _rng.as_generator(rng)
    lam, span = params.lam, params.space.diameter / params.v
    tau1 = rng.exponential(1.0 / lam)
    expected = lam * span
    chunk = int(expected + 4.0 * math.sqrt(expected) + 16)
    gaps = [rng.exponential(1.0 / lam, chunk)]
    total = gaps[0].sum()
    while total <= span:
        more = rng.exponential(1.0 / lam, chunk)
        gaps.append(more)
        total += more.sum()
    later = tau1 + np.cumsum(np.concatenate(gaps))
    taus = np.concatenate([[tau1], later[later <= tau1 + span]])
    points = sample(params.space, params.mu, rng, len(taus))
    return GrowthRealization(taus, points, float(tau1 + span), params.space)


def _dist_to_seeds(space, s, points):
    s = np.asarray(s)
    if space.point_ndim == 0:
        return space.distance(s[..., None], points)
    return space.distance(s[..., None, :], points)


def point_cover_time(real, s, v):
    """``min_i tau_i + distance(s, sigma_i) / v`` (vectorized over ``s``)."""
    t = np.min(real.taus + _dist_to_seeds(real.space, s, real.points) / v, axis=-1)
    return float(t) if np.ndim(t) == 0 else t


def cover_time_exact(real, v):
    """Exact cover time on a circle, segment or finite metric."""
    space = real.space
    if isinstance(space, FiniteMetric):
        return float(np.max(point_cover_time(real, np.arange(space.m), v)))
    if not isinstance(space, (Circle, Segment)):
        raise TypeError(f"exact cover times need a circle, segment or finite metric, "
                        f"got {space.kind}; use cover_time_net")
    c, _, _ = growth_1d_cover_time(real.taus, np.asarray(real.points, dtype=float),
                                   float(space.L), float(v), isinstance(space, Circle))
    return float(c)


def cover_time_pairs(real, v):
    """Exact cover time on a circle or segment by enumerating tent crossings.

    Every pair of seeds (and each seed with itself around the circle) gives
    a candidate crossing point; the envelope is evaluated exactly at each
    and at the segment ends. Quadratic in candidates, so this is a checking
    oracle for :func:`cover_time_exact` rather than a workhorse.
    """
    space = real.space
    tau = real.taus
    p = np.asarray(real.points, dtype=float)
    periodic = isinstance(space, Circle)
    if not isinstance(space, (Circle, Segment)):
        raise TypeError("pair enumeration is for circles and segments")
    L = space.L
    tj, tk = tau[:, None], tau[None, :]
    if periodic:
        side = (p[None, :] - p[:, None]) % L
        side[np.eye(len(p), dtype=bool)] = L
    else:
        side = p[None, :] - p[:, None]
    u = 0.5 * (side + v * (tk - tj))
    ok = (side >= 0) & (u >= 0) & (u <= side)
    cand = (p[:, None] + u)[ok]
    if periodic:
        cand = cand % L
    else:
        cand = np.concatenate([cand, [0.0, L]])
    if cand.size == 0:
        cand = np.array([0.0]) if periodic else np.array([0.0, L])
    return float(np.max(point_cover_time(real, cand, v)))


def cover_time_net(real, net, v, chunk=4096):
    """``max`` over net points of the point cover time.

    ``s -> C(s)`` is ``1/v``-Lipschitz, so the true cover time lies within
    ``[value, value + net.mesh / v]``.
    """
    pts = np.asarray(net.points)
    if len(pts) == 0:
        raise ValueError("empty net")
    best = -np.inf
    for lo in range(0, len(pts), chunk):
        best = max(best, float(np.max(point_cover_time(real, pts[lo:lo + chunk], v))))
    return best


# ---------------------------------------------------------------------------
# single-point tails


def _ramp_integral(t, c, v):
    """``int_0^t min(v u, c) du``."""
    knee = c / v
    if t <= knee:
        return 0.5 * v * t * t
    return 0.5 * c * knee + c * (t - knee)


def _atom_hazard(space, atoms, weights, s, t, v):
    d = np.asarray(_dist_to_seeds(space, s, atoms), dtype=float)
    return float(np.sum(weights * np.maximum(t - d / v, 0.0)))


def _uniform_hazard(space, s, t, v):
    if isinstance(space, Circle):
        return _ramp_integral(t, space.L / 2.0, v) * 2.0 / space.L
    if isinstance(space, Segment):
        p = float(s)
        return (_ramp_integral(t, p, v) + _ramp_integral(t, space.L - p, v)) / space.L
    if isinstance(space, FiniteMetric):
        pts = np.arange(space.m)
        return _atom_hazard(space, pts, np.full(space.m, 1.0 / space.m), s, t, v)
    if t <= 0:
        return 0.0
    # beyond diameter / v the ball is the whole space
    knee = min(t, space.diameter / v)
    head, _ = adaptive_simpson(lambda u: float(space.uniform_ball_measure(s, v * u)),
                               0.0, knee, rtol=1e-11)
    return head + (t - knee)


def cumulative_hazard(params, s, t):
    """``int_0^t mu(ball(s, v u)) du``, in closed form where it exists."""
    space, mu, v = params.space, params.mu, params.v
    if mu.kind == "uniform":
        return _uniform_hazard(space, s, t, v)
    atoms = space.as_points(mu.points)
    h = _atom_hazard(space, atoms, mu.weights, s, t, v)
    if mu.kind == "mixture":
        h = mu.atom_weight * h + (1.0 - mu.atom_weight) * _uniform_hazard(space, s, t, v)
    return h


def point_tail_analytic(params, s, t):
    """``Pr(C(s) > t) = exp(-lam * int_0^t mu(ball(s, v u)) du)``."""
    t = check_positive(t, "t", strict=False)
    return math.exp(-params.lam * cumulative_hazard(params, s, t))


def _tail_breakpoints(params, s):
    space, mu, v = params.space, params.mu, params.v
    pts = []
    if mu.kind != "uniform":
        atoms = space.as_points(mu.points)
        pts.extend(np.asarray(_dist_to_seeds(space, s, atoms), dtype=float).ravel() / v)
    if mu.kind != "atoms":
        if isinstance(space, Circle):
            pts.append(space.L / (2.0 * v))
        elif isinstance(space, Segment):
            pts.extend([float(s) / v, (space.L - float(s)) / v])
        elif isinstance(space, FiniteMetric):
            pts.extend(space.matrix[int(s)] / v)
    return sorted(set(pts))


def expected_point_cover_time(params, s):
    """``E C(s)`` by adaptive Simpson on the tail.

    Returns ``(value, quad_error, truncation_time, truncation_error)``. The
    tail is integrated up to ``diameter / v`` (after which it decays at rate
    ``lam`` and the remainder is added exactly) or to the first doubling time
    where it drops below ``TAIL_CUTOFF``, whichever is earlier.
    """
    lam, span = params.lam, params.space.diameter / params.v

    def tail(t):
        return math.exp(-lam * cumulative_hazard(params, s, t))

    end = min(1.0 / lam, span) if span > 0 else 0.0
    while end < span and tail(end) >= TAIL_CUTOFF:
        end = min(2.0 * end, span)
    if end >= span:
        end = span
        trunc_err = 0.0
        remainder = tail(span) / lam
    else:
        # hazard rate is nondecreasing, so the tail beyond `end` is at most
        # tail(end) * exp(-lam * mu(ball(s, v end)) * (t - end))
        rate = lam * float(ball_measure(params.space, params.mu, s, params.v * end))
        trunc_err = tail(end) / rate if rate > 0 else math.inf
        remainder = 0.0
    value, err = adaptive_simpson(tail, 0.0, end, rtol=QUAD_RTOL,
                                  breakpoints=_tail_breakpoints(params, s))
    return value + remainder, err, end, trunc_err


def c_star(params, net):
    """Largest expected single-point cover time over ``net`` (see :class:`CStar`)."""
    pts = np.asarray(net.points)
    if len(pts) == 0:
        raise ValueError("empty net")
    if params.mu.kind == "uniform" and params.space.homogeneous:
        pts = pts[:1]
    best = None
    for p in pts:
        val, err, end, trunc = expected_point_cover_time(params, p)
        if best is None or val > best[0]:
            best = (val, p, err, end, trunc)
    val, p, err, end, trunc = best
    return CStar(val, p, err, end, trunc, float(net.mesh) / params.v)


# ---------------------------------------------------------------------------
# replication


def _replicate(params, net):
    def run(i, rng):
        real = simulate_realization(params, rng)
        if net is None:
            c = cover_time_exact(real, params.v)
        else:
            c = cover_time_net(real, net, params.v)
        return c, real.taus[0]
    return run


def sample_cover_times(params, reps, seed, n_jobs=1, net_eps=None):
    """Cover times and first arrival times for replicates ``0..reps-1``.

    Spaces without an exact solver need ``net_eps``; their cover times are
    then net values, low by at most ``mesh / v``.
    """
    reps = check_count(reps, "reps")
    net = None
    if not isinstance(params.space, EXACT_KINDS):
        if net_eps is None:
            raise ValueError(f"{params.space.kind} needs net_eps for net-based cover times")
        net = epsilon_net(params.space, net_eps)
    out = np.asarray(_rng.replicate_map(_replicate(params, net), seed, reps, n_jobs))
    return out[:, 0], out[:, 1]


def sample_point_cover_times(params, points, reps, seed, n_jobs=1):
    """Matrix of ``C(s)`` for each replicate (rows) and point (columns)."""
    reps = check_count(reps, "reps")
    pts = np.asarray(points)

    def run(i, rng):
        return point_cover_time(simulate_realization(params, rng), pts, params.v)

    return np.asarray(_rng.replicate_map(run, seed, reps, n_jobs), dtype=float)


def estimate_cover_stats(params, reps, seed, n_jobs=1, net_eps=None):
    """Replicated cover times as :class:`~coverlab._stats.CoverStats`.

    ``extras`` carries ``tau1`` and the pathwise ceiling ``tau1 + diameter / v``
    for every replicate, and ``net_slack`` when cover times come from a net.
    """
    reps = check_count(reps, "reps", minimum=2)
    c, tau1 = sample_cover_times(params, reps, seed, n_jobs, net_eps)
    extras = {"tau1": tau1, "ceiling": tau1 + params.space.diameter / params.v}
    if net_eps is not None and not isinstance(params.space, EXACT_KINDS):
        extras["net_slack"] = epsilon_net(params.space, net_eps).mesh / params.v
    return summarize(c, _rng.auxiliary_stream(seed, _rng.BOOTSTRAP_TAG), extras=extras)


def standardize(params):
    """Rescale to unit rate and speed.

    Lengths are multiplied by ``lam / v`` and times by ``lam``; the cover time
    of the result is distributed as ``lam`` times the original cover time.
    """
    factor = params.lam / params.v
    space = params.space.scaled(factor)
    mu = params.mu.scaled(params.space, factor)
    units = StandardizedUnits(time_scale=1.0 / params.lam, length_scale=params.v / params.lam)
    return GrowthParams(space, mu, 1.0, 1.0), units


def write_realization_csv(real, path):
    """One row per arrival: ``tau`` then the point coordinates."""
    space = real.space
    if isinstance(space, FiniteMetric):
        cols, fmts = ["index"], [_int]
    elif space.kind == "graph":
        cols, fmts = ["edge", "offset"], [_int, _g17]
    elif space.point_ndim == 1:
        cols, fmts = ["x", "y"], [_g17, _g17]
    else:
        cols, fmts = ["x"], [_g17]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["tau"] + cols)
        for t, p in zip(real.taus, np.asarray(real.points)):
            coords = np.atleast_1d(p)
            w.writerow([_g17(t)] + [f(c) for f, c in zip(fmts, coords)])


def _g17(x):
    return format(float(x), ".17g")


def _int(x):
    return str(int(x))
