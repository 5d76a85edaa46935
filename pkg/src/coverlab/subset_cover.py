"""Finite-set harness for the two general variance bounds.

The first half covers a finite ground set by i.i.d. random subsets and
records the terminal set (the points only the final subset covers). The
second half builds continuous-time Markov chains whose expected hitting
time never increases along a transition and compares ``var T / E T`` with
the largest one-step drop of that expectation.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _rng
from ._stats import summarize
from ._validation import check_count, check_positive, check_probability
from .bounds import report
from .spaces import FiniteMetric, SeedDistribution, sample

SAMPLER_KINDS = ("uniform-singleton", "random-k-subset", "cyclic-arc", "metric-ball")
EXHAUSTIVE_LIMIT = 20
MAX_DRAWS = 1 << 24


@dataclass(frozen=True, eq=False)
class SubsetSampler:
    """Law of one random subset of the ground set ``{0, ..., m-1}``.

    ``cyclic-arc`` takes ``k`` consecutive points of the cycle from a uniform
    start; ``metric-ball`` takes the closed ball of radius ``r0`` around a
    center drawn from ``mu`` on ``space``.
    """

    kind: str
    m: int
    k: int = 1
    space: FiniteMetric = None
    r0: float = 0.0
    mu: SeedDistribution = None

    def __post_init__(self):
        if self.kind not in SAMPLER_KINDS:
            raise ValueError(f"unknown sampler kind {self.kind!r}; expected one of {SAMPLER_KINDS}")
        check_count(self.m, "m")
        if self.kind == "metric-ball":
            if not isinstance(self.space, FiniteMetric) or self.space.m != self.m:
                raise ValueError("metric-ball sampler needs a FiniteMetric with m points")
            check_positive(self.r0, "r0", strict=False)
            mu = self.mu or SeedDistribution.uniform()
            object.__setattr__(self, "mu", mu)
            mu.check(self.space)
        else:
            check_count(self.k, "k")
            if self.k > self.m:
                raise ValueError("k cannot exceed m")
        if not self.inclusion_probabilities().min() > 0:
            raise ValueError("every ground point must have positive inclusion probability")

    @classmethod
    def uniform_singleton(cls, m):
        return cls("uniform-singleton", m, 1)

    @classmethod
    def random_k_subset(cls, m, k):
        return cls("random-k-subset", m, k)

    @classmethod
    def cyclic_arc(cls, m, k):
        return cls("cyclic-arc", m, k)

    @classmethod
    def metric_ball(cls, space, r0, mu=None):
        return cls("metric-ball", space.m, 1, space, r0, mu)

    def inclusion_probabilities(self):
        """``Pr(s in Y)`` for every ground point, computed exactly."""
        m = self.m
        if self.kind in ("uniform-singleton", "cyclic-arc", "random-k-subset"):
            k = 1 if self.kind == "uniform-singleton" else self.k
            return np.full(m, k / m)
        ball = self.space.matrix <= self.r0
        if self.mu.kind == "uniform":
            w = np.full(m, 1.0 / m)
        else:
            w = np.zeros(m)
            np.add.at(w, self.space.as_points(self.mu.points), self.mu.weights)
            if self.mu.kind == "mixture":
                w = self.mu.atom_weight * w + (1 - self.mu.atom_weight) / m
        return w @ ball

    def draw(self, rng, shape, cols=None):
        """Membership of ``cols`` in i.i.d. subsets: array ``shape + (len(cols),)``.

        The random numbers consumed do not depend on ``cols``.
        """
        shape = tuple(np.atleast_1d(shape))
        cols = np.arange(self.m) if cols is None else np.asarray(cols, dtype=np.intp)
        m = self.m
        if self.kind in ("uniform-singleton", "cyclic-arc"):
            start = np.minimum((rng.random(shape) * m).astype(np.intp), m - 1)
            return (cols - start[..., None]) % m < self.k
        if self.kind == "random-k-subset":
            keys = rng.random(shape + (m,))
            kth = np.partition(keys, self.k - 1, axis=-1)[..., self.k - 1:self.k]
            return keys[..., cols] <= kth
        centers = sample(self.space, self.mu, rng, int(np.prod(shape))).reshape(shape)
        return self.space.matrix[centers[..., None], cols] <= self.r0

    def to_dict(self):
        out = {"kind": self.kind, "m": self.m, "k": self.k}
        if self.kind == "metric-ball":
            out.update(r0=self.r0, mu=self.mu.to_dict())
        return out


@dataclass(frozen=True, eq=False)
class TerminalRecord:
    """Cover count ``C_set`` and the terminal set (uncovered before the last draw)."""

    cover_count: int
    terminal: np.ndarray
    first_cover: np.ndarray


def _first_hits(sampler, rng, cols, lead=(), chunk=256):
    """Index of the first subset containing each column, for each lead replicate."""
    first = np.full(lead + (len(cols),), -1, dtype=np.int64)
    done = 0
    while True:
        member = sampler.draw(rng, lead + (chunk,), cols)
        hit = member.any(axis=-2)
        pos = member.argmax(axis=-2) + done
        todo = first < 0
        first[todo & hit] = pos[todo & hit]
        done += chunk
        if np.all(first >= 0):
            return first
        if done >= MAX_DRAWS:
            raise RuntimeError(f"ground set not covered after {done} subsets")
        chunk *= 2


def simulate_cover(sampler, rng, chunk=256):
    """Draw subsets until their union is the ground set."""
    rng = _rng.as_generator(rng)
    first = _first_hits(sampler, rng, np.arange(sampler.m), chunk=chunk)
    c = int(first.max()) + 1
    return TerminalRecord(c, np.flatnonzero(first == c - 1), first + 1)


def _cover_counts_of(sampler, rng, B, reps, chunk=256):
    return _first_hits(sampler, rng, np.asarray(B, dtype=np.intp), (reps,), chunk).max(axis=1) + 1


def estimate_c_of_B(sampler, B, reps, seed):
    """Monte Carlo mean of ``min{n : Y_1 u ... u Y_n contains B}``; returns ``(mean, se)``."""
    B = np.unique(np.asarray(B, dtype=np.intp))
    if B.size == 0:
        raise ValueError("B must be nonempty")
    reps = check_count(reps, "reps", minimum=2)
    counts = _cover_counts_of(sampler, _rng.replicate_stream(seed, 0), B, reps)
    return float(counts.mean()), float(counts.std(ddof=1) / math.sqrt(reps))


@dataclass(frozen=True)
class KappaResult:
    ratio: float
    ci: tuple
    var_ratio: float
    mean_cover: float
    mean_c_terminal: float
    terminal_sizes: np.ndarray
    cover_counts: np.ndarray
    c_terminal: np.ndarray


def _kappa_of(c, ct):
    mean = c.mean()
    return c.var(ddof=1) / mean / ct.mean()


def kappa_ratio(sampler, outer_reps, inner_reps, seed, n_jobs=1):
    """Empirical ``var(C_set / E C_set) E C_set / E c(T)`` by nested Monte Carlo.

    Outer replicate ``i`` draws ``(C_set, T)`` from stream ``(seed, i)``; its
    inner estimate of ``c(T)`` runs ``inner_reps`` vectorized covers of ``T``
    from stream ``(seed, i, 0)``.
    """
    outer_reps = check_count(outer_reps, "outer_reps", minimum=2)
    inner_reps = check_count(inner_reps, "inner_reps")

    def run(i, rng):
        rec = simulate_cover(sampler, rng)
        inner = _rng.replicate_stream(seed, i, 0)
        ct = _cover_counts_of(sampler, inner, rec.terminal, inner_reps).mean()
        return rec.cover_count, ct, rec.terminal.size

    out = np.asarray(_rng.replicate_map(run, seed, outer_reps, n_jobs), dtype=float)
    c, ct, size = out[:, 0], out[:, 1], out[:, 2].astype(int)
    ratio = _kappa_of(c, ct)

    boot_rng = _rng.auxiliary_stream(seed, _rng.BOOTSTRAP_TAG)
    idx = boot_rng.integers(0, outer_reps, size=(1000, outer_reps))
    with np.errstate(invalid="ignore", divide="ignore"):
        boot = np.array([_kappa_of(c[j], ct[j]) for j in idx])
    lo, hi = np.percentile(boot, [2.5, 97.5])
    return KappaResult(float(ratio), (float(lo), float(hi)), float(c.var(ddof=1) / c.mean()**2),
                       float(c.mean()), float(ct.mean()), size, c.astype(np.int64), ct)


# ---------------------------------------------------------------------------
# monotone Markov chains


class NotMonotoneError(ValueError):
    pass


class MonotoneChain:
    """Continuous-time chain on finitely many states with a target set.

    ``transitions`` maps each state to ``[(next_state, rate), ...]``. The
    expected hitting time ``h`` and second moment are solved exactly from
    the linear first-step equations, and ``h`` is checked to be
    nonincreasing along every transition with positive rate.
    """

    def __init__(self, states, transitions, targets, start, name="chain"):
        self.name = name
        self.states = list(states)
        self.index = {s: i for i, s in enumerate(self.states)}
        self.targets = frozenset(targets)
        self.start = start
        n = len(self.states)
        Q = np.zeros((n, n))
        for s, moves in transitions.items():
            for nxt, rate in moves:
                if rate > 0:
                    Q[self.index[s], self.index[nxt]] += rate
        np.fill_diagonal(Q, 0.0)
        self.rates = Q
        self.out_rate = Q.sum(axis=1)
        self.h, self.second_moment = self._solve()
        self._validate()

    def _solve(self):
        n = len(self.states)
        live = np.array([s not in self.targets for s in self.states])
        if np.any(live & (self.out_rate == 0)):
            raise ValueError("a non-target state has no outgoing transition")
        A = np.diag(self.out_rate) - self.rates
        A = A[np.ix_(live, live)]
        h = np.zeros(n)
        h[live] = np.linalg.solve(A, np.ones(live.sum()))
        m2 = np.zeros(n)
        m2[live] = np.linalg.solve(A, 2.0 * h[live])
        return h, m2

    def _validate(self):
        src, dst = np.nonzero(self.rates)
        rise = self.h[dst] - self.h[src]
        if rise.size and rise.max() > 1e-9 * max(1.0, self.h.max()):
            i = int(np.argmax(rise))
            raise NotMonotoneError(
                f"h increases along {self.states[src[i]]!r} -> {self.states[dst[i]]!r}")
        live = np.array([s not in self.targets for s in self.states])
        if np.any(self.h[live] <= 0) or np.any(self.h[~live] != 0):
            raise NotMonotoneError("h must be positive off the target and zero on it")

    @property
    def max_drop(self):
        src, dst = np.nonzero(self.rates)
        return float(np.max(self.h[src] - self.h[dst]))

    @property
    def mean(self):
        return float(self.h[self.index[self.start]])

    @property
    def var(self):
        i = self.index[self.start]
        return float(self.second_moment[i] - self.h[i] ** 2)

    def simulate(self, reps, seed, block=4096):
        """Hitting times for ``reps`` paths, stepped synchronously in fixed-size
        blocks; block ``b`` uses stream ``(seed, b)``."""
        reps = check_count(reps, "reps")
        with np.errstate(invalid="ignore", divide="ignore"):
            jump = np.cumsum(self.rates / self.out_rate[:, None], axis=1)
        target = np.array([s in self.targets for s in self.states])
        out = np.empty(reps)
        for b, lo in enumerate(range(0, reps, block)):
            rng = _rng.replicate_stream(seed, b)
            n = min(block, reps - lo)
            state = np.full(n, self.index[self.start])
            t = np.zeros(n)
            alive = ~target[state]
            while alive.any():
                idx = np.flatnonzero(alive)
                s = state[idx]
                t[idx] += rng.exponential(1.0, idx.size) / self.out_rate[s]
                u = rng.random(idx.size)
                nxt = (jump[s] <= u[:, None]).sum(axis=1)
                state[idx] = np.minimum(nxt, len(self.states) - 1)
                alive[idx] = ~target[state[idx]]
            out[lo:lo + n] = t
        return out


def coupon_chain(n):
    """``n`` coupons each arriving at rate ``1/n``; state is the number missing."""
    n = check_count(n, "n")
    transitions = {j: [(j - 1, j / n)] for j in range(1, n + 1)}
    return MonotoneChain(range(n + 1), transitions, {0}, n, name=f"coupon({n})")


def two_rate_coupon(n1, n2, p):
    """Two coupon classes: ``n1`` coupons sharing rate ``p``, ``n2`` sharing ``1 - p``."""
    n1 = check_count(n1, "n1")
    n2 = check_count(n2, "n2")
    p = check_probability(p, "p")
    if not 0 < p < 1:
        raise ValueError("p must lie strictly between 0 and 1")
    states = [(a, b) for a in range(n1 + 1) for b in range(n2 + 1)]
    transitions = {}
    for a, b in states:
        moves = []
        if a:
            moves.append(((a - 1, b), a * p / n1))
        if b:
            moves.append(((a, b - 1), b * (1 - p) / n2))
        transitions[(a, b)] = moves
    return MonotoneChain(states, transitions, {(0, 0)}, (n1, n2),
                         name=f"two-rate-coupon({n1},{n2},{p})")


def monotone_chain_check(chain, reps, seed):
    """Simulated ``var T / E T`` against the largest drop of ``h``."""
    reps = check_count(reps, "reps", minimum=2)
    t = chain.simulate(reps, seed)
    stats = summarize(t, _rng.auxiliary_stream(seed, _rng.BOOTSTRAP_TAG), n_boot=200)
    lhs = stats.var / stats.mean
    se = stats.se_var / stats.mean
    rep = report("monotone_chain", lhs, se, chain.max_drop, chain=chain.name,
                 exact_mean=chain.mean, exact_var=chain.var, sim_mean=stats.mean,
                 sim_var=stats.var, exact_ratio=chain.var / chain.mean, reps=reps)
    return rep, stats
