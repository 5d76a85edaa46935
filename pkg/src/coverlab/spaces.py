"""Compact metric spaces, seed distributions, balls, nets and covering numbers.

Points are plain numpy values whose layout depends on the space:

==============  =====================================================
Circle          position in ``[0, L)``, arrays of shape ``(n,)``
Segment         position in ``[0, L]``, arrays of shape ``(n,)``
FlatTorus       ``(x, y)`` in ``[0, L1) x [0, L2)``, arrays ``(n, 2)``
FiniteMetric    integer index, arrays of shape ``(n,)``
MetricGraph     ``(edge index, offset along edge)``, arrays ``(n, 2)``
==============  =====================================================

All balls are closed: ``ball(s, r) = {x : distance(s, x) <= r}``.
"""

import itertools
import math
from collections import namedtuple
from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import shortest_path

from ._validation import (
    check_count,
    check_distance_matrix,
    check_positive,
    check_probability,
    check_weights,
)

#: A computed quantity with its certification status. ``exact`` is False for
#: certified bounds; ``eps`` is the discretization mesh used (0 when exact).
Certified = namedtuple("Certified", ["value", "exact", "eps"])

EXHAUSTIVE_LIMIT = 20
_TOL = 1e-12


def _ceil(x):
    return int(math.ceil(x - 1e-12))


def _bcast(shape, values):
    out = np.broadcast_to(values, np.broadcast_shapes(shape, np.shape(values)))
    return float(out) if out.ndim == 0 else np.array(out)


class Space:
    """Base class for the compact metric spaces."""

    kind = "space"
    point_ndim = 0
    has_uniform = True
    # isometries act transitively, so uniform-law statistics are the same at every point
    homogeneous = False

    @property
    def diameter(self):
        raise NotImplementedError

    def distance(self, a, b):
        raise NotImplementedError

    def as_points(self, points):
        """Validate ``points`` and return them as an array of shape ``(n, ...)``."""
        raise NotImplementedError

    def uniform_sample(self, rng, size):
        raise NotImplementedError

    def uniform_ball_measure(self, s, r):
        raise NotImplementedError

    def grid_net(self, eps):
        raise NotImplementedError

    def total_measure(self):
        return 1.0

    def to_dict(self):
        raise NotImplementedError

    def scaled(self, factor):
        """The same space with every distance multiplied by ``factor``."""
        raise NotImplementedError

    def scale_points(self, points, factor):
        return np.asarray(points, dtype=float) * factor


@dataclass(frozen=True)
class Circle(Space):
    """Circle of circumference ``L`` with the arc-length metric."""

    L: float
    kind = "circle"
    homogeneous = True

    def __post_init__(self):
        check_positive(self.L, "L")

    @property
    def diameter(self):
        return self.L / 2.0

    def distance(self, a, b):
        d = np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)) % self.L
        return np.minimum(d, self.L - d)

    def as_points(self, points):
        p = np.atleast_1d(np.asarray(points, dtype=float))
        if p.ndim != 1 or np.any(p < 0) or np.any(p >= self.L):
            raise ValueError(f"circle points must lie in [0, {self.L})")
        return p

    def uniform_sample(self, rng, size):
        return rng.random(size) * self.L

    def uniform_ball_measure(self, s, r):
        return _bcast(np.shape(s), np.minimum(2.0 * np.asarray(r, dtype=float) / self.L, 1.0))

    def grid_net(self, eps):
        n = max(1, _ceil(self.L / (2.0 * eps)))
        h = self.L / n
        return Net((np.arange(n) + 0.5) * h, h / 2.0)

    def to_dict(self):
        return {"kind": self.kind, "L": self.L}

    def scaled(self, factor):
        return Circle(self.L * factor)


@dataclass(frozen=True)
class Segment(Space):
    """Interval ``[0, L]`` with the usual metric."""

    L: float
    kind = "segment"

    def __post_init__(self):
        check_positive(self.L, "L")

    @property
    def diameter(self):
        return self.L

    def distance(self, a, b):
        return np.abs(np.asarray(a, dtype=float) - np.asarray(b, dtype=float))

    def as_points(self, points):
        p = np.atleast_1d(np.asarray(points, dtype=float))
        if p.ndim != 1 or np.any(p < 0) or np.any(p > self.L):
            raise ValueError(f"segment points must lie in [0, {self.L}]")
        return p

    def uniform_sample(self, rng, size):
        return rng.random(size) * self.L

    def uniform_ball_measure(self, s, r):
        s = np.asarray(s, dtype=float)
        r = np.asarray(r, dtype=float)
        return (np.minimum(s + r, self.L) - np.maximum(s - r, 0.0)) / self.L

    def grid_net(self, eps):
        n = max(1, _ceil(self.L / (2.0 * eps)))
        h = self.L / n
        return Net((np.arange(n) + 0.5) * h, h / 2.0)

    def to_dict(self):
        return {"kind": self.kind, "L": self.L}

    def scaled(self, factor):
        return Segment(self.L * factor)


def _quadrant_disk_box(r, a, b):
    """Area of ``{x, y >= 0: x^2 + y^2 <= r^2, x <= a, y <= b}``."""
    if r <= 0:
        return 0.0
    a = min(a, r)

    def chord(x):
        x = min(max(x, 0.0), r)
        return 0.5 * (x * math.sqrt(max(r * r - x * x, 0.0)) + r * r * math.asin(x / r))

    xs = math.sqrt(max(r * r - b * b, 0.0))
    flat = min(xs, a)
    return b * flat + chord(a) - chord(flat)


@dataclass(frozen=True)
class FlatTorus(Space):
    """Flat torus ``[0, L1) x [0, L2)`` with the geodesic (wrapped L2) metric."""

    L1: float
    L2: float
    kind = "torus"
    homogeneous = True
    point_ndim = 1

    def __post_init__(self):
        check_positive(self.L1, "L1")
        check_positive(self.L2, "L2")

    @property
    def diameter(self):
        return 0.5 * math.hypot(self.L1, self.L2)

    def _wrap(self, d, period):
        d = np.abs(d) % period
        return np.minimum(d, period - d)

    def distance(self, a, b):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        dx = self._wrap(a[..., 0] - b[..., 0], self.L1)
        dy = self._wrap(a[..., 1] - b[..., 1], self.L2)
        return np.hypot(dx, dy)

    def as_points(self, points):
        p = np.asarray(points, dtype=float)
        if p.ndim == 1:
            p = p[None, :]
        if p.ndim != 2 or p.shape[1] != 2:
            raise ValueError("torus points must have shape (n, 2)")
        if np.any(p < 0) or np.any(p[:, 0] >= self.L1) or np.any(p[:, 1] >= self.L2):
            raise ValueError("torus points must lie in the fundamental domain")
        return p

    def uniform_sample(self, rng, size):
        return rng.random((size, 2)) * np.array([self.L1, self.L2])

    def uniform_ball_measure(self, s, r):
        # translation invariant: disk of radius r clipped to the centred domain
        a, b = self.L1 / 2.0, self.L2 / 2.0
        area = np.vectorize(lambda rr: 4.0 * _quadrant_disk_box(rr, a, b), otypes=[float])
        r = np.asarray(r, dtype=float)
        out = np.where(r >= self.diameter, 1.0, np.minimum(area(r) / (self.L1 * self.L2), 1.0))
        return _bcast(np.shape(s)[:-1], out)

    def grid_net(self, eps):
        h = eps * math.sqrt(2.0)
        n1 = max(1, _ceil(self.L1 / h))
        n2 = max(1, _ceil(self.L2 / h))
        h1, h2 = self.L1 / n1, self.L2 / n2
        xs = (np.arange(n1) + 0.5) * h1
        ys = (np.arange(n2) + 0.5) * h2
        pts = np.stack(np.meshgrid(xs, ys, indexing="ij"), axis=-1).reshape(-1, 2)
        return Net(pts, 0.5 * math.hypot(h1, h2))

    def to_dict(self):
        return {"kind": self.kind, "L1": self.L1, "L2": self.L2}

    def scaled(self, factor):
        return FlatTorus(self.L1 * factor, self.L2 * factor)


class FiniteMetric(Space):
    """Finite metric space given by a validated distance matrix."""

    kind = "finite"

    def __init__(self, matrix):
        self.matrix = check_distance_matrix(matrix)
        self.matrix.setflags(write=False)
        self.m = self.matrix.shape[0]
        self._diameter = float(self.matrix.max()) if self.m > 1 else 0.0

    def __repr__(self):
        return f"FiniteMetric(m={self.m})"

    def __eq__(self, other):
        return isinstance(other, FiniteMetric) and np.array_equal(self.matrix, other.matrix)

    def __hash__(self):
        return hash((self.kind, self.matrix.tobytes()))

    @classmethod
    def from_file(cls, path):
        """Read a matrix file: first line ``m``, then ``m`` rows of ``m`` lengths."""
        with open(path) as fh:
            lines = [ln.split() for ln in fh if ln.strip()]
        if not lines:
            raise ValueError(f"{path}: empty matrix file")
        m = int(lines[0][0])
        rows = lines[1:]
        if len(rows) != m or any(len(row) != m for row in rows):
            raise ValueError(f"{path}: expected {m} rows of {m} entries")
        return cls(np.array([[float(x) for x in row] for row in rows]))

    @classmethod
    def equilateral(cls, m, d=1.0):
        return cls(d * (1.0 - np.eye(m)))

    @property
    def diameter(self):
        return self._diameter

    @property
    def min_positive_distance(self):
        if self.m == 1:
            return math.inf
        return float(self.matrix[~np.eye(self.m, dtype=bool)].min())

    def distance(self, a, b):
        return self.matrix[np.asarray(a, dtype=np.intp), np.asarray(b, dtype=np.intp)]

    def as_points(self, points):
        p = np.atleast_1d(np.asarray(points))
        if p.ndim != 1 or not np.issubdtype(p.dtype, np.integer):
            raise ValueError("finite-metric points are integer indices")
        if np.any(p < 0) or np.any(p >= self.m):
            raise ValueError(f"finite-metric indices must lie in [0, {self.m})")
        return p.astype(np.intp)

    def uniform_sample(self, rng, size):
        return np.minimum((rng.random(size) * self.m).astype(np.intp), self.m - 1)

    def uniform_ball_measure(self, s, r):
        s = np.asarray(s, dtype=np.intp)
        r = np.asarray(r, dtype=float)
        out = np.mean(self.matrix[s] <= r[..., None] + _TOL, axis=-1)
        return float(out) if out.ndim == 0 else out

    def grid_net(self, eps):
        if eps < self.min_positive_distance:
            return Net(np.arange(self.m, dtype=np.intp), 0.0)
        centers = farthest_point_traversal(self.matrix, eps)
        return Net(np.asarray(centers, dtype=np.intp), eps)

    def to_dict(self):
        return {"kind": self.kind, "matrix": self.matrix.tolist()}

    def scaled(self, factor):
        return FiniteMetric(self.matrix * factor)

    def scale_points(self, points, factor):
        return np.asarray(points, dtype=np.intp)


class MetricGraph(Space):
    """Connected graph with positive edge lengths and the shortest-route metric."""

    kind = "graph"
    point_ndim = 1

    def __init__(self, n_vertices, edges):
        self.n_vertices = check_count(n_vertices, "n_vertices")
        edges = [(int(u), int(w), float(length)) for u, w, length in edges]
        if not edges:
            raise ValueError("a metric graph needs at least one edge")
        for u, w, length in edges:
            if not (0 <= u < self.n_vertices and 0 <= w < self.n_vertices):
                raise ValueError(f"edge ({u}, {w}) references a missing vertex")
            check_positive(length, "edge length")
        self.edges = tuple(edges)
        self.u = np.array([e[0] for e in edges], dtype=np.intp)
        self.w = np.array([e[1] for e in edges], dtype=np.intp)
        self.lengths = np.array([e[2] for e in edges])
        self.total_length = float(self.lengths.sum())
        self._cum = np.concatenate([[0.0], np.cumsum(self.lengths)])

        adj = np.full((self.n_vertices, self.n_vertices), np.inf)
        for u, w, length in edges:
            if u != w:
                adj[u, w] = adj[w, u] = min(adj[u, w], length)
        np.fill_diagonal(adj, 0.0)
        dense = np.where(np.isinf(adj), 0.0, adj)
        self.vertex_distance = shortest_path(dense, method="D", directed=False)
        if not np.all(np.isfinite(self.vertex_distance)):
            raise ValueError("metric graph must be connected")
        touched = np.zeros(self.n_vertices, dtype=bool)
        touched[self.u] = touched[self.w] = True
        if not touched.all():
            raise ValueError("every vertex must lie on an edge")
        self._diameter = self._exact_diameter()

    def __repr__(self):
        return f"MetricGraph(n_vertices={self.n_vertices}, edges={len(self.edges)})"

    @property
    def diameter(self):
        return self._diameter

    def _exact_diameter(self):
        D = self.vertex_distance
        best = 0.0
        for e1, (u1, w1, l1) in enumerate(self.edges):
            best = max(best, 0.5 * (l1 + D[u1, w1]))
            for e2, (u2, w2, l2) in enumerate(self.edges):
                if e1 == e2:
                    continue
                # x1 -> (distance to u2) + (distance to w2) is concave piecewise
                # linear; its maximum sits at a kink or an end of edge e1
                cands = {0.0, l1}
                for v in (u2, w2):
                    k = 0.5 * (l1 + D[w1, v] - D[u1, v])
                    if 0.0 < k < l1:
                        cands.add(k)
                for x in cands:
                    a = min(x + D[u1, u2], l1 - x + D[w1, u2])
                    b = min(x + D[u1, w2], l1 - x + D[w1, w2])
                    best = max(best, 0.5 * (a + b + l2))
        return float(best)

    def vertex_distances_from(self, s):
        """Distances from graph point ``s`` to every vertex."""
        e, x = int(s[0]), float(s[1])
        D = self.vertex_distance
        return np.minimum(x + D[self.u[e]], self.lengths[e] - x + D[self.w[e]])

    def distance(self, a, b):
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        e1 = a[..., 0].astype(np.intp)
        e2 = b[..., 0].astype(np.intp)
        x1, x2 = a[..., 1], b[..., 1]
        u1, w1, l1 = self.u[e1], self.w[e1], self.lengths[e1]
        u2, w2, l2 = self.u[e2], self.w[e2], self.lengths[e2]
        D = self.vertex_distance
        y1, y2 = l1 - x1, l2 - x2
        d = np.minimum.reduce([
            x1 + D[u1, u2] + x2,
            x1 + D[u1, w2] + y2,
            y1 + D[w1, u2] + x2,
            y1 + D[w1, w2] + y2,
        ])
        return np.where(e1 == e2, np.minimum(d, np.abs(x1 - x2)), d)

    def as_points(self, points):
        p = np.asarray(points, dtype=float)
        if p.ndim == 1:
            p = p[None, :]
        if p.ndim != 2 or p.shape[1] != 2:
            raise ValueError("graph points must have shape (n, 2): (edge, offset)")
        e = p[:, 0]
        if np.any(e != np.round(e)) or np.any(e < 0) or np.any(e >= len(self.edges)):
            raise ValueError("graph point edge index out of range")
        if np.any(p[:, 1] < 0) or np.any(p[:, 1] > self.lengths[e.astype(np.intp)]):
            raise ValueError("graph point offset outside its edge")
        return p

    def uniform_sample(self, rng, size):
        pos = rng.random(size) * self.total_length
        e = np.clip(np.searchsorted(self._cum, pos, side="right") - 1, 0, len(self.edges) - 1)
        off = np.clip(pos - self._cum[e], 0.0, self.lengths[e])
        return np.stack([e.astype(float), off], axis=-1)

    def _ball_length(self, s, r):
        e0, x0 = int(s[0]), float(s[1])
        dv = self.vertex_distances_from(s)
        a, b = dv[self.u], dv[self.w]
        covered = np.minimum(self.lengths, np.maximum(r - a, 0.0) + np.maximum(r - b, 0.0))
        # the edge holding s: merge its three covered intervals exactly
        le = self.lengths[e0]
        pieces = [(max(x0 - r, 0.0), min(x0 + r, le))]
        if r >= a[e0]:
            pieces.append((0.0, min(r - a[e0], le)))
        if r >= b[e0]:
            pieces.append((max(le - (r - b[e0]), 0.0), le))
        pieces.sort()
        total, (lo, hi) = 0.0, pieces[0]
        for p_lo, p_hi in pieces[1:]:
            if p_lo <= hi:
                hi = max(hi, p_hi)
            else:
                total += hi - lo
                lo, hi = p_lo, p_hi
        total += hi - lo
        covered[e0] = total
        return float(covered.sum())

    def uniform_ball_measure(self, s, r):
        s = np.asarray(s, dtype=float)
        r_arr = np.asarray(r, dtype=float)
        if s.ndim == 1 and r_arr.ndim == 0:
            return min(self._ball_length(s, float(r_arr)) / self.total_length, 1.0)
        s2, r2 = np.broadcast_arrays(np.atleast_2d(s), np.atleast_1d(r_arr)[:, None])
        out = [self._ball_length(si, ri[0]) for si, ri in zip(s2, r2)]
        return np.minimum(np.array(out) / self.total_length, 1.0)

    def grid_net(self, eps):
        pts = []
        mesh = 0.0
        for e, length in enumerate(self.lengths):
            n = max(1, _ceil(length / (2.0 * eps)))
            h = length / n
            mesh = max(mesh, h / 2.0)
            pts.extend((e, (k + 0.5) * h) for k in range(n))
        return Net(np.array(pts, dtype=float), float(mesh))

    def to_dict(self):
        return {"kind": self.kind, "n_vertices": self.n_vertices,
                "edges": [list(e) for e in self.edges]}

    def scaled(self, factor):
        return MetricGraph(self.n_vertices, [(u, w, x * factor) for u, w, x in self.edges])

    def scale_points(self, points, factor):
        p = np.array(points, dtype=float)
        p[..., 1] *= factor
        return p


@dataclass(frozen=True, eq=False)
class Net:
    """Finite point set whose covering radius is at most ``mesh``."""

    points: np.ndarray
    mesh: float

    def __len__(self):
        return len(self.points)


@dataclass(frozen=True, eq=False)
class SeedDistribution:
    """Law of the seed (ball center) locations.

    ``kind`` is ``"uniform"``, ``"atoms"`` or ``"mixture"``. For a mixture,
    ``atom_weight`` is the probability of drawing from the atoms and the rest
    of the mass is uniform on the space.
    """

    kind: str
    points: object = None
    weights: np.ndarray = None
    atom_weight: float = 0.0

    @classmethod
    def uniform(cls):
        return cls("uniform")

    @classmethod
    def atoms(cls, points, weights=None):
        pts = np.asarray(points)
        n = len(pts)
        if n == 0:
            raise ValueError("atoms need at least one point")
        w = np.full(n, 1.0 / n) if weights is None else check_weights(weights)
        if len(w) != n:
            raise ValueError("one weight per atom is required")
        return cls("atoms", pts, w)

    @classmethod
    def mixture(cls, points, weights=None, atom_weight=0.5):
        base = cls.atoms(points, weights)
        return cls("mixture", base.points, base.weights, check_probability(atom_weight, "atom_weight"))

    def scaled(self, space, factor):
        """This law transported to ``space.scaled(factor)``."""
        if self.kind == "uniform":
            return self
        return SeedDistribution(self.kind, space.scale_points(self.points, factor),
                                self.weights, self.atom_weight)

    def check(self, space):
        """Validate this distribution against ``space``; returns atom points."""
        if self.kind not in ("uniform", "atoms", "mixture"):
            raise ValueError(f"unknown seed distribution kind {self.kind!r}")
        if self.kind in ("uniform", "mixture") and not space.has_uniform:
            raise ValueError(f"{space.kind} has no canonical uniform measure")
        if self.kind == "uniform":
            return None
        return space.as_points(self.points)

    def to_dict(self):
        out = {"kind": self.kind}
        if self.kind != "uniform":
            out["points"] = np.asarray(self.points).tolist()
            out["weights"] = self.weights.tolist()
        if self.kind == "mixture":
            out["atom_weight"] = self.atom_weight
        return out


def evenly_spaced_atoms(space, n, offset=0.0):
    """Uniform distribution on ``n`` evenly spaced points of a circle."""
    if not isinstance(space, Circle):
        raise TypeError("evenly spaced atoms are defined on the circle")
    return SeedDistribution.atoms((offset + np.arange(n) * space.L / n) % space.L)


# ---------------------------------------------------------------------------
# operations


def distance(space, a, b):
    """Metric distance between points (broadcasts over arrays of points)."""
    return space.distance(a, b)


def sample(space, mu, rng, size=None):
    """Draw i.i.d. points from ``mu``; ``size=None`` returns a single point."""
    n = 1 if size is None else int(size)
    atoms = mu.check(space)
    if mu.kind == "uniform":
        out = space.uniform_sample(rng, n)
    else:
        cdf = np.cumsum(mu.weights)
        cdf /= cdf[-1]
        u = rng.random(n)
        pick = np.minimum(np.searchsorted(cdf, u, side="right"), len(cdf) - 1)
        out = atoms[pick]
        if mu.kind == "mixture":
            from_atoms = rng.random(n) < mu.atom_weight
            unif = space.uniform_sample(rng, n)
            out = np.where(from_atoms.reshape((-1,) + (1,) * (out.ndim - 1)), out, unif)
            out = out.astype(atoms.dtype if space.kind == "finite" else float)
    return out[0] if size is None else out


def _atom_mass(space, atoms, weights, s, r):
    d = space.distance(np.asarray(s)[..., None] if space.point_ndim == 0
                       else np.asarray(s)[..., None, :], atoms)
    return np.sum(np.where(d <= np.asarray(r)[..., None], weights, 0.0), axis=-1)


def ball_measure(space, mu, s, r):
    """Exact ``mu(ball(s, r))`` (vectorized over ``s`` and ``r``)."""
    if np.any(np.asarray(r) < 0):
        raise ValueError("radius must be nonnegative")
    atoms = mu.check(space)
    if mu.kind == "uniform":
        return space.uniform_ball_measure(s, r)
    mass = _atom_mass(space, atoms, mu.weights, s, r)
    if mu.kind == "mixture":
        mass = mu.atom_weight * mass + (1 - mu.atom_weight) * space.uniform_ball_measure(s, r)
    return mass


def _eta_atoms_1d(space, atoms, weights, r):
    # s -> atom mass of ball(s, r) is piecewise constant with jumps at atom +- r
    # and closed balls: the infimum is attained strictly between breakpoints
    if isinstance(space, Circle):
        br = np.sort(np.concatenate([(atoms - r) % space.L, (atoms + r) % space.L]))
        br = np.concatenate([br, [br[0] + space.L]])
        cand = (0.5 * (br[:-1] + br[1:])) % space.L
    else:
        br = np.unique(np.clip(np.concatenate([atoms - r, atoms + r, [0.0, space.L]]), 0, space.L))
        cand = np.concatenate([br, 0.5 * (br[:-1] + br[1:])])
    return float(np.min(_atom_mass(space, atoms, weights, cand, r)))


def eta(space, mu, r, eps=None):
    """Infimum over centers of ``mu(ball(s, r))``.

    Exact for uniform measures on the circle, segment and torus, for atoms
    on 1-D spaces, and for finite metrics. Otherwise a certified lower bound
    ``min_p mu(ball(p, r - eps))`` over an ``eps``-net (default ``r / 10``).
    Returns :data:`Certified`.
    """
    r = check_positive(r, "r")
    atoms = mu.check(space)
    if isinstance(space, FiniteMetric):
        pts = np.arange(space.m)
        return Certified(float(np.min(ball_measure(space, mu, pts, r))), True, 0.0)
    if mu.kind == "uniform" and isinstance(space, (Circle, FlatTorus)):
        s0 = 0.0 if isinstance(space, Circle) else np.zeros(2)
        return Certified(float(space.uniform_ball_measure(s0, r)), True, 0.0)
    if mu.kind == "uniform" and isinstance(space, Segment):
        return Certified(min(r, space.L) / space.L, True, 0.0)
    if mu.kind == "atoms" and isinstance(space, (Circle, Segment)):
        return Certified(_eta_atoms_1d(space, atoms, mu.weights, r), True, 0.0)
    eps = r / 10.0 if eps is None else check_positive(eps, "eps")
    if eps >= r:
        raise ValueError("eps must be smaller than r")
    net = epsilon_net(space, eps)
    vals = ball_measure(space, mu, net.points, np.full(len(net), r - eps))
    return Certified(float(np.min(vals)), False, net.mesh)


def farthest_point_traversal(dist, threshold, start=0):
    """Greedy centers until every point is within ``threshold`` of one.

    ``dist`` is a square distance matrix or a callable returning row ``i``.
    Ties go to the lowest index. Returns the list of center indices.
    """
    row = dist if callable(dist) else np.asarray(dist).__getitem__
    centers = [start]
    near = np.array(row(start), dtype=float)
    while True:
        far = int(np.argmax(near))
        if near[far] <= threshold + _TOL:
            return centers
        centers.append(far)
        np.minimum(near, row(far), out=near)


def _rows(space, pts):
    return lambda i: space.distance(pts[i], pts)


def _exact_finite_cover(matrix, r):
    m = matrix.shape[0]
    masks = [sum(1 << j for j in range(m) if matrix[i, j] <= r + _TOL) for i in range(m)]
    full = (1 << m) - 1
    for k in range(1, m + 1):
        for combo in itertools.combinations(masks, k):
            acc = 0
            for mask in combo:
                acc |= mask
            if acc == full:
                return k
    return m


def covering_number(space, r, eps=None):
    """Minimum number of radius-``r`` balls covering the space.

    Exact on the circle and segment, and on finite metrics with at most
    ``EXHAUSTIVE_LIMIT`` points. Otherwise an upper bound from farthest-point
    traversal of an ``eps``-net at radius ``r - eps``. Returns :data:`Certified`.
    """
    r = check_positive(r, "r")
    if r >= space.diameter:
        return Certified(1, True, 0.0)
    if isinstance(space, (Circle, Segment)):
        return Certified(max(1, _ceil(space.L / (2.0 * r))), True, 0.0)
    if isinstance(space, FiniteMetric):
        if space.m <= EXHAUSTIVE_LIMIT:
            return Certified(_exact_finite_cover(space.matrix, r), True, 0.0)
        return Certified(len(farthest_point_traversal(space.matrix, r)), False, 0.0)
    eps = r / 4.0 if eps is None else check_positive(eps, "eps")
    if eps >= r:
        raise ValueError("eps must be smaller than r")
    net = epsilon_net(space, eps)
    centers = farthest_point_traversal(_rows(space, net.points), r - net.mesh)
    return Certified(len(centers), False, net.mesh)


def dimension_d(space, r, eps=None):
    """Smallest count of radius-``r/2`` balls covering any radius-``r`` ball.

    Exact on the circle and segment; a certified upper bound elsewhere.
    """
    r = check_positive(r, "r")
    if isinstance(space, Circle):
        return Certified(1 if r >= space.L else 2, True, 0.0)
    if isinstance(space, Segment):
        return Certified(1 if r >= space.L else 2, True, 0.0)
    if isinstance(space, FiniteMetric):
        best = 0
        for s in range(space.m):
            inside = np.flatnonzero(space.matrix[s] <= r + _TOL)
            sub = space.matrix[np.ix_(inside, inside)]
            best = max(best, len(farthest_point_traversal(sub, r / 2.0)))
        return Certified(best, False, 0.0)
    eps = r / 16.0 if eps is None else check_positive(eps, "eps")
    net = epsilon_net(space, eps)
    h = net.mesh
    if h >= r / 2.0:
        raise ValueError("eps too coarse for a certified d(r) bound")
    pts = net.points
    # torus: translation invariant, one center suffices
    centers = [0] if isinstance(space, FlatTorus) else range(len(net))
    best = 0
    for p in centers:
        # ball(s, r) sits inside ball(p, r + h); net points within r + 2h of p
        # are within h of every point of that ball
        inside = pts[space.distance(pts[p], pts) <= r + 2.0 * h + _TOL]
        best = max(best, len(farthest_point_traversal(_rows(space, inside), r / 2.0 - h)))
    return Certified(best, False, h)


def covering_centers(space, r):
    """Centers of a covering of the space by radius-``r`` balls.

    Optimal (``covering_number`` many) on the circle, the segment and small
    finite metrics; a farthest-point covering otherwise.
    """
    r = check_positive(r, "r")
    if isinstance(space, (Circle, Segment)):
        k = covering_number(space, r).value
        return (np.arange(k) + 0.5) * space.L / k
    if isinstance(space, FiniteMetric):
        if space.m <= EXHAUSTIVE_LIMIT:
            k = covering_number(space, r).value
            ball = space.matrix <= r + _TOL
            for combo in itertools.combinations(range(space.m), k):
                if ball[list(combo)].any(axis=0).all():
                    return np.array(combo, dtype=np.intp)
        return np.array(farthest_point_traversal(space.matrix, r), dtype=np.intp)
    eps = r / 4.0
    net = epsilon_net(space, eps)
    pts = np.asarray(net.points)
    return pts[farthest_point_traversal(_rows(space, pts), r - net.mesh)]


def epsilon_net(space, eps):
    """A :class:`Net` with covering radius at most ``eps``."""
    eps = check_positive(eps, "eps")
    return space.grid_net(eps)


def net_covering_radius(space, net, probes):
    """Largest distance from any of ``probes`` to its nearest net point."""
    if space.point_ndim == 0:
        d = space.distance(np.asarray(probes)[:, None], np.asarray(net.points)[None, :])
    else:
        d = space.distance(np.asarray(probes)[:, None, :], np.asarray(net.points)[None, :, :])
    return float(d.min(axis=1).max())


def space_from_dict(spec):
    """Build a space from a plain mapping (``kind`` plus kind-specific fields)."""
    kind = spec.get("kind")
    if kind == "circle":
        return Circle(float(spec["L"]))
    if kind == "segment":
        return Segment(float(spec["L"]))
    if kind == "torus":
        return FlatTorus(float(spec["L1"]), float(spec["L2"]))
    if kind == "finite":
        if "file" in spec:
            return FiniteMetric.from_file(spec["file"])
        if "matrix" in spec:
            return FiniteMetric(np.asarray(spec["matrix"], dtype=float))
        return FiniteMetric.equilateral(int(spec["m"]), float(spec.get("d", 1.0)))
    if kind == "graph":
        return MetricGraph(int(spec["n_vertices"]), spec["edges"])
    raise ValueError(f"unknown space kind {kind!r}")
