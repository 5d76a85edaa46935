"""Argument checks shared by the public functions and estimators."""

import numbers

import numpy as np


def check_positive(value, name, strict=True):
    if not isinstance(value, numbers.Real) or isinstance(value, bool):
        raise TypeError(f"{name} must be a real number, got {type(value).__name__}")
    value = float(value)
    if not np.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value}")
    if strict and value <= 0:
        raise ValueError(f"{name} must be > 0, got {value}")
    if not strict and value < 0:
        raise ValueError(f"{name} must be >= 0, got {value}")
    return value


def check_count(value, name, minimum=1):
    if not isinstance(value, numbers.Integral) or isinstance(value, bool):
        raise TypeError(f"{name} must be an integer, got {type(value).__name__}")
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def check_probability(value, name):
    value = check_positive(value, name, strict=False)
    if value > 1:
        raise ValueError(f"{name} must lie in [0, 1], got {value}")
    return value


def check_weights(weights, name="weights", atol=1e-12):
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size == 0:
        raise ValueError(f"{name} must be a nonempty 1-D array")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise ValueError(f"{name} must be finite and nonnegative")
    if abs(w.sum() - 1.0) > atol:
        raise ValueError(f"{name} must sum to 1 (got {w.sum():.17g})")
    return w


def check_distance_matrix(matrix, atol=1e-12):
    d = np.asarray(matrix, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1] or d.shape[0] == 0:
        raise ValueError("distance matrix must be square and nonempty")
    if not np.all(np.isfinite(d)) or np.any(d < 0):
        raise ValueError("distance matrix entries must be finite and nonnegative")
    if not np.allclose(d, d.T, rtol=0, atol=atol):
        raise ValueError("distance matrix must be symmetric")
    if np.any(np.diag(d) != 0):
        raise ValueError("distance matrix must have a zero diagonal")
    m = d.shape[0]
    off = d[~np.eye(m, dtype=bool)]
    if np.any(off <= 0):
        raise ValueError("distinct points must be at positive distance")
    # d[i, k] <= d[i, j] + d[j, k] for every j
    for j in range(m):
        if np.any(d > d[:, [j]] + d[[j], :] + atol):
            raise ValueError("distance matrix violates the triangle inequality")
    return d
