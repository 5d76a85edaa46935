"""Adaptive Simpson quadrature and a bisection-guarded Newton solver."""

import math


class QuadratureError(RuntimeError):
    """Raised when adaptive quadrature cannot reach the requested tolerance."""


class RootFindingError(RuntimeError):
    pass


def _simpson(fa, fm, fb, a, b):
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb)


def adaptive_simpson(f, a, b, rtol=1e-9, atol=1e-15, max_depth=50, breakpoints=(), min_depth=4):
    """Integrate ``f`` over ``[a, b]`` by recursive Simpson refinement.

    Each panel is accepted when the Richardson error estimate falls below its
    share of ``max(atol, rtol * |I|)``, with ``|I|`` taken from a coarse
    first pass. Kinks of ``f`` passed in ``breakpoints`` become panel edges.

    Returns ``(value, error_estimate)``. Raises :class:`QuadratureError` if a
    panel is still unresolved at ``max_depth``.
    """
    if b < a:
        value, err = adaptive_simpson(f, b, a, rtol, atol, max_depth, breakpoints, min_depth)
        return -value, err
    if b == a:
        return 0.0, 0.0
    edges = [a] + sorted(x for x in breakpoints if a < x < b) + [b]

    # coarse pass sets the absolute target
    panels = []
    scale = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid = 0.5 * (lo + hi)
        flo, fmid, fhi = f(lo), f(mid), f(hi)
        whole = _simpson(flo, fmid, fhi, lo, hi)
        panels.append((lo, hi, flo, fmid, fhi, whole))
        scale += abs(whole)
    total_tol = max(atol, rtol * scale)
    width = b - a

    total = 0.0
    total_err = 0.0
    stack = [(p, 0) for p in panels]
    while stack:
        (lo, hi, flo, fmid, fhi, whole), depth = stack.pop()
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = f(lm), f(rm)
        left = _simpson(flo, flm, fmid, lo, mid)
        right = _simpson(fmid, frm, fhi, mid, hi)
        delta = left + right - whole
        tol = total_tol * (hi - lo) / width
        if depth >= min_depth and abs(delta) <= 15.0 * tol:
            total += left + right + delta / 15.0
            total_err += abs(delta) / 15.0
            continue
        if depth >= max_depth:
            raise QuadratureError(
                f"adaptive Simpson did not converge on [{lo!r}, {hi!r}] "
                f"(panel error {abs(delta):.3e}, target {tol:.3e})"
            )
        stack.append(((lo, mid, flo, flm, fmid, left), depth + 1))
        stack.append(((mid, hi, fmid, frm, fhi, right), depth + 1))
    return total, total_err


def newton_bisect(f, df, lo, hi, x0=None, xtol=1e-15, ftol=0.0, max_iter=200):
    """Find a root of ``f`` in the bracket ``[lo, hi]``.

    Newton steps are taken from ``x0`` and replaced by bisection whenever
    they leave the current bracket. ``f(lo)`` and ``f(hi)`` must differ in
    sign.
    """
    flo, fhi = f(lo), f(hi)
    if flo == 0:
        return lo
    if fhi == 0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise RootFindingError(f"root not bracketed: f({lo})={flo}, f({hi})={fhi}")
    x = 0.5 * (lo + hi) if x0 is None or not lo < x0 < hi else x0
    for _ in range(max_iter):
        fx = f(x)
        if abs(fx) <= ftol:
            return x
        if (fx > 0) == (flo > 0):
            lo, flo = x, fx
        else:
            hi = x
        d = df(x)
        step_ok = d != 0 and math.isfinite(d)
        nxt = x - fx / d if step_ok else 0.5 * (lo + hi)
        if not lo < nxt < hi:
            nxt = 0.5 * (lo + hi)
        if abs(nxt - x) <= xtol * max(1.0, abs(x)) or hi - lo <= xtol * max(1.0, abs(x)):
            return nxt
        x = nxt
    raise RootFindingError("Newton/bisection iteration limit reached")
