"""Compiled event loops for the exact 1-D and finite cover computations."""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _insert_at(arr, k, j, value):
    for i in range(k, j, -1):
        arr[i] = arr[i - 1]
    arr[j] = value


@njit(cache=True, nogil=True)
def _search(arr, k, value):
    lo, hi = 0, k
    while lo < hi:
        mid = (lo + hi) // 2
        if arr[mid] < value:
            lo = mid + 1
        else:
            hi = mid
    return lo


@njit(cache=True, nogil=True)
def fixed_1d_cover_index(pos, L, two_r, periodic):
    """First ``n`` (1-based) at which arcs of length ``two_r`` centred at
    ``pos[:n]`` cover the circle (``periodic``) or ``[0, L]``; -1 if never.

    Coverage holds iff every gap between neighbouring centres is at most
    ``two_r``; on the segment the end gaps count double.
    """
    n = pos.size
    ep = np.empty(n)
    k = 0
    bad = 1
    for i in range(n):
        p = pos[i]
        if k == 0:
            bad = 0
            if periodic:
                bad += L > two_r
            else:
                bad += 2.0 * p > two_r
                bad += 2.0 * (L - p) > two_r
            ep[0] = p
            k = 1
        else:
            j = _search(ep, k, p)
            if 0 < j < k:
                old = ep[j] - ep[j - 1]
                g1 = p - ep[j - 1]
                g2 = ep[j] - p
            elif periodic:
                left, right = ep[k - 1], ep[0]
                old = right + L - left
                if j == k:
                    g1 = p - left
                    g2 = right + L - p
                else:
                    g1 = p + L - left
                    g2 = right - p
            elif j == 0:
                old = 2.0 * ep[0]
                g1 = 2.0 * p
                g2 = ep[0] - p
            else:
                old = 2.0 * (L - ep[k - 1])
                g1 = p - ep[k - 1]
                g2 = 2.0 * (L - p)
            bad += (g1 > two_r) + (g2 > two_r) - (old > two_r)
            _insert_at(ep, k, j, p)
            k += 1
        if bad == 0:
            return i + 1
    return -1


@njit(cache=True, nogil=True)
def fixed_finite_cover_index(centers, ball):
    """First ``n`` at which the balls ``ball[centers[:n]]`` cover every point."""
    m = ball.shape[0]
    covered = np.zeros(m, dtype=np.bool_)
    left = m
    for i in range(centers.size):
        c = centers[i]
        for j in range(m):
            if ball[c, j] and not covered[j]:
                covered[j] = True
                left -= 1
        if left == 0:
            return i + 1
    return -1


@njit(cache=True, nogil=True)
def _envelope_max(ep, et, k, L, v, periodic):
    best = -np.inf
    if periodic:
        if k == 1:
            return et[0] + 0.5 * L / v
        for i in range(k):
            j = i + 1 if i + 1 < k else 0
            gap = ep[j] - ep[i] if j > 0 else ep[0] + L - ep[k - 1]
            val = 0.5 * (et[i] + et[j] + gap / v)
            if val > best:
                best = val
        return best
    best = max(et[0] + ep[0] / v, et[k - 1] + (L - ep[k - 1]) / v)
    for i in range(k - 1):
        val = 0.5 * (et[i] + et[i + 1] + (ep[i + 1] - ep[i]) / v)
        if val > best:
            best = val
    return best


@njit(cache=True, nogil=True)
def growth_1d_cover_time(taus, pos, L, v, periodic):
    """Exact cover time of growing balls on a circle or segment.

    Arrivals must be sorted by time. A seed landing on already covered
    ground never lowers the envelope ``s -> min_i tau_i + d(s, sigma_i)/v``
    and is dropped. Between positional neighbours among the kept seeds the
    envelope is the lower of their two tents, so its maximum is the largest
    neighbour crossing (or an end value on the segment). Processing stops at
    the first arrival later than the current maximum.

    Returns ``(cover_time, kept, consumed)``.
    """
    n = taus.size
    ep = np.empty(n)
    et = np.empty(n)
    k = 0
    best = np.inf
    consumed = 0
    for i in range(n):
        t = taus[i]
        p = pos[i]
        if t >= best:
            break
        consumed = i + 1
        if k > 0:
            j = _search(ep, k, p)
            if periodic:
                li = j - 1 if j > 0 else k - 1
                ri = j if j < k else 0
                dl = p - ep[li] if j > 0 else p + L - ep[li]
                dr = ep[ri] - p if j < k else ep[ri] + L - p
                f = min(et[li] + dl / v, et[ri] + dr / v)
            elif j == 0:
                f = et[0] + (ep[0] - p) / v
            elif j == k:
                f = et[k - 1] + (p - ep[k - 1]) / v
            else:
                f = min(et[j - 1] + (p - ep[j - 1]) / v, et[j] + (ep[j] - p) / v)
            if f <= t:
                continue
        else:
            j = 0
        _insert_at(ep, k, j, p)
        _insert_at(et, k, j, t)
        k += 1
        best = _envelope_max(ep, et, k, L, v, periodic)
    return best, k, consumed
