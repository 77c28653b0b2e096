"""Slow, obviously-correct reference computations used by the tests."""
import itertools
import math

import numpy as np


def naive_dct2(frame):
    """Orthonormal 2-D DCT-II by the direct quadruple sum."""
    h, w = frame.shape
    out = np.zeros((h, w))
    for u in range(h):
        for v in range(w):
            s = 0.0
            for x in range(h):
                for y in range(w):
                    s += (frame[x, y]
                          * math.cos(math.pi * (2 * x + 1) * u / (2 * h))
                          * math.cos(math.pi * (2 * y + 1) * v / (2 * w)))
            cu = math.sqrt(1 / h) if u == 0 else math.sqrt(2 / h)
            cv = math.sqrt(1 / w) if v == 0 else math.sqrt(2 / w)
            out[u, v] = cu * cv * s
    return out


def all_warping_paths(n, m):
    """Every monotone, continuous path from (0, 0) to (n-1, m-1)."""
    steps = ((1, 0), (1, 1), (0, 1))

    def walk(i, j):
        if (i, j) == (n - 1, m - 1):
            yield [(i, j)]
            return
        for di, dj in steps:
            a, b = i + di, j + dj
            if a < n and b < m:
                for rest in walk(a, b):
                    yield [(i, j)] + rest

    yield from walk(0, 0)


def brute_force_dtw(cost):
    """Minimum path cost, summing each path from its start."""
    n, m = cost.shape
    best = math.inf
    for path in all_warping_paths(n, m):
        total = 0.0
        for i, j in path:
            total = total + cost[i, j]
        best = min(best, total)
    return best


def hoof_loop(u, v, bins):
    hist = [0.0] * bins
    for a, b in zip(np.ravel(u), np.ravel(v)):
        mag = math.hypot(a, b)
        if mag == 0:
            continue
        theta = math.atan2(b, a)
        k = min(int(math.floor(bins * (theta + math.pi) / (2 * math.pi))), bins - 1)
        hist[k] += mag
    return np.array(hist)


def hinge_grid(diff, lo=0.0, hi=10.0, steps=200, eps=0.0):
    """Objective over a steps x steps lattice on [lo, hi]^2 (inclusive)."""
    axis = np.linspace(lo, hi, steps)
    a1, a2 = np.meshgrid(axis, axis, indexing="ij")
    alphas = np.stack([a1.ravel(), a2.ravel()], axis=1)
    margins = alphas @ np.asarray(diff).T
    obj = np.maximum(margins + 1.0, 0.0).sum(axis=1) + eps * alphas.sum(axis=1)
    return alphas, obj


def count_histogram(values, labels, edges):
    """Per-label counts with numpy's edge convention: last bin closed."""
    nb = len(edges) - 1
    counts = {"matching": [0] * nb, "nonmatching": [0] * nb}
    for d, lab in zip(values, labels):
        for b in range(nb):
            lo, hi = edges[b], edges[b + 1]
            if lo <= d < hi or (b == nb - 1 and d == hi):
                counts[lab][b] += 1
                break
    return counts
