"""DTW alignment of a query frame-hash series to a reference series and
reconstruction of a query video on the reference time axis.

Indices are 0-based throughout; the CLI and text dumps use the same.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyMatchTable, EmptySeries


@dataclass(frozen=True)
class WarpingPath:
    points: tuple  # ((query_idx, ref_idx), ...)
    total_cost: float

    def __len__(self):
        return len(self.points)


@dataclass(frozen=True)
class MatchTable:
    rows: tuple  # ((query_idx, ref_idx), ...) ordered by ref_idx

    @property
    def interval_count(self) -> int:
        return len(self.rows)

    def __len__(self):
        return len(self.rows)

    @classmethod
    def identity(cls, n):
        return cls(tuple((k, k) for k in range(n)))


def _coeffs(h):
    c = h.coeffs if hasattr(h, "coeffs") else np.asarray(h, dtype=np.float64).reshape(-1, 2)
    if c.shape[0] == 0:
        raise EmptySeries("frame-hash series is empty")
    return c


def cost_matrix(hq, hr):
    """Euclidean distance between every query frame hash and every reference
    frame hash; rows index the query."""
    q = _coeffs(hq)
    r = _coeffs(hr)
    diff = q[:, None, :] - r[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=-1))


def accumulated_cost(cost, band=None):
    """Fill the DTW table gamma(i, j) = D(i, j) + min of the three predecessors.

    ``band`` restricts cells to |i - j * n / m| <= band (Sakoe-Chiba style,
    scaled for unequal lengths); None leaves the search unconstrained.
    """
    cost = np.asarray(cost, dtype=np.float64)
    n, m = cost.shape
    if n == 0 or m == 0:
        raise EmptySeries("cost matrix is empty")
    gamma = np.full((n + 1, m + 1), np.inf)
    gamma[0, 0] = 0.0
    allowed = None
    if band is not None:
        ii, jj = np.mgrid[0:n, 0:m]
        scale = (n - 1) / (m - 1) if m > 1 else 0.0
        allowed = np.abs(ii - jj * scale) <= band
        allowed[0, 0] = allowed[-1, -1] = True
    for i in range(1, n + 1):
        prev = gamma[i - 1]
        row = gamma[i]
        c = cost[i - 1]
        for j in range(1, m + 1):
            if allowed is not None and not allowed[i - 1, j - 1]:
                continue
            best = prev[j - 1]
            if prev[j] < best:
                best = prev[j]
            if row[j - 1] < best:
                best = row[j - 1]
            row[j] = c[j - 1] + best
    return gamma[1:, 1:]


def _backtrack(gamma):
    n, m = gamma.shape
    i, j = n - 1, m - 1
    points = [(i, j)]
    while i > 0 or j > 0:
        if i == 0:
            j -= 1
        elif j == 0:
            i -= 1
        else:
            diag, up, left = gamma[i - 1, j - 1], gamma[i - 1, j], gamma[i, j - 1]
            # ties: diagonal first, then (i-1, j)
            if diag <= up and diag <= left:
                i, j = i - 1, j - 1
            elif up <= left:
                i -= 1
            else:
                j -= 1
        points.append((i, j))
    points.reverse()
    return tuple(points)


def dtw(cost, band=None) -> WarpingPath:
    """Optimal monotone, continuous alignment through ``cost``."""
    cost = np.asarray(cost, dtype=np.float64)
    gamma = accumulated_cost(cost, band)
    if not np.isfinite(gamma[-1, -1]):
        raise EmptySeries("band excludes every path to the terminal cell")
    return WarpingPath(_backtrack(gamma), float(gamma[-1, -1]))


def path_cost(points, cost):
    return float(sum(cost[i, j] for i, j in points))


def matching_intervals(w: WarpingPath, cost) -> MatchTable:
    """Split the path at diagonal steps and keep the cheapest point of each
    interval.

    An interval starts at the path's first point or at any point reached by
    incrementing both coordinates, and runs until the next such point.
    Ties within an interval go to the earliest path position.
    """
    pts = w.points
    starts = [0] + [k for k in range(1, len(pts))
                    if pts[k][0] == pts[k - 1][0] + 1 and pts[k][1] == pts[k - 1][1] + 1]
    bounds = starts[1:] + [len(pts)]
    rows = []
    for lo, hi in zip(starts, bounds):
        seg = pts[lo:hi]
        vals = [cost[i, j] for i, j in seg]
        rows.append(seg[int(np.argmin(vals))])
    rows.sort(key=lambda r: r[1])
    return MatchTable(tuple(rows))


def synchronize(vq, mt: MatchTable, reference_length: int):
    """Place query frames at their matched reference positions and fill the
    gaps: linear blends between assigned neighbours inside, replication of
    the nearest assigned frame at either end."""
    if len(mt) == 0:
        raise EmptyMatchTable("no matching intervals to synchronize from")
    src = vq.frames
    assigned = {}
    for q, r in mt.rows:
        if not 0 <= r < reference_length:
            raise ValueError(f"reference index {r} outside [0, {reference_length})")
        if not 0 <= q < len(src):
            raise ValueError(f"query index {q} outside [0, {len(src)})")
        assigned[r] = q
    keys = sorted(assigned)
    out = np.empty((reference_length,) + src.shape[1:], dtype=np.float64)
    for r in keys:
        out[r] = src[assigned[r]]
    out[:keys[0]] = src[assigned[keys[0]]]
    out[keys[-1] + 1:] = src[assigned[keys[-1]]]
    for left, right in zip(keys, keys[1:]):
        span = right - left
        a, b = src[assigned[left]], src[assigned[right]]
        for r in range(left + 1, right):
            t = (r - left) / span
            out[r] = a + t * (b - a)
    np.clip(out, 0.0, 1.0, out=out)
    return vq.with_frames(out)


@dataclass(frozen=True)
class SyncResult:
    video: object
    path: WarpingPath
    matches: MatchTable
    cost: np.ndarray

    @property
    def d_dtw(self) -> float:
        return self.path.total_cost


def sync_video(vq, hq, hr, band=None) -> SyncResult:
    """Full alignment pipeline: cost matrix, DTW, intervals, rebuild."""
    cost = cost_matrix(hq, hr)
    path = dtw(cost, band)
    mt = matching_intervals(path, cost)
    return SyncResult(synchronize(vq, mt, len(_coeffs(hr))), path, mt, cost)


def sync_distance(hq, hr, band=None) -> float:
    """DTW alignment cost between two frame-hash series."""
    return float(accumulated_cost(cost_matrix(hq, hr), band)[-1, -1])
