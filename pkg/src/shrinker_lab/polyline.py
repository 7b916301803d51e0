"""Polygonal curve utilities: self-intersections, distances, resampling."""

from __future__ import annotations

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.spatial import cKDTree

from .errors import InputError


def _segments(P, closed):
    P = np.asarray(P, dtype=float)
    A = P
    B = np.roll(P, -1, axis=0)
    if not closed:
        A, B = A[:-1], B[:-1]
    return A, B


def _cross(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def self_intersections(points, closed=True, tol=1e-12):
    """Locate crossings between non-adjacent segments of a polyline.

    Candidate pairs come from a k-d tree on segment midpoints, so the cost is
    close to linear for evenly sampled curves.  Intersection points closer
    than ``1e-9`` are merged, which keeps a crossing through a shared vertex
    from being counted twice.

    Returns
    -------
    ndarray, shape (k, 2)
        The distinct intersection points.
    """
    A, B = _segments(points, closed)
    m = len(A)
    if m < 3:
        return np.empty((0, 2))
    D = B - A
    lengths = np.hypot(D[:, 0], D[:, 1])
    mid = 0.5 * (A + B)
    pairs = cKDTree(mid).query_pairs(r=float(lengths.max()) * (1 + 1e-9) + 1e-15, output_type="ndarray")
    if len(pairs) == 0:
        return np.empty((0, 2))
    i, j = pairs[:, 0], pairs[:, 1]
    lo, hi = np.minimum(i, j), np.maximum(i, j)
    adjacent = (hi - lo == 1) | (closed & (lo == 0) & (hi == m - 1))
    i, j = lo[~adjacent], hi[~adjacent]
    denom = _cross(D[i], D[j])
    w = A[j] - A[i]
    ok = np.abs(denom) > 1e-300
    s = np.where(ok, _cross(w, D[j]) / np.where(ok, denom, 1.0), -1.0)
    t = np.where(ok, _cross(w, D[i]) / np.where(ok, denom, 1.0), -1.0)
    hit = ok & (s >= -tol) & (s <= 1 + tol) & (t >= -tol) & (t <= 1 + tol)
    pts = A[i[hit]] + s[hit, None] * D[i[hit]]
    if len(pts) == 0:
        return np.empty((0, 2))
    # merge duplicates produced by crossings through shared vertices
    keep = []
    for p in pts:
        if all(np.hypot(*(p - q)) > 1e-9 for q in keep):
            keep.append(p)
    return np.array(keep)


def count_self_intersections(points, closed=True):
    return int(len(self_intersections(points, closed=closed)))


def is_simple(points, closed=True):
    """True if no two non-adjacent segments meet."""
    return count_self_intersections(points, closed=closed) == 0


def densify(points, max_spacing, closed=False):
    """Insert points on each segment so no gap exceeds ``max_spacing``."""
    P = np.asarray(points, dtype=float)
    A, B = _segments(P, closed)
    seg = np.hypot(*(B - A).T)
    k = np.maximum(1, np.ceil(seg / max_spacing).astype(int))
    out = [A[i] + np.outer(np.arange(k[i]) / k[i], B[i] - A[i]) for i in range(len(A))]
    if not closed:
        out.append(P[-1:])
    return np.vstack(out)


def hausdorff_distance(a, b, closed_a=False, closed_b=False, max_spacing=None):
    """Symmetric Hausdorff distance between two polylines.

    Both curves are densified to ``max_spacing`` (default ``1e-4`` times the
    larger bounding-box diagonal) before nearest-neighbour queries, so the
    result approximates the distance between the continuous polylines to
    within ``max_spacing / 2``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if len(a) < 1 or len(b) < 1:
        raise InputError("hausdorff_distance needs non-empty curves")
    if max_spacing is None:
        diag = max(np.ptp(a, axis=0).max(), np.ptp(b, axis=0).max(), 1e-12)
        max_spacing = 1e-4 * diag
    A = densify(a, max_spacing, closed_a) if len(a) > 1 else a
    B = densify(b, max_spacing, closed_b) if len(b) > 1 else b
    d1 = cKDTree(B).query(A)[0].max()
    d2 = cKDTree(A).query(B)[0].max()
    return float(max(d1, d2))


def arclength(points, closed=False):
    """Cumulative Euclidean arc length, starting at 0."""
    P = np.asarray(points, dtype=float)
    if closed:
        P = np.vstack([P, P[:1]])
    d = np.hypot(*np.diff(P, axis=0).T)
    return np.concatenate([[0.0], np.cumsum(d)])


def resample_closed(points, count=None):
    """Redistribute a closed curve to uniform Euclidean arc length.

    A periodic cubic spline through the vertices, parameterised by chord
    length, is sampled at ``count`` equally spaced arc-length values starting
    at the first vertex.
    """
    P = np.asarray(points, dtype=float)
    count = len(P) if count is None else int(count)
    s = arclength(P, closed=True)
    spline = CubicSpline(s, np.vstack([P, P[:1]]), bc_type="periodic")
    return spline(np.arange(count) * (s[-1] / count))


def mirror_x(points):
    """Reflect points across the vertical axis ``u = 0``."""
    P = np.array(points, dtype=float, copy=True)
    P[..., 0] *= -1.0
    return P


def close_by_reflection(half, axis="u"):
    """Assemble a symmetric curve from one half and its mirror image.

    Parameters
    ----------
    half : array_like, shape (k, 2)
        Arc from one point of the symmetry line to another.
    axis : {'u', 'diagonal'}
        Mirror across ``u = 0`` or across the diagonal ``u = v``.

    Returns
    -------
    ndarray
        ``half`` followed by the reversed mirror image (endpoints shared by
        the two halves are not repeated).
    """
    H = np.asarray(half, dtype=float)
    if axis == "u":
        M = mirror_x(H)
    elif axis == "diagonal":
        M = H[:, ::-1].copy()
    else:
        raise InputError("axis must be 'u' or 'diagonal'")
    return np.vstack([H, M[::-1][1:-1]])
