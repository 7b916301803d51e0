"""Bisection, sign-change sweeps and the result record shared by all searches."""

from __future__ import annotations

import enum
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import SearchFailure


class Classification(enum.Enum):
    IMMERSED_SPHERE = "immersed_sphere"
    EMBEDDED_TORUS = "embedded_torus"
    IMMERSED_TORUS = "immersed_torus"
    CLOSED_PLANAR = "closed_planar"
    EMBEDDED_T3 = "embedded_t3"
    IMMERSED_T3 = "immersed_t3"
    IMMERSED_S3 = "immersed_s3"
    EMBEDDED_S3 = "embedded_s3"
    UNCLASSIFIED = "unclassified"


@dataclass
class SearchResult:
    """Outcome of a shooting or flow search.

    Attributes
    ----------
    parameter : float
        Converged shooting parameter.
    bracket : tuple of float
        Final bracket ``(lo, hi)``.
    residuals : dict
        Named closure defects of the returned profile.
    profile : object
        The half profile (a Trajectory) or a discrete curve.
    classification : Classification
    curve : ndarray, optional
        Closed (or axis-to-axis) polygon assembled from the profile.
    info : dict
        Extra numbers worth recording (intercepts, lengths, counts).
    sweep : list of tuple
        Diagnostic table collected while bracketing.
    """

    parameter: float
    bracket: tuple
    residuals: dict
    profile: object
    classification: Classification = Classification.UNCLASSIFIED
    curve: np.ndarray | None = None
    info: dict = field(default_factory=dict)
    sweep: list = field(default_factory=list)

    def max_residual(self) -> float:
        return max(self.residuals.values()) if self.residuals else 0.0


def thread_cap() -> int:
    """Worker count for sweeps: ``SHRINKER_LAB_THREADS`` capped by the CPU count."""
    cpus = os.cpu_count() or 1
    env = os.environ.get("SHRINKER_LAB_THREADS")
    if env:
        try:
            return max(1, min(cpus, int(env)))
        except ValueError:
            pass
    return cpus


def sweep(fn, params, workers=None):
    """Evaluate ``fn`` at each parameter, in order, possibly in worker processes.

    ``fn`` must be picklable (a module-level function or a partial of one)
    when more than one worker is used.  Results keep the input order, so the
    output does not depend on the worker count.
    """
    params = list(params)
    workers = thread_cap() if workers is None else max(1, int(workers))
    if workers == 1 or len(params) < 4:
        return [fn(p) for p in params]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, params, chunksize=max(1, len(params) // (4 * workers))))


def bisect_predicate(pred, lo, hi, tol, max_iter=200):
    """Shrink ``[lo, hi]`` with ``pred(lo)`` true and ``pred(hi)`` false.

    Returns the final ``(lo, hi)`` with ``hi - lo <= tol``.  Midpoints are
    computed the same way on every call so brackets are reproducible bit for
    bit.
    """
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = lo + 0.5 * (hi - lo)
        if mid <= lo or mid >= hi:
            break
        if pred(mid):
            lo = mid
        else:
            hi = mid
    return lo, hi


def bisect_sign(f, lo, hi, tol, f_lo=None, f_hi=None, max_iter=200):
    """Bisection on a continuous function with a sign change on ``[lo, hi]``.

    Values that are ``None`` (feature missing) raise :class:`SearchFailure`.

    Returns
    -------
    (lo, hi, f_lo, f_hi)
    """
    f_lo = f(lo) if f_lo is None else f_lo
    f_hi = f(hi) if f_hi is None else f_hi
    if f_lo is None or f_hi is None or np.sign(f_lo) == np.sign(f_hi):
        raise SearchFailure(f"no sign change on [{lo}, {hi}]", [(lo, f_lo), (hi, f_hi)])
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = lo + 0.5 * (hi - lo)
        if mid <= lo or mid >= hi:
            break
        f_mid = f(mid)
        if f_mid is None:
            raise SearchFailure(f"functional undefined at {mid} inside the bracket", [(mid, None)])
        if f_mid == 0:
            return mid, mid, f_mid, f_mid
        if np.sign(f_mid) == np.sign(f_lo):
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
    return lo, hi, f_lo, f_hi


def sign_changes(params, values, max_jump=None):
    """Indices ``i`` where ``values[i]`` and ``values[i+1]`` have opposite signs.

    Missing values (``None``) never participate.  With ``max_jump`` set, a
    change is kept only if both values are below it in magnitude, which
    filters jumps caused by angle wrapping or a feature switching identity.
    """
    out = []
    for i in range(len(params) - 1):
        a, b = values[i], values[i + 1]
        if a is None or b is None:
            continue
        if np.sign(a) * np.sign(b) < 0:
            if max_jump is None or (abs(a) < max_jump and abs(b) < max_jump):
                out.append(i)
    return out
