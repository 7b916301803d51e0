"""Gauss-area preserving curve shortening flow in the rotational half-plane.

Closed curves in ``{(x, r) : r > 0}`` move with weighted normal speed
``k_g / K``.  The flow decreases weighted length and preserves the enclosed
Gauss area, so a curve bounding Gauss area ``2 pi`` that converges must
converge to a closed geodesic, the profile of an embedded torus.

Discretization
--------------
A closed polygon ``X`` (counter-clockwise, vertex 0 on the symmetry line
``x = 0``) carries

* turning angles ``theta_i`` at the vertices,
* edge fluxes ``F_e = int_e grad(phi) . N ds`` by Gauss quadrature,
* vertex forcing ``Fv_i = (F_{i-1} + F_i) / 2``.

``theta_i - Fv_i`` is the integrated geodesic curvature at vertex ``i`` (in
the weighted metric, times the weighted dual edge length).  Since
``sum theta = 2 pi`` and ``sum F = gauss area`` exactly, a polygon with all
``theta_i = Fv_i`` encloses Gauss area ``2 pi`` automatically.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import solve_banded
from scipy.optimize import brentq

from .errors import FlowStalled, InputError, SearchFailure, StepRejected
from .geometry import (
    MetricSpec,
    edge_normal_flux,
    gauss_area_rectangle,
    log_density,
    signed_gauss_area,
    turning_angles,
    weighted_length,
)
from .polyline import hausdorff_distance, is_simple, resample_closed
from .search import Classification, SearchResult

DEFAULT_N = 256
DEFAULT_DT = 2e-3
TWO_PI = 2.0 * math.pi


@functools.lru_cache(maxsize=None)
def compute_c0() -> float:
    """Half-height ``c0`` of the initial rectangles.

    ``c0`` is the positive root of ``exp(-c^2/4) = 2 int_0^c exp(-x^2/4) dx``;
    the integral is ``sqrt(pi) erf(c/2)``.

    Examples
    --------
    >>> round(compute_c0(), 3)
    0.481
    """

    def f(c):
        return math.exp(-c * c / 4) - 2.0 * math.sqrt(math.pi) * math.erf(c / 2)

    return brentq(f, 0.1, 1.0, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def compute_phi(n, a, shrink_coeff=-0.5) -> float:
    """Top ``b`` of the rectangle ``[-c0, c0] x [a, b]`` with Gauss area ``2 pi``.

    The Gauss area is increasing in ``b`` and grows without bound, so every
    ``a > 0`` has exactly one solution ``b > a``.
    """
    if not a > 0:
        raise InputError("a must be positive")
    m = MetricSpec.rotational(n, shrink_coeff)
    c0 = compute_c0()

    def f(b):
        return gauss_area_rectangle(m, a, b, c0) - TWO_PI

    hi = a + 1.0
    while f(hi) < 0:
        hi = a + 2.0 * (hi - a)
    return brentq(f, a, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def rounded_rectangle(a, b, c, count, rho):
    """Boundary of ``[-c, c] x [a, b]`` with corners rounded to radius ``rho``.

    Sampled counter-clockwise at ``count`` points equally spaced in arc
    length, starting at the bottom midpoint ``(0, a)``.
    """
    if not (0 < rho < c and 2 * rho < b - a):
        raise InputError("rounding radius too large for the rectangle")
    q = 0.5 * math.pi * rho
    pieces = [c - rho, q, b - a - 2 * rho, q, 2 * (c - rho), q, b - a - 2 * rho, q, c - rho]
    cum = np.concatenate([[0.0], np.cumsum(pieces)])
    s = np.arange(count) * (cum[-1] / count)
    k = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, 8)
    w = s - cum[k]
    out = np.empty((count, 2))
    # straight pieces: (start point, direction); arcs: (centre, start angle)
    lines = {0: ((0, a), (1, 0)), 2: ((c, a + rho), (0, 1)), 4: ((c - rho, b), (-1, 0)),
             6: ((-c, b - rho), (0, -1)), 8: ((-c + rho, a), (1, 0))}
    arcs = {1: ((c - rho, a + rho), -0.5 * math.pi), 3: ((c - rho, b - rho), 0.0),
            5: ((-c + rho, b - rho), 0.5 * math.pi), 7: ((-c + rho, a + rho), math.pi)}
    for piece, (p0, d) in lines.items():
        sel = k == piece
        out[sel, 0] = p0[0] + d[0] * w[sel]
        out[sel, 1] = p0[1] + d[1] * w[sel]
    for piece, (cen, ang0) in arcs.items():
        sel = k == piece
        ang = ang0 + w[sel] / rho
        out[sel, 0] = cen[0] + rho * np.cos(ang)
        out[sel, 1] = cen[1] + rho * np.sin(ang)
    return out


@dataclass(frozen=True)
class DiscreteCurve:
    """Closed polygon in the ``(x, r)`` half-plane evolving under the flow."""

    vertices: np.ndarray
    time: float = 0.0
    n: int = 2
    steps: int = 0

    @property
    def metric(self) -> MetricSpec:
        return MetricSpec.rotational(self.n)

    def __len__(self):
        return len(self.vertices)


@dataclass(frozen=True)
class FlowMonitors:
    """Length, Gauss area and geodesic-curvature diagnostics of a curve.

    ``max_speed`` is the largest weighted normal speed ``|k_g| / K``;
    ``residual`` is the largest vertex value of ``|k_g|`` times the weighted
    dual edge length, which is the angle mismatch ``|theta_i - Fv_i|``.
    """

    length: float
    gauss_area: float
    max_speed: float
    residual: float


class _Disc:
    """Per-vertex discrete quantities of a closed polygon."""

    def __init__(self, m: MetricSpec, X):
        E = np.roll(X, -1, axis=0) - X
        self.l = np.hypot(E[:, 0], E[:, 1])
        Em = np.roll(E, 1, axis=0)
        self.lm = np.roll(self.l, 1)
        self.hbar = 0.5 * (self.l + self.lm)
        self.theta = turning_angles(X)
        F = edge_normal_flux(m, X)
        self.flux = F
        self.Fv = 0.5 * (F + np.roll(F, 1))
        # angle-bisector vertex normal (left of the direction of travel)
        nm = np.stack([-Em[:, 1], Em[:, 0]], axis=1) / self.lm[:, None]
        npl = np.stack([-E[:, 1], E[:, 0]], axis=1) / self.l[:, None]
        Nv = nm + npl
        self.normal = Nv / np.linalg.norm(Nv, axis=1)[:, None]
        self.defect = self.theta - self.Fv
        # inverse of K e^{2 phi}, the Euclidean/weighted speed conversion
        self.D = 1.0 / neg_laplacian(m, X)


def neg_laplacian(m: MetricSpec, X):
    r = X[:, 1]
    return -2.0 * m.alpha + (m.n - 1) / (r * r)


def vertex_speeds(m: MetricSpec, X):
    """Weighted normal speed ``k_g / K`` at each vertex (positive = outward-left)."""
    X = np.asarray(X, dtype=float)
    d = _Disc(m, X)
    euclid = d.D * d.defect / d.hbar
    return euclid * np.exp(log_density(m, X[:, 0], X[:, 1]))


def monitors(m: MetricSpec, X) -> FlowMonitors:
    X = np.asarray(X, dtype=float)
    d = _Disc(m, X)
    speed = np.abs(d.D * d.defect / d.hbar) * np.exp(log_density(m, X[:, 0], X[:, 1]))
    return FlowMonitors(
        length=weighted_length(m, X, closed=True),
        gauss_area=signed_gauss_area(m, X),
        max_speed=float(speed.max()),
        residual=float(np.max(np.abs(d.defect))),
    )


def symmetrize(X):
    """Average a polygon with its mirror image across ``x = 0``.

    Vertex ``i`` is paired with vertex ``-i``, so vertex 0 (and vertex
    ``N/2`` for even ``N``) stays on the symmetry line.
    """
    N = len(X)
    M = X[(-np.arange(N)) % N].copy()
    M[:, 0] *= -1.0
    return 0.5 * (X + M)


def _project_area(m: MetricSpec, X):
    # one normal shift that corrects the Gauss area to first order
    d = _Disc(m, X)
    A = signed_gauss_area(m, X)
    w = neg_laplacian(m, X)
    return X + ((A - TWO_PI) / np.sum(w * d.hbar)) * d.normal


def _normalize(m: MetricSpec, X):
    # redistribute, restore symmetry, restore Gauss area
    return _project_area(m, symmetrize(resample_closed(X)))


def _cyclic_tridiagonal(lower, diag, upper, rhs):
    # solves lower_i x_{i-1} + diag_i x_i + upper_i x_{i+1} = rhs_i with
    # periodic wrap, via Sherman-Morrison on a banded solve
    N = len(diag)
    g = -diag[0]
    b = diag.copy()
    b[0] -= g
    b[-1] -= upper[-1] * lower[0] / g
    ab = np.zeros((3, N))
    ab[0, 1:] = upper[:-1]
    ab[1] = b
    ab[2, :-1] = lower[1:]
    corr = np.zeros(N)
    corr[0] = g
    corr[-1] = upper[-1]
    Y = solve_banded((1, 1), ab, np.column_stack([rhs, corr]))
    y, q = Y[:, :-1], Y[:, -1]
    vy = y[0] + lower[0] / g * y[-1]
    vq = q[0] + lower[0] / g * q[-1]
    return y - np.outer(q, vy / (1.0 + vq))


def flow_step(m: MetricSpec, c: DiscreteCurve, dt, require_descent=True, old_length=None):
    """Advance a curve by one linearly implicit step of the flow.

    The curvature part is treated implicitly through the cyclic three-point
    Laplacian, the forcing explicitly; afterwards the vertices are
    redistributed to uniform arc length, mirrored to restore the ``x``
    symmetry, and shifted along the normals to restore Gauss area ``2 pi``.

    Raises
    ------
    StepRejected
        If the new polygon leaves ``r > 0``, self-intersects, or (with
        ``require_descent``) is longer than the old one.  ``old_length``
        may pass the already known length of ``c``.
    """
    X = c.vertices
    d = _Disc(m, X)
    vel = (d.D * d.defect / d.hbar)[:, None] * d.normal
    cp = dt * d.D / (d.hbar * d.l)
    cm = dt * d.D / (d.hbar * d.lm)
    Y = X + _cyclic_tridiagonal(-cm, 1.0 + cp + cm, -cp, dt * vel)
    if not np.all(np.isfinite(Y)) or Y[:, 1].min() <= 0:
        raise StepRejected("step left the half-plane")
    Y = _normalize(m, Y)
    if Y[:, 1].min() <= 0:
        raise StepRejected("step left the half-plane")
    if not is_simple(Y):
        raise StepRejected("step produced a self-intersection")
    new = DiscreteCurve(Y, c.time + dt, c.n, c.steps + 1)
    mon = monitors(m, Y)
    if old_length is None and require_descent:
        old_length = weighted_length(m, X, closed=True)
    if require_descent and mon.length > old_length:
        raise StepRejected("weighted length increased")
    return new, mon


def init_rectangle(n, a, N=DEFAULT_N) -> DiscreteCurve:
    """Rounded rectangle ``[-c0, c0] x [a, b]`` enclosing Gauss area ``2 pi``.

    Corners are rounded over two vertex spacings; ``b`` is then re-solved so
    that the rounded polygon itself has Gauss area ``2 pi``.
    """
    if N < 64:
        raise InputError("need N >= 64")
    m = MetricSpec.rotational(n)
    c0 = compute_c0()
    b = compute_phi(n, a)
    rho = 2.0 * (2.0 * (b - a) + 4.0 * c0) / N

    def f(bb):
        return signed_gauss_area(m, rounded_rectangle(a, bb, c0, N, rho)) - TWO_PI

    # rounding removes area near the corners, so the root lies above b
    lo = max(b, a + 2.0 * rho * (1 + 1e-9))
    hi = lo + 0.1 * (lo - a) + rho
    while f(hi) < 0:
        hi = lo + 2.0 * (hi - lo)
    if f(lo) > 0:
        raise InputError("rectangle too small for the requested resolution")
    b2 = brentq(f, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    return DiscreteCurve(rounded_rectangle(a, b2, c0, N, rho), 0.0, n, 0)


def _geodesic_defect(m, X):
    d = _Disc(m, X)
    return d.defect, d.normal


def polish_geodesic(m: MetricSpec, X, iters=20, tol=1e-13, eps=1e-7):
    """Newton iteration for the discrete geodesic equation ``theta = Fv``.

    Unknowns are normal offsets of the vertices; the Jacobian is formed by
    forward differences.  The polygon is re-symmetrized after every update.

    Returns
    -------
    (X, residual)

    Raises
    ------
    numpy.linalg.LinAlgError
        If the Jacobian is singular (the start is too far from a geodesic).
    """
    X = np.array(X, dtype=float)
    N = len(X)
    for _ in range(iters):
        r, Nv = _geodesic_defect(m, X)
        res = float(np.max(np.abs(r)))
        if res < tol or not np.isfinite(res):
            break
        J = np.empty((N, N))
        for j in range(N):
            Y = X.copy()
            Y[j] += eps * Nv[j]
            J[:, j] = (_geodesic_defect(m, Y)[0] - r) / eps
        X = symmetrize(X - np.linalg.solve(J, r)[:, None] * Nv)
        if X[:, 1].min() <= 0:
            raise np.linalg.LinAlgError("Newton update left the half-plane")
    return X, float(np.max(np.abs(_geodesic_defect(m, X)[0])))


def refine_geodesic(m: MetricSpec, X, count=None):
    """Resample a discrete geodesic to ``count`` vertices and re-solve.

    Two passes of :func:`polish_geodesic` with a uniform redistribution in
    between.
    """
    Y = resample_closed(X, count)
    Y, _ = polish_geodesic(m, Y)
    return polish_geodesic(m, resample_closed(Y))


class FlowStatus(enum.Enum):
    CONVERGED = "converged_to_geodesic"
    DRIFT_ABOVE = "drift_above"
    DRIFT_BELOW = "drift_below"
    BUDGET = "budget"


@dataclass(frozen=True)
class FlowControls:
    """Step, budget and stopping controls for :func:`evolve`.

    Attributes
    ----------
    N : int
        Vertex count.
    dt : float
        Initial and maximal time step.
    dt_min : float
        Rejections below this step raise :class:`FlowStalled`.
    t_max, max_steps : float, int
        Budget.
    tol_geodesic : float
        Residual below which the curve counts as a geodesic.
    polish_below : float
        Flow residual below which a Newton solve of the discrete geodesic
        equation is attempted; ``0`` disables it.
    max_offset : float
        Largest Hausdorff distance between a flow state and its Newton
        solution for the latter to be accepted.
    """

    N: int = DEFAULT_N
    dt: float = DEFAULT_DT
    dt_min: float = 1e-8
    t_max: float = 60.0
    max_steps: int = 200_000
    tol_geodesic: float = 1e-6
    polish_below: float = 1.5e-2
    max_offset: float = 0.1


@dataclass
class FlowRun:
    """Outcome of :func:`evolve`.

    ``history`` has columns ``(t, length, gauss_area, max_speed, residual)``,
    one row for the initial curve and one per accepted step.  ``polished``
    is set when the terminal curve came from the Newton solve rather than
    from the last flow step.
    """

    curve: DiscreteCurve
    monitors: FlowMonitors
    history: np.ndarray
    status: FlowStatus
    a: float
    rejected: int = 0
    polished: bool = False
    info: dict = field(default_factory=dict)


def crosses_cylinder_line(m: MetricSpec, X):
    """Number of sign changes of ``r - sqrt(2(n-1))`` around the polygon."""
    s = np.sign(X[:, 1] - m.cylinder_radius)
    return int(np.sum(s * np.roll(s, -1) < 0))


def _try_polish(m, X, ctl: FlowControls):
    try:
        Y, res = polish_geodesic(m, X)
        Y, res = polish_geodesic(m, resample_closed(Y))
    except np.linalg.LinAlgError:
        return None
    if not (res < ctl.tol_geodesic and Y[:, 1].min() > 0 and is_simple(Y)):
        return None
    if crosses_cylinder_line(m, Y) < 2:
        return None
    if hausdorff_distance(X, Y, True, True) > ctl.max_offset:
        return None
    return Y


def evolve(m: MetricSpec, a, controls: FlowControls | None = None) -> FlowRun:
    """Flow the rounded rectangle with bottom ``a`` until it settles.

    Stops when the residual drops below ``tol_geodesic`` (directly or after
    a successful Newton solve), when the whole curve lies strictly above or
    strictly below the cylinder line ``r = sqrt(2(n-1))``, or when the budget
    runs out.  Rejected steps halve ``dt``; twenty accepted steps in a row
    double it again, up to ``controls.dt``.

    Raises
    ------
    FlowStalled
        If ``dt`` falls below ``controls.dt_min``.
    """
    if m.kind != "rotational":
        raise InputError("the flow needs a rotational metric")
    ctl = controls or FlowControls()
    c = init_rectangle(m.n, a, ctl.N)
    c = replace(c, vertices=_normalize(m, c.vertices))
    mon = monitors(m, c.vertices)
    rows = [(c.time, mon.length, mon.gauss_area, mon.max_speed, mon.residual)]
    rc = m.cylinder_radius
    dt, streak, rejected = ctl.dt, 0, 0
    next_polish = ctl.polish_below
    status = FlowStatus.BUDGET
    polished = False
    while c.time < ctl.t_max and c.steps < ctl.max_steps:
        try:
            c, mon = flow_step(m, c, dt, old_length=mon.length)
        except StepRejected:
            rejected += 1
            dt *= 0.5
            streak = 0
            if dt < ctl.dt_min:
                raise FlowStalled(f"dt fell below {ctl.dt_min} at t = {c.time:.4g}")
            continue
        rows.append((c.time, mon.length, mon.gauss_area, mon.max_speed, mon.residual))
        streak += 1
        if streak >= 20 and dt < ctl.dt:
            dt, streak = min(ctl.dt, 2.0 * dt), 0
        if mon.residual < ctl.tol_geodesic:
            status = FlowStatus.CONVERGED
            break
        r = c.vertices[:, 1]
        if r.min() > rc:
            status = FlowStatus.DRIFT_ABOVE
            break
        if r.max() < rc:
            status = FlowStatus.DRIFT_BELOW
            break
        if mon.residual < next_polish:
            next_polish = 0.5 * mon.residual
            Y = _try_polish(m, c.vertices, ctl)
            if Y is not None:
                c = replace(c, vertices=Y)
                mon = monitors(m, Y)
                status, polished = FlowStatus.CONVERGED, True
                break
    hist = np.array(rows)
    return FlowRun(c, mon, hist, status, float(a), rejected, polished, {"dt_final": dt})


DEFAULT_BRACKETS = {2: (0.2, 0.4), 3: (0.5, 0.8)}


def find_pinned_parameter(n, bracket=None, controls: FlowControls | None = None, tol=1e-12) -> SearchResult:
    """Bisect on the rectangle bottom ``a`` until the flow stays pinned.

    Runs that drift below the cylinder line move ``a`` up, runs that drift
    above move it down; the first run that converges to a geodesic ends the
    search.

    Raises
    ------
    SearchFailure
        If both bracket ends drift the same way, or the bracket collapses
        without a converged run.
    """
    m = MetricSpec.rotational(n)
    lo, hi = bracket or DEFAULT_BRACKETS.get(n, (0.2, 1.0))
    ctl = controls or FlowControls()
    table = []

    def run(a):
        fr = evolve(m, a, ctl)
        table.append((a, fr.status.value, fr.curve.time, fr.monitors.residual))
        return fr

    ends = []
    for a in (lo, hi):
        fr = run(a)
        if fr.status is FlowStatus.CONVERGED:
            return _pinned_result(m, fr, (a, a), table)
        ends.append(fr.status)
    if ends != [FlowStatus.DRIFT_BELOW, FlowStatus.DRIFT_ABOVE]:
        raise SearchFailure(f"bracket ends classify as {ends[0].value}, {ends[1].value}", table)
    while hi - lo > tol:
        mid = lo + 0.5 * (hi - lo)
        fr = run(mid)
        if fr.status is FlowStatus.CONVERGED:
            return _pinned_result(m, fr, (lo, hi), table)
        if fr.status is FlowStatus.DRIFT_BELOW:
            lo = mid
        elif fr.status is FlowStatus.DRIFT_ABOVE:
            hi = mid
        else:
            raise SearchFailure(f"flow at a = {mid} ran out of budget", table)
    raise SearchFailure("bracket collapsed without a converged flow", table)


def _pinned_result(m, fr: FlowRun, bracket, table) -> SearchResult:
    X = fr.curve.vertices
    d = _Disc(m, X)
    res = {
        "geodesic_residual": fr.monitors.residual,
        "gauss_area_gap": abs(fr.monitors.gauss_area - TWO_PI),
        "total_geodesic_curvature": abs(float(np.sum(d.theta) - np.sum(d.flux))),
        "symmetry": float(np.max(np.abs(symmetrize(X) - X))),
    }
    convex = bool(np.all(d.theta > 0))
    info = {
        "length": fr.monitors.length,
        "n": m.n,
        "N": len(X),
        "time": fr.curve.time,
        "steps": fr.curve.steps,
        "polished": fr.polished,
        "rejected": fr.rejected,
        "cylinder_crossings": crosses_cylinder_line(m, X),
        "simple": is_simple(X),
        "convex": convex,
        "r_min": float(X[:, 1].min()),
        "r_max": float(X[:, 1].max()),
        "history": fr.history,
    }
    return SearchResult(fr.a, bracket, res, fr.curve, Classification.EMBEDDED_TORUS, X, info, table)
