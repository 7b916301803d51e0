"""Shooting searches for rotationally symmetric closed shrinkers.

Two launch families are used.  ``S[t]`` leaves the x-axis orthogonally at
``(t, 0)`` and ``T[t]`` leaves the r-axis horizontally at ``(0, t)``.  A
closed profile is certified by an orthogonal arrival on the r-axis: the
reflection across that axis then continues the curve smoothly.

Orientation: ``S[t]`` starts upward and turns toward the r-axis, so its
tangent angle increases (``psi' > 0``) along the convex arcs studied here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import partial

import numpy as np

from .errors import InputError, NotFoundError, SearchFailure
from .geometry import MetricSpec, weighted_length
from .ode import (
    Direction,
    EventKind,
    EventSpec,
    ProfileState,
    Terminal,
    Trajectory,
    floor_defect,
    integrate,
    start_from_axis,
    DEFAULT_ATOL,
    DEFAULT_RTOL,
)
from .polyline import close_by_reflection, count_self_intersections
from .search import (
    Classification,
    SearchResult,
    bisect_predicate,
    bisect_sign,
    sign_changes,
    sweep,
)

PARAM_TOL = 1e-10
S_MAX = 60.0


@dataclass(frozen=True)
class ShotSpec:
    """Launch data: family ``'S'`` (axis start) or ``'T'`` (r-axis start)."""

    family: str
    t: float
    n: int

    def __post_init__(self):
        if self.family not in ("S", "T"):
            raise InputError("family must be 'S' or 'T'")
        if not self.t > 0:
            raise InputError("t must be positive")
        if int(self.n) != self.n or self.n < 2:
            raise InputError("n must be an integer >= 2")

    @property
    def metric(self):
        return MetricSpec.rotational(self.n)

    def initial_state(self) -> ProfileState:
        if self.family == "S":
            return start_from_axis(self.metric, self.t)
        return ProfileState(0.0, float(self.t), 0.0)


def standard_events(n):
    """Axis crossings, tangent events and cylinder-line crossings."""
    return [
        EventSpec("axis", EventKind.CROSSES_VERTICAL_AXIS),
        EventSpec("max", EventKind.TANGENT_HORIZONTAL, Direction.FALLING),
        EventSpec("min", EventKind.TANGENT_HORIZONTAL, Direction.RISING),
        EventSpec("vertical", EventKind.TANGENT_VERTICAL),
        EventSpec("cylinder", EventKind.HITS_LINE, value=math.sqrt(2.0 * (n - 1))),
    ]


def shoot(spec: ShotSpec, s_max=S_MAX, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL) -> Trajectory:
    """Integrate the launch ``spec`` with the standard event set."""
    return integrate(spec.metric, spec.initial_state(), standard_events(spec.n), s_max=s_max, rtol=rtol, atol=atol)


@dataclass
class SignatureReport:
    """Shape features of an ``S[t]`` trajectory.

    ``B`` is the first local maximum of r, ``C`` the next vertical tangent and
    ``Q`` the following local minimum of r.  ``crossings`` lists the arc
    lengths of all r-axis crossings.
    """

    B: object
    C: object
    Q: object
    convexity_ok: bool
    crossings: list
    crossings_before_B: int
    crossings_between_C_Q: int

    @property
    def complete(self):
        return self.B is not None and self.C is not None and self.Q is not None


def _first_after(traj, event_id, s0):
    for e in traj.events:
        if e.id == event_id and e.s > s0:
            return e
    return None


def signature(traj: Trajectory) -> SignatureReport:
    """Extract ``B``, ``C``, ``Q`` and the convexity of the arc up to ``Q``."""
    B = _first_after(traj, "max", 0.0)
    C = _first_after(traj, "vertical", B.s) if B is not None else None
    Q = _first_after(traj, "min", C.s) if C is not None else None
    s_stop = Q.s if Q is not None else traj.s_end
    s = np.linspace(0.0, s_stop, 1001)[1:]
    extra = [e.s for e in traj.events if 0 < e.s <= s_stop]
    kappa = traj.curvature(np.concatenate([s, extra]))
    convex = bool(np.all(kappa > 0) or np.all(kappa < 0))
    crossings = [e.s for e in traj.events_with_id("axis")]
    before_B = sum(1 for c in crossings if B is not None and c < B.s)
    between = sum(1 for c in crossings if C is not None and Q is not None and C.s < c < Q.s)
    return SignatureReport(B, C, Q, convex, crossings, before_B, between)


def small_t_shape(rep: SignatureReport) -> bool:
    """The shape of ``S[t]`` for small ``t``: convex arc through B, C, Q on the launch side."""
    return (
        rep.complete
        and rep.convexity_ok
        and rep.Q.state.u > 0
        and rep.crossings_before_B >= 1
        and rep.crossings_between_C_Q >= 1
    )


def _q_side(t, n, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL):
    rep = signature(shoot(ShotSpec("S", t, n), rtol=rtol, atol=atol))
    return small_t_shape(rep)


def find_t_small(n, predicate=None):
    """Largest ``t`` in ``{2^-1, ..., 2^-20}`` whose ``S[t]`` has the small-t shape."""
    predicate = predicate or (lambda t: _q_side(t, n))
    for k in range(1, 21):
        t = 2.0**-k
        if predicate(t):
            return t
    raise SearchFailure("no dyadic t in [2^-20, 1/2] has the small-t shape")


def _closure_residuals(traj: Trajectory, s_close):
    st = traj.state(s_close)
    return {
        "position_gap": 2.0 * abs(st.u),
        "angle_gap": abs(math.sin(st.psi)),
    }


def _continue_to_floor(spec: ShotSpec, rtol, atol):
    traj = integrate(spec.metric, spec.initial_state(), (), s_max=3 * S_MAX, rtol=rtol, atol=atol)
    if traj.terminal is not Terminal.HIT_FLOOR:
        return None, traj
    return floor_defect(traj)[0], traj


def _sphere_result(n, spec, s_close, bracket, rtol, atol, classification, sweep_table, info):
    traj = shoot(spec, rtol=rtol, atol=atol)
    res = _closure_residuals(traj, s_close)
    defect, full = _continue_to_floor(spec, rtol, atol)
    if defect is None:
        raise SearchFailure("reflected branch never returned to the x-axis", sweep_table)
    res["return_orthogonality"] = defect
    # the launch is orthogonal by construction; re-derive it by integrating
    # the half profile backward from the closing point to the x-axis
    st = traj.state(s_close)
    back = integrate(spec.metric, ProfileState(st.u, st.v, st.psi + math.pi), (), s_max=1.5 * s_close + 1.0,
                     rtol=rtol, atol=atol)
    if back.terminal is not Terminal.HIT_FLOOR:
        raise SearchFailure("backward branch never returned to the x-axis", sweep_table)
    res["launch_orthogonality"], z0 = floor_defect(back)
    res["launch_intercept_gap"] = abs(z0 - spec.t)
    half = traj.points(4001, 0.0, s_close)
    # start the polygon on the axis itself
    half = np.vstack([[spec.t, 0.0], half])
    curve = np.vstack([half, (half * [-1, 1])[::-1][1:]])
    m = spec.metric
    info = dict(info)
    info.update(
        return_intercept=float(full.final.u),
        self_intersections=count_self_intersections(curve, closed=False),
        weighted_length=weighted_length(m, curve[1:-1]),
    )
    return SearchResult(spec.t, bracket, res, traj, classification, curve, info, sweep_table)


def find_immersed_sphere(n, tol=PARAM_TOL, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL, grid=40) -> SearchResult:
    """Shoot ``S[t]`` for the first ``t`` where ``Q_t`` reaches the r-axis.

    The predicate "``S[t]`` has the small-t shape with ``Q_t`` strictly on the
    launch side" holds for small ``t`` and fails near the round sphere
    ``t = sqrt(2n)``.  The bracket is refined by bisection to ``tol``.
    """
    pred = partial(_q_side, n=n, rtol=rtol, atol=atol)
    t_lo = find_t_small(n, pred)
    ts = np.linspace(t_lo, math.sqrt(2 * n), grid + 1)[1:-1]
    table = [(float(t), bool(pred(t))) for t in ts]
    lo = t_lo
    hi = None
    for t, ok in table:
        if ok:
            lo = t
        else:
            hi = t
            break
    if hi is None:
        raise SearchFailure("predicate never fails below sqrt(2n)", table)
    lo, hi = bisect_predicate(pred, lo, hi, tol)
    traj = shoot(ShotSpec("S", lo, n), rtol=rtol, atol=atol)
    rep = signature(traj)
    Q = rep.Q
    s_close = Q.s
    # the orthogonal crossing near Q is where u = 0
    axis_hits = [e for e in traj.events_with_id("axis") if abs(e.s - Q.s) < 1e-3]
    if axis_hits:
        s_close = axis_hits[0].s
    res = _sphere_result(
        n,
        ShotSpec("S", lo, n),
        s_close,
        (lo, hi),
        rtol,
        atol,
        Classification.IMMERSED_SPHERE,
        table,
        {"t_small": t_lo, "u_at_Q": float(Q.state.u), "crossing_before_B": rep.crossings_before_B},
    )
    res.residuals["u_at_Q"] = abs(float(Q.state.u))
    return res


def _second_max_u(t, n, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL, family="S"):
    traj = shoot(ShotSpec(family, t, n), rtol=rtol, atol=atol)
    maxima = [e for e in traj.events_with_id("max") if e.s > 0]
    if len(maxima) < 2:
        return None
    return float(maxima[1].state.u)


def _second_max_record(traj):
    maxima = [e for e in traj.events_with_id("max") if e.s > 0]
    return maxima[1]


def find_second_immersed_sphere(n, x_star, tol=PARAM_TOL, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL, grid=24):
    """Shoot ``S[t]``, ``t < x_star``, until the second local maximum of r lies on the r-axis."""
    f = partial(_second_max_u, n=n, rtol=rtol, atol=atol)
    t_small = find_t_small(n)
    # log-spaced sweep: the sign change sits close to the axis end of the range
    ts = np.geomspace(min(t_small, 2.0**-12), x_star * (1 - 1e-6), grid)
    vals = sweep(f, ts)
    table = list(zip(map(float, ts), vals))
    idx = sign_changes(ts, vals)
    if not idx:
        raise SearchFailure("second local maximum never changes side", table)
    i = idx[0]
    lo, hi, _, _ = bisect_sign(f, float(ts[i]), float(ts[i + 1]), tol, vals[i], vals[i + 1])
    t = lo if abs(f(lo)) <= abs(f(hi)) else hi
    spec = ShotSpec("S", t, n)
    traj = shoot(spec, rtol=rtol, atol=atol)
    second = _second_max_record(traj)
    res = _sphere_result(
        n, spec, second.s, (lo, hi), rtol, atol, Classification.IMMERSED_SPHERE, table, {"u_at_second_max": second.state.u}
    )
    res.residuals["u_at_second_max"] = abs(second.state.u)
    return res


def _first_return_angle(t, n, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL):
    traj = shoot(ShotSpec("T", t, n), rtol=rtol, atol=atol)
    hits = [e for e in traj.events_with_id("axis") if e.s > 0]
    if not hits:
        return None
    return float(hits[0].state.psi - math.pi)


def _torus_result(spec, s_close, bracket, table, classification, rtol, atol, info):
    traj = shoot(spec, rtol=rtol, atol=atol)
    half = traj.points(5001, 0.0, s_close)
    half[0, 0] = 0.0
    half[-1, 0] = 0.0
    curve = close_by_reflection(half, "u")
    res = _closure_residuals(traj, s_close)
    m = spec.metric
    _, Y = traj.sample(2001, 0.0, s_close)
    kappa = traj.curvature(np.linspace(0.0, s_close, 2001))
    info = dict(info)
    info.update(
        intercepts=(float(spec.t), float(traj.state(s_close).v)),
        weighted_length=weighted_length(m, curve, closed=True),
        self_intersections=count_self_intersections(curve, closed=True),
        strictly_convex=bool(np.all(kappa > 0) or np.all(kappa < 0)),
    )
    return SearchResult(spec.t, bracket, res, traj, classification, curve, info, table)


def find_embedded_torus(n, tol=PARAM_TOL, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL, grid=32):
    """Continuation in ``t`` for ``T[t]`` on the crossing angle at the first return to the r-axis.

    A zero of ``psi - pi`` at that return gives an orthogonal crossing, and
    the reflected curve is a simple closed convex geodesic.
    """
    f = partial(_first_return_angle, n=n, rtol=rtol, atol=atol)
    rc = math.sqrt(2.0 * (n - 1))
    ts = np.linspace(0.02 * rc, 0.98 * rc, grid)
    vals = sweep(f, ts)
    table = list(zip(map(float, ts), vals))
    idx = sign_changes(ts, vals, max_jump=1.0)
    if not idx:
        raise SearchFailure("crossing angle never passes through pi", table)
    i = idx[0]
    lo, hi, f_lo, f_hi = bisect_sign(f, float(ts[i]), float(ts[i + 1]), tol, vals[i], vals[i + 1])
    t = lo if abs(f_lo) <= abs(f_hi) else hi
    spec = ShotSpec("T", t, n)
    traj = shoot(spec, rtol=rtol, atol=atol)
    hit = [e for e in traj.events_with_id("axis") if e.s > 0][0]
    res = _torus_result(spec, hit.s, (lo, hi), table, Classification.EMBEDDED_TORUS, rtol, atol, {})
    res.residuals["crossing_angle_defect"] = abs(hit.state.psi - math.pi)
    return res


def find_immersed_torus(n, tol=PARAM_TOL, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL, grid=32):
    """Continuation for ``T[t]``, ``t`` decreasing from the cylinder height.

    The functional is the abscissa of the second local maximum of r; where it
    vanishes that maximum sits on the r-axis with a horizontal tangent, and
    reflection closes the profile into a figure-eight-like curve.
    """
    f = partial(_second_max_u, n=n, rtol=rtol, atol=atol, family="T")
    rc = math.sqrt(2.0 * (n - 1))
    ts = np.linspace(0.98 * rc, 0.3 * rc, grid)
    vals = sweep(f, ts)
    table = list(zip(map(float, ts), vals))
    idx = sign_changes(ts, vals)
    if not idx:
        raise SearchFailure("second local maximum never changes side", table)
    i = idx[0]
    a, b = float(ts[i + 1]), float(ts[i])
    lo, hi, f_lo, f_hi = bisect_sign(f, a, b, tol, vals[i + 1], vals[i])
    t = lo if abs(f_lo) <= abs(f_hi) else hi
    spec = ShotSpec("T", t, n)
    traj = shoot(spec, rtol=rtol, atol=atol)
    second = _second_max_record(traj)
    res = _torus_result(spec, second.s, (lo, hi), table, Classification.IMMERSED_TORUS, rtol, atol, {})
    res.residuals["u_at_second_max"] = abs(second.state.u)
    return res


def crossing_functional_samples(result: SearchResult, functional, samples=16):
    """Evaluate a search functional at interior points of a converged bracket."""
    lo, hi = result.bracket
    ts = lo + (hi - lo) * (np.arange(1, samples + 1) / (samples + 1))
    return ts, [functional(t) for t in ts]
