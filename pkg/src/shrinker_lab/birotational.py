"""Shooting searches for bi-rotational shrinkers in the quadrant.

Profiles live in ``{u > 0, v > 0}`` with log-density
``M1 ln u + M2 ln v + alpha (u^2 + v^2)/2``.  For ``M1 = M2`` the geodesic
equation is symmetric under the swap ``(u, v) -> (v, u)``, so an arc that
meets the diagonal orthogonally at both ends closes up after reflection
(a torus-type profile), and an arc from the diagonal that meets a
coordinate axis orthogonally extends to an axis-to-axis profile (a
sphere-type profile).

Launch ``T[t]``: start at ``(t, t)`` heading up-left, orthogonal to the
diagonal, tangent angle ``3 pi / 4``.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from .errors import InputError, SearchFailure
from .geometry import MetricSpec, weighted_length
from .ode import (
    DEFAULT_ATOL,
    DEFAULT_RTOL,
    Direction,
    EventKind,
    EventSpec,
    ProfileState,
    Terminal,
    Trajectory,
    _series_params,
    axis_series,
    axis_start,
    floor_defect,
    integrate,
)
from .polyline import close_by_reflection, count_self_intersections, hausdorff_distance
from .search import Classification, SearchResult, bisect_sign, sign_changes, sweep

LAUNCH_ANGLE = 0.75 * math.pi
PARAM_TOL = 1e-12
S_MAX = 40.0
SWEEP = (0.2, 4.0, 200)
CLOSURE_TOL = 1e-6


class Launch(enum.Enum):
    DIAGONAL_ORTHOGONAL = "diagonal_orthogonal"
    DIAGONAL_TANGENT = "diagonal_tangent"
    AXIS_ORTHOGONAL = "axis_orthogonal"
    CUSTOM = "custom"


@dataclass(frozen=True)
class BiShotSpec:
    """Launch data for the symmetric bi-rotational system.

    ``DIAGONAL_ORTHOGONAL`` starts at ``(t, t)`` with angle ``3 pi/4``,
    ``DIAGONAL_TANGENT`` at ``(t, t)`` along the diagonal,
    ``AXIS_ORTHOGONAL`` leaves ``(0, t)`` orthogonally to the axis ``u = 0``
    (regularised by the axis series), and ``CUSTOM`` starts at ``point``
    with tangent angle ``angle`` (``t`` is then ignored).
    """

    M: int
    t: float = 1.0
    launch: Launch = Launch.DIAGONAL_ORTHOGONAL
    point: tuple | None = None
    angle: float | None = None
    M2: int | None = None

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 1:
            raise InputError("M must be an integer >= 1")
        if self.launch is Launch.CUSTOM:
            if self.point is None or self.angle is None:
                raise InputError("custom launch needs point and angle")
            if min(self.point) <= 0:
                raise InputError("launch point must lie in the open quadrant")
        elif not self.t > 0:
            raise InputError("t must be positive")

    @property
    def metric(self) -> MetricSpec:
        return MetricSpec.birotational(self.M, self.M2)

    def initial_state(self) -> ProfileState:
        if self.launch is Launch.CUSTOM:
            return ProfileState(float(self.point[0]), float(self.point[1]), float(self.angle))
        if self.launch is Launch.AXIS_ORTHOGONAL:
            return axis_start(self.metric, float(self.t), "u")
        ang = LAUNCH_ANGLE if self.launch is Launch.DIAGONAL_ORTHOGONAL else 0.25 * math.pi
        return ProfileState(float(self.t), float(self.t), ang)


def bi_events():
    return [
        EventSpec("diag", EventKind.CROSSES_DIAGONAL),
        EventSpec("horizontal", EventKind.TANGENT_HORIZONTAL),
        EventSpec("vertical", EventKind.TANGENT_VERTICAL),
    ]


def diagonal_defect(psi):
    """Signed angle between a tangent and the diagonal's normal, in ``[-pi/2, pi/2)``."""
    return (psi - LAUNCH_ANGLE + 0.5 * math.pi) % math.pi - 0.5 * math.pi


@dataclass
class BiSignature:
    """Diagonal crossings, axis hits and best loop closure of a trajectory.

    Attributes
    ----------
    diagonal_crossings : list of (s, (u, v), defect)
        ``defect`` is :func:`diagonal_defect` of the crossing angle.
    axis_hits : list of (axis, s, (u, v), defect)
        Arrival at a coordinate axis with the series-corrected
        orthogonality defect; ``axis`` is ``'u'`` for ``u = 0``.
    loop_closure : (position_gap, angle_gap) or None
        Closest return to the launch state after leaving its neighbourhood.
    """

    diagonal_crossings: list
    axis_hits: list
    loop_closure: tuple | None = None


def _loop_closure(traj: Trajectory):
    s, Y = traj.sample(4001)
    p0 = traj.initial
    d = np.hypot(Y[0] - p0.u, Y[1] - p0.v)
    away = np.nonzero(d > 0.1)[0]
    if away.size == 0:
        return None
    i0 = away[0]
    if i0 >= len(s) - 1:
        return None
    j = i0 + int(np.argmin(d[i0:]))
    ang = (Y[2, j] - p0.psi + math.pi) % (2 * math.pi) - math.pi
    return float(d[j]), float(abs(ang))


def signature(traj: Trajectory) -> BiSignature:
    diag = [(e.s, (e.state.u, e.state.v), diagonal_defect(e.state.psi)) for e in traj.events_with_id("diag") if e.s > 0]
    hits = []
    if traj.terminal is Terminal.HIT_FLOOR:
        defect, _ = floor_defect(traj)
        st = traj.final
        hits.append((traj.floor_axis, traj.s_end, (st.u, st.v), defect))
    return BiSignature(diag, hits, _loop_closure(traj))


def shoot_bi(spec: BiShotSpec, s_max=S_MAX, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL):
    """Integrate a bi-rotational launch and summarise it.

    Returns
    -------
    (Trajectory, BiSignature)
    """
    traj = integrate(spec.metric, spec.initial_state(), bi_events(), s_max=s_max, rtol=rtol, atol=atol)
    return traj, signature(traj)


# ------------------------------------------------------------------ closure


class BiTarget(enum.Enum):
    EMBEDDED_T3 = "embedded_t3"
    IMMERSED_T3 = "immersed_t3"
    IMMERSED_S3 = "immersed_s3"


@dataclass
class BiProfileReport:
    """Closure type and shape numbers of a bi-rotational profile.

    ``topology`` is ``'T3'`` for a loop in the open quadrant, ``'S3'`` for
    an arc between the two axes and ``None`` when the trajectory does not
    close.
    """

    topology: str | None
    classification: Classification
    self_intersections: int
    symmetry_defect: float
    closing_s: float | None
    curve: np.ndarray | None = None
    residuals: dict = field(default_factory=dict)


def _snap_diagonal(p):
    w = 0.5 * (p[0] + p[1])
    return np.array([w, w])


def _t3_curve(traj: Trajectory, s_close, count=4001):
    arc = traj.points(count, 0.0, s_close)
    # both ends lie on the diagonal to event accuracy
    arc[0] = _snap_diagonal(arc[0])
    arc[-1] = _snap_diagonal(arc[-1])
    return close_by_reflection(arc, "diagonal")


def _axis_to_axis(arc):
    # arc runs from the axis u = 0 to the diagonal; append its mirror image
    mirrored = arc[::-1, ::-1]
    return np.vstack([arc, mirrored[1:]])


def _symmetry_defect(curve, closed):
    return hausdorff_distance(curve, curve[:, ::-1], closed, closed)


def _launched_from_axis(traj: Trajectory):
    return abs(traj.initial.u - traj.handoff_radius) <= 1e-12


def _first_orthogonal_crossing(sig: BiSignature, tol):
    for s, _, d in sig.diagonal_crossings:
        if abs(d) < tol:
            return s, d
    return None


def classify_bi_profile(traj: Trajectory, tol=CLOSURE_TOL) -> BiProfileReport:
    """Closure type of a symmetric bi-rotational launch.

    * launched orthogonally from the axis ``u = 0``: the first orthogonal
      diagonal crossing closes an axis-to-axis arc (``'S3'``);
    * launched orthogonally from the diagonal: an orthogonal axis arrival
      gives ``'S3'``, otherwise the first orthogonal diagonal crossing
      closes a loop (``'T3'``).

    Anything else is unclassified.
    """
    sig = signature(traj)
    launch = abs(diagonal_defect(traj.initial.psi))
    if _launched_from_axis(traj):
        hit = _first_orthogonal_crossing(sig, tol)
        if hit is None:
            return BiProfileReport(None, Classification.UNCLASSIFIED, 0, math.nan, None)
        s_close, d = hit
        z0 = _axis_intercept(traj)
        arc = np.vstack([[0.0, z0], traj.points(4001, 0.0, s_close)])
        arc[-1] = _snap_diagonal(arc[-1])
        curve = _axis_to_axis(arc)
        res = {
            "diagonal_defect": abs(d),
            "axis_orthogonality": _reverse_axis_defect(traj, s_close),
            "position_gap": abs(traj.state(s_close).u - traj.state(s_close).v),
        }
    elif sig.axis_hits and sig.axis_hits[0][3] < tol:
        s_close = traj.s_end
        arc = traj.points(4001)[::-1]
        curve = _axis_to_axis(arc)
        res = {"axis_orthogonality": sig.axis_hits[0][3], "launch_orthogonality": launch}
    else:
        hit = _first_orthogonal_crossing(sig, tol)
        if hit is None:
            return BiProfileReport(None, Classification.UNCLASSIFIED, 0, math.nan, None)
        s_close, d = hit
        curve = _t3_curve(traj, s_close)
        k = count_self_intersections(curve, closed=True)
        cls = Classification.IMMERSED_T3 if k > 0 else Classification.EMBEDDED_T3
        st = traj.state(s_close)
        res = {"diagonal_defect": abs(d), "launch_orthogonality": launch, "position_gap": abs(st.u - st.v)}
        return BiProfileReport("T3", cls, k, _symmetry_defect(curve, True), s_close, curve, res)
    k = count_self_intersections(curve, closed=False)
    cls = Classification.IMMERSED_S3 if k > 0 else Classification.EMBEDDED_S3
    return BiProfileReport("S3", cls, k, _symmetry_defect(curve, False), s_close, curve, res)


def _reverse_axis_defect(traj: Trajectory, s_close):
    # re-integrate backward from the closing point; the launch is orthogonal
    # by construction, so this measures it independently of the series start
    st = traj.state(s_close)
    back = integrate(traj.metric, ProfileState(st.u, st.v, st.psi + math.pi), (), s_max=1.5 * s_close + 1.0,
                     rtol=traj.rtol, atol=traj.atol)
    if back.terminal is not Terminal.HIT_FLOOR or back.floor_axis != "u":
        return math.inf
    return floor_defect(back)[0]


def _axis_intercept(traj: Trajectory):
    # axis height whose series start reproduces the initial state
    st = traj.initial
    A, m = _series_params(traj.metric, "u")
    z = st.v
    for _ in range(6):
        c2, c4 = axis_series(A, m, traj.metric.alpha, z)
        z = st.v - c2 * st.u**2 - c4 * st.u**4
    return z


# ------------------------------------------------------------------ searches


def _features(t, M, launch, kmax, rtol, atol):
    traj, sig = shoot_bi(BiShotSpec(M, t, launch), rtol=rtol, atol=atol)
    d = [float(x[2]) for x in sig.diagonal_crossings[:kmax]]
    return tuple(d + [None] * (kmax - len(d)))


@functools.lru_cache(maxsize=16)
def _feature_sweep(M, launch, lo, hi, count, kmax, rtol, atol):
    ts = np.linspace(lo, hi, count)
    vals = sweep(partial(_features, M=M, launch=launch, kmax=kmax, rtol=rtol, atol=atol), ts)
    return ts, vals


def _crossing_defect(t, M, launch, k, rtol, atol):
    return _features(t, M, launch, k, rtol, atol)[k - 1]


def discover(M=1, launch=Launch.DIAGONAL_ORTHOGONAL, crossings=(1, 2, 3), rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL,
             sweep_range=SWEEP, tol=PARAM_TOL):
    """Collect the closed symmetric profiles visible in a parameter sweep.

    For each crossing index ``k`` the signed defect at the ``k``-th diagonal
    crossing is sampled on ``sweep_range = (lo, hi, count)``; every sign
    change away from the angle wrap is bisected and the closed profile is
    assembled and classified.  With ``DIAGONAL_ORTHOGONAL`` launches the
    parameter is the launch height ``t`` and the profiles are loops; with
    ``AXIS_ORTHOGONAL`` it is the axis intercept and the profiles run from
    axis to axis.  A loop is found from both of its diagonal points, so
    profiles closer than ``1e-6`` in Hausdorff distance are merged.

    Returns
    -------
    (profiles, table)
        ``profiles`` is a list of :class:`SearchResult`; ``table`` lists
        ``(parameter, defect_1, ..., defect_kmax)`` rows.
    """
    kmax = max(crossings)
    lo, hi, count = sweep_range
    ts, vals = _feature_sweep(M, launch, float(lo), float(hi), int(count), kmax, rtol, atol)
    table = [(float(t),) + tuple(v) for t, v in zip(ts, vals)]
    found = []
    for k in crossings:
        col = [v[k - 1] for v in vals]
        fn = partial(_crossing_defect, M=M, launch=launch, k=k, rtol=rtol, atol=atol)
        for i in sign_changes(ts, col, max_jump=1.0):
            try:
                a, b, fa, fb = bisect_sign(fn, float(ts[i]), float(ts[i + 1]), tol, col[i], col[i + 1])
            except SearchFailure:
                continue
            t = a if abs(fa) <= abs(fb) else b
            res = _closed_result(M, t, (a, b), launch, k, rtol, atol)
            if res is None:
                continue
            closed = res.info["topology"] == "T3"
            if any(
                r.classification is res.classification
                and hausdorff_distance(r.curve, res.curve, closed, closed) < 1e-6
                for r in found
            ):
                continue
            found.append(res)
    return found, table


def _closed_result(M, t, bracket, launch, k, rtol, atol):
    traj, sig = shoot_bi(BiShotSpec(M, t, launch), rtol=rtol, atol=atol)
    rep = classify_bi_profile(traj)
    if rep.topology is None:
        return None
    m = traj.metric
    info = {
        "launch": launch.value,
        "crossing_index": k,
        "self_intersections": rep.self_intersections,
        "symmetry_defect": rep.symmetry_defect,
        "topology": rep.topology,
        "weighted_length": weighted_length(m, rep.curve[1:-1] if rep.topology == "S3" else rep.curve, closed=rep.topology == "T3"),
    }
    return SearchResult(float(t), bracket, rep.residuals, traj, rep.classification, rep.curve, info)


AXIS_SWEEP = (0.05, 4.0, 200)


def find_symmetric_closed(M, target: BiTarget, index=1, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL, sweep_range=None):
    """Closed symmetric profile of the requested type.

    Loops (three-torus targets) come from diagonal launches ``T[t]``,
    ``t`` in ``[0.2, 4]``; axis-to-axis arcs (three-sphere targets) from
    axis launches with intercept in ``[0.05, 4]``.  Candidates of the target
    class are ordered by self-intersection count, then by parameter, and
    ``index`` (1-based) picks one.  The embedded three-torus ignores
    ``index``.

    Raises
    ------
    SearchFailure
        With the sweep table attached, when fewer than ``index`` candidates
        exist.
    """
    if M != int(M) or M < 1:
        raise InputError("M must be an integer >= 1")
    if index < 1:
        raise InputError("index must be >= 1")
    if target is BiTarget.IMMERSED_S3:
        launch, crossings, want = Launch.AXIS_ORTHOGONAL, (1, 2, 3), Classification.IMMERSED_S3
        sweep_range = sweep_range or AXIS_SWEEP
    elif target is BiTarget.IMMERSED_T3:
        launch, crossings, want = Launch.DIAGONAL_ORTHOGONAL, (1, 2, 3), Classification.IMMERSED_T3
    else:
        launch, crossings, want = Launch.DIAGONAL_ORTHOGONAL, (1,), Classification.EMBEDDED_T3
        index = 1
    sweep_range = sweep_range or SWEEP
    found, table = discover(M, launch, crossings, rtol, atol, sweep_range)
    cands = sorted((r for r in found if r.classification is want), key=lambda r: (r.info["self_intersections"], r.parameter))
    if len(cands) < index:
        raise SearchFailure(f"only {len(cands)} {want.value} profiles found in the sweep", table)
    res = cands[index - 1]
    res.sweep = table
    res.info["index"] = index
    res.info["candidates"] = [(r.parameter, r.info["self_intersections"]) for r in cands]
    return res
