"""Arc-length integration of weighted geodesics with event localisation.

A unit-speed geodesic of ``e^{2 phi}|dz|^2`` with tangent angle ``psi``
satisfies ``u' = cos psi``, ``v' = sin psi`` and ``psi' = d phi / dN`` with
``N = (-sin psi, cos psi)``.  Trajectories are integrated with DOP853 and kept
as dense output; events are found by a sign-change scan followed by Brent
refinement.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .errors import InputError, NotFoundError
from .geometry import MetricSpec, log_density_gradient

DEFAULT_RTOL = 1e-11
DEFAULT_ATOL = 1e-13
HANDOFF_RADIUS = 1e-3
EVENT_TOL = 1e-12
EVENT_NOISE = 1e-14
SCAN_POINTS = 10_000


@dataclass(frozen=True)
class ProfileState:
    """Phase point of a unit-speed profile curve."""

    u: float
    v: float
    psi: float
    s: float = 0.0

    def as_array(self):
        return np.array([self.u, self.v, self.psi])

    def mirrored(self):
        """Reflection across ``u = 0``."""
        return ProfileState(-self.u, self.v, math.pi - self.psi, self.s)

    def swapped(self):
        """Reflection across the diagonal ``u = v``."""
        return ProfileState(self.v, self.u, math.pi / 2 - self.psi, self.s)


class EventKind(enum.Enum):
    CROSSES_VERTICAL_AXIS = "crosses_vertical_axis"  # u = 0
    CROSSES_DIAGONAL = "crosses_diagonal"  # u = v
    TANGENT_HORIZONTAL = "tangent_horizontal"  # sin psi = 0
    TANGENT_VERTICAL = "tangent_vertical"  # cos psi = 0
    HITS_LINE = "hits_line"  # v = value (or u = value)
    HITS_FLOOR = "hits_floor"  # v = 0 (or u = 0), seen at the handoff radius
    REACHES_ANGLE = "reaches_angle"  # psi = value mod 2 pi


class Direction(enum.Enum):
    RISING = "rising"
    FALLING = "falling"
    ANY = "any"


@dataclass(frozen=True)
class EventSpec:
    """A scalar event function along a trajectory.

    Parameters
    ----------
    id : str
        Label used in event records.
    kind : EventKind
    direction : Direction
        Keep only sign changes from negative to positive (``RISING``), the
        opposite (``FALLING``), or both.
    value : float
        Level for ``HITS_LINE`` and target angle for ``REACHES_ANGLE``.
    axis : {'v', 'u'}
        Coordinate used by ``HITS_LINE`` and ``HITS_FLOOR``.
    """

    id: str
    kind: EventKind
    direction: Direction = Direction.ANY
    value: float = 0.0
    axis: str = "v"

    def evaluate(self, y, floor=0.0):
        u, v, psi = y[0], y[1], y[2]
        k = self.kind
        if k is EventKind.CROSSES_VERTICAL_AXIS:
            return u
        if k is EventKind.CROSSES_DIAGONAL:
            return u - v
        if k is EventKind.TANGENT_HORIZONTAL:
            return np.sin(psi)
        if k is EventKind.TANGENT_VERTICAL:
            return np.cos(psi)
        w = v if self.axis == "v" else u
        if k is EventKind.HITS_LINE:
            return w - self.value
        if k is EventKind.HITS_FLOOR:
            return w - floor
        if k is EventKind.REACHES_ANGLE:
            return np.sin(0.5 * (psi - self.value))
        raise InputError(f"unsupported event kind {k}")


@dataclass(frozen=True)
class EventRecord:
    id: str
    s: float
    state: ProfileState
    direction: Direction


class Terminal(enum.Enum):
    REACHED_MAX_ARC_LENGTH = "reached_max_arc_length"
    HIT_FLOOR = "hit_floor"
    LEFT_BOUNDING_BOX = "left_bounding_box"
    STEP_FAILURE = "step_failure"


@dataclass
class Trajectory:
    """Dense-output geodesic with localised events.

    Attributes
    ----------
    metric : MetricSpec
    solution : scipy OdeSolution
        Callable ``s -> (u, v, psi)`` on ``[0, s_end]``.
    s_end : float
        Arc length where integration stopped.
    events : list of EventRecord
        Sorted by arc length.
    terminal : Terminal
    floor_axis : str or None
        ``'v'`` or ``'u'`` when the run ended at a handoff radius.
    """

    metric: MetricSpec
    solution: object
    s_end: float
    events: list = field(default_factory=list)
    terminal: Terminal = Terminal.REACHED_MAX_ARC_LENGTH
    floor_axis: str | None = None
    handoff_radius: float = HANDOFF_RADIUS
    rtol: float = DEFAULT_RTOL
    atol: float = DEFAULT_ATOL

    def state(self, s) -> ProfileState:
        y = self.solution(float(s))
        return ProfileState(float(y[0]), float(y[1]), float(y[2]), float(s))

    @property
    def initial(self) -> ProfileState:
        return self.state(0.0)

    @property
    def final(self) -> ProfileState:
        return self.state(self.s_end)

    def sample(self, count=1001, s_from=0.0, s_to=None):
        """Return ``(s, Y)`` with ``Y`` of shape (3, count) on a uniform grid."""
        s_to = self.s_end if s_to is None else s_to
        s = np.linspace(s_from, s_to, int(count))
        return s, np.atleast_2d(self.solution(s))

    def points(self, count=1001, s_from=0.0, s_to=None):
        _, Y = self.sample(count, s_from, s_to)
        return Y[:2].T.copy()

    def events_with_id(self, event_id):
        return [e for e in self.events if e.id == event_id]

    def event(self, event_id, occurrence=1) -> EventRecord:
        """The ``occurrence``-th (1-based) record with the given id."""
        found = self.events_with_id(event_id)
        if occurrence < 1 or len(found) < occurrence:
            raise NotFoundError(f"event {event_id!r} occurrence {occurrence} not found")
        return found[occurrence - 1]

    def curvature(self, s):
        """Euclidean curvature ``psi'`` at arc length ``s``."""
        y = np.asarray(self.solution(s))
        return geodesic_rhs(self.metric, y)[2]


def geodesic_rhs(m: MetricSpec, y):
    """Right-hand side ``(cos psi, sin psi, d phi/dN)`` of the geodesic system."""
    u, v, psi = y[0], y[1], y[2]
    gu, gv = log_density_gradient(m, u, v)
    c, s = np.cos(psi), np.sin(psi)
    return np.array([c, s, -gu * s + gv * c])


def default_bbox(m: MetricSpec):
    """Square ``[-3R, 3R]^2`` intersected with the domain, ``R`` the sphere radius."""
    R = 3.0 * m.sphere_radius
    umin = 0.0 if m.needs_positive_u else -R
    vmin = 0.0 if m.needs_positive_v else -R
    return (umin, R, vmin, R)


def _check_initial(m: MetricSpec, initial: ProfileState, h0):
    vals = (initial.u, initial.v, initial.psi)
    if not all(np.isfinite(vals)):
        raise InputError("initial state must be finite")
    if m.needs_positive_v and initial.v < h0 * (1 - 1e-12):
        raise InputError("initial state below the handoff radius")
    if m.needs_positive_u and initial.u < h0 * (1 - 1e-12):
        raise InputError("initial state left of the handoff radius")


def integrate(
    m: MetricSpec,
    initial: ProfileState,
    events=(),
    s_max=10.0,
    bbox=None,
    rtol=DEFAULT_RTOL,
    atol=DEFAULT_ATOL,
    handoff_radius=HANDOFF_RADIUS,
    event_tol=EVENT_TOL,
    scan_points=SCAN_POINTS,
) -> Trajectory:
    """Integrate a unit-speed geodesic of ``m`` from ``initial``.

    Integration stops at ``s_max``, on leaving ``bbox`` (``(umin, umax,
    vmin, vmax)``), or when a singular axis is approached below
    ``handoff_radius``.  Every sign change of each event function is located
    to within ``event_tol`` in arc length.

    Returns
    -------
    Trajectory
    """
    if not s_max > 0:
        raise InputError("s_max must be positive")
    if initial.s != 0.0:
        initial = replace(initial, s=0.0)
    _check_initial(m, initial, handoff_radius)
    umin, umax, vmin, vmax = default_bbox(m) if bbox is None else bbox

    def rhs(s, y):
        return geodesic_rhs(m, y)

    stops = []
    labels = []

    def _stop(fn, label):
        fn.terminal = True
        fn.direction = -1
        stops.append(fn)
        labels.append(label)

    if m.needs_positive_v:
        _stop(lambda s, y: y[1] - handoff_radius, ("floor", "v"))
    if m.needs_positive_u:
        _stop(lambda s, y: y[0] - handoff_radius, ("floor", "u"))
    _stop(lambda s, y: y[0] - umin, ("box", None))
    _stop(lambda s, y: umax - y[0], ("box", None))
    _stop(lambda s, y: y[1] - vmin, ("box", None))
    _stop(lambda s, y: vmax - y[1], ("box", None))

    sol = solve_ivp(
        rhs,
        (0.0, float(s_max)),
        initial.as_array(),
        method="DOP853",
        rtol=rtol,
        atol=atol,
        dense_output=True,
        events=stops,
    )
    s_end = float(sol.t[-1])
    terminal = Terminal.REACHED_MAX_ARC_LENGTH
    floor_axis = None
    if sol.status == -1:
        terminal = Terminal.STEP_FAILURE
    elif sol.status == 1:
        for lab, te in zip(labels, sol.t_events):
            if te.size and abs(te[0] - s_end) <= 1e-12 * max(1.0, s_end):
                if lab[0] == "floor":
                    terminal, floor_axis = Terminal.HIT_FLOOR, lab[1]
                else:
                    terminal = Terminal.LEFT_BOUNDING_BOX
                break
    traj = Trajectory(
        metric=m,
        solution=sol.sol,
        s_end=s_end,
        terminal=terminal,
        floor_axis=floor_axis,
        handoff_radius=handoff_radius,
        rtol=rtol,
        atol=atol,
    )
    if sol.sol is None:
        # no step was taken; nothing to scan
        return traj
    traj.events = locate_events(traj, events, s_max, event_tol, scan_points)
    return traj


def locate_events(traj: Trajectory, events, s_max, event_tol=EVENT_TOL, scan_points=SCAN_POINTS):
    """Scan the dense output for sign changes and refine them with Brent's method."""
    if not events or traj.s_end <= 0:
        return []
    ds = float(s_max) / scan_points
    k = max(2, int(math.ceil(traj.s_end / ds)) + 1)
    grid = np.linspace(0.0, traj.s_end, k)
    Y = np.atleast_2d(traj.solution(grid))
    records = []
    for spec in events:
        g = np.asarray(spec.evaluate(Y, traj.handoff_radius), dtype=float)
        # sign flips of an identically vanishing function are round-off
        big = np.maximum(np.abs(g[:-1]), np.abs(g[1:])) > EVENT_NOISE
        idx = np.nonzero((g[:-1] * g[1:] < 0) & big)[0]
        for i in idx:
            rising = g[i] < 0
            if spec.direction is Direction.RISING and not rising:
                continue
            if spec.direction is Direction.FALLING and rising:
                continue

            def f(s, spec=spec):
                return float(spec.evaluate(traj.solution(s), traj.handoff_radius))

            s_ev = brentq(f, grid[i], grid[i + 1], xtol=event_tol, rtol=4 * np.finfo(float).eps)
            records.append(
                EventRecord(spec.id, float(s_ev), traj.state(s_ev), Direction.RISING if rising else Direction.FALLING)
            )
    records.sort(key=lambda e: e.s)
    return records


def crossing_angle(traj: Trajectory, event_id: str, occurrence: int = 1) -> float:
    """Tangent angle at the given event occurrence (1-based)."""
    return traj.event(event_id, occurrence).state.psi


# ---------------------------------------------------------------- axis starts


def axis_series(A, m, alpha, z0):
    """Even power series of a geodesic leaving a singular axis orthogonally.

    Near the axis ``w = 0`` the geodesic is the graph ``z = z(w)`` of

        z'' / (1 + z'^2) = A / z + alpha z - (m / w + alpha w) z'

    where ``m`` is the log coefficient attached to ``w`` and ``A`` the one
    attached to ``z``.  Returns ``(c2, c4)`` with
    ``z = z0 + c2 w^2 + c4 w^4 + O(w^6)``.
    """
    if A != 0 and z0 <= 0:
        raise InputError("axis series needs z0 > 0 when the other axis is singular")
    if z0 == 0:
        return 0.0, 0.0
    c2 = (A + alpha * z0 * z0) / (2.0 * z0 * (m + 1.0))
    c4 = (
        c2
        * (4 * A * c2 * z0 - A + 4 * alpha * c2 * z0**3 - alpha * z0 * z0 - 8 * c2 * c2 * m * z0 * z0)
        / (4.0 * z0 * z0 * (m + 3.0))
    )
    return c2, c4


def _series_params(metric: MetricSpec, axis):
    cu, cv = metric.log_coeffs
    # leaving the floor v = 0 the graph is u(v); leaving u = 0 it is v(u)
    return (cu, cv) if axis == "v" else (cv, cu)


def axis_start(metric: MetricSpec, z0, axis="v", h0=HANDOFF_RADIUS) -> ProfileState:
    """State at distance ``h0`` from a singular axis on the orthogonal geodesic through ``z0``.

    ``axis='v'`` starts from ``(z0, 0)`` moving up, ``axis='u'`` from
    ``(0, z0)`` moving right.
    """
    A, m = _series_params(metric, axis)
    c2, c4 = axis_series(A, m, metric.alpha, z0)
    z = z0 + c2 * h0**2 + c4 * h0**4
    dz = 2 * c2 * h0 + 4 * c4 * h0**3
    if axis == "v":
        return ProfileState(z, h0, math.atan2(1.0, dz))
    return ProfileState(h0, z, math.atan2(dz, 1.0))


def start_from_axis(metric: MetricSpec, t, h0=HANDOFF_RADIUS) -> ProfileState:
    """Regularised start of the profile leaving ``(t, 0)`` orthogonally.

    Uses ``x = f(r) = t - t r^2/(4n) + O(r^4)`` (for ``alpha = -1/2``)
    evaluated at ``r = h0``; the tangent is the normalised ``(f'(h0), 1)``.
    """
    if metric.kind != "rotational":
        raise InputError("start_from_axis needs a rotational metric")
    if not t > 0:
        raise InputError("t must be positive")
    return axis_start(metric, float(t), "v", h0)


def floor_defect(traj: Trajectory):
    """Orthogonality defect where a trajectory reached a singular axis.

    The final state sits at distance ``h0`` from the axis.  The defect is the
    angle between the computed tangent and the tangent of the orthogonal
    series solution through the same point, so an exact orthogonal hit gives
    zero rather than the ``O(h0)`` tilt of the raw angle.

    Returns
    -------
    (defect, z0)
        Angle defect in radians and the estimated axis intercept.
    """
    if traj.terminal is not Terminal.HIT_FLOOR:
        raise NotFoundError("trajectory did not reach a singular axis")
    st = traj.final
    axis = traj.floor_axis
    A, m = _series_params(traj.metric, axis)
    h0 = st.v if axis == "v" else st.u
    z_hit = st.u if axis == "v" else st.v
    z0 = z_hit
    for _ in range(6):
        c2, c4 = axis_series(A, m, traj.metric.alpha, z0)
        z0 = z_hit - c2 * h0**2 - c4 * h0**4
    c2, c4 = axis_series(A, m, traj.metric.alpha, z0)
    slope_series = 2 * c2 * h0 + 4 * c4 * h0**3
    c, s = math.cos(st.psi), math.sin(st.psi)
    # slope dz/dw of the computed curve, written as an angle to avoid 0/0
    if axis == "v":
        ang = math.atan2(c * math.copysign(1.0, s), abs(s))
    else:
        ang = math.atan2(s * math.copysign(1.0, c), abs(c))
    return abs(ang - math.atan(slope_series)), z0
