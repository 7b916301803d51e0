"""Self-shrinking curves in the plane and their two conserved quantities.

A unit-speed planar curve with tangent angle ``theta`` shrinks self-similarly
when its curvature is ``kappa = alpha * nu`` with ``nu = -x sin theta +
y cos theta``.  This is the geodesic equation of the planar weighted metric,
so the general integrator is reused.  Along any solution both

    I1 = kappa * exp(alpha (x^2 + y^2) / 2)
    I2 = kappa^2 + alpha ln(kappa^2) + (d kappa / d theta)^2

are constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq

from .errors import InputError, SearchFailure
from .geometry import MetricSpec
from .ode import DEFAULT_ATOL, DEFAULT_RTOL, ProfileState, Trajectory, integrate
from .search import Classification, SearchResult, bisect_sign, sign_changes

THETA_FLOOR = 1e-12


@dataclass(frozen=True)
class PlanarState:
    """Position, tangent angle and arc length of a planar curve."""

    x: float
    y: float
    theta: float
    s: float = 0.0

    def to_profile(self) -> ProfileState:
        return ProfileState(self.x, self.y, self.theta, self.s)

    def nu(self):
        return -self.x * math.sin(self.theta) + self.y * math.cos(self.theta)

    def tau(self):
        return self.x * math.cos(self.theta) + self.y * math.sin(self.theta)


def _bbox(radius):
    return (-radius, radius, -radius, radius)


def integrate_planar(alpha, initial: PlanarState, s_max, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL, box=1e3):
    """Integrate ``x' = cos theta, y' = sin theta, theta' = alpha nu``.

    Parameters
    ----------
    alpha : float
        Negative shrink coefficient.
    box : float
        Half width of the square outside which integration stops.
    """
    if not alpha < 0:
        raise InputError("alpha must be negative")
    m = MetricSpec.planar(alpha)
    return integrate(m, initial.to_profile(), (), s_max=s_max, bbox=_bbox(box), rtol=rtol, atol=atol)


def invariants(alpha, Y):
    """Evaluate ``(kappa, I1, I2)`` on states ``Y`` of shape (3, k).

    ``d kappa/d theta`` is formed as ``kappa'(s) / theta'(s)`` from the
    structure equations ``nu' = -kappa tau`` and ``theta' = kappa``; samples
    with ``|theta'|`` below ``1e-12`` get ``I2 = nan``.
    """
    x, y, th = Y[0], Y[1], Y[2]
    nu = -x * np.sin(th) + y * np.cos(th)
    tau = x * np.cos(th) + y * np.sin(th)
    kappa = alpha * nu
    theta_dot = kappa
    kappa_dot = alpha * (-kappa * tau)
    ok = np.abs(theta_dot) >= THETA_FLOOR
    with np.errstate(divide="ignore", invalid="ignore"):
        dk_dth = np.where(ok, kappa_dot / np.where(ok, theta_dot, 1.0), np.nan)
        I2 = np.where(ok, kappa**2 + alpha * np.log(kappa**2) + dk_dth**2, np.nan)
    I1 = kappa * np.exp(alpha * (x * x + y * y) / 2)
    return kappa, I1, I2


class ConservationReport(NamedTuple):
    drift1: float
    drift2: float | None
    I1: float
    I2: float | None
    excluded: int


def conservation_report(traj: Trajectory, alpha, samples=20001) -> ConservationReport:
    """Maximum deviation of ``I1`` and ``I2`` from their initial values.

    ``drift2`` is ``None`` (not applicable) when the curvature vanishes at
    the start; samples where it vanishes are excluded and counted.
    """
    _, Y = traj.sample(samples)
    kappa, I1, I2 = invariants(alpha, Y)
    d1 = float(np.max(np.abs(I1 - I1[0])))
    good = np.isfinite(I2)
    if not good[0]:
        return ConservationReport(d1, None, float(I1[0]), None, int(np.sum(~good)))
    d2 = float(np.max(np.abs(I2[good] - I2[0])))
    return ConservationReport(d1, d2, float(I1[0]), float(I2[0]), int(np.sum(~good)))


def circle_radius(alpha):
    """Radius of the round shrinking circle: ``|alpha| R = 1/R``."""
    return 1.0 / math.sqrt(-alpha)


def _first_apse(traj: Trajectory):
    s, Y = traj.sample(max(2001, int(traj.s_end * 200)))
    tau = Y[0] * np.cos(Y[2]) + Y[1] * np.sin(Y[2])
    idx = np.nonzero(tau[1:-1] * tau[2:] < 0)[0]
    if idx.size == 0:
        return None
    i = idx[0] + 1

    def f(sv):
        y = traj.solution(sv)
        return y[0] * math.cos(y[2]) + y[1] * math.sin(y[2])

    return brentq(f, s[i], s[i + 1], xtol=1e-14, rtol=4 * np.finfo(float).eps)


def apsidal_advance(alpha, d, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL, s_max=60.0):
    """Polar angle swept between successive curvature minima.

    The start ``(d, 0)`` with ``theta = pi/2`` is an apse and the orbit is
    symmetric about every apse line, so the advance is twice the polar angle
    of the next apse.

    Returns
    -------
    (advance, period)
        Angle and arc length of one curvature period, or ``(None, None)``.
    """
    traj = integrate_planar(alpha, PlanarState(d, 0.0, math.pi / 2), s_max, rtol, atol)
    s1 = _first_apse(traj)
    if s1 is None:
        return None, None
    # unwrap the polar angle along the arc up to the apse
    s = np.linspace(0.0, s1, 4001)
    Y = traj.solution(s)
    ang = np.unwrap(np.arctan2(Y[1], Y[0]))
    return 2.0 * float(ang[-1]), 2.0 * s1


def find_closed_planar(alpha, p, q, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL, tol=1e-13, grid=40) -> SearchResult:
    """Closed self-shrinking curve with rotation index ``p`` and ``q`` petals.

    The curve closes when ``q`` curvature periods advance the polar angle by
    exactly ``2 pi p``.  The pericentre distance ``d`` of the start
    ``(d, 0)`` is found by bisection on the advance mismatch.  ``p = q = 1``
    returns the round circle.
    """
    if p < 1 or q < 1 or math.gcd(p, q) != 1:
        raise InputError("need coprime p, q >= 1")
    R = circle_radius(alpha)
    if p == 1 and q == 1:
        traj = integrate_planar(alpha, PlanarState(R, 0.0, math.pi / 2), 2 * math.pi * R, rtol, atol)
        gap = float(np.hypot(traj.final.u - R, traj.final.v))
        return SearchResult(
            R, (R, R), {"position_gap": gap, "angle_gap": abs(traj.final.psi - 2.5 * math.pi)}, traj,
            Classification.CLOSED_PLANAR, traj.points(2001), {"p": 1, "q": 1, "circle": True},
        )
    target = 2.0 * math.pi * p / q

    def f(d):
        adv, _ = apsidal_advance(alpha, d, rtol, atol)
        return None if adv is None else adv - target

    ds = np.linspace(0.02 * R, 0.995 * R, grid)
    vals = [f(d) for d in ds]
    table = list(zip(map(float, ds), vals))
    idx = sign_changes(ds, vals)
    if not idx:
        raise SearchFailure(f"advance never matches 2 pi {p}/{q} for d in (0, {R:.4f})", table)
    i = idx[0]
    lo, hi, f_lo, f_hi = bisect_sign(f, float(ds[i]), float(ds[i + 1]), tol, vals[i], vals[i + 1])
    d = lo if abs(f_lo) <= abs(f_hi) else hi
    _, period = apsidal_advance(alpha, d, rtol, atol)
    traj = integrate_planar(alpha, PlanarState(d, 0.0, math.pi / 2), q * period, rtol, atol)
    end = traj.final
    gap = float(np.hypot(end.u - d, end.v))
    angle_gap = abs(end.psi - math.pi / 2 - 2 * math.pi * p)
    res = {"position_gap": gap, "angle_gap": angle_gap, "advance_mismatch": abs(f(d))}
    info = {"p": p, "q": q, "pericentre": d, "period": period, "length": q * period}
    return SearchResult(d, (lo, hi), res, traj, Classification.CLOSED_PLANAR, traj.points(q * 800 + 1), info, table)


class DriftStudy(NamedTuple):
    """Worst conservation drifts over a batch of random trajectories.

    ``drift*`` are per-trajectory maxima at the base tolerances, ``tight*``
    the same trajectories at tolerances divided by ``factor``.
    """

    starts: list
    drift1: np.ndarray
    drift2: np.ndarray
    tight1: np.ndarray
    tight2: np.ndarray
    factor: float

    @property
    def ratio1(self) -> float:
        return float(self.drift1.max() / self.tight1.max())

    @property
    def ratio2(self) -> float:
        return float(self.drift2.max() / self.tight2.max())


def random_starts(count, seed, half_width=2.0, kappa_min=1e-3):
    """Uniform starts in ``[-w, w]^2 x [0, 2 pi)`` with curvature at least ``kappa_min``.

    Straight lines through the origin (``nu = 0``) carry no curvature, so
    draws too close to them are discarded and redrawn.
    """
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        x, y = rng.uniform(-half_width, half_width, 2)
        th = rng.uniform(0.0, 2.0 * math.pi)
        st = PlanarState(float(x), float(y), float(th))
        if abs(st.nu()) * 0.5 >= kappa_min:
            out.append(st)
    return out


def drift_study(alpha=-0.5, count=10, seed=12345, s_max=50.0, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL, factor=10.0):
    """Conservation drifts of random non-flat trajectories at two tolerance levels."""
    starts = random_starts(count, seed, kappa_min=1e-3 / (-2.0 * alpha))
    runs = {}
    for key, (r, a) in (("base", (rtol, atol)), ("tight", (rtol / factor, atol / factor))):
        d1, d2 = [], []
        for st in starts:
            rep = conservation_report(integrate_planar(alpha, st, s_max, r, a), alpha)
            d1.append(rep.drift1)
            d2.append(rep.drift2)
        runs[key] = (np.array(d1), np.array(d2))
    return DriftStudy(starts, *runs["base"], *runs["tight"], factor)
