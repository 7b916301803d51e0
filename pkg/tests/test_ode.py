import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shrinker_lab import InputError, MetricSpec, NotFoundError
from shrinker_lab.ode import (
    Direction,
    EventKind,
    EventSpec,
    ProfileState,
    Terminal,
    axis_series,
    floor_defect,
    geodesic_rhs,
    integrate,
    start_from_axis,
)

ROT2 = MetricSpec.rotational(2)
BI1 = MetricSpec.birotational(1)
AXIS = [EventSpec("axis", EventKind.CROSSES_VERTICAL_AXIS)]


def test_sphere_from_axis_traces_circle_and_returns_orthogonally():
    # the angle error grows like tol / v^2 toward the singular axis, so the
    # defect measured at the handoff radius is looser for larger n
    for n, bound in ((2, 1e-8), (3, 5e-6)):
        m = MetricSpec.rotational(n)
        R = math.sqrt(2 * n)
        traj = integrate(m, start_from_axis(m, R), AXIS, s_max=10)
        _, Y = traj.sample(4001)
        assert np.max(np.abs(np.hypot(Y[0], Y[1]) - R)) < 1e-8
        assert traj.terminal is Terminal.HIT_FLOOR
        defect, z0 = floor_defect(traj)
        assert defect < bound
        assert z0 == pytest.approx(-R, abs=1e-8)
        # circle centred at the origin crosses the r-axis orthogonally
        assert abs(traj.event("axis").state.psi - math.pi) < 1e-8


def test_cylinder_line_and_missing_event():
    rc = math.sqrt(2)
    traj = integrate(ROT2, ProfileState(1.0, rc, 0.0), AXIS, s_max=5)
    _, Y = traj.sample(501)
    assert np.max(np.abs(Y[1] - rc)) < 1e-12
    assert np.max(np.abs(Y[2])) < 1e-12
    with pytest.raises(NotFoundError):
        traj.event("axis")


def test_clifford_cone_stays_on_diagonal():
    traj = integrate(BI1, ProfileState(1.0, 1.0, math.pi / 4), (), s_max=3)
    _, Y = traj.sample(3001)
    assert np.max(np.abs(Y[0] - Y[1])) / math.sqrt(2) < 1e-10


def test_axis_series_start():
    st0 = start_from_axis(ROT2, 2.0, h0=1e-3)
    # x = t - t r^2 / (4 n) + O(r^4)
    assert st0.v == 1e-3
    assert st0.u == pytest.approx(1.99999975, abs=1e-12)
    c2, _ = axis_series(0.0, 1.0, -0.5, 2.0)
    assert c2 == pytest.approx(-2.0 / 8.0)
    for n in (2, 3, 7):
        t = 1.3
        c2, _ = axis_series(0.0, n - 1.0, -0.5, t)
        assert 2 * c2 == pytest.approx(-t / (2 * n))
    with pytest.raises(InputError):
        start_from_axis(ROT2, -1.0)


def test_axis_series_residual_is_small():
    # substitute the truncated series into the graph equation
    A, m, alpha, z0 = 1.0, 1.0, -0.5, 1.7
    c2, c4 = axis_series(A, m, alpha, z0)
    for w in (1e-2, 2e-2):
        z = z0 + c2 * w**2 + c4 * w**4
        dz = 2 * c2 * w + 4 * c4 * w**3
        d2z = 2 * c2 + 12 * c4 * w**2
        lhs = d2z / (1 + dz * dz)
        rhs = A / z + alpha * z - (m / w + alpha * w) * dz
        assert abs(lhs - rhs) < 50 * w**4


def test_event_localisation_and_direction():
    ev = [
        EventSpec("up", EventKind.HITS_LINE, Direction.RISING, value=2.0),
        EventSpec("down", EventKind.HITS_LINE, Direction.FALLING, value=2.0),
    ]
    m = MetricSpec.rotational(3)
    traj = integrate(m, start_from_axis(m, math.sqrt(6)), ev, s_max=10)
    ups, downs = traj.events_with_id("up"), traj.events_with_id("down")
    assert len(ups) == 1 and len(downs) == 1 and ups[0].s < downs[0].s
    for e in ups + downs:
        assert abs(traj.state(e.s).v - 2.0) < 1e-11


def test_bad_inputs():
    with pytest.raises(InputError):
        integrate(ROT2, ProfileState(0.0, 1.0, 0.0), (), s_max=0.0)
    with pytest.raises(InputError):
        integrate(ROT2, ProfileState(0.0, 1e-6, 0.0), (), s_max=1.0)
    with pytest.raises(InputError):
        integrate(ROT2, ProfileState(0.0, math.nan, 0.0), (), s_max=1.0)


@settings(max_examples=100, deadline=None)
@given(st.floats(-3, 3), st.floats(0.1, 3), st.floats(0, 2 * np.pi))
def test_vector_field_equivariance(u, v, psi):
    y = np.array([u, v, psi])
    a = geodesic_rhs(ROT2, y)
    b = geodesic_rhs(ROT2, np.array([-u, v, np.pi - psi]))
    assert np.allclose([-b[0], b[1], -b[2]], a, rtol=0, atol=1e-13 * (1 + np.abs(a).max()))
    w = np.array([abs(u) + 0.1, v, psi])
    a = geodesic_rhs(BI1, w)
    b = geodesic_rhs(BI1, np.array([w[1], w[0], np.pi / 2 - psi]))
    assert np.allclose([b[1], b[0], -b[2]], a, rtol=0, atol=1e-13 * (1 + np.abs(a).max()))


# Two separate runs each carry their own global error, and the step-size
# control is not symmetric under the maps, so trajectories are compared at
# tolerances tight enough for that error to sit well below 1e-10.
TIGHT = dict(rtol=1e-13, atol=1e-15)


@settings(max_examples=15, deadline=None)
@given(st.floats(-1.5, 1.5), st.floats(0.5, 2.5), st.floats(0, 2 * np.pi))
def test_reflection_equivariance(u, v, psi):
    a = integrate(ROT2, ProfileState(u, v, psi), (), s_max=4, **TIGHT)
    b = integrate(ROT2, ProfileState(u, v, psi).mirrored(), (), s_max=4, **TIGHT)
    s_end = min(a.s_end, b.s_end)
    s = np.linspace(0, s_end, 201)
    Ya, Yb = a.solution(s), b.solution(s)
    assert np.max(np.abs(Ya[0] + Yb[0])) < 1e-10
    assert np.max(np.abs(Ya[1] - Yb[1])) < 1e-10


@settings(max_examples=15, deadline=None)
@given(st.floats(0.4, 2.5), st.floats(0.4, 2.5), st.floats(0, 2 * np.pi))
def test_diagonal_equivariance(u, v, psi):
    a = integrate(BI1, ProfileState(u, v, psi), (), s_max=4, **TIGHT)
    b = integrate(BI1, ProfileState(u, v, psi).swapped(), (), s_max=4, **TIGHT)
    s_end = min(a.s_end, b.s_end)
    s = np.linspace(0, s_end, 201)
    Ya, Yb = a.solution(s), b.solution(s)
    assert np.max(np.abs(Ya[0] - Yb[1])) < 1e-10
    assert np.max(np.abs(Ya[1] - Yb[0])) < 1e-10
