"""Residual suite for the closed-form shrinker profiles.

Each case integrates a launch that should trace a known curve and reports
the largest positional deviation from it over the integrated arc (at most
arc length 10; arcs that reach a singular axis stop there).

Away from the origin nearby geodesics separate in the Euclidean sense
roughly like ``exp((u^2 + v^2)/4)``, so launches that run outward amplify
round-off far beyond any integrator tolerance.  The unbounded bi-rotational
profiles are therefore traced inward, ending near the origin.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .geometry import MetricSpec
from .ode import DEFAULT_ATOL, DEFAULT_RTOL, ProfileState, axis_start, integrate, start_from_axis

ARC = 10.0
WIDE = (0.0, 40.0, 0.0, 40.0)


class ExactCase(NamedTuple):
    name: str
    deviation: float
    arc_length: float


def _run(name, m, start, dist, s_max=ARC, bbox=None, rtol=DEFAULT_RTOL, atol=DEFAULT_ATOL, samples=4001):
    traj = integrate(m, start, (), s_max=s_max, bbox=bbox, rtol=rtol, atol=atol)
    _, Y = traj.sample(samples)
    return ExactCase(name, float(np.max(np.abs(dist(Y[0], Y[1])))), traj.s_end)


def rotational_cases(n, **kw):
    m = MetricSpec.rotational(n)
    R = math.sqrt(2.0 * n)
    rc = math.sqrt(2.0 * (n - 1))
    return [
        _run(f"sphere_n{n}", m, start_from_axis(m, R), lambda u, v: np.hypot(u, v) - R, **kw),
        _run(f"cylinder_n{n}", m, ProfileState(-5.0, rc, 0.0), lambda u, v: v - rc, bbox=(-20, 20, 0, 20), **kw),
    ]


def planar_cases(**kw):
    m = MetricSpec.planar(-0.5)
    R = math.sqrt(2.0)
    return [_run("planar_circle", m, ProfileState(R, 0.0, 0.5 * math.pi), lambda u, v: np.hypot(u, v) - R, **kw)]


def birotational_cases(M=1, **kw):
    m = MetricSpec.birotational(M)
    rc = math.sqrt(2.0 * M)
    R = math.sqrt(2.0 * (2 * M + 1))
    far = 0.5 + ARC / math.sqrt(2.0)
    return [
        _run("clifford_cone", m, ProfileState(far, far, 1.25 * math.pi), lambda u, v: (u - v) / math.sqrt(2), bbox=WIDE, **kw),
        _run(f"bi_cylinder_v_M{M}", m, ProfileState(0.5 + ARC, rc, math.pi), lambda u, v: v - rc, bbox=WIDE, **kw),
        _run(f"bi_cylinder_u_M{M}", m, ProfileState(rc, 0.5 + ARC, 1.5 * math.pi), lambda u, v: u - rc, bbox=WIDE, **kw),
        _run(f"bi_sphere_M{M}", m, axis_start(m, R, "v"), lambda u, v: np.hypot(u, v) - R, **kw),
    ]


def exact_suite(ns=(2, 3), M=1, **kw):
    """All exact-solution cases: rotational spheres and cylinders, the planar circle, bi-rotational cone, cylinders and sphere."""
    out = []
    for n in ns:
        out += rotational_cases(n, **kw)
    out += planar_cases(**kw)
    out += birotational_cases(M, **kw)
    return out
