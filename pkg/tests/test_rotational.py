import math

import numpy as np
import pytest

from shrinker_lab import InputError
from shrinker_lab.geometry import MetricSpec, total_geodesic_curvature
from shrinker_lab.polyline import hausdorff_distance, is_simple, mirror_x
from shrinker_lab.rotational import (
    ShotSpec,
    _second_max_u,
    find_immersed_torus,
    find_second_immersed_sphere,
    find_t_small,
    shoot,
    signature,
    small_t_shape,
)
from shrinker_lab.search import Classification

from oracles import ccw, gauss_area_slices


def test_shot_spec_validation():
    with pytest.raises(InputError):
        ShotSpec("X", 1.0, 2)
    with pytest.raises(InputError):
        ShotSpec("S", 0.0, 2)
    with pytest.raises(InputError):
        ShotSpec("S", 1.0, 1)


def test_round_sphere_signature():
    rep = signature(shoot(ShotSpec("S", 2.0, 2)))
    assert rep.B is not None
    assert abs(rep.B.state.u) < 1e-9 and rep.B.state.v == pytest.approx(2.0, abs=1e-9)
    assert len(rep.crossings) == 1
    assert rep.C is None and rep.Q is None


def test_cylinder_signature_is_empty():
    traj = shoot(ShotSpec("T", math.sqrt(2), 2), s_max=10)
    rep = signature(traj)
    assert rep.B is None and rep.C is None and rep.Q is None
    assert not rep.convexity_ok
    # the cylinder is an unstable geodesic: round-off in the curvature grows
    # exponentially but stays far below any shape feature over this arc
    assert np.max(np.abs(traj.curvature(np.linspace(0, 10, 101)))) < 1e-9


def test_small_t_shape_and_height_bound():
    t = 0.05
    rep = signature(shoot(ShotSpec("S", t, 2)))
    assert rep.complete and rep.convexity_ok
    assert rep.crossings_before_B == 1 and rep.crossings_between_C_Q == 1
    assert small_t_shape(rep)
    assert rep.B.state.v >= math.sqrt(math.log(2 / (math.pi * t * t)))
    assert find_t_small(2) == 0.25


def test_immersed_sphere(immersed_sphere_n2):
    res, _ = immersed_sphere_n2
    assert res.classification is Classification.IMMERSED_SPHERE
    assert 0 < res.parameter < 2.0
    assert res.bracket[1] - res.bracket[0] < 1e-10
    assert res.info["crossing_before_B"] >= 1
    assert res.info["self_intersections"] > 0
    assert res.residuals["launch_orthogonality"] < 1e-6
    assert res.residuals["return_orthogonality"] < 1e-6
    assert res.info["return_intercept"] == pytest.approx(-res.parameter, abs=1e-6)


def test_second_immersed_sphere(immersed_sphere_n2):
    x_star = immersed_sphere_n2[0].parameter
    assert _second_max_u(0.005, 2) < 0 < _second_max_u(0.9 * x_star, 2)
    res = find_second_immersed_sphere(2, x_star)
    assert 0 < res.parameter < x_star
    assert res.residuals["u_at_second_max"] < 1e-6
    assert res.residuals["launch_orthogonality"] < 1e-6
    assert res.residuals["return_orthogonality"] < 1e-5


def test_embedded_torus(embedded_torus_n2):
    res, _ = embedded_torus_n2
    assert res.classification is Classification.EMBEDDED_TORUS
    lo, hi = res.info["intercepts"]
    assert 0 < lo < math.sqrt(2) < hi
    assert res.info["self_intersections"] == 0 and res.info["strictly_convex"]
    assert res.info["weighted_length"] < 4.0
    assert res.residuals["crossing_angle_defect"] < 1e-6
    C = res.curve
    assert is_simple(C)
    assert hausdorff_distance(C, mirror_x(C), True, True) < 1e-9
    m = MetricSpec.rotational(2)
    assert total_geodesic_curvature(m, ccw(C)) + gauss_area_slices(m, C) == pytest.approx(2 * math.pi, abs=1e-8)


def test_immersed_torus():
    assert _second_max_u(1.3, 2, family="T") < 0 < _second_max_u(0.8, 2, family="T")
    near = shoot(ShotSpec("T", 1.3, 2))
    assert len(near.events_with_id("cylinder")) >= 4
    res = find_immersed_torus(2)
    assert res.classification is Classification.IMMERSED_TORUS
    assert 0 < res.parameter < math.sqrt(2)
    assert res.info["self_intersections"] >= 2
    assert res.residuals["u_at_second_max"] < 1e-6
