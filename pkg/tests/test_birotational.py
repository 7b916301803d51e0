import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from shrinker_lab import InputError, SearchFailure
from shrinker_lab.birotational import (
    BiShotSpec,
    BiTarget,
    Launch,
    _crossing_defect,
    classify_bi_profile,
    diagonal_defect,
    find_symmetric_closed,
    shoot_bi,
)
from shrinker_lab.polyline import hausdorff_distance, is_simple
from shrinker_lab.search import Classification


def test_spec_validation():
    with pytest.raises(InputError):
        BiShotSpec(0)
    with pytest.raises(InputError):
        BiShotSpec(1, t=-1.0)
    with pytest.raises(InputError):
        BiShotSpec(1, launch=Launch.CUSTOM)
    with pytest.raises(InputError):
        BiShotSpec(1, launch=Launch.CUSTOM, point=(0.0, 1.0), angle=0.0)
    with pytest.raises(InputError):
        find_symmetric_closed(1, BiTarget.EMBEDDED_T3, index=0)


@given(st.floats(-20, 20))
def test_diagonal_defect_range_and_period(psi):
    d = diagonal_defect(psi)
    assert -math.pi / 2 <= d < math.pi / 2
    assert diagonal_defect(psi + math.pi) == pytest.approx(d, abs=1e-9) or abs(abs(d) - math.pi / 2) < 1e-9


def test_exact_launches():
    traj, _ = shoot_bi(BiShotSpec(1, 1.0, Launch.DIAGONAL_TANGENT), s_max=3)
    _, Y = traj.sample(3001)
    assert np.max(np.abs(Y[0] - Y[1])) < 1e-10
    traj, _ = shoot_bi(BiShotSpec(1, launch=Launch.CUSTOM, point=(1.0, math.sqrt(2)), angle=0.0), s_max=3)
    _, Y = traj.sample(1001)
    assert np.max(np.abs(Y[1] - math.sqrt(2))) < 1e-10


def test_round_sphere_is_embedded_s3():
    traj, sig = shoot_bi(BiShotSpec(1, math.sqrt(3)))
    _, Y = traj.sample(2001)
    assert np.max(np.abs(np.hypot(Y[0], Y[1]) - math.sqrt(6))) < 1e-8
    assert sig.axis_hits and sig.axis_hits[0][3] < 1e-6
    rep = classify_bi_profile(traj)
    assert rep.topology == "S3"
    assert rep.classification is Classification.EMBEDDED_S3
    assert rep.self_intersections == 0
    assert rep.symmetry_defect < 1e-6


def test_launch_past_sqrt6_signature():
    # first-crossing defects on either side of the outer diagonal point of
    # the embedded loop have opposite signs; beyond sqrt(6) the launch first
    # comes back to the diagonal well inside its starting point
    t = math.sqrt(6) + 0.05
    _, sig = shoot_bi(BiShotSpec(1, t))
    s, (u, v), d = sig.diagonal_crossings[0]
    assert u < t and abs(d) > 1e-3
    _, sig2 = shoot_bi(BiShotSpec(1, 2.0))
    assert np.sign(sig2.diagonal_crossings[0][2]) != np.sign(d)


def test_embedded_t3(bi_targets):
    res = bi_targets[0][BiTarget.EMBEDDED_T3]
    assert res.classification is Classification.EMBEDDED_T3
    assert res.info["topology"] == "T3" and res.info["self_intersections"] == 0
    assert is_simple(res.curve)
    assert res.residuals["diagonal_defect"] < 1e-6
    assert res.residuals["launch_orthogonality"] < 1e-6
    assert res.info["symmetry_defect"] < 1e-9
    C = res.curve
    assert hausdorff_distance(C, C[:, ::-1], True, True) < 1e-9
    assert C.min() > 0
    # the bracket ends show the two behaviours
    lo, hi = res.bracket
    f = [_crossing_defect(t, 1, Launch.DIAGONAL_ORTHOGONAL, 1, 1e-11, 1e-13) for t in (lo, hi)]
    assert f[0] * f[1] <= 0


def test_immersed_t3(bi_targets):
    res = bi_targets[0][BiTarget.IMMERSED_T3]
    assert res.classification is Classification.IMMERSED_T3
    assert res.info["self_intersections"] >= 1
    assert res.residuals["diagonal_defect"] < 1e-6
    assert all(k >= 1 for _, k in res.info["candidates"])
    assert len(res.info["candidates"]) >= 3


def test_immersed_s3(bi_targets):
    res = bi_targets[0][BiTarget.IMMERSED_S3]
    assert res.classification is Classification.IMMERSED_S3
    assert res.info["topology"] == "S3"
    assert res.info["self_intersections"] >= 1
    assert res.residuals["axis_orthogonality"] < 1e-6
    assert res.residuals["diagonal_defect"] < 1e-6
    C = res.curve
    # the two ends sit on the two axes, mirror images of each other
    assert C[0, 0] == 0.0 and C[-1, 1] == 0.0
    assert C[0, 1] == pytest.approx(C[-1, 0], abs=1e-12)
    assert res.info["symmetry_defect"] < 1e-9


def test_missing_index_raises(bi_targets):
    n = len(bi_targets[0][BiTarget.IMMERSED_S3].info["candidates"])
    with pytest.raises(SearchFailure) as exc:
        find_symmetric_closed(1, BiTarget.IMMERSED_S3, index=n + 1)
    assert exc.value.sweep
