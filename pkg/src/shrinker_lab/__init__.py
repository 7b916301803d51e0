"""Numerical toolkit for closed self-shrinkers of mean curvature flow.

Profile curves of rotationally and bi-rotationally symmetric shrinkers are
geodesics of conformally flat metrics on the half-plane and the quadrant.
The package integrates those geodesics, shoots for closed ones, runs a
length-decreasing curve flow that converges to a closed geodesic, and checks
the conserved quantities of planar shrinking curves.
"""

from .errors import (
    DomainError,
    FlowStalled,
    GeometryError,
    InputError,
    NotFoundError,
    SearchFailure,
    ShrinkerLabError,
    StepRejected,
)
from .geometry import MetricSpec, Point

__all__ = [
    "DomainError",
    "FlowStalled",
    "GeometryError",
    "InputError",
    "MetricSpec",
    "NotFoundError",
    "Point",
    "SearchFailure",
    "ShrinkerLabError",
    "StepRejected",
]

__version__ = "0.1.0"
