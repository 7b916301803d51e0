"""Weighted half-plane and quadrant geometry.

Every metric handled here is conformally flat, ``g = e^{2 phi} |dz|^2``, with
log-density

    phi(u, v) = c_u ln u + c_v ln v + alpha (u^2 + v^2) / 2

where ``alpha`` is the shrink coefficient.  The rotational metric has
``(c_u, c_v) = (0, n - 1)``, the bi-rotational one ``(M1, M2)`` and the planar
one ``(0, 0)``.  Geodesics of ``g`` are the profile curves of self-shrinkers.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError, GeometryError, InputError

_KINDS = ("rotational", "birotational", "planar", "flat")


class Point(NamedTuple):
    """A point ``(u, v)``; read as ``(x, r)`` in the half-plane."""

    u: float
    v: float


@dataclass(frozen=True)
class MetricSpec:
    """Description of a weighted plane.

    Parameters
    ----------
    kind : {'rotational', 'birotational', 'planar', 'flat'}
        ``'flat'`` is the Euclidean metric (``phi = 0``), kept for identity
        checks.
    n : int, optional
        Hypersurface dimension for the rotational kind (``n >= 2``).
    M1, M2 : int, optional
        Sphere dimensions for the bi-rotational kind (both ``>= 1``).
    shrink_coeff : float
        Coefficient ``alpha < 0`` of the self-shrinker equation.
    """

    kind: str
    n: int | None = None
    M1: int | None = None
    M2: int | None = None
    shrink_coeff: float = -0.5

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise InputError(f"unknown metric kind {self.kind!r}")
        if not self.shrink_coeff < 0:
            raise InputError("shrink_coeff must be negative")
        if self.kind == "rotational":
            if self.n is None or int(self.n) != self.n or self.n < 2:
                raise InputError("rotational metric needs an integer n >= 2")
        if self.kind == "birotational":
            for name, val in (("M1", self.M1), ("M2", self.M2)):
                if val is None or int(val) != val or val < 1:
                    raise InputError(f"bi-rotational metric needs an integer {name} >= 1")

    @classmethod
    def rotational(cls, n, shrink_coeff=-0.5):
        return cls("rotational", n=n, shrink_coeff=shrink_coeff)

    @classmethod
    def birotational(cls, M1, M2=None, shrink_coeff=-0.5):
        return cls("birotational", M1=M1, M2=M1 if M2 is None else M2, shrink_coeff=shrink_coeff)

    @classmethod
    def planar(cls, shrink_coeff=-0.5):
        return cls("planar", shrink_coeff=shrink_coeff)

    @classmethod
    def flat(cls):
        return cls("flat")

    @property
    def alpha(self) -> float:
        """Quadratic coefficient of ``phi`` (zero for the flat metric)."""
        return 0.0 if self.kind == "flat" else float(self.shrink_coeff)

    @property
    def log_coeffs(self) -> tuple[float, float]:
        """Coefficients ``(c_u, c_v)`` of ``ln u`` and ``ln v`` in ``phi``."""
        if self.kind == "rotational":
            return 0.0, float(self.n - 1)
        if self.kind == "birotational":
            return float(self.M1), float(self.M2)
        return 0.0, 0.0

    @property
    def needs_positive_u(self) -> bool:
        return self.kind == "birotational"

    @property
    def needs_positive_v(self) -> bool:
        return self.kind in ("rotational", "birotational")

    @property
    def cylinder_radius(self) -> float:
        """Height of the horizontal geodesic ``v = const`` (rotational only)."""
        if self.kind != "rotational":
            raise InputError("cylinder radius is defined for rotational metrics")
        return float(np.sqrt((self.n - 1) / -self.alpha))

    @property
    def sphere_radius(self) -> float:
        """Radius of the geodesic circle centred at the origin."""
        cu, cv = self.log_coeffs
        if self.kind == "flat":
            raise InputError("the flat metric has no distinguished circle")
        # the circle |z| = R is a geodesic iff 1/R = -alpha R - (c_u + c_v)/R
        return float(np.sqrt((1.0 + cu + cv) / -self.alpha))


def _uv(p):
    arr = np.asarray(p, dtype=float)
    return arr[..., 0], arr[..., 1]


def check_domain(m: MetricSpec, u, v):
    """Raise :class:`DomainError` if any point lies outside the domain of ``m``."""
    if m.needs_positive_v and np.any(np.asarray(v) <= 0):
        raise DomainError(f"{m.kind} metric needs v > 0")
    if m.needs_positive_u and np.any(np.asarray(u) <= 0):
        raise DomainError(f"{m.kind} metric needs u > 0")


def log_density(m: MetricSpec, u, v):
    """Return ``phi(u, v)``; the conformal factor is ``exp(2 phi)``."""
    check_domain(m, u, v)
    cu, cv = m.log_coeffs
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    out = 0.5 * m.alpha * (u * u + v * v)
    if cu:
        out = out + cu * np.log(u)
    if cv:
        out = out + cv * np.log(v)
    return out


def log_density_gradient(m: MetricSpec, u, v):
    """Return ``(d phi/du, d phi/dv)`` without domain checks."""
    cu, cv = m.log_coeffs
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    gu = m.alpha * u + (cu / u if cu else 0.0)
    gv = m.alpha * v + (cv / v if cv else 0.0)
    return gu, gv


def neg_laplacian_log_density(m: MetricSpec, u, v):
    """Return ``-Laplacian(phi) = K exp(2 phi)``."""
    cu, cv = m.log_coeffs
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    out = -2.0 * m.alpha + 0.0 * u * v
    if cu:
        out = out + cu / (u * u)
    if cv:
        out = out + cv / (v * v)
    return out


def conformal_factor(m: MetricSpec, p):
    """Conformal factor ``e^{2 phi}`` multiplying the flat metric at ``p``.

    Examples
    --------
    >>> round(float(conformal_factor(MetricSpec.rotational(2), (0.0, 1.0))), 5)
    0.60653
    """
    u, v = _uv(p)
    return np.exp(2.0 * log_density(m, u, v))


def gauss_curvature(m: MetricSpec, p):
    """Gauss curvature ``K = -Laplacian(phi) e^{-2 phi}`` at ``p``.

    For the rotational metric this is ``(r^2 + n - 1) / r^{2n} e^{(x^2+r^2)/2}``
    when ``alpha = -1/2``.
    """
    u, v = _uv(p)
    phi = log_density(m, u, v)
    return neg_laplacian_log_density(m, u, v) * np.exp(-2.0 * phi)


def geodesic_curvature(m: MetricSpec, p, tangent_angle, euclidean_curvature):
    """Convert Euclidean curvature to geodesic curvature in the weighted metric.

    Uses ``k_g = e^{-phi} (k - d phi / dN)`` with ``N`` the left normal
    ``(-sin psi, cos psi)`` of the tangent direction ``psi``.
    """
    u, v = _uv(p)
    phi = log_density(m, u, v)
    gu, gv = log_density_gradient(m, u, v)
    dn = -gu * np.sin(tangent_angle) + gv * np.cos(tangent_angle)
    return np.exp(-phi) * (np.asarray(euclidean_curvature, dtype=float) - dn)


@functools.lru_cache(maxsize=8)
def _gauss_nodes(nodes):
    x, w = np.polynomial.legendre.leggauss(int(nodes))
    t, w = 0.5 * (x + 1.0), 0.5 * w
    t.flags.writeable = False
    w.flags.writeable = False
    return t, w


def _edge_samples(points, closed, nodes):
    P = np.asarray(points, dtype=float)
    Q = np.roll(P, -1, axis=0) if closed else P[1:]
    P = P if closed else P[:-1]
    E = Q - P
    t, w = _gauss_nodes(nodes)
    S = P[:, None, :] + t[None, :, None] * E[:, None, :]
    return E, S, w


def weighted_length(m: MetricSpec, curve, nodes=8, closed=False):
    """Length of a polygonal curve in the metric ``e^{2 phi}|dz|^2``.

    Each segment is integrated with ``nodes``-point Gauss-Legendre quadrature
    of the weight ``e^{phi}``.

    Parameters
    ----------
    curve : array_like, shape (k, 2)
    closed : bool
        Include the segment from the last point back to the first.
    """
    P = np.asarray(curve, dtype=float)
    if P.ndim != 2 or P.shape[0] < 2 or P.shape[1] != 2:
        raise InputError("weighted_length needs at least 2 points of shape (k, 2)")
    check_domain(m, P[:, 0], P[:, 1])
    E, S, w = _edge_samples(P, closed, nodes)
    seg = np.hypot(E[:, 0], E[:, 1])
    dens = np.exp(log_density(m, S[..., 0], S[..., 1]))
    return float(np.sum((dens @ w) * seg))


def gauss_area_rectangle(m: MetricSpec, a, b, c):
    """Integral of ``K dA`` over ``[a, b] x [-c, c]`` in closed form.

    Since ``K e^{2 phi} = -2 alpha + (n - 1)/r^2`` the result is
    ``2c[-2 alpha (b - a) + (n - 1)(1/a - 1/b)]``.
    """
    if m.kind != "rotational":
        raise InputError("gauss_area_rectangle needs a rotational metric")
    if a <= 0 or a > b:
        raise InputError("need 0 < a <= b")
    if c < 0:
        raise InputError("need c >= 0")
    return 2.0 * c * (-2.0 * m.alpha * (b - a) + (m.n - 1) * (1.0 / a - 1.0 / b))


def _area_potential(m: MetricSpec, u, v):
    # antiderivative in u of -Laplacian(phi), for Green's theorem
    cu, cv = m.log_coeffs
    out = -2.0 * m.alpha * u
    if cv:
        out = out + cv * u / (v * v)
    if cu:
        out = out - cu / u
    return out


def signed_gauss_area(m: MetricSpec, polygon, nodes=8):
    """Signed Gauss area enclosed by a closed polygon (positive if CCW)."""
    E, S, w = _edge_samples(polygon, True, nodes)
    F = _area_potential(m, S[..., 0], S[..., 1])
    return float(np.sum((F @ w) * E[:, 1]))


def gauss_area_region(m: MetricSpec, boundary, nodes=8, check_simple=True):
    """Integral of ``K dA`` over the region bounded by a simple closed polygon.

    Computed with Green's theorem as the flat integral of ``-Laplacian(phi)``
    and per-edge Gauss quadrature.  The result does not depend on the
    orientation of ``boundary``.
    """
    P = np.asarray(boundary, dtype=float)
    if P.ndim != 2 or P.shape[0] < 3:
        raise InputError("boundary needs at least 3 vertices")
    check_domain(m, P[:, 0], P[:, 1])
    if check_simple:
        from .polyline import is_simple

        if not is_simple(P, closed=True):
            raise GeometryError("boundary is self-intersecting")
    return abs(signed_gauss_area(m, P, nodes))


def edge_normal_flux(m: MetricSpec, polygon, nodes=8):
    """Per-edge integral of ``grad phi . N`` with ``N`` the left unit normal."""
    E, S, w = _edge_samples(polygon, True, nodes)
    gu, gv = log_density_gradient(m, S[..., 0], S[..., 1])
    return (gu @ w) * (-E[:, 1]) + (gv @ w) * E[:, 0]


def turning_angles(polygon):
    """Signed exterior angle at each vertex of a closed polygon."""
    P = np.asarray(polygon, dtype=float)
    E = np.roll(P, -1, axis=0) - P
    Em = np.roll(E, 1, axis=0)
    return np.arctan2(Em[:, 0] * E[:, 1] - Em[:, 1] * E[:, 0], np.sum(Em * E, axis=1))


def total_geodesic_curvature(m: MetricSpec, polygon, nodes=8):
    """Total geodesic curvature of a closed polygon in the weighted metric.

    Straight edges carry curvature only at vertices, so the total equals the
    sum of turning angles minus the flux of ``grad phi`` through the curve.
    For a simple CCW polygon, Gauss-Bonnet gives ``2 pi - gauss area``.
    """
    return float(np.sum(turning_angles(polygon)) - np.sum(edge_normal_flux(m, polygon, nodes)))
