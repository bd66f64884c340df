"""Model geometry of the Poincaré disk.

Points of the disk are complex numbers ``z`` with ``|z| < 1``; ideal points are
angles on the unit circle.  Users who prefer the upper half-plane can convert
through the fixed Cayley transform ``z = (w - i) / (w + i)``.

Most functions accept either the typed wrappers (:class:`DiskPoint`,
:class:`BoundaryPoint`) or raw complex numbers / angles, and the scalar kernels
are written so that they broadcast over numpy arrays as well.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

TWO_PI = 2.0 * math.pi
BOUNDARY_EPS = 1e-12
ANGLE_TOL = 1e-10


class GeometryError(ValueError):
    """Invalid geometric input (point on or outside the unit circle, ...)."""


class DegenerateError(GeometryError):
    """Coincident endpoints or an undefined direction."""


def normalize_angle(theta):
    """Reduce an angle (or array of angles) to ``[0, 2*pi)``."""
    if np.ndim(theta) == 0:
        t = math.fmod(float(theta), TWO_PI)
        if t < 0.0:
            t += TWO_PI
        if t >= TWO_PI:
            t = 0.0
        return t
    t = np.mod(np.asarray(theta, dtype=float), TWO_PI)
    return np.where(t >= TWO_PI, 0.0, t)


def angular_dist(a, b):
    """Distance on the circle between two angles, in ``[0, pi]``."""
    d = np.abs(normalize_angle(np.asarray(a) - np.asarray(b)))
    out = np.minimum(d, TWO_PI - d)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class DiskPoint:
    re: float
    im: float

    def __post_init__(self):
        object.__setattr__(self, "re", float(self.re))
        object.__setattr__(self, "im", float(self.im))
        r = math.hypot(self.re, self.im)
        if not r < 1.0 - BOUNDARY_EPS:
            raise GeometryError(f"point ({self.re}, {self.im}) is not strictly inside the disk")

    @property
    def z(self) -> complex:
        return complex(self.re, self.im)

    @classmethod
    def from_complex(cls, z: complex) -> "DiskPoint":
        return cls(z.real, z.imag)

    @classmethod
    def from_halfplane(cls, w: complex) -> "DiskPoint":
        w = complex(w)
        if w.imag <= 0:
            raise GeometryError(f"half-plane point {w} must have positive imaginary part")
        return cls.from_complex(halfplane_to_disk(w))

    def to_halfplane(self) -> complex:
        return disk_to_halfplane(self.z)


ORIGIN = DiskPoint(0.0, 0.0)


@dataclass(frozen=True, eq=False)
class BoundaryPoint:
    """An ideal point, stored as its angle in ``[0, 2*pi)``."""

    theta: float

    def __post_init__(self):
        object.__setattr__(self, "theta", normalize_angle(float(self.theta)))

    @property
    def z(self) -> complex:
        return complex(math.cos(self.theta), math.sin(self.theta))

    @classmethod
    def from_complex(cls, u: complex) -> "BoundaryPoint":
        return cls(math.atan2(u.imag, u.real))

    @classmethod
    def from_halfplane(cls, x) -> "BoundaryPoint":
        """Ideal point of the half-plane; ``x`` real or ``math.inf``."""
        if x == math.inf or x == -math.inf:
            return cls(0.0)
        return cls.from_complex(halfplane_to_disk(complex(x, 0.0)))

    def __eq__(self, other):
        if not isinstance(other, BoundaryPoint):
            return NotImplemented
        return angular_dist(self.theta, other.theta) <= ANGLE_TOL

    __hash__ = None


Point = Union[DiskPoint, complex]
Ideal = Union[BoundaryPoint, float]


@dataclass(frozen=True)
class TangentVector:
    base: DiskPoint
    direction: float

    def __post_init__(self):
        object.__setattr__(self, "direction", normalize_angle(float(self.direction)))

    def geodesic(self) -> "Geodesic":
        """The geodesic ``c_v`` with ``c_v(0) = base`` and ``c_v'(0) = v``."""
        p = self.base.z
        e = complex(math.cos(self.direction), math.sin(self.direction))
        return Geodesic(BoundaryPoint.from_complex(_from_origin(p, -e)),
                        BoundaryPoint.from_complex(_from_origin(p, e)), self.base)


# -- Cayley transform and disk isometries -------------------------------------

def halfplane_to_disk(w):
    return (w - 1j) / (w + 1j)


def disk_to_halfplane(z):
    return 1j * (1 + z) / (1 - z)


def _to_origin(p, z):
    """Isometry ``z -> (z - p) / (1 - conj(p) z)`` sending ``p`` to 0."""
    return (z - p) / (1 - np.conj(p) * z)


def _from_origin(p, z):
    """Inverse of :func:`_to_origin`."""
    return (z + p) / (1 + np.conj(p) * z)


def _as_z(x):
    if isinstance(x, DiskPoint):
        return x.z
    if isinstance(x, BoundaryPoint):
        return x.z
    return x


def _is_ideal(x) -> bool:
    return isinstance(x, BoundaryPoint)


def _arg(z):
    if np.ndim(z) == 0:
        return normalize_angle(math.atan2(z.imag, z.real))
    return normalize_angle(np.angle(z))


# -- metric --------------------------------------------------------------------

def dist(p: Point, q: Point):
    """Hyperbolic distance (curvature -1)."""
    p, q = _as_z(p), _as_z(q)
    num = np.abs(p - q)
    den = np.sqrt((1.0 - np.abs(p) ** 2) * (1.0 - np.abs(q) ** 2))
    out = 2.0 * np.arcsinh(num / den)
    return float(out) if np.ndim(out) == 0 else out


def _dist_to_radial(u, phi: float, t: float):
    """``d(u, tanh(t/2) e^{i phi})`` without forming ``1 - |w|^2`` from ``w``."""
    w = math.tanh(t / 2.0) * complex(math.cos(phi), math.sin(phi))
    num = np.abs(u - w) * math.cosh(t / 2.0)
    return 2.0 * np.arcsinh(num / np.sqrt(1.0 - np.abs(u) ** 2))


# -- geodesics -----------------------------------------------------------------

@dataclass(frozen=True)
class Geodesic:
    """Unit-speed geodesic ``c`` with ``c(-inf) = theta_minus``, ``c(+inf) = theta_plus``."""

    theta_minus: BoundaryPoint
    theta_plus: BoundaryPoint
    origin: DiskPoint

    def __post_init__(self):
        if self.theta_minus == self.theta_plus:
            raise DegenerateError("geodesic endpoints coincide")
        o = self.origin.z
        u = _to_origin(o, self.theta_plus.z)
        v = _to_origin(o, self.theta_minus.z)
        if abs(u + v) > 1e-10 * 2:
            raise GeometryError("origin does not lie on the geodesic through the given endpoints")

    @property
    def _phi(self) -> float:
        return _arg(_to_origin(self.origin.z, self.theta_plus.z))

    def point(self, t):
        """``c(t)`` as a complex number (may be closer to the circle than a DiskPoint allows)."""
        phi = self._phi
        w = np.tanh(np.asarray(t, dtype=float) / 2.0) * complex(math.cos(phi), math.sin(phi))
        out = _from_origin(self.origin.z, w)
        return complex(out) if np.ndim(out) == 0 else out

    def distance_from(self, p: Point, t: float) -> float:
        """``d(p, c(t))``, accurate even when ``c(t)`` is numerically on the circle."""
        u = _to_origin(self.origin.z, _as_z(p))
        return float(_dist_to_radial(u, self._phi, float(t)))

    def reversed(self) -> "Geodesic":
        return Geodesic(self.theta_plus, self.theta_minus, self.origin)


def _foot_from_origin(a: complex, b: complex) -> complex:
    """Closest point to 0 of the geodesic with ideal endpoints ``a``, ``b``."""
    h = angular_dist(_arg(a), _arg(b)) / 2.0
    mid = a + b
    if abs(mid) < 1e-15:
        return 0j
    r = (1.0 - math.sin(h)) / math.cos(h)
    return r * mid / abs(mid)


def geodesic_between(a: Union[Point, BoundaryPoint], b: Union[Point, BoundaryPoint]) -> Geodesic:
    """The geodesic from ``a`` to ``b``; parameterized with ``c(0) = a`` when ``a`` is interior."""
    za, zb = _as_z(a), _as_z(b)
    if not _is_ideal(a):
        w = _to_origin(za, zb)
        if abs(w) < 1e-15:
            raise DegenerateError("endpoints coincide")
        e = w / abs(w)
        origin = a if isinstance(a, DiskPoint) else DiskPoint.from_complex(za)
        return Geodesic(BoundaryPoint.from_complex(_from_origin(za, -e)),
                        BoundaryPoint.from_complex(_from_origin(za, e)), origin)
    if not _is_ideal(b):
        return geodesic_between(b, a).reversed()
    if a == b:
        raise DegenerateError("endpoints coincide")
    foot = _foot_from_origin(za, zb)
    return Geodesic(a, b, DiskPoint.from_complex(foot))


def dist_to_geodesic(p: Point, g: Geodesic) -> float:
    """Distance from ``p`` to the complete geodesic ``g``."""
    z = _as_z(p)
    u = _to_origin(z, g.theta_minus.z)
    v = _to_origin(z, g.theta_plus.z)
    h = angular_dist(_arg(u), _arg(v)) / 2.0
    if h >= math.pi / 2:
        return 0.0
    return max(0.0, -math.log(math.tan(h / 2.0)))


def dist_to_ray(w, p: Point, xi: Ideal):
    """Distance from ``w`` (scalar or array) to the ray from ``p`` towards ``xi``."""
    p = _as_z(p)
    theta = xi.theta if isinstance(xi, BoundaryPoint) else float(xi)
    e = _to_origin(p, complex(math.cos(theta), math.sin(theta)))
    u = _to_origin(p, np.asarray(_as_z(w))) * np.conj(e / abs(e))
    denom = 1.0 - np.abs(u) ** 2
    line = np.arcsinh(2.0 * np.abs(u.imag) / denom)
    radial = 2.0 * np.arctanh(np.minimum(np.abs(u), 1.0 - 1e-16))
    out = np.where(u.real >= 0.0, line, radial)
    return float(out) if np.ndim(out) == 0 else out


# -- angles --------------------------------------------------------------------

def direction_at(p: Point, x) -> float:
    """Angle of the initial direction of ``c_{p,x}`` at ``p``.

    The disk model is conformal and the isometry moving ``p`` to 0 has a
    positive real derivative at ``p``, so the angle is measured after that move.
    """
    zp = _as_z(p)
    w = _to_origin(zp, _as_z(x))
    if not _is_ideal(x) and abs(w) < 1e-15:
        raise DegenerateError("direction from a point to itself is undefined")
    return _arg(w)


def angle_at(p: Point, a, b) -> float:
    """Riemannian angle at ``p`` between the geodesics towards ``a`` and ``b``."""
    return angular_dist(direction_at(p, a), direction_at(p, b))


def boundary_direction(p: Point, x) -> BoundaryPoint:
    """``c_{p,x}(+inf)``: the ideal endpoint of the ray from ``p`` through ``x``."""
    zp = _as_z(p)
    phi = direction_at(p, x)
    return BoundaryPoint.from_complex(_from_origin(zp, complex(math.cos(phi), math.sin(phi))))


# -- Busemann functions and Gromov products -------------------------------------

def _horo_height(xi, z):
    """``log(|xi - z|^2 / (1 - |z|^2))`` = Busemann function normalized at 0."""
    return np.log(np.abs(xi - z) ** 2 / (1.0 - np.abs(z) ** 2))


def busemann(xi: Ideal, p: Point, x: Point):
    """``beta_xi(p, x) = lim_t d(p, c_{x,xi}(t)) - t``."""
    u = xi.z if isinstance(xi, BoundaryPoint) else np.exp(1j * np.asarray(xi, dtype=float))
    out = _horo_height(u, _as_z(p)) - _horo_height(u, _as_z(x))
    return float(out) if np.ndim(out) == 0 else out


def busemann_limit_oracle(xi: BoundaryPoint, p: Point, x: Point, t_max: float) -> float:
    """Truncated defining limit ``d(p, c_{x,xi}(t_max)) - t_max``."""
    if t_max < 10:
        raise ValueError("t_max must be at least 10")
    g = geodesic_between(x if isinstance(x, DiskPoint) else DiskPoint.from_complex(x), xi)
    return g.distance_from(p, t_max) - t_max


def gromov_product(p: Point, xi: Ideal, eta: Ideal, witness: Point | None = None):
    """``beta_p(xi, eta) = beta_xi(p, x) + beta_eta(p, x)`` for ``x`` on ``c_{xi,eta}``.

    Without a witness the value is evaluated in closed form,
    ``log(4 |xi-p|^2 |eta-p|^2 / ((1-|p|^2)^2 |xi-eta|^2))``.
    """
    a = xi.z if isinstance(xi, BoundaryPoint) else np.exp(1j * np.asarray(xi, dtype=float))
    b = eta.z if isinstance(eta, BoundaryPoint) else np.exp(1j * np.asarray(eta, dtype=float))
    if np.any(np.abs(a - b) < 1e-15):
        raise DegenerateError("Gromov product needs distinct ideal points")
    z = _as_z(p)
    if witness is not None:
        return busemann(xi, p, witness) + busemann(eta, p, witness)
    out = np.log(4.0 * np.abs(a - z) ** 2 * np.abs(b - z) ** 2
                 / ((1.0 - np.abs(z) ** 2) ** 2 * np.abs(a - b) ** 2))
    return float(out) if np.ndim(out) == 0 else out


# -- shadows, visibility, cones ------------------------------------------------

@dataclass(frozen=True)
class ShadowArc:
    """Shadow seen from ``base``: ideal points whose direction at ``base`` is
    within ``half_width`` of ``center``'s direction.  When ``base`` is the
    origin this is the plain arc ``center +- half_width``."""

    center: float
    half_width: float
    base: DiskPoint = ORIGIN
    full: bool = False

    def __post_init__(self):
        object.__setattr__(self, "center", normalize_angle(self.center))
        if not 0.0 < self.half_width <= math.pi:
            raise GeometryError("half_width must lie in (0, pi]")

    def contains(self, theta):
        if self.full:
            return np.ones(np.shape(theta), dtype=bool) if np.ndim(theta) else True
        b = self.base.z
        c_dir = _arg(_to_origin(b, np.exp(1j * self.center)))
        t_dir = _arg(_to_origin(b, np.exp(1j * np.asarray(theta, dtype=float))))
        out = angular_dist(t_dir, c_dir) < self.half_width
        return bool(out) if np.ndim(out) == 0 else out

    def interval(self) -> tuple[float, float]:
        """Counter-clockwise boundary interval ``(start, length)`` in circle angles."""
        if self.full:
            return 0.0, TWO_PI
        b = self.base.z
        c_dir = _arg(_to_origin(b, np.exp(1j * self.center)))
        lo = _arg(_from_origin(b, np.exp(1j * (c_dir - self.half_width))))
        hi = _arg(_from_origin(b, np.exp(1j * (c_dir + self.half_width))))
        return lo, normalize_angle(hi - lo)


def shadow_arc(p: Point, z: Point, R: float) -> ShadowArc:
    """Shadow from ``p`` of the closed ball ``B(z, R)``.

    The visual half-width obeys the right-triangle law
    ``sin(half_width) = sinh(R) / sinh(d(p, z))``.
    """
    base = p if isinstance(p, DiskPoint) else DiskPoint.from_complex(p)
    D = dist(p, z)
    center = boundary_direction(p, z).theta if D > 0 else 0.0
    if D <= R:
        return ShadowArc(center, math.pi, base, full=True)
    return ShadowArc(center, math.asin(math.sinh(R) / math.sinh(D)), base)


def _subtended_angle(R: float, rotation: float) -> float:
    """Angle at 0 subtended by the geodesic whose foot from 0 is at distance R."""
    foot = math.tanh(R / 2.0) * complex(math.cos(rotation), math.sin(rotation))
    if R == 0.0:
        return math.pi
    g = TangentVector(DiskPoint.from_complex(foot), rotation + math.pi / 2).geodesic()
    return angle_at(0j, g.theta_minus, g.theta_plus)


def visibility_constant(eps: float, grid: int = 16, tol: float = 1e-12) -> float:
    """Smallest ``R`` such that geodesics at distance ``>= R`` from a point subtend ``<= eps``.

    By homogeneity the base point is the disk centre; the family of geodesics
    at distance ``R`` is scanned over ``grid`` rotations and ``R`` bisected.
    """
    if not 0.0 < eps <= math.pi:
        raise ValueError("eps must lie in (0, pi]")
    rotations = np.linspace(0.0, TWO_PI, grid, endpoint=False)

    def worst(R):
        return max(_subtended_angle(R, float(r)) for r in rotations)

    if worst(0.0) <= eps:
        return 0.0
    lo, hi = 0.0, 1.0
    while worst(hi) > eps:
        lo, hi = hi, 2.0 * hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if worst(mid) > eps:
            lo = mid
        else:
            hi = mid
    return hi


def cone_membership(v: TangentVector, x, eps: float, r: float = 0.0) -> bool:
    """Membership of ``x`` in the truncated cone ``TC(v, eps, r)`` (``C(v, eps)`` for r = 0)."""
    ang = angular_dist(direction_at(v.base, x), v.direction)
    if ang >= eps:
        return False
    return _is_ideal(x) or dist(v.base, x) > r
