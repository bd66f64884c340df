import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import busemann_limit, disk_dist, dist_to_ray_min, shadow_half_width_search
from psworkbench.groups import MobiusMap
from psworkbench.hyperbolic import (
    ORIGIN,
    BoundaryPoint,
    DegenerateError,
    DiskPoint,
    GeometryError,
    TangentVector,
    angle_at,
    angular_dist,
    busemann,
    busemann_limit_oracle,
    cone_membership,
    dist,
    dist_to_geodesic,
    dist_to_ray,
    geodesic_between,
    gromov_product,
    halfplane_to_disk,
    normalize_angle,
    shadow_arc,
    visibility_constant,
)

LOG3 = 1.0986122886681098  # oracle: integral of 2/(1-r^2) over [0, 1/2]

radii = st.floats(0.0, 0.93)
angles = st.floats(0.0, 2 * math.pi, exclude_max=True)
points = st.builds(lambda r, t: DiskPoint(r * math.cos(t), r * math.sin(t)), radii, angles)
ideal = st.builds(BoundaryPoint, angles)


def moebius():
    return st.builds(lambda r, t, a: MobiusMap.moving_origin_to(DiskPoint(r * math.cos(t), r * math.sin(t)))
                     @ MobiusMap.rotation(a), st.floats(0, 0.8), angles, angles)


# -- points and metric ----------------------------------------------------------------

def test_points_must_be_interior():
    with pytest.raises(GeometryError):
        DiskPoint(1.0, 0.0)
    with pytest.raises(GeometryError):
        DiskPoint(0.6, 0.8)


def test_boundary_point_normalization():
    assert BoundaryPoint(-math.pi / 2).theta == pytest.approx(1.5 * math.pi)
    assert BoundaryPoint(2 * math.pi) == BoundaryPoint(0.0)
    assert normalize_angle(-1e-18) < 2 * math.pi


def test_dist_known_values():
    assert dist(ORIGIN, ORIGIN) == 0.0
    assert dist(ORIGIN, DiskPoint(0.5, 0.0)) == pytest.approx(LOG3, abs=1e-14)


def test_dist_matches_high_precision():
    rng = np.random.default_rng(3)
    for _ in range(20):
        z, w = (0.95 * rng.random() * np.exp(2j * np.pi * rng.random()) for _ in range(2))
        assert dist(z, w) == pytest.approx(float(disk_dist(z, w)), rel=1e-12, abs=1e-13)


@given(points, points, points)
def test_metric_axioms(p, q, r):
    assert dist(p, q) >= 0
    assert dist(p, q) == pytest.approx(dist(q, p), abs=1e-12)
    assert dist(p, r) <= dist(p, q) + dist(q, r) + 1e-12


@given(points, points, moebius())
def test_isometries_preserve_distance(p, q, g):
    assert dist(g.apply_point(p), g.apply_point(q)) == pytest.approx(dist(p, q), abs=1e-9)


# -- geodesics --------------------------------------------------------------------------

def test_geodesic_between_ideal_points_is_diameter():
    g = geodesic_between(BoundaryPoint(0.0), BoundaryPoint(math.pi))
    assert abs(g.origin.z) < 1e-15
    assert abs(g.point(1.0).imag) < 1e-15


def test_geodesic_from_interior_point():
    g = geodesic_between(DiskPoint(0.5, 0.0), BoundaryPoint(0.0))
    assert g.point(0.0) == pytest.approx(0.5)
    assert abs(g.point(2.0).imag) < 1e-15 and g.point(2.0).real > 0.5


def test_geodesic_rejects_coincident_endpoints():
    with pytest.raises(DegenerateError):
        geodesic_between(BoundaryPoint(1.0), BoundaryPoint(1.0 + 2 * math.pi))
    with pytest.raises(DegenerateError):
        geodesic_between(DiskPoint(0.1, 0.2), DiskPoint(0.1, 0.2))


@given(points, ideal, st.floats(-6, 6), st.floats(-6, 6))
def test_geodesic_unit_speed(p, xi, s, t):
    g = geodesic_between(p, xi)
    assert dist(g.point(s), g.point(t)) == pytest.approx(abs(s - t), abs=1e-8)


def test_dist_to_geodesic_oracle():
    g = geodesic_between(BoundaryPoint(0.0), BoundaryPoint(math.pi))
    assert dist_to_geodesic(DiskPoint(0.0, 0.5), g) == pytest.approx(LOG3, abs=1e-12)
    assert dist_to_geodesic(DiskPoint(0.3, 0.0), g) == 0.0


@given(points, ideal, ideal, moebius())
def test_dist_to_geodesic_invariant(p, a, b, g):
    if angular_dist(a.theta, b.theta) < 1e-3:
        return
    geo = geodesic_between(a, b)
    moved = geodesic_between(BoundaryPoint(g.boundary_action(a.theta)), BoundaryPoint(g.boundary_action(b.theta)))
    assert dist_to_geodesic(g.apply_point(p), moved) == pytest.approx(dist_to_geodesic(p, geo), abs=1e-8)


def test_dist_to_ray_against_minimization():
    rng = np.random.default_rng(5)
    for _ in range(6):
        w = 0.8 * rng.random() * np.exp(2j * np.pi * rng.random())
        p = 0.5 * rng.random() * np.exp(2j * np.pi * rng.random())
        th = 2 * np.pi * rng.random()
        assert dist_to_ray(w, p, th) == pytest.approx(float(dist_to_ray_min(w, p, th)), abs=1e-9)


# -- angles, visibility, cones ---------------------------------------------------------------

def test_angles_at_origin():
    assert angle_at(ORIGIN, BoundaryPoint(0.0), BoundaryPoint(math.pi)) == pytest.approx(math.pi)
    assert angle_at(ORIGIN, BoundaryPoint(0.0), BoundaryPoint(math.pi / 2)) == pytest.approx(math.pi / 2)
    with pytest.raises(DegenerateError):
        angle_at(ORIGIN, ORIGIN, BoundaryPoint(0.0))


def test_angle_continuity_towards_ideal_point():
    p, y, xi = DiskPoint(0.2, -0.1), DiskPoint(-0.3, 0.4), BoundaryPoint(1.0)
    target = angle_at(p, xi, y)
    errs = [abs(angle_at(p, DiskPoint.from_complex(r * xi.z), y) - target) for r in (0.9, 0.99, 0.999)]
    assert errs[0] > errs[1] > errs[2] and errs[2] < 1e-2


def test_visibility_constant():
    assert visibility_constant(math.pi) == 0.0
    r_half = visibility_constant(math.pi / 2)
    # a geodesic at distance R from 0 subtends 2 arctan(1/sinh R)... equal to pi/2 when sinh R = 1
    assert r_half == pytest.approx(math.asinh(1.0), abs=1e-9)
    assert visibility_constant(0.3) >= visibility_constant(0.6) >= r_half


def test_cone_membership():
    v = TangentVector(ORIGIN, 0.0)
    assert cone_membership(v, DiskPoint(0.9, 0.0), 0.01)
    assert not cone_membership(v, DiskPoint(-0.5, 0.0), 3.0)
    assert cone_membership(v, BoundaryPoint(0.05), 0.1, r=5.0)
    assert not cone_membership(v, DiskPoint(0.1, 0.0), 0.1, r=5.0)


def test_balls_far_along_ray_enter_cone():
    v, eps, R = TangentVector(ORIGIN, 0.0), 0.2, 1.0
    # far enough out, the whole metric ball lies in the cone; the half-angle law says
    # this happens once sinh(R) / sinh(t) < sin(eps)
    L = math.asinh(math.sinh(R) / math.sin(eps))
    for t in (L + 0.05, L + 1.0, L + 3.0):
        c = math.tanh(t / 2)
        g = MobiusMap.moving_origin_to(DiskPoint(c, 0.0))
        rim = [g.apply(math.tanh(R / 2) * np.exp(1j * a)) for a in np.linspace(0, 2 * np.pi, 64, endpoint=False)]
        assert all(cone_membership(v, DiskPoint.from_complex(complex(w)), eps) for w in rim)
    c = math.tanh((L - 0.3) / 2)
    g = MobiusMap.moving_origin_to(DiskPoint(c, 0.0))
    rim = [g.apply(math.tanh(R / 2) * np.exp(1j * a)) for a in np.linspace(0, 2 * np.pi, 64, endpoint=False)]
    assert not all(cone_membership(v, DiskPoint.from_complex(complex(w)), eps) for w in rim)


# -- Busemann and Gromov ---------------------------------------------------------------------

def test_busemann_known_values():
    xi = BoundaryPoint(0.0)
    assert busemann(xi, DiskPoint(0.3, 0.2), DiskPoint(0.3, 0.2)) == 0.0
    assert busemann(xi, ORIGIN, DiskPoint(0.5, 0.0)) == pytest.approx(LOG3, abs=1e-14)
    assert busemann_limit_oracle(xi, ORIGIN, DiskPoint(0.5, 0.0), 30) == pytest.approx(LOG3, abs=1e-8)
    assert busemann_limit_oracle(xi, ORIGIN, DiskPoint(0.5, 0.0), 40) == pytest.approx(LOG3, abs=1e-8)


def test_busemann_vs_high_precision_limit():
    rng = np.random.default_rng(11)
    for _ in range(15):
        p, x = (0.9 * rng.random() * np.exp(2j * np.pi * rng.random()) for _ in range(2))
        th = 2 * np.pi * rng.random()
        assert busemann(th, p, x) == pytest.approx(float(busemann_limit(th, p, x)), abs=1e-12)


def test_limit_oracle_converges_with_t():
    xi, p, x = BoundaryPoint(2.0), DiskPoint(0.4, -0.3), DiskPoint(-0.2, 0.6)
    exact = busemann(xi, p, x)
    errs = [abs(busemann_limit_oracle(xi, p, x, t) - exact) for t in (10, 20)]
    assert errs[1] < errs[0]
    with pytest.raises(ValueError):
        busemann_limit_oracle(xi, p, x, 5)


@given(ideal, points, points, points)
def test_busemann_bound_and_cocycle(xi, p, x, q):
    b = busemann(xi, p, x)
    assert abs(b) <= dist(p, x) + 1e-12
    assert b + busemann(xi, x, p) == pytest.approx(0.0, abs=1e-9)
    assert busemann(xi, p, x) + busemann(xi, x, q) == pytest.approx(busemann(xi, p, q), abs=1e-9)


@given(ideal, points, points, moebius())
def test_busemann_equivariant(xi, p, x, g):
    moved = busemann(g.boundary_action(xi.theta), g.apply_point(p), g.apply_point(x))
    assert moved == pytest.approx(busemann(xi, p, x), abs=1e-8)


def test_gromov_product_known_values():
    a, b = BoundaryPoint(0.0), BoundaryPoint(math.pi)
    assert gromov_product(ORIGIN, a, b) == pytest.approx(0.0, abs=1e-15)
    p = DiskPoint(0.0, 0.5)
    v = gromov_product(p, a, b)
    assert v > 0
    assert gromov_product(p, a, b, witness=ORIGIN) == pytest.approx(v, abs=1e-9)
    assert gromov_product(p, a, b, witness=DiskPoint(0.3, 0.0)) == pytest.approx(v, abs=1e-9)
    with pytest.raises(DegenerateError):
        gromov_product(p, a, BoundaryPoint(0.0))


@given(points, ideal, ideal, st.floats(-5, 5))
def test_gromov_witness_independence(p, xi, eta, t):
    if angular_dist(xi.theta, eta.theta) < 1e-3:
        return
    w = geodesic_between(xi, eta).point(t)
    g = gromov_product(p, xi, eta)
    assert g >= -1e-12
    assert gromov_product(p, eta, xi) == pytest.approx(g, abs=1e-12)
    assert gromov_product(p, xi, eta, witness=w) == pytest.approx(g, abs=1e-9 * max(1, abs(g)))


# -- shadows ------------------------------------------------------------------------------------

def test_shadow_example_against_tangency_search():
    arc = shadow_arc(ORIGIN, DiskPoint(0.5, 0.0), 0.1)
    assert arc.center == pytest.approx(0.0, abs=1e-15)
    assert arc.half_width == pytest.approx(math.asin(math.sinh(0.1) / math.sinh(LOG3)), abs=1e-15)
    assert arc.half_width == pytest.approx(shadow_half_width_search(0.5, 0.1), abs=1e-10)


def test_shadow_full_circle_when_inside():
    arc = shadow_arc(ORIGIN, DiskPoint(0.2, 0.0), 1.0)
    assert arc.full and arc.half_width == pytest.approx(math.pi)
    assert arc.contains(3.0)


@given(points, points, st.floats(0.05, 2.0))
def test_shadow_center_is_direction(p, z, R):
    if dist(p, z) <= R + 1e-6:
        return
    arc = shadow_arc(p, z, R)
    end = geodesic_between(p, z).theta_plus
    assert angular_dist(arc.center, end.theta) < 1e-9
    assert arc.contains(end.theta)


def test_halfplane_cayley():
    assert halfplane_to_disk(1j) == 0
    assert abs(halfplane_to_disk(1e12 + 1j) - 1) < 1e-9
