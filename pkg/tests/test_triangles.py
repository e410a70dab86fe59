import time

import numpy as np
import pytest

from thurston.geodesics import GeodesicParams, exp_origin
from thurston.model import SpaceId, affine, hpoint, translate_from_origin, translate_to_origin
from thurston.triangles import (CircumsphereError, GeodesicTriangle, angle_sum_scan, bisect_angle_sum,
                                circumsphere, classify_triangle, interior_angles, random_proper_triangle,
                                vertex_angle)

FIG9 = [[1, 1, 0, 0], [1, -2, -0.5, 3], [1, 1, 3, 0], [1, 4, -1, 2]]
FIG10 = [[1, 1, 0, 0], [1, 1.5, 1, -1], [1, 1, 0.5, 0], [1, 1, 0.5, 0.5]]

# One triangle with each sign of the angle-sum defect, and a family joining them.
TRICHOTOMY = {
    "nil": ([[1, 0, 0, 0], [1, 0, 0, 0.5], [1, 4, 0, 0.5]], [[1, 0, 0, 0], [1, 0, 3, 0], [1, 0.5, 3, 0]]),
    "sl2r": ([[1, 0, 0, 0], [1, 0, 0.5, 0], [1, 0.8, 0, 0]], [[1, 0, 0, 0], [1, 0, 0.5, 0], [1, 0, 0, 0.5]]),
}


def s2xr_family(t):
    return [[1, 1, 0, 0], [1, 0.3, 0.1, t], [1, 0.1, 0.3, t]]


def _sum(space, verts):
    return interior_angles(GeodesicTriangle(space, verts)).sum


def test_triangle_validation():
    with pytest.raises(ValueError):
        GeodesicTriangle("nil", [[1, 0, 0, 0], [1, 0, 0, 0], [1, 1, 0, 0]])
    with pytest.raises(ValueError):
        GeodesicTriangle("nil", [[1, 0, 0, 0], [1, 1, 0, 0]])


def test_angle_report_sum_is_exact():
    rep = interior_angles(GeodesicTriangle("s2xr", [[1, 1, 0, 0], [1, 3, -2, 1], [1, 2, 1, 0]]))
    assert rep.sum == sum(rep.omegas)
    assert rep.defect == rep.sum - np.pi
    assert all(0 < w < np.pi for w in rep.omegas)


@pytest.mark.parametrize("space,verts", [
    ("s2xr", [[1, 1, 0, 0], [1, 0, np.exp(0.3), 0], [1, 0.6 * np.exp(-0.4), 0.8 * np.exp(-0.4), 0]]),
    ("h2xr", [[1, 1, 0, 0], [1, np.e ** 0.5 * np.cosh(1), np.e ** 0.5 * np.sinh(1), 0],
              [1, np.e ** -0.3 * np.cosh(0.8), -np.e ** -0.3 * np.sinh(0.8), 0]]),
])
def test_base_planar_sum_is_pi(space, verts):
    assert classify_triangle(space, verts) == "base_planar"
    assert abs(_sum(space, verts) - np.pi) <= 1e-6


@pytest.mark.parametrize("space", ["s2xr", "h2xr"])
def test_base_planar_through_centre_random(space, rng):
    # Any three points on a plane through E0 (after rescaling along rays)
    # give angle sum pi.
    for _ in range(10):
        if space == "s2xr":
            # Base points on one great circle, within a half turn of each other.
            u, v = np.linalg.qr(rng.normal(size=(3, 2)))[0].T
            phi = rng.uniform(0, 2.5, 3)
            pts = np.outer(np.cos(phi), u) + np.outer(np.sin(phi), v)
            pts *= np.exp(rng.uniform(-1, 1, (3, 1)))
        else:
            yz = rng.uniform(-1, 1, (3, 2))
            pts = np.column_stack([np.sqrt(1 + (yz ** 2).sum(1)), yz])
            n = np.array([0.0, *rng.normal(size=2)])
            pts -= np.outer(pts @ n, n) / (n @ n)
            pts *= np.exp(rng.uniform(-1, 1, (3, 1))) / np.sqrt(pts[:, 0] ** 2 - (pts[:, 1:] ** 2).sum(1))[:, None]
        verts = [hpoint(*p) for p in pts]
        assert classify_triangle(space, verts) == "base_planar"
        assert abs(_sum(space, verts) - np.pi) <= 1e-6


def test_nil_fibre_like_right_angle():
    verts = [[1, 0, 0, 0], [1, 0, 0, 0.7], [1, 0.9, 0, 0.7]]
    assert classify_triangle("nil", verts) == "fibre_like"
    rep = interior_angles(GeodesicTriangle("nil", verts))
    assert abs(rep.omegas[1] - np.pi / 2) < 1e-12
    assert rep.sum >= np.pi - 1e-9


def test_s2xr_family_limits():
    rows = angle_sum_scan("s2xr", s2xr_family, [1e-3, 20.0])
    assert abs(rows[0][1] - np.pi) <= 5e-3
    assert abs(rows[1][1] - np.pi) <= 5e-3


def test_s2xr_family_unimodal():
    rows = angle_sum_scan("s2xr", s2xr_family, np.geomspace(1e-2, 50, 25))
    sums = np.array([s for _, s in rows])
    k = int(np.argmax(sums))
    assert np.all(np.diff(sums[: k + 1]) > 0) and np.all(np.diff(sums[k:]) < 0)


def test_nil_family_limit():
    rows = angle_sum_scan("nil", lambda x3: [[1, 0, 0, 0], [1, 0, 0, 0.7], [1, x3, 0, 0.7]], [1e-3])
    assert abs(rows[0][1] - np.pi) <= 5e-3


def test_scan_constant_under_isometry(rng):
    base = [[1, 0, 0, 0], [1, 0.4, 0.3, 0.1], [1, -0.2, 0.5, 0.6]]
    Rs = [hpoint(*rng.uniform(-1, 1, 3)) for _ in range(4)]

    def fam(i):
        T = translate_to_origin("nil", Rs[int(i)])
        return [T.apply(v) for v in base]

    sums = [s for _, s in angle_sum_scan("nil", fam, range(4))]
    assert np.ptp(sums) < 1e-8


def test_scan_skips_degenerate():
    with pytest.warns(UserWarning):
        rows = angle_sum_scan("nil", lambda t: [[1, 0, 0, 0], [1, 0, 0, 0], [1, t, 0, 0]], [1.0])
    assert rows == []


@pytest.mark.parametrize("space", ["nil", "sl2r"])
def test_trichotomy(space):
    pos, neg = TRICHOTOMY[space]
    assert _sum(space, pos) > np.pi + 1e-3
    assert _sum(space, neg) < np.pi - 1e-3
    pos, neg = np.array(pos, float), np.array(neg, float)
    t, rep = bisect_angle_sum(space, lambda t: list((1 - t) * pos + t * neg), 0.0, 1.0)
    assert abs(rep.sum - np.pi) <= 1e-4


@pytest.mark.parametrize("space,bound", [("s2xr", "ge"), ("h2xr", "le")])
def test_random_angle_sum_bounds(space, bound, rng):
    for _ in range(200):
        _, rep = random_proper_triangle(space, rng)
        if bound == "ge":
            assert rep.sum >= np.pi - 1e-9
        else:
            assert rep.sum <= np.pi + 1e-9


@pytest.mark.parametrize("space", list(SpaceId)[:4])
def test_angle_sum_isometry_invariance(space, rng):
    for _ in range(5):
        tri, rep = random_proper_triangle(space, rng, box=0.6)
        from conftest import random_point

        T = translate_to_origin(space, random_point(space, rng, 0.5))
        moved = GeodesicTriangle(space, [T.apply(v) for v in tri.vertices])
        assert abs(interior_angles(moved).sum - rep.sum) < 1e-8


def test_vertex_angle_symmetric():
    A, B, C = hpoint(0, 0, 0), hpoint(1, 0.2, 0.1), hpoint(0.2, 1, -0.3)
    assert np.isclose(vertex_angle("nil", A, B, C), vertex_angle("nil", A, C, B))


def test_circumsphere_fig9_verified():
    t = time.perf_counter()
    cs = circumsphere("s2xr", FIG9)
    assert time.perf_counter() - t < 10
    assert abs(cs.radius - 1.30678) < 1e-4
    assert np.allclose(affine(cs.center), [0.64697, 0.51402, 1.51710], atol=1e-4)
    assert np.abs(cs.residuals).max() <= 1e-6


def test_circumsphere_fig10():
    cs = circumsphere("h2xr", FIG10)
    assert abs(cs.radius - 2.89269) < 1e-4
    assert np.allclose(affine(cs.center), [0.07017, -0.02714, -0.02640], atol=1e-4)
    assert np.abs(cs.residuals).max() <= 1e-6


@pytest.mark.parametrize("space", ["s2xr", "h2xr", "nil"])
def test_circumsphere_recovers_centre(space, rng):
    from conftest import random_point

    K = random_point(space, rng, 0.3)
    r = 0.8
    T = translate_from_origin(space, K)
    dirs = [(0.3, 0.2), (2.0, -0.4), (-1.9, 0.5), (-0.5, -1.1)]
    verts = [T.apply(exp_origin(GeodesicParams(space, a, b, r))) for a, b in dirs]
    cs = circumsphere(space, verts)
    assert np.allclose(affine(cs.center), affine(K), atol=1e-6)
    assert abs(cs.radius - r) < 1e-6


def test_circumsphere_rejects_bad_input():
    with pytest.raises(ValueError):
        circumsphere("s2xr", FIG9[:3])


def test_circumsphere_reports_non_sphere():
    # Four points spread over the base sphere at t = 0: no equidistant centre
    # within radius pi.
    verts = [[1, 1, 0, 0], [1, -1, 0.01, 0], [1, 0, 1, 0], [1, 0, -1, 0.02]]
    with pytest.raises(CircumsphereError):
        circumsphere("s2xr", verts)
