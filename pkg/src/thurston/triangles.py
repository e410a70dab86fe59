"""Geodesic triangles: interior angles, angle-sum scans and circumspheres."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence

import numpy as np
from scipy.optimize import brentq, least_squares, minimize

from .geodesics import (AmbiguousGeodesicError, DistanceError, angle, distance_value,
                        h2xr_distance, initial_tangent, inverse_origin, s2xr_distance)
from .model import ORIGINS, SpaceId, affine, check_proper, hpoint, translate_to_origin

__all__ = [
    "GeodesicTriangle",
    "AngleReport",
    "Circumsphere",
    "TriangleError",
    "CircumsphereError",
    "interior_angles",
    "vertex_angle",
    "angle_sum_scan",
    "bisect_angle_sum",
    "circumsphere",
    "random_proper_triangle",
    "classify_triangle",
]

KINDS = ("fibre_like", "hyperbolic_like", "base_planar", "general")


class TriangleError(RuntimeError):
    def __init__(self, message, vertex: Optional[int] = None):
        super().__init__(message if vertex is None else f"vertex {vertex}: {message}")
        self.vertex = vertex


class CircumsphereError(RuntimeError):
    pass


@dataclass(frozen=True)
class GeodesicTriangle:
    space: SpaceId
    vertices: np.ndarray
    kind: str = "general"

    def __post_init__(self):
        space = SpaceId.parse(self.space)
        verts = np.array([check_proper(space, v) for v in self.vertices])
        if verts.shape != (3, 4):
            raise ValueError("a triangle needs three vertices")
        if self.kind not in KINDS:
            raise ValueError(f"unknown triangle kind {self.kind!r}")
        for i in range(3):
            for j in range(i + 1, 3):
                a, b = verts[i] / np.linalg.norm(verts[i]), verts[j] / np.linalg.norm(verts[j])
                if np.allclose(a, b, atol=1e-14):
                    raise ValueError(f"vertices {i} and {j} coincide")
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "vertices", verts)


@dataclass(frozen=True)
class AngleReport:
    omegas: tuple
    sum: float
    defect: float

    def as_dict(self):
        return {"omegas": list(self.omegas), "sum": self.sum, "defect": self.defect}


@dataclass(frozen=True)
class Circumsphere:
    center: np.ndarray
    radius: float
    residuals: np.ndarray

    def as_dict(self):
        return {"center": list(affine(self.center)), "radius": self.radius,
                "residuals": list(self.residuals)}


def vertex_angle(space, A, B, C) -> float:
    """Interior angle at ``A`` between the geodesics ``AB`` and ``AC``."""
    space = SpaceId.parse(space)
    T = translate_to_origin(space, A)
    pb = inverse_origin(space, T.apply(B))
    pc = inverse_origin(space, T.apply(C))
    tb = initial_tangent(space, pb.dir1, pb.dir2)
    tc = initial_tangent(space, pc.dir1, pc.dir2)
    return angle(space, ORIGINS[space], tb, tc)


def interior_angles(T: GeodesicTriangle) -> AngleReport:
    v = T.vertices
    omegas = []
    for i in range(3):
        try:
            omegas.append(vertex_angle(T.space, v[i], v[(i + 1) % 3], v[(i + 2) % 3]))
        except (DistanceError, AmbiguousGeodesicError) as exc:
            raise TriangleError(str(exc), vertex=i) from exc
    total = float(sum(omegas))
    return AngleReport(tuple(omegas), total, total - np.pi)


def classify_triangle(space, vertices, tol: float = 1e-12) -> str:
    """Kind of a triangle from its vertex positions.

    ``base_planar``: S2xR/H2xR vertices whose Euclidean plane contains the
    model centre.  ``hyperbolic_like``: Nil/SL2R vertices in the base plane.
    ``fibre_like``: one edge on a fibre line.
    """
    space = SpaceId.parse(space)
    verts = np.array([check_proper(space, p) for p in vertices])
    if space in (SpaceId.S2xR, SpaceId.H2xR):
        # Euclidean plane of the vertices passes through the model centre.
        a = affine(verts)
        scale = np.prod(np.linalg.norm(a, axis=1))
        if abs(np.linalg.det(a)) <= 1e-9 * scale:
            return "base_planar"
        return "general"
    if space is SpaceId.Nil:
        a = affine(verts)
        if np.all(np.abs(a[:, 2]) < tol):
            return "hyperbolic_like"
        for i in range(3):
            j = (i + 1) % 3
            if np.hypot(*(a[i, :2] - a[j, :2])) < tol:
                return "fibre_like"
        return "general"
    if space is SpaceId.SL2R:
        if np.all(np.abs(verts[:, 1]) < tol * np.abs(verts[:, 0])):
            return "hyperbolic_like"
        for i in range(3):
            j = (i + 1) % 3
            T = translate_to_origin(space, verts[i])
            q = T.apply(verts[j])
            if np.hypot(q[2], q[3]) < tol * np.linalg.norm(q):
                return "fibre_like"
        return "general"
    return "general"


def angle_sum_scan(space, family: Callable[[float], Sequence], t_grid: Iterable[float]):
    """Angle sums along a one-parameter family of triangles.

    Returns a list of ``(t, sum)`` pairs; members that are degenerate or
    whose distance solves fail are skipped with a warning.
    """
    space = SpaceId.parse(space)
    rows = []
    for t in t_grid:
        try:
            tri = GeodesicTriangle(space, family(t))
            rows.append((float(t), interior_angles(tri).sum))
        except (ValueError, TriangleError) as exc:
            warnings.warn(f"skipping family member t={t}: {exc}")
    return rows


def bisect_angle_sum(space, family, t_lo: float, t_hi: float, target: float = np.pi,
                     xtol: float = 1e-13):
    """Parameter where the family's angle sum crosses ``target``."""
    space = SpaceId.parse(space)

    def f(t):
        return interior_angles(GeodesicTriangle(space, family(t))).sum - target

    f_lo, f_hi = f(t_lo), f(t_hi)
    if f_lo * f_hi > 0:
        raise ValueError("angle sum does not cross the target on the bracket")
    t = brentq(f, t_lo, t_hi, xtol=xtol)
    return t, interior_angles(GeodesicTriangle(space, family(t)))


# ------------------------------------------------------------ sampling

def _random_point(space: SpaceId, rng, box: float):
    while True:
        if space is SpaceId.S2xR:
            p = hpoint(rng.uniform(-box, box, 3))
            if np.linalg.norm(p[1:]) > 1e-2:
                return p
        elif space is SpaceId.H2xR:
            y, z = rng.uniform(-box, box, 2)
            x = np.hypot(y, z) + rng.uniform(0.05, box)
            return hpoint([x, y, z])
        elif space is SpaceId.SL2R:
            p = np.array([1.0, *rng.uniform(-box, box, 3)])
            if -p[0] ** 2 - p[1] ** 2 + p[2] ** 2 + p[3] ** 2 < -1e-2:
                return p
        else:
            return hpoint(rng.uniform(-box, box, 3))


def random_proper_triangle(space, rng, box: float = 2.0, min_dist: float = 1e-2,
                           min_angle: float = 1e-2, max_tries: int = 1000):
    """Random triangle with vertices in an affine box, rejecting degenerate ones.

    Returns ``(GeodesicTriangle, AngleReport)``.
    """
    space = SpaceId.parse(space)
    for _ in range(max_tries):
        verts = [_random_point(space, rng, box) for _ in range(3)]
        try:
            dists = [distance_value(space, verts[i], verts[(i + 1) % 3]) for i in range(3)]
            if min(dists) < min_dist:
                continue
            tri = GeodesicTriangle(space, verts)
            rep = interior_angles(tri)
        except (ValueError, TriangleError, DistanceError):
            continue
        if min(rep.omegas) < min_angle:
            continue
        return tri, rep
    raise RuntimeError("could not sample a proper triangle")


# ---------------------------------------------------------- circumsphere

_SPHERE_LIMIT = {SpaceId.S2xR: np.pi, SpaceId.Nil: 2 * np.pi, SpaceId.SL2R: np.pi / 2}


def _distances_from(space: SpaceId, c, verts):
    if space is SpaceId.S2xR:
        return s2xr_distance(c[None, :], verts)
    if space is SpaceId.H2xR:
        return h2xr_distance(c[None, :], verts)
    return np.array([distance_value(space, c, v) for v in verts])


def circumsphere(space, vertices, tol: float = 1e-8) -> Circumsphere:
    """Centre equidistant from four vertices.

    The variance of the four distances is minimized by Nelder-Mead from the
    affine centroid and then polished by a least-squares solve of the three
    equal-distance equations.
    """
    space = SpaceId.parse(space)
    verts = np.array([check_proper(space, v) for v in vertices])
    if verts.shape != (4, 4):
        raise ValueError("a tetrahedron needs four vertices")

    def dists(x):
        c = np.concatenate([[1.0], x])
        try:
            check_proper(space, c)
            return _distances_from(space, c, verts)
        except (ValueError, DistanceError):
            return None

    def variance(x):
        d = dists(x)
        if d is None:
            return 1e6
        return float(np.var(d))

    x0 = affine(verts).mean(axis=0)
    res = minimize(variance, x0, method="Nelder-Mead",
                   options={"xatol": 1e-12, "fatol": 1e-24, "maxiter": 20000, "maxfev": 40000})

    def eqs(x):
        d = dists(x)
        if d is None:
            return np.full(3, 1e3)
        return d[1:] - d[0]

    pol = least_squares(eqs, res.x, xtol=1e-15, ftol=1e-15, gtol=1e-15)
    x = min((pol.x, res.x), key=lambda c: np.abs(eqs(c)).max())
    d = dists(x)
    if d is None:
        raise CircumsphereError("circumcentre search left the space's domain")
    r = float(d.mean())
    resid = d - r
    if np.abs(resid).max() > tol:
        raise CircumsphereError(f"circumcentre did not converge (max residual {np.abs(resid).max():.3e})")
    limit = _SPHERE_LIMIT.get(space)
    if limit is not None and r > limit:
        raise CircumsphereError(f"radius {r:.6g} exceeds {limit:.6g}: the surface is not a geodesic sphere")
    return Circumsphere(np.concatenate([[1.0], x]), r, resid)
