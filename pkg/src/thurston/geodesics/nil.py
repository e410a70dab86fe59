"""Nil-specific geodesic facts: fibre projection and sphere profiles."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..model import SpaceId
from .exp import GeodesicParams

__all__ = [
    "NilProjection",
    "fibre_projection_nil",
    "nil_sphere_cross_section",
    "nil_radius_from_cylinder",
    "nil_cylinder_radius",
    "NIL_SPHERE_MAX_RADIUS",
]

NIL_SPHERE_MAX_RADIUS = 2 * np.pi


@dataclass(frozen=True)
class NilProjection:
    """Base-plane image of a Nil geodesic from the origin.

    ``kind`` is ``"circle"`` (``center``, ``radius``), ``"line"`` (through
    the origin along ``direction``) or ``"point"`` (the origin).
    """

    kind: str
    center: Optional[np.ndarray] = None
    radius: Optional[float] = None
    direction: Optional[np.ndarray] = None

    def residual(self, xy) -> np.ndarray:
        """Signed distance of projected points from the curve."""
        xy = np.atleast_2d(np.asarray(xy, dtype=float))
        if self.kind == "circle":
            return np.hypot(xy[:, 0] - self.center[0], xy[:, 1] - self.center[1]) - self.radius
        if self.kind == "line":
            d = self.direction
            return xy[:, 0] * d[1] - xy[:, 1] * d[0]
        return np.hypot(xy[:, 0], xy[:, 1])


def fibre_projection_nil(arc_or_params) -> NilProjection:
    params = getattr(arc_or_params, "params", arc_or_params)
    if not isinstance(params, GeodesicParams) or params.space is not SpaceId.Nil:
        raise ValueError("a Nil geodesic (GeodesicParams or arc with params) is required")
    alpha, theta = params.dir1, params.dir2
    c, w = np.cos(theta), np.sin(theta)
    if abs(c) < 1e-15:
        return NilProjection("point", center=np.zeros(2), radius=0.0)
    if w == 0.0:
        return NilProjection("line", direction=np.array([np.cos(alpha), np.sin(alpha)]))
    k = c / w
    return NilProjection("circle", center=np.array([-k * np.sin(alpha), k * np.cos(alpha)]),
                         radius=abs(k))


def _check_radius(R):
    if not (0 <= R <= NIL_SPHERE_MAX_RADIUS):
        raise ValueError(f"Nil geodesic spheres exist only for R in [0, 2*pi]; got {R}")


def nil_sphere_cross_section(R: float, theta):
    """Profile ``(X, Z)`` of the Nil sphere of radius ``R`` in the ``[x, z]`` plane."""
    _check_radius(R)
    theta = np.asarray(theta, dtype=float)
    if np.any(np.abs(theta) > np.pi / 2 + 1e-15):
        raise ValueError("theta must lie in [-pi/2, pi/2]")
    c, w = np.cos(theta), np.sin(theta)
    wr = w * R
    X = c * R * np.sinc(wr / 2 / np.pi)
    small = np.abs(wr) < 1e-3
    safe = np.where(small, 1.0, wr)
    tail = np.where(small, wr / 6 - wr ** 3 / 120 + wr ** 5 / 5040, (safe - np.sin(safe)) / safe ** 2)
    Z = wr + 0.5 * c * c * R * R * tail
    if X.ndim == 0:
        return float(X), float(Z)
    return X, Z


def nil_cylinder_radius(R: float, theta: float) -> float:
    """Radius of the cylinder carrying the endpoints at arc length ``R``."""
    c, w = np.cos(theta), np.sin(theta)
    return float(abs(c * R * np.sinc(w * R / 2 / np.pi)))


def nil_radius_from_cylinder(rho: float, theta: float, long_branch: bool = False) -> float:
    """Arc length ``R`` from the cylinder radius ``rho = sqrt(x^2 + y^2)``.

    The principal branch covers ``|w| R <= pi``; ``long_branch`` selects the
    solution with ``|w| R`` in ``[pi, 2 pi]``.
    """
    c, w = np.cos(theta), abs(np.sin(theta))
    if w == 0:
        return float(rho)
    arg = np.clip(rho * w / (2 * c), -1.0, 1.0)
    half = np.arcsin(arg)
    if long_branch:
        half = np.pi - half
    return float(2 * half / w)
