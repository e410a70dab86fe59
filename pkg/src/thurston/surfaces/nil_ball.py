"""Affine convexity of Nil geodesic balls."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..geodesics.nil import NIL_SPHERE_MAX_RADIUS, nil_sphere_cross_section

__all__ = ["ConvexityReport", "nil_ball_convexity_check", "nil_pole_curvature"]


@dataclass(frozen=True)
class ConvexityReport:
    convex: bool
    max_violation: float
    worst_theta: float

    def as_dict(self):
        return {"convex": self.convex, "max_violation": self.max_violation,
                "worst_theta": self.worst_theta}


def nil_pole_curvature(R: float) -> float:
    """Curvature of the upper profile at the pole, ``-Z_XX = cot(R/2) / 2``."""
    return 0.5 / np.tan(R / 2)


def nil_ball_convexity_check(R: float, n: int = 4000, tol: float = 1e-9) -> ConvexityReport:
    """Whether the Nil ball of radius ``R`` is convex in the model's affine sense.

    In the linear chart ``z' = z - xy/2`` the sphere is a surface of
    revolution whose upper half is the graph of ``Z(rho)``, built from the
    profile ``(X(theta), Z(theta))``.  Back in model coordinates the top is
    ``z = Z(rho) + xy/2``, whose Hessian has largest eigenvalue
    ``max(Z'', Z'/rho) + 1/2`` (the ``xy`` term adds ``+-1/2`` along the
    diagonals and every radial direction occurs).  The body is convex
    exactly when this is ``<= 0`` along the whole profile and the profile is
    a graph (``X`` decreasing in ``theta``); the lower half follows by the
    symmetry ``(x, y, z) -> (y, x, -z)``.

    The reported violation is the maximum of that eigenvalue; profile
    samples where ``X`` fails to decrease count as infinite violation.
    """
    if not (0 < R <= NIL_SPHERE_MAX_RADIUS):
        raise ValueError(f"R must lie in (0, 2*pi]; got {R}")
    th = np.linspace(1e-4, np.pi / 2 - 1e-3, n)
    h1, h2 = 1e-4, 1e-3
    X0, Z0 = nil_sphere_cross_section(R, th)
    Xp, Zp = nil_sphere_cross_section(R, th + h1)
    Xm, Zm = nil_sphere_cross_section(R, th - h1)
    X1, Z1 = (Xp - Xm) / (2 * h1), (Zp - Zm) / (2 * h1)
    Xp, Zp = nil_sphere_cross_section(R, th + h2)
    Xm, Zm = nil_sphere_cross_section(R, th - h2)
    X2, Z2 = (Xp - 2 * X0 + Xm) / h2 ** 2, (Zp - 2 * Z0 + Zm) / h2 ** 2

    graph = X1 < 0
    with np.errstate(divide="ignore", invalid="ignore"):
        zx = Z1 / X1
        zxx = (Z2 * X1 - Z1 * X2) / X1 ** 3
        v = np.maximum(zxx, zx / X0) + 0.5
    v = np.where(graph & np.isfinite(v), v, np.inf)
    v = np.append(v, 0.5 - nil_pole_curvature(R))
    th = np.append(th, np.pi / 2)
    k = int(np.argmax(v))
    worst = float(v[k])
    return ConvexityReport(bool(worst <= tol), worst, float(th[k]))
