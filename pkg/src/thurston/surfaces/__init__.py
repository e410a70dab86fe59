"""Apollonius surfaces, geodesic sphere meshes and triangle surfaces."""

from .apollonius import (ApolloniusSpec, SurfacePoint, SurfacePointError, TieWarning,
                         apollonius_residual, apollonius_residual_fn, triangle_surface_grid,
                         triangle_surface_point, triangle_surface_report)
from .mesh import (SPHERE_RADIUS_LIMITS, ChartWarning, SphereRangeError, TriMesh, check_sphere_radius,
                   find_self_intersections, isosurface_mesh, sphere_mesh, triangles_intersect)
from .nil_ball import ConvexityReport, nil_ball_convexity_check, nil_pole_curvature

__all__ = [
    "ApolloniusSpec", "SurfacePoint", "SurfacePointError", "TieWarning", "apollonius_residual",
    "apollonius_residual_fn", "triangle_surface_grid", "triangle_surface_point",
    "triangle_surface_report", "SPHERE_RADIUS_LIMITS", "ChartWarning", "SphereRangeError", "TriMesh",
    "check_sphere_radius", "find_self_intersections", "isosurface_mesh", "sphere_mesh",
    "triangles_intersect", "ConvexityReport", "nil_ball_convexity_check", "nil_pole_curvature",
]
