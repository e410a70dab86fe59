"""Metric tensors, chart conversions, volume elements and angles."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..model import (ORIGINS, ImproperPointError, SpaceId, check_proper, hpoint,
                     translate_to_origin)

__all__ = [
    "MetricAtPoint",
    "metric_tensor",
    "cartesian_metric",
    "volume_element",
    "angle",
    "to_chart",
    "from_chart",
    "sl2r_chart",
    "sl2r_from_chart",
]


@dataclass(frozen=True)
class MetricAtPoint:
    g: np.ndarray
    point: np.ndarray

    def inner(self, a, b) -> float:
        return float(np.asarray(a) @ self.g @ np.asarray(b))

    def norm(self, a) -> float:
        return float(np.sqrt(self.inner(a, a)))


# ------------------------------------------------------------- charts

def sl2r_from_chart(r, theta, phi) -> np.ndarray:
    """Hyperboloid parametrization of SL2R (homogeneous, unnormalized)."""
    r, theta, phi = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (r, theta, phi)))
    ch, sh = np.cosh(r), np.sinh(r)
    return np.stack([ch * np.cos(phi), ch * np.sin(phi),
                     sh * np.cos(theta - phi), sh * np.sin(theta - phi)], axis=-1)


def sl2r_chart(p) -> np.ndarray:
    """Inverse of :func:`sl2r_from_chart` with ``phi`` in ``(-pi, pi]``."""
    p = np.asarray(p, dtype=float)
    q = -(p[..., 0] ** 2 + p[..., 1] ** 2) + p[..., 2] ** 2 + p[..., 3] ** 2
    if np.any(q >= 0):
        raise ImproperPointError("point is outside the SL2R hyperboloid solid")
    p = p / np.sqrt(-q)[..., None]
    phi = np.arctan2(p[..., 1], p[..., 0])
    r = np.arcsinh(np.hypot(p[..., 2], p[..., 3]))
    theta = np.arctan2(p[..., 3], p[..., 2]) + phi
    theta = np.mod(theta + np.pi, 2 * np.pi) - np.pi
    return np.stack([r, theta, phi], axis=-1)


def to_chart(space, p) -> np.ndarray:
    """Native chart coordinates of a homogeneous point.

    S2xR -> (t, phi, theta); H2xR -> (t, r, alpha); SL2R -> (r, theta, phi);
    Nil and Sol -> affine (x, y, z).
    """
    space = SpaceId.parse(space)
    p = np.asarray(p, dtype=float)
    if space is SpaceId.SL2R:
        return sl2r_chart(p)
    a = p[..., 1:] / p[..., :1]
    if space is SpaceId.S2xR:
        n = np.linalg.norm(a, axis=-1)
        return np.stack([np.log(n), np.arctan2(a[..., 1], a[..., 0]),
                         np.arcsin(np.clip(a[..., 2] / n, -1, 1))], axis=-1)
    if space is SpaceId.H2xR:
        m2 = a[..., 0] ** 2 - a[..., 1] ** 2 - a[..., 2] ** 2
        t = 0.5 * np.log(m2)
        r = np.arcsinh(np.hypot(a[..., 1], a[..., 2]) / np.sqrt(m2))
        return np.stack([t, r, np.arctan2(a[..., 2], a[..., 1])], axis=-1)
    return a


def from_chart(space, c) -> np.ndarray:
    """Homogeneous point from native chart coordinates (see :func:`to_chart`)."""
    space = SpaceId.parse(space)
    c = np.asarray(c, dtype=float)
    a, b, d = c[..., 0], c[..., 1], c[..., 2]
    if space is SpaceId.SL2R:
        return sl2r_from_chart(a, b, d)
    one = np.ones_like(a)
    if space is SpaceId.S2xR:
        e = np.exp(a)
        return np.stack([one, e * np.cos(b) * np.cos(d), e * np.sin(b) * np.cos(d),
                         e * np.sin(d)], axis=-1)
    if space is SpaceId.H2xR:
        e = np.exp(a)
        return np.stack([one, e * np.cosh(b), e * np.sinh(b) * np.cos(d),
                         e * np.sinh(b) * np.sin(d)], axis=-1)
    return np.stack([one, a, b, d], axis=-1)


# ------------------------------------------------------------ metrics

def _native_metric(space: SpaceId, c) -> np.ndarray:
    if space is SpaceId.S2xR:
        _, _, theta = c
        return np.diag([1.0, np.cos(theta) ** 2, 1.0])
    if space is SpaceId.H2xR:
        _, r, _ = c
        return np.diag([1.0, 1.0, np.sinh(r) ** 2])
    if space is SpaceId.SL2R:
        r = c[0]
        s2 = np.sinh(r) ** 2
        return np.array([[1.0, 0.0, 0.0],
                         [0.0, s2 * (s2 + np.cosh(r) ** 2), s2],
                         [0.0, s2, 1.0]])
    return cartesian_metric(space, hpoint(c)).g


def cartesian_metric(space, p) -> MetricAtPoint:
    """Metric tensor in affine model coordinates at the homogeneous point ``p``."""
    space = SpaceId.parse(space)
    p = check_proper(space, p)
    x, y, z = p[1:] / p[0]
    if space is SpaceId.S2xR:
        g = np.eye(3) / (x * x + y * y + z * z)
    elif space is SpaceId.H2xR:
        g = np.array([[x * x + y * y + z * z, -2 * x * y, -2 * x * z],
                      [-2 * x * y, x * x + y * y - z * z, 2 * y * z],
                      [-2 * x * z, 2 * y * z, x * x - y * y + z * z]])
        g /= (-x * x + y * y + z * z) ** 2
    elif space is SpaceId.Nil:
        g = np.array([[1.0, 0.0, 0.0],
                      [0.0, 1.0 + x * x, -x],
                      [0.0, -x, 1.0]])
    elif space is SpaceId.Sol:
        g = np.diag([np.exp(2 * z), np.exp(-2 * z), 1.0])
    else:
        # Pull back the identity at the origin through a translation.
        J = translate_to_origin(space, p).affine_jacobian(p)
        g = J @ J.T
    return MetricAtPoint(g, p[1:] / p[0])


def metric_tensor(space, coords, chart: str = "native") -> MetricAtPoint:
    """Metric tensor at a point.

    With ``chart="native"`` the coordinates and the tensor are in the
    polar/product chart of the space: ``(t, phi, theta)`` for S2xR,
    ``(t, r, alpha)`` for H2xR, ``(r, theta, phi)`` for SL2R and the
    Cartesian model coordinates for Nil and Sol.  With ``chart="model"``
    both are in affine model coordinates.
    """
    space = SpaceId.parse(space)
    c = np.asarray(coords, dtype=float)
    if chart == "model":
        return cartesian_metric(space, hpoint(c) if c.shape == (3,) else c)
    if chart != "native":
        raise ValueError(f"unknown chart {chart!r}")
    if space is SpaceId.H2xR and c[1] < 0:
        raise ImproperPointError("polar radius must be non-negative")
    if space is SpaceId.SL2R and c[0] < 0:
        raise ImproperPointError("polar radius must be non-negative")
    return MetricAtPoint(_native_metric(space, c), c)


def volume_element(space, coords) -> float:
    """``sqrt(det g)`` in the native chart (see :func:`metric_tensor`)."""
    space = SpaceId.parse(space)
    c = np.asarray(coords, dtype=float)
    if space is SpaceId.S2xR:
        return float(np.abs(np.cos(c[..., 2])))
    if space is SpaceId.H2xR:
        return float(np.sinh(c[..., 1]))
    if space is SpaceId.SL2R:
        return float(0.5 * np.sinh(2 * c[..., 0]))
    return 1.0


def angle(space, p, tu, tv) -> float:
    """Angle between two tangent vectors (model coordinates) at ``p``."""
    tu = np.asarray(tu, dtype=float)
    tv = np.asarray(tv, dtype=float)
    if not np.any(tu) or not np.any(tv):
        raise ValueError("zero tangent vector")
    g = cartesian_metric(space, p if p is not None else ORIGINS[SpaceId.parse(space)]).g
    c = (tu @ g @ tv) / np.sqrt((tu @ g @ tu) * (tv @ g @ tv))
    return float(np.arccos(np.clip(c, -1.0, 1.0)))
