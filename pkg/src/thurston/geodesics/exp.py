"""Exponential maps from the origin of each space.

Direction conventions (``dir1``, ``dir2``):

* S2xR, H2xR: ``(u, v)``; ``v`` is the elevation towards the fibre.
* Nil, Sol: ``(alpha, theta)``; the initial velocity is
  ``(cos theta cos alpha, cos theta sin alpha, sin theta)``.
* SL2R: ``(alpha, lam)``; ``alpha`` is the fibre elevation of the closed
  forms and ``lam`` the base azimuth, giving the velocity
  ``(sin alpha, cos alpha cos lam, cos alpha sin lam)`` at the origin.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from ..model import SpaceId
from .metric import sl2r_from_chart

__all__ = [
    "GeodesicParams",
    "exp_origin",
    "exp_origin_many",
    "initial_tangent",
    "nil_exp",
    "sl2r_closed_form",
    "s2xr_exp",
    "h2xr_exp",
    "sol_exp",
    "sol_rhs",
]


@dataclass(frozen=True)
class GeodesicParams:
    space: SpaceId
    dir1: float
    dir2: float
    s: float

    def __post_init__(self):
        object.__setattr__(self, "space", SpaceId.parse(self.space))
        if not (self.s >= 0):
            raise ValueError("arc length must be non-negative")

    def with_s(self, s: float) -> "GeodesicParams":
        return GeodesicParams(self.space, self.dir1, self.dir2, s)


def initial_tangent(space, dir1, dir2) -> np.ndarray:
    """Unit tangent at the origin in model coordinates (metric is identity there)."""
    space = SpaceId.parse(space)
    a, b = float(dir1), float(dir2)
    if space in (SpaceId.S2xR, SpaceId.H2xR):
        return np.array([np.sin(b), np.cos(b) * np.cos(a), np.cos(b) * np.sin(a)])
    if space is SpaceId.SL2R:
        return np.array([np.sin(a), np.cos(a) * np.cos(b), np.cos(a) * np.sin(b)])
    return np.array([np.cos(b) * np.cos(a), np.cos(b) * np.sin(a), np.sin(b)])


def s2xr_exp(u, v, s) -> np.ndarray:
    u, v, s = np.broadcast_arrays(*(np.asarray(w, dtype=float) for w in (u, v, s)))
    e = np.exp(s * np.sin(v))
    w = s * np.cos(v)
    return np.stack([np.ones_like(e), e * np.cos(w), e * np.sin(w) * np.cos(u),
                     e * np.sin(w) * np.sin(u)], axis=-1)


def h2xr_exp(u, v, s) -> np.ndarray:
    u, v, s = np.broadcast_arrays(*(np.asarray(w, dtype=float) for w in (u, v, s)))
    e = np.exp(s * np.sin(v))
    w = s * np.cos(v)
    return np.stack([np.ones_like(e), e * np.cosh(w), e * np.sinh(w) * np.cos(u),
                     e * np.sinh(w) * np.sin(u)], axis=-1)


def _sinc(u):
    return np.sinc(np.asarray(u) / np.pi)


def _tail(u):
    """``(u - sin u) / u^2`` without cancellation near zero."""
    u = np.asarray(u, dtype=float)
    small = np.abs(u) < 1e-3
    safe = np.where(small, 1.0, u)
    exact = (safe - np.sin(safe)) / safe ** 2
    series = u / 6 - u ** 3 / 120 + u ** 5 / 5040
    return np.where(small, series, exact)


def nil_exp(alpha, theta, s) -> np.ndarray:
    """Affine Nil coordinates of the geodesic from the origin.

    Uses ``2c/w sin(wt/2) = c t sinc(wt/2)`` and a series for the fibre
    term so that ``w = 0`` (straight lines) and ``|w| = 1`` (the fibre)
    are covered by the same expressions.
    """
    alpha, theta, s = np.broadcast_arrays(*(np.asarray(w, dtype=float) for w in (alpha, theta, s)))
    c, w = np.cos(theta), np.sin(theta)
    half = 0.5 * w * s
    rho = c * s * _sinc(half)
    x = rho * np.cos(half + alpha)
    y = rho * np.sin(half + alpha)
    z_lin = w * s + 0.5 * c * c * s * s * _tail(w * s)
    z = z_lin + 0.5 * x * y
    return np.stack([x, y, z], axis=-1)


def sl2r_closed_form(s, alpha):
    """Polar ``(r, theta, phi)`` along the SL2R geodesic with azimuth zero.

    Valid for ``alpha`` in ``[-pi/2, pi/2]``; the three regimes are selected
    by ``|alpha|`` against ``pi/4``.  The fibre-like ``theta`` is taken on
    the continuous branch, so it keeps decreasing past ``s k = pi/2``.
    """
    s, alpha = np.broadcast_arrays(np.asarray(s, dtype=float), np.asarray(alpha, dtype=float))
    ca, sa = np.cos(alpha), np.sin(alpha)
    c2 = np.cos(2 * alpha)
    k = np.sqrt(np.abs(c2))
    light = k < 1e-7
    hyp = (c2 > 0) & ~light
    fib = (c2 < 0) & ~light
    ks = np.where(light, 1.0, k)
    # H2-like and fibre-like sinh/sin ratios, light limit s.
    sh = np.where(hyp, np.sinh(ks * s) / ks, np.where(fib, np.sin(ks * s) / ks, s))
    r = np.arcsinh(ca * sh)
    with np.errstate(over="ignore"):
        th_h = -np.arctan(sa * np.tanh(ks * s) / ks)
    th_f = -np.arctan2(sa * np.sin(ks * s), ks * np.cos(ks * s))
    th_l = -np.arctan(sa * s)
    theta = np.where(hyp, th_h, np.where(fib, th_f, th_l))
    phi = 2 * sa * s + theta
    return r, theta, phi


def _sl2r_exp(alpha, lam, s) -> np.ndarray:
    r, th, ph = sl2r_closed_form(s, alpha)
    return sl2r_from_chart(r, th + np.asarray(lam, dtype=float), ph)


def sol_rhs(_s, y):
    x, yy, z, vx, vy, vz = y
    e2 = np.exp(2 * z)
    return [vx, vy, vz, -2 * vx * vz, 2 * vy * vz, e2 * vx * vx - vy * vy / e2]


def sol_exp(alpha, theta, s, rtol=1e-12, atol=1e-13, dense=False):
    """Integrate the Sol geodesic equations from the origin."""
    v0 = initial_tangent(SpaceId.Sol, alpha, theta)
    y0 = np.concatenate([np.zeros(3), v0])
    if s == 0:
        return np.zeros(3) if not dense else None
    sol = solve_ivp(sol_rhs, (0.0, float(s)), y0, method="DOP853", rtol=rtol, atol=atol,
                    dense_output=dense)
    if not sol.success:
        raise RuntimeError(f"Sol integration failed: {sol.message}")
    if dense:
        return sol.sol
    return sol.y[:3, -1]


def exp_origin(params: GeodesicParams) -> np.ndarray:
    """Homogeneous point at arc length ``s`` from the space's origin."""
    sp = params.space
    a, b, s = params.dir1, params.dir2, params.s
    if sp is SpaceId.S2xR:
        return s2xr_exp(a, b, s)
    if sp is SpaceId.H2xR:
        return h2xr_exp(a, b, s)
    if sp is SpaceId.Nil:
        return np.concatenate([[1.0], nil_exp(a, b, s)])
    if sp is SpaceId.SL2R:
        return _sl2r_exp(a, b, s)
    return np.concatenate([[1.0], sol_exp(a, b, s)])


def exp_origin_many(space, dir1, dir2, s) -> np.ndarray:
    """Vectorized :func:`exp_origin` over broadcast parameter arrays."""
    space = SpaceId.parse(space)
    if space is SpaceId.S2xR:
        return s2xr_exp(dir1, dir2, s)
    if space is SpaceId.H2xR:
        return h2xr_exp(dir1, dir2, s)
    if space is SpaceId.SL2R:
        return _sl2r_exp(dir1, dir2, s)
    if space is SpaceId.Nil:
        xyz = nil_exp(dir1, dir2, s)
        return np.concatenate([np.ones(xyz.shape[:-1] + (1,)), xyz], axis=-1)
    d1, d2, ss = np.broadcast_arrays(*(np.asarray(w, dtype=float) for w in (dir1, dir2, s)))
    out = np.empty(d1.shape + (4,))
    for idx in np.ndindex(d1.shape):
        out[idx] = exp_origin(GeodesicParams(space, d1[idx], d2[idx], ss[idx]))
    return out
