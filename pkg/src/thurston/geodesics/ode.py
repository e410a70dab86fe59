"""Fixed-step RK4 integration of the geodesic equations.

Nil, Sol, S2xR and H2xR are integrated in affine model coordinates.
SL2R is integrated in the hyperboloid chart ``(r, theta, phi)``; since the
polar chart is singular at ``r = 0`` the integrator switches to the
regular chart ``(u1, u2, phi)`` with ``u = r (cos theta, sin theta)``
while ``r`` is below ``SL2R_SWITCH_RADIUS``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ..model import SpaceId, affine
from .exp import GeodesicParams
from .metric import cartesian_metric, sl2r_from_chart

__all__ = [
    "GeodesicArc",
    "geodesic_ode",
    "christoffel_fd",
    "nil_acceleration",
    "sol_acceleration",
    "sl2r_polar_acceleration",
    "sl2r_regular_metric",
    "SL2R_SWITCH_RADIUS",
]

SL2R_SWITCH_RADIUS = 0.05


@dataclass
class GeodesicArc:
    start: np.ndarray
    samples: np.ndarray
    stations: np.ndarray
    params: Optional[GeodesicParams] = None
    chart_states: Optional[np.ndarray] = field(default=None, repr=False)

    def affine_samples(self) -> np.ndarray:
        return affine(self.samples)

    def write_csv(self, path) -> None:
        from ..io import fmt

        xyz = self.affine_samples()
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["s", "x", "y", "z"])
            for s, p in zip(self.stations, xyz):
                w.writerow([fmt(s), fmt(p[0]), fmt(p[1]), fmt(p[2])])


# ------------------------------------------------------ accelerations

def christoffel_fd(metric_fn: Callable[[np.ndarray], np.ndarray], x, h: float = 1e-6) -> np.ndarray:
    """Christoffel symbols ``G[k, i, j]`` from central differences of the metric."""
    x = np.asarray(x, dtype=float)
    n = x.size
    dg = np.empty((n, n, n))  # dg[l, i, j] = d_l g_ij
    for l in range(n):
        e = np.zeros(n)
        e[l] = h
        dg[l] = (metric_fn(x + e) - metric_fn(x - e)) / (2 * h)
    ginv = np.linalg.inv(metric_fn(x))
    # Gamma_{lij} = (d_i g_lj + d_j g_li - d_l g_ij) / 2
    first = 0.5 * (np.transpose(dg, (1, 0, 2)) + np.transpose(dg, (1, 2, 0)) - dg)
    return np.einsum("kl,lij->kij", ginv, first)


def nil_acceleration(x, v):
    w = v[2] - x[0] * v[1]
    ax = -w * v[1]
    ay = w * v[0]
    return np.array([ax, ay, v[0] * v[1] + x[0] * ay])


def sol_acceleration(x, v):
    e2 = np.exp(2 * x[2])
    return np.array([-2 * v[0] * v[2], 2 * v[1] * v[2], e2 * v[0] ** 2 - v[1] ** 2 / e2])


def s2xr_acceleration(x, v):
    n2 = x @ x
    return 2 * (x @ v) * v / n2 - (v @ v) * x / n2


def _h2xr_metric(x):
    return cartesian_metric(SpaceId.H2xR, np.concatenate([[1.0], x])).g


def h2xr_acceleration(x, v):
    G = christoffel_fd(_h2xr_metric, x)
    return -np.einsum("kij,i,j->k", G, v, v)


def sl2r_polar_acceleration(q, v):
    """Geodesic equations in ``(r, theta, phi)``.

    The ``theta`` equation carries a minus sign; with it the system
    reproduces the closed forms of the three direction regimes.
    """
    r = q[0]
    dr, dth, dph = v
    s2r = np.sinh(2 * r)
    ar = s2r * dth * dph + 0.5 * (np.sinh(4 * r) - s2r) * dth * dth
    ath = -2 * dr / s2r * ((3 * np.cosh(2 * r) - 1) * dth + 2 * dph)
    aph = 2 * dr * np.tanh(r) * (2 * np.sinh(r) ** 2 * dth + dph)
    return np.array([ar, ath, aph])


def _sl2r_AC(r2):
    """``A = sinh^2 r / r^2`` and ``C = (sinh^2 r cosh^2 r - r^2) / r^4``."""
    if r2 < 1e-4:
        A = 1 + r2 / 3 + 2 * r2 ** 2 / 45 + r2 ** 3 / 315
        C = 4.0 / 3 + 32 * r2 / 45 + 64 * r2 ** 2 / 315
        return A, C
    r = np.sqrt(r2)
    sh2 = np.sinh(r) ** 2
    return sh2 / r2, (sh2 * np.cosh(r) ** 2 - r2) / r2 ** 2


def sl2r_regular_metric(q) -> np.ndarray:
    """SL2R metric in the chart ``(u1, u2, phi)``, smooth through ``r = 0``."""
    u1, u2 = q[0], q[1]
    A, C = _sl2r_AC(u1 * u1 + u2 * u2)
    w = np.array([-u2, u1, 0.0])
    e = np.array([0.0, 0.0, 1.0]) + A * w
    return np.diag([1.0, 1.0, 0.0]) + C * np.outer(w, w) + np.outer(e, e)


def sl2r_regular_acceleration(q, v):
    G = christoffel_fd(sl2r_regular_metric, q, h=1e-5)
    return -np.einsum("kij,i,j->k", G, v, v)


_ACCEL = {
    SpaceId.Nil: nil_acceleration,
    SpaceId.Sol: sol_acceleration,
    SpaceId.S2xR: s2xr_acceleration,
    SpaceId.H2xR: h2xr_acceleration,
}


# ------------------------------------------------------------ stepping

def _rk4(acc, x, v, h):
    k1x, k1v = v, acc(x, v)
    k2x, k2v = v + 0.5 * h * k1v, acc(x + 0.5 * h * k1x, v + 0.5 * h * k1v)
    k3x, k3v = v + 0.5 * h * k2v, acc(x + 0.5 * h * k2x, v + 0.5 * h * k2v)
    k4x, k4v = v + h * k3v, acc(x + h * k3x, v + h * k3v)
    x = x + h / 6 * (k1x + 2 * k2x + 2 * k3x + k4x)
    v = v + h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v)
    return x, v


def _renormalize(g, v):
    return v / np.sqrt(v @ g @ v)


def _polar_to_regular(q, v):
    r, th, ph = q
    c, s = np.cos(th), np.sin(th)
    u = np.array([r * c, r * s, ph])
    du = np.array([v[0] * c - r * s * v[1], v[0] * s + r * c * v[1], v[2]])
    return u, du


def _regular_to_polar(u, du):
    r = np.hypot(u[0], u[1])
    th = np.arctan2(u[1], u[0])
    dr = (u[0] * du[0] + u[1] * du[1]) / r
    dth = (u[0] * du[1] - u[1] * du[0]) / (r * r)
    return np.array([r, th, u[2]]), np.array([dr, dth, du[2]])


def _sl2r_polar_metric(q):
    r = q[0]
    s2 = np.sinh(r) ** 2
    return np.array([[1.0, 0.0, 0.0], [0.0, s2 * (s2 + np.cosh(r) ** 2), s2], [0.0, s2, 1.0]])


def _integrate_sl2r(q0, v0, s_end, step, renorm_every):
    """Returns polar states ``(r, theta, phi, dr, dtheta, dphi)`` per step."""
    n = int(np.ceil(s_end / step - 1e-12))
    h = s_end / n if n else 0.0
    q0 = np.asarray(q0, dtype=float)
    v0 = np.asarray(v0, dtype=float)
    if q0[0] < SL2R_SWITCH_RADIUS:
        # At r = 0 the base direction is theta and the base speed is dr.
        if q0[0] == 0:
            c, s = np.cos(q0[1]), np.sin(q0[1])
            x = np.array([0.0, 0.0, q0[2]])
            v = np.array([v0[0] * c, v0[0] * s, v0[2]])
        else:
            x, v = _polar_to_regular(q0, v0)
        regular = True
    else:
        x, v, regular = q0.copy(), v0.copy(), False
    out = np.empty((n + 1, 6))

    def record(i):
        if regular:
            r = np.hypot(x[0], x[1])
            if r > 0:
                qq, vv = _regular_to_polar(x, v)
            else:
                qq = np.array([0.0, q0[1], x[2]])
                vv = np.array([np.hypot(v[0], v[1]), 0.0, v[2]])
            out[i] = np.concatenate([qq, vv])
        else:
            out[i] = np.concatenate([x, v])

    record(0)
    for i in range(1, n + 1):
        if regular:
            x, v = _rk4(sl2r_regular_acceleration, x, v, h)
            if i % renorm_every == 0:
                v = _renormalize(sl2r_regular_metric(x), v)
            if np.hypot(x[0], x[1]) >= SL2R_SWITCH_RADIUS:
                x, v = _regular_to_polar(x, v)
                regular = False
                record(i)
                continue
        else:
            x, v = _rk4(sl2r_polar_acceleration, x, v, h)
            if i % renorm_every == 0:
                v = _renormalize(_sl2r_polar_metric(x), v)
            if x[0] < SL2R_SWITCH_RADIUS:
                x, v = _polar_to_regular(x, v)
                regular = True
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(v))):
            raise FloatingPointError("geodesic integration produced non-finite state")
        record(i)
    # Unwrap theta so that it varies continuously along the arc.
    out[:, 1] = np.unwrap(out[:, 1])
    return np.linspace(0.0, s_end, n + 1), out


def geodesic_ode(space, state, s_end: float, step: float = 1e-3,
                 renorm_every: int = 100, params: Optional[GeodesicParams] = None) -> GeodesicArc:
    """Integrate a unit-speed geodesic with classical RK4.

    ``state`` is ``(position, velocity)``.  For SL2R both are given in the
    hyperboloid chart ``(r, theta, phi)``; at ``r = 0`` the velocity is read
    as ``(base speed, unused, dphi)`` with ``theta`` naming the base
    direction, matching the initial values ``r = 0, dr = cos(alpha),
    dphi = sin(alpha)``.  For the other spaces position and velocity are
    affine model coordinates.
    """
    space = SpaceId.parse(space)
    if not step > 0:
        raise ValueError("step must be positive")
    if s_end < 0:
        raise ValueError("s_end must be non-negative")
    pos, vel = (np.asarray(a, dtype=float) for a in state)
    if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(vel))):
        raise ValueError("non-finite initial state")
    if space is SpaceId.SL2R:
        stations, states = _integrate_sl2r(pos, vel, s_end, step, renorm_every)
        samples = sl2r_from_chart(states[:, 0], states[:, 1], states[:, 2])
        return GeodesicArc(samples[0], samples, stations, params, states)

    acc = _ACCEL[space]
    n = int(np.ceil(s_end / step - 1e-12))
    h = s_end / n if n else 0.0
    out = np.empty((n + 1, 6))
    x, v = pos.copy(), vel.copy()
    out[0] = np.concatenate([x, v])
    for i in range(1, n + 1):
        x, v = _rk4(acc, x, v, h)
        if i % renorm_every == 0:
            v = _renormalize(cartesian_metric(space, np.concatenate([[1.0], x])).g, v)
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(v))):
            raise FloatingPointError("geodesic integration produced non-finite state")
        out[i] = np.concatenate([x, v])
    samples = np.concatenate([np.ones((n + 1, 1)), out[:, :3]], axis=1)
    return GeodesicArc(samples[0], samples, np.linspace(0.0, s_end, n + 1), params, out)
