"""Distance solvers: minimal geodesics between two points.

Every solver pulls the first point to the origin with an isometry and then
inverts the exponential map there.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import brentq, least_squares

from ..model import SpaceId, affine, check_proper, translate_to_origin
from .exp import GeodesicParams, exp_origin, sl2r_closed_form, sol_exp
from .metric import sl2r_chart

__all__ = [
    "DistanceError",
    "AmbiguousGeodesicError",
    "distance",
    "distance_value",
    "inverse_origin",
    "s2xr_distance",
    "h2xr_distance",
    "nil_inverse_origin",
    "sl2r_inverse_origin",
    "sol_inverse_origin",
]

ROUND_TRIP_TOL = 1e-9


class DistanceError(RuntimeError):
    """The solver did not reach the target; ``residual`` holds the miss."""

    def __init__(self, message, residual=np.inf):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


class AmbiguousGeodesicError(ValueError):
    """More than one minimal geodesic joins the points (antipodal base feet)."""

    def __init__(self, message, d):
        super().__init__(message)
        self.distance = d


# ------------------------------------------------------ product spaces

def _product_parts(space, P, Q):
    """Base angle ``omega`` and fibre shift ``dt`` between two points."""
    p = np.asarray(P, dtype=float)
    q = np.asarray(Q, dtype=float)
    a, b = p[..., 1:] / p[..., :1], q[..., 1:] / q[..., :1]
    if space is SpaceId.S2xR:
        na, nb = np.linalg.norm(a, axis=-1), np.linalg.norm(b, axis=-1)
        cross = np.linalg.norm(np.cross(a, b), axis=-1)
        omega = np.arctan2(cross, np.sum(a * b, axis=-1))
    else:
        sig = np.array([1.0, -1.0, -1.0])
        na = np.sqrt(np.sum(a * a * sig, axis=-1))
        nb = np.sqrt(np.sum(b * b * sig, axis=-1))
        c = np.sum(a * b * sig, axis=-1) / (na * nb)
        omega = np.arccosh(np.maximum(c, 1.0))
    return omega, np.log(nb / na)


def s2xr_distance(P, Q):
    """Closed-form S2xR distance ``sqrt(omega^2 + dt^2)`` (vectorized)."""
    omega, dt = _product_parts(SpaceId.S2xR, P, Q)
    return np.hypot(omega, dt)


def h2xr_distance(P, Q):
    omega, dt = _product_parts(SpaceId.H2xR, P, Q)
    return np.hypot(omega, dt)


def _product_inverse(space, q):
    a = affine(q)
    if space is SpaceId.S2xR:
        n = np.linalg.norm(a)
        lateral = np.hypot(a[1], a[2])
        omega = np.arctan2(lateral, a[0])
        if a[0] < 0 and lateral <= 1e-12 * n:
            d = float(np.hypot(np.pi, np.log(n)))
            raise AmbiguousGeodesicError("antipodal base points: the minimal geodesic is not unique", d)
    else:
        n = np.sqrt(a[0] ** 2 - a[1] ** 2 - a[2] ** 2)
        lateral = np.hypot(a[1], a[2])
        omega = np.arcsinh(lateral / n)
    dt = np.log(n)
    s = float(np.hypot(omega, dt))
    u = float(np.arctan2(a[2], a[1])) if lateral > 0 else 0.0
    v = float(np.arctan2(dt, omega)) if s > 0 else 0.0
    return GeodesicParams(space, u, v, s)


# ----------------------------------------------------------------- Nil

def _nil_height(beta, rho):
    """Linear-chart height ``z' = z - xy/2`` reached with half-turn ``beta``."""
    sb = np.sin(beta)
    return 2 * beta + rho * rho * (2 * beta - np.sin(2 * beta)) / (8 * sb * sb)


def nil_inverse_origin(target) -> GeodesicParams:
    """Minimal geodesic from the Nil origin to affine ``target``.

    Fibre projections of Nil geodesics are circles; ``beta = w s / 2`` is
    the half-angle swept on the circle.  For a fixed cylinder radius the
    linear-chart height is increasing in ``beta`` on ``(0, pi)``, so the
    minimal geodesic (which turns less than once) is found by bracketing.
    """
    x, y, z = (float(v) for v in target)
    zl = z - 0.5 * x * y
    rho = np.hypot(x, y)
    scale = 1.0 + abs(zl)
    if rho <= 1e-15 * scale:
        if zl == 0:
            return GeodesicParams(SpaceId.Nil, 0.0, 0.0, 0.0)
        return GeodesicParams(SpaceId.Nil, 0.0, np.copysign(np.pi / 2, zl), abs(zl))
    h = abs(zl)
    psi = np.arctan2(y, x)
    if h == 0:
        return GeodesicParams(SpaceId.Nil, psi, 0.0, rho)
    hi = np.pi / 2
    while _nil_height(hi, rho) < h:
        hi = 0.5 * (hi + np.pi)
        if np.pi - hi < 1e-15:
            break
    lo = 0.0
    beta = brentq(lambda b: (_nil_height(b, rho) - h) if b > 0 else -h, lo, hi,
                  xtol=1e-16, rtol=4 * np.finfo(float).eps, maxiter=500)
    sb = np.sin(beta)
    theta = np.arctan2(2 * sb, rho)
    # 2 beta / sin(theta), written to stay finite as beta -> 0.
    s = float(np.hypot(2 * sb, rho) / np.sinc(beta / np.pi))
    if zl > 0:
        alpha = psi - beta
    else:
        theta = -theta
        alpha = psi + beta
    alpha = (alpha + np.pi) % (2 * np.pi) - np.pi
    return GeodesicParams(SpaceId.Nil, float(alpha), float(theta), float(s))


# ---------------------------------------------------------------- SL2R

def _wrap(a):
    return (a + np.pi) % (2 * np.pi) - np.pi


def _sl2r_arc_for_radius(alpha, rq, branch):
    """Arc length reaching polar radius ``rq`` for elevation ``alpha``.

    ``branch`` 0 is the first arrival; branch 1 is the second arrival of
    fibre-like geodesics, whose radius turns back after ``s k = pi/2``.
    NaN marks elevations that never reach ``rq`` on that branch.
    """
    alpha = np.asarray(alpha, dtype=float)
    c2 = np.cos(2 * alpha)
    k = np.sqrt(np.abs(c2))
    kk = np.where(k > 0, k, 1.0)
    m = np.sinh(rq) / np.cos(alpha)
    km = k * m
    light = k < 1e-7
    reach = np.arcsin(np.minimum(km, 1.0))
    ok = km <= 1 + 1e-12
    if branch == 0:
        s_h = np.arcsinh(km) / kk
        s_f = np.where(ok, reach / kk, np.nan)
        return np.where(light, m, np.where(c2 > 0, s_h, s_f))
    s_f = np.where(ok, (np.pi - reach) / kk, np.nan)
    return np.where((c2 < 0) & ~light, s_f, np.nan)


def sl2r_inverse_origin(q, n_scan: int = 721) -> GeodesicParams:
    """Minimal geodesic from the SL2R origin to the homogeneous point ``q``.

    The polar radius fixes ``s`` as a function of the elevation ``alpha``;
    the fibre coordinate then gives one scalar equation in ``alpha``, solved
    by scanning and bracketing.  The azimuth follows from ``theta``.
    """
    rq, thq, phq = sl2r_chart(q)
    if rq < 1e-14:
        if abs(phq) < 1e-300:
            return GeodesicParams(SpaceId.SL2R, 0.0, 0.0, 0.0)
        return GeodesicParams(SpaceId.SL2R, float(np.copysign(np.pi / 2, phq)), 0.0, float(abs(phq)))
    eps = 1e-9
    grid = np.linspace(-np.pi / 2 + eps, np.pi / 2 - eps, n_scan)
    # Fibre-like elevations reach rq only up to |alpha| = a_max, where both
    # branches meet; roots just inside that edge need a grid point on it.
    S = np.sinh(rq) ** 2
    a_max = float(np.arccos(np.sqrt(S / (1 + 2 * S))))
    grid = np.unique(np.concatenate([grid, [-a_max, a_max]]))
    n_scan = len(grid)
    best = None
    for branch in (0, 1):
        def resid(a):
            s = _sl2r_arc_for_radius(a, rq, branch)
            _, _, ph = sl2r_closed_form(s, a)
            return _wrap(ph - phq), s

        def f(a):
            return float(resid(a)[0])

        vals, ss = resid(grid)
        for i in range(n_scan - 1):
            f0, f1 = vals[i], vals[i + 1]
            if not (np.isfinite(f0) and np.isfinite(f1)):
                continue
            if f0 == 0:
                roots = [grid[i]]
            elif f0 * f1 < 0 and abs(f0 - f1) < np.pi:
                roots = [brentq(f, grid[i], grid[i + 1], xtol=1e-15,
                                rtol=4 * np.finfo(float).eps, maxiter=200)]
            else:
                continue
            for a in roots:
                s = float(resid(a)[1])
                if best is None or s < best[1]:
                    best = (float(a), s)
    if best is None:
        raise DistanceError("no SL2R geodesic found for the target")
    a, s = best
    _, th, _ = sl2r_closed_form(s, a)
    lam = float(_wrap(thq - th))
    return GeodesicParams(SpaceId.SL2R, a, lam, s)


# ----------------------------------------------------------------- Sol

def sol_inverse_origin(target, n_grid: int = 8, n_refine: int = 4) -> GeodesicParams:
    """Shooting solve for the Sol geodesic from the origin to ``target``."""
    target = np.asarray(target, dtype=float)
    L = float(np.linalg.norm(target))
    if L == 0:
        return GeodesicParams(SpaceId.Sol, 0.0, 0.0, 0.0)

    def resid(p):
        return sol_exp(p[0], p[1], max(p[2], 0.0), rtol=1e-12, atol=1e-14) - target

    seeds = [np.array([np.arctan2(target[1], target[0]),
                       np.arcsin(np.clip(target[2] / L, -1, 1)), L])]
    grid = []
    for a in np.linspace(-np.pi, np.pi, n_grid, endpoint=False):
        for t in np.linspace(-np.pi / 2, np.pi / 2, n_grid + 2)[1:-1]:
            p = np.array([a, t, L])
            grid.append((np.linalg.norm(resid(p)), p))
    grid.sort(key=lambda e: e[0])
    seeds += [p for _, p in grid[:n_refine]]
    best = None
    for seed in seeds:
        sol = least_squares(resid, seed, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15,
                            max_nfev=400)
        miss = float(np.linalg.norm(sol.fun))
        if miss < ROUND_TRIP_TOL and sol.x[2] > 0:
            if best is None or sol.x[2] < best[2] - 1e-12:
                best = sol.x.copy()
    if best is None:
        raise DistanceError("Sol shooting did not converge", miss)
    a, t, s = best
    # Fold into the canonical direction ranges.
    if t > np.pi / 2 or t < -np.pi / 2:
        t = np.pi - t if t > 0 else -np.pi - t
        a = a + np.pi
    a = (a + np.pi) % (2 * np.pi) - np.pi
    return GeodesicParams(SpaceId.Sol, float(a), float(t), float(s))


# ---------------------------------------------------------- dispatch

def inverse_origin(space, q) -> GeodesicParams:
    """Parameters of the minimal geodesic from the origin of ``space`` to ``q``."""
    space = SpaceId.parse(space)
    q = np.asarray(q, dtype=float)
    if space in (SpaceId.S2xR, SpaceId.H2xR):
        return _product_inverse(space, q)
    if space is SpaceId.Nil:
        return nil_inverse_origin(affine(q))
    if space is SpaceId.SL2R:
        return sl2r_inverse_origin(q)
    return sol_inverse_origin(affine(q))


def _miss(space, params, q) -> float:
    p = exp_origin(params)
    if space is SpaceId.SL2R:
        p = p / np.linalg.norm(p)
        q = q / np.linalg.norm(q)
        return float(np.abs(p - q).max())
    return float(np.abs(affine(p) - affine(q)).max())


def distance(space, P, Q):
    """Geodesic distance and the parameters of the connecting geodesic.

    The parameters describe the geodesic from the origin after ``P`` has
    been moved there by :func:`translate_to_origin`, so
    ``exp_origin(params)`` reproduces the image of ``Q``.
    """
    space = SpaceId.parse(space)
    P = check_proper(space, P)
    Q = check_proper(space, Q)
    if np.array_equal(P / np.linalg.norm(P), Q / np.linalg.norm(Q)):
        return 0.0, GeodesicParams(space, 0.0, 0.0, 0.0)
    T = translate_to_origin(space, P)
    q = T.apply(Q)
    params = inverse_origin(space, q)
    miss = _miss(space, params, q)
    if miss > ROUND_TRIP_TOL * max(1.0, float(np.abs(affine(q)).max()) if space is not SpaceId.SL2R else 1.0):
        raise DistanceError(f"{space.value} distance solve missed the target", miss)
    return params.s, params


def distance_value(space, P, Q) -> float:
    """Distance only; closed form for the product spaces."""
    space = SpaceId.parse(space)
    if space is SpaceId.S2xR:
        return float(s2xr_distance(check_proper(space, P), check_proper(space, Q)))
    if space is SpaceId.H2xR:
        return float(h2xr_distance(check_proper(space, P), check_proper(space, Q)))
    return distance(space, P, Q)[0]
