"""Apollonius surfaces of the product geometries and the triangle surface.

The implicit equation is evaluated in model coordinates: for S2xR all
quadratic forms are Euclidean and the angle is an arccos, for H2xR they are
Lorentzian and the angle is an arccosh.  Up to the factor 4 each side is a
squared distance, so the residual has the sign of ``d(P1, X) - lambda d(X, P2)``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from ..geodesics import h2xr_distance, s2xr_distance
from ..model import SpaceId, affine, check_proper

__all__ = [
    "ApolloniusSpec",
    "apollonius_residual",
    "apollonius_residual_fn",
    "SurfacePointError",
    "TieWarning",
    "SurfacePoint",
    "triangle_surface_point",
    "triangle_surface_report",
    "triangle_surface_grid",
]

BRANCH_SLACK = 1e-12
_SIG = {SpaceId.S2xR: np.array([1.0, 1.0, 1.0]), SpaceId.H2xR: np.array([1.0, -1.0, -1.0])}


@dataclass(frozen=True)
class ApolloniusSpec:
    space: SpaceId
    P1: np.ndarray
    P2: np.ndarray
    lam: float

    def __post_init__(self):
        space = SpaceId.parse(self.space)
        if space not in _SIG:
            raise ValueError("Apollonius surfaces are implemented for S2xR and H2xR only")
        P1, P2 = check_proper(space, self.P1), check_proper(space, self.P2)
        if np.allclose(affine(P1), affine(P2), rtol=0, atol=1e-14):
            raise ValueError("P1 and P2 must be distinct")
        if not self.lam >= 0:
            raise ValueError("the ratio lambda must be non-negative")
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "P1", P1)
        object.__setattr__(self, "P2", P2)


def _omega(space: SpaceId, c, strict: bool):
    """Principal-branch angle with slack clamping of the argument."""
    if space is SpaceId.S2xR:
        bad = (c > 1 + BRANCH_SLACK) | (c < -1 - BRANCH_SLACK)
        out = np.arccos(np.clip(c, -1.0, 1.0))
    else:
        bad = c < 1 - BRANCH_SLACK
        out = np.arccosh(np.maximum(c, 1.0))
    if np.any(bad):
        if strict:
            raise ValueError("angle argument outside its principal domain")
        out = np.where(bad, np.nan, out)
    return out


def _side(space: SpaceId, p, x, nx2, strict: bool):
    sig = _SIG[space]
    np2 = np.sum(sig * p * p)
    c = (x @ (sig * p)) / (np.sqrt(np2) * np.sqrt(nx2))
    return 4 * _omega(space, c, strict) ** 2 + np.log(np2 / nx2) ** 2


def apollonius_residual(spec: ApolloniusSpec, X, strict: bool = True):
    """LHS - RHS of the implicit Apollonius equation at ``X``.

    ``X`` is an affine point (or an ``(N, 3)`` array of them; homogeneous
    ``(N, 4)`` input is also accepted).  ``lambda = inf`` uses
    ``-[d-term of P2]``, whose zero set is ``P2``.  With ``strict=False``
    points outside the space's domain give NaN instead of raising.
    """
    space = spec.space
    X = np.asarray(X, dtype=float)
    if X.shape[-1] == 4:
        X = affine(X)
    x = np.atleast_2d(X)
    sig = _SIG[space]
    nx2 = np.sum(sig * x * x, axis=1)
    if space is SpaceId.S2xR:
        improper = nx2 <= 0
    else:
        improper = (nx2 <= 0) | (x[:, 0] <= 0)
    if np.any(improper):
        if strict:
            raise ValueError("X is not a proper point of the space")
        nx2 = np.where(improper, np.nan, nx2)
    a, d = affine(spec.P1), affine(spec.P2)
    with np.errstate(invalid="ignore"):
        if np.isinf(spec.lam):
            out = -_side(space, d, x, nx2, strict)
        else:
            out = _side(space, a, x, nx2, strict)
            if spec.lam > 0:
                out = out - spec.lam ** 2 * _side(space, d, x, nx2, strict)
    return float(out[0]) if X.ndim == 1 else out


def apollonius_residual_fn(spec: ApolloniusSpec):
    """Vectorized residual for :func:`isosurface_mesh` (NaN off the domain)."""
    return lambda pts: apollonius_residual(spec, pts, strict=False)


# ------------------------------------------------------- triangle surface

class SurfacePointError(RuntimeError):
    pass


class TieWarning(UserWarning):
    pass


@dataclass
class SurfacePoint:
    point: np.ndarray
    distance_to_a0: float
    residuals: tuple
    tie: bool = False
    candidates: list = field(default_factory=list)

    def as_dict(self):
        return {"point": list(affine(self.point)), "distance_to_a0": self.distance_to_a0,
                "residuals": list(self.residuals), "tie": self.tie}


def _dist_fn(space: SpaceId):
    return s2xr_distance if space is SpaceId.S2xR else h2xr_distance


def _to_point(space: SpaceId, u):
    """Unconstrained parameters to homogeneous points.

    S2xR uses affine coordinates directly; H2xR uses ``e^t (sqrt(1 + y^2 +
    z^2), y, z)``, which covers the whole cone without constraints.
    """
    u = np.atleast_2d(u)
    if space is SpaceId.S2xR:
        return np.concatenate([np.ones((len(u), 1)), u], axis=1)
    t, y, z = u.T
    e = np.exp(t)
    return np.stack([np.ones_like(t), e * np.sqrt(1 + y * y + z * z), e * y, e * z], axis=1)


def _from_point(space: SpaceId, p):
    a = affine(p)
    if space is SpaceId.S2xR:
        return a
    n = np.sqrt(a[0] ** 2 - a[1] ** 2 - a[2] ** 2)
    return np.array([np.log(n), a[1] / n, a[2] / n])


def triangle_surface_report(space, A0, A1, A2, lambda1: float, lambda2: float,
                            n_grid: int = 21, n_starts: int = 8, tol: float = 1e-6) -> SurfacePoint:
    """Point of ``C(lambda1, lambda2)`` nearest to ``A0`` with diagnostics.

    ``C`` is the intersection of the Apollonius surfaces ``AS_{A0 A1}(lambda1)``
    and ``AS_{A2 A0}(lambda2)``.  Seeds come from a coarse grid over a box
    containing the triangle (and hence the plane through the model centre
    that carries its geodesics); the best ``n_starts`` seeds by constraint
    violation are refined by SLSQP minimizing ``d(A0, P)^2`` subject to the
    two distance-ratio equations.  Two converged candidates at distinct
    locations whose objectives agree within ``tol`` are reported as a tie.
    """
    space = SpaceId.parse(space)
    if space not in _SIG:
        raise ValueError("the triangle surface is implemented for S2xR and H2xR only")
    A0, A1, A2 = (check_proper(space, p) for p in (A0, A1, A2))
    l1, l2 = float(lambda1), float(lambda2)
    if not (l1 >= 0 and l2 >= 0 and l1 * l1 + l2 * l2 > 0) or not np.isfinite(l1 + l2):
        raise ValueError("lambda1, lambda2 must be finite, non-negative and not both zero")
    s1 = ApolloniusSpec(space, A0, A1, l1)
    s2 = ApolloniusSpec(space, A2, A0, l2)
    if l1 == 0:
        return SurfacePoint(A0, 0.0, (0.0, 0.0))
    if l2 == 0:
        return SurfacePoint(A2, float(_dist_fn(space)(A0, A2)), (0.0, 0.0))

    dist = _dist_fn(space)

    def cons(u):
        P = _to_point(space, u)
        d0 = dist(A0[None], P)
        return np.stack([d0 - l1 * dist(P, A1[None]), dist(A2[None], P) - l2 * d0], axis=-1)

    # Coarse seed grid in the unconstrained parameters.
    U = np.array([_from_point(space, p) for p in (A0, A1, A2)])
    lo, hi = U.min(axis=0), U.max(axis=0)
    span = np.maximum(hi - lo, 0.5)
    lo, hi = lo - span, hi + span
    axes = [np.linspace(lo[i], hi[i], n_grid) for i in range(3)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    with np.errstate(invalid="ignore", divide="ignore"):
        viol = np.abs(cons(grid)).sum(axis=1)
    viol = np.where(np.isfinite(viol), viol, np.inf)
    seeds = grid[np.argsort(viol)[: 4 * n_starts]]
    # Keep spatially distinct seeds.
    picked = []
    min_sep = 0.5 * float(np.min((hi - lo) / (n_grid - 1)))
    for sd in seeds:
        if all(np.linalg.norm(sd - q) > 2 * min_sep for q in picked):
            picked.append(sd)
        if len(picked) == n_starts:
            break

    def objective(u):
        return float(dist(A0[None], _to_point(space, u))[0] ** 2)

    found = []
    for sd in picked:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            res = minimize(objective, sd, method="SLSQP",
                           constraints=[{"type": "eq", "fun": lambda u: cons(u)[0]}],
                           options={"ftol": 1e-14, "maxiter": 500})
        c = cons(res.x)[0]
        if np.all(np.isfinite(c)) and np.abs(c).max() < 1e-9:
            found.append((np.sqrt(res.fun), res.x))
    if not found:
        raise SurfacePointError("no point of the intersection curve was found")
    found.sort(key=lambda f: f[0])
    best_d, best_u = found[0]
    P = _to_point(space, best_u)[0]
    r = (apollonius_residual(s1, affine(P)), apollonius_residual(s2, affine(P)))
    if max(abs(r[0]), abs(r[1])) > tol:
        raise SurfacePointError(f"implicit residuals {r} exceed {tol}")
    tie = False
    others = []
    for d, u in found[1:]:
        q = _to_point(space, u)[0]
        others.append(q)
        if abs(d - best_d) <= tol and np.linalg.norm(affine(q) - affine(P)) > 1e-6 * (1 + np.linalg.norm(affine(P))):
            tie = True
    if tie:
        warnings.warn("two distinct nearest points on the intersection curve", TieWarning)
    return SurfacePoint(P, float(best_d), r, tie, others)


def triangle_surface_point(space, A0, A1, A2, lambda1: float, lambda2: float, **kw) -> np.ndarray:
    """Homogeneous point of the triangle surface for the ratios ``(lambda1, lambda2)``."""
    return triangle_surface_report(space, A0, A1, A2, lambda1, lambda2, **kw).point


def triangle_surface_grid(space, A0, A1, A2, lambdas1, lambdas2, **kw) -> np.ndarray:
    """Triangle-surface points over a ratio grid; NaN rows where the solve fails."""
    out = np.full((len(lambdas1), len(lambdas2), 4), np.nan)
    for i, l1 in enumerate(lambdas1):
        for j, l2 in enumerate(lambdas2):
            try:
                out[i, j] = triangle_surface_point(space, A0, A1, A2, l1, l2, **kw)
            except SurfacePointError:
                pass
    return out
