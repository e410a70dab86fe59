"""Signed simple ratios on geodesics, Menelaus and Ceva products.

Betweenness is read off arc-length stations along the geodesic through
``A`` and ``B``: ``A`` sits at 0, ``B`` at ``d(A, B)`` and ``P`` at
``+-d(A, P)`` depending on the side of ``A`` it lies on.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .geodesics import GeodesicParams, distance, exp_origin, fibre_projection_nil
from .model import SpaceId, affine, check_proper, hpoint, translate_from_origin, translate_to_origin

__all__ = [
    "RatioKind",
    "RatioError",
    "NotCollinearError",
    "LineStation",
    "line_station",
    "reverse_direction",
    "simple_ratio",
    "menelaus_product",
    "ceva_product",
    "projected_arc_ratio_nil",
    "Configuration",
    "base_menelaus_configuration",
    "base_ceva_configuration",
    "fibre_menelaus_configuration",
    "fibre_ceva_configuration",
    "nil_ceva_configuration",
    "nil_projected_ceva_product",
    "nil_ceva_product",
    "nil_menelaus_counterexample",
]

COLLINEAR_TOL = 1e-8


class RatioKind(str, enum.Enum):
    base = "base"
    general = "general"
    fibre = "fibre"
    nil = "nil"


class RatioError(ValueError):
    pass


class NotCollinearError(RatioError):
    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


def reverse_direction(params: GeodesicParams) -> GeodesicParams:
    """Parameters of the same geodesic traversed backwards from its start."""
    sp, a, b = params.space, params.dir1, params.dir2
    if sp is SpaceId.SL2R:
        return GeodesicParams(sp, -a, b + np.pi, params.s)
    return GeodesicParams(sp, a + np.pi, -b, params.s)


def _along(params: GeodesicParams, s: float):
    """Point at signed station ``s`` on the geodesic from the origin."""
    if s >= 0:
        return exp_origin(params.with_s(s))
    return exp_origin(reverse_direction(params).with_s(-s))


def _gap(space: SpaceId, p, q) -> float:
    if space is SpaceId.SL2R:
        p, q = p / np.linalg.norm(p), q / np.linalg.norm(q)
        return float(np.abs(p - q).max())
    return float(np.abs(affine(p) - affine(q)).max())


@dataclass(frozen=True)
class LineStation:
    """Position of ``P`` on the geodesic line from ``A`` through ``B``."""

    s_p: float
    s_b: float
    params: GeodesicParams
    residual: float

    @property
    def between(self) -> bool:
        return 0.0 < self.s_p < self.s_b

    @property
    def d_ap(self) -> float:
        return abs(self.s_p)

    @property
    def d_pb(self) -> float:
        return abs(self.s_b - self.s_p)


def line_station(space, A, P, B, tol: float = COLLINEAR_TOL) -> LineStation:
    space = SpaceId.parse(space)
    A, P, B = (check_proper(space, X) for X in (A, P, B))
    s_b, prm = distance(space, A, B)
    d_ap, _ = distance(space, A, P)
    if s_b == 0 or d_ap == 0:
        raise RatioError("points must be pairwise distinct")
    p = translate_to_origin(space, A).apply(P)
    fwd = _gap(space, exp_origin(prm.with_s(d_ap)), p)
    bwd = _gap(space, exp_origin(reverse_direction(prm).with_s(d_ap)), p)
    res = min(fwd, bwd)
    if res > tol:
        raise NotCollinearError(f"P is not on the geodesic through A and B (residual {res:.3e})", res)
    s_p = d_ap if fwd <= bwd else -d_ap
    if abs(s_p - s_b) <= tol:
        raise RatioError("P coincides with B")
    return LineStation(float(s_p), float(s_b), prm, res)


def _weight(kind: RatioKind, space: SpaceId):
    if kind in (RatioKind.fibre, RatioKind.nil):
        return lambda d: d
    return np.sin if space is SpaceId.S2xR else np.sinh


def simple_ratio(kind, space, A, P, B, tol: float = COLLINEAR_TOL) -> float:
    """Signed simple ratio ``s(A, P, B)``.

    ``base``: ``w(d(A,P)) / w(d(P,B))`` with ``w = sin`` (S2xR) or ``sinh``
    (H2xR) for points on the base surface.  ``general``: the same weights
    applied to ``d cos v``, with ``v`` the fibre elevation of the geodesic.
    ``fibre`` and ``nil``: plain distance ratios.  The sign is negative
    when ``P`` is not between ``A`` and ``B``.
    """
    kind = RatioKind(kind)
    space = SpaceId.parse(space)
    if kind in (RatioKind.base, RatioKind.general, RatioKind.fibre):
        if space not in (SpaceId.S2xR, SpaceId.H2xR):
            raise RatioError(f"{kind.value} ratios are defined in S2xR and H2xR")
    elif space is not SpaceId.Nil:
        raise RatioError("nil ratios need the Nil space")
    st = line_station(space, A, P, B, tol)
    scale = 1.0
    if kind is RatioKind.general:
        scale = abs(np.cos(st.params.dir2))
    elif kind is RatioKind.base and abs(np.sin(st.params.dir2)) > 1e-9:
        raise RatioError("base ratios need a geodesic of the base surface")
    w = _weight(kind, space)
    den = w(st.d_pb * scale)
    if den == 0:
        raise RatioError("degenerate weight at P")
    r = float(w(st.d_ap * scale) / den)
    return r if st.between else -r


def _product(kind, space, triangle, P, Q, R, tol):
    A0, A1, A2 = triangle
    return (simple_ratio(kind, space, A0, P, A1, tol) * simple_ratio(kind, space, A1, Q, A2, tol)
            * simple_ratio(kind, space, A2, R, A0, tol))


def _on_line(space, A, X, B, tol) -> bool:
    try:
        line_station(space, A, X, B, tol)
        return True
    except NotCollinearError:
        return False


def menelaus_product(space, triangle: Sequence, P, Q, R, kind="base", tol: float = COLLINEAR_TOL) -> float:
    """``s(A0,P,A1) s(A1,Q,A2) s(A2,R,A0)`` for transversal points on the sides."""
    space = SpaceId.parse(space)
    verts = [check_proper(space, v) for v in triangle]
    for X in (P, Q, R):
        if any(_gap(space, check_proper(space, X), v) < tol for v in verts):
            raise RatioError("the transversal passes through a vertex")
    return _product(kind, space, verts, P, Q, R, tol)


def ceva_product(space, triangle: Sequence, T, feet: Sequence, kind="base",
                 check_cevians: Optional[bool] = None, tol: float = COLLINEAR_TOL) -> float:
    """Ceva product for the cevian point ``T`` and feet ``(P, Q, R)``.

    ``P`` is on ``A0A1`` (cevian from ``A2``), ``Q`` on ``A1A2`` (from
    ``A0``) and ``R`` on ``A2A0`` (from ``A1``).  When the cevians are
    geodesics (base and fibre kinds) ``T`` is checked to lie on each of
    them; in Nil the cevians are surface curves and the feet are taken as
    given.
    """
    space = SpaceId.parse(space)
    kind = RatioKind(kind)
    A0, A1, A2 = (check_proper(space, v) for v in triangle)
    T = check_proper(space, T)
    P, Q, R = feet
    if any(_gap(space, T, v) < tol for v in (A0, A1, A2)):
        raise RatioError("T coincides with a vertex")
    for X, Y in ((A0, A1), (A1, A2), (A2, A0)):
        if _on_line(space, X, T, Y, tol):
            raise RatioError("T lies on a side of the triangle")
    if check_cevians is None:
        check_cevians = kind in (RatioKind.base, RatioKind.fibre)
    if check_cevians:
        for V, F in ((A2, P), (A0, Q), (A1, R)):
            if not _on_line(space, V, T, F, 1e3 * tol):
                raise NotCollinearError("T is not on the cevian through the given foot", np.nan)
    return _product(kind, space, (A0, A1, A2), P, Q, R, tol)


# ------------------------------------------------------------------ Nil



def _swept(proj, prm, xy_from, xy_to) -> float:
    """Euclidean length of the projected arc between two projected points."""
    if proj.kind == "line":
        return float(np.hypot(*(np.asarray(xy_to) - np.asarray(xy_from))))
    c = proj.center
    a0 = np.arctan2(xy_from[1] - c[1], xy_from[0] - c[0])
    a1 = np.arctan2(xy_to[1] - c[1], xy_to[0] - c[0])
    turn = np.sign(np.sin(prm.dir2))
    ang = ((a1 - a0) * turn) % (2 * np.pi)
    return float(proj.radius * ang)


def projected_arc_ratio_nil(A, P, B, tol: float = COLLINEAR_TOL) -> float:
    """Signed ratio of projected arc lengths ``C(A*, P*) / C(P*, B*)``.

    The configuration is moved so that ``A`` is the origin; the fibre
    projection of the geodesic is then the circle (or line) of
    :func:`fibre_projection_nil` and arc lengths are measured on it from
    the projected coordinates alone.
    """
    st = line_station(SpaceId.Nil, A, P, B, tol)
    prm = st.params
    proj = fibre_projection_nil(prm)
    if proj.kind == "point":
        raise RatioError("fibre-like geodesic: the projection is a single point")
    T = translate_to_origin(SpaceId.Nil, A)
    p, b = affine(T.apply(P))[:2], affine(T.apply(B))[:2]
    o = np.zeros(2)
    if st.between:
        return _swept(proj, prm, o, p) / _swept(proj, prm, p, b)
    if st.s_p > st.s_b:
        return -_swept(proj, prm, o, p) / _swept(proj, prm, b, p)
    back = fibre_projection_nil(reverse_direction(prm))
    return -_swept(back, reverse_direction(prm), o, p) / (
        _swept(back, reverse_direction(prm), o, p) + _swept(proj, prm, o, b))


def _nil_point_on(A, B, frac: float) -> np.ndarray:
    """Point at arc-length fraction ``frac`` of the geodesic from ``A`` to ``B``."""
    s_b, prm = distance(SpaceId.Nil, A, B)
    q = exp_origin(prm.with_s(frac * s_b))
    return translate_from_origin(SpaceId.Nil, A).apply(q)


# -------------------------------------------------------- configurations

@dataclass
class Configuration:
    space: SpaceId
    kind: str
    triangle: list
    points: list
    cevian_point: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)

    def as_dict(self):
        return {"space": self.space.value, "kind": self.kind,
                "triangle": [list(affine(v)) for v in self.triangle],
                "points": [list(affine(p)) for p in self.points],
                "cevian_point": None if self.cevian_point is None else list(affine(self.cevian_point)),
                **self.meta}


def _base_normalize(space: SpaceId, v):
    v = np.asarray(v, dtype=float)
    if space is SpaceId.S2xR:
        return v / np.linalg.norm(v)
    n2 = v[0] ** 2 - v[1] ** 2 - v[2] ** 2
    if n2 <= 0:
        raise RatioError("lines do not meet in the hyperbolic base plane")
    v = v / np.sqrt(n2)
    return v if v[0] > 0 else -v


def _base_meet(space: SpaceId, n1, n2, near):
    """Intersection of two base lines (planes through the centre) nearest ``near``."""
    d = np.cross(n1, n2)
    p = _base_normalize(space, d)
    if space is SpaceId.S2xR and np.dot(p, near) < 0:
        p = -p
    return p


def _base_points(space: SpaceId, pts):
    return [hpoint(*_base_normalize(space, p)) for p in pts]


def base_menelaus_configuration(space, triangle=None, fractions=(0.5, 1.3)) -> Configuration:
    """Base-surface triangle with a transversal geodesic line.

    The transversal runs through points at the given (chord) fractions of
    the sides ``A0A1`` and ``A1A2``; its meeting point with the line
    ``A2A0`` completes the configuration.
    """
    space = SpaceId.parse(space)
    if triangle is None:
        triangle = ([1.0, 0.0, 0.0], [1.2, 0.9, 0.1], [1.1, 0.2, 0.8]) if space is SpaceId.H2xR \
            else ([1.0, 0.0, 0.0], [0.2, 1.0, 0.1], [0.3, 0.2, 1.0])
    a = [_base_normalize(space, v) for v in triangle]
    f1, f2 = fractions
    u = _base_normalize(space, (1 - f1) * a[0] + f1 * a[1])
    v = _base_normalize(space, (1 - f2) * a[1] + f2 * a[2])
    n = np.cross(u, v)
    r = _base_meet(space, n, np.cross(a[2], a[0]), a[2] + a[0])
    return Configuration(space, "base", [hpoint(*x) for x in a], [hpoint(*p) for p in (u, v, r)])


def base_ceva_configuration(space, triangle=None, T=None) -> Configuration:
    """Base-surface triangle with cevians through ``T`` (geodesic lines)."""
    space = SpaceId.parse(space)
    if triangle is None:
        triangle = ([1.0, 0.0, 0.0], [1.2, 0.9, 0.1], [1.1, 0.2, 0.8]) if space is SpaceId.H2xR \
            else ([1.0, 0.0, 0.0], [0.2, 1.0, 0.1], [0.3, 0.2, 1.0])
    a = [_base_normalize(space, v) for v in triangle]
    t = _base_normalize(space, T if T is not None else sum(a) / 3)
    feet = []
    for apex, (u, v) in ((a[2], (a[0], a[1])), (a[0], (a[1], a[2])), (a[1], (a[2], a[0]))):
        feet.append(_base_meet(space, np.cross(apex, t), np.cross(u, v), u + v))
    return Configuration(space, "base", [hpoint(*v) for v in a], [hpoint(*p) for p in feet],
                         hpoint(*t))


def _strip_point(space: SpaceId, phi, t):
    """Point of the flat fibre strip through the ``[x, y]`` plane."""
    e = np.exp(t)
    if space is SpaceId.S2xR:
        return hpoint(e * np.cos(phi), e * np.sin(phi), 0.0)
    return hpoint(e * np.cosh(phi), e * np.sinh(phi), 0.0)


def _line_meet_2d(p, q, r, s):
    """Intersection of the Euclidean lines ``pq`` and ``rs``."""
    d1, d2 = q - p, s - r
    M = np.array([d1, -d2]).T
    k = np.linalg.solve(M, r - p)
    return p + k[0] * d1


_STRIP_TRIANGLE = np.array([[0.0, 0.0], [1.1, 0.3], [0.4, 1.2]])


def fibre_menelaus_configuration(space, triangle2d=None, line=None) -> Configuration:
    """Fibre-type triangle in the flat strip (angle, t) with a straight transversal."""
    space = SpaceId.parse(space)
    a = np.asarray(triangle2d if triangle2d is not None else _STRIP_TRIANGLE, dtype=float)
    p0, p1 = (np.asarray(x, dtype=float) for x in (line if line is not None else ([-0.5, 0.5], [1.5, 0.2])))
    pts = [_line_meet_2d(a[i], a[(i + 1) % 3], p0, p1) for i in range(3)]
    return Configuration(space, "fibre", [_strip_point(space, *v) for v in a],
                         [_strip_point(space, *p) for p in pts], meta={"strip_points": pts})


def fibre_ceva_configuration(space, triangle2d=None, T=None) -> Configuration:
    space = SpaceId.parse(space)
    a = np.asarray(triangle2d if triangle2d is not None else _STRIP_TRIANGLE, dtype=float)
    t = np.asarray(T if T is not None else a.mean(axis=0) + np.array([0.05, -0.03]), dtype=float)
    feet = [_line_meet_2d(a[2], t, a[0], a[1]), _line_meet_2d(a[0], t, a[1], a[2]),
            _line_meet_2d(a[1], t, a[2], a[0])]
    return Configuration(space, "fibre", [_strip_point(space, *v) for v in a],
                         [_strip_point(space, *p) for p in feet], _strip_point(space, *t))


_NIL_TRIANGLE = (hpoint(0.0, 0.0, 0.0), hpoint(1.0, 0.3, 0.4), hpoint(0.2, 1.1, -0.3))


def nil_ceva_configuration(triangle=None, fractions=(0.3, 0.55)) -> Configuration:
    """Nil triangle with cevian feet satisfying the Ceva condition.

    The first two feet sit at the given arc-length fractions of their
    sides; the third is placed so that the three distance ratios multiply
    to one.  The cevian curves themselves are not constructed.
    """
    A0, A1, A2 = (check_proper(SpaceId.Nil, v) for v in (triangle or _NIL_TRIANGLE))
    f1, f2 = fractions
    r1, r2 = f1 / (1 - f1), f2 / (1 - f2)
    r3 = 1.0 / (r1 * r2)
    f3 = r3 / (1 + r3)
    feet = [_nil_point_on(A0, A1, f1), _nil_point_on(A1, A2, f2), _nil_point_on(A2, A0, f3)]
    return Configuration(SpaceId.Nil, "nil", [A0, A1, A2], feet)


def nil_ceva_product(triangle: Sequence, feet: Sequence, tol: float = COLLINEAR_TOL) -> float:
    """``s(A0,P,A1) s(A1,Q,A2) s(A2,R,A0)`` with Nil distance ratios.

    Nil cevians are surface curves, so only the feet on the sides enter.
    """
    verts = [check_proper(SpaceId.Nil, v) for v in triangle]
    return _product(RatioKind.nil, SpaceId.Nil, verts, *feet, tol)


def nil_projected_ceva_product(config: Configuration) -> float:
    """Ceva product of projected arc ratios for a Nil configuration."""
    A0, A1, A2 = config.triangle
    P, Q, R = config.points
    return (projected_arc_ratio_nil(A0, P, A1) * projected_arc_ratio_nil(A1, Q, A2)
            * projected_arc_ratio_nil(A2, R, A0))


def nil_menelaus_counterexample(triangle=None, fractions=(0.4, 0.5)) -> Configuration:
    """A Nil configuration whose Menelaus product is not ``-1``.

    ``P`` and ``Q`` sit at arc-length fractions of the sides ``A0A1`` and
    ``A1A2``.  The straight base-plane line through their projections meets
    the projected third side at ``R*``, which is lifted back to the
    geodesic ``A2A0``.  In the Euclidean picture this is a Menelaus
    transversal; the product of Nil simple ratios is reported in ``meta``.
    """
    A0, A1, A2 = (check_proper(SpaceId.Nil, v) for v in (triangle or _NIL_TRIANGLE))
    P = _nil_point_on(A0, A1, fractions[0])
    Q = _nil_point_on(A1, A2, fractions[1])
    p, q = affine(P)[:2], affine(Q)[:2]
    s_side, _ = distance(SpaceId.Nil, A2, A0)

    # Where the projected side A2A0 crosses the line through p and q.
    _, prm = distance(SpaceId.Nil, A2, A0)
    to = translate_from_origin(SpaceId.Nil, A2)
    d = q - p
    nrm = np.array([-d[1], d[0]])

    def side(s):
        return float(np.dot(affine(to.apply(_along(prm, s)))[:2] - p, nrm))

    grid = np.linspace(-2 * s_side, 3 * s_side, 2001)
    vals = np.array([side(s) for s in grid])
    idx = np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]
    if idx.size == 0:
        raise RatioError("the base line misses the projected third side")
    roots = [brentq(side, grid[i], grid[i + 1], xtol=1e-15) for i in idx]
    s_r = min(roots, key=abs)
    R = to.apply(_along(prm, s_r))
    prod = menelaus_product(SpaceId.Nil, (A0, A1, A2), P, Q, R, kind="nil")
    return Configuration(SpaceId.Nil, "nil", [A0, A1, A2], [P, Q, R],
                         meta={"product": prod, "deviation_from_minus_one": abs(prod + 1)})
