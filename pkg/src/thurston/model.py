"""Homogeneous-coordinate algebra of the projective model and group operations.

Points are 4-vectors ``(x0, x1, x2, x3)`` defined up to a positive factor.
Collineations act on row vectors from the right, ``y = x @ T``; planes
(dual forms) transform with the inverse, ``v = T^-1 @ u``, so that the
incidence value ``x @ u`` is preserved.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "SpaceId",
    "ImproperPointError",
    "ProjMap",
    "SpaceSignature",
    "ORIGINS",
    "hpoint",
    "affine",
    "normalize",
    "incidence",
    "signature",
    "nil_mul",
    "nil_inverse",
    "nil_translation",
    "nil_rotation",
    "nil_to_linear",
    "nil_from_linear",
    "sol_mul",
    "sol_inverse",
    "sol_translation",
    "sol_stabilizer_generators",
    "sl2r_matrix",
    "sl2r_point",
    "sl2r_quadratic_form",
    "sl2r_fibre_translation",
    "sl2r_right_multiplication",
    "sl2r_translation",
    "sl2r_foot_point",
    "s2xr_rotation",
    "h2xr_boost",
    "check_proper",
    "translate_to_origin",
    "translate_from_origin",
]


class SpaceId(str, enum.Enum):
    S2xR = "S2xR"
    H2xR = "H2xR"
    Nil = "Nil"
    SL2R = "SL2R"
    Sol = "Sol"

    @classmethod
    def parse(cls, value: "str | SpaceId") -> "SpaceId":
        if isinstance(value, SpaceId):
            return value
        key = str(value).strip().lower().replace("_", "").replace("~", "")
        for member in cls:
            if member.value.lower() == key:
                return member
        aliases = {"sl2": cls.SL2R, "psl2r": cls.SL2R, "heisenberg": cls.Nil}
        if key in aliases:
            return aliases[key]
        raise ValueError(f"unknown space {value!r}; expected one of "
                         + ", ".join(m.value for m in cls))


class ImproperPointError(ValueError):
    """Raised when a point lies outside the model domain of a space."""


# Distinguished origins of the five spaces.
ORIGINS = {
    SpaceId.S2xR: np.array([1.0, 1.0, 0.0, 0.0]),
    SpaceId.H2xR: np.array([1.0, 1.0, 0.0, 0.0]),
    SpaceId.Nil: np.array([1.0, 0.0, 0.0, 0.0]),
    SpaceId.SL2R: np.array([1.0, 0.0, 0.0, 0.0]),
    SpaceId.Sol: np.array([1.0, 0.0, 0.0, 0.0]),
}

_COND_LIMIT = 1e12


def hpoint(x, y=None, z=None) -> np.ndarray:
    """Build a homogeneous point from affine coordinates or a 4-vector."""
    if y is None:
        arr = np.asarray(x, dtype=float)
        if arr.shape == (3,):
            return np.concatenate(([1.0], arr))
        if arr.shape == (4,):
            if not np.any(arr):
                raise ValueError("all four homogeneous coordinates are zero")
            return arr.copy()
        raise ValueError(f"expected 3 or 4 coordinates, got shape {arr.shape}")
    return np.array([1.0, x, y, z], dtype=float)


def normalize(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if np.any(p[..., 0] == 0):
        raise ImproperPointError("point at infinity has no affine normalization")
    return p / p[..., :1]


def affine(p) -> np.ndarray:
    """Affine coordinates ``(x1, x2, x3) / x0`` (works on stacked points)."""
    p = np.asarray(p, dtype=float)
    return p[..., 1:] / p[..., :1]


def incidence(p, u) -> float:
    return float(np.dot(np.asarray(p, dtype=float), np.asarray(u, dtype=float)))


@dataclass(frozen=True)
class ProjMap:
    """A collineation acting on row vectors from the right."""

    matrix: np.ndarray
    inverse: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=float)
        if m.shape != (4, 4):
            raise ValueError("ProjMap needs a 4x4 matrix")
        if not np.all(np.isfinite(m)):
            raise ValueError("non-finite matrix entries")
        if self.inverse is None:
            cond = np.linalg.cond(m)
            if not np.isfinite(cond) or cond > _COND_LIMIT:
                raise ValueError(f"matrix is singular or ill-conditioned (cond={cond:.3g})")
            inv = np.linalg.inv(m)
        else:
            inv = np.array(self.inverse, dtype=float)
        m.setflags(write=False)
        inv.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "inverse", inv)

    @classmethod
    def identity(cls) -> "ProjMap":
        return cls(np.eye(4), np.eye(4))

    def apply(self, p) -> np.ndarray:
        return np.asarray(p, dtype=float) @ self.matrix

    def apply_plane(self, u) -> np.ndarray:
        return self.inverse @ np.asarray(u, dtype=float)

    def then(self, other: "ProjMap") -> "ProjMap":
        """Apply ``self`` first, then ``other``."""
        return ProjMap(self.matrix @ other.matrix, other.inverse @ self.inverse)

    def inv(self) -> "ProjMap":
        return ProjMap(self.inverse, self.matrix)

    def __matmul__(self, other: "ProjMap") -> "ProjMap":
        return self.then(other)

    def affine_jacobian(self, p) -> np.ndarray:
        """Jacobian of the induced affine map at the point ``p``.

        Row ``j`` holds the derivative of the image with respect to the
        ``j``-th affine input coordinate (row-vector convention).
        """
        X = normalize(p)
        Y = X @ self.matrix
        M = self.matrix
        J = (M[1:, 1:] * Y[0] - np.outer(M[1:, 0], Y[1:])) / Y[0] ** 2
        return J


@dataclass(frozen=True)
class SpaceSignature:
    space: SpaceId
    diag: tuple


_SIGNATURES = {
    SpaceId.S2xR: (0, 1, 1, 1),
    SpaceId.H2xR: (0, 1, -1, -1),
    SpaceId.Nil: (0, 0, 0, 1),
    SpaceId.SL2R: (-1, -1, 1, 1),
    SpaceId.Sol: (0, 0, 0, 1),
}


def signature(space) -> SpaceSignature:
    space = SpaceId.parse(space)
    return SpaceSignature(space, _SIGNATURES[space])


# ----------------------------------------------------------------- Nil

def nil_mul(g: Sequence[float], h: Sequence[float]) -> np.ndarray:
    """Heisenberg product ``(x,y,z)(a,b,c) = (a+x, b+y, c+xb+z)``."""
    x, y, z = g
    a, b, c = h
    return np.array([a + x, b + y, c + x * b + z], dtype=float)


def nil_inverse(g: Sequence[float]) -> np.ndarray:
    x, y, z = g
    return np.array([-x, -y, x * y - z], dtype=float)


def nil_translation(g: Sequence[float]) -> ProjMap:
    """Left translation by ``g``: maps ``(1,a,b,c)`` to ``(1, x+a, y+b, z+bx+c)``."""
    x, y, z = (float(v) for v in g)
    m = np.array([[1.0, x, y, z],
                  [0.0, 1.0, 0.0, 0.0],
                  [0.0, 0.0, 1.0, x],
                  [0.0, 0.0, 0.0, 1.0]])
    xi, yi, zi = nil_inverse((x, y, z))
    inv = np.array([[1.0, xi, yi, zi],
                    [0.0, 1.0, 0.0, 0.0],
                    [0.0, 0.0, 1.0, xi],
                    [0.0, 0.0, 0.0, 1.0]])
    return ProjMap(m, inv)


def nil_to_linear(p) -> np.ndarray:
    """Quadratic change of chart ``z' = z - xy/2`` that linearizes rotations."""
    p = np.asarray(p, dtype=float)
    out = p.copy()
    out[..., 2] = p[..., 2] - 0.5 * p[..., 0] * p[..., 1]
    return out


def nil_from_linear(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    out = p.copy()
    out[..., 2] = p[..., 2] + 0.5 * p[..., 0] * p[..., 1]
    return out


def nil_rotation(omega: float) -> Callable[[np.ndarray], np.ndarray]:
    """Rotation about the z axis as a map of affine Nil coordinates."""
    c, s = np.cos(omega), np.sin(omega)
    c2, s2 = np.cos(2 * omega), np.sin(2 * omega)

    def rot(p):
        p = np.asarray(p, dtype=float)
        x, y, z = p[..., 0], p[..., 1], p[..., 2]
        xb = x * c - y * s
        yb = x * s + y * c
        zb = z - 0.5 * x * y + 0.25 * (x * x - y * y) * s2 + 0.5 * x * y * c2
        return np.stack([xb, yb, zb], axis=-1)

    return rot


# ----------------------------------------------------------------- Sol

def sol_mul(g: Sequence[float], h: Sequence[float]) -> np.ndarray:
    """Sol product ``(a,b,c)(x,y,z) = (x + a e^-z, y + b e^z, z + c)``."""
    a, b, c = g
    x, y, z = h
    return np.array([x + a * np.exp(-z), y + b * np.exp(z), z + c], dtype=float)


def sol_inverse(g: Sequence[float]) -> np.ndarray:
    x, y, z = g
    return np.array([-x * np.exp(z), -y * np.exp(-z), -z], dtype=float)


def sol_translation(g: Sequence[float]) -> ProjMap:
    """Maps ``(1,a,b,c)`` to ``(1, x + a e^-z, y + b e^z, z + c)``."""
    x, y, z = (float(v) for v in g)
    m = np.array([[1.0, x, y, z],
                  [0.0, np.exp(-z), 0.0, 0.0],
                  [0.0, 0.0, np.exp(z), 0.0],
                  [0.0, 0.0, 0.0, 1.0]])
    xi, yi, zi = sol_inverse((x, y, z))
    inv = np.array([[1.0, xi, yi, zi],
                    [0.0, np.exp(-zi), 0.0, 0.0],
                    [0.0, 0.0, np.exp(zi), 0.0],
                    [0.0, 0.0, 0.0, 1.0]])
    return ProjMap(m, inv)


def sol_stabilizer_generators() -> list:
    """The D4 stabilizer of the Sol origin.

    Returns ``[g1, g2, r, r2, r3]``: the two involutions (y-flip and the
    x/y swap with z-flip) followed by the cyclic elements generated by
    their product.
    """
    g1 = np.diag([1.0, 1.0, -1.0, 1.0])
    g2 = np.array([[1.0, 0, 0, 0],
                   [0, 0, 1.0, 0],
                   [0, 1.0, 0, 0],
                   [0, 0, 0, -1.0]])
    r = g1 @ g2
    mats = [g1, g2, r, r @ r, r @ r @ r]
    return [ProjMap(m) for m in mats]


# --------------------------------------------------------------- SL2R

def sl2r_matrix(p) -> np.ndarray:
    """2x2 matrix of a point, ``[[x0-x3, x1+x2], [x2-x1, x0+x3]]``."""
    x0, x1, x2, x3 = np.asarray(p, dtype=float)
    return np.array([[x0 - x3, x1 + x2], [x2 - x1, x0 + x3]])


def sl2r_point(m) -> np.ndarray:
    m = np.asarray(m, dtype=float)
    d, b, c, a = m[0, 0], m[0, 1], m[1, 0], m[1, 1]
    return np.array([(a + d) / 2, (b - c) / 2, (b + c) / 2, (a - d) / 2])


def sl2r_quadratic_form(p) -> float:
    """``-x0^2 - x1^2 + x2^2 + x3^2``; negative inside the model."""
    x0, x1, x2, x3 = np.asarray(p, dtype=float)
    return -x0 * x0 - x1 * x1 + x2 * x2 + x3 * x3


def _linear_map_matrix(f) -> np.ndarray:
    return np.array([f(e) for e in np.eye(4)])


def sl2r_right_multiplication(A) -> ProjMap:
    """Collineation ``X -> X A`` in the 2x2 matrix picture."""
    MA = sl2r_matrix(A)
    det = MA[0, 0] * MA[1, 1] - MA[0, 1] * MA[1, 0]
    if det <= 0:
        raise ImproperPointError("point lies outside the SL2R model")
    adj = np.array([[MA[1, 1], -MA[0, 1]], [-MA[1, 0], MA[0, 0]]])
    m = _linear_map_matrix(lambda e: sl2r_point(sl2r_matrix(e) @ MA))
    inv = _linear_map_matrix(lambda e: sl2r_point(sl2r_matrix(e) @ adj)) / det
    return ProjMap(m, inv)


def sl2r_translation(A) -> ProjMap:
    """Isometry taking the SL2R origin to ``A``."""
    return sl2r_right_multiplication(A)


def sl2r_fibre_translation(phi: float) -> ProjMap:
    c, s = np.cos(phi), np.sin(phi)
    m = np.array([[c, s, 0, 0],
                  [-s, c, 0, 0],
                  [0, 0, c, -s],
                  [0, 0, s, c]])
    return ProjMap(m, m.T.copy())


def sl2r_foot_point(x) -> np.ndarray:
    """Intersection of the fibre through ``x`` with the base plane ``x1 = 0``."""
    x0, x1, x2, x3 = np.asarray(x, dtype=float)
    if sl2r_quadratic_form(x) >= 0:
        raise ImproperPointError("point is not inside the SL2R hyperboloid solid")
    return np.array([x0 * x0 + x1 * x1, 0.0, x0 * x2 - x1 * x3, x0 * x3 + x1 * x2])


# ------------------------------------------------------- product spaces

def s2xr_rotation(a) -> np.ndarray:
    """Proper rotation ``R`` (column convention) with ``R a = e_x``."""
    a = np.asarray(a, dtype=float)
    a = a / np.linalg.norm(a)
    helper = np.eye(3)[np.argmin(np.abs(a))]
    e2 = helper - a * np.dot(helper, a)
    e2 /= np.linalg.norm(e2)
    e3 = np.cross(a, e2)
    return np.array([a, e2, e3])


_LORENTZ = np.diag([1.0, -1.0, -1.0])


def h2xr_boost(a) -> np.ndarray:
    """Lorentz transformation ``B`` (column convention) with ``B a = e_x``.

    ``a`` must satisfy ``a0 > 0`` and ``a0^2 - a1^2 - a2^2 > 0``.
    """
    a = np.asarray(a, dtype=float)
    a = a / np.sqrt(a @ _LORENTZ @ a)
    rho = np.hypot(a[1], a[2])
    if rho < 1e-300:
        return np.eye(3)
    n = np.array([a[1], a[2]]) / rho
    ch, sh = a[0], rho
    P = np.array([[1.0, 0, 0], [0, n[0], -n[1]], [0, n[1], n[0]]])
    boost = np.array([[ch, -sh, 0], [-sh, ch, 0], [0, 0, 1.0]])
    return P @ boost @ P.T


def check_proper(space, p) -> np.ndarray:
    """Validate a point against the domain of ``space``; return it as float array."""
    space = SpaceId.parse(space)
    p = hpoint(p)
    if not np.all(np.isfinite(p)):
        raise ImproperPointError("non-finite coordinates")
    if space is SpaceId.SL2R:
        if sl2r_quadratic_form(p) >= 0:
            raise ImproperPointError(f"{p} lies outside the SL2R hyperboloid solid")
        return p
    if p[0] <= 0:
        raise ImproperPointError(f"{p} needs a positive x0 coordinate")
    a = p[1:] / p[0]
    if space is SpaceId.S2xR:
        if np.linalg.norm(a) <= 0:
            raise ImproperPointError("the model centre E0 is not a point of S2xR")
    elif space is SpaceId.H2xR:
        if not (a[0] > 0 and a[0] ** 2 - a[1] ** 2 - a[2] ** 2 > 0):
            raise ImproperPointError(f"{p} lies outside the H2xR cone x>0, x^2-y^2-z^2>0")
    return p


def translate_to_origin(space, A) -> ProjMap:
    """An orientation-preserving isometry mapping ``A`` to the origin."""
    space = SpaceId.parse(space)
    A = check_proper(space, A)
    if space is SpaceId.Nil:
        return nil_translation(nil_inverse(affine(A)))
    if space is SpaceId.Sol:
        return sol_translation(sol_inverse(affine(A)))
    if space is SpaceId.SL2R:
        return sl2r_right_multiplication(A).inv()
    a = affine(A)
    if space is SpaceId.S2xR:
        scale = np.linalg.norm(a)
        R = s2xr_rotation(a)
        Rinv = R.T
    else:
        scale = np.sqrt(a @ _LORENTZ @ a)
        R = h2xr_boost(a)
        Rinv = _LORENTZ @ R.T @ _LORENTZ
    m = np.eye(4)
    m[1:, 1:] = R.T / scale
    inv = np.eye(4)
    inv[1:, 1:] = Rinv.T * scale
    return ProjMap(m, inv)


def translate_from_origin(space, A) -> ProjMap:
    """The inverse of :func:`translate_to_origin`; maps the origin to ``A``."""
    return translate_to_origin(space, A).inv()
