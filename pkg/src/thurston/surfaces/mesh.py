"""Triangle meshes: geodesic spheres, marching-tetrahedra isosurfaces, export."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..geodesics import exp_origin_many
from ..model import SpaceId, affine, translate_from_origin
from ..io import fmt

__all__ = [
    "TriMesh",
    "SphereRangeError",
    "ChartWarning",
    "SPHERE_RADIUS_LIMITS",
    "check_sphere_radius",
    "sphere_mesh",
    "isosurface_mesh",
    "segment_hits_triangle",
    "triangles_intersect",
    "find_self_intersections",
]

DEGENERATE_AREA = 1e-12


@dataclass
class TriMesh:
    vertices: np.ndarray
    faces: np.ndarray

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float).reshape(-1, 3)
        self.faces = np.asarray(self.faces, dtype=np.int64).reshape(-1, 3)
        if self.faces.size and (self.faces.min() < 0 or self.faces.max() >= len(self.vertices)):
            raise ValueError("face index out of range")

    @property
    def is_empty(self) -> bool:
        return len(self.faces) == 0

    def face_areas(self) -> np.ndarray:
        v = self.vertices[self.faces]
        return 0.5 * np.linalg.norm(np.cross(v[:, 1] - v[:, 0], v[:, 2] - v[:, 0]), axis=1)

    def area(self) -> float:
        return float(self.face_areas().sum())

    def drop_degenerate(self, tol: float = DEGENERATE_AREA) -> "TriMesh":
        keep = self.face_areas() > tol
        return TriMesh(self.vertices, self.faces[keep])

    def edge_counts(self) -> dict:
        """Number of faces on each undirected edge."""
        e = np.concatenate([self.faces[:, [0, 1]], self.faces[:, [1, 2]], self.faces[:, [2, 0]]])
        e = np.sort(e, axis=1)
        keys, counts = np.unique(e, axis=0, return_counts=True)
        return {tuple(k): int(c) for k, c in zip(keys, counts)}

    def is_watertight(self) -> bool:
        return all(c == 2 for c in self.edge_counts().values())

    def to_obj(self) -> str:
        lines = [f"v {fmt(x)} {fmt(y)} {fmt(z)}" for x, y, z in self.vertices]
        lines += [f"f {i + 1} {j + 1} {k + 1}" for i, j, k in self.faces]
        return "\n".join(lines) + "\n"

    def write_obj(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_obj())

    def write_csv(self, path) -> None:
        from ..io import write_csv

        write_csv(path, ["x", "y", "z"], self.vertices)

    @classmethod
    def read_obj(cls, path) -> "TriMesh":
        verts, faces = [], []
        with open(path) as fh:
            for line in fh:
                parts = line.split()
                if not parts:
                    continue
                if parts[0] == "v":
                    verts.append([float(t) for t in parts[1:4]])
                elif parts[0] == "f":
                    faces.append([int(t.split("/")[0]) - 1 for t in parts[1:4]])
        return cls(np.array(verts).reshape(-1, 3), np.array(faces, dtype=np.int64).reshape(-1, 3))


# ------------------------------------------------------- geodesic spheres

class SphereRangeError(ValueError):
    pass


class ChartWarning(UserWarning):
    pass


# (bound, inclusive)
SPHERE_RADIUS_LIMITS = {
    SpaceId.S2xR: (np.pi, True),
    SpaceId.Nil: (2 * np.pi, True),
    SpaceId.SL2R: (np.pi / 2, False),
    SpaceId.H2xR: (np.inf, False),
    SpaceId.Sol: (np.inf, False),
}


def check_sphere_radius(space, R: float) -> None:
    space = SpaceId.parse(space)
    bound, inclusive = SPHERE_RADIUS_LIMITS[space]
    ok = R >= 0 and (R <= bound if inclusive else R < bound)
    if not ok:
        rng = f"[0, {bound:.12g}]" if inclusive else f"[0, {bound:.12g})"
        raise SphereRangeError(f"{space.value} geodesic spheres exist only for R in {rng}; got {R}")


def _fan_faces(n_dirs: int) -> np.ndarray:
    """Faces on a grid with ``n_dirs - 2`` rings of ``n_dirs`` and two poles.

    Vertex 0 is the south pole, the last vertex the north pole.
    """
    rings = n_dirs - 2
    north = 1 + rings * n_dirs
    faces = []
    j = np.arange(n_dirs)
    jn = (j + 1) % n_dirs
    faces.append(np.stack([np.zeros(n_dirs, dtype=np.int64), 1 + jn, 1 + j], axis=1))
    for i in range(rings - 1):
        a = 1 + i * n_dirs + j
        b = 1 + i * n_dirs + jn
        c = 1 + (i + 1) * n_dirs + j
        d = 1 + (i + 1) * n_dirs + jn
        faces.append(np.stack([a, b, d], axis=1))
        faces.append(np.stack([a, d, c], axis=1))
    top = 1 + (rings - 1) * n_dirs
    faces.append(np.stack([top + j, top + jn, np.full(n_dirs, north)], axis=1))
    return np.concatenate(faces).astype(np.int64)


def sphere_mesh(space, center, R: float, n_dirs: int = 32) -> TriMesh:
    """Geodesic sphere of radius ``R`` around ``center`` as a triangle mesh.

    Directions form an azimuth x elevation grid with ``n_dirs`` samples of
    each; the two fibre directions (elevation +-pi/2) collapse to single
    vertices joined by triangle fans, giving ``n_dirs * (n_dirs - 2) + 2``
    vertices.  Faces of zero area (possible where the sphere touches itself
    at the boundary of its existence range) are dropped.
    """
    space = SpaceId.parse(space)
    if n_dirs < 8:
        raise ValueError("n_dirs must be at least 8")
    check_sphere_radius(space, R)
    azim = np.linspace(0.0, 2 * np.pi, n_dirs, endpoint=False)
    elev = np.linspace(-np.pi / 2, np.pi / 2, n_dirs)[1:-1]
    E, A = np.meshgrid(elev, azim, indexing="ij")
    elev_all = np.concatenate([[-np.pi / 2], E.ravel(), [np.pi / 2]])
    azim_all = np.concatenate([[0.0], A.ravel(), [0.0]])
    if space is SpaceId.SL2R:
        d1, d2 = elev_all, azim_all
    else:
        d1, d2 = azim_all, elev_all
    pts = exp_origin_many(space, d1, d2, np.full(d1.shape, float(R)))
    pts = translate_from_origin(space, center).apply(pts)
    if np.any(pts[:, 0] * pts[0, 0] <= 0):
        warnings.warn("the sphere leaves the affine chart x0 > 0; affine vertices wrap through infinity",
                      ChartWarning)
    return TriMesh(affine(pts), _fan_faces(n_dirs)).drop_degenerate()


# ------------------------------------------------------ marching tetrahedra

# Six tetrahedra around the cube diagonal 0-7; corner index = dx + 2 dy + 4 dz.
_TETS = np.array([[0, 1, 3, 7], [0, 3, 2, 7], [0, 2, 6, 7],
                  [0, 6, 4, 7], [0, 4, 5, 7], [0, 5, 1, 7]])
_CORNERS = np.array([[(c >> 0) & 1, (c >> 1) & 1, (c >> 2) & 1] for c in range(8)])


def _refine_edge_roots(fn, vectorized, p0, p1, v0, v1, t, steps):
    """Illinois false-position steps on each sign-changing grid edge.

    Returns the evaluated parameter with the smallest residual, so a step
    that overshoots never makes a vertex worse.
    """
    a, b = np.zeros_like(t), np.ones_like(t)
    fa, fb = v0.copy(), v1.copy()
    best_t = np.where(np.abs(v0) <= np.abs(v1), 0.0, 1.0)
    best_f = np.minimum(np.abs(v0), np.abs(v1))
    side = np.zeros(t.shape, dtype=int)
    for _ in range(steps):
        pts = p0 + t[:, None] * (p1 - p0)
        fm = np.asarray(fn(pts) if vectorized else [fn(q) for q in pts], dtype=float).reshape(-1)
        ok = np.isfinite(fm)
        better = ok & (np.abs(fm) < best_f)
        best_t, best_f = np.where(better, t, best_t), np.where(better, np.abs(fm), best_f)
        left = ok & (np.sign(fm) == np.sign(fa))
        right = ok & ~left
        a, fa = np.where(left, t, a), np.where(left, fm, fa)
        b, fb = np.where(right, t, b), np.where(right, fm, fb)
        # Halve the stale end's value when the same side moves twice.
        fb = np.where(left & (side == 1), 0.5 * fb, fb)
        fa = np.where(right & (side == -1), 0.5 * fa, fa)
        side = np.where(left, 1, np.where(right, -1, side))
        with np.errstate(invalid="ignore", divide="ignore"):
            tn = a + (b - a) * fa / (fa - fb)
        t = np.where(ok & np.isfinite(tn) & (fm != 0), tn, t)
    return best_t if steps else t


def isosurface_mesh(residual_fn: Callable[[np.ndarray], np.ndarray], bounds, resolution=32,
                    vectorized: bool = True, refine: int = 12) -> TriMesh:
    """Zero set of ``residual_fn`` on a box by marching tetrahedra.

    ``bounds`` is ``((x0, x1), (y0, y1), (z0, z1))``; ``resolution`` is the
    number of cells per axis (an int or a triple).  ``residual_fn`` maps an
    ``(N, 3)`` array to ``N`` values (or one point to one value with
    ``vectorized=False``).  Faces are oriented with normals pointing towards
    positive residual.  Edge crossings start from linear interpolation and
    take ``refine`` false-position steps along the edge.  Grid points where
    the residual is not finite are treated as outside the domain.  Without
    a sign change the mesh is empty and a warning is issued.
    """
    res = np.broadcast_to(np.asarray(resolution, dtype=int), (3,))
    if np.any(res < 8):
        raise ValueError("resolution must be at least 8 cells per axis")
    b = np.asarray(bounds, dtype=float).reshape(3, 2)
    axes = [np.linspace(b[i, 0], b[i, 1], res[i] + 1) for i in range(3)]
    G = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    if vectorized:
        vals = np.asarray(residual_fn(G), dtype=float).reshape(-1)
    else:
        vals = np.array([float(residual_fn(p)) for p in G])
    finite = np.isfinite(vals)
    if not ((vals[finite] < 0).any() and (vals[finite] >= 0).any()):
        warnings.warn("residual has no sign change in the box; empty mesh")
        return TriMesh(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64))

    ny, nz = res[1] + 1, res[2] + 1
    ii, jj, kk = np.meshgrid(*(np.arange(r) for r in res), indexing="ij")
    base = (ii * ny + jj) * nz + kk
    offs = (_CORNERS[:, 0] * ny + _CORNERS[:, 1]) * nz + _CORNERS[:, 2]
    corners = base.reshape(-1, 1) + offs[None, :]
    tets = corners[:, _TETS].reshape(-1, 4)
    inside = vals[tets] < 0
    n_in = inside.sum(axis=1)
    # Tetrahedra touching points where the residual is undefined are skipped.
    mixed = (n_in > 0) & (n_in < 4) & finite[tets].all(axis=1)
    tets, inside, n_in = tets[mixed], inside[mixed], n_in[mixed]

    edge_pairs = []  # (n_tri, 3, 2) global vertex pairs
    # One vertex separated from the other three.
    single = (n_in == 1) | (n_in == 3)
    if single.any():
        t = tets[single]
        lone_mask = np.where((n_in[single] == 1)[:, None], inside[single], ~inside[single])
        order = np.argsort(np.where(lone_mask, 0, 1), axis=1, kind="stable")
        tt = np.take_along_axis(t, order, axis=1)
        a = tt[:, 0]
        edge_pairs.append(np.stack([np.stack([a, tt[:, k]], axis=1) for k in (1, 2, 3)], axis=1))
    pair = n_in == 2
    if pair.any():
        t = tets[pair]
        order = np.argsort(np.where(inside[pair], 0, 1), axis=1, kind="stable")
        tt = np.take_along_axis(t, order, axis=1)
        a, bb, c, d = tt.T
        q = [np.stack([a, c], 1), np.stack([a, d], 1), np.stack([bb, d], 1), np.stack([bb, c], 1)]
        edge_pairs.append(np.stack([q[0], q[1], q[2]], axis=1))
        edge_pairs.append(np.stack([q[0], q[2], q[3]], axis=1))
    E = np.concatenate(edge_pairs)  # (T, 3, 2)
    Es = np.sort(E, axis=2)
    keys = Es[..., 0].astype(np.int64) * len(vals) + Es[..., 1]
    uniq, inv = np.unique(keys.ravel(), return_inverse=True)
    i0, i1 = uniq // len(vals), uniq % len(vals)
    v0, v1 = vals[i0], vals[i1]
    t = v0 / (v0 - v1)
    t = _refine_edge_roots(residual_fn, vectorized, G[i0], G[i1], v0, v1, t, refine)
    # Vertices landing on a grid point are welded so exact zeros keep the
    # mesh closed; faces that collapse are removed below.
    weld = np.where(t == 0.0, -1 - i0, np.where(t == 1.0, -1 - i1, uniq))
    _, first, winv = np.unique(weld, return_index=True, return_inverse=True)
    verts = G[i0[first]] + t[first, None] * (G[i1[first]] - G[i0[first]])
    faces = winv[inv].reshape(-1, 3)

    # Orient towards positive residual: compare with (outside - inside) direction.
    tri_pairs = E
    p_in = np.where((vals[tri_pairs[..., 0]] < 0)[..., None], G[tri_pairs[..., 0]], G[tri_pairs[..., 1]])
    p_out = np.where((vals[tri_pairs[..., 0]] < 0)[..., None], G[tri_pairs[..., 1]], G[tri_pairs[..., 0]])
    grad = (p_out - p_in).sum(axis=1)
    fv = verts[faces]
    normal = np.cross(fv[:, 1] - fv[:, 0], fv[:, 2] - fv[:, 0])
    flip = np.einsum("ij,ij->i", normal, grad) < 0
    faces[flip] = faces[flip][:, [0, 2, 1]]
    distinct = (faces[:, 0] != faces[:, 1]) & (faces[:, 1] != faces[:, 2]) & (faces[:, 0] != faces[:, 2])
    return TriMesh(verts, faces[distinct])


# ------------------------------------------------------------ embeddedness

def segment_hits_triangle(p, q, a, b, c, eps: float = 1e-12) -> np.ndarray:
    """Whether segments ``pq`` cross triangles ``abc`` (vectorized Moller-Trumbore)."""
    d = q - p
    e1, e2 = b - a, c - a
    h = np.cross(d, e2)
    det = np.einsum("...i,...i->...", e1, h)
    ok = np.abs(det) > eps
    inv = np.where(ok, 1.0 / np.where(ok, det, 1.0), 0.0)
    s = p - a
    u = inv * np.einsum("...i,...i->...", s, h)
    qv = np.cross(s, e1)
    v = inv * np.einsum("...i,...i->...", d, qv)
    t = inv * np.einsum("...i,...i->...", e2, qv)
    return ok & (u >= -eps) & (v >= -eps) & (u + v <= 1 + eps) & (t >= -eps) & (t <= 1 + eps)


def triangles_intersect(T1, T2) -> np.ndarray:
    """Edge-crossing test for pairs of triangles given as ``(..., 3, 3)`` arrays.

    Two non-coplanar triangles intersect exactly when an edge of one
    crosses the other; coplanar overlaps are not detected.
    """
    hit = np.zeros(np.asarray(T1).shape[:-2], dtype=bool)
    for X, Y in ((T1, T2), (T2, T1)):
        for i in range(3):
            p, q = X[..., i, :], X[..., (i + 1) % 3, :]
            hit |= segment_hits_triangle(p, q, Y[..., 0, :], Y[..., 1, :], Y[..., 2, :])
    return hit


def find_self_intersections(mesh: TriMesh, n_samples: Optional[int] = 400, rng=None,
                            margin: float = 0.0) -> list:
    """Pairs of faces without shared vertices whose interiors cross.

    ``n_samples`` faces are tested against every face whose bounding box
    overlaps theirs (all faces when ``n_samples`` is None).
    """
    rng = np.random.default_rng(rng)
    F = mesh.faces
    V = mesh.vertices[F]
    lo, hi = V.min(axis=1) - margin, V.max(axis=1) + margin
    if n_samples is None or n_samples >= len(F):
        probe = np.arange(len(F))
    else:
        probe = rng.choice(len(F), size=n_samples, replace=False)
    found = []
    for i in probe:
        cand = np.nonzero(np.all(lo <= hi[i], axis=1) & np.all(hi >= lo[i], axis=1))[0]
        shares = (F[cand][:, :, None] == F[i][None, None, :]).any(axis=(1, 2))
        cand = cand[~shares]
        if cand.size == 0:
            continue
        hit = triangles_intersect(np.broadcast_to(V[i], (cand.size, 3, 3)), V[cand])
        found.extend((int(i), int(j)) for j in cand[hit])
    return found
