"""Ball packings generated by S2xR space groups.

Group elements are triples ``(A, R, r)``: an orthogonal 3x3 matrix ``A``
acting on base-sphere row vectors, a fibre sign ``R`` and a fibre shift
``r``.  They compose as ``(A1, R1, r1)(A2, R2, r2) = (A1 A2, R1 R2,
r1 R2 + r2)`` and act on points from the right, ``(b, t) -> (b A, t R + r)``.
In the projective model the point ``(b, t)`` is ``(1, e^t b)``.
"""

from __future__ import annotations

import os
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize, minimize_scalar
from scipy.special import roots_legendre

from .geodesics import cartesian_metric, exp_origin_many, s2xr_distance
from .model import SpaceId, affine, hpoint
from .surfaces.mesh import check_sphere_radius

__all__ = [
    "GroupElement",
    "SpaceGroupSpec",
    "Orbit",
    "PackingResult",
    "KernelRegion",
    "OrbitBudgetError",
    "s2xr_group_4q_I_2",
    "lattice_group",
    "trivial_group",
    "point_group",
    "orbit",
    "max_inradius",
    "ball_volume",
    "s2xr_ball_volume",
    "dv_cell_volume",
    "exact_cell_volume",
    "density",
    "optimize_kernel",
    "optimize_strata",
    "kernel_point",
    "split_kernel",
    "fundamental_triangle",
    "thread_count",
    "write_trace_csv",
    "cell_membership",
    "sample_period",
]

KEY_DECIMALS = 9


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("THURSTON_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class GroupElement:
    A: np.ndarray
    R: int = 1
    r: float = 0.0
    word: str = ""

    def compose(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(self.A @ other.A, self.R * other.R, self.r * other.R + other.r,
                            self.word + other.word)

    def inverse(self) -> "GroupElement":
        # (A, R, r)^-1 = (A^-1, R, -r R) since R = +-1.
        w = "".join(c.swapcase() for c in reversed(self.word))
        return GroupElement(self.A.T, self.R, -self.r * self.R, w)

    def act(self, b, t):
        return np.asarray(b) @ self.A, t * self.R + self.r

    def key(self):
        return (tuple(np.round(self.A, KEY_DECIMALS).ravel() + 0.0), self.R,
                round(self.r, KEY_DECIMALS) + 0.0)


def _identity() -> GroupElement:
    return GroupElement(np.eye(3), 1, 0.0, "")


@dataclass
class SpaceGroupSpec:
    space: SpaceId
    generators: list
    lattice_period: float
    name: str = ""
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.space = SpaceId.parse(self.space)
        if self.space is not SpaceId.S2xR:
            raise ValueError("only S2xR space groups are implemented")
        if not self.lattice_period > 0:
            raise ValueError("lattice period must be positive")


def _reflection(normal) -> np.ndarray:
    n = np.asarray(normal, dtype=float)
    n = n / np.linalg.norm(n)
    return np.eye(3) - 2 * np.outer(n, n)


def fundamental_triangle(q: int) -> np.ndarray:
    """Vertices ``A1, A2, A3`` (rows) of the (2, 2, q) spherical triangle.

    ``A3`` is the pole with angle ``pi/q``; ``A1`` and ``A2`` lie on the
    equator with right angles.
    """
    return np.array([[np.sin(np.pi / q), np.cos(np.pi / q), 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])


def s2xr_group_4q_I_2(q: int = 2, tau: float = 2 * np.pi / np.sqrt(3)) -> SpaceGroupSpec:
    """Glide-reflection group 4q.I.2 with lattice period ``tau``.

    Linear parts are the reflections in the sides of the (2, 2, q)
    triangle: ``g1`` in the plane through ``A3, A2``, ``g2`` in the plane
    through ``A3, A1`` and ``g3`` in the base equator.  Translation parts
    are ``(0, 0, tau/2)``, so ``g3`` is a glide and ``g3^2`` the lattice
    translation ``tau``.
    """
    if int(q) != q or q < 2:
        raise ValueError("q must be an integer >= 2")
    A1, A2, A3 = fundamental_triangle(int(q))
    g1 = GroupElement(_reflection(np.cross(A3, A2)), 1, 0.0, "a")
    g2 = GroupElement(_reflection(np.cross(A3, A1)), 1, 0.0, "b")
    g3 = GroupElement(_reflection(np.cross(A1, A2)), 1, tau / 2, "c")
    return SpaceGroupSpec(SpaceId.S2xR, [g1, g2, g3], float(tau), "4q.I.2", {"q": int(q), "tau": float(tau)})


def lattice_group(tau: float) -> SpaceGroupSpec:
    """Pure fibre translations by multiples of ``tau``."""
    return SpaceGroupSpec(SpaceId.S2xR, [GroupElement(np.eye(3), 1, float(tau), "t")], float(tau),
                          "lattice", {"tau": float(tau)})


def trivial_group() -> SpaceGroupSpec:
    return SpaceGroupSpec(SpaceId.S2xR, [], np.inf, "trivial")


def point_group(group: SpaceGroupSpec, budget: int = 10000) -> list:
    """Distinct linear parts ``(A, R)`` generated by the group."""
    seen = {}
    queue = deque([(np.eye(3), 1)])
    while queue:
        A, R = queue.popleft()
        k = (tuple(np.round(A, KEY_DECIMALS).ravel() + 0.0), R)
        if k in seen:
            continue
        seen[k] = (A, R)
        if len(seen) > budget:
            raise OrbitBudgetError("point group is not finite within the budget")
        for g in group.generators:
            queue.append((A @ g.A, R * g.R))
    return list(seen.values())


# ---------------------------------------------------------------- orbits

class OrbitBudgetError(RuntimeError):
    pass


def split_kernel(K):
    """Base direction and fibre coordinate of an S2xR point."""
    a = affine(hpoint(K))
    n = np.linalg.norm(a)
    return a / n, float(np.log(n))


def kernel_point(b, t: float = 0.0) -> np.ndarray:
    b = np.asarray(b, dtype=float)
    return hpoint(*(np.exp(t) * b / np.linalg.norm(b)))


@dataclass
class Orbit:
    kernel: np.ndarray
    points: np.ndarray          # homogeneous, first row is the kernel
    words: list
    distances: np.ndarray       # from the kernel
    bound: float
    stabilizer: list            # words of elements fixing the kernel
    complete: bool = True

    @property
    def base(self):
        return np.array([split_kernel(p)[0] for p in self.points])

    @property
    def fibre(self):
        return np.array([split_kernel(p)[1] for p in self.points])


def _elements(group: SpaceGroupSpec, shift_bound: float, budget: int):
    """Group elements with ``|r| <= shift_bound`` by breadth-first search.

    The search keeps elements whose shift stays below the bound plus the
    total generator shift times the point group order, which is enough
    for every short element to be reached through short prefixes.
    """
    gens = list(group.generators) + [g.inverse() for g in group.generators]
    order = len(point_group(group)) if group.generators else 1
    slack = sum(abs(g.r) for g in group.generators) * order
    limit = shift_bound + slack
    seen = {}
    queue = deque([_identity()])
    complete = True
    while queue:
        e = queue.popleft()
        k = e.key()
        if k in seen:
            continue
        seen[k] = e
        if len(seen) > budget:
            complete = False
            break
        for g in gens:
            n = e.compose(g)
            if abs(n.r) <= limit and n.key() not in seen:
                queue.append(n)
    return [e for e in seen.values() if abs(e.r) <= shift_bound], complete


def orbit(group: SpaceGroupSpec, K, bound: float, budget: int = 200000, dedup_tol: float = 1e-9) -> Orbit:
    """Orbit points of ``K`` within distance ``bound``, deduplicated."""
    if not bound > 0:
        raise ValueError("bound must be positive")
    K = hpoint(K)
    b, t = split_kernel(K)
    elems, complete = _elements(group, bound + 2 * abs(t), budget)
    pts, words, dists, stab = [], [], [], []
    for e in sorted(elems, key=lambda e: (len(e.word), e.word)):
        bb, tt = e.act(b, t)
        P = kernel_point(bb, tt)
        d = float(s2xr_distance(K, P))
        if d > bound:
            continue
        if d <= dedup_tol:
            stab.append(e.word)
        if any(np.abs(affine(P) - affine(Q)).max() <= dedup_tol for Q in pts):
            continue
        pts.append(P)
        words.append(e.word)
        dists.append(d)
    if not complete:
        import warnings

        warnings.warn("orbit enumeration hit its budget; the orbit may be incomplete")
    order = np.argsort(dists, kind="stable")
    return Orbit(K, np.array(pts)[order], [words[i] for i in order], np.array(dists)[order],
                 float(bound), stab, complete)


def max_inradius(group: SpaceGroupSpec, K, bound: Optional[float] = None) -> float:
    """Half the smallest distance from ``K`` to one of its other orbit points."""
    if bound is None:
        bound = _default_bound(group)
    orb = orbit(group, K, bound)
    others = orb.distances[orb.distances > 1e-9]
    if others.size == 0:
        raise ValueError("no orbit point other than the kernel within the bound")
    return 0.5 * float(others.min())


def _default_bound(group: SpaceGroupSpec) -> float:
    tau = group.lattice_period
    return 2 * np.pi + (2 * tau if np.isfinite(tau) else 0.0)


# ---------------------------------------------------------------- volumes

def s2xr_ball_volume(R: float) -> float:
    """Closed form ``4 pi int_0^min(R, pi) sin(w) sqrt(R^2 - w^2) dw``."""
    from scipy.integrate import quad

    top = min(R, np.pi)
    val, _ = quad(lambda w: np.sin(w) * np.sqrt(max(R * R - w * w, 0.0)), 0.0, top,
                  epsabs=1e-13, epsrel=1e-13, limit=200)
    return float(4 * np.pi * val)


def _sqrt_det_g(space: SpaceId, P):
    """``sqrt(det g)`` in affine model coordinates at homogeneous points ``P``."""
    a = affine(P)
    if space is SpaceId.S2xR:
        return np.sum(a * a, axis=-1) ** -1.5
    if space is SpaceId.H2xR:
        q = a[..., 0] ** 2 - a[..., 1] ** 2 - a[..., 2] ** 2
        return q ** -1.5
    if space in (SpaceId.Nil, SpaceId.Sol):
        return np.ones(a.shape[:-1])
    flat = P.reshape(-1, 4)
    out = np.array([np.sqrt(np.linalg.det(cartesian_metric(space, p).g)) for p in flat])
    return out.reshape(P.shape[:-1])


def _sl2r_chart_jacobian(alpha, lam, s, h):
    from .geodesics import sl2r_closed_form

    def chart(a, l, ss):
        r, th, ph = sl2r_closed_form(ss, a)
        return np.stack([r, th + l, ph], axis=-1)

    d_s = (chart(alpha, lam, s + h) - chart(alpha, lam, s - h)) / (2 * h)
    d_a = (chart(alpha + h, lam, s) - chart(alpha - h, lam, s)) / (2 * h)
    d_l = (chart(alpha, lam + h, s) - chart(alpha, lam - h, s)) / (2 * h)
    J = np.abs(np.linalg.det(np.stack([d_s, d_a, d_l], axis=-1)))
    r = chart(alpha, lam, s)[..., 0]
    return J * 0.5 * np.sinh(2 * r)


def ball_volume(space, R: float, n_radial: int = 24, n_elev: int = 48, n_azim: int = 48,
                h: float = 1e-5) -> float:
    """Volume of the geodesic ball of radius ``R`` by quadrature over exp.

    Gauss-Legendre nodes in the arc length and the fibre elevation, a
    uniform rule in the azimuth (exact for the periodic integrand).  The
    Jacobian of ``exp_origin`` comes from central differences in the
    direction parameters; for SL2R the closed-form polar chart is used,
    elsewhere affine model coordinates with ``sqrt(det g)``.
    """
    space = SpaceId.parse(space)
    check_sphere_radius(space, R)
    if R == 0:
        return 0.0
    xs, ws = roots_legendre(n_radial)
    s = 0.5 * R * (xs + 1)
    w_s = 0.5 * R * ws
    xe, we = roots_legendre(n_elev)
    elev = 0.5 * np.pi * xe
    w_e = 0.5 * np.pi * we
    azim = np.linspace(0.0, 2 * np.pi, n_azim, endpoint=False)
    w_a = 2 * np.pi / n_azim
    S, E, A = np.meshgrid(s, elev, azim, indexing="ij")
    W = w_s[:, None, None] * w_e[None, :, None] * w_a

    if space is SpaceId.SL2R:
        return float(np.sum(W * _sl2r_chart_jacobian(E, A, S, h)))

    def ex(d1, d2, ss):
        return exp_origin_many(space, d1, d2, ss)

    # dir1 is the azimuth and dir2 the elevation for the remaining spaces.
    P = ex(A, E, S)
    d_s = (affine(ex(A, E, S + h)) - affine(ex(A, E, np.maximum(S - h, 0.0)))) / (
        S + h - np.maximum(S - h, 0.0))[..., None]
    d_a = (affine(ex(A + h, E, S)) - affine(ex(A - h, E, S))) / (2 * h)
    d_e = (affine(ex(A, E + h, S)) - affine(ex(A, E - h, S))) / (2 * h)
    J = np.abs(np.linalg.det(np.stack([d_s, d_a, d_e], axis=-1)))
    return float(np.sum(W * J * _sqrt_det_g(space, P)))


def _orbits_per_period(group: SpaceGroupSpec, K) -> int:
    """Distinct orbit points with fibre coordinate in one lattice period."""
    tau = group.lattice_period
    b, t = split_kernel(K)
    orb = orbit(group, K, np.pi + 2 * tau + 2 * abs(t))
    fib = orb.fibre
    keep = [(bb, (tt - t) % tau) for bb, tt in zip(orb.base, fib)]
    uniq = []
    for bb, tt in keep:
        tt = 0.0 if abs(tt - tau) < 1e-9 else tt
        if not any(np.abs(bb - u).max() < 1e-9 and abs(tt - v) < 1e-9 for u, v in uniq):
            uniq.append((bb, tt))
    return len(uniq)


def exact_cell_volume(group: SpaceGroupSpec, K) -> float:
    """``4 pi tau / (orbit points per period)``: the cells tile S2 x [0, tau)."""
    if not np.isfinite(group.lattice_period):
        raise ValueError("the Dirichlet-Voronoi cell of a group without fibre lattice is unbounded")
    return 4 * np.pi * group.lattice_period / _orbits_per_period(group, K)


def _nearest_fraction(samples_b, samples_t, orb: Orbit, chunk: int = 20000):
    """Fraction of samples whose nearest orbit point is the kernel (index 0)."""
    Pb, Pt = orb.base, orb.fibre
    hits = 0.0
    for i in range(0, len(samples_t), chunk):
        b = samples_b[i:i + chunk]
        t = samples_t[i:i + chunk]
        omega = np.arccos(np.clip(b @ Pb.T, -1.0, 1.0))
        d = np.hypot(omega, t[:, None] - Pt[None, :])
        dmin = d.min(axis=1)
        near = d[:, 0] <= dmin + 1e-12
        ties = (d <= dmin[:, None] + 1e-12).sum(axis=1)
        hits += float(np.sum(near / ties))
    return hits / len(samples_t)


def cell_membership(orb: Orbit, points) -> np.ndarray:
    """Whether homogeneous ``points`` lie in the Dirichlet-Voronoi cell of the orbit kernel."""
    pts = np.atleast_2d(points)
    b = np.array([split_kernel(p)[0] for p in pts])
    t = np.array([split_kernel(p)[1] for p in pts])
    omega = np.arccos(np.clip(b @ orb.base.T, -1.0, 1.0))
    d = np.hypot(omega, t[:, None] - orb.fibre[None, :])
    return d[:, 0] <= d.min(axis=1) + 1e-12


def sample_period(rng, n: int, t0: float, tau: float) -> np.ndarray:
    """Stratified homogeneous sample points of ``S2 x [t0, t0 + tau)``."""
    b, t = _stratified_samples(rng, n, t0, tau)
    return np.concatenate([np.ones((len(t), 1)), b * np.exp(t)[:, None]], axis=1)


def _stratified_samples(rng, n: int, t0: float, tau: float):
    """Jittered samples of S2 x [t0, t0 + tau): uniform in (z, phi, t)."""
    m = max(1, int(round(n ** (1 / 3))))
    idx = np.stack(np.meshgrid(np.arange(m), np.arange(m), np.arange(m), indexing="ij"), -1).reshape(-1, 3)
    u = (idx + rng.random(idx.shape)) / m
    z = 2 * u[:, 0] - 1
    phi = 2 * np.pi * u[:, 1]
    rxy = np.sqrt(np.maximum(1 - z * z, 0.0))
    b = np.stack([rxy * np.cos(phi), rxy * np.sin(phi), z], axis=1)
    return b, t0 + tau * u[:, 2]


def dv_cell_volume(group: SpaceGroupSpec, K, n_samples: int = 200000, n_replicates: int = 8,
                   seed: Optional[int] = 0, bound: Optional[float] = None, tol: float = 1e-12):
    """Monte Carlo volume of the Dirichlet-Voronoi cell of ``K``.

    Samples are stratified over one period ``S2 x [t_K - tau/2, t_K + tau/2)``
    (uniform in height, azimuth and fibre, which is the S2xR volume
    measure).  The cell fraction times ``4 pi tau`` is the cell volume.
    Independent replicates give the standard error.  The orbit bound is
    doubled once to check that the truncation does not change the result.

    Returns ``(volume, standard_error)``.
    """
    tau = group.lattice_period
    if not np.isfinite(tau):
        raise ValueError("the Dirichlet-Voronoi cell of a group without fibre lattice is unbounded")
    b, t = split_kernel(K)
    if bound is None:
        bound = 2 * np.hypot(np.pi, tau / 2) + 1e-6
    orb = orbit(group, K, bound)
    orb2 = orbit(group, K, 2 * bound)
    # Orbit points within the first bound are all that can compete; the
    # doubled orbit must not add any point closer than the bound.
    if len(orb2.points) > len(orb.points) and orb2.distances[len(orb.points)] <= bound:
        raise OrbitBudgetError("orbit truncation changed under doubling")
    seeds = np.random.SeedSequence(seed).spawn(n_replicates)

    def one(ss):
        rng = np.random.default_rng(ss)
        sb, st = _stratified_samples(rng, n_samples, t - tau / 2, tau)
        return _nearest_fraction(sb, st, orb)

    workers = thread_count()
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            fr = list(ex.map(one, seeds))
    else:
        fr = [one(ss) for ss in seeds]
    fr = np.array(fr)
    vol = 4 * np.pi * tau * fr
    return float(vol.mean()), float(vol.std(ddof=1) / np.sqrt(len(vol))) if len(vol) > 1 else np.nan


# ---------------------------------------------------------------- density

@dataclass
class PackingResult:
    kernel: np.ndarray
    rho: float
    ball_volume: float
    cell_volume: float
    density: float
    kissing: int
    cell_volume_stderr: float = float("nan")
    group: str = ""
    params: dict = field(default_factory=dict)
    min_orbit_distance: float = float("nan")
    trace: list = field(default_factory=list)

    def as_dict(self):
        b, t = split_kernel(self.kernel)
        return {"kernel": list(affine(self.kernel)), "kernel_base": list(b), "kernel_fibre": t,
                "rho": self.rho, "ball_volume": self.ball_volume, "cell_volume": self.cell_volume,
                "cell_volume_stderr": self.cell_volume_stderr, "density": self.density,
                "kissing": self.kissing, "group": self.group, "params": self.params,
                "min_orbit_distance": self.min_orbit_distance}


def density(group: SpaceGroupSpec, K, cell: str = "mc", rho: Optional[float] = None,
            n_samples: int = 200000, n_replicates: int = 8, seed: Optional[int] = 0,
            volume_resolution: Sequence[int] = (24, 48, 48)) -> PackingResult:
    """Packing density of the balls of radius ``rho`` (default: maximal) around the orbit of ``K``.

    ``cell`` selects the Dirichlet-Voronoi volume: ``"mc"`` (Monte Carlo,
    with standard error) or ``"exact"`` (cells tile one fibre period).
    """
    K = hpoint(K)
    bound = _default_bound(group)
    orb = orbit(group, K, bound)
    others = orb.distances[orb.distances > 1e-9]
    if others.size == 0:
        raise ValueError("no orbit point other than the kernel within the bound")
    rho_max = 0.5 * float(others.min())
    if rho is None:
        rho = rho_max
    elif rho > rho_max + 1e-12:
        raise ValueError("balls of this radius overlap")
    vol = ball_volume(SpaceId.S2xR, min(rho, np.pi), *volume_resolution)
    if cell == "mc":
        cv, se = dv_cell_volume(group, K, n_samples, n_replicates, seed)
    elif cell == "exact":
        cv, se = exact_cell_volume(group, K), 0.0
    else:
        raise ValueError(f"unknown cell method {cell!r}")
    kissing = int(np.sum(np.abs(others - 2 * rho) <= 1e-6))
    return PackingResult(K, float(rho), vol, cv, vol / cv, kissing, se, group.name,
                         dict(group.params), float(others.min()))


# --------------------------------------------------------------- optimizer

@dataclass
class KernelRegion:
    """Simplex of kernel base directions (fibre coordinate 0).

    ``open_vertices`` lists vertex indices excluded from the region (the
    search stays ``margin`` away from them in barycentric terms).
    """

    vertices: np.ndarray
    open_vertices: tuple = ()
    margin: float = 1e-6

    def __post_init__(self):
        self.vertices = np.atleast_2d(np.asarray(self.vertices, dtype=float))
        if self.vertices.size == 0:
            raise ValueError("region is empty")

    @property
    def dim(self) -> int:
        return len(self.vertices) - 1

    def point(self, lam) -> np.ndarray:
        lam = np.asarray(lam, dtype=float)
        b = lam @ self.vertices
        return kernel_point(b)

    def grid(self, n: int):
        """Barycentric grid points honouring the open vertices."""
        d = self.dim
        if d == 0:
            return [np.array([1.0])]
        pts = []
        for idx in np.ndindex(*([n + 1] * d)):
            if sum(idx) > n:
                continue
            lam = np.array([n - sum(idx), *idx], dtype=float) / n
            if any(lam[j] > 1 - self.margin for j in self.open_vertices):
                continue
            pts.append(lam)
        return pts

    def clamp(self, lam):
        lam = np.clip(np.asarray(lam, dtype=float), 0.0, None)
        lam = lam / lam.sum()
        for j in self.open_vertices:
            if lam[j] > 1 - self.margin:
                others = np.arange(len(lam)) != j
                tot = lam[others].sum()
                lam[others] = lam[others] / tot * self.margin if tot > 0 else self.margin / others.sum()
                lam[j] = 1 - self.margin
        return lam


def _glide_parities(q: int) -> list:
    """Point group of 4q.I.2 with the parity of each shift in half periods.

    Every element is ``(A, 1, (k + 2m) tau / 2)`` for a fixed parity ``k``
    of its linear part, so distances for any ``tau`` follow in closed form.
    """
    gens = s2xr_group_4q_I_2(q, 2.0).generators
    par = {}
    queue = deque([(np.eye(3), 0)])
    while queue:
        A, k = queue.popleft()
        key = tuple(np.round(A, KEY_DECIMALS).ravel() + 0.0)
        if key in par:
            if par[key][1] != k:
                raise ValueError("linear part with two shift parities: the lattice is finer than tau")
            continue
        par[key] = (A, k)
        for g in gens:
            queue.append((A @ g.A, (k + int(round(g.r))) % 2))
    return list(par.values())


class _KernelProfile:
    """Orbit data of a base kernel under 4q.I.2 as functions of ``tau``."""

    def __init__(self, q: int, b, tol: float = 1e-9):
        b = np.asarray(b, dtype=float)
        b = b / np.linalg.norm(b)
        self.omega, self.parity, images = [], [], []
        for A, k in _glide_parities(q):
            img = b @ A
            self.omega.append(float(np.arccos(np.clip(b @ img, -1.0, 1.0))))
            self.parity.append(k)
            if not any(np.abs(img - u).max() < tol and k == v for u, v in images):
                images.append((img, k))
        self.omega = np.array(self.omega)
        self.parity = np.array(self.parity)
        self.per_period = len(images)
        self.tol = tol

    def min_distance(self, tau: float) -> float:
        fixed = self.omega < self.tol
        shift = np.where(self.parity == 1, tau / 2, np.where(fixed, tau, 0.0))
        return float(np.min(np.hypot(self.omega, shift)))

    def density(self, tau: float) -> float:
        rho = 0.5 * self.min_distance(tau)
        return s2xr_ball_volume(rho) * self.per_period / (4 * np.pi * tau)


def _best_tau(q: int, K, tau_range=(0.2, 4 * np.pi), n_grid: int = 48, tau_mode: str = "first"):
    """Lattice period maximizing the density of kernel ``K``.

    ``tau_mode="first"`` takes the first local maximum of ``delta(tau)`` as
    ``tau`` grows, where the ball is first pinned by its neighbours;
    ``"global"`` takes the largest value on the range.  Larger periods let
    the balls grow into slabs whose density tends to 1, so only the local
    mode gives a meaningful optimum.
    """
    if tau_mode not in ("first", "global"):
        raise ValueError(f"unknown tau_mode {tau_mode!r}")
    prof = _KernelProfile(q, split_kernel(K)[0])
    taus = np.linspace(*tau_range, n_grid)
    vals = np.array([prof.density(t) for t in taus])
    k = int(np.argmax(vals))
    if tau_mode == "first":
        peaks = [i for i in range(1, n_grid - 1) if vals[i] >= vals[i - 1] and vals[i] > vals[i + 1]]
        if peaks:
            k = peaks[0]
    lo, hi = taus[max(k - 1, 0)], taus[min(k + 1, n_grid - 1)]
    res = minimize_scalar(lambda t: -prof.density(t), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-10})
    if -res.fun >= vals[k]:
        return float(res.x), float(-res.fun)
    return float(taus[k]), float(vals[k])


def _family_q(group) -> int:
    if isinstance(group, SpaceGroupSpec):
        if group.name != "4q.I.2":
            raise ValueError("kernel optimization is implemented for the 4q.I.2 family")
        return int(group.params["q"])
    return int(group)


def optimize_kernel(group, region: KernelRegion, n_grid: int = 8, tau_range=(0.2, 4 * np.pi),
                    final_cell: str = "mc", seed: Optional[int] = 0, tau_mode: str = "first",
                    **density_kw) -> PackingResult:
    """Densest packing of 4q.I.2 over kernels in ``region`` and over the period ``tau``.

    Every candidate kernel gets its own optimal ``tau`` (bounded Brent after
    a coarse scan) with the closed-form ball volume and the exact cell
    volume.  The best grid point is refined by Nelder-Mead in barycentric
    coordinates (dimension >= 1).  The winner is re-evaluated with the
    quadrature ball volume and, by default, the Monte Carlo cell volume.
    ``group`` is a 4q.I.2 spec (its period is re-optimized) or ``q``.
    """
    q = _family_q(group)
    trace = []

    def score(lam):
        lam = region.clamp(lam)
        K = region.point(lam)
        tau, d = _best_tau(q, K, tau_range, tau_mode=tau_mode)
        trace.append({"lambda": list(lam), "tau": tau, "density": d})
        return d, tau, lam

    grid = region.grid(n_grid)
    if not grid:
        raise ValueError("region is empty")
    workers = thread_count()
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            scored = list(ex.map(score, grid))
    else:
        scored = [score(lam) for lam in grid]
    best = max(scored, key=lambda r: r[0])
    if region.dim >= 1:
        x0 = best[2][1:]
        res = minimize(lambda x: -score(np.concatenate([[1 - x.sum()], x]))[0], x0, method="Nelder-Mead",
                       options={"xatol": 1e-9, "fatol": 1e-12, "maxiter": 400})
        cand = score(np.concatenate([[1 - res.x.sum()], res.x]))
        if cand[0] > best[0]:
            best = cand
    _, tau, lam = best
    K = region.point(lam)
    g = s2xr_group_4q_I_2(q, tau)
    out = density(g, K, cell=final_cell, seed=seed, **density_kw)
    out.trace = trace
    return out


def optimize_strata(group=2, n_grid: int = 8, final_cell: str = "mc", seed: Optional[int] = 0,
                    tau_mode: str = "first", **density_kw) -> dict:
    """Optimize the kernel over the vertices, open edges and interior of the fundamental triangle.

    Returns ``{stratum name: PackingResult}`` plus ``"best"``.
    """
    q = _family_q(group)
    A = fundamental_triangle(q)
    strata = {
        "A1": KernelRegion(A[[0]]), "A2": KernelRegion(A[[1]]), "A3": KernelRegion(A[[2]]),
        "A2A3": KernelRegion(A[[1, 2]], open_vertices=(0, 1)),
        "A1A3": KernelRegion(A[[0, 2]], open_vertices=(0, 1)),
        "A1A2": KernelRegion(A[[0, 1]], open_vertices=(0, 1)),
        "A1A2A3": KernelRegion(A, open_vertices=(0, 1, 2)),
    }
    out = {}
    for name, reg in strata.items():
        out[name] = optimize_kernel(q, reg, n_grid, final_cell="exact", tau_mode=tau_mode, **density_kw)
    best = max(out, key=lambda k: out[k].density)
    final = out[best]
    g = s2xr_group_4q_I_2(q, final.params["tau"])
    res = density(g, final.kernel, cell=final_cell, seed=seed, **density_kw)
    res.trace = final.trace
    out["best"] = res
    out["best_stratum"] = best
    return out


def write_trace_csv(path, trace: list) -> None:
    """Search trace as CSV: barycentric coordinates, period, density."""
    from .io import write_csv

    if not trace:
        write_csv(path, ["tau", "density"], [])
        return
    n = len(trace[0]["lambda"])
    header = [f"lambda{i}" for i in range(n)] + ["tau", "density"]
    write_csv(path, header, [list(t["lambda"]) + [t["tau"], t["density"]] for t in trace])
