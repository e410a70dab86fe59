"""Command-line interface.

Exit codes: 0 on success, 2 on invalid input, 1 when a numerical method
fails (the message carries its residual diagnostics).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import io
from .model import SpaceId, affine, hpoint

EXIT_OK, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2


class UsageError(ValueError):
    pass


def _space(text: str) -> SpaceId:
    try:
        return SpaceId.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _points(values, n=None, name="points"):
    vals = np.asarray(values, dtype=float)
    if vals.size % 3 or (n is not None and vals.size != 3 * n):
        want = f"{3 * n}" if n is not None else "a multiple of 3"
        raise UsageError(f"--{name} needs {want} numbers, got {vals.size}")
    return [hpoint(*row) for row in vals.reshape(-1, 3)]


def _emit(obj, out):
    """JSON to ``out`` or stdout."""
    if out:
        io.write_json(out, obj)
    else:
        print(io.dumps(obj))


def _fmt_of(args, default="json"):
    if getattr(args, "format", None):
        return args.format
    if args.out:
        ext = Path(args.out).suffix.lower().lstrip(".")
        if ext in ("obj", "csv", "json"):
            return ext
    return default


# ------------------------------------------------------------ subcommands

def cmd_geodesic(args):
    from .geodesics import exp_origin_many

    if args.s < 0 or args.samples < 2:
        raise UsageError("need s >= 0 and at least 2 samples")
    s = np.linspace(0.0, args.s, args.samples)
    pts = affine(exp_origin_many(args.space, args.dir1, args.dir2, s))
    rows = [[si, *p] for si, p in zip(s, pts)]
    if args.out:
        io.write_csv(args.out, ["s", "x", "y", "z"], rows)
    else:
        print("s,x,y,z")
        for r in rows:
            print(",".join(io.fmt(v) for v in r))


def cmd_distance(args):
    from .geodesics import distance

    P, Q = _points(args.P, 1, "P") + _points(args.Q, 1, "Q")
    d, prm = distance(args.space, P, Q)
    _emit({"space": args.space.value, "distance": d,
           "direction": {"dir1": prm.dir1, "dir2": prm.dir2, "s": prm.s}}, args.out)


def cmd_angle(args):
    from .triangles import vertex_angle

    A, B, C = _points(args.vertices, 3, "vertices")
    _emit({"space": args.space.value, "angle": vertex_angle(args.space, A, B, C)}, args.out)


def cmd_triangle(args):
    from .triangles import GeodesicTriangle, classify_triangle, interior_angles

    verts = _points(args.vertices, 3, "vertices")
    T = GeodesicTriangle(args.space, verts)
    rep = interior_angles(T)
    _emit({"space": args.space.value, "kind": classify_triangle(args.space, verts),
           **rep.as_dict()}, args.out)


def cmd_circumsphere(args):
    from .triangles import circumsphere

    cs = circumsphere(args.space, _points(args.vertices, 4, "vertices"))
    _emit({"space": args.space.value, **cs.as_dict()}, args.out)


def _write_mesh(mesh, args):
    fmt = _fmt_of(args, "obj")
    if not args.out:
        raise UsageError("--out is required for meshes")
    if fmt == "obj":
        mesh.write_obj(args.out)
    elif fmt == "csv":
        mesh.write_csv(args.out)
    else:
        raise UsageError("meshes are written as obj or csv")
    print(io.dumps({"vertices": len(mesh.vertices), "faces": len(mesh.faces), "area": mesh.area(),
                    "watertight": mesh.is_watertight(), "out": args.out}))


def cmd_sphere_mesh(args):
    from .surfaces import sphere_mesh

    (C,) = _points(args.center, 1, "center")
    _write_mesh(sphere_mesh(args.space, C, args.radius, args.n_dirs), args)


def cmd_apollonius_mesh(args):
    from .surfaces import ApolloniusSpec, apollonius_residual_fn, isosurface_mesh

    P1, P2 = _points(args.p1, 1, "p1") + _points(args.p2, 1, "p2")
    spec = ApolloniusSpec(args.space, P1, P2, args.lam)
    b = np.asarray(args.bounds, dtype=float)
    if b.size != 6:
        raise UsageError("--bounds needs xmin xmax ymin ymax zmin zmax")
    bounds = b.reshape(3, 2)
    if np.any(bounds[:, 1] <= bounds[:, 0]):
        raise UsageError("each bound needs min < max")
    mesh = isosurface_mesh(apollonius_residual_fn(spec), bounds, args.resolution)
    _write_mesh(mesh, args)


def cmd_ratio(args):
    from .ratios import simple_ratio

    A, P, B = _points(args.points, 3, "points")
    _emit({"space": args.space.value, "kind": args.kind,
           "ratio": simple_ratio(args.kind, args.space, A, P, B)}, args.out)


def cmd_ceva(args):
    from . import ratios

    if args.triangle is not None:
        tri = _points(args.triangle, 3, "triangle")
        (T,) = _points(args.cevian_point, 1, "cevian-point") if args.cevian_point else (None,)
        feet = _points(args.feet, 3, "feet")
        if args.kind == "nil" and T is None:
            prod = ratios.nil_ceva_product(tri, feet)
        elif T is None:
            raise UsageError("--cevian-point is required with --triangle")
        else:
            prod = ratios.ceva_product(args.space, tri, T, feet, kind=args.kind)
        _emit({"space": args.space.value, "kind": args.kind, "product": prod}, args.out)
        return
    if args.kind == "nil":
        cfg = ratios.nil_ceva_configuration()
        prod = ratios.nil_ceva_product(cfg.triangle, cfg.points)
        extra = {"product": prod, "projected_product": ratios.nil_projected_ceva_product(cfg)}
    else:
        if args.space not in (SpaceId.S2xR, SpaceId.H2xR):
            raise UsageError("constructed base/fibre configurations exist for s2xr and h2xr")
        build = ratios.base_ceva_configuration if args.kind == "base" else ratios.fibre_ceva_configuration
        cfg = build(args.space)
        extra = {"product": ratios.ceva_product(args.space, cfg.triangle, cfg.cevian_point, cfg.points,
                                                kind=args.kind)}
    _emit({**cfg.as_dict(), **extra}, args.out)


def cmd_menelaus(args):
    from . import ratios

    if args.triangle is not None:
        tri = _points(args.triangle, 3, "triangle")
        P, Q, R = _points(args.transversal, 3, "transversal")
        prod = ratios.menelaus_product(args.space, tri, P, Q, R, kind=args.kind)
        _emit({"space": args.space.value, "kind": args.kind, "product": prod}, args.out)
        return
    if args.kind == "nil":
        cfg = ratios.nil_menelaus_counterexample()
        _emit(cfg.as_dict(), args.out)
        return
    if args.space not in (SpaceId.S2xR, SpaceId.H2xR):
        raise UsageError("constructed base/fibre configurations exist for s2xr and h2xr")
    build = ratios.base_menelaus_configuration if args.kind == "base" else ratios.fibre_menelaus_configuration
    cfg = build(args.space)
    prod = ratios.menelaus_product(args.space, cfg.triangle, *cfg.points, kind=args.kind)
    _emit({**cfg.as_dict(), "product": prod}, args.out)


def cmd_packing(args):
    from . import packing as pk

    if args.group != "4q.I.2":
        raise UsageError("only the 4q.I.2 family is available")
    mc = dict(n_samples=args.samples, n_replicates=args.replicates)
    if args.optimize:
        res = pk.optimize_strata(args.q, n_grid=args.grid, final_cell=args.cell, seed=args.seed,
                                 tau_mode=args.tau_mode, **mc)
        best = res["best"]
        out = {**best.as_dict(), "best_stratum": res["best_stratum"],
               "strata": {k: {"density": v.density, "tau": v.params["tau"], "kernel": list(affine(v.kernel))}
                          for k, v in res.items() if isinstance(v, pk.PackingResult) and k != "best"}}
    else:
        A = pk.fundamental_triangle(args.q)
        names = {"A1": A[0], "A2": A[1], "A3": A[2]}
        if args.kernel in names:
            K = pk.kernel_point(names[args.kernel])
        else:
            try:
                K = pk.kernel_point([float(v) for v in args.kernel.split(",")])
            except ValueError as exc:
                raise UsageError("--kernel is A1, A2, A3 or x,y,z") from exc
        tau = args.tau
        if tau is None:
            tau, _ = pk._best_tau(args.q, K, tau_mode=args.tau_mode)
        if tau <= 0:
            raise UsageError("--tau must be positive")
        best = pk.density(pk.s2xr_group_4q_I_2(args.q, tau), K, cell=args.cell, seed=args.seed, **mc)
        out = best.as_dict()
    _emit(out, args.out)
    if args.trace:
        pk.write_trace_csv(args.trace, best.trace)


def cmd_nil_tools(args):
    from .geodesics import GeodesicParams, fibre_projection_nil, nil_sphere_cross_section
    from .surfaces import nil_ball_convexity_check

    if args.tool == "projection":
        pr = fibre_projection_nil(GeodesicParams(SpaceId.Nil, args.alpha, args.theta, args.s))
        _emit({"kind": pr.kind, "center": pr.center, "radius": pr.radius, "direction": pr.direction},
              args.out)
    elif args.tool == "cross-section":
        th = np.linspace(-np.pi / 2, np.pi / 2, args.samples)
        X, Z = nil_sphere_cross_section(args.radius, th)
        rows = [[t, x, z] for t, x, z in zip(th, X, Z)]
        if args.out:
            io.write_csv(args.out, ["theta", "X", "Z"], rows)
        else:
            print("theta,X,Z")
            for r in rows:
                print(",".join(io.fmt(v) for v in r))
    else:
        _emit({"radius": args.radius, **nil_ball_convexity_check(args.radius).as_dict()}, args.out)


# ----------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="thurston", description="Geometry kernel for the Thurston geometries "
                                "S2xR, H2xR, Nil, SL2R and Sol in the projective model.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_, space=True):
        sp = sub.add_parser(name, help=help_)
        if space:
            sp.add_argument("--space", type=_space, required=True, help="s2xr, h2xr, nil, sl2r or sol")
        sp.add_argument("--out", help="output file (stdout when omitted)")
        sp.set_defaults(func=fn)
        return sp

    g = add("geodesic", cmd_geodesic, "sample a geodesic from the origin")
    g.add_argument("--dir1", "--u", "--alpha", type=float, default=0.0, dest="dir1")
    g.add_argument("--dir2", "--v", "--theta", "--lambda", type=float, default=0.0, dest="dir2")
    g.add_argument("--s", type=float, required=True, help="arc length")
    g.add_argument("--samples", type=int, default=100)

    d = add("distance", cmd_distance, "geodesic distance between two points")
    d.add_argument("--P", nargs=3, type=float, required=True, metavar=("X", "Y", "Z"))
    d.add_argument("--Q", nargs=3, type=float, required=True, metavar=("X", "Y", "Z"))

    a = add("angle", cmd_angle, "angle at A between geodesics AB and AC")
    a.add_argument("--vertices", nargs=9, type=float, required=True, help="A B C as 9 numbers")

    t = add("triangle", cmd_triangle, "interior angles and angle sum")
    t.add_argument("--vertices", nargs=9, type=float, required=True)

    c = add("circumsphere", cmd_circumsphere, "circumscribed sphere of a tetrahedron")
    c.add_argument("--vertices", nargs=12, type=float, required=True)

    m = add("sphere-mesh", cmd_sphere_mesh, "triangulated geodesic sphere")
    m.add_argument("--center", nargs=3, type=float, default=[1.0, 0.0, 0.0])
    m.add_argument("--radius", type=float, required=True)
    m.add_argument("--n-dirs", type=int, default=32)
    m.add_argument("--format", choices=["obj", "csv"])

    ap = add("apollonius-mesh", cmd_apollonius_mesh, "Apollonius surface by marching tetrahedra")
    ap.add_argument("--p1", nargs=3, type=float, required=True)
    ap.add_argument("--p2", nargs=3, type=float, required=True)
    ap.add_argument("--lam", type=float, required=True)
    ap.add_argument("--bounds", nargs=6, type=float, required=True,
                    metavar=("XMIN", "XMAX", "YMIN", "YMAX", "ZMIN", "ZMAX"))
    ap.add_argument("--resolution", type=int, default=32)
    ap.add_argument("--format", choices=["obj", "csv"])

    r = add("ratio", cmd_ratio, "simple ratio of three collinear points")
    r.add_argument("--kind", choices=["base", "general", "fibre", "nil"], default="base")
    r.add_argument("--points", nargs=9, type=float, required=True, help="A P B")

    ce = add("ceva", cmd_ceva, "Ceva product (constructed or given configuration)")
    ce.add_argument("--kind", choices=["base", "fibre", "nil"], default="base")
    ce.add_argument("--triangle", nargs=9, type=float)
    ce.add_argument("--cevian-point", nargs=3, type=float)
    ce.add_argument("--feet", nargs=9, type=float)

    me = add("menelaus", cmd_menelaus, "Menelaus product (constructed or given configuration)")
    me.add_argument("--kind", choices=["base", "fibre", "nil"], default="base")
    me.add_argument("--triangle", nargs=9, type=float)
    me.add_argument("--transversal", nargs=9, type=float)

    pk = add("packing", cmd_packing, "ball packings of the S2xR group 4q.I.2", space=False)
    pk.add_argument("--group", default="4q.I.2")
    pk.add_argument("--q", type=int, default=2)
    pk.add_argument("--kernel", default="A3", help="A1, A2, A3 or x,y,z on the base sphere")
    pk.add_argument("--tau", type=float, help="lattice period (optimized when omitted)")
    pk.add_argument("--tau-mode", choices=["first", "global"], default="first")
    pk.add_argument("--optimize", action="store_true", help="search all strata of the fundamental triangle")
    pk.add_argument("--grid", type=int, default=8)
    pk.add_argument("--cell", choices=["mc", "exact"], default="mc")
    pk.add_argument("--samples", type=int, default=200000)
    pk.add_argument("--replicates", type=int, default=8)
    pk.add_argument("--seed", type=int, default=0)
    pk.add_argument("--trace", help="CSV file for the optimizer trace")

    nt = add("nil-tools", cmd_nil_tools, "Nil projections, sphere cross-sections, ball convexity", space=False)
    nt.add_argument("tool", choices=["projection", "cross-section", "convexity"])
    nt.add_argument("--alpha", type=float, default=0.0)
    nt.add_argument("--theta", type=float, default=0.0)
    nt.add_argument("--s", type=float, default=1.0)
    nt.add_argument("--radius", type=float, default=1.0)
    nt.add_argument("--samples", type=int, default=181)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.func(args)
    except (ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (RuntimeError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
