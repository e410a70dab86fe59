import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from thurston.cli import run
from thurston.surfaces import TriMesh

FIG9 = ["1", "0", "0", "-2", "-0.5", "3", "1", "3", "0", "4", "-1", "2"]
FIG10 = ["1.5", "1", "-1", "1", "0.5", "0", "1", "0.5", "0.5", "1", "0", "0"]


def call(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_geodesic_csv(tmp_path, capsys):
    path = tmp_path / "arc.csv"
    code, _, _ = call(capsys, "geodesic", "--space", "s2xr", "--u", "0", "--v", "0.5", "--s", "2",
                      "--samples", "100", "--out", str(path))
    assert code == 0
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["s", "x", "y", "z"] and len(rows) == 101
    last = np.array(rows[-1], dtype=float)
    # Product structure: base angle s cos v, fibre height s sin v.
    s, v = 2.0, 0.5
    expect = np.exp(s * np.sin(v)) * np.array([np.cos(s * np.cos(v)), np.sin(s * np.cos(v)), 0.0])
    assert np.allclose(last[1:], expect, atol=1e-10)


def test_distance_json(capsys):
    code, out, _ = call(capsys, "distance", "--space", "nil", "--P", "0", "0", "0", "--Q", "0", "0", "0.5")
    assert code == 0
    assert json.loads(out)["distance"] == pytest.approx(0.5, abs=1e-12)


def test_circumsphere_fig9(tmp_path, capsys):
    path = tmp_path / "cs.json"
    code, _, _ = call(capsys, "circumsphere", "--space", "s2xr", "--vertices", *FIG9, "--out", str(path))
    assert code == 0
    d = json.loads(path.read_text())
    assert d["radius"] == pytest.approx(1.30678, abs=1e-3)


def test_circumsphere_fig10(capsys):
    code, out, _ = call(capsys, "circumsphere", "--space", "h2xr", "--vertices", *FIG10)
    assert code == 0
    assert json.loads(out)["radius"] == pytest.approx(2.89269, abs=1e-3)


def test_triangle_and_angle(capsys):
    verts = ["1", "0", "0", "0", "1", "0", "0.5", "0.5", "0.7"]
    code, out, _ = call(capsys, "triangle", "--space", "s2xr", "--vertices", *verts)
    assert code == 0
    d = json.loads(out)
    assert d["sum"] >= np.pi - 1e-9
    code, out, _ = call(capsys, "angle", "--space", "s2xr", "--vertices", *verts)
    assert code == 0
    assert json.loads(out)["angle"] == pytest.approx(d["omegas"][0], abs=1e-10)


def test_sphere_mesh_obj(tmp_path, capsys):
    path = tmp_path / "s.obj"
    code, _, _ = call(capsys, "sphere-mesh", "--space", "nil", "--radius", "1", "--n-dirs", "10",
                      "--out", str(path))
    assert code == 0
    mesh = TriMesh.read_obj(path)
    assert len(mesh.vertices) == 10 * 8 + 2 and mesh.is_watertight()


def test_sphere_mesh_range_error(capsys):
    code, _, err = call(capsys, "sphere-mesh", "--space", "nil", "--radius", str(2 * np.pi + 0.01))
    assert code == 2 and "Nil" in err


def test_apollonius_mesh(tmp_path, capsys):
    path = tmp_path / "a.obj"
    code, _, _ = call(capsys, "apollonius-mesh", "--space", "s2xr", "--p1", "1", "0.2", "-0.1",
                      "--p2", "0.3", "1.4", "0.5", "--lam", "1", "--bounds", "-2", "2", "-1", "2.5",
                      "-1.5", "2", "--resolution", "12", "--out", str(path))
    assert code == 0
    assert len(TriMesh.read_obj(path).faces) > 0


def test_ratio(capsys):
    pts = ["1", "0", "0", str(np.cos(np.pi / 6)), str(np.sin(np.pi / 6)), "0", "0", "1", "0"]
    code, out, _ = call(capsys, "ratio", "--space", "s2xr", "--kind", "base", "--points", *pts)
    assert code == 0
    assert json.loads(out)["ratio"] == pytest.approx(1 / np.sqrt(3), abs=1e-10)


@pytest.mark.parametrize("cmd,kind,space,target", [
    ("menelaus", "base", "s2xr", -1.0), ("menelaus", "fibre", "h2xr", -1.0),
    ("ceva", "base", "h2xr", 1.0), ("ceva", "fibre", "s2xr", 1.0), ("ceva", "nil", "nil", 1.0)])
def test_constructed_configurations(capsys, cmd, kind, space, target):
    code, out, _ = call(capsys, cmd, "--space", space, "--kind", kind)
    assert code == 0
    assert json.loads(out)["product"] == pytest.approx(target, abs=1e-6)


def test_nil_ceva_explicit_feet(capsys):
    from thurston.model import affine
    from thurston.ratios import nil_ceva_configuration

    cfg = nil_ceva_configuration()
    tri = [str(x) for v in cfg.triangle for x in affine(v)]
    feet = [repr(float(x)) for p in cfg.points for x in affine(p)]
    code, out, _ = call(capsys, "ceva", "--space", "nil", "--kind", "nil", "--triangle", *tri, "--feet", *feet)
    assert code == 0
    assert json.loads(out)["product"] == pytest.approx(1.0, abs=1e-6)


def test_nil_menelaus_counterexample(capsys):
    code, out, _ = call(capsys, "menelaus", "--space", "nil", "--kind", "nil")
    assert code == 0
    assert json.loads(out)["deviation_from_minus_one"] > 1e-2


def test_nil_tools(capsys):
    code, out, _ = call(capsys, "nil-tools", "convexity", "--radius", str(np.pi / 2 + 0.2))
    assert code == 0 and json.loads(out)["convex"] is False
    code, out, _ = call(capsys, "nil-tools", "projection", "--alpha", "0.3", "--theta", "0.4", "--s", "1")
    assert code == 0
    code, out, _ = call(capsys, "nil-tools", "cross-section", "--radius", "1", "--samples", "5")
    assert code == 0


def test_packing_exact(capsys):
    code, out, _ = call(capsys, "packing", "--kernel", "A2", "--tau", str(2 * np.pi), "--cell", "exact")
    assert code == 0
    d = json.loads(out)
    assert d["density"] == pytest.approx(0.69634983, rel=1e-6) and d["kissing"] == 3


def test_packing_seed_determinism(capsys):
    argv = ["packing", "--kernel", "A3", "--tau", "3.6275987", "--samples", "20000", "--replicates", "4",
            "--seed", "11"]
    _, a, _ = call(capsys, *argv)
    _, b, _ = call(capsys, *argv)
    assert a == b
    _, c, _ = call(capsys, *argv[:-1], "12")
    assert c != a


def test_packing_optimize(tmp_path, capsys):
    path, trace = tmp_path / "pack.json", tmp_path / "trace.csv"
    code, _, _ = call(capsys, "packing", "--group", "4q.I.2", "--q", "2", "--optimize", "--grid", "6",
                      "--out", str(path), "--trace", str(trace))
    assert code == 0
    d = json.loads(path.read_text())
    assert d["density"] == pytest.approx(0.87757183, rel=1e-2)
    assert d["kissing"] == 4
    rows = list(csv.reader(trace.open()))
    assert len(rows) > 1


def test_json_round_trip(tmp_path, capsys):
    path = tmp_path / "d.json"
    call(capsys, "distance", "--space", "h2xr", "--P", "1", "0", "0", "--Q", "1.5", "0.3", "0.2",
         "--out", str(path))
    d = json.loads(path.read_text())
    _, out, _ = call(capsys, "distance", "--space", "h2xr", "--P", "1", "0", "0", "--Q", "1.5", "0.3", "0.2")
    assert json.loads(out) == d


@pytest.mark.parametrize("argv", [
    ["distance", "--space", "bogus", "--P", "0", "0", "0", "--Q", "1", "0", "0"],
    ["nosuchcommand"],
    ["distance", "--space", "s2xr", "--P", "0", "0", "0", "--Q", "1", "0", "0"],
    ["geodesic", "--space", "nil", "--s", "-1"],
    ["packing", "--kernel", "A9"],
])
def test_validation_errors_exit_2(argv, capsys):
    assert run(argv) == 2
    assert capsys.readouterr().err


def test_numeric_failure_exit_1(capsys):
    # Four points on the base sphere at t = 0 with no equidistant centre.
    verts = ["1", "0", "0", "-1", "0.01", "0", "0", "1", "0", "0", "-1", "0.02"]
    code, _, err = call(capsys, "circumsphere", "--space", "s2xr", "--vertices", *verts)
    assert code == 1 and err


def test_console_script():
    out = subprocess.run([sys.executable, "-m", "thurston.cli", "distance", "--space", "s2xr",
                          "--P", "1", "0", "0", "--Q", "0", "1", "0"], capture_output=True, text=True)
    assert out.returncode == 0
    # Twelve significant digits in the output.
    assert json.loads(out.stdout)["distance"] == pytest.approx(np.pi / 2, abs=1e-11)
