import json

import numpy as np
import pytest

from conformal_atlas import shapes
from conformal_atlas.cli import main
from conformal_atlas.meshio import save_obj


@pytest.fixture(scope="module")
def meshes(tmp_path_factory):
    d = tmp_path_factory.mktemp("meshes")
    t = shapes.torus_of_revolution(24, 12, 2.0, 1.0)
    save_obj(d / "torus.obj", t.vertices, t.faces)
    s = shapes.icosphere(2)
    save_obj(d / "ico.obj", s.vertices, s.faces)
    dt = shapes.double_torus(3)
    save_obj(d / "dt.obj", dt.vertices, dt.faces)
    return d


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_info(meshes, capsys):
    code, out, _ = run(capsys, "info", meshes / "torus.obj")
    d = json.loads(out)
    assert code == 0 and (d["V"], d["E"], d["F"], d["chi"], d["genus"]) == (288, 864, 576, 0, 1)


def test_period_json_has_tau(meshes, capsys, tmp_path):
    code, _, _ = run(capsys, "period", meshes / "torus.obj", "--json", tmp_path / "p.json")
    d = json.loads((tmp_path / "p.json").read_text())
    assert code == 0 and len(d["tau"]) == 2 and d["tau"][1] > 0


def test_verify_equivalence_cli(meshes, capsys, tmp_path):
    run(capsys, "period", meshes / "torus.obj", "--json", tmp_path / "p.json")
    code, out, _ = run(capsys, "verify-equivalence", tmp_path / "p.json", tmp_path / "p.json",
                       "--N", "[[1,0],[0,1]]")
    assert code == 0 and json.loads(out)["equivalent"] is True


def test_curve_class_cli(meshes, capsys, tmp_path):
    code, out, _ = run(capsys, "basis", meshes / "torus.obj")
    loop = json.loads(out)["cycles"][1]
    (tmp_path / "loop.json").write_text(json.dumps({"loop": loop}))
    code, out, _ = run(capsys, "curve-class", meshes / "torus.obj", "--loop", tmp_path / "loop.json")
    d = json.loads(out)
    assert code == 0 and d["rounded"] == [0, 1] and not d["null_homologous"]
    (tmp_path / "tri.json").write_text("[0, 1, 13]")
    code, out, _ = run(capsys, "curve-class", meshes / "torus.obj", "--loop", tmp_path / "tri.json")
    d = json.loads(out)
    assert code == 0 and d["null_homologous"] and d["rounded"] == [0, 0]


def test_basis_homology_flag(meshes, capsys):
    code, out, _ = run(capsys, "basis", meshes / "dt.obj", "--homology")
    d = json.loads(out)
    assert code == 0 and len(d["cycles"]) == 4
    C = np.array(d["C"])
    assert np.array_equal(C, -C.T)


def test_sphere_map_cli(meshes, capsys, tmp_path):
    code, out, _ = run(capsys, "sphere-map", meshes / "ico.obj", "--out", tmp_path / "s.obj")
    assert code == 0 and json.loads(out)["sphere_map"]["degree"] == 1
    lines = (tmp_path / "s.obj").read_text().splitlines()
    assert sum(ln.startswith("vt ") for ln in lines) == 162


def test_flatten_cli(meshes, capsys, tmp_path):
    code, out, _ = run(capsys, "flatten", meshes / "dt.obj", "--out", tmp_path / "f.svg")
    assert code == 0 and json.loads(out)["zeros"]["total"] == 2
    assert (tmp_path / "f.svg").read_text().startswith("<svg")
    code, out, _ = run(capsys, "flatten", meshes / "dt.obj", "--avoid-vertex", "0")
    assert code == 0 and "coefficients" in json.loads(out)


def test_harmonic_and_holomorphic_cli(meshes, capsys):
    code, out, _ = run(capsys, "harmonic", meshes / "torus.obj", "--solver", "descent", "--tol", "1e-5")
    assert code == 0 and len(json.loads(out)["forms"]) == 2
    code, out, _ = run(capsys, "holomorphic", meshes / "torus.obj")
    assert code == 0 and json.loads(out)["independent"] in ([0], [1])


def test_errors_are_json_on_stderr(meshes, capsys, tmp_path):
    code, _, err = run(capsys, "info", tmp_path / "nope.obj")
    assert code == 1 and json.loads(err)["error"] == "missing file"
    code, _, err = run(capsys, "frobnicate")
    assert code == 2 and json.loads(err)["error"] == "usage"
    (tmp_path / "quad.obj").write_text("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n")
    code, _, err = run(capsys, "info", tmp_path / "quad.obj")
    assert code == 1 and json.loads(err)["rule"] == "non-triangular face"
    code, _, err = run(capsys, "period", meshes / "ico.obj")
    assert code == 1 and json.loads(err)["error"] == "genus"
    code, _, err = run(capsys, "period", meshes / "torus.obj", "--tol", "1e-300")
    d = json.loads(err)
    assert code == 1 and d["stage"] == "harmonic"
