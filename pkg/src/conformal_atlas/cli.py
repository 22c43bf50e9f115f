"""Command-line interface: ``conformal-atlas <command> mesh [options]``."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .mesh import MeshError


class CliError(Exception):
    def __init__(self, kind, message, **extra):
        super().__init__(message)
        self.kind = kind
        self.extra = extra


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError("usage", message)


def _emit_error(kind, message, **extra):
    payload = {"error": kind, "message": message}
    payload.update(extra)
    sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")


def _common(p):
    p.add_argument("mesh", help="input mesh (OBJ or PLY)")
    p.add_argument("--config", help="TOML or JSON pipeline config")
    p.add_argument("--tol", type=float, help="harmonic residual tolerance")
    p.add_argument("--solver", choices=["direct", "descent"])
    p.add_argument("--preprocess", choices=["swap", "split", "none"])
    p.add_argument("--threads", type=int)
    p.add_argument("--workdir", help="cache directory (default: $CONFORMAL_ATLAS_WORKDIR)")
    p.add_argument("--json", dest="json_out", help="write the JSON result here instead of stdout")
    p.add_argument("--out", help="primary output file")


def build_parser():
    p = _Parser(prog="conformal-atlas", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    _common(sub.add_parser("info", help="mesh statistics, Euler characteristic and genus"))
    s = sub.add_parser("sphere-map", help="conformal map of a genus-0 mesh to the unit sphere")
    _common(s)
    s.add_argument("--pole", choices=["north", "south"], default="north",
                   help="projection pole for the stereographic UV")
    b = sub.add_parser("basis", help="homology basis loops and intersection matrix")
    _common(b)
    b.add_argument("--homology", action="store_true", help="raw Smith-normal-form generators")
    _common(sub.add_parser("harmonic", help="harmonic 1-forms dual to the canonical basis"))
    _common(sub.add_parser("holomorphic", help="holomorphic 1-forms and star coefficients"))
    _common(sub.add_parser("period", help="period matrices C, S, R, P"))
    f = sub.add_parser("flatten", help="global conformal parametrization (OBJ or SVG)")
    _common(f)
    f.add_argument("--form", type=int, default=0, help="index of the holomorphic form")
    f.add_argument("--avoid-vertex", type=int, help="choose a form combination with no zero here")
    c = sub.add_parser("curve-class", help="homology class of a loop")
    _common(c)
    c.add_argument("--loop", required=True, help="JSON file with a vertex loop")
    v = sub.add_parser("verify-equivalence", help="check N^-1 R1 N = R2 and N^T C1 N = C2")
    v.add_argument("first", help="period JSON of the first surface")
    v.add_argument("second", help="period JSON of the second surface")
    v.add_argument("--N", required=True, help="integer matrix as JSON text or a JSON file")
    v.add_argument("--tol", type=float, default=1e-3)
    v.add_argument("--json", dest="json_out")
    return p


def _config(args):
    from .pipeline import PipelineConfig, load_config

    cfg = load_config(args.config) if getattr(args, "config", None) else PipelineConfig()
    for k in ("tol", "solver", "preprocess", "threads", "workdir"):
        val = getattr(args, k, None)
        if val is not None:
            setattr(cfg, k, val)
    return cfg


def _load(args):
    from .meshio import load_mesh

    path = Path(args.mesh)
    if not path.exists():
        raise CliError("missing file", f"no such file: {path}", path=str(path))
    return load_mesh(path)


def _write_json(args, payload):
    text = json.dumps(payload, sort_keys=True, indent=1)
    if getattr(args, "json_out", None):
        Path(args.json_out).write_text(text + "\n", encoding="utf-8")
    else:
        sys.stdout.write(text + "\n")


def _genus_check(m, need_positive=True):
    from .mesh import euler_genus

    _, g = euler_genus(m)
    if need_positive and g == 0:
        raise CliError("genus", "this command needs a surface of genus >= 1")
    return g


def cmd_info(args):
    from .mesh import NEGATIVE_TOL, cotan_weights, euler_genus

    m = _load(args)
    chi, g = euler_genus(m)
    k = cotan_weights(m)
    return {"V": m.n_vertices, "E": m.n_edges, "F": m.n_faces, "chi": chi, "genus": g,
            "negative_weights": int((k < -NEGATIVE_TOL).sum()),
            "bbox_diagonal": float(m.bbox_diagonal())}


def cmd_sphere_map(args):
    from .meshio import save_obj
    from .pipeline import run_pipeline, result_json
    from .sphere_map import stereographic

    m = _load(args)
    g = _genus_check(m, need_positive=False)
    if g != 0:
        raise CliError("genus", "sphere-map needs a genus-0 mesh")
    res = run_pipeline(m, _config(args))
    h = res.sphere.positions
    if args.out:
        q = h if args.pole == "north" else h * np.array([1.0, 1.0, -1.0])
        # project from the opposite pole so every vertex has a finite image
        far = q[:, 2] < -1 + 1e-9
        z = np.zeros(len(q), complex)
        z[~far] = stereographic(q[~far])
        uv = np.stack([z.real, z.imag], 1)
        save_obj(args.out, h, res.mesh.faces, uv=uv)
    return json.loads(result_json(res))


def _pipeline(args):
    from .pipeline import run_pipeline

    m = _load(args)
    _genus_check(m)
    return run_pipeline(m, _config(args))


def cmd_basis(args):
    from .homology import canonicalize_basis, homology_basis, intersection_pairing

    m = _load(args)
    _genus_check(m, need_positive=False)
    if args.homology:
        b = homology_basis(m)
        out = b.to_json()
        if b.cycles:
            out["C"] = intersection_pairing(m, list(b.cycles)).tolist()
            out["transform"] = canonicalize_basis(m, b).transform.tolist()
        return out
    res = _pipeline(args)
    out = res.basis.to_json()
    out["C"] = res.period.C.tolist()
    return out


def cmd_harmonic(args):
    res = _pipeline(args)
    return {"forms": [{"index": h.index, "residual": h.residual, "energy": h.energy,
                       "values": h.form.to_json()} for h in res.harmonic],
            "basis": res.basis.to_json()}


def cmd_holomorphic(args):
    res = _pipeline(args)
    hs = res.holomorphic
    return {"forms": [z.to_json() for z in hs.forms], "independent": list(map(int, hs.independent)),
            "H": hs.H.tolist(), "basis": res.basis.to_json()}


def cmd_period(args):
    from .pipeline import result_json

    res = _pipeline(args)
    out = res.period.to_json()
    out["diagnostics"] = json.loads(result_json(res))["diagnostics"]
    return out


def cmd_flatten(args):
    from .param import choose_form_avoiding, export_uv, flatten

    res = _pipeline(args)
    forms = res.holomorphic.forms
    coeffs = None
    if args.avoid_vertex is not None:
        zeta, coeffs, _ = choose_form_avoiding(res.mesh, forms, args.avoid_vertex)
    else:
        if not 0 <= args.form < len(forms):
            raise CliError("usage", f"--form must be in [0, {len(forms) - 1}]")
        zeta = forms[args.form]
    fp = flatten(res.mesh, zeta)
    if args.out:
        fmt = "svg" if args.out.lower().endswith(".svg") else "obj"
        export_uv(res.mesh, fp, args.out, fmt)
    out = {"residual": fp.residual, "zeros": fp.zeros.to_json(), "form": args.form,
           "uv_min": fp.uv.min(0).tolist(), "uv_max": fp.uv.max(0).tolist()}
    if coeffs is not None:
        out["coefficients"] = [[float(np.real(c)), float(np.imag(c))] for c in coeffs]
    return out


def cmd_curve_class(args):
    from .homology import flood_bounded_domain
    from .simplicial import Chain

    res = _pipeline(args)
    data = json.loads(Path(args.loop).read_text(encoding="utf-8"))
    loop = data["loop"] if isinstance(data, dict) else data
    try:
        r = Chain.from_vertex_loop(res.mesh, loop)
    except ValueError as exc:
        raise CliError("invalid loop", str(exc)) from None
    faces, cls = flood_bounded_domain(res.mesh, r, list(res.dual.forms))
    out = {"class": cls.values.tolist(), "rounded": cls.rounded.tolist(),
           "max_deviation": cls.max_deviation, "null_homologous": faces is not None}
    if faces is not None:
        out["bounded_faces"] = list(faces)
    return out


def cmd_verify(args):
    from .period import verify_equivalence

    def load(p):
        d = json.loads(Path(p).read_text(encoding="utf-8"))
        d = d.get("period", d)
        return np.array(d["R"]), np.array(d["C"])

    R1, C1 = load(args.first)
    R2, C2 = load(args.second)
    text = args.N
    N = json.loads(Path(text).read_text(encoding="utf-8")) if Path(text).exists() else json.loads(text)
    eq = verify_equivalence(R1, C1, R2, C2, np.array(N), args.tol)
    return {"equivalent": eq.equivalent, "residual_R": eq.residual_R, "residual_C": eq.residual_C,
            "det": eq.det, "symplectic": eq.symplectic}


COMMANDS = {
    "info": cmd_info,
    "sphere-map": cmd_sphere_map,
    "basis": cmd_basis,
    "harmonic": cmd_harmonic,
    "holomorphic": cmd_holomorphic,
    "period": cmd_period,
    "flatten": cmd_flatten,
    "curve-class": cmd_curve_class,
    "verify-equivalence": cmd_verify,
}


def main(argv=None):
    from .pipeline import PipelineError

    try:
        args = build_parser().parse_args(argv)
        payload = COMMANDS[args.command](args)
        _write_json(args, payload)
        return 0
    except CliError as exc:
        _emit_error(exc.kind, str(exc), **exc.extra)
        return 2 if exc.kind == "usage" else 1
    except MeshError as exc:
        _emit_error("invalid mesh", str(exc), rule=exc.kind, cell=str(exc.cell))
        return 1
    except PipelineError as exc:
        sys.stderr.write(json.dumps(exc.to_json(), sort_keys=True, default=str) + "\n")
        return 1
    except (OSError, ValueError, RuntimeError, ArithmeticError) as exc:
        _emit_error(type(exc).__name__, str(exc))
        return 1


if __name__ == "__main__":
    sys.exit(main())
