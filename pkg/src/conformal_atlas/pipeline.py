"""End-to-end runs: genus-0 sphere maps or the full holomorphic-form chain."""
from __future__ import annotations

import hashlib
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .mesh import cotan_weights, euler_genus, preprocess_negative_weights

CACHE_VERSION = 1


class PipelineError(RuntimeError):
    def __init__(self, stage, message, residuals=None):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage
        self.message = message
        self.residuals = dict(residuals or {})

    def to_json(self):
        return {"error": "stage failure", "stage": self.stage, "message": self.message,
                "residuals": self.residuals}


@dataclass
class PipelineConfig:
    tol: float = 1e-8
    solver: str = "direct"
    preprocess: str = "swap"
    threads: int = 1
    workdir: str | None = None
    cache: bool = True
    sphere_eps: float = 1e-7
    duality_tol: float = 1e-6
    closed_tol: float = 1e-10

    @classmethod
    def from_dict(cls, d):
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    def key_dict(self):
        """Settings that influence results (threads and paths do not)."""
        d = asdict(self)
        for k in ("threads", "workdir", "cache"):
            d.pop(k)
        return d


def load_config(path):
    """Read a TOML or JSON config file into :class:`PipelineConfig`."""
    path = Path(path)
    if path.suffix.lower() == ".toml":
        try:
            import tomllib
        except ImportError:  # Python < 3.11
            import tomli as tomllib
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    else:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    data = data.get("pipeline", data)
    return PipelineConfig.from_dict(data)


def resolve_workdir(config):
    wd = config.workdir or os.environ.get("CONFORMAL_ATLAS_WORKDIR")
    return Path(wd) if wd else None


def mesh_hash(m, config):
    h = hashlib.sha256()
    h.update(f"v{CACHE_VERSION}".encode())
    h.update(np.ascontiguousarray(m.vertices, dtype=np.float64).tobytes())
    h.update(np.ascontiguousarray(m.faces, dtype=np.int64).tobytes())
    h.update(json.dumps(config.key_dict(), sort_keys=True).encode())
    return h.hexdigest()[:32]


@dataclass
class PipelineResult:
    mesh: object
    genus: int
    stats: dict
    preprocess: dict
    basis: object = None
    dual: object = None
    harmonic: list = field(default_factory=list)
    holomorphic: object = None
    period: object = None
    zeros: list = field(default_factory=list)
    sphere: object = None
    diagnostics: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    cache_hit: bool = False

    def to_json(self, timings=False):
        pre = {k: v for k, v in self.preprocess.items() if k != "operations"}
        out = {"mesh": self.stats, "genus": self.genus, "preprocess": pre,
               "diagnostics": _plain(self.diagnostics)}
        if self.sphere is not None:
            from .sphere_map import degree
            out["sphere_map"] = {"energy": self.sphere.energy, "iterations": self.sphere.iterations,
                                 "centroid": self.sphere.centroid,
                                 "degree": degree(self.mesh, self.sphere.positions),
                                 "energy_over_8pi": self.sphere.energy / (8 * np.pi)}
        if self.basis is not None:
            out["basis"] = self.basis.to_json()
        if self.period is not None:
            out["period"] = self.period.to_json()
        if self.holomorphic is not None and self.genus:
            out["holomorphic"] = {"H": np.asarray(self.holomorphic.H).tolist(),
                                  "independent": list(map(int, self.holomorphic.independent))}
        if self.zeros:
            out["zeros"] = [z.to_json() for z in self.zeros]
        if timings:
            out["timings"] = self.timings
        return out


def _plain(x):
    if isinstance(x, dict):
        return {k: _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    return x


class _Timer:
    def __init__(self, timings, stage):
        self.timings, self.stage = timings, stage

    def __enter__(self):
        self.t = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        self.timings[self.stage] = time.perf_counter() - self.t
        if exc is not None and not isinstance(exc, PipelineError):
            raise PipelineError(self.stage, f"{type(exc).__name__}: {exc}") from exc
        return False


def _load_cache(path, m):
    from .harmonic import HarmonicForm
    from .homology import HomologyBasis
    from .simplicial import Chain, OneForm

    with np.load(path, allow_pickle=False) as z:
        loops = json.loads(str(z["loops"]))
        dual_vals = z["dual"]
        harm_vals = z["harmonic"]
        res = z["residual"]
        en = z["energy"]
    basis = HomologyBasis(tuple(Chain.from_vertex_loop(m, lp) for lp in loops), True, "handles")
    dual_forms = tuple(OneForm(m, dual_vals[:, k]) for k in range(dual_vals.shape[1]))
    harm = [HarmonicForm(OneForm(m, harm_vals[:, k]), float(res[k]), float(en[k]), k, "cached")
            for k in range(harm_vals.shape[1])]
    return basis, dual_forms, harm


def _save_cache(path, basis, dual, harm):
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(".tmp.npz")
    np.savez(tmp, loops=np.array(json.dumps([list(map(int, c.loop)) for c in basis.cycles])),
             dual=np.stack([w.values for w in dual.forms], 1),
             harmonic=np.stack([h.form.values for h in harm], 1),
             residual=np.array([h.residual for h in harm]),
             energy=np.array([h.energy for h in harm]))
    os.replace(tmp, path)


def run_pipeline(m, config=None):
    """Compute the conformal structure of a closed mesh.

    Genus 0 gives a spherical conformal map.  Higher genus runs homology,
    dual cohomology, harmonic diffusion, Hodge star and period matrices, and
    reports the zeros of every holomorphic basis form.  Hard invariants
    (duality, closedness, harmonic residual, positive definite S, zero count)
    raise :class:`PipelineError` naming the stage.
    """
    from . import cohomology, harmonic, hodge, homology, period
    from .param import detect_zeros
    from .sphere_map import conformal_embed

    cfg = config or PipelineConfig()
    if cfg.solver not in ("direct", "descent"):
        raise ValueError(f"unknown solver {cfg.solver!r}")
    timings = {}
    diag = {}
    with _Timer(timings, "preprocess"):
        mp, rep = preprocess_negative_weights(m, cfg.preprocess)
    chi, g = euler_genus(mp)
    stats = {"V": mp.n_vertices, "E": mp.n_edges, "F": mp.n_faces, "chi": chi, "genus": g,
             "input_F": m.n_faces}
    result = PipelineResult(mp, g, stats, rep, timings=timings, diagnostics=diag)
    if g == 0:
        with _Timer(timings, "sphere_map"):
            sm = conformal_embed(mp, eps=cfg.sphere_eps)
        from .sphere_map import degree
        diag["unit_norm"] = float(np.abs(np.linalg.norm(sm.positions, axis=1) - 1).max())
        deg = degree(mp, sm.positions)
        if deg != 1:
            raise PipelineError("sphere_map", f"map degree is {deg}", {"degree": deg})
        result.sphere = sm
        return result

    weights = cotan_weights(mp)
    wd = resolve_workdir(cfg)
    cache_path = wd / f"{mesh_hash(mp, cfg)}.npz" if (wd is not None and cfg.cache) else None
    executor = ThreadPoolExecutor(cfg.threads) if cfg.threads > 1 else None
    try:
        if cache_path is not None and cache_path.exists():
            with _Timer(timings, "cache_load"):
                basis, dual_forms, harm = _load_cache(cache_path, mp)
                M = cohomology.pairing_matrix(dual_forms, list(basis.cycles))
                dual = cohomology.DualBasis(dual_forms, basis, M, M)
            result.cache_hit = True
        else:
            with _Timer(timings, "homology"):
                basis = homology.handle_basis(mp)
            with _Timer(timings, "cohomology"):
                dual = cohomology.dual_basis(mp, basis)
            with _Timer(timings, "harmonic"):
                harm = harmonic.harmonic_basis(mp, weights, dual.forms, cfg.solver, cfg.tol, executor)
            if cache_path is not None:
                _save_cache(cache_path, basis, dual, harm)
    finally:
        if executor is not None:
            executor.shutdown()
    pairing = homology.intersection_pairing(mp, list(basis.cycles))
    diag["det_C"] = int(round(np.linalg.det(pairing)))
    diag["duality"] = float(np.abs(dual.residual - np.eye(2 * g)).max())
    diag["closedness"] = float(max(np.abs(w.face_sums()).max() for w in dual.forms))
    diag["harmonic_residual"] = float(max(h.residual for h in harm))
    diag["harmonic_energy"] = [float(h.energy) for h in harm]
    if diag["duality"] > cfg.duality_tol:
        raise PipelineError("cohomology", "dual basis pairing is not the identity", diag)
    if diag["closedness"] > cfg.closed_tol * max(1.0, float(np.abs(dual.forms[0].values).max())):
        raise PipelineError("cohomology", "dual forms are not closed", diag)
    if diag["harmonic_residual"] > cfg.tol:
        raise PipelineError("harmonic", "harmonic residual above tolerance", diag)
    with _Timer(timings, "hodge"):
        holo = hodge.holomorphic_forms(mp, basis, dual, harm, pairing, weights)
    diag["star_squared"] = float(np.abs(holo.H @ holo.H + np.eye(2 * g)).max())
    diag["wedge_vs_integer"] = float(np.abs(holo.A_wedge - holo.A).max())
    with _Timer(timings, "period"):
        pdata = period.period_data(mp, holo, pairing)
    diag.update({f"period_{k}": v for k, v in pdata.residuals.items()})
    if pdata.residuals["S_min_eig"] <= 0:
        raise PipelineError("period", "S is not positive definite", diag)
    if pdata.residuals["S_asym"] > 1e-6:
        raise PipelineError("period", "S is not symmetric", diag)
    with _Timer(timings, "zeros"):
        zeros = [detect_zeros(mp, z) for z in holo.forms]
    bad = [i for i, z in enumerate(zeros) if z.total != 2 * g - 2]
    diag["zero_totals"] = [z.total for z in zeros]
    if bad:
        raise PipelineError("zeros", f"zero count differs from 2g-2 for forms {bad}", diag)
    result.basis, result.dual, result.harmonic = basis, dual, harm
    result.holomorphic, result.period, result.zeros = holo, pdata, zeros
    return result


def result_json(result, timings=False):
    """Canonical JSON text (sorted keys, repr floats) for bitwise-stable output."""
    return json.dumps(result.to_json(timings), sort_keys=True, indent=1)
