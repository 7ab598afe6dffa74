"""Run configuration: one table of numeric defaults, overridable from TOML or JSON.

Every number the analysis depends on but the model does not fix (grids,
step rules, sample sizes, tolerances) lives in :data:`DEFAULTS`.
"""

from __future__ import annotations

import copy
import json
from pathlib import Path
from typing import Optional

import numpy as np

from .direct_scattering import QuadOptions
from .errors import ParameterError
from .lax_core import ModelParams

DEFAULTS: dict = {
    "name": "gaussian",
    "model": {
        "delta": 2.0,
        "gamma": 1.0,
        "epsilon": "calibrate",   # or +1 / -1
    },
    "grid": {
        "L": 20.0,
        "T": 1.0,
        "dx": 0.0125,             # solver grid on [-L, L]
        "dt": 0.0,                # 0 selects c_stab * dx^2
        "c_stab": 0.2,
        "store_dt": 0.0025,
        "store_x_every": 2,
    },
    "initial": {
        "profile": "gaussian",    # gaussian | sech
        "u_amp": 0.3,
        "v_amp": 0.2,
        "center": 5.0,
        "width": 1.0,
    },
    "quadrature": {
        "step_factor": 0.5,
        "grid_cap": 2.0,
        "domain_guard": 10.0,
        "override_guard": False,  # --override-domain-guard
    },
    # finer steps and a tighter growth bound for the structural (determinant) checks
    "quadrature_fine": {
        "step_factor": 0.125,
        "grid_cap": 0.5,
        "domain_guard": 4.0,
    },
    "sampling": {
        "seed": 20240607,
        "det_samples": 200,
        "det_re_max": 2.0,
        "det_probe": [5.0, 0.5],
        "path_lambdas": [0.5, 1.0, 1.5, [0.3, 0.05], [0.0, 0.5], [0.0, 1.2]],
        "path_probes": [[1.0, 1.0], [5.0, 0.5], [2.5, 0.8]],
        "symmetry_lambdas": [0.5, 1.0, 1.5, [0.0, 0.7], [0.0, 1.3]],
        "region_box": [-3.0, 3.0, -3.0, 3.0],
        "region_resolution": 600,
        "oracle_points": 10000,
        "boundary_points": 50,
        "boundary_radius": 2.0,
        "jump_probe": [1.0, 0.5],
        "asymptotic_radii": [4.0, 6.0, 8.0, 12.0, 16.0, 24.0, 32.0],
        "asymptotic_probes": [[2.0, 0.5], [5.0, 0.25]],
        "asymptotic_order": 3,
        "residue_box": [-3.0, 3.0, -3.0, 3.0],
        "residue_radius": 0.1,
        "residue_nodes": 64,
        "radii": [4.0, 8.0, 16.0, 32.0],
        "probe_count": 20,
        "probe_x": [0.5, 10.0],
        "probe_t": [0.05, 1.0],
        "t0_probes": [1.0, 3.0, 5.0, 7.0],
        "perturbation_amp": 1e-2,
        "perturbation_center": 0.5,
        "perturbation_width": 0.1,
        "pde_dx_levels": [0.1, 0.05, 0.025],
        "pde_T": 0.25,
        "plane_wave": [0.3, 1.0],
        "plane_wave_nx": [32, 64, 128],
        "plane_wave_T": 0.5,
    },
    "tolerances": {
        "mass_drift": 1e-8,
        "pde_order": 2.0,
        "plane_wave_order": 4.0,
        "det": 1e-8,
        "det_algebraic": 1e-10,
        "path_ratio": 5.0,
        "symmetry": 1e-6,
        "symmetry_ratio": 10.0,
        "jump": 1e-10,
        "asymptotic": 1e-4,
        "gauge": 1e-3,
        "global_relation": 1e-4,
        "global_ratio": 10.0,
        "residue": 1e-6,
        "winding": 0.05,
        "reconstruction": 1e-3,
        "channel": 1e-6,
    },
    "paths": {
        "dataset": "",
        "out_dir": "out",
    },
}


def _merge(base: dict, over: dict, where: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, val in over.items():
        if key not in base:
            raise ParameterError(f"unknown config key {where + key!r}")
        if isinstance(base[key], dict):
            if not isinstance(val, dict):
                raise ParameterError(f"config key {where + key!r} must be a table")
            out[key] = _merge(base[key], val, where + key + ".")
        else:
            out[key] = val
    return out


def _read(path: Path) -> dict:
    text = path.read_text()
    if path.suffix.lower() == ".json":
        return json.loads(text)
    try:
        import tomllib
    except ModuleNotFoundError:  # python < 3.11
        import tomli as tomllib
    return tomllib.loads(text)


def load_config(path=None, overrides: Optional[dict] = None) -> dict:
    """Defaults, updated by the file at ``path`` and then by ``overrides``; validated."""
    cfg = copy.deepcopy(DEFAULTS)
    if path:
        p = Path(path)
        if not p.exists():
            raise FileNotFoundError(f"config file {p} does not exist")
        cfg = _merge(cfg, _read(p))
        ds = cfg["paths"]["dataset"]
        if ds and not Path(ds).is_absolute():
            cfg["paths"]["dataset"] = str((p.parent / ds).resolve())
    if overrides:
        cfg = _merge(cfg, overrides)
    validate_config(cfg)
    return cfg


def validate_config(cfg: dict) -> None:
    for name, tol in cfg["tolerances"].items():
        if not (isinstance(tol, (int, float)) and tol > 0):
            raise ParameterError(f"tolerance {name!r} must be positive, got {tol!r}")
    for name in ("region_box", "residue_box"):
        b = cfg["sampling"][name]
        if len(b) != 4 or not (b[1] > b[0] and b[3] > b[2]):
            raise ParameterError(f"sampling.{name} = {b} is degenerate")
    g = cfg["grid"]
    for key in ("L", "T", "dx", "c_stab", "store_dt"):
        if not g[key] > 0:
            raise ParameterError(f"grid.{key} must be positive")
    if int(g["store_x_every"]) < 1:
        raise ParameterError("grid.store_x_every must be >= 1")
    eps = cfg["model"]["epsilon"]
    if eps not in ("calibrate", 1, -1):
        raise ParameterError(f"model.epsilon must be 'calibrate', 1 or -1, got {eps!r}")
    ds = cfg["paths"]["dataset"]
    if ds and not Path(ds).exists():
        raise FileNotFoundError(f"dataset {ds} does not exist")
    model_params(cfg)


def model_params(cfg: dict) -> ModelParams:
    m = cfg["model"]
    eps = m["epsilon"]
    return ModelParams(delta=float(m["delta"]), gamma=float(m["gamma"]), epsilon=1 if eps == "calibrate" else int(eps))


def quad_options(cfg: dict, fine: bool = False, override_guard: bool = False) -> QuadOptions:
    q = cfg["quadrature_fine" if fine else "quadrature"]
    override = override_guard or (not fine and bool(cfg["quadrature"].get("override_guard", False)))
    return QuadOptions(step_factor=float(q["step_factor"]), grid_cap=float(q["grid_cap"]),
                       domain_guard=float(q["domain_guard"]), override_guard=override)


def as_complex(v) -> complex:
    """Config numbers are reals or ``[re, im]`` pairs."""
    if isinstance(v, (list, tuple)):
        return complex(float(v[0]), float(v[1]))
    return complex(v)


def initial_profile(cfg: dict, x: np.ndarray):
    ini = cfg["initial"]
    z = (np.asarray(x) - ini["center"]) / ini["width"]
    if ini["profile"] == "gaussian":
        shape = np.exp(-z * z)
    elif ini["profile"] == "sech":
        shape = 1.0 / np.cosh(z)
    else:
        raise ParameterError(f"unknown initial profile {ini['profile']!r}")
    return (ini["u_amp"] * shape).astype(complex), (ini["v_amp"] * shape).astype(complex)
