"""Command-line interface: ``cmnls <command> [options]``.

Commands
--------
generate     solve the reference PDE and write a dataset JSON
verify       run verification suites and write ``report.json``
regions      region raster and boundary polylines (CSV)
jumps        jump matrices on the region boundaries
residues     zeros of the scalar spectral functions and their residue data
global       global-relation residuals
reconstruct  recover ``(u, v)`` at interior probes

Every command writes a deterministic, key-sorted ``<command>.json`` (the
``verify`` report is ``report.json``) plus a ``.meta.json`` sidecar holding
timestamps, versions and paths.

Exit codes
----------
0  success, all selected checks pass
1  at least one check failed
2  usage or configuration error
3  dataset schema or I/O error
4  precondition violated (CFL, corner/decay of the data, domain of a column)
5  numerical failure (solver instability, unresolved zero, singular denominator)
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import direct_scattering as ds
from . import residues_global as rg
from . import rh_assembly as rh
from . import verification as V
from ._accel import USE_NUMBA
from .config import load_config, model_params, quad_options
from .errors import (CFLViolationError, ConjugationOverflowError, DegenerateZeroError, FieldDataError,
                     InteriorMissingError, OutOfDomainError, ParameterError, RegionError, SchemaError,
                     SingularDenominatorError, SolverInstabilityError, StencilRangeError,
                     UnresolvedZeroError, ValidityDomainError)
from .fields import FieldData, load_field_data, save_field_data

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_SCHEMA = 3
EXIT_PRECONDITION = 4
EXIT_NUMERICAL = 5

# checked in order; first match wins
_ERROR_CODES = (
    (SchemaError, EXIT_SCHEMA),
    (ParameterError, EXIT_USAGE),
    ((CFLViolationError, FieldDataError, OutOfDomainError, InteriorMissingError, ValidityDomainError,
      RegionError, StencilRangeError), EXIT_PRECONDITION),
    ((SolverInstabilityError, UnresolvedZeroError, SingularDenominatorError, DegenerateZeroError,
      ConjugationOverflowError), EXIT_NUMERICAL),
    ((OSError, json.JSONDecodeError), EXIT_SCHEMA),
)


class UsageError(Exception):
    pass


def exit_code_for(exc: BaseException) -> int:
    for types, code in _ERROR_CODES:
        if isinstance(exc, types):
            return code
    raise exc


# --------------------------------------------------------------------------
# output helpers

def _clean(obj):
    """JSON-safe copy: complex -> [re, im], non-finite floats -> strings, numpy -> python."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [_clean(float(obj.real)), _clean(float(obj.imag))]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else ("nan" if math.isnan(v) else ("inf" if v > 0 else "-inf"))
    return obj


def write_json(path: Path, doc) -> None:
    path.write_text(json.dumps(_clean(doc), sort_keys=True, indent=1) + "\n")


def write_report(out_dir: Path, stem: str, doc: dict, args, started: float) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{stem}.json"
    write_json(path, doc)
    meta = {
        "command": args.command,
        "created_utc": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "elapsed_s": round(time.time() - started, 3),
        "version": __version__,
        "numba": USE_NUMBA,
        "config": str(args.config) if args.config else None,
        "dataset": str(args.dataset) if getattr(args, "dataset", None) else None,
        "threads": args.threads,
    }
    write_json(out_dir / f"{stem}.meta.json", meta)
    return path


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


# --------------------------------------------------------------------------
# shared setup

def _config(args) -> dict:
    if args.config and not Path(args.config).exists():
        raise UsageError(f"config file {args.config} does not exist")
    over = {"quadrature": {"override_guard": True}} if args.override_domain_guard else None
    return load_config(args.config, over)


def _dataset(args, cfg) -> FieldData:
    path = args.dataset or cfg["paths"]["dataset"]
    if not path:
        raise UsageError("no dataset given (use --dataset or paths.dataset in the config)")
    args.dataset = path
    return load_field_data(path)


def _out_dir(args, cfg) -> Path:
    return Path(args.out_dir or cfg["paths"]["out_dir"])


def _metrics_doc(metrics) -> dict:
    rows = [m.to_dict() for m in metrics]
    return {"metrics": rows, "pass": all(r["pass"] for r in rows),
            "failed": sorted(f"{r['suite']}.{r['metric']}" for r in rows if not r["pass"])}


# --------------------------------------------------------------------------
# commands

def cmd_generate(args) -> int:
    started = time.time()
    cfg = _config(args)
    out = _out_dir(args, cfg)
    fd = V.generate_dataset(cfg)
    out.mkdir(parents=True, exist_ok=True)
    path = Path(args.dataset) if args.dataset else out / f"{cfg['name']}.json"
    save_field_data(fd, path)
    doc = {"name": cfg["name"], "dataset_sha256": _sha256(path), "params": fd.params.to_dict(),
           "mass_drift": fd.metadata.get("mass_drift"), "n_x": int(fd.x_grid.size), "n_t": int(fd.t_grid.size),
           "L": fd.L, "T": fd.T, "epsilon_calibration": fd.metadata.get("epsilon_calibration")}
    args.dataset = str(path)
    write_report(out, "generate", doc, args, started)
    print(f"dataset written to {path}")
    return EXIT_OK


def cmd_verify(args) -> int:
    started = time.time()
    cfg = _config(args)
    fd = _dataset(args, cfg)
    suites = args.suite or list(V.SUITES)
    unknown = [s for s in suites if s not in V.SUITE_FUNCS]
    if unknown:
        raise UsageError(f"unknown suite(s) {unknown}; choose from {', '.join(V.SUITES)}")
    metrics = []
    for name in suites:
        part = V.SUITE_FUNCS[name](fd, cfg, args.threads)
        metrics.extend(part)
        for m in part:
            flag = "PASS" if m.passed else "FAIL"
            print(f"{flag} {m.suite}.{m.metric} = {m.value} ({m.comparison} {m.tolerance})")
    doc = {"suites": suites, "dataset_sha256": _sha256(args.dataset), **_metrics_doc(metrics)}
    write_report(_out_dir(args, cfg), "report", doc, args, started)
    return EXIT_OK if doc["pass"] else EXIT_FAIL


def cmd_regions(args) -> int:
    started = time.time()
    cfg = _config(args)
    out = _out_dir(args, cfg)
    out.mkdir(parents=True, exist_ok=True)
    sm = cfg["sampling"]
    params = load_field_data(args.dataset).params if args.dataset else model_params(cfg)
    rmap = rh.region_map_grid(tuple(sm["region_box"]), int(sm["region_resolution"]), params)
    rr, ii = np.meshgrid(rmap.re, rmap.im)
    _write_csv(out / "regions_raster.csv", ["re", "im", "code"],
               zip(rr.ravel(), ii.ravel(), rmap.codes.ravel().tolist()))
    rows = []
    for curve, segs in sorted(rmap.polylines.items()):
        for j, seg in enumerate(segs):
            rows += [(curve, j, float(a), float(b)) for a, b in seg]
    _write_csv(out / "regions_polylines.csv", ["curve", "segment", "re", "im"], rows)
    metrics = V.suite_regions(None if not args.dataset else load_field_data(args.dataset), cfg, args.threads)
    doc = {"counts": rmap.counts(), "codes": {"0": rh.BOUNDARY, **{str(i + 1): t for i, t in enumerate(rh.REGIONS)}},
           "bisectors": {t: rh.region_bisector(t, params) for t in rh.REGIONS},
           "segments": {k: len(v) for k, v in sorted(rmap.polylines.items())}, **_metrics_doc(metrics)}
    write_report(out, "regions", doc, args, started)
    return EXIT_OK if doc["pass"] else EXIT_FAIL


def cmd_jumps(args) -> int:
    started = time.time()
    cfg = _config(args)
    fd = _dataset(args, cfg)
    out = _out_dir(args, cfg)
    sm = cfg["sampling"]
    x, t = sm["jump_probe"]
    opts = quad_options(cfg, fine=True, override_guard=True)
    pts = V.boundary_points(fd.params, int(sm["boundary_points"]), float(sm["boundary_radius"]))

    def one(item):
        lam, m, n = item
        sp = ds.spectral_sample(fd, lam, with_adjugates=True, opts=opts)
        return rh.jump_matrix(m, n, sp.s, sp.S, x, t, lam, fd.params, sA=sp.sA, SA=sp.SA).to_dict()

    records = V._pmap(one, pts, args.threads)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "jumps.csv", ["m", "n", "re_lambda", "im_lambda", "det_minus_1"],
               [(r["m"], r["n"], r["lambda"][0], r["lambda"][1], r["det_minus_1"]) for r in records])
    metrics = V.suite_spectral(fd, cfg, args.threads) if args.suite and "spectral" in args.suite else []
    doc = {"x": x, "t": t, "jumps": records, **_metrics_doc(metrics)}
    write_report(out, "jumps", doc, args, started)
    return EXIT_OK if doc["pass"] else EXIT_FAIL


def cmd_residues(args) -> int:
    started = time.time()
    cfg = _config(args)
    fd = _dataset(args, cfg)
    out = _out_dir(args, cfg)
    opts = quad_options(cfg, override_guard=True)
    zeros = V.dataset_zero_counts(fd, cfg)

    def spectral(z):
        sp = ds.spectral_sample(fd, z, with_adjugates=True, opts=opts)
        return sp.s, sp.S

    records = []
    for tag, zs in sorted(zeros.items()):
        for z in zs:
            for rec in rg.residue_coefficients(spectral, z, 0.0, 0.0, fd.params):
                records.append(rec.to_dict())
    man = V.manufactured_residue_checks(cfg, fd.params)
    metrics = V.suite_residues(fd, cfg, args.threads)
    doc = {"zeros": {t: [z.to_dict() for z in zs] for t, zs in sorted(zeros.items())}, "residues": records,
           "manufactured": man, **_metrics_doc(metrics)}
    write_report(out, "residues", doc, args, started)
    return EXIT_OK if doc["pass"] else EXIT_FAIL


def cmd_global(args) -> int:
    started = time.time()
    cfg = _config(args)
    fd = _dataset(args, cfg)
    out = _out_dir(args, cfg)
    rep = rg.global_relation_residual(fd, opts=quad_options(cfg))
    out.mkdir(parents=True, exist_ok=True)
    rows = [(float(z.real), float(z.imag), *[float(r) if m else "" for r, m in zip(row, mrow)])
            for z, row, mrow in zip(rep.lambdas, rep.residuals, rep.mask)]
    _write_csv(out / "global_relation.csv", ["re", "im", "col1", "col2", "col3"], rows)
    metrics = V.suite_global(fd, cfg, args.threads)
    doc = {"relation": rep.to_dict(), **_metrics_doc(metrics)}
    write_report(out, "global", doc, args, started)
    return EXIT_OK if doc["pass"] else EXIT_FAIL


def cmd_reconstruct(args) -> int:
    started = time.time()
    cfg = _config(args)
    fd = _dataset(args, cfg)
    if not fd.has_interior:
        raise InteriorMissingError("reconstruct needs a dataset with the interior solution")
    out = _out_dir(args, cfg)
    opts = quad_options(cfg)
    radii = [float(r) for r in cfg["sampling"]["radii"]]
    probes = V.reconstruction_probes(fd, cfg)

    def one(p):
        ix, it, tag = p
        x, t = float(fd.x_grid[ix]), float(fd.t_grid[it])
        r = rh.reconstruct_uv(fd, x, t, radii=radii, opts=opts, region=tag)
        return (x, t, tag, r.u, r.v, fd.u_int[it, ix], fd.v_int[it, ix], r.error)

    rows = V._pmap(one, probes, args.threads)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "reconstruction.csv",
               ["x", "t", "region", "re_u", "im_u", "re_v", "im_v", "re_u_ref", "im_u_ref", "re_v_ref",
                "im_v_ref", "extrapolation_error"],
               [(x, t, tag, u.real, u.imag, v.real, v.imag, ur.real, ur.imag, vr.real, vr.imag, e)
                for x, t, tag, u, v, ur, vr, e in rows])
    metrics = V.suite_reconstruction(fd, cfg, args.threads)
    doc = {"probes": [{"x": x, "t": t, "region": tag, "u": u, "v": v, "u_ref": ur, "v_ref": vr}
                      for x, t, tag, u, v, ur, vr, _ in rows], **_metrics_doc(metrics)}
    write_report(out, "reconstruct", doc, args, started)
    return EXIT_OK if doc["pass"] else EXIT_FAIL


COMMANDS = {
    "generate": cmd_generate,
    "verify": cmd_verify,
    "regions": cmd_regions,
    "jumps": cmd_jumps,
    "residues": cmd_residues,
    "global": cmd_global,
    "reconstruct": cmd_reconstruct,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cmnls", description="Unified-transform toolkit for the half-line CMNLS system.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        sp = sub.add_parser(name, help=(fn.__doc__ or name).strip().splitlines()[0] if fn.__doc__ else None)
        sp.add_argument("--config", help="TOML or JSON run configuration")
        sp.add_argument("--dataset", help="dataset JSON (output path for generate)")
        sp.add_argument("--out-dir", help="directory for reports and artifacts")
        sp.add_argument("--suite", action="append", help="suite to run (repeatable); default all")
        sp.add_argument("--threads", type=int, default=1, help="worker threads for lambda sweeps")
        sp.add_argument("--override-domain-guard", action="store_true",
                        help="evaluate eigenfunction columns outside their bounded domains")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - mapped to documented exit codes
        code = exit_code_for(exc)
        print(f"error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
