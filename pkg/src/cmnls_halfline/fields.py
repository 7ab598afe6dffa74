"""Initial/boundary data, optional interior solution, and their interpolation.

A :class:`FieldData` holds

* ``u0, v0`` on a uniform ``x_grid`` starting at 0,
* Dirichlet and Neumann traces ``g0, h0, g1, h1`` on a uniform ``t_grid``
  starting at 0,
* optionally the full solution ``u_int, v_int`` of shape ``(nt, nx)``.

Sampling uses 4-point Lagrange interpolation.  Space derivatives of stored
fields are formed with 8th-order finite differences on the grid and then
interpolated.
"""

from __future__ import annotations

import base64
import csv
import dataclasses
import json
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (CornerMismatchError, DecayViolationError, FieldDataError, InteriorMissingError,
                     OutOfDomainError, SchemaError)
from .lax_core import DEFAULT_PARAMS, FieldPoint, ModelParams

SCHEMA_VERSION = 1

DEFAULT_TOLERANCES = {
    "corner": 1e-6,
    "corner_derivative": 1e-4,
    "decay": 1e-6,
}

_GRID_RTOL = 1e-9
_SNAP = 1e-10


# --------------------------------------------------------------------------
# finite differences and interpolation

_C8 = np.array([1 / 280, -4 / 105, 1 / 5, -4 / 5, 0.0, 4 / 5, -1 / 5, 4 / 105, -1 / 280])


def fd_derivative(a: np.ndarray, d: float, axis: int = -1, order: int = 4) -> np.ndarray:
    """First derivative along ``axis`` on a uniform grid.

    ``order=4``: 5-point centred stencil with one-sided 5-point closures.
    ``order=8``: 9-point centred stencil in the interior, falling back to the
    4th-order formulas within four points of the edges.
    """
    if order not in (4, 8):
        raise ValueError("order must be 4 or 8")
    a = np.moveaxis(np.asarray(a, dtype=complex), axis, -1)
    n = a.shape[-1]
    out = np.zeros_like(a)
    if n < 5:
        if n >= 2:
            out[...] = np.gradient(a, d, axis=-1)
        return np.moveaxis(out, -1, axis)
    out[..., 2:-2] = (a[..., :-4] - 8 * a[..., 1:-3] + 8 * a[..., 3:-1] - a[..., 4:]) / (12 * d)
    out[..., 0] = (-25 * a[..., 0] + 48 * a[..., 1] - 36 * a[..., 2] + 16 * a[..., 3] - 3 * a[..., 4]) / (12 * d)
    out[..., 1] = (-3 * a[..., 0] - 10 * a[..., 1] + 18 * a[..., 2] - 6 * a[..., 3] + a[..., 4]) / (12 * d)
    out[..., -1] = (25 * a[..., -1] - 48 * a[..., -2] + 36 * a[..., -3] - 16 * a[..., -4] + 3 * a[..., -5]) / (12 * d)
    out[..., -2] = (3 * a[..., -1] + 10 * a[..., -2] - 18 * a[..., -3] + 6 * a[..., -4] - a[..., -5]) / (12 * d)
    if order == 8 and n >= 9:
        acc = np.zeros_like(a[..., 4:-4])
        for m, cm in enumerate(_C8):
            if cm:
                acc += cm * a[..., m:n - 8 + m]
        out[..., 4:-4] = acc / d
    return np.moveaxis(out, -1, axis)


def lagrange4(start: float, step: float, n: int, s) -> tuple[np.ndarray, np.ndarray]:
    """Stencil indices and weights of 4-point Lagrange interpolation.

    Parameters
    ----------
    start, step, n : float, float, int
        Uniform grid ``start + step * arange(n)``.
    s : array_like
        Query points, assumed inside the grid.

    Returns
    -------
    idx : (m, 4) int array
    w : (m, 4) float array
    """
    s = np.atleast_1d(np.asarray(s, dtype=float))
    r = (s - start) / step
    rr = np.round(r)
    r = np.where(np.abs(r - rr) < _SNAP, rr, r)
    if n < 4:
        # linear fallback for tiny grids
        i0 = np.clip(np.floor(r).astype(int), 0, max(n - 2, 0))
        f = r - i0
        idx = np.stack([i0, np.minimum(i0 + 1, n - 1), np.minimum(i0 + 1, n - 1), np.minimum(i0 + 1, n - 1)], -1)
        w = np.stack([1 - f, f, 0 * f, 0 * f], -1)
        return idx, w
    i0 = np.clip(np.floor(r).astype(int) - 1, 0, n - 4)
    p = r - i0  # position inside the 4-point stencil, nodes at 0, 1, 2, 3
    w = np.stack([-(p - 1) * (p - 2) * (p - 3) / 6.0,
                  p * (p - 2) * (p - 3) / 2.0,
                  -p * (p - 1) * (p - 3) / 2.0,
                  p * (p - 1) * (p - 2) / 6.0], -1)
    idx = i0[:, None] + np.arange(4)[None, :]
    return idx, w


def interp1(start: float, step: float, values: np.ndarray, s) -> np.ndarray:
    """Cubic interpolation of ``values`` (last axis on the grid) at points ``s``."""
    values = np.asarray(values)
    idx, w = lagrange4(start, step, values.shape[-1], s)
    return np.sum(values[..., idx] * w, axis=-1)


def _check_uniform(grid: np.ndarray, name: str) -> float:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise FieldDataError(f"{name} must be 1-D with at least two points")
    d = np.diff(grid)
    step = (grid[-1] - grid[0]) / (grid.size - 1)
    if step <= 0 or np.max(np.abs(d - step)) > _GRID_RTOL * max(1.0, abs(step)) * 10:
        raise FieldDataError(f"{name} must be uniform and increasing")
    return float(step)


# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FieldData:
    """Initial data, boundary traces and (optionally) the interior solution on a half-line box."""

    x_grid: np.ndarray
    t_grid: np.ndarray
    u0: np.ndarray
    v0: np.ndarray
    g0: np.ndarray
    h0: np.ndarray
    g1: np.ndarray
    h1: np.ndarray
    params: ModelParams = DEFAULT_PARAMS
    u_int: Optional[np.ndarray] = None
    v_int: Optional[np.ndarray] = None
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    metadata: dict = field(default_factory=dict)
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def dx(self) -> float:
        return float((self.x_grid[-1] - self.x_grid[0]) / (self.x_grid.size - 1))

    @property
    def dt(self) -> float:
        return float((self.t_grid[-1] - self.t_grid[0]) / (self.t_grid.size - 1))

    @property
    def L(self) -> float:
        return float(self.x_grid[-1])

    @property
    def T(self) -> float:
        return float(self.t_grid[-1])

    @property
    def has_interior(self) -> bool:
        return self.u_int is not None and self.v_int is not None

    # derivative caches -----------------------------------------------------
    def _cached(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    @property
    def u0x(self) -> np.ndarray:
        return self._cached("u0x", lambda: fd_derivative(self.u0, self.dx, order=8))

    @property
    def v0x(self) -> np.ndarray:
        return self._cached("v0x", lambda: fd_derivative(self.v0, self.dx, order=8))

    def interior_dx(self):
        """``(u_x, v_x)`` of the interior solution; column 0 replaced by ``g1, h1``."""
        if not self.has_interior:
            raise InteriorMissingError("dataset carries no interior solution")

        def make():
            ux = fd_derivative(self.u_int, self.dx, axis=1, order=8)
            vx = fd_derivative(self.v_int, self.dx, axis=1, order=8)
            ux[:, 0] = self.g1
            vx[:, 0] = self.h1
            return ux, vx

        return self._cached("int_dx", make)

    def replace(self, **changes) -> "FieldData":
        """Copy with some arrays replaced (derivative caches are dropped)."""
        changes.setdefault("_cache", {})
        return dataclasses.replace(self, **changes)


def build_field_data(x_grid, t_grid, u0, v0, g0, h0, g1, h1, params: ModelParams = DEFAULT_PARAMS,
                     u_int=None, v_int=None, tolerances: Optional[dict] = None,
                     metadata: Optional[dict] = None, check: bool = True) -> FieldData:
    """Validate arrays and build a :class:`FieldData`.

    Raises
    ------
    FieldDataError
        Non-uniform grids, mismatched lengths, non-finite values.
    CornerMismatchError
        ``u0(0) != g0(0)`` (and analogues) beyond the declared tolerance.
    DecayViolationError
        Initial data not small over the last 10% of the x-grid.
    """
    tol = dict(DEFAULT_TOLERANCES)
    if tolerances:
        tol.update(tolerances)
    for key, val in tol.items():
        if not (val > 0):
            raise FieldDataError(f"tolerance {key!r} must be positive")
    x_grid = np.asarray(x_grid, dtype=float)
    t_grid = np.asarray(t_grid, dtype=float)
    _check_uniform(x_grid, "x_grid")
    _check_uniform(t_grid, "t_grid")
    if abs(x_grid[0]) > 1e-12 or abs(t_grid[0]) > 1e-12:
        raise FieldDataError("x_grid and t_grid must start at 0")
    arrs = {}
    for name, a, n in (("u0", u0, x_grid.size), ("v0", v0, x_grid.size),
                       ("g0", g0, t_grid.size), ("h0", h0, t_grid.size),
                       ("g1", g1, t_grid.size), ("h1", h1, t_grid.size)):
        a = np.array(a, dtype=complex)
        if a.shape != (n,):
            raise FieldDataError(f"{name} has shape {a.shape}, expected ({n},)")
        if not np.all(np.isfinite(a)):
            raise FieldDataError(f"{name} contains non-finite values")
        arrs[name] = a
    if (u_int is None) != (v_int is None):
        raise FieldDataError("u_int and v_int must be given together")
    if u_int is not None:
        u_int = np.array(u_int, dtype=complex)
        v_int = np.array(v_int, dtype=complex)
        shape = (t_grid.size, x_grid.size)
        if u_int.shape != shape or v_int.shape != shape:
            raise FieldDataError(f"interior arrays must have shape {shape}")
        if not (np.all(np.isfinite(u_int)) and np.all(np.isfinite(v_int))):
            raise FieldDataError("interior contains non-finite values")
    fd = FieldData(x_grid=x_grid, t_grid=t_grid, params=params, u_int=u_int, v_int=v_int,
                   tolerances=tol, metadata=dict(metadata or {}), **arrs)
    if check:
        check_corner(fd)
        check_decay(fd)
    return fd


def corner_mismatch(fd: FieldData) -> dict:
    """Absolute corner mismatches at ``(x, t) = (0, 0)``."""
    return {
        "u": float(abs(fd.u0[0] - fd.g0[0])),
        "v": float(abs(fd.v0[0] - fd.h0[0])),
        "ux": float(abs(fd.u0x[0] - fd.g1[0])),
        "vx": float(abs(fd.v0x[0] - fd.h1[0])),
    }


def check_corner(fd: FieldData) -> None:
    mm = corner_mismatch(fd)
    for key in ("u", "v"):
        if mm[key] > fd.tolerances["corner"]:
            raise CornerMismatchError(
                f"corner mismatch in {key}: |{key}0(0) - trace(0)| = {mm[key]:.3e} "
                f"> {fd.tolerances['corner']:.1e}")
    for key in ("ux", "vx"):
        if mm[key] > fd.tolerances["corner_derivative"]:
            raise CornerMismatchError(
                f"corner mismatch in {key}: {mm[key]:.3e} > {fd.tolerances['corner_derivative']:.1e}")


def check_decay(fd: FieldData) -> None:
    n = fd.x_grid.size
    tail = slice(n - max(1, int(np.ceil(0.1 * n))), n)
    amp = np.maximum(np.abs(fd.u0[tail]), np.abs(fd.v0[tail]))
    if amp.max() > fd.tolerances["decay"]:
        i = int(np.argmax(amp)) + tail.start
        raise DecayViolationError(
            f"initial data not decaying: |u0|,|v0| = {amp.max():.3e} at x = {fd.x_grid[i]:.4g} "
            f"> {fd.tolerances['decay']:.1e}")


# --------------------------------------------------------------------------
# sampling

def _in_box(fd: FieldData, x, t):
    x = np.asarray(x, dtype=float)
    t = np.asarray(t, dtype=float)
    eps_x = 1e-12 * max(1.0, fd.L)
    eps_t = 1e-12 * max(1.0, fd.T)
    if np.any(x < -eps_x) or np.any(x > fd.L + eps_x):
        raise OutOfDomainError(f"x outside [0, {fd.L}]")
    if np.any(t < -eps_t) or np.any(t > fd.T + eps_t):
        raise OutOfDomainError(f"t outside [0, {fd.T}]")


def x_line(fd: FieldData, t: float, xs) -> tuple:
    """``(u, v, ux, vx)`` along the horizontal line at time ``t`` for points ``xs``."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    _in_box(fd, xs, t)
    if t <= 1e-14 * max(1.0, fd.T):
        rows = (fd.u0, fd.v0, fd.u0x, fd.v0x)
    else:
        if not fd.has_interior:
            raise InteriorMissingError(f"samples at t = {t} off the x = 0 axis need the interior solution")
        ux, vx = fd.interior_dx()
        rows = tuple(interp1(0.0, fd.dt, a.T, t)[:, 0] for a in (fd.u_int, fd.v_int, ux, vx))
    return tuple(interp1(0.0, fd.dx, r, xs) for r in rows)


def t_line(fd: FieldData, x: float, ts) -> tuple:
    """``(u, v, ux, vx)`` along the vertical line at ``x`` for times ``ts``."""
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    _in_box(fd, x, ts)
    if x <= 1e-14 * max(1.0, fd.L):
        cols = (fd.g0, fd.h0, fd.g1, fd.h1)
    else:
        if not fd.has_interior:
            raise InteriorMissingError(f"samples at x = {x} off the t = 0 axis need the interior solution")
        ux, vx = fd.interior_dx()
        cols = tuple(interp1(0.0, fd.dx, a, x)[:, 0] for a in (fd.u_int, fd.v_int, ux, vx))
    return tuple(interp1(0.0, fd.dt, c, ts) for c in cols)


def sample_fields(fd: FieldData, x: float, t: float) -> FieldPoint:
    """Interpolated :class:`FieldPoint` at ``(x, t)``.

    Raises
    ------
    OutOfDomainError
        ``(x, t)`` outside ``[0, L] x [0, T]``.
    InteriorMissingError
        ``x > 0`` and ``t > 0`` without interior data.
    """
    _in_box(fd, x, t)
    if x <= 1e-14 * max(1.0, fd.L):
        vals = t_line(fd, 0.0, [t])
    else:
        vals = x_line(fd, t, [x])
    return FieldPoint(*(complex(a[0]) for a in vals))


# --------------------------------------------------------------------------
# exact solutions and diagnostics

@dataclass(frozen=True)
class PlaneWave:
    """Exact solution ``a exp(i(kappa x - omega t))`` in one component, zero in the other."""

    a: float
    kappa: float
    omega: float
    component: str = "u"

    def fields(self, x, t):
        w = self.a * np.exp(1j * (self.kappa * np.asarray(x) - self.omega * np.asarray(t)))
        z = np.zeros_like(w)
        return (w, z) if self.component == "u" else (z, w)

    def __call__(self, x: float, t: float) -> FieldPoint:
        u, v = self.fields(x, t)
        return FieldPoint(complex(u), complex(v), complex(1j * self.kappa * u), complex(1j * self.kappa * v))


def plane_wave_solution(a: float, kappa: float, params: ModelParams = DEFAULT_PARAMS,
                        component: str = "u") -> PlaneWave:
    """Plane wave with the dispersion relation ``omega = kappa^2 - delta a^2 + gamma kappa a^2``."""
    if component not in ("u", "v"):
        raise ValueError("component must be 'u' or 'v'")
    omega = kappa ** 2 - params.delta * a ** 2 + params.gamma * kappa * a ** 2
    return PlaneWave(a=float(a), kappa=float(kappa), omega=float(omega), component=component)


def decay_report(fd: FieldData, fractions=(0.5, 0.25, 0.1, 0.05)) -> dict:
    """Tail max-norms of the initial data and a log-linear decay-rate fit.

    The fit uses the right half of the grid where the amplitude is above the
    underflow level; ``rate > 0`` means decay like ``exp(-rate x)``.
    """
    amp = np.maximum(np.abs(fd.u0), np.abs(fd.v0))
    n = amp.size
    tails = {}
    for f in fractions:
        m = max(1, int(np.ceil(f * n)))
        tails[f"{f:g}"] = float(amp[n - m:].max())
    half = slice(n // 2, n)
    xs, a = fd.x_grid[half], amp[half]
    ok = a > 1e-300
    if ok.sum() >= 2:
        slope = np.polyfit(xs[ok], np.log(a[ok]), 1)[0]
        rate = float(-slope)
    else:
        rate = float("inf")
    last10 = tails.get("0.1", float(amp[n - max(1, int(np.ceil(0.1 * n))):].max()))
    return {
        "tail_max": tails,
        "fitted_rate": rate,
        "threshold": fd.tolerances["decay"],
        "passes": bool(last10 <= fd.tolerances["decay"]),
    }


# --------------------------------------------------------------------------
# I/O

_ARRAYS = ("u0", "v0", "g0", "h0", "g1", "h1")


def _encode(a: np.ndarray, encoding: str):
    a = np.ascontiguousarray(a, dtype="<c16")
    if encoding == "base64":
        return {"shape": list(a.shape), "b64": base64.b64encode(a.tobytes()).decode("ascii")}
    if encoding == "pairs":
        return {"shape": list(a.shape), "pairs": np.stack([a.real, a.imag], -1).reshape(-1, 2).tolist()}
    raise ValueError(f"unknown encoding {encoding!r}")


def _decode(obj, name) -> np.ndarray:
    try:
        shape = tuple(int(s) for s in obj["shape"])
        if "b64" in obj:
            a = np.frombuffer(base64.b64decode(obj["b64"]), dtype="<c16")
        else:
            p = np.asarray(obj["pairs"], dtype=float).reshape(-1, 2)
            a = p[:, 0] + 1j * p[:, 1]
        return a.reshape(shape).astype(complex)
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"array {name!r} is malformed: {exc}") from exc


def _grid_spec(grid: np.ndarray) -> dict:
    return {"start": float(grid[0]), "stop": float(grid[-1]), "n": int(grid.size)}


def field_data_to_dict(fd: FieldData, encoding: str = "base64", include_interior: bool = True) -> dict:
    doc = {
        "schema": "cmnls-fielddata",
        "version": SCHEMA_VERSION,
        "params": fd.params.to_dict(),
        "x_grid": _grid_spec(fd.x_grid),
        "t_grid": _grid_spec(fd.t_grid),
        "tolerances": dict(fd.tolerances),
        "metadata": fd.metadata,
        "arrays": {name: _encode(getattr(fd, name), encoding) for name in _ARRAYS},
    }
    # store grids verbatim too so that reloads are bit-exact
    doc["arrays"]["x_grid"] = _encode(fd.x_grid.astype(complex), encoding)
    doc["arrays"]["t_grid"] = _encode(fd.t_grid.astype(complex), encoding)
    if include_interior and fd.has_interior:
        doc["arrays"]["u_int"] = _encode(fd.u_int, encoding)
        doc["arrays"]["v_int"] = _encode(fd.v_int, encoding)
    return doc


def field_data_from_dict(doc: dict, check: bool = True) -> FieldData:
    if not isinstance(doc, dict) or doc.get("schema") != "cmnls-fielddata":
        raise SchemaError("not a cmnls-fielddata document")
    try:
        arrays = doc["arrays"]
        params = ModelParams.from_dict(doc["params"])
        if "x_grid" in arrays:
            x_grid = _decode(arrays["x_grid"], "x_grid").real
            t_grid = _decode(arrays["t_grid"], "t_grid").real
        else:
            xs, ts = doc["x_grid"], doc["t_grid"]
            x_grid = np.linspace(xs["start"], xs["stop"], int(xs["n"]))
            t_grid = np.linspace(ts["start"], ts["stop"], int(ts["n"]))
        vals = {name: _decode(arrays[name], name) for name in _ARRAYS}
        u_int = _decode(arrays["u_int"], "u_int") if "u_int" in arrays else None
        v_int = _decode(arrays["v_int"], "v_int") if "v_int" in arrays else None
    except SchemaError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed dataset document: {exc}") from exc
    try:
        return build_field_data(x_grid, t_grid, params=params, u_int=u_int, v_int=v_int,
                                tolerances=doc.get("tolerances"), metadata=doc.get("metadata"),
                                check=check, **vals)
    except FieldDataError as exc:
        if isinstance(exc, (CornerMismatchError, DecayViolationError)):
            raise
        raise SchemaError(str(exc)) from exc


def save_field_data(fd: FieldData, path, encoding: str = "base64", include_interior: bool = True) -> None:
    with open(path, "w") as fh:
        json.dump(field_data_to_dict(fd, encoding, include_interior), fh, sort_keys=True)


def load_field_data(path, check: bool = True) -> FieldData:
    """Read a dataset written by :func:`save_field_data`.

    Raises :class:`SchemaError` for unreadable or malformed files.
    """
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON ({exc})") from exc
    return field_data_from_dict(doc, check=check)


def export_trace_csv(path, grid, values, grid_name: str = "x", value_name: str = "value") -> None:
    """Write a 1-D complex trace as ``grid, re, im, abs`` columns."""
    grid = np.asarray(grid)
    values = np.asarray(values, dtype=complex)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([grid_name, f"re_{value_name}", f"im_{value_name}", f"abs_{value_name}"])
        for g, val in zip(grid, values):
            w.writerow([repr(float(g)), repr(float(val.real)), repr(float(val.imag)), repr(float(abs(val)))])
