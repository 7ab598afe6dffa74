"""Eigenfunctions mu_1, mu_2, mu_3 and the spectral functions s, S, c.

The conjugated Lax pair

    mu_x = -i k [Lambda, mu] + V1 mu,      mu_t = 2 i k^2 [Lambda, mu] + V2 mu

is integrated along axis-parallel two-leg paths from the normalisation
point of each eigenfunction:

* ``mu_1``: ``(0, T) -> (0, t) -> (x, t)``
* ``mu_2``: ``(0, 0) -> (0, t) -> (x, t)`` (alternate: ``(0, 0) -> (x, 0) -> (x, t)``)
* ``mu_3``: ``(L, t) -> (x, t)``

Columns are independent linear ODEs, so only the requested columns are
integrated.  Each entry ``(i, j)`` carries the exponential rate
``omega (Lambda_i - Lambda_j)``, handled exactly by an exponential RK4
(ETDRK4) step.

A column is refused when its entries would be amplified by more than
``exp(domain_guard)`` along the path: outside the boundedness domain of the
column the result is exponentially large and carries no information.
"""

from __future__ import annotations

import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from . import kernels
from .errors import ValidityDomainError
from .fields import FieldData, t_line, x_line
from .lax_core import (LAMBDA_DIAG, ModelParams, cofactor_matrix, det3, k_of, v1_stack, v2_stack)

ALL_COLUMNS = (0, 1, 2)


@dataclass(frozen=True)
class QuadOptions:
    """Step-size and guard settings of the eigenfunction integrator.

    Attributes
    ----------
    step_factor : float
        Step ``h <= step_factor / sup ||Q||`` along each leg.
    grid_cap : float
        Step never exceeds ``grid_cap`` data-grid spacings.
    domain_guard : float
        Largest admissible log-amplification of a column.
    override_guard : bool
        Integrate refused columns anyway (diagnostics only).
    estimate_error : bool
        Also integrate with halved steps and report the difference.
    """

    step_factor: float = 0.5
    grid_cap: float = 2.0
    domain_guard: float = 10.0
    override_guard: bool = False
    estimate_error: bool = False
    min_steps: int = 2


DEFAULT_QUAD = QuadOptions()


class Leg(NamedTuple):
    axis: str    # 'x' or 't'
    fixed: float  # the other coordinate
    start: float
    end: float


@dataclass
class PathResult:
    mu: np.ndarray               # (3, 3); unrequested columns are NaN
    error: float = 0.0           # halved-step difference (0 unless requested)
    growth: dict = field(default_factory=dict)  # column -> log-amplification
    steps: int = 0


# --------------------------------------------------------------------------
# paths

def eigenfunction_legs(j: int, fd: FieldData, x: float, t: float, path: str = "canonical") -> list:
    """Legs of the integration path of ``mu_j`` ending at ``(x, t)``."""
    T, L = fd.T, fd.L
    if j == 1:
        legs = [Leg("t", 0.0, T, t), Leg("x", t, 0.0, x)]
    elif j == 2:
        if path == "alternate":
            legs = [Leg("x", 0.0, 0.0, x), Leg("t", x, 0.0, t)]
        else:
            legs = [Leg("t", 0.0, 0.0, t), Leg("x", t, 0.0, x)]
    elif j == 3:
        legs = [Leg("x", t, L, x)]
    else:
        raise ValueError(f"eigenfunction index must be 1, 2 or 3, got {j}")
    return [leg for leg in legs if leg.end != leg.start]


def _rates(axis: str, k: complex) -> np.ndarray:
    omega = -1j * k if axis == "x" else 2j * k * k
    return omega * (LAMBDA_DIAG[:, None] - LAMBDA_DIAG[None, :])


def _coupling(fd: FieldData, lam: complex, leg: Leg, s: np.ndarray, params: ModelParams) -> np.ndarray:
    if leg.axis == "x":
        u, v, _, _ = x_line(fd, leg.fixed, s)
        return v1_stack(lam, u, v)
    u, v, ux, vx = t_line(fd, leg.fixed, s)
    return v2_stack(lam, u, v, ux, vx, params)


def _grid_step(fd: FieldData, axis: str) -> float:
    return fd.dx if axis == "x" else fd.dt


def _leg_growth(C: np.ndarray, Qn: np.ndarray, s: np.ndarray, end: float, first: bool) -> np.ndarray:
    """Log-amplification per column along one leg.

    On the first leg the solution starts at the identity, so an entry can only
    grow from where the data acts; the data weight ``log(|Q(s)| / sup|Q|)`` is
    included.  On later legs the entries are already populated and grow over
    the full remaining length.
    """
    re = np.real(C)  # (3, 3)
    if first:
        qmax = Qn.max()
        if qmax == 0:
            return np.zeros(3)
        with np.errstate(divide="ignore"):
            w = np.log(Qn / qmax)
        # exponent at the end of the leg of a disturbance created at s
        g = re[None, :, :] * (end - s)[:, None, None] + w[:, None, None]
        return np.maximum(0.0, g.max(axis=(0, 1)))
    span = end - s[0]
    return np.maximum(0.0, (re * span).max(axis=0))


def integrate_path(fd: FieldData, lam: complex, legs: Sequence[Leg], columns: Sequence[int] = ALL_COLUMNS,
                   params: Optional[ModelParams] = None, opts: QuadOptions = DEFAULT_QUAD,
                   adjugate: bool = False) -> PathResult:
    """Integrate the conjugated Lax pair (or its adjugate) along ``legs`` from the identity.

    Raises
    ------
    ValidityDomainError
        A requested column would grow by more than ``exp(opts.domain_guard)``.
    """
    params = params or fd.params
    lam = complex(lam)
    k = k_of(lam, params)
    cols = sorted(set(int(c) for c in columns))
    out = np.full((3, 3), np.nan, dtype=complex)
    if not cols:
        return PathResult(out)
    growth = np.zeros(3)
    prepared = []
    for li, leg in enumerate(legs):
        C = _rates(leg.axis, k)
        if adjugate:
            C = -C
        length = abs(leg.end - leg.start)
        cap = opts.grid_cap * _grid_step(fd, leg.axis)
        n = max(opts.min_steps, int(math.ceil(length / cap - 1e-9)))
        s = leg.start + (leg.end - leg.start) * np.arange(2 * n + 1) / (2 * n)
        Q = _coupling(fd, lam, leg, s, params)
        Qn = np.linalg.norm(Q, ord=2, axis=(1, 2)) if Q.size else np.zeros(0)
        qsup = float(Qn.max()) if Qn.size else 0.0
        n_need = int(math.ceil(length * qsup / opts.step_factor - 1e-9))
        if n_need > n:
            n = n_need
            s = leg.start + (leg.end - leg.start) * np.arange(2 * n + 1) / (2 * n)
            Q = _coupling(fd, lam, leg, s, params)
            Qn = np.linalg.norm(Q, ord=2, axis=(1, 2))
        growth += _leg_growth(C, Qn, s, leg.end, first=(li == 0))
        if adjugate:
            Q = -np.transpose(Q, (0, 2, 1))
        prepared.append((leg, C, Q, n))

    gdict = {c: float(growth[c]) for c in cols}
    if not opts.override_guard:
        for c in cols:
            if growth[c] > opts.domain_guard:
                raise ValidityDomainError(
                    f"column {c + 1} at lambda = {lam:.6g} would grow by exp({growth[c]:.3g}) "
                    f"(guard exp({opts.domain_guard:g})); outside its boundedness domain",
                    column=c + 1, growth=float(growth[c]))

    def run(refine: int) -> np.ndarray:
        Y = np.eye(3, dtype=complex)[:, cols]
        for leg, C, Q, n in prepared:
            if refine == 1:
                Qs, m = Q, n
            else:
                m = n * refine
                s = leg.start + (leg.end - leg.start) * np.arange(2 * m + 1) / (2 * m)
                Qs = _coupling(fd, lam, leg, s, params)
                if adjugate:
                    Qs = -np.transpose(Qs, (0, 2, 1))
            h = (leg.end - leg.start) / m
            coef = kernels.etd_coefficients(C[:, cols], h)
            Y = kernels.etdrk4_leg(Y, *coef, Qs)
        return Y

    Y = run(1)
    err = 0.0
    steps = sum(p[3] for p in prepared)
    if opts.estimate_error:
        Y2 = run(2)
        err = float(np.max(np.abs(Y2 - Y)))
        Y = Y2
    out[:, cols] = Y
    return PathResult(out, err, gdict, steps)


def integrate_eigenfunction(fd: FieldData, j: int, x: float, t: float, lam: complex,
                            columns: Sequence[int] = ALL_COLUMNS, params: Optional[ModelParams] = None,
                            opts: QuadOptions = DEFAULT_QUAD, path: str = "canonical",
                            adjugate: bool = False) -> PathResult:
    """``mu_j(x, t, lam)`` (or its cofactor matrix ``mu_j^A`` when ``adjugate``).

    Only the requested zero-based ``columns`` are computed; the others are
    NaN in the returned matrix.
    """
    legs = eigenfunction_legs(j, fd, x, t, path)
    return integrate_path(fd, lam, legs, columns, params, opts, adjugate)


# --------------------------------------------------------------------------
# spectral functions

_CACHE_LOCK = threading.Lock()
_CACHE_MAX = 4096


def _cached(fd: FieldData, key, fn):
    """Memoise lambda-only spectral functions on the (immutable) dataset."""
    store = fd._cache.setdefault("spectral", {})
    hit = store.get(key)
    if hit is not None:
        return hit
    val = fn()
    with _CACHE_LOCK:
        if len(store) >= _CACHE_MAX:
            store.clear()
        store[key] = val
    return val


def _spectral(fd, name, j, t, lam, columns, opts, adjugate):
    cols = tuple(sorted(set(int(c) for c in columns)))
    key = (name, complex(lam), cols, opts, bool(adjugate))
    return _cached(fd, key, lambda: integrate_eigenfunction(fd, j, 0.0, t, lam, cols, opts=opts,
                                                            adjugate=adjugate))


def compute_s(fd: FieldData, lam: complex, columns=ALL_COLUMNS, opts: QuadOptions = DEFAULT_QUAD,
              adjugate: bool = False) -> PathResult:
    """``s(lam) = mu_3(0, 0, lam)``, built from the initial data only."""
    return _spectral(fd, "s", 3, 0.0, lam, columns, opts, adjugate)


def compute_S(fd: FieldData, lam: complex, columns=ALL_COLUMNS, opts: QuadOptions = DEFAULT_QUAD,
              adjugate: bool = False) -> PathResult:
    """``S(lam) = mu_1(0, 0, lam)``, built from the boundary traces only."""
    return _spectral(fd, "S", 1, 0.0, lam, columns, opts, adjugate)


def compute_c(fd: FieldData, lam: complex, columns=ALL_COLUMNS, opts: QuadOptions = DEFAULT_QUAD,
              adjugate: bool = False) -> PathResult:
    """``c(T, lam) = mu_3(0, T, lam)``; needs the interior solution at ``t = T``."""
    return _spectral(fd, "c", 3, fd.T, lam, columns, opts, adjugate)


def adjugate_eigenfunction(mu: np.ndarray, check: bool = True, tol: float = 1e-6) -> np.ndarray:
    """Cofactor matrix of an eigenfunction value.

    With ``det mu = 1`` this is ``inv(mu).T``; ``check`` verifies the
    determinant and raises ``ValueError`` when it is off by more than ``tol``.
    """
    mu = np.asarray(mu, dtype=complex)
    A = cofactor_matrix(mu)
    if check:
        d = det3(mu)
        if not abs(d - 1) <= tol:
            raise ValueError(f"det(mu) = {d:.6g}, not a unimodular eigenfunction value")
    return A


@dataclass
class SpectralSample:
    lam: complex
    s: np.ndarray
    S: np.ndarray
    c: Optional[np.ndarray] = None
    sA: Optional[np.ndarray] = None
    SA: Optional[np.ndarray] = None
    quad_error: float = 0.0
    growth: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        def enc(a):
            return None if a is None else [[[float(z.real), float(z.imag)] for z in row] for row in a]
        return {"lambda": [self.lam.real, self.lam.imag], "s": enc(self.s), "S": enc(self.S),
                "c": enc(self.c), "sA": enc(self.sA), "SA": enc(self.SA),
                "quad_error": self.quad_error}


def spectral_sample(fd: FieldData, lam: complex, with_c: bool = False, with_adjugates: bool = True,
                    opts: QuadOptions = DEFAULT_QUAD) -> SpectralSample:
    """All of ``s, S`` (and optionally ``c`` and the cofactor matrices) at one ``lam``.

    Every column is integrated, so ``lam`` must lie where all of them stay
    within the growth guard (near the real and imaginary axes), or
    ``opts.override_guard`` must be set.
    """
    lam = complex(lam)
    parts = {"s": compute_s(fd, lam, opts=opts), "S": compute_S(fd, lam, opts=opts)}
    if with_c:
        parts["c"] = compute_c(fd, lam, opts=opts)
    if with_adjugates:
        parts["sA"] = compute_s(fd, lam, opts=opts, adjugate=True)
        parts["SA"] = compute_S(fd, lam, opts=opts, adjugate=True)
    err = max(p.error for p in parts.values())
    growth = {name: p.growth for name, p in parts.items()}
    return SpectralSample(lam=lam, quad_error=err, growth=growth,
                          **{name: p.mu for name, p in parts.items()})


def spectral_sweep(fd: FieldData, lams, threads: int = 1, **kw) -> list:
    """:func:`spectral_sample` over many ``lam`` (thread-parallel, order preserved)."""
    lams = list(lams)
    if threads <= 1:
        return [spectral_sample(fd, lam, **kw) for lam in lams]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(lambda z: spectral_sample(fd, z, **kw), lams))


# --------------------------------------------------------------------------
# symmetry

def symmetry_matrix(epsilon: int) -> np.ndarray:
    return np.diag([-1.0, float(epsilon), float(epsilon)]).astype(complex)


def symmetry_residual(fd: FieldData, lam: complex, epsilon: int, which: Sequence[str] = ("s", "S"),
                      opts: QuadOptions = DEFAULT_QUAD) -> float:
    """``max || mu(lam)^{-1} - A conj(mu(conj lam))^T A ||`` over the chosen eigenfunction values.

    ``which`` selects among ``'s'`` (``mu_3(0,0)``), ``'S'`` (``mu_1(0,0)``) and
    ``'mu2'`` (``mu_2(L/4, T/2)``, needs interior data).
    """
    A = symmetry_matrix(epsilon)
    lam = complex(lam)

    def value(name, z):
        if name == "s":
            return compute_s(fd, z, opts=opts).mu
        if name == "S":
            return compute_S(fd, z, opts=opts).mu
        if name == "mu2":
            return integrate_eigenfunction(fd, 2, fd.L / 4, fd.T / 2, z, opts=opts).mu
        raise ValueError(f"unknown eigenfunction value {name!r}")

    worst = 0.0
    for name in which:
        m = value(name, lam)
        mc = m if lam.imag == 0 else value(name, lam.conjugate())
        inv = cofactor_matrix(m).T / det3(m)
        r = inv - A @ np.conj(mc).T @ A
        worst = max(worst, float(np.linalg.norm(r)))
    return worst


def calibrate_epsilon(fd: FieldData, lams, which=("s", "S"), opts: QuadOptions = DEFAULT_QUAD) -> dict:
    """Symmetry residuals for both signs; ``epsilon`` is the sign with the smaller one."""
    res = {e: max(symmetry_residual(fd, z, e, which, opts) for z in lams) for e in (1, -1)}
    best = min(res, key=res.get)
    other = -best
    ratio = res[other] / res[best] if res[best] > 0 else float("inf")
    return {"epsilon": best, "residual": res[best], "other_residual": res[other], "ratio": ratio}
