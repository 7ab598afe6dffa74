"""Zeros of the scalar spectral functions, residue conditions and the global relation.

The four scalars whose zeros produce poles of ``M`` are

    D1: (s^T S^A)_11     D2: s_11     D3: m_11(s)     D4: (S^T s^A)_11

(``m_ij`` and ``M_ij`` are unsigned minors of ``s`` and ``S``).  Zeros are
located by the argument principle on rectangles, refined by Newton's method
and checked for simplicity.  At a simple zero ``lam_j`` the residue of the
affected column of ``M`` is a multiple of ``e^{theta} [M(lam_j)]_source``
with ``theta_ij = (l_i - l_j) x + (z_i - z_j) t``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import direct_scattering as ds
from .errors import DegenerateZeroError, RegionError, UnresolvedZeroError
from .fields import FieldData
from .lax_core import DEFAULT_PARAMS, ModelParams, SpectralPoint, cofactor_matrix, conjugation_action, k_of, \
    make_spectral_point
from .rh_assembly import BOUNDARY, REGIONS, RegionId, classify_array, classify_region

SCALAR_NAMES = {"D1": "(s^T S^A)_11", "D2": "s_11", "D3": "m_11(s)", "D4": "(S^T s^A)_11"}
SINGULAR_TOL = 1e-10
_SIGNS = np.array([[1, -1, 1], [-1, 1, -1], [1, -1, 1]], dtype=float)


def theta(i: int, j: int, x: float, t: float, sp: SpectralPoint) -> complex:
    """``theta_ij = (l_i - l_j) x + (z_i - z_j) t`` (indices 1..3)."""
    if not (1 <= i <= 3 and 1 <= j <= 3):
        raise ValueError("theta indices must be 1, 2 or 3")
    return (sp.l[i - 1] - sp.l[j - 1]) * x + (sp.z[i - 1] - sp.z[j - 1]) * t


# --------------------------------------------------------------------------
# scalar functions

def unsigned_minors(B: np.ndarray, BA: Optional[np.ndarray] = None) -> np.ndarray:
    BA = cofactor_matrix(B) if BA is None else BA
    return BA * _SIGNS


def scalar_value(region: str, s: np.ndarray, S: np.ndarray, sA=None, SA=None) -> complex:
    """The scalar of ``region`` evaluated from ``s``, ``S`` (and optionally their cofactor matrices)."""
    if region == "D2":
        return complex(s[0, 0])
    sA = cofactor_matrix(s) if sA is None else sA
    if region == "D3":
        return complex(sA[0, 0])
    SA = cofactor_matrix(S) if SA is None else SA
    if region == "D1":
        return complex(s[:, 0] @ SA[:, 0])
    if region == "D4":
        return complex(S[:, 0] @ sA[:, 0])
    raise RegionError(f"unknown region {region!r}")


def complex_derivative(f: Callable[[complex], complex], z: complex, h: float) -> complex:
    """4th-order central difference along the real direction (``f`` analytic)."""
    return (f(z - 2 * h) - 8 * f(z - h) + 8 * f(z + h) - f(z + 2 * h)) / (12 * h)


# --------------------------------------------------------------------------
# zeros

@dataclass
class ZeroLocus:
    lambda_j: complex
    which: str
    region: RegionId
    multiplicity_estimate: int
    newton_residual: float
    violation: Optional[str] = None  # 'multiple' or 'boundary' when Assumption-type conditions fail

    def to_dict(self) -> dict:
        return {"lambda": [self.lambda_j.real, self.lambda_j.imag], "which": self.which,
                "region": self.region.tag, "margin": self.region.margin,
                "multiplicity": self.multiplicity_estimate, "newton_residual": self.newton_residual,
                "violation": self.violation}


def _perimeter(box):
    x0, x1, y0, y1 = box
    c = [complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1)]
    return lambda s: c[int(s) % 4] + (s - math.floor(s)) * (c[(int(s) + 1) % 4] - c[int(s) % 4])


def winding_number(f: Callable[[complex], complex], box, n_edge: int = 32, max_rounds: int = 14):
    """Argument-principle count of zeros of ``f`` inside ``box``.

    The perimeter is sampled adaptively until consecutive phase increments
    are below ``pi/4``.  Returns ``(count, raw_winding, min|f|/max|f|)``.
    """
    pt = _perimeter(box)
    s = list(np.arange(4 * n_edge) / n_edge) + [4.0]
    vals = [complex(f(pt(x))) for x in s[:-1]]
    vals.append(vals[0])
    for _ in range(max_rounds):
        d = np.angle(np.array(vals[1:]) / np.array(vals[:-1]))
        bad = np.nonzero(np.abs(d) > math.pi / 4)[0]
        if bad.size == 0:
            break
        ns, nv = [s[0]], [vals[0]]
        badset = set(bad.tolist())
        for i in range(len(s) - 1):
            if i in badset:
                m = 0.5 * (s[i] + s[i + 1])
                ns.append(m)
                nv.append(complex(f(pt(m))))
            ns.append(s[i + 1])
            nv.append(vals[i + 1])
        s, vals = ns, nv
    else:
        raise UnresolvedZeroError(f"phase along the boundary of {box} could not be resolved")
    av = np.abs(np.array(vals))
    w = float(np.sum(np.angle(np.array(vals[1:]) / np.array(vals[:-1])))) / (2 * math.pi)
    ratio = float(av.min() / av.max()) if av.max() > 0 else 0.0
    return int(round(w)), w, ratio


def _newton(f, z, mult=1, h_rel=1e-4, tol=1e-13, maxit=60):
    fz = complex(f(z))
    for _ in range(maxit):
        d = complex_derivative(f, z, h_rel * (1 + abs(z)))
        if d == 0:
            break
        step = mult * fz / d
        z = z - step
        fz = complex(f(z))
        if abs(step) <= tol * (1 + abs(z)):
            break
    return z, abs(fz)


def _split(box, frac=0.4937):
    x0, x1, y0, y1 = box
    xm = x0 + frac * (x1 - x0)
    ym = y0 + (1 - frac) * (y1 - y0)
    return [(x0, xm, y0, ym), (xm, x1, y0, ym), (x0, xm, ym, y1), (xm, x1, ym, y1)]


def _inside(z, box, slack):
    x0, x1, y0, y1 = box
    return x0 - slack <= z.real <= x1 + slack and y0 - slack <= z.imag <= y1 + slack


def _search(f, box, count, min_size, depth, out):
    if count == 0:
        return
    size = max(box[1] - box[0], box[3] - box[2])
    cx = complex(0.5 * (box[0] + box[1]), 0.5 * (box[2] + box[3]))
    if count == 1:
        z, r = _newton(f, cx)
        if _inside(z, box, 1e-9 * (1 + size)):
            out.append((z, 1, r))
            return
    if size < min_size or depth > 40:
        z, r = _newton(f, cx, mult=count)
        out.append((z, count, r))
        return
    for sub in _split(box):
        n, _, _ = winding_number(f, sub)
        _search(f, sub, n, min_size, depth + 1, out)


# Im k = Im(lam^2)/gamma: D1/D2 sit in quadrants I and III, D3/D4 in II and IV (swapped for gamma < 0)
_QUADRANTS_OF = {"D1": ("I", "III"), "D2": ("I", "III"), "D3": ("II", "IV"), "D4": ("II", "IV")}
_MIRROR = {"I": "II", "II": "I", "III": "IV", "IV": "III"}


def _region_boxes(box, region, params):
    x0, x1, y0, y1 = map(float, box)
    quads = {"I": (max(x0, 0), x1, max(y0, 0), y1), "II": (x0, min(x1, 0), max(y0, 0), y1),
             "III": (x0, min(x1, 0), y0, min(y1, 0)), "IV": (max(x0, 0), x1, y0, min(y1, 0))}
    want = ("I", "II", "III", "IV")
    if region is not None:
        want = _QUADRANTS_OF[region]
        if params.gamma < 0:
            want = tuple(_MIRROR[q] for q in want)
    return [b for q, b in quads.items() if q in want and b[1] > b[0] and b[3] > b[2]]


def find_zeros(scalar_fn: Callable[[complex], complex], region: Optional[str], search_box,
               params: ModelParams = DEFAULT_PARAMS, which: str = "", min_size: float = 1e-6,
               boundary_tol: float = 1e-8, split_axes: bool = True) -> list:
    """Zeros of ``scalar_fn`` in ``search_box`` that belong to ``region``.

    Parameters
    ----------
    scalar_fn : callable
        Analytic on every searched rectangle.
    region : str or None
        Keep only zeros in this region (``None`` keeps all).  Zeros within
        ``boundary_tol`` of a region boundary are kept and flagged.
    search_box : tuple
        ``(re_min, re_max, im_min, im_max)``.
    split_axes : bool
        Search the quadrants separately; the axes carry region boundaries.
        Quadrants that cannot meet ``region`` are skipped.

    Raises
    ------
    UnresolvedZeroError
        The winding counts and the refined zeros disagree, or a zero sits on
        a rectangle edge.
    """
    if split_axes:
        boxes = _region_boxes(search_box, region, params)
    else:
        boxes = [tuple(map(float, search_box))]
    found = []
    total = 0
    for b in boxes:
        n, w, ratio = winding_number(scalar_fn, b)
        if ratio < 1e-12 or abs(w - n) > 0.05:
            raise UnresolvedZeroError(f"zero on or near the boundary of the search rectangle {b} "
                                      f"(winding {w:.3f}, min|f|/max|f| = {ratio:.2e})")
        total += n
        _search(scalar_fn, b, n, min_size, 0, found)
    if sum(m for _, m, _ in found) != total:
        raise UnresolvedZeroError(f"argument principle counts {total} zeros, refinement found "
                                  f"{sum(m for _, m, _ in found)}")
    out = []
    for z, m, r in found:
        rid = classify_region(z, params, boundary_tol)
        violation = None
        if m > 1:
            violation = "multiple"
        if rid.tag == BOUNDARY:
            violation = "boundary"
        elif region is not None and rid.tag != region:
            continue
        out.append(ZeroLocus(complex(z), which or (SCALAR_NAMES.get(region, "") if region else ""),
                             rid, int(m), float(r), violation))
    out.sort(key=lambda zl: (zl.lambda_j.real, zl.lambda_j.imag))
    return out


# --------------------------------------------------------------------------
# residues

@dataclass
class ResidueRecord:
    locus: ZeroLocus
    column: int                     # affected column of M (1-based)
    coefficients: dict              # source column (1-based) -> complex coefficient
    theta_index: tuple              # (i, j) of the exponential factor
    theta_value: complex            # theta at the reference (x, t)

    @property
    def coefficient(self) -> complex:
        """The coefficient of the first source column."""
        return self.coefficients[min(self.coefficients)]

    def to_dict(self) -> dict:
        c = lambda z: [float(z.real), float(z.imag)]  # noqa: E731
        return {"locus": self.locus.to_dict(), "column": self.column,
                "coefficients": {str(k): c(v) for k, v in self.coefficients.items()},
                "theta": list(self.theta_index), "theta_value": c(self.theta_value)}


def residue_coefficients(spectral: Callable[[complex], tuple], locus: ZeroLocus, x: float = 0.0,
                         t: float = 0.0, params: ModelParams = DEFAULT_PARAMS, h: Optional[float] = None,
                         singular_tol: float = SINGULAR_TOL) -> list:
    """Residue coefficients at a simple zero.

    Parameters
    ----------
    spectral : callable
        ``lam -> (s, S)``, analytic near ``locus.lambda_j``.
    h : float, optional
        Difference step for the derivative of the vanishing scalar; defaults
        to ``1e-4 (1 + |lam_j|)``.

    Returns
    -------
    list of ResidueRecord
        Columns 2 and 3 (sourced by column 1) in D1/D2, column 1 (sourced by
        columns 2 and 3) in D3/D4.

    Raises
    ------
    DegenerateZeroError
        The secondary denominator vanishes too, or the zero is not simple.
    """
    region = locus.region.tag
    if region not in REGIONS:
        raise DegenerateZeroError(f"zero at {locus.lambda_j:.6g} lies on a region boundary")
    if locus.multiplicity_estimate != 1:
        raise DegenerateZeroError(f"zero at {locus.lambda_j:.6g} has multiplicity {locus.multiplicity_estimate}")
    lj = complex(locus.lambda_j)
    h = 1e-4 * (1 + abs(lj)) if h is None else h
    f = lambda z: scalar_value(region, *spectral(z))  # noqa: E731
    fdot = complex_derivative(f, lj, h)
    s, S = (np.asarray(a, dtype=complex) for a in spectral(lj))
    m = unsigned_minors(s)
    M = unsigned_minors(S)
    sp = make_spectral_point(lj, params)

    def need(name, val):
        if not abs(val) > singular_tol:
            raise DegenerateZeroError(f"{name} = {val:.3e} vanishes at the zero {lj:.6g}")
        return val

    need("derivative of " + SCALAR_NAMES[region], fdot)
    if region in ("D1", "D2"):
        den = fdot * need("s_21", s[1, 0])
        if region == "D1":
            c2 = (m[2, 2] * M[0, 0] - m[0, 2] * M[2, 0]) / den
            c3 = (m[2, 1] * M[0, 0] - m[0, 1] * M[2, 0]) / den
        else:
            c2 = m[2, 2] / den
            c3 = m[2, 1] / den
        th = theta(1, 3, x, t, sp)
        return [ResidueRecord(locus, 2, {1: complex(c2)}, (1, 3), th),
                ResidueRecord(locus, 3, {1: complex(c3)}, (1, 3), th)]
    th = theta(3, 1, x, t, sp)
    if region == "D3":
        den = fdot * need("m_21(s)", m[1, 0])
        c2, c3 = s[2, 2] / den, -s[2, 1] / den
    else:
        den = fdot * need("m_11(s)", m[0, 0])
        c2 = (s[2, 2] * S[1, 0] - s[1, 2] * S[2, 0]) / den
        c3 = (s[1, 1] * S[2, 0] - s[2, 1] * S[1, 0]) / den
    return [ResidueRecord(locus, 1, {2: complex(c2), 3: complex(c3)}, (3, 1), th)]


def predicted_residue(record: ResidueRecord, M_at_zero: np.ndarray) -> np.ndarray:
    """``sum_c coefficient_c e^{theta} [M(lam_j)]_c``."""
    e = np.exp(record.theta_value)
    return sum(coef * e * M_at_zero[:, c - 1] for c, coef in record.coefficients.items())


def contour_residue(M_eval: Callable[[complex], np.ndarray], center: complex, radius: float, column: int,
                    nodes: int = 64) -> np.ndarray:
    """``(1/2 pi i) oint [M]_column dlam`` on a circle by the trapezoid rule."""
    phi = 2 * math.pi * np.arange(nodes) / nodes
    acc = np.zeros(3, dtype=complex)
    for p in phi:
        w = radius * np.exp(1j * p)
        acc += M_eval(center + w)[:, column - 1] * w
    return acc / nodes


def verify_residue_contour(M_eval: Callable[[complex], np.ndarray], record: ResidueRecord, radius: float,
                           nodes: int = 64, params: ModelParams = DEFAULT_PARAMS) -> float:
    """Relative difference between the contour residue and the formula.

    ``M_eval`` must return finite values in the source columns at the zero
    itself (those columns are analytic there).

    Raises
    ------
    RegionError
        The circle leaves the region of the zero.
    """
    lj = complex(record.locus.lambda_j)
    ring = lj + radius * np.exp(2j * math.pi * np.arange(nodes) / nodes)
    tag = record.locus.region.tag
    if np.any(classify_array(ring, params) != int(tag[1])):
        raise RegionError(f"circle of radius {radius:g} around {lj:.6g} leaves {tag}")
    got = contour_residue(M_eval, lj, radius, record.column, nodes)
    with np.errstate(all="ignore"):
        M0 = np.asarray(M_eval(lj), dtype=complex)
    want = predicted_residue(record, M0)
    return float(np.linalg.norm(got - want) / max(np.linalg.norm(want), 1e-300))


# --------------------------------------------------------------------------
# manufactured spectral data

def _unimodular_with_corner(f: complex, a: complex, b: complex, c: complex, d: complex) -> np.ndarray:
    """A determinant-one matrix whose (1,1) entry is ``f`` and ``(2,1)`` entry is ``a f - 1``."""
    P = np.array([[1, 0, 0], [a, 1, 0], [b, 0, 1]], dtype=complex)
    Q = np.array([[f, 1, c], [-1, 0, 0], [d, 0, 1]], dtype=complex)
    return P @ Q


@dataclass
class ManufacturedCase:
    """Entire spectral data with one planted simple zero of the scalar of ``region``."""

    region: str
    lam0: complex
    coeffs: tuple = (0.3 + 0.1j, -0.2 + 0.4j, 0.5 - 0.2j, 0.1 + 0.3j)
    V: np.ndarray = field(default_factory=lambda: np.array([[1, 0.2, -0.1j], [0, 1, 0.3],
                                                            [0.1, 0.05j, 1 + 0.03]], dtype=complex))

    def __post_init__(self):
        V = np.asarray(self.V, dtype=complex)
        self.V = V / np.linalg.det(V) ** (1 / 3)

    def W(self, lam) -> np.ndarray:
        a, b, c, d = self.coeffs
        f = (lam - self.lam0) * (1 + 0.2 * lam)
        return _unimodular_with_corner(f, a + 0.1 * lam, b, c - 0.05 * lam, d)

    def spectral(self, lam) -> tuple:
        """``(s, S)`` at ``lam``; ``scalar_value(region, s, S)`` vanishes only at ``lam0`` nearby."""
        lam = complex(lam)
        W = self.W(lam)
        if self.region == "D1":    # (S^-1 s)_11 = W_11
            S = self.V @ _poly_unipotent(lam)
            return S @ W, S
        if self.region == "D2":    # s_11 = W_11
            return W, self.V @ _poly_unipotent(lam)
        if self.region == "D3":    # (s^-1)_11 = W_11
            return cofactor_matrix(W).T, self.V @ _poly_unipotent(lam)
        s = self.V @ _poly_unipotent(lam)   # (s^-1 S)_11 = W_11
        return s, s @ W

    def mu2(self, lam) -> np.ndarray:
        """An entire stand-in for ``mu_2(x, t, lam)``."""
        lam = complex(lam)
        return np.array([[1 + 0.1 * lam, 0.2, 0.05 * lam],
                         [0.3j, 1 - 0.1j * lam, 0.1],
                         [0.1 * lam ** 2, 0.2j, 1.0 + 0.02 * lam]], dtype=complex)

    def M(self, lam, x: float = 0.0, t: float = 0.0, params: ModelParams = DEFAULT_PARAMS) -> np.ndarray:
        from .rh_assembly import assemble_Sn

        s, S = self.spectral(lam)
        k = k_of(complex(lam), params)
        # at the planted zero the pole columns become non-finite; the others stay exact
        with np.errstate(all="ignore"):
            Sn = assemble_Sn(s, S, self.region, singular_tol=-1.0)
            return self.mu2(lam) @ conjugation_action(-1j * k * x + 2j * k * k * t, Sn)


def _poly_unipotent(lam) -> np.ndarray:
    return np.array([[1, 0.1 * lam, 0], [0, 1, 0], [0.2 - 0.1j * lam, 0.05, 1]], dtype=complex)


# --------------------------------------------------------------------------
# global relation

@dataclass
class GlobalRelationReport:
    lambdas: list
    residuals: np.ndarray      # (n, 3); NaN where the column is outside its domain
    mask: np.ndarray           # (n, 3) bool
    quad_error: float = 0.0

    @property
    def max_residual(self) -> float:
        r = self.residuals[self.mask]
        return float(r.max()) if r.size else 0.0

    @property
    def median_residual(self) -> float:
        r = self.residuals[self.mask]
        return float(np.median(r)) if r.size else 0.0

    def to_dict(self) -> dict:
        return {"lambdas": [[float(z.real), float(z.imag)] for z in self.lambdas],
                "residuals": [[None if not m else float(r) for r, m in zip(row, mrow)]
                              for row, mrow in zip(self.residuals, self.mask)],
                "max_residual": self.max_residual, "median_residual": self.median_residual,
                "quad_error": self.quad_error}


# column validity domains of the relation, as region codes
COLUMN_DOMAINS = ((1, 2), (3, 4), (3, 4))


def column_mask(lam: complex, params: ModelParams = DEFAULT_PARAMS) -> np.ndarray:
    """Columns of the relation valid at ``lam``; boundary points belong to every closure."""
    code = int(classify_array(np.array([lam]), params)[0])
    if code == 0:
        return np.ones(3, dtype=bool)
    return np.array([code in dom for dom in COLUMN_DOMAINS])


def default_global_samples(params: ModelParams = DEFAULT_PARAMS) -> list:
    """Moderate-``|lam|`` samples in all four regions and on the real axis."""
    from .rh_assembly import BISECTORS

    lams = [complex(r) for r in (0.25, 0.5, 0.8)]
    for tag in REGIONS:
        inside = [complex(z) for z in np.array((0.3, 0.6, 0.9, 1.2, 1.5, 1.8)) * np.exp(1j * BISECTORS[tag])
                  if classify_region(z, params).tag == tag]
        lams.extend(inside[:3])
    return lams


def global_relation_residual(fd: FieldData, lams: Optional[Sequence[complex]] = None,
                             opts: ds.QuadOptions = ds.DEFAULT_QUAD) -> GlobalRelationReport:
    """``|| (S^-1 s)_col - (e^{-2 i k^2 T Lambda-hat} c)_col || / max(1, ||rhs||)`` per column.

    ``S^-1 = (S^A)^T`` needs every column of ``S^A``; the growth guard is
    relaxed for it, so samples should have moderate ``|lam|``.
    """
    params = fd.params
    lams = default_global_samples(params) if lams is None else [complex(z) for z in lams]
    over = ds.QuadOptions(**{**opts.__dict__, "override_guard": True})
    res = np.full((len(lams), 3), np.nan)
    mask = np.zeros((len(lams), 3), dtype=bool)
    qerr = 0.0
    for i, lam in enumerate(lams):
        cols = [c for c in range(3) if column_mask(lam, params)[c]]
        mask[i, cols] = True
        SA = ds.compute_S(fd, lam, opts=over, adjugate=True)
        s = ds.compute_s(fd, lam, columns=cols, opts=opts)
        c = ds.compute_c(fd, lam, columns=cols, opts=opts)
        qerr = max(qerr, SA.error, s.error, c.error)
        k = k_of(lam, params)
        rhs = conjugation_action(-2j * k * k * fd.T, np.nan_to_num(c.mu))
        lhs = SA.mu.T @ np.nan_to_num(s.mu)
        for col in cols:
            d = np.linalg.norm(lhs[:, col] - rhs[:, col])
            res[i, col] = d / max(1.0, float(np.linalg.norm(rhs[:, col])))
    return GlobalRelationReport(lams, res, mask, qerr)
