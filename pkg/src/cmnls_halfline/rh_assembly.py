"""Regions of the lambda-plane, the matrices S_n, jumps and the sectionally analytic M.

With ``phi = -i k x + 2 i k^2 t`` the solution of the Riemann-Hilbert problem
in region ``D_n`` is

    M_n(x, t, lam) = mu_2(x, t, lam) e^{phi Lambda-hat} S_n(lam)

and across a common boundary ``M_n = M_m J_{m,n}`` with
``J_{m,n} = e^{phi Lambda-hat}(S_m^{-1} S_n)``.

As ``lam -> inf`` the matrix ``M`` tends to a gauge ``M0 = diag(a, B)``
rather than the identity (the Lax pair is of derivative type).  The potential
is recovered as

    (u, v) = -(2i/gamma) lim lam (M12, M13) B^{-1},

with ``B`` the limit of the lower 2x2 block of ``M`` itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import direct_scattering as ds
from . import kernels
from .errors import RegionError, SingularDenominatorError
from .fields import FieldData, x_line
from .lax_core import DEFAULT_PARAMS, ModelParams, cofactor_matrix, conjugation_action, det3, k_of

REGIONS = ("D1", "D2", "D3", "D4")
BOUNDARY = "Boundary"
BOUNDARY_TOL = 1e-9
SINGULAR_TOL = 1e-10
DEFAULT_RADII = (4.0, 8.0, 16.0, 32.0)
_SIGNS = np.array([[1, -1, 1], [-1, 1, -1], [1, -1, 1]], dtype=float)

# asymptotic sector bisectors for delta = 0; see region_bisector for general params
BISECTORS = {"D1": math.pi / 8, "D2": 3 * math.pi / 8, "D3": 5 * math.pi / 8, "D4": 7 * math.pi / 8}

# contour assignment of the entries of M_n: 1, 2, 3 stand for gamma_1, gamma_2, gamma_3
GAMMA_TABLE = {
    "D1": ((3, 1, 1), (3, 3, 3), (3, 3, 3)),
    "D2": ((3, 2, 2), (3, 3, 3), (3, 3, 3)),
    "D3": ((3, 3, 3), (2, 3, 3), (2, 3, 3)),
    "D4": ((3, 3, 3), (1, 3, 3), (1, 3, 3)),
}


# --------------------------------------------------------------------------
# regions

@dataclass(frozen=True)
class RegionId:
    tag: str
    margin: float

    @property
    def index(self) -> int:
        """1..4 for ``D1..D4``, 0 on the boundary."""
        return 0 if self.tag == BOUNDARY else int(self.tag[1])


def _tag_of(imk: float, imk2: float) -> str:
    if imk > 0:
        return "D1" if imk2 > 0 else "D2"
    return "D3" if imk2 > 0 else "D4"


def classify_region(lam: complex, params: ModelParams = DEFAULT_PARAMS,
                    boundary_tol: float = BOUNDARY_TOL) -> RegionId:
    """Region of ``lam`` from the signs of ``Im k`` and ``Im k^2``."""
    k = k_of(complex(lam), params)
    imk, imk2 = k.imag, (k * k).imag
    margin = min(abs(imk), abs(imk2))
    if margin <= boundary_tol:
        return RegionId(BOUNDARY, margin)
    return RegionId(_tag_of(imk, imk2), margin)


def classify_array(lams, params: ModelParams = DEFAULT_PARAMS, boundary_tol: float = BOUNDARY_TOL) -> np.ndarray:
    """Vectorised :func:`classify_region`: codes 1..4, 0 on the boundary band."""
    k = k_of(np.asarray(lams, dtype=complex), params)
    imk, imk2 = k.imag, (k * k).imag
    code = np.where(imk > 0, np.where(imk2 > 0, 1, 2), np.where(imk2 > 0, 3, 4)).astype(np.int8)
    code[np.minimum(np.abs(imk), np.abs(imk2)) <= boundary_tol] = 0
    return code


@dataclass
class RegionMap:
    re: np.ndarray           # pixel-centre abscissae
    im: np.ndarray           # pixel-centre ordinates
    codes: np.ndarray        # (len(im), len(re)) int8, 0 = boundary
    polylines: dict = field(default_factory=dict)  # 'im_k' / 'im_k2' -> list of (n, 2) [re, im] arrays

    def counts(self) -> dict:
        return {t: int(np.count_nonzero(self.codes == i)) for i, t in enumerate((BOUNDARY,) + REGIONS)}


def region_map_grid(box=(-3.0, 3.0, -3.0, 3.0), resolution: int = 600,
                    params: ModelParams = DEFAULT_PARAMS, boundary_tol: float = BOUNDARY_TOL) -> RegionMap:
    """Classification raster of ``box = (re_min, re_max, im_min, im_max)`` and boundary polylines.

    The polylines are the zero level sets of ``Im k`` and ``Im k^2`` traced by
    marching squares on the same raster.
    """
    from skimage.measure import find_contours

    x0, x1, y0, y1 = map(float, box)
    if not (x1 > x0 and y1 > y0):
        raise ValueError(f"degenerate box {box}")
    n = int(resolution)
    hx, hy = (x1 - x0) / n, (y1 - y0) / n
    re = x0 + (np.arange(n) + 0.5) * hx
    im = y0 + (np.arange(n) + 0.5) * hy
    lam = re[None, :] + 1j * im[:, None]
    codes = classify_array(lam, params, boundary_tol)
    k = k_of(lam, params)
    lines = {}
    for name, fld in (("im_k", k.imag), ("im_k2", (k * k).imag)):
        segs = []
        for c in find_contours(fld, 0.0):
            # (row, col) fractional indices -> lambda coordinates
            segs.append(np.column_stack([x0 + (c[:, 1] + 0.5) * hx, y0 + (c[:, 0] + 0.5) * hy]))
        lines[name] = segs
    return RegionMap(re, im, codes, lines)


def region_bisector(tag: str, params: ModelParams = DEFAULT_PARAMS, radius: float = 1e3,
                    samples: int = 7200) -> float:
    """Mid-angle of the sector of ``tag`` in the upper half plane at a large radius."""
    if tag not in REGIONS:
        raise RegionError(f"unknown region {tag!r}")
    ang = (np.arange(samples) + 0.5) * math.pi / samples
    codes = classify_array(radius * np.exp(1j * ang), params)
    sel = ang[codes == int(tag[1])]
    if sel.size == 0:
        raise RegionError(f"{tag} has no sector at radius {radius}")
    return float(0.5 * (sel.min() + sel.max()))


def gamma_table_from_rule(tag: str, params: ModelParams = DEFAULT_PARAMS) -> tuple:
    """Rebuild the contour assignment of ``tag`` from the ordering of ``Re l`` and ``Re z``.

    ``gamma_1`` if ``Re l_i < Re l_j`` and ``Re z_i >= Re z_j``, ``gamma_2`` if
    both are smaller, ``gamma_3`` if ``Re l_i >= Re l_j``.
    """
    lam = 2.0 * np.exp(1j * BISECTORS[tag])
    if classify_region(lam, params).tag != tag:
        lam = 50.0 * np.exp(1j * region_bisector(tag, params))
    k = k_of(lam, params)
    lr = np.real(1j * k * np.array([1, -1, -1]))
    zr = np.real(-2j * k * k * np.array([1, -1, -1]))
    rows = []
    for i in range(3):
        row = []
        for j in range(3):
            if lr[i] >= lr[j] - 1e-14:
                row.append(3)
            elif zr[i] >= zr[j]:
                row.append(1)
            else:
                row.append(2)
        rows.append(tuple(row))
    return tuple(rows)


# --------------------------------------------------------------------------
# S_n and jumps

def _check_den(name: str, value: complex, tol: float) -> complex:
    if not abs(value) > tol:
        raise SingularDenominatorError(f"{name} = {value:.3e} vanishes (|.| <= {tol:g})", name=name, value=value)
    return value


def _tag(n) -> str:
    if isinstance(n, RegionId):
        n = n.tag
    if isinstance(n, (int, np.integer)):
        n = f"D{int(n)}"
    if n not in REGIONS:
        raise RegionError(f"S_n needs a region D1..D4, got {n!r}")
    return n


def assemble_Sn(s: np.ndarray, S: np.ndarray, n, sA: Optional[np.ndarray] = None,
                SA: Optional[np.ndarray] = None, singular_tol: float = SINGULAR_TOL) -> np.ndarray:
    """``S_n`` from the spectral functions ``s`` and ``S``.

    ``sA``, ``SA`` are the cofactor matrices; they are computed from ``s``, ``S``
    when not supplied.  Unsigned minors are read off them as
    ``M_ij = (-1)^(i+j) (B^A)_ij``.

    Raises
    ------
    SingularDenominatorError
        The scalar dividing ``S_n`` is below ``singular_tol`` in modulus.
    """
    tag = _tag(n)
    s = np.asarray(s, dtype=complex)
    S = np.asarray(S, dtype=complex)
    sA = cofactor_matrix(s) if sA is None else np.asarray(sA, dtype=complex)
    SA = cofactor_matrix(S) if SA is None else np.asarray(SA, dtype=complex)
    out = np.zeros((3, 3), dtype=complex)
    # unsigned minors m_ij(s), M_ij(S)
    m = sA * _SIGNS
    M = SA * _SIGNS
    if tag == "D1":
        f = _check_den("(s^T S^A)_11", s[:, 0] @ SA[:, 0], singular_tol)
        M11, M21, M31 = M[0, 0], M[1, 0], M[2, 0]
        out[:, 0] = s[:, 0]
        out[0, 1:] = [m[2, 2] * M21 - m[1, 2] * M31, m[2, 1] * M21 - m[1, 1] * M31]
        out[1, 1:] = [m[2, 2] * M11 - m[0, 2] * M31, m[2, 1] * M11 - m[0, 1] * M31]
        out[2, 1:] = [m[1, 2] * M11 - m[0, 2] * M21, m[1, 1] * M11 - m[0, 1] * M21]
        out[:, 1:] /= f
    elif tag == "D2":
        s11 = _check_den("s_11", s[0, 0], singular_tol)
        out[:, 0] = s[:, 0]
        out[1, 1:] = [m[2, 2] / s11, m[2, 1] / s11]
        out[2, 1:] = [m[1, 2] / s11, m[1, 1] / s11]
    elif tag == "D3":
        m11 = _check_den("m_11(s)", sA[0, 0], singular_tol)
        out[:, 0] = [1.0 / m11, 0.0, 0.0]
        out[:, 1] = s[:, 1]
        out[:, 2] = s[:, 2]
    else:
        f = _check_den("(S^T s^A)_11", S[:, 0] @ sA[:, 0], singular_tol)
        out[:, 0] = S[:, 0] / f
        out[:, 1:] = s[:, 1:]
    return out


def _phase(lam: complex, x: float, t: float, params: ModelParams) -> complex:
    k = k_of(complex(lam), params)
    return -1j * k * x + 2j * k * k * t


@dataclass
class JumpRecord:
    m: str
    n: str
    lam: complex
    x: float
    t: float
    J: np.ndarray

    def to_dict(self) -> dict:
        return {"m": self.m, "n": self.n, "lambda": [self.lam.real, self.lam.imag], "x": self.x, "t": self.t,
                "J": [[[float(z.real), float(z.imag)] for z in row] for row in self.J],
                "det_minus_1": abs(det3(self.J) - 1)}


# pairs meeting along {Im k = 0} and along {Re k = 0}
_ACROSS_IMK = ({"D1", "D4"}, {"D2", "D3"})
_ACROSS_REK = ({"D1", "D2"}, {"D3", "D4"})


def on_shared_boundary(m: str, n: str, lam: complex, params: ModelParams = DEFAULT_PARAMS,
                       boundary_tol: float = BOUNDARY_TOL) -> bool:
    """Whether ``lam`` lies (within tolerance) on the common boundary of ``D_m`` and ``D_n``."""
    k = k_of(complex(lam), params)
    tol = boundary_tol * (1.0 + abs(k) ** 2)
    if m == n or abs(k) <= tol:
        return True  # the triple point k = 0 touches all four regions
    pair = {m, n}
    if pair in _ACROSS_IMK:
        return abs(k.imag) <= tol
    if pair in _ACROSS_REK:
        return abs(k.real) <= tol or abs((k * k).imag) <= tol
    return False


def jump_matrix(m, n, s, S, x: float, t: float, lam: complex, params: ModelParams = DEFAULT_PARAMS,
                sA=None, SA=None, boundary_tol: float = BOUNDARY_TOL, check_boundary: bool = True,
                singular_tol: float = SINGULAR_TOL) -> JumpRecord:
    """``J_{m,n} = e^{phi Lambda-hat}(S_m^{-1} S_n)`` at ``lam`` on the common boundary.

    Raises
    ------
    RegionError
        ``lam`` is not on the common boundary of the two regions.
    """
    m, n = _tag(m), _tag(n)
    lam = complex(lam)
    if check_boundary and not on_shared_boundary(m, n, lam, params, boundary_tol):
        raise RegionError(f"lambda = {lam:.6g} is not on the common boundary of {m} and {n}")
    Sm = assemble_Sn(s, S, m, sA, SA, singular_tol)
    Sn = assemble_Sn(s, S, n, sA, SA, singular_tol)
    G = cofactor_matrix(Sm).T / det3(Sm) @ Sn
    J = conjugation_action(_phase(lam, x, t, params), G)
    return JumpRecord(m, n, lam, float(x), float(t), J)


# --------------------------------------------------------------------------
# M

def _resolve_region(lam, region, params) -> str:
    if region is None:
        rid = classify_region(lam, params)
        if rid.tag == BOUNDARY:
            raise RegionError(f"lambda = {complex(lam):.6g} is on a region boundary; pass region= to choose a side")
        return rid.tag
    return _tag(region)


def _m_direct(fd, x, t, lam, tag, opts, params):
    o = ds.QuadOptions(**{**opts.__dict__, "override_guard": True})
    sp = ds.spectral_sample(fd, lam, with_adjugates=True, opts=o)
    Sn = assemble_Sn(sp.s, sp.S, tag, sp.sA, sp.SA)
    mu2 = ds.integrate_eigenfunction(fd, 2, x, t, lam, params=params, opts=o).mu
    return mu2 @ conjugation_action(_phase(lam, x, t, params), Sn)


def _m_columns(fd, x, t, lam, tag, opts, params):
    """Column-wise M_2 / M_3 using only bounded eigenfunction columns."""
    M = np.empty((3, 3), dtype=complex)
    if tag == "D2":
        s1 = ds.compute_s(fd, lam, columns=[0], opts=opts).mu
        sA = ds.compute_s(fd, lam, columns=[1, 2], opts=opts, adjugate=True).mu
        s11 = _check_den("s_11", s1[0, 0], SINGULAR_TOL)
        m33, m23, m32, m22 = sA[2, 2], -sA[1, 2], -sA[2, 1], sA[1, 1]
        mu2 = ds.integrate_eigenfunction(fd, 2, x, t, lam, columns=[1, 2], params=params, opts=opts).mu
        mu3 = ds.integrate_eigenfunction(fd, 3, x, t, lam, columns=[0], params=params, opts=opts).mu
        M[:, 0] = mu3[:, 0]
        M[:, 1] = (mu2[:, 1] * m33 + mu2[:, 2] * m23) / s11
        M[:, 2] = (mu2[:, 1] * m32 + mu2[:, 2] * m22) / s11
    elif tag == "D3":
        sA = ds.compute_s(fd, lam, columns=[0], opts=opts, adjugate=True).mu
        m11 = _check_den("m_11(s)", sA[0, 0], SINGULAR_TOL)
        mu2 = ds.integrate_eigenfunction(fd, 2, x, t, lam, columns=[0], params=params, opts=opts).mu
        mu3 = ds.integrate_eigenfunction(fd, 3, x, t, lam, columns=[1, 2], params=params, opts=opts).mu
        M[:, 0] = mu2[:, 0] / m11
        M[:, 1:] = mu3[:, 1:]
    else:
        raise RegionError(f"column-wise assembly is available in D2 and D3 only, not {tag}")
    return M


def assemble_M(fd: FieldData, x: float, t: float, lam: complex, region=None,
               opts: ds.QuadOptions = ds.DEFAULT_QUAD, method: str = "auto",
               params: Optional[ModelParams] = None) -> np.ndarray:
    """Sectionally analytic ``M(x, t, lam)``.

    Parameters
    ----------
    region : str, optional
        Region whose formula is used; defaults to the classification of
        ``lam``.  Required on a boundary (each side extends continuously).
    method : {'auto', 'direct', 'columns'}
        ``'direct'`` multiplies out ``mu_2 e^{phi Lambda-hat} S_n`` with every
        column integrated (moderate ``|lam|`` only, the growth guard is
        overridden).  ``'columns'`` builds each column of ``M_2``/``M_3`` from
        bounded eigenfunction columns and the minors of ``s`` from the adjugate
        equation, which stays accurate at large ``|lam|``.  ``'auto'`` picks
        ``'columns'`` in D2/D3 and ``'direct'`` in D1/D4.
    """
    params = params or fd.params
    lam = complex(lam)
    tag = _resolve_region(lam, region, params)
    if method == "auto":
        method = "columns" if tag in ("D2", "D3") else "direct"
    if method == "direct":
        return _m_direct(fd, x, t, lam, tag, opts, params)
    if method == "columns":
        return _m_columns(fd, x, t, lam, tag, opts, params)
    raise ValueError(f"unknown method {method!r}")


# --------------------------------------------------------------------------
# large-lambda behaviour

def neville(nodes: Sequence[complex], values: Sequence) -> np.ndarray:
    """Value at 0 of the polynomial interpolating ``values`` at ``nodes``."""
    P = [np.asarray(v, dtype=complex) for v in values]
    w = [complex(z) for z in nodes]
    n = len(w)
    for m in range(1, n):
        for i in range(n - m):
            P[i] = (w[i + m] * P[i] - w[i] * P[i + 1]) / (w[i + m] - w[i])
    return P[0]


def ray_points(angle: float, radii: Sequence[float]) -> np.ndarray:
    return np.asarray(radii, dtype=float) * np.exp(1j * angle)


def _ray_region(angle, radii, params) -> str:
    tags = {classify_region(z, params).tag for z in ray_points(angle, radii)}
    if len(tags) != 1 or BOUNDARY in tags:
        raise RegionError(f"ray at angle {angle:.6g} crosses a region boundary: {sorted(tags)}")
    return tags.pop()


@dataclass
class Reconstruction:
    u: complex
    v: complex
    error: float                  # last-increment extrapolation estimate
    region: str
    angle: float
    radii: tuple
    literal: tuple = (0j, 0j)     # 2i lim lam (M12, M13) without gauge correction
    gauge: Optional[np.ndarray] = None  # limit of the lower 2x2 block

    def to_dict(self) -> dict:
        c = lambda z: [float(z.real), float(z.imag)]  # noqa: E731
        return {"u": c(self.u), "v": c(self.v), "error": self.error, "region": self.region,
                "angle": self.angle, "radii": list(self.radii),
                "literal": [c(self.literal[0]), c(self.literal[1])]}


def reconstruct_uv(fd: FieldData, x: float, t: float, ray_angle: Optional[float] = None,
                   radii: Sequence[float] = DEFAULT_RADII, gauge_correct: bool = True,
                   opts: ds.QuadOptions = ds.DEFAULT_QUAD, region: str = "D2") -> Reconstruction:
    """Recover ``u(x, t), v(x, t)`` from the large-``lam`` behaviour of ``M``.

    ``lam M12``, ``lam M13`` and the lower block of ``M`` are even series in
    ``1/lam``, so the samples along the ray are extrapolated to
    ``1/lam^2 = 0`` by Neville's scheme.

    Parameters
    ----------
    ray_angle : float, optional
        Defaults to the bisector of ``region`` (D2 or D3).
    gauge_correct : bool
        Undo the gauge ``B`` of the lower block.  With ``False`` the literal
        ``2i lim lam (M12, M13)`` is returned as ``(u, v)``.

    Raises
    ------
    RegionError
        The ray does not stay inside one region.
    """
    params = fd.params
    radii = tuple(float(r) for r in radii)
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be increasing")
    if ray_angle is None:
        ray_angle = region_bisector(region, params)
    tag = _ray_region(ray_angle, radii, params)
    lams = ray_points(ray_angle, radii)
    rows, blocks = [], []
    for lam in lams:
        M = assemble_M(fd, x, t, lam, region=tag, opts=opts, params=params)
        rows.append(lam * M[0, 1:])
        blocks.append(M[1:, 1:])
    w = 1.0 / lams ** 2
    row = neville(w, rows)
    B = neville(w, blocks)
    lit = 2j * row
    err_row = float(np.max(np.abs(row - neville(w[1:], rows[1:])))) if len(w) > 1 else float("nan")
    if gauge_correct:
        uv = -(2j / params.gamma) * row @ np.linalg.inv(B)
        err = err_row * 2.0 / abs(params.gamma) * float(np.linalg.norm(np.linalg.inv(B), 2))
    else:
        uv = lit
        err = 2.0 * err_row
    return Reconstruction(complex(uv[0]), complex(uv[1]), err, tag, float(ray_angle), radii,
                          (complex(lit[0]), complex(lit[1])), B)


@dataclass
class AsymptoticFit:
    C0: np.ndarray
    C1: np.ndarray
    coefficients: np.ndarray  # (order + 1, 3, 3)
    residual: float


def asymptotic_fit(lams, Ms, order: int = 3) -> AsymptoticFit:
    """Least-squares fit ``M ~ sum_p C_p lam^-p`` for ``p <= order``.

    ``order`` is reduced when there are too few samples; at least three are
    required.
    """
    lams = np.asarray(lams, dtype=complex)
    Ms = np.asarray(Ms, dtype=complex)
    if lams.size < 3:
        raise ValueError("asymptotic_fit needs at least three samples")
    p = min(int(order), lams.size - 2) if lams.size > 2 else 1
    p = max(p, 1)
    A = lams[:, None] ** (-np.arange(p + 1)[None, :])
    Y = Ms.reshape(lams.size, 9)
    coef, *_ = np.linalg.lstsq(A, Y, rcond=None)
    resid = float(np.max(np.abs(A @ coef - Y)))
    coef = coef.reshape(p + 1, 3, 3)
    return AsymptoticFit(coef[0], coef[1], coef, resid)


def sample_ray(fd: FieldData, x: float, t: float, angle: float, radii: Sequence[float],
               opts: ds.QuadOptions = ds.DEFAULT_QUAD):
    """``(lams, Ms)`` along a ray that stays inside one region."""
    tag = _ray_region(angle, radii, fd.params)
    lams = ray_points(angle, radii)
    return lams, np.array([assemble_M(fd, x, t, z, region=tag, opts=opts) for z in lams])


def asymptotic_gauge(fd: FieldData, x: float, t: float, steps_per_cell: int = 2) -> np.ndarray:
    """Predicted ``lim M = diag(a, B)`` at ``(x, t)``.

    Integrates ``M0_x = (i gamma / 2) U2 M0`` from ``M0(L) = I`` to ``x``,
    where ``U2`` carries ``-rho`` in the corner and ``(u, v)^* (u, v)`` in
    the lower block.
    """
    g = fd.params.gamma
    n = max(2, int(math.ceil(abs(fd.L - x) / fd.dx)) * steps_per_cell)
    if fd.L == x:
        return np.eye(3, dtype=complex)
    s = fd.L + (x - fd.L) * np.arange(2 * n + 1) / (2 * n)
    u, v, _, _ = x_line(fd, t, s)
    Q = np.zeros((s.size, 3, 3), dtype=complex)
    Q[:, 0, 0] = -(np.abs(u) ** 2 + np.abs(v) ** 2)
    Q[:, 1, 1] = np.abs(u) ** 2
    Q[:, 1, 2] = np.conj(u) * v
    Q[:, 2, 1] = u * np.conj(v)
    Q[:, 2, 2] = np.abs(v) ** 2
    Q *= 0.5j * g
    coef = kernels.etd_coefficients(np.zeros((3, 3), dtype=complex), (x - fd.L) / n)
    return kernels.etdrk4_leg(np.eye(3, dtype=complex), *coef, Q)
