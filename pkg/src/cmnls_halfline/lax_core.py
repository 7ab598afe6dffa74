"""3x3 Lax-pair algebra for the coupled modified NLS system.

The system is

    i u_t + u_xx + delta*rho*u + i*gamma*(rho*u)_x = 0,    rho = |u|^2 + |v|^2

(and the same with u <-> v).  Its Lax pair is ``psi_x = U psi``,
``psi_t = V psi`` with

    U = -i k Lambda + lam U1
    V = 2 i k^2 Lambda - (2/gamma) lam^3 U1 + i lam^2 U2 - lam U3
    k = (lam^2 + delta/2) / gamma,      Lambda = diag(-1, 1, 1).

All matrices are plain ``complex128`` arrays of shape ``(3, 3)``; stacked
variants have shape ``(n, 3, 3)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConjugationOverflowError, OutOfDomainError, ParameterError, StencilRangeError

LAMBDA_DIAG = np.array([-1.0, 1.0, 1.0])
LAMBDA = np.diag(LAMBDA_DIAG).astype(complex)

# log(max double) with a little headroom
_LOG_OVERFLOW = 700.0


@dataclass(frozen=True)
class ModelParams:
    """Cubic strength ``delta``, derivative strength ``gamma`` and symmetry sign ``epsilon``."""

    delta: float = 2.0
    gamma: float = 1.0
    epsilon: int = 1

    def __post_init__(self):
        if not np.isfinite(self.delta) or not np.isfinite(self.gamma):
            raise ParameterError("delta and gamma must be finite reals")
        if self.gamma == 0:
            raise ParameterError("gamma must be nonzero: the Lax pair divides by gamma")
        if self.epsilon not in (1, -1):
            raise ParameterError(f"epsilon must be +1 or -1, got {self.epsilon!r}")

    def to_dict(self) -> dict:
        return {"delta": float(self.delta), "gamma": float(self.gamma), "epsilon": int(self.epsilon)}

    @classmethod
    def from_dict(cls, d: dict) -> "ModelParams":
        return cls(delta=float(d.get("delta", 2.0)), gamma=float(d.get("gamma", 1.0)),
                   epsilon=int(d.get("epsilon", 1)))


DEFAULT_PARAMS = ModelParams()


@dataclass(frozen=True)
class SpectralPoint:
    lam: complex
    k: complex
    l: tuple  # diagonal of -i k Lambda
    z: tuple  # diagonal of 2 i k^2 Lambda


@dataclass(frozen=True)
class FieldPoint:
    u: complex = 0j
    v: complex = 0j
    ux: complex = 0j
    vx: complex = 0j


def k_of(lam, params: ModelParams = DEFAULT_PARAMS):
    """``k = (lam^2 + delta/2)/gamma``; works elementwise on arrays."""
    if params.gamma == 0:
        raise ParameterError("gamma must be nonzero")
    lam = np.asarray(lam, dtype=complex) if np.ndim(lam) else complex(lam)
    return (lam * lam + params.delta / 2.0) / params.gamma


def make_spectral_point(lam: complex, params: ModelParams = DEFAULT_PARAMS) -> SpectralPoint:
    if params.gamma == 0:
        raise ParameterError("gamma must be nonzero")
    lam = complex(lam)
    k = k_of(lam, params)
    l = tuple(complex(-1j * k * d) for d in LAMBDA_DIAG)
    z = tuple(complex(2j * k * k * d) for d in LAMBDA_DIAG)
    return SpectralPoint(lam=lam, k=k, l=l, z=z)


# --------------------------------------------------------------------------
# matrices of the Lax pair

def u1_matrix(fp: FieldPoint) -> np.ndarray:
    u, v = fp.u, fp.v
    return np.array([[0, u, v],
                     [np.conj(u), 0, 0],
                     [np.conj(v), 0, 0]], dtype=complex)


def u2_matrix(fp: FieldPoint) -> np.ndarray:
    u, v = fp.u, fp.v
    uu, vv = abs(u) ** 2, abs(v) ** 2
    return np.array([[-(uu + vv), 0, 0],
                     [0, uu, np.conj(u) * v],
                     [0, u * np.conj(v), vv]], dtype=complex)


def u3_matrix(fp: FieldPoint, params: ModelParams = DEFAULT_PARAMS) -> np.ndarray:
    d, g = params.delta, params.gamma
    u, v, ux, vx = fp.u, fp.v, fp.ux, fp.vx
    rho = abs(u) ** 2 + abs(v) ** 2
    a1 = d / g * u + g * u * rho - 1j * ux
    a2 = d / g * v + g * v * rho - 1j * vx
    a3 = np.conj(a1)
    a4 = np.conj(a2)
    return np.array([[0, a1, a2],
                     [a3, 0, 0],
                     [a4, 0, 0]], dtype=complex)


def eval_U(fp: FieldPoint, sp: SpectralPoint, params: ModelParams = DEFAULT_PARAMS) -> np.ndarray:
    """Full x-part ``U = -i k Lambda + lam U1``."""
    return -1j * sp.k * LAMBDA + sp.lam * u1_matrix(fp)


def eval_V(fp: FieldPoint, sp: SpectralPoint, params: ModelParams = DEFAULT_PARAMS) -> np.ndarray:
    """Full t-part ``V = 2 i k^2 Lambda + V2``."""
    lam = sp.lam
    v2 = (-2.0 / params.gamma * lam ** 3 * u1_matrix(fp)
          + 1j * lam ** 2 * u2_matrix(fp)
          - lam * u3_matrix(fp, params))
    return 2j * sp.k ** 2 * LAMBDA + v2


def v1_stack(lam: complex, u, v) -> np.ndarray:
    """``lam * U1`` for arrays of samples, shape ``(n, 3, 3)``."""
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    out = np.zeros(u.shape + (3, 3), dtype=complex)
    out[..., 0, 1] = lam * u
    out[..., 0, 2] = lam * v
    out[..., 1, 0] = lam * np.conj(u)
    out[..., 2, 0] = lam * np.conj(v)
    return out


def v2_stack(lam: complex, u, v, ux, vx, params: ModelParams = DEFAULT_PARAMS) -> np.ndarray:
    """``V2 = -(2/gamma) lam^3 U1 + i lam^2 U2 - lam U3`` for arrays of samples."""
    d, g = params.delta, params.gamma
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    ux = np.asarray(ux, dtype=complex)
    vx = np.asarray(vx, dtype=complex)
    uu = (u * np.conj(u)).real
    vv = (v * np.conj(v)).real
    rho = uu + vv
    a1 = d / g * u + g * u * rho - 1j * ux
    a2 = d / g * v + g * v * rho - 1j * vx
    c3 = -2.0 / g * lam ** 3
    c2 = 1j * lam ** 2
    out = np.zeros(u.shape + (3, 3), dtype=complex)
    out[..., 0, 0] = -c2 * rho
    out[..., 0, 1] = c3 * u - lam * a1
    out[..., 0, 2] = c3 * v - lam * a2
    out[..., 1, 0] = c3 * np.conj(u) - lam * np.conj(a1)
    out[..., 2, 0] = c3 * np.conj(v) - lam * np.conj(a2)
    out[..., 1, 1] = c2 * uu
    out[..., 1, 2] = c2 * np.conj(u) * v
    out[..., 2, 1] = c2 * u * np.conj(v)
    out[..., 2, 2] = c2 * vv
    return out


# --------------------------------------------------------------------------
# Lambda-hat conjugation and cofactors

def conjugation_action(theta: complex, B: np.ndarray) -> np.ndarray:
    """``exp(theta * Lambda_hat) B = exp(theta Lambda) B exp(-theta Lambda)``.

    Entries (1,2), (1,3) pick up ``exp(-2 theta)``, entries (2,1), (3,1)
    pick up ``exp(2 theta)``; the rest is unchanged.  Raises
    :class:`ConjugationOverflowError` instead of producing ``inf``.
    """
    B = np.asarray(B, dtype=complex)
    theta = complex(theta)
    out = B.copy()
    for sign, idx in ((-2.0, ((0, 1), (0, 2))), (2.0, ((1, 0), (2, 0)))):
        expo = sign * theta
        for i, j in idx:
            b = B[..., i, j]
            mag = np.abs(b)
            nz = (mag > 0) & np.isfinite(mag)  # non-finite input passes through
            if np.any(nz) and np.max(np.log(mag[nz]) if np.ndim(mag) else np.log(mag)) + expo.real > _LOG_OVERFLOW:
                raise ConjugationOverflowError(
                    f"exp({expo:.3g}) overflows entry ({i + 1},{j + 1})")
            if expo.real < -745.0:
                out[..., i, j] = 0.0
            else:
                # zero entries stay zero even when exp(expo) alone would overflow
                with np.errstate(over="ignore", invalid="ignore"):
                    out[..., i, j] = np.where(mag == 0, 0.0, b * np.exp(expo))
    return out


def minor(B: np.ndarray, i: int, j: int) -> complex:
    """(i, j) minor with zero-based indices (determinant after deleting row i and column j)."""
    r = [a for a in range(3) if a != i]
    c = [a for a in range(3) if a != j]
    return B[r[0], c[0]] * B[r[1], c[1]] - B[r[0], c[1]] * B[r[1], c[0]]


def cofactor_matrix(B: np.ndarray) -> np.ndarray:
    """Signed-minor matrix ``B^A``; ``B @ B^A.T == det(B) * I``."""
    B = np.asarray(B, dtype=complex)
    out = np.empty((3, 3), dtype=complex)
    for i in range(3):
        for j in range(3):
            out[i, j] = (-1) ** (i + j) * minor(B, i, j)
    return out


def det3(B: np.ndarray) -> complex:
    B = np.asarray(B, dtype=complex)
    return (B[0, 0] * (B[1, 1] * B[2, 2] - B[1, 2] * B[2, 1])
            - B[0, 1] * (B[1, 0] * B[2, 2] - B[1, 2] * B[2, 0])
            + B[0, 2] * (B[1, 0] * B[2, 1] - B[1, 1] * B[2, 0]))


def inverse_unimodular(B: np.ndarray) -> np.ndarray:
    """Inverse through the cofactor matrix, divided by the computed determinant."""
    return cofactor_matrix(B).T / det3(B)


# --------------------------------------------------------------------------

def zero_curvature_residual(sampler: Callable[[float, float], FieldPoint], x: float, t: float,
                            sp: SpectralPoint, params: ModelParams = DEFAULT_PARAMS,
                            h: float = 1e-3) -> float:
    """Frobenius norm of ``U_t - V_x + [U, V]`` by centred differences of spacing ``h``.

    ``sampler(x, t)`` returns a :class:`FieldPoint`.  Small (O(h^2)) exactly
    when the sampled fields solve the CMNLS system at ``(x, t)``.
    """
    try:
        Up = eval_U(sampler(x, t + h), sp, params)
        Um = eval_U(sampler(x, t - h), sp, params)
        Vp = eval_V(sampler(x + h, t), sp, params)
        Vm = eval_V(sampler(x - h, t), sp, params)
    except OutOfDomainError as exc:
        raise StencilRangeError(f"stencil of width {h} around ({x}, {t}) leaves the data: {exc}") from exc
    fp = sampler(x, t)
    U = eval_U(fp, sp, params)
    V = eval_V(fp, sp, params)
    Z = (Up - Um) / (2 * h) - (Vp - Vm) / (2 * h) + U @ V - V @ U
    return float(np.linalg.norm(Z))
