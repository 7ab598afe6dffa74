import cmath

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cmnls_halfline.errors import ConjugationOverflowError, ParameterError, StencilRangeError
from cmnls_halfline.fields import plane_wave_solution
from cmnls_halfline.lax_core import (LAMBDA, FieldPoint, ModelParams, cofactor_matrix, conjugation_action, det3,
                                     eval_U, eval_V, inverse_unimodular, k_of, make_spectral_point, minor,
                                     u1_matrix, u2_matrix, u3_matrix, v1_stack, v2_stack,
                                     zero_curvature_residual)

finite = st.floats(-3, 3, allow_nan=False, allow_infinity=False)
cplx = st.builds(complex, finite, finite)
mat3 = st.lists(cplx, min_size=9, max_size=9).map(lambda a: np.array(a, dtype=complex).reshape(3, 3))


def test_k_of_defaults():
    # k = (lam^2 + 1) for delta = 2, gamma = 1
    assert k_of(0.0) == 1.0
    assert k_of(1j) == 0.0
    assert k_of(2.0, ModelParams(delta=4.0, gamma=2.0)) == pytest.approx(3.0)


def test_k_of_vectorised():
    lam = np.array([0.5, 1j, 1 + 1j])
    np.testing.assert_allclose(k_of(lam), [k_of(z) for z in lam])


def test_spectral_point_diagonals():
    sp = make_spectral_point(0.7 + 0.2j)
    k = sp.k
    np.testing.assert_allclose(sp.l, [1j * k, -1j * k, -1j * k])
    np.testing.assert_allclose(sp.z, [-2j * k * k, 2j * k * k, 2j * k * k])


@pytest.mark.parametrize("kw", [{"gamma": 0.0}, {"epsilon": 0}, {"delta": float("nan")}])
def test_invalid_params(kw):
    with pytest.raises(ParameterError):
        ModelParams(**kw)


def test_params_roundtrip():
    p = ModelParams(1.5, -0.5, -1)
    assert ModelParams.from_dict(p.to_dict()) == p


@given(cplx, cplx, cplx)
def test_U_is_traceless(u, v, lam):
    U = eval_U(FieldPoint(u, v), make_spectral_point(lam))
    # -i k tr(Lambda) = -i k
    assert np.trace(U) == pytest.approx(-1j * k_of(lam), abs=1e-12)
    assert np.allclose(np.diag(U - u1_matrix(FieldPoint(u, v)) * lam), np.diag(-1j * k_of(lam) * LAMBDA))


@given(cplx, cplx, cplx)
def test_U_symmetry_epsilon_plus(u, v, lam):
    # A conj(U(conj lam))^T A = -U(lam) with A = diag(-1, 1, 1)
    A = np.diag([-1.0, 1.0, 1.0])
    fp = FieldPoint(u, v)
    U = eval_U(fp, make_spectral_point(lam))
    Uc = eval_U(fp, make_spectral_point(np.conj(lam)))
    np.testing.assert_allclose(A @ np.conj(Uc).T @ A, -U, atol=1e-12)


def test_u_matrices_structure():
    fp = FieldPoint(0.3 + 0.1j, -0.2j, 0.05, 0.1 + 0.2j)
    U1, U2 = u1_matrix(fp), u2_matrix(fp)
    assert np.allclose(U1, np.conj(U1).T)
    assert np.allclose(U2, np.conj(U2).T)
    assert np.trace(U2) == pytest.approx(0.0)
    U3 = u3_matrix(fp)
    assert np.allclose(U3[1:, 1:], 0) and U3[0, 0] == 0


@given(cplx, cplx, cplx, cplx, cplx)
def test_stacks_match_matrices(u, v, ux, vx, lam):
    fp = FieldPoint(u, v, ux, vx)
    sp = make_spectral_point(lam)
    V2 = eval_V(fp, sp) - 2j * sp.k ** 2 * LAMBDA
    np.testing.assert_allclose(v2_stack(lam, [u], [v], [ux], [vx])[0], V2, atol=1e-9, rtol=1e-12)
    np.testing.assert_allclose(v1_stack(lam, [u], [v])[0], lam * u1_matrix(fp), atol=1e-12)


def test_zero_curvature_on_exact_solution():
    pw = plane_wave_solution(0.3, 1.0)
    sp = make_spectral_point(0.4 + 0.3j)
    r = [zero_curvature_residual(pw, 0.2, 0.1, sp, h=h) for h in (1e-2, 5e-3)]
    assert r[1] < 1e-4
    assert r[0] / r[1] == pytest.approx(4.0, rel=0.05)   # O(h^2)


def test_zero_curvature_detects_non_solution():
    pw = plane_wave_solution(0.3, 1.0)
    bad = type(pw)(pw.a, pw.kappa, pw.omega + 0.1)
    sp = make_spectral_point(0.4 + 0.3j)
    assert zero_curvature_residual(bad, 0.2, 0.1, sp) > 1e-2


def test_zero_curvature_stencil_range(small_gaussian):
    from cmnls_halfline.fields import sample_fields
    with pytest.raises(StencilRangeError):
        zero_curvature_residual(lambda x, t: sample_fields(small_gaussian, x, t), 0.0, 0.5,
                                make_spectral_point(0.5))


@given(mat3, cplx)
def test_conjugation_action_oracle(B, theta):
    E = np.diag(np.exp(theta * np.array([-1.0, 1.0, 1.0])))
    Einv = np.diag(np.exp(-theta * np.array([-1.0, 1.0, 1.0])))
    np.testing.assert_allclose(conjugation_action(theta, B), E @ B @ Einv, rtol=1e-12, atol=1e-12)


def test_conjugation_action_cases():
    B = np.arange(9, dtype=complex).reshape(3, 3) + 1
    assert np.allclose(conjugation_action(0.0, B), B)
    out = conjugation_action(1.0, B)
    assert out[0, 1] == pytest.approx(B[0, 1] * cmath.exp(-2))
    assert out[1, 0] == pytest.approx(B[1, 0] * cmath.exp(2))
    assert np.allclose(out[1:, 1:], B[1:, 1:])


def test_conjugation_overflow():
    with pytest.raises(ConjugationOverflowError):
        conjugation_action(400.0, np.ones((3, 3)))
    # a zero entry never overflows
    B = np.eye(3, dtype=complex)
    assert np.allclose(conjugation_action(400.0, B), B)


@given(mat3)
def test_cofactor_identity(B):
    C = cofactor_matrix(B)
    np.testing.assert_allclose(B @ C.T, det3(B) * np.eye(3), atol=1e-9 * (1 + np.abs(B).max() ** 3))
    assert det3(B) == pytest.approx(np.linalg.det(B), abs=1e-9 * (1 + np.abs(B).max() ** 3))
    assert minor(B, 0, 0) == pytest.approx(B[1, 1] * B[2, 2] - B[1, 2] * B[2, 1])


def test_inverse_unimodular(rng):
    A = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    A /= np.linalg.det(A) ** (1 / 3)
    np.testing.assert_allclose(inverse_unimodular(A) @ A, np.eye(3), atol=1e-12)
