import numpy as np
import pytest

from cmnls_halfline import direct_scattering as ds
from cmnls_halfline.errors import ValidityDomainError
from cmnls_halfline.fields import x_line
from cmnls_halfline.lax_core import LAMBDA, cofactor_matrix, det3, k_of


def brute_s(fd, lam, n=8000):
    """RK4 on Psi_x = U Psi from x = L (Psi = e^{-ik Lambda L}) to 0, so s = Psi(0)."""
    k = k_of(lam, fd.params)
    xs = np.linspace(fd.L, 0.0, 2 * n + 1)
    u, v, _, _ = x_line(fd, 0.0, xs)

    def U(i):
        m = -1j * k * LAMBDA.copy()
        m[0, 1], m[0, 2], m[1, 0], m[2, 0] = lam * u[i], lam * v[i], lam * np.conj(u[i]), lam * np.conj(v[i])
        return m

    P = np.diag(np.exp(-1j * k * np.diag(LAMBDA) * fd.L))
    h = xs[2] - xs[0]
    for j in range(n):
        a, b, c = 2 * j, 2 * j + 1, 2 * j + 2
        k1 = U(a) @ P
        k2 = U(b) @ (P + h / 2 * k1)
        k3 = U(b) @ (P + h / 2 * k2)
        k4 = U(c) @ (P + h * k3)
        P = P + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    return P


@pytest.mark.parametrize("lam", [0.5, 1.2, -0.8])
def test_s_matches_brute_force(small_gaussian, lam):
    s = ds.compute_s(small_gaussian, lam).mu
    np.testing.assert_allclose(s, brute_s(small_gaussian, lam), atol=1e-6)


def test_zero_data_gives_identity(zero_data):
    for lam in (0.5, 0.3 + 0.2j, 1j):
        opts = ds.QuadOptions(override_guard=True)
        for fn in (ds.compute_s, ds.compute_S, ds.compute_c):
            np.testing.assert_array_equal(fn(zero_data, lam, opts=opts).mu, np.eye(3))
        mu2 = ds.integrate_eigenfunction(zero_data, 2, 2.0, 0.5, lam, opts=opts).mu
        np.testing.assert_array_equal(mu2, np.eye(3))


@pytest.mark.parametrize("lam", [0.7, 1.5j, 0.4j])
def test_unimodular_on_axes(small_gaussian, lam):
    fine = ds.QuadOptions(step_factor=0.125, grid_cap=0.5)
    s = ds.compute_s(small_gaussian, lam, opts=fine).mu
    S = ds.compute_S(small_gaussian, lam, opts=fine).mu
    assert abs(det3(S) - 1) < 1e-8
    if abs(k_of(lam).imag) < 1e-12:
        assert abs(det3(s) - 1) < 1e-8


def test_adjugate_ode_matches_cofactors(small_gaussian):
    lam = 0.9
    fine = ds.QuadOptions(step_factor=0.125, grid_cap=0.5)
    s = ds.compute_s(small_gaussian, lam, opts=fine).mu
    sA = ds.compute_s(small_gaussian, lam, opts=fine, adjugate=True).mu
    np.testing.assert_allclose(sA, cofactor_matrix(s), atol=1e-9)
    np.testing.assert_allclose(ds.adjugate_eigenfunction(s), cofactor_matrix(s))
    with pytest.raises(ValueError):
        ds.adjugate_eigenfunction(2 * s)


def test_domain_guard(small_gaussian):
    with pytest.raises(ValidityDomainError) as info:
        ds.compute_s(small_gaussian, 2.0 + 2.0j)
    assert info.value.column in (1, 2, 3) and info.value.growth > 10
    # one bounded column is still available on its own
    r = ds.compute_s(small_gaussian, 2.0 + 2.0j, columns=[0])
    assert np.all(np.isnan(r.mu[:, 1:])) and np.all(np.isfinite(r.mu[:, 0]))


def test_override_guard(small_gaussian):
    r = ds.compute_s(small_gaussian, 0.6 + 0.3j, opts=ds.QuadOptions(override_guard=True))
    assert np.all(np.isfinite(r.mu))


def test_mu2_path_independence(small_gaussian):
    opts = ds.QuadOptions(estimate_error=True)
    a = ds.integrate_eigenfunction(small_gaussian, 2, 3.0, 0.6, 0.8, opts=opts)
    b = ds.integrate_eigenfunction(small_gaussian, 2, 3.0, 0.6, 0.8, opts=opts, path="alternate")
    assert np.abs(a.mu - b.mu).max() < 1e-4
    assert a.error > 0 and b.error > 0


def test_mu1_mu3_at_endpoints(small_gaussian):
    fd = small_gaussian
    assert np.array_equal(ds.integrate_eigenfunction(fd, 3, fd.L, 0.3, 0.5).mu, np.eye(3))
    assert np.array_equal(ds.integrate_eigenfunction(fd, 2, 0.0, 0.0, 0.5).mu, np.eye(3))
    with pytest.raises(ValueError):
        ds.eigenfunction_legs(4, fd, 0, 0)


def test_symmetry_selects_plus(small_gaussian):
    lams = [0.5, 1.3, 0.7j]
    cal = ds.calibrate_epsilon(small_gaussian, lams)
    assert cal["epsilon"] == 1
    assert cal["residual"] < 1e-5
    assert cal["ratio"] > 10


def test_spectral_cache_and_sweep(small_gaussian):
    a = ds.compute_s(small_gaussian, 0.55)
    assert ds.compute_s(small_gaussian, 0.55) is a
    sw = ds.spectral_sweep(small_gaussian, [0.5, 0.6, 0.7], threads=3)
    seq = ds.spectral_sweep(small_gaussian, [0.5, 0.6, 0.7], threads=1)
    for p, q in zip(sw, seq):
        np.testing.assert_array_equal(p.s, q.s)
    d = sw[0].to_dict()
    assert d["lambda"] == [0.5, 0.0] and len(d["s"]) == 3
