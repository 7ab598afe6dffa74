import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cmnls_halfline import residues_global as rg
from cmnls_halfline.errors import DegenerateZeroError, RegionError, UnresolvedZeroError
from cmnls_halfline.lax_core import make_spectral_point, minor
from cmnls_halfline.rh_assembly import classify_region

coord = st.floats(-2, 2, allow_nan=False)
PLANTED = {"D1": 1.5 + 0.3j, "D2": 0.3 + 1.5j, "D3": -0.3 + 1.5j, "D4": -1.5 + 0.3j}


def test_theta_examples():
    sp = make_spectral_point(0.0)
    assert rg.theta(1, 2, 1.0, 0.0, sp) == pytest.approx(2j)
    assert rg.theta(2, 3, 0.7, 0.3, sp) == 0
    sp = make_spectral_point(0.4 + 0.9j)
    k = sp.k
    assert rg.theta(1, 3, 0.7, 0.3, sp) == pytest.approx(2j * k * 0.7 - 4j * k * k * 0.3)
    with pytest.raises(ValueError):
        rg.theta(0, 1, 0, 0, sp)


@given(coord, coord, st.floats(0, 5), st.floats(0, 1), st.integers(1, 3), st.integers(1, 3))
def test_theta_antisymmetric(a, b, x, t, i, j):
    sp = make_spectral_point(complex(a, b))
    assert rg.theta(i, j, x, t, sp) == pytest.approx(-rg.theta(j, i, x, t, sp), abs=1e-12)


def test_unsigned_minors(rng):
    B = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    m = rg.unsigned_minors(B)
    for i in range(3):
        for j in range(3):
            assert m[i, j] == pytest.approx(minor(B, i, j))


def test_scalar_values(rng):
    s = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    s /= np.linalg.det(s) ** (1 / 3)
    S = np.eye(3, dtype=complex)
    assert rg.scalar_value("D2", s, S) == s[0, 0]
    assert rg.scalar_value("D3", s, S) == pytest.approx(np.linalg.inv(s)[0, 0])
    # with S = I the D1 and D4 scalars reduce to s_11 and (s^-1)_11
    assert rg.scalar_value("D1", s, S) == pytest.approx(s[0, 0])
    assert rg.scalar_value("D4", s, S) == pytest.approx(np.linalg.inv(s)[0, 0])
    with pytest.raises(RegionError):
        rg.scalar_value("D5", s, S)


def test_complex_derivative():
    assert rg.complex_derivative(lambda z: z ** 3, 1 + 1j, 1e-3) == pytest.approx(3 * (1 + 1j) ** 2, rel=1e-10)


def test_winding_number_counts():
    f = lambda z: (z - 0.5 - 0.5j) * (z - 0.2 - 0.7j) * (z + 3)  # noqa: E731
    n, w, ratio = rg.winding_number(f, (0, 1, 0, 1))
    assert n == 2 and abs(w - 2) < 1e-9 and ratio > 0
    assert rg.winding_number(f, (1, 2, 1, 2))[0] == 0


def test_find_zeros_filters_by_region():
    f = lambda z: (z - PLANTED["D1"]) * (z - PLANTED["D2"]) * (z - PLANTED["D3"])  # noqa: E731
    box = (-3, 3, -3, 3)
    for tag in ("D1", "D2", "D3"):
        zs = rg.find_zeros(f, tag, box)
        assert len(zs) == 1
        assert zs[0].lambda_j == pytest.approx(PLANTED[tag], abs=1e-10)
        assert zs[0].region.tag == tag and zs[0].violation is None
    assert rg.find_zeros(f, "D4", box) == []
    assert len(rg.find_zeros(f, None, box, split_axes=False)) == 3


def test_find_zeros_double_zero_flagged():
    z0 = 0.4 + 1.4j
    zs = rg.find_zeros(lambda z: (z - z0) ** 2, "D2", (-3, 3, -3, 3))
    assert len(zs) == 1 and zs[0].multiplicity_estimate == 2 and zs[0].violation == "multiple"


def test_zero_on_search_edge():
    with pytest.raises(UnresolvedZeroError):
        rg.find_zeros(lambda z: z - 0.5, "D1", (-3, 3, -3, 3))


@pytest.mark.parametrize("tag", ["D1", "D2", "D3", "D4"])
def test_manufactured_residues(tag):
    case = rg.ManufacturedCase(tag, PLANTED[tag])
    f = lambda z: rg.scalar_value(tag, *case.spectral(z))  # noqa: E731
    zs = rg.find_zeros(f, tag, (-3, 3, -3, 3))
    assert len(zs) == 1 and zs[0].lambda_j == pytest.approx(PLANTED[tag], abs=1e-10)
    for x, t in ((0.0, 0.0), (0.7, 0.3)):
        recs = rg.residue_coefficients(case.spectral, zs[0], x, t)
        assert {r.column for r in recs} == ({2, 3} if tag in ("D1", "D2") else {1})
        for rec in recs:
            d = rg.verify_residue_contour(lambda z: case.M(z, x, t), rec, 0.1)
            assert d < 1e-6
            assert rec.to_dict()["column"] == rec.column


def test_residue_contour_leaving_region():
    case = rg.ManufacturedCase("D1", PLANTED["D1"])
    f = lambda z: rg.scalar_value("D1", *case.spectral(z))  # noqa: E731
    z = rg.find_zeros(f, "D1", (-3, 3, -3, 3))[0]
    rec = rg.residue_coefficients(case.spectral, z)[0]
    with pytest.raises(RegionError):
        rg.verify_residue_contour(case.M, rec, 1.0)


def test_non_simple_zero_is_degenerate():
    z0 = PLANTED["D2"]

    def spectral(z):
        s = rg._unimodular_with_corner((z - z0) ** 2, 0.3, -0.2, 0.5, 0.1)
        return s, np.eye(3, dtype=complex)

    locus = rg.ZeroLocus(z0, "s_11", classify_region(z0), 1, 0.0)
    with pytest.raises(DegenerateZeroError):
        rg.residue_coefficients(spectral, locus)


def test_column_mask():
    assert rg.column_mask(1 + 0.1j).tolist() == [True, False, False]      # D1
    assert rg.column_mask(-1 + 0.1j).tolist() == [False, True, True]      # D4
    assert rg.column_mask(0.7).tolist() == [True, True, True]             # boundary
    for z in rg.default_global_samples():
        assert rg.column_mask(z).any()


def test_global_relation_zero_data(zero_data):
    rep = rg.global_relation_residual(zero_data)
    assert rep.max_residual == 0.0
    d = rep.to_dict()
    assert len(d["lambdas"]) == len(d["residuals"])


def test_global_relation_detects_perturbation(small_gaussian):
    good = rg.global_relation_residual(small_gaussian)
    bump = 1e-2 * np.exp(-((small_gaussian.t_grid - 0.5) / 0.1) ** 2)
    bad = rg.global_relation_residual(small_gaussian.replace(g0=small_gaussian.g0 + bump))
    # the coarse test grid limits consistency to about 1e-3
    assert good.max_residual < 5e-3
    assert bad.max_residual > 1e3 * good.max_residual
