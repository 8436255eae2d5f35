import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from beckerqc import analytic
from beckerqc.analytic import DiskGrid, catalog, schwarzian_norm, truncation_certificate
from beckerqc.errors import DomainError, TruncationError

# frozen by an independent dense-scan oracle (plain loops, no package code)
QHAT_QUAD_02 = 0.043556954089843614  # on the default 64x256 grid, |z| <= 0.999


def test_eval_identity():
    f = catalog("identity")
    assert f.eval(0.5) == pytest.approx(0.5, abs=1e-15)


def test_eval_koebe_closed_form():
    f = catalog("koebe", order=60)
    assert f.eval(0.5) == pytest.approx(2.0, abs=1e-9)


def test_eval_first_derivative():
    f = catalog("quadratic", 0.2)
    assert f.eval(0.5, 1) == pytest.approx(1.2, abs=1e-14)


def test_eval_domain_and_order_errors():
    f = catalog("quadratic", 0.2)
    with pytest.raises(DomainError):
        f.eval(1.0)
    with pytest.raises(DomainError):
        f.eval(0.5, 4)


def test_pre_schwarzian_values():
    assert catalog("identity").pre_schwarzian(0.3 + 0.1j) == pytest.approx(0.0, abs=1e-14)
    assert catalog("quadratic", 0.2).pre_schwarzian(1e-300) == pytest.approx(0.4, abs=1e-14)
    assert catalog("koebe", order=60).pre_schwarzian(1e-300) == pytest.approx(4.0, abs=1e-9)


def test_schwarzian_values():
    assert catalog("identity").schwarzian(0.4j) == pytest.approx(0.0, abs=1e-15)
    # Moebius maps have vanishing Schwarzian
    assert abs(catalog("moebius", 0.3).schwarzian(0.4)) < 1e-10
    assert catalog("koebe", order=60).schwarzian(1e-300) == pytest.approx(-6.0, abs=1e-8)


def test_schwarzian_norm_moebius_vanishes():
    assert schwarzian_norm(catalog("moebius", 0.3)) < 1e-9


def test_schwarzian_norm_koebe_attains_six_near_origin():
    grid = DiskGrid(kind="disk", r_outer=0.3, n_radial=48, n_angular=128)
    val = schwarzian_norm(catalog("koebe", order=60), grid)
    assert val >= 6.0 - 1e-3
    assert val <= 6.0 + 1e-9


def test_schwarzian_norm_quadratic_golden():
    val = schwarzian_norm(catalog("quadratic", 0.2))
    assert val / 6.0 == pytest.approx(QHAT_QUAD_02, rel=1e-12)


def test_schwarzian_norm_empty_grid_rejected():
    with pytest.raises(DomainError):
        schwarzian_norm(catalog("identity"), np.array([], dtype=complex))


def _rescaled(f, r, order=64):
    # f_r(z) = f(r z)/r stays in class S
    a = np.asarray(f.coefficients, complex)
    n = np.arange(1, a.size + 1)
    return analytic.SchlichtFunction(tuple((a * r ** (n - 1)).tolist()))


@pytest.mark.parametrize("r", [0.5, 0.9])
def test_schwarzian_norm_shrinks_under_rescaling(r):
    f = catalog("quadratic", 0.2)
    grid = DiskGrid(kind="disk", r_outer=0.98, n_radial=32, n_angular=64)
    scaled_grid_vals = schwarzian_norm(_rescaled(f, r), grid)
    assert scaled_grid_vals <= schwarzian_norm(f, grid.points * r) + 1e-13
    assert scaled_grid_vals <= schwarzian_norm(f) + 1e-13


def test_invert_to_sigma_identity():
    g0 = catalog("identity").to_sigma()
    assert np.allclose(g0.b, 0.0, atol=1e-15)


def test_invert_to_sigma_quadratic():
    g0 = catalog("quadratic", 0.2).to_sigma()
    assert g0.b[0] == pytest.approx(-0.2, abs=1e-15)
    assert g0.b[1] == pytest.approx(0.04, abs=1e-15)
    assert g0.b[2] == pytest.approx(-0.008, abs=1e-15)


def test_invert_to_sigma_koebe():
    g0 = catalog("koebe", order=60).to_sigma()
    assert g0.b[0] == pytest.approx(-2.0, abs=1e-12)
    assert g0.b[1] == pytest.approx(1.0, abs=1e-12)
    # the reciprocal of the *truncated* series is clean away from the cut
    assert np.allclose(g0.b[2:55], 0.0, atol=1e-12)


def test_sigma_order_cannot_exceed_source():
    with pytest.raises(DomainError):
        catalog("quadratic", 0.2, order=16).to_sigma(order=32)


@settings(max_examples=25, deadline=None, derandomize=True)
@given(st.lists(st.complex_numbers(max_magnitude=0.2, allow_nan=False,
                                   allow_infinity=False), min_size=0, max_size=8))
def test_sigma_roundtrip_recovers_coefficients(tail):
    coeffs = tuple([1.0 + 0.0j] + list(tail))
    f = analytic.SchlichtFunction(coeffs)
    back = f.to_sigma().to_schlicht(len(coeffs))
    assert np.abs(np.asarray(back.coefficients[:len(coeffs)])
                  - np.asarray(coeffs)).max() < 1e-10


@pytest.mark.parametrize("family,c", [("quadratic", 0.2), ("cubic", 0.15),
                                      ("moebius", 0.3), ("koebe", 0.0)])
def test_series_derivatives_match_finite_differences(family, c):
    # first derivative with step 1e-5; higher derivatives via Richardson at
    # 1e-3 (smaller steps hit the double-precision rounding floor)
    f = catalog(family, c, order=64)
    rng = np.random.default_rng(7)
    z = 0.4 * np.sqrt(rng.random(10)) * np.exp(2j * np.pi * rng.random(10))

    h1 = 1e-5
    fd1 = (f.eval(z + h1) - f.eval(z - h1)) / (2 * h1)

    def richardson(func, h):
        def central(hh):
            return (func(z + hh) - 2 * func(z) + func(z - hh)) / hh ** 2
        return (4 * central(h / 2) - central(h)) / 3

    h2 = 1e-3
    fd2 = richardson(f.eval, h2)

    def third(hh):
        return (-f.eval(z - 2 * hh) + 2 * f.eval(z - hh)
                - 2 * f.eval(z + hh) + f.eval(z + 2 * hh)) / (2 * hh ** 3)

    fd3 = (4 * third(h2 / 2) - third(h2)) / 3

    pre_fd = fd2 / fd1
    sch_fd = fd3 / fd1 - 1.5 * (fd2 / fd1) ** 2
    pre = f.pre_schwarzian(z)
    sch = f.schwarzian(z)
    assert np.abs(pre_fd - pre).max() <= 1e-6 * max(1.0, np.abs(pre).max())
    assert np.abs(sch_fd - sch).max() <= 1e-6 * max(1.0, np.abs(sch).max())


def test_truncation_certificate_polynomials_pass():
    assert truncation_certificate("quadratic", 0.2, 0.999) < 1e-12
    assert truncation_certificate("moebius", 0.3, 0.999) < 1e-9


def test_truncation_certificate_koebe_aborts_near_boundary():
    with pytest.raises(TruncationError):
        truncation_certificate("koebe", 0.0, 0.999)


def test_catalog_normalization_enforced():
    with pytest.raises(DomainError):
        analytic.SchlichtFunction((2.0,))
    with pytest.raises(DomainError):
        catalog("unknown-family")


def test_disk_grid_deterministic_and_interior():
    g1 = DiskGrid(kind="annulus", r_inner=0.01, r_outer=0.999,
                  n_radial=16, n_angular=256)
    g2 = DiskGrid(kind="annulus", r_inner=0.01, r_outer=0.999,
                  n_radial=16, n_angular=256)
    assert np.array_equal(g1.points, g2.points)
    assert g1.points.size == 4096
    r = np.abs(g1.points)
    assert r.min() > 0.01 and r.max() < 0.999


def test_disk_grid_circle_kind():
    g = DiskGrid(kind="circle", r_outer=0.5, n_angular=8)
    assert np.allclose(np.abs(g.points), 0.5)
