import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from beckerqc import extension, geometry
from beckerqc.analytic import DiskGrid, catalog, schwarzian_norm
from beckerqc.errors import DomainError, ExtensionError, SingularityError
from beckerqc.extension import (PlaneMap, ahlfors_weill_extension, aw_chain,
                                aw_extension_value, aw_gt_value, becker_extension,
                                beltrami, derivative_bounds_report,
                                dilatation_sweep, identity_map,
                                second_derivative_bounds_report, wirtinger)


def test_moebius_extension_is_translation():
    f = catalog("moebius", 0.3)
    for z in (0.2 + 0.1j, 0.9j, 0.0, 0.99):
        assert aw_extension_value(f, z) == pytest.approx(z - 0.3, abs=1e-12)


def test_extension_value_at_origin_is_minus_a2():
    f = catalog("quadratic", 0.2)
    assert aw_extension_value(f, 0.0) == pytest.approx(-0.2, abs=1e-15)
    fc = catalog("cubic", 0.15)
    assert aw_extension_value(fc, 0.0) == pytest.approx(0.0, abs=1e-15)


def test_extension_routes_agree():
    # Sigma-picture evaluation vs the direct chain formula at t = -log|z|
    f = catalog("quadratic", 0.2)
    z = 0.1 + 0.1j
    v_sigma = aw_extension_value(f, z)
    v_chain = aw_gt_value(f, z / abs(z), -np.log(abs(z)))
    assert abs(v_sigma - v_chain) <= 1e-6
    # and the leading conjugate-series terms approximate to cubic order
    b = f.to_sigma().b
    series = b[0] + z + 3 * b[1] * np.conj(z) + 6 * b[2] * np.conj(z) ** 2
    assert abs(v_sigma - series) < 1e-3
    assert abs(v_sigma - series) < 10 * abs(z) ** 3


@pytest.mark.parametrize("family,c", [("quadratic", 0.2), ("cubic", 0.15),
                                      ("moebius", 0.3)])
def test_extension_routes_agree_fuzz(family, c):
    f = catalog(family, c)
    rng = np.random.default_rng(23)
    r = 0.05 + 0.94 * rng.random(50)
    z = r * np.exp(2j * np.pi * rng.random(50))
    v_sigma = aw_extension_value(f, z)
    v_chain = np.array([aw_gt_value(f, zz / abs(zz), -np.log(abs(zz))) for zz in z])
    assert np.abs(v_sigma - v_chain).max() < 1e-9


def test_extension_continuous_across_circle():
    f = catalog("quadratic", 0.2)
    for ang in np.linspace(0, 2 * np.pi, 8, endpoint=False):
        zb = np.exp(1j * ang)
        gap = abs(aw_extension_value(f, zb * (1 - 1e-12))
                  - aw_extension_value(f, zb * (1 + 1e-12)))
        assert gap < 1e-10


def test_extension_exterior_equals_sigma_series():
    f = catalog("quadratic", 0.2)
    g0 = f.to_sigma()
    for z in (2.0 + 1.0j, -3.0, 1.5j):
        assert aw_extension_value(f, z) == pytest.approx(g0.eval(z), abs=1e-14)


def test_wirtinger_trivial_maps():
    d, db = wirtinger(identity_map(), 0.3 + 0.2j, "analytic")
    assert complex(d) == pytest.approx(1.0, abs=1e-15)
    assert complex(db) == pytest.approx(0.0, abs=1e-15)
    conj_map = PlaneMap(evaluator=lambda z: np.conj(np.asarray(z, complex)))
    d, db = wirtinger(conj_map, 0.3 + 0.2j, "finite-difference")
    assert complex(d) == pytest.approx(0.0, abs=1e-9)
    assert complex(db) == pytest.approx(1.0, abs=1e-9)


def test_wirtinger_analytic_matches_finite_differences():
    f = catalog("quadratic", 0.2)
    G = ahlfors_weill_extension(f)
    z = 0.3 * np.exp(1j * np.pi / 4)
    da, dba = wirtinger(G, z, "analytic")
    df, dbf = wirtinger(G, z, "finite-difference")
    assert abs(da - df) / abs(da) < 1e-6
    assert abs(dba - dbf) / abs(dba) < 1e-6


def test_wirtinger_requires_closed_forms_for_analytic_mode():
    conj_map = PlaneMap(evaluator=lambda z: np.conj(np.asarray(z, complex)))
    with pytest.raises(DomainError):
        wirtinger(conj_map, 0.1, "analytic")
    with pytest.raises(DomainError):
        wirtinger(conj_map, 0.1, "bogus-mode")


def test_beltrami_conformal_and_affine():
    sample = beltrami(identity_map(), 0.4 + 0.1j)
    assert sample.dilatation == pytest.approx(0.0, abs=1e-12)
    assert sample.jacobian == pytest.approx(1.0, rel=1e-9)

    affine = PlaneMap(evaluator=lambda z: np.asarray(z, complex)
                      + 0.4 * np.conj(np.asarray(z, complex)))
    sample = beltrami(affine, 1.3 - 0.7j)
    assert sample.mu == pytest.approx(0.4, abs=1e-8)
    assert sample.jacobian == pytest.approx(0.84, abs=1e-7)


@settings(max_examples=25, deadline=None, derandomize=True)
@given(st.complex_numbers(max_magnitude=0.9, allow_nan=False, allow_infinity=False),
       st.complex_numbers(min_magnitude=1.0, max_magnitude=3.0,
                          allow_nan=False, allow_infinity=False))
def test_beltrami_affine_property(b, a):
    affine = PlaneMap(evaluator=lambda z: a * np.asarray(z, complex)
                      + b * np.conj(np.asarray(z, complex)))
    sample = beltrami(affine, 0.7 + 0.2j)
    assert sample.mu == pytest.approx(b / a, abs=1e-6)


def test_beltrami_degenerate_point():
    collapsing = PlaneMap(evaluator=lambda z: np.conj(np.asarray(z, complex)) ** 2)
    with pytest.raises(SingularityError):
        beltrami(collapsing, 0.0)


def test_dilatation_identity():
    # |mu_G(z)| = (1/2)(1-|z|^2)^2 |S_f(conj z)| pointwise
    f = catalog("quadratic", 0.2)
    G = ahlfors_weill_extension(f)
    z = 0.3 * np.exp(1j * np.pi / 4)
    d, db = wirtinger(G, z, "analytic")
    predicted = -0.5 * (1 - abs(z) ** 2) ** 2 * f.schwarzian(np.conj(z))
    assert complex(db / d) == pytest.approx(predicted, abs=1e-14)


@pytest.mark.parametrize("family,c", [("quadratic", 0.2), ("cubic", 0.15),
                                      ("moebius", 0.3)])
def test_dilatation_bounded_and_orientation(family, c):
    f = catalog(family, c)
    qhat = schwarzian_norm(f) / 6.0
    G = ahlfors_weill_extension(f)
    grid = DiskGrid(kind="annulus", r_inner=0.01, r_outer=0.999,
                    n_radial=8, n_angular=64)
    sweep = dilatation_sweep(G, grid.points)
    assert sweep["max_dilatation"] <= 3 * qhat + 1e-3
    assert sweep["min_jacobian"] > 0.0


def test_first_derivative_bounds_moebius_exact():
    # G = z - c: dF = e^{-t0} exactly, inside the sandwich with slack
    f = catalog("moebius", 0.3)
    grid = DiskGrid(kind="disk", r_outer=1.0, n_radial=10, n_angular=24).points
    rep = derivative_bounds_report(f, 0.05, grid)
    assert rep.ok
    d, db = extension.aw_extension_wirtinger(f, 0.3 * grid[:5])
    assert np.allclose(d, 1.0) and np.allclose(db, 0.0)


def test_first_derivative_bounds_identity_small_q():
    rep = derivative_bounds_report(catalog("identity"), 0.01,
                                   DiskGrid(kind="disk", r_outer=1.0,
                                            n_radial=8, n_angular=16).points)
    assert rep.ok and rep.n_violations == 0


def test_first_derivative_bounds_quadratic_sweep():
    grid = DiskGrid(kind="disk", r_outer=1.0, n_radial=16, n_angular=64).points
    rep = derivative_bounds_report(catalog("quadratic", 0.2), 0.07, grid)
    assert rep.ok
    assert rep.n_points == 1024
    assert rep.min_slack > 0.0


def test_second_derivative_bounds():
    grid = DiskGrid(kind="disk", r_outer=0.99, n_radial=12, n_angular=32).points
    rep = second_derivative_bounds_report(catalog("quadratic", 0.2), 0.07, grid)
    assert rep.ok
    rep_m = second_derivative_bounds_report(catalog("moebius", 0.3), 0.05, grid)
    assert rep_m.ok  # all second Wirtinger combinations vanish for a translation


def test_second_derivative_grid_margin_contract():
    with pytest.raises(DomainError):
        second_derivative_bounds_report(catalog("quadratic", 0.2), 0.07,
                                        np.array([1.0 - 1e-7]))


def test_gt_denominator_singularity_signals_regime():
    # g_t(w) = e^{-t} w - c hits the origin at w = 1, t = -log c: the chain
    # formula denominator vanishes exactly there (c = 1/2 keeps the series
    # truncation far below the singular scale)
    f = catalog("moebius", 0.5)
    with pytest.raises((ExtensionError, SingularityError)):
        aw_gt_value(f, 1.0, float(np.log(2.0)))


def test_becker_extension_scaling_chain_is_identity():
    from beckerqc.loewner import scaling_chain
    ch = scaling_chain()
    for z in (0.3 + 0.1j, 1.0, 1.7 - 0.4j, 3.0j):
        assert becker_extension(ch, z) == pytest.approx(z, abs=1e-12)


def test_becker_extension_continuity_cubic():
    ch = aw_chain(catalog("cubic", 0.2))
    for ang in np.linspace(0, 2 * np.pi, 64, endpoint=False):
        gap = abs(becker_extension(ch, 1.0001 * np.exp(1j * ang))
                  - becker_extension(ch, 0.9999 * np.exp(1j * ang)))
        assert gap <= 1e-3


def test_becker_extension_nested_images():
    ch = aw_chain(catalog("cubic", 0.2))
    ang = np.exp(1j * 2 * np.pi * np.arange(256) / 256)
    rings = [np.asarray([becker_extension(ch, r * a) for a in ang]) for r in (1.0, 1.5, 2.0)]
    # inner image curves wind inside the outer ones
    for inner, outer in zip(rings, rings[1:]):
        assert np.all(geometry.winding_number(inner, outer) == 1)


def test_becker_extension_numerical_chain_with_nudge():
    from beckerqc.loewner import numerical_chain, slit_field
    ch = numerical_chain(slit_field())  # default horizon: boundary starts
    z = 1.3 * np.exp(0.4j)              # converge like e^{-t} with a large factor
    val = becker_extension(ch, z, boundary_nudge=1e-9)
    # koebe chain: f_t(zeta) = e^t zeta/(1-zeta)^2 at t = log|z|
    zeta = z / abs(z)
    ref = abs(z) * zeta / (1 - zeta * (1 - 1e-9)) ** 2
    assert abs(val - ref) < 1e-6


def test_pre_schwarzian_singularity_detected():
    from beckerqc.analytic import SchlichtFunction
    bad = SchlichtFunction((1.0, -0.6))  # f' = 1 - 1.2 z vanishes at 5/6
    with pytest.raises(SingularityError):
        bad.pre_schwarzian(5.0 / 6.0)


def test_becker_extension_matches_plane_conjugation():
    # for a2 = 0 the chain extension coincides with 1/G(1/z) outside the disk
    f = catalog("cubic", 0.2)
    ch = aw_chain(f)
    rng = np.random.default_rng(5)
    z = (1.2 + 2.0 * rng.random(10)) * np.exp(2j * np.pi * rng.random(10))
    via_chain = np.array([becker_extension(ch, zz) for zz in z])
    via_plane = 1.0 / aw_extension_value(f, 1.0 / z)
    assert np.abs(via_chain - via_plane).max() < 1e-9
