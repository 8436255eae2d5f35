import numpy as np
import pytest

from beckerqc import exterior
from beckerqc.errors import DomainError, FitError
from beckerqc.exterior import (JordanCurve, circle_curve, conjugate_function,
                               ellipse_curve, exterior_map)


def test_conjugate_cosine():
    th = 2 * np.pi * np.arange(512) / 512
    out = conjugate_function(np.cos(th))
    assert np.abs(out - np.sin(th)).max() < 1e-13


def test_conjugate_constant_and_sine():
    th = 2 * np.pi * np.arange(64) / 64
    assert np.abs(conjugate_function(np.ones(64))).max() < 1e-15
    out = conjugate_function(np.sin(3 * th))
    assert np.abs(out + np.cos(3 * th)).max() < 1e-13


def test_conjugate_analytic_function():
    # h holomorphic in the disk: conj(Re h) = Im h - Im h(0)
    n = 512
    th = 2 * np.pi * np.arange(n) / n
    h = 1.0 / (np.exp(1j * th) - 2.0)
    out = conjugate_function(h.real)
    h0 = 1.0 / (0.0 - 2.0)
    assert np.abs(out - (h.imag - np.imag(h0))).max() < 1e-10


def test_conjugate_grid_contract():
    with pytest.raises(DomainError):
        conjugate_function(np.ones(100))
    with pytest.raises(DomainError):
        conjugate_function(np.array([1.0, np.nan, 0.0, 0.0]))


def test_circle_map_exact():
    em = exterior_map(circle_curve(0.7, 0.3j))
    assert em.capacity == pytest.approx(0.7, abs=1e-10)
    assert em.residual_rel < 1e-12
    z = np.array([1.5 + 0.2j, 3.0, -2.0j])
    assert np.abs(em.evaluate(z) - (0.7 * z + 0.3j)).max() < 1e-10
    assert np.abs(em.boundary_derivative() - 0.7).max() < 1e-10


def test_ellipse_joukowski():
    em = exterior_map(ellipse_curve(2.0, 1.0), n=512)
    assert em.capacity == pytest.approx(1.5, abs=1e-6)
    assert em.evaluate(2.0) == pytest.approx(3.25, abs=1e-6)
    # |g'(e^{i theta})| = |1.5 - 0.5 e^{-2 i theta}|
    bd = em.boundary_derivative()
    assert bd[0] == pytest.approx(1.0, abs=1e-6)
    assert bd[em.n // 4] == pytest.approx(2.0, abs=1e-6)
    # mean modulus of the boundary derivative dominates the capacity
    assert bd.mean() >= em.capacity - 1e-9


def test_ellipse_complex_boundary_derivative():
    em = exterior_map(ellipse_curve(2.0, 1.0), n=512)
    th = em.theta
    ref = 1.5 - 0.5 * np.exp(-2j * th)
    assert np.abs(em.boundary_complex_derivative() - ref).max() < 1e-6


def test_translation_equivariance():
    v = 0.8 - 0.4j
    em0 = exterior_map(ellipse_curve(2.0, 1.0), n=256)
    em1 = exterior_map(ellipse_curve(2.0, 1.0, center=v), n=256)
    assert em1.capacity == pytest.approx(em0.capacity, rel=1e-12)
    z = np.array([2.0 + 1.0j, -3.0])
    assert np.abs(em1.evaluate(z) - em0.evaluate(z) - v).max() < 1e-9
    # the boundary correspondence itself is translation invariant
    assert np.abs(em1.tau - em0.tau).max() < 1e-9
    assert np.abs(em1.boundary_derivative() - em0.boundary_derivative()).max() < 1e-9


def test_infinity_normalization():
    em = exterior_map(ellipse_curve(2.0, 1.0), n=256)
    val = em.evaluate(1e3)
    assert abs(np.angle(val / 1e3)) < 1e-6


def test_spectral_convergence_until_floor():
    residuals = []
    for n in (16, 32, 64, 128):
        em = exterior_map(ellipse_curve(2.0, 1.0), n=n, tol=1e-12,
                          residual_tol=np.inf)
        residuals.append(max(em.residual_rel, 1e-16))
    for a, b in zip(residuals, residuals[1:]):
        assert b <= a / 4.0 or a < 1e-12


def test_boundary_value_interpolation():
    em = exterior_map(ellipse_curve(2.0, 1.0), n=256)
    th = np.array([0.123, 2.345, 4.1])
    ref = 1.5 * np.exp(1j * th) + 0.5 * np.exp(-1j * th)
    assert np.abs(em.boundary_value(th) - ref).max() < 1e-8


def test_evaluate_near_boundary_guard():
    em = exterior_map(ellipse_curve(2.0, 1.0), n=64)
    with pytest.raises(DomainError):
        em.evaluate(0.9)
    # analytic tail decays fast: points moderately close are fine
    assert np.isfinite(em.evaluate(1.05)).all()


def test_correspondence_monotone():
    em = exterior_map(ellipse_curve(2.0, 1.0), n=128)
    assert np.all(np.diff(em.tau) > 0)
    assert em.tau[0] == pytest.approx(0.0, abs=1e-8)


def test_curve_validation():
    bad = JordanCurve(
        parametrization=lambda tau: np.cos(np.asarray(tau)) + 0.5j * np.sin(2 * np.asarray(tau)),
        derivative=lambda tau: -np.sin(np.asarray(tau)) + 1j * np.cos(2 * np.asarray(tau)),
        n_samples=256, label="figure-eight")
    with pytest.raises(DomainError):
        bad.validate()
    clockwise = JordanCurve(
        parametrization=lambda tau: np.exp(-1j * np.asarray(tau)),
        derivative=lambda tau: -1j * np.exp(-1j * np.asarray(tau)),
        n_samples=64)
    with pytest.raises(DomainError):
        clockwise.validate()


def test_non_starshaped_curve_raises_fit_error():
    # a deep nonconvex cardioid-like boundary is not star shaped about its mean
    def w(tau):
        tau = np.asarray(tau)
        r = 1.0 + 0.95 * np.cos(2 * tau)  # pinches to near zero radius
        return r * np.exp(1j * tau) + 2.5 * np.cos(tau)

    def dw(tau):
        tau = np.asarray(tau)
        h = 1e-6
        return (w(tau + h) - w(tau - h)) / (2 * h)

    curve = JordanCurve(parametrization=w, derivative=dw, n_samples=128)
    with pytest.raises((FitError, DomainError)):
        exterior_map(curve, validate=False)


def test_grid_size_contract():
    with pytest.raises(DomainError):
        exterior_map(circle_curve(1.0), n=100)


def test_map_serialization_roundtrip_keys():
    em = exterior_map(circle_curve(1.0), n=64)
    d = em.as_dict()
    for key in ("n", "center", "tau", "capacity", "coeff_lin", "tail",
                "residual_abs", "curve_samples"):
        assert key in d
    assert d["n"] == 64
    assert len(d["tau"]) == 64
