"""Numerical exterior Riemann maps of smooth Jordan curves.

The map g of {|z| > 1} onto the unbounded complement of a curve, normalized
by g(inf) = inf and g'(inf) > 0, is fitted by a Theodorsen-style conjugate
function iteration on a uniform circle grid: writing the boundary
correspondence as g(e^{i theta}) = w(tau(theta)) and centering the curve,
the polar angle of the boundary value must satisfy

    phi(theta) = theta - K[log |w(tau(theta)) - c|](theta),

where K is the circle conjugation operator.  The angle equation is solved
pointwise by a vectorized Newton step at every sweep.  The method assumes
the curve is star shaped about its centroid, which holds for the smooth
near-circles produced by the construction pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import geometry
from .errors import DomainError, FitError, InvalidMapError

_TWO_PI = 2.0 * np.pi


def conjugate_function(samples) -> np.ndarray:
    """Trigonometric conjugate on a uniform theta grid (cos k -> sin k, mean -> 0).

    Grid length must be a power of two; the unmatched Nyquist mode is dropped.
    """
    u = np.asarray(samples, dtype=float)
    n = u.size
    if n < 2 or (n & (n - 1)) != 0:
        raise DomainError(f"conjugate_function needs a power-of-two grid, got {n}")
    if not np.all(np.isfinite(u)):
        raise DomainError("conjugate_function requires finite samples")
    spec = np.fft.rfft(u)
    spec *= -1j
    spec[0] = 0.0
    spec[-1] = 0.0
    return np.fft.irfft(spec, n)


@dataclass(frozen=True)
class JordanCurve:
    """2pi-periodic parametrized curve with derivative evaluators."""

    parametrization: Callable
    derivative: Callable
    second_derivative: Callable | None = None
    n_samples: int = 512
    label: str = ""

    def points(self, n: int | None = None) -> np.ndarray:
        n = self.n_samples if n is None else n
        tau = _TWO_PI * np.arange(n) / n
        return np.asarray(self.parametrization(tau), complex)

    def validate(self, check_simple: bool = True) -> None:
        """Closure, nonvanishing speed, simplicity and positive orientation."""
        if abs(complex(np.asarray(self.parametrization(0.0)).ravel()[0])
               - complex(np.asarray(self.parametrization(_TWO_PI)).ravel()[0])) > 1e-9:
            raise DomainError("curve is not closed: w(0) != w(2 pi)")
        pts = self.points()
        speed = np.abs(np.asarray(self.derivative(_TWO_PI * np.arange(self.n_samples)
                                                  / self.n_samples), complex))
        if speed.min() <= 0.0 or not np.all(np.isfinite(speed)):
            raise DomainError("curve speed |w'(tau)| must be positive everywhere")
        if geometry.winding_number(pts.mean(), pts)[0] != 1:
            raise DomainError("curve must be positively oriented")
        if check_simple and not geometry.polygon_is_simple(pts):
            raise DomainError("curve samples self-intersect; not a Jordan curve")

    def translated(self, v: complex) -> "JordanCurve":
        return JordanCurve(
            parametrization=lambda tau: np.asarray(self.parametrization(tau), complex) + v,
            derivative=self.derivative,
            second_derivative=self.second_derivative,
            n_samples=self.n_samples,
            label=f"{self.label}+shift")


def circle_curve(radius: float, center: complex = 0.0, n_samples: int = 512) -> JordanCurve:
    if radius <= 0:
        raise DomainError("circle radius must be positive")
    return JordanCurve(
        parametrization=lambda tau: center + radius * np.exp(1j * np.asarray(tau)),
        derivative=lambda tau: 1j * radius * np.exp(1j * np.asarray(tau)),
        second_derivative=lambda tau: -radius * np.exp(1j * np.asarray(tau)),
        n_samples=n_samples, label=f"circle(r={radius})")


def ellipse_curve(semi_x: float, semi_y: float, center: complex = 0.0,
                  n_samples: int = 512) -> JordanCurve:
    if semi_x <= 0 or semi_y <= 0:
        raise DomainError("ellipse semi-axes must be positive")
    return JordanCurve(
        parametrization=lambda tau: center + semi_x * np.cos(np.asarray(tau))
        + 1j * semi_y * np.sin(np.asarray(tau)),
        derivative=lambda tau: -semi_x * np.sin(np.asarray(tau))
        + 1j * semi_y * np.cos(np.asarray(tau)),
        second_derivative=lambda tau: -semi_x * np.cos(np.asarray(tau))
        - 1j * semi_y * np.sin(np.asarray(tau)),
        n_samples=n_samples, label=f"ellipse({semi_x},{semi_y})")


@dataclass(frozen=True)
class ExteriorMap:
    """Fitted exterior map: correspondence table plus Laurent data."""

    curve: JordanCurve
    n: int
    center: complex
    tau: np.ndarray            # tau(theta_j) on the uniform theta grid, unwrapped
    capacity: float            # g'(inf) from the zeroth Fourier mode of the log data
    coeff_lin: complex         # fitted coefficient of z
    coeff_const: complex       # fitted constant term
    tail: np.ndarray           # coefficients of z^{-1}, z^{-2}, ...
    residual_abs: float
    residual_rel: float
    diameter: float
    iterations: int

    @property
    def theta(self) -> np.ndarray:
        return _TWO_PI * np.arange(self.n) / self.n

    def correspondence_at(self, theta) -> np.ndarray:
        """tau(theta) at arbitrary angles by trigonometric interpolation."""
        theta = np.atleast_1d(np.asarray(theta, float))
        dev = self.tau - self.theta
        spec = np.fft.fft(dev) / self.n
        k = np.fft.fftfreq(self.n, d=1.0 / self.n)
        vals = (spec[None, :] * np.exp(1j * theta[:, None] * k[None, :])).sum(axis=1)
        return theta + vals.real

    def boundary_value(self, theta=None) -> np.ndarray:
        """g(e^{i theta}) through the boundary correspondence."""
        if theta is None:
            return np.asarray(self.curve.parametrization(self.tau), complex)
        return np.asarray(self.curve.parametrization(self.correspondence_at(theta)), complex)

    def _dtau(self) -> np.ndarray:
        dtau = 1.0 + geometry.spectral_derivative(self.tau - self.theta)
        if dtau.min() <= 0.0:
            raise InvalidMapError("boundary correspondence is not strictly increasing")
        return dtau

    def boundary_derivative(self, theta=None) -> np.ndarray:
        """|g'(e^{i theta})| = |w'(tau(theta))| dtau/dtheta by spectral differentiation."""
        mod = np.abs(np.asarray(self.curve.derivative(self.tau), complex)) * self._dtau()
        if theta is None:
            return mod
        theta = np.atleast_1d(np.asarray(theta, float))
        spec = np.fft.fft(mod) / self.n
        k = np.fft.fftfreq(self.n, d=1.0 / self.n)
        vals = (spec[None, :] * np.exp(1j * theta[:, None] * k[None, :])).sum(axis=1)
        return vals.real

    def boundary_complex_derivative(self, theta=None) -> np.ndarray:
        """g'(e^{i theta}) = -i e^{-i theta} w'(tau(theta)) dtau/dtheta (complex value)."""
        gp = (-1j * np.exp(-1j * self.theta)
              * np.asarray(self.curve.derivative(self.tau), complex) * self._dtau())
        if theta is None:
            return gp
        theta = np.atleast_1d(np.asarray(theta, float))
        # interpolate the periodic quantity e^{i theta} g'(e^{i theta})
        per = np.exp(1j * self.theta) * gp
        spec = np.fft.fft(per) / self.n
        k = np.fft.fftfreq(self.n, d=1.0 / self.n)
        vals = (spec[None, :] * np.exp(1j * theta[:, None] * k[None, :])).sum(axis=1)
        return np.exp(-1j * theta) * vals

    def _tail_guard(self, r: np.ndarray) -> None:
        """Error out when the fitted tail cannot resolve points this close to the circle."""
        k_hi = 3 * self.n // 8
        hi = np.abs(self.tail[k_hi:])
        if hi.size == 0:
            return
        powers = np.float64(np.min(r)) ** -(np.arange(k_hi + 1, self.n // 2))
        est = float(hi @ powers)
        if est > max(10.0 * self.residual_abs, 1e-12 * self.diameter):
            raise DomainError(
                f"point too close to the unit circle for the fitted tail "
                f"(estimated tail error {est:.2e}); use boundary_value instead")

    def evaluate(self, z) -> np.ndarray:
        """g(z) for |z| > 1 from the fitted Laurent series."""
        z = np.asarray(z, dtype=complex)
        r = np.abs(z)
        if np.any(r <= 1.0):
            raise DomainError("exterior evaluation requires |z| > 1")
        self._tail_guard(r)
        u = 1.0 / z
        acc = np.zeros_like(z)
        for c in self.tail[::-1]:
            acc = (acc + c) * u
        return self.coeff_lin * z + self.coeff_const + acc

    def evaluate_derivative(self, z) -> np.ndarray:
        """g'(z) for |z| > 1 from the fitted Laurent series."""
        z = np.asarray(z, dtype=complex)
        r = np.abs(z)
        if np.any(r <= 1.0):
            raise DomainError("exterior evaluation requires |z| > 1")
        self._tail_guard(r)
        u = 1.0 / z
        acc = np.zeros_like(z)
        ks = np.arange(1, self.tail.size + 1)
        for kk, c in zip(ks[::-1], self.tail[::-1]):
            acc = (acc - kk * c) * u
        return self.coeff_lin + acc * u

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "center": [self.center.real, self.center.imag],
            "tau": self.tau.tolist(),
            "capacity": self.capacity,
            "coeff_lin": [self.coeff_lin.real, self.coeff_lin.imag],
            "coeff_const": [self.coeff_const.real, self.coeff_const.imag],
            "tail": [[c.real, c.imag] for c in self.tail],
            "residual_abs": self.residual_abs,
            "residual_rel": self.residual_rel,
            "diameter": self.diameter,
            "iterations": self.iterations,
            "curve_samples": [[p.real, p.imag] for p in self.curve.points()],
        }


def _solve_angles(curve: JordanCurve, center: complex, phi_target: np.ndarray,
                  tau_guess: np.ndarray) -> np.ndarray:
    """Solve arg(w(tau) - center) = phi_target pointwise by Newton.

    Converges to the rounding floor of the angle evaluation, which grows when
    the curve is much smaller than the values it is computed from; a
    stagnation test accepts that floor instead of spinning.
    """
    tau = tau_guess.copy()
    best = np.inf
    stalled = 0
    for _ in range(60):
        w = np.asarray(curve.parametrization(tau), complex) - center
        err = np.angle(w * np.exp(-1j * phi_target))
        worst = float(np.abs(err).max())
        if worst < 1e-13:
            return tau
        if worst >= 0.7 * best:
            stalled += 1
            if stalled >= 3:
                if worst < 1e-9:
                    return tau
                raise FitError("angle solve stalled far from the target; "
                               "curve is badly resolved at this scale")
        else:
            stalled = 0
        best = min(best, worst)
        slope = np.imag(np.asarray(curve.derivative(tau), complex) / w)
        if np.any(slope <= 0.0):
            raise FitError("polar angle not increasing along the curve; "
                           "curve is not star shaped about its centroid")
        tau = tau - err / slope
    raise FitError("angle solve did not converge; refine the curve sampling")


def exterior_map(curve: JordanCurve, tol: float = 1e-8, n: int | None = None,
                 warm_start: np.ndarray | None = None, max_iter: int = 400,
                 validate: bool = True, residual_tol: float | None = None) -> ExteriorMap:
    """Fit the normalized exterior map of a star-shaped smooth Jordan curve.

    warm_start may carry the deviation tau - theta from a previous fit on the
    same grid (continuation along a curve family).  residual_tol (default:
    tol) gates the final boundary mismatch; pass inf to study the raw
    spectral residual at coarse grids.
    """
    n = curve.n_samples if n is None else int(n)
    if n < 8 or (n & (n - 1)) != 0:
        raise DomainError(f"grid size must be a power of two >= 8, got {n}")
    if validate:
        curve.validate()

    theta = _TWO_PI * np.arange(n) / n
    pts = curve.points(n)
    center = complex(pts.mean())
    diam = geometry.curve_diameter(pts)

    dev = warm_start.copy() if warm_start is not None and warm_start.size == n \
        else np.zeros(n)
    tau = theta + dev
    conv_tol = max(tol * _TWO_PI / n, 5e-15)
    omega = 1.0
    last_change = np.inf
    iterations = 0
    for iterations in range(1, max_iter + 1):
        phi = theta + dev - dev.mean()  # target polar angles
        tau = _solve_angles(curve, center, phi, tau)
        u = np.log(np.abs(np.asarray(curve.parametrization(tau), complex) - center))
        v = -conjugate_function(u)
        change = float(np.abs(v - dev).max())
        if change > last_change * 1.05:
            omega = max(0.25, 0.5 * omega)
        dev = dev + omega * (v - dev)
        last_change = change
        if change < conv_tol:
            break
    else:
        raise FitError(
            f"Theodorsen iteration did not reach {conv_tol:.2e} in {max_iter} sweeps "
            f"(last change {last_change:.2e}); increase n or continue from a nearby curve")

    phi = theta + dev - dev.mean()
    tau = _solve_angles(curve, center, phi, tau)
    u = np.log(np.abs(np.asarray(curve.parametrization(tau), complex) - center))
    capacity = float(np.exp(u.mean()))

    # unwrapped correspondence with periodic deviation from theta
    tau = np.unwrap(tau)
    tau = tau - _TWO_PI * np.round((tau - theta).mean() / _TWO_PI)
    if np.any(np.diff(tau) <= 0.0):
        raise InvalidMapError("fitted correspondence is not strictly increasing")

    boundary = np.asarray(curve.parametrization(tau), complex)
    spec = np.fft.fft(boundary) / n
    k = np.fft.fftfreq(n, d=1.0 / n).astype(int)
    coeff_lin = complex(spec[k == 1][0])
    coeff_const = complex(spec[k == 0][0])
    n_tail = n // 2 - 1
    tail = np.array([spec[k == -j][0] for j in range(1, n_tail + 1)], complex)

    # residual: energy of the non-exterior modes, evaluated on the grid
    bad = (k >= 2) | (k == -(n // 2)) if n % 2 == 0 else (k >= 2)
    spec_bad = np.where(bad, spec, 0.0)
    mismatch = np.fft.ifft(spec_bad * n)
    residual_abs = float(np.abs(mismatch).max())
    residual_rel = residual_abs / diam
    residual_gate = tol if residual_tol is None else residual_tol
    if residual_rel > residual_gate:
        raise FitError(
            f"boundary residual {residual_rel:.2e} above tol {residual_gate:.2e}; "
            f"increase the grid size n={n}")

    emap = ExteriorMap(curve=curve, n=n, center=center, tau=tau, capacity=capacity,
                       coeff_lin=coeff_lin, coeff_const=coeff_const, tail=tail,
                       residual_abs=residual_abs, residual_rel=residual_rel,
                       diameter=diam, iterations=iterations)
    if not (emap.capacity > 0.0):
        raise InvalidMapError("fitted capacity must be positive")
    return emap
