"""Radial Loewner-Kufarev evolution: ODE trajectories, chains and driving terms.

The initial value problem dw/dt = -w p(w,t), w(s) = z is integrated with an
adaptive embedded Runge-Kutta pair (scipy's DOP853) on the real/imaginary
split of the state.  Chains are recovered from the classical limit
f_s(z) = lim_t w(z;s,t)/w'(0;0,t), certified by a Cauchy difference between
consecutive integer horizons.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import solve_ivp

from .analytic import SchlichtFunction
from .errors import (BeckerViolationError, DomainError, HorizonError,
                     IntegrationError)

_HORIZON_TOL = 1e-8


@dataclass(frozen=True)
class HerglotzField:
    """Driving term p(z, t), holomorphic in z with Re p >= 0 for each t."""

    evaluator: Callable
    normalized: bool = True  # Re p(0, t) = 1 (all built-in fields satisfy it)
    label: str = ""

    def __call__(self, z, t):
        return self.evaluator(z, t)


@dataclass(frozen=True)
class LoewnerChain:
    """Family f_t with f_t(0) = 0; evaluator/derivative are (z, t) -> value."""

    evaluator: Callable
    derivative: Callable
    center_derivative: Callable  # t -> f_t'(0)
    herglotz: HerglotzField | None = None
    label: str = ""

    def __call__(self, z, t):
        return self.evaluator(z, t)


def constant_field(value: complex = 1.0) -> HerglotzField:
    """p identically equal to a constant with nonnegative real part."""
    if np.real(value) < 0:
        raise DomainError("a Herglotz constant needs Re >= 0")
    return HerglotzField(lambda z, t: np.full_like(np.asarray(z, complex), value),
                         normalized=(np.real(value) == 1.0), label=f"const({value})")


def slit_field() -> HerglotzField:
    """p(w) = (1-w)/(1+w): drives the single-slit chain e^t z/(1-z)^2."""
    return HerglotzField(lambda z, t: (1.0 - np.asarray(z, complex)) / (1.0 + np.asarray(z, complex)),
                         normalized=True, label="slit")


def _integrate(p: HerglotzField, z0: np.ndarray, s: float, t: float, tol: float,
               with_center: bool = False) -> tuple[np.ndarray, complex]:
    """Integrate the trajectories from time s to t; optionally the center derivative."""
    z0 = np.atleast_1d(np.asarray(z0, dtype=complex))
    m = z0.size

    def rhs(tt, y):
        w = y[:m] + 1j * y[m : 2 * m]
        dw = -w * p(w, tt)
        out = np.concatenate([dw.real, dw.imag])
        if with_center:
            v = y[2 * m] + 1j * y[2 * m + 1]
            dv = -p(0.0 + 0.0j, tt) * v
            out = np.concatenate([out, [np.real(dv), np.imag(dv)]])
        return out

    y0 = np.concatenate([z0.real, z0.imag] + ([np.array([1.0, 0.0])] if with_center else []))
    sol = solve_ivp(rhs, (s, t), y0, method="DOP853",
                    rtol=min(tol, 1e-8) / 10, atol=tol / 100, dense_output=False)
    if not sol.success:
        w_last = sol.y[:m, -1] + 1j * sol.y[m : 2 * m, -1]
        raise IntegrationError(f"Loewner ODE integration failed: {sol.message}",
                               last_state=(sol.t[-1], w_last))
    y = sol.y[:, -1]
    w = y[:m] + 1j * y[m : 2 * m]
    v = (y[2 * m] + 1j * y[2 * m + 1]) if with_center else None
    return w, v


def solve_lk_ode(p: HerglotzField, z, s: float, t: float, tol: float = 1e-10):
    """Trajectory w(z; s, t) of dw/dt = -w p(w, t) started at w(s) = z."""
    if not (0.0 <= s <= t):
        raise DomainError(f"need 0 <= s <= t, got s={s}, t={t}")
    z_arr = np.atleast_1d(np.asarray(z, dtype=complex))
    if np.any(np.abs(z_arr) >= 1.0):
        raise DomainError("Loewner trajectories start inside the unit disk")
    if t == s:
        return z if np.ndim(z) else complex(z_arr[0])
    w, _ = _integrate(p, z_arr, s, t, tol)
    return w if np.ndim(z) else complex(w[0])


def _center_derivative(p: HerglotzField, t: float, tol: float) -> complex:
    """w'(0; 0, t) = exp(-int_0^t p(0, u) du)."""
    if p.normalized:
        p00 = complex(np.asarray(p(0.0 + 0.0j, 0.0)).ravel()[0])
        if abs(p00 - 1.0) < 1e-13:
            return complex(np.exp(-t))
    _, v = _integrate(p, np.array([0.0 + 0.0j]), 0.0, t, tol, with_center=True)
    return complex(v)


def chain_from_herglotz(p: HerglotzField, s: float, z, t_max: float = 24.0,
                        tol: float = 1e-10):
    """Chain element f_s(z) = lim_t w(z;s,t)/w'(0;0,t) at horizon t_max.

    The rescaled variable y = w/w'(0;0,t) is integrated directly, so the
    state stays O(1) all the way to the horizon:
        dy/dt = y (p(0,t) - p(w,t)),   w = y w'(0;0,t).
    Two consecutive integer horizons must agree to 1e-8 (Cauchy certificate),
    otherwise a HorizonError carrying the tail sequence is raised.
    """
    z_arr = np.atleast_1d(np.asarray(z, dtype=complex))
    if np.any(np.abs(z_arr) >= 1.0):
        raise DomainError("chain evaluation requires |z| < 1")
    if s < 0:
        raise DomainError("chain times are nonnegative")
    m = z_arr.size

    def rhs(tt, y):
        yy = y[:m] + 1j * y[m : 2 * m]
        logv = y[2 * m] + 1j * y[2 * m + 1]
        p0 = complex(np.asarray(p(0.0 + 0.0j, tt)).ravel()[0])
        w = yy * np.exp(logv)
        dy = yy * (p0 - p(w, tt))
        return np.concatenate([dy.real, dy.imag, [-p0.real, -p0.imag]])

    logv_s = np.log(_center_derivative(p, s, tol)) if s > 0 else 0.0 + 0.0j
    y0 = np.concatenate([(z_arr / np.exp(logv_s)).real,
                         (z_arr / np.exp(logv_s)).imag,
                         [logv_s.real, logv_s.imag]])
    t_mid = max(t_max - 1.0, s + 1.0)
    sol = solve_ivp(rhs, (s, t_max), y0, method="DOP853", t_eval=[t_mid, t_max],
                    rtol=min(tol, 1e-8) / 10, atol=tol / 100)
    if not sol.success:
        raise IntegrationError(f"chain integration failed: {sol.message}")
    vals = [sol.y[:m, i] + 1j * sol.y[m : 2 * m, i] for i in range(sol.y.shape[1])]
    gap = float(np.abs(vals[-1] - vals[-2]).max())
    if gap >= _HORIZON_TOL:
        raise HorizonError(
            f"chain limit not Cauchy at horizon {t_max}: gap {gap:.3e}",
            diagnostics=vals)
    out = vals[-1]
    return out if np.ndim(z) else complex(out[0])


def numerical_chain(p: HerglotzField, t_max: float = 24.0, tol: float = 1e-10,
                    dz: float = 1e-5) -> LoewnerChain:
    """Wrap the limit construction as a LoewnerChain (derivative by central step)."""

    def ev(z, t):
        return chain_from_herglotz(p, t, z, t_max=t_max, tol=tol)

    def dv(z, t):
        return (ev(np.asarray(z, complex) + dz, t) - ev(np.asarray(z, complex) - dz, t)) / (2 * dz)

    def cd(t):
        # f_t'(0) = 1/w'(0;0,t), which is e^t for normalized fields
        return 1.0 / _center_derivative(p, float(t), tol)

    return LoewnerChain(evaluator=ev, derivative=dv, center_derivative=cd,
                        herglotz=p, label=f"chain[{p.label}]")


def scaling_chain() -> LoewnerChain:
    """Closed form of the p == 1 chain: f_t(z) = e^t z."""
    return LoewnerChain(
        evaluator=lambda z, t: np.exp(t) * np.asarray(z, complex),
        derivative=lambda z, t: np.exp(t) * np.ones_like(np.asarray(z, complex)),
        center_derivative=lambda t: complex(np.exp(t)),
        herglotz=constant_field(1.0),
        label="scaling")


def pde_residual(chain: LoewnerChain, p: HerglotzField, z, t: float,
                 h: float = 1e-4) -> float:
    """|d f_t(z)/dt - z f_t'(z) p(z,t)| with a central t-difference of step h."""
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) > 0.99):
        raise DomainError("pde_residual is checked on |z| <= 0.99")
    tdot = (np.asarray(chain(z, t + h)) - np.asarray(chain(z, t - h))) / (2.0 * h)
    rhs = z * np.asarray(chain.derivative(z, t)) * np.asarray(p(z, t))
    return float(np.abs(tdot - rhs).max())


def aw_herglotz(f: SchlichtFunction, z, t: float):
    """Driving term of the Ahlfors-Weill chain of f.

    Solves (1 - p)/(1 + p) = (1/2) z^2 (1 - e^{-2t})^2 S_f(e^{-t} z) for p.
    Raises BeckerViolationError when the right-hand side leaves the unit disk
    (numerically signals that f is outside the admissible dilatation regime).
    """
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) >= 1.0):
        raise DomainError("aw_herglotz requires |z| < 1")
    if t < 0:
        raise DomainError("aw_herglotz requires t >= 0")
    damp = 1.0 - np.exp(-2.0 * t)
    s = 0.5 * z * z * damp * damp * f.schwarzian(np.exp(-t) * z)
    if np.any(np.abs(s) >= 1.0):
        raise BeckerViolationError(
            "Becker condition violated: |(1-p)/(1+p)| >= 1 on the sample set")
    out = (1.0 - s) / (1.0 + s)
    return out if z.ndim else complex(out)


def aw_herglotz_field(f: SchlichtFunction) -> HerglotzField:
    return HerglotzField(lambda z, t: aw_herglotz(f, z, t), normalized=True,
                         label=f"aw[{f.label}]")


def becker_radius(p_values) -> float:
    """sup |(p-1)/(p+1)| over the samples: radius of the Becker disk actually used."""
    p_values = np.asarray(p_values, dtype=complex)
    return float(np.abs((p_values - 1.0) / (p_values + 1.0)).max())
