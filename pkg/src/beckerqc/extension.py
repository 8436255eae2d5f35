"""Explicit quasiconformal extensions and their Wirtinger calculus.

The Ahlfors-Weill/Becker extension G of g_0(z) = 1/f(1/z) is evaluated in
the Sigma picture throughout: with u = conj(z), s = 1 - |z|^2 and the tail
series Pt(u) = P_{g0}(1/u)/u^3, the value on the closed disk is the
singularity-free regrouping

    G(z) = [ z + s u Pt(u)/2 + (b_0 + sum_j b_j u^j) D + s sum_j j b_j u^j ] / D,
    D    = 1 + s u^2 Pt(u) / 2,

which agrees with g_0(z) on |z| = 1 term by term.  The closed Wirtinger
derivatives are

    dG = g_0'(1/u) / D^2,      dbarG = -(1/2) s^2 S_f(u) g_0'(1/u) / D^2,

so the Beltrami coefficient is mu_G(z) = -(1/2)(1-|z|^2)^2 S_f(conj z): its
modulus is exactly half the weighted Schwarzian, which is what caps the
dilatation at three times the certified q.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial import polynomial as npoly

from .analytic import SchlichtFunction, SigmaFunction
from .errors import DomainError, ExtensionError, SingularityError
from .loewner import LoewnerChain


@dataclass(frozen=True)
class PlaneMap:
    """Pointwise map of a plane region with optional closed-form Wirtinger data."""

    evaluator: Callable
    d: Callable | None = None      # z-Wirtinger derivative
    dbar: Callable | None = None   # conj(z)-Wirtinger derivative
    domain: str = "plane"          # disk | exterior | plane
    label: str = ""

    def __call__(self, z):
        return self.evaluator(z)

    @property
    def has_analytic_wirtinger(self) -> bool:
        return self.d is not None and self.dbar is not None


@dataclass(frozen=True)
class BeltramiSample:
    point: complex
    mu: complex
    dilatation: float
    jacobian: float


def identity_map() -> PlaneMap:
    one = lambda z: np.ones_like(np.asarray(z, complex))
    zero = lambda z: np.zeros_like(np.asarray(z, complex))
    return PlaneMap(evaluator=lambda z: np.asarray(z, complex), d=one, dbar=zero,
                    label="id")


def _tail_arrays(g0: SigmaFunction):
    ts = g0.tail_series
    return ts["gp"], ts["pre"][3:]  # g'(1/u) series and Pt(u) = P(1/u)/u^3 series


def aw_extension_value(f: SchlichtFunction, z, g0: SigmaFunction | None = None):
    """G(z): the plane extension value, g_0 outside and the regrouped form inside."""
    g0 = f.to_sigma() if g0 is None else g0
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    out = np.empty_like(z)
    inside = np.abs(z) <= 1.0
    if np.any(~inside):
        out[~inside] = g0.eval(z[~inside])
    if np.any(inside):
        zi = z[inside]
        u = np.conj(zi)
        s = 1.0 - np.abs(zi) ** 2
        gp_s, pt_s = _tail_arrays(g0)
        b = g0.b
        j = np.arange(b.size, dtype=float)
        pt = npoly.polyval(u, pt_s)
        dd = 1.0 + 0.5 * s * u * u * pt
        if np.any(np.abs(dd) < 1e-13):
            raise ExtensionError("extension denominator degenerate; "
                                 "input outside the admissible dilatation regime")
        btail = npoly.polyval(u, b)          # b_0 + b_1 u + ...
        btail_w = npoly.polyval(u, j * b)    # sum j b_j u^j
        out[inside] = (zi + 0.5 * s * u * pt + btail * dd + s * btail_w) / dd
    return complex(out[0]) if scalar else out


def aw_extension_wirtinger(f: SchlichtFunction, z, g0: SigmaFunction | None = None):
    """Closed-form (dG, dbarG); dbarG vanishes identically outside the disk."""
    g0 = f.to_sigma() if g0 is None else g0
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    d_out = np.empty_like(z)
    db_out = np.zeros_like(z)
    inside = np.abs(z) < 1.0
    if np.any(~inside):
        d_out[~inside] = g0.eval(z[~inside], 1)
    if np.any(inside):
        zi = z[inside]
        u = np.conj(zi)
        s = 1.0 - np.abs(zi) ** 2
        gp_s, pt_s = _tail_arrays(g0)
        gp = npoly.polyval(u, gp_s)
        dd = 1.0 + 0.5 * s * u * u * npoly.polyval(u, pt_s)
        if np.any(np.abs(dd) < 1e-13):
            raise ExtensionError("extension denominator degenerate")
        d_out[inside] = gp / (dd * dd)
        db_out[inside] = -0.5 * s * s * f.schwarzian(u) * gp / (dd * dd)
    if scalar:
        return complex(d_out[0]), complex(db_out[0])
    return d_out, db_out


def ahlfors_weill_extension(f: SchlichtFunction, q: float | None = None) -> PlaneMap:
    """The extension as a PlaneMap with analytic Wirtinger evaluators.

    q is only used as a sanity gate: it must keep the dilatation 3q below 1.
    """
    if q is not None and not (0.0 < q < 1.0 / 3.0):
        raise DomainError(f"q must lie in (0, 1/3), got {q}")
    g0 = f.to_sigma()
    return PlaneMap(
        evaluator=lambda z: aw_extension_value(f, z, g0),
        d=lambda z: aw_extension_wirtinger(f, z, g0)[0],
        dbar=lambda z: aw_extension_wirtinger(f, z, g0)[1],
        domain="plane",
        label=f"G[{f.label}]")


def aw_gt_value(f: SchlichtFunction, w, t: float):
    """g_t(w) of the extension chain, |w| >= 1, via the f-picture formula.

    1/g_t(w) = f(e^{-t}/w) + (1-e^{-2t}) f'(e^{-t}/w)
               / (e^{-t} w - (1/2)(1-e^{-2t}) P_f(e^{-t}/w)).
    """
    if t < 0:
        raise DomainError("chain times are nonnegative")
    w = np.asarray(w, dtype=complex)
    scalar = w.ndim == 0
    w = np.atleast_1d(w)
    if np.any(np.abs(w) < 1.0 - 1e-12):
        raise DomainError("aw_gt_value requires |w| >= 1")
    arg = np.exp(-t) / w
    fp = f.eval(arg, 1)
    den = np.exp(-t) * w - 0.5 * (1.0 - np.exp(-2.0 * t)) * f.pre_schwarzian(arg)
    if np.any(np.abs(den) < 1e-13):
        raise ExtensionError(
            "extension-chain denominator vanished; dilatation regime exceeded")
    inv = f.eval(arg) + (1.0 - np.exp(-2.0 * t)) * fp / den
    if np.any(np.abs(inv) < 1e-300):
        raise SingularityError("g_t(w) is unbounded at a finite w")
    out = 1.0 / inv
    return complex(out[0]) if scalar else out


def aw_chain(f: SchlichtFunction) -> LoewnerChain:
    """Disk chain f_t(zeta) = 1/g_t(1/zeta) of the extension family.

    Valid while the origin stays enclosed by the level curves, which covers
    t up to the capture horizon used by the construction.  The z-derivative
    is a central complex difference of the holomorphic chain element.
    """
    from .loewner import aw_herglotz_field

    g0 = f.to_sigma()

    def ev(zeta, t):
        zeta = np.asarray(zeta, dtype=complex)
        scalar = zeta.ndim == 0
        zeta = np.atleast_1d(zeta)
        out = np.zeros_like(zeta)
        nz = np.abs(zeta) > 1e-300
        if np.any(nz):
            if t < 1e-14:
                # at t = 0 the chain element is f itself; the Sigma series
                # stays evaluable on the unit circle where f.eval does not
                gt = g0.eval(1.0 / zeta[nz])
            else:
                gt = aw_gt_value(f, 1.0 / zeta[nz], t)
            if np.any(np.abs(gt) < 1e-300):
                raise ExtensionError("chain hit the omitted origin; t beyond capture horizon")
            out[nz] = 1.0 / gt
        return complex(out[0]) if scalar else out

    def dv(zeta, t, h=1e-5):
        return (ev(np.asarray(zeta, complex) + h, t)
                - ev(np.asarray(zeta, complex) - h, t)) / (2.0 * h)

    return LoewnerChain(evaluator=ev, derivative=dv,
                        center_derivative=lambda t: complex(np.exp(t)),
                        herglotz=aw_herglotz_field(f), label=f"aw-chain[{f.label}]")


def becker_extension(chain: LoewnerChain, z, boundary_nudge: float = 0.0):
    """Extension value F(z): f_0(z) inside, f_{log|z|}(z/|z|) on and outside the circle."""
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    out = np.empty_like(z)
    r = np.abs(z)
    inside = r < 1.0
    nudge = 1.0 - boundary_nudge
    if np.any(inside):
        out[inside] = chain(z[inside], 0.0)
    for idx in np.nonzero(~inside)[0]:
        rho = r[idx]
        out[idx] = np.asarray(chain(nudge * z[idx] / rho, float(np.log(rho)))).ravel()[0]
    return complex(out[0]) if scalar else out


def wirtinger(plane_map: PlaneMap, z, mode: str = "analytic",
              step: float = 1e-5):
    """(d, dbar) of a plane map, analytic when available or Richardson differences."""
    if mode not in ("analytic", "finite-difference"):
        raise DomainError(f"unknown wirtinger mode {mode!r}")
    z = np.asarray(z, dtype=complex)
    if mode == "analytic":
        if not plane_map.has_analytic_wirtinger:
            raise DomainError("map carries no closed-form Wirtinger evaluators")
        return plane_map.d(z), plane_map.dbar(z)

    def stencil(h):
        fx = (plane_map(z + h) - plane_map(z - h)) / (2.0 * h)
        fy = (plane_map(z + 1j * h) - plane_map(z - 1j * h)) / (2.0 * h)
        return 0.5 * (fx - 1j * fy), 0.5 * (fx + 1j * fy)

    h = step * np.maximum(1.0, np.abs(z))
    d1, db1 = stencil(h)
    d2, db2 = stencil(h / 2.0)
    return (4.0 * d2 - d1) / 3.0, (4.0 * db2 - db1) / 3.0


def beltrami(plane_map: PlaneMap, z) -> BeltramiSample:
    """Beltrami coefficient, dilatation and Jacobian at one point."""
    mode = "analytic" if plane_map.has_analytic_wirtinger else "finite-difference"
    d, db = wirtinger(plane_map, z, mode=mode)
    d, db = complex(np.asarray(d).ravel()[0]), complex(np.asarray(db).ravel()[0])
    if abs(d) < 1e-14:
        raise SingularityError("dG vanished; Beltrami coefficient undefined here")
    mu = db / d
    return BeltramiSample(point=complex(z), mu=mu, dilatation=abs(mu),
                          jacobian=abs(d) ** 2 - abs(db) ** 2)


def dilatation_sweep(plane_map: PlaneMap, points) -> dict:
    """Vectorized (mu, J) over a point set; returns arrays plus the sup dilatation."""
    points = np.asarray(points, dtype=complex)
    d, db = plane_map.d(points), plane_map.dbar(points)
    if np.any(np.abs(d) < 1e-14):
        raise SingularityError("dG vanished inside the sweep")
    mu = db / d
    jac = np.abs(d) ** 2 - np.abs(db) ** 2
    return {"points": points, "mu": mu, "jacobian": jac,
            "max_dilatation": float(np.abs(mu).max()),
            "min_jacobian": float(jac.min())}


@dataclass(frozen=True)
class BoundsReport:
    """Outcome of a sampled inequality sweep: slack >= 0 everywhere means pass."""

    name: str
    n_points: int
    n_violations: int
    min_slack: float
    details: dict

    @property
    def ok(self) -> bool:
        return self.n_violations == 0


def _scaled_state(f: SchlichtFunction, q: float, grid_points):
    import math

    if not (0.0 < q < 1.0 / 3.0):
        raise DomainError(f"q must lie in (0, 1/3), got {q}")
    z = np.asarray(grid_points, dtype=complex)
    if z.size == 0:
        raise DomainError("empty grid")
    if np.any(np.abs(z) > 1.0 + 1e-12):
        raise DomainError("grid must stay in the closed unit disk")
    k = 3.0 * q
    t0 = -0.5 * math.log(k)
    g0 = f.to_sigma()
    scale = math.exp(-t0)
    d, db = aw_extension_wirtinger(f, scale * z, g0)
    return k, t0, scale, scale * d, scale * db


def derivative_bounds_report(f: SchlichtFunction, q: float, grid_points) -> BoundsReport:
    """First-order sandwich for F(z) = G(e^{-t0} z) on the closed disk.

    Checks |dF|, the directional extremes |dF| -+ |dbarF| and the Jacobian
    against their closed-form two-sided bounds in q.
    """
    k, t0, scale, dF, dbF = _scaled_state(f, q, grid_points)
    adF, adbF = np.abs(dF), np.abs(dbF)
    jac = adF ** 2 - adbF ** 2
    e = np.exp(-t0)

    rows = {
        "dF_lower": adF - e * (1 - k) ** q / (1 + k * k) ** 2,
        "dF_upper": e / ((1 - k * k) ** 2 * (1 - k) ** q) - adF,
        "Dmin_lower": (adF - adbF) - e * (1 - k) ** (1 + q) / (1 + k * k) ** 2,
        "Dmax_upper": e / ((1 - k * k) * (1 - k) ** (1 + q)) - (adF + adbF),
        "jac_lower": jac - k * (1 - k * k) * (1 - k) ** (2 * q) / (1 + k * k) ** 4,
        "jac_upper": k / ((1 - k * k) ** 4 * (1 - k) ** (2 * q)) - jac,
        "dilatation": k * adF - adbF,
    }
    tol = 1e-10 * e
    n_bad = int(sum(int((s < -tol).sum()) for s in rows.values()))
    return BoundsReport(
        name="first-derivative sandwich",
        n_points=int(np.asarray(grid_points).size),
        n_violations=n_bad,
        min_slack=float(min(s.min() for s in rows.values())),
        details={key: float(s.min()) for key, s in rows.items()})


def second_derivative_bounds_report(f: SchlichtFunction, q: float, grid_points,
                                    step: float = 1e-5) -> BoundsReport:
    """Second-order bounds: max second Wirtinger derivative <= M(q)|dF| and
    |dJ_F| <= 4 M(q) |dF|^2, with derivatives of the analytic first-order fields
    taken by central differences."""
    from .constants import second_derivative_coefficient

    k, t0, scale, _, _ = _scaled_state(f, q, grid_points)
    z = np.asarray(grid_points, dtype=complex)
    if np.any(np.abs(z) > 1.0 - 3.0 * step):
        raise DomainError("grid must keep a margin of 3*step inside the closed disk "
                          "for the difference stencils")
    g0 = f.to_sigma()

    def fields(zz):
        d, db = aw_extension_wirtinger(f, scale * zz, g0)
        return scale * d, scale * db

    def wirt_of(field_index, zz, h):
        def at(p):
            return fields(p)[field_index]

        fx = (at(zz + h) - at(zz - h)) / (2.0 * h)
        fy = (at(zz + 1j * h) - at(zz - 1j * h)) / (2.0 * h)
        return 0.5 * (fx - 1j * fy), 0.5 * (fx + 1j * fy)

    dF, dbF = fields(z)
    d2F, dbdF = wirt_of(0, z, step)
    ddbF, db2F = wirt_of(1, z, step)
    jac = np.abs(dF) ** 2 - np.abs(dbF) ** 2

    def jac_at(p):
        a, b = fields(p)
        return np.abs(a) ** 2 - np.abs(b) ** 2

    jx = (jac_at(z + step) - jac_at(z - step)) / (2.0 * step)
    jy = (jac_at(z + 1j * step) - jac_at(z - 1j * step)) / (2.0 * step)
    dJ = 0.5 * (jx - 1j * jy)

    m = second_derivative_coefficient(q)
    second_max = np.maximum.reduce([np.abs(d2F), np.abs(db2F),
                                    np.abs(dbdF), np.abs(ddbF)])
    rows = {
        "second_vs_MdF": m * np.abs(dF) - second_max,
        "dJ_vs_4MdF2": 4.0 * m * np.abs(dF) ** 2 - np.abs(dJ),
        "mixed_symmetry": 1e-6 * np.abs(dF) - np.abs(dbdF - ddbF),
    }
    tol = 1e-8 * float(np.abs(dF).max())
    n_bad = int(sum(int((s < -tol).sum()) for s in rows.values()))
    return BoundsReport(
        name="second-derivative bounds",
        n_points=int(z.size),
        n_violations=n_bad,
        min_slack=float(min(s.min() for s in rows.values())),
        details={key: float(s.min()) for key, s in rows.items()})
