"""Closed-form constants of the extension construction, as functions of q.

Every quantity here is an explicit function of q in (0, 1/3) with k = 3q.
The assembled forms (subharmonic exponent, curvature coefficients, tangent
disk radius) are frozen once; docs/derivations.md records how each one is
put together from the elementary dilatation and derivative bounds.
Constants that are only *measured* by a construction run (front-distance
floor, capacity prefactors, final chain radius) are deliberately absent:
the run report carries them, flagged as measured.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict

from .errors import DomainError


def _check_q(q: float) -> float:
    q = float(q)
    if not (0.0 < q < 1.0 / 3.0):
        raise DomainError(f"q must lie in (0, 1/3), got {q}")
    return q


def core_times(q: float) -> tuple[float, float]:
    """(t_*, t_0) = (-log 3q, -log(3q)/2): origin-capture horizon and its half."""
    q = _check_q(q)
    t_star = -math.log(3.0 * q)
    return t_star, 0.5 * t_star


def schedule_times(z0: complex, t0: float) -> tuple[float, float]:
    """Scheduled times (t_1, t_2) of the recentered family for a given z0.

    t_1 is where the recentering Moebius map preserves the matching circle;
    t_2 is the first time the swept circle fits inside the unit disk after
    recentering.  Always t_0 <= t_2 <= t_1.
    """
    a = abs(z0)
    if a > 1.0:
        raise DomainError(f"|z0| = {a} must not exceed 1")
    t1 = t0 + 0.5 * math.log(2.0 / (1.0 + a * a))
    t2 = t0 + math.log((1.0 + a) / (1.0 + a * a))
    return t1, t2


def dist_annulus(k: float, R: float) -> tuple[float, float]:
    """Boundary-distance sandwich (d1, d2) for normalized k-q.c. exterior maps at |z| = R."""
    if not (R > 1.0):
        raise DomainError(f"R must exceed 1, got {R}")
    if not (0.0 <= k < 1.0):
        raise DomainError(f"k must lie in [0,1), got {k}")
    d1 = 0.25 * R ** (-2.0 * k) * (R - 1.0) ** (1.0 + k) * (R + 1.0) ** k
    d2 = 4.0 * R ** (2.0 * k) * (R - 1.0) ** (1.0 - k) * (R + 1.0) ** (-k)
    return d1, d2


def second_derivative_coefficient(q: float) -> float:
    """M(q) = 2k^2/(1-k)^2 + 8k^{3/2}/(1-k): second-Wirtinger/first-Wirtinger ratio bound."""
    q = _check_q(q)
    k = 3.0 * q
    return 2.0 * k * k / (1.0 - k) ** 2 + 8.0 * k ** 1.5 / (1.0 - k)


def laplacian_coefficient(q: float) -> float:
    """M1(q) = M(q)/(1-k^2)^2 * (1 + 8/(1-k^2)): bound driver for |Laplacian of the inverse|."""
    q = _check_q(q)
    k = 3.0 * q
    m = second_derivative_coefficient(q)
    return m / (1.0 - k * k) ** 2 * (1.0 + 8.0 / (1.0 - k * k))


def front_distance_coefficient(q: float) -> float:
    """M2(q) = 1/((1-k)^{1+q} (1-sqrt k)^4): Hausdorff speed bound of the curve fronts."""
    q = _check_q(q)
    k = 3.0 * q
    return 1.0 / ((1.0 - k) ** (1.0 + q) * (1.0 - math.sqrt(k)) ** 4)


def henkin_alpha(k: float) -> float:
    """alpha(k) = 1/(3^{1+k} 8^{K+1}) with K = (1+k)/(1-k): inner-annulus margin."""
    if not (0.0 <= k < 1.0):
        raise DomainError(f"k must lie in [0,1), got {k}")
    K = (1.0 + k) / (1.0 - k)
    return 1.0 / (3.0 ** (1.0 + k) * 8.0 ** (K + 1.0))


def subharmonic_exponent(q: float) -> float:
    """Exponent a(q) making |Psi^{-1}(w)|^{-a} subharmonic off the marked point.

    Frozen assembly (see docs/derivations.md): a(q) bounds
    Laplacian(u)/|grad u|^2 for u = log|T^{-1}(F^{-1}(w))| via
      - |eta''|/|eta'|^2 <= 8/(1-k) and dilatation |mu| <= k,
      - the Laplacian bound M1(q)/((1-k) |dF|^4),
      - |eta'| >= (1-sqrt k)/(1+sqrt k)^2,
      - |dH|^2 >= 1/J_F with the Jacobian ceiling k/((1-k^2)^4 (1-k)^{2q}),
      - the floor |dF| >= e^{-t0}(1-k)^q/(1+k^2)^2 and e^{t0} = k^{-1/2}.
    """
    q = _check_q(q)
    k = 3.0 * q
    sk = math.sqrt(k)
    m1 = laplacian_coefficient(q)
    term1 = (m1 * (1.0 + sk) ** 2 * (1.0 + k * k) ** 8
             / (k * (1.0 - sk) * (1.0 - k) ** (5.0 + 6.0 * q) * (1.0 + k) ** 4))
    term2 = 32.0 * k / (1.0 - k)
    return (term1 + term2) / (1.0 - k) ** 2


def curvature_coefficients(q: float) -> tuple[float, float]:
    """(M5, M6) with curvature of the swept curves bounded by M5 e^t + M6."""
    q = _check_q(q)
    k = 3.0 * q
    m = second_derivative_coefficient(q)
    m5 = (1.0 + k * k) ** 2 * (1.0 + k) ** 2 / (1.0 - k) ** (3.0 + q)
    m6 = 4.0 * m * (1.0 + k * k) ** 2 / (math.sqrt(k) * (1.0 - k) ** (2.0 + q))
    return m5, m6


def curvature_bound(q: float, t: float) -> float:
    """kappa_0(q, t) = M5(q) e^t + M6(q)."""
    m5, m6 = curvature_coefficients(q)
    return m5 * math.exp(t) + m6


def convexity_radius(q: float) -> float:
    """rho_1(q) = (1-k)^2/(4(1+k) M(q)): preimage radius keeping tangent domains convex."""
    q = _check_q(q)
    k = 3.0 * q
    return (1.0 - k) ** 2 / (4.0 * (1.0 + k) * second_derivative_coefficient(q))


def clearance_radius(q: float) -> float:
    """rho_2(q) = 1 - sqrt((1+3q)/2): guaranteed gap between the matching circle and the unit circle."""
    q = _check_q(q)
    return 1.0 - math.sqrt((1.0 + 3.0 * q) / 2.0)


def tangent_disk_curvature(q: float) -> float:
    """kappa_*(q): curvature ceiling of the image of the tangent preimage disk."""
    q = _check_q(q)
    k = 3.0 * q
    rho0 = min(convexity_radius(q), clearance_radius(q))
    K = (1.0 + k) / (1.0 - k)
    m = second_derivative_coefficient(q)
    return ((1.0 + k * k) ** 2 / (math.sqrt(k) * (1.0 - k) ** (1.0 + q))
            * (K / rho0 + 4.0 * m / (1.0 - k)))


def tangent_disk_radius(q: float) -> float:
    """eps_0(q) = 1/kappa_*(q): radius of outside-tangent disks along every swept curve."""
    return 1.0 / tangent_disk_curvature(q)


def henkin_lower_bound(u0: float, R: float, grad_norm: float) -> float:
    """-4 u0 / (pi (R-1) grad_norm): boundary derivative floor from a subharmonic barrier."""
    if not (u0 < 0.0):
        raise DomainError(f"u0 must be negative, got {u0}")
    if not (R > 1.0):
        raise DomainError(f"R must exceed 1, got {R}")
    if not (grad_norm > 0.0):
        raise DomainError(f"grad_norm must be positive, got {grad_norm}")
    return -4.0 * u0 / (math.pi * (R - 1.0) * grad_norm)


def angular_derivative_bound(eps: float, k: float) -> float:
    """Mcal(eps, k) = 2 pi eps / log R with d2(k, R) = (1 - 1/sqrt 2) eps.

    The root is unique because R -> d2(k, R) increases strictly from 0 onto
    [0, inf).  It is bisected in log(R-1) to relative accuracy 1e-12, which
    keeps roots with R-1 near the underflow floor resolvable; when R - 1
    drops below double range entirely the bound overflows and +inf is
    returned (the explosion at eps -> 0 for k near 1 is genuine).
    """
    eps = float(eps)
    k = float(k)
    if not (eps > 0.0):
        raise DomainError(f"eps must be positive, got {eps}")
    if not (0.0 <= k < 1.0):
        raise DomainError(f"k must lie in [0,1), got {k}")
    eps1 = (1.0 - 1.0 / math.sqrt(2.0)) * eps

    def gap(u):  # d2 at R = 1 + e^u, minus the target
        delta = math.exp(u)
        R = 1.0 + delta
        val = 4.0 * R ** (2.0 * k) * delta ** (1.0 - k) * (R + 1.0) ** (-k)
        return val - eps1

    u_lo = -744.0  # e^u at the smallest normal-double scale
    if gap(u_lo) >= 0.0:
        return math.inf
    u_hi = 0.0
    while gap(u_hi) < 0.0:
        u_hi += 2.0
    for _ in range(200):
        if u_hi - u_lo < 1e-13:
            break
        mid = 0.5 * (u_lo + u_hi)
        if gap(mid) < 0.0:
            u_lo = mid
        else:
            u_hi = mid
    return 2.0 * math.pi * eps / math.log1p(math.exp(0.5 * (u_lo + u_hi)))


def min_angular_derivative_bound(k: float, n_grid: int = 601,
                                 eps_lo: float = 1e-3, eps_hi: float = 1e3) -> tuple[float, float]:
    """Minimum of Mcal(., k) over a log grid; returns (min value, argmin eps)."""
    import numpy as np

    grid = np.geomspace(eps_lo, eps_hi, n_grid)
    vals = [angular_derivative_bound(e, k) for e in grid]
    i = int(np.argmin(vals))
    return vals[i], float(grid[i])


@dataclass(frozen=True)
class ConstantsTable:
    """Every explicit constant of the construction evaluated at one q."""

    q: float
    k: float
    k_prime: float
    K: float
    K_prime: float
    t_star: float
    t0: float
    M: float
    M1: float
    M2: float
    M5: float
    M6: float
    alpha: float
    subharmonic_a: float
    rho1: float
    rho2: float
    kappa_star: float
    eps0: float

    def as_dict(self) -> dict:
        return asdict(self)


def explicit_constants(q: float) -> ConstantsTable:
    """Evaluate the full table at q; domain (0, 1/3)."""
    q = _check_q(q)
    k = 3.0 * q
    t_star, t0 = core_times(q)
    K = (1.0 + k) / (1.0 - k)
    return ConstantsTable(
        q=q,
        k=k,
        k_prime=2.0 * k / (1.0 + k * k),
        K=K,
        K_prime=K * K,
        t_star=t_star,
        t0=t0,
        M=second_derivative_coefficient(q),
        M1=laplacian_coefficient(q),
        M2=front_distance_coefficient(q),
        M5=curvature_coefficients(q)[0],
        M6=curvature_coefficients(q)[1],
        alpha=henkin_alpha(k),
        subharmonic_a=subharmonic_exponent(q),
        rho1=convexity_radius(q),
        rho2=clearance_radius(q),
        kappa_star=tangent_disk_curvature(q),
        eps0=tangent_disk_radius(q),
    )


def freeze_hash() -> str:
    """Hash of the constants table at a reference q; guards the frozen formulas."""
    import hashlib

    ref = explicit_constants(0.1)
    payload = ",".join(f"{key}={value:.17g}" for key, value in sorted(ref.as_dict().items()))
    return hashlib.sha256(payload.encode()).hexdigest()[:16]
