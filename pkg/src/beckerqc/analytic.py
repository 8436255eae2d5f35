"""Truncated series models of normalized univalent functions.

A function of class S is stored as the coefficients a_1..a_N of
f(z) = z + a_2 z^2 + ... + a_N z^N, with a_1 = 1.  Class-Sigma functions
g(z) = z + b_0 + b_1/z + ... live on the exterior of the unit circle.
Derivatives, pre-Schwarzian and Schwarzian are exact series algebra;
no finite differences are used anywhere in this module.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import DomainError, SingularityError, TruncationError

DEFAULT_ORDER = 64

_FAMILIES = ("identity", "moebius", "quadratic", "cubic", "koebe")


@dataclass(frozen=True)
class SchlichtFunction:
    """f(z) = sum_{n=1}^N a_n z^n with a_1 = 1, evaluated for |z| < 1."""

    coefficients: tuple
    label: str = ""

    def __post_init__(self):
        a = np.asarray(self.coefficients, dtype=complex)
        if a.ndim != 1 or a.size < 1:
            raise DomainError("need a nonempty 1-d coefficient sequence a_1..a_N")
        if abs(a[0] - 1.0) > 1e-14:
            raise DomainError(f"class-S normalization requires a_1 = 1, got {a[0]}")
        object.__setattr__(self, "coefficients", tuple(a.tolist()))

    @property
    def order(self) -> int:
        return len(self.coefficients)

    @property
    def a2(self) -> complex:
        return self.coefficients[1] if self.order >= 2 else 0.0 + 0.0j

    @cached_property
    def _poly(self):
        # c_0..c_N with c_0 = 0 and four derivative coefficient rows
        c = np.concatenate([[0.0 + 0.0j], np.asarray(self.coefficients, complex)])
        rows = [c]
        for _ in range(3):
            rows.append(npoly.polyder(rows[-1]))
        return rows

    def eval(self, z, order: int = 0):
        """Series value of f, f', f'' or f''' at points with |z| < 1."""
        if order not in (0, 1, 2, 3):
            raise DomainError(f"derivative order {order} unsupported (max 3)")
        z = np.asarray(z, dtype=complex)
        if np.any(np.abs(z) >= 1.0):
            raise DomainError("SchlichtFunction is only defined on |z| < 1")
        out = npoly.polyval(z, self._poly[order])
        return out if z.ndim else complex(out)

    def pre_schwarzian(self, z):
        """P_f = f''/f'."""
        fp = self.eval(z, 1)
        fpp = self.eval(z, 2)
        if np.any(np.abs(fp) < 1e-14):
            raise SingularityError("f'(z) vanished; input not univalent at this order")
        return fpp / fp

    def schwarzian(self, z):
        """S_f = f'''/f' - (3/2)(f''/f')^2, by exact series algebra."""
        fp = self.eval(z, 1)
        if np.any(np.abs(fp) < 1e-14):
            raise SingularityError("f'(z) vanished; input not univalent at this order")
        q = self.eval(z, 2) / fp
        return self.eval(z, 3) / fp - 1.5 * q * q

    def to_sigma(self, order: int | None = None) -> "SigmaFunction":
        """Laurent coefficients of g_0(z) = 1/f(1/z) through the given order.

        Always returns b_0 = -a_2 in the leading slot.
        """
        m = self.order if order is None else int(order)
        if m > self.order:
            raise DomainError("sigma order must not exceed the source order")
        h = np.zeros(m + 2, dtype=complex)
        avail = min(self.order, m + 2)
        h[:avail] = self.coefficients[:avail]  # h_j = a_{j+1}, h_0 = 1
        r = _reciprocal_series(h)
        return SigmaFunction(coefficients=tuple(r[1 : m + 2].tolist()), label=self.label)


def _reciprocal_series(h: np.ndarray) -> np.ndarray:
    """Coefficients of 1/h for a power series with h_0 = 1."""
    if abs(h[0]) < 1e-300:
        raise SingularityError("series reciprocal needs a nonzero leading coefficient")
    r = np.zeros_like(h)
    r[0] = 1.0 / h[0]
    for m in range(1, h.size):
        r[m] = -np.dot(h[1 : m + 1], r[m - 1 :: -1][: m]) / h[0]
    return r


def _divide_series(num: np.ndarray, den: np.ndarray, n: int) -> np.ndarray:
    """First n coefficients of num/den, den_0 != 0."""
    out = np.zeros(n, dtype=complex)
    num = np.concatenate([num, np.zeros(max(0, n - num.size), complex)])
    for m in range(n):
        acc = num[m]
        top = min(m, den.size - 1)
        if top >= 1:
            acc = acc - np.dot(den[1 : top + 1], out[m - 1 :: -1][:top])
        out[m] = acc / den[0]
    return out


@dataclass(frozen=True)
class SigmaFunction:
    """g(z) = z + b_0 + b_1/z + ... + b_M/z^M, evaluated for |z| >= 1."""

    coefficients: tuple  # b_0 .. b_M
    label: str = ""

    def __post_init__(self):
        b = np.asarray(self.coefficients, dtype=complex)
        if b.ndim != 1 or b.size < 1:
            raise DomainError("need a nonempty 1-d coefficient sequence b_0..b_M")
        object.__setattr__(self, "coefficients", tuple(b.tolist()))

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1

    @property
    def b(self) -> np.ndarray:
        return np.asarray(self.coefficients, dtype=complex)

    def eval(self, w, order: int = 0):
        """g, g' or g'' at points with |w| >= 1 (tail evaluated in u = 1/w)."""
        if order not in (0, 1, 2):
            raise DomainError(f"derivative order {order} unsupported (max 2)")
        w = np.asarray(w, dtype=complex)
        if np.any(np.abs(w) < 1.0 - 1e-12):
            raise DomainError("SigmaFunction is only defined on |w| >= 1")
        u = 1.0 / w
        b = self.b
        j = np.arange(b.size, dtype=float)
        if order == 0:
            return w + npoly.polyval(u, b)
        if order == 1:
            return 1.0 - u * u * npoly.polyval(u, j * b)
        return u ** 3 * npoly.polyval(u, j * (j + 1) * b)

    def pre_schwarzian(self, w):
        gp = self.eval(w, 1)
        if np.any(np.abs(gp) < 1e-14):
            raise SingularityError("g'(w) vanished on the evaluation set")
        return self.eval(w, 2) / gp

    @cached_property
    def tail_series(self) -> dict:
        """Power series in u = 1/w for g'(1/u), g''(1/u)*u^... and P_g(1/u).

        Used by the extension formulas to evaluate stably near the origin
        of the conjugate variable (u -> 0 <=> w -> infinity).
        """
        b = self.b
        j = np.arange(b.size, dtype=float)
        n = b.size + 2
        gp = np.zeros(n, dtype=complex)  # g'(1/u) = 1 - sum j b_j u^{j+1}
        gp[0] = 1.0
        gpp = np.zeros(n, dtype=complex)  # g''(1/u) = sum j(j+1) b_j u^{j+2}
        for jj in range(1, b.size):
            if jj + 1 < n:
                gp[jj + 1] = -jj * b[jj]
            if jj + 2 < n:
                gpp[jj + 2] = jj * (jj + 1) * b[jj]
        pre = _divide_series(gpp, gp, n)  # P_g(1/u) as a series in u (starts at u^3)
        return {"gp": gp, "pre": pre}

    def to_schlicht(self, order: int | None = None) -> SchlichtFunction:
        """Inverse substitution 1/g(1/zeta) back to a class-S series."""
        m = self.order + 1 if order is None else int(order)
        h = np.zeros(m + 1, dtype=complex)  # g(1/zeta)*zeta = 1 + b_0 zeta + ...
        h[0] = 1.0
        avail = min(self.b.size, m)
        h[1 : avail + 1] = self.b[:avail]
        r = _reciprocal_series(h)
        return SchlichtFunction(coefficients=tuple(r[:m].tolist()), label=self.label)


@dataclass(frozen=True)
class DiskGrid:
    """Deterministic sample grid on a disk, annulus or circle."""

    kind: str = "disk"
    r_outer: float = 0.999
    r_inner: float = 0.0
    n_radial: int = 64
    n_angular: int = 256

    def __post_init__(self):
        if self.kind not in ("disk", "annulus", "circle"):
            raise DomainError(f"unknown grid kind {self.kind!r}")
        if not (0.0 <= self.r_inner < self.r_outer):
            raise DomainError("need 0 <= r_inner < r_outer")
        if self.n_angular < 1 or (self.kind != "circle" and self.n_radial < 1):
            raise DomainError("grid sample counts must be positive")

    @cached_property
    def points(self) -> np.ndarray:
        theta = 2.0 * np.pi * np.arange(self.n_angular) / self.n_angular
        ring = np.exp(1j * theta)
        if self.kind == "circle":
            return self.r_outer * ring
        j = np.arange(1, self.n_radial + 1, dtype=float)
        radii = self.r_inner + (self.r_outer - self.r_inner) * j / (self.n_radial + 1)
        return (radii[:, None] * ring[None, :]).ravel()


def schwarzian_norm(f: SchlichtFunction, grid: DiskGrid | np.ndarray | None = None) -> float:
    """max over the grid of (1-|z|^2)^2 |S_f(z)|; divide by 6 for the q estimate."""
    if grid is None:
        grid = DiskGrid()
    pts = grid.points if isinstance(grid, DiskGrid) else np.asarray(grid, complex)
    if pts.size == 0:
        raise DomainError("schwarzian_norm needs a nonempty grid")
    if np.any(np.abs(pts) >= 1.0):
        raise DomainError("schwarzian_norm grid must stay strictly inside the disk")
    vals = (1.0 - np.abs(pts) ** 2) ** 2 * np.abs(f.schwarzian(pts))
    return float(vals.max())


def catalog(family: str, c: complex = 0.0, order: int = DEFAULT_ORDER) -> SchlichtFunction:
    """Built-in test families: identity, moebius z/(1-cz), z+cz^2, z+cz^3, koebe."""
    family = family.lower()
    if family not in _FAMILIES:
        raise DomainError(f"unknown family {family!r}; choose from {_FAMILIES}")
    n = max(int(order), 4)
    a = np.zeros(n, dtype=complex)
    a[0] = 1.0
    if family == "moebius":
        a[:] = np.asarray(c, complex) ** np.arange(n)
        label = f"moebius(c={c})"
    elif family == "quadratic":
        a[1] = c
        label = f"quadratic(c={c})"
    elif family == "cubic":
        a[2] = c
        label = f"cubic(c={c})"
    elif family == "koebe":
        a[:] = np.arange(1, n + 1)
        label = "koebe"
    else:
        label = "identity"
    return SchlichtFunction(coefficients=tuple(a.tolist()), label=label)


def truncation_certificate(family: str, c: complex, radius: float,
                           order: int = DEFAULT_ORDER, tol: float = 1e-9) -> float:
    """Certify that doubling the truncation order moves nothing at |z| <= radius.

    Returns the observed doubling defect; raises TruncationError above tol.
    """
    f1 = catalog(family, c, order)
    f2 = catalog(family, c, 2 * order)
    z = radius * np.exp(2j * np.pi * np.arange(64) / 64)
    defect = float(np.abs(f1.eval(z) - f2.eval(z)).max())
    if defect >= tol:
        raise TruncationError(
            f"truncation certificate failed for {family} at radius {radius}: "
            f"doubling order {order} moved values by {defect:.3e} >= {tol:.1e}")
    return defect
