"""Plane-geometry helpers for sampled closed curves (complex points)."""

from __future__ import annotations

import numpy as np


def winding_number(points, curve) -> np.ndarray:
    """Winding number of a sampled closed curve around each query point.

    Uses the summed argument increments of curve[j+1]-p over curve[j]-p;
    exact for points off the polygon.
    """
    points = np.atleast_1d(np.asarray(points, complex))
    curve = np.asarray(curve, complex)
    d = curve[None, :] - points[:, None]
    ratio = np.roll(d, -1, axis=1) / d
    total = np.angle(ratio).sum(axis=1) / (2.0 * np.pi)
    return np.rint(total).astype(int)


def polygon_is_simple(curve, tol: float = 0.0) -> bool:
    """True when no two non-adjacent edges of the closed polygon intersect."""
    pts = np.asarray(curve, complex)
    n = pts.size
    a = pts
    b = np.roll(pts, -1)
    # orientation of point r relative to segment (p, q)
    def orient(p, q, r):
        return np.sign(np.imag(np.conj(q - p) * (r - p)))

    i_idx, j_idx = np.triu_indices(n, k=2)
    # drop the wrap-around adjacency (first and last edge share a vertex)
    keep = ~((i_idx == 0) & (j_idx == n - 1))
    i_idx, j_idx = i_idx[keep], j_idx[keep]
    p, q = a[i_idx], b[i_idx]
    r, s = a[j_idx], b[j_idx]
    cross1 = orient(p, q, r) * orient(p, q, s)
    cross2 = orient(r, s, p) * orient(r, s, q)
    return not bool(np.any((cross1 < 0) & (cross2 < 0)))


def point_to_polyline_distance(points, curve) -> np.ndarray:
    """Distance from each point to a densely sampled closed curve (vertex metric)."""
    points = np.atleast_1d(np.asarray(points, complex))
    curve = np.asarray(curve, complex)
    return np.abs(points[:, None] - curve[None, :]).min(axis=1)


def point_to_polygon_distance(points, polygon) -> np.ndarray:
    """Exact distance from each point to the closed polygon (segment metric)."""
    points = np.atleast_1d(np.asarray(points, complex))
    a = np.asarray(polygon, complex)
    b = np.roll(a, -1)
    seg = b - a
    seg_len2 = np.abs(seg) ** 2
    d = points[:, None] - a[None, :]
    t = np.clip((d * np.conj(seg[None, :])).real / seg_len2[None, :], 0.0, 1.0)
    proj = a[None, :] + t * seg[None, :]
    return np.abs(points[:, None] - proj).min(axis=1)


def hausdorff_star(curve_a, curve_b) -> float:
    """max(sup_a dist(a, B), sup_b dist(b, A)) with segment-exact distances."""
    da = point_to_polygon_distance(curve_a, curve_b).max()
    db = point_to_polygon_distance(curve_b, curve_a).max()
    return float(max(da, db))


def polygon_min_distance(curve_a, curve_b) -> float:
    """min distance between two sampled closed curves (segment metric one way)."""
    da = point_to_polygon_distance(curve_a, curve_b).min()
    db = point_to_polygon_distance(curve_b, curve_a).min()
    return float(min(da, db))


def curve_diameter(curve) -> float:
    """Diameter of the sampled curve (exact on the samples)."""
    pts = np.asarray(curve, complex)
    # hull-free O(n^2) is fine at the sample counts used here
    return float(np.abs(pts[:, None] - pts[None, :]).max())


def discrete_curvature(w: np.ndarray, w1: np.ndarray, w2: np.ndarray) -> np.ndarray:
    """Signed curvature from parametric derivatives: Im(conj(w') w'')/|w'|^3."""
    return np.imag(np.conj(w1) * w2) / np.abs(w1) ** 3


def spectral_derivative(samples: np.ndarray, order: int = 1) -> np.ndarray:
    """Derivative of 2pi-periodic samples via FFT."""
    samples = np.asarray(samples)
    n = samples.size
    k = np.fft.fftfreq(n, d=1.0 / n)
    if n % 2 == 0 and order % 2 == 1:
        k = k.copy()
        k[n // 2] = 0.0  # odd derivatives kill the unmatched Nyquist mode
    mult = (1j * k) ** order
    out = np.fft.ifft(np.fft.fft(samples) * mult)
    return out if np.iscomplexobj(samples) else out.real
