"""Density estimators evaluated at points and over grids.

All grid estimators scatter each incident's contribution into the cells
covered by its kernel support, visiting incidents in canonical order.  A
cell therefore receives exactly the non-zero terms of the naive sum, in the
same order, and the result is bit-identical to evaluating every cell
against every incident.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .domain import (
    Bandwidths,
    DensitySurface,
    DensityVolume,
    EmptyDataError,
    GridSpec2D,
    GridSpec3D,
    IncidentsLike,
    ValidationError,
    as_points,
)
from .kernels import KernelId, radial, univariate

#: Two mean Gregorian months, in days.
TWO_MONTHS_DAYS = 60.875


@dataclass(frozen=True)
class PromapParams:
    h_s: float = 400.0
    h_t: float = TWO_MONTHS_DAYS
    d_unit: Optional[float] = None  # None -> the grid cell size
    t_unit: float = 7.0

    def __post_init__(self):
        for name in ("h_s", "h_t", "t_unit"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"PromapParams.{name} must be positive")
        if self.d_unit is not None and not self.d_unit > 0:
            raise ValidationError("PromapParams.d_unit must be positive")


def _require(points: np.ndarray) -> int:
    n = len(points)
    if n == 0:
        raise EmptyDataError("density estimate needs at least one incident")
    return n


def _index_range(center: float, radius: float, origin: float, step: float, count: int) -> Tuple[int, int]:
    # generous by one cell on each side; the kernel zeroes anything outside its support
    lo = math.floor((center - radius - origin) / step - 0.5)
    hi = math.ceil((center + radius - origin) / step - 0.5) + 1
    return max(lo, 0), min(hi, count)


def stkde_at_point(incidents: IncidentsLike, q: Sequence[float], bw: Bandwidths,
                   kernel: KernelId = KernelId.EPANECHNIKOV) -> float:
    """Product-kernel density at ``q = (x, y, t)``.

    The sum runs sequentially over incidents in canonical order.
    """
    pts = as_points(incidents)
    n = _require(pts)
    k = univariate(kernel)
    x, y, t = q
    norm = bw.h_x * bw.h_y * bw.h_t
    w = k((x - pts[:, 0]) / bw.h_x) * k((y - pts[:, 1]) / bw.h_y) * k((t - pts[:, 2]) / bw.h_t) / norm
    return float(np.cumsum(w)[-1] / n)


def _stkde_accumulate(pts: np.ndarray, spec: GridSpec3D, bw: Bandwidths, kernel: KernelId) -> np.ndarray:
    k = univariate(kernel)
    xc, yc, tc = spec.spatial.x_centers, spec.spatial.y_centers, spec.t_centers
    norm = bw.h_x * bw.h_y * bw.h_t
    acc = np.zeros(spec.shape)
    for X, Y, T in pts:
        i0, i1 = _index_range(X, bw.h_x, spec.x_origin, spec.cell_size, spec.n_cols)
        j0, j1 = _index_range(Y, bw.h_y, spec.y_origin, spec.cell_size, spec.n_rows)
        k0, k1 = _index_range(T, bw.h_t, spec.t_start, spec.t_bin, spec.n_bins)
        if i0 >= i1 or j0 >= j1 or k0 >= k1:
            continue
        kx = k((xc[i0:i1] - X) / bw.h_x)
        ky = k((yc[j0:j1] - Y) / bw.h_y)
        kt = k((tc[k0:k1] - T) / bw.h_t)
        acc[i0:i1, j0:j1, k0:k1] += kx[:, None, None] * ky[None, :, None] * kt[None, None, :] / norm
    return acc


def stkde_volume(incidents: IncidentsLike, spec: GridSpec3D, bw: Bandwidths,
                 kernel: KernelId = KernelId.EPANECHNIKOV) -> DensityVolume:
    """Product-kernel density at every voxel centroid."""
    pts = as_points(incidents)
    n = _require(pts)
    return DensityVolume(spec, _stkde_accumulate(pts, spec, bw, kernel) / n)


def stkde_surface(incidents: IncidentsLike, spec: GridSpec3D, bw: Bandwidths,
                  kernel: KernelId = KernelId.EPANECHNIKOV) -> DensitySurface:
    """Time-integrated planar surface of the volume over ``spec``'s time span."""
    from .significance import marginalize_time

    return marginalize_time(stkde_volume(incidents, spec, bw, kernel))


def skde_at_point(incidents: IncidentsLike, q: Sequence[float], h_s: float,
                  kernel: KernelId = KernelId.EPANECHNIKOV) -> float:
    pts = as_points(incidents)
    n = _require(pts)
    K = radial(kernel)
    w = K((q[0] - pts[:, 0]) / h_s, (q[1] - pts[:, 1]) / h_s) / (h_s * h_s)
    return float(np.cumsum(w)[-1] / n)


def skde_surface(incidents: IncidentsLike, spec: GridSpec2D, h_s: float,
                 kernel: KernelId = KernelId.EPANECHNIKOV) -> DensitySurface:
    """Planar KDE with a radially symmetric kernel; timestamps are ignored."""
    if not h_s > 0:
        raise ValidationError("h_s must be positive")
    pts = as_points(incidents)
    n = _require(pts)
    K = radial(kernel)
    xc, yc = spec.x_centers, spec.y_centers
    norm = h_s * h_s
    acc = np.zeros(spec.shape)
    for X, Y, _ in pts:
        i0, i1 = _index_range(X, h_s, spec.x_origin, spec.cell_size, spec.n_cols)
        j0, j1 = _index_range(Y, h_s, spec.y_origin, spec.cell_size, spec.n_rows)
        if i0 >= i1 or j0 >= j1:
            continue
        u = (xc[i0:i1] - X) / h_s
        v = (yc[j0:j1] - Y) / h_s
        acc[i0:i1, j0:j1] += K(u[:, None], v[None, :]) / norm
    return DensitySurface(spec, acc / n)


def promap_surface(incidents: IncidentsLike, spec: GridSpec2D, params: PromapParams,
                   t_ref: float) -> DensitySurface:
    """Prospective risk intensity: sum of 1 / ((1 + d)(1 + t)) within both radii.

    ``d`` is the planar distance in units of ``params.d_unit`` and ``t`` the
    age ``t_ref - T`` in units of ``params.t_unit``.  The result is not a
    probability density.
    """
    pts = as_points(incidents)
    if len(pts) and pts[:, 2].max() > t_ref:
        raise ValidationError(f"incident at t={pts[:, 2].max()} is later than t_ref={t_ref}")
    d_unit = spec.cell_size if params.d_unit is None else params.d_unit
    xc, yc = spec.x_centers, spec.y_centers
    acc = np.zeros(spec.shape)
    for X, Y, T in pts:
        age = t_ref - T
        if age > params.h_t:
            continue
        i0, i1 = _index_range(X, params.h_s, spec.x_origin, spec.cell_size, spec.n_cols)
        j0, j1 = _index_range(Y, params.h_s, spec.y_origin, spec.cell_size, spec.n_rows)
        if i0 >= i1 or j0 >= j1:
            continue
        dist = np.hypot((xc[i0:i1] - X)[:, None], (yc[j0:j1] - Y)[None, :])
        w = np.where(dist <= params.h_s, 1.0 / ((1.0 + dist / d_unit) * (1.0 + age / params.t_unit)), 0.0)
        acc[i0:i1, j0:j1] += w
    return DensitySurface(spec, acc)
