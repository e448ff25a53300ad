"""Kernel functions with compact support on [-1, 1]."""
from __future__ import annotations

import enum

import numpy as np

from .domain import Bandwidths


class KernelId(enum.Enum):
    EPANECHNIKOV = "epanechnikov"


def epanechnikov(u):
    """k(u) = 0.75 (1 - u^2) on |u| <= 1, zero elsewhere."""
    u = np.asarray(u, dtype=float)
    w = np.where(np.abs(u) <= 1.0, 0.75 * (1.0 - u * u), 0.0)
    return w if w.ndim else float(w)


def epanechnikov_radial(u, v):
    """Radially symmetric bivariate Epanechnikov, normalised to unit mass."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    r2 = u * u + v * v
    w = np.where(r2 <= 1.0, (2.0 / np.pi) * (1.0 - r2), 0.0)
    return w if w.ndim else float(w)


_UNIVARIATE = {KernelId.EPANECHNIKOV: epanechnikov}
_RADIAL = {KernelId.EPANECHNIKOV: epanechnikov_radial}


def univariate(kernel: KernelId = KernelId.EPANECHNIKOV):
    return _UNIVARIATE[KernelId(kernel)]


def radial(kernel: KernelId = KernelId.EPANECHNIKOV):
    return _RADIAL[KernelId(kernel)]


def product_kernel_weight(dx, dy, dt, bw: Bandwidths, kernel: KernelId = KernelId.EPANECHNIKOV):
    """Scaled product-kernel weight in units of 1 / (m^2 day).

    The multiplication order ``(kx * ky) * kt`` followed by division by
    ``h_x h_y h_t`` is relied on by the grid estimators for bit-identical
    results, so keep it in sync with ``estimators._stkde_accumulate``.
    """
    k = univariate(kernel)
    norm = bw.h_x * bw.h_y * bw.h_t
    return k(np.asarray(dx, dtype=float) / bw.h_x) * k(np.asarray(dy, dtype=float) / bw.h_y) \
        * k(np.asarray(dt, dtype=float) / bw.h_t) / norm
