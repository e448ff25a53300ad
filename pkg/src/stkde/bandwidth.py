"""Likelihood cross-validation for the three product-kernel bandwidths."""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
from numba import njit
from scipy.optimize import minimize

from .domain import Bandwidths, IncidentsLike, StkdeError, ValidationError, as_points
from .kernels import KernelId, univariate

log = logging.getLogger(__name__)

NEG_INF = float("-inf")


class BandwidthSearchError(StkdeError):
    """Every candidate bandwidth produced a zero leave-one-out density."""


@dataclass(frozen=True)
class BandwidthSearchConfig:
    lower: Tuple[float, float, float]
    upper: Tuple[float, float, float]
    lattice: Tuple[int, int, int] = (12, 12, 12)
    refine_iterations: int = 200
    tolerance: float = 1e-6
    starts: int = 3

    def __post_init__(self):
        if len(self.lower) != 3 or len(self.upper) != 3 or len(self.lattice) != 3:
            raise ValidationError("bounds and lattice need one entry per axis")
        for lo, hi in zip(self.lower, self.upper):
            if not (0 < lo < hi and math.isfinite(hi)):
                raise ValidationError(f"invalid search bounds [{lo}, {hi}]")
        if min(self.lattice) < 2:
            raise ValidationError("lattice needs at least 2 points per axis")
        if self.refine_iterations < 0 or self.starts < 1:
            raise ValidationError("refine_iterations must be >= 0 and starts >= 1")

    @classmethod
    def default_for(cls, incidents: IncidentsLike, cell_size: float, t_bin: float,
                    training_length: Optional[float] = None, **kwargs) -> "BandwidthSearchConfig":
        """Spatial bounds [cell, extent / 2]; temporal bounds [t_bin, window / 2]."""
        pts = as_points(incidents)
        if len(pts) < 2:
            raise ValidationError("need at least two incidents to size the search")
        span = pts.max(axis=0) - pts.min(axis=0)
        if training_length is None:
            training_length = span[2]
        upper = (max(span[0] / 2, 2 * cell_size), max(span[1] / 2, 2 * cell_size),
                 max(training_length / 2, 2 * t_bin))
        return cls(lower=(cell_size, cell_size, t_bin), upper=upper, **kwargs)

    def axis_lattice(self, axis: int) -> np.ndarray:
        return np.geomspace(self.lower[axis], self.upper[axis], self.lattice[axis])


@dataclass
class BandwidthResult:
    bw: Bandwidths
    log_likelihood: float
    evaluations: int
    trace: List[Tuple[Bandwidths, float]] = field(repr=False)


def _check_n(pts: np.ndarray) -> int:
    n = len(pts)
    if n < 2:
        raise ValidationError("leave-one-out estimate needs at least two incidents")
    return n


@njit(cache=True)
def _loo_sums(pts, hx, hy, ht):
    # pts sorted by t: for each i, only j with t_j - t_i < ht can overlap
    n = pts.shape[0]
    s = np.zeros(n)
    for i in range(n):
        xi = pts[i, 0]
        yi = pts[i, 1]
        ti = pts[i, 2]
        for j in range(i + 1, n):
            ut = (pts[j, 2] - ti) / ht
            if ut >= 1.0:
                break
            ux = (xi - pts[j, 0]) / hx
            if ux >= 1.0 or ux <= -1.0:
                continue
            uy = (yi - pts[j, 1]) / hy
            if uy >= 1.0 or uy <= -1.0:
                continue
            w = (0.75 * (1.0 - ux * ux)) * (0.75 * (1.0 - uy * uy)) * (0.75 * (1.0 - ut * ut))
            s[i] += w
            s[j] += w
    return s


def loo_densities(incidents: IncidentsLike, bw: Bandwidths,
                  kernel: KernelId = KernelId.EPANECHNIKOV) -> np.ndarray:
    """Leave-one-out density at every incident, in canonical incident order."""
    if KernelId(kernel) is not KernelId.EPANECHNIKOV:
        raise ValidationError(f"no leave-one-out sweep for kernel {kernel}")
    pts = as_points(incidents)
    n = _check_n(pts)
    s = _loo_sums(pts, float(bw.h_x), float(bw.h_y), float(bw.h_t))
    return s / ((n - 1) * bw.h_x * bw.h_y * bw.h_t)


def loo_density(incidents: IncidentsLike, i: int, bw: Bandwidths,
                kernel: KernelId = KernelId.EPANECHNIKOV) -> float:
    """Density at incident ``i`` (input order) estimated from all the others."""
    pts = np.asarray(incidents if isinstance(incidents, np.ndarray)
                     else [(p.x, p.y, p.t) for p in incidents], dtype=float).reshape(-1, 3)
    n = _check_n(pts)
    if not 0 <= i < n:
        raise IndexError(f"incident index {i} out of range for {n} incidents")
    others = as_points(np.delete(pts, i, axis=0))
    k = univariate(kernel)
    x, y, t = pts[i]
    w = k((x - others[:, 0]) / bw.h_x) * k((y - others[:, 1]) / bw.h_y) * k((t - others[:, 2]) / bw.h_t)
    return float(np.cumsum(w)[-1] / ((n - 1) * bw.h_x * bw.h_y * bw.h_t))


def loo_log_likelihood(incidents: IncidentsLike, bw: Bandwidths,
                       kernel: KernelId = KernelId.EPANECHNIKOV) -> float:
    """Sum of log leave-one-out densities; ``-inf`` if any of them is zero."""
    f = loo_densities(incidents, bw, kernel)
    if np.any(f <= 0):
        return NEG_INF
    return float(np.log(f).sum())


def _duplicate_fraction(pts: np.ndarray) -> float:
    _, counts = np.unique(pts, axis=0, return_counts=True)
    return float((counts[counts > 1]).sum()) / len(pts)


def optimize_bandwidths(incidents: IncidentsLike, config: BandwidthSearchConfig,
                        kernel: KernelId = KernelId.EPANECHNIKOV) -> BandwidthResult:
    """Maximise the leave-one-out log-likelihood.

    An exhaustive log-spaced lattice is evaluated first; Nelder-Mead in
    log-bandwidth space then refines from the best few lattice points.
    The returned bandwidths are never worse than any lattice point.
    """
    pts = as_points(incidents)
    _check_n(pts)
    dup = _duplicate_fraction(pts)
    if dup > 0.10:
        warnings.warn(f"{dup:.1%} of incidents share coordinates with another incident", stacklevel=2)

    cache: Dict[Tuple[float, float, float], float] = {}
    trace: List[Tuple[Bandwidths, float]] = []

    def objective(h) -> float:
        key = tuple(float(v) for v in h)
        if key not in cache:
            bw = Bandwidths(*key)
            value = loo_log_likelihood(pts, bw, kernel)
            cache[key] = value
            trace.append((bw, value))
        return cache[key]

    axes = [config.axis_lattice(a) for a in range(3)]
    for hx in axes[0]:
        for hy in axes[1]:
            for ht in axes[2]:
                objective((hx, hy, ht))

    ranked = sorted(((v, i) for i, (_, v) in enumerate(trace) if v > NEG_INF), reverse=True)
    if not ranked:
        raise BandwidthSearchError("leave-one-out likelihood is zero on the whole lattice; widen the search bounds")
    log.debug("lattice best ln L = %.6f", ranked[0][0])

    lo = np.log(config.lower)
    hi = np.log(config.upper)
    if config.refine_iterations > 0:
        for _, idx in ranked[:config.starts]:
            start = np.log(trace[idx][0].as_tuple())
            fatol = config.tolerance * max(1.0, abs(trace[idx][1]))

            def neg(logh):
                logh = np.clip(logh, lo, hi)
                v = objective(np.exp(logh))
                return math.inf if v == NEG_INF else -v

            minimize(neg, start, method="Nelder-Mead", bounds=list(zip(lo, hi)),
                     options={"maxiter": config.refine_iterations, "xatol": 1e-5, "fatol": fatol})

    best_bw, best = max(trace, key=lambda item: item[1])
    return BandwidthResult(best_bw, best, len(trace), trace)
