"""Monte-Carlo significance of density rasters against a uniform null.

Null incidents are uniform over ELIGIBLE land-use cells and uniform in time
over a window.  Each replicate draws from its own generator seeded by
``(master_seed, replicate)``, so ensembles do not depend on how replicates
are spread across worker processes.
"""
from __future__ import annotations

import functools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, List, Sequence, Tuple, Union

import numpy as np

from .domain import (
    Bandwidths,
    DensitySurface,
    DensityVolume,
    GridSpec3D,
    Incident,
    LandUseGrid,
    TimeWindow,
    ValidationError,
)
from .kernels import KernelId

Seed = Union[int, Sequence[int]]


def replicate_rng(master_seed: Seed, replicate: int) -> np.random.Generator:
    entropy = [int(master_seed)] if np.isscalar(master_seed) else [int(s) for s in master_seed]
    return np.random.default_rng(np.random.SeedSequence(entropy + [int(replicate)]))


def sample_uniform_points(rng: np.random.Generator, n: int, land_use: LandUseGrid,
                          window: TimeWindow) -> np.ndarray:
    """``(n, 3)`` points uniform over ELIGIBLE cells and the time window."""
    if n < 1:
        raise ValidationError("null sample size must be at least 1")
    ci, cj = np.nonzero(land_use.eligible)
    if len(ci) == 0:
        raise ValidationError("land use has no ELIGIBLE cell")
    spec = land_use.spec
    pick = rng.integers(0, len(ci), size=n)
    off = rng.random((n, 2))
    x = spec.x_origin + (ci[pick] + off[:, 0]) * spec.cell_size
    y = spec.y_origin + (cj[pick] + off[:, 1]) * spec.cell_size
    t = window.start + rng.random(n) * window.length
    # guard against rounding onto the exclusive upper edges
    x = np.minimum(x, np.nextafter(spec.x_origin + (ci[pick] + 1) * spec.cell_size, -np.inf))
    y = np.minimum(y, np.nextafter(spec.y_origin + (cj[pick] + 1) * spec.cell_size, -np.inf))
    t = np.minimum(t, np.nextafter(window.end, -np.inf))
    return np.column_stack([x, y, t])


def simulate_null_incidents(n: int, land_use: LandUseGrid, window: TimeWindow, seed: Seed) -> List[Incident]:
    rng = replicate_rng(seed, 0)
    pts = sample_uniform_points(rng, n, land_use, window)
    return [Incident(f"null{k:06d}", float(x), float(y), float(t)) for k, (x, y, t) in enumerate(pts)]


@dataclass(frozen=True, eq=False)
class NullEnsemble:
    """Per-cell null samples, sorted ascending along the last axis."""

    samples: np.ndarray = field(repr=False)
    master_seed: Seed
    land_use: LandUseGrid = field(repr=False)

    def __post_init__(self):
        if self.samples.shape[-1] < 1:
            raise ValidationError("ensemble needs at least one replicate")

    @property
    def replicates(self) -> int:
        return self.samples.shape[-1]

    @property
    def raster_shape(self) -> Tuple[int, ...]:
        return self.samples.shape[:-1]


def _replicate_block(estimate: Callable[[np.ndarray], np.ndarray], n: int, land_use: LandUseGrid,
                     window: TimeWindow, master_seed: Seed, replicates: Sequence[int]) -> np.ndarray:
    out = []
    for r in replicates:
        pts = sample_uniform_points(replicate_rng(master_seed, r), n, land_use, window)
        out.append(estimate(pts))
    return np.stack(out, axis=-1)


def simulate_ensemble(estimate: Callable[[np.ndarray], np.ndarray], n: int, land_use: LandUseGrid,
                      window: TimeWindow, replicates: int, master_seed: Seed, workers: int = 1) -> NullEnsemble:
    """Null ensemble for an arbitrary raster estimator.

    ``estimate`` maps an ``(n, 3)`` point array to a raster; it must be
    picklable (a module-level function or ``functools.partial``) when
    ``workers > 1``.
    """
    if replicates < 1:
        raise ValidationError("replicate count must be at least 1")
    if workers <= 1 or replicates == 1:
        samples = _replicate_block(estimate, n, land_use, window, master_seed, range(replicates))
    else:
        chunks = np.array_split(np.arange(replicates), min(workers, replicates))
        job = functools.partial(_replicate_block, estimate, n, land_use, window, master_seed)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            samples = np.concatenate(list(pool.map(job, [c.tolist() for c in chunks])), axis=-1)
    samples.sort(axis=-1)
    return NullEnsemble(samples, master_seed, land_use)


def stkde_raster(pts: np.ndarray, spec: GridSpec3D, bw: Bandwidths, kernel: KernelId, level: str) -> np.ndarray:
    from .estimators import stkde_volume

    vol = stkde_volume(pts, spec, bw, kernel)
    return vol.values if level == "volume" else marginalize_time(vol).values


def build_null_ensemble(n: int, land_use: LandUseGrid, window: TimeWindow, spec: GridSpec3D,
                        bw: Bandwidths, kernel: KernelId = KernelId.EPANECHNIKOV, replicates: int = 1000,
                        master_seed: Seed = 0, level: str = "surface", workers: int = 1) -> NullEnsemble:
    """STKDE null ensemble at voxel (``level="volume"``) or aggregated-cell level."""
    if level not in ("surface", "volume"):
        raise ValidationError(f"unknown significance level {level!r}")
    if spec.spatial != land_use.spec:
        raise ValidationError("land use and density grid are not aligned")
    estimate = functools.partial(stkde_raster, spec=spec, bw=bw, kernel=kernel, level=level)
    return simulate_ensemble(estimate, n, land_use, window, replicates, master_seed, workers)


@dataclass(frozen=True, eq=False)
class SignificanceResult:
    p_values: np.ndarray
    alpha: float
    significant_mask: np.ndarray
    critical: np.ndarray


def critical_rank(replicates: int, alpha: float) -> int:
    """1-based order statistic used as the (1 - alpha) null quantile."""
    return max(1, math.ceil(round((1.0 - alpha) * replicates, 9)))


def classify_significance(observed: Union[DensityVolume, DensitySurface, np.ndarray], ensemble: NullEnsemble,
                          alpha: float = 0.05) -> SignificanceResult:
    """Flag cells whose value strictly exceeds the null (1 - alpha) quantile.

    The quantile is the ``ceil((1 - alpha) R)``-th smallest null sample.  The
    reported p-value is ``(1 + #{null >= observed}) / (R + 1)``.
    """
    if not 0 < alpha <= 0.5:
        raise ValidationError("alpha must lie in (0, 0.5]")
    values = observed if isinstance(observed, np.ndarray) else observed.values
    if values.shape != ensemble.raster_shape:
        raise ValidationError(f"observed raster {values.shape} not aligned with ensemble {ensemble.raster_shape}")
    R = ensemble.replicates
    at_least = (ensemble.samples >= values[..., None]).sum(axis=-1)
    p = (1.0 + at_least) / (R + 1.0)
    critical = ensemble.samples[..., critical_rank(R, alpha) - 1]
    return SignificanceResult(p, alpha, values > critical, critical)


def marginalize_time(volume: DensityVolume) -> DensitySurface:
    """Integrate the volume over its time axis (units become 1 / m^2)."""
    return DensitySurface(volume.spec.spatial, volume.values.sum(axis=2) * volume.spec.t_bin)
