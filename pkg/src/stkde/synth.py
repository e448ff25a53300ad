"""Synthetic land use and space-time incident processes."""
from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from .domain import GridSpec2D, Incident, LandUse, LandUseGrid, StkdeError, TimeWindow, ValidationError
from .significance import sample_uniform_points


class SynthesisError(StkdeError):
    """Rejection sampling could not place a cluster event."""


def generate_landuse(n_cols: int, n_rows: int, eligible_fraction: float, seed: int, *,
                     cell_size: float = 100.0, x_origin: float = 0.0, y_origin: float = 0.0,
                     margin: int = 0) -> LandUseGrid:
    """Rectangular study area (inset by ``margin`` cells) with a uniformly
    chosen subset of ELIGIBLE cells."""
    if not 0 < eligible_fraction <= 1:
        raise ValidationError("eligible_fraction must lie in (0, 1]")
    if 2 * margin >= min(n_cols, n_rows):
        raise ValidationError("margin leaves no study area")
    spec = GridSpec2D(x_origin, y_origin, cell_size, n_cols, n_rows)
    classes = np.full(spec.shape, LandUse.OUTSIDE, dtype=np.int8)
    study = (slice(margin, n_cols - margin), slice(margin, n_rows - margin))
    classes[study] = LandUse.IN_STUDY_NON_ELIGIBLE
    ci, cj = np.nonzero(classes == LandUse.IN_STUDY_NON_ELIGIBLE)
    n_eligible = int(np.floor(eligible_fraction * len(ci) + 0.5))
    if n_eligible < 1:
        raise ValidationError("eligible_fraction yields zero eligible cells")
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0x1A4D]))
    pick = rng.choice(len(ci), size=n_eligible, replace=False)
    classes[ci[pick], cj[pick]] = LandUse.ELIGIBLE
    return LandUseGrid(spec, classes)


@dataclass(frozen=True)
class Cluster:
    """Events scattered around a moving centre.

    ``waypoints`` is a sequence of ``(t, x, y)``; the centre moves linearly
    between them and stays put outside their time range.
    """

    waypoints: Tuple[Tuple[float, float, float], ...]
    spread: float
    extent: TimeWindow
    count: int

    def __post_init__(self):
        if not self.waypoints:
            raise ValidationError("cluster needs at least one waypoint")
        if self.spread <= 0 or self.count < 0:
            raise ValidationError("cluster spread must be positive and count non-negative")
        times = [w[0] for w in self.waypoints]
        if any(b < a for a, b in zip(times, times[1:])):
            raise ValidationError("cluster waypoints must be ordered in time")

    def center(self, t):
        wp = np.asarray(self.waypoints, dtype=float).reshape(-1, 3)
        return np.interp(t, wp[:, 0], wp[:, 1]), np.interp(t, wp[:, 0], wp[:, 2])


@dataclass(frozen=True)
class SynthProcessSpec:
    background_rate: float
    clusters: Tuple[Cluster, ...] = ()
    master_seed: int = 0

    def __post_init__(self):
        if self.background_rate < 0:
            raise ValidationError("background_rate must be non-negative")


MAX_TRIES = 10_000


def _cluster_points(rng: np.random.Generator, index: int, cluster: Cluster, land_use: LandUseGrid,
                    window: TimeWindow) -> np.ndarray:
    lo = max(cluster.extent.start, window.start)
    hi = min(cluster.extent.end, window.end)
    if cluster.count == 0:
        return np.zeros((0, 3))
    if hi <= lo:
        raise ValidationError(f"cluster {index} is active outside the generation window")
    spec = land_use.spec
    t = np.minimum(lo + rng.random(cluster.count) * (hi - lo), np.nextafter(hi, -np.inf))
    cx, cy = cluster.center(t)
    out = np.empty((cluster.count, 3))
    out[:, 2] = t
    todo = np.arange(cluster.count)
    for _ in range(MAX_TRIES):
        x = cx[todo] + rng.normal(0.0, cluster.spread, len(todo))
        y = cy[todo] + rng.normal(0.0, cluster.spread, len(todo))
        i, j, inside = spec.cell_of(x, y)
        ok = inside.copy()
        ok[inside] = land_use.eligible[i[inside], j[inside]]
        out[todo[ok], 0] = x[ok]
        out[todo[ok], 1] = y[ok]
        todo = todo[~ok]
        if len(todo) == 0:
            return out
    raise SynthesisError(f"cluster {index}: could not place {len(todo)} events on eligible cells "
                         f"after {MAX_TRIES} tries")


def generate_incidents(spec: SynthProcessSpec, land_use: LandUseGrid, window: TimeWindow) -> List[Incident]:
    """Poisson background over ELIGIBLE cells plus the configured clusters,
    sorted by time with sequential ids."""
    rng = np.random.default_rng(np.random.SeedSequence([int(spec.master_seed), 0x5E7]))
    parts = []
    n_bg = int(rng.poisson(spec.background_rate * window.length))
    if n_bg:
        parts.append(sample_uniform_points(rng, n_bg, land_use, window))
    for c, cluster in enumerate(spec.clusters):
        parts.append(_cluster_points(rng, c, cluster, land_use, window))
    pts = np.concatenate(parts) if parts else np.zeros((0, 3))
    pts = pts[np.lexsort((pts[:, 1], pts[:, 0], pts[:, 2]))]
    return [Incident(f"ev{k:06d}", float(x), float(y), float(t)) for k, (x, y, t) in enumerate(pts)]


@dataclass(frozen=True)
class Scenario:
    """A ready-made dataset layout mirroring the case-study calendar."""

    land_use: LandUseGrid
    process: SynthProcessSpec
    window: TimeWindow
    epoch: dt.date
    first_forecast_start: float
    incidents: List[Incident] = field(repr=False, default_factory=list)


EPOCH = dt.date(2011, 1, 1)
NOV_1 = float((dt.date(2011, 11, 1) - EPOCH).days)


def drifting_cluster_scenario(seed: int, *, n_cols: int = 60, n_rows: int = 60, cell_size: float = 100.0,
                              eligible_fraction: float = 0.7, background_rate: float = 2.0,
                              cluster_rate: float = 1.5, speed: float = 40.0, spread: float = 150.0,
                              n_clusters: int = 3) -> Scenario:
    """One calendar year with a uniform background and ``n_clusters`` hotspots
    that wander across the study area for the whole year.

    Each cluster moves ``speed`` metres per day and reflects off the study
    area edges, so its position a month ago is several bandwidths away from
    its position today.
    """
    land_use = generate_landuse(n_cols, n_rows, eligible_fraction, seed, cell_size=cell_size)
    window = TimeWindow(0.0, 365.0)
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0xD21F7]))
    width, height = n_cols * cell_size, n_rows * cell_size
    pad = 3 * spread
    clusters = []
    for _ in range(n_clusters):
        x, y = rng.uniform(pad, width - pad), rng.uniform(pad, height - pad)
        heading = rng.uniform(0, 2 * np.pi)
        vx, vy = speed * np.cos(heading), speed * np.sin(heading)
        waypoints = []
        for day in range(0, 366, 5):
            waypoints.append((float(day), float(x), float(y)))
            x, y = x + 5 * vx, y + 5 * vy
            if not pad <= x <= width - pad:
                vx = -vx
                x = min(max(x, pad), width - pad)
            if not pad <= y <= height - pad:
                vy = -vy
                y = min(max(y, pad), height - pad)
        count = int(rng.poisson(cluster_rate * window.length))
        clusters.append(Cluster(tuple(waypoints), spread, window, count))
    process = SynthProcessSpec(background_rate, tuple(clusters), master_seed=seed)
    incidents = generate_incidents(process, land_use, window)
    return Scenario(land_use, process, window, EPOCH, NOV_1, incidents)


def uniform_scenario(seed: int, *, n_cols: int = 50, n_rows: int = 50, cell_size: float = 100.0,
                     eligible_fraction: float = 1.0, background_rate: float = 5.0) -> Scenario:
    land_use = generate_landuse(n_cols, n_rows, eligible_fraction, seed, cell_size=cell_size)
    window = TimeWindow(0.0, 365.0)
    process = SynthProcessSpec(background_rate, (), master_seed=seed)
    return Scenario(land_use, process, window, EPOCH, NOV_1, generate_incidents(process, land_use, window))
